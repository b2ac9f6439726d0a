//! Small statistics toolkit: streaming moments, jackknife, regression and KS distance.

use serde::{Deserialize, Serialize};

/// Welford accumulator.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Welford {
    pub count: u64,
    pub mean: f64,
    pub m2: f64,
}

impl Welford {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let d = x - self.mean;
        self.mean += d / self.count as f64;
        self.m2 += d * (x - self.mean);
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            return f64::NAN;
        }
        self.m2 / (self.count - 1) as f64
    }

    /// Standard error of the mean.
    pub fn se(&self) -> f64 {
        (self.variance() / self.count as f64).sqrt()
    }
}

impl FromIterator<f64> for Welford {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut w = Welford::default();
        iter.into_iter().for_each(|x| w.push(x));
        w
    }
}

/// An estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub se: f64,
    pub count: usize,
}

pub fn mean_se(xs: &[f64]) -> Estimate {
    let w: Welford = xs.iter().copied().collect();
    Estimate { value: w.mean, se: w.se(), count: xs.len() }
}

/// Delete-one jackknife estimate and standard error of `stat`.
pub fn jackknife(xs: &[f64], stat: impl Fn(&[f64]) -> f64) -> Estimate {
    let n = xs.len();
    let full = stat(xs);
    if n < 2 {
        return Estimate { value: full, se: f64::NAN, count: n };
    }
    let mut buf = Vec::with_capacity(n - 1);
    let leave: Vec<f64> = (0..n)
        .map(|i| {
            buf.clear();
            buf.extend(xs[..i].iter().chain(&xs[i + 1..]));
            stat(&buf)
        })
        .collect();
    let mean = leave.iter().sum::<f64>() / n as f64;
    let var = leave.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() * (n - 1) as f64 / n as f64;
    Estimate { value: full, se: var.sqrt(), count: n }
}

/// Least-squares slope and intercept of `y` on `x`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Kolmogorov–Smirnov distance between a sample and a continuous CDF.
pub fn ks_statistic(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

/// Asymptotic 1% critical value of the one-sample KS statistic.
pub fn ks_critical_1pct(n: usize) -> f64 {
    1.6276 / (n as f64).sqrt()
}

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}
