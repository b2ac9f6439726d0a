//! Lower bound on the time of gradient blow-up for smooth data.

use crate::error::Result;
use crate::thermo::{TensionTable, Thermo};

use super::profile::Profile;

const SUP_GRID: usize = 2001;

fn sup_on(lim: f64, g: impl Fn(f64) -> f64) -> f64 {
    (0..SUP_GRID).map(|k| g(-lim + 2.0 * lim * k as f64 / (SUP_GRID - 1) as f64)).fold(0.0, f64::max)
}

/// `T* = 4 / (A · B)` with `A = max_± |p₀'√f(r₀) ± r₀' f(r₀)|_∞` (both Riemann-invariant
/// families) and `B = sup_{|r| ≤ K} |f^{-5/4} f'|`, `K = |p₀|_∞ + |r₀|_∞ sup_{|r| ≤ |r₀|_∞} √f`.
/// Suprema over `r` are taken on a 2001-point grid; `+∞` when `A` or `B` vanishes.
pub fn shock_time_bound(initial: &Profile, f: impl Fn(f64) -> f64, df: impl Fn(f64) -> f64) -> f64 {
    let (dp, dr) = initial.derivative();
    let a = initial
        .r
        .iter()
        .zip(dp.iter().zip(&dr))
        .map(|(&r, (&p1, &r1))| {
            let fr = f(r);
            let s = fr.sqrt();
            (p1 * s + r1 * fr).abs().max((p1 * s - r1 * fr).abs())
        })
        .fold(0.0, f64::max);
    let pmax = initial.p.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let rmax = initial.r.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let smax = if rmax > 0.0 { sup_on(rmax, |r| f(r).sqrt()) } else { f(0.0).sqrt() };
    let k = pmax + rmax * smax;
    let b = sup_on(k, |r| (f(r).powf(-1.25) * df(r)).abs());
    if a == 0.0 || b == 0.0 {
        f64::INFINITY
    } else {
        4.0 / (a * b)
    }
}

/// [`shock_time_bound`] with `f = 𝔱'_σ`, tabulated over a range that covers `K`.
pub fn shock_time_bound_thermo(initial: &Profile, thermo: &Thermo) -> Result<f64> {
    if thermo.is_harmonic() {
        return Ok(f64::INFINITY);
    }
    let pmax = initial.p.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let rmax = initial.r.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let lim = pmax + rmax * 1.5 * (1.0 + thermo.sigma).sqrt() + 0.5;
    let table = TensionTable::new(thermo, -lim, lim, SUP_GRID)?;
    Ok(shock_time_bound(initial, |r| table.d1(r), |r| table.d2(r)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::Potential;
    use std::f64::consts::PI;

    fn wave(m: usize) -> Profile {
        Profile::from_fns(m, |x| 0.3 * (2.0 * PI * x).sin(), |x| 0.4 * (2.0 * PI * x).cos()).unwrap()
    }

    #[test]
    fn constant_speed_or_data_gives_infinity() {
        assert_eq!(shock_time_bound(&wave(64), |_| 2.0, |_| 0.0), f64::INFINITY);
        assert_eq!(shock_time_bound(&Profile::constant(64, 0.3, 0.2), |r| 1.0 + 0.1 * r.sin(), |r| 0.1 * r.cos()), f64::INFINITY);
    }

    #[test]
    fn closed_form_for_a_simple_speed() {
        // f = 1 + εr on small data: A and B are elementary.
        let eps = 0.1;
        let prof = Profile::from_fns(256, |_| 0.0, |x| 0.1 * (2.0 * PI * x).sin()).unwrap();
        let t = shock_time_bound(&prof, |r| 1.0 + eps * r, |_| eps);
        let a = (0..256).map(|j| {
            let x = j as f64 / 256.0;
            let r = 0.1 * (2.0 * PI * x).sin();
            (0.2 * PI * (2.0 * PI * x).cos() * (1.0 + eps * r)).abs()
        }).fold(0.0, f64::max);
        let k = 0.1 * (1.0 + eps * 0.1f64).sqrt();
        let b = eps * (1.0 - eps * k).powf(-1.25);
        assert!((t - 4.0 / (a * b)).abs() < 1e-6 * t);
    }

    #[test]
    fn bound_grows_as_anharmonicity_shrinks() {
        let prof = wave(128);
        let ts: Vec<f64> = [0.2, 0.1, 0.05]
            .iter()
            .map(|&s| shock_time_bound_thermo(&prof, &Thermo::new(Potential::OneMinusCosine, 1.0, s).unwrap()).unwrap())
            .collect();
        assert!(ts[0] < ts[1] && ts[1] < ts[2], "{ts:?}");
    }
}
