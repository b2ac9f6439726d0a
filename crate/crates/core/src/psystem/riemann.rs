//! Riemann invariants `u = p + F(r)`, `v = p - F(r)` with `F(s) = ∫₀^s √𝔱'`.

use crate::error::{Error, Result};
use crate::quadrature::adaptive_simpson;
use crate::thermo::{TensionTable, Thermo};

use super::profile::Profile;

const MAP_NODES: usize = 2001;

#[derive(Debug, Clone, PartialEq)]
pub struct RiemannState {
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub t: f64,
}

/// `F`, `F⁻¹` and the characteristic speed `λ = √𝔱'` as a function of `w = F(r)`.
#[derive(Debug, Clone)]
pub struct RiemannMap {
    table: TensionTable,
    harmonic: bool,
    /// `F` at the table nodes.
    f_nodes: Vec<f64>,
    w_min: f64,
    hw: f64,
    lam: Vec<f64>,
    dlam: Vec<f64>,
}

fn hermite(h: f64, s: f64, y0: f64, y1: f64, d0: f64, d1: f64) -> f64 {
    let s2 = s * s;
    let s3 = s2 * s;
    (2.0 * s3 - 3.0 * s2 + 1.0) * y0 + (s3 - 2.0 * s2 + s) * h * d0 + (-2.0 * s3 + 3.0 * s2) * y1 + (s3 - s2) * h * d1
}

impl RiemannMap {
    /// Map valid for stretches in `[-r_max, r_max]`.
    pub fn new(thermo: &Thermo, r_max: f64) -> Result<Self> {
        let table = TensionTable::new(thermo, -r_max, r_max, MAP_NODES)?;
        let harmonic = table.is_harmonic();
        let speed = |r: f64| table.d1(r).sqrt();
        let zero = (MAP_NODES - 1) / 2;
        let mut f_nodes = vec![0.0; MAP_NODES];
        for k in zero + 1..MAP_NODES {
            let (a, b) = (-r_max + (k - 1) as f64 * table.h, -r_max + k as f64 * table.h);
            f_nodes[k] = f_nodes[k - 1] + adaptive_simpson(&speed, a, b, 1e-15);
        }
        for k in (0..zero).rev() {
            let (a, b) = (-r_max + k as f64 * table.h, -r_max + (k + 1) as f64 * table.h);
            f_nodes[k] = f_nodes[k + 1] - adaptive_simpson(&speed, a, b, 1e-15);
        }
        let mut map = RiemannMap { table, harmonic, f_nodes, w_min: 0.0, hw: 0.0, lam: vec![], dlam: vec![] };
        let (w_min, w_max) = (map.f_nodes[0], map.f_nodes[MAP_NODES - 1]);
        map.w_min = w_min;
        map.hw = (w_max - w_min) / (MAP_NODES - 1) as f64;
        for j in 0..MAP_NODES {
            let r = map.f_inverse(w_min + j as f64 * map.hw);
            let d1 = map.table.d1(r);
            map.lam.push(d1.sqrt());
            map.dlam.push(map.table.d2(r) / (2.0 * d1));
        }
        Ok(map)
    }

    /// Map sized for data with the given sup norms (with margin for the evolution, which
    /// keeps `u` and `v` within their initial ranges).
    pub fn for_profile(thermo: &Thermo, initial: &Profile) -> Result<Self> {
        let pmax = initial.p.iter().fold(0.0f64, |a, b| a.max(b.abs()));
        let rmax = initial.r.iter().fold(0.0f64, |a, b| a.max(b.abs()));
        let bound = 1.2 * (pmax + (1.0 + thermo.sigma).sqrt() * rmax) / (1.0 - thermo.sigma).sqrt() + 0.5;
        Self::new(thermo, bound)
    }

    pub fn r_max(&self) -> f64 {
        self.table.r_max()
    }

    pub fn table(&self) -> &TensionTable {
        &self.table
    }

    pub fn is_harmonic(&self) -> bool {
        self.harmonic
    }

    pub fn f(&self, r: f64) -> f64 {
        if self.harmonic {
            return r;
        }
        let x = ((r - self.table.r_min) / self.table.h).clamp(0.0, (MAP_NODES - 1) as f64);
        let k = x.round() as usize;
        let rk = self.table.r_min + k as f64 * self.table.h;
        let speed = |s: f64| self.table.d1(s).sqrt();
        if r >= rk {
            self.f_nodes[k] + adaptive_simpson(&speed, rk, r, 1e-15)
        } else {
            self.f_nodes[k] - adaptive_simpson(&speed, r, rk, 1e-15)
        }
    }

    /// Newton on `F(r) = w` from the bracketing table cell.
    pub fn f_inverse(&self, w: f64) -> f64 {
        if self.harmonic {
            return w;
        }
        let k = self.f_nodes.partition_point(|&f| f < w).clamp(1, MAP_NODES - 1);
        let (f0, f1) = (self.f_nodes[k - 1], self.f_nodes[k]);
        let r0 = self.table.r_min + (k - 1) as f64 * self.table.h;
        let mut r = r0 + (w - f0) / (f1 - f0) * self.table.h;
        for _ in 0..20 {
            let step = (self.f(r) - w) / self.table.d1(r).sqrt();
            r -= step;
            if step.abs() <= 1e-15 * (1.0 + r.abs()) {
                break;
            }
        }
        r
    }

    /// `λ(w) = √𝔱'(F⁻¹(w))` (cubic Hermite, clamped to the table).
    #[inline]
    pub fn speed(&self, w: f64) -> f64 {
        if self.harmonic {
            return 1.0;
        }
        let x = ((w - self.w_min) / self.hw).clamp(0.0, (MAP_NODES - 1) as f64);
        let k = (x.floor() as usize).min(MAP_NODES - 2);
        hermite(self.hw, x - k as f64, self.lam[k], self.lam[k + 1], self.dlam[k], self.dlam[k + 1])
    }

    pub fn to_riemann(&self, prof: &Profile) -> Result<RiemannState> {
        if let Some(r) = prof.r.iter().find(|r| !(r.abs() <= self.r_max())) {
            return Err(Error::Range { value: *r, lo: -self.r_max(), hi: self.r_max() });
        }
        let fr: Vec<f64> = prof.r.iter().map(|&r| self.f(r)).collect();
        Ok(RiemannState {
            u: prof.p.iter().zip(&fr).map(|(p, f)| p + f).collect(),
            v: prof.p.iter().zip(&fr).map(|(p, f)| p - f).collect(),
            t: prof.t,
        })
    }

    pub fn to_profile(&self, st: &RiemannState) -> Profile {
        Profile {
            p: st.u.iter().zip(&st.v).map(|(u, v)| 0.5 * (u + v)).collect(),
            r: st.u.iter().zip(&st.v).map(|(u, v)| self.f_inverse(0.5 * (u - v))).collect(),
            t: st.t,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::Potential;
    use crate::quadrature::integrate_legendre;
    use std::f64::consts::PI;

    #[test]
    fn round_trip() {
        let th = Thermo::new(Potential::OneMinusCosine, 1.0, 0.3).unwrap();
        let prof = Profile::from_fns(64, |x| 0.4 * (2.0 * PI * x).sin(), |x| 0.5 * (2.0 * PI * x).cos() + 0.1).unwrap();
        let map = RiemannMap::for_profile(&th, &prof).unwrap();
        let back = map.to_profile(&map.to_riemann(&prof).unwrap());
        assert!(back.max_diff(&prof) < 1e-10);
    }

    #[test]
    fn f_matches_direct_quadrature() {
        let th = Thermo::new(Potential::OneMinusCosine, 1.0, 0.2).unwrap();
        let map = RiemannMap::new(&th, 3.0).unwrap();
        let direct = integrate_legendre(|s| th.tension_derivatives(s).unwrap().1.sqrt(), 0.0, 1.3, 40);
        assert!((map.f(1.3) - direct).abs() < 1e-9);
        let r = 0.77;
        let lam = th.tension_derivatives(r).unwrap().1.sqrt();
        assert!((map.speed(map.f(r)) - lam).abs() < 1e-9);
    }

    #[test]
    fn harmonic_map_is_identity() {
        let th = Thermo::new(Potential::OneMinusCosine, 1.0, 0.0).unwrap();
        let map = RiemannMap::new(&th, 2.0).unwrap();
        assert_eq!(map.f(1.25), 1.25);
        assert_eq!(map.speed(0.3), 1.0);
    }
}
