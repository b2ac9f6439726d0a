use std::f64::consts::PI;

use rustfft::num_complex::Complex;

use super::profile::{fft, freq, ifft_real, Profile};

/// Exact evolution of `∂_t p = ∂_x r`, `∂_t r = ∂_x p` over time `t` (negative `t` runs it
/// backwards): each Fourier mode rotates by `exp(2πimt·[[0,1],[1,0]])`. The Nyquist mode
/// is a cosine whose derivative vanishes at the nodes, so it only keeps the `cos` part.
pub fn solve_linear(initial: &Profile, t: f64) -> Profile {
    let m = initial.m();
    let p = fft(&initial.p);
    let r = fft(&initial.r);
    let mut pt = vec![Complex::new(0.0, 0.0); m];
    let mut rt = vec![Complex::new(0.0, 0.0); m];
    for k in 0..m {
        let w = 2.0 * PI * freq(k, m) as f64 * t;
        let (s, c) = w.sin_cos();
        if m % 2 == 0 && k == m / 2 {
            pt[k] = p[k] * c;
            rt[k] = r[k] * c;
        } else {
            let i = Complex::new(0.0, 1.0);
            pt[k] = p[k] * c + i * r[k] * s;
            rt[k] = r[k] * c + i * p[k] * s;
        }
    }
    Profile { p: ifft_real(pt), r: ifft_real(rt), t: initial.t + t }
}
