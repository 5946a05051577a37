//! Uniform periodic grids and FFT transforms between grid values and Fourier
//! coefficients.
//!
//! A 2D grid of size `r × r` samples `z_{ij} = (2πi/r, 2πj/r)`; axis 0 is `x`.

use ndarray::{Array1, Array2, Axis};
use rustfft::{Fft, FftPlanner};

use crate::basis::Mode;
use crate::C64;

fn wrap(k: i32, r: usize) -> usize {
    k.rem_euclid(r as i32) as usize
}

/// Signed frequency of FFT bin `i`.
pub fn bin_mode(i: usize, r: usize) -> i32 {
    if i <= r / 2 {
        i as i32
    } else {
        i as i32 - r as i32
    }
}

fn fft_axis(a: &mut Array2<C64>, axis: usize, plan: &dyn Fft<f64>) {
    let mut buf = vec![C64::new(0.0, 0.0); plan.len()];
    for mut lane in a.lanes_mut(Axis(axis)) {
        for (b, v) in buf.iter_mut().zip(lane.iter()) {
            *b = *v;
        }
        plan.process(&mut buf);
        for (v, b) in lane.iter_mut().zip(buf.iter()) {
            *v = *b;
        }
    }
}

/// Values `Σ c_k e^{ik·z}` on the `r × r` grid.
pub fn synthesize(r: usize, coeffs: impl IntoIterator<Item = (Mode, C64)>) -> Array2<C64> {
    let mut a = Array2::<C64>::zeros((r, r));
    for (k, c) in coeffs {
        a[[wrap(k.k1, r), wrap(k.k2, r)]] += c;
    }
    let plan = FftPlanner::new().plan_fft_inverse(r);
    fft_axis(&mut a, 0, plan.as_ref());
    fft_axis(&mut a, 1, plan.as_ref());
    a
}

/// Fourier coefficients of grid values, indexed by FFT bin; read them with
/// [`coeff`].
pub fn analyze(values: &Array2<C64>) -> Array2<C64> {
    let r = values.nrows();
    let mut a = values.clone();
    let plan = FftPlanner::new().plan_fft_forward(r);
    fft_axis(&mut a, 0, plan.as_ref());
    fft_axis(&mut a, 1, plan.as_ref());
    let s = 1.0 / (r * r) as f64;
    a.mapv_inplace(|z| z * s);
    a
}

pub fn coeff(spectrum: &Array2<C64>, k: Mode) -> C64 {
    let r = spectrum.nrows();
    spectrum[[wrap(k.k1, r), wrap(k.k2, r)]]
}

/// One-dimensional analogue of [`synthesize`] on `r` points of `[0, 2π)`.
pub fn synthesize_1d(r: usize, coeffs: impl IntoIterator<Item = (i32, C64)>) -> Array1<C64> {
    let mut buf = vec![C64::new(0.0, 0.0); r];
    for (m, c) in coeffs {
        buf[wrap(m, r)] += c;
    }
    FftPlanner::new().plan_fft_inverse(r).process(&mut buf);
    Array1::from(buf)
}

/// Fourier coefficients of periodic samples, indexed by FFT bin.
pub fn analyze_1d(values: &[C64]) -> Vec<C64> {
    let r = values.len();
    let mut buf = values.to_vec();
    FftPlanner::new().plan_fft_forward(r).process(&mut buf);
    let s = 1.0 / r as f64;
    buf.iter_mut().for_each(|z| *z *= s);
    buf
}

/// `order`-th derivative of periodic samples on an interval of length
/// `period`, by spectral differentiation. The Nyquist bin is zeroed for odd
/// orders.
pub fn spectral_derivative(values: &[C64], order: u32, period: f64) -> Vec<C64> {
    let r = values.len();
    let mut spec = analyze_1d(values);
    let w = std::f64::consts::TAU / period;
    for (i, c) in spec.iter_mut().enumerate() {
        let m = bin_mode(i, r);
        if order % 2 == 1 && r % 2 == 0 && i == r / 2 {
            *c = C64::new(0.0, 0.0);
            continue;
        }
        *c *= C64::new(0.0, m as f64 * w).powu(order);
    }
    synthesize_1d(r, spec.into_iter().enumerate().map(|(i, c)| (i as i32, c))).to_vec()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_2d() {
        let modes = [(Mode::new(1, -2), C64::new(0.5, 0.25)), (Mode::new(-3, 0), C64::new(-1.0, 2.0))];
        let v = synthesize(16, modes);
        let x = std::f64::consts::TAU * 3.0 / 16.0;
        let y = std::f64::consts::TAU * 5.0 / 16.0;
        let direct: C64 = modes.iter().map(|(k, c)| c * C64::from_polar(1.0, k.k1 as f64 * x + k.k2 as f64 * y)).sum();
        assert!((v[[3, 5]] - direct).norm() < 1e-13);
        let s = analyze(&v);
        for (k, c) in modes {
            assert!((coeff(&s, k) - c).norm() < 1e-14);
        }
    }

    #[test]
    fn derivative_of_sine() {
        let r = 64;
        let vals: Vec<C64> =
            (0..r).map(|i| C64::new((3.0 * std::f64::consts::TAU * i as f64 / r as f64).sin(), 0.0)).collect();
        let d = spectral_derivative(&vals, 1, std::f64::consts::TAU);
        for (i, z) in d.iter().enumerate() {
            let e = 3.0 * (3.0 * std::f64::consts::TAU * i as f64 / r as f64).cos();
            assert!((z.re - e).abs() < 1e-12 && z.im.abs() < 1e-12);
        }
    }
}
