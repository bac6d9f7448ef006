//! Thin wrappers around rustfft with the normalisation used throughout the
//! crate: `coeff[k] = (1/n) * sum_j value[j] * exp(-2 pi i k j / n)`.

use std::cell::RefCell;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan(n: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if inverse {
            p.plan_fft_inverse(n)
        } else {
            p.plan_fft_forward(n)
        }
    })
}

/// Normalised forward transform of real samples.
pub fn forward_real(values: &[f64]) -> Vec<Complex64> {
    let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    forward_in_place(&mut buf);
    buf
}

pub fn forward_in_place(buf: &mut [Complex64]) {
    let n = buf.len();
    if n == 0 {
        return;
    }
    plan(n, false).process(buf);
    let inv = 1.0 / n as f64;
    for c in buf.iter_mut() {
        *c *= inv;
    }
}

/// Synthesis `value[j] = sum_k coeff[k] exp(2 pi i k j / n)`.
pub fn inverse_in_place(buf: &mut [Complex64]) {
    let n = buf.len();
    if n == 0 {
        return;
    }
    plan(n, true).process(buf);
}

pub fn inverse_real(coeffs: &[Complex64]) -> Vec<f64> {
    let mut buf = coeffs.to_vec();
    inverse_in_place(&mut buf);
    buf.into_iter().map(|c| c.re).collect()
}

/// Signed wavenumber of FFT bin `idx` on an `n`-point grid.
pub fn wavenumber(idx: usize, n: usize) -> i64 {
    if idx <= n / 2 {
        idx as i64
    } else {
        idx as i64 - n as i64
    }
}

/// True for the unpaired Nyquist bin of an even-length transform.
pub fn is_nyquist(idx: usize, n: usize) -> bool {
    n.is_multiple_of(2) && idx == n / 2
}
