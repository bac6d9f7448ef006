//! Real 1-periodic functions sampled on a uniform grid.
//!
//! A [`GridFn`] holds `n` samples at `theta_j = j / n`. Shifts by `1/q` are
//! exact grid rotations whenever `q` divides `n`, which makes the resonant
//! projection and the difference operators exact discrete operators. All
//! derivatives and integrals are spectral.

use std::f64::consts::PI;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft;

/// Relative tolerance under which a resonant part counts as zero.
pub const RESONANCE_TOL: f64 = 1e-9;

/// Relative spectral level always treated as round-off by [`GridFn::denoised`].
pub const DENOISE_FLOOR: f64 = 1e-16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// `g(theta + 1/q) - g(theta)`
    Forward,
    /// `g(theta) - g(theta - 1/q)`
    Backward,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridFn {
    values: Vec<f64>,
}

/// Result of [`GridFn::antiderivative_from_zero`].
#[derive(Debug, Clone)]
pub struct Antiderivative {
    /// Samples of `theta -> int_0^theta g` on the grid.
    pub samples: GridFn,
    /// False when `mean(g) != 0`, i.e. the samples carry a linear drift.
    pub periodic: bool,
    pub mean: f64,
}

impl GridFn {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Config("grid function needs at least one sample".into()));
        }
        if let Some(j) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Config(format!("non-finite sample at index {j}")));
        }
        Ok(GridFn { values })
    }

    /// Internal constructor for values known to be finite.
    pub(crate) fn from_vec(values: Vec<f64>) -> Self {
        debug_assert!(values.iter().all(|v| v.is_finite()));
        GridFn { values }
    }

    pub fn from_fn(n: usize, f: impl Fn(f64) -> f64) -> Self {
        GridFn::from_vec((0..n).map(|j| f(j as f64 / n as f64)).collect())
    }

    pub fn zeros(n: usize) -> Self {
        GridFn { values: vec![0.0; n] }
    }

    pub fn constant(n: usize, c: f64) -> Self {
        GridFn { values: vec![c; n] }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn theta(&self, j: usize) -> f64 {
        j as f64 / self.len() as f64
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.len() as f64
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> GridFn {
        GridFn::from_vec(self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn zip_with(&self, other: &GridFn, f: impl Fn(f64, f64) -> f64) -> GridFn {
        assert_eq!(self.len(), other.len(), "grid size mismatch");
        GridFn::from_vec(self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect())
    }

    pub fn scale(&self, k: f64) -> GridFn {
        self.map(|v| v * k)
    }

    /// Normalised discrete Fourier coefficients in FFT order.
    pub fn spectrum(&self) -> Vec<Complex64> {
        fft::forward_real(&self.values)
    }

    /// Real part of the synthesis of `coeffs` (FFT order, normalised).
    pub fn from_spectrum(coeffs: &[Complex64]) -> GridFn {
        GridFn::from_vec(fft::inverse_real(coeffs))
    }

    fn check_q(&self, q: usize) -> Result<()> {
        if q < 1 {
            return Err(Error::Config("resonance order must be positive".into()));
        }
        if !self.len().is_multiple_of(q) {
            return Err(Error::Config(format!(
                "grid size {} is not a multiple of q = {q}",
                self.len()
            )));
        }
        Ok(())
    }

    /// Cyclic shift: the result samples `g(theta + cells / n)`.
    pub fn shift(&self, cells: i64) -> GridFn {
        let n = self.len() as i64;
        let off = cells.rem_euclid(n) as usize;
        let mut out = Vec::with_capacity(self.len());
        out.extend_from_slice(&self.values[off..]);
        out.extend_from_slice(&self.values[..off]);
        GridFn::from_vec(out)
    }

    /// Shift by a real offset that must be a whole number of grid cells.
    pub fn shift_by(&self, offset: f64) -> Result<GridFn> {
        let cells = offset * self.len() as f64;
        let rounded = cells.round();
        if (cells - rounded).abs() > 1e-9 {
            return Err(Error::Config(format!(
                "offset {offset} is not a multiple of the grid spacing 1/{}",
                self.len()
            )));
        }
        Ok(self.shift(rounded as i64))
    }

    /// `[g]_q = (1/q) sum_{i=1}^q g(theta + i/q)`, by exact grid shifts.
    pub fn resonant_part(&self, q: usize) -> Result<GridFn> {
        self.check_q(q)?;
        let n = self.len();
        let step = n / q;
        let mut out = vec![0.0; n];
        for (j, o) in out.iter_mut().enumerate() {
            let mut acc = 0.0;
            for i in 0..q {
                acc += self.values[(j + i * step) % n];
            }
            *o = acc / q as f64;
        }
        Ok(GridFn::from_vec(out))
    }

    /// The Fourier filter keeping modes in `q Z`. Agrees with
    /// [`GridFn::resonant_part`] to round-off; kept as an independent route.
    pub fn resonant_filter(&self, q: usize) -> Result<GridFn> {
        self.check_q(q)?;
        let n = self.len();
        let mut spec = self.spectrum();
        for (idx, c) in spec.iter_mut().enumerate() {
            if fft::wavenumber(idx, n) % q as i64 != 0 {
                *c = Complex64::new(0.0, 0.0);
            }
        }
        Ok(GridFn::from_spectrum(&spec))
    }

    /// `{g}_q = g - [g]_q`.
    pub fn nonresonant_part(&self, q: usize) -> Result<GridFn> {
        let r = self.resonant_part(q)?;
        Ok(self - &r)
    }

    pub fn difference(&self, q: usize, dir: Direction) -> Result<GridFn> {
        self.check_q(q)?;
        let step = (self.len() / q) as i64;
        Ok(match dir {
            Direction::Forward => &self.shift(step) - self,
            Direction::Backward => self - &self.shift(-step),
        })
    }

    /// The unique `phi` with `[phi]_q = 0` and `difference(phi, q, dir) = g`.
    ///
    /// Uses the telescoping sum `phi(theta) = (1/q) sum_{j=1}^q j g(theta + (j-1)/q)`
    /// for the forward operator; the backward case is the forward inverse of
    /// `g(theta + 1/q)`.
    pub fn invert_difference(&self, q: usize, dir: Direction) -> Result<GridFn> {
        let res = self.resonant_part(q)?;
        let res_norm = res.sup_norm();
        if res_norm > RESONANCE_TOL * self.sup_norm() + 1e-14 {
            return Err(Error::ResonantRhs { resonant_norm: res_norm });
        }
        let g = self - &res;
        let n = self.len();
        let step = n / q;
        let src = match dir {
            Direction::Forward => g,
            Direction::Backward => g.shift(step as i64),
        };
        let mut phi = vec![0.0; n];
        for (j, p) in phi.iter_mut().enumerate() {
            let mut acc = 0.0;
            for i in 1..=q {
                acc += i as f64 * src.values[(j + (i - 1) * step) % n];
            }
            *p = acc / q as f64;
        }
        Ok(GridFn::from_vec(phi))
    }

    /// Spectral derivative `d/dtheta`.
    pub fn derivative(&self) -> GridFn {
        self.derivative_n(1)
    }

    /// Spectral derivative of order `order`. The unpaired Nyquist mode is
    /// dropped for odd orders.
    pub fn derivative_n(&self, order: u32) -> GridFn {
        if order == 0 {
            return self.clone();
        }
        let n = self.len();
        let mut spec = self.spectrum();
        let ik = Complex64::new(0.0, 2.0 * PI);
        for (idx, c) in spec.iter_mut().enumerate() {
            let k = fft::wavenumber(idx, n) as f64;
            if fft::is_nyquist(idx, n) && order % 2 == 1 {
                *c = Complex64::new(0.0, 0.0);
            } else {
                *c *= (ik * k).powu(order);
            }
        }
        GridFn::from_spectrum(&spec)
    }

    /// `theta -> int_0^theta g`: spectral for the mean-free part plus
    /// `mean * theta`. The result is periodic only when `mean(g) = 0`.
    pub fn antiderivative_from_zero(&self) -> Antiderivative {
        let n = self.len();
        let mut spec = self.spectrum();
        let mean = spec[0].re;
        spec[0] = Complex64::new(0.0, 0.0);
        for (idx, c) in spec.iter_mut().enumerate().skip(1) {
            if fft::is_nyquist(idx, n) {
                *c = Complex64::new(0.0, 0.0);
            } else {
                let k = fft::wavenumber(idx, n) as f64;
                *c /= Complex64::new(0.0, 2.0 * PI * k);
            }
        }
        let periodic_part = GridFn::from_spectrum(&spec);
        let p0 = periodic_part.values[0];
        let samples = GridFn::from_vec(
            periodic_part
                .values
                .iter()
                .enumerate()
                .map(|(j, &v)| v - p0 + mean * j as f64 / n as f64)
                .collect(),
        );
        let scale = self.sup_norm().max(f64::MIN_POSITIVE);
        Antiderivative {
            samples,
            periodic: mean.abs() <= 1e-14 * scale,
            mean,
        }
    }

    /// Empirical exponential decay rate `sigma` of the Fourier coefficients,
    /// `|g_k| ~ exp(-2 pi sigma |k|)`, fitted over the modes above the
    /// round-off floor. Returns `f64::INFINITY` when fewer than two
    /// non-constant modes are resolved.
    pub fn decay_width_estimate(&self) -> f64 {
        let n = self.len();
        let spec = self.spectrum();
        let kmax = (n - 1) / 2;
        let amps: Vec<f64> = (1..=kmax).map(|k| spec[k].norm() + spec[n - k].norm()).collect();
        let top = amps.iter().cloned().fold(0.0, f64::max);
        if top == 0.0 {
            return f64::INFINITY;
        }
        let floor = top * 1e-13;
        let pts: Vec<(f64, f64)> = amps
            .iter()
            .enumerate()
            .filter(|(_, &a)| a > floor)
            .map(|(i, &a)| (2.0 * PI * (i + 1) as f64, a.ln()))
            .collect();
        if pts.len() < 2 {
            return f64::INFINITY;
        }
        let fit = crate::fit::linear_fit(&pts);
        (-fit.slope).max(0.0)
    }

    /// `g` with its round-off tail removed. The noise level is read off the top
    /// quarter of the spectrum, which an analytic function resolved on the grid
    /// leaves empty; every mode above the last one clearly above it is zeroed.
    pub fn denoised(&self) -> GridFn {
        let mut spec = self.spectrum();
        let n = spec.len();
        let amp = |k: usize| spec[k].norm().max(spec[(n - k) % n].norm());
        let top = (0..=n / 2).map(amp).fold(0.0, f64::max);
        let noise = (3 * n / 8..=n / 2).map(amp).fold(0.0, f64::max);
        let floor = (10.0 * noise).max(DENOISE_FLOOR * top);
        let last = (0..=n / 2).rev().find(|&k| amp(k) > floor).unwrap_or(0);
        for k in last + 1..=n / 2 {
            spec[k] = Complex64::new(0.0, 0.0);
            spec[(n - k) % n] = Complex64::new(0.0, 0.0);
        }
        GridFn::from_spectrum(&spec)
    }

    /// Trigonometric interpolant evaluated at an arbitrary `theta`.
    pub fn interpolate(&self, theta: f64) -> f64 {
        SpectralEvaluator::new(self).eval(theta)
    }

    /// Spectral resampling onto `m` points (zero padding or truncation).
    pub fn resample(&self, m: usize) -> GridFn {
        let n = self.len();
        if m == n {
            return self.clone();
        }
        let spec = self.spectrum();
        let mut out = vec![Complex64::new(0.0, 0.0); m];
        let kmax = ((n.min(m)) - 1) / 2;
        out[0] = spec[0];
        for k in 1..=kmax {
            out[k] = spec[k];
            out[m - k] = spec[n - k];
        }
        if n.is_multiple_of(2) && m > n {
            // split the source Nyquist mode symmetrically
            let h = spec[n / 2] * 0.5;
            out[n / 2] += h;
            out[m - n / 2] += h;
        } else if m.is_multiple_of(2) && m < n {
            let k = m / 2;
            out[k] = spec[k] + spec[n - k];
        }
        GridFn::from_spectrum(&out)
    }
}

/// Pre-transformed evaluator for repeated off-grid evaluation of a
/// [`GridFn`] and its derivative.
#[derive(Debug, Clone)]
pub struct SpectralEvaluator {
    mean: f64,
    // (k, coefficient) for k = 1..; real signal so c_{-k} = conj(c_k)
    modes: Vec<Complex64>,
    nyquist: Option<f64>,
    n: usize,
}

impl SpectralEvaluator {
    pub fn new(g: &GridFn) -> Self {
        let n = g.len();
        let spec = g.spectrum();
        let kmax = (n - 1) / 2;
        SpectralEvaluator {
            mean: spec[0].re,
            modes: (1..=kmax).map(|k| spec[k]).collect(),
            nyquist: if n.is_multiple_of(2) && n > 1 { Some(spec[n / 2].re) } else { None },
            n,
        }
    }

    pub fn eval(&self, theta: f64) -> f64 {
        self.eval_with_derivative(theta).0
    }

    /// `g(theta + h) - g(theta)` without cancellation for small `h`.
    pub fn increment(&self, theta: f64, h: f64) -> f64 {
        let w = Complex64::from_polar(1.0, 2.0 * PI * (theta + 0.5 * h));
        let mut z = w;
        let mut out = 0.0;
        for (i, c) in self.modes.iter().enumerate() {
            let k = (i + 1) as f64;
            out += 2.0 * (c * z * Complex64::new(0.0, 2.0 * (PI * k * h).sin())).re;
            z *= w;
        }
        if let Some(a) = self.nyquist {
            let k = (self.n / 2) as f64;
            out += a * ((2.0 * PI * k * (theta + h)).cos() - (2.0 * PI * k * theta).cos());
        }
        out
    }

    /// Value and first derivative of the interpolant.
    pub fn eval_with_derivative(&self, theta: f64) -> (f64, f64) {
        let w = Complex64::from_polar(1.0, 2.0 * PI * theta);
        let mut z = w;
        let mut val = self.mean;
        let mut der = 0.0;
        for (i, c) in self.modes.iter().enumerate() {
            let k = (i + 1) as f64;
            let t = c * z;
            val += 2.0 * t.re;
            der += -2.0 * 2.0 * PI * k * t.im;
            z *= w;
        }
        if let Some(a) = self.nyquist {
            let k = (self.n / 2) as f64;
            val += a * (2.0 * PI * k * theta).cos();
            der += -a * 2.0 * PI * k * (2.0 * PI * k * theta).sin();
        }
        (val, der)
    }
}

impl Add for &GridFn {
    type Output = GridFn;
    fn add(self, o: &GridFn) -> GridFn {
        self.zip_with(o, |a, b| a + b)
    }
}

impl Sub for &GridFn {
    type Output = GridFn;
    fn sub(self, o: &GridFn) -> GridFn {
        self.zip_with(o, |a, b| a - b)
    }
}

impl Mul for &GridFn {
    type Output = GridFn;
    fn mul(self, o: &GridFn) -> GridFn {
        self.zip_with(o, |a, b| a * b)
    }
}

impl Neg for &GridFn {
    type Output = GridFn;
    fn neg(self) -> GridFn {
        self.map(|v| -v)
    }
}

/// Degree-one circle map `u(theta) = theta + v(theta)` with periodic `v`.
#[derive(Debug, Clone, PartialEq)]
pub struct CircleMap {
    displacement: GridFn,
}

impl CircleMap {
    /// Rejects displacements whose map is not orientation preserving.
    pub fn new(displacement: GridFn) -> Result<Self> {
        let d = displacement.derivative();
        if let Some((j, &v)) = d.values().iter().enumerate().find(|(_, &v)| 1.0 + v <= 0.0) {
            return Err(Error::Config(format!(
                "circle map is not orientation preserving: u' = {:.3e} at theta = {:.6}",
                1.0 + v,
                j as f64 / d.len() as f64
            )));
        }
        Ok(CircleMap { displacement })
    }

    pub fn identity(n: usize) -> Self {
        CircleMap { displacement: GridFn::zeros(n) }
    }

    pub fn rotation(n: usize, beta: f64) -> Self {
        CircleMap { displacement: GridFn::constant(n, beta) }
    }

    pub fn displacement(&self) -> &GridFn {
        &self.displacement
    }

    pub fn len(&self) -> usize {
        self.displacement.len()
    }

    pub fn is_empty(&self) -> bool {
        self.displacement.is_empty()
    }

    /// `u(theta_j)` on the grid (not reduced mod 1).
    pub fn samples(&self) -> Vec<f64> {
        let n = self.len() as f64;
        self.displacement
            .values()
            .iter()
            .enumerate()
            .map(|(j, v)| j as f64 / n + v)
            .collect()
    }

    /// `u_theta = 1 + v'` on the grid.
    pub fn derivative(&self) -> GridFn {
        self.displacement.derivative().map(|d| 1.0 + d)
    }

    pub fn eval(&self, theta: f64) -> f64 {
        theta + self.displacement.interpolate(theta)
    }

    pub fn is_identity(&self) -> bool {
        self.displacement.values().iter().all(|&v| v == 0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cos_mode(n: usize, k: f64) -> GridFn {
        GridFn::from_fn(n, |t| (2.0 * PI * k * t).cos())
    }

    fn max_diff(a: &GridFn, b: &GridFn) -> f64 {
        (a - b).sup_norm()
    }

    #[test]
    fn resonant_part_selects_modes() {
        let g = GridFn::from_fn(64, |t| (2.0 * PI * t).cos() + (4.0 * PI * t).cos());
        let r = g.resonant_part(2).unwrap();
        assert!(max_diff(&r, &cos_mode(64, 2.0)) < 1e-14);
        let nr = g.nonresonant_part(2).unwrap();
        assert!(max_diff(&nr, &cos_mode(64, 1.0)) < 1e-14);

        let c = GridFn::constant(60, 3.5);
        assert!(max_diff(&c.resonant_part(5).unwrap(), &c) < 1e-15);

        let g3 = cos_mode(96, 3.0);
        assert!(max_diff(&g3.resonant_part(3).unwrap(), &g3) < 1e-14);
        assert!(g3.nonresonant_part(3).unwrap().sup_norm() < 1e-14);

        let s = GridFn::from_fn(100, |t| (2.0 * PI * t).sin());
        assert!(max_diff(&s.nonresonant_part(5).unwrap(), &s) < 1e-14);
    }

    #[test]
    fn resonant_part_rejects_bad_grid() {
        let g = GridFn::zeros(10);
        assert!(matches!(g.resonant_part(3), Err(Error::Config(_))));
        assert!(matches!(g.difference(4, Direction::Forward), Err(Error::Config(_))));
    }

    #[test]
    fn shifts() {
        let n = 16;
        let mut bump = vec![0.0; n];
        bump[0] = 1.0;
        let g = GridFn::new(bump).unwrap();
        assert_eq!(g.shift(0), g);
        assert_eq!(g.shift(n as i64), g);
        assert_eq!(g.shift_by(1.0).unwrap(), g);
        // g(theta + k/n) has its bump where theta + k/n = 0, i.e. at cell n - k
        let s = g.shift(-3);
        assert_eq!(s.values()[3], 1.0);
        assert!(g.shift_by(0.01).is_err());
    }

    #[test]
    fn difference_examples() {
        let c = GridFn::constant(32, 2.0);
        assert!(c.difference(4, Direction::Forward).unwrap().sup_norm() < 1e-15);
        let g = cos_mode(64, 1.0);
        let d = g.difference(2, Direction::Forward).unwrap();
        assert!(max_diff(&d, &g.scale(-2.0)) < 1e-14);
        let fb = d.difference(2, Direction::Backward).unwrap();
        let bf = g
            .difference(2, Direction::Backward)
            .unwrap()
            .difference(2, Direction::Forward)
            .unwrap();
        assert!(max_diff(&fb, &bf) < 1e-14);
    }

    #[test]
    fn invert_difference_examples() {
        let g = cos_mode(64, 1.0);
        let phi = g.invert_difference(2, Direction::Forward).unwrap();
        assert!(max_diff(&phi, &g.scale(-0.5)) < 1e-14);
        let z = GridFn::zeros(64).invert_difference(4, Direction::Backward).unwrap();
        assert_eq!(z.sup_norm(), 0.0);
        let res = GridFn::constant(64, 1.0).invert_difference(4, Direction::Forward);
        match res {
            Err(Error::ResonantRhs { resonant_norm }) => assert!((resonant_norm - 1.0).abs() < 1e-14),
            other => panic!("expected resonant error, got {other:?}"),
        }
    }

    #[test]
    fn spectral_calculus() {
        let n = 64;
        let d = GridFn::from_fn(n, |t| (2.0 * PI * t).sin()).derivative();
        assert!(max_diff(&d, &cos_mode(n, 1.0).scale(2.0 * PI)) < 1e-12);
        assert!(GridFn::constant(n, 4.0).derivative().sup_norm() < 1e-13);
        let d2 = cos_mode(n, 2.0).derivative();
        let expect = GridFn::from_fn(n, |t| -4.0 * PI * (4.0 * PI * t).sin());
        assert!(max_diff(&d2, &expect) < 1e-12);

        let a = cos_mode(n, 1.0).antiderivative_from_zero();
        assert!(a.periodic);
        let expect = GridFn::from_fn(n, |t| (2.0 * PI * t).sin() / (2.0 * PI));
        assert!(max_diff(&a.samples, &expect) < 1e-15);
        let z = GridFn::zeros(n).antiderivative_from_zero();
        assert!(z.periodic && z.samples.sup_norm() == 0.0);
        let one = GridFn::constant(n, 1.0).antiderivative_from_zero();
        assert!(!one.periodic);
        assert!(max_diff(&one.samples, &GridFn::from_fn(n, |t| t)) < 1e-14);
    }

    #[test]
    fn decay_width() {
        let n = 64;
        let sigma = 0.3;
        let mut spec = vec![Complex64::new(0.0, 0.0); n];
        for (idx, c) in spec.iter_mut().enumerate() {
            let k = fft::wavenumber(idx, n);
            if !fft::is_nyquist(idx, n) {
                *c = Complex64::new((-2.0 * PI * (k.abs() as f64) * sigma).exp(), 0.0);
            }
        }
        let g = GridFn::from_spectrum(&spec);
        let est = g.decay_width_estimate();
        assert!((est - sigma).abs() < 0.1 * sigma, "estimate {est}");

        assert!(cos_mode(n, 3.0).decay_width_estimate().is_infinite());

        use rand::{Rng, SeedableRng};
        let mut rng = rand::rngs::StdRng::seed_from_u64(7);
        let noise = GridFn::new((0..256).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap();
        assert!(noise.decay_width_estimate() < 0.01);
    }

    #[test]
    fn interpolation_and_resampling() {
        let g = GridFn::from_fn(32, |t| (2.0 * PI * t).sin() + 0.3 * (6.0 * PI * t).cos());
        let t = 0.123;
        let exact = (2.0 * PI * t).sin() + 0.3 * (6.0 * PI * t).cos();
        assert!((g.interpolate(t) - exact).abs() < 1e-14);
        let up = g.resample(96);
        assert!((up.values()[7] - g.interpolate(7.0 / 96.0)).abs() < 1e-14);
        let back = up.resample(32);
        assert!(max_diff(&back, &g) < 1e-14);
    }

    #[test]
    fn circle_map_validation() {
        assert!(CircleMap::new(GridFn::from_fn(64, |t| 0.05 * (2.0 * PI * t).sin())).is_ok());
        assert!(CircleMap::new(GridFn::from_fn(64, |t| 0.5 * (2.0 * PI * t).sin())).is_err());
        let r = CircleMap::rotation(8, 0.25);
        assert!((r.eval(0.5) - 0.75).abs() < 1e-15);
        assert_eq!(r.samples()[4], 0.75);
    }
}
