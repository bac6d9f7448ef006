//! Built-in boundaries, all rescaled to unit perimeter.
//!
//! Preset strings: `circle`, `ellipse:A,B`, `perturbed` or
//! `perturbed:2=0.05,3=0.02` (mode=amplitude pairs of the radius of
//! curvature), `smooth-tail` or `smooth-tail:EPS`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::boundary::{curve_from_curvature, reparametrize_arclength, CurvatureProfile, FourierCurve, ParamKind};
use crate::error::{Error, Result};
use crate::periodic::GridFn;

/// Default perturbation of the radius of curvature used by `perturbed`.
pub const DEFAULT_PERTURBATION: [(usize, f64); 2] = [(2, 0.05), (3, 0.02)];

/// Circle of unit perimeter, `r(s) = R (cos 2 pi s, sin 2 pi s)`.
pub fn circle() -> FourierCurve {
    let r = 1.0 / (2.0 * PI);
    let z = Complex64::new(0.0, 0.0);
    let cx = vec![Complex64::new(0.5 * r, 0.0), z, Complex64::new(0.5 * r, 0.0)];
    let cy = vec![Complex64::new(0.0, 0.5 * r), z, Complex64::new(0.0, -0.5 * r)];
    FourierCurve::from_coeffs(cx, cy, ParamKind::ArclengthUnit).expect("circle coefficients are symmetric")
}

/// `(a cos 2 pi t, b sin 2 pi t)` with its raw parametrisation and size.
pub fn ellipse_raw(a: f64, b: f64) -> FourierCurve {
    let z = Complex64::new(0.0, 0.0);
    let cx = vec![Complex64::new(0.5 * a, 0.0), z, Complex64::new(0.5 * a, 0.0)];
    let cy = vec![Complex64::new(0.0, 0.5 * b), z, Complex64::new(0.0, -0.5 * b)];
    FourierCurve::from_coeffs(cx, cy, ParamKind::General).expect("ellipse coefficients are symmetric")
}

/// Ellipse with semi-axes proportional to `a`, `b`, arclength parametrised
/// with unit perimeter.
pub fn ellipse(a: f64, b: f64) -> Result<FourierCurve> {
    if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
        return Err(Error::Config(format!("ellipse semi-axes must be positive, got {a}, {b}")));
    }
    reparametrize_arclength(&ellipse_raw(a, b))
}

/// Radius of curvature `R (1 + sum a_m cos 2 pi m psi)` with `R = 1/(2 pi)`.
pub fn perturbed_profile(modes: &[(usize, f64)], n: usize) -> Result<CurvatureProfile> {
    if let Some(&(m, _)) = modes.iter().find(|(m, _)| *m < 2) {
        return Err(Error::Config(format!("perturbation mode {m} would break closure; use modes >= 2")));
    }
    let r = 1.0 / (2.0 * PI);
    CurvatureProfile::new(GridFn::from_fn(n, |psi| {
        r * (1.0 + modes.iter().map(|&(m, a)| a * (2.0 * PI * m as f64 * psi).cos()).sum::<f64>())
    }))
}

pub fn perturbed(modes: &[(usize, f64)]) -> Result<FourierCurve> {
    let kmax = modes.iter().map(|m| m.0).max().unwrap_or(0);
    let n = (4 * kmax + 8).next_power_of_two().max(64);
    let c = curve_from_curvature(&perturbed_profile(modes, n)?)?;
    reparametrize_arclength(&c)
}

/// Finitely smooth radius of curvature: `R (1 + eps sum_{k=2}^{kmax}
/// k^{-order} cos(2 pi k psi + phi_k))` with fixed pseudo-random phases.
pub fn smooth_tail_profile(eps: f64, order: f64, kmax: usize, n: usize) -> Result<CurvatureProfile> {
    if 2 * kmax >= n {
        return Err(Error::Config(format!("{n} samples cannot hold modes up to {kmax}")));
    }
    let r = 1.0 / (2.0 * PI);
    let phase = |k: usize| 2.0 * PI * ((k as f64 * 0.618_033_988_749_895).fract());
    CurvatureProfile::new(GridFn::from_fn(n, |psi| {
        let tail: f64 = (2..=kmax)
            .map(|k| (k as f64).powf(-order) * (2.0 * PI * k as f64 * psi + phase(k)).cos())
            .sum();
        r * (1.0 + eps * tail)
    }))
}

pub fn smooth_tail(eps: f64) -> Result<FourierCurve> {
    let c = curve_from_curvature(&smooth_tail_profile(eps, 6.0, 120, 512)?)?;
    reparametrize_arclength(&c)
}

fn parse_modes(spec: &str) -> Result<Vec<(usize, f64)>> {
    spec.split(',')
        .map(|item| {
            let (m, a) = item
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("expected mode=amplitude, got {item:?}")))?;
            let m: usize = m.trim().parse().map_err(|_| Error::Config(format!("bad mode {m:?}")))?;
            let a: f64 = a.trim().parse().map_err(|_| Error::Config(format!("bad amplitude {a:?}")))?;
            Ok((m, a))
        })
        .collect()
}

/// Builds a boundary from a preset string.
pub fn from_spec(spec: &str) -> Result<FourierCurve> {
    let (name, args) = match spec.split_once(':') {
        Some((n, a)) => (n, Some(a)),
        None => (spec, None),
    };
    match (name, args) {
        ("circle", None) => Ok(circle()),
        ("ellipse", Some(a)) => {
            let parts: Vec<&str> = a.split(',').collect();
            let nums: std::result::Result<Vec<f64>, _> = parts.iter().map(|p| p.trim().parse::<f64>()).collect();
            match nums {
                Ok(v) if v.len() == 2 => ellipse(v[0], v[1]),
                _ => Err(Error::Config(format!("expected ellipse:A,B, got {spec:?}"))),
            }
        }
        ("perturbed", None) => perturbed(&DEFAULT_PERTURBATION),
        ("perturbed", Some(a)) => perturbed(&parse_modes(a)?),
        ("smooth-tail", None) => smooth_tail(0.2),
        ("smooth-tail", Some(a)) => {
            let eps: f64 = a.trim().parse().map_err(|_| Error::Config(format!("bad amplitude {a:?}")))?;
            smooth_tail(eps)
        }
        _ => Err(Error::Config(format!("unknown preset {spec:?}"))),
    }
}
