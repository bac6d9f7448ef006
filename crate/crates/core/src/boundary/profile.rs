//! Radius of curvature as a function of the tangent angle.
//!
//! With `psi` the tangent angle divided by `2 pi`, a convex curve satisfies
//! `z'(psi) = 2 pi rho(psi) e^{2 pi i psi}`, so closure is the linear
//! condition that the first harmonics of `rho` vanish.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::{dense_count, FourierCurve, ParamKind};
use crate::error::{Error, Result};
use crate::fft;
use crate::geom::Vec2;
use crate::par;
use crate::periodic::GridFn;

/// Relative size of the first harmonics of `rho` accepted as closed.
pub const CLOSURE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureProfile {
    rho: GridFn,
}

/// Output of [`profile_of`]: the profile and the Steiner point of the curve
/// (the mean position over the tangent angle), which is where
/// [`curve_from_curvature`] places its reconstruction relative to the origin.
#[derive(Debug, Clone)]
pub struct ExtractedProfile {
    pub profile: CurvatureProfile,
    pub center: Vec2,
}

impl CurvatureProfile {
    /// Requires `rho > 0`; closure is checked where it matters, in
    /// [`curve_from_curvature`].
    pub fn new(rho: GridFn) -> Result<Self> {
        if rho.len() < 4 {
            return Err(Error::Config("curvature profile needs at least 4 samples".into()));
        }
        if let Some((j, &v)) = rho.values().iter().enumerate().find(|(_, &v)| !(v > 0.0)) {
            return Err(Error::ConvexityLoss(format!(
                "radius of curvature {v:.3e} at psi = {:.6}",
                j as f64 / rho.len() as f64
            )));
        }
        Ok(CurvatureProfile { rho })
    }

    pub fn rho(&self) -> &GridFn {
        &self.rho
    }

    /// `|rho_1| / rho_0`.
    pub fn closure_defect(&self) -> f64 {
        let s = self.rho.spectrum();
        s[1].norm() / s[0].re.abs()
    }

    /// Removes the first harmonics exactly.
    pub fn project_closure(&self) -> Result<CurvatureProfile> {
        CurvatureProfile::new(remove_first_harmonic(&self.rho))
    }

    pub fn perimeter(&self) -> f64 {
        2.0 * PI * self.rho.mean()
    }
}

fn remove_first_harmonic(rho: &GridFn) -> GridFn {
    let n = rho.len();
    let mut s = rho.spectrum();
    s[1] = Complex64::new(0.0, 0.0);
    s[n - 1] = Complex64::new(0.0, 0.0);
    GridFn::from_spectrum(&s)
}

/// Integrates `z' = 2 pi rho e^{2 pi i psi}` exactly in Fourier space. The
/// curve is parametrised by `psi` with its Steiner point at the origin.
pub fn curve_from_curvature(p: &CurvatureProfile) -> Result<FourierCurve> {
    let defect = p.closure_defect();
    if defect > CLOSURE_TOL {
        return Err(Error::ConvexityLoss(format!(
            "curvature profile violates closure: first harmonic {defect:.3e} of the mean"
        )));
    }
    let n = p.rho.len();
    let spec = p.rho.spectrum();
    let kr = (n - 1) / 2;
    let rho_k = |k: i64| -> Complex64 {
        if k.unsigned_abs() as usize > kr {
            Complex64::new(0.0, 0.0)
        } else {
            spec[k.rem_euclid(n as i64) as usize]
        }
    };
    let k_max = kr + 1;
    let mut cx = vec![Complex64::new(0.0, 0.0); 2 * k_max + 1];
    let mut cy = cx.clone();
    // z_k = 2 pi rho_{k-1} / (2 pi i k); x = Re z, y = Im z
    let z = |k: i64| -> Complex64 {
        if k == 0 {
            Complex64::new(0.0, 0.0)
        } else {
            rho_k(k - 1) / Complex64::new(0.0, k as f64)
        }
    };
    for k in -(k_max as i64)..=(k_max as i64) {
        let zk = z(k);
        let zmk = z(-k).conj();
        let idx = (k + k_max as i64) as usize;
        cx[idx] = (zk + zmk) * 0.5;
        cy[idx] = (zk - zmk) * Complex64::new(0.0, -0.5);
    }
    let c = FourierCurve::from_coeffs(cx, cy, ParamKind::General)?;
    Ok(c.trimmed(1e-16))
}

/// Samples the radius of curvature on an `n`-grid of the normalised tangent
/// angle, measured from the `+x` direction.
pub fn profile_of(c: &FourierCurve, n: usize) -> Result<ExtractedProfile> {
    let m = dense_count(c.k_max());
    let d1 = c.sample_grid(m, 1);
    let phi0 = d1[0].y.atan2(d1[0].x);
    let rel = |t: f64| -> (f64, f64) {
        let d = c.eval_upto(t, 2);
        let a = d[1].y.atan2(d[1].x) - phi0;
        let sp2 = d[1].dot(d[1]);
        (a.rem_euclid(2.0 * PI), d[1].cross(d[2]) / sp2)
    };
    // bracketing table of the relative tangent angle
    let table: Vec<f64> = d1
        .iter()
        .map(|d| (d.y.atan2(d.x) - phi0).rem_euclid(2.0 * PI))
        .collect();
    let solve = |target: f64| -> Result<f64> {
        // table[0] = 0 and the angle increases monotonically
        let mut j = table.partition_point(|&v| v <= target).saturating_sub(1);
        if j >= m {
            j = m - 1;
        }
        let (mut lo, mut hi) = (j as f64 / m as f64, (j + 1) as f64 / m as f64);
        let mut t = 0.5 * (lo + hi);
        for _ in 0..100 {
            let (mut a, da) = rel(t);
            // unwrap against the bracket's tabulated angle
            let reference = table[j];
            if a - reference < -PI {
                a += 2.0 * PI;
            }
            let f = a - target;
            if f.abs() < 1e-15 {
                return Ok(t);
            }
            if f > 0.0 {
                hi = t;
            } else {
                lo = t;
            }
            let next = t - f / da;
            t = if da > 0.0 && next > lo && next < hi { next } else { 0.5 * (lo + hi) };
            if hi - lo < 1e-17 {
                return Ok(t);
            }
        }
        Ok(t)
    };
    let shift = phi0.rem_euclid(2.0 * PI);
    let ts = par::try_map_indexed(n, |j| {
        let target = (2.0 * PI * j as f64 / n as f64 - shift).rem_euclid(2.0 * PI);
        solve(target)
    })?;
    let mut rho = Vec::with_capacity(n);
    let mut center = Vec2::ZERO;
    for &t in &ts {
        let d = c.eval_upto(t, 2);
        let sp = d[1].norm();
        let k = d[1].cross(d[2]);
        if !(k > 0.0) {
            return Err(Error::ConvexityLoss(format!("non-positive curvature at s = {t:.6}")));
        }
        rho.push(sp * sp * sp / k);
        center = center + d[0];
    }
    Ok(ExtractedProfile {
        profile: CurvatureProfile::new(GridFn::new(rho)?)?,
        center: center.scale(1.0 / n as f64),
    })
}

/// Low-pass filter that keeps modes `|k| <= cutoff` intact and rolls off
/// smoothly above it, followed by exact closure projection.
pub fn smooth_profile(p: &CurvatureProfile, cutoff: f64) -> Result<CurvatureProfile> {
    if !(cutoff > 0.0) {
        return Err(Error::Config(format!("smoothing cutoff must be positive, got {cutoff}")));
    }
    let n = p.rho.len();
    let mut spec = p.rho.spectrum();
    let width = 0.25 * cutoff + 1.0;
    for (idx, c) in spec.iter_mut().enumerate() {
        let k = fft::wavenumber(idx, n).unsigned_abs() as f64;
        if k > cutoff {
            *c *= (-((k - cutoff) / width).powi(2)).exp();
        }
    }
    let smoothed = remove_first_harmonic(&GridFn::from_spectrum(&spec));
    let min = smoothed.values().iter().cloned().fold(f64::INFINITY, f64::min);
    if !(min > 1e-3 * smoothed.mean()) {
        return Err(Error::ConvexityLoss(format!("smoothed radius of curvature drops to {min:.3e}")));
    }
    CurvatureProfile::new(smoothed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boundary::geometric_distance;
    use crate::presets;

    #[test]
    fn constant_profile_is_a_circle() {
        let r = 0.7;
        let c = curve_from_curvature(&CurvatureProfile::new(GridFn::constant(64, r)).unwrap()).unwrap();
        for s in [0.0, 0.3, 0.8] {
            assert!((c.point(s).norm() - r).abs() < 1e-15);
            assert!((c.curvature_of(s).unwrap() - 1.0 / r).abs() < 1e-12);
        }
    }

    #[test]
    fn profile_round_trip() {
        let r = 0.2;
        let rho = GridFn::from_fn(128, |p| r * (1.0 + 0.1 * (4.0 * PI * p).cos()));
        let prof = CurvatureProfile::new(rho.clone()).unwrap();
        let c = curve_from_curvature(&prof).unwrap();
        let gap = (c.point(1.0) - c.point(0.0)).norm();
        assert!(gap < 1e-12 * c.perimeter());
        let back = profile_of(&c, 128).unwrap();
        let err = (&back.profile.rho - &rho).sup_norm();
        assert!(err < 1e-8, "rho error {err}");
        assert!(back.center.norm() < 1e-12);
    }

    #[test]
    fn open_profile_rejected() {
        let rho = GridFn::from_fn(64, |p| 1.0 + 0.2 * (2.0 * PI * p).cos());
        let prof = CurvatureProfile::new(rho).unwrap();
        assert!(curve_from_curvature(&prof).is_err());
        assert!(curve_from_curvature(&prof.project_closure().unwrap()).is_ok());
    }

    #[test]
    fn extracted_profile_reconstructs_curve() {
        let e = presets::ellipse(1.15, 0.85).unwrap();
        let ex = profile_of(&e, 512).unwrap();
        let c = curve_from_curvature(&ex.profile.project_closure().unwrap()).unwrap();
        let c = c.translated(ex.center);
        let d = geometric_distance(&c, &e);
        assert!(d < 1e-8, "distance {d}");
    }

    #[test]
    fn smoothing_examples() {
        let rho = GridFn::from_fn(128, |p| 1.0 + 0.1 * (6.0 * PI * p).cos() + 0.05 * (10.0 * PI * p).sin());
        let prof = CurvatureProfile::new(rho.clone()).unwrap();
        let same = smooth_profile(&prof, 5.0).unwrap();
        assert!((&same.rho - &rho).sup_norm() < 1e-14);

        let noisy = GridFn::from_fn(128, |p| 1.0 + 1e-3 * (2.0 * PI * 40.0 * p).sin() + 1e-3 * (2.0 * PI * 51.0 * p).cos());
        let s = smooth_profile(&CurvatureProfile::new(noisy).unwrap(), 3.0).unwrap();
        assert!((&s.rho - &GridFn::constant(128, 1.0)).sup_norm() < 1e-12);
    }
}
