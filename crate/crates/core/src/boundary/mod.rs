//! Strictly convex closed curves as truncated Fourier series.

mod io;
mod profile;

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fft;
use crate::geom::{angle_between, Vec2};
use crate::par;
use crate::periodic::{CircleMap, GridFn, SpectralEvaluator};

pub use profile::{curve_from_curvature, profile_of, smooth_profile, CurvatureProfile, ExtractedProfile};

/// Relative size of the discarded Fourier tail accepted when a nonlinear
/// operation is resampled back into coefficient form.
pub const RESAMPLE_TAIL_TOL: f64 = 1e-15;

/// Largest sample count tried before giving up on resolving a curve.
pub const MAX_RESAMPLE: usize = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParamKind {
    General,
    /// Unit speed, after rescaling the perimeter to 1.
    ArclengthUnit,
}

/// Lower bounds on speed and curvature a valid boundary must satisfy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvexityThresholds {
    pub min_speed: f64,
    pub min_curvature: f64,
}

impl Default for ConvexityThresholds {
    fn default() -> Self {
        ConvexityThresholds { min_speed: 1e-3, min_curvature: 1e-3 }
    }
}

/// A closed planar curve `r(s) = sum_{|k| <= K} (cx_k, cy_k) e^{2 pi i k s}`
/// with conjugate-symmetric coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierCurve {
    k_max: usize,
    cx: Vec<Complex64>,
    cy: Vec<Complex64>,
    param: ParamKind,
    width_estimate: Option<f64>,
}

fn conj_sym_error(c: &[Complex64], k_max: usize) -> f64 {
    let mut err: f64 = c[k_max].im.abs();
    for k in 1..=k_max {
        err = err.max((c[k_max + k] - c[k_max - k].conj()).norm());
    }
    err
}

impl FourierCurve {
    /// Coefficients are indexed `k + K` for `k = -K..=K`. Input that is not
    /// conjugate symmetric (relative 1e-12) is rejected; otherwise the
    /// symmetry is enforced exactly.
    pub fn from_coeffs(cx: Vec<Complex64>, cy: Vec<Complex64>, param: ParamKind) -> Result<Self> {
        if cx.len() != cy.len() || cx.len().is_multiple_of(2) {
            return Err(Error::InvalidBoundary {
                field: "coeff_x".into(),
                reason: format!("coefficient lists must have equal odd length (got {} and {})", cx.len(), cy.len()),
            });
        }
        let k_max = cx.len() / 2;
        let scale = cx.iter().chain(&cy).map(|c| c.norm()).fold(0.0, f64::max).max(1e-300);
        for (name, c) in [("coeff_x", &cx), ("coeff_y", &cy)] {
            if c.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(Error::InvalidBoundary { field: name.into(), reason: "non-finite coefficient".into() });
            }
            let e = conj_sym_error(c, k_max);
            if e > 1e-12 * scale {
                return Err(Error::InvalidBoundary {
                    field: name.into(),
                    reason: format!("coefficients are not conjugate symmetric (defect {e:.3e})"),
                });
            }
        }
        let mut curve = FourierCurve { k_max, cx, cy, param, width_estimate: None };
        curve.symmetrize();
        Ok(curve)
    }

    fn symmetrize(&mut self) {
        let k = self.k_max;
        for c in [&mut self.cx, &mut self.cy] {
            c[k].im = 0.0;
            for j in 1..=k {
                let avg = (c[k + j] + c[k - j].conj()) * 0.5;
                c[k + j] = avg;
                c[k - j] = avg.conj();
            }
        }
    }

    /// Fits coefficients to uniform samples `r(j/n)`, keeping modes up to
    /// the resolved bandwidth.
    pub fn from_samples(points: &[Vec2], param: ParamKind) -> Self {
        let n = points.len();
        let sx = fft::forward_real(&points.iter().map(|p| p.x).collect::<Vec<_>>());
        let sy = fft::forward_real(&points.iter().map(|p| p.y).collect::<Vec<_>>());
        let k_max = (n - 1) / 2;
        let mut cx = vec![Complex64::new(0.0, 0.0); 2 * k_max + 1];
        let mut cy = cx.clone();
        for idx in 0..n {
            let k = fft::wavenumber(idx, n);
            if k.unsigned_abs() as usize > k_max {
                continue;
            }
            let pos = (k + k_max as i64) as usize;
            cx[pos] = sx[idx];
            cy[pos] = sy[idx];
        }
        let mut c = FourierCurve { k_max, cx, cy, param, width_estimate: None };
        c.symmetrize();
        c.trimmed(RESAMPLE_TAIL_TOL)
    }

    pub fn k_max(&self) -> usize {
        self.k_max
    }

    pub fn param_kind(&self) -> ParamKind {
        self.param
    }

    pub fn with_param_kind(mut self, p: ParamKind) -> Self {
        self.param = p;
        self
    }

    pub fn width_estimate(&self) -> Option<f64> {
        self.width_estimate
    }

    pub fn coeff_x(&self, k: i64) -> Complex64 {
        self.coeff(&self.cx, k)
    }

    pub fn coeff_y(&self, k: i64) -> Complex64 {
        self.coeff(&self.cy, k)
    }

    fn coeff(&self, c: &[Complex64], k: i64) -> Complex64 {
        if k.unsigned_abs() as usize > self.k_max {
            Complex64::new(0.0, 0.0)
        } else {
            c[(k + self.k_max as i64) as usize]
        }
    }

    pub fn coeffs_x(&self) -> &[Complex64] {
        &self.cx
    }

    pub fn coeffs_y(&self) -> &[Complex64] {
        &self.cy
    }

    /// Size scale used for relative tolerances: the largest coefficient
    /// magnitude with `k != 0`.
    pub fn scale(&self) -> f64 {
        let k = self.k_max;
        (1..=k)
            .map(|j| self.cx[k + j].norm().max(self.cy[k + j].norm()))
            .fold(0.0, f64::max)
    }

    /// Drops the trailing modes whose magnitude is at most `tol * scale`.
    pub fn trimmed(&self, tol: f64) -> FourierCurve {
        let k = self.k_max;
        let floor = tol * self.scale();
        let mut keep = k;
        while keep > 1 && self.cx[k + keep].norm().max(self.cy[k + keep].norm()) <= floor {
            keep -= 1;
        }
        if keep == k {
            return self.clone();
        }
        FourierCurve {
            k_max: keep,
            cx: self.cx[k - keep..=k + keep].to_vec(),
            cy: self.cy[k - keep..=k + keep].to_vec(),
            param: self.param,
            width_estimate: self.width_estimate,
        }
    }

    /// All derivatives `r^(m)(s)` for `m = 0..=max_order`.
    pub fn eval_upto(&self, s: f64, max_order: usize) -> Vec<Vec2> {
        let k = self.k_max;
        let w = Complex64::from_polar(1.0, 2.0 * PI * s);
        let mut out = vec![Vec2::ZERO; max_order + 1];
        out[0] = Vec2::new(self.cx[k].re, self.cy[k].re);
        let mut z = Complex64::new(1.0, 0.0);
        for j in 1..=k {
            z *= w;
            let ax = self.cx[k + j] * z;
            let ay = self.cy[k + j] * z;
            let mut f = Complex64::new(1.0, 0.0);
            let ik = Complex64::new(0.0, 2.0 * PI * j as f64);
            for o in out.iter_mut() {
                let tx = ax * f;
                let ty = ay * f;
                o.x += 2.0 * tx.re;
                o.y += 2.0 * ty.re;
                f *= ik;
            }
        }
        out
    }

    /// `r^(order)(s)` for `order <= 3`.
    pub fn evaluate(&self, s: f64, order: usize) -> Result<Vec2> {
        if order > 3 {
            return Err(Error::Config(format!("derivative order {order} exceeds 3")));
        }
        Ok(self.eval_upto(s, order)[order])
    }

    pub fn point(&self, s: f64) -> Vec2 {
        self.eval_upto(s, 0)[0]
    }

    pub fn tangent(&self, s: f64) -> Vec2 {
        self.eval_upto(s, 1)[1]
    }

    /// `r(s + h) - r(s)` without cancellation for small `h`.
    pub fn chord(&self, s: f64, h: f64) -> Vec2 {
        let k = self.k_max;
        let w = Complex64::from_polar(1.0, 2.0 * PI * (s + 0.5 * h));
        let mut z = Complex64::new(1.0, 0.0);
        let mut d = Vec2::ZERO;
        for j in 1..=k {
            z *= w;
            let f = z * Complex64::new(0.0, 2.0 * (PI * j as f64 * h).sin());
            d.x += 2.0 * (self.cx[k + j] * f).re;
            d.y += 2.0 * (self.cy[k + j] * f).re;
        }
        d
    }

    /// Exact samples of `r^(order)` on the uniform `n`-point grid.
    pub fn sample_grid(&self, n: usize, order: u32) -> Vec<Vec2> {
        let mut bx = vec![Complex64::new(0.0, 0.0); n];
        let mut by = bx.clone();
        let k = self.k_max as i64;
        let ik = Complex64::new(0.0, 2.0 * PI);
        for j in -k..=k {
            let f = (ik * j as f64).powu(order);
            let b = j.rem_euclid(n as i64) as usize;
            bx[b] += self.coeff_x(j) * f;
            by[b] += self.coeff_y(j) * f;
        }
        let xs = fft::inverse_real(&bx);
        let ys = fft::inverse_real(&by);
        xs.into_iter().zip(ys).map(|(x, y)| Vec2::new(x, y)).collect()
    }

    pub fn speed(&self, s: f64) -> f64 {
        self.tangent(s).norm()
    }

    /// Signed planar curvature `cross(r', r'') / |r'|^3`.
    pub fn curvature_of(&self, s: f64) -> Result<f64> {
        let d = self.eval_upto(s, 2);
        let sp = d[1].norm();
        if sp < 1e-12 {
            return Err(Error::DegenerateSpeed { s, speed: sp });
        }
        Ok(d[1].cross(d[2]) / (sp * sp * sp))
    }

    /// Radius of curvature times speed would be the arclength density; this
    /// returns `rho = 1/kappa` sampled on an `n`-grid of the parameter.
    pub fn radius_of_curvature_grid(&self, n: usize) -> GridFn {
        let d1 = self.sample_grid(n, 1);
        let d2 = self.sample_grid(n, 2);
        GridFn::from_vec(
            d1.iter()
                .zip(&d2)
                .map(|(a, b)| {
                    let sp = a.norm();
                    sp * sp * sp / a.cross(*b)
                })
                .collect(),
        )
    }

    pub fn perimeter(&self) -> f64 {
        let n = dense_count(self.k_max);
        let sp: Vec<f64> = self.sample_grid(n, 1).iter().map(|v| v.norm()).collect();
        sp.iter().sum::<f64>() / n as f64
    }

    /// Checks speed, curvature, winding of the tangent and that the origin
    /// is enclosed.
    pub fn validate(&self, th: &ConvexityThresholds) -> Result<()> {
        let n = dense_count(self.k_max);
        let p = self.sample_grid(n, 0);
        let d1 = self.sample_grid(n, 1);
        let d2 = self.sample_grid(n, 2);
        for j in 0..n {
            let s = j as f64 / n as f64;
            let sp = d1[j].norm();
            if !(sp >= th.min_speed) {
                return Err(Error::DegenerateSpeed { s, speed: sp });
            }
            let kappa = d1[j].cross(d2[j]) / (sp * sp * sp);
            if !(kappa >= th.min_curvature) {
                return Err(Error::ConvexityLoss(format!("curvature {kappa:.3e} at s = {s:.6}")));
            }
        }
        let turn: f64 = (0..n).map(|j| angle_between(d1[j], d1[(j + 1) % n])).sum();
        if ((turn / (2.0 * PI)) - 1.0).abs() > 1e-6 {
            return Err(Error::ConvexityLoss(format!("tangent winding number {:.6}", turn / (2.0 * PI))));
        }
        let wind: f64 = (0..n).map(|j| angle_between(p[j], p[(j + 1) % n])).sum();
        if p.iter().any(|v| v.norm() == 0.0) || ((wind / (2.0 * PI)) - 1.0).abs() > 1e-6 {
            return Err(Error::ConvexityLoss("origin is not strictly inside the curve".into()));
        }
        Ok(())
    }

    /// Attaches `decay_width_estimate` of the coordinate functions.
    pub fn with_width_estimate(mut self) -> Self {
        let n = (4 * self.k_max + 4).next_power_of_two().max(64);
        let pts = self.sample_grid(n, 0);
        let wx = GridFn::from_vec(pts.iter().map(|p| p.x).collect()).decay_width_estimate();
        let wy = GridFn::from_vec(pts.iter().map(|p| p.y).collect()).decay_width_estimate();
        let w = wx.min(wy);
        self.width_estimate = if w.is_finite() { Some(w) } else { None };
        self
    }

    /// Uniform scaling about the origin.
    pub fn scaled(&self, k: f64) -> FourierCurve {
        let mut c = self.clone();
        for z in c.cx.iter_mut().chain(c.cy.iter_mut()) {
            *z *= k;
        }
        c
    }

    pub fn translated(&self, by: Vec2) -> FourierCurve {
        let mut c = self.clone();
        let k = c.k_max;
        c.cx[k].re += by.x;
        c.cy[k].re += by.y;
        c
    }

    /// Evaluates `r` and its first derivative at many parameters.
    pub fn eval_many(&self, params: &[f64], max_order: usize) -> Vec<Vec<Vec2>> {
        par::map_slice(params, |&s| self.eval_upto(s, max_order))
    }
}

/// Dense sample count used for validation and integrals.
pub(crate) fn dense_count(k_max: usize) -> usize {
    (16 * k_max + 16).next_power_of_two().max(512)
}

fn tail_resolved(sx: &[Complex64], sy: &[Complex64], tol: f64) -> bool {
    let n = sx.len();
    let scale = (1..n / 2).map(|k| sx[k].norm().max(sy[k].norm())).fold(0.0, f64::max);
    let tail = (n / 4..=n / 2).map(|k| sx[k].norm().max(sy[k].norm())).fold(0.0, f64::max);
    tail <= tol * scale.max(1e-300)
}

/// Resamples `f(j/m)` into a curve, doubling `m` until the top half of the
/// spectrum is below `RESAMPLE_TAIL_TOL`.
fn resample_adaptive<F>(start: usize, what: &str, f: F) -> Result<FourierCurve>
where
    F: Fn(usize) -> Vec<Vec2>,
{
    let mut m = start.next_power_of_two().max(64);
    loop {
        let pts = f(m);
        let sx = fft::forward_real(&pts.iter().map(|p| p.x).collect::<Vec<_>>());
        let sy = fft::forward_real(&pts.iter().map(|p| p.y).collect::<Vec<_>>());
        if tail_resolved(&sx, &sy, RESAMPLE_TAIL_TOL) {
            return Ok(FourierCurve::from_samples(&pts, ParamKind::General));
        }
        if m >= MAX_RESAMPLE {
            return Err(Error::Resolution(format!("{what}: Fourier tail unresolved at {m} samples")));
        }
        m *= 2;
    }
}

/// Reparametrises by arclength and rescales the perimeter to 1.
pub fn reparametrize_arclength(c: &FourierCurve) -> Result<FourierCurve> {
    // speed density resolved on a fine grid
    let mut n = dense_count(c.k_max);
    let speed = loop {
        let sp = GridFn::from_vec(c.sample_grid(n, 1).iter().map(|v| v.norm()).collect());
        if let Some((j, &v)) = sp.values().iter().enumerate().find(|(_, &v)| v < 1e-9) {
            return Err(Error::DegenerateSpeed { s: j as f64 / n as f64, speed: v });
        }
        let spec = sp.spectrum();
        let top = (n / 4..=n / 2).map(|k| spec[k].norm()).fold(0.0, f64::max);
        if top <= 1e-15 * spec[0].re || n >= MAX_RESAMPLE {
            break sp;
        }
        n *= 2;
    };
    let perimeter = speed.mean();
    let density = speed.map(|v| v - perimeter);
    let periodic = density.antiderivative_from_zero().samples;
    let cum = SpectralEvaluator::new(&periodic);
    // arclength fraction sigma(t) = t + cum(t)/P, strictly increasing
    let invert = |sigma: f64| -> Result<f64> {
        let mut t = sigma;
        for _ in 0..60 {
            let (p, dp) = cum.eval_with_derivative(t);
            let f = t + p / perimeter - sigma;
            let df = 1.0 + dp / perimeter;
            if df <= 0.0 {
                return Err(Error::DegenerateSpeed { s: t, speed: df * perimeter });
            }
            let dt = f / df;
            t -= dt;
            if dt.abs() < 1e-16 {
                return Ok(t);
            }
        }
        Ok(t)
    };
    let out = resample_adaptive(2 * c.k_max + 64, "arclength reparametrisation", |m| {
        let ts: Vec<f64> = (0..m).map(|j| j as f64 / m as f64).collect();
        let ts: Vec<f64> = par::map_slice(&ts, |&s| invert(s).unwrap_or(f64::NAN));
        par::map_slice(&ts, |&t| c.point(t).scale(1.0 / perimeter))
    })?;
    if out.cx.iter().any(|z| !z.re.is_finite()) {
        return Err(Error::DegenerateSpeed { s: 0.0, speed: 0.0 });
    }
    Ok(out.with_param_kind(ParamKind::ArclengthUnit))
}

/// `s -> e^{a(s)} r(s)` where `a` is sampled on a uniform grid of the
/// curve's parameter.
pub fn radial_scale(c: &FourierCurve, a: &GridFn, th: &ConvexityThresholds) -> Result<FourierCurve> {
    let start = (2 * a.len()).max(4 * c.k_max + 8);
    let out = resample_adaptive(start, "radial scaling", |m| {
        let a_up = a.resample(m);
        c.sample_grid(m, 0)
            .into_iter()
            .zip(a_up.values())
            .map(|(p, &av)| p.scale(av.exp()))
            .collect()
    })?;
    out.validate(th).map_err(|e| match e {
        Error::ConvexityLoss(m) => Error::ConvexityLoss(format!("after radial scaling: {m}")),
        other => other,
    })?;
    Ok(out)
}

/// `theta -> r(u(theta))`, resampled and refit.
pub fn compose_with_map(c: &FourierCurve, u: &CircleMap) -> Result<FourierCurve> {
    if u.is_identity() {
        return Ok(c.clone().with_param_kind(ParamKind::General));
    }
    // validates orientation
    let u = CircleMap::new(u.displacement().clone())?;
    let start = (2 * u.len()).max(4 * c.k_max + 8);
    resample_adaptive(start, "composition with circle map", |m| {
        let v = u.displacement().resample(m);
        let params: Vec<f64> = v.values().iter().enumerate().map(|(j, d)| j as f64 / m as f64 + d).collect();
        par::map_slice(&params, |&s| c.point(s))
    })
}

/// Symmetric sup over dense samples of point-to-curve distance.
pub fn geometric_distance(c1: &FourierCurve, c2: &FourierCurve) -> f64 {
    one_sided_distance(c1, c2).max(one_sided_distance(c2, c1))
}

fn one_sided_distance(from: &FourierCurve, to: &FourierCurve) -> f64 {
    let n = dense_count(from.k_max.max(to.k_max)).min(4096);
    let src = from.sample_grid(n, 0);
    let m = n;
    let dst = to.sample_grid(m, 0);
    let d = par::map_indexed(n, |i| {
        let p = src[i];
        let (mut best_j, mut best) = (0, f64::INFINITY);
        for (j, q) in dst.iter().enumerate() {
            let d = (*q - p).norm();
            if d < best {
                best = d;
                best_j = j;
            }
        }
        let mut s = best_j as f64 / m as f64;
        let mut dist = best;
        for _ in 0..30 {
            let r = to.eval_upto(s, 2);
            let diff = r[0] - p;
            let f = diff.dot(r[1]);
            let df = r[1].dot(r[1]) + diff.dot(r[2]);
            if df <= 0.0 {
                break;
            }
            let step = (f / df).clamp(-1.0 / m as f64, 1.0 / m as f64);
            s -= step;
            if step.abs() < 1e-17 {
                break;
            }
        }
        let cand = (to.point(s) - p).norm();
        if cand < dist {
            dist = cand;
        }
        dist
    });
    d.into_iter().fold(0.0, f64::max)
}
