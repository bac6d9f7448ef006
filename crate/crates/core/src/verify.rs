//! Independent checks that a boundary carries a caustic of rotation number
//! `1/q`: closure of billiard orbits and the envelope of the chord family.
//! Nothing here touches the defect functions or the solver grids.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::billiard::step_advance;
use crate::boundary::FourierCurve;
use crate::error::{Error, Result};
use crate::geom::Vec2;
use crate::par;
use crate::periodic::{Direction, GridFn};

/// Offset of the first porism start point, chosen to miss any uniform grid.
const START_OFFSET: f64 = 0.381_966_011_250_105;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VerifyThresholds {
    pub closure: f64,
    pub tangency: f64,
}

impl Default for VerifyThresholds {
    fn default() -> Self {
        VerifyThresholds { closure: 1e-8, tangency: 1e-8 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CausticReport {
    pub q: usize,
    pub n_samples: usize,
    /// Sup over start points of `|r(s_q) - r(s_0)| + P / (2 pi) |angle_q - angle_0|`.
    pub max_closure_error: f64,
    /// Every sampled orbit advanced exactly once around the boundary.
    pub rotation_number_checked: bool,
    pub envelope_points: Vec<[f64; 2]>,
    pub max_tangency_residual: f64,
    /// Envelope winds once and stays strictly inside the boundary.
    pub envelope_inside: bool,
}

impl CausticReport {
    pub fn passes(&self, th: &VerifyThresholds) -> bool {
        self.rotation_number_checked
            && self.envelope_inside
            && self.max_closure_error <= th.closure
            && self.max_tangency_residual <= th.tangency
    }
}

/// Angle at `s` between the tangent and the chord to `s + 1/q`.
fn launch_angle(c: &FourierCurve, s: f64, q: usize) -> f64 {
    let e = c.chord(s, 1.0 / q as f64);
    let t = c.tangent(s);
    t.cross(e).atan2(t.dot(e))
}

/// `(closure error, total advance)` of the orbit launched along the chord
/// from `s` to `s + 1/q`.
fn orbit_closure(c: &FourierCurve, s0: f64, q: usize, perimeter: f64) -> Result<(f64, f64)> {
    let theta0 = launch_angle(c, s0, q);
    let (mut s, mut theta, mut advance) = (s0, theta0, 0.0);
    for _ in 0..q {
        let (h, next) = step_advance(c, s, theta, Direction::Forward)?;
        advance += h;
        s = s0 + advance;
        theta = next;
    }
    let gap = c.chord(s0, advance - advance.round()).norm();
    let err = gap + perimeter / (2.0 * PI) * (theta - theta0).abs();
    Ok((err, advance))
}

/// Launches `n_samples` orbits from off-grid points along the chords of
/// parameter length `1/q` and measures how far they are from closing after
/// `q` bounces.
pub fn porism_check(c: &FourierCurve, q: usize, n_samples: usize) -> Result<(f64, bool)> {
    if q < 2 || n_samples == 0 {
        return Err(Error::Config(format!("porism check needs q >= 2 and samples, got q = {q}, {n_samples}")));
    }
    let perimeter = c.perimeter();
    let runs = par::try_map_indexed(n_samples, |i| {
        orbit_closure(c, (i as f64 + START_OFFSET) / n_samples as f64, q, perimeter)
    })?;
    let max_err = runs.iter().map(|r| r.0).fold(0.0, f64::max);
    let winds_once = runs.iter().all(|r| (r.1 - 1.0).abs() < 0.5 / q as f64);
    Ok((max_err, winds_once))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Envelope {
    pub points: Vec<Vec2>,
    pub max_tangency_residual: f64,
}

/// Envelope of the lines through `r(theta)` and `r(theta + 1/q)` on an
/// `n`-grid, `P + t D` with `t = -(P' x D) / (D' x D)`.
///
/// The tangency residual is the largest distance of a chord's endpoints from
/// the envelope tangent line at its contact point, the tangent taken from
/// the spectral derivative of the envelope samples.
pub fn caustic_envelope(c: &FourierCurve, q: usize, n: usize) -> Result<Envelope> {
    if q < 2 || n < 8 {
        return Err(Error::Config(format!("envelope needs q >= 2 and at least 8 points, got q = {q}, n = {n}")));
    }
    let h = 1.0 / q as f64;
    let scale = c.scale();
    let pts = par::try_map_indexed(n, |j| {
        let s = j as f64 / n as f64;
        let a = c.eval_upto(s, 1);
        let b = c.eval_upto(s + h, 1);
        let d = c.chord(s, h);
        let dd = b[1] - a[1];
        let den = dd.cross(d);
        if !(den.abs() > 1e-12 * scale * scale) {
            return Err(Error::DegenerateEnvelope(format!("consecutive chords parallel at theta = {s:.6}")));
        }
        let t = -a[1].cross(d) / den;
        Ok(a[0] + d.scale(t))
    })?;
    let xs = GridFn::new(pts.iter().map(|p| p.x).collect())?.derivative();
    let ys = GridFn::new(pts.iter().map(|p| p.y).collect())?.derivative();
    let mut worst: f64 = 0.0;
    for (j, p) in pts.iter().enumerate() {
        let tangent = Vec2::new(xs.values()[j], ys.values()[j]);
        let tn = tangent.norm();
        if !(tn > 0.0) {
            return Err(Error::DegenerateEnvelope(format!("envelope is singular at theta = {:.6}", j as f64 / n as f64)));
        }
        let s = j as f64 / n as f64;
        let (a, b) = (c.point(s), c.point(s + h));
        let dist = |x: Vec2| (x - *p).cross(tangent).abs() / tn;
        worst = worst.max(dist(a)).max(dist(b));
    }
    Ok(Envelope { points: pts, max_tangency_residual: worst })
}

/// Winding number of the closed polyline `pts` around `x`.
fn winding_number(pts: &[Vec2], x: Vec2) -> i64 {
    let mut total = 0.0;
    for (i, p) in pts.iter().enumerate() {
        let a = *p - x;
        let b = pts[(i + 1) % pts.len()] - x;
        total += a.cross(b).atan2(a.dot(b));
    }
    (total / (2.0 * PI)).round() as i64
}

/// Envelope winds once around its centroid and lies inside the boundary.
pub fn envelope_inside(c: &FourierCurve, env: &[Vec2]) -> bool {
    let n = env.len() as f64;
    let centroid = env.iter().fold(Vec2::ZERO, |acc, p| acc + *p).scale(1.0 / n);
    if winding_number(env, centroid) != 1 {
        return false;
    }
    let boundary = c.sample_grid((4 * c.k_max() + 8).next_power_of_two().max(1024), 0);
    env.iter().all(|p| winding_number(&boundary, *p) == 1)
}

/// Porism check with `n_samples` orbits and the envelope on an
/// `n_envelope`-grid.
pub fn verify(c: &FourierCurve, q: usize, n_samples: usize, n_envelope: usize) -> Result<CausticReport> {
    let (max_closure_error, rotation_number_checked) = porism_check(c, q, n_samples)?;
    let env = caustic_envelope(c, q, n_envelope)?;
    let inside = envelope_inside(c, &env.points);
    Ok(CausticReport {
        q,
        n_samples,
        max_closure_error,
        rotation_number_checked,
        envelope_points: env.points.iter().map(|p| [p.x, p.y]).collect(),
        max_tangency_residual: env.max_tangency_residual,
        envelope_inside: inside,
    })
}

/// `x,y` lines with a header.
pub fn envelope_csv(points: &[[f64; 2]]) -> String {
    let mut out = String::from("x,y\n");
    for p in points {
        out.push_str(&format!("{:e},{:e}\n", p[0], p[1]));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;

    #[test]
    fn circle_orbits_close() {
        let c = presets::circle();
        let (err, ok) = porism_check(&c, 5, 17).unwrap();
        assert!(ok && err < 1e-12, "{err}");
    }

    #[test]
    fn circle_envelope_is_concentric_circle() {
        let c = presets::circle();
        let r = 1.0 / (2.0 * PI);
        for q in [3, 5, 9] {
            let env = caustic_envelope(&c, q, 64).unwrap();
            let want = r * (PI / q as f64).cos();
            let dev = env.points.iter().map(|p| (p.norm() - want).abs()).fold(0.0, f64::max);
            assert!(dev < 1e-10, "q={q}: {dev}");
            assert!(env.max_tangency_residual < 1e-10);
            assert!(envelope_inside(&c, &env.points));
        }
    }

    #[test]
    fn arclength_ellipse_is_not_a_porism_family() {
        // uniform arclength chords of an ellipse are not caustic chords
        let e = presets::ellipse(1.3, 0.8).unwrap();
        let (err, _) = porism_check(&e, 4, 8).unwrap();
        assert!(err > 1e-4, "{err}");
    }

    #[test]
    fn csv_has_header_and_rows() {
        let s = envelope_csv(&[[1.0, 2.0], [3.0, -4.5]]);
        assert_eq!(s.lines().count(), 3);
        assert!(s.starts_with("x,y\n"));
    }
}
