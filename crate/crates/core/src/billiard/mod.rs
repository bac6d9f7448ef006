//! Generating function, defect functionals and the billiard map.
//!
//! The outgoing angle `theta` is measured from the positive tangent, so for
//! a unit-speed boundary `cos theta = -d1 L(s, s')` and the angle at the
//! next impact satisfies `cos theta' = d2 L(s, s')`.

mod jets;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::boundary::FourierCurve;
use crate::error::{Error, Result};
use crate::geom::Vec2;
use crate::par;
use crate::periodic::{CircleMap, Direction, GridFn};

pub use jets::{extract_jets, jet_table, taylor_jets, JetTable, LadderConfig, PointJets};

/// Chords shorter than this (relative to the curve size) are singular.
const MIN_CHORD: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChordState {
    pub s: f64,
    pub theta: f64,
}

impl ChordState {
    pub fn new(s: f64, theta: f64) -> Self {
        ChordState { s: s.rem_euclid(1.0), theta }
    }
}

/// `L(s, s')` and its derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChordData {
    pub length: f64,
    pub d1: f64,
    pub d2: f64,
    pub d12: f64,
}

fn chord_from(c: &FourierCurve, s: f64, delta: Vec2, t0: Vec2, t1: Vec2, s_next: f64) -> Result<ChordData> {
    let length = delta.norm();
    if !(length > MIN_CHORD * c.scale().max(1e-300)) {
        return Err(Error::SingularChord { s, s_next });
    }
    let e = delta.scale(1.0 / length);
    Ok(ChordData {
        length,
        d1: -e.dot(t0),
        d2: e.dot(t1),
        d12: -e.cross(t0) * e.cross(t1) / length,
    })
}

pub fn chord_data(c: &FourierCurve, s: f64, s_next: f64) -> Result<ChordData> {
    let delta = c.chord(s, s_next - s);
    chord_from(c, s, delta, c.tangent(s), c.tangent(s_next), s_next)
}

fn check_grid(n: usize, q: usize) -> Result<usize> {
    if q < 2 || !n.is_multiple_of(q) {
        return Err(Error::Config(format!("grid size {n} is not a multiple of q = {q}")));
    }
    Ok(n / q)
}

/// `(u(theta_j - 1/q), u(theta_j), u(theta_j + 1/q))` unwrapped.
fn neighbours(u: &[f64], j: usize, m: usize) -> (f64, f64, f64) {
    let n = u.len();
    let plus = if j + m >= n { u[j + m - n] + 1.0 } else { u[j + m] };
    let minus = if j < m { u[j + n - m] - 1.0 } else { u[j - m] };
    (minus, u[j], plus)
}

struct Triple {
    e_minus: Vec2,
    e_plus: Vec2,
    point: Vec2,
    tangent: Vec2,
}

fn triple(c: &FourierCurve, u: &[f64], j: usize, m: usize) -> Result<Triple> {
    let (sm, s, sp) = neighbours(u, j, m);
    let dm = c.chord(sm, s - sm);
    let dp = c.chord(s, sp - s);
    let tol = MIN_CHORD * c.scale().max(1e-300);
    if !(dm.norm() > tol) {
        return Err(Error::SingularChord { s: sm, s_next: s });
    }
    if !(dp.norm() > tol) {
        return Err(Error::SingularChord { s, s_next: sp });
    }
    let d = c.eval_upto(s, 1);
    Ok(Triple { e_minus: dm.normalized(), e_plus: dp.normalized(), point: d[0], tangent: d[1] })
}

/// `E(r, u) = <e^- - e, r'(u)>` on the grid of `u`.
pub fn defect_e(c: &FourierCurve, u: &CircleMap, q: usize) -> Result<GridFn> {
    let m = check_grid(u.len(), q)?;
    let s = u.samples();
    let vals = par::try_map_indexed(s.len(), |j| {
        let t = triple(c, &s, j, m)?;
        Ok::<_, Error>((t.e_minus - t.e_plus).dot(t.tangent))
    })?;
    GridFn::new(vals)
}

/// `d2 L(u^-, u) + d1 L(u, u^+)`, the variational form of [`defect_e`].
pub fn defect_e_lagrangian(c: &FourierCurve, u: &CircleMap, q: usize) -> Result<GridFn> {
    let m = check_grid(u.len(), q)?;
    let s = u.samples();
    let vals = par::try_map_indexed(s.len(), |j| {
        let (sm, s0, sp) = neighbours(&s, j, m);
        Ok::<_, Error>(chord_data(c, sm, s0)?.d2 + chord_data(c, s0, sp)?.d1)
    })?;
    GridFn::new(vals)
}

/// `F(r, u) = <e^- - e, r(u)>`.
pub fn defect_f(c: &FourierCurve, u: &CircleMap, q: usize) -> Result<GridFn> {
    let m = check_grid(u.len(), q)?;
    let s = u.samples();
    let vals = par::try_map_indexed(s.len(), |j| {
        let t = triple(c, &s, j, m)?;
        Ok::<_, Error>((t.e_minus - t.e_plus).dot(t.point))
    })?;
    GridFn::new(vals)
}

/// `|r(theta + 1/q) - r(theta)|` on an `n`-grid.
pub fn chord_lengths(c: &FourierCurve, n: usize, q: usize) -> Result<GridFn> {
    check_grid(n, q)?;
    let h = 1.0 / q as f64;
    GridFn::new(par::map_indexed(n, |j| c.chord(j as f64 / n as f64, h).norm()))
}

/// `d12 L(theta, theta + 1/q)` on an `n`-grid.
pub fn mixed_partial_grid(c: &FourierCurve, n: usize, q: usize) -> Result<GridFn> {
    check_grid(n, q)?;
    let h = 1.0 / q as f64;
    let vals = par::try_map_indexed(n, |j| {
        let s = j as f64 / n as f64;
        chord_data(c, s, s + h).map(|d| d.d12)
    })?;
    GridFn::new(vals)
}

/// Direction-aware chord angle: the angle at `s` between the tangent
/// (forward) or the reversed tangent (backward) and the chord to `s +- h`,
/// together with its derivative in `h`.
fn chord_angle(c: &FourierCurve, s: f64, h: f64, tangent: Vec2, sign: f64) -> (f64, f64) {
    let delta = c.chord(s, sign * h);
    let next_tangent = c.tangent(s + sign * h);
    let y = tangent.cross(delta);
    let x = sign * tangent.dot(delta);
    let dy = sign * tangent.cross(next_tangent);
    let dx = tangent.dot(next_tangent);
    (y.atan2(x), (x * dy - y * dx) / (x * x + y * y))
}

/// Parameter advance `h > 0` and the new angle for one bounce.
pub fn step_advance(c: &FourierCurve, s: f64, theta: f64, dir: Direction) -> Result<(f64, f64)> {
    if !(theta > 0.0 && theta < PI) {
        return Err(Error::GeometricFailure { s, angle: theta, reason: "angle outside (0, pi)".into() });
    }
    let sign = match dir {
        Direction::Forward => 1.0,
        Direction::Backward => -1.0,
    };
    let d = c.eval_upto(s, 2);
    let tangent = d[1];
    let speed = tangent.norm();
    let curvature = tangent.cross(d[2]) / (speed * speed * speed);
    let guess = 2.0 * theta / (curvature * speed);
    let (mut lo, mut hi) = (0.0, 1.0);
    let mut h = if guess > 0.0 && guess < 0.9 { guess } else { 0.5 };
    let mut converged = false;
    for _ in 0..200 {
        let (phi, dphi) = chord_angle(c, s, h, tangent, sign);
        let f = phi - theta;
        if f > 0.0 {
            hi = h;
        } else {
            lo = h;
        }
        if f.abs() <= 4.0 * f64::EPSILON * theta {
            converged = true;
            break;
        }
        let next = h - f / dphi;
        let bisect = 0.5 * (lo + hi);
        h = if dphi > 0.0 && next > lo && next < hi { next } else { bisect };
        if hi - lo <= 4.0 * f64::EPSILON * h {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::GeometricFailure { s, angle: theta, reason: format!("no chord found, bracket [{lo:e}, {hi:e}]") });
    }
    let delta = c.chord(s, sign * h);
    let t_new = c.tangent(s + sign * h);
    // the ray always travels from the earlier to the later impact
    let e = delta.scale(sign);
    let new_theta = if sign > 0.0 {
        e.cross(t_new).atan2(e.dot(t_new))
    } else {
        t_new.cross(e).atan2(t_new.dot(e))
    };
    let cos_residual = (theta.cos() - e.normalized().dot(tangent.normalized())).abs();
    if cos_residual > 1e-12 {
        return Err(Error::GeometricFailure { s, angle: theta, reason: format!("reflection residual {cos_residual:e}") });
    }
    Ok((h, new_theta))
}

pub fn billiard_step(c: &FourierCurve, st: ChordState, dir: Direction) -> Result<ChordState> {
    let (h, theta) = step_advance(c, st.s, st.theta, dir)?;
    let s = match dir {
        Direction::Forward => st.s + h,
        Direction::Backward => st.s - h,
    };
    Ok(ChordState::new(s, theta))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;

    #[test]
    fn circle_chord_closed_forms() {
        let c = presets::circle();
        for &h in &[0.5, 0.1, 1e-3] {
            let d = chord_data(&c, 0.3, 0.3 + h).unwrap();
            assert!((d.length - (PI * h).sin() / PI).abs() < 1e-15);
            assert!((d.d12 - PI * (PI * h).sin()).abs() < 1e-12);
            assert!((d.d1 + (PI * h).cos()).abs() < 1e-14);
        }
        let h = 1e-4;
        let d = chord_data(&c, 0.1, 0.1 + h).unwrap();
        let kappa = 2.0 * PI;
        assert!((d.d12 - 0.25 * kappa * kappa * h).abs() < 1e-6 * h);
        assert!(chord_data(&c, 0.2, 0.2).is_err());
    }

    #[test]
    fn circle_defects() {
        let c = presets::circle();
        for q in [3, 5, 8] {
            let u = CircleMap::identity(32 * q);
            assert!(defect_e(&c, &u, q).unwrap().sup_norm() < 1e-14);
            let f = defect_f(&c, &u, q).unwrap();
            let r = 1.0 / (2.0 * PI);
            let expect = 2.0 * r * (PI / q as f64).sin();
            // F = <e^- - e, r>: twice the half-chord projection
            assert!((f.map(|v| v - expect)).sup_norm() < 1e-14, "{}", f.values()[0]);
        }
        assert!(defect_e(&c, &CircleMap::identity(64), 5).is_err());
    }

    #[test]
    fn ellipse_defect_matches_lagrangian_form() {
        let e = presets::ellipse(1.1, 0.9).unwrap();
        let u = CircleMap::identity(160);
        let a = defect_e(&e, &u, 5).unwrap();
        let b = defect_e_lagrangian(&e, &u, 5).unwrap();
        assert!(a.sup_norm() > 1e-4);
        assert!((&a - &b).sup_norm() < 1e-12);
    }

    #[test]
    fn circle_step_is_rotation() {
        let c = presets::circle();
        for &(s, th) in &[(0.1, 0.3), (0.9, 2.0), (0.5, 1e-3)] {
            let next = billiard_step(&c, ChordState::new(s, th), Direction::Forward).unwrap();
            let expect = (s + th / PI).rem_euclid(1.0);
            assert!((next.s - expect).abs() < 1e-13);
            assert!((next.theta - th).abs() < 1e-13);
        }
    }

    #[test]
    fn step_reversibility() {
        let e = presets::ellipse(1.2, 0.8).unwrap();
        for &(s, th) in &[(0.1, 0.3), (0.77, 2.5), (0.4, 1e-2)] {
            let st = ChordState::new(s, th);
            let fwd = billiard_step(&e, st, Direction::Forward).unwrap();
            let back = billiard_step(&e, fwd, Direction::Backward).unwrap();
            let ds = (back.s - st.s + 0.5).rem_euclid(1.0) - 0.5;
            assert!(ds.abs() < 1e-11 && (back.theta - th).abs() < 1e-11);
        }
        assert!(billiard_step(&e, ChordState::new(0.0, 4.0), Direction::Forward).is_err());
    }
}
