//! Expansions of the billiard map in the angle at a fixed boundary point,
//! `s^+- = s + sum b_k^+- theta^k` and `theta^+- = theta + sum d_k^+- theta^k`.
//!
//! Time reversal gives `b_k^- = (-1)^k b_k` and `d_k^- = (-1)^(k+1) d_k`;
//! the table stores the forward coefficients.

use crate::boundary::FourierCurve;
use crate::error::{Error, Result};
use crate::fit::least_squares;
use crate::geom::Vec2;
use crate::par;
use crate::periodic::{Direction, GridFn};
use crate::series::Series;

use super::step_advance;

/// Coefficients at one boundary point: `b[0] = b_1`, `d[0] = d_2`.
#[derive(Debug, Clone, PartialEq)]
pub struct PointJets {
    pub b: Vec<f64>,
    pub d: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct JetTable {
    pub order: usize,
    /// `b[k - 1]` holds `b_k` on the grid.
    pub b: Vec<GridFn>,
    /// `d[k - 2]` holds `d_k` on the grid.
    pub d: Vec<GridFn>,
    /// Largest relative least-squares residual over the grid (0 for exact
    /// series jets).
    pub fit_residual: f64,
}

impl JetTable {
    pub fn b(&self, k: usize) -> &GridFn {
        &self.b[k - 1]
    }

    pub fn d(&self, k: usize) -> &GridFn {
        &self.d[k - 2]
    }

    pub fn len(&self) -> usize {
        self.b[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.b.is_empty()
    }

    /// Forward (`Direction::Forward`) or backward jets at grid point `j`.
    pub fn at(&self, j: usize, dir: Direction) -> PointJets {
        let flip = matches!(dir, Direction::Backward);
        let b = (1..=self.order)
            .map(|k| {
                let v = self.b(k).values()[j];
                if flip && k % 2 == 1 {
                    -v
                } else {
                    v
                }
            })
            .collect();
        let d = (2..=self.order)
            .map(|k| {
                let v = self.d(k).values()[j];
                if flip && k % 2 == 0 {
                    -v
                } else {
                    v
                }
            })
            .collect();
        PointJets { b, d }
    }
}

struct VecSeries {
    x: Series,
    y: Series,
}

impl VecSeries {
    fn cross(&self, o: &VecSeries) -> Series {
        &(&self.x * &o.y) - &(&self.y * &o.x)
    }

    fn dot(&self, o: &VecSeries) -> Series {
        &(&self.x * &o.x) + &(&self.y * &o.y)
    }

    fn cross_const(v: Vec2, s: &VecSeries) -> Series {
        &s.y.scale(v.x) - &s.x.scale(v.y)
    }

    fn dot_const(v: Vec2, s: &VecSeries) -> Series {
        &s.x.scale(v.x) + &s.y.scale(v.y)
    }
}

/// Exact Taylor jets up to `theta^order` from the curve's derivatives.
pub fn taylor_jets(c: &FourierCurve, s: f64, order: usize, dir: Direction) -> PointJets {
    let sign: f64 = match dir {
        Direction::Forward => 1.0,
        Direction::Backward => -1.0,
    };
    let derivs = c.eval_upto(s, order + 1);
    let mut fact = 1.0;
    let mut ax = vec![0.0; order + 1];
    let mut ay = vec![0.0; order + 1];
    let mut tx = vec![0.0; order + 1];
    let mut ty = vec![0.0; order + 1];
    // A(h) = (r(s + sign h) - r(s)) / (sign h), T(h) = r'(s + sign h)
    for n in 1..=order + 1 {
        fact *= n as f64;
        let p = sign.powi(n as i32 - 1);
        ax[n - 1] = derivs[n].x * p / fact;
        ay[n - 1] = derivs[n].y * p / fact;
    }
    let mut fact = 1.0;
    for n in 0..=order {
        if n > 0 {
            fact *= n as f64;
        }
        let p = sign.powi(n as i32);
        tx[n] = derivs[n + 1].x * p / fact;
        ty[n] = derivs[n + 1].y * p / fact;
    }
    let a = VecSeries { x: Series::from_coeffs(order, &ax), y: Series::from_coeffs(order, &ay) };
    let t = VecSeries { x: Series::from_coeffs(order, &tx), y: Series::from_coeffs(order, &ty) };
    let tangent = derivs[1];

    let mut ratio = VecSeries::cross_const(tangent, &a).div(&VecSeries::dot_const(tangent, &a)).scale(sign);
    ratio.set_coeff(0, 0.0);
    let angle_of_h = ratio.atan();
    let h_of_angle = angle_of_h.reversion();

    let mut ratio_new = a.cross(&t).div(&a.dot(&t)).scale(sign);
    ratio_new.set_coeff(0, 0.0);
    let new_angle = ratio_new.atan().compose(&h_of_angle);

    PointJets {
        b: (1..=order).map(|k| sign * h_of_angle.coeff(k)).collect(),
        d: (2..=order).map(|k| new_angle.coeff(k)).collect(),
    }
}

/// Forward Taylor jets on an `n`-grid.
pub fn jet_table(c: &FourierCurve, n: usize, order: usize) -> JetTable {
    let pts = par::map_indexed(n, |j| taylor_jets(c, j as f64 / n as f64, order, Direction::Forward));
    let b = (0..order).map(|i| GridFn::from_vec(pts.iter().map(|p| p.b[i]).collect())).collect();
    let d = (0..order.saturating_sub(1)).map(|i| GridFn::from_vec(pts.iter().map(|p| p.d[i]).collect())).collect();
    JetTable { order, b, d, fit_residual: 0.0 }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LadderConfig {
    pub theta0: f64,
    pub levels: usize,
    pub grid: usize,
    /// Relative least-squares residual above which extraction fails.
    pub max_residual: f64,
}

impl Default for LadderConfig {
    fn default() -> Self {
        LadderConfig { theta0: 1e-2, levels: 8, grid: 256, max_residual: 1e-9 }
    }
}

/// Fits `sum_{k in ks} c_k x^k` to `(x_i, y_i)`; returns coefficients and
/// the largest residual divided by `scale`.
fn fit_powers(xs: &[f64], ys: &[f64], ks: &[usize], scale: f64) -> Option<(Vec<f64>, f64)> {
    if ks.is_empty() {
        return Some((Vec::new(), 0.0));
    }
    let a: Vec<f64> = xs.iter().flat_map(|&x| ks.iter().map(move |&k| x.powi(k as i32))).collect();
    let coef = least_squares(&a, ks.len(), ys)?;
    let res = xs
        .iter()
        .zip(ys)
        .map(|(&x, &y)| {
            let p: f64 = ks.iter().zip(&coef).map(|(&k, c)| c * x.powi(k as i32)).sum();
            (p - y).abs()
        })
        .fold(0.0, f64::max);
    Some((coef, res / scale))
}

/// Jets from least-squares fits to billiard steps on the geometric angle
/// ladder `theta0 2^-i`, using forward and backward steps to separate the
/// even and odd parts. Two orders beyond `order` are fitted and discarded
/// to absorb the truncation error; residuals are relative to the step size.
pub fn extract_jets(c: &FourierCurve, order: usize, cfg: &LadderConfig) -> Result<JetTable> {
    let fit_order = order + 2;
    if order < 2 || cfg.levels <= fit_order / 2 + 1 {
        return Err(Error::Config(format!("{} ladder levels cannot resolve order {order}", cfg.levels)));
    }
    let n = cfg.grid;
    let xs: Vec<f64> = (0..cfg.levels).map(|i| 0.5f64.powi(i as i32)).collect();
    let odd: Vec<usize> = (1..=fit_order).filter(|k| k % 2 == 1).collect();
    let even: Vec<usize> = (2..=fit_order).filter(|k| k % 2 == 0).collect();
    let odd_d: Vec<usize> = (3..=fit_order).filter(|k| k % 2 == 1).collect();
    let rows = par::try_map_indexed(n, |j| {
        let s = j as f64 / n as f64;
        let mut bo = Vec::new();
        let mut be = Vec::new();
        let mut dodd = Vec::new();
        let mut deven = Vec::new();
        for &x in &xs {
            let th = cfg.theta0 * x;
            let (hp, tp) = step_advance(c, s, th, Direction::Forward)?;
            let (hm, tm) = step_advance(c, s, th, Direction::Backward)?;
            // s^+ - s = hp, s^- - s = -hm
            bo.push(0.5 * (hp + hm));
            be.push(0.5 * (hp - hm));
            dodd.push(0.5 * ((tp - th) + (tm - th)));
            deven.push(0.5 * (tp - tm));
        }
        let step_scale = bo[0].abs().max(f64::MIN_POSITIVE);
        let fit = |ys: &[f64], ks: &[usize], scale: f64| {
            fit_powers(&xs, ys, ks, scale).ok_or_else(|| Error::JetExtraction(format!("singular ladder fit at s = {s}")))
        };
        let (cbo, r1) = fit(&bo, &odd, step_scale)?;
        let (cbe, r2) = fit(&be, &even, step_scale)?;
        let (cdo, r3) = fit(&dodd, &odd_d, cfg.theta0)?;
        let (cde, r4) = fit(&deven, &even, cfg.theta0)?;
        let mut b = vec![0.0; order];
        let mut d = vec![0.0; order - 1];
        for (k, v) in odd.iter().zip(cbo).chain(even.iter().zip(cbe)) {
            if *k <= order {
                b[k - 1] = v / cfg.theta0.powi(*k as i32);
            }
        }
        for (k, v) in odd_d.iter().zip(cdo).chain(even.iter().zip(cde)) {
            if *k <= order {
                d[k - 2] = v / cfg.theta0.powi(*k as i32);
            }
        }
        Ok::<_, Error>((b, d, r1.max(r2).max(r3).max(r4)))
    })?;
    let fit_residual = rows.iter().map(|r| r.2).fold(0.0, f64::max);
    if fit_residual > cfg.max_residual {
        return Err(Error::JetExtraction(format!("ladder fit residual {fit_residual:.3e}")));
    }
    let b = (0..order).map(|i| GridFn::from_vec(rows.iter().map(|r| r.0[i]).collect())).collect();
    let d = (0..order - 1).map(|i| GridFn::from_vec(rows.iter().map(|r| r.1[i]).collect())).collect();
    Ok(JetTable { order, b, d, fit_residual })
}
