//! Lazutkin coordinates of adjustable order and the approximate invariant
//! circle they induce.
//!
//! `X(s, theta) = F_0(s) + sum_{i=1..k} F_{2i}(s) theta^{2i}` is built so that
//! `X(T(s, theta)) - 2 X(s, theta) + X(T^{-1}(s, theta)) = O(theta^{2k+4})`,
//! and `Y(s, theta) = X(s, theta) - X(T^{-1}(s, theta))`.

use log::debug;

use crate::billiard::{jet_table, step_advance, ChordState, JetTable};
use crate::boundary::{FourierCurve, ParamKind};
use crate::error::{Error, Result};
use crate::par;
use crate::periodic::{CircleMap, Direction, GridFn, SpectralEvaluator};
use crate::series::Series;

/// Relative mean of the source term above which an order is rejected as
/// unsolvable.
pub const SOLVABILITY_TOL: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct NormalForm {
    order: usize,
    c_norm: f64,
    rho: GridFn,
    /// `F_0(s) - s`.
    f0_periodic: GridFn,
    /// `f[i - 1] = F_{2i}`.
    f: Vec<GridFn>,
    f0_eval: SpectralEvaluator,
    f_eval: Vec<SpectralEvaluator>,
    rho_eval: SpectralEvaluator,
    /// Relative mean of the source term removed at each order.
    pub solvability_defects: Vec<f64>,
}

impl NormalForm {
    pub fn order(&self) -> usize {
        self.order
    }

    /// `C` in `F_0' = C rho^{-2/3}`.
    pub fn c_norm(&self) -> f64 {
        self.c_norm
    }

    pub fn rho(&self) -> &GridFn {
        &self.rho
    }

    /// `F_0` on the grid, including the linear part.
    pub fn f0(&self) -> GridFn {
        let n = self.f0_periodic.len();
        GridFn::from_fn(n, |s| s) .zip_with(&self.f0_periodic, |a, b| a + b)
    }

    /// `F_{2i}` for `i >= 1`.
    pub fn f(&self, i: usize) -> &GridFn {
        &self.f[i - 1]
    }

    pub fn eval_f0(&self, s: f64) -> f64 {
        s + self.f0_eval.eval(s)
    }

    pub fn eval_x(&self, s: f64, theta: f64) -> f64 {
        let t2 = theta * theta;
        let mut p = t2;
        let mut x = self.eval_f0(s);
        for e in &self.f_eval {
            x += e.eval(s) * p;
            p *= t2;
        }
        x
    }

    /// `X(s + h, theta') - X(s, theta)` with the `s` increments evaluated
    /// without cancellation.
    pub fn x_increment(&self, s: f64, theta: f64, h: f64, theta_new: f64) -> f64 {
        let mut out = h + self.f0_eval.increment(s, h);
        let (t2, n2) = (theta * theta, theta_new * theta_new);
        let (mut p, mut pn) = (t2, n2);
        for e in &self.f_eval {
            let df = e.increment(s, h);
            // F(s+h) p_new - F(s) p = dF p_new + F (p_new - p)
            out += df * pn + e.eval(s) * (pn - p);
            p *= t2;
            pn *= n2;
        }
        out
    }

    /// `F_0'(s) = C rho(s)^{-2/3}`.
    pub fn f0_prime(&self, s: f64) -> f64 {
        self.c_norm * self.rho_eval.eval(s).powf(-2.0 / 3.0)
    }

    /// `(F_0^{-1}(x), X_s)`, solving by Newton.
    pub fn invert_f0(&self, x: f64) -> f64 {
        let mut s = x - self.f0_eval.eval(x);
        for _ in 0..50 {
            let f = self.eval_f0(s) - x;
            let ds = f / self.f0_prime(s);
            s -= ds;
            if ds.abs() < 1e-16 {
                break;
            }
        }
        s
    }

    fn x_theta_derivative(&self, s: f64, theta: f64) -> (f64, f64) {
        let mut xs = self.f0_prime(s);
        let mut xt = 0.0;
        let t2 = theta * theta;
        let mut p = 1.0;
        for (i, e) in self.f_eval.iter().enumerate() {
            let m = 2 * (i + 1);
            let (v, dv) = e.eval_with_derivative(s);
            xt += m as f64 * v * p * theta;
            p *= t2;
            xs += dv * p;
        }
        (xs, xt)
    }
}

/// Derivatives `g, g', ..., g^(order)` on the grid.
fn derivative_stack(g: &GridFn, order: usize) -> Vec<GridFn> {
    let mut out = vec![g.clone()];
    for _ in 0..order {
        let next = out.last().unwrap().derivative();
        out.push(next);
    }
    out
}

/// Coefficients of `X(T) - 2X + X(T^{-1})` in `theta` at grid point `j`
/// for the coordinate with the given derivative stacks.
fn remainder_series(stacks: &[Vec<GridFn>], jets: &JetTable, j: usize, order: usize) -> Series {
    let fwd = jets.at(j, Direction::Forward);
    let bwd = jets.at(j, Direction::Backward);
    let mk = |b: &[f64], d: &[f64]| {
        let mut delta = Series::zero(order);
        let mut th = Series::var(order);
        for (k, v) in b.iter().enumerate().take(order) {
            delta.set_coeff(k + 1, *v);
        }
        for (k, v) in d.iter().enumerate() {
            if k + 2 <= order {
                th.set_coeff(k + 2, th.coeff(k + 2) + v);
            }
        }
        (delta, th)
    };
    let (dp, tp) = mk(&fwd.b, &fwd.d);
    let (dm, tm) = mk(&bwd.b, &bwd.d);
    let var = Series::var(order);
    let mut r = Series::zero(order);
    for (l, stack) in stacks.iter().enumerate() {
        let derivs: Vec<f64> = stack.iter().map(|g| g.values()[j]).collect();
        let m = 2 * l;
        let plus = &Series::taylor_shift(&derivs, &dp) * &tp.powi(m);
        let minus = &Series::taylor_shift(&derivs, &dm) * &tm.powi(m);
        let here = var.powi(m).scale(2.0 * derivs[0]);
        r = &(&r + &(&plus + &minus)) - &here;
    }
    r
}

fn default_grid(c: &FourierCurve) -> usize {
    (8 * c.k_max() + 8).next_power_of_two().max(256)
}

/// Normal form of order `k` from exact series jets.
pub fn build_normal_form(c: &FourierCurve, k: usize) -> Result<NormalForm> {
    let n = default_grid(c);
    let jets = jet_table(c, n, 2 * k + 3);
    build_normal_form_with_jets(c, &jets, k)
}

/// Normal form of order `k` using a precomputed jet table of order at least
/// `2k + 2`; the table's grid is the normal form's grid.
pub fn build_normal_form_with_jets(c: &FourierCurve, jets: &JetTable, k: usize) -> Result<NormalForm> {
    if c.param_kind() != ParamKind::ArclengthUnit {
        return Err(Error::Config("normal form needs an arclength-normalised boundary".into()));
    }
    let order = 2 * k + 2;
    if jets.order < order {
        return Err(Error::Config(format!("jets of order {} cannot build a normal form of order {k}", jets.order)));
    }
    let n = jets.len();
    let rho = c.radius_of_curvature_grid(n);
    if rho.values().iter().any(|&r| !(r > 0.0)) {
        return Err(Error::ConvexityLoss("non-positive radius of curvature".into()));
    }
    let w = rho.map(|r| r.powf(-2.0 / 3.0));
    let c_norm = 1.0 / w.mean();
    let f0_prime = GridFn::denoised(&w.scale(c_norm));
    let f0_periodic = f0_prime.map(|v| v - 1.0).antiderivative_from_zero().samples;

    // F_0 stack: the value never enters the remainder, only derivatives do
    let mut f0_stack = vec![GridFn::zeros(n)];
    f0_stack.extend(derivative_stack(&f0_prime, order - 1));
    let mut stacks = vec![f0_stack];
    let mut f = Vec::new();
    let mut defects = Vec::new();

    for i in 1..=k {
        let m = 2 * i;
        let coeffs = par::map_indexed(n, |j| remainder_series(&stacks, jets, j, order));
        let p = GridFn::denoised(&GridFn::new(coeffs.iter().map(|r| r.coeff(m + 2)).collect())?);
        let lower = coeffs
            .iter()
            .flat_map(|r| (0..m + 2).map(move |e| r.coeff(e).abs()))
            .fold(0.0, f64::max);
        debug!("normal form order {i}: lower-order remainder {lower:.3e}, source {:.3e}", p.sup_norm());

        let q = p.zip_with(&rho, |pv, r| -0.25 * r.powf(-(m as f64 + 4.0) / 3.0) * pv);
        // round-off sized sources (the circle) are not held to the relative test
        let noise = 1e-10 * rho.map(|r| r.powf(-(m as f64 + 4.0) / 3.0)).mean();
        let scale = q.sup_norm() + noise;
        let defect = q.mean().abs() / scale;
        defects.push(defect);
        if defect > SOLVABILITY_TOL {
            return Err(Error::NormalForm(format!(
                "order {i}: source term has relative mean {defect:.3e}, periodic solution does not exist"
            )));
        }
        let q = q.map(|v| v - q.mean());
        let integral = q.antiderivative_from_zero().samples;
        let c1 = -(&w * &integral).mean() / w.mean();
        let g_prime = integral.zip_with(&w, |iv, wv| wv * (iv + c1));
        let g = g_prime.antiderivative_from_zero().samples;
        let fi = GridFn::denoised(&g.zip_with(&rho, |gv, r| gv * r.powf(m as f64 / 3.0)));
        stacks.push(derivative_stack(&fi, order));
        f.push(fi);
    }

    Ok(NormalForm {
        order: k,
        c_norm,
        rho_eval: SpectralEvaluator::new(&rho),
        f0_eval: SpectralEvaluator::new(&f0_periodic),
        f_eval: f.iter().map(SpectralEvaluator::new).collect(),
        rho,
        f0_periodic,
        f,
        solvability_defects: defects,
    })
}

/// `(x, y) = (X(s, theta), X(s, theta) - X(T^{-1}(s, theta)))`.
pub fn eval_xy(nf: &NormalForm, c: &FourierCurve, st: ChordState) -> Result<(f64, f64)> {
    let (h, theta_prev) = step_advance(c, st.s, st.theta, Direction::Backward)?;
    let x = nf.eval_x(st.s, st.theta);
    let y = -nf.x_increment(st.s, st.theta, -h, theta_prev);
    Ok((x, y))
}

/// `X(T) - 2X + X(T^{-1})` at `(s, theta)` by shooting one bounce each way.
pub fn homological_residual(nf: &NormalForm, c: &FourierCurve, s: f64, theta: f64) -> Result<f64> {
    let (hp, tp) = step_advance(c, s, theta, Direction::Forward)?;
    let (hm, tm) = step_advance(c, s, theta, Direction::Backward)?;
    Ok(nf.x_increment(s, theta, hp, tp) + nf.x_increment(s, theta, -hm, tm))
}

/// Solves `(X, Y)(s_j, theta_j) = (j / n, 1 / q)` on an `n`-grid and
/// returns `u(j / n) = s_j`.
pub fn initial_circle_map(nf: &NormalForm, c: &FourierCurve, q: usize, n: usize) -> Result<CircleMap> {
    if q < 2 {
        return Err(Error::Config(format!("rotation number 1/{q} is not supported")));
    }
    let target_y = 1.0 / q as f64;
    let disp = par::try_map_indexed(n, |j| {
        let theta_j = j as f64 / n as f64;
        let mut s = nf.invert_f0(theta_j);
        let rho = nf.rho_eval.eval(s);
        let mut th = target_y / (2.0 * nf.c_norm * rho.cbrt());
        let fail = |reason: String| Error::Initializer { theta: theta_j, reason };
        let mut best = f64::INFINITY;
        for _ in 0..60 {
            if !(th > 0.0 && th < std::f64::consts::PI) {
                return Err(fail(format!("angle {th:.3e} left (0, pi)")));
            }
            let (x, y) = eval_xy(nf, c, ChordState { s, theta: th })?;
            let (rx, ry) = (x - theta_j, y - target_y);
            best = rx.abs().max(ry.abs());
            if best < 1e-15 {
                break;
            }
            let (xs, xt) = nf.x_theta_derivative(s, th);
            let (es, et) = (1e-7, 1e-7 * th);
            let yp = eval_xy(nf, c, ChordState { s: s + es, theta: th })?.1;
            let ym = eval_xy(nf, c, ChordState { s: s - es, theta: th })?.1;
            let ys = (yp - ym) / (2.0 * es);
            let yp = eval_xy(nf, c, ChordState { s, theta: th + et })?.1;
            let ym = eval_xy(nf, c, ChordState { s, theta: th - et })?.1;
            let yt = (yp - ym) / (2.0 * et);
            let det = xs * yt - xt * ys;
            if !(det.abs() > 0.0) {
                return Err(fail("singular Jacobian".into()));
            }
            let ds = (rx * yt - xt * ry) / det;
            let dt = (xs * ry - ys * rx) / det;
            s -= ds;
            th -= dt;
            if ds.abs() < 1e-17 && dt.abs() < 1e-17 * th {
                let (x, y) = eval_xy(nf, c, ChordState { s, theta: th })?;
                best = (x - theta_j).abs().max((y - target_y).abs());
                break;
            }
        }
        if !(best < 1e-12) {
            return Err(fail(format!("Newton residual {best:.3e}")));
        }
        Ok(s - theta_j)
    })?;
    CircleMap::new(GridFn::new(disp)?.denoised())
}
