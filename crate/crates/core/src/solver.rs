//! Radial projection, the Moser–Levi solve, Nekhoroshev sweeps and the KAM
//! loop that deform a boundary until the uniform chord family of rotation
//! number `1/q` is exactly extremal.

use std::time::Instant;

use log::{debug, info, warn};
use serde::{Deserialize, Serialize};

use crate::billiard::{defect_e, defect_f, mixed_partial_grid};
use crate::boundary::{
    compose_with_map, curve_from_curvature, geometric_distance, profile_of, radial_scale, reparametrize_arclength,
    smooth_profile, ConvexityThresholds, FourierCurve, ParamKind,
};
use crate::error::{Error, Result};
use crate::lazutkin::{build_normal_form, initial_circle_map};
use crate::periodic::{CircleMap, Direction, GridFn};

/// `[F]_q` below this fraction of its mean is treated as degenerate.
const MIN_RESONANT_F: f64 = 1e-8;

/// Residuals below this are round-off and excluded from order estimates.
pub const RESIDUAL_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForgeConfig {
    pub q: usize,
    /// Grid points per `1/q` interval; the grid also never drops below 256.
    pub oversample: usize,
    pub lazutkin_order: usize,
    pub nek_sweeps: usize,
    pub tol_e: f64,
    pub max_kam_iters: usize,
    /// Number of times a KAM step may be halved before it is rejected.
    pub max_halvings: usize,
    /// Abort when the residual grows by more than this factor.
    pub divergence_ratio: f64,
    pub thresholds: ConvexityThresholds,
}

impl ForgeConfig {
    pub fn new(q: usize) -> Self {
        ForgeConfig {
            q,
            oversample: 32,
            lazutkin_order: 2,
            nek_sweeps: 2,
            tol_e: 1e-12,
            max_kam_iters: 30,
            max_halvings: 6,
            divergence_ratio: 10.0,
            thresholds: ConvexityThresholds::default(),
        }
    }

    pub fn grid_size(&self) -> usize {
        let per = self.oversample.max(256usize.div_ceil(self.q.max(1)));
        self.q * per
    }

    pub fn validate(&self) -> Result<()> {
        if self.q < 3 {
            return Err(Error::Config(format!("q must be at least 3, got {}", self.q)));
        }
        if self.oversample == 0 {
            return Err(Error::Config("oversampling must be positive".into()));
        }
        if !(self.tol_e > 0.0) {
            return Err(Error::Config(format!("tolerance must be positive, got {}", self.tol_e)));
        }
        if !(self.divergence_ratio > 1.0) {
            return Err(Error::Config("divergence ratio must exceed 1".into()));
        }
        Ok(())
    }
}

/// The resonant log-scaling `a` with `a(0) = 0` and the rescaled curve.
#[derive(Debug, Clone)]
pub struct Projection {
    pub a: GridFn,
    pub curve: FourierCurve,
}

fn resonant_f(c: &FourierCurve, n: usize, q: usize) -> Result<GridFn> {
    let f = defect_f(c, &CircleMap::identity(n), q)?.resonant_part(q)?;
    let mean = f.mean();
    let min = f.values().iter().cloned().fold(f64::INFINITY, f64::min);
    if !(mean > 0.0 && min > MIN_RESONANT_F * mean) {
        return Err(Error::DegenerateChord(format!("[F]_q ranges down to {min:.3e} (mean {mean:.3e})")));
    }
    Ok(f)
}

/// `a = log([F]_q(0) / [F]_q)` on an `n`-grid.
pub fn radial_log(c: &FourierCurve, n: usize, q: usize) -> Result<GridFn> {
    let f = resonant_f(c, n, q)?;
    let f0 = f.values()[0];
    Ok(f.map(|v| (f0 / v).ln()))
}

/// `a = -int_0^theta [E]_q / [F]_q`, the quadrature form of [`radial_log`].
pub fn radial_log_quadrature(c: &FourierCurve, n: usize, q: usize) -> Result<GridFn> {
    let f = resonant_f(c, n, q)?;
    let e = defect_e(c, &CircleMap::identity(n), q)?.resonant_part(q)?;
    let ratio = e.zip_with(&f, |a, b| -a / b);
    Ok(ratio.antiderivative_from_zero().samples)
}

/// Rescales `c` radially so that the resonant part of `E(c, id)` vanishes.
pub fn radial_projection(c: &FourierCurve, n: usize, q: usize, th: &ConvexityThresholds) -> Result<Projection> {
    let a = radial_log(c, n, q)?;
    if a.sup_norm() == 0.0 {
        return Ok(Projection { a, curve: c.clone() });
    }
    let curve = radial_scale(c, &a, th)?;
    Ok(Projection { a, curve })
}

/// `p = 1 / L12(theta, theta + 1/q)` on an `n`-grid.
fn inverse_twist(c: &FourierCurve, n: usize, q: usize) -> Result<GridFn> {
    let l12 = mixed_partial_grid(c, n, q)?;
    if l12.values().iter().any(|&v| !(v > 0.0)) {
        return Err(Error::DegenerateChord("mixed partial of the chord length is not positive".into()));
    }
    Ok(l12.map(|v| 1.0 / v))
}

/// `backward_difference(L12 * forward_difference(w))`, the linearised defect.
pub fn moser_levi_apply(c: &FourierCurve, w: &GridFn, q: usize) -> Result<GridFn> {
    let l12 = mixed_partial_grid(c, w.len(), q)?;
    (&l12 * &w.difference(q, Direction::Forward)?).difference(q, Direction::Backward)
}

/// Solves `backward_difference(L12 * forward_difference(w)) = g` with
/// `[w]_q = 0` on the grid of `g`.
pub fn moser_levi_solve(c: &FourierCurve, g: &GridFn, q: usize) -> Result<GridFn> {
    let n = g.len();
    let p = inverse_twist(c, n, q)?;
    let h = g.invert_difference(q, Direction::Backward)?;
    let rp = p.resonant_part(q)?;
    if rp.values().iter().any(|&v| !(v > 0.0)) {
        return Err(Error::DegenerateChord("[1/L12]_q vanishes".into()));
    }
    let h1 = (&p * &h).resonant_part(q)?.zip_with(&rp, |a, b| -a / b);
    let w = (&p * &(&h + &h1)).invert_difference(q, Direction::Forward)?;
    if log::log_enabled!(log::Level::Debug) {
        let gn = g.sup_norm();
        let res = (&moser_levi_apply(c, &w, q)? - g).sup_norm();
        let growth = if gn > 0.0 { w.sup_norm() / (gn * (q as f64).powi(3)) } else { 0.0 };
        debug!("Moser-Levi solve: residual {res:.3e} for |g| {gn:.3e}, |w| / (q^3 |g|) = {growth:.3e}");
    }
    Ok(w)
}

/// `|E(c, id)|` on an `n`-grid.
pub fn residual(c: &FourierCurve, n: usize, q: usize) -> Result<GridFn> {
    defect_e(c, &CircleMap::identity(n), q)
}

fn corrected(c: &FourierCurve, v: &GridFn, lambda: f64) -> Result<FourierCurve> {
    let u = CircleMap::new(v.scale(lambda)).map_err(|_| Error::StepFailure("correction folds the circle".into()))?;
    compose_with_map(c, &u)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub nonresonant_before: f64,
    pub nonresonant_after: f64,
    pub resonant_before: f64,
    pub resonant_after: f64,
}

/// Up to `steps` corrections removing the non-resonant defect only. Stops
/// early once the non-resonant part no longer shrinks.
pub fn nek_sweep(
    c: &FourierCurve,
    n: usize,
    q: usize,
    steps: usize,
    th: &ConvexityThresholds,
) -> Result<(FourierCurve, Vec<SweepReport>)> {
    let mut cur = c.clone();
    let mut reports = Vec::new();
    let mut e = residual(&cur, n, q)?;
    for _ in 0..steps {
        let non = e.nonresonant_part(q)?;
        let before = non.sup_norm();
        if before == 0.0 {
            break;
        }
        let v = moser_levi_solve(&cur, &non.scale(-1.0), q)?.denoised();
        let next = corrected(&cur, &v, 1.0)?;
        next.validate(th)?;
        let e_next = residual(&next, n, q)?;
        let after = e_next.nonresonant_part(q)?.sup_norm();
        let rep = SweepReport {
            nonresonant_before: before,
            nonresonant_after: after,
            resonant_before: e.resonant_part(q)?.sup_norm(),
            resonant_after: e_next.resonant_part(q)?.sup_norm(),
        };
        debug!("Nekhoroshev sweep: {rep:?}");
        if after >= before {
            if before > RESIDUAL_FLOOR {
                warn!("Nekhoroshev sweep stagnated at {before:.3e}; keeping the previous iterate");
            } else {
                debug!("Nekhoroshev sweep at roundoff level {before:.3e}");
            }
            break;
        }
        reports.push(rep);
        cur = next;
        e = e_next;
        if after > 0.5 * before {
            break;
        }
    }
    Ok((cur, reports))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KamReport {
    pub residual_before: f64,
    pub residual_after: f64,
    pub correction_norm: f64,
    pub radial_log_norm: f64,
    pub damping: f64,
}

pub struct KamStep {
    pub curve: FourierCurve,
    pub a: GridFn,
    pub report: KamReport,
}

/// One Newton step: radial projection, then the Moser–Levi correction of
/// the remaining defect, halving it until the residual decreases.
pub fn kam_step(c: &FourierCurve, cfg: &ForgeConfig) -> Result<KamStep> {
    let (n, q) = (cfg.grid_size(), cfg.q);
    let before = residual(c, n, q)?.sup_norm();
    let proj = radial_projection(c, n, q, &cfg.thresholds)?;
    let e_star = residual(&proj.curve, n, q)?;
    let g = e_star.nonresonant_part(q)?.scale(-1.0);
    let v = moser_levi_solve(&proj.curve, &g, q)?.denoised();
    let mut lambda = 1.0;
    let mut last_err = None;
    for _ in 0..=cfg.max_halvings {
        let attempt = corrected(&proj.curve, &v, lambda).and_then(|next| {
            next.validate(&cfg.thresholds)?;
            let after = residual(&next, n, q)?.sup_norm();
            Ok((next, after))
        });
        match attempt {
            Ok((next, after)) if after < before || before == 0.0 => {
                let report = KamReport {
                    residual_before: before,
                    residual_after: after,
                    correction_norm: v.sup_norm() * lambda,
                    radial_log_norm: proj.a.sup_norm(),
                    damping: lambda,
                };
                debug!("KAM step: {report:?}");
                return Ok(KamStep { curve: next, a: proj.a, report });
            }
            Ok((_, after)) => {
                if after > cfg.divergence_ratio * before {
                    last_err = Some(format!("residual jumped from {before:.3e} to {after:.3e}"));
                } else {
                    last_err = Some(format!("residual {after:.3e} did not drop below {before:.3e}"));
                }
            }
            Err(e) => last_err = Some(e.to_string()),
        }
        lambda *= 0.5;
    }
    Err(Error::StepFailure(last_err.unwrap_or_default()))
}

/// Estimated order `p` of `e_{k+1} ~ C e_k^p` from the terminal iterates
/// above [`RESIDUAL_FLOOR`]: `log(e3 / e2) / log(e2 / e1)` from the last
/// three, or `log(e2) / log(e1)` (taking `C = 1`) when only two are
/// available. `None` when fewer than two iterates are above the floor.
pub fn convergence_order(history: &[f64]) -> Option<f64> {
    let above: Vec<f64> = history.iter().cloned().filter(|&e| e > RESIDUAL_FLOOR).collect();
    let k = above.len();
    let p = match k {
        0 | 1 => return None,
        2 => above[1].ln() / above[0].ln(),
        _ => (above[k - 1] / above[k - 2]).ln() / (above[k - 2] / above[k - 3]).ln(),
    };
    p.is_finite().then_some(p)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ForgeDiagnostics {
    pub grid_size: usize,
    pub input_width: Option<f64>,
    pub forged_width: Option<f64>,
    /// Relative mean of the normal-form source term removed at each order.
    pub normal_form_defects: Vec<f64>,
    pub initial_residual: f64,
    pub nek_reports: Vec<SweepReport>,
    pub kam_reports: Vec<KamReport>,
    pub convergence_order: Option<f64>,
    /// Distance from the input to its smoothed version, when smoothed.
    pub smoothing_distance: Option<f64>,
    pub wall_ms: u128,
}

#[derive(Debug, Clone)]
pub struct ForgeResult {
    pub config: ForgeConfig,
    /// The input after arclength normalisation.
    pub input_curve: FourierCurve,
    pub forged_curve: FourierCurve,
    pub u_init: CircleMap,
    /// `|E(c, id)|_inf` after initialisation, after the sweeps and after
    /// each KAM step.
    pub residual_history: Vec<f64>,
    pub deformation: f64,
    pub net_radial_log: GridFn,
    pub converged: bool,
    /// Why the loop stopped early, if it did.
    pub failure: Option<String>,
    pub diagnostics: ForgeDiagnostics,
}

impl ForgeResult {
    pub fn final_residual(&self) -> f64 {
        *self.residual_history.last().unwrap_or(&f64::NAN)
    }

    pub fn kam_iters(&self) -> usize {
        self.diagnostics.kam_reports.len()
    }
}

/// The full pipeline: normalise, initialise from Lazutkin coordinates,
/// optionally sweep, then Newton until `|E|_inf <= tol_e`.
///
/// Failures before the Newton loop are errors; failures inside it return
/// the best iterate with `converged == false`.
pub fn forge(c: &FourierCurve, cfg: &ForgeConfig) -> Result<ForgeResult> {
    cfg.validate()?;
    let start = Instant::now();
    c.validate(&cfg.thresholds)?;
    let input = match c.param_kind() {
        ParamKind::ArclengthUnit => c.clone(),
        ParamKind::General => reparametrize_arclength(c)?,
    };
    let (n, q) = (cfg.grid_size(), cfg.q);
    let nf = build_normal_form(&input, cfg.lazutkin_order)?;
    let u_init = initial_circle_map(&nf, &input, q, n)?;
    let mut cur = compose_with_map(&input, &u_init)?;
    cur.validate(&cfg.thresholds)?;
    let initial_residual = residual(&cur, n, q)?.sup_norm();
    let mut history = vec![initial_residual];
    info!("q = {q}: initial residual {initial_residual:.3e} on {n} points");

    let mut nek_reports = Vec::new();
    if cfg.nek_sweeps > 0 {
        let (swept, reps) = nek_sweep(&cur, n, q, cfg.nek_sweeps, &cfg.thresholds)?;
        cur = swept;
        nek_reports = reps;
        history.push(residual(&cur, n, q)?.sup_norm());
    }

    let mut net_a = GridFn::zeros(n);
    let mut kam_reports = Vec::new();
    let mut failure = None;
    let kam_start = history.len() - 1;
    let mut best = history[kam_start];
    while best > cfg.tol_e {
        if kam_reports.len() >= cfg.max_kam_iters {
            failure = Some(format!("no convergence after {} KAM iterations", kam_reports.len()));
            break;
        }
        match kam_step(&cur, cfg) {
            Ok(step) => {
                net_a = &net_a + &step.a;
                best = step.report.residual_after;
                history.push(best);
                kam_reports.push(step.report);
                cur = step.curve;
            }
            Err(e) => {
                failure = Some(e.to_string());
                break;
            }
        }
    }
    let converged = failure.is_none();
    if let Some(f) = &failure {
        warn!("q = {q}: stopped at residual {best:.3e}: {f}");
    }
    let deformation = geometric_distance(&input, &cur);
    let diagnostics = ForgeDiagnostics {
        grid_size: n,
        input_width: input.clone().with_width_estimate().width_estimate(),
        forged_width: cur.clone().with_width_estimate().width_estimate(),
        normal_form_defects: nf.solvability_defects.clone(),
        initial_residual,
        nek_reports,
        kam_reports,
        convergence_order: convergence_order(&history[kam_start..]),
        smoothing_distance: None,
        wall_ms: start.elapsed().as_millis(),
    };
    info!("q = {q}: residual {best:.3e}, deformation {deformation:.3e}");
    Ok(ForgeResult {
        config: *cfg,
        input_curve: input,
        forged_curve: cur,
        u_init,
        residual_history: history,
        deformation,
        net_radial_log: net_a,
        converged,
        failure,
        diagnostics,
    })
}

/// Samples of the radius of curvature used when smoothing.
const PROFILE_SAMPLES: usize = 2048;

/// Low-passes the radius of curvature of `c` at `cutoff` and rebuilds the
/// curve in place, arclength normalised.
pub fn smooth_boundary(c: &FourierCurve, cutoff: f64) -> Result<FourierCurve> {
    let n = PROFILE_SAMPLES.max((4 * c.k_max() + 8).next_power_of_two());
    let ex = profile_of(c, n)?;
    let smooth = smooth_profile(&ex.profile, cutoff)?;
    let rebuilt = curve_from_curvature(&smooth)?.translated(ex.center);
    reparametrize_arclength(&rebuilt)
}

/// Smooths at `cutoff`, forges the smoothed boundary and reports the
/// deformation against the unsmoothed input.
pub fn forge_smoothed(c: &FourierCurve, cfg: &ForgeConfig, cutoff: f64) -> Result<ForgeResult> {
    let input = match c.param_kind() {
        ParamKind::ArclengthUnit => c.clone(),
        ParamKind::General => reparametrize_arclength(c)?,
    };
    let smoothed = smooth_boundary(&input, cutoff)?;
    let mut r = forge(&smoothed, cfg)?;
    r.diagnostics.smoothing_distance = Some(geometric_distance(&input, &smoothed));
    r.deformation = geometric_distance(&input, &r.forged_curve);
    r.input_curve = input;
    Ok(r)
}
