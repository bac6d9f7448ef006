//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

mod common;

use std::process::ExitCode;
use std::time::Instant;

use caustic_core::billiard::{defect_e, extract_jets, LadderConfig};
use caustic_core::boundary::compose_with_map;
use caustic_core::fit::{linear_fit, power_law_fit};
use caustic_core::lazutkin::{build_normal_form, homological_residual, initial_circle_map};
use caustic_core::solver::{forge_smoothed, RESIDUAL_FLOOR};
use caustic_core::verify::porism_check;
use caustic_core::{forge, presets, CircleMap, FourierCurve, ForgeConfig, ForgeResult};
use num_complex::Complex64;

const PORISM_SAMPLES: usize = 100;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

/// Every converged run, kept for the convergence-order criterion.
#[derive(Default)]
struct Runs {
    all: Vec<(String, ForgeResult)>,
}

impl Runs {
    fn forge(&mut self, label: &str, c: &FourierCurve, q: usize) -> ForgeResult {
        let r = forge(c, &ForgeConfig::new(q)).unwrap_or_else(|e| panic!("{label} q = {q}: {e}"));
        self.all.push((format!("{label} q={q}"), r.clone()));
        r
    }
}

fn closure(c: &FourierCurve, q: usize) -> f64 {
    porism_check(c, q, PORISM_SAMPLES).map(|r| if r.1 { r.0 } else { f64::INFINITY }).unwrap_or(f64::INFINITY)
}

fn ac1(runs: &mut Runs) -> Outcome {
    let start = Instant::now();
    let c = presets::circle();
    let (mut def, mut clo): (f64, f64) = (0.0, 0.0);
    let mut ok = true;
    for q in 3..=20 {
        let r = runs.forge("circle", &c, q);
        ok &= r.converged;
        def = def.max(r.deformation);
        clo = clo.max(closure(&r.forged_curve, q));
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        ok && def < 1e-12 && clo < 1e-12 && secs < 5.0,
        format!("q=3..20: max deformation {def:.2e}, max closure {clo:.2e}, {secs:.2} s"),
    )
}

fn ac2(runs: &mut Runs) -> Outcome {
    let start = Instant::now();
    let c = presets::ellipse(1.05, 0.95).unwrap();
    let (mut def, mut clo): (f64, f64) = (0.0, 0.0);
    let mut ok = true;
    for q in 3..=8 {
        let r = runs.forge("ellipse", &c, q);
        ok &= r.converged;
        def = def.max(r.deformation);
        clo = clo.max(closure(&r.forged_curve, q));
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        ok && def < 1e-9 && clo < 1e-9 && secs < 30.0,
        format!("q=3..8: max deformation {def:.2e}, max closure {clo:.2e}, {secs:.2} s"),
    )
}

fn ac3(runs: &mut Runs) -> Outcome {
    let start = Instant::now();
    let c = presets::from_spec("perturbed").unwrap();
    let mut rows = Vec::new();
    let mut residual_ok = true;
    let mut clo: f64 = 0.0;
    for q in 8..=24 {
        let r = runs.forge("perturbed", &c, q);
        if r.converged {
            residual_ok &= r.final_residual() <= 1e-12;
            clo = clo.max(closure(&r.forged_curve, q));
            rows.push((q as f64, r.deformation));
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let above: Vec<(f64, f64)> = rows.iter().filter(|r| r.1 > 1e-13).map(|&(q, d)| (q, d.log10())).collect();
    let fit = linear_fit(&above);
    outcome(
        rows.len() == 17 && above.len() >= 3 && fit.slope < 0.0 && fit.r2 >= 0.9 && residual_ok && secs < 300.0,
        format!(
            "{}/17 converged, {} rows above 1e-13: log10 slope {:.3}/q, R^2 {:.4}, all residuals <= 1e-12: {residual_ok}, max closure {clo:.2e}, {secs:.1} s",
            rows.len(),
            above.len(),
            fit.slope,
            fit.r2
        ),
    )
}

fn ac4() -> Outcome {
    let c = presets::from_spec("perturbed").unwrap();
    let nf = build_normal_form(&c, 2).unwrap();
    let mut pts = Vec::new();
    for q in 8..=32 {
        let n = ForgeConfig::new(q).grid_size();
        let u = initial_circle_map(&nf, &c, q, n).unwrap();
        let composed = compose_with_map(&c, &u).unwrap();
        let e = defect_e(&composed, &CircleMap::identity(n), q).unwrap().sup_norm();
        pts.push((q as f64, e));
    }
    let fit = power_law_fit(&pts);
    let (lo, hi) = (pts[0].1, pts[pts.len() - 1].1);
    outcome(
        fit.slope <= -6.0,
        format!("q=8..32: |E| {lo:.2e} -> {hi:.2e}, log-log slope {:.2} (R^2 {:.3})", fit.slope, fit.r2),
    )
}

fn ac5() -> Outcome {
    let e = presets::ellipse(1.3, 0.8).unwrap();
    let thetas: Vec<f64> = (0..=20).map(|i| 10f64.powf(-3.0 + 2.0 * i as f64 / 20.0)).collect();
    let mut ok = true;
    let mut parts = Vec::new();
    for k in 0..=2 {
        let nf = build_normal_form(&e, k).unwrap();
        let pts: Vec<(f64, f64)> = thetas
            .iter()
            .map(|&t| (t, homological_residual(&nf, &e, 0.13, t).unwrap().abs()))
            .filter(|p| p.1 > 1e-13)
            .collect();
        let slope = power_law_fit(&pts).slope;
        let want = (2 * k + 4) as f64;
        ok &= pts.len() >= 3 && (slope - want).abs() <= 0.3;
        parts.push(format!("k={k}: {slope:.3} (want {want}, {} pts)", pts.len()));
    }
    outcome(ok, parts.join(", "))
}

fn ac6() -> Outcome {
    let checks = [
        ("[F]=[|dr|]", common::resonant_f_is_resonant_chord_length(), 1e-12),
        ("d[F]=[E]", common::derivative_of_resonant_f_is_resonant_e(), 1e-10),
        ("conjugation", common::conjugation_identity(), 1e-10),
        ("radial", common::radial_scaling_identity(), 1e-9),
        ("linearization", common::moser_levi_is_the_linearization(), 1e-6),
        ("dense solve", common::moser_levi_solve_matches_dense_solve(), 1e-10),
    ];
    let (inv, ratio) = common::difference_inversion_residual_and_bound();
    let mut ok = inv < 1e-12 && ratio <= 1.0;
    let mut parts: Vec<String> = checks
        .iter()
        .map(|(name, worst, tol)| {
            ok &= worst < tol;
            format!("{name} {worst:.1e}")
        })
        .collect();
    parts.push(format!("inversion {inv:.1e} (|phi|/(q|g|) <= {ratio:.2})"));
    outcome(ok, format!("{} cases: {}", common::CASES, parts.join(", ")))
}

fn ac7() -> Outcome {
    let e = presets::ellipse(1.3, 0.8).unwrap();
    let n = 256;
    let jets = extract_jets(&e, 4, &LadderConfig { grid: n, ..LadderConfig::default() }).unwrap();
    let rho = e.radius_of_curvature_grid(n);
    let drho = rho.derivative();
    let b1 = rho.scale(2.0);
    let b2 = (&rho * &drho).scale(4.0 / 3.0);
    let d2 = drho.scale(-2.0 / 3.0);
    let rel = |got: &caustic_core::GridFn, want: &caustic_core::GridFn| (got - want).sup_norm() / want.sup_norm();
    let (e1, e2, e3) = (rel(jets.b(1), &b1), rel(jets.b(2), &b2), rel(jets.d(2), &d2));
    outcome(
        e1 < 1e-6 && e2 < 1e-5 && e3 < 1e-5,
        format!("relative errors b1 {e1:.1e}, b2 {e2:.1e}, d2 {e3:.1e}"),
    )
}

fn ac8(runs: &mut Runs) -> Outcome {
    let c = presets::from_spec("perturbed").unwrap();
    let mut ok = true;
    let mut parts = Vec::new();
    for q in [10, 16, 24] {
        let r = runs.forge("perturbed", &c, q);
        match r.diagnostics.nek_reports.first() {
            Some(s) => {
                let ratio = s.nonresonant_after / s.nonresonant_before;
                ok &= ratio <= 0.5;
                parts.push(format!("q={q}: {:.2e} -> {:.2e}", s.nonresonant_before, s.nonresonant_after));
            }
            None => {
                ok = false;
                parts.push(format!("q={q}: sweep made no progress"));
            }
        }
    }
    outcome(ok, parts.join(", "))
}

fn ac9(runs: &Runs) -> Outcome {
    let converged: Vec<&(String, ForgeResult)> = runs.all.iter().filter(|r| r.1.converged).collect();
    let estimated: Vec<(&str, f64)> = converged
        .iter()
        .filter_map(|(l, r)| r.diagnostics.convergence_order.map(|p| (l.as_str(), p)))
        .collect();
    let worst = estimated.iter().cloned().fold(("-", f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a });
    let ok = estimated.iter().all(|e| e.1 >= 1.8);
    let detail = if estimated.is_empty() {
        format!("{} converged runs, none with two KAM iterates above {RESIDUAL_FLOOR:.0e}", converged.len())
    } else {
        format!(
            "{} converged runs, {} with an order estimate, lowest {:.3} ({}); the rest reach the floor in one step",
            converged.len(),
            estimated.len(),
            worst.1,
            worst.0
        )
    };
    outcome(ok, detail)
}

/// Order estimates without the non-resonant sweeps, where the Newton loop
/// starts further out. Reported only.
fn ac9_without_sweeps() -> String {
    let cases = [("perturbed", 8), ("perturbed", 12), ("perturbed", 16), ("ellipse:1.05,0.95", 5)];
    let parts: Vec<String> = cases
        .iter()
        .map(|&(spec, q)| {
            let cfg = ForgeConfig { nek_sweeps: 0, ..ForgeConfig::new(q) };
            let r = forge(&presets::from_spec(spec).unwrap(), &cfg).unwrap();
            match r.diagnostics.convergence_order {
                Some(p) => format!("{spec} q={q}: {p:.3}"),
                None => format!("{spec} q={q}: -"),
            }
        })
        .collect();
    parts.join(", ")
}

fn ac10(runs: &mut Runs) -> Outcome {
    let c = presets::smooth_tail(0.1).unwrap();
    let mut pts = Vec::new();
    let mut ok = true;
    for q in 8..=20 {
        let cfg = ForgeConfig::new(q);
        match forge_smoothed(&c, &cfg, 0.5 * q as f64) {
            Ok(r) if r.converged => {
                pts.push((q as f64, r.deformation));
                runs.all.push((format!("smooth-tail q={q}"), r));
            }
            _ => ok = false,
        }
    }
    let power = power_law_fit(&pts);
    let expo = linear_fit(&pts.iter().map(|&(q, d)| (q, d.ln())).collect::<Vec<_>>());
    ok &= power.r2 >= 0.85 && expo.sse > 2.0 * power.sse;
    outcome(
        ok,
        format!(
            "{}/13 converged; power law slope {:.2}, R^2 {:.4}, SSE {:.2e}; exponential R^2 {:.4}, SSE {:.2e}",
            pts.len(),
            power.slope,
            power.r2,
            power.sse,
            expo.r2,
            expo.sse
        ),
    )
}

fn negative_control(runs: &mut Runs) -> Outcome {
    let q = 10;
    let r = runs.forge("perturbed", &presets::from_spec("perturbed").unwrap(), q);
    let clean = closure(&r.forged_curve, q);
    let c = &r.forged_curve;
    let k = c.k_max() as i64;
    let mut cx: Vec<Complex64> = c.coeffs_x().to_vec();
    for m in [-3i64, 3] {
        cx[(m + k) as usize] += Complex64::new(1e-6, 0.0);
    }
    let bad = FourierCurve::from_coeffs(cx, c.coeffs_y().to_vec(), c.param_kind()).unwrap();
    let corrupted = porism_check(&bad, q, PORISM_SAMPLES).map(|r| r.0).unwrap_or(f64::INFINITY);
    outcome(corrupted > 1e-7, format!("q={q}: closure {clean:.2e} clean, {corrupted:.2e} after a 1e-6 corruption"))
}

fn main() -> ExitCode {
    let mut runs = Runs::default();
    let mut failed = 0;
    let mut report = |name: &str, o: Outcome| {
        println!("{} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        if !o.pass {
            failed += 1;
        }
    };
    report("AC1 circle exactness", ac1(&mut runs));
    report("AC2 ellipse no-op", ac2(&mut runs));
    report("AC3 exponential density law", ac3(&mut runs));
    report("AC4 initializer order", ac4());
    report("AC5 normal-form order", ac5());
    report("AC6 operator identities", ac6());
    report("AC7 jet formulas", ac7());
    report("AC8 sweep contraction", ac8(&mut runs));
    report("AC10 smooth path", ac10(&mut runs));
    report("negative control", negative_control(&mut runs));
    report("AC9 KAM convergence order", ac9(&runs));
    println!("info AC9 with nek_sweeps = 0 (not gating): {}", ac9_without_sweeps());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
