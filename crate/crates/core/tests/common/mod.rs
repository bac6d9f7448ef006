//! Operator identities on randomized smooth convex boundaries, each checked
//! against an independent route (closed form, finite differences or a dense
//! linear solve). Each function returns the worst error over all cases.

use std::f64::consts::PI;

use caustic_core::billiard::{chord_lengths, defect_e, defect_f};
use caustic_core::boundary::{compose_with_map, radial_scale};
use caustic_core::periodic::SpectralEvaluator;
use caustic_core::presets;
use caustic_core::solver::{moser_levi_apply, moser_levi_solve};
use caustic_core::{CircleMap, ConvexityThresholds, Direction, FourierCurve, GridFn};
use nalgebra::{DMatrix, DVector};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

pub const CASES: usize = 50;

struct Case {
    curve: FourierCurve,
    q: usize,
    rng: StdRng,
}

fn case(seed: u64) -> Case {
    let mut rng = StdRng::seed_from_u64(0x5eed_0000 + seed);
    let modes: Vec<(usize, f64)> = (2..=5).map(|m| (m, rng.random_range(-0.04..0.04))).collect();
    let curve = presets::perturbed(&modes).expect("small perturbations stay convex");
    let q = rng.random_range(3..=9);
    Case { curve, q, rng }
}

/// Random trigonometric polynomial with modes `step * (1..=kmax)`.
fn random_trig(rng: &mut StdRng, n: usize, kmax: usize, step: usize, amp: f64) -> GridFn {
    let terms: Vec<(f64, f64, f64)> = (1..=kmax)
        .map(|k| ((k * step) as f64, rng.random_range(-amp..amp), rng.random_range(0.0..2.0 * PI)))
        .collect();
    GridFn::from_fn(n, |t| terms.iter().map(|&(k, a, p)| a * (2.0 * PI * k * t + p).cos()).sum())
}

fn sup_diff(a: &GridFn, b: &GridFn) -> f64 {
    (a - b).sup_norm()
}

pub fn resonant_f_is_resonant_chord_length() -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..CASES {
        let Case { curve, q, .. } = case(i as u64);
        let n = 32 * q;
        let f = defect_f(&curve, &CircleMap::identity(n), q).unwrap().resonant_part(q).unwrap();
        let l = chord_lengths(&curve, n, q).unwrap().resonant_part(q).unwrap();
        worst = worst.max(sup_diff(&f, &l));
    }
    worst
}

pub fn derivative_of_resonant_f_is_resonant_e() -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..CASES {
        let Case { curve, q, .. } = case(i as u64);
        let n = 32 * q;
        let id = CircleMap::identity(n);
        let df = defect_f(&curve, &id, q).unwrap().resonant_part(q).unwrap().derivative();
        let e = defect_e(&curve, &id, q).unwrap().resonant_part(q).unwrap();
        worst = worst.max(sup_diff(&df, &e));
    }
    worst
}

pub fn conjugation_identity() -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..CASES {
        let Case { curve, q, mut rng } = case(i as u64);
        let n = 32 * q;
        let u = CircleMap::new(random_trig(&mut rng, n, 3, 1, 0.01)).unwrap();
        let composed = compose_with_map(&curve, &u).unwrap();
        let lhs = defect_e(&composed, &CircleMap::identity(n), q).unwrap();
        let rhs = &u.derivative() * &defect_e(&curve, &u, q).unwrap();
        worst = worst.max(sup_diff(&lhs, &rhs));
    }
    worst
}

pub fn radial_scaling_identity() -> f64 {
    let th = ConvexityThresholds::default();
    let mut worst: f64 = 0.0;
    for i in 0..CASES {
        let Case { curve, q, mut rng } = case(i as u64);
        let n = 32 * q;
        let a = random_trig(&mut rng, n, 2, q, 0.01 / q as f64);
        // the identity needs a(u(theta)) to be 1/q-periodic along each
        // q-gon, so u is id plus a 1/q-periodic displacement
        let u = CircleMap::new(random_trig(&mut rng, n, 2, q, 0.002 / q as f64)).unwrap();
        let scaled = radial_scale(&curve, &a, &th).unwrap();
        let lhs = defect_e(&scaled, &u, q).unwrap();
        let ev = SpectralEvaluator::new(&a);
        let f = defect_f(&curve, &u, q).unwrap();
        let e = defect_e(&curve, &u, q).unwrap();
        let rhs: Vec<f64> = u
            .samples()
            .iter()
            .enumerate()
            .map(|(j, &s)| {
                let (av, da) = ev.eval_with_derivative(s);
                av.exp() * (da * f.values()[j] + e.values()[j])
            })
            .collect();
        worst = worst.max(sup_diff(&lhs, &GridFn::new(rhs).unwrap()));
    }
    worst
}

pub fn moser_levi_is_the_linearization() -> f64 {
    // d/dt [u_theta E(c, id + t v)] at t = 0 equals ML(v) + (v E)'
    let t = 1e-5;
    let mut worst: f64 = 0.0;
    for i in 0..CASES {
        let Case { curve, q, mut rng } = case(i as u64);
        let n = 32 * q;
        let v = random_trig(&mut rng, n, 4, 1, 1.0);
        let shot = |tt: f64| {
            let u = CircleMap::new(v.scale(tt)).unwrap();
            &u.derivative() * &defect_e(&curve, &u, q).unwrap()
        };
        let fd = (&shot(t) - &shot(-t)).scale(0.5 / t);
        let e = defect_e(&curve, &CircleMap::identity(n), q).unwrap();
        let ml = moser_levi_apply(&curve, &v, q).unwrap();
        let want = &ml + &(&v * &e).derivative();
        worst = worst.max(sup_diff(&fd, &want) / v.sup_norm().max(1.0));
    }
    worst
}

/// Worst residual of `difference(invert_difference(g)) = g` and the worst
/// ratio `|phi| / (q |g|)`, which must not exceed one.
pub fn difference_inversion_residual_and_bound() -> (f64, f64) {
    let (mut worst, mut ratio): (f64, f64) = (0.0, 0.0);
    for i in 0..CASES {
        let Case { q, mut rng, .. } = case(i as u64);
        let n = 16 * q;
        let raw = GridFn::new((0..n).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap();
        let g = raw.nonresonant_part(q).unwrap();
        for dir in [Direction::Forward, Direction::Backward] {
            let phi = g.invert_difference(q, dir).unwrap();
            worst = worst.max(sup_diff(&phi.difference(q, dir).unwrap(), &g));
            worst = worst.max(phi.resonant_part(q).unwrap().sup_norm());
            ratio = ratio.max(phi.sup_norm() / (q as f64 * g.sup_norm()));
        }
    }
    (worst, ratio)
}

/// Dense solve of `(ML + R) w = g` with `R` the resonant projector. `ML`
/// kills resonant functions and has no resonant range, so the sum is
/// invertible and its solution satisfies `ML w = g`, `[w]_q = 0`.
fn dense_solve(curve: &FourierCurve, g: &GridFn, q: usize) -> GridFn {
    let n = g.len();
    let mut a = DMatrix::<f64>::zeros(n, n);
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        let unit = GridFn::new(e).unwrap();
        let col = &moser_levi_apply(curve, &unit, q).unwrap() + &unit.resonant_part(q).unwrap();
        for r in 0..n {
            a[(r, j)] = col.values()[r];
        }
    }
    let b = DVector::from_column_slice(g.values());
    let w = a.full_piv_lu().solve(&b).expect("ML + R is invertible");
    GridFn::new(w.iter().copied().collect()).unwrap()
}

pub fn moser_levi_solve_matches_dense_solve() -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..CASES {
        let Case { curve, mut rng, .. } = case(i as u64);
        let (q, n) = [(3, 48), (4, 64), (6, 48), (8, 64), (5, 40)][i % 5];
        let raw = GridFn::new((0..n).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap();
        let g = raw.nonresonant_part(q).unwrap();
        let w = moser_levi_solve(&curve, &g, q).unwrap();
        let dense = dense_solve(&curve, &g, q);
        worst = worst.max(sup_diff(&w, &dense) / dense.sup_norm());
    }
    worst
}
