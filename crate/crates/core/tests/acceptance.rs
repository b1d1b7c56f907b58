//! Acceptance criteria. Prints one PASS/FAIL line per criterion.
//!
//! Criteria listed in `KNOWN_FAILURES` check closed-form expressions that do not
//! agree with the matrices they describe; their sub-checks run at the stated
//! tolerance and are reported as FAIL. The binary exits nonzero if any other
//! criterion fails, or if a known failure unexpectedly passes.

use std::f64::consts::PI;
use std::process::ExitCode;

use exsplit::catalog::*;
use exsplit::engine::{ExecOptions, Grid, SpectralEngine, StateField};
use exsplit::linalg::min_symmetric_eigenvalue;
use exsplit::oracles::{commutator_defect, dense_action, discretize_weyl, field_to_vector, strang_harmonic, vector_to_field};
use exsplit::program::SplittingProgram;
use exsplit::scalar::{CMat, CVec, RMat, RVec, C};
use exsplit::splitter::{generic_fixed_point, schrodinger_coefficients, verify_program, FixedPointOptions, SubspaceDecomposition};
use exsplit::symplectic::QuadraticSymbol;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const KNOWN_FAILURES: [usize; 2] = [5, 6];

struct Outcome {
    id: usize,
    name: &'static str,
    pass: bool,
    detail: String,
}

fn outcome(id: usize, name: &'static str, checks: &[(bool, String)]) -> Outcome {
    let pass = checks.iter().all(|c| c.0);
    let detail = checks
        .iter()
        .map(|(ok, s)| format!("{}{}", if *ok { "" } else { "✗ " }, s))
        .collect::<Vec<_>>()
        .join("; ");
    Outcome { id, name, pass, detail }
}

fn residual(p: &SplittingProgram<f64>) -> f64 {
    verify_program(p).unwrap().flow_residual.unwrap()
}

fn slope(x: &[f64], y: &[f64]) -> (f64, f64) {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    linear_fit(&lx, &ly)
}

/// Least-squares slope and coefficient of determination.
fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let syy: f64 = y.iter().map(|b| (b - my) * (b - my)).sum();
    let s = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    (s, r2)
}

fn run(field: &mut StateField<f64>, prog: &SplittingProgram<f64>, steps: usize) -> exsplit::engine::ExecutionStats {
    let engine = SpectralEngine::new(field.grid());
    let mut stats = exsplit::engine::ExecutionStats::default();
    for _ in 0..steps {
        stats.merge(&engine.execute(field, prog, ExecOptions::default()).unwrap().stats);
    }
    stats
}

fn criterion1(rng: &mut ChaCha8Rng) -> Outcome {
    let mut worst = 0.0f64;
    let mut count = 0;
    let mut record = |r: f64| {
        worst = worst.max(r);
        count += 1;
    };
    for _ in 0..50 {
        record(residual(&harmonic_oscillator(rng.gen_range(0.0..3.0), rng.gen_range(1..=3)).unwrap()));
        record(residual(&rotation2d(rng.gen_range(-PI + 0.01..PI - 0.01)).unwrap()));
        record(residual(&dilatation(rng.gen_range(-2.0f64..2.0).exp()).unwrap()));
        record(residual(&fokker_planck(rng.gen_range(0.0..5.0)).unwrap()));
        record(residual(&kramers_fokker_planck(rng.gen_range(0.0..5.0)).unwrap()));
        let n = rng.gen_range(1..=3);
        let y = RVec::from_fn(2 * n, |_, _| rng.gen_range(-2.0..2.0));
        let ell = QuadraticSymbol::from_real(n, &RMat::zeros(2 * n, 2 * n), &y, rng.gen_range(-1.0..1.0)).unwrap();
        record(residual(&affine_linear_split(&ell, rng.gen_range(-2.0..2.0)).unwrap()));
        let m = RMat::from_fn(3, 3, |r, c| if r == c { 0.0 } else { rng.gen_range(0.2..1.0) * if r < c { 1.0 } else { -1.0 } });
        record(residual(&rotation_nd(&m, rng.gen_range(0.05..0.3), &FixedPointOptions::default()).unwrap()));
        let v = RMat::from_fn(2, 2, |r, c| if r == c { 1.0 } else { 0.0 }) + RMat::from_fn(2, 2, |_, _| rng.gen_range(-0.3..0.3));
        let v = (&v + v.transpose()) * 0.5;
        let w = rng.gen_range(0.5..1.5);
        let b = RMat::from_row_slice(2, 2, &[0.0, -w, w, 0.0]);
        let co = schrodinger_coefficients(&v, &b, rng.gen_range(0.02..0.1), &FixedPointOptions::default()).unwrap();
        record(residual(&co.program().unwrap()));
    }
    record(residual(&reflection1d().unwrap()));
    outcome(1, "flow-level exactness", &[(worst <= 1e-10, format!("max residual {worst:.2e} over {count} programs (tol 1e-10)"))])
}

fn criterion2() -> Outcome {
    let g = Grid::cube(1, 128, 10.0).unwrap();
    let u0 = StateField::gaussian(g, &[0.0], 1.0).unwrap();
    let mut expect = u0.clone();
    expect.scale(C::new((-0.5f64).exp(), 0.0));
    let mut one = u0.clone();
    run(&mut one, &harmonic_oscillator(0.5, 1).unwrap(), 1);
    let mut many = u0.clone();
    run(&mut many, &harmonic_oscillator(0.005, 1).unwrap(), 100);
    let e1 = one.l2_error(&expect).unwrap();
    let e100 = many.l2_error(&expect).unwrap();
    let d = many.l2_error(&one).unwrap();
    outcome(
        2,
        "harmonic oscillator closed form",
        &[
            (e1 <= 1e-8, format!("1 step error {e1:.2e}")),
            (e100 <= 1e-8, format!("100 steps error {e100:.2e}")),
            (d <= 1e-8, format!("difference {d:.2e} (tol 1e-8)")),
        ],
    )
}

fn criterion3() -> Outcome {
    // grid-limited floor: the periodic truncation dominates roundoff
    let g = Grid::cube(1, 64, 6.0).unwrap();
    let u0 = StateField::gaussian(g, &[0.0], 1.0).unwrap();
    let total = 0.8;
    let mut expect = u0.clone();
    expect.scale(C::new((-total as f64).exp(), 0.0));
    let taus = [0.2, 0.1, 0.05, 0.025];
    let mut exact = Vec::new();
    let mut strang = Vec::new();
    for &tau in &taus {
        let k = (total / tau as f64).round() as usize;
        let mut f = u0.clone();
        run(&mut f, &harmonic_oscillator(tau, 1).unwrap(), k);
        exact.push(f.l2_error(&expect).unwrap());
        let mut f = u0.clone();
        run(&mut f, &strang_harmonic(tau, 1).unwrap(), k);
        strang.push(f.l2_error(&expect).unwrap());
    }
    let (se, _) = slope(&taus, &exact);
    let (ss, _) = slope(&taus, &strang);
    outcome(
        3,
        "Strang contrast",
        &[
            ((ss - 2.0).abs() <= 0.1, format!("Strang slope {ss:.3} (2.0 ± 0.1)")),
            (se.abs() <= 0.1, format!("exact slope {se:.3} (|·| ≤ 0.1), floor {:.2e}", exact[0])),
        ],
    )
}

fn criterion4() -> Outcome {
    let mut worst = 0.0f64;
    for k in 0..100 {
        let theta = -PI + 0.01 + (2.0 * PI - 0.02) * (k as f64 + 0.5) / 100.0;
        let g = rotation2d(theta).unwrap().transport_matrix().unwrap();
        let (s, c) = theta.sin_cos();
        let r = RMat::from_row_slice(2, 2, &[c, s, -s, c]);
        worst = worst.max((g - r).abs().max());
    }
    outcome(4, "rotation factorization", &[(worst <= 1e-13, format!("max entry error {worst:.2e} over 100 angles (tol 1e-13)"))])
}

fn phase_grid() -> Grid {
    Grid::new(vec![128, 128], vec![(-40.0, 40.0), (-10.0, 10.0)]).unwrap()
}

fn maxwellian() -> StateField<f64> {
    StateField::from_fn(phase_grid(), |x: &[f64]| C::new((-x[1] * x[1] / 2.0).exp(), 0.0))
}

fn criterion5() -> Outcome {
    let mut det_err = 0.0f64;
    let mut min_eig = f64::INFINITY;
    for k in 0..20 {
        let t = 5.0 * k as f64 / 19.0;
        let a = fokker_planck_matrix(t);
        det_err = det_err.max((a.determinant() - fokker_planck_det_closed_form(t)).abs());
        min_eig = min_eig.min(min_symmetric_eigenvalue(&a));
    }
    let u0 = maxwellian();
    let mut f = u0.clone();
    run(&mut f, &fokker_planck(1.0).unwrap(), 1);
    let e = f.l2_error(&u0).unwrap();
    outcome(
        5,
        "Fokker–Planck determinant identity",
        &[
            (det_err <= 1e-11, format!("det vs closed form max error {det_err:.2e} (tol 1e-11)")),
            (min_eig >= -1e-12, format!("min eigenvalue {min_eig:.2e}")),
            (e <= 1e-7, format!("Maxwellian invariance error {e:.2e} (tol 1e-7)")),
        ],
    )
}

fn criterion6() -> Outcome {
    let mut det_err = 0.0f64;
    for k in 0..20 {
        let t = 5.0 * k as f64 / 19.0;
        let a = kramers_fokker_planck_matrix(t);
        det_err = det_err.max((a.determinant() - kramers_fokker_planck_det_closed_form(t)).abs());
    }
    let u0 = maxwellian();
    let mut f = u0.clone();
    run(&mut f, &kramers_fokker_planck(1.0).unwrap(), 1);
    let mut expect = u0;
    expect.scale(C::new((-1.0f64).exp(), 0.0));
    let e = f.l2_error(&expect).unwrap();
    outcome(
        6,
        "Kramers–Fokker–Planck determinant",
        &[
            (det_err <= 1e-12, format!("det vs closed form max error {det_err:.2e} (tol 1e-12)")),
            (e <= 1e-7, format!("e^(-t) decay error {e:.2e} (tol 1e-7)")),
        ],
    )
}

fn criterion7() -> Outcome {
    let n = 2;
    let v = RMat::<f64>::identity(n, n);
    let b = RMat::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]);
    let t = 0.1;
    let co = schrodinger_coefficients(&v, &b, t, &FixedPointOptions::default()).unwrap();
    let prog = co.program().unwrap();
    let seq: Vec<(f64, f64)> = co
        .update_norms
        .iter()
        .enumerate()
        .filter(|(_, r)| **r > 1e-14)
        .map(|(k, r)| (k as f64, r.ln()))
        .collect();
    let (ks, ls): (Vec<f64>, Vec<f64>) = seq.into_iter().unzip();
    let (rate, r2) = linear_fit(&ks, &ls);
    let final_res = residual(&prog);

    let half = (PI * 48.0 / 2.0).sqrt();
    let g = Grid::cube(2, 48, half).unwrap();
    let u0 = StateField::from_fn(g.clone(), |x: &[f64]| {
        let r2 = (x[0] - 1.0).powi(2) + (x[1] + 0.5).powi(2);
        C::new((-r2 / 2.0).exp(), 0.0) * C::new(0.0, 0.7 * x[0]).exp()
    });
    let engine = SpectralEngine::new(&g);
    let mut f = u0.clone();
    let report = engine.execute(&mut f, &prog, ExecOptions { fuse: true, diagnostics: true }).unwrap();
    let n0 = u0.l2_norm();
    let mut drift = 0.0f64;
    let mut prev = n0;
    for d in &report.diagnostics {
        drift = drift.max((d.norm_after / prev - 1.0).abs());
        prev = d.norm_after;
    }
    let op = discretize_weyl(&co.target, &g).unwrap();
    let dense = dense_action(&op, t, &field_to_vector(&u0)).unwrap();
    let oracle = vector_to_field(&g, &dense).unwrap();
    let e = f.l2_error(&oracle).unwrap();
    outcome(
        7,
        "Schrödinger iteration",
        &[
            (r2 >= 0.99, format!("log-linear fit R² {r2:.4}, rate {:.2e}/iter over {} iterations", rate.exp(), ks.len())),
            (final_res <= 1e-12, format!("final flow residual {final_res:.2e}")),
            (drift <= 1e-12, format!("norm drift per step {drift:.2e}")),
            (e <= 1e-6, format!("vs dense oracle on 48×48 {e:.2e} (tol 1e-6)")),
        ],
    )
}

fn criterion8() -> Outcome {
    let e = |r: usize, c: usize| {
        let mut m = RMat::zeros(2, 2);
        m[(r, c)] = 1.0;
        m
    };
    let dec = SubspaceDecomposition::new(vec![vec![e(0, 1)], vec![e(1, 0)]], vec![e(0, 1)], vec![e(0, 1), e(1, 0) * -1.0]).unwrap();
    let t: f64 = 0.5;
    let sol = generic_fixed_point(&dec, t, &FixedPointOptions::default()).unwrap();
    let errs: Vec<f64> = sol.log.iter().map(|r| r.residual).collect();
    let c = errs.iter().enumerate().map(|(k, r)| r * 2f64.powi(k as i32)).fold(0.0, f64::max);
    let mut worst_ratio = 0.0f64;
    for k in 3..errs.len().saturating_sub(1) {
        if errs[k] > 1e-14 {
            worst_ratio = worst_ratio.max(errs[k + 1] / errs[k]);
        }
    }
    let b1 = sol.b[0][(0, 1)];
    let closed = 2.0 * (t / 2.0).tan() / t;
    let bound = errs.iter().enumerate().all(|(k, r)| *r <= c * 2f64.powi(-(k as i32)) * (1.0 + 1e-12));
    outcome(
        8,
        "generic fixed point",
        &[
            (bound && worst_ratio <= 0.55, format!("C = {c:.2e}, worst ratio after k=3 {worst_ratio:.2e} over {} iterations", errs.len())),
            ((b1 - closed).abs() <= 1e-10, format!("b₁ vs closed form {:.2e}", (b1 - closed).abs())),
        ],
    )
}

fn criterion9() -> Outcome {
    let g = Grid::cube(1, 128, 10.0).unwrap();
    let mut f = StateField::gaussian(g, &[0.0], 1.0).unwrap();
    let h = run(&mut f, &harmonic_oscillator(0.5, 1).unwrap(), 1).passes;
    let mut checks = vec![(h == 2, format!("harmonic n=1: {h} passes (expect 2)"))];
    for n in [2usize, 3] {
        let v = RMat::<f64>::identity(n, n);
        let mut b = RMat::zeros(n, n);
        b[(0, 1)] = -1.0;
        b[(1, 0)] = 1.0;
        let co = schrodinger_coefficients(&v, &b, 0.1, &FixedPointOptions::default()).unwrap();
        let g = Grid::cube(n, 16, 8.0).unwrap();
        let mut f = StateField::gaussian(g, &vec![0.0; n], 1.0).unwrap();
        let p = run(&mut f, &co.program().unwrap(), 1).passes;
        checks.push((p == 2 * n, format!("Schrödinger n={n}: {p} passes (expect {})", 2 * n)));
    }
    outcome(9, "FFT-count claims", &checks)
}

fn criterion10(rng: &mut ChaCha8Rng) -> Outcome {
    let g = Grid::cube(1, 48, (PI * 48.0 / 2.0).sqrt()).unwrap();
    let mut random_symbol = || {
        let q = CMat::from_fn(2, 2, |_, _| C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        let q = (&q + q.transpose()) * C::new(0.5, 0.0);
        let y = CVec::from_fn(2, |_, _| C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        QuadraticSymbol::new(1, q, y, C::new(rng.gen_range(-1.0..1.0), 0.0)).unwrap()
    };
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let (a, b) = (random_symbol(), random_symbol());
        worst = worst.max(commutator_defect(&a, &b, &g, 4).unwrap());
    }
    outcome(10, "oracle commutator identity", &[(worst <= 1e-8, format!("max relative defect {worst:.2e} over 20 pairs (tol 1e-8)"))])
}

fn main() -> ExitCode {
    let mut rng = ChaCha8Rng::seed_from_u64(20240611);
    let outcomes = vec![
        criterion1(&mut rng),
        criterion2(),
        criterion3(),
        criterion4(),
        criterion5(),
        criterion6(),
        criterion7(),
        criterion8(),
        criterion9(),
        criterion10(&mut rng),
    ];
    let mut unexpected = 0;
    for o in &outcomes {
        let known = KNOWN_FAILURES.contains(&o.id);
        println!("criterion {:>2} {} {}: {}", o.id, if o.pass { "PASS" } else { "FAIL" }, o.name, o.detail);
        if o.pass == known {
            unexpected += 1;
        }
    }
    let passed = outcomes.iter().filter(|o| o.pass).count();
    println!("{passed}/{} criteria pass; known failures: {:?}", outcomes.len(), KNOWN_FAILURES);
    if unexpected == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{unexpected} criteria differ from the expected outcome");
        ExitCode::FAILURE
    }
}
