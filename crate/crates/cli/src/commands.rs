use std::fs;
use std::path::Path;
use std::time::Instant;

use exsplit::catalog::harmonic_oscillator;
use exsplit::engine::{write_diagnostics, write_field, ExecOptions, SpectralEngine, StateField, StepDiagnostic};
use exsplit::oracles::{dense_action, discretize_weyl, field_to_vector, strang_harmonic, vector_to_field};
use exsplit::splitter::verify_program_with_tolerance;
use exsplit::{Program64, SplitReport};
use serde::Serialize;

use crate::config::{read_program, JobConfig, Overrides, Problem};
use crate::error::CliError;

fn program(cfg: &JobConfig, over: &Overrides) -> Result<Program64, CliError> {
    match &over.program {
        Some(path) => read_program(path),
        None => cfg.build_program(),
    }
}

fn report(cfg: &JobConfig, prog: &Program64) -> Result<SplitReport, CliError> {
    Ok(verify_program_with_tolerance(prog, cfg.tolerances.verify)?)
}

fn fail_unless_passed(r: &SplitReport) -> Result<(), CliError> {
    if r.passed {
        Ok(())
    } else {
        Err(CliError::Verification(format!(
            "flow residual {:?} exceeds tolerance {:e} or a factor is not contractive (PSD margin {:?})",
            r.flow_residual, r.tolerance, r.min_psd_margin
        )))
    }
}

pub fn factor(cfg: &JobConfig, over: &Overrides) -> Result<(), CliError> {
    let prog = program(cfg, over)?;
    let rep = report(cfg, &prog)?;
    let dir = cfg.out_dir();
    fs::create_dir_all(&dir)?;
    fs::write(dir.join("program.json"), prog.to_json()?)?;
    fs::write(dir.join("report.json"), serde_json::to_string_pretty(&rep)?)?;
    println!(
        "{} steps, flow residual {}, written to {}",
        prog.steps.len(),
        rep.flow_residual.map_or("n/a".to_string(), |r| format!("{r:.3e}")),
        dir.display()
    );
    fail_unless_passed(&rep)
}

pub fn verify(cfg: &JobConfig, over: &Overrides) -> Result<(), CliError> {
    let prog = program(cfg, over)?;
    let rep = report(cfg, &prog)?;
    println!("{}", serde_json::to_string_pretty(&rep)?);
    fail_unless_passed(&rep)
}

#[derive(Serialize)]
struct StepRow {
    time_step: usize,
    time: f64,
    norm: f64,
    boundary_mass: f64,
    fft_calls: usize,
}

pub fn solve(cfg: &JobConfig, over: &Overrides) -> Result<(), CliError> {
    let prog = program(cfg, over)?;
    let grid = cfg.build_grid(prog.dim)?;
    let mut field = cfg.initial_field(&grid)?;
    let dir = cfg.out_dir();
    fs::create_dir_all(&dir)?;

    let n_steps = cfg.n_steps.unwrap_or(1);
    let engine = SpectralEngine::<f64>::new(&grid);
    let opts = ExecOptions { fuse: true, diagnostics: true };
    let mut diagnostics: Vec<StepDiagnostic> = Vec::new();
    let mut rows = vec![StepRow { time_step: 0, time: 0.0, norm: field.l2_norm(), boundary_mass: field.boundary_mass()?, fft_calls: 0 }];
    let mass_limit = (10.0 * rows[0].boundary_mass).max(1e-6);
    let mut warned = false;
    for k in 1..=n_steps {
        let rep = engine.execute(&mut field, &prog, opts)?;
        let offset = (k - 1) * prog.steps.len();
        diagnostics.extend(rep.diagnostics.into_iter().map(|mut d| {
            d.step_index += offset;
            d
        }));
        if rep.boundary_mass > mass_limit && !warned {
            log::warn!("boundary mass {:.2e} at step {k}; enlarge the grid", rep.boundary_mass);
            warned = true;
        }
        rows.push(StepRow {
            time_step: k,
            time: k as f64 * prog.t,
            norm: field.l2_norm(),
            boundary_mass: rep.boundary_mass,
            fft_calls: rep.stats.fft_1d_calls,
        });
        if cfg.output.dump_every > 0 && k % cfg.output.dump_every == 0 {
            write_field(&dir.join(format!("field_{k:06}.bin")), &field)?;
        }
    }

    write_field(&dir.join("field_final.bin"), &field)?;
    let diag_path = cfg.output.diagnostics.clone().unwrap_or_else(|| dir.join("diagnostics.csv"));
    write_diagnostics(fs::File::create(&diag_path)?, &diagnostics)?;
    let mut w = csv::Writer::from_path(dir.join("steps.csv"))?;
    for r in &rows {
        w.serialize(r)?;
    }
    w.flush()?;

    let last = rows.last().expect("initial row");
    println!(
        "{n_steps} steps of {:e}: norm {:.12e} -> {:.12e}, boundary mass {:.2e}",
        prog.t, rows[0].norm, last.norm, last.boundary_mass
    );
    Ok(())
}

#[derive(Serialize)]
struct BenchRow {
    method: &'static str,
    t: f64,
    steps: usize,
    fft_calls: usize,
    error_vs_oracle: f64,
    wall_time: f64,
}

fn run_repeated(engine: &SpectralEngine<f64>, init: &StateField<f64>, prog: &Program64, steps: usize) -> Result<(StateField<f64>, usize, f64), CliError> {
    let mut f = init.clone();
    let mut calls = 0;
    let start = Instant::now();
    for _ in 0..steps {
        calls += engine.execute(&mut f, prog, ExecOptions::default())?.stats.fft_1d_calls;
    }
    Ok((f, calls, start.elapsed().as_secs_f64()))
}

/// Exact splitting against Strang splitting on the harmonic oscillator, both measured against the dense oracle.
pub fn bench(cfg: &JobConfig, out: Option<&Path>) -> Result<(), CliError> {
    if cfg.problem.unwrap_or(Problem::Harmonic) != Problem::Harmonic {
        return Err(CliError::config("bench supports the harmonic problem only"));
    }
    let n = cfg.dim.unwrap_or(1);
    let t_final = cfg.t_final.unwrap_or(0.8);
    if !(t_final > 0.0) {
        return Err(CliError::config("bench needs a positive t_final"));
    }
    let mut cfg = cfg.clone();
    cfg.problem = Some(Problem::Harmonic);
    let grid = cfg.build_grid(n)?;
    let init = cfg.initial_field(&grid)?;
    let engine = SpectralEngine::<f64>::new(&grid);

    let target = harmonic_oscillator::<f64>(t_final, n)?.target.expect("harmonic target");
    let op = discretize_weyl(&target, &grid)?;
    let reference = vector_to_field(&grid, &dense_action(&op, t_final, &field_to_vector(&init))?)?;

    let mut rows = Vec::new();
    for &tau in &cfg.bench.taus {
        if !(tau > 0.0) {
            return Err(CliError::config("bench step sizes must be positive"));
        }
        let steps = (t_final / tau).round().max(1.0) as usize;
        let h = t_final / steps as f64;
        for (method, prog) in [("exact", harmonic_oscillator(h, n)?), ("strang", strang_harmonic(h, n)?)] {
            let (f, calls, wall) = run_repeated(&engine, &init, &prog, steps)?;
            rows.push(BenchRow { method, t: t_final, steps, fft_calls: calls, error_vs_oracle: f.l2_error(&reference)?, wall_time: wall });
        }
    }

    let mut w: csv::Writer<Box<dyn std::io::Write>> = match out {
        Some(p) => {
            if let Some(parent) = p.parent() {
                fs::create_dir_all(parent)?;
            }
            csv::Writer::from_writer(Box::new(fs::File::create(p)?))
        }
        None => csv::Writer::from_writer(Box::new(std::io::stdout())),
    };
    for r in &rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}
