//! The pipeline stages. Each reads and writes files only through its
//! arguments, so a rerun with the same inputs produces identical bytes.

use std::fmt::Write as _;
use std::path::Path;

use log::info;
use manifold_deconv::manifold::dist;
use manifold_deconv::operator::{conv_matrix, MeasurementMatrix};
use manifold_deconv::sim::{add_noise, delta_snr, make_phantom};
use manifold_deconv::solvers::{solve, Scheme, SolverSpec};
use manifold_deconv::Signal;
use serde::Serialize;

use crate::config::PipelineConfig;
use crate::error::{CliError, Stage};
use crate::io::{read_signal, trace_csv, write_bytes, write_signal, SignalFile};
use crate::render::render;

pub fn generate(cfg: &PipelineConfig, out: &Path) -> Result<(), CliError> {
    let ph = make_phantom(&cfg.phantom).map_err(CliError::core(Stage::Generate))?;
    let mut file = SignalFile::from_signal(&ph.signal);
    if !ph.jumps.is_empty() {
        file.jumps = Some(ph.jumps);
    }
    write_signal(out, &file, Stage::Generate)?;
    info!("wrote {} samples to {}", ph.signal.len(), out.display());
    Ok(())
}

fn operator_for(cfg: &PipelineConfig, s: &Signal, stage: Stage) -> Result<MeasurementMatrix, CliError> {
    if s.kind() != cfg.phantom.manifold {
        return Err(CliError::config(format!(
            "{stage}: input is {} but the config describes {}",
            s.kind(),
            cfg.phantom.manifold
        )));
    }
    conv_matrix(&cfg.kernel, s.shape()).map_err(|e| CliError::config(format!("{stage}: {e}")))
}

/// Blur with the configured kernel, then add noise.
pub fn degrade(cfg: &PipelineConfig, input: &Path, out: &Path) -> Result<(), CliError> {
    let u = read_signal(input, Stage::Degrade)?;
    let a = operator_for(cfg, &u, Stage::Degrade)?;
    let blurred = a.apply(&u, None).map_err(CliError::core(Stage::Degrade))?;
    let noisy = add_noise(&blurred, &cfg.noise).map_err(CliError::core(Stage::Degrade))?;
    write_signal(out, &SignalFile::from_signal(&noisy), Stage::Degrade)
}

/// Runs the configured solver from `u0 = f`. The trace is recorded when a
/// trace path is given or `solver.record_functional` is set.
pub fn reconstruct(cfg: &PipelineConfig, input: &Path, out: &Path, trace: Option<&Path>) -> Result<(), CliError> {
    let f = read_signal(input, Stage::Reconstruct)?;
    let a = operator_for(cfg, &f, Stage::Reconstruct)?;
    let mut spec = cfg.solver.clone();
    spec.record_functional |= trace.is_some();
    let report = solve(&f, &a, &f, &cfg.regularizer, &spec).map_err(CliError::core(Stage::Reconstruct))?;
    info!(
        "{:?}: {} iterations in {:.2?}, {} skipped atom updates",
        spec.scheme, report.iterations, report.wall_time, report.skipped_atoms
    );
    write_signal(out, &SignalFile::from_signal(&report.result), Stage::Reconstruct)?;
    if spec.record_functional {
        let default = out.with_extension("trace.csv");
        let path = trace.unwrap_or(&default);
        write_bytes(path, trace_csv(&report.functional_trace).as_bytes(), Stage::Reconstruct)?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Evaluation {
    /// `null` when the reconstruction equals the ground truth.
    pub delta_snr_db: Option<f64>,
    pub rmse_degraded: f64,
    pub rmse_result: f64,
}

fn rmse(a: &Signal, b: &Signal) -> Result<f64, manifold_deconv::Error> {
    let sq = a
        .points()
        .iter()
        .zip(b.points())
        .map(|(x, y)| dist(x, y).map(|d| d * d))
        .sum::<Result<f64, _>>()?;
    Ok((sq / a.len() as f64).sqrt())
}

pub fn evaluate(ground: &Path, degraded: &Path, result: &Path) -> Result<Evaluation, CliError> {
    let g = read_signal(ground, Stage::Evaluate)?;
    let f = read_signal(degraded, Stage::Evaluate)?;
    let u = read_signal(result, Stage::Evaluate)?;
    let layout = |e: manifold_deconv::Error| CliError::config(format!("evaluate: {e}"));
    let snr = delta_snr(&g, &f, &u).map_err(layout)?;
    Ok(Evaluation {
        delta_snr_db: snr.is_finite().then_some(snr),
        rmse_degraded: rmse(&g, &f).map_err(layout)?,
        rmse_result: rmse(&g, &u).map_err(layout)?,
    })
}

pub fn render_file(input: &Path, out: &Path, cell: usize) -> Result<(), CliError> {
    let s = read_signal(input, Stage::Render)?;
    write_bytes(out, &render(&s, cell).to_ppm(), Stage::Render)
}

pub const BENCH_SCHEMES: [Scheme; 4] = [Scheme::Gfb, Scheme::GfbTraj, Scheme::StochasticGfbTraj, Scheme::Cppa];

/// Functional traces of all four schemes on one degraded signal. Gradient
/// schemes are left out (`None`) when `p = 1`; the stochastic trace is the
/// mean over `runs` consecutive seeds.
pub fn bench_traces(cfg: &PipelineConfig, f: &Signal, runs: usize) -> Result<Vec<Option<Vec<f64>>>, CliError> {
    let a = operator_for(cfg, f, Stage::Bench)?;
    BENCH_SCHEMES
        .iter()
        .map(|&scheme| {
            let spec = SolverSpec {
                scheme,
                record_functional: true,
                ..cfg.solver.clone()
            };
            if spec.validate().is_err() {
                return Ok(None);
            }
            let seeds = if scheme == Scheme::StochasticGfbTraj {
                runs.max(1)
            } else {
                1
            };
            let mut mean = vec![0.0; spec.iterations];
            for k in 0..seeds {
                let spec = SolverSpec {
                    seed: spec.seed + k as u64,
                    ..spec.clone()
                };
                let r = solve(f, &a, f, &cfg.regularizer, &spec).map_err(CliError::core(Stage::Bench))?;
                info!("{scheme:?} seed {}: {:.2?}", spec.seed, r.wall_time);
                for (m, v) in mean.iter_mut().zip(&r.functional_trace) {
                    *m += v / seeds as f64;
                }
            }
            Ok(Some(mean))
        })
        .collect()
}

pub fn bench(cfg: &PipelineConfig, input: &Path, out: &Path, runs: usize) -> Result<(), CliError> {
    let f = read_signal(input, Stage::Bench)?;
    let traces = bench_traces(cfg, &f, runs)?;
    let mut csv = String::from("iteration,gfb,gfb_traj,stochastic_gfb_traj,cppa\n");
    for n in 0..cfg.solver.iterations {
        let _ = write!(csv, "{}", n + 1);
        for t in &traces {
            match t {
                Some(t) => {
                    let _ = write!(csv, ",{}", t[n]);
                }
                None => csv.push(','),
            }
        }
        csv.push('\n');
    }
    write_bytes(out, csv.as_bytes(), Stage::Bench)
}
