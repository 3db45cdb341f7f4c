//! Splitting schemes for `F(u) = Σ_i dist(A(u)_i, f_i)^p + R(u)`.
//!
//! All schemes use the diminishing steps `μ_n = μ₀/n`. The data atoms
//! `D_i = dist(A(u)_i, f_i)^p` are handled by exponential-map gradient steps
//! (GFB variants) or by proximal steps (CPPA); regularizer atoms always by
//! their proximal maps.

mod data;

use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::karcher::MeanOptions;
use crate::manifold::{dist_unchecked, exp_unchecked, ManifoldKind, TangentVector};
use crate::operator::MeasurementMatrix;
use crate::regularizers::{atoms, prox_atom, prox_sweep, AtomList, RegularizerSpec};
use crate::signal::Signal;

pub use crate::regularizers::Iterate;
pub use data::{prox_data_atom, row_gradient};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// Jacobi gradient step on all data atoms, then a prox sweep.
    Gfb,
    /// Gauss-Seidel trajectory steps per data atom, then a prox sweep.
    GfbTraj,
    /// Trajectory steps and atom proxes in a random order per iteration.
    StochasticGfbTraj,
    /// Cyclic proximal point.
    Cppa,
}

fn default_damping() -> f64 {
    1.0
}

fn default_inner() -> usize {
    2
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverSpec {
    pub scheme: Scheme,
    pub iterations: usize,
    /// Initial step `μ₀`; defaults to 5 for SPD data with `p = 1`, else 1.
    #[serde(default)]
    pub mu0: Option<f64>,
    pub p: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub record_functional: bool,
    /// Total trajectory time per data atom, in (0, 1].
    #[serde(default = "default_damping")]
    pub damping: f64,
    /// Refinement iterations of the data-atom prox (CPPA).
    #[serde(default = "default_inner")]
    pub inner_iterations: usize,
}

impl SolverSpec {
    pub fn new(scheme: Scheme, iterations: usize, p: f64) -> Self {
        Self {
            scheme,
            iterations,
            mu0: None,
            p,
            seed: 0,
            record_functional: false,
            damping: 1.0,
            inner_iterations: default_inner(),
        }
    }

    pub fn mu0_for(&self, kind: ManifoldKind) -> f64 {
        self.mu0.unwrap_or(if kind == ManifoldKind::Spd3 && self.p == 1.0 {
            5.0
        } else {
            1.0
        })
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p >= 1.0) || !self.p.is_finite() {
            return Err(Error::InvalidSpec(format!("p must be in [1, inf), got {}", self.p)));
        }
        if self.scheme != Scheme::Cppa && self.p <= 1.0 {
            return Err(Error::InvalidSpec(
                "gradient schemes need p > 1; use cppa for p = 1".into(),
            ));
        }
        if let Some(m) = self.mu0 {
            if !(m > 0.0) || !m.is_finite() {
                return Err(Error::InvalidSpec(format!("mu0 must be > 0, got {m}")));
            }
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(Error::InvalidSpec(format!(
                "damping must be in (0, 1], got {}",
                self.damping
            )));
        }
        Ok(())
    }
}

/// `μ_n = μ₀/n` for `n ≥ 1`.
pub fn step_size(mu0: f64, n: usize) -> f64 {
    mu0 / n as f64
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub result: Signal,
    pub aux: Vec<Signal>,
    /// `F` after each outer iteration, when recorded.
    pub functional_trace: Vec<f64>,
    pub wall_time: Duration,
    pub iterations: usize,
    /// Data-atom updates skipped because of degenerate means.
    pub skipped_atoms: usize,
}

/// `Σ_i dist(A(u)_i, f_i)^p + R(u)`; ties in the means resolve toward `f`.
pub fn functional_value(it: &Iterate, a: &MeasurementMatrix, f: &Signal, reg: &RegularizerSpec, p: f64) -> Result<f64> {
    let au = a.apply(&it.u, Some(f))?;
    Ok(data_value(&au, f, p) + reg.value(it)?)
}

fn data_value(au: &Signal, f: &Signal, p: f64) -> f64 {
    au.points()
        .iter()
        .zip(f.points())
        .map(|(m, y)| {
            let d = dist_unchecked(m, y);
            if p == 2.0 {
                d * d
            } else {
                d.powf(p)
            }
        })
        .sum()
}

/// Shared state of one run.
struct Run<'a> {
    a: &'a MeasurementMatrix,
    f: &'a Signal,
    reg: &'a RegularizerSpec,
    spec: &'a SolverSpec,
    atoms: AtomList,
    it: Iterate,
    /// Last computed mean per row, used to warm-start the next one.
    means: Signal,
    opts: MeanOptions,
    skipped: usize,
    trace: Vec<f64>,
    mu0: f64,
    max_len: f64,
}

impl<'a> Run<'a> {
    fn new(
        u0: &Signal,
        a: &'a MeasurementMatrix,
        f: &'a Signal,
        reg: &'a RegularizerSpec,
        spec: &'a SolverSpec,
    ) -> Result<Self> {
        spec.validate()?;
        reg.validate()?;
        u0.kind().check(f.kind())?;
        if u0.len() != a.n_cols() || f.len() != a.n_rows() {
            return Err(Error::ShapeMismatch(format!(
                "operator is {}x{}, u0 has {} samples, f has {}",
                a.n_rows(),
                a.n_cols(),
                u0.len(),
                f.len()
            )));
        }
        let opts = MeanOptions::default();
        let means = a.apply_with(u0, Some(f), None, &opts)?;
        let kind = u0.kind();
        Ok(Self {
            a,
            f,
            reg,
            spec,
            atoms: atoms(reg, u0.shape())?,
            it: Iterate::new(u0.clone(), reg),
            means,
            opts,
            skipped: 0,
            trace: Vec::new(),
            mu0: spec.mu0_for(kind),
            max_len: kind
                .injectivity_scale()
                .map_or(if kind == ManifoldKind::Spd3 { 0.5 } else { f64::INFINITY }, |s| {
                    0.5 * s
                }),
        })
    }

    fn skip(&mut self, row: usize, e: Error) -> Result<()> {
        match e.root() {
            Error::SingularL { .. }
            | Error::ConjugatePoint(_)
            | Error::NoConvergence { .. }
            | Error::AntipodalPoint
            | Error::SingularGradient(_) => {
                log::debug!("data atom {row} skipped: {e}");
                self.skipped += 1;
                Ok(())
            }
            _ => Err(e.at_row(row)),
        }
    }

    fn record(&mut self) -> Result<()> {
        if self.spec.record_functional {
            let au = self
                .a
                .apply_with(&self.it.u, Some(self.f), Some(&self.means), &self.opts)?;
            let v = data_value(&au, self.f, self.spec.p) + self.reg.value(&self.it)?;
            self.means = au;
            self.trace.push(v);
        }
        Ok(())
    }

    fn finish(self, start: Instant) -> SolveReport {
        SolveReport {
            result: self.it.u,
            aux: self.it.aux,
            functional_trace: self.trace,
            wall_time: start.elapsed(),
            iterations: self.spec.iterations,
            skipped_atoms: self.skipped,
        }
    }

    /// One Jacobi gradient step on all data atoms. The step is shortened so
    /// that no atom's own step exceeds `max_len`; returns the step used.
    fn jacobi_step(&mut self, mu: f64) -> Result<f64> {
        let u = &self.it.u;
        let rows: Vec<Result<Vec<(usize, TangentVector)>>> = (0..self.a.n_rows())
            .into_par_iter()
            .map(|i| {
                let o = self.opts.clone().with_init(self.means.get(i).clone());
                let m = self.a.row_mean(i, u, Some(self.f.get(i)), &o)?;
                row_gradient(self.a, i, u, &m, self.f.get(i), self.spec.p)
            })
            .collect();
        let mut total: Vec<TangentVector> = u.points().iter().map(TangentVector::zero).collect();
        let mut mu = mu;
        for (i, r) in rows.into_iter().enumerate() {
            match r {
                Ok(g) => {
                    let norm = g.iter().map(|(_, v)| v.norm().powi(2)).sum::<f64>().sqrt();
                    if norm > 0.0 {
                        mu = mu.min(self.max_len / norm);
                    }
                    for (j, v) in g {
                        total[j].add_scaled(&v, 1.0);
                    }
                }
                Err(e) => self.skip(i, e)?,
            }
        }
        for (j, g) in total.iter().enumerate() {
            if !g.is_zero() {
                let p = exp_unchecked(self.it.u.get(j), g.scaled(-mu).components());
                self.it.u.set(j, p);
            }
        }
        Ok(mu)
    }

    /// Trajectory step on data atom `i`: a polygonal path of exponential
    /// steps along refreshed gradients, integrated to total time `damping`.
    fn trajectory_step(&mut self, i: usize, mu: f64) -> Result<()> {
        const MAX_SEGMENTS: usize = 64;
        let total = self.spec.damping;
        let mut elapsed = 0.0;
        for seg in 0..MAX_SEGMENTS {
            let o = self.opts.clone().with_init(self.means.get(i).clone());
            let m = match self.a.row_mean(i, &self.it.u, Some(self.f.get(i)), &o) {
                Ok(m) => m,
                Err(e) => return self.skip(i, e),
            };
            self.means.set(i, m.clone());
            let g = match row_gradient(self.a, i, &self.it.u, &m, self.f.get(i), self.spec.p) {
                Ok(g) => g,
                Err(e) => return self.skip(i, e),
            };
            let norm = g.iter().map(|(_, v)| v.norm().powi(2)).sum::<f64>().sqrt();
            if norm == 0.0 {
                return Ok(());
            }
            let remaining = total - elapsed;
            let tau = if seg + 1 == MAX_SEGMENTS {
                remaining
            } else {
                remaining.min(self.max_len / (mu * norm))
            };
            for (j, v) in &g {
                let p = exp_unchecked(self.it.u.get(*j), v.scaled(-mu * tau).components());
                self.it.u.set(*j, p);
            }
            if tau == remaining {
                return Ok(());
            }
            elapsed += tau;
        }
        Ok(())
    }

    fn prox_data(&mut self, i: usize, mu: f64) -> Result<()> {
        match prox_data_atom(
            self.a,
            i,
            &self.it.u,
            self.f.get(i),
            self.means.get(i),
            self.spec.p,
            mu,
            self.spec.inner_iterations,
            &self.opts,
        ) {
            Ok((pts, m)) => {
                for ((j, _), p) in self.a.row(i).iter().zip(pts) {
                    self.it.u.set(*j, p);
                }
                self.means.set(i, m);
                Ok(())
            }
            Err(e) => self.skip(i, e),
        }
    }
}

/// Forward-backward with a Jacobi gradient step on the data term.
pub fn solve_gfb(
    u0: &Signal,
    a: &MeasurementMatrix,
    f: &Signal,
    reg: &RegularizerSpec,
    spec: &SolverSpec,
) -> Result<SolveReport> {
    let start = Instant::now();
    let mut run = Run::new(u0, a, f, reg, spec)?;
    for n in 1..=spec.iterations {
        let mu = run.jacobi_step(step_size(run.mu0, n))?;
        prox_sweep(&mut run.it, &run.atoms, mu);
        run.record()?;
    }
    Ok(run.finish(start))
}

/// Forward-backward with Gauss-Seidel trajectory steps on the data atoms.
pub fn solve_gfb_traj(
    u0: &Signal,
    a: &MeasurementMatrix,
    f: &Signal,
    reg: &RegularizerSpec,
    spec: &SolverSpec,
) -> Result<SolveReport> {
    let start = Instant::now();
    let mut run = Run::new(u0, a, f, reg, spec)?;
    for n in 1..=spec.iterations {
        let mu = step_size(run.mu0, n);
        for i in 0..a.n_rows() {
            run.trajectory_step(i, mu)?;
        }
        prox_sweep(&mut run.it, &run.atoms, mu);
        run.record()?;
    }
    Ok(run.finish(start))
}

/// Trajectory steps and regularizer proxes in a fresh random order each
/// iteration; bit-reproducible for a fixed seed.
pub fn solve_stochastic(
    u0: &Signal,
    a: &MeasurementMatrix,
    f: &Signal,
    reg: &RegularizerSpec,
    spec: &SolverSpec,
) -> Result<SolveReport> {
    let start = Instant::now();
    let mut run = Run::new(u0, a, f, reg, spec)?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let n_data = a.n_rows();
    let mut order: Vec<usize> = (0..n_data + run.atoms.len()).collect();
    for n in 1..=spec.iterations {
        let mu = step_size(run.mu0, n);
        order.shuffle(&mut rng);
        for &k in &order {
            if k < n_data {
                run.trajectory_step(k, mu)?;
            } else {
                let atom = run.atoms.atoms[k - n_data].clone();
                prox_atom(&mut run.it, &atom, mu);
            }
        }
        run.record()?;
    }
    Ok(run.finish(start))
}

/// Cyclic proximal point: every data atom, then every regularizer atom.
pub fn solve_cppa(
    u0: &Signal,
    a: &MeasurementMatrix,
    f: &Signal,
    reg: &RegularizerSpec,
    spec: &SolverSpec,
) -> Result<SolveReport> {
    let start = Instant::now();
    let mut run = Run::new(u0, a, f, reg, spec)?;
    for n in 1..=spec.iterations {
        let mu = step_size(run.mu0, n);
        for i in 0..a.n_rows() {
            run.prox_data(i, mu)?;
        }
        prox_sweep(&mut run.it, &run.atoms, mu);
        run.record()?;
    }
    Ok(run.finish(start))
}

/// Dispatches on `spec.scheme`.
pub fn solve(
    u0: &Signal,
    a: &MeasurementMatrix,
    f: &Signal,
    reg: &RegularizerSpec,
    spec: &SolverSpec,
) -> Result<SolveReport> {
    match spec.scheme {
        Scheme::Gfb => solve_gfb(u0, a, f, reg, spec),
        Scheme::GfbTraj => solve_gfb_traj(u0, a, f, reg, spec),
        Scheme::StochasticGfbTraj => solve_stochastic(u0, a, f, reg, spec),
        Scheme::Cppa => solve_cppa(u0, a, f, reg, spec),
    }
}
