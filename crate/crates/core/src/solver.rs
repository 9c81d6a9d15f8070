//! Multi-objective projected gradient descent over orthonormal `d x r` bases,
//! dominance tests and multi-start frontier exploration.

use std::fmt;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::descent::{descent_direction, normalize_gradients, SimplexWeights};
use crate::error::{Error, Result};
use crate::linalg::{random_orthonormal, stiefel_project, Matrix, Subspace};
use crate::objectives::{FairPcaProblem, ObjectiveVector, ProblemOptions};

/// Largest exponent tried by the backtracking search (`η = 2^-p`).
pub const MAX_HALVINGS: u32 = 40;

/// Step halvings allowed when the projected step is rank deficient.
pub const MAX_PROJECTION_RETRIES: u32 = 30;

/// Anything with a vector of objectives and their gradients.
pub trait MultiObjective {
    fn objective_count(&self) -> usize;
    fn evaluate(&self, u: &Matrix) -> ObjectiveVector;
    fn gradients(&self, u: &Matrix) -> Vec<Matrix>;
}

impl MultiObjective for FairPcaProblem {
    fn objective_count(&self) -> usize {
        FairPcaProblem::objective_count(self)
    }

    fn evaluate(&self, u: &Matrix) -> ObjectiveVector {
        FairPcaProblem::evaluate(self, u)
    }

    fn gradients(&self, u: &Matrix) -> Vec<Matrix> {
        FairPcaProblem::gradients(self, u)
    }
}

/// Step-size rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum LineSearch {
    /// Armijo backtracking over `η = 2^-p`, sufficient decrease for every objective.
    Backtracking,
    /// Fixed schedule `η_t = 1/√t`.
    InvSqrt,
}

/// Where the sufficient-decrease test evaluates the trial point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TestPoint {
    /// `U + ηD` before projection.
    Unprojected,
    /// The projected trial point.
    Projected,
}

/// Starting point of each run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Init {
    /// Seeded random orthonormal basis.
    Random,
    /// Plain PCA on the pooled data.
    Pca,
}

impl fmt::Display for LineSearch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LineSearch::Backtracking => "backtracking",
            LineSearch::InvSqrt => "inv-sqrt",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub max_iters: usize,
    pub beta: f64,
    pub line_search: LineSearch,
    pub test_point: TestPoint,
    pub stationarity_tol: f64,
    pub seed: u64,
    pub restarts: usize,
    pub normalize: bool,
    pub init: Init,
    /// Replaces the problem's mode, penalty and alpha when set.
    pub overrides: Option<ProblemOptions>,
    /// Keep every iterate in the trace (memory grows with `T·d·r`).
    pub record_iterates: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            max_iters: 2000,
            beta: 1e-4,
            line_search: LineSearch::Backtracking,
            test_point: TestPoint::Unprojected,
            stationarity_tol: 1e-8,
            seed: 0,
            restarts: 1,
            normalize: true,
            init: Init::Random,
            overrides: None,
            record_iterates: false,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iters == 0 {
            return Err(Error::Config("max_iters must be at least 1".into()));
        }
        if !(self.beta > 0.0 && self.beta < 1.0) {
            return Err(Error::Config(format!("beta must lie in (0, 1), got {}", self.beta)));
        }
        if !(self.stationarity_tol > 0.0) {
            return Err(Error::Config("stationarity tolerance must be positive".into()));
        }
        if self.restarts == 0 {
            return Err(Error::Config("restarts must be at least 1".into()));
        }
        Ok(())
    }
}

/// One iteration of the main loop, recorded before the step is taken.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    /// 1-based iteration number.
    pub iteration: usize,
    /// Objective values at `U_t`.
    pub objectives: Vec<f64>,
    /// `‖D_t‖_F`.
    pub d_norm: f64,
    pub weights: SimplexWeights,
    /// Accepted step size; 0 when the loop stopped at this iteration.
    pub eta: f64,
    /// Backtracking exponent `p` (0 for the fixed schedule).
    pub halvings: u32,
}

#[derive(Debug, Clone, Default)]
pub struct SolverTrace {
    pub records: Vec<IterationRecord>,
    /// Wall-clock milliseconds since the start of the run, per record.
    pub elapsed_ms: Vec<f64>,
    /// `U_t` per record when [`SolverConfig::record_iterates`] is set.
    pub iterates: Vec<Matrix>,
}

impl SolverTrace {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// `min_{t ≤ T} ‖D_t‖_F` over the first `t` records.
    pub fn min_d_norm(&self, upto: usize) -> Option<f64> {
        self.records
            .iter()
            .take(upto)
            .map(|r| r.d_norm)
            .min_by(f64::total_cmp)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopReason {
    Stationary,
    MaxIterations,
    /// No step `2^-p`, `p ≤ 40`, gave sufficient decrease.
    LineSearchExhausted,
}

impl fmt::Display for StopReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StopReason::Stationary => "stationary",
            StopReason::MaxIterations => "max-iterations",
            StopReason::LineSearchExhausted => "line-search-exhausted",
        })
    }
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    pub subspace: Subspace,
    pub objectives: ObjectiveVector,
    pub trace: SolverTrace,
    pub stationary: bool,
    pub stop_reason: StopReason,
    /// Per-coordinate mean of the weights over the trace.
    pub mean_weights: SimplexWeights,
    pub seed: u64,
}

impl SolveResult {
    pub fn iterations(&self) -> usize {
        self.trace.len()
    }
}

/// Runs the descent loop from `u0`.
pub fn pareto_fair_pca(
    problem: &FairPcaProblem,
    config: &SolverConfig,
    u0: &Subspace,
) -> Result<SolveResult> {
    config.validate()?;
    let owned;
    let problem = match config.overrides {
        Some(options) => {
            owned = problem.with_options(options)?;
            &owned
        }
        None => problem,
    };
    if u0.ambient_dim() != problem.ambient_dim() || u0.target_dim() != problem.target_dim() {
        return Err(Error::Dimension(format!(
            "initial basis is {}x{}, problem needs {}x{}",
            u0.ambient_dim(),
            u0.target_dim(),
            problem.ambient_dim(),
            problem.target_dim()
        )));
    }

    let start = Instant::now();
    let mut trace = SolverTrace::default();
    let mut u = u0.basis().clone();
    let mut stop = StopReason::MaxIterations;

    for t in 1..=config.max_iters {
        let f = problem.evaluate(&u);
        if !f.is_finite() {
            return Err(Error::NonFinite {
                iteration: t,
                trace: Box::new(trace),
            });
        }
        let raw = problem.gradients(&u);
        let gs = if config.normalize {
            normalize_gradients(&raw)
        } else {
            raw.clone()
        };
        let (d, weights) = descent_direction(&gs)?;
        let d_norm = d.norm();

        let mut record = IterationRecord {
            iteration: t,
            objectives: f.into_vec(),
            d_norm,
            weights,
            eta: 0.0,
            halvings: 0,
        };
        if config.record_iterates {
            trace.iterates.push(u.clone());
        }

        if d_norm <= config.stationarity_tol {
            stop = StopReason::Stationary;
            push(&mut trace, record, start);
            break;
        }

        let (mut eta, halvings) = match config.line_search {
            LineSearch::InvSqrt => (1.0 / (t as f64).sqrt(), 0),
            LineSearch::Backtracking => {
                let search = match config.test_point {
                    TestPoint::Unprojected => backtracking_step(problem, &u, &d, &raw, config.beta),
                    TestPoint::Projected => {
                        backtracking_step_projected(problem, &u, &d, &raw, config.beta)
                    }
                };
                match search {
                    Ok(step) => step,
                    Err(Error::LineSearch { .. }) => {
                        log::debug!("line search exhausted at iteration {t}, |D| = {d_norm:e}");
                        stop = StopReason::LineSearchExhausted;
                        push(&mut trace, record, start);
                        break;
                    }
                    Err(e) => return Err(e),
                }
            }
        };

        let mut retries = 0;
        let next = loop {
            match stiefel_project(&(&u + &d * eta)) {
                Ok(s) => break s,
                Err(Error::DegenerateStep(msg)) => {
                    retries += 1;
                    if retries > MAX_PROJECTION_RETRIES {
                        return Err(Error::DegenerateStep(format!(
                            "iteration {t}: projection still rank deficient after \
                             {MAX_PROJECTION_RETRIES} halvings (eta = {eta:e}): {msg}"
                        )));
                    }
                    eta *= 0.5;
                }
                Err(e) => return Err(e),
            }
        };
        record.eta = eta;
        record.halvings = halvings;
        push(&mut trace, record, start);
        u = next.into_basis();
    }

    let subspace = Subspace::new(u)?;
    let objectives = problem.evaluate(subspace.basis());
    let mean_weights = SimplexWeights::mean(trace.records.iter().map(|r| &r.weights))?;
    Ok(SolveResult {
        subspace,
        objectives,
        trace,
        stationary: stop == StopReason::Stationary,
        stop_reason: stop,
        mean_weights,
        seed: config.seed,
    })
}

fn push(trace: &mut SolverTrace, record: IterationRecord, start: Instant) {
    trace.records.push(record);
    trace.elapsed_ms.push(start.elapsed().as_secs_f64() * 1e3);
}

/// Armijo backtracking at the un-projected trial point `U + ηD`.
///
/// Returns `(η, p)` with `η = 2^-p` for the smallest `p ∈ 1..=40` such that
/// `f_i(U + ηD) ≤ f_i(U) + β η ⟨D, G_i⟩` for every objective.
pub fn backtracking_step<P: MultiObjective + ?Sized>(
    problem: &P,
    u: &Matrix,
    d: &Matrix,
    gradients: &[Matrix],
    beta: f64,
) -> Result<(f64, u32)> {
    search(problem, u, d, gradients, beta, |m| Some(m.clone()))
}

/// Backtracking variant that tests the projected trial point instead.
pub fn backtracking_step_projected<P: MultiObjective + ?Sized>(
    problem: &P,
    u: &Matrix,
    d: &Matrix,
    gradients: &[Matrix],
    beta: f64,
) -> Result<(f64, u32)> {
    search(problem, u, d, gradients, beta, |m| {
        stiefel_project(m).ok().map(Subspace::into_basis)
    })
}

fn search<P, F>(
    problem: &P,
    u: &Matrix,
    d: &Matrix,
    gradients: &[Matrix],
    beta: f64,
    trial: F,
) -> Result<(f64, u32)>
where
    P: MultiObjective + ?Sized,
    F: Fn(&Matrix) -> Option<Matrix>,
{
    let f0 = problem.evaluate(u);
    if gradients.len() != f0.len() {
        return Err(Error::Dimension(format!(
            "{} gradients for {} objectives",
            gradients.len(),
            f0.len()
        )));
    }
    let slopes: Vec<f64> = gradients.iter().map(|g| d.dot(g)).collect();
    for p in 1..=MAX_HALVINGS {
        let eta = 0.5_f64.powi(p as i32);
        let Some(point) = trial(&(u + d * eta)) else {
            continue;
        };
        let f = problem.evaluate(&point);
        let ok = f
            .values()
            .iter()
            .zip(f0.values())
            .zip(&slopes)
            .all(|((&fi, &f0i), &s)| fi <= f0i + beta * eta * s);
        if ok {
            return Ok((eta, p));
        }
    }
    Err(Error::LineSearch {
        max_halvings: MAX_HALVINGS,
        d_norm: d.norm(),
        objectives: f0.into_vec(),
    })
}

/// `f1` is component-wise no worse than `f2` and strictly better somewhere.
pub fn dominates(f1: &[f64], f2: &[f64]) -> Result<bool> {
    if f1.len() != f2.len() {
        return Err(Error::InvalidInput(format!(
            "objective vectors of length {} and {} are not comparable",
            f1.len(),
            f2.len()
        )));
    }
    let no_worse = f1.iter().zip(f2).all(|(a, b)| a <= b);
    let better = f1.iter().zip(f2).any(|(a, b)| a < b);
    Ok(no_worse && better)
}

/// Indices of vectors not dominated by any other, in input order.
pub fn non_dominated_indices(vectors: &[&[f64]]) -> Result<Vec<usize>> {
    let mut keep = Vec::new();
    'outer: for (i, fi) in vectors.iter().enumerate() {
        for (j, fj) in vectors.iter().enumerate() {
            if i != j && dominates(fj, fi)? {
                continue 'outer;
            }
        }
        keep.push(i);
    }
    Ok(keep)
}

/// Drops every result whose final objective vector is dominated by another's.
pub fn filter_non_dominated(results: Vec<SolveResult>) -> Result<Vec<SolveResult>> {
    let vectors: Vec<&[f64]> = results.iter().map(|r| r.objectives.values()).collect();
    let keep = non_dominated_indices(&vectors)?;
    Ok(results
        .into_iter()
        .enumerate()
        .filter(|(i, _)| keep.binary_search(i).is_ok())
        .map(|(_, r)| r)
        .collect())
}

/// Starting basis for the run with the given seed.
pub fn initial_subspace(problem: &FairPcaProblem, init: Init, seed: u64) -> Result<Subspace> {
    match init {
        Init::Random => random_orthonormal(problem.ambient_dim(), problem.target_dim(), seed),
        Init::Pca => problem.plain_pca(),
    }
}

/// Runs `config.restarts` solves with seeds `seed, seed + 1, …` in parallel
/// and keeps the mutually non-dominated results in seed order. Failed runs
/// are dropped with a warning.
pub fn pareto_frontier(problem: &FairPcaProblem, config: &SolverConfig) -> Result<Vec<SolveResult>> {
    config.validate()?;
    let runs: Vec<(u64, Result<SolveResult>)> = (0..config.restarts as u64)
        .into_par_iter()
        .map(|i| {
            let seed = config.seed.wrapping_add(i);
            let run_config = SolverConfig {
                seed,
                ..config.clone()
            };
            let result = initial_subspace(problem, config.init, seed)
                .and_then(|u0| pareto_fair_pca(problem, &run_config, &u0));
            (seed, result)
        })
        .collect();

    let mut ok = Vec::with_capacity(runs.len());
    let mut first_error = None;
    for (seed, run) in runs {
        match run {
            Ok(r) => ok.push(r),
            Err(e) => {
                log::warn!("restart with seed {seed} failed and was dropped: {e}");
                first_error.get_or_insert(e);
            }
        }
    }
    if ok.is_empty() {
        return Err(first_error.expect("at least one restart ran"));
    }
    filter_non_dominated(ok)
}

/// Plain PCA basis of the pooled data.
pub fn plain_pca(problem: &FairPcaProblem) -> Result<Subspace> {
    problem.plain_pca()
}
