//! Single runs and multi-trial method comparisons.

use std::num::NonZeroUsize;

use nbk_core::problems::{GeneratorParams, ProblemData};
use nbk_core::solver::solve;
use nbk_core::{DistanceGenerator, Method, NonlinearProblem, RunRecord, SamplerKind, SolverConfig};
use rayon::prelude::*;

use crate::preset::Preset;
use crate::BenchError;

/// Everything a run needs besides the problem, the method and the seed.
#[derive(Debug, Clone)]
pub struct RunSpec {
    pub generator: DistanceGenerator,
    pub x0_star: Vec<f64>,
    pub tol: f64,
    pub relative_tol: bool,
    pub max_iters: usize,
    pub sigma: f64,
    pub trace_every: usize,
    /// Replace the residual-weighted sampler of the greedy methods by the max-residual rule.
    pub max_residual: bool,
}

/// Column label of a method in CSV files and summaries.
pub fn method_label(method: Method, max_residual: bool) -> String {
    if max_residual && method.sampler() == SamplerKind::GreedyResidualWeighted {
        format!("{}-max", method.name())
    } else {
        method.name().to_string()
    }
}

pub fn run_method(problem: &NonlinearProblem, spec: &RunSpec, method: Method, seed: u64) -> Result<RunRecord, BenchError> {
    let mut cfg = SolverConfig::for_method(method, seed);
    if spec.max_residual && cfg.sampler == SamplerKind::GreedyResidualWeighted {
        cfg.sampler = SamplerKind::MaxResidual;
    }
    cfg.sigma = spec.sigma;
    cfg.max_iters = spec.max_iters;
    cfg.residual_tol = spec.tol;
    cfg.relative_tol = spec.relative_tol;
    cfg.trace_every = spec.trace_every;
    let (_, record) = solve(problem, &spec.generator, &spec.x0_star, &cfg)?;
    Ok(record)
}

/// Generator chosen for a problem loaded from a file: `λ‖·‖₁ + ½‖·‖₂²` for quadratic
/// systems, `½‖·‖₂²` for generated Gaussian (unconstrained) linear systems, the entropy for
/// other linear systems, and blockwise entropies for LSD.
pub fn default_generator(problem: &NonlinearProblem, lambda: f64) -> Result<DistanceGenerator, BenchError> {
    Ok(match problem.data() {
        ProblemData::Quadratic { .. } => DistanceGenerator::l1_quadratic(lambda)?,
        ProblemData::Linear { .. } => match problem.generator().map(|g| &g.params) {
            Some(GeneratorParams::LinearGaussian { .. }) => DistanceGenerator::quadratic(),
            _ => DistanceGenerator::simplex_entropy(problem.d())?,
        },
        ProblemData::Lsd { r, m, .. } => DistanceGenerator::entropy_blocks(*r, *m)?,
    })
}

#[derive(Debug, Clone)]
pub struct TrialResult {
    pub trial: usize,
    pub seed: u64,
    pub runs: Vec<(Method, RunRecord)>,
}

/// Options of a comparison that may differ from the preset.
#[derive(Debug, Clone)]
pub struct CompareOptions {
    pub methods: Vec<Method>,
    pub trials: usize,
    pub base_seed: u64,
    pub sigma: f64,
    pub max_residual: bool,
}

impl CompareOptions {
    pub fn from_preset(preset: &Preset) -> Self {
        CompareOptions {
            methods: preset.methods.clone(),
            trials: preset.trials,
            base_seed: preset.base_seed,
            sigma: 1.0,
            max_residual: false,
        }
    }
}

/// Runs every method on the instance of trial `trial` (seed `base_seed + trial`).
pub fn run_trial(preset: &Preset, opts: &CompareOptions, trial: usize) -> Result<TrialResult, BenchError> {
    let seed = opts.base_seed.wrapping_add(trial as u64);
    let problem = preset.family.generate(seed)?;
    let spec = RunSpec {
        generator: preset.family.generator()?,
        x0_star: preset.family.initial_dual(problem.d(), seed),
        tol: preset.tol,
        relative_tol: preset.relative_tol,
        max_iters: preset.max_iters,
        sigma: opts.sigma,
        trace_every: preset.trace_every,
        max_residual: opts.max_residual,
    };
    let runs = opts
        .methods
        .iter()
        .map(|&m| Ok((m, run_method(&problem, &spec, m, seed)?)))
        .collect::<Result<_, BenchError>>()?;
    Ok(TrialResult { trial, seed, runs })
}

/// Worker count from `SOLVER_THREADS`, defaulting to the number of logical processors.
pub fn solver_threads() -> usize {
    std::env::var("SOLVER_THREADS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, NonZeroUsize::get))
}

/// All trials of a comparison on a pool of `threads` workers; results come back in trial order.
pub fn compare(preset: &Preset, opts: &CompareOptions, threads: usize) -> Result<Vec<TrialResult>, BenchError> {
    if opts.trials == 0 {
        return Err(BenchError::Usage("trials must be at least 1".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| BenchError::Usage(format!("thread pool: {e}")))?;
    pool.install(|| (0..opts.trials).into_par_iter().map(|t| run_trial(preset, opts, t)).collect())
}
