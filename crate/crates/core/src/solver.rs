//! Randomized and greedy nonlinear Bregman–Kaczmarz iterations.
//!
//! One iteration samples a component `i` from the current residual `r = −F(x)`, linearizes
//! `F_i` at `x` into the hyperplane `⟨∇F_i(x), y⟩ = β` with `β = ⟨∇F_i(x), x⟩ − F_i(x)`, and
//! moves the dual iterate along `∇F_i(x)`: onto the hyperplane by an exact Bregman projection
//! (falling back to the relaxed step when the hyperplane misses the domain), or always by the
//! relaxed step `σF_i / ‖∇F_i‖_*²`.

use std::time::Instant;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::dgf::{dot, DistanceGenerator, Geometry, PrimalDualState};
use crate::error::{check_len, Error, Result};
use crate::problems::{NonlinearProblem, ProblemData};
use crate::project::{project, relaxed_update, Hyperplane, StepKind, StepOutcome};
use crate::rng::{stream, Stream};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SamplerKind {
    Uniform,
    /// `p_i = r_i² / ‖r‖²`
    GreedyResidualWeighted,
    /// Deterministic `argmax |r_i|`, ties to the smallest index.
    MaxResidual,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepRule {
    ExactWithFallback,
    RelaxedAlways,
}

/// The four sampler / step-rule combinations compared by the benchmarks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Nbk,
    RNbk,
    Grnbk,
    RGrnbk,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Nbk, Method::RNbk, Method::Grnbk, Method::RGrnbk];

    pub fn sampler(self) -> SamplerKind {
        match self {
            Method::Nbk | Method::RNbk => SamplerKind::Uniform,
            Method::Grnbk | Method::RGrnbk => SamplerKind::GreedyResidualWeighted,
        }
    }

    pub fn step_rule(self) -> StepRule {
        match self {
            Method::Nbk | Method::Grnbk => StepRule::ExactWithFallback,
            Method::RNbk | Method::RGrnbk => StepRule::RelaxedAlways,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Method::Nbk => "NBK",
            Method::RNbk => "rNBK",
            Method::Grnbk => "GRNBK",
            Method::RGrnbk => "rGRNBK",
        }
    }

    pub fn parse(s: &str) -> Option<Method> {
        Method::ALL.into_iter().find(|m| m.name().eq_ignore_ascii_case(s))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub sampler: SamplerKind,
    pub step_rule: StepRule,
    pub sigma: f64,
    pub max_iters: usize,
    pub residual_tol: f64,
    /// Compare `‖F(x_k)‖ / ‖F(x_0)‖` instead of `‖F(x_k)‖` against the tolerance.
    pub relative_tol: bool,
    pub seed: u64,
    pub trace_every: usize,
}

impl SolverConfig {
    pub fn for_method(method: Method, seed: u64) -> Self {
        SolverConfig {
            sampler: method.sampler(),
            step_rule: method.step_rule(),
            sigma: 1.0,
            max_iters: 1000,
            residual_tol: 1e-12,
            relative_tol: false,
            seed,
            trace_every: 1,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::Config(format!("sigma must be positive, got {}", self.sigma)));
        }
        if !(self.residual_tol > 0.0) {
            return Err(Error::Config(format!("residual tolerance must be positive, got {}", self.residual_tol)));
        }
        if self.max_iters == 0 || self.trace_every == 0 {
            return Err(Error::Config("max_iters and trace_every must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TerminalStatus {
    Converged,
    MaxIters,
    /// Every component with a nonzero residual has a vanishing gradient.
    StalledZeroResidualRow,
}

impl TerminalStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            TerminalStatus::Converged => "Converged",
            TerminalStatus::MaxIters => "MaxIters",
            TerminalStatus::StalledZeroResidualRow => "StalledZeroResidualRow",
        }
    }
}

/// One recorded iterate. Row `k` describes `x_k`; for `k ≥ 1` the step fields describe the
/// step `x_{k−1} → x_k`, taken on component `index`.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub k: usize,
    pub index: Option<usize>,
    pub residual_norm: f64,
    pub error_norm: Option<f64>,
    pub bregman_dist: Option<f64>,
    pub step_kind: Option<StepKind>,
    pub stepsize: Option<f64>,
    /// `β` of the hyperplane stepped onto.
    pub beta: Option<f64>,
    /// `⟨∇F_i(x_{k−1}), x_k⟩ − β`.
    pub hyperplane_gap: Option<f64>,
    /// `F_i(x_{k−1})`.
    pub f_value: Option<f64>,
    /// `‖∇F_i(x_{k−1})‖_*`.
    pub grad_dual_norm: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub rows: Vec<TraceRow>,
    pub status: TerminalStatus,
    pub iterations: usize,
    pub initial_residual_norm: f64,
    pub final_residual_norm: f64,
    pub trace_every: usize,
    pub wall_clock_secs: f64,
}

/// Draws a component index from `residual` according to `kind`.
pub fn sample_index(kind: SamplerKind, residual: &[f64], rng: &mut ChaCha8Rng) -> Result<usize> {
    if residual.is_empty() {
        return Err(Error::EmptySet);
    }
    match kind {
        SamplerKind::Uniform => Ok(rng.random_range(0..residual.len())),
        SamplerKind::GreedyResidualWeighted => {
            let total: f64 = residual.iter().map(|r| r * r).sum();
            if !(total > 0.0) {
                return Err(Error::Contract("greedy sampling from a zero residual".into()));
            }
            let u = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut last = 0;
            for (i, r) in residual.iter().enumerate() {
                let w = r * r;
                if w == 0.0 {
                    continue;
                }
                acc += w;
                last = i;
                if u < acc {
                    return Ok(i);
                }
            }
            Ok(last)
        }
        SamplerKind::MaxResidual => {
            let mut best = 0;
            for (i, r) in residual.iter().enumerate() {
                if r.abs() > residual[best].abs() {
                    best = i;
                }
            }
            if residual[best] == 0.0 {
                return Err(Error::Contract("max-residual sampling from a zero residual".into()));
            }
            Ok(best)
        }
    }
}

/// Rejects generator / problem pairings the iteration cannot run on.
pub fn check_compatibility(p: &NonlinearProblem, generator: &DistanceGenerator) -> Result<()> {
    if let Some(dim) = generator.dim() {
        if dim != p.d() {
            return Err(Error::Config(format!("generator dimension {dim} differs from problem dimension {}", p.d())));
        }
    }
    match p.data() {
        ProblemData::Quadratic { .. } => {
            if !generator.has_full_domain() {
                return Err(Error::Config("quadratic systems are unconstrained; use a full-domain generator".into()));
            }
        }
        ProblemData::Linear { .. } => {}
        ProblemData::Lsd { r, m, .. } => {
            let ok = match generator.geometry() {
                Geometry::SimplexEntropy { dim } => *m == 1 && dim == r,
                Geometry::SeparableBlocks(blocks) => {
                    blocks.len() == *m
                        && blocks
                            .iter()
                            .all(|b| b.dim == *r && matches!(b.generator.geometry(), Geometry::SimplexEntropy { .. }))
                }
                _ => false,
            };
            if !ok {
                return Err(Error::Config(format!(
                    "LSD problems need {m} simplex entropy blocks of dimension {r}"
                )));
            }
        }
    }
    Ok(())
}

/// Column-restricted geometry for LSD steps, which touch one or two columns of `X`.
struct LsdReduction {
    r: usize,
    one: DistanceGenerator,
    two: DistanceGenerator,
}

impl LsdReduction {
    fn gather(&self, v: &[f64], cols: &[usize]) -> Vec<f64> {
        cols.iter().flat_map(|&c| v[c * self.r..(c + 1) * self.r].iter().copied()).collect()
    }

    fn scatter(&self, src: &[f64], cols: &[usize], dst: &mut [f64]) {
        for (slot, &c) in cols.iter().enumerate() {
            dst[c * self.r..(c + 1) * self.r].copy_from_slice(&src[slot * self.r..(slot + 1) * self.r]);
        }
    }
}

fn l2(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn take_step(
    rule: StepRule,
    generator: &DistanceGenerator,
    state: &PrimalDualState,
    grad: Vec<f64>,
    beta: f64,
    f_val: f64,
    sigma: f64,
) -> Result<StepOutcome> {
    match rule {
        StepRule::RelaxedAlways => relaxed_update(generator, state, &grad, f_val, sigma),
        StepRule::ExactWithFallback => project(generator, state, &Hyperplane::new(grad, beta)?, f_val, sigma),
    }
}

/// Runs the iteration from the dual point `x0_star`.
pub fn solve(
    p: &NonlinearProblem,
    generator: &DistanceGenerator,
    x0_star: &[f64],
    cfg: &SolverConfig,
) -> Result<(PrimalDualState, RunRecord)> {
    solve_observed(p, generator, x0_star, cfg, |_, _| {})
}

/// As [`solve`], calling `observer(k, state)` on the initial state and after every iteration.
pub fn solve_observed(
    p: &NonlinearProblem,
    generator: &DistanceGenerator,
    x0_star: &[f64],
    cfg: &SolverConfig,
    mut observer: impl FnMut(usize, &PrimalDualState),
) -> Result<(PrimalDualState, RunRecord)> {
    let started = Instant::now();
    cfg.validate()?;
    check_len(p.d(), x0_star.len())?;
    check_compatibility(p, generator)?;
    let lsd = match p.data() {
        ProblemData::Lsd { r, .. } => Some(LsdReduction {
            r: *r,
            one: DistanceGenerator::simplex_entropy(*r)?,
            two: DistanceGenerator::entropy_blocks(*r, 2)?,
        }),
        _ => None,
    };
    let x_hat = p.known_solution();
    let mut rng = stream(cfg.seed, Stream::Sampling);

    let mut state = PrimalDualState::from_dual(generator, x0_star.to_vec())?;
    let mut residual = p.residual(state.x())?;
    let mut rnorm = l2(&residual);
    let r0 = rnorm;
    let threshold = if cfg.relative_tol { cfg.residual_tol * r0 } else { cfg.residual_tol };

    let measure = |state: &PrimalDualState| -> Result<(Option<f64>, Option<f64>)> {
        Ok(match x_hat {
            Some(xh) => (
                Some(distance(state.x(), xh)),
                generator.bregman_distance(state, xh)?.finite(),
            ),
            None => (None, None),
        })
    };

    let (error_norm, bregman_dist) = measure(&state)?;
    let mut rows = vec![TraceRow {
        k: 0,
        index: None,
        residual_norm: rnorm,
        error_norm,
        bregman_dist,
        step_kind: None,
        stepsize: None,
        beta: None,
        hyperplane_gap: None,
        f_value: None,
        grad_dual_norm: None,
    }];
    observer(0, &state);

    let mut grad = vec![0.0; p.d()];
    let mut k = 0;
    let mut pending: Option<TraceRow> = None;
    let status = loop {
        if rnorm <= threshold || rnorm == 0.0 {
            break TerminalStatus::Converged;
        }
        if k == cfg.max_iters {
            break TerminalStatus::MaxIters;
        }
        let i = sample_index(cfg.sampler, &residual, &mut rng)?;
        let f_val = -residual[i];
        p.grad_component_into(i, state.x(), &mut grad)?;
        k += 1;

        let grad_zero = grad.iter().all(|&g| g == 0.0);
        let row = if f_val == 0.0 || grad_zero {
            if grad_zero && stalled(p, &state, &residual)? {
                observer(k, &state);
                pending = Some(skipped_row(k, i, rnorm, &rows, &pending));
                break TerminalStatus::StalledZeroResidualRow;
            }
            skipped_row(k, i, rnorm, &rows, &pending)
        } else {
            let beta = dot(&grad, state.x()) - f_val;
            let grad_dual_norm = generator.dual_norm(&grad)?;
            let (t, kind, gap) = match (&lsd, p.gradient_columns(i)) {
                (Some(red), Some(cols)) => {
                    let sub_gen = if cols.len() == 1 { &red.one } else { &red.two };
                    let sub_state = PrimalDualState {
                        x: red.gather(state.x(), &cols),
                        x_star: red.gather(state.x_star(), &cols),
                    };
                    let sub_grad = red.gather(&grad, &cols);
                    let out = take_step(cfg.step_rule, sub_gen, &sub_state, sub_grad.clone(), beta, f_val, cfg.sigma)?;
                    let gap = dot(&sub_grad, out.next.x()) - beta;
                    red.scatter(out.next.x(), &cols, &mut state.x);
                    red.scatter(out.next.x_star(), &cols, &mut state.x_star);
                    (out.t, out.kind, gap)
                }
                _ => {
                    let out = take_step(cfg.step_rule, generator, &state, grad.clone(), beta, f_val, cfg.sigma)?;
                    let gap = dot(&grad, out.next.x()) - beta;
                    state = out.next;
                    (out.t, out.kind, gap)
                }
            };
            p.residual_into(state.x(), &mut residual)?;
            rnorm = l2(&residual);
            let (error_norm, bregman_dist) = measure(&state)?;
            TraceRow {
                k,
                index: Some(i),
                residual_norm: rnorm,
                error_norm,
                bregman_dist,
                step_kind: Some(kind),
                stepsize: Some(t),
                beta: Some(beta),
                hyperplane_gap: Some(gap),
                f_value: Some(f_val),
                grad_dual_norm: Some(grad_dual_norm),
            }
        };
        observer(k, &state);
        if !rnorm.is_finite() {
            return Err(Error::Contract(format!("residual norm became non-finite at iteration {k}")));
        }
        if k % cfg.trace_every == 0 {
            rows.push(row);
            pending = None;
        } else {
            pending = Some(row);
        }
    };
    if let Some(row) = pending {
        rows.push(row);
    }
    let record = RunRecord {
        rows,
        status,
        iterations: k,
        initial_residual_norm: r0,
        final_residual_norm: rnorm,
        trace_every: cfg.trace_every,
        wall_clock_secs: started.elapsed().as_secs_f64(),
    };
    Ok((state, record))
}

/// Row for an iteration that left the state untouched; distances carry over from the last row.
fn skipped_row(k: usize, i: usize, rnorm: f64, rows: &[TraceRow], pending: &Option<TraceRow>) -> TraceRow {
    let last = pending.as_ref().or(rows.last()).expect("trace always holds the initial row");
    TraceRow {
        k,
        index: Some(i),
        residual_norm: rnorm,
        error_norm: last.error_norm,
        bregman_dist: last.bregman_dist,
        step_kind: Some(StepKind::Skipped),
        stepsize: Some(0.0),
        beta: None,
        hyperplane_gap: None,
        f_value: None,
        grad_dual_norm: None,
    }
}

/// Whether no component with a nonzero residual has a usable gradient.
fn stalled(p: &NonlinearProblem, state: &PrimalDualState, residual: &[f64]) -> Result<bool> {
    let mut g = vec![0.0; p.d()];
    for (i, r) in residual.iter().enumerate() {
        if *r != 0.0 {
            p.grad_component_into(i, state.x(), &mut g)?;
            if g.iter().any(|&v| v != 0.0) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}
