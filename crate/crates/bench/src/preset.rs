//! Experiment presets: problem family, stopping rule, methods and trial layout.

use nbk_core::problems::{gen_linear_gaussian, gen_linear_simplex, gen_lsd, gen_quadratic, EntryDistribution, ProblemKind};
use nbk_core::rng::{stream, Stream};
use nbk_core::{DistanceGenerator, Method, NonlinearProblem};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::BenchError;

/// Problem family and shape of an experiment.
#[derive(Debug, Clone, PartialEq)]
pub enum Family {
    /// Sparse quadratic system solved with `λ‖x‖₁ + ½‖x‖₂²`.
    Quadratic { n: usize, d: usize, s: usize, lambda: f64 },
    /// Linear system on the simplex solved with the negative entropy.
    LinearSimplex { n: usize, d: usize, dist: EntryDistribution },
    /// Unconstrained Gaussian linear system solved with `½‖x‖₂²`.
    LinearGaussian { n: usize, d: usize },
    /// Left stochastic decomposition solved with blockwise entropies.
    Lsd { r: usize, m: usize },
}

impl Family {
    pub fn generate(&self, seed: u64) -> Result<NonlinearProblem, BenchError> {
        Ok(match *self {
            Family::Quadratic { n, d, s, .. } => gen_quadratic(n, d, s, seed)?,
            Family::LinearSimplex { n, d, dist } => gen_linear_simplex(n, d, dist, seed)?,
            Family::LinearGaussian { n, d } => gen_linear_gaussian(n, d, seed)?,
            Family::Lsd { r, m } => gen_lsd(r, m, seed)?,
        })
    }

    pub fn generator(&self) -> Result<DistanceGenerator, BenchError> {
        Ok(match *self {
            Family::Quadratic { lambda, .. } => DistanceGenerator::l1_quadratic(lambda)?,
            Family::LinearSimplex { d, .. } => DistanceGenerator::simplex_entropy(d)?,
            Family::LinearGaussian { .. } => DistanceGenerator::quadratic(),
            Family::Lsd { r, m } => DistanceGenerator::entropy_blocks(r, m)?,
        })
    }

    pub fn kind(&self) -> ProblemKind {
        match self {
            Family::Quadratic { .. } => ProblemKind::QuadraticSystem,
            Family::LinearSimplex { .. } | Family::LinearGaussian { .. } => ProblemKind::LinearSimplexSystem,
            Family::Lsd { .. } => ProblemKind::LsdProblem,
        }
    }

    pub fn initial_dual(&self, d: usize, seed: u64) -> Vec<f64> {
        initial_dual_for(self.kind(), d, seed)
    }
}

/// Starting dual point: zero for linear systems (the centre of the simplex under the entropy),
/// standard normal otherwise. LSD cannot start at the centre: with identical columns every
/// gradient block is constant, which leaves the blockwise softmax unchanged.
pub fn initial_dual_for(kind: ProblemKind, d: usize, seed: u64) -> Vec<f64> {
    match kind {
        ProblemKind::LinearSimplexSystem => vec![0.0; d],
        _ => normal_dual(d, seed),
    }
}

/// Default stopping rule of a problem kind.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stopping {
    pub tol: f64,
    pub relative_tol: bool,
    pub max_iters: usize,
    pub trace_every: usize,
}

impl Stopping {
    pub fn for_kind(kind: ProblemKind) -> Self {
        match kind {
            ProblemKind::QuadraticSystem => Stopping { tol: 1e-12, relative_tol: false, max_iters: 1000, trace_every: 1 },
            ProblemKind::LinearSimplexSystem => {
                Stopping { tol: 1e-9, relative_tol: true, max_iters: 10_000, trace_every: 1 }
            }
            ProblemKind::LsdProblem => Stopping { tol: 1e-5, relative_tol: false, max_iters: 300_000, trace_every: 100 },
        }
    }
}

/// `x₀* ~ N(0, I)` from the initialization stream of `seed`.
pub fn normal_dual(d: usize, seed: u64) -> Vec<f64> {
    let mut rng = stream(seed, Stream::Init);
    (0..d).map(|_| rng.sample(StandardNormal)).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Preset {
    pub name: String,
    pub family: Family,
    pub tol: f64,
    /// Stop on `‖F(x_k)‖ / ‖F(x_0)‖` rather than `‖F(x_k)‖`.
    pub relative_tol: bool,
    pub max_iters: usize,
    pub methods: Vec<Method>,
    pub trials: usize,
    pub base_seed: u64,
    pub trace_every: usize,
}

pub const PRESET_NAMES: &[&str] = &[
    "exp1",
    "exp1-desk",
    "exp2-over",
    "exp2-under",
    "exp2-u01",
    "exp2-u09",
    "exp2-over-desk",
    "exp2-under-desk",
    "exp2-u01-desk",
    "exp2-u09-desk",
    "exp3",
    "exp3-wide",
    "exp3-desk",
];

impl Preset {
    /// A preset for `family` with the default stopping rule of its kind, four methods and
    /// 20 trials from seed 0.
    pub fn custom(name: &str, family: Family) -> Preset {
        let stop = Stopping::for_kind(family.kind());
        Preset {
            name: name.to_string(),
            family,
            tol: stop.tol,
            relative_tol: stop.relative_tol,
            max_iters: stop.max_iters,
            methods: Method::ALL.to_vec(),
            trials: 20,
            base_seed: 0,
            trace_every: stop.trace_every,
        }
    }

    pub fn named(name: &str) -> Option<Preset> {
        use EntryDistribution::*;
        let exp1 = |n, d, s, lambda| Family::Quadratic { n, d, s, lambda };
        let exp2 = |n, d, dist| Family::LinearSimplex { n, d, dist };
        let exp3 = |r, m| Family::Lsd { r, m };
        let family = match name {
            "exp1" => exp1(500, 100, 10, 5.0),
            "exp1-desk" => exp1(60, 20, 3, 1.0),
            "exp2-over" => exp2(400, 300, StdNormal),
            "exp2-under" => exp2(300, 400, StdNormal),
            "exp2-u01" => exp2(300, 400, Unif01),
            "exp2-u09" => exp2(300, 400, Unif09_1),
            "exp2-over-desk" => exp2(150, 100, StdNormal),
            "exp2-under-desk" => exp2(100, 150, StdNormal),
            "exp2-u01-desk" => exp2(100, 150, Unif01),
            "exp2-u09-desk" => exp2(100, 150, Unif09_1),
            "exp3" => exp3(100, 90),
            "exp3-wide" => exp3(90, 100),
            "exp3-desk" => exp3(12, 10),
            _ => return None,
        };
        let mut preset = Preset::custom(name, family);
        if name == "exp3-desk" {
            preset.max_iters = 50_000;
        }
        Some(preset)
    }
}
