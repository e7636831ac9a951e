//! Command settings shared by every subcommand. A JSON config file uses the same field names
//! (snake_case) as the long flags; flags given on the command line take precedence.

use std::path::{Path, PathBuf};

use nbk_core::problems::EntryDistribution;
use nbk_core::Method;
use serde::Deserialize;

use crate::preset::{Family, Preset};
use crate::BenchError;

#[derive(Debug, Clone, Default, PartialEq, Deserialize, clap::Args)]
#[serde(default, deny_unknown_fields)]
pub struct Settings {
    /// Named experiment preset (see `nbk presets`).
    #[arg(long)]
    pub preset: Option<String>,
    /// Problem family for explicit parameters: quadratic, linear-simplex, linear-gaussian, lsd.
    #[arg(long)]
    pub family: Option<String>,
    /// Problem file written by `nbk gen`.
    #[arg(long)]
    pub problem: Option<PathBuf>,
    /// Method, or a comma-separated list for `compare`: NBK, rNBK, GRNBK, rGRNBK.
    #[arg(long)]
    pub method: Option<String>,
    /// Seed of the instance and the run; base seed of a comparison.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub tol: Option<f64>,
    /// Stop on the residual relative to the initial one.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub relative_tol: Option<bool>,
    #[arg(long)]
    pub max_iters: Option<usize>,
    /// Relaxation parameter of the relaxed step.
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Output file (gen, run, rate) or directory (compare).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub trace_every: Option<usize>,
    /// Greedy methods pick the largest residual instead of sampling.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub max_residual: Option<bool>,
    /// Weight of the l1 term of the quadratic-system generator.
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long)]
    pub s: Option<usize>,
    #[arg(long)]
    pub r: Option<usize>,
    #[arg(long)]
    pub m: Option<usize>,
    /// Entry distribution of linear simplex systems: std_normal, unif_0_1, unif_0.9_1.
    #[arg(long)]
    pub dist: Option<String>,
    /// Rate variant: relaxed or exact.
    #[arg(long)]
    pub variant: Option<String>,
    /// Tangential cone constant to use instead of the estimate.
    #[arg(long)]
    pub eta: Option<f64>,
    /// Smoothness constant M of the generator.
    #[arg(long)]
    pub smoothness: Option<f64>,
    /// Radius of the sampling ball around the solution.
    #[arg(long)]
    pub radius: Option<f64>,
    /// Number of ball samples for the estimates.
    #[arg(long)]
    pub samples: Option<usize>,
}

macro_rules! merge_fields {
    ($a:expr, $b:expr; $($f:ident),*) => {
        Settings { $($f: $a.$f.or($b.$f)),* }
    };
}

impl Settings {
    pub fn load(path: &Path) -> Result<Settings, BenchError> {
        let text = std::fs::read_to_string(path).map_err(|e| BenchError::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| BenchError::Usage(format!("{}: {e}", path.display())))
    }

    /// Field-wise `self` over `fallback`.
    pub fn or(self, fallback: Settings) -> Settings {
        merge_fields!(self, fallback;
            preset, family, problem, method, seed, trials, tol, relative_tol, max_iters, sigma, out,
            trace_every, max_residual, lambda, n, d, s, r, m, dist, variant, eta, smoothness, radius,
            samples)
    }

    pub fn methods(&self) -> Result<Option<Vec<Method>>, BenchError> {
        let Some(list) = &self.method else { return Ok(None) };
        let methods = list
            .split(',')
            .map(|m| Method::parse(m.trim()).ok_or_else(|| BenchError::Usage(format!("unknown method {m:?}"))))
            .collect::<Result<Vec<_>, _>>()?;
        let mut seen = Vec::new();
        for m in &methods {
            if seen.contains(m) {
                return Err(BenchError::Usage(format!("method {} listed twice", m.name())));
            }
            seen.push(*m);
        }
        Ok(Some(methods))
    }

    fn need(&self, name: &str, v: Option<usize>) -> Result<usize, BenchError> {
        v.ok_or_else(|| BenchError::Usage(format!("--{name} is required with --family")))
    }

    fn dist(&self) -> Result<Option<EntryDistribution>, BenchError> {
        self.dist
            .as_deref()
            .map(|s| EntryDistribution::parse(s).ok_or_else(|| BenchError::Usage(format!("unknown distribution {s:?}"))))
            .transpose()
    }

    /// The preset selected by `--preset` or `--family`, with every override applied.
    pub fn preset(&self) -> Result<Preset, BenchError> {
        let mut preset = match (&self.preset, &self.family) {
            (Some(_), Some(_)) => return Err(BenchError::Usage("give either --preset or --family, not both".into())),
            (Some(name), None) => {
                Preset::named(name).ok_or_else(|| BenchError::Usage(format!("unknown preset {name:?}")))?
            }
            (None, Some(family)) => {
                let family = match family.as_str() {
                    "quadratic" => Family::Quadratic {
                        n: self.need("n", self.n)?,
                        d: self.need("d", self.d)?,
                        s: self.need("s", self.s)?,
                        lambda: 1.0,
                    },
                    "linear-simplex" => Family::LinearSimplex {
                        n: self.need("n", self.n)?,
                        d: self.need("d", self.d)?,
                        dist: EntryDistribution::StdNormal,
                    },
                    "linear-gaussian" => Family::LinearGaussian { n: self.need("n", self.n)?, d: self.need("d", self.d)? },
                    "lsd" => Family::Lsd { r: self.need("r", self.r)?, m: self.need("m", self.m)? },
                    other => return Err(BenchError::Usage(format!("unknown family {other:?}"))),
                };
                Preset::custom(family_name(&family), family)
            }
            (None, None) => return Err(BenchError::Usage("one of --preset, --family or --problem is required".into())),
        };
        let dist = self.dist()?;
        match &mut preset.family {
            Family::Quadratic { n, d, s, lambda } => {
                set(n, self.n);
                set(d, self.d);
                set(s, self.s);
                set(lambda, self.lambda);
            }
            Family::LinearSimplex { n, d, dist: e } => {
                set(n, self.n);
                set(d, self.d);
                set(e, dist);
            }
            Family::LinearGaussian { n, d } => {
                set(n, self.n);
                set(d, self.d);
            }
            Family::Lsd { r, m } => {
                set(r, self.r);
                set(m, self.m);
            }
        }
        self.apply_stopping(&mut preset.tol, &mut preset.relative_tol, &mut preset.max_iters, &mut preset.trace_every);
        set(&mut preset.trials, self.trials);
        set(&mut preset.base_seed, self.seed);
        if let Some(methods) = self.methods()? {
            preset.methods = methods;
        }
        Ok(preset)
    }

    pub fn apply_stopping(&self, tol: &mut f64, relative: &mut bool, max_iters: &mut usize, trace_every: &mut usize) {
        set(tol, self.tol);
        set(relative, self.relative_tol);
        set(max_iters, self.max_iters);
        set(trace_every, self.trace_every);
    }
}

fn set<T>(slot: &mut T, v: Option<T>) {
    if let Some(v) = v {
        *slot = v;
    }
}

fn family_name(f: &Family) -> &'static str {
    match f {
        Family::Quadratic { .. } => "quadratic",
        Family::LinearSimplex { .. } => "linear-simplex",
        Family::LinearGaussian { .. } => "linear-gaussian",
        Family::Lsd { .. } => "lsd",
    }
}
