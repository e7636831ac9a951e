use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use nbk_bench::config::Settings;
use nbk_bench::output::{run_csv, summarize, SummaryHeader, TraceWriter};
use nbk_bench::preset::{initial_dual_for, Stopping, PRESET_NAMES};
use nbk_bench::rate::{rate_report, RateOptions};
use nbk_bench::runner::{compare, default_generator, method_label, run_method, solver_threads};
use nbk_bench::{BenchError, CompareOptions, Preset, RunSpec};
use nbk_core::diagnostics::RateVariant;
use nbk_core::{DistanceGenerator, NonlinearProblem, TerminalStatus};

/// Nonlinear Bregman-Kaczmarz benchmark harness.
#[derive(Parser)]
#[command(name = "nbk", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a problem instance and write it as JSON.
    Gen(Args),
    /// Solve one instance with one method and write its trace CSV.
    Run(Args),
    /// Run every method over seeded trials; write per-trial CSVs and summary.json.
    Compare(Args),
    /// Estimate the contraction factor of the expected Bregman distance.
    Rate(Args),
    /// List the experiment presets.
    Presets,
}

#[derive(clap::Args)]
struct Args {
    /// JSON file with default values for any of the flags.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    settings: Settings,
}

impl Args {
    fn resolve(self) -> Result<Settings, BenchError> {
        match &self.config {
            Some(path) => Ok(self.settings.or(Settings::load(path)?)),
            None => Ok(self.settings),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Gen(a) => a.resolve().and_then(|s| cmd_gen(&s)),
        Command::Run(a) => a.resolve().and_then(|s| cmd_run(&s)),
        Command::Compare(a) => a.resolve().and_then(|s| cmd_compare(&s)),
        Command::Rate(a) => a.resolve().and_then(|s| cmd_rate(&s)),
        Command::Presets => cmd_presets(),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn write_out(path: Option<&Path>, bytes: &[u8]) -> Result<(), BenchError> {
    match path {
        Some(p) => std::fs::write(p, bytes).map_err(|e| BenchError::io(p, e)),
        None => std::io::stdout().write_all(bytes).map_err(|e| BenchError::io("<stdout>", e)),
    }
}

fn cmd_presets() -> Result<bool, BenchError> {
    for name in PRESET_NAMES {
        let p = Preset::named(name).expect("listed preset");
        let rule = if p.relative_tol { "relative" } else { "absolute" };
        println!("{name:16} {:?}  tol {:e} ({rule}), max_iters {}", p.family, p.tol, p.max_iters);
    }
    Ok(true)
}

fn cmd_gen(s: &Settings) -> Result<bool, BenchError> {
    let preset = s.preset()?;
    let problem = preset.family.generate(preset.base_seed)?;
    let mut json = problem.to_json();
    json.push('\n');
    write_out(s.out.as_deref(), json.as_bytes())?;
    Ok(true)
}

/// Instance, generator, starting point and stopping rule of `run` / `rate`.
struct Instance {
    problem: NonlinearProblem,
    generator: DistanceGenerator,
    x0_star: Vec<f64>,
    stop: Stopping,
    seed: u64,
}

fn instance(s: &Settings) -> Result<Instance, BenchError> {
    let seed = s.seed.unwrap_or(0);
    let mut inst = match &s.problem {
        Some(path) => {
            if s.preset.is_some() || s.family.is_some() {
                return Err(BenchError::Usage("--problem cannot be combined with --preset or --family".into()));
            }
            let text = std::fs::read_to_string(path).map_err(|e| BenchError::io(path, e))?;
            let problem = NonlinearProblem::from_json(&text)?;
            let generator = default_generator(&problem, s.lambda.unwrap_or(1.0))?;
            let kind = problem.kind();
            let x0_star = initial_dual_for(kind, problem.d(), seed);
            Instance { problem, generator, x0_star, stop: Stopping::for_kind(kind), seed }
        }
        None => {
            let preset = s.preset()?;
            let problem = preset.family.generate(seed)?;
            let x0_star = preset.family.initial_dual(problem.d(), seed);
            let stop = Stopping {
                tol: preset.tol,
                relative_tol: preset.relative_tol,
                max_iters: preset.max_iters,
                trace_every: preset.trace_every,
            };
            Instance { problem, generator: preset.family.generator()?, x0_star, stop, seed }
        }
    };
    let st = &mut inst.stop;
    s.apply_stopping(&mut st.tol, &mut st.relative_tol, &mut st.max_iters, &mut st.trace_every);
    Ok(inst)
}

fn cmd_run(s: &Settings) -> Result<bool, BenchError> {
    let method = match s.methods()?.as_deref() {
        Some([m]) => *m,
        _ => return Err(BenchError::Usage("run needs exactly one --method".into())),
    };
    let inst = instance(s)?;
    let max_residual = s.max_residual.unwrap_or(false);
    let spec = RunSpec {
        generator: inst.generator,
        x0_star: inst.x0_star,
        tol: inst.stop.tol,
        relative_tol: inst.stop.relative_tol,
        max_iters: inst.stop.max_iters,
        sigma: s.sigma.unwrap_or(1.0),
        trace_every: inst.stop.trace_every,
        max_residual,
    };
    let record = run_method(&inst.problem, &spec, method, inst.seed)?;
    let label = method_label(method, max_residual);
    write_out(s.out.as_deref(), &run_csv(0, &label, &record)?)?;
    eprintln!(
        "{label}: {} after {} iterations, residual {:.3e}",
        record.status.as_str(),
        record.iterations,
        record.final_residual_norm
    );
    Ok(record.status == TerminalStatus::Converged)
}

fn cmd_compare(s: &Settings) -> Result<bool, BenchError> {
    let preset = s.preset()?;
    let out = s.out.as_deref().ok_or_else(|| BenchError::Usage("compare needs --out <dir>".into()))?;
    let mut opts = CompareOptions::from_preset(&preset);
    opts.sigma = s.sigma.unwrap_or(1.0);
    opts.max_residual = s.max_residual.unwrap_or(false);
    let trials = compare(&preset, &opts, solver_threads())?;

    std::fs::create_dir_all(out).map_err(|e| BenchError::io(out, e))?;
    let labels: Vec<String> = opts.methods.iter().map(|&m| method_label(m, opts.max_residual)).collect();
    for t in &trials {
        let path = out.join(format!("trial_{:03}.csv", t.trial));
        let file = std::fs::File::create(&path).map_err(|e| BenchError::io(&path, e))?;
        let mut w = TraceWriter::new(std::io::BufWriter::new(file))?;
        for (label, (_, record)) in labels.iter().zip(&t.runs) {
            w.write_run(t.trial, label, record)?;
        }
        w.finish()?;
    }
    let header = SummaryHeader {
        preset: &preset.name,
        base_seed: preset.base_seed,
        tol: preset.tol,
        relative_tol: preset.relative_tol,
        max_iters: preset.max_iters,
    };
    let summary = summarize(&header, &labels, &trials);
    let path = out.join("summary.json");
    let mut json = serde_json::to_string_pretty(&summary)?;
    json.push('\n');
    std::fs::write(&path, json).map_err(|e| BenchError::io(&path, e))?;

    println!("{:10} {:>9} {:>12} {:>12} {:>14}", "method", "converged", "median iter", "mean iter", "median resid");
    for m in &summary.methods {
        println!(
            "{:10} {:>5}/{:<3} {:>12} {:>12.1} {:>14.3e}",
            m.method, m.converged, m.runs, m.iterations.median, m.iterations.mean, m.final_residual.median
        );
    }
    Ok(summary.methods.iter().all(|m| m.converged == m.runs))
}

fn cmd_rate(s: &Settings) -> Result<bool, BenchError> {
    let inst = instance(s)?;
    let variant = match s.variant.as_deref() {
        None => RateVariant::Relaxed,
        Some(v) => RateVariant::parse(v).ok_or_else(|| BenchError::Usage(format!("unknown variant {v:?}")))?,
    };
    let defaults = RateOptions::default();
    let opts = RateOptions {
        variant,
        eta: s.eta,
        smoothness: s.smoothness,
        radius: s.radius.unwrap_or(defaults.radius),
        samples: s.samples.unwrap_or(defaults.samples),
        seed: inst.seed,
    };
    let report = rate_report(&inst.problem, &inst.generator, &opts)?;
    print!("{}", report.render());
    if let Some(path) = &s.out {
        let mut json = serde_json::to_string_pretty(&report)?;
        json.push('\n');
        std::fs::write(path, json).map_err(|e| BenchError::io(path, e))?;
    }
    Ok(true)
}
