use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};
use kaczmarz_harness::spec::{parse_methods, parse_stop_rule, stop_rule_label};
use kaczmarz_harness::{deblur_run, diagnose, run, ExperimentSpec};

#[derive(Parser)]
#[command(name = "kaczmarz", version, about = "Run Kaczmarz solver experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a problem with each method over repeated trials.
    Run(Overrides),
    /// Restore a blurred image with each method under a wall-clock budget.
    Deblur(Overrides),
    /// Compare convergence-factor bounds with observed error decay.
    Diagnose(Overrides),
}

#[derive(Args)]
struct Overrides {
    /// Experiment spec (TOML, or JSON by extension).
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Comma-separated method names, e.g. `SRK,TSRK`.
    #[arg(long)]
    methods: Option<String>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    tol: Option<f64>,
    /// `residual` or `relative-error`.
    #[arg(long)]
    stop_rule: Option<String>,
    #[arg(long)]
    max_iter: Option<usize>,
    #[arg(long)]
    l: Option<f64>,
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long)]
    budget_seconds: Option<f64>,
}

impl Overrides {
    fn apply(&self) -> Result<ExperimentSpec> {
        let mut spec = ExperimentSpec::load(&self.config)?;
        if let Some(v) = self.seed {
            spec.seed = v;
        }
        if let Some(v) = &self.out {
            spec.out = v.clone();
        }
        if let Some(v) = &self.methods {
            spec.methods = parse_methods(v)?;
        }
        if let Some(v) = self.trials {
            spec.trials = v;
        }
        if let Some(v) = self.tol {
            spec.tol = v;
        }
        if let Some(v) = &self.stop_rule {
            spec.stop_rule = parse_stop_rule(v)?;
        }
        if let Some(v) = self.max_iter {
            spec.max_iter = v;
        }
        if let Some(v) = self.l {
            spec.l = v;
        }
        if let Some(v) = self.eta {
            spec.eta = v;
        }
        if let Some(v) = self.budget_seconds {
            spec.budget_seconds = Some(v);
        }
        spec.validate()?;
        Ok(spec)
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |v| format!("{v:.3e}"))
}

fn cmd_run(spec: &ExperimentSpec) -> Result<bool> {
    let exp = run(spec)?;
    let s = &exp.summary;
    println!("{} | {} trials | stop {} < {:e}", s.problem, s.trials, stop_rule_label(spec.stop_rule), s.tol);
    println!(
        "{:<6} {:>12} {:>10} {:>11} {:>11} {:>9}",
        "method", "iterations", "seconds", "RES", "rel.err", "converged"
    );
    for m in &s.methods {
        println!(
            "{:<6} {:>12.1} {:>10.4} {:>11.3e} {:>11} {:>6}/{}",
            m.method,
            m.mean_iterations,
            m.mean_seconds,
            m.mean_final_res,
            fmt_opt(m.mean_final_error),
            m.converged_trials,
            s.trials
        );
    }
    for p in &s.speedups {
        println!(
            "speed-up {}/{}: {} (iteration ratio {})",
            p.baseline,
            p.two_row,
            p.speedup.map_or_else(|| "-".to_string(), |v| format!("{v:.3}")),
            p.iteration_ratio.map_or_else(|| "-".to_string(), |v| format!("{v:.3}"))
        );
    }
    println!("reports written to {}", spec.out.display());
    Ok(true)
}

fn cmd_deblur(spec: &ExperimentSpec) -> Result<bool> {
    let out = deblur_run(spec)?;
    let r = &out.report;
    println!("{} | budget {} s | observed PSNR {:.4}", r.problem, fmt_opt(r.budget_seconds), r.observed_psnr);
    println!("{:<6} {:>10} {:>9} {:>8} {:>9}", "method", "iterations", "PSNR", "SSIM", "EN");
    for row in &r.rows {
        let warn = if row.zero_iterations { "  warning: budget exhausted before the first iteration" } else { "" };
        println!("{:<6} {:>10} {:>9.4} {:>8.4} {:>9.4e}{warn}", row.method, row.iterations, row.psnr, row.ssim, row.en);
    }
    for c in &r.ordering {
        let verdict = if c.holds { "ok" } else { "VIOLATED" };
        println!(
            "ordering {} >= {} - 0.1 dB: {:.4} vs {:.4} {verdict}",
            c.two_row, c.baseline, c.two_row_psnr, c.baseline_psnr
        );
    }
    println!("reports and images written to {}", spec.out.display());
    Ok(r.ordering_holds())
}

fn cmd_diagnose(spec: &ExperimentSpec) -> Result<bool> {
    let r = diagnose(spec)?;
    let f = &r.factors;
    println!("{} | {} trajectories x {} iterations", r.problem, r.trajectories, r.window);
    println!("||A||_F = {:.6}  ||A||_2 = {:.6}  ||AA*||_F = {:.6}", f.frobenius, f.spectral_norm, f.gram_frobenius);
    println!("lambda_min = {:.6e}  l21 = {:.6}  omega = {:.6}  rho = {:.6}", f.lambda_min, f.l21, f.omega, f.rho_max);
    for (name, b) in [("RK", f.rk), ("TRK", f.trk), ("TGRK first", f.tgrk_first), ("TGRK", f.tgrk), ("TSRK", f.tsrk)] {
        println!("bound {name:<10} {:.6}{}", b.value, if b.vacuous { " (vacuous)" } else { "" });
    }
    println!("TRK bound below RK bound: {}", f.trk_inequality_holds);
    for d in &r.decays {
        let bound = d.bound.map_or_else(|| "-".to_string(), |b| format!("{:.6}", b.value));
        let verdict = if !d.checked {
            ""
        } else if d.holds {
            " ok"
        } else {
            " EXCEEDS BOUND"
        };
        println!("observed {:<6} {:.6} over {} points, bound {bound}{verdict}", d.method, d.observed, d.fit_points);
    }
    Ok(r.checks_hold())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(o) => o.apply().and_then(|s| cmd_run(&s)),
        Command::Deblur(o) => o.apply().and_then(|s| cmd_deblur(&s)),
        Command::Diagnose(o) => o.apply().and_then(|s| cmd_diagnose(&s)),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
