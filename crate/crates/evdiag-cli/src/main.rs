//! Command-line surface: simulate test flows, analyze snapshot records, and
//! verify record-level invariants.
//!
//! Exit codes: 0 success, 1 diagnostics flags raised (or invariant checks
//! failed), 2 input/usage errors.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use evdiag::closures;
use evdiag::diagnostics::{self, AnalysisOptions};
use evdiag::field::{self, Field};
use evdiag::io::{self, SnapshotFile};
use evdiag::scales;
use evdiag::solver;
use evdiag::timestats::{self, TimeSeries};
use evdiag::{ClosureSpec, Error};

#[derive(Parser)]
#[command(
    name = "evdiag",
    about = "A posteriori diagnostics for eddy viscosity models of turbulence",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the embedded 2D periodic flow solver from a config file
    Simulate(SimulateArgs),
    /// Generate the decaying Taylor-Green reference series
    TaylorGreen(TaylorGreenArgs),
    /// Compute the diagnostics report for a snapshot record
    Analyze(AnalyzeArgs),
    /// Check record-level invariants (Cauchy-Schwarz, closure inequality,
    /// energy budget) and report pass/fail
    Verify(VerifyArgs),
}

#[derive(Args)]
struct SimulateArgs {
    /// Solver config file (flat key = value)
    #[arg(long)]
    config: PathBuf,
    /// Output directory for snapshots + manifest
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct TaylorGreenArgs {
    /// Grid size N (N x N, power of two)
    #[arg(long)]
    n: usize,
    /// Kinematic viscosity
    #[arg(long)]
    nu: f64,
    /// Final time
    #[arg(long)]
    t_end: f64,
    /// Output directory for snapshots + manifest
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Run manifest listing snapshots and closure parameters
    #[arg(long)]
    manifest: PathBuf,
    /// Comma-separated interpolation parameters in (0,1) for the bound
    #[arg(long, value_delimiter = ',')]
    beta: Option<Vec<f64>>,
    /// O(1) threshold above which a monitoring statistic is flagged
    #[arg(long)]
    flag_threshold: Option<f64>,
    /// Report output path (JSON)
    #[arg(long)]
    report: PathBuf,
    /// Also write per-snapshot dissipation-density fields to this directory
    #[arg(long)]
    dump_dissipation_field: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Run manifest listing snapshots and closure parameters
    #[arg(long)]
    manifest: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Simulate(args) => simulate(&args),
        Command::TaylorGreen(args) => taylor_green(&args),
        Command::Analyze(args) => analyze(&args),
        Command::Verify(args) => verify(&args),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn simulate(args: &SimulateArgs) -> Result<ExitCode, Error> {
    let text = std::fs::read_to_string(&args.config)?;
    let cfg = io::solver_config_from_text(&text)?;
    let s = solver::Solver::new(cfg.clone())?;
    let forcing = s.forcing_field().cloned();
    drop(s);
    let (series, stats) = solver::run_with_stats(&cfg)?;
    for line in &stats.log {
        eprintln!("{line}");
    }
    let manifest = io::write_run(&args.out, &series, forcing.as_ref(), cfg.nu, &cfg.closure)?;
    println!(
        "wrote {} snapshots ({} outer steps, {} sub-stepped) and {}",
        series.len(),
        stats.outer_steps,
        stats.substepped_steps,
        manifest.display()
    );
    Ok(ExitCode::SUCCESS)
}

fn taylor_green(args: &TaylorGreenArgs) -> Result<ExitCode, Error> {
    let series = solver::taylor_green(args.n, args.nu, args.t_end)?;
    let manifest = io::write_run(&args.out, &series, None, args.nu, &ClosureSpec::none())?;
    println!("wrote {} snapshots and {}", series.len(), manifest.display());
    Ok(ExitCode::SUCCESS)
}

fn analyze(args: &AnalyzeArgs) -> Result<ExitCode, Error> {
    let loaded = io::load_manifest(&args.manifest)?;
    let mut options = AnalysisOptions {
        provenance: format!("sha256:{}", loaded.digest_hex),
        compute_force_balance: loaded.forcing.is_some(),
        ..AnalysisOptions::default()
    };
    if let Some(beta) = args.beta.clone().or(loaded.beta.clone()) {
        options.beta_list = beta;
    }
    if let Some(thr) = args.flag_threshold.or(loaded.flag_threshold) {
        options.flag_threshold = thr;
    }
    if let Some(tf) = loaded.tail_fraction {
        options.tail_fraction = tf;
    }
    let report = diagnostics::assemble_report(
        &loaded.series,
        loaded.forcing.as_ref(),
        loaded.nu,
        &loaded.closure,
        &options,
    )?;
    io::write_report(&report, &args.report)?;

    if let Some(dir) = &args.dump_dissipation_field {
        dump_dissipation(dir, &loaded)?;
    }

    if let Some(r) = &report.resolution {
        println!("resolution verdict: {}", r.verdict.as_str());
    }
    println!("{}", report.overall);
    if report.monitoring.any_flagged() {
        return Ok(ExitCode::from(1));
    }
    Ok(ExitCode::SUCCESS)
}

/// Pointwise dissipation density (2nu + nu_turb)|grad_s u|^2 per snapshot.
fn dump_dissipation(dir: &Path, loaded: &io::LoadedManifest) -> Result<(), Error> {
    std::fs::create_dir_all(dir)?;
    for (i, snap) in loaded.series.snapshots().iter().enumerate() {
        let s = field::sym_gradient(&snap.velocity)?;
        let mag2 = s.magnitude_sq();
        let resolved = closures::resolve(&loaded.closure, snap)?;
        let vals: Vec<f64> = resolved
            .nu_turb
            .component(0)
            .iter()
            .zip(mag2.iter())
            .map(|(nt, m2)| (2.0 * loaded.nu + nt) * m2)
            .collect();
        let density = Field::scalar(*snap.velocity.grid(), vals, snap.velocity.time())?;
        let sf = SnapshotFile {
            grid: *snap.velocity.grid(),
            time: snap.velocity.time(),
            velocity: None,
            nu_turb: None,
            l: None,
            kprime: None,
            forcing: None,
            dissipation: Some(density),
        };
        io::write_snapshot(&dir.join(format!("diss_{i:06}.evdg")), &sf)?;
    }
    Ok(())
}

fn verify(args: &VerifyArgs) -> Result<ExitCode, Error> {
    let loaded = io::load_manifest(&args.manifest)?;
    let series = &loaded.series;
    let mut all_ok = true;
    let mut check = |name: &str, outcome: Result<Option<bool>, Error>| {
        match outcome {
            Ok(Some(true)) => println!("check {name}: pass"),
            Ok(Some(false)) => {
                println!("check {name}: FAIL");
                all_ok = false;
            }
            Ok(None) => println!("check {name}: skipped (inputs unavailable)"),
            Err(e) => {
                println!("check {name}: FAIL ({e})");
                all_ok = false;
            }
        }
    };

    // time-averaged Cauchy-Schwarz on the velocity/strain norm series
    check(
        "cauchy_schwarz_time",
        (|| {
            let a = series.reduce(|s| Ok(field::l2_norm_sq(&s.velocity).sqrt()))?;
            let b = series
                .reduce(|s| Ok(field::l2_norm_sq(&field::sym_gradient(&s.velocity)?).sqrt()))?;
            let t = series.times().to_vec();
            let horizon = t[t.len() - 1] - t[0];
            let (lhs, rhs) = timestats::cs_in_time(
                &TimeSeries::new(t.clone(), a)?,
                &TimeSeries::new(t, b)?,
                horizon,
            )?;
            Ok(Some(lhs <= rhs * (1.0 + 1e-12) + 1e-300))
        })(),
    );

    // closure inequality: ratio_nu <= mu * (avg_l / L) * sqrt(I_model)
    check(
        "closure_inequality",
        (|| {
            let flow =
                scales::compute_scales(series, loaded.forcing.as_ref(), loaded.nu, 0.5)?;
            if flow.l.is_none() || !(flow.u > 0.0) {
                return Ok(None);
            }
            let stats = closures::closure_stats(series, &loaded.closure, &flow, 0.5)?;
            match (stats.avg_l, stats.i_model) {
                (Some(avg_l), Some(i_model)) => {
                    let rhs = stats.mu * (avg_l / flow.l.unwrap()) * i_model.sqrt();
                    Ok(Some(stats.ratio_nu <= rhs * (1.0 + 1e-10) + 1e-300))
                }
                _ => Ok(None),
            }
        })(),
    );

    // energy-budget residual within the quadrature tolerance
    check(
        "energy_residual",
        (|| {
            let zero;
            let f = match &loaded.forcing {
                Some(f) => f,
                None => {
                    zero = Field::zeros(*series.grid(), 1, series.times()[0]);
                    &zero
                }
            };
            let r = diagnostics::energy_residual(series, loaded.nu, &loaded.closure, f)?;
            println!("  energy residual = {r:.3e}");
            Ok(Some(r <= 1e-4))
        })(),
    );

    if all_ok {
        println!("all checks passed");
        Ok(ExitCode::SUCCESS)
    } else {
        Ok(ExitCode::from(1))
    }
}
