#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use rfharvest::io::{
    load_scenario, parse_scenario, run_summary_row, write_ledger_csv, write_links_csv,
    write_plan_csv, write_region_maps, write_sca_trace, write_summary,
};
use rfharvest::model::{detection_prob, false_alarm_prob};
use rfharvest::sensing::{
    closed_form_min_samples, grid_min_samples, optimize_su, ConstraintForm, LinkState, SuState,
};
use rfharvest::sim::{energy_vs_training_fraction, run, Mode, Scenario};
use rfharvest::Error;

/// Multi-band RF energy harvesting simulator for cognitive-radio networks.
#[derive(Parser)]
#[command(name = "rfharvest", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one scenario and write plans, ledgers and region maps.
    Run(RunArgs),
    /// Monte-Carlo sweep of the training fraction in svm mode.
    Sweep(SweepArgs),
    /// Compare optimised sample counts with the closed form and a grid search.
    Oracle(OracleArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum CliMode {
    AllSensing,
    Svm,
}

#[derive(Args)]
struct Common {
    /// Scenario document (JSON). Omit for the default scenario.
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_parser = parse_form)]
    constraint_form: Option<ConstraintForm>,
    /// Absolute SCA stopping tolerance, J.
    #[arg(long)]
    sca_tol: Option<f64>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, value_enum)]
    mode: Option<CliMode>,
    /// Training fraction for svm mode; implies `--mode svm` when no mode is given.
    #[arg(long)]
    fraction: Option<f64>,
    /// Also write every SCA iterate to `sca_trace.jsonl`.
    #[arg(long)]
    trace: bool,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, value_delimiter = ',', default_value = "0.2,0.35,0.5,0.65,0.8")]
    fractions: Vec<f64>,
    /// Number of seeds per fraction, counted up from `--seed` (default 0).
    #[arg(long, default_value_t = 20)]
    seeds: u64,
}

#[derive(Args)]
struct OracleArgs {
    /// Scenario document supplying the detector targets and sample limits.
    config: Option<PathBuf>,
    /// Linear SNRs to check.
    #[arg(long, value_delimiter = ',', default_value = "0.2,0.3,0.5,1,2,5,10")]
    snr: Vec<f64>,
    /// Threshold grid step of the brute-force search.
    #[arg(long, default_value_t = 1e-4)]
    eps_step: f64,
    #[arg(long, value_parser = parse_form)]
    constraint_form: Option<ConstraintForm>,
    /// Write `oracle.csv` here as well as printing it.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_form(s: &str) -> std::result::Result<ConstraintForm, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn scenario(path: Option<&Path>) -> Result<Scenario> {
    Ok(match path {
        Some(p) => load_scenario(p)?,
        None => parse_scenario("")?,
    })
}

fn apply_common(sc: &mut Scenario, c: &Common) {
    if let Some(seed) = c.seed {
        sc.seed = seed;
    }
    if let Some(form) = c.constraint_form {
        sc.constraint_form = form;
    }
    if let Some(tol) = c.sca_tol {
        sc.sca.tolerance = tol;
    }
}

fn apply_mode(sc: &mut Scenario, mode: Option<CliMode>, fraction: Option<f64>) -> Result<()> {
    let config_error = |message: &str| Error::Config {
        path: "--fraction".into(),
        message: message.into(),
    };
    sc.mode = match (mode, fraction) {
        (None, None) => sc.mode,
        (Some(CliMode::AllSensing), None) => Mode::AllSensing,
        (Some(CliMode::AllSensing), Some(_)) => {
            Err(config_error("all-sensing mode takes no training fraction"))?
        }
        (Some(CliMode::Svm) | None, Some(f)) => Mode::Svm {
            training_fraction: f,
        },
        (Some(CliMode::Svm), None) => match sc.mode {
            Mode::Svm { .. } => sc.mode,
            Mode::AllSensing => Err(config_error("svm mode needs a training fraction"))?,
        },
    };
    Ok(())
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)
        .with_context(|| format!("cannot create output directory {}", dir.display()))
}

fn cmd_run(args: RunArgs) -> Result<()> {
    let mut sc = scenario(args.common.config.as_deref())?;
    apply_common(&mut sc, &args.common);
    apply_mode(&mut sc, args.mode, args.fraction)?;
    sc.validate()?;

    let out = run(&sc)?;
    let dir = &args.common.out;
    create_dir(dir)?;
    write_plan_csv(&dir.join("plan.csv"), &out)?;
    write_ledger_csv(&dir.join("ledger.csv"), &out)?;
    write_links_csv(&dir.join("links.csv"), &out)?;
    let maps = write_region_maps(dir, &out)?;
    write_summary(
        &dir.join("summary.json"),
        &sc,
        &[run_summary_row(&sc, &out)],
        &[sc.seed],
    )?;
    if args.trace {
        write_sca_trace(&dir.join("sca_trace.jsonl"), &out)?;
    }

    let skipped: usize = out
        .slots
        .iter()
        .flat_map(|s| &s.sus)
        .filter(|r| r.skipped)
        .count();
    println!("slots                 {}", out.slots.len());
    println!("SUs                   {}", out.positions.len());
    println!("total sensing energy  {:.6e} J", out.total_sensing_energy());
    println!("mean region error     {:.4}", out.mean_error());
    println!("SCA iterations        {}", out.sca_iterations());
    if skipped > 0 {
        println!("skipped sensing       {skipped} SU-slots");
    }
    println!(
        "wrote {} region maps and summary to {}",
        maps.len(),
        dir.display()
    );
    Ok(())
}

fn cmd_sweep(args: SweepArgs) -> Result<()> {
    let mut sc = scenario(args.common.config.as_deref())?;
    apply_common(&mut sc, &args.common);
    if let Some(f) = args.fractions.iter().find(|&&f| !(f > 0.0 && f <= 1.0)) {
        return Err(Error::Config {
            path: "--fractions".into(),
            message: format!("training fraction {f} is outside (0, 1]"),
        }
        .into());
    }
    if args.seeds == 0 {
        return Err(Error::Config {
            path: "--seeds".into(),
            message: "need at least one seed".into(),
        }
        .into());
    }
    sc.validate()?;

    let base = args.common.seed.unwrap_or(0);
    let seeds: Vec<u64> = (base..base + args.seeds).collect();
    let rows = energy_vs_training_fraction(&sc, &args.fractions, &seeds)?;

    let dir = &args.common.out;
    create_dir(dir)?;
    write_summary(&dir.join("summary.json"), &sc, &rows, &seeds)?;
    let path = dir.join("sweep.csv");
    let mut w = csv::Writer::from_path(&path)
        .with_context(|| format!("cannot write {}", path.display()))?;
    for r in &rows {
        w.serialize(r)?;
    }
    w.flush()?;

    println!("fraction  energy_mean_J  energy_std_J  error_mean  error_std");
    for r in &rows {
        println!(
            "{:8.3}  {:13.6e}  {:12.3e}  {:10.4}  {:9.4}",
            r.fraction, r.energy_mean, r.energy_std, r.error_mean, r.error_std
        );
    }
    Ok(())
}

#[derive(serde::Serialize)]
struct OracleRow {
    snr: f64,
    closed_form: f64,
    target: f64,
    optimised: Option<f64>,
    rounded: Option<f64>,
    grid: Option<f64>,
    false_alarm: Option<f64>,
    detection: Option<f64>,
    agree: bool,
}

fn cmd_oracle(args: OracleArgs) -> Result<ExitCode> {
    let mut sc = scenario(args.config.as_deref())?;
    if let Some(form) = args.constraint_form {
        sc.constraint_form = form;
    }
    sc.validate()?;
    let cfg = sc.optimizer();
    let s = cfg.sensing;
    let cap = s.max_samples();

    let mut rows = Vec::new();
    for &snr in &args.snr {
        let closed = closed_form_min_samples(snr, s.max_false_alarm, s.min_detection)?;
        let target = closed.max(s.min_samples);
        let su = SuState {
            su: 0,
            battery: f64::MAX,
            links: vec![LinkState {
                band: 0,
                snr,
                prospect: snr,
            }],
        };
        let plan = optimize_su(&su, &cfg)?;
        let entry = &plan.entries[0];
        let grid = (target <= cap).then(|| {
            grid_min_samples(
                snr,
                s.max_false_alarm,
                s.min_detection,
                s.min_samples,
                (10.0 * target).min(cap),
                args.eps_step,
            )
        });
        let grid = grid.flatten();
        let fa = entry
            .samples
            .zip(entry.threshold)
            .map(|(n, e)| false_alarm_prob(e, n));
        let det = entry
            .samples
            .zip(entry.threshold)
            .map(|(n, e)| detection_prob(e, n, snr));
        let agree = if target > cap {
            entry.samples.is_none()
        } else {
            let sca_ok = entry
                .continuous_samples
                .is_some_and(|c| (c - target).abs() <= 1e-3 * target);
            let grid_ok = grid.is_some_and(|g| (g - target.ceil()).abs() <= 1.0);
            let stats_ok = fa.is_some_and(|f| (f - s.max_false_alarm).abs() <= 1e-3)
                && det.is_some_and(|d| d >= s.min_detection - 1e-3);
            sca_ok && grid_ok && stats_ok
        };
        rows.push(OracleRow {
            snr,
            closed_form: closed,
            target,
            optimised: entry.continuous_samples,
            rounded: entry.samples,
            grid,
            false_alarm: fa,
            detection: det,
            agree,
        });
    }

    let mut w = csv::Writer::from_writer(std::io::stdout());
    for r in &rows {
        w.serialize(r)?;
    }
    w.flush()?;
    if let Some(dir) = &args.out {
        create_dir(dir)?;
        let path = dir.join("oracle.csv");
        let mut w = csv::Writer::from_path(&path)
            .with_context(|| format!("cannot write {}", path.display()))?;
        for r in &rows {
            w.serialize(r)?;
        }
        w.flush()?;
    }
    Ok(if rows.iter().all(|r| r.agree) {
        ExitCode::SUCCESS
    } else {
        eprintln!("oracle disagreement; see the agree column");
        ExitCode::from(1)
    })
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(Error::Config { .. }) => 2,
        Some(Error::Infeasible(_)) => 3,
        _ => 1,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(a) => cmd_run(a).map(|()| ExitCode::SUCCESS),
        Command::Sweep(a) => cmd_sweep(a).map(|()| ExitCode::SUCCESS),
        Command::Oracle(a) => cmd_oracle(a),
    };
    match result {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
