//! `change-accel`: evaluate, calibrate and compare change-acceleration
//! procedures from the command line.
//!
//! Exit status: 0 on success, 2 for bad flags, model files or parameters,
//! 3 when a run fails (horizon exceeded, no convergence, calibration
//! failure, I/O).

mod output;

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};

use change_accel::config::{load_model_file, ModelFile, ProcedureEntry, ProcedureSetting};
use change_accel::dp::{default_cost_grid, screen_costs, CalibrationSettings, DpConfig, PolicySet};
use change_accel::evaluation::{
    evaluate, frontier, reproduce_table2, table2_procedures, write_calibration_csv,
    write_frontier_csv, write_metrics_csv, write_table2_csv, CsvHeader, EvalReport, RunSettings,
    DEFAULT_REPS, TABLE2_LEVELS,
};
use change_accel::exec::set_thread_count;
use change_accel::model::presets;
use change_accel::procedures::{quality_metrics, ProcedureKind};
use change_accel::{Error, Result};

/// Levels swept by `frontier` when none are given.
const FRONTIER_LEVELS: [f64; 6] = [1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7];

#[derive(Parser)]
#[command(name = "change-accel", version, about)]
struct Cli {
    /// Worker threads; results never depend on this.
    #[arg(long, global = true, value_parser = clap::value_parser!(u32).range(1..))]
    threads: Option<u32>,

    /// Log more (-v info, -vv debug). RUST_LOG overrides.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Per-treatment information metrics of a model.
    Metrics {
        #[command(flatten)]
        io: Io,
    },
    /// Simulate procedures given on the command line or in the model file.
    Eval {
        #[command(flatten)]
        io: Io,
        #[command(flatten)]
        run: Run,
        /// Procedure: proposed:I,J | static:X | optimal. Repeatable.
        #[arg(long = "proc")]
        procedures: Vec<ProcedureKind>,
        /// Levels to calibrate every --proc for (comma separated).
        #[arg(long, value_delimiter = ',', value_parser = parse_level)]
        alpha: Vec<f64>,
        /// Policy file from dp-calibrate, needed for `optimal`.
        #[arg(long)]
        policy: Option<PathBuf>,
    },
    /// Choose the DP cost per level and save the solved policies.
    DpCalibrate {
        #[command(flatten)]
        io: Io,
        #[command(flatten)]
        run: Run,
        /// Levels to calibrate (comma separated).
        #[arg(long, value_delimiter = ',', value_parser = parse_level,
              default_values_t = TABLE2_LEVELS)]
        alpha: Vec<f64>,
        /// Replications per cost in the screening pass.
        #[arg(long, default_value_t = 10_000)]
        screen_reps: u64,
        /// Costs to screen (comma separated); 72 values from 9e-2 down to 1e-9 by default.
        #[arg(long, value_delimiter = ',', value_parser = parse_positive)]
        c_grid: Vec<f64>,
        /// Uniform grid size of the value iteration.
        #[arg(long, default_value_t = DpConfig::default().grid_size)]
        grid_size: usize,
        /// Policy file to write; merged into if it exists [default: OUT/policies.json].
        #[arg(long)]
        policy: Option<PathBuf>,
    },
    /// Every reference procedure at every reference level.
    Table2 {
        #[command(flatten)]
        io: Io,
        #[command(flatten)]
        run: Run,
        /// Levels (comma separated).
        #[arg(long, value_delimiter = ',', value_parser = parse_level,
              default_values_t = TABLE2_LEVELS)]
        alpha: Vec<f64>,
        /// Policy file from dp-calibrate; without it the optimal rows are skipped.
        #[arg(long)]
        policy: Option<PathBuf>,
    },
    /// Error/sample-size trade-off curves.
    Frontier {
        #[command(flatten)]
        io: Io,
        #[command(flatten)]
        run: Run,
        /// Procedures to sweep [default: proposed:1,3 proposed:2,3 static:1 static:2].
        #[arg(long = "proc")]
        procedures: Vec<ProcedureKind>,
        /// Levels swept by threshold procedures (comma separated).
        #[arg(long, value_delimiter = ',', value_parser = parse_level,
              default_values_t = FRONTIER_LEVELS)]
        alpha: Vec<f64>,
        /// Costs swept by `optimal` (comma separated) [default: the calibration grid].
        #[arg(long, value_delimiter = ',', value_parser = parse_positive)]
        c_grid: Vec<f64>,
    },
}

#[derive(Args)]
struct Io {
    /// Model file (TOML) [default: the built-in three-treatment model].
    #[arg(long)]
    model: Option<PathBuf>,
    /// Directory for CSV and policy files.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
struct Run {
    /// Base seed; replication r uses streams derived from (seed, r).
    #[arg(long)]
    seed: u64,
    /// Replications per evaluated cell.
    #[arg(long, default_value_t = DEFAULT_REPS, value_parser = clap::value_parser!(u64).range(1..))]
    reps: u64,
}

impl Run {
    fn settings(&self) -> RunSettings {
        RunSettings::new(self.reps, self.seed)
    }

    fn header(&self) -> CsvHeader {
        CsvHeader::new(self.seed, self.reps)
    }
}

fn parse_level(s: &str) -> std::result::Result<f64, String> {
    let a: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if a > 0.0 && a < 1.0 {
        Ok(a)
    } else {
        Err(format!("level {a} must lie in (0, 1)"))
    }
}

fn parse_positive(s: &str) -> std::result::Result<f64, String> {
    let c: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if c > 0.0 && c.is_finite() {
        Ok(c)
    } else {
        Err(format!("{c} must be positive"))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();

    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config_error() { 2 } else { 3 })
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    if let Some(n) = cli.threads {
        set_thread_count(n as usize)?;
    }
    match cli.command {
        Command::Metrics { io } => metrics(&io),
        Command::Eval {
            io,
            run,
            procedures,
            alpha,
            policy,
        } => eval(&io, &run, &procedures, &alpha, policy.as_deref()),
        Command::DpCalibrate {
            io,
            run,
            alpha,
            screen_reps,
            c_grid,
            grid_size,
            policy,
        } => dp_calibrate(&io, &run, &alpha, screen_reps, c_grid, grid_size, policy),
        Command::Table2 {
            io,
            run,
            alpha,
            policy,
        } => table2(&io, &run, &alpha, policy.as_deref()),
        Command::Frontier {
            io,
            run,
            procedures,
            alpha,
            c_grid,
        } => frontier_cmd(&io, &run, procedures, &alpha, c_grid),
    }
}

fn load(io: &Io) -> Result<ModelFile> {
    match &io.model {
        Some(path) => load_model_file(path),
        None => Ok(ModelFile {
            model: presets::three_treatment_bernoulli(),
            procedures: Vec::new(),
        }),
    }
}

fn create(io: &Io, name: &str) -> Result<BufWriter<File>> {
    std::fs::create_dir_all(&io.out)
        .map_err(|e| Error::Config(format!("cannot create {}: {e}", io.out.display())))?;
    let path = io.out.join(name);
    let file = File::create(&path)
        .map_err(|e| Error::Config(format!("cannot write {}: {e}", path.display())))?;
    log::info!("writing {}", path.display());
    Ok(BufWriter::new(file))
}

fn load_policies(path: Option<&Path>) -> Result<Option<PolicySet>> {
    path.map(|p| PolicySet::load(p).map_err(|e| Error::Config(format!("{}: {e}", p.display()))))
        .transpose()
}

fn metrics(io: &Io) -> Result<()> {
    let file = load(io)?;
    let quality = quality_metrics(&file.model)?;
    write_metrics_csv(&mut create(io, "metrics.csv")?, &quality)?;
    output::print_metrics(&quality);
    Ok(())
}

fn eval(
    io: &Io,
    run: &Run,
    procedures: &[ProcedureKind],
    alpha: &[f64],
    policy: Option<&Path>,
) -> Result<()> {
    let file = load(io)?;
    let entries: Vec<ProcedureEntry> = if procedures.is_empty() {
        if !alpha.is_empty() {
            return Err(Error::Config(
                "--alpha applies to --proc; none given".into(),
            ));
        }
        if file.procedures.is_empty() {
            return Err(Error::Config(
                "no procedure: pass --proc and --alpha or add [[procedure]] to the model file"
                    .into(),
            ));
        }
        file.procedures.clone()
    } else {
        if alpha.is_empty() {
            return Err(Error::Config("--proc needs at least one --alpha".into()));
        }
        procedures
            .iter()
            .flat_map(|&kind| {
                alpha.iter().map(move |&a| ProcedureEntry {
                    kind,
                    setting: ProcedureSetting::Level(a),
                })
            })
            .collect()
    };
    let policies = load_policies(policy)?;
    let quality = quality_metrics(&file.model)?;
    let reports = entries
        .iter()
        .map(|entry| {
            let (spec, level) = entry.resolve(&quality, policies.as_ref())?;
            let mut report = evaluate(&spec, &file.model, &run.settings())?;
            report.alpha = level;
            Ok(report)
        })
        .collect::<Result<Vec<EvalReport>>>()?;
    write_table2_csv(&mut create(io, "eval.csv")?, &run.header(), &reports)?;
    output::print_reports(&reports);
    Ok(())
}

fn dp_calibrate(
    io: &Io,
    run: &Run,
    alpha: &[f64],
    screen_reps: u64,
    c_grid: Vec<f64>,
    grid_size: usize,
    policy: Option<PathBuf>,
) -> Result<()> {
    let file = load(io)?;
    let costs = if c_grid.is_empty() {
        default_cost_grid()
    } else {
        c_grid
    };
    let mut settings = CalibrationSettings::new(screen_reps, Some(run.reps), run.seed);
    settings.dp.grid_size = grid_size;

    let screen = screen_costs(&file.model, &costs, &settings)?;
    write_calibration_csv(
        &mut create(io, "calibration_screen.csv")?,
        &CsvHeader::new(run.seed, screen_reps),
        &screen.rows,
    )?;

    let policy_path = policy.unwrap_or_else(|| io.out.join("policies.json"));
    let mut set = if policy_path.exists() {
        PolicySet::load(&policy_path)?
    } else {
        PolicySet::default()
    };
    let mut selected = Vec::with_capacity(alpha.len());
    for &a in alpha {
        let calibration = screen.select(a, &file.model, &settings)?;
        write_calibration_csv(
            &mut create(io, &format!("calibration_{a:e}.csv"))?,
            &run.header(),
            &calibration.table,
        )?;
        set.insert(a, Arc::clone(&calibration.policy));
        selected.push((a, calibration.selected));
    }
    if let Some(dir) = policy_path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    set.save(&policy_path)?;
    output::print_calibration(&selected);
    println!("policy file: {}", policy_path.display());
    Ok(())
}

fn table2(io: &Io, run: &Run, alpha: &[f64], policy: Option<&Path>) -> Result<()> {
    let file = load(io)?;
    let policies = load_policies(policy)?;
    if policies.is_none() {
        log::warn!("no --policy given; optimal rows are skipped");
    }
    let reports = reproduce_table2(
        &file.model,
        &table2_procedures(),
        alpha,
        policies.as_ref(),
        &run.settings(),
    )?;
    write_table2_csv(&mut create(io, "table2.csv")?, &run.header(), &reports)?;
    output::print_reports(&reports);
    Ok(())
}

fn frontier_cmd(
    io: &Io,
    run: &Run,
    procedures: Vec<ProcedureKind>,
    alpha: &[f64],
    c_grid: Vec<f64>,
) -> Result<()> {
    let file = load(io)?;
    let procedures = if procedures.is_empty() {
        table2_procedures()
            .into_iter()
            .filter(|k| *k != ProcedureKind::Optimal)
            .collect()
    } else {
        procedures
    };
    let costs = if c_grid.is_empty() {
        default_cost_grid()
    } else {
        c_grid
    };
    let mut points = Vec::new();
    for kind in procedures {
        let sweep = if kind == ProcedureKind::Optimal {
            &costs[..]
        } else {
            alpha
        };
        points.extend(frontier(
            kind,
            sweep,
            &file.model,
            &run.settings(),
            &DpConfig::default(),
        )?);
    }
    write_frontier_csv(&mut create(io, "frontier.csv")?, &run.header(), &points)?;
    output::print_frontier(&points);
    Ok(())
}
