//! Command-line driver for `adiabat`: scenario files in, CSV datasets and
//! gnuplot scripts out.

pub mod config;
pub mod plot;

use std::fs;
use std::path::{Path, PathBuf};

use adiabat::control::drive_strength;
use adiabat::experiments::{
    adiabatic_state, default_sweep_ladder, epsilon_sweep, log_ladder, pause_study, ramp_smoothness_study,
    reproduce_figure, run_scenario, sweep_infidelities, synthesize_drive, Dataset, Figure, ScenarioRun,
    DEFAULT_PAUSE_LADDER,
};
use adiabat::output::{drive_table, sweep_table, trajectory_table, Table};
use adiabat::propagator::convergence_report;
use clap::{Args, Parser, Subcommand, ValueEnum};

pub use config::{parse_config, ConfigError, ConfigErrors, RunConfiguration};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigErrors),
    #[error(transparent)]
    Library(#[from] adiabat::Error),
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    /// Stable category printed as `error[<category>]`.
    pub fn category(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Library(e) => e.category(),
            CliError::Usage(_) => "usage",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Usage(_) => 2,
            CliError::Library(_) => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "adiabat", version, about = "Adiabatic and superadiabatic dynamics in rescaled time")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Clone)]
pub struct Common {
    /// Scenario file.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Output directory; overrides `[output] directory`.
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FigureArg {
    Fig2,
    Fig3,
    Fig4,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Propagate one scenario and write its trajectory, drive and summary.
    Simulate(Common),
    /// Final infidelity over an epsilon ladder, with a log-log slope fit.
    Sweep(Common),
    /// Sweeps with smoothstep ramps of increasing order.
    SmoothnessStudy(Common),
    /// Deviation from the adiabatic state in the middle of a paused sweep.
    PauseStudy(Common),
    /// Sample the configured drive without propagating.
    SynthesizeDrive(Common),
    /// Datasets for one of the published figures.
    Reproduce {
        figure: FigureArg,
        #[command(flatten)]
        common: Common,
    },
    /// Final-state differences under step doubling.
    Convergence(Common),
}

/// Lines printed to stdout and files written by one command.
#[derive(Debug, Default)]
pub struct Report {
    pub lines: Vec<String>,
    pub files: Vec<PathBuf>,
}

impl Report {
    fn say(&mut self, line: impl Into<String>) {
        self.lines.push(line.into());
    }

    fn write(&mut self, table: &Table, dir: &Path) -> Result<(), CliError> {
        self.files.push(table.write(dir)?);
        Ok(())
    }
}

fn load(common: &Common) -> Result<Option<RunConfiguration>, CliError> {
    let Some(path) = &common.config else {
        return Ok(None);
    };
    let text = fs::read_to_string(path)
        .map_err(|e| adiabat::Error::Io { context: path.display().to_string(), message: e.to_string() })?;
    Ok(Some(parse_config(&text)?))
}

fn require(common: &Common, command: &str) -> Result<RunConfiguration, CliError> {
    load(common)?.ok_or_else(|| CliError::Usage(format!("{command} needs --config <PATH>")))
}

fn output_dir(common: &Common, cfg: Option<&RunConfiguration>) -> Result<PathBuf, CliError> {
    let dir = common
        .out
        .clone()
        .or_else(|| cfg.map(|c| c.output_dir.clone()))
        .unwrap_or_else(|| PathBuf::from(config::DEFAULT_OUTPUT_DIR));
    fs::create_dir_all(&dir).map_err(|e| adiabat::Error::Io { context: dir.display().to_string(), message: e.to_string() })?;
    Ok(dir)
}

fn summary_table(run: &ScenarioRun) -> Table {
    let s = &run.summary;
    let mut header = vec!["final_infidelity".to_owned(), "norm_drift".to_owned()];
    let mut row = vec![s.final_infidelity, s.norm_drift];
    for f in &s.frames {
        header.push(format!("min_{}", f.label));
        header.push(format!("final_{}", f.label));
        row.extend([f.min_population, f.final_population]);
    }
    if let Some((peak, integral)) = s.drive_strength {
        header.extend(["peak_drive".to_owned(), "integral_drive".to_owned()]);
        row.extend([peak, integral]);
    }
    let mut t = Table::new("summary", header);
    t.push(row);
    t
}

fn simulate(common: &Common) -> Result<Report, CliError> {
    let cfg = require(common, "simulate")?;
    let dir = output_dir(common, Some(&cfg))?;
    let run = run_scenario(&cfg.scenario)?;
    let mut r = Report::default();
    let outputs = &cfg.scenario.outputs;
    if outputs.contains(&Dataset::Trajectory) {
        r.write(&trajectory_table("trajectory", &run.record), &dir)?;
    }
    if let (true, Some(d)) = (outputs.contains(&Dataset::Drive), &run.drive) {
        r.write(&drive_table("drive", d), &dir)?;
    }
    if outputs.contains(&Dataset::Summary) {
        r.write(&summary_table(&run), &dir)?;
    }
    r.say(cfg.scenario.describe());
    for f in &run.summary.frames {
        r.say(format!("{}: min population {:.6}, final {:.6}", f.label, f.min_population, f.final_population));
    }
    r.say(format!("final infidelity {:e}", run.summary.final_infidelity));
    if run.record.norm_flagged() {
        r.say(format!("warning: norm drift {:e} exceeds tolerance", run.record.norm_drift));
    }
    Ok(r)
}

fn sweep(common: &Common) -> Result<Report, CliError> {
    let cfg = require(common, "sweep")?;
    let dir = output_dir(common, Some(&cfg))?;
    let ladder = cfg.sweep.epsilons.clone().unwrap_or_else(default_sweep_ladder);
    let mut r = Report::default();
    match epsilon_sweep(&cfg.scenario, &ladder) {
        Ok(s) => {
            r.write(&s.table("sweep"), &dir)?;
            r.say(format!("fitted slope {:.4} ({} points)", s.fitted_slope, s.epsilons.len()));
            if s.flagged() {
                r.say("warning: infidelity is not monotone in epsilon below 0.1; inspect for resonances");
            }
            Ok(r)
        }
        Err(e @ adiabat::Error::InScenario { .. }) if matches!(e.category(), "fit") => {
            // Keep the data even when every point is below the fit floor.
            let inf = sweep_infidelities(&cfg.scenario, &ladder)?;
            sweep_table("sweep", &ladder, &inf).write(&dir)?;
            Err(e.into())
        }
        Err(e) => Err(e.into()),
    }
}

fn smoothness_study(common: &Common) -> Result<Report, CliError> {
    let cfg = require(common, "smoothness-study")?;
    let dir = output_dir(common, Some(&cfg))?;
    let ladder = cfg.sweep.epsilons.clone().unwrap_or_else(|| log_ladder(0.01, 0.1, 12));
    let study = ramp_smoothness_study(&cfg.scenario, &cfg.sweep.orders, &ladder)?;
    let mut r = Report::default();
    let mut slopes = Table::new("smoothness_slopes", vec!["order".into(), "slope".into(), "monotone".into()]);
    for (k, s) in study.orders.iter().zip(&study.sweeps) {
        r.write(&s.table(&format!("smoothness_order{k}")), &dir)?;
        slopes.push(vec![f64::from(*k), s.fitted_slope, f64::from(u8::from(s.monotone))]);
        r.say(format!("order {k}: slope {:.4}", s.fitted_slope));
    }
    r.write(&slopes, &dir)?;
    if !study.monotone_in_order() {
        r.say("warning: slopes are not non-decreasing in smoothstep order");
    }
    Ok(r)
}

fn pause(common: &Common) -> Result<Report, CliError> {
    let cfg = require(common, "pause-study")?;
    let dir = output_dir(common, Some(&cfg))?;
    let ladder = cfg.sweep.epsilons.clone().unwrap_or_else(|| DEFAULT_PAUSE_LADDER.to_vec());
    let p = pause_study(&cfg.scenario, cfg.sweep.pause_window, &ladder)?;
    let mut r = Report::default();
    r.write(&p.table("pause"), &dir)?;
    r.say(format!("pause [{}, {}], deviation measured at tau {}", p.window.0, p.window.1, p.midpoint));
    r.say(format!("plateau deviation slope {:.4}", p.fitted_slope));
    Ok(r)
}

fn synthesize(common: &Common) -> Result<Report, CliError> {
    let cfg = require(common, "synthesize-drive")?;
    let dir = output_dir(common, Some(&cfg))?;
    let d = synthesize_drive(&cfg.scenario)?
        .ok_or_else(|| CliError::Usage("the configuration requests no drive; set `kind` in [drive]".into()))?;
    let mut r = Report::default();
    r.write(&drive_table("drive", &d), &dir)?;
    let (peak, integral) = drive_strength(&d)?;
    r.say(format!("peak {peak:.6}, integral {integral:.6}"));
    Ok(r)
}

fn reproduce(figure: FigureArg, common: &Common) -> Result<Report, CliError> {
    let cfg = load(common)?;
    let dir = output_dir(common, cfg.as_ref())?;
    let which = match figure {
        FigureArg::Fig2 => Figure::Fig2,
        FigureArg::Fig3 => Figure::Fig3,
        FigureArg::Fig4 => Figure::Fig4,
    };
    let bundle = reproduce_figure(which)?;
    let mut r = Report { files: bundle.write(&dir)?, ..Report::default() };
    if cfg.as_ref().is_none_or(|c| c.emit_plots) {
        r.files.push(plot::emit_plot_script(&bundle, &dir)?);
    }
    if let Some(t) = bundle.table(&format!("{}_strengths", which.name())) {
        for (h, v) in t.header.iter().zip(&t.rows[0]) {
            r.say(format!("{h} {v:.6}"));
        }
    }
    Ok(r)
}

fn convergence(common: &Common) -> Result<Report, CliError> {
    let cfg = require(common, "convergence")?;
    let dir = output_dir(common, Some(&cfg))?;
    let s = &cfg.scenario;
    let psi0 = adiabatic_state(&s.model, 0.0, s.initial_state)?;
    let c = match synthesize_drive(s)? {
        Some(d) => convergence_report(&adiabat::control::driven_hamiltonian(&s.model, &d)?, &psi0, &s.propagation)?,
        None => convergence_report(&s.model, &psi0, &s.propagation)?,
    };
    let mut t = Table::new("convergence", vec!["steps".into(), "difference".into()]);
    let mut r = Report::default();
    for (n, d) in c.step_counts.iter().zip(&c.differences) {
        t.push(vec![*n as f64, *d]);
        r.say(format!("{n} -> {} steps: difference {d:e}", 2 * n));
    }
    for p in c.observed_orders() {
        r.say(format!("observed order {p:.3}"));
    }
    r.write(&t, &dir)?;
    Ok(r)
}

/// Runs one parsed command.
pub fn execute(cli: &Cli) -> Result<Report, CliError> {
    match &cli.command {
        Command::Simulate(c) => simulate(c),
        Command::Sweep(c) => sweep(c),
        Command::SmoothnessStudy(c) => smoothness_study(c),
        Command::PauseStudy(c) => pause(c),
        Command::SynthesizeDrive(c) => synthesize(c),
        Command::Reproduce { figure, common } => reproduce(*figure, common),
        Command::Convergence(c) => convergence(c),
    }
}
