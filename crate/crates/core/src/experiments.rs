//! Scenario orchestration: single runs, ε sweeps with slope fits, ramp
//! smoothness and pause studies, and the figure datasets.

use rayon::prelude::*;

use crate::control::{counterdiabatic, drive_strength, driven_hamiltonian, superadiabatic_correction_two_level, DriveSpec};
use crate::error::{Error, Result};
use crate::frames::{
    adiabatic_frame, analytic_superadiabatic_frame, frame_hierarchy, project_populations, uniform_grid, EigenFrame,
    DEFAULT_FRAME_POINTS, MAX_FRAME_ORDER,
};
use crate::linalg::{eigh, inner, StateVector};
use crate::models::{Hamiltonian, ModelKind, ModelSpec};
use crate::output::{sweep_table, Bundle, Table};
use crate::propagator::{propagate, propagate_interval, PropagationConfig, TrajectoryRecord};
use crate::schedule::Schedule;

/// Infidelities at or below this are treated as numerical noise.
pub const INFIDELITY_FLOOR: f64 = 1e-13;
/// Infidelities above this are outside the perturbative regime.
pub const INFIDELITY_CEILING: f64 = 0.5;
/// Monotonicity of a sweep is checked below this ε.
pub const MONOTONE_BELOW: f64 = 0.1;
pub const DEFAULT_PAUSE_LADDER: [f64; 4] = [0.02, 0.04, 0.08, 0.16];
pub const DEFAULT_PAUSE_WINDOW: (f64, f64) = (0.4, 0.6);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum FrameSelector {
    /// Numerically constructed frame of the given order.
    Numeric(usize),
    /// Closed-form first superadiabatic states of the spin sweep.
    AnalyticFirstOrder,
}

impl FrameSelector {
    pub fn label(self) -> String {
        match self {
            FrameSelector::Numeric(k) => format!("frame{k}"),
            FrameSelector::AnalyticFirstOrder => "frame1a".to_owned(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DriveSelector {
    #[default]
    None,
    Counterdiabatic { include_berry: bool },
    SuperadiabaticCorrection,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dataset {
    Trajectory,
    Drive,
    Summary,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub model: ModelSpec,
    pub propagation: PropagationConfig,
    pub frames_to_track: Vec<FrameSelector>,
    /// Samples of the frame grid (and of any synthesized drive).
    pub frame_points: usize,
    pub drive: DriveSelector,
    /// Index of the adiabatic state the system starts in and follows.
    pub initial_state: usize,
    pub outputs: Vec<Dataset>,
}

impl Scenario {
    /// Defaults: 20000 midpoint steps, adiabatic frame tracked, no drive,
    /// start in the lowest adiabatic state.
    pub fn new(model: ModelSpec, epsilon: f64) -> Self {
        Scenario {
            model,
            propagation: PropagationConfig::new(epsilon),
            frames_to_track: vec![FrameSelector::Numeric(0)],
            frame_points: DEFAULT_FRAME_POINTS,
            drive: DriveSelector::None,
            initial_state: 0,
            outputs: vec![Dataset::Trajectory, Dataset::Summary],
        }
    }

    pub fn with_epsilon(&self, epsilon: f64) -> Self {
        let mut s = self.clone();
        s.propagation.epsilon = epsilon;
        s
    }

    pub fn epsilon(&self) -> f64 {
        self.propagation.epsilon
    }

    pub fn describe(&self) -> String {
        format!("{} at epsilon {}", self.model.kind(), self.epsilon())
    }

    pub fn validate(&self) -> Result<()> {
        self.propagation.validate()?;
        let dim = self.model.dim();
        if self.initial_state >= dim {
            return Err(Error::invalid(format!(
                "initial_state {} out of range for a {dim}-level model",
                self.initial_state
            )));
        }
        if self.frame_points < 3 {
            return Err(Error::invalid("frame_points must be >= 3"));
        }
        let spin = self.model.kind() == ModelKind::SpinSweep;
        for f in &self.frames_to_track {
            match *f {
                FrameSelector::Numeric(k) if k > MAX_FRAME_ORDER => {
                    return Err(Error::OrderTooHigh { requested: k, max: MAX_FRAME_ORDER })
                }
                FrameSelector::AnalyticFirstOrder if !spin => {
                    return Err(Error::WrongModel { expected: "spin_sweep", found: self.model.kind().name() })
                }
                _ => {}
            }
        }
        if self.drive == DriveSelector::SuperadiabaticCorrection && !spin {
            return Err(Error::WrongModel { expected: "spin_sweep", found: self.model.kind().name() });
        }
        Ok(())
    }

    fn frame_grid(&self) -> Vec<f64> {
        uniform_grid(self.frame_points)
    }

    fn context(&self) -> impl Fn(Error) -> Error + '_ {
        move |e| match e {
            e @ Error::InScenario { .. } => e,
            e => Error::InScenario { scenario: self.describe(), source: Box::new(e) },
        }
    }
}

/// Adiabatic state `n` of the model at τ.
pub fn adiabatic_state(model: &impl Hamiltonian, tau: f64, n: usize) -> Result<StateVector> {
    Ok(StateVector::new(eigh(&model.at(tau)?)?.vector(n)))
}

/// Σ_{m≠n} |⟨m(1)|ψ⟩|² / ‖ψ‖² against the eigenbasis of H(τ = 1). Summing the
/// complement avoids the cancellation in 1 − |⟨n|ψ⟩|².
pub fn final_infidelity(model: &impl Hamiltonian, psi: &StateVector, n: usize) -> Result<f64> {
    complement_population(model, 1.0, psi, n)
}

fn complement_population(model: &impl Hamiltonian, tau: f64, psi: &StateVector, n: usize) -> Result<f64> {
    let eig = eigh(&model.at(tau)?)?;
    let norm2 = psi.norm().powi(2);
    let leak: f64 = (0..eig.dim())
        .filter(|&m| m != n)
        .map(|m| inner(&eig.vector(m), psi.amplitudes()).norm_sqr())
        .sum();
    Ok(leak / norm2)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrameSummary {
    pub label: String,
    /// Minimum over τ of the followed state's population.
    pub min_population: f64,
    pub final_population: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSummary {
    pub frames: Vec<FrameSummary>,
    /// (peak, integral) of the drive's spectral norm.
    pub drive_strength: Option<(f64, f64)>,
    pub final_infidelity: f64,
    pub norm_drift: f64,
}

impl ScenarioSummary {
    pub fn frame(&self, label: &str) -> Option<&FrameSummary> {
        self.frames.iter().find(|f| f.label == label)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioRun {
    pub record: TrajectoryRecord,
    pub drive: Option<DriveSpec>,
    pub summary: ScenarioSummary,
}

fn build_drive(s: &Scenario, adiabatic: Option<&EigenFrame>, grid: &[f64]) -> Result<Option<DriveSpec>> {
    match s.drive {
        DriveSelector::None => Ok(None),
        DriveSelector::Counterdiabatic { include_berry } => {
            let f = adiabatic.expect("adiabatic frame is built whenever a counterdiabatic drive is requested");
            counterdiabatic(f, s.epsilon(), include_berry).map(Some)
        }
        DriveSelector::SuperadiabaticCorrection => {
            superadiabatic_correction_two_level(&s.model, s.epsilon(), grid).map(Some)
        }
    }
}

fn run(s: &Scenario) -> Result<ScenarioRun> {
    s.validate()?;
    let grid = s.frame_grid();
    let max_numeric = s
        .frames_to_track
        .iter()
        .filter_map(|f| match f {
            FrameSelector::Numeric(k) => Some(*k),
            FrameSelector::AnalyticFirstOrder => None,
        })
        .max();
    let needs_frame = max_numeric.is_some() || matches!(s.drive, DriveSelector::Counterdiabatic { .. });
    let hierarchy = if needs_frame {
        frame_hierarchy(&s.model, &grid, s.epsilon(), max_numeric.unwrap_or(0))?
    } else {
        Vec::new()
    };
    let drive = build_drive(s, hierarchy.first(), &grid)?;
    let psi0 = adiabatic_state(&s.model, 0.0, s.initial_state)?;
    let cfg = &s.propagation;
    let mut record = match &drive {
        Some(d) => propagate(&driven_hamiltonian(&s.model, d)?, &psi0, cfg)?,
        None => propagate(&s.model, &psi0, cfg)?,
    };
    let mut frames = Vec::new();
    for sel in &s.frames_to_track {
        let pops = match *sel {
            FrameSelector::Numeric(k) => project_populations(&record, &hierarchy[k])?,
            FrameSelector::AnalyticFirstOrder => {
                project_populations(&record, &analytic_superadiabatic_frame(&s.model, s.epsilon(), &grid)?)?
            }
        };
        let followed: Vec<f64> = pops.iter().map(|p| p[s.initial_state]).collect();
        frames.push(FrameSummary {
            label: sel.label(),
            min_population: followed.iter().copied().fold(f64::INFINITY, f64::min),
            final_population: *followed.last().unwrap(),
        });
        record.attach_populations(sel.label(), pops)?;
    }
    let summary = ScenarioSummary {
        frames,
        drive_strength: drive.as_ref().map(drive_strength).transpose()?,
        final_infidelity: final_infidelity(&s.model, record.final_state(), s.initial_state)?,
        norm_drift: record.norm_drift,
    };
    Ok(ScenarioRun { record, drive, summary })
}

/// The drive a scenario requests, sampled on its frame grid, without propagating.
pub fn synthesize_drive(s: &Scenario) -> Result<Option<DriveSpec>> {
    let build = || {
        s.validate()?;
        let grid = s.frame_grid();
        let f0 = match s.drive {
            DriveSelector::Counterdiabatic { .. } => Some(adiabatic_frame(&s.model, &grid)?),
            _ => None,
        };
        build_drive(s, f0.as_ref(), &grid)
    };
    build().map_err(s.context())
}

/// Propagates the scenario, projects onto every tracked frame and summarizes.
pub fn run_scenario(s: &Scenario) -> Result<ScenarioRun> {
    run(s).map_err(s.context())
}

/// Least-squares line through (ln ε, ln infidelity).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    /// ε range of the points used.
    pub window: (f64, f64),
    pub points: usize,
}

/// Fits on the points with INFIDELITY_FLOOR < infidelity ≤ INFIDELITY_CEILING.
pub fn fit_slope(epsilons: &[f64], infidelities: &[f64]) -> Result<SlopeFit> {
    if epsilons.len() != infidelities.len() {
        return Err(Error::DimensionMismatch { expected: epsilons.len(), found: infidelities.len() });
    }
    let pts: Vec<(f64, f64)> = epsilons
        .iter()
        .zip(infidelities)
        .filter(|(_, &i)| i > INFIDELITY_FLOOR && i <= INFIDELITY_CEILING)
        .map(|(&e, &i)| (e, i))
        .collect();
    if pts.len() < 2 {
        return Err(Error::FitFloor);
    }
    let n = pts.len() as f64;
    let xs: Vec<f64> = pts.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = pts.iter().map(|p| p.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::invalid("slope fit needs at least two distinct epsilon values"));
    }
    let slope = sxy / sxx;
    let lo = pts.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let hi = pts.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
    Ok(SlopeFit { slope, intercept: my - slope * mx, window: (lo, hi), points: pts.len() })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub epsilons: Vec<f64>,
    pub infidelities: Vec<f64>,
    pub fitted_slope: f64,
    pub slope_window: (f64, f64),
    /// False when infidelity fails to decrease with ε below MONOTONE_BELOW;
    /// such runs need inspection (resonant oscillations).
    pub monotone: bool,
}

impl SweepResult {
    pub fn flagged(&self) -> bool {
        !self.monotone
    }

    pub fn table(&self, name: &str) -> Table {
        sweep_table(name, &self.epsilons, &self.infidelities)
    }
}

/// `n` logarithmically spaced values from `lo` to `hi` inclusive.
pub fn log_ladder(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|k| match k {
            0 => lo,
            k if k == n - 1 => hi,
            k => (a + (b - a) * k as f64 / (n - 1) as f64).exp(),
        })
        .collect()
}

/// 12 values in [0.01, 0.2].
pub fn default_sweep_ladder() -> Vec<f64> {
    log_ladder(0.01, 0.2, 12)
}

fn check_ladder(epsilons: &[f64]) -> Result<()> {
    if epsilons.len() < 4 {
        return Err(Error::invalid(format!("a sweep needs at least 4 epsilon values, got {}", epsilons.len())));
    }
    if epsilons.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("epsilon values must be strictly increasing"));
    }
    if epsilons[0] <= 0.0 {
        return Err(Error::invalid(format!("epsilon must be > 0, got {}", epsilons[0])));
    }
    if epsilons[epsilons.len() - 1] < 5.0 * epsilons[0] {
        return Err(Error::invalid("epsilon values must span at least a factor of 5"));
    }
    Ok(())
}

/// Final infidelity at each ε, evaluated in parallel and returned in input order.
pub fn sweep_infidelities(s: &Scenario, epsilons: &[f64]) -> Result<Vec<f64>> {
    s.validate()?;
    let grid = s.frame_grid();
    // The adiabatic frame does not depend on ε, so a counterdiabatic drive
    // only needs it once.
    let frame = match s.drive {
        DriveSelector::Counterdiabatic { .. } => Some(frame_hierarchy(&s.model, &grid, 1.0, 0)?.remove(0)),
        _ => None,
    };
    let psi0 = adiabatic_state(&s.model, 0.0, s.initial_state)?;
    epsilons
        .par_iter()
        .map(|&eps| {
            let sc = s.with_epsilon(eps);
            let cfg = PropagationConfig { record_stride: sc.propagation.steps, ..sc.propagation };
            let one = || -> Result<f64> {
                let drive = build_drive(&sc, frame.as_ref(), &grid)?;
                let rec = match &drive {
                    Some(d) => propagate(&driven_hamiltonian(&sc.model, d)?, &psi0, &cfg)?,
                    None => propagate(&sc.model, &psi0, &cfg)?,
                };
                final_infidelity(&sc.model, rec.final_state(), sc.initial_state)
            };
            one().map_err(sc.context())
        })
        .collect()
}

fn is_monotone(epsilons: &[f64], infidelities: &[f64]) -> bool {
    let pts: Vec<f64> = epsilons
        .iter()
        .zip(infidelities)
        .filter(|(&e, &i)| e < MONOTONE_BELOW && i > INFIDELITY_FLOOR)
        .map(|(_, &i)| i)
        .collect();
    pts.windows(2).all(|w| w[1] >= w[0])
}

/// Infidelity against ε with a log-log slope fit.
pub fn epsilon_sweep(s: &Scenario, epsilons: &[f64]) -> Result<SweepResult> {
    check_ladder(epsilons)?;
    let infidelities = sweep_infidelities(s, epsilons)?;
    let fit = fit_slope(epsilons, &infidelities).map_err(s.context())?;
    Ok(SweepResult {
        monotone: is_monotone(epsilons, &infidelities),
        epsilons: epsilons.to_vec(),
        infidelities,
        fitted_slope: fit.slope,
        slope_window: fit.window,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SmoothnessStudy {
    pub orders: Vec<u8>,
    pub sweeps: Vec<SweepResult>,
}

impl SmoothnessStudy {
    pub fn slopes(&self) -> Vec<f64> {
        self.sweeps.iter().map(|s| s.fitted_slope).collect()
    }

    /// Whether the fitted slope is non-decreasing in the smoothstep order.
    pub fn monotone_in_order(&self) -> bool {
        self.slopes().windows(2).all(|w| w[1] >= w[0])
    }
}

/// Spin sweep with θ replaced by the smoothstep ramp of the given order.
pub fn with_smoothstep(s: &Scenario, order: u8) -> Result<Scenario> {
    let (start, end) = theta_endpoints(s)?;
    let mut out = s.clone();
    out.model = s.model.with_schedule("theta", Schedule::Smoothstep { order, start, end })?;
    Ok(out)
}

fn theta_endpoints(s: &Scenario) -> Result<(f64, f64)> {
    if s.model.kind() != ModelKind::SpinSweep {
        return Err(Error::WrongModel { expected: "spin_sweep", found: s.model.kind().name() });
    }
    s.model
        .schedule("theta")
        .and_then(Schedule::ramp_endpoints)
        .ok_or_else(|| Error::invalid("theta must be a ramp schedule"))
}

/// One sweep per smoothstep order, sharing the ε ladder.
pub fn ramp_smoothness_study(base: &Scenario, orders: &[u8], epsilons: &[f64]) -> Result<SmoothnessStudy> {
    if orders.is_empty() {
        return Err(Error::invalid("no smoothstep orders given"));
    }
    let sweeps = orders
        .iter()
        .map(|&k| epsilon_sweep(&with_smoothstep(base, k)?, epsilons))
        .collect::<Result<Vec<_>>>()?;
    Ok(SmoothnessStudy { orders: orders.to_vec(), sweeps })
}

#[derive(Debug, Clone, PartialEq)]
pub struct PauseReport {
    pub window: (f64, f64),
    /// Plateau midpoint where deviations are measured.
    pub midpoint: f64,
    pub epsilons: Vec<f64>,
    /// 1 − adiabatic population at the midpoint with the pause.
    pub plateau_deviation: Vec<f64>,
    /// Same quantity for the un-paused ramp.
    pub unpaused_deviation: Vec<f64>,
    pub fitted_slope: f64,
}

fn deviation_at(s: &Scenario, model: &ModelSpec, tau: f64) -> Result<f64> {
    let psi0 = adiabatic_state(model, 0.0, s.initial_state)?;
    let steps = ((s.propagation.steps as f64 * tau).round() as usize).max(1);
    let psi = propagate_interval(model, &psi0, 0.0, tau, steps, s.epsilon(), s.propagation.method)?;
    complement_population(model, tau, &psi, s.initial_state)
}

/// Deviation from the followed adiabatic state at the middle of a pause in
/// the θ sweep, over an ε ladder, next to the un-paused ramp at the same τ.
pub fn pause_study(s: &Scenario, window: (f64, f64), epsilons: &[f64]) -> Result<PauseReport> {
    let (start, end) = theta_endpoints(s)?;
    let (a, b) = window;
    if !(a > 0.0 && b < 1.0 && a <= b) {
        return Err(Error::invalid(format!("pause window [{a}, {b}] must lie inside (0, 1)")));
    }
    let paused = s.model.with_schedule("theta", Schedule::PiecewiseWithPause { start, end, pause_start: a, pause_end: b })?;
    let plain = s.model.with_schedule("theta", Schedule::SmoothRamp { start, end })?;
    let midpoint = 0.5 * (a + b);
    let pairs = epsilons
        .par_iter()
        .map(|&eps| {
            let sc = s.with_epsilon(eps);
            sc.validate()?;
            Ok((deviation_at(&sc, &paused, midpoint)?, deviation_at(&sc, &plain, midpoint)?))
        })
        .collect::<Result<Vec<(f64, f64)>>>()
        .map_err(s.context())?;
    let (plateau_deviation, unpaused_deviation): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
    let fit = fit_slope(epsilons, &plateau_deviation).map_err(s.context())?;
    Ok(PauseReport {
        window,
        midpoint,
        epsilons: epsilons.to_vec(),
        plateau_deviation,
        unpaused_deviation,
        fitted_slope: fit.slope,
    })
}

impl PauseReport {
    pub fn table(&self, name: &str) -> Table {
        let mut t = Table::new(name, vec!["epsilon".into(), "plateau_deviation".into(), "unpaused_deviation".into()]);
        for i in 0..self.epsilons.len() {
            t.push(vec![self.epsilons[i], self.plateau_deviation[i], self.unpaused_deviation[i]]);
        }
        t
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Figure {
    Fig2,
    Fig3,
    Fig4,
}

impl Figure {
    pub fn name(self) -> &'static str {
        match self {
            Figure::Fig2 => "fig2",
            Figure::Fig3 => "fig3",
            Figure::Fig4 => "fig4",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [Figure::Fig2, Figure::Fig3, Figure::Fig4].into_iter().find(|f| f.name() == s)
    }

    /// ε of the population figures.
    pub fn epsilon(self) -> Option<f64> {
        match self {
            Figure::Fig2 => None,
            Figure::Fig3 => Some(0.2),
            Figure::Fig4 => Some(0.05),
        }
    }
}

fn element_table(name: String, taus: &[f64], at: impl Fn(usize, f64) -> Result<crate::linalg::ComplexMatrix>) -> Result<Table> {
    let header = ["tau", "delta_plus", "delta_minus", "re_omega", "im_omega"].map(String::from).to_vec();
    let mut t = Table::new(name, header);
    for (j, &tau) in taus.iter().enumerate() {
        let m = at(j, tau)?;
        t.push(vec![tau, m[(0, 0)].re, m[(1, 1)].re, m[(0, 1)].re, m[(0, 1)].im]);
    }
    Ok(t)
}

/// Datasets behind the ramp figure and the two population figures.
///
/// For fig3/fig4 each column (a: bare, b: counterdiabatic, c: first-order
/// superadiabatic correction) yields a population table (followed state in
/// the adiabatic and first superadiabatic bases) and a Hamiltonian table;
/// columns b and c list the added drive only. A strengths table closes the set.
pub fn reproduce_figure(which: Figure) -> Result<Bundle> {
    let model = ModelSpec::preset(ModelKind::SpinSweep);
    let grid = uniform_grid(DEFAULT_FRAME_POINTS);
    let name = which.name();
    let Some(epsilon) = which.epsilon() else {
        let theta = model.schedule("theta").expect("spin sweep has theta");
        let mut t_theta = Table::new(format!("{name}_theta"), vec!["tau".into(), "theta".into()]);
        let mut t_field = Table::new(format!("{name}_field"), vec!["tau".into(), "field".into()]);
        for &tau in &grid {
            t_theta.push(vec![tau, theta.value(tau)?]);
            t_field.push(vec![tau, model.field()]);
        }
        return Ok(Bundle { name: name.into(), tables: vec![t_theta, t_field] });
    };
    let mut tables = Vec::new();
    let mut strengths = Vec::new();
    for (col, drive) in [
        ('a', DriveSelector::None),
        ('b', DriveSelector::Counterdiabatic { include_berry: true }),
        ('c', DriveSelector::SuperadiabaticCorrection),
    ] {
        let mut s = Scenario::new(model.clone(), epsilon);
        s.frames_to_track = vec![FrameSelector::Numeric(0), FrameSelector::AnalyticFirstOrder];
        s.drive = drive;
        let run = run_scenario(&s)?;
        let rec = &run.record;
        let mut pops = Table::new(
            format!("{name}{col}_populations"),
            vec!["tau".into(), "adiabatic".into(), "superadiabatic".into()],
        );
        let p0 = &rec.populations["frame0"];
        let p1 = &rec.populations["frame1a"];
        for j in 0..rec.len() {
            pops.push(vec![rec.tau_grid[j], p0[j][0], p1[j][0]]);
        }
        tables.push(pops);
        let elements = match &run.drive {
            None => element_table(format!("{name}{col}_hamiltonian"), &rec.tau_grid, |j, _| {
                Ok(rec.hamiltonian_elements[j].clone())
            })?,
            Some(d) => {
                strengths.extend(drive_strength(d).map(|(p, i)| [p, i])?);
                element_table(format!("{name}{col}_hamiltonian"), &rec.tau_grid, |_, tau| d.at(tau))?
            }
        };
        tables.push(elements);
    }
    let mut t = Table::new(
        format!("{name}_strengths"),
        ["peak_cd", "integral_cd", "peak_corr", "integral_corr"].map(String::from).to_vec(),
    );
    t.push(strengths);
    tables.push(t);
    Ok(Bundle { name: name.into(), tables })
}
