//! Integration of iε∂τψ = H(τ)ψ on τ ∈ [0, 1].

use std::collections::BTreeMap;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::linalg::{unitary_step, ComplexMatrix, StateVector};
use crate::models::Hamiltonian;

/// Largest tolerated |‖ψ‖ − 1| for inputs and recorded states.
pub const NORM_TOLERANCE: f64 = 1e-9;

pub const DEFAULT_STEPS: usize = 20_000;
pub const DEFAULT_RECORD_STRIDE: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Method {
    #[default]
    MidpointExponential,
    Rk4,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::MidpointExponential => "midpoint_exponential",
            Method::Rk4 => "rk4",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        match name {
            "midpoint_exponential" => Some(Method::MidpointExponential),
            "rk4" => Some(Method::Rk4),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagationConfig {
    /// ε = 1/T.
    pub epsilon: f64,
    pub steps: usize,
    pub method: Method,
    pub record_stride: usize,
}

impl PropagationConfig {
    pub fn new(epsilon: f64) -> Self {
        PropagationConfig {
            epsilon,
            steps: DEFAULT_STEPS,
            method: Method::default(),
            record_stride: DEFAULT_RECORD_STRIDE,
        }
    }

    pub fn with_steps(mut self, steps: usize) -> Self {
        self.steps = steps;
        self
    }

    pub fn with_method(mut self, method: Method) -> Self {
        self.method = method;
        self
    }

    pub fn with_record_stride(mut self, stride: usize) -> Self {
        self.record_stride = stride;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon.is_finite() && self.epsilon > 0.0) {
            return Err(Error::invalid(format!("epsilon must be > 0, got {}", self.epsilon)));
        }
        if self.steps == 0 {
            return Err(Error::invalid("steps must be >= 1"));
        }
        if self.record_stride == 0 {
            return Err(Error::invalid("record_stride must be >= 1"));
        }
        Ok(())
    }

    /// τ of step boundary k.
    pub fn tau(&self, k: usize) -> f64 {
        k as f64 / self.steps as f64
    }

    /// Recorded step indices: every stride boundary plus both ends.
    pub fn recorded_steps(&self) -> Vec<usize> {
        let mut ks: Vec<usize> = (0..=self.steps).step_by(self.record_stride).collect();
        if *ks.last().unwrap() != self.steps {
            ks.push(self.steps);
        }
        ks
    }
}

/// Sampled trajectory. Populations are attached per frame from
/// [`crate::frames::project_populations`].
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRecord {
    pub epsilon: f64,
    pub tau_grid: Vec<f64>,
    pub states: Vec<StateVector>,
    /// Frame label (`frame0`, `frame1`, …) → per-sample populations.
    pub populations: BTreeMap<String, Vec<Vec<f64>>>,
    pub hamiltonian_elements: Vec<ComplexMatrix>,
    /// max |‖ψ‖ − 1| over recorded samples.
    pub norm_drift: f64,
}

impl TrajectoryRecord {
    pub fn len(&self) -> usize {
        self.tau_grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tau_grid.is_empty()
    }

    pub fn final_state(&self) -> &StateVector {
        self.states.last().expect("records always hold τ = 0 and τ = 1")
    }

    /// Set when the norm budget was exceeded (only possible for rk4).
    pub fn norm_flagged(&self) -> bool {
        self.norm_drift >= NORM_TOLERANCE
    }

    /// Recorded state at τ, if τ is a sample point.
    pub fn state_at(&self, tau: f64) -> Option<&StateVector> {
        self.sample_index(tau).map(|i| &self.states[i])
    }

    pub fn sample_index(&self, tau: f64) -> Option<usize> {
        let i = self.tau_grid.partition_point(|&t| t < tau - 1e-12);
        (i < self.len() && (self.tau_grid[i] - tau).abs() <= 1e-12).then_some(i)
    }

    pub fn attach_populations(&mut self, label: impl Into<String>, populations: Vec<Vec<f64>>) -> Result<()> {
        if populations.len() != self.len() {
            return Err(Error::DimensionMismatch { expected: self.len(), found: populations.len() });
        }
        self.populations.insert(label.into(), populations);
        Ok(())
    }
}

fn check_initial(h: &impl Hamiltonian, psi0: &StateVector) -> Result<()> {
    if psi0.dim() != h.dim() {
        return Err(Error::DimensionMismatch { expected: h.dim(), found: psi0.dim() });
    }
    let norm = psi0.norm();
    if norm.is_nan() || (norm - 1.0).abs() >= NORM_TOLERANCE {
        return Err(Error::NotNormalized { norm });
    }
    Ok(())
}

fn eval(h: &impl Hamiltonian, tau: f64) -> Result<ComplexMatrix> {
    h.at(tau).map_err(|e| Error::StepFailed { tau, source: Box::new(e) })
}

fn midpoint_step(h: &impl Hamiltonian, psi: &StateVector, t0: f64, t1: f64, epsilon: f64) -> Result<StateVector> {
    let mid = 0.5 * (t0 + t1);
    let hm = eval(h, mid)?;
    unitary_step(&hm, (t1 - t0) / epsilon, psi).map_err(|e| Error::StepFailed { tau: mid, source: Box::new(e) })
}

/// dψ/dτ = −i H ψ / ε.
fn rhs(hm: &ComplexMatrix, psi: &[C64], epsilon: f64) -> Vec<C64> {
    let f = C64::new(0.0, -1.0 / epsilon);
    hm.apply(psi).into_iter().map(|z| z * f).collect()
}

fn axpy(y: &[C64], a: f64, x: &[C64]) -> Vec<C64> {
    y.iter().zip(x).map(|(y, x)| y + x * a).collect()
}

fn rk4_step(
    h_start: &ComplexMatrix,
    h_mid: &ComplexMatrix,
    h_end: &ComplexMatrix,
    psi: &[C64],
    dt: f64,
    epsilon: f64,
) -> Vec<C64> {
    let k1 = rhs(h_start, psi, epsilon);
    let k2 = rhs(h_mid, &axpy(psi, 0.5 * dt, &k1), epsilon);
    let k3 = rhs(h_mid, &axpy(psi, 0.5 * dt, &k2), epsilon);
    let k4 = rhs(h_end, &axpy(psi, dt, &k3), epsilon);
    (0..psi.len())
        .map(|i| psi[i] + (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) * (dt / 6.0))
        .collect()
}

/// Integrates from τ = 0 to τ = 1 and records the configured samples.
pub fn propagate(h: &impl Hamiltonian, psi0: &StateVector, cfg: &PropagationConfig) -> Result<TrajectoryRecord> {
    cfg.validate()?;
    check_initial(h, psi0)?;
    let recorded = cfg.recorded_steps();
    let mut next_record = 0;
    let mut record = TrajectoryRecord {
        epsilon: cfg.epsilon,
        tau_grid: Vec::with_capacity(recorded.len()),
        states: Vec::with_capacity(recorded.len()),
        populations: BTreeMap::new(),
        hamiltonian_elements: Vec::with_capacity(recorded.len()),
        norm_drift: 0.0,
    };
    let mut psi = psi0.clone();
    let mut h_start = match cfg.method {
        Method::Rk4 => Some(eval(h, 0.0)?),
        Method::MidpointExponential => None,
    };
    for k in 0..=cfg.steps {
        let tau = cfg.tau(k);
        if recorded[next_record] == k {
            let hk = match &h_start {
                Some(m) => m.clone(),
                None => eval(h, tau)?,
            };
            record.norm_drift = record.norm_drift.max((psi.norm() - 1.0).abs());
            record.tau_grid.push(tau);
            record.states.push(psi.clone());
            record.hamiltonian_elements.push(hk);
            next_record += 1;
        }
        if k == cfg.steps {
            break;
        }
        let t1 = cfg.tau(k + 1);
        psi = match cfg.method {
            Method::MidpointExponential => midpoint_step(h, &psi, tau, t1, cfg.epsilon)?,
            Method::Rk4 => {
                let h_mid = eval(h, 0.5 * (tau + t1))?;
                let h_end = eval(h, t1)?;
                let out = rk4_step(h_start.as_ref().unwrap(), &h_mid, &h_end, psi.amplitudes(), t1 - tau, cfg.epsilon);
                h_start = Some(h_end);
                StateVector::new(out)
            }
        };
    }
    Ok(record)
}

/// State after evolving from `tau_from` to `tau_to` in `steps` equal steps.
/// `tau_to < tau_from` runs backwards in time.
pub fn propagate_interval(
    h: &impl Hamiltonian,
    psi: &StateVector,
    tau_from: f64,
    tau_to: f64,
    steps: usize,
    epsilon: f64,
    method: Method,
) -> Result<StateVector> {
    PropagationConfig { epsilon, steps, method, record_stride: 1 }.validate()?;
    check_initial(h, psi)?;
    for t in [tau_from, tau_to] {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::TauOutOfRange { tau: t });
        }
    }
    let node = |k: usize| tau_from + (tau_to - tau_from) * (k as f64 / steps as f64);
    let mut psi = psi.clone();
    for k in 0..steps {
        let (t0, t1) = (node(k), node(k + 1));
        psi = match method {
            Method::MidpointExponential => midpoint_step(h, &psi, t0, t1, epsilon)?,
            Method::Rk4 => {
                let (a, m, b) = (eval(h, t0)?, eval(h, 0.5 * (t0 + t1))?, eval(h, t1)?);
                StateVector::new(rk4_step(&a, &m, &b, psi.amplitudes(), t1 - t0, epsilon))
            }
        };
    }
    Ok(psi)
}

/// Runs the final state of `record` back from τ = 1 to τ = 0 on the same step grid.
pub fn propagate_backward(h: &impl Hamiltonian, psi1: &StateVector, cfg: &PropagationConfig) -> Result<StateVector> {
    propagate_interval(h, psi1, 1.0, 0.0, cfg.steps, cfg.epsilon, cfg.method)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub step_counts: Vec<usize>,
    pub final_states: Vec<StateVector>,
    /// ‖ψ(2n) − ψ(n)‖ for successive step counts.
    pub differences: Vec<f64>,
}

impl ConvergenceReport {
    /// Successive difference ratios; ≈ 4 for a second-order scheme, ≈ 16 for fourth order.
    pub fn reduction_factors(&self) -> Vec<f64> {
        self.differences.windows(2).map(|w| w[0] / w[1]).collect()
    }

    /// log₂ of the reduction factors.
    pub fn observed_orders(&self) -> Vec<f64> {
        self.reduction_factors().into_iter().map(f64::log2).collect()
    }
}

/// Runs `steps`, `2·steps`, `4·steps` and reports successive final-state distances.
pub fn convergence_report(h: &impl Hamiltonian, psi0: &StateVector, cfg: &PropagationConfig) -> Result<ConvergenceReport> {
    convergence_ladder(h, psi0, cfg, 3)
}

/// As [`convergence_report`] with `levels` step counts `steps·2^j`.
pub fn convergence_ladder(
    h: &impl Hamiltonian,
    psi0: &StateVector,
    cfg: &PropagationConfig,
    levels: usize,
) -> Result<ConvergenceReport> {
    if levels < 2 {
        return Err(Error::invalid("a convergence ladder needs at least two levels"));
    }
    let mut step_counts = Vec::with_capacity(levels);
    let mut final_states = Vec::with_capacity(levels);
    for j in 0..levels {
        let n = cfg.steps << j;
        let c = PropagationConfig { steps: n, record_stride: n, ..*cfg };
        step_counts.push(n);
        final_states.push(propagate(h, psi0, &c)?.final_state().clone());
    }
    let differences = final_states.windows(2).map(|w| w[0].distance(&w[1])).collect();
    Ok(ConvergenceReport { step_counts, final_states, differences })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{ModelKind, ModelSpec};

    fn sigma_z(_: f64) -> ComplexMatrix {
        ComplexMatrix::diagonal(&[1.0, -1.0])
    }

    #[test]
    fn constant_hamiltonian_gives_dynamical_phase() {
        let cfg = PropagationConfig::new(0.5).with_steps(100);
        let rec = propagate(&sigma_z, &StateVector::basis(2, 0), &cfg).unwrap();
        let psi = rec.final_state().amplitudes();
        let expected = C64::from_polar(1.0, -2.0);
        assert!((psi[0] - expected).norm() < 1e-13);
        assert_eq!(psi[1], C64::new(0.0, 0.0));
    }

    #[test]
    fn records_include_both_ends() {
        let cfg = PropagationConfig::new(0.5).with_steps(10).with_record_stride(4);
        assert_eq!(cfg.recorded_steps(), vec![0, 4, 8, 10]);
        let rec = propagate(&sigma_z, &StateVector::basis(2, 0), &cfg).unwrap();
        assert_eq!(rec.tau_grid, vec![0.0, 0.4, 0.8, 1.0]);
        assert_eq!(rec.hamiltonian_elements.len(), 4);
    }

    #[test]
    fn rejects_unnormalized_input() {
        let psi = StateVector::new(vec![C64::new(1.0, 0.0), C64::new(1.0, 0.0)]);
        let err = propagate(&sigma_z, &psi, &PropagationConfig::new(0.5)).unwrap_err();
        assert!(matches!(err, Error::NotNormalized { .. }));
    }

    #[test]
    fn rejects_bad_config() {
        let psi = StateVector::basis(2, 0);
        assert!(propagate(&sigma_z, &psi, &PropagationConfig::new(-0.1)).is_err());
        assert!(propagate(&sigma_z, &psi, &PropagationConfig::new(0.1).with_steps(0)).is_err());
    }

    #[test]
    fn eigensolver_failure_reports_tau() {
        let bad = |tau: f64| {
            let mut m = ComplexMatrix::zeros(2);
            if tau > 0.5 {
                m[(0, 1)] = C64::new(1.0, 0.0);
            }
            m
        };
        let cfg = PropagationConfig::new(0.5).with_steps(4);
        match propagate(&bad, &StateVector::basis(2, 0), &cfg).unwrap_err() {
            Error::StepFailed { tau, source } => {
                assert_eq!(tau, 0.625);
                assert!(matches!(*source, Error::NotHermitian { .. }));
            }
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn backward_run_recovers_initial_state() {
        let m = ModelSpec::preset(ModelKind::SpinSweep);
        let cfg = PropagationConfig::new(0.2).with_steps(2000);
        let psi0 = StateVector::basis(2, 1);
        let rec = propagate(&m, &psi0, &cfg).unwrap();
        let back = propagate_backward(&m, rec.final_state(), &cfg).unwrap();
        assert!(back.distance(&psi0) < 1e-10);
    }

    #[test]
    fn constant_generator_is_exact_at_any_step_count() {
        let report = convergence_report(&sigma_z, &StateVector::basis(2, 0), &PropagationConfig::new(0.3).with_steps(8)).unwrap();
        assert_eq!(report.step_counts, vec![8, 16, 32]);
        assert!(report.differences.iter().all(|&d| d < 1e-12));
    }

    #[test]
    fn rk4_tracks_midpoint_on_smooth_sweep() {
        let m = ModelSpec::preset(ModelKind::SpinSweep);
        let psi0 = StateVector::basis(2, 1);
        let a = propagate(&m, &psi0, &PropagationConfig::new(0.2)).unwrap();
        let b = propagate(&m, &psi0, &PropagationConfig::new(0.2).with_method(Method::Rk4)).unwrap();
        assert!(a.final_state().distance(b.final_state()) < 1e-7);
        assert!(!b.norm_flagged());
    }
}
