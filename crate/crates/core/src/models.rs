//! Time-dependent model Hamiltonians.
//!
//! Four families are provided: a spin in a field of constant magnitude whose
//! direction sweeps from z to −z through x, a Landau–Zener crossing, a
//! three-level Λ system driven on two-photon resonance, and a three-mode
//! tight-binding stand-in for spatial adiabatic passage. All are real symmetric.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, EigenDecomposition};
use crate::schedule::Schedule;

/// A Hermitian generator H(τ) on τ ∈ [0, 1].
pub trait Hamiltonian {
    fn dim(&self) -> usize;
    fn at(&self, tau: f64) -> Result<ComplexMatrix>;
}

impl<F> Hamiltonian for F
where
    F: Fn(f64) -> ComplexMatrix,
{
    fn dim(&self) -> usize {
        self(0.0).dim()
    }

    fn at(&self, tau: f64) -> Result<ComplexMatrix> {
        Ok(self(tau))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ModelKind {
    SpinSweep,
    LandauZener,
    Stirap,
    SapThreeMode,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::SpinSweep => "spin_sweep",
            ModelKind::LandauZener => "landau_zener",
            ModelKind::Stirap => "stirap",
            ModelKind::SapThreeMode => "sap_three_mode",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        [ModelKind::SpinSweep, ModelKind::LandauZener, ModelKind::Stirap, ModelKind::SapThreeMode]
            .into_iter()
            .find(|k| k.name() == name)
    }

    pub fn dim(self) -> usize {
        match self {
            ModelKind::SpinSweep | ModelKind::LandauZener => 2,
            ModelKind::Stirap | ModelKind::SapThreeMode => 3,
        }
    }

    /// Schedule bindings the model reads.
    pub fn bindings(self) -> &'static [&'static str] {
        match self {
            ModelKind::SpinSweep => &["theta"],
            ModelKind::LandauZener => &["detuning", "coupling"],
            ModelKind::Stirap => &["pump", "stokes"],
            ModelKind::SapThreeMode => &["tunneling_12", "tunneling_23"],
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A model family with its schedule bindings.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    kind: ModelKind,
    /// Field magnitude H for the spin sweep; unused by the other families.
    field: f64,
    schedules: BTreeMap<&'static str, Schedule>,
}

impl ModelSpec {
    /// Builds and validates a model. Every binding the family reads must be
    /// supplied; unknown binding names are rejected.
    pub fn new(kind: ModelKind, field: f64, bindings: &[(&str, Schedule)]) -> Result<Self> {
        let mut schedules = BTreeMap::new();
        for (name, sched) in bindings {
            let key = kind
                .bindings()
                .iter()
                .find(|b| *b == name)
                .ok_or_else(|| Error::invalid(format!("model {kind} has no schedule binding `{name}`")))?;
            sched.validate()?;
            schedules.insert(*key, *sched);
        }
        for &b in kind.bindings() {
            if !schedules.contains_key(b) {
                return Err(Error::MissingBinding { model: kind.name(), binding: b });
            }
        }
        if kind == ModelKind::SpinSweep && !(field.is_finite() && field > 0.0) {
            return Err(Error::invalid(format!("field magnitude must be > 0, got {field}")));
        }
        Ok(ModelSpec { kind, field, schedules })
    }

    pub fn spin_sweep(field: f64, theta: Schedule) -> Result<Self> {
        Self::new(ModelKind::SpinSweep, field, &[("theta", theta)])
    }

    /// Default parameters for each family.
    pub fn preset(kind: ModelKind) -> Self {
        let bindings: Vec<(&str, Schedule)> = match kind {
            ModelKind::SpinSweep => vec![("theta", Schedule::default_ramp())],
            ModelKind::LandauZener => vec![
                ("detuning", Schedule::Linear { start: -20.0, end: 20.0 }),
                ("coupling", Schedule::GaussianPulse { amplitude: 2.0, center: 0.5, width: 0.15 }),
            ],
            ModelKind::Stirap => vec![
                ("pump", Schedule::GaussianPulse { amplitude: 10.0, center: 0.6, width: 0.12 }),
                ("stokes", Schedule::GaussianPulse { amplitude: 10.0, center: 0.4, width: 0.12 }),
            ],
            ModelKind::SapThreeMode => vec![
                ("tunneling_12", Schedule::GaussianPulse { amplitude: 10.0, center: 0.6, width: 0.12 }),
                ("tunneling_23", Schedule::GaussianPulse { amplitude: 10.0, center: 0.4, width: 0.12 }),
            ],
        };
        Self::new(kind, 1.0, &bindings).expect("presets are valid")
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn field(&self) -> f64 {
        self.field
    }

    pub fn schedule(&self, binding: &str) -> Option<&Schedule> {
        self.schedules.get(binding)
    }

    /// Copy with one binding replaced.
    pub fn with_schedule(&self, binding: &str, schedule: Schedule) -> Result<Self> {
        let bindings: Vec<(&str, Schedule)> = self
            .kind
            .bindings()
            .iter()
            .map(|&b| (b, if b == binding { schedule } else { self.schedules[b] }))
            .collect();
        if !self.kind.bindings().contains(&binding) {
            return Err(Error::invalid(format!("model {} has no schedule binding `{binding}`", self.kind)));
        }
        Self::new(self.kind, self.field, &bindings)
    }

    fn sched(&self, binding: &'static str) -> &Schedule {
        &self.schedules[binding]
    }

    fn require(&self, kind: ModelKind) -> Result<()> {
        if self.kind != kind {
            return Err(Error::WrongModel { expected: kind.name(), found: self.kind.name() });
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.kind.dim()
    }

    /// H(τ).
    pub fn hamiltonian(&self, tau: f64) -> Result<ComplexMatrix> {
        let r = |x: f64| C64::new(x, 0.0);
        match self.kind {
            ModelKind::SpinSweep => {
                let theta = self.sched("theta").value(tau)?;
                let (s, c) = theta.sin_cos();
                let h = self.field;
                ComplexMatrix::from_rows(&[vec![r(h * c), r(h * s)], vec![r(h * s), r(-h * c)]])
            }
            ModelKind::LandauZener => {
                let delta = self.sched("detuning").value(tau)?;
                let omega = self.sched("coupling").value(tau)?;
                ComplexMatrix::from_rows(&[
                    vec![r(0.5 * delta), r(0.5 * omega)],
                    vec![r(0.5 * omega), r(-0.5 * delta)],
                ])
            }
            ModelKind::Stirap => {
                let p = self.sched("pump").value(tau)?;
                let s = self.sched("stokes").value(tau)?;
                Ok(tridiagonal(0.5 * p, 0.5 * s))
            }
            ModelKind::SapThreeMode => {
                let j12 = self.sched("tunneling_12").value(tau)?;
                let j23 = self.sched("tunneling_23").value(tau)?;
                Ok(tridiagonal(-0.5 * j12, -0.5 * j23))
            }
        }
    }

    /// Closed-form eigensystem of the spin sweep: eigenvalues (−H, +H) with
    /// columns |λ₋⟩ = (sin θ/2, −cos θ/2) and |λ₊⟩ = (cos θ/2, sin θ/2).
    pub fn analytic_eigensystem(&self, tau: f64) -> Result<EigenDecomposition> {
        self.require(ModelKind::SpinSweep)?;
        let theta = self.sched("theta").value(tau)?;
        let (lm, lp) = spin_eigenvectors(theta);
        Ok(EigenDecomposition {
            values: vec![-self.field, self.field],
            vectors: ComplexMatrix::from_columns(&[lm.to_vec(), lp.to_vec()])?,
        })
    }

    /// Λ-system dark state (Ω₂₃, 0, −Ω₁₂)/norm.
    pub fn stirap_dark_state(&self, tau: f64) -> Result<[f64; 3]> {
        self.require(ModelKind::Stirap)?;
        let p = self.sched("pump").value(tau)?;
        let s = self.sched("stokes").value(tau)?;
        let n = p.hypot(s);
        if n == 0.0 {
            return Err(Error::invalid(format!("both pulses vanish at tau = {tau}")));
        }
        Ok([s / n, 0.0, -p / n])
    }
}

impl Hamiltonian for ModelSpec {
    fn dim(&self) -> usize {
        self.kind.dim()
    }

    fn at(&self, tau: f64) -> Result<ComplexMatrix> {
        self.hamiltonian(tau)
    }
}

fn tridiagonal(upper: f64, lower: f64) -> ComplexMatrix {
    ComplexMatrix::from_real_rows(&[
        vec![0.0, upper, 0.0],
        vec![upper, 0.0, lower],
        vec![0.0, lower, 0.0],
    ])
    .expect("3x3")
}

fn spin_eigenvectors(theta: f64) -> ([C64; 2], [C64; 2]) {
    let (s, c) = (0.5 * theta).sin_cos();
    let r = |x: f64| C64::new(x, 0.0);
    ([r(s), r(-c)], [r(c), r(s)])
}

/// Gauss–Legendre nodes and weights on [−1, 1].
const GL5: [(f64, f64); 5] = [
    (0.0, 0.568_888_888_888_888_9),
    (-0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
    (0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
    (-0.906_179_845_938_664, 0.236_926_885_056_189_1),
    (0.906_179_845_938_664, 0.236_926_885_056_189_1),
];

/// First-order superadiabatic quantities of the spin sweep at one τ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuperadiabaticCoefficients {
    pub theta: f64,
    pub theta_dot: f64,
    /// A₁ = θ'/4H.
    pub a1: f64,
    /// dA₁/dτ = θ''/4H.
    pub a1_dot: f64,
    /// B₁ = ∫₀^τ θ'²/8H dτ'.
    pub b1: f64,
}

impl SuperadiabaticCoefficients {
    /// 𝒩 = (1 + ε²(A₁² + B₁²))^(−1/2).
    pub fn normalization(&self, epsilon: f64) -> f64 {
        1.0 / (1.0 + epsilon * epsilon * (self.a1 * self.a1 + self.b1 * self.b1)).sqrt()
    }

    /// (|λ₋⁽¹⁾⟩, |λ₊⁽¹⁾⟩) in the fixed basis.
    pub fn states(&self, epsilon: f64) -> ([C64; 2], [C64; 2]) {
        let n = self.normalization(epsilon);
        let (lm, lp) = spin_eigenvectors(self.theta);
        let i = C64::new(0.0, 1.0);
        let ea = i * epsilon * self.a1;
        let minus_self = C64::new(1.0, epsilon * self.b1);
        let plus_self = C64::new(1.0, -epsilon * self.b1);
        let minus = [n * (ea * lp[0] + minus_self * lm[0]), n * (ea * lp[1] + minus_self * lm[1])];
        let plus = [n * (plus_self * lp[0] + ea * lm[0]), n * (plus_self * lp[1] + ea * lm[1])];
        (minus, plus)
    }
}

/// A₁, Ȧ₁, B₁ of the spin sweep on a τ grid (ascending, starting at 0).
/// B₁ is accumulated interval by interval with 5-point Gauss–Legendre.
pub fn superadiabatic_coefficients(model: &ModelSpec, grid: &[f64]) -> Result<Vec<SuperadiabaticCoefficients>> {
    model.require(ModelKind::SpinSweep)?;
    let theta = model.sched("theta");
    let h = model.field;
    let integrand = |t: f64| -> Result<f64> {
        let d = theta.derivative(t)?;
        Ok(d * d / (8.0 * h))
    };
    let mut out = Vec::with_capacity(grid.len());
    let mut b1 = 0.0;
    let mut prev = 0.0;
    for &tau in grid {
        if tau < prev {
            return Err(Error::invalid("grid must be ascending"));
        }
        let (mid, half) = (0.5 * (prev + tau), 0.5 * (tau - prev));
        if half > 0.0 {
            let mut acc = 0.0;
            for &(x, w) in &GL5 {
                acc += w * integrand(mid + half * x)?;
            }
            b1 += half * acc;
        }
        prev = tau;
        let (th, dth, ddth) = theta.jet(tau)?;
        out.push(SuperadiabaticCoefficients {
            theta: th,
            theta_dot: dth,
            a1: dth / (4.0 * h),
            a1_dot: ddth / (4.0 * h),
            b1,
        });
    }
    Ok(out)
}
