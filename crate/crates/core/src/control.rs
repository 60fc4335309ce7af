//! Counterdiabatic drives.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::frames::EigenFrame;
use crate::linalg::{hermitian_spectral_norm, ComplexMatrix, HERMITIAN_TOLERANCE};
use crate::models::{superadiabatic_coefficients, Hamiltonian, ModelKind, ModelSpec, SuperadiabaticCoefficients};

/// A drive sampled on a τ grid, expressed in the fixed basis.
#[derive(Debug, Clone, PartialEq)]
pub struct DriveSpec {
    /// Frame whose states the drive makes exact: 0 adiabatic, 1 first superadiabatic.
    pub target_frame_order: usize,
    pub include_berry_term: bool,
    pub epsilon: f64,
    pub tau_grid: Vec<f64>,
    pub sampled_drive: Vec<ComplexMatrix>,
}

impl DriveSpec {
    /// Identically zero drive on `grid`.
    pub fn zero(dim: usize, epsilon: f64, grid: &[f64]) -> Self {
        DriveSpec {
            target_frame_order: 0,
            include_berry_term: true,
            epsilon,
            tau_grid: grid.to_vec(),
            sampled_drive: vec![ComplexMatrix::zeros(dim); grid.len()],
        }
    }

    pub fn dim(&self) -> Option<usize> {
        self.sampled_drive.first().map(ComplexMatrix::dim)
    }

    pub fn len(&self) -> usize {
        self.tau_grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tau_grid.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        if self.tau_grid.len() != self.sampled_drive.len() {
            return Err(Error::DimensionMismatch { expected: self.tau_grid.len(), found: self.sampled_drive.len() });
        }
        if self.tau_grid.len() < 2 {
            return Err(Error::invalid("a drive needs at least two samples"));
        }
        if self.tau_grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid("drive grid must be strictly increasing"));
        }
        if self.tau_grid[0] != 0.0 || *self.tau_grid.last().unwrap() != 1.0 {
            return Err(Error::invalid("drive grid must span [0, 1]"));
        }
        for d in &self.sampled_drive {
            let (row, col, deviation) = d.hermiticity_violation();
            if deviation > HERMITIAN_TOLERANCE {
                return Err(Error::NotHermitian { row, col, deviation });
            }
        }
        Ok(())
    }

    /// Linear interpolation between samples.
    pub fn at(&self, tau: f64) -> Result<ComplexMatrix> {
        let last = self.len() - 1;
        if !(self.tau_grid[0]..=self.tau_grid[last]).contains(&tau) {
            return Err(Error::TauOutOfRange { tau });
        }
        let i = self.tau_grid.partition_point(|&t| t <= tau).clamp(1, last);
        let (t0, t1) = (self.tau_grid[i - 1], self.tau_grid[i]);
        let w = (tau - t0) / (t1 - t0);
        Ok(&self.sampled_drive[i - 1].scale_real(1.0 - w) + &self.sampled_drive[i].scale_real(w))
    }
}

/// Transitionless drive for the adiabatic frame,
/// H_CD = iε Σ_n (|∂n⟩⟨n| − ⟨n|∂n⟩|n⟩⟨n|). In frame coordinates this is −εV
/// with the diagonal removed when `include_berry` is set, and −εV otherwise.
pub fn counterdiabatic(f: &EigenFrame, epsilon: f64, include_berry: bool) -> Result<DriveSpec> {
    if f.order != 0 {
        return Err(Error::invalid("counterdiabatic drive is built from the adiabatic frame"));
    }
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(Error::invalid(format!("epsilon must be > 0, got {epsilon}")));
    }
    let sampled_drive = f
        .basis
        .iter()
        .zip(&f.couplings)
        .map(|(u, v)| {
            let v = if include_berry { v.without_diagonal() } else { v.clone() };
            u.matmul(&v.scale_real(-epsilon)).matmul(&u.adjoint()).hermitian_part()
        })
        .collect();
    Ok(DriveSpec {
        target_frame_order: 0,
        include_berry_term: include_berry,
        epsilon,
        tau_grid: f.tau_grid.clone(),
        sampled_drive,
    })
}

/// Closed-form correction [[δ, ω], [ω*, −δ]] that makes the first
/// superadiabatic states of the spin sweep exact.
pub fn superadiabatic_correction_at(c: &SuperadiabaticCoefficients, epsilon: f64) -> ComplexMatrix {
    let (s, co) = c.theta.sin_cos();
    let (a, ad, b, thd) = (c.a1, c.a1_dot, c.b1, c.theta_dot);
    let n2 = c.normalization(epsilon).powi(2);
    let n4 = n2 * n2;
    let (e2, e3, e4) = (epsilon.powi(2), epsilon.powi(3), epsilon.powi(4));
    let delta = e2 * n2 * ((co * a - s * b) * thd / 2.0 - s * ad)
        - e4 * n4 * a * a * thd / 2.0 * (2.0 * a * co + 2.0 * b * s);
    let omega_re = e2 * n2 * (co * ad + (b * co + n2 * a * s) * thd / 2.0)
        + e4 * n4 * thd * a * (co * a * b + s * (b * b - a * a) / 2.0);
    let omega_im = e3 * n2 * (n2 * a * a * thd - b * b * thd / 2.0 - ad * b);
    let omega = C64::new(omega_re, omega_im);
    ComplexMatrix::from_rows(&[vec![C64::new(delta, 0.0), omega], vec![omega.conj(), C64::new(-delta, 0.0)]])
        .expect("2x2")
}

/// H_corr⁽¹⁾ of the spin sweep sampled on `grid`.
pub fn superadiabatic_correction_two_level(m: &ModelSpec, epsilon: f64, grid: &[f64]) -> Result<DriveSpec> {
    if m.kind() != ModelKind::SpinSweep {
        return Err(Error::WrongModel { expected: ModelKind::SpinSweep.name(), found: m.kind().name() });
    }
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(Error::invalid(format!("epsilon must be > 0, got {epsilon}")));
    }
    let coeffs = superadiabatic_coefficients(m, grid)?;
    Ok(DriveSpec {
        target_frame_order: 1,
        include_berry_term: true,
        epsilon,
        tau_grid: grid.to_vec(),
        sampled_drive: coeffs.iter().map(|c| superadiabatic_correction_at(c, epsilon)).collect(),
    })
}

/// (peak, ∫₀¹) of the spectral norm of the drive; the integral is a trapezoid sum.
pub fn drive_strength(d: &DriveSpec) -> Result<(f64, f64)> {
    if d.sampled_drive.is_empty() {
        return Err(Error::invalid("drive has no samples"));
    }
    let norms = d.sampled_drive.iter().map(hermitian_spectral_norm).collect::<Result<Vec<_>>>()?;
    let peak = norms.iter().copied().fold(0.0, f64::max);
    let integral = d.tau_grid.windows(2).zip(norms.windows(2)).map(|(t, n)| 0.5 * (t[1] - t[0]) * (n[0] + n[1])).sum();
    Ok((peak, integral))
}

/// H(τ) + drive(τ).
#[derive(Debug, Clone)]
pub struct DrivenHamiltonian<'a, H> {
    base: &'a H,
    drive: &'a DriveSpec,
}

impl<H: Hamiltonian> Hamiltonian for DrivenHamiltonian<'_, H> {
    fn dim(&self) -> usize {
        self.base.dim()
    }

    fn at(&self, tau: f64) -> Result<ComplexMatrix> {
        Ok(&self.base.at(tau)? + &self.drive.at(tau)?)
    }
}

pub fn driven_hamiltonian<'a, H: Hamiltonian>(m: &'a H, d: &'a DriveSpec) -> Result<DrivenHamiltonian<'a, H>> {
    d.validate()?;
    if d.dim() != Some(m.dim()) {
        return Err(Error::DimensionMismatch { expected: m.dim(), found: d.dim().unwrap_or(0) });
    }
    Ok(DrivenHamiltonian { base: m, drive: d })
}
