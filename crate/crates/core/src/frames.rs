//! Adiabatic and superadiabatic frames.
//!
//! A frame is a τ-sampled orthonormal basis with energies and the coupling
//! matrix generated by its rotation. Order 0 diagonalizes H(τ). Order k+1
//! diagonalizes diag(E⁽ᵏ⁾) + εᵏ⁺¹V⁽ᵏ⁾ exactly in frame-k coordinates, so the
//! residual generator seen by the amplitudes shrinks by one power of ε per level.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::linalg::{eigh, gauge_pivot, inner, unitary_exp, ComplexMatrix, EigenDecomposition};
use crate::models::{superadiabatic_coefficients, Hamiltonian, ModelSpec};
use crate::propagator::TrajectoryRecord;

pub const MAX_FRAME_ORDER: usize = 4;
pub const DEFAULT_FRAME_POINTS: usize = 4001;
/// Matching is refused when the best and second-best overlaps are closer than this.
pub const AMBIGUITY_MARGIN: f64 = 0.1;
/// Trajectory and frame samples are considered the same τ within this distance.
pub const GRID_MATCH_TOLERANCE: f64 = 1e-12;

/// `points` equally spaced samples on [0, 1].
pub fn uniform_grid(points: usize) -> Vec<f64> {
    let n = (points.max(2) - 1) as f64;
    (0..points.max(2)).map(|k| k as f64 / n).collect()
}

fn validate_grid(grid: &[f64]) -> Result<()> {
    if grid.len() < 3 {
        return Err(Error::invalid(format!("frame grid needs at least 3 points, got {}", grid.len())));
    }
    for &t in grid {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::TauOutOfRange { tau: t });
        }
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("frame grid must be strictly increasing"));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenFrame {
    /// 0 for the adiabatic frame.
    pub order: usize,
    /// ε used to build orders ≥ 1.
    pub epsilon: Option<f64>,
    pub tau_grid: Vec<f64>,
    pub energies: Vec<Vec<f64>>,
    /// Columns are the frame states in the fixed basis.
    pub basis: Vec<ComplexMatrix>,
    /// V⁽ᵏ⁾ per sample, in frame coordinates.
    pub couplings: Vec<ComplexMatrix>,
}

impl EigenFrame {
    pub fn dim(&self) -> usize {
        self.basis[0].dim()
    }

    pub fn len(&self) -> usize {
        self.tau_grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tau_grid.is_empty()
    }

    pub fn state(&self, sample: usize, n: usize) -> Vec<C64> {
        self.basis[sample].column(n)
    }

    pub fn sample_index(&self, tau: f64) -> Result<usize> {
        let i = self.tau_grid.partition_point(|&t| t < tau - GRID_MATCH_TOLERANCE);
        if i < self.len() && (self.tau_grid[i] - tau).abs() <= GRID_MATCH_TOLERANCE {
            Ok(i)
        } else {
            Err(Error::GridMismatch { tau })
        }
    }

    /// |⟨n|ψ⟩|² for each frame state at one sample.
    pub fn populations_at(&self, sample: usize, psi: &[C64]) -> Vec<f64> {
        (0..self.dim()).map(|n| inner(&self.state(sample, n), psi).norm_sqr()).collect()
    }

    /// Largest Hermiticity defect of the stored couplings.
    pub fn coupling_hermiticity_violation(&self) -> f64 {
        self.couplings.iter().map(|v| v.hermiticity_violation().2).fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PerturbedBasis {
    pub epsilon: f64,
    pub tau_grid: Vec<f64>,
    /// Normalized first-order states as columns.
    pub states: Vec<ComplexMatrix>,
    /// M_{k,n} = V_{k,n} / (E_n − E_k), zero diagonal.
    pub mixing: Vec<ComplexMatrix>,
}

/// Continuity tracking of per-sample eigensystems: columns are matched to the
/// previous sample by maximal overlap, and a per-state phase is carried so the
/// eigensolver gauge stays smooth. The phase is re-aligned only where that
/// gauge jumps (pivot change) or the overlap stops being positive.
fn track(grid: &[f64], eigs: Vec<EigenDecomposition>) -> Result<(Vec<Vec<f64>>, Vec<ComplexMatrix>)> {
    let dim = eigs[0].dim();
    let mut energies = Vec::with_capacity(eigs.len());
    let mut bases: Vec<ComplexMatrix> = Vec::with_capacity(eigs.len());
    let mut chi = vec![0.0_f64; dim];
    let mut pivots: Vec<usize> = Vec::new();
    for (j, eig) in eigs.into_iter().enumerate() {
        let tau = grid[j];
        if eig.is_degenerate() {
            return Err(Error::Degenerate { tau, gap: eig.min_gap() });
        }
        let raw: Vec<Vec<C64>> = (0..dim).map(|m| eig.vector(m)).collect();
        if j == 0 {
            pivots = raw.iter().map(|c| gauge_pivot(c)).collect();
            energies.push(eig.values.clone());
            bases.push(ComplexMatrix::from_columns(&raw)?);
            continue;
        }
        let prev = &bases[j - 1];
        let mut perm = vec![usize::MAX; dim];
        let mut taken = vec![false; dim];
        for (n, slot) in perm.iter_mut().enumerate() {
            let p = prev.column(n);
            let mut ov: Vec<(f64, usize)> = raw.iter().enumerate().map(|(m, c)| (inner(&p, c).norm(), m)).collect();
            ov.sort_by(|a, b| b.0.total_cmp(&a.0));
            let second = ov.get(1).map_or(0.0, |o| o.0);
            if ov[0].0 - second < AMBIGUITY_MARGIN || taken[ov[0].1] {
                return Err(Error::AmbiguousMatching { tau, best: ov[0].0, second });
            }
            taken[ov[0].1] = true;
            *slot = ov[0].1;
        }
        let mut cols = Vec::with_capacity(dim);
        let mut values = Vec::with_capacity(dim);
        for n in 0..dim {
            let r = &raw[perm[n]];
            let pivot = gauge_pivot(r);
            let mut col: Vec<C64> = r.iter().map(|z| z * C64::from_polar(1.0, chi[n])).collect();
            let ov = inner(&prev.column(n), &col);
            if pivot != pivots[n] || ov.re <= 0.0 {
                let shift = -ov.arg();
                chi[n] += shift;
                let rot = C64::from_polar(1.0, shift);
                col.iter_mut().for_each(|z| *z *= rot);
            }
            pivots[n] = pivot;
            values.push(eig.values[perm[n]]);
            cols.push(col);
        }
        energies.push(values);
        bases.push(ComplexMatrix::from_columns(&cols)?);
    }
    Ok((energies, bases))
}

/// dU/dτ at every sample with the three-point non-uniform stencil, one-sided
/// at the ends.
fn derivatives(grid: &[f64], mats: &[ComplexMatrix]) -> Vec<ComplexMatrix> {
    let n = grid.len();
    let combine = |a: f64, ma: &ComplexMatrix, b: f64, mb: &ComplexMatrix, c: f64, mc: &ComplexMatrix| {
        &(&ma.scale_real(a) + &mb.scale_real(b)) + &mc.scale_real(c)
    };
    (0..n)
        .map(|j| {
            if j == 0 {
                let (h1, h2) = (grid[1] - grid[0], grid[2] - grid[1]);
                combine(
                    -(2.0 * h1 + h2) / (h1 * (h1 + h2)),
                    &mats[0],
                    (h1 + h2) / (h1 * h2),
                    &mats[1],
                    -h1 / (h2 * (h1 + h2)),
                    &mats[2],
                )
            } else if j == n - 1 {
                let (h1, h2) = (grid[j] - grid[j - 1], grid[j - 1] - grid[j - 2]);
                combine(
                    (2.0 * h1 + h2) / (h1 * (h1 + h2)),
                    &mats[j],
                    -(h1 + h2) / (h1 * h2),
                    &mats[j - 1],
                    h1 / (h2 * (h1 + h2)),
                    &mats[j - 2],
                )
            } else {
                let (h1, h2) = (grid[j] - grid[j - 1], grid[j + 1] - grid[j]);
                combine(
                    -h2 / (h1 * (h1 + h2)),
                    &mats[j - 1],
                    (h2 - h1) / (h1 * h2),
                    &mats[j],
                    h1 / (h2 * (h1 + h2)),
                    &mats[j + 1],
                )
            }
        })
        .collect()
}

/// −i·U†∂τU per sample, restricted to its anti-Hermitian part before the
/// factor so the result is Hermitian by construction.
fn connection(grid: &[f64], rotations: &[ComplexMatrix]) -> Vec<ComplexMatrix> {
    derivatives(grid, rotations)
        .iter()
        .zip(rotations)
        .map(|(d, u)| u.adjoint().matmul(d).antihermitian_part().scale(C64::new(0.0, -1.0)))
        .collect()
}

/// Order-0 frame of H on `grid`.
pub fn adiabatic_frame(h: &impl Hamiltonian, grid: &[f64]) -> Result<EigenFrame> {
    validate_grid(grid)?;
    let eigs = grid.iter().map(|&t| eigh(&h.at(t)?)).collect::<Result<Vec<_>>>()?;
    let (energies, basis) = track(grid, eigs)?;
    let couplings = connection(grid, &basis);
    Ok(EigenFrame { order: 0, epsilon: None, tau_grid: grid.to_vec(), energies, basis, couplings })
}

/// Frame of order k+1 from frame k.
pub fn superadiabatic_frame(f: &EigenFrame, epsilon: f64) -> Result<EigenFrame> {
    let order = f.order + 1;
    if order > MAX_FRAME_ORDER {
        return Err(Error::OrderTooHigh { requested: order, max: MAX_FRAME_ORDER });
    }
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(Error::invalid(format!("epsilon must be > 0, got {epsilon}")));
    }
    if let Some(e) = f.epsilon {
        if e != epsilon {
            return Err(Error::invalid(format!("frame of order {} was built for epsilon {e}, not {epsilon}", f.order)));
        }
    }
    let scale = epsilon.powi(order as i32);
    let eigs = (0..f.len())
        .map(|j| {
            let d = &ComplexMatrix::diagonal(&f.energies[j]) + &f.couplings[j].scale_real(scale);
            eigh(&d)
        })
        .collect::<Result<Vec<_>>>()?;
    let (energies, rotations) = track(&f.tau_grid, eigs)?;
    let basis = f.basis.iter().zip(&rotations).map(|(u, w)| u.matmul(w)).collect();
    let couplings = connection(&f.tau_grid, &rotations)
        .into_iter()
        .map(|v| v.without_diagonal().scale_real(1.0 / scale))
        .collect();
    Ok(EigenFrame { order, epsilon: Some(epsilon), tau_grid: f.tau_grid.clone(), energies, basis, couplings })
}

/// Frames of orders 0..=max_order.
pub fn frame_hierarchy(h: &impl Hamiltonian, grid: &[f64], epsilon: f64, max_order: usize) -> Result<Vec<EigenFrame>> {
    if max_order > MAX_FRAME_ORDER {
        return Err(Error::OrderTooHigh { requested: max_order, max: MAX_FRAME_ORDER });
    }
    let mut frames = vec![adiabatic_frame(h, grid)?];
    for _ in 0..max_order {
        let next = superadiabatic_frame(frames.last().unwrap(), epsilon)?;
        frames.push(next);
    }
    Ok(frames)
}

/// First-order perturbed states |n⁽¹⁾⟩ = |n⟩ + ε Σ_k M_{k,n} |k⟩, normalized.
pub fn perturbed_basis(f: &EigenFrame, epsilon: f64) -> Result<PerturbedBasis> {
    if f.order != 0 {
        return Err(Error::invalid("perturbed basis is built from the adiabatic frame"));
    }
    let dim = f.dim();
    let mut states = Vec::with_capacity(f.len());
    let mut mixing = Vec::with_capacity(f.len());
    for j in 0..f.len() {
        let e = &f.energies[j];
        let v = &f.couplings[j];
        let radius = e.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
        let mut m = ComplexMatrix::zeros(dim);
        for k in 0..dim {
            for n in 0..dim {
                if k == n {
                    continue;
                }
                let gap = e[n] - e[k];
                if gap.abs() <= crate::linalg::DEGENERACY_RELATIVE_GAP * radius {
                    return Err(Error::Degenerate { tau: f.tau_grid[j], gap: gap.abs() });
                }
                m[(k, n)] = v[(k, n)] / gap;
            }
        }
        let u = &f.basis[j];
        let cols: Vec<Vec<C64>> = (0..dim)
            .map(|n| {
                let mut c = u.column(n);
                for k in (0..dim).filter(|&k| k != n) {
                    let w = m[(k, n)] * epsilon;
                    for (ci, uk) in c.iter_mut().zip(u.column(k)) {
                        *ci += w * uk;
                    }
                }
                let norm = c.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                c.into_iter().map(|z| z / norm).collect()
            })
            .collect();
        states.push(ComplexMatrix::from_columns(&cols)?);
        mixing.push(m);
    }
    Ok(PerturbedBasis { epsilon, tau_grid: f.tau_grid.clone(), states, mixing })
}

/// Order-1 frame of the spin sweep built from the closed-form states
/// λ₋⁽¹⁾, λ₊⁽¹⁾. Energies are those of the adiabatic frame; couplings are
/// −iε⁻¹ times the off-diagonal rotation connection relative to it.
pub fn analytic_superadiabatic_frame(model: &ModelSpec, epsilon: f64, grid: &[f64]) -> Result<EigenFrame> {
    validate_grid(grid)?;
    let coeffs = superadiabatic_coefficients(model, grid)?;
    let mut energies = Vec::with_capacity(grid.len());
    let mut basis = Vec::with_capacity(grid.len());
    let mut rotations = Vec::with_capacity(grid.len());
    for (j, c) in coeffs.iter().enumerate() {
        let adiabatic = model.analytic_eigensystem(grid[j])?;
        let (minus, plus) = c.states(epsilon);
        let u = ComplexMatrix::from_columns(&[minus.to_vec(), plus.to_vec()])?;
        rotations.push(adiabatic.vectors.adjoint().matmul(&u));
        energies.push(adiabatic.values);
        basis.push(u);
    }
    let couplings = connection(grid, &rotations)
        .into_iter()
        .map(|v| v.without_diagonal().scale_real(1.0 / epsilon))
        .collect();
    Ok(EigenFrame { order: 1, epsilon: Some(epsilon), tau_grid: grid.to_vec(), energies, basis, couplings })
}

/// |⟨n(τ)|ψ(τ)⟩|² at every recorded sample.
pub fn project_populations(t: &TrajectoryRecord, f: &EigenFrame) -> Result<Vec<Vec<f64>>> {
    if let Some(s) = t.states.first() {
        if s.dim() != f.dim() {
            return Err(Error::DimensionMismatch { expected: f.dim(), found: s.dim() });
        }
    }
    t.tau_grid
        .iter()
        .zip(&t.states)
        .map(|(&tau, psi)| Ok(f.populations_at(f.sample_index(tau)?, psi.amplitudes())))
        .collect()
}

/// φ_n = ∫₀¹ i⟨n|∂τn⟩ dτ by the trapezoid rule.
pub fn berry_phase(f: &EigenFrame, n: usize) -> Result<f64> {
    if f.order != 0 {
        return Err(Error::invalid("Berry phases are defined on the adiabatic frame"));
    }
    if n >= f.dim() {
        return Err(Error::invalid(format!("state index {n} out of range for dimension {}", f.dim())));
    }
    // i⟨n|∂n⟩ = −V_nn.
    let g: Vec<f64> = f.couplings.iter().map(|v| -v[(n, n)].re).collect();
    Ok(f.tau_grid.windows(2).zip(g.windows(2)).map(|(t, y)| 0.5 * (t[1] - t[0]) * (y[0] + y[1])).sum())
}

/// Off-diagonal Frobenius norm of exp(−S)(H⁽⁰⁾ + εV⁽⁰⁾)exp(S) in the
/// adiabatic eigenbasis at τ, with S_{n,m} = εV_{n,m}/(E_m − E_n).
pub fn schrieffer_wolff_residual(f: &EigenFrame, epsilon: f64, tau: f64) -> Result<f64> {
    if f.order != 0 {
        return Err(Error::invalid("the Schrieffer-Wolff check uses the adiabatic frame"));
    }
    let j = f.sample_index(tau)?;
    let e = &f.energies[j];
    let v = &f.couplings[j];
    let dim = f.dim();
    let radius = e.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    let mut s = ComplexMatrix::zeros(dim);
    for n in 0..dim {
        for m in 0..dim {
            if n != m {
                let gap = e[m] - e[n];
                if gap.abs() <= crate::linalg::DEGENERACY_RELATIVE_GAP * radius {
                    return Err(Error::Degenerate { tau, gap: gap.abs() });
                }
                s[(n, m)] = v[(n, m)] * (epsilon / gap);
            }
        }
    }
    // S is anti-Hermitian, so iS is Hermitian and exp(S) = exp(−i·(iS)).
    let is = s.scale(C64::new(0.0, 1.0)).hermitian_part();
    let exp_s = unitary_exp(&is, 1.0)?;
    let h = &ComplexMatrix::diagonal(e) + &v.scale_real(epsilon);
    let rotated = exp_s.adjoint().matmul(&h).matmul(&exp_s);
    Ok(rotated.off_diagonal_norm())
}
