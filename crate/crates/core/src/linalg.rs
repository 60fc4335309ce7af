//! Dense complex linear algebra for small Hilbert spaces.
//!
//! Everything here is sized for 2 ≤ N ≤ ~32: matrices are stored row-major in a
//! flat `Vec`, Hermitian eigenproblems are solved by cyclic complex Jacobi
//! rotations, and matrix exponentials of Hermitian generators always go through
//! the eigendecomposition so that the resulting propagators are unitary to
//! rounding.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Largest |H_ij − conj(H_ji)| accepted by [`eigh`].
pub const HERMITIAN_TOLERANCE: f64 = 1e-10;
/// Jacobi stops once the off-diagonal Frobenius norm drops below this fraction of ‖H‖_F.
pub const JACOBI_RELATIVE_TOLERANCE: f64 = 1e-13;
pub const JACOBI_MAX_SWEEPS: usize = 100;
/// Eigenvalue gaps below this fraction of the spectral radius count as degenerate.
pub const DEGENERACY_RELATIVE_GAP: f64 = 1e-9;
/// Entries whose magnitude is within this relative margin of the column maximum
/// are treated as tied when picking the gauge pivot; the lowest index wins.
const GAUGE_TIE_MARGIN: f64 = 1e-10;

/// Dense N×N complex matrix, row-major.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        ComplexMatrix { dim, data: vec![C64::new(0.0, 0.0); dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                data.push(f(i, j));
            }
        }
        ComplexMatrix { dim, data }
    }

    /// Builds a matrix from row slices; every row must have `rows.len()` entries.
    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let dim = rows.len();
        if let Some(bad) = rows.iter().find(|r| r.len() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, found: bad.len() });
        }
        Ok(ComplexMatrix { dim, data: rows.iter().flatten().copied().collect() })
    }

    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let rows: Vec<Vec<C64>> =
            rows.iter().map(|r| r.iter().map(|&x| C64::new(x, 0.0)).collect()).collect();
        Self::from_rows(&rows)
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let mut m = Self::zeros(values.len());
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = C64::new(v, 0.0);
        }
        m
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_columns(columns: &[Vec<C64>]) -> Result<Self> {
        let dim = columns.len();
        if let Some(bad) = columns.iter().find(|c| c.len() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, found: bad.len() });
        }
        Ok(Self::from_fn(dim, |i, j| columns[j][i]))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.dim).map(|i| self[(i, j)]).collect()
    }

    pub fn set_column(&mut self, j: usize, col: &[C64]) {
        for (i, &z) in col.iter().enumerate() {
            self[(i, j)] = z;
        }
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self[(j, i)].conj())
    }

    pub fn scale(&self, factor: C64) -> Self {
        ComplexMatrix { dim: self.dim, data: self.data.iter().map(|&z| z * factor).collect() }
    }

    pub fn scale_real(&self, factor: f64) -> Self {
        ComplexMatrix { dim: self.dim, data: self.data.iter().map(|&z| z * factor).collect() }
    }

    pub fn matmul(&self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "matmul dimension mismatch");
        let n = self.dim;
        let mut out = ComplexMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * rhs.data[k * n + j];
                }
            }
        }
        out
    }

    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(self.dim, v.len(), "matrix-vector dimension mismatch");
        let n = self.dim;
        (0..n)
            .map(|i| self.data[i * n..(i + 1) * n].iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `(self + self†) / 2`.
    pub fn hermitian_part(&self) -> Self {
        Self::from_fn(self.dim, |i, j| (self[(i, j)] + self[(j, i)].conj()) * 0.5)
    }

    /// `(self − self†) / 2`.
    pub fn antihermitian_part(&self) -> Self {
        Self::from_fn(self.dim, |i, j| (self[(i, j)] - self[(j, i)].conj()) * 0.5)
    }

    /// Worst Hermiticity violation as `(row, col, |H_ij − conj(H_ji)|)`.
    pub fn hermiticity_violation(&self) -> (usize, usize, f64) {
        let mut worst = (0, 0, 0.0);
        for i in 0..self.dim {
            for j in i..self.dim {
                let d = (self[(i, j)] - self[(j, i)].conj()).norm();
                if d > worst.2 {
                    worst = (i, j, d);
                }
            }
        }
        worst
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Frobenius norm of the strictly off-diagonal part.
    pub fn off_diagonal_norm(&self) -> f64 {
        let n = self.dim;
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    acc += self.data[i * n + j].norm_sqr();
                }
            }
        }
        acc.sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Copy with the diagonal set to zero.
    pub fn without_diagonal(&self) -> Self {
        let mut m = self.clone();
        for i in 0..self.dim {
            m[(i, i)] = C64::new(0.0, 0.0);
        }
        m
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.dim + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.dim + j]
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "add dimension mismatch");
        ComplexMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "sub dimension mismatch");
        ComplexMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs)
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix({}x{})", self.dim, self.dim)?;
        for i in 0..self.dim {
            let row: Vec<String> =
                (0..self.dim).map(|j| format!("{:+.6e}{:+.6e}i", self[(i, j)].re, self[(i, j)].im)).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

/// State amplitudes |ψ⟩ in a fixed basis.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector(Vec<C64>);

impl StateVector {
    pub fn new(amplitudes: Vec<C64>) -> Self {
        StateVector(amplitudes)
    }

    /// Unit vector along basis direction `k`.
    pub fn basis(dim: usize, k: usize) -> Self {
        let mut v = vec![C64::new(0.0, 0.0); dim];
        v[k] = C64::new(1.0, 0.0);
        StateVector(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.0
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.0
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// ⟨self|other⟩.
    pub fn inner(&self, other: &StateVector) -> C64 {
        inner(&self.0, &other.0)
    }

    pub fn distance(&self, other: &StateVector) -> f64 {
        self.0.iter().zip(&other.0).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt()
    }
}

/// ⟨a|b⟩ for raw amplitude slices.
pub fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Hermitian eigendecomposition: ascending eigenvalues with orthonormal,
/// gauge-fixed eigenvector columns.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenDecomposition {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

impl EigenDecomposition {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn vector(&self, k: usize) -> Vec<C64> {
        self.vectors.column(k)
    }

    /// Smallest gap between consecutive eigenvalues (∞ for N = 1).
    pub fn min_gap(&self) -> f64 {
        self.values.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min)
    }

    pub fn spectral_radius(&self) -> f64 {
        self.values.iter().map(|v| v.abs()).fold(0.0, f64::max)
    }

    /// True if some gap is at or below `1e-9·‖H‖`.
    pub fn is_degenerate(&self) -> bool {
        self.dim() > 1 && self.min_gap() <= DEGENERACY_RELATIVE_GAP * self.spectral_radius()
    }

    /// V·diag(λ)·V†.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let v = &self.vectors;
        let scaled = ComplexMatrix::from_fn(self.dim(), |i, j| v[(i, j)] * self.values[j]);
        scaled.matmul(&v.adjoint())
    }

    /// V·diag(f(λ))·V†.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> C64) -> ComplexMatrix {
        let v = &self.vectors;
        let phases: Vec<C64> = self.values.iter().map(|&l| f(l)).collect();
        let scaled = ComplexMatrix::from_fn(self.dim(), |i, j| v[(i, j)] * phases[j]);
        scaled.matmul(&v.adjoint())
    }
}

/// Index of the gauge pivot: the entry of largest magnitude, lowest index on ties.
pub fn gauge_pivot(column: &[C64]) -> usize {
    let max = column.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let threshold = max * (1.0 - GAUGE_TIE_MARGIN);
    column.iter().position(|z| z.norm() >= threshold).unwrap_or(0)
}

/// Rotates `column` so its pivot entry is real and non-negative.
pub fn fix_gauge(column: &mut [C64]) {
    let p = gauge_pivot(column);
    let pivot = column[p];
    let mag = pivot.norm();
    if mag == 0.0 {
        return;
    }
    let phase = pivot.conj() / mag;
    for z in column.iter_mut() {
        *z *= phase;
    }
    column[p] = C64::new(mag, 0.0);
}

/// Hermitian eigendecomposition by cyclic complex Jacobi rotations.
///
/// Rejects input whose Hermiticity violation exceeds [`HERMITIAN_TOLERANCE`];
/// the input is symmetrized before rotating.
pub fn eigh(h: &ComplexMatrix) -> Result<EigenDecomposition> {
    let (row, col, deviation) = h.hermiticity_violation();
    if deviation > HERMITIAN_TOLERANCE || deviation.is_nan() {
        return Err(Error::NotHermitian { row, col, deviation });
    }
    let n = h.dim();
    let mut a = h.hermitian_part();
    let mut v = ComplexMatrix::identity(n);
    let tol = JACOBI_RELATIVE_TOLERANCE * a.frobenius_norm();

    let mut converged = false;
    for _ in 0..JACOBI_MAX_SWEEPS {
        if a.off_diagonal_norm() <= tol {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(&mut a, &mut v, p, q);
            }
        }
    }
    if !converged {
        let residual = a.off_diagonal_norm();
        if residual > tol {
            return Err(Error::NoConvergence { sweeps: JACOBI_MAX_SWEEPS, residual });
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
    let values: Vec<f64> = order.iter().map(|&i| a[(i, i)].re).collect();
    let mut vectors = ComplexMatrix::zeros(n);
    for (k, &src) in order.iter().enumerate() {
        let mut col = v.column(src);
        fix_gauge(&mut col);
        vectors.set_column(k, &col);
    }
    Ok(EigenDecomposition { values, vectors })
}

/// One Jacobi rotation annihilating `a[p][q]`; accumulates the rotation into `v`.
fn rotate(a: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize) {
    let g = a[(p, q)];
    let mag = g.norm();
    if mag == 0.0 {
        return;
    }
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    let phase = g / mag;
    let zeta = (aqq - app) / (2.0 * mag);
    let t = if zeta >= 0.0 {
        1.0 / (zeta + (1.0 + zeta * zeta).sqrt())
    } else {
        -1.0 / (-zeta + (1.0 + zeta * zeta).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;
    // J = diag(1, e^{-iφ}) · [[c, s], [-s, c]] restricted to (p, q).
    let jpp = C64::new(c, 0.0);
    let jpq = C64::new(s, 0.0);
    let jqp = -phase.conj() * s;
    let jqq = phase.conj() * c;

    let n = a.dim();
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * jpp + akq * jqp;
        a[(k, q)] = akp * jpq + akq * jqq;
    }
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = jpp.conj() * apk + jqp.conj() * aqk;
        a[(q, k)] = jpq.conj() * apk + jqq.conj() * aqk;
    }
    a[(p, q)] = C64::new(0.0, 0.0);
    a[(q, p)] = C64::new(0.0, 0.0);
    a[(p, p)] = C64::new(a[(p, p)].re, 0.0);
    a[(q, q)] = C64::new(a[(q, q)].re, 0.0);

    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * jpp + vkq * jqp;
        v[(k, q)] = vkp * jpq + vkq * jqq;
    }
}

/// exp(−i·H·dt) through the eigendecomposition of H.
pub fn unitary_exp(h: &ComplexMatrix, dt: f64) -> Result<ComplexMatrix> {
    let eig = eigh(h)?;
    Ok(eig.map_spectrum(|l| C64::from_polar(1.0, -l * dt)))
}

/// exp(−i·H·dt)·ψ.
pub fn unitary_step(h: &ComplexMatrix, dt: f64, psi: &StateVector) -> Result<StateVector> {
    if h.dim() != psi.dim() {
        return Err(Error::DimensionMismatch { expected: h.dim(), found: psi.dim() });
    }
    if !dt.is_finite() {
        return Err(Error::invalid(format!("time step must be finite, got {dt}")));
    }
    let eig = eigh(h)?;
    let v = &eig.vectors;
    let n = h.dim();
    // Coordinates in the eigenbasis, phase-rotated, then mapped back.
    let coords: Vec<C64> = (0..n)
        .map(|k| {
            let c: C64 = (0..n).map(|i| v[(i, k)].conj() * psi.amplitudes()[i]).sum();
            c * C64::from_polar(1.0, -eig.values[k] * dt)
        })
        .collect();
    let out = (0..n).map(|i| (0..n).map(|k| v[(i, k)] * coords[k]).sum()).collect();
    Ok(StateVector(out))
}

/// Spectral norm of a Hermitian matrix (largest |eigenvalue|).
pub fn hermitian_spectral_norm(h: &ComplexMatrix) -> Result<f64> {
    Ok(eigh(h)?.spectral_radius())
}
