//! Dense complex Hermitian linear algebra: eigendecomposition, PSD projection,
//! norms, Kronecker products and partial traces.
//!
//! Bipartite operators are always ordered Alice ⊗ Bob: the left Kronecker factor is
//! subsystem A.

mod eig;
mod matrix;

use std::ops::{Add, Sub};

pub use eig::Eigen;
pub use matrix::{ComplexMatrix, C64};

use crate::config::Tolerances;
use crate::error::{domain, Error, Result};

/// A square complex matrix equal to its conjugate transpose.
#[derive(Clone, PartialEq)]
pub struct HermitianOperator {
    matrix: ComplexMatrix,
}

impl HermitianOperator {
    /// Checks Hermiticity entrywise against the default tolerance; the stored matrix is
    /// the exact Hermitian part of the input.
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        Self::with_tolerance(matrix, Tolerances::default().hermitian)
    }

    pub fn with_tolerance(matrix: ComplexMatrix, tol: f64) -> Result<Self> {
        if !matrix.is_square() {
            return Err(domain(format!(
                "Hermitian operator must be square, got {}x{}",
                matrix.rows(),
                matrix.cols()
            )));
        }
        let defect = matrix.hermitian_defect();
        if defect > tol {
            return Err(domain(format!("matrix is not Hermitian (entrywise defect {defect:e})")));
        }
        Ok(Self::hermitian_part(&matrix))
    }

    /// `(M + M†) / 2`; panics if `m` is not square.
    pub fn hermitian_part(m: &ComplexMatrix) -> Self {
        assert!(m.is_square(), "Hermitian part of a non-square matrix");
        let n = m.rows();
        let matrix = ComplexMatrix::from_fn(n, n, |i, j| (m[(i, j)] + m[(j, i)].conj()) * 0.5);
        Self { matrix }
    }

    pub fn from_real_diag(diag: &[f64]) -> Self {
        Self { matrix: ComplexMatrix::from_real_diag(diag) }
    }

    pub fn identity(dim: usize) -> Self {
        Self { matrix: ComplexMatrix::identity(dim) }
    }

    pub fn zeros(dim: usize) -> Self {
        Self { matrix: ComplexMatrix::zeros(dim, dim) }
    }

    /// `|ψ⟩⟨ψ|` for a (not necessarily normalized) vector.
    pub fn projector(psi: &[C64]) -> Self {
        let n = psi.len();
        Self { matrix: ComplexMatrix::from_fn(n, n, |i, j| psi[i] * psi[j].conj()) }
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { matrix: self.matrix.scale(s) }
    }

    pub fn eig(&self) -> Result<Eigen> {
        her_eig(self)
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(*her_eig(self)?.values.last().expect("non-empty spectrum"))
    }

    /// `f(H)` via the spectral decomposition.
    pub fn map_spectrum(&self, f: impl FnMut(f64) -> f64) -> Result<Self> {
        Ok(Self::hermitian_part(&her_eig(self)?.reconstruct_with(f)))
    }

    pub fn distance(&self, other: &Self) -> f64 {
        self.matrix.distance(&other.matrix)
    }
}

impl std::fmt::Debug for HermitianOperator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Hermitian{:?}", self.matrix)
    }
}

impl Add for &HermitianOperator {
    type Output = HermitianOperator;

    fn add(self, rhs: &HermitianOperator) -> HermitianOperator {
        HermitianOperator { matrix: &self.matrix + &rhs.matrix }
    }
}

impl Sub for &HermitianOperator {
    type Output = HermitianOperator;

    fn sub(self, rhs: &HermitianOperator) -> HermitianOperator {
        HermitianOperator { matrix: &self.matrix - &rhs.matrix }
    }
}

/// Eigendecomposition with eigenvalues sorted descending.
pub fn her_eig(h: &HermitianOperator) -> Result<Eigen> {
    her_eig_with(h, &Tolerances::default())
}

pub fn her_eig_with(h: &HermitianOperator, tol: &Tolerances) -> Result<Eigen> {
    eig::jacobi(&h.matrix, tol.eig_offdiag, tol.eig_max_sweeps)
}

/// Eigendecomposition of a raw matrix after checking it is Hermitian.
pub fn her_eig_matrix(m: &ComplexMatrix) -> Result<Eigen> {
    her_eig(&HermitianOperator::new(m.clone())?)
}

/// Frobenius-nearest PSD operator: negative eigenvalues clamped to zero.
pub fn psd_project(h: &HermitianOperator) -> Result<HermitianOperator> {
    let e = her_eig(h)?;
    if e.values.last().is_some_and(|&v| v >= 0.0) {
        return Ok(h.clone());
    }
    Ok(HermitianOperator::hermitian_part(&e.reconstruct_with(|v| v.max(0.0))))
}

/// Nearest PSD matrix of a matrix already known to be Hermitian, skipping validation.
pub(crate) fn psd_project_raw(m: &ComplexMatrix, tol: &Tolerances) -> Result<ComplexMatrix> {
    let e = eig::jacobi(m, tol.eig_offdiag, tol.eig_max_sweeps)?;
    if e.values.last().is_some_and(|&v| v >= 0.0) {
        return Ok(m.clone());
    }
    let mut out = e.reconstruct_with(|v| v.max(0.0));
    symmetrize_in_place(&mut out);
    Ok(out)
}

pub(crate) fn symmetrize_in_place(m: &mut ComplexMatrix) {
    let n = m.rows();
    for i in 0..n {
        m[(i, i)] = C64::new(m[(i, i)].re, 0.0);
        for j in (i + 1)..n {
            let avg = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
            m[(i, j)] = avg;
            m[(j, i)] = avg.conj();
        }
    }
}

/// Operator norm, i.e. the largest absolute eigenvalue.
pub fn op_norm(h: &HermitianOperator) -> Result<f64> {
    let e = her_eig(h)?;
    Ok(e.values.first().unwrap().abs().max(e.values.last().unwrap().abs()))
}

/// Sum of absolute eigenvalues.
pub fn trace_norm(h: &HermitianOperator) -> Result<f64> {
    Ok(her_eig(h)?.values.iter().map(|v| v.abs()).sum())
}

/// Kronecker product `a ⊗ b`.
pub fn tensor(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (br, bc) = (b.rows(), b.cols());
    ComplexMatrix::from_fn(a.rows() * br, a.cols() * bc, |i, j| {
        a[(i / br, j / bc)] * b[(i % br, j % bc)]
    })
}

pub fn tensor_herm(a: &HermitianOperator, b: &HermitianOperator) -> HermitianOperator {
    HermitianOperator { matrix: tensor(&a.matrix, &b.matrix) }
}

/// `Tr[A·B]` as a complex number, without forming the product.
pub fn trace_product(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<C64> {
    if a.cols() != b.rows() || a.rows() != b.cols() {
        return Err(domain(format!(
            "trace of product needs {}x{} and {}x{} to be compatible",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        )));
    }
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..a.rows() {
        for k in 0..a.cols() {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    Ok(acc)
}

/// Hilbert–Schmidt inner product `Tr[A·B]` of two Hermitian operators.
pub fn hs_inner(a: &HermitianOperator, b: &HermitianOperator) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(domain(format!("dimension mismatch: {} vs {}", a.dim(), b.dim())));
    }
    Ok(trace_product(&a.matrix, &b.matrix)?.re)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subsystem {
    A,
    B,
}

/// Partial trace of an operator on `C^dim_a ⊗ C^dim_b`, keeping `keep`.
pub fn partial_trace_matrix(
    m: &ComplexMatrix,
    dim_a: usize,
    dim_b: usize,
    keep: Subsystem,
) -> Result<ComplexMatrix> {
    if !m.is_square() || m.rows() != dim_a * dim_b || dim_a == 0 || dim_b == 0 {
        return Err(domain(format!(
            "operator of shape {}x{} does not factor as {dim_a}·{dim_b}",
            m.rows(),
            m.cols()
        )));
    }
    Ok(match keep {
        Subsystem::A => ComplexMatrix::from_fn(dim_a, dim_a, |i, j| {
            (0..dim_b).map(|k| m[(i * dim_b + k, j * dim_b + k)]).sum()
        }),
        Subsystem::B => ComplexMatrix::from_fn(dim_b, dim_b, |i, j| {
            (0..dim_a).map(|k| m[(k * dim_b + i, k * dim_b + j)]).sum()
        }),
    })
}

pub fn partial_trace(
    m: &HermitianOperator,
    dim_a: usize,
    dim_b: usize,
    keep: Subsystem,
) -> Result<HermitianOperator> {
    let reduced = partial_trace_matrix(&m.matrix, dim_a, dim_b, keep)?;
    Ok(HermitianOperator::hermitian_part(&reduced))
}

/// `Tr_A[(X ⊗ I) M]` for an operator `X` on subsystem A; Hermitian whenever `X` and `M` are.
pub fn conditional_operator(
    x: &HermitianOperator,
    m: &HermitianOperator,
    dim_b: usize,
) -> Result<HermitianOperator> {
    let dim_a = x.dim();
    if m.dim() != dim_a * dim_b {
        return Err(domain(format!(
            "bipartite operator of dim {} does not factor as {dim_a}·{dim_b}",
            m.dim()
        )));
    }
    // (X⊗I)M restricted to the trace over A: Σ_{i,k} X[k,i] M[(i,b),(k,b')]
    let out = ComplexMatrix::from_fn(dim_b, dim_b, |b, bp| {
        let mut acc = C64::new(0.0, 0.0);
        for k in 0..dim_a {
            for i in 0..dim_a {
                let xk = x.matrix[(k, i)];
                if xk.re != 0.0 || xk.im != 0.0 {
                    acc += xk * m.matrix[(i * dim_b + b, k * dim_b + bp)];
                }
            }
        }
        acc
    });
    Ok(HermitianOperator::hermitian_part(&out))
}

/// Checks PSD-ness within `tol`, returning the minimum eigenvalue.
pub fn check_psd(h: &HermitianOperator, tol: f64, what: &str) -> Result<f64> {
    let min = h.min_eigenvalue()?;
    if min < -tol {
        return Err(Error::Domain(format!("{what} is not PSD (min eigenvalue {min:e})")));
    }
    Ok(min)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn pauli_x() -> HermitianOperator {
        HermitianOperator::new(ComplexMatrix::from_real_rows(&[&[0., 1.], &[1., 0.]]).unwrap())
            .unwrap()
    }

    fn pauli_y() -> HermitianOperator {
        let m = ComplexMatrix::new(2, 2, vec![c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.)]).unwrap();
        HermitianOperator::new(m).unwrap()
    }

    fn pauli_z() -> HermitianOperator {
        HermitianOperator::from_real_diag(&[1., -1.])
    }

    fn phi_plus() -> HermitianOperator {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        HermitianOperator::projector(&[c(s, 0.), c(0., 0.), c(0., 0.), c(s, 0.)])
    }

    #[test]
    fn identity_eigenvalues() {
        let e = her_eig(&HermitianOperator::identity(2)).unwrap();
        assert_eq!(e.values, vec![1.0, 1.0]);
    }

    #[test]
    fn pauli_z_eigenpairs_are_standard_basis() {
        let e = her_eig(&pauli_z()).unwrap();
        assert_eq!(e.values, vec![1.0, -1.0]);
        assert!(e.vectors.distance(&ComplexMatrix::identity(2)) < 1e-15);
    }

    #[test]
    fn non_hermitian_input_is_rejected() {
        let m = ComplexMatrix::from_real_rows(&[&[0., 1.], &[0., 0.]]).unwrap();
        assert!(matches!(HermitianOperator::new(m), Err(Error::Domain(_))));
        assert!(HermitianOperator::new(ComplexMatrix::zeros(2, 3)).is_err());
    }

    #[test]
    fn iteration_cap_surfaces_numeric_error() {
        let h = &pauli_x() + &pauli_z();
        let tol = Tolerances { eig_max_sweeps: 0, ..Tolerances::default() };
        assert!(matches!(her_eig_with(&h, &tol), Err(Error::Numeric(_))));
    }

    #[test]
    fn psd_projection_examples() {
        let rho = phi_plus();
        assert!(psd_project(&rho).unwrap().distance(&rho) < 1e-12);
        let p = psd_project(&pauli_z()).unwrap();
        assert!(p.distance(&HermitianOperator::from_real_diag(&[1., 0.])) < 1e-15);
        let p = psd_project(&HermitianOperator::from_real_diag(&[2., -3.])).unwrap();
        assert!(p.distance(&HermitianOperator::from_real_diag(&[2., 0.])) < 1e-15);
    }

    #[test]
    fn norms() {
        assert!((op_norm(&pauli_x()).unwrap() - 1.0).abs() < 1e-15);
        let s = &(&pauli_x() + &pauli_y()) + &pauli_z();
        assert!((op_norm(&s).unwrap() - 3f64.sqrt()).abs() < 1e-14);
        assert_eq!(op_norm(&HermitianOperator::zeros(3)).unwrap(), 0.0);

        assert!((trace_norm(&pauli_z()).unwrap() - 2.0).abs() < 1e-15);
        let proj = HermitianOperator::projector(&[c(0.6, 0.), c(0., 0.8)]);
        assert!((trace_norm(&proj).unwrap() - 1.0).abs() < 1e-14);
        assert!((trace_norm(&s.scale(0.5)).unwrap() - 3f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn kronecker_products() {
        let i4 = tensor(&ComplexMatrix::identity(2), &ComplexMatrix::identity(2));
        assert_eq!(i4, ComplexMatrix::identity(4));
        let zz = tensor(pauli_z().matrix(), pauli_z().matrix());
        assert_eq!(zz, ComplexMatrix::from_real_diag(&[1., -1., -1., 1.]));
        let big = tensor(&ComplexMatrix::identity(2), &ComplexMatrix::identity(3));
        assert_eq!((big.rows(), big.cols()), (6, 6));
    }

    #[test]
    fn hilbert_schmidt_examples() {
        assert_eq!(hs_inner(&HermitianOperator::identity(2), &pauli_z()).unwrap(), 0.0);
        let zero = HermitianOperator::from_real_diag(&[1., 0.]);
        assert_eq!(hs_inner(&zero, &pauli_z()).unwrap(), 1.0);
        let zz = tensor_herm(&pauli_z(), &pauli_z());
        assert!((hs_inner(&phi_plus(), &zz).unwrap() - 1.0).abs() < 1e-15);
        assert!(hs_inner(&zero, &zz).is_err());
    }

    #[test]
    fn partial_trace_examples() {
        let ra = HermitianOperator::from_real_diag(&[0.25, 0.75]);
        let rb = HermitianOperator::projector(&[c(0.6, 0.), c(0., 0.8)]);
        let prod = tensor_herm(&ra, &rb);
        assert!(partial_trace(&prod, 2, 2, Subsystem::A).unwrap().distance(&ra) < 1e-15);
        assert!(partial_trace(&prod, 2, 2, Subsystem::B).unwrap().distance(&rb) < 1e-15);

        let mixed = partial_trace(&phi_plus(), 2, 2, Subsystem::B).unwrap();
        assert!(mixed.distance(&HermitianOperator::identity(2).scale(0.5)) < 1e-15);

        assert!(partial_trace(&phi_plus(), 3, 2, Subsystem::A).is_err());
    }

    #[test]
    fn conditional_operator_matches_explicit_partial_trace() {
        let rho = phi_plus();
        let x = &pauli_x() + &pauli_y().scale(0.3);
        let explicit = tensor(x.matrix(), &ComplexMatrix::identity(2)).matmul(rho.matrix()).unwrap();
        let expected = partial_trace_matrix(&explicit, 2, 2, Subsystem::B).unwrap();
        let got = conditional_operator(&x, &rho, 2).unwrap();
        assert!(got.matrix().distance(&expected) < 1e-15);
    }
}
