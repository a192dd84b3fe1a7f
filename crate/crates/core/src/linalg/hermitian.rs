//! Validated wrappers: Hermitian operators, projections, subspaces.

use super::eigen::eigen_raw;
use super::matrix::{vec_inner, vec_norm, Complex64, ComplexMatrix};
use crate::error::{Error, Result};

const HERMITICITY_TOL: f64 = 1e-10;
const PROJECTION_TOL: f64 = 1e-8;
const ORTHONORMAL_TOL: f64 = 1e-10;

/// A complex square matrix with verified Hermiticity.
///
/// Construction checks `||H - H†||_max <= 1e-10 * max(1, ||H||_max)` and then
/// stores the symmetrized `(H + H†)/2`, which removes accumulated rounding
/// drift from downstream arithmetic.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator {
    mat: ComplexMatrix,
}

impl HermitianOperator {
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::DimensionMismatch {
                expected: m.rows(),
                got: m.cols(),
            });
        }
        let deviation = m.hermiticity_deviation();
        if deviation > HERMITICITY_TOL * m.max_norm().max(1.0) {
            return Err(Error::NotHermitian { deviation });
        }
        Ok(Self { mat: m.hermitize() })
    }

    /// Symmetrize without the tolerance gate. For internal assembly of
    /// operators that are Hermitian by construction.
    pub(crate) fn symmetrized(m: ComplexMatrix) -> Self {
        assert!(m.is_square());
        Self { mat: m.hermitize() }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            mat: ComplexMatrix::identity(dim),
        }
    }

    pub fn zero(dim: usize) -> Self {
        Self {
            mat: ComplexMatrix::zeros(dim, dim),
        }
    }

    /// Rank-one operator `xi xi†` of a (not necessarily unit) vector.
    pub fn outer(xi: &[Complex64]) -> Self {
        Self::symmetrized(super::matrix::vec_outer(xi, xi))
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.mat.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.mat
    }

    #[inline]
    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        self.mat.get(i, j)
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            mat: self.mat.add(&other.mat),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self {
            mat: self.mat.sub(&other.mat),
        }
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self {
            mat: self.mat.scale_re(factor),
        }
    }

    /// Trace, real by Hermiticity.
    pub fn trace(&self) -> f64 {
        self.mat.trace().re
    }

    /// Hilbert-Schmidt pairing `Re Tr(self * other)`; for a density `other`
    /// this is the state value of `self`.
    pub fn pairing(&self, other: &Self) -> f64 {
        assert_eq!(self.dim(), other.dim());
        let n = self.dim();
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..n {
            for k in 0..n {
                acc += self.mat.get(i, k) * other.mat.get(k, i);
            }
        }
        acc.re
    }

    /// Quadratic form `<H xi, xi>`, real by Hermiticity.
    pub fn quadratic_form(&self, xi: &[Complex64]) -> f64 {
        let hx = self.mat.mat_vec(xi);
        vec_inner(&hx, xi).re
    }

    pub fn fro_norm(&self) -> f64 {
        self.mat.fro_norm()
    }

    /// `u * self * u†`.
    pub fn conjugate_by(&self, u: &ComplexMatrix) -> Self {
        Self::symmetrized(self.mat.conjugate_by(u))
    }
}

/// A Hermitian operator that is also (numerically) idempotent.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionOperator {
    base: HermitianOperator,
}

impl ProjectionOperator {
    /// Validates `||P^2 - P||_F <= 1e-8` and that all eigenvalues lie within
    /// `1e-8` of `{0, 1}`.
    pub fn new(base: HermitianOperator) -> Result<Self> {
        let p = base.matrix();
        let idem = p.mul(p).sub(p).fro_norm();
        if idem > PROJECTION_TOL {
            return Err(Error::NotProjection { residual: idem });
        }
        let (values, _) = eigen_raw(p)?;
        for v in &values {
            let d = v.abs().min((v - 1.0).abs());
            if d > PROJECTION_TOL {
                return Err(Error::NotProjection { residual: d });
            }
        }
        Ok(Self { base })
    }

    pub fn zero(dim: usize) -> Self {
        Self {
            base: HermitianOperator::zero(dim),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            base: HermitianOperator::identity(dim),
        }
    }

    /// `F F†` for a matrix with orthonormal columns.
    pub fn from_frame(frame: &ComplexMatrix) -> Result<Self> {
        Self::new(HermitianOperator::symmetrized(frame.mul(&frame.adjoint())))
    }

    /// Rank-one projection onto the line of a unit vector.
    pub fn onto_vector(xi: &[Complex64]) -> Result<Self> {
        let norm = vec_norm(xi);
        if (norm - 1.0).abs() > 1e-8 {
            return Err(Error::Precondition(format!(
                "projection onto a non-unit vector (norm {norm})"
            )));
        }
        Self::new(HermitianOperator::outer(xi))
    }

    pub fn dim(&self) -> usize {
        self.base.dim()
    }

    pub fn base(&self) -> &HermitianOperator {
        &self.base
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        self.base.matrix()
    }

    /// `I - P`.
    pub fn complement(&self) -> Self {
        Self {
            base: HermitianOperator::identity(self.dim()).sub(&self.base),
        }
    }

    /// Rank as the rounded trace.
    pub fn rank(&self) -> usize {
        self.base.trace().round().max(0.0) as usize
    }
}

/// A subspace of C^ambient given by an orthonormal column frame.
#[derive(Debug, Clone)]
pub struct Subspace {
    basis: ComplexMatrix,
}

impl Subspace {
    /// Requires `basis† basis = I` within `1e-10`.
    pub fn new(basis: ComplexMatrix) -> Result<Self> {
        let gram = basis.adjoint().mul(&basis);
        let deviation = gram.sub(&ComplexMatrix::identity(basis.cols())).max_norm();
        if deviation > ORTHONORMAL_TOL {
            return Err(Error::NotOrthonormal { deviation });
        }
        Ok(Self { basis })
    }

    /// Orthonormalize a spanning family (dropping dependent vectors) and wrap
    /// the result.
    pub fn span(ambient_dim: usize, vectors: &[Vec<Complex64>]) -> Result<Self> {
        let mut cols: Vec<Vec<Complex64>> = Vec::new();
        for v in vectors {
            if v.len() != ambient_dim {
                return Err(Error::DimensionMismatch {
                    expected: ambient_dim,
                    got: v.len(),
                });
            }
            let mut w = v.clone();
            for _ in 0..2 {
                for existing in &cols {
                    let coeff = vec_inner(&w, existing);
                    for (wi, ei) in w.iter_mut().zip(existing) {
                        *wi -= coeff * ei;
                    }
                }
            }
            let norm = vec_norm(&w);
            if norm > 1e-10 * vec_norm(v).max(1.0) {
                for wi in w.iter_mut() {
                    *wi /= norm;
                }
                cols.push(w);
            }
        }
        if cols.is_empty() {
            return Err(Error::Precondition("empty subspace span".into()));
        }
        let basis = ComplexMatrix::from_fn(ambient_dim, cols.len(), |i, j| cols[j][i]);
        Self::new(basis)
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.rows()
    }

    pub fn dim(&self) -> usize {
        self.basis.cols()
    }

    pub fn basis(&self) -> &ComplexMatrix {
        &self.basis
    }

    /// The orthogonal projection onto this subspace.
    pub fn projection(&self) -> Result<ProjectionOperator> {
        ProjectionOperator::from_frame(&self.basis)
    }
}
