//! Schmidt decomposition and capacity-based entanglement classification of
//! vector states.

use crate::error::{Error, Result};
use crate::linalg::{
    self, svd, vec_norm, Complex64, ComplexMatrix, HermitianOperator, ProjectionOperator,
};
use crate::model::MeasuredAlgebra;
use crate::sdp::SolverOptions;

const SCHMIDT_TOL: f64 = 1e-8;
const ALPHA_CLASS_TOL: f64 = 1e-5;

/// Descending Schmidt coefficients with matching orthonormal frames:
/// `xi = sum_i lambda_i e_i ⊗ f_i`.
#[derive(Debug, Clone)]
pub struct SchmidtDecomposition {
    coefficients: Vec<f64>,
    left_frame: ComplexMatrix,
    right_frame: ComplexMatrix,
}

impl SchmidtDecomposition {
    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    /// `n x r` frame of left factors.
    pub fn left_frame(&self) -> &ComplexMatrix {
        &self.left_frame
    }

    /// `m x r` frame of right factors.
    pub fn right_frame(&self) -> &ComplexMatrix {
        &self.right_frame
    }

    /// `sum_i lambda_i e_i ⊗ f_i`.
    pub fn reconstruct(&self) -> Vec<Complex64> {
        let n = self.left_frame.rows();
        let m = self.right_frame.rows();
        let mut out = vec![Complex64::new(0.0, 0.0); n * m];
        for (s, &l) in self.coefficients.iter().enumerate() {
            for i in 0..n {
                for k in 0..m {
                    out[i * m + k] += self.left_frame.get(i, s) * self.right_frame.get(k, s) * l;
                }
            }
        }
        out
    }

    /// Number of coefficients above `tol`.
    pub fn rank(&self, tol: f64) -> usize {
        self.coefficients.iter().filter(|&&l| l > tol).count()
    }
}

/// Schmidt decomposition of a unit vector in `C^n ⊗ C^m`, via the singular
/// value decomposition of its reshaping.
pub fn schmidt(xi: &[Complex64], n: usize, m: usize) -> Result<SchmidtDecomposition> {
    if xi.len() != n * m {
        return Err(Error::DimensionMismatch {
            expected: n * m,
            got: xi.len(),
        });
    }
    let norm = vec_norm(xi);
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::Precondition(format!(
            "schmidt decomposition needs a unit vector (norm {norm})"
        )));
    }
    // reshape: the linear map C^n -> C^m with matrix S[k][i] = xi[(i,k)]
    let s_mat = ComplexMatrix::from_fn(m, n, |k, i| xi[i * m + k]);
    let svd = svd(&s_mat)?;
    let r = n.min(m);
    let coefficients: Vec<f64> = svd.singular_values.iter().take(r).copied().collect();
    // xi = sum_j s_j conj(v_j) ⊗ u_j
    let left_frame = ComplexMatrix::from_fn(n, r, |i, j| svd.v.get(i, j).conj());
    let right_frame = ComplexMatrix::from_fn(m, r, |k, j| svd.u.get(k, j));
    let out = SchmidtDecomposition {
        coefficients,
        left_frame,
        right_frame,
    };

    let sumsq: f64 = out.coefficients.iter().map(|l| l * l).sum();
    if (sumsq - 1.0).abs() > 1e-10 {
        return Err(Error::Inconsistent(format!(
            "schmidt coefficients have square sum {sumsq}"
        )));
    }
    let err = vec_norm(&crate::linalg::vec_sub(&out.reconstruct(), xi));
    if err > 1e-9 {
        return Err(Error::Inconsistent(format!(
            "schmidt reconstruction error {err:.3e}"
        )));
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EntanglementClass {
    Separable,
    Entangled,
    MaximallyEntangled,
}

impl std::fmt::Display for EntanglementClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Separable => write!(f, "separable"),
            Self::Entangled => write!(f, "entangled"),
            Self::MaximallyEntangled => write!(f, "maximally entangled"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct EntanglementVerdict {
    pub class: EntanglementClass,
    pub alpha_value: f64,
    pub schmidt: SchmidtDecomposition,
}

fn schmidt_class(dec: &SchmidtDecomposition, small: usize) -> EntanglementClass {
    let lambda = dec.coefficients();
    if lambda.len() < 2 || lambda[1] <= SCHMIDT_TOL {
        return EntanglementClass::Separable;
    }
    let flat = 1.0 / small as f64;
    if lambda.iter().all(|&l| (l * l - flat).abs() <= SCHMIDT_TOL) {
        return EntanglementClass::MaximallyEntangled;
    }
    EntanglementClass::Entangled
}

/// Classify a vector state under normalized-trace marginals, twice over: by
/// its Schmidt data and by the computed coupling capacity against the
/// thresholds `1/max(n,m)` (separable) and — in equal dimensions — `1`
/// (maximally entangled). The two classifications must agree.
///
/// The capacity-1 characterization of maximal entanglement holds only for
/// `n = m`: a coupling supported on a single entangled line must have a
/// rank-`min(n,m)` marginal on the larger factor, so for `n < m` even a
/// maximally entangled vector has capacity `n/m < 1`. On rectangular pairs
/// the capacity check therefore only separates "separable" from the rest.
pub fn classify(xi: &[Complex64], n: usize, m: usize) -> Result<EntanglementVerdict> {
    let dec = schmidt(xi, n, m)?;
    let small = n.min(m);
    let big = n.max(m) as f64;
    let by_schmidt = schmidt_class(&dec, small);

    let e = HermitianOperator::outer(xi);
    let res = crate::capacity::alpha(
        &e,
        &MeasuredAlgebra::uniform(n),
        &MeasuredAlgebra::uniform(m),
        &SolverOptions::default(),
    )?;
    let alpha_separable = (res.value - 1.0 / big).abs() <= ALPHA_CLASS_TOL;
    let by_alpha = if alpha_separable {
        EntanglementClass::Separable
    } else if n == m && (res.value - 1.0).abs() <= ALPHA_CLASS_TOL {
        EntanglementClass::MaximallyEntangled
    } else {
        EntanglementClass::Entangled
    };

    let agree = if n == m {
        by_schmidt == by_alpha
    } else {
        (by_schmidt == EntanglementClass::Separable) == alpha_separable
    };
    if !agree {
        return Err(Error::ClassificationMismatch {
            schmidt_class: by_schmidt.to_string(),
            alpha_class: by_alpha.to_string(),
            alpha_value: res.value,
        });
    }
    Ok(EntanglementVerdict {
        class: by_schmidt,
        alpha_value: res.value,
        schmidt: dec,
    })
}

/// `(1/n)(sum_i lambda_i)^2`: a lower bound for the capacity of a rank-one
/// projection on `C^n ⊗ C^n`, exact for `n = 2`.
pub fn alpha_rank_one_lower(xi: &[Complex64], n: usize, m: usize) -> Result<f64> {
    if n != m {
        return Err(Error::Precondition(
            "the rank-one lower bound is stated for equal dimensions".into(),
        ));
    }
    let dec = schmidt(xi, n, m)?;
    let s: f64 = dec.coefficients().iter().sum();
    Ok(s * s / n as f64)
}

/// The canonical interpolation used by [`capacity_sweep`]: squared Schmidt
/// coefficients move linearly from `(1, 0, ..., 0)` at `s = 0` to the flat
/// profile at `s = 1`, along the diagonal frames.
pub fn sweep_vector(n: usize, s: f64) -> Vec<Complex64> {
    let mut xi = vec![Complex64::new(0.0, 0.0); n * n];
    for i in 0..n {
        let sq = if i == 0 {
            (1.0 - s) + s / n as f64
        } else {
            s / n as f64
        };
        xi[i * n + i] = Complex64::new(sq.max(0.0).sqrt(), 0.0);
    }
    xi
}

/// Evaluate the capacity along the canonical separable-to-maximally-entangled
/// path; the values sweep out `[1/n, 1]`.
pub fn capacity_sweep(n: usize, steps: usize) -> Result<Vec<(f64, f64)>> {
    if n < 2 {
        return Err(Error::Precondition("capacity sweep needs n >= 2".into()));
    }
    if steps == 0 {
        return Err(Error::Precondition(
            "capacity sweep needs steps >= 1".into(),
        ));
    }
    let u = MeasuredAlgebra::uniform(n);
    let opts = SolverOptions::default();
    let mut out = Vec::with_capacity(steps + 1);
    for k in 0..=steps {
        let s = k as f64 / steps as f64;
        let xi = sweep_vector(n, s);
        let e = HermitianOperator::outer(&xi);
        let res = crate::capacity::alpha(&e, &u, &u, &opts)?;
        out.push((s, res.value));
    }
    Ok(out)
}

/// Check the characterization of capacity-minimizing projections on
/// `M_n ⊗ M_n`: the capacity of a nonzero projection equals `1/n` exactly
/// when the projection factors as `E' ⊗ (rank one)` or `(rank one) ⊗ E'`.
/// Returns whether the two sides of the equivalence agree for `e`.
pub fn alpha_min_projection_check(e: &ProjectionOperator) -> Result<bool> {
    let dim = e.dim();
    let n = (dim as f64).sqrt().round() as usize;
    if n * n != dim {
        return Err(Error::Precondition(format!(
            "projection must live on a square tensor space, got dim {dim}"
        )));
    }
    if e.rank() == 0 {
        return Err(Error::Precondition(
            "the minimum-capacity characterization concerns nonzero projections".into(),
        ));
    }
    let u = MeasuredAlgebra::uniform(n);
    let res = crate::capacity::alpha(e.base(), &u, &u, &SolverOptions::default())?;
    let is_min = res.value <= 1.0 / n as f64 + ALPHA_CLASS_TOL;

    // factorization test: every range basis vector must be a product vector
    // and they must share a common left or a common right factor
    let eig = linalg::hermitian_eigen(e.base())?;
    let mut lefts: Vec<Vec<Complex64>> = Vec::new();
    let mut rights: Vec<Vec<Complex64>> = Vec::new();
    let mut all_product = true;
    for (k, &l) in eig.eigenvalues.iter().enumerate() {
        if l < 0.5 {
            continue;
        }
        let v = eig.eigenvector(k);
        let dec = schmidt(&v, n, n)?;
        if dec.coefficients().len() > 1 && dec.coefficients()[1] > SCHMIDT_TOL {
            all_product = false;
            break;
        }
        lefts.push(dec.left_frame().column(0));
        rights.push(dec.right_frame().column(0));
    }
    let factored = all_product && {
        let common = |vs: &[Vec<Complex64>]| {
            vs.iter()
                .all(|v| crate::linalg::vec_inner(v, &vs[0]).norm() >= 1.0 - SCHMIDT_TOL)
        };
        common(&lefts) || common(&rights)
    };
    Ok(is_min == factored)
}
