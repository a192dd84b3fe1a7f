//! Cyclic Jacobi eigensolver for complex Hermitian matrices, and an SVD
//! built on top of it.

use super::hermitian::HermitianOperator;
use super::matrix::{vec_inner, vec_norm, Complex64, ComplexMatrix};
use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 60;
const OFF_DIAGONAL_FACTOR: f64 = 1e-13;

/// Spectral data of a Hermitian operator: eigenvalues sorted descending and a
/// unitary whose columns are the matching eigenvectors.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: ComplexMatrix,
}

impl EigenDecomposition {
    /// `V diag(eigenvalues) V†`, for reconstruction checks.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let n = self.eigenvalues.len();
        let v = &self.eigenvectors;
        ComplexMatrix::from_fn(n, n, |i, j| {
            (0..n)
                .map(|k| v.get(i, k) * self.eigenvalues[k] * v.get(j, k).conj())
                .sum()
        })
    }

    /// Eigenvector for the k-th eigenvalue (descending order).
    pub fn eigenvector(&self, k: usize) -> Vec<Complex64> {
        self.eigenvectors.column(k)
    }
}

fn off_diagonal_norm(a: &ComplexMatrix) -> f64 {
    let n = a.rows();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a.get(i, j).norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// One complex Jacobi rotation zeroing the `(p, q)` entry.
///
/// The pivot is factored as a relative phase times a real plane rotation, so
/// the 2x2 block `[[app, b e^{i phi}], [b e^{-i phi}, aqq]]` is first made
/// real and then diagonalized in the usual way.
fn rotate(a: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize) {
    let n = a.rows();
    let apq = a.get(p, q);
    let b = apq.norm();
    if b == 0.0 {
        return;
    }
    let phase = apq / b; // e^{i phi}
    let app = a.get(p, p).re;
    let aqq = a.get(q, q).re;

    let tau = (aqq - app) / (2.0 * b);
    let t = if tau >= 0.0 {
        1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;

    // U restricted to the (p, q) plane:
    //   U[p][p] = c            U[p][q] = s
    //   U[q][p] = -s e^{-i phi}  U[q][q] = c e^{-i phi}
    let phase_conj = phase.conj();

    // Column update A <- A U.
    for k in 0..n {
        let akp = a.get(k, p);
        let akq = a.get(k, q);
        a.set(k, p, akp * c - akq * phase_conj * s);
        a.set(k, q, akp * s + akq * phase_conj * c);
    }
    // Row update A <- U† A.
    for k in 0..n {
        let apk = a.get(p, k);
        let aqk = a.get(q, k);
        a.set(p, k, apk * c - aqk * phase * s);
        a.set(q, k, apk * s + aqk * phase * c);
    }
    // The transformed pivot block is diagonal by construction; writing the
    // closed forms removes rounding residue.
    a.set(p, p, Complex64::new(app - t * b, 0.0));
    a.set(q, q, Complex64::new(aqq + t * b, 0.0));
    a.set(p, q, Complex64::new(0.0, 0.0));
    a.set(q, p, Complex64::new(0.0, 0.0));

    // Accumulate V <- V U.
    for k in 0..n {
        let vkp = v.get(k, p);
        let vkq = v.get(k, q);
        v.set(k, p, vkp * c - vkq * phase_conj * s);
        v.set(k, q, vkp * s + vkq * phase_conj * c);
    }
}

/// Full eigendecomposition of a Hermitian operator by cyclic Jacobi sweeps.
///
/// Converges when the off-diagonal Frobenius norm drops below
/// `1e-13 * ||H||_F`; errors out with the residual if 60 sweeps do not reach
/// that.
pub fn hermitian_eigen(h: &HermitianOperator) -> Result<EigenDecomposition> {
    let (values, vectors) = eigen_raw(h.matrix())?;
    Ok(EigenDecomposition {
        eigenvalues: values,
        eigenvectors: vectors,
    })
}

/// Jacobi on a raw (already Hermitian) matrix. Internal fast path shared by
/// the PSD projection inside solver loops.
pub(crate) fn eigen_raw(m: &ComplexMatrix) -> Result<(Vec<f64>, ComplexMatrix)> {
    assert!(m.is_square());
    let n = m.rows();
    if n == 0 {
        return Ok((Vec::new(), ComplexMatrix::zeros(0, 0)));
    }
    let mut a = m.clone();
    let mut v = ComplexMatrix::identity(n);
    let scale = a.fro_norm();
    let threshold = OFF_DIAGONAL_FACTOR * scale.max(f64::MIN_POSITIVE);

    let mut converged = false;
    let mut sweeps = 0;
    while sweeps < MAX_SWEEPS {
        if off_diagonal_norm(&a) <= threshold {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                if a.get(p, q).norm() > f64::MIN_POSITIVE {
                    rotate(&mut a, &mut v, p, q);
                }
            }
        }
        sweeps += 1;
    }
    if !converged && off_diagonal_norm(&a) > threshold {
        return Err(Error::EigenFailure {
            residual: off_diagonal_norm(&a),
            sweeps,
        });
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a.get(j, j).re.partial_cmp(&a.get(i, i).re).unwrap());
    let values: Vec<f64> = order.iter().map(|&i| a.get(i, i).re).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |i, j| v.get(i, order[j]));
    Ok((values, vectors))
}

/// Singular value decomposition `M = U diag(s) V†` with square unitaries `U`
/// (rows x rows) and `V` (cols x cols), singular values descending.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: ComplexMatrix,
    pub singular_values: Vec<f64>,
    pub v: ComplexMatrix,
}

impl Svd {
    pub fn reconstruct(&self) -> ComplexMatrix {
        let rows = self.u.rows();
        let cols = self.v.rows();
        let r = self.singular_values.len();
        ComplexMatrix::from_fn(rows, cols, |i, j| {
            (0..r)
                .map(|k| self.u.get(i, k) * self.singular_values[k] * self.v.get(j, k).conj())
                .sum()
        })
    }
}

/// SVD via the eigendecomposition of `M† M` plus column recovery
/// `u_k = M v_k / s_k`, with Gram-Schmidt completion of the left unitary.
pub fn svd(m: &ComplexMatrix) -> Result<Svd> {
    let rows = m.rows();
    let cols = m.cols();
    let r = rows.min(cols);

    let gram = m.adjoint().mul(m).hermitize();
    let (_, v) = eigen_raw(&gram)?;

    // Recover singular values directly as ||M v_k||; this keeps the
    // reconstruction identity M v_k = s_k u_k exact per column.
    let mut triples: Vec<(f64, Vec<Complex64>, Vec<Complex64>)> = Vec::with_capacity(cols);
    for k in 0..cols {
        let vk = v.column(k);
        let mvk = m.mat_vec(&vk);
        triples.push((vec_norm(&mvk), mvk, vk));
    }
    triples.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());

    let scale = triples.first().map(|t| t.0).unwrap_or(0.0);
    let rank_tol = 1e-12 * scale.max(1.0);

    let mut u_cols: Vec<Vec<Complex64>> = Vec::with_capacity(rows);
    let mut singular_values = Vec::with_capacity(r);
    for (s, mvk, _) in triples.iter().take(r) {
        singular_values.push(*s);
        if *s > rank_tol {
            u_cols.push(mvk.iter().map(|z| z / *s).collect());
        }
    }
    complete_orthonormal(&mut u_cols, rows);
    let u = ComplexMatrix::from_fn(rows, rows, |i, j| u_cols[j][i]);
    let v_sorted = ComplexMatrix::from_fn(cols, cols, |i, j| triples[j].2[i]);

    Ok(Svd {
        u,
        singular_values,
        v: v_sorted,
    })
}

/// Extend a partial orthonormal family to an orthonormal basis of C^dim.
/// Each step takes the standard basis vector with the largest residual
/// against the current span (the residual norms square-sum to the current
/// corank, so the best one is never small), then re-orthogonalizes twice.
pub(crate) fn complete_orthonormal(cols: &mut Vec<Vec<Complex64>>, dim: usize) {
    let residual = |candidate: usize, cols: &[Vec<Complex64>]| -> Vec<Complex64> {
        let mut w = vec![Complex64::new(0.0, 0.0); dim];
        w[candidate] = Complex64::new(1.0, 0.0);
        for _ in 0..2 {
            for existing in cols {
                let coeff = vec_inner(&w, existing);
                for (wi, ei) in w.iter_mut().zip(existing) {
                    *wi -= coeff * ei;
                }
            }
        }
        w
    };
    while cols.len() < dim {
        let best = (0..dim)
            .map(|cand| residual(cand, cols))
            .max_by(|a, b| vec_norm(a).partial_cmp(&vec_norm(b)).unwrap())
            .expect("nonzero dimension");
        let norm = vec_norm(&best);
        assert!(norm > 1e-8, "orthonormal completion degenerated");
        cols.push(best.into_iter().map(|z| z / norm).collect());
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::haar;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn identity_has_unit_spectrum() {
        let h = HermitianOperator::new(ComplexMatrix::identity(3)).unwrap();
        let eig = hermitian_eigen(&h).unwrap();
        for v in &eig.eigenvalues {
            assert!((v - 1.0).abs() < 1e-14);
        }
        let vtv = eig.eigenvectors.adjoint().mul(&eig.eigenvectors);
        assert!(vtv.sub(&ComplexMatrix::identity(3)).max_norm() < 1e-12);
    }

    #[test]
    fn diagonal_matrix_sorted_descending() {
        let m = ComplexMatrix::from_real(2, 2, &[-1.0, 0.0, 0.0, 2.0]).unwrap();
        let h = HermitianOperator::new(m).unwrap();
        let eig = hermitian_eigen(&h).unwrap();
        assert!((eig.eigenvalues[0] - 2.0).abs() < 1e-14);
        assert!((eig.eigenvalues[1] + 1.0).abs() < 1e-14);
        // eigenvector columns are a permutation of the standard basis
        assert!((eig.eigenvectors.get(1, 0).norm() - 1.0).abs() < 1e-12);
        assert!((eig.eigenvectors.get(0, 1).norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn random_reconstruction_within_tolerance() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for dim in [2usize, 4, 9, 16, 48, 81] {
            let h = haar::hermitian(dim, &mut rng);
            let eig = hermitian_eigen(&h).unwrap();
            let err = eig.reconstruct().sub(h.matrix()).fro_norm();
            assert!(
                err <= 1e-9 * dim as f64,
                "dim {dim}: reconstruction error {err}"
            );
            let unit = eig
                .eigenvectors
                .adjoint()
                .mul(&eig.eigenvectors)
                .sub(&ComplexMatrix::identity(dim))
                .fro_norm();
            assert!(unit < 1e-9, "dim {dim}: unitary defect {unit}");
        }
    }

    #[test]
    fn svd_rank_one() {
        // f e† has the single singular value ||f|| ||e||
        let e = [c(1.0, 0.0), c(0.0, 2.0)];
        let f = [c(0.0, 1.0), c(2.0, 0.0), c(1.0, -1.0)];
        let m = crate::linalg::vec_outer(&f, &e);
        let svd = svd(&m).unwrap();
        let expected = vec_norm(&f) * vec_norm(&e);
        assert!((svd.singular_values[0] - expected).abs() < 1e-12);
        assert!(svd.singular_values[1].abs() < 1e-12);
        assert!(svd.reconstruct().sub(&m).fro_norm() < 1e-12);
    }

    #[test]
    fn svd_identity_all_ones() {
        let svd = svd(&ComplexMatrix::identity(4)).unwrap();
        for s in &svd.singular_values {
            assert!((s - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn svd_random_rectangular() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for (rows, cols) in [(2usize, 3usize), (3, 2), (4, 4), (5, 3), (27, 81)] {
            let m = haar::gaussian_matrix(rows, cols, &mut rng);
            let svd = svd(&m).unwrap();
            let err = svd.reconstruct().sub(&m).fro_norm();
            assert!(err < 1e-9, "({rows},{cols}): reconstruction error {err}");
            for w in svd.singular_values.windows(2) {
                assert!(w[0] >= w[1] - 1e-12);
            }
            let uu = svd.u.adjoint().mul(&svd.u);
            assert!(uu.sub(&ComplexMatrix::identity(rows)).fro_norm() < 1e-10);
            let vv = svd.v.adjoint().mul(&svd.v);
            assert!(vv.sub(&ComplexMatrix::identity(cols)).fro_norm() < 1e-10);
        }
    }
}
