//! Tensor-product operations: Kronecker products, partial traces, the PSD
//! cone projection and projection-lattice operations.

use super::eigen::eigen_raw;
use super::hermitian::{HermitianOperator, ProjectionOperator};
use super::matrix::ComplexMatrix;
use crate::error::{Error, Result};

/// Kronecker product under the global index pairing `(i, k) -> i * rows(B) + k`:
/// `(A ⊗ B)[(i,k),(j,l)] = A[i,j] B[k,l]`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (ra, ca) = (a.rows(), a.cols());
    let (rb, cb) = (b.rows(), b.cols());
    let mut out = ComplexMatrix::zeros(ra * rb, ca * cb);
    for i in 0..ra {
        for j in 0..ca {
            let aij = a.get(i, j);
            if aij.re == 0.0 && aij.im == 0.0 {
                continue;
            }
            for k in 0..rb {
                for l in 0..cb {
                    out.set(i * rb + k, j * cb + l, aij * b.get(k, l));
                }
            }
        }
    }
    out
}

/// Kronecker product of Hermitian operators.
pub fn kron_herm(a: &HermitianOperator, b: &HermitianOperator) -> HermitianOperator {
    HermitianOperator::symmetrized(kron(a.matrix(), b.matrix()))
}

pub(crate) fn partial_trace_a_raw(t: &ComplexMatrix, n: usize, m: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(m, m, |k, l| {
        (0..n).map(|i| t.get(i * m + k, i * m + l)).sum()
    })
}

pub(crate) fn partial_trace_b_raw(t: &ComplexMatrix, n: usize, m: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(n, n, |i, j| {
        (0..m).map(|k| t.get(i * m + k, j * m + k)).sum()
    })
}

/// Trace out the first (n-dimensional) factor, defined by the pairing
/// identity `Tr(Tr_A(T) B) = Tr(T (I ⊗ B))` for all `B`.
pub fn partial_trace_a(t: &HermitianOperator, n: usize, m: usize) -> Result<HermitianOperator> {
    if t.dim() != n * m {
        return Err(Error::DimensionMismatch {
            expected: n * m,
            got: t.dim(),
        });
    }
    Ok(HermitianOperator::symmetrized(partial_trace_a_raw(
        t.matrix(),
        n,
        m,
    )))
}

/// Trace out the second (m-dimensional) factor: `Tr(Tr_B(T) A) = Tr(T (A ⊗ I))`.
pub fn partial_trace_b(t: &HermitianOperator, n: usize, m: usize) -> Result<HermitianOperator> {
    if t.dim() != n * m {
        return Err(Error::DimensionMismatch {
            expected: n * m,
            got: t.dim(),
        });
    }
    Ok(HermitianOperator::symmetrized(partial_trace_b_raw(
        t.matrix(),
        n,
        m,
    )))
}

pub(crate) fn psd_project_raw(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    let (values, vectors) = eigen_raw(m)?;
    let n = m.rows();
    let mut out = ComplexMatrix::zeros(n, n);
    for (k, &lambda) in values.iter().enumerate() {
        if lambda <= 0.0 {
            continue;
        }
        let col = vectors.column(k);
        for i in 0..n {
            let li = col[i] * lambda;
            for j in 0..n {
                let v = out.get(i, j) + li * col[j].conj();
                out.set(i, j, v);
            }
        }
    }
    Ok(out.hermitize())
}

/// Nearest positive semidefinite matrix in Frobenius norm: clamp negative
/// eigenvalues to zero.
pub fn psd_project(h: &HermitianOperator) -> Result<HermitianOperator> {
    Ok(HermitianOperator::symmetrized(psd_project_raw(h.matrix())?))
}

/// Smallest eigenvalue of a Hermitian operator.
pub fn min_eigenvalue(h: &HermitianOperator) -> Result<f64> {
    let (values, _) = eigen_raw(h.matrix())?;
    Ok(values.last().copied().unwrap_or(0.0))
}

/// Largest eigenvalue of a Hermitian operator.
pub fn max_eigenvalue(h: &HermitianOperator) -> Result<f64> {
    let (values, _) = eigen_raw(h.matrix())?;
    Ok(values.first().copied().unwrap_or(0.0))
}

/// Lattice join of the ampliations `p ⊗ 1` and `1 ⊗ q`:
/// `(p ⊗ 1) ∨ (1 ⊗ q) = I - p⊥ ⊗ q⊥`.
pub fn proj_join(p: &ProjectionOperator, q: &ProjectionOperator) -> Result<ProjectionOperator> {
    let comp = kron_herm(p.complement().base(), q.complement().base());
    let dim = p.dim() * q.dim();
    ProjectionOperator::new(HermitianOperator::identity(dim).sub(&comp))
}

/// Spectral projection of a PSD operator onto eigenvalues above `tol`
/// (default `1e-8 * lambda_max`).
pub fn range_projection(t: &HermitianOperator, tol: Option<f64>) -> Result<ProjectionOperator> {
    let (values, vectors) = eigen_raw(t.matrix())?;
    let lambda_max = values.first().copied().unwrap_or(0.0).max(0.0);
    let cutoff = tol.unwrap_or(1e-8 * lambda_max);
    let n = t.dim();
    let mut out = ComplexMatrix::zeros(n, n);
    for (k, &lambda) in values.iter().enumerate() {
        if lambda <= cutoff {
            continue;
        }
        let col = vectors.column(k);
        for i in 0..n {
            for j in 0..n {
                let v = out.get(i, j) + col[i] * col[j].conj();
                out.set(i, j, v);
            }
        }
    }
    ProjectionOperator::new(HermitianOperator::symmetrized(out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::haar;
    use crate::linalg::Complex64;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn unit_matrix(dim: usize, i: usize, j: usize) -> ComplexMatrix {
        let mut m = ComplexMatrix::zeros(dim, dim);
        m.set(i, j, c(1.0, 0.0));
        m
    }

    #[test]
    fn kron_identities() {
        let i2 = ComplexMatrix::identity(2);
        assert!(kron(&i2, &i2).sub(&ComplexMatrix::identity(4)).max_norm() < 1e-15);

        // epsilon_{0,0} ⊗ epsilon_{1,1} has its single 1 at flat index (1, 1)
        let e00 = unit_matrix(2, 0, 0);
        let e11 = unit_matrix(2, 1, 1);
        let k = kron(&e00, &e11);
        for i in 0..4 {
            for j in 0..4 {
                let expected = if (i, j) == (1, 1) { 1.0 } else { 0.0 };
                assert!((k.get(i, j) - c(expected, 0.0)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn kron_mixed_product_rule() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10 {
            let a = haar::gaussian_matrix(2, 2, &mut rng);
            let b = haar::gaussian_matrix(2, 2, &mut rng);
            let cm = haar::gaussian_matrix(2, 2, &mut rng);
            let d = haar::gaussian_matrix(2, 2, &mut rng);
            let lhs = kron(&a, &b).mul(&kron(&cm, &d));
            let rhs = kron(&a.mul(&cm), &b.mul(&d));
            assert!(lhs.sub(&rhs).max_norm() < 1e-12);
        }
    }

    #[test]
    fn partial_trace_of_product_state() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let rho = haar::density(3, &mut rng);
        let tau = haar::density(2, &mut rng);
        let prod = kron_herm(&rho, &tau);
        let back = partial_trace_b(&prod, 3, 2).unwrap();
        assert!(back.matrix().sub(rho.matrix()).max_norm() < 1e-12);
        let back_a = partial_trace_a(&prod, 3, 2).unwrap();
        assert!(back_a.matrix().sub(tau.matrix()).max_norm() < 1e-12);
    }

    #[test]
    fn partial_trace_of_identity() {
        let id = HermitianOperator::identity(6);
        let ta = partial_trace_a(&id, 2, 3).unwrap();
        assert!(
            ta.matrix()
                .sub(&ComplexMatrix::identity(3).scale_re(2.0))
                .max_norm()
                < 1e-14
        );
        let tb = partial_trace_b(&id, 2, 3).unwrap();
        assert!(
            tb.matrix()
                .sub(&ComplexMatrix::identity(2).scale_re(3.0))
                .max_norm()
                < 1e-14
        );
    }

    /// The defining pairing identity, checked on the full matrix-unit basis.
    #[test]
    fn partial_trace_pairing_identity_on_unit_basis() {
        let (n, m) = (2usize, 3usize);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let t = haar::hermitian(n * m, &mut rng);
        let ta = partial_trace_a(&t, n, m).unwrap();
        let tb = partial_trace_b(&t, n, m).unwrap();
        for k in 0..m {
            for l in 0..m {
                let b = unit_matrix(m, k, l);
                let lhs = ta.matrix().mul(&b).trace();
                let rhs = t
                    .matrix()
                    .mul(&kron(&ComplexMatrix::identity(n), &b))
                    .trace();
                assert!((lhs - rhs).norm() < 1e-12);
            }
        }
        for i in 0..n {
            for j in 0..n {
                let a = unit_matrix(n, i, j);
                let lhs = tb.matrix().mul(&a).trace();
                let rhs = t
                    .matrix()
                    .mul(&kron(&a, &ComplexMatrix::identity(m)))
                    .trace();
                assert!((lhs - rhs).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn psd_project_fixed_point_and_clamp() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let psd = haar::psd(3, &mut rng);
        let proj = psd_project(&psd).unwrap();
        assert!(proj.matrix().sub(psd.matrix()).max_norm() < 1e-10);

        let m = ComplexMatrix::new(
            2,
            2,
            vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)],
        )
        .unwrap();
        let clamped = psd_project(&HermitianOperator::new(m).unwrap()).unwrap();
        assert!((clamped.entry(0, 0) - c(1.0, 0.0)).norm() < 1e-14);
        assert!(clamped.entry(1, 1).norm() < 1e-14);
    }

    /// Nearest-point property against the eigenbasis clamp recomputed from
    /// scratch, plus spot checks that sampled PSD alternatives are no closer.
    #[test]
    fn psd_project_minimizes_frobenius_distance() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..10 {
            let h = haar::hermitian(4, &mut rng);
            let p = psd_project(&h).unwrap();
            let dist = p.sub(&h).fro_norm();

            let eig = crate::linalg::hermitian_eigen(&h).unwrap();
            let clamp_dist = eig
                .eigenvalues
                .iter()
                .map(|&l| if l < 0.0 { l * l } else { 0.0 })
                .sum::<f64>()
                .sqrt();
            assert!((dist - clamp_dist).abs() < 1e-10);

            for _ in 0..10 {
                let alt = haar::psd(4, &mut rng);
                assert!(dist <= alt.sub(&h).fro_norm() + 1e-10);
            }
        }
    }

    #[test]
    fn psd_project_idempotent_and_nonexpansive() {
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        for _ in 0..10 {
            let a = haar::hermitian(3, &mut rng);
            let b = haar::hermitian(3, &mut rng);
            let pa = psd_project(&a).unwrap();
            let pb = psd_project(&b).unwrap();
            assert!(
                psd_project(&pa)
                    .unwrap()
                    .matrix()
                    .sub(pa.matrix())
                    .max_norm()
                    < 1e-10
            );
            assert!(pa.sub(&pb).fro_norm() <= a.sub(&b).fro_norm() + 1e-10);
        }
    }

    #[test]
    fn join_extremes() {
        let zero2 = ProjectionOperator::zero(2);
        let zero3 = ProjectionOperator::zero(3);
        let j = proj_join(&zero2, &zero3).unwrap();
        assert_eq!(j.rank(), 0);

        let id2 = ProjectionOperator::identity(2);
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let q = haar::projection(3, 1, &mut rng);
        let j = proj_join(&id2, &q).unwrap();
        assert_eq!(j.rank(), 6);
    }

    #[test]
    fn join_rank_formula_on_random_projections() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        for _ in 0..10 {
            let (n, m) = (3usize, 3usize);
            let rp = 1 + (rand::Rng::gen_range(&mut rng, 0..n - 1));
            let rq = 1 + (rand::Rng::gen_range(&mut rng, 0..m - 1));
            let p = haar::projection(n, rp, &mut rng);
            let q = haar::projection(m, rq, &mut rng);
            let j = proj_join(&p, &q).unwrap();
            assert_eq!(j.rank(), n * m - (n - rp) * (m - rq));
        }
    }

    #[test]
    fn range_projection_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let p = haar::projection(4, 2, &mut rng);
        let rp = range_projection(p.base(), None).unwrap();
        assert!(rp.matrix().sub(p.matrix()).max_norm() < 1e-9);

        let d = HermitianOperator::new(
            ComplexMatrix::new(
                2,
                2,
                vec![c(0.5, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)],
            )
            .unwrap(),
        )
        .unwrap();
        let rd = range_projection(&d, None).unwrap();
        assert!((rd.matrix().get(0, 0) - c(1.0, 0.0)).norm() < 1e-12);
        assert!(rd.matrix().get(1, 1).norm() < 1e-12);

        // E T = T for E = range projection of PSD T
        let t = haar::psd(4, &mut rng);
        let e = range_projection(&t, None).unwrap();
        let et = e.matrix().mul(t.matrix());
        assert!(et.sub(t.matrix()).max_norm() < 1e-8 * 4.0);
    }
}
