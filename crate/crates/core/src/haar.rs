//! Seeded random sampling of vectors, unitaries, projections and densities.
//!
//! Used by the randomized searches and throughout the test suites. Unitaries
//! come from QR of a complex Gaussian matrix with the phase fix on the
//! triangular factor's diagonal.

use crate::linalg::{
    vec_inner, vec_norm, Complex64, ComplexMatrix, HermitianOperator, ProjectionOperator,
};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Deterministic generator for a given seed.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gaussian(rng: &mut impl Rng) -> f64 {
    // Box-Muller
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

fn gaussian_c(rng: &mut impl Rng) -> Complex64 {
    Complex64::new(gaussian(rng), gaussian(rng))
}

/// Matrix of i.i.d. standard complex Gaussians.
pub fn gaussian_matrix(rows: usize, cols: usize, rng: &mut impl Rng) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| gaussian_c(rng))
}

/// Random unit vector, uniform on the sphere.
pub fn unit_vector(dim: usize, rng: &mut impl Rng) -> Vec<Complex64> {
    loop {
        let v: Vec<Complex64> = (0..dim).map(|_| gaussian_c(rng)).collect();
        let norm = vec_norm(&v);
        if norm > 1e-6 {
            return v.into_iter().map(|z| z / norm).collect();
        }
    }
}

/// Orthonormal `dim x k` frame, Haar-distributed columns.
pub fn orthonormal_frame(dim: usize, k: usize, rng: &mut impl Rng) -> ComplexMatrix {
    assert!(k <= dim);
    let mut cols: Vec<Vec<Complex64>> = Vec::with_capacity(k);
    while cols.len() < k {
        let mut w = unit_vector(dim, rng);
        for _ in 0..2 {
            for existing in &cols {
                let coeff = vec_inner(&w, existing);
                for (wi, ei) in w.iter_mut().zip(existing) {
                    *wi -= coeff * ei;
                }
            }
        }
        let norm = vec_norm(&w);
        if norm > 1e-6 {
            for wi in w.iter_mut() {
                *wi /= norm;
            }
            cols.push(w);
        }
    }
    ComplexMatrix::from_fn(dim, k, |i, j| cols[j][i])
}

/// Haar-like random unitary.
pub fn unitary(dim: usize, rng: &mut impl Rng) -> ComplexMatrix {
    orthonormal_frame(dim, dim, rng)
}

/// Random Hermitian matrix with Gaussian entries.
pub fn hermitian(dim: usize, rng: &mut impl Rng) -> HermitianOperator {
    HermitianOperator::symmetrized(gaussian_matrix(dim, dim, rng))
}

/// Random PSD matrix `W W†` (unnormalized).
pub fn psd(dim: usize, rng: &mut impl Rng) -> HermitianOperator {
    let w = gaussian_matrix(dim, dim, rng);
    HermitianOperator::symmetrized(w.mul(&w.adjoint()))
}

/// Random PSD contraction with spectrum rescaled onto `[0, 1]` exactly.
pub fn psd_contraction(dim: usize, rng: &mut impl Rng) -> HermitianOperator {
    let h = hermitian(dim, rng);
    let eig = crate::linalg::hermitian_eigen(&h).expect("eigensolver on random Hermitian");
    let lo = *eig.eigenvalues.last().unwrap();
    let hi = *eig.eigenvalues.first().unwrap();
    let span = (hi - lo).max(1e-12);
    let shifted = h
        .sub(&HermitianOperator::identity(dim).scale(lo))
        .scale(1.0 / span);
    HermitianOperator::symmetrized(shifted.matrix().clone())
}

/// Random full-rank density matrix; the ridge keeps it faithful and decently
/// conditioned.
pub fn density(dim: usize, rng: &mut impl Rng) -> HermitianOperator {
    let w = gaussian_matrix(dim, dim, rng);
    let mut g = w.mul(&w.adjoint()).hermitize();
    let ridge = 0.1 * g.trace().re.max(1.0) / dim as f64;
    for i in 0..dim {
        let v = g.get(i, i) + Complex64::new(ridge, 0.0);
        g.set(i, i, v);
    }
    let tr = g.trace().re;
    HermitianOperator::symmetrized(g.scale_re(1.0 / tr))
}

/// Random rank-`k` projection with Haar-distributed range.
pub fn projection(dim: usize, k: usize, rng: &mut impl Rng) -> ProjectionOperator {
    let frame = orthonormal_frame(dim, k, rng);
    ProjectionOperator::from_frame(&frame).expect("frame projection")
}

/// Random maximally entangled unit vector in `C^n ⊗ C^m` (`n <= m`):
/// `(1/sqrt(n)) sum_i (U e_i) ⊗ (V e_i)`.
pub fn maximally_entangled(n: usize, m: usize, rng: &mut impl Rng) -> Vec<Complex64> {
    assert!(n <= m);
    let u = unitary(n, rng);
    let v = unitary(m, rng);
    let mut xi = vec![Complex64::new(0.0, 0.0); n * m];
    let w = (n as f64).sqrt().recip();
    for s in 0..n {
        for i in 0..n {
            for k in 0..m {
                xi[i * m + k] += u.get(i, s) * v.get(k, s) * w;
            }
        }
    }
    xi
}

/// Random separable unit vector `e ⊗ f`.
pub fn separable(n: usize, m: usize, rng: &mut impl Rng) -> Vec<Complex64> {
    crate::linalg::vec_tensor(&unit_vector(n, rng), &unit_vector(m, rng))
}
