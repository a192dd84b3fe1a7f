//! Self-contained dense complex linear algebra.
//!
//! Everything downstream is built on the row-major [`ComplexMatrix`], the
//! validated [`HermitianOperator`] / [`ProjectionOperator`] wrappers, a cyclic
//! Jacobi eigensolver for complex Hermitian matrices, and the handful of
//! tensor-product operations (Kronecker products, partial traces, lattice
//! join of projections) that the capacity programs are phrased in.
//!
//! Index convention, fixed globally: a tensor-product index pair `(i, k)` with
//! `i < n`, `k < m` maps to the flat row-major index `i * m + k`.

mod eigen;
mod hermitian;
mod matrix;
mod ops;

pub(crate) use eigen::complete_orthonormal as complete_orthonormal_frame;
pub use eigen::{hermitian_eigen, svd, EigenDecomposition, Svd};
pub use hermitian::{HermitianOperator, ProjectionOperator, Subspace};
pub use matrix::{
    vec_inner, vec_norm, vec_outer, vec_scale, vec_sub, vec_tensor, Complex64, ComplexMatrix,
};
pub use ops::{
    kron, kron_herm, max_eigenvalue, min_eigenvalue, partial_trace_a, partial_trace_b, proj_join,
    psd_project, range_projection,
};
pub(crate) use ops::{partial_trace_a_raw, partial_trace_b_raw, psd_project_raw};
