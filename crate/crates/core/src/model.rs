//! Measured matrix algebras, couplings and their marginals, the sub-coupling
//! completion, and the Choi-matrix correspondence between couplings of the
//! normalized traces and unital trace-preserving maps.
//!
//! Trace convention: densities satisfy `Tr(D) = 1` with the unnormalized
//! trace. A density on the `n*m`-dimensional tensor space relates to the
//! normalized-trace density `A` (with `tr(A) = 1`) by `A = n*m*D`. Capacity
//! values are state values and do not depend on the convention.

use crate::error::{Error, Result};
use crate::linalg::{
    kron, min_eigenvalue, partial_trace_a, partial_trace_b, Complex64, ComplexMatrix,
    HermitianOperator,
};

const DENSITY_TOL: f64 = 1e-9;
/// Default PSD tolerance for coupling densities.
pub const COUPLING_PSD_TOL: f64 = 1e-8;
/// Default entrywise tolerance on marginal constraints.
pub const MARGINAL_TOL: f64 = 1e-7;

/// A matrix algebra `M_n` together with a state, stored as its density
/// matrix: PSD with trace one (unnormalized trace).
#[derive(Debug, Clone)]
pub struct MeasuredAlgebra {
    density: HermitianOperator,
}

impl MeasuredAlgebra {
    pub fn new(density: HermitianOperator) -> Result<Self> {
        let floor = min_eigenvalue(&density)?;
        if floor < -DENSITY_TOL {
            return Err(Error::NotDensity {
                reason: format!("negative eigenvalue {floor:.3e}"),
            });
        }
        let tr = density.trace();
        if (tr - 1.0).abs() > DENSITY_TOL {
            return Err(Error::NotDensity {
                reason: format!("trace {tr} differs from 1"),
            });
        }
        Ok(Self { density })
    }

    /// The normalized trace state: density `I/n`.
    pub fn uniform(dim: usize) -> Self {
        Self {
            density: HermitianOperator::identity(dim).scale(1.0 / dim as f64),
        }
    }

    /// The vector state of a unit vector.
    pub fn vector_state(xi: &[Complex64]) -> Result<Self> {
        Self::new(HermitianOperator::outer(xi))
    }

    /// Diagonal state from a probability vector.
    pub fn from_probabilities(p: &[f64]) -> Result<Self> {
        let n = p.len();
        let mut m = ComplexMatrix::zeros(n, n);
        for (i, &pi) in p.iter().enumerate() {
            m.set(i, i, Complex64::new(pi, 0.0));
        }
        Self::new(HermitianOperator::symmetrized(m))
    }

    pub fn dim(&self) -> usize {
        self.density.dim()
    }

    pub fn density(&self) -> &HermitianOperator {
        &self.density
    }

    /// State value `Tr(density * x)`.
    pub fn value(&self, x: &HermitianOperator) -> f64 {
        self.density.pairing(x)
    }

    /// Whether the state is the normalized trace, within `tol` entrywise.
    pub fn is_uniform(&self, tol: f64) -> bool {
        let n = self.dim();
        let target = ComplexMatrix::identity(n).scale_re(1.0 / n as f64);
        self.density.matrix().sub(&target).max_norm() <= tol
    }
}

/// Residual report of a coupling test.
#[derive(Debug, Clone, Copy)]
pub struct CouplingCheck {
    pub is_coupling: bool,
    /// Smallest eigenvalue of the density (negative means a PSD violation).
    pub psd_floor: f64,
    /// Largest entrywise deviation of the left marginal.
    pub left_residual: f64,
    /// Largest entrywise deviation of the right marginal.
    pub right_residual: f64,
}

/// Decide whether `d` is a coupling of the two states: PSD within `tol` and
/// both partial traces equal to the prescribed densities within `tol`
/// entrywise.
pub fn is_coupling(
    d: &HermitianOperator,
    left: &MeasuredAlgebra,
    right: &MeasuredAlgebra,
    tol: f64,
) -> Result<CouplingCheck> {
    let (n, m) = (left.dim(), right.dim());
    if d.dim() != n * m {
        return Err(Error::DimensionMismatch {
            expected: n * m,
            got: d.dim(),
        });
    }
    let psd_floor = min_eigenvalue(d)?;
    let left_residual = partial_trace_b(d, n, m)?
        .matrix()
        .sub(left.density().matrix())
        .max_norm();
    let right_residual = partial_trace_a(d, n, m)?
        .matrix()
        .sub(right.density().matrix())
        .max_norm();
    Ok(CouplingCheck {
        is_coupling: psd_floor >= -tol && left_residual <= tol && right_residual <= tol,
        psd_floor,
        left_residual,
        right_residual,
    })
}

/// A trace-one positive density on the tensor space whose marginals equal the
/// two prescribed states.
#[derive(Debug, Clone)]
pub struct Coupling {
    left: MeasuredAlgebra,
    right: MeasuredAlgebra,
    density: HermitianOperator,
}

impl Coupling {
    pub fn new(
        left: MeasuredAlgebra,
        right: MeasuredAlgebra,
        density: HermitianOperator,
    ) -> Result<Self> {
        let check = is_coupling(&density, &left, &right, MARGINAL_TOL)?;
        if check.psd_floor < -COUPLING_PSD_TOL
            || check.left_residual > MARGINAL_TOL
            || check.right_residual > MARGINAL_TOL
        {
            return Err(Error::NotCoupling {
                psd_floor: check.psd_floor,
                left: check.left_residual,
                right: check.right_residual,
            });
        }
        Ok(Self {
            left,
            right,
            density,
        })
    }

    /// The product coupling `rho_phi ⊗ rho_psi`, which always exists.
    pub fn product(left: MeasuredAlgebra, right: MeasuredAlgebra) -> Self {
        let density =
            HermitianOperator::symmetrized(kron(left.density().matrix(), right.density().matrix()));
        Self {
            left,
            right,
            density,
        }
    }

    pub fn left(&self) -> &MeasuredAlgebra {
        &self.left
    }

    pub fn right(&self) -> &MeasuredAlgebra {
        &self.right
    }

    pub fn density(&self) -> &HermitianOperator {
        &self.density
    }

    /// Value the coupling assigns to an operator: `Tr(density * t)`.
    pub fn value(&self, t: &HermitianOperator) -> f64 {
        self.density.pairing(t)
    }
}

/// Complete a sub-coupling (`Tr_B D <= rho_phi`, `Tr_A D <= rho_psi` in the
/// PSD order) to a full coupling dominating it:
/// `D' = D + (rho_phi - Tr_B D) ⊗ (rho_psi - Tr_A D) / (1 - Tr D)`.
pub fn complete_subcoupling(
    d: &HermitianOperator,
    left: &MeasuredAlgebra,
    right: &MeasuredAlgebra,
    tol: f64,
) -> Result<Coupling> {
    let (n, m) = (left.dim(), right.dim());
    if d.dim() != n * m {
        return Err(Error::DimensionMismatch {
            expected: n * m,
            got: d.dim(),
        });
    }
    if min_eigenvalue(d)? < -tol {
        return Err(Error::Precondition(
            "sub-coupling completion: input is not PSD".into(),
        ));
    }
    let phi_rem = left.density().sub(&partial_trace_b(d, n, m)?);
    let psi_rem = right.density().sub(&partial_trace_a(d, n, m)?);
    if min_eigenvalue(&phi_rem)? < -tol || min_eigenvalue(&psi_rem)? < -tol {
        return Err(Error::Precondition(
            "sub-coupling completion: marginals exceed the prescribed states".into(),
        ));
    }
    let mass = d.trace();
    if (mass - 1.0).abs() <= tol {
        return Coupling::new(left.clone(), right.clone(), d.clone());
    }
    let completion = kron(phi_rem.matrix(), psi_rem.matrix()).scale_re(1.0 / (1.0 - mass));
    let density = HermitianOperator::symmetrized(d.matrix().add(&completion));
    Coupling::new(left.clone(), right.clone(), density)
}

/// The block matrix of a linear map `M_n -> M_m` on matrix units: block
/// `(i, j)` is the image of the unit `epsilon_{i,j}`.
#[derive(Debug, Clone)]
pub struct ChoiMap {
    in_dim: usize,
    out_dim: usize,
    blocks: Vec<ComplexMatrix>,
}

impl ChoiMap {
    pub fn new(in_dim: usize, out_dim: usize, blocks: Vec<ComplexMatrix>) -> Result<Self> {
        if blocks.len() != in_dim * in_dim {
            return Err(Error::DimensionMismatch {
                expected: in_dim * in_dim,
                got: blocks.len(),
            });
        }
        for b in &blocks {
            if b.rows() != out_dim || b.cols() != out_dim {
                return Err(Error::DimensionMismatch {
                    expected: out_dim,
                    got: b.rows(),
                });
            }
        }
        Ok(Self {
            in_dim,
            out_dim,
            blocks,
        })
    }

    /// Extract the block grid from an assembled `(n*m) x (n*m)` matrix.
    pub fn from_matrix(in_dim: usize, out_dim: usize, mat: &ComplexMatrix) -> Result<Self> {
        if mat.rows() != in_dim * out_dim || mat.cols() != in_dim * out_dim {
            return Err(Error::DimensionMismatch {
                expected: in_dim * out_dim,
                got: mat.rows(),
            });
        }
        let mut blocks = Vec::with_capacity(in_dim * in_dim);
        for i in 0..in_dim {
            for j in 0..in_dim {
                blocks.push(mat.block(i * out_dim, j * out_dim, out_dim, out_dim));
            }
        }
        Self::new(in_dim, out_dim, blocks)
    }

    /// The identity channel on `M_n` (blocks are the matrix units).
    pub fn identity_channel(n: usize) -> Self {
        let mut blocks = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let mut b = ComplexMatrix::zeros(n, n);
                b.set(i, j, Complex64::new(1.0, 0.0));
                blocks.push(b);
            }
        }
        Self {
            in_dim: n,
            out_dim: n,
            blocks,
        }
    }

    /// The conjugation channel `x -> U x U†` for a unitary on `C^dim`.
    pub fn conjugation(u: &ComplexMatrix) -> Self {
        let dim = u.rows();
        let mut blocks = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                let mut e = ComplexMatrix::zeros(dim, dim);
                e.set(i, j, Complex64::new(1.0, 0.0));
                blocks.push(e.conjugate_by(u));
            }
        }
        Self {
            in_dim: dim,
            out_dim: dim,
            blocks,
        }
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    pub fn block(&self, i: usize, j: usize) -> &ComplexMatrix {
        &self.blocks[i * self.in_dim + j]
    }

    /// Assemble the block grid into an `(in*out) x (in*out)` matrix.
    pub fn as_matrix(&self) -> ComplexMatrix {
        let d = self.in_dim * self.out_dim;
        let mut out = ComplexMatrix::zeros(d, d);
        for i in 0..self.in_dim {
            for j in 0..self.in_dim {
                out.set_block(i * self.out_dim, j * self.out_dim, self.block(i, j));
            }
        }
        out
    }

    /// Apply the map: `Phi(x) = sum_{i,j} x[i,j] * block(i,j)`.
    pub fn apply(&self, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        if x.rows() != self.in_dim || x.cols() != self.in_dim {
            return Err(Error::DimensionMismatch {
                expected: self.in_dim,
                got: x.rows(),
            });
        }
        let mut out = ComplexMatrix::zeros(self.out_dim, self.out_dim);
        for i in 0..self.in_dim {
            for j in 0..self.in_dim {
                out = out.add(&self.block(i, j).scale(x.get(i, j)));
            }
        }
        Ok(out)
    }

    /// `|| scale * sum_i block(i,i) - I ||_max`: unitality defect of the map
    /// scaled by `scale`.
    pub fn unital_defect(&self, scale: f64) -> f64 {
        let mut s = ComplexMatrix::zeros(self.out_dim, self.out_dim);
        for i in 0..self.in_dim {
            s = s.add(self.block(i, i));
        }
        s.scale_re(scale)
            .sub(&ComplexMatrix::identity(self.out_dim))
            .max_norm()
    }

    /// `max_{k,l} |Tr(block(k,l)) - diag_value * delta_{k,l}|`: trace
    /// preservation defect, where `diag_value` is the expected trace of the
    /// diagonal blocks.
    pub fn trace_defect(&self, diag_value: f64) -> f64 {
        let mut worst: f64 = 0.0;
        for k in 0..self.in_dim {
            for l in 0..self.in_dim {
                let expected = if k == l { diag_value } else { 0.0 };
                worst =
                    worst.max((self.block(k, l).trace() - Complex64::new(expected, 0.0)).norm());
            }
        }
        worst
    }
}

/// The Choi map of a coupling of the normalized traces: blocks
/// `B_{i,j} = n*m*D_{i,j}`, so that `(1/n) Phi` is unital and trace
/// preserving.
pub fn choi_of_coupling(c: &Coupling) -> Result<ChoiMap> {
    let (n, m) = (c.left().dim(), c.right().dim());
    if !c.left().is_uniform(MARGINAL_TOL) || !c.right().is_uniform(MARGINAL_TOL) {
        return Err(Error::Precondition(
            "Choi correspondence requires normalized-trace marginals".into(),
        ));
    }
    let scaled = c.density().matrix().scale_re((n * m) as f64);
    ChoiMap::from_matrix(n, m, &scaled)
}

/// Inverse of [`choi_of_coupling`]: a PSD Choi matrix with `(1/n) Phi` unital
/// and trace preserving yields the coupling with blocks `B_{i,j}/(n*m)`.
pub fn coupling_of_choi(phi: &ChoiMap) -> Result<Coupling> {
    let (n, m) = (phi.in_dim(), phi.out_dim());
    let tol = MARGINAL_TOL;
    let unital = phi.unital_defect(1.0 / n as f64);
    if unital > tol {
        return Err(Error::Precondition(format!(
            "map is not unital after 1/n scaling: defect {unital:.3e}"
        )));
    }
    // trace preservation w.r.t. normalized traces: Tr(B_{k,l}) = m * delta_{k,l}
    let tp = phi.trace_defect(m as f64);
    if tp > tol * (m as f64) {
        return Err(Error::Precondition(format!(
            "map is not trace preserving: defect {tp:.3e}"
        )));
    }
    let assembled = HermitianOperator::new(phi.as_matrix())?;
    let floor = min_eigenvalue(&assembled)?;
    if floor < -tol * (n * m) as f64 {
        return Err(Error::Precondition(format!(
            "Choi matrix is not PSD: floor {floor:.3e}"
        )));
    }
    let density = assembled.scale(1.0 / (n * m) as f64);
    Coupling::new(
        MeasuredAlgebra::uniform(n),
        MeasuredAlgebra::uniform(m),
        density,
    )
}

/// Apply a Choi map blockwise to the `k x k` block structure of `t`
/// (the ampliation `Phi^{(k)}`), where each block is `in_dim x in_dim`.
pub fn apply_choi_blockwise(phi: &ChoiMap, t: &HermitianOperator) -> Result<HermitianOperator> {
    let mu = phi.in_dim();
    if t.dim() % mu != 0 {
        return Err(Error::DimensionMismatch {
            expected: mu,
            got: t.dim(),
        });
    }
    let k = t.dim() / mu;
    let nu = phi.out_dim();
    let mut out = ComplexMatrix::zeros(k * nu, k * nu);
    for i in 0..k {
        for j in 0..k {
            let block = t.matrix().block(i * mu, j * mu, mu, mu);
            out.set_block(i * nu, j * nu, &phi.apply(&block)?);
        }
    }
    HermitianOperator::new(out)
}

/// For a diagonal density on `D_n ⊗ D_n` with uniform marginals: whether the
/// `n x n` grid `n * D(i, j)` is bistochastic (nonnegative entries, all row
/// and column sums 1) within `1e-9`.
pub fn bistochastic_check(d: &HermitianOperator, n: usize) -> Result<bool> {
    const TOL: f64 = 1e-9;
    if d.dim() != n * n {
        return Err(Error::DimensionMismatch {
            expected: n * n,
            got: d.dim(),
        });
    }
    let mut off = 0.0_f64;
    for r in 0..n * n {
        for c in 0..n * n {
            if r != c {
                off = off.max(d.entry(r, c).norm());
            }
        }
    }
    if off > TOL {
        return Err(Error::Precondition(format!(
            "bistochastic check requires a diagonal density (off-diagonal {off:.3e})"
        )));
    }
    let grid = |i: usize, j: usize| n as f64 * d.entry(i * n + j, i * n + j).re;
    for i in 0..n {
        for j in 0..n {
            if grid(i, j) < -TOL {
                return Ok(false);
            }
        }
    }
    for i in 0..n {
        let row: f64 = (0..n).map(|j| grid(i, j)).sum();
        let col: f64 = (0..n).map(|j| grid(j, i)).sum();
        if (row - 1.0).abs() > TOL || (col - 1.0).abs() > TOL {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Random coupling of the normalized traces on `M_n ⊗ M_n`: a mixture of
/// maximally entangled rank-one projections and the uniform product. (Only
/// square shapes: for `n < m` a maximally entangled projection has a rank-`n`
/// second marginal and is not a coupling of the traces.)
pub fn random_square_trace_coupling(n: usize, rng: &mut impl rand::Rng) -> Coupling {
    let terms = 3;
    let mut weights: Vec<f64> = (0..=terms).map(|_| rng.gen_range(0.05..1.0)).collect();
    let total: f64 = weights.iter().sum();
    for w in weights.iter_mut() {
        *w /= total;
    }
    let uniform = MeasuredAlgebra::uniform(n);
    let mut density =
        kron(uniform.density().matrix(), uniform.density().matrix()).scale_re(weights[0]);
    for w in weights.iter().skip(1) {
        let xi = crate::haar::maximally_entangled(n, n, rng);
        density = density.add(&HermitianOperator::outer(&xi).matrix().scale_re(*w));
    }
    Coupling::new(
        uniform.clone(),
        uniform,
        HermitianOperator::symmetrized(density),
    )
    .expect("mixture of trace couplings is a trace coupling")
}
