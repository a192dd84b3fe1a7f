//! Public capacity API: `alpha`, `beta`, the duality gap, the parameter `w`,
//! the channel form of `alpha`, and quantum Strassen feasibility with
//! witnesses and certificates.

use crate::error::{Error, Result};
use crate::linalg::{
    kron, min_eigenvalue, vec_norm, Complex64, ComplexMatrix, HermitianOperator, Subspace,
};
use crate::model::{ChoiMap, Coupling, MeasuredAlgebra};
use crate::sdp::{self, SolverOptions, SolverOutcome, SolverStatus};

/// Which capacity a [`CapacityResult`] carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CapacityKind {
    Alpha,
    Beta,
    W,
}

/// Convergence data copied out of a solve.
#[derive(Debug, Clone, Copy)]
pub struct SolverDiagnostics {
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub iterations: usize,
    pub status: SolverStatus,
}

impl SolverDiagnostics {
    fn from_outcome(out: &SolverOutcome) -> Self {
        Self {
            primal_residual: out.primal_residual,
            dual_residual: out.dual_residual,
            iterations: out.iterations,
            status: out.status,
        }
    }

    fn exact() -> Self {
        Self {
            primal_residual: 0.0,
            dual_residual: 0.0,
            iterations: 0,
            status: SolverStatus::Converged,
        }
    }
}

/// A capacity value with optional primal witness and dual certificate.
#[derive(Debug, Clone)]
pub struct CapacityResult {
    pub kind: CapacityKind,
    pub value: f64,
    pub witness: Option<Coupling>,
    pub certificate: Option<(HermitianOperator, HermitianOperator)>,
    /// Certificate value minus primal value of the same solve.
    pub gap: f64,
    pub diagnostics: SolverDiagnostics,
}

/// The coupling capacity: largest value a coupling of the two states assigns
/// to the positive contraction `t`.
pub fn alpha(
    t: &HermitianOperator,
    left: &MeasuredAlgebra,
    right: &MeasuredAlgebra,
    opts: &SolverOptions,
) -> Result<CapacityResult> {
    let out = sdp::solve_alpha(t, left, right, opts)?;
    let witness = if out.status == SolverStatus::Converged {
        Coupling::new(left.clone(), right.clone(), out.primal.clone()).ok()
    } else {
        None
    };
    Ok(CapacityResult {
        kind: CapacityKind::Alpha,
        value: out.value,
        witness,
        certificate: Some((out.dual_a.clone(), out.dual_b.clone())),
        gap: out.gap,
        diagnostics: SolverDiagnostics::from_outcome(&out),
    })
}

/// The dual capacity: cheapest positive covering `a ⊗ 1 + 1 ⊗ b >= t` priced
/// by the two states.
pub fn beta(
    t: &HermitianOperator,
    left: &MeasuredAlgebra,
    right: &MeasuredAlgebra,
    opts: &SolverOptions,
) -> Result<CapacityResult> {
    let out = sdp::solve_beta(t, left, right, opts)?;
    let witness = if out.status == SolverStatus::Converged {
        Coupling::new(left.clone(), right.clone(), out.primal.clone()).ok()
    } else {
        None
    };
    Ok(CapacityResult {
        kind: CapacityKind::Beta,
        value: out.value,
        witness,
        certificate: Some((out.dual_a.clone(), out.dual_b.clone())),
        gap: out.gap,
        diagnostics: SolverDiagnostics::from_outcome(&out),
    })
}

/// `beta - alpha` from two independent solves. Nonnegative up to solver
/// accuracy, and zero (within tolerance) on operators in the tensor algebra.
pub fn duality_gap(
    t: &HermitianOperator,
    left: &MeasuredAlgebra,
    right: &MeasuredAlgebra,
    opts: &SolverOptions,
) -> Result<f64> {
    let a = alpha(t, left, right, opts)?;
    let b = beta(t, left, right, opts)?;
    Ok(b.value - a.value)
}

/// The parameter `w` of a unit vector under normalized-trace marginals:
/// closed form `1 / (max(n,m) * lambda_1^2)` where `lambda_1` is the top
/// Schmidt coefficient, cross-checked against the scalar program
/// `min (1/n) sum mu_i + (1/m) sum nu_j` subject to
/// `sum lambda_i^2 (mu_i + nu_i) >= 1` solved by ratio enumeration.
pub fn w_of_vector(xi: &[Complex64], n: usize, m: usize) -> Result<CapacityResult> {
    if xi.len() != n * m {
        return Err(Error::DimensionMismatch {
            expected: n * m,
            got: xi.len(),
        });
    }
    let norm = vec_norm(xi);
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::Precondition(format!(
            "w is defined for unit vectors (norm {norm})"
        )));
    }
    let schmidt = crate::entangle::schmidt(xi, n, m)?;
    let lambda = schmidt.coefficients();
    let big = n.max(m) as f64;
    let small = n.min(m) as f64;
    let closed_form = 1.0 / (big * lambda[0] * lambda[0]);

    // independent route: a single-constraint linear program is minimized at
    // the best cost/weight ratio over the variables
    let mut best = f64::INFINITY;
    for &l in lambda {
        if l > 1e-14 {
            best = best.min((1.0 / small) / (l * l));
            best = best.min((1.0 / big) / (l * l));
        }
    }
    if (best - closed_form).abs() > 1e-9 {
        return Err(Error::Inconsistent(format!(
            "w closed form {closed_form} vs direct minimization {best}"
        )));
    }
    Ok(CapacityResult {
        kind: CapacityKind::W,
        value: closed_form,
        witness: None,
        certificate: None,
        gap: (best - closed_form).abs(),
        diagnostics: SolverDiagnostics::exact(),
    })
}

/// Evaluate the channel form of `alpha`: given a unital trace-preserving map
/// `Phi : M_m -> M_n` (as a Choi block grid) and `t` on the `n*m` tensor
/// space, returns `< Phi^{(n)}(t) zeta, zeta >` with
/// `zeta = (1/sqrt n) sum_i e_i ⊗ e_i`. This is a lower bound for `alpha(t)`
/// under normalized-trace marginals.
pub fn alpha_channel_form(t: &HermitianOperator, phi: &ChoiMap) -> Result<f64> {
    let (m, n) = (phi.in_dim(), phi.out_dim());
    if t.dim() != n * m {
        return Err(Error::DimensionMismatch {
            expected: n * m,
            got: t.dim(),
        });
    }
    const TOL: f64 = 1e-7;
    let unital = phi.unital_defect(1.0);
    if unital > TOL {
        return Err(Error::Precondition(format!(
            "channel is not unital: defect {unital:.3e}"
        )));
    }
    // normalized-trace preservation: Tr(Phi(eps_kl)) = (n/m) delta_kl
    let tp = phi.trace_defect(n as f64 / m as f64);
    if tp > TOL {
        return Err(Error::Precondition(format!(
            "channel is not trace preserving: defect {tp:.3e}"
        )));
    }
    let choi_floor = min_eigenvalue(&HermitianOperator::new(phi.as_matrix())?)?;
    if choi_floor < -TOL {
        return Err(Error::Precondition(format!(
            "channel is not completely positive: Choi floor {choi_floor:.3e}"
        )));
    }
    let mapped = crate::model::apply_choi_blockwise(phi, t)?;
    let zeta = canonical_maximally_entangled(n);
    Ok(mapped.quadratic_form(&zeta))
}

/// `(1/sqrt n) sum_i e_i ⊗ e_i` in the canonical basis.
pub fn canonical_maximally_entangled(n: usize) -> Vec<Complex64> {
    let mut zeta = vec![Complex64::new(0.0, 0.0); n * n];
    let w = 1.0 / (n as f64).sqrt();
    for i in 0..n {
        zeta[i * n + i] = Complex64::new(w, 0.0);
    }
    zeta
}

/// Objective of the unitary-conjugation channel family:
/// `f(U) = < T eta, eta >` with `eta = (I ⊗ U†) zeta`.
fn unitary_objective(t: &HermitianOperator, u: &ComplexMatrix) -> f64 {
    let n = u.rows();
    let w = 1.0 / (n as f64).sqrt();
    let mut eta = vec![Complex64::new(0.0, 0.0); n * n];
    for i in 0..n {
        for k in 0..n {
            eta[i * n + k] = u.get(i, k).conj() * w;
        }
    }
    t.quadratic_form(&eta)
}

/// Lower-bound `alpha(t)` for trace marginals on `M_n ⊗ M_n` by maximizing
/// the channel form over unitary conjugations: seeded random starts plus a
/// Schmidt-matched start from the top eigenvector of `t`, each refined by a
/// coordinate hill climb on the unitary group with step halving.
///
/// For `n = 2` and rank-one `t` the unitary conjugations exhaust the extreme
/// unital channels, so the result matches `alpha` itself; for `n >= 3` it is
/// a lower bound only.
pub fn alpha_unitary_search(t: &HermitianOperator, restarts: usize, seed: u64) -> Result<f64> {
    let dim = t.dim();
    let n = (dim as f64).sqrt().round() as usize;
    if n * n != dim {
        return Err(Error::Precondition(format!(
            "unitary search needs a square tensor space, got dim {dim}"
        )));
    }
    let mut rng = crate::haar::rng(seed);
    let mut best = f64::NEG_INFINITY;

    // Schmidt-matched start: for t with top eigenvector of Schmidt frames
    // (e_i), (f_i), the unitary sending f_i to e_i aligns the frames.
    let eig = crate::linalg::hermitian_eigen(t)?;
    let top = eig.eigenvector(0);
    if let Ok(schmidt) = crate::entangle::schmidt(&top, n, n) {
        let lf = schmidt.left_frame();
        let rf = schmidt.right_frame();
        let r = schmidt.coefficients().len();
        let mut cols: Vec<Vec<Complex64>> = Vec::with_capacity(n);
        // U f_i = e_i: build sum_i e_i f_i† and complete unitarily
        let mut u = ComplexMatrix::zeros(n, n);
        for s in 0..r {
            let e_s = lf.column(s);
            let f_s = rf.column(s);
            for i in 0..n {
                for j in 0..n {
                    let v = u.get(i, j) + e_s[i] * f_s[j].conj();
                    u.set(i, j, v);
                }
            }
        }
        // complete to a unitary via orthonormalization of the columns
        for j in 0..n {
            cols.push(u.column(j));
        }
        let mut frame: Vec<Vec<Complex64>> = Vec::new();
        for w in cols {
            let mut w = w;
            for existing in &frame {
                let coeff = crate::linalg::vec_inner(&w, existing);
                for (wi, ei) in w.iter_mut().zip(existing) {
                    *wi -= coeff * ei;
                }
            }
            let norm = vec_norm(&w);
            if norm > 1e-8 {
                for wi in w.iter_mut() {
                    *wi /= norm;
                }
                frame.push(w);
            }
        }
        crate::linalg::complete_orthonormal_frame(&mut frame, n);
        let u = ComplexMatrix::from_fn(n, n, |i, j| frame[j][i]);
        best = best.max(hill_climb(t, u));
    }

    for _ in 0..restarts {
        let u = crate::haar::unitary(n, &mut rng);
        best = best.max(hill_climb(t, u));
    }
    Ok(best)
}

/// Greedy coordinate refinement over plane rotations and phases, with step
/// halving down to 1e-7 and a sweep budget.
fn hill_climb(t: &HermitianOperator, mut u: ComplexMatrix) -> f64 {
    let n = u.rows();
    let mut value = unitary_objective(t, &u);
    let mut step = 0.5_f64;
    let mut sweeps = 0usize;
    while step > 1e-7 && sweeps < 600 {
        sweeps += 1;
        let mut improved = false;
        for k in 0..n {
            for l in 0..n {
                if k == l {
                    continue;
                }
                for &sign in &[1.0_f64, -1.0] {
                    for imaginary in [false, true] {
                        let candidate = apply_rotation(&u, k, l, sign * step, imaginary);
                        let cand_value = unitary_objective(t, &candidate);
                        if cand_value > value + 1e-15 {
                            value = cand_value;
                            u = candidate;
                            improved = true;
                        }
                    }
                }
            }
        }
        for k in 0..n {
            for &sign in &[1.0_f64, -1.0] {
                let candidate = apply_phase(&u, k, sign * step);
                let cand_value = unitary_objective(t, &candidate);
                if cand_value > value + 1e-15 {
                    value = cand_value;
                    u = candidate;
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    value
}

/// Left-multiply by a plane rotation in rows `(k, l)`; `imaginary` selects
/// the `[[c, is], [is, c]]` family instead of `[[c, -s], [s, c]]`.
fn apply_rotation(
    u: &ComplexMatrix,
    k: usize,
    l: usize,
    angle: f64,
    imaginary: bool,
) -> ComplexMatrix {
    let mut out = u.clone();
    let (c, s) = (angle.cos(), angle.sin());
    for j in 0..u.cols() {
        let uk = u.get(k, j);
        let ul = u.get(l, j);
        if imaginary {
            let is = Complex64::new(0.0, s);
            out.set(k, j, uk * c + ul * is);
            out.set(l, j, uk * is + ul * c);
        } else {
            out.set(k, j, uk * c - ul * s);
            out.set(l, j, uk * s + ul * c);
        }
    }
    out
}

fn apply_phase(u: &ComplexMatrix, k: usize, angle: f64) -> ComplexMatrix {
    let mut out = u.clone();
    let phase = Complex64::new(angle.cos(), angle.sin());
    for j in 0..u.cols() {
        out.set(k, j, u.get(k, j) * phase);
    }
    out
}

/// Verdict of the coupling-with-prescribed-support feasibility problem.
#[derive(Debug, Clone)]
pub struct StrassenVerdict {
    pub feasible: bool,
    /// Optimizing coupling when feasible.
    pub witness: Option<Coupling>,
    /// `(a1, a2)` violating the separation condition when infeasible:
    /// the projection onto the orthocomplement dominates `a1 ⊗ I - I ⊗ a2`
    /// while `tr(rho_1 a1) > tr(rho_2 a2)`.
    pub certificate: Option<(HermitianOperator, HermitianOperator)>,
    pub alpha_value: f64,
    /// `||(I - E) D (I - E)||_F` of the witness.
    pub support_residual: Option<f64>,
    /// `tr(rho_1 a1) - tr(rho_2 a2)` of the certificate.
    pub margin: Option<f64>,
    /// Set when `alpha` lands within solver accuracy of the decision
    /// threshold `1 - decision_tol`.
    pub indeterminate: bool,
    pub diagnostics: SolverDiagnostics,
}

const STRASSEN_DECISION_TOL: f64 = 1e-6;

/// Decide whether some coupling of the two states is supported in the
/// subspace, by testing `alpha(E_X) = 1`.
pub fn strassen_decide(
    x: &Subspace,
    left: &MeasuredAlgebra,
    right: &MeasuredAlgebra,
    opts: &SolverOptions,
) -> Result<StrassenVerdict> {
    let (n, m) = (left.dim(), right.dim());
    if x.ambient_dim() != n * m {
        return Err(Error::DimensionMismatch {
            expected: n * m,
            got: x.ambient_dim(),
        });
    }
    let e = x.projection()?;
    let out = sdp::solve_alpha(e.base(), left, right, opts)?;
    let alpha_value = out.value;
    let feasible = alpha_value >= 1.0 - STRASSEN_DECISION_TOL;
    let indeterminate =
        (alpha_value - (1.0 - STRASSEN_DECISION_TOL)).abs() <= 10.0 * opts.residual_tol;
    let diagnostics = SolverDiagnostics::from_outcome(&out);

    if feasible {
        let comp = e.complement();
        let residual = comp
            .matrix()
            .mul(out.primal.matrix())
            .mul(comp.matrix())
            .fro_norm();
        let witness = Coupling::new(left.clone(), right.clone(), out.primal.clone()).ok();
        Ok(StrassenVerdict {
            feasible: true,
            witness,
            certificate: None,
            alpha_value,
            support_residual: Some(residual),
            margin: None,
            indeterminate,
            diagnostics,
        })
    } else {
        // from the covering certificate a ⊗ 1 + 1 ⊗ b >= E_X with
        // phi(a) + psi(b) < 1: set a1 = I - a, a2 = b, so that
        // E_{X⊥} >= a1 ⊗ I - I ⊗ a2 while tr(rho1 a1) - tr(rho2 a2) = 1 - beta > 0
        let a1 = HermitianOperator::identity(n).sub(&out.dual_a);
        let a2 = out.dual_b.clone();
        let margin = left.value(&a1) - right.value(&a2);
        Ok(StrassenVerdict {
            feasible: false,
            witness: None,
            certificate: Some((a1, a2)),
            alpha_value,
            support_residual: None,
            margin: Some(margin),
            indeterminate,
            diagnostics,
        })
    }
}

/// Convenience: rank-one projections `E_xi = xi xi†` for solver inputs.
pub fn rank_one(xi: &[Complex64]) -> Result<HermitianOperator> {
    let norm = vec_norm(xi);
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::Precondition(format!(
            "rank-one projection needs a unit vector (norm {norm})"
        )));
    }
    Ok(HermitianOperator::outer(xi))
}

/// Product projection `e ⊗ f`.
pub fn product_projection(
    e: &crate::linalg::ProjectionOperator,
    f: &crate::linalg::ProjectionOperator,
) -> HermitianOperator {
    HermitianOperator::symmetrized(kron(e.matrix(), f.matrix()))
}
