//! Dense conic solvers for the two capacity programs.
//!
//! `solve_alpha` maximizes `Tr(T D)` over couplings `D` (PSD with both
//! marginals prescribed) by operator splitting: the iterate is alternately
//! projected onto the marginal affine set (closed form, with the linear
//! objective folded into that step) and onto the PSD cone, with scaled dual
//! updates in between. The covering certificate `(a, b)` with
//! `a ⊗ 1 + 1 ⊗ b ≥ T` is recovered from the multipliers of the affine
//! projection.
//!
//! `solve_beta` runs the same engine on the covering program's own conic
//! form, phrased through sub-couplings: `max Tr(T y)` over `y >= 0` with
//! `Tr_B y <= rho_phi`, `Tr_A y <= rho_psi` (slack blocks make the
//! inequalities affine-plus-cone). That program always attains its optimum
//! and its value equals the covering infimum `inf {phi(a) + psi(b)}` by conic
//! duality (the covering program has the strictly feasible point
//! `a = b = I`); the minimizing covers are again read off the multipliers.
//! Solving `beta` this way keeps its value certifiable even for non-faithful
//! states, where the covering infimum need not be attained and a splitting
//! directly on `(a, b)` can approach the value arbitrarily slowly.
//! `solve_beta_covering` implements that direct splitting anyway, as an
//! independent cross-check for well-behaved instances.

use crate::error::{Error, Result};
use crate::linalg::{kron, max_eigenvalue, min_eigenvalue, ComplexMatrix, HermitianOperator};
use crate::model::{Coupling, MeasuredAlgebra};
use rand::Rng;

/// Knobs for the splitting iteration.
#[derive(Debug, Clone)]
pub struct SolverOptions {
    pub max_iterations: usize,
    pub residual_tol: f64,
    /// Initial penalty of the augmented term; rebalanced internally.
    pub penalty: f64,
    /// Reserved for randomized restarts of stalled solves.
    pub seed: u64,
    pub over_relaxation: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            max_iterations: 50_000,
            residual_tol: 1e-8,
            penalty: 1.0,
            seed: 0,
            over_relaxation: 1.6,
        }
    }
}

impl SolverOptions {
    fn validate(&self) -> Result<()> {
        if self.residual_tol <= 0.0 {
            return Err(Error::Precondition("residual_tol must be positive".into()));
        }
        if self.max_iterations == 0 {
            return Err(Error::Precondition("max_iterations must be >= 1".into()));
        }
        if !(1.0..2.0).contains(&self.over_relaxation) {
            return Err(Error::Precondition(
                "over_relaxation must lie in [1, 2)".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverStatus {
    Converged,
    MaxIterations,
    Infeasible,
}

/// Result of one solve: optimal value, primal witness, covering certificate
/// and convergence data.
#[derive(Debug, Clone)]
pub struct SolverOutcome {
    pub value: f64,
    /// For `solve_alpha`: the optimizing coupling density. For `solve_beta`:
    /// the optimizing sub-coupling of the dual form.
    pub primal: HermitianOperator,
    pub dual_a: HermitianOperator,
    pub dual_b: HermitianOperator,
    pub primal_residual: f64,
    pub dual_residual: f64,
    /// Certificate value minus primal value from the same run.
    pub gap: f64,
    pub iterations: usize,
    pub status: SolverStatus,
}

fn check_problem(
    t: &HermitianOperator,
    left: &MeasuredAlgebra,
    right: &MeasuredAlgebra,
) -> Result<()> {
    let (n, m) = (left.dim(), right.dim());
    if t.dim() != n * m {
        return Err(Error::DimensionMismatch {
            expected: n * m,
            got: t.dim(),
        });
    }
    const TOL: f64 = 1e-9;
    let lo = min_eigenvalue(t)?;
    let hi = max_eigenvalue(t)?;
    if lo < -TOL || hi > 1.0 + TOL {
        return Err(Error::Precondition(format!(
            "operator must be a positive contraction (spectrum [{lo:.3e}, {hi:.3e}])"
        )));
    }
    Ok(())
}

/// Frobenius-orthogonal projection onto the affine set
/// `{X Hermitian : Tr_B X = rho_phi, Tr_A X = rho_psi}`, together with the
/// multipliers `(y_a, y_b)` such that the output is
/// `X = M + y_a ⊗ I + I ⊗ y_b`.
///
/// The constraint Gram operator is `C C*(a, b) = (m a + Tr(b) I, Tr(a) I + n b)`;
/// its one-dimensional kernel `(c I, -c I)` is fixed by the gauge `Tr(y_b) = 0`.
fn affine_project_multipliers(
    m_in: &ComplexMatrix,
    left: &MeasuredAlgebra,
    right: &MeasuredAlgebra,
) -> (ComplexMatrix, ComplexMatrix, ComplexMatrix) {
    let (n, m) = (left.dim(), right.dim());
    let tr_b = crate::linalg::partial_trace_b_raw(m_in, n, m);
    let tr_a = crate::linalg::partial_trace_a_raw(m_in, n, m);
    let r_a = left.density().matrix().sub(&tr_b);
    let r_b = right.density().matrix().sub(&tr_a);
    let y_a = r_a.scale_re(1.0 / m as f64);
    let tr_ra = r_a.trace().re;
    let y_b = r_b
        .sub(&ComplexMatrix::identity(m).scale_re(tr_ra / m as f64))
        .scale_re(1.0 / n as f64);
    let x = m_in
        .add(&kron(&y_a, &ComplexMatrix::identity(m)))
        .add(&kron(&ComplexMatrix::identity(n), &y_b));
    (x, y_a, y_b)
}

/// Public form of the affine projection; see the module notes.
pub fn affine_project(
    d: &HermitianOperator,
    left: &MeasuredAlgebra,
    right: &MeasuredAlgebra,
) -> Result<HermitianOperator> {
    let (n, m) = (left.dim(), right.dim());
    if d.dim() != n * m {
        return Err(Error::DimensionMismatch {
            expected: n * m,
            got: d.dim(),
        });
    }
    let (x, _, _) = affine_project_multipliers(d.matrix(), left, right);
    Ok(HermitianOperator::symmetrized(x))
}

/// Shift a recovered Hermitian certificate pair to the balanced PSD gauge:
/// `a - cI, b + cI` with `c = (min_eig(a) - min_eig(b)) / 2`, which leaves
/// `a ⊗ 1 + 1 ⊗ b` and `phi(a) + psi(b)` unchanged.
fn balance_certificate(
    a: HermitianOperator,
    b: HermitianOperator,
) -> Result<(HermitianOperator, HermitianOperator)> {
    let sa = min_eigenvalue(&a)?;
    let sb = min_eigenvalue(&b)?;
    let c = (sa - sb) / 2.0;
    Ok((
        a.sub(&HermitianOperator::identity(a.dim()).scale(c)),
        b.add(&HermitianOperator::identity(b.dim()).scale(c)),
    ))
}

/// Facial reduction data for rank-deficient marginal states.
///
/// Every coupling (and sub-coupling) density is supported on
/// `supp(rho_phi) ⊗ supp(rho_psi)`: testing the marginal identity on vectors
/// orthogonal to a state's support forces the corresponding block of the PSD
/// density to vanish. Compressing to the support subspaces therefore leaves
/// both capacity values unchanged while making the reduced states faithful,
/// which restores strict feasibility and a fast splitting iteration.
struct FaceReduction {
    iso_left: ComplexMatrix,
    iso_right: ComplexMatrix,
    left_red: MeasuredAlgebra,
    right_red: MeasuredAlgebra,
    t_red: HermitianOperator,
}

const SUPPORT_RANK_TOL: f64 = 1e-12;

fn support_isometry(state: &MeasuredAlgebra) -> Result<Option<ComplexMatrix>> {
    let eig = crate::linalg::hermitian_eigen(state.density())?;
    let lead = eig.eigenvalues.first().copied().unwrap_or(0.0);
    let kept: Vec<usize> = (0..state.dim())
        .filter(|&k| eig.eigenvalues[k] > SUPPORT_RANK_TOL * lead.max(1e-300))
        .collect();
    if kept.len() == state.dim() {
        return Ok(None);
    }
    Ok(Some(ComplexMatrix::from_fn(
        state.dim(),
        kept.len(),
        |i, j| eig.eigenvectors.get(i, kept[j]),
    )))
}

fn face_reduction(
    t: &HermitianOperator,
    left: &MeasuredAlgebra,
    right: &MeasuredAlgebra,
) -> Result<Option<FaceReduction>> {
    let vl = support_isometry(left)?;
    let vr = support_isometry(right)?;
    if vl.is_none() && vr.is_none() {
        return Ok(None);
    }
    let iso_left = vl.unwrap_or_else(|| ComplexMatrix::identity(left.dim()));
    let iso_right = vr.unwrap_or_else(|| ComplexMatrix::identity(right.dim()));
    let reduce_state = |state: &MeasuredAlgebra, iso: &ComplexMatrix| -> Result<MeasuredAlgebra> {
        let compressed = iso.adjoint().mul(state.density().matrix()).mul(iso);
        let h = HermitianOperator::symmetrized(compressed);
        let tr = h.trace();
        MeasuredAlgebra::new(h.scale(1.0 / tr))
    };
    let left_red = reduce_state(left, &iso_left)?;
    let right_red = reduce_state(right, &iso_right)?;
    let w = kron(&iso_left, &iso_right);
    let t_red = HermitianOperator::symmetrized(w.adjoint().mul(t.matrix()).mul(&w));
    Ok(Some(FaceReduction {
        iso_left,
        iso_right,
        left_red,
        right_red,
        t_red,
    }))
}

impl FaceReduction {
    /// Lift a reduced density back to the full space.
    fn lift_density(&self, d: &HermitianOperator) -> HermitianOperator {
        let w = kron(&self.iso_left, &self.iso_right);
        HermitianOperator::symmetrized(w.mul(d.matrix()).mul(&w.adjoint()))
    }

    /// Lift a reduced covering pair: conjugate back and pile weight on the
    /// orthocomplement of each support, which costs nothing under the states.
    /// The weight is increased until the lifted pair dominates `t`; any
    /// leftover deficit (within solver accuracy) is absorbed by a scalar
    /// shift.
    fn lift_certificate(
        &self,
        a_red: &HermitianOperator,
        b_red: &HermitianOperator,
        t: &HermitianOperator,
    ) -> Result<(HermitianOperator, HermitianOperator)> {
        let (n, m) = (self.iso_left.rows(), self.iso_right.rows());
        let a_base = HermitianOperator::symmetrized(
            self.iso_left
                .mul(a_red.matrix())
                .mul(&self.iso_left.adjoint()),
        );
        let b_base = HermitianOperator::symmetrized(
            self.iso_right
                .mul(b_red.matrix())
                .mul(&self.iso_right.adjoint()),
        );
        let p_perp = HermitianOperator::symmetrized(
            ComplexMatrix::identity(n).sub(&self.iso_left.mul(&self.iso_left.adjoint())),
        );
        let q_perp = HermitianOperator::symmetrized(
            ComplexMatrix::identity(m).sub(&self.iso_right.mul(&self.iso_right.adjoint())),
        );
        let mut k = 1.0;
        loop {
            let a = a_base.add(&p_perp.scale(k));
            let b = b_base.add(&q_perp.scale(k));
            let slack = HermitianOperator::symmetrized(
                kron(a.matrix(), &ComplexMatrix::identity(m))
                    .add(&kron(&ComplexMatrix::identity(n), b.matrix()))
                    .sub(t.matrix()),
            );
            let floor = min_eigenvalue(&slack)?;
            if floor >= -1e-8 || k >= 1e9 {
                if floor >= -1e-8 {
                    return Ok((a, b));
                }
                let bump = -floor / 2.0;
                return Ok((
                    a.add(&HermitianOperator::identity(n).scale(bump)),
                    b.add(&HermitianOperator::identity(m).scale(bump)),
                ));
            }
            k *= 8.0;
        }
    }
}

/// Maximize `Tr(T D)` over couplings of the two states.
pub fn solve_alpha(
    t: &HermitianOperator,
    left: &MeasuredAlgebra,
    right: &MeasuredAlgebra,
    opts: &SolverOptions,
) -> Result<SolverOutcome> {
    opts.validate()?;
    check_problem(t, left, right)?;
    if let Some(face) = face_reduction(t, left, right)? {
        let reduced = solve_alpha(&face.t_red, &face.left_red, &face.right_red, opts)?;
        let (a, b) = face.lift_certificate(&reduced.dual_a, &reduced.dual_b, t)?;
        let primal = face.lift_density(&reduced.primal);
        let certificate_value = left.value(&a) + right.value(&b);
        let value = primal.pairing(t);
        return Ok(SolverOutcome {
            value,
            primal,
            dual_a: a,
            dual_b: b,
            gap: certificate_value - value,
            ..reduced
        });
    }
    let (n, m) = (left.dim(), right.dim());
    let dim = n * m;

    let mut rho = opts.penalty;
    let relax = opts.over_relaxation;
    let mut z = kron(left.density().matrix(), right.density().matrix());
    let mut u = ComplexMatrix::zeros(dim, dim);
    let mut mult_a = ComplexMatrix::zeros(n, n);
    let mut mult_b = ComplexMatrix::zeros(m, m);

    let mut primal_residual = f64::INFINITY;
    let mut dual_residual = f64::INFINITY;
    let mut iterations = opts.max_iterations;
    let mut status = SolverStatus::MaxIterations;

    for iter in 1..=opts.max_iterations {
        let w = z.sub(&u).add(&t.matrix().scale_re(1.0 / rho));
        let (x, ya, yb) = affine_project_multipliers(&w, left, right);
        mult_a = ya;
        mult_b = yb;

        let xhat = x.scale_re(relax).add(&z.scale_re(1.0 - relax));
        let v = xhat.add(&u).hermitize();
        let z_new = crate::linalg::psd_project_raw(&v)?;
        u = u.add(&xhat).sub(&z_new);

        primal_residual = x.sub(&z_new).fro_norm();
        dual_residual = rho * z_new.sub(&z).fro_norm();
        z = z_new;

        if primal_residual <= opts.residual_tol && dual_residual <= opts.residual_tol {
            iterations = iter;
            status = SolverStatus::Converged;
            break;
        }
        if iter % 32 == 0 {
            if primal_residual > 10.0 * dual_residual && rho < 1e6 {
                rho *= 2.0;
                u = u.scale_re(0.5);
            } else if dual_residual > 10.0 * primal_residual && rho > 1e-6 {
                rho *= 0.5;
                u = u.scale_re(2.0);
            }
        }
    }

    let primal = HermitianOperator::symmetrized(z);
    let value = primal.pairing(t);
    let a = HermitianOperator::symmetrized(mult_a.scale_re(-rho));
    let b = HermitianOperator::symmetrized(mult_b.scale_re(-rho));
    let (a, b) = balance_certificate(a, b)?;
    let certificate_value = left.value(&a) + right.value(&b);

    Ok(SolverOutcome {
        value,
        primal,
        dual_a: a,
        dual_b: b,
        primal_residual,
        dual_residual,
        gap: certificate_value - value,
        iterations,
        status,
    })
}

/// One triple iterate of the sub-coupling form: the big block `y` and the two
/// marginal slacks.
#[derive(Clone)]
struct SubTriple {
    y: ComplexMatrix,
    sa: ComplexMatrix,
    sb: ComplexMatrix,
}

impl SubTriple {
    fn zeros(n: usize, m: usize) -> Self {
        Self {
            y: ComplexMatrix::zeros(n * m, n * m),
            sa: ComplexMatrix::zeros(n, n),
            sb: ComplexMatrix::zeros(m, m),
        }
    }

    fn add(&self, other: &Self) -> Self {
        Self {
            y: self.y.add(&other.y),
            sa: self.sa.add(&other.sa),
            sb: self.sb.add(&other.sb),
        }
    }

    fn sub(&self, other: &Self) -> Self {
        Self {
            y: self.y.sub(&other.y),
            sa: self.sa.sub(&other.sa),
            sb: self.sb.sub(&other.sb),
        }
    }

    fn scale(&self, f: f64) -> Self {
        Self {
            y: self.y.scale_re(f),
            sa: self.sa.scale_re(f),
            sb: self.sb.scale_re(f),
        }
    }

    fn norm(&self) -> f64 {
        (self.y.fro_norm().powi(2) + self.sa.fro_norm().powi(2) + self.sb.fro_norm().powi(2)).sqrt()
    }
}

/// Projection onto `{(y, sa, sb) : Tr_B y + sa = rho_phi, Tr_A y + sb = rho_psi}`
/// with multipliers `(u, v)` such that the output adds `(u ⊗ I + I ⊗ v, u, v)`.
fn subcoupling_affine_project(
    w: &SubTriple,
    left: &MeasuredAlgebra,
    right: &MeasuredAlgebra,
) -> (SubTriple, ComplexMatrix, ComplexMatrix) {
    let (n, m) = (left.dim(), right.dim());
    let r_a = left
        .density()
        .matrix()
        .sub(&crate::linalg::partial_trace_b_raw(&w.y, n, m))
        .sub(&w.sa);
    let r_b = right
        .density()
        .matrix()
        .sub(&crate::linalg::partial_trace_a_raw(&w.y, n, m))
        .sub(&w.sb);
    // Gram system: (m+1) u + Tr(v) I_n = r_a, (n+1) v + Tr(u) I_m = r_b.
    let (tra, trb) = (r_a.trace().re, r_b.trace().re);
    let det = (n + m + 1) as f64;
    let s_u = ((n as f64 + 1.0) * tra - n as f64 * trb) / det;
    let s_v = ((m as f64 + 1.0) * trb - m as f64 * tra) / det;
    let u = r_a
        .sub(&ComplexMatrix::identity(n).scale_re(s_v))
        .scale_re(1.0 / (m as f64 + 1.0));
    let v = r_b
        .sub(&ComplexMatrix::identity(m).scale_re(s_u))
        .scale_re(1.0 / (n as f64 + 1.0));
    let x = SubTriple {
        y: w.y
            .add(&kron(&u, &ComplexMatrix::identity(m)))
            .add(&kron(&ComplexMatrix::identity(n), &v)),
        sa: w.sa.add(&u),
        sb: w.sb.add(&v),
    };
    (x, u, v)
}

/// Compute `beta(T) = inf {phi(a) + psi(b) : a, b >= 0, a ⊗ 1 + 1 ⊗ b >= T}`
/// through its attained conic dual `max {Tr(T y) : y >= 0, Tr_B y <= rho_phi,
/// Tr_A y <= rho_psi}`; the reported value is the dual optimum (equal to the
/// covering infimum), and `(dual_a, dual_b)` is a feasible covering pair
/// recovered from the constraint multipliers.
pub fn solve_beta(
    t: &HermitianOperator,
    left: &MeasuredAlgebra,
    right: &MeasuredAlgebra,
    opts: &SolverOptions,
) -> Result<SolverOutcome> {
    opts.validate()?;
    check_problem(t, left, right)?;
    if let Some(face) = face_reduction(t, left, right)? {
        let reduced = solve_beta(&face.t_red, &face.left_red, &face.right_red, opts)?;
        let (a, b) = face.lift_certificate(&reduced.dual_a, &reduced.dual_b, t)?;
        let primal = face.lift_density(&reduced.primal);
        let certificate_value = left.value(&a) + right.value(&b);
        let value = primal.pairing(t);
        return Ok(SolverOutcome {
            value,
            primal,
            dual_a: a,
            dual_b: b,
            gap: certificate_value - value,
            ..reduced
        });
    }
    let (n, m) = (left.dim(), right.dim());

    let mut rho = opts.penalty;
    let relax = opts.over_relaxation;
    let mut z = SubTriple {
        y: kron(left.density().matrix(), right.density().matrix()),
        sa: ComplexMatrix::zeros(n, n),
        sb: ComplexMatrix::zeros(m, m),
    };
    let mut u = SubTriple::zeros(n, m);
    let mut mult_a = ComplexMatrix::zeros(n, n);
    let mut mult_b = ComplexMatrix::zeros(m, m);

    let mut primal_residual = f64::INFINITY;
    let mut dual_residual = f64::INFINITY;
    let mut iterations = opts.max_iterations;
    let mut status = SolverStatus::MaxIterations;

    for iter in 1..=opts.max_iterations {
        let mut w = z.sub(&u);
        w.y = w.y.add(&t.matrix().scale_re(1.0 / rho));
        let (x, ua, vb) = subcoupling_affine_project(&w, left, right);
        mult_a = ua;
        mult_b = vb;

        let xhat = x.scale(relax).add(&z.scale(1.0 - relax));
        let v = xhat.add(&u);
        let z_new = SubTriple {
            y: crate::linalg::psd_project_raw(&v.y.hermitize())?,
            sa: crate::linalg::psd_project_raw(&v.sa.hermitize())?,
            sb: crate::linalg::psd_project_raw(&v.sb.hermitize())?,
        };
        u = u.add(&xhat).sub(&z_new);

        primal_residual = x.sub(&z_new).norm();
        dual_residual = rho * z_new.sub(&z).norm();
        z = z_new;

        if primal_residual <= opts.residual_tol && dual_residual <= opts.residual_tol {
            iterations = iter;
            status = SolverStatus::Converged;
            break;
        }
        if iter % 32 == 0 {
            if primal_residual > 10.0 * dual_residual && rho < 1e6 {
                rho *= 2.0;
                u = u.scale(0.5);
            } else if dual_residual > 10.0 * primal_residual && rho > 1e-6 {
                rho *= 0.5;
                u = u.scale(2.0);
            }
        }
    }

    let witness = HermitianOperator::symmetrized(z.y);
    let value = witness.pairing(t);

    // Covering pair from the multipliers, cleaned to exact feasibility: clamp
    // to the PSD cone, then absorb any slack deficit by a scalar shift.
    let a0 = crate::linalg::psd_project(&HermitianOperator::symmetrized(mult_a.scale_re(-rho)))?;
    let b0 = crate::linalg::psd_project(&HermitianOperator::symmetrized(mult_b.scale_re(-rho)))?;
    let slack = HermitianOperator::symmetrized(
        kron(a0.matrix(), &ComplexMatrix::identity(m))
            .add(&kron(&ComplexMatrix::identity(n), b0.matrix()))
            .sub(t.matrix()),
    );
    let deficit = min_eigenvalue(&slack)?.min(0.0);
    let a = a0.add(&HermitianOperator::identity(n).scale(-deficit * 0.5));
    let b = b0.add(&HermitianOperator::identity(m).scale(-deficit * 0.5));
    let certificate_value = left.value(&a) + right.value(&b);

    Ok(SolverOutcome {
        value,
        primal: witness,
        dual_a: a,
        dual_b: b,
        primal_residual,
        dual_residual,
        gap: certificate_value - value,
        iterations,
        status,
    })
}

/// Direct splitting on the covering variables `(a, b, slack)` themselves.
///
/// Used as an independent cross-check of [`solve_beta`] on instances with
/// faithful states, where the covering infimum is attained. The affine set is
/// `{(a, b, S) : S = a ⊗ 1 + 1 ⊗ b - T}` and all three blocks are kept PSD.
pub fn solve_beta_covering(
    t: &HermitianOperator,
    left: &MeasuredAlgebra,
    right: &MeasuredAlgebra,
    opts: &SolverOptions,
) -> Result<SolverOutcome> {
    opts.validate()?;
    check_problem(t, left, right)?;
    let (n, m) = (left.dim(), right.dim());

    let mut rho = opts.penalty;
    let relax = opts.over_relaxation;
    // feasible start: a = I, b = 0, S = I - T
    let mut z = SubTriple {
        y: ComplexMatrix::identity(n * m).sub(t.matrix()),
        sa: ComplexMatrix::identity(n),
        sb: ComplexMatrix::zeros(m, m),
    };
    let mut u = SubTriple::zeros(n, m);
    let mut witness_mult = ComplexMatrix::zeros(n * m, n * m);

    let mut primal_residual = f64::INFINITY;
    let mut dual_residual = f64::INFINITY;
    let mut iterations = opts.max_iterations;
    let mut status = SolverStatus::MaxIterations;

    for iter in 1..=opts.max_iterations {
        let mut w = z.sub(&u);
        w.sa = w.sa.sub(&left.density().matrix().scale_re(1.0 / rho));
        w.sb = w.sb.sub(&right.density().matrix().scale_re(1.0 / rho));

        // Project onto {S - a⊗I - I⊗b = -T}: solve (Id + G) y = r with
        // G(y) = (Tr_B y)⊗I + I⊗(Tr_A y), then add L*(y) = (-Tr_B y, -Tr_A y, y).
        let r = kron(&w.sa, &ComplexMatrix::identity(m))
            .add(&kron(&ComplexMatrix::identity(n), &w.sb))
            .sub(&w.y)
            .sub(t.matrix());
        let s = r.trace().re / (1.0 + n as f64 + m as f64);
        let ua = crate::linalg::partial_trace_b_raw(&r, n, m)
            .sub(&ComplexMatrix::identity(n).scale_re(s))
            .scale_re(1.0 / (1.0 + m as f64));
        let vb = crate::linalg::partial_trace_a_raw(&r, n, m)
            .sub(&ComplexMatrix::identity(m).scale_re(s))
            .scale_re(1.0 / (1.0 + n as f64));
        let y = r
            .sub(&kron(&ua, &ComplexMatrix::identity(m)))
            .sub(&kron(&ComplexMatrix::identity(n), &vb));
        witness_mult = y.clone();
        let x = SubTriple {
            y: w.y.add(&y),
            sa: w.sa.sub(&crate::linalg::partial_trace_b_raw(&y, n, m)),
            sb: w.sb.sub(&crate::linalg::partial_trace_a_raw(&y, n, m)),
        };

        let xhat = x.scale(relax).add(&z.scale(1.0 - relax));
        let v = xhat.add(&u);
        let z_new = SubTriple {
            y: crate::linalg::psd_project_raw(&v.y.hermitize())?,
            sa: crate::linalg::psd_project_raw(&v.sa.hermitize())?,
            sb: crate::linalg::psd_project_raw(&v.sb.hermitize())?,
        };
        u = u.add(&xhat).sub(&z_new);

        primal_residual = x.sub(&z_new).norm();
        dual_residual = rho * z_new.sub(&z).norm();
        z = z_new;

        if primal_residual <= opts.residual_tol && dual_residual <= opts.residual_tol {
            iterations = iter;
            status = SolverStatus::Converged;
            break;
        }
        if iter % 32 == 0 {
            if primal_residual > 10.0 * dual_residual && rho < 1e6 {
                rho *= 2.0;
                u = u.scale(0.5);
            } else if dual_residual > 10.0 * primal_residual && rho > 1e-6 {
                rho *= 0.5;
                u = u.scale(2.0);
            }
        }
    }

    let a = HermitianOperator::symmetrized(z.sa);
    let b = HermitianOperator::symmetrized(z.sb);
    let value = left.value(&a) + right.value(&b);
    let witness = HermitianOperator::symmetrized(witness_mult.scale_re(-rho));
    let witness_value = witness.pairing(t);

    Ok(SolverOutcome {
        value,
        primal: witness,
        dual_a: a,
        dual_b: b,
        primal_residual,
        dual_residual,
        gap: value - witness_value,
        iterations,
        status,
    })
}

/// Draw a random coupling of the two (faithful) states by alternating
/// projections between the marginal affine set and the PSD cone from a
/// random PSD start.
pub fn sample_coupling(
    left: &MeasuredAlgebra,
    right: &MeasuredAlgebra,
    rng: &mut impl Rng,
) -> Result<Coupling> {
    let (n, m) = (left.dim(), right.dim());
    let dim = n * m;
    let seed_mat = crate::haar::psd(dim, rng);
    let mut w = seed_mat.matrix().scale_re(1.0 / seed_mat.trace().max(1.0));
    for _ in 0..20_000 {
        let (x, _, _) = affine_project_multipliers(&w, left, right);
        let p = crate::linalg::psd_project_raw(&x.hermitize())?;
        let drift = p.sub(&w).fro_norm();
        w = p;
        if drift < 1e-13 {
            break;
        }
    }
    let (x, _, _) = affine_project_multipliers(&w, left, right);
    let density = HermitianOperator::symmetrized(x);
    Coupling::new(left.clone(), right.clone(), density)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::haar;
    use crate::linalg::{partial_trace_a, partial_trace_b, vec_tensor, Complex64};
    use crate::model::is_coupling;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn basis_vec(dim: usize, i: usize) -> Vec<Complex64> {
        let mut v = vec![c(0.0, 0.0); dim];
        v[i] = c(1.0, 0.0);
        v
    }

    fn opts() -> SolverOptions {
        SolverOptions::default()
    }

    #[test]
    fn affine_projection_fixed_point() {
        let mut rng = haar::rng(60);
        let left = MeasuredAlgebra::new(haar::density(2, &mut rng)).unwrap();
        let right = MeasuredAlgebra::new(haar::density(3, &mut rng)).unwrap();
        let prod = Coupling::product(left.clone(), right.clone());
        let out = affine_project(prod.density(), &left, &right).unwrap();
        assert!(out.matrix().sub(prod.density().matrix()).max_norm() < 1e-12);
    }

    #[test]
    fn affine_projection_constraints_and_minimal_norm() {
        let (n, m) = (2usize, 2usize);
        let left = MeasuredAlgebra::uniform(n);
        let right = MeasuredAlgebra::uniform(m);
        let zero = HermitianOperator::zero(n * m);
        let out = affine_project(&zero, &left, &right).unwrap();
        // marginals hold to near machine precision
        let check = is_coupling(&out, &left, &right, 1e-11).unwrap();
        assert!(check.left_residual <= 1e-11 && check.right_residual <= 1e-11);
        // projection of 0 is the minimal-norm feasible point, here the product
        let prod = Coupling::product(left, right);
        assert!(out.matrix().sub(prod.density().matrix()).max_norm() < 1e-12);
    }

    /// Dense least-squares oracle for the affine projection, built from the
    /// explicit real constraint matrix and solved through the KKT system.
    #[test]
    fn affine_projection_matches_normal_equations_oracle() {
        let (n, m) = (2usize, 2usize);
        let d = n * m;
        let mut rng = haar::rng(61);
        let left = MeasuredAlgebra::new(haar::density(n, &mut rng)).unwrap();
        let right = MeasuredAlgebra::new(haar::density(m, &mut rng)).unwrap();
        let input = haar::hermitian(d, &mut rng);

        // real orthonormal coordinates of Hermitian matrices
        let dim_r = d * d;
        let basis: Vec<HermitianOperator> = {
            let mut out = Vec::new();
            for i in 0..d {
                let mut e = ComplexMatrix::zeros(d, d);
                e.set(i, i, c(1.0, 0.0));
                out.push(HermitianOperator::symmetrized(e));
            }
            let s = std::f64::consts::FRAC_1_SQRT_2;
            for i in 0..d {
                for j in (i + 1)..d {
                    let mut e = ComplexMatrix::zeros(d, d);
                    e.set(i, j, c(s, 0.0));
                    e.set(j, i, c(s, 0.0));
                    out.push(HermitianOperator::symmetrized(e));
                    let mut f = ComplexMatrix::zeros(d, d);
                    f.set(i, j, c(0.0, s));
                    f.set(j, i, c(0.0, -s));
                    out.push(HermitianOperator::symmetrized(f));
                }
            }
            out
        };
        let coords =
            |h: &HermitianOperator| -> Vec<f64> { basis.iter().map(|e| e.pairing(h)).collect() };

        // constraint rows: all real coordinates of both partial traces,
        // dropping one redundant trace coordinate
        let herm_coords = |h: &HermitianOperator, dim: usize| -> Vec<f64> {
            let mut out = Vec::new();
            for i in 0..dim {
                out.push(h.entry(i, i).re);
            }
            for i in 0..dim {
                for j in (i + 1)..dim {
                    out.push(h.entry(i, j).re);
                    out.push(h.entry(i, j).im);
                }
            }
            out
        };
        let mut rows: Vec<Vec<f64>> = Vec::new();
        let mut rhs: Vec<f64> = Vec::new();
        let target_left = herm_coords(left.density(), n);
        let target_right = herm_coords(right.density(), m);
        for (k, e) in basis.iter().enumerate() {
            let tb = herm_coords(&partial_trace_b(e, n, m).unwrap(), n);
            let ta = herm_coords(&partial_trace_a(e, n, m).unwrap(), m);
            if k == 0 {
                for (ri, _) in tb.iter().enumerate() {
                    rows.push(vec![0.0; dim_r]);
                    rhs.push(target_left[ri]);
                }
                for (ri, _) in ta.iter().enumerate().skip(1) {
                    rows.push(vec![0.0; dim_r]);
                    rhs.push(target_right[ri]);
                }
            }
            for (ri, v) in tb.iter().enumerate() {
                rows[ri][k] = *v;
            }
            for (ri, v) in ta.iter().enumerate().skip(1) {
                rows[tb.len() + ri - 1][k] = *v;
            }
        }
        let n_cons = rows.len();

        // KKT: [[I, C^T], [C, 0]] [x; lam] = [x0; rhs]
        let x0 = coords(&input);
        let size = dim_r + n_cons;
        let mut kkt = vec![vec![0.0; size]; size];
        let mut b = vec![0.0; size];
        for i in 0..dim_r {
            kkt[i][i] = 1.0;
            b[i] = x0[i];
        }
        for (ci, row) in rows.iter().enumerate() {
            for (xi, v) in row.iter().enumerate() {
                kkt[xi][dim_r + ci] = *v;
                kkt[dim_r + ci][xi] = *v;
            }
            b[dim_r + ci] = rhs[ci];
        }
        let sol = solve_dense(kkt, b);

        let oracle: Vec<f64> = sol[..dim_r].to_vec();
        let projected = affine_project(&input, &left, &right).unwrap();
        let got = coords(&projected);
        for (a, b) in oracle.iter().zip(&got) {
            assert!((a - b).abs() < 1e-8, "oracle {a} vs projection {b}");
        }
    }

    fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
        let n = b.len();
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())
                .unwrap();
            a.swap(col, pivot);
            b.swap(col, pivot);
            let diag = a[col][col];
            assert!(diag.abs() > 1e-12, "singular KKT system");
            for row in 0..n {
                if row != col {
                    let f = a[row][col] / diag;
                    if f != 0.0 {
                        for k in col..n {
                            a[row][k] -= f * a[col][k];
                        }
                        b[row] -= f * b[col];
                    }
                }
            }
        }
        (0..n).map(|i| b[i] / a[i][i]).collect()
    }

    #[test]
    fn affine_projection_nonexpansive() {
        let mut rng = haar::rng(62);
        let left = MeasuredAlgebra::uniform(2);
        let right = MeasuredAlgebra::uniform(3);
        for _ in 0..10 {
            let x = haar::hermitian(6, &mut rng);
            let y = haar::hermitian(6, &mut rng);
            let px = affine_project(&x, &left, &right).unwrap();
            let py = affine_project(&y, &left, &right).unwrap();
            assert!(px.sub(&py).fro_norm() <= x.sub(&y).fro_norm() + 1e-12);
        }
    }

    #[test]
    fn alpha_of_identity_is_one() {
        let mut rng = haar::rng(63);
        let left = MeasuredAlgebra::new(haar::density(2, &mut rng)).unwrap();
        let right = MeasuredAlgebra::new(haar::density(2, &mut rng)).unwrap();
        let t = HermitianOperator::identity(4);
        let out = solve_alpha(&t, &left, &right, &opts()).unwrap();
        assert_eq!(out.status, SolverStatus::Converged);
        assert!((out.value - 1.0).abs() < 1e-7, "alpha(I) = {}", out.value);
    }

    #[test]
    fn alpha_of_maximally_entangled_projection_is_one() {
        let mut rng = haar::rng(64);
        let xi = haar::maximally_entangled(2, 2, &mut rng);
        let t = HermitianOperator::outer(&xi);
        let u = MeasuredAlgebra::uniform(2);
        let out = solve_alpha(&t, &u, &u, &opts()).unwrap();
        assert!((out.value - 1.0).abs() < 1e-6, "alpha = {}", out.value);
        let check = is_coupling(&out.primal, &u, &u, 1e-6).unwrap();
        assert!(check.is_coupling);
        // optimal coupling is the projection itself
        assert!(out.primal.sub(&t).fro_norm() < 1e-5);
    }

    #[test]
    fn alpha_of_separable_projection_is_one_over_m() {
        let (n, m) = (2usize, 3usize);
        let xi = vec_tensor(&basis_vec(n, 0), &basis_vec(m, 0));
        let t = HermitianOperator::outer(&xi);
        let out = solve_alpha(
            &t,
            &MeasuredAlgebra::uniform(n),
            &MeasuredAlgebra::uniform(m),
            &opts(),
        )
        .unwrap();
        assert!(
            (out.value - 1.0 / m as f64).abs() < 1e-6,
            "alpha = {}",
            out.value
        );
    }

    #[test]
    fn alpha_closed_form_for_tilted_rank_one() {
        // xi_t = t e1⊗e1 + sqrt(1-t^2) e2⊗e2 has alpha = 1/2 + t sqrt(1-t^2)
        let t_param: f64 = 0.8;
        let s = (1.0 - t_param * t_param).sqrt();
        let mut xi = vec![c(0.0, 0.0); 4];
        xi[0] = c(t_param, 0.0);
        xi[3] = c(s, 0.0);
        let t = HermitianOperator::outer(&xi);
        let u = MeasuredAlgebra::uniform(2);
        let out = solve_alpha(&t, &u, &u, &opts()).unwrap();
        let expected = 0.5 + t_param * s;
        assert!(
            (out.value - expected).abs() < 1e-6,
            "alpha = {} vs {}",
            out.value,
            expected
        );
    }

    #[test]
    fn alpha_certificate_is_feasible_cover() {
        let mut rng = haar::rng(65);
        let left = MeasuredAlgebra::new(haar::density(2, &mut rng)).unwrap();
        let right = MeasuredAlgebra::new(haar::density(3, &mut rng)).unwrap();
        let t = haar::psd_contraction(6, &mut rng);
        let out = solve_alpha(&t, &left, &right, &opts()).unwrap();
        assert_eq!(out.status, SolverStatus::Converged);
        let slack = HermitianOperator::symmetrized(
            kron(out.dual_a.matrix(), &ComplexMatrix::identity(3))
                .add(&kron(&ComplexMatrix::identity(2), out.dual_b.matrix()))
                .sub(t.matrix()),
        );
        assert!(min_eigenvalue(&slack).unwrap() >= -1e-6);
        assert!(min_eigenvalue(&out.dual_a).unwrap() >= -1e-8);
        assert!(min_eigenvalue(&out.dual_b).unwrap() >= -1e-8);
        assert!(out.gap.abs() < 1e-5);
    }

    #[test]
    fn beta_of_identity_is_one() {
        let mut rng = haar::rng(66);
        let left = MeasuredAlgebra::new(haar::density(2, &mut rng)).unwrap();
        let right = MeasuredAlgebra::new(haar::density(2, &mut rng)).unwrap();
        let out = solve_beta(&HermitianOperator::identity(4), &left, &right, &opts()).unwrap();
        assert!((out.value - 1.0).abs() < 1e-7, "beta(I) = {}", out.value);
    }

    /// The strictness instance: both states are the vector state of
    /// (1,1)/sqrt(2) and the operator is p ⊗ p for p = e1 e1*. Both
    /// capacities equal 1/4 even though the projective capacity is 1/2.
    #[test]
    fn beta_quarter_on_rank_one_states() {
        let xi = [
            c(std::f64::consts::FRAC_1_SQRT_2, 0.0),
            c(std::f64::consts::FRAC_1_SQRT_2, 0.0),
        ];
        let state = MeasuredAlgebra::vector_state(&xi).unwrap();
        let p = HermitianOperator::outer(&basis_vec(2, 0));
        let e = HermitianOperator::symmetrized(kron(p.matrix(), p.matrix()));

        let alpha = solve_alpha(&e, &state, &state, &opts()).unwrap();
        assert!(
            (alpha.value - 0.25).abs() < 1e-6,
            "alpha = {} (residuals {:.2e}/{:.2e}, {} iters)",
            alpha.value,
            alpha.primal_residual,
            alpha.dual_residual,
            alpha.iterations
        );

        let beta = solve_beta(&e, &state, &state, &opts()).unwrap();
        assert!(
            (beta.value - 0.25).abs() < 1e-6,
            "beta = {} (residuals {:.2e}/{:.2e}, {} iters)",
            beta.value,
            beta.primal_residual,
            beta.dual_residual,
            beta.iterations
        );
    }

    #[test]
    fn strong_duality_on_random_faithful_instances() {
        let mut rng = haar::rng(67);
        for _ in 0..5 {
            let left = MeasuredAlgebra::new(haar::density(2, &mut rng)).unwrap();
            let right = MeasuredAlgebra::new(haar::density(2, &mut rng)).unwrap();
            let t = haar::psd_contraction(4, &mut rng);
            let a = solve_alpha(&t, &left, &right, &opts()).unwrap();
            let b = solve_beta(&t, &left, &right, &opts()).unwrap();
            assert!(
                (a.value - b.value).abs() <= 1e-6,
                "alpha {} vs beta {}",
                a.value,
                b.value
            );
            // weak duality holds on every run
            assert!(a.value <= b.value + 2.0 * opts().residual_tol + 1e-6);
        }
    }

    #[test]
    fn covering_splitting_agrees_on_faithful_instances() {
        let mut rng = haar::rng(68);
        for _ in 0..3 {
            let left = MeasuredAlgebra::new(haar::density(2, &mut rng)).unwrap();
            let right = MeasuredAlgebra::new(haar::density(2, &mut rng)).unwrap();
            let t = haar::psd_contraction(4, &mut rng);
            let b1 = solve_beta(&t, &left, &right, &opts()).unwrap();
            let b2 = solve_beta_covering(&t, &left, &right, &opts()).unwrap();
            assert!(
                (b1.value - b2.value).abs() < 1e-5,
                "subcoupling {} vs covering {}",
                b1.value,
                b2.value
            );
        }
    }

    #[test]
    fn sampled_couplings_are_couplings() {
        let mut rng = haar::rng(69);
        let left = MeasuredAlgebra::uniform(2);
        let right = MeasuredAlgebra::uniform(3);
        for _ in 0..5 {
            let cpl = sample_coupling(&left, &right, &mut rng).unwrap();
            let check = is_coupling(cpl.density(), &left, &right, 1e-9).unwrap();
            assert!(check.is_coupling);
        }
    }

    #[test]
    fn rejects_non_contractions() {
        let left = MeasuredAlgebra::uniform(2);
        let right = MeasuredAlgebra::uniform(2);
        let too_big = HermitianOperator::identity(4).scale(1.5);
        assert!(solve_alpha(&too_big, &left, &right, &opts()).is_err());
        let negative = HermitianOperator::identity(4).scale(-0.5);
        assert!(solve_beta(&negative, &left, &right, &opts()).is_err());
    }
}
