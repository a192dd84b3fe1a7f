//! Cross-module agreements and sampled regularity checks that do not fit a
//! single module's unit tests.

use coupcap::capacity;
use coupcap::classical::{self, ClassicalInstance};
use coupcap::entangle;
use coupcap::gamma;
use coupcap::haar;
use coupcap::linalg::{ComplexMatrix, HermitianOperator, ProjectionOperator};
use coupcap::model::MeasuredAlgebra;
use coupcap::sdp::{self, SolverOptions};
use rand::Rng;

fn opts() -> SolverOptions {
    SolverOptions::default()
}

/// The dual classification inside `classify` (Schmidt data vs computed
/// capacity) must agree on random vectors across dimension pairs.
#[test]
fn classification_routes_agree_on_random_vectors() {
    let mut rng = haar::rng(301);
    for &(n, m) in &[(2usize, 2usize), (2, 3), (3, 3), (3, 4)] {
        for _ in 0..100 {
            let xi = haar::unit_vector(n * m, &mut rng);
            let verdict = entangle::classify(&xi, n, m)
                .unwrap_or_else(|e| panic!("({n},{m}): classification disagreed: {e}"));
            // a Haar-random vector is entangled but never maximally so
            assert_eq!(verdict.class, entangle::EntanglementClass::Entangled);
        }
    }
}

/// The threshold sweep applied to the integral covers of a diagonal 0/1
/// instance reproduces the vertex-cover value computed combinatorially.
#[test]
fn commuting_sweep_matches_classical_cover_on_diagonal_instances() {
    let mut rng = haar::rng(302);
    for _ in 0..20 {
        let n = 2usize;
        let m = 2usize;
        let probs = |k: usize, rng: &mut rand_chacha::ChaCha8Rng| {
            let mut p: Vec<f64> = (0..k).map(|_| rng.gen_range(0.05..1.0)).collect();
            let total: f64 = p.iter().sum();
            for x in p.iter_mut() {
                *x /= total;
            }
            let head: f64 = p[..k - 1].iter().sum();
            p[k - 1] = 1.0 - head;
            p
        };
        let mu = probs(n, &mut rng);
        let nu = probs(m, &mut rng);
        let cells: Vec<(usize, usize)> = (0..n * m)
            .filter(|_| rng.gen_bool(0.5))
            .map(|k| (k / m, k % m))
            .collect();
        let inst = ClassicalInstance::from_support(mu, nu, &cells).unwrap();
        let (cover_value, _, _) = classical::ot_gamma(&inst).unwrap();
        let (_, a_vec, b_vec) = classical::ot_beta(&inst).unwrap();

        let (t, left, right) = classical::diag_embed(&inst).unwrap();
        let e = ProjectionOperator::new(t).unwrap();
        let diag_op = |v: &[f64]| {
            let mut m_out = ComplexMatrix::zeros(v.len(), v.len());
            for (i, &x) in v.iter().enumerate() {
                m_out.set(i, i, coupcap::linalg::Complex64::new(x, 0.0));
            }
            HermitianOperator::new(m_out).unwrap()
        };
        let sweep =
            gamma::gamma_commuting_sweep(&e, &diag_op(&a_vec), &diag_op(&b_vec), &left, &right)
                .unwrap();
        // the covering LP is integral on bipartite supports, so its optimal
        // value coincides with the cover value and the sweep recovers it
        assert!(
            (sweep.upper - cover_value).abs() <= 1e-9,
            "sweep {} vs cover {}",
            sweep.upper,
            cover_value
        );
    }
}

/// The vector parameter lower-bounds the covering capacity (uniform
/// marginals) and never drops below 1/m.
#[test]
fn w_lower_bounds_beta() {
    let mut rng = haar::rng(303);
    for &(n, m) in &[(2usize, 2usize), (2, 3)] {
        let un = MeasuredAlgebra::uniform(n);
        let um = MeasuredAlgebra::uniform(m);
        for _ in 0..10 {
            let xi = haar::unit_vector(n * m, &mut rng);
            let w = capacity::w_of_vector(&xi, n, m).unwrap().value;
            let beta = sdp::solve_beta(&HermitianOperator::outer(&xi), &un, &um, &opts())
                .unwrap()
                .value;
            assert!(w >= 1.0 / m as f64 - 1e-12);
            assert!(w <= beta + 1e-6, "w = {w} vs beta = {beta}");
        }
    }
}

/// Small perturbations of faithful states move the capacity only a little.
#[test]
fn capacity_is_stable_under_state_perturbations() {
    let mut rng = haar::rng(304);
    for _ in 0..10 {
        let t = haar::psd_contraction(4, &mut rng);
        let base = haar::density(2, &mut rng);
        let noise = haar::hermitian(2, &mut rng);
        let scale = 1e-3 / noise.matrix().fro_norm().max(1.0);
        let traceless = noise.sub(&HermitianOperator::identity(2).scale(noise.trace() / 2.0));
        let perturbed = MeasuredAlgebra::new(
            coupcap::linalg::psd_project(&base.add(&traceless.scale(scale)))
                .map(|p| p.scale(1.0 / p.trace()))
                .unwrap(),
        )
        .unwrap();
        let base = MeasuredAlgebra::new(base).unwrap();
        let right = MeasuredAlgebra::new(haar::density(2, &mut rng)).unwrap();
        let a0 = sdp::solve_alpha(&t, &base, &right, &opts()).unwrap().value;
        let a1 = sdp::solve_alpha(&t, &perturbed, &right, &opts())
            .unwrap()
            .value;
        assert!(
            (a0 - a1).abs() <= 0.1,
            "capacity moved by {}",
            (a0 - a1).abs()
        );
    }
}

/// Weak duality holds on every run, converged or not, with slack scaling
/// with the achieved residuals (the reported values are iterates, so their
/// error is proportional to the residuals actually reached, not to the
/// stopping target).
#[test]
fn weak_duality_regardless_of_convergence() {
    let mut rng = haar::rng(305);
    for cap in [50usize, 300, 50_000] {
        let opts_cap = SolverOptions {
            max_iterations: cap,
            ..SolverOptions::default()
        };
        for _ in 0..15 {
            let left = MeasuredAlgebra::new(haar::density(3, &mut rng)).unwrap();
            let right = MeasuredAlgebra::new(haar::density(3, &mut rng)).unwrap();
            let t = haar::psd_contraction(9, &mut rng);
            let a = sdp::solve_alpha(&t, &left, &right, &opts_cap).unwrap();
            let b = sdp::solve_beta(&t, &left, &right, &opts_cap).unwrap();
            let achieved =
                a.primal_residual + a.dual_residual + b.primal_residual + b.dual_residual;
            let slack = 2.0 * opts_cap.residual_tol + 10.0 * achieved;
            assert!(
                a.value <= b.value + slack.max(1e-6),
                "cap {cap}: alpha {} vs beta {} (residual sum {achieved:.3e})",
                a.value,
                b.value
            );
        }
    }
}

/// Capacity results of contractions stay inside the unit interval.
#[test]
fn capacity_values_lie_in_the_unit_interval() {
    let mut rng = haar::rng(306);
    for _ in 0..20 {
        let left = MeasuredAlgebra::new(haar::density(2, &mut rng)).unwrap();
        let right = MeasuredAlgebra::new(haar::density(3, &mut rng)).unwrap();
        let t = haar::psd_contraction(6, &mut rng);
        for res in [
            capacity::alpha(&t, &left, &right, &opts()).unwrap(),
            capacity::beta(&t, &left, &right, &opts()).unwrap(),
        ] {
            assert!(
                res.value >= -1e-9 && res.value <= 1.0 + 1e-9,
                "value {}",
                res.value
            );
        }
    }
}
