//! The `paper-examples` subcommand: a deterministic regression table of the
//! library's reference values — closed forms, solved families and worked
//! instances — each rerun from scratch and compared against its expected
//! value. Failures are listed without aborting the run.

use coupcap::capacity;
use coupcap::classical::{self, ClassicalInstance};
use coupcap::entangle::{self, EntanglementClass};
use coupcap::gamma;
use coupcap::haar;
use coupcap::linalg::{
    kron, min_eigenvalue, vec_norm, vec_sub, vec_tensor, Complex64, ComplexMatrix,
    HermitianOperator, ProjectionOperator, Subspace,
};
use coupcap::model::{self, MeasuredAlgebra};
use coupcap::sdp::{self, SolverOptions};

pub struct Case {
    pub name: &'static str,
    pub observed: f64,
    pub expected: f64,
    pub tol: f64,
}

impl Case {
    pub fn passed(&self) -> bool {
        (self.observed - self.expected).abs() <= self.tol
    }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn basis_vec(dim: usize, i: usize) -> Vec<Complex64> {
    let mut v = vec![c(0.0, 0.0); dim];
    v[i] = c(1.0, 0.0);
    v
}

fn tilted(t: f64) -> Vec<Complex64> {
    let s = (1.0 - t * t).sqrt();
    let mut xi = vec![c(0.0, 0.0); 4];
    xi[0] = c(t, 0.0);
    xi[3] = c(s, 0.0);
    xi
}

fn flat_vector(n: usize) -> Vec<Complex64> {
    let mut xi = vec![c(0.0, 0.0); n * n];
    let w = 1.0 / (n as f64).sqrt();
    for i in 0..n {
        xi[i * n + i] = c(w, 0.0);
    }
    xi
}

fn plus_state() -> MeasuredAlgebra {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    MeasuredAlgebra::vector_state(&[c(s, 0.0), c(s, 0.0)]).unwrap()
}

/// Build and evaluate the whole table. Deterministic for a fixed seed; the
/// solver options are threaded through every solve, so degrading the
/// tolerance shows up as reported deltas.
pub fn run(seed: u64, opts: &SolverOptions) -> Vec<Case> {
    let opts = opts.clone();
    let mut rng = haar::rng(seed);
    let mut cases = Vec::new();
    let mut push = |name: &'static str, observed: f64, expected: f64, tol: f64| {
        cases.push(Case {
            name,
            observed,
            expected,
            tol,
        });
    };

    let u2 = MeasuredAlgebra::uniform(2);
    let u3 = MeasuredAlgebra::uniform(3);

    // marginal of a rank-one projection carries the squared Schmidt weights
    {
        let xi = tilted(0.8);
        let e = HermitianOperator::outer(&xi);
        let tb = coupcap::linalg::partial_trace_b(&e, 2, 2).unwrap();
        let mut expected = ComplexMatrix::zeros(2, 2);
        expected.set(0, 0, c(0.64, 0.0));
        expected.set(1, 1, c(0.36, 0.0));
        push(
            "marginal of tilted rank-one projection",
            tb.matrix().sub(&expected).max_norm(),
            0.0,
            1e-12,
        );
    }

    // a maximally entangled projection couples the two traces
    {
        let xi = haar::maximally_entangled(2, 2, &mut rng);
        let d = HermitianOperator::outer(&xi);
        let check = model::is_coupling(&d, &u2, &u2, 1e-7).unwrap();
        push(
            "maximally entangled projection is a trace coupling",
            if check.is_coupling { 0.0 } else { 1.0 },
            0.0,
            0.0,
        );
    }

    // block-matrix correspondence: identity channel and twisted channel
    {
        let n = 2usize;
        let blocks: Vec<ComplexMatrix> = (0..n * n)
            .map(|idx| {
                let mut b = ComplexMatrix::zeros(n, n);
                b.set(idx / n, idx % n, c(n as f64, 0.0));
                b
            })
            .collect();
        let phi = model::ChoiMap::new(n, n, blocks).unwrap();
        let cpl = model::coupling_of_choi(&phi).unwrap();
        let expected = HermitianOperator::outer(&flat_vector(n));
        push(
            "identity-channel blocks give the flat coupling",
            cpl.density().matrix().sub(expected.matrix()).max_norm(),
            0.0,
            1e-12,
        );

        let u = haar::unitary(n, &mut rng);
        let base = model::ChoiMap::conjugation(&u);
        let scaled: Vec<ComplexMatrix> = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .map(|(i, j)| base.block(i, j).scale_re(n as f64))
            .collect();
        let phi = model::ChoiMap::new(n, n, scaled).unwrap();
        let cpl = model::coupling_of_choi(&phi).unwrap();
        let mut eta = vec![c(0.0, 0.0); n * n];
        for s in 0..n {
            for k in 0..n {
                eta[s * n + k] += u.get(k, s) / c((n as f64).sqrt(), 0.0);
            }
        }
        let expected = HermitianOperator::outer(&eta);
        push(
            "twisted-channel blocks give a twisted flat coupling",
            cpl.density().matrix().sub(expected.matrix()).max_norm(),
            0.0,
            1e-12,
        );
    }

    // blockwise application of a conjugation twists the second factor
    {
        let (n, m) = (2usize, 3usize);
        let xi = haar::unit_vector(n * m, &mut rng);
        let u = haar::unitary(m, &mut rng);
        let phi = model::ChoiMap::conjugation(&u);
        let out = model::apply_choi_blockwise(&phi, &HermitianOperator::outer(&xi)).unwrap();
        let twisted = kron(&ComplexMatrix::identity(n), &u).mat_vec(&xi);
        push(
            "blockwise conjugation matches the twisted projection",
            out.matrix()
                .sub(HermitianOperator::outer(&twisted).matrix())
                .max_norm(),
            0.0,
            1e-12,
        );
    }

    // capacity values
    push(
        "capacity of the identity",
        sdp::solve_alpha(&HermitianOperator::identity(4), &u2, &u2, &opts)
            .unwrap()
            .value,
        1.0,
        1e-6,
    );
    {
        let xi = haar::maximally_entangled(2, 2, &mut rng);
        push(
            "capacity of a maximally entangled projection",
            sdp::solve_alpha(&HermitianOperator::outer(&xi), &u2, &u2, &opts)
                .unwrap()
                .value,
            1.0,
            1e-5,
        );
    }
    {
        let xi = vec_tensor(&basis_vec(2, 0), &basis_vec(3, 0));
        push(
            "capacity of a separable projection on 2 x 3",
            sdp::solve_alpha(&HermitianOperator::outer(&xi), &u2, &u3, &opts)
                .unwrap()
                .value,
            1.0 / 3.0,
            1e-5,
        );
    }
    push(
        "capacity of the tilted projection at t = 0.8",
        sdp::solve_alpha(&HermitianOperator::outer(&tilted(0.8)), &u2, &u2, &opts)
            .unwrap()
            .value,
        0.98,
        1e-5,
    );

    // the strict-gap instance
    {
        let state = plus_state();
        let p = ProjectionOperator::onto_vector(&basis_vec(2, 0)).unwrap();
        let e = capacity::product_projection(&p, &p);
        push(
            "strict-gap instance: coupling capacity",
            sdp::solve_alpha(&e, &state, &state, &opts).unwrap().value,
            0.25,
            1e-6,
        );
        push(
            "strict-gap instance: covering capacity",
            sdp::solve_beta(&e, &state, &state, &opts).unwrap().value,
            0.25,
            1e-6,
        );
        push(
            "strict-gap instance: projective capacity",
            gamma::gamma_product(&p, &p, &state, &state)
                .unwrap()
                .exact
                .unwrap(),
            0.5,
            1e-12,
        );
    }

    // product projections under trace marginals
    {
        let e = haar::projection(3, 1, &mut rng);
        let f = haar::projection(3, 2, &mut rng);
        let t = capacity::product_projection(&e, &f);
        push(
            "product projection ranks (1, 2) on 3 x 3: covering capacity",
            sdp::solve_beta(&t, &u3, &u3, &opts).unwrap().value,
            1.0 / 3.0,
            1e-6,
        );
        push(
            "product projection ranks (1, 2) on 3 x 3: projective capacity",
            gamma::gamma_product(&e, &f, &u3, &u3)
                .unwrap()
                .exact
                .unwrap(),
            1.0 / 3.0,
            1e-12,
        );
    }

    // the vector parameter w
    {
        let xi = vec_tensor(&basis_vec(2, 0), &basis_vec(3, 1));
        push(
            "w of a separable vector on 2 x 3",
            capacity::w_of_vector(&xi, 2, 3).unwrap().value,
            1.0 / 3.0,
            1e-9,
        );
        let t = 0.9;
        push(
            "w of the tilted vector at t = 0.9",
            capacity::w_of_vector(&tilted(t), 2, 2).unwrap().value,
            1.0 / (2.0 * t * t),
            1e-9,
        );
        push(
            "w of a maximally entangled vector on 3 x 3",
            capacity::w_of_vector(&haar::maximally_entangled(3, 3, &mut rng), 3, 3)
                .unwrap()
                .value,
            1.0,
            1e-9,
        );
    }

    // channel form and unitary search
    {
        let xi = tilted(0.8);
        let t = HermitianOperator::outer(&xi);
        let phi = model::ChoiMap::conjugation(&ComplexMatrix::identity(2));
        push(
            "channel form with aligned frames at t = 0.8",
            capacity::alpha_channel_form(&t, &phi).unwrap(),
            0.98,
            1e-12,
        );
        push(
            "unitary search on the tilted projection",
            capacity::alpha_unitary_search(&t, 8, seed).unwrap(),
            0.98,
            1e-5,
        );
        let me = HermitianOperator::outer(&haar::maximally_entangled(2, 2, &mut rng));
        push(
            "unitary search on a maximally entangled projection",
            capacity::alpha_unitary_search(&me, 8, seed ^ 1).unwrap(),
            1.0,
            1e-5,
        );
    }

    // support feasibility
    {
        let me = haar::maximally_entangled(2, 2, &mut rng);
        let x = Subspace::span(4, &[me]).unwrap();
        let verdict = capacity::strassen_decide(&x, &u2, &u2, &opts).unwrap();
        push(
            "support feasibility on an entangled line",
            verdict.alpha_value,
            1.0,
            1e-5,
        );
        let x = Subspace::span(4, &[vec_tensor(&basis_vec(2, 0), &basis_vec(2, 0))]).unwrap();
        let verdict = capacity::strassen_decide(&x, &u2, &u2, &opts).unwrap();
        push(
            "support infeasibility on a separable line",
            verdict.alpha_value,
            0.5,
            1e-5,
        );
        push(
            "support infeasibility: certificate margin",
            verdict.margin.unwrap(),
            0.5,
            1e-5,
        );
    }

    // rank-one projective dichotomy on 2 x 2
    {
        push(
            "projective capacity of an entangled rank-one on 2 x 2",
            gamma::gamma_rank_one_2x2(&haar::maximally_entangled(2, 2, &mut rng))
                .unwrap()
                .exact
                .unwrap(),
            1.0,
            0.0,
        );
        push(
            "projective capacity of a separable rank-one on 2 x 2",
            gamma::gamma_rank_one_2x2(&vec_tensor(&basis_vec(2, 0), &basis_vec(2, 1)))
                .unwrap()
                .exact
                .unwrap(),
            0.5,
            0.0,
        );
        push(
            "projective capacity of the tilted vector at t = 0.9",
            gamma::gamma_rank_one_2x2(&tilted(0.9))
                .unwrap()
                .exact
                .unwrap(),
            1.0,
            0.0,
        );
        let e = ProjectionOperator::onto_vector(&vec_tensor(&basis_vec(2, 0), &basis_vec(2, 1)))
            .unwrap();
        push(
            "projective search agrees on a separable rank-one",
            gamma::gamma_search(&e, &u2, &u2, 8, seed ^ 2)
                .unwrap()
                .upper,
            0.5,
            1e-7,
        );
    }

    // classification by capacity thresholds
    {
        let verdict =
            entangle::classify(&vec_tensor(&basis_vec(2, 0), &basis_vec(3, 1)), 2, 3).unwrap();
        push(
            "classification of a separable vector (capacity)",
            verdict.alpha_value,
            1.0 / 3.0,
            1e-5,
        );
        push(
            "classification of a separable vector (class)",
            if verdict.class == EntanglementClass::Separable {
                0.0
            } else {
                1.0
            },
            0.0,
            0.0,
        );
        let verdict = entangle::classify(&haar::maximally_entangled(3, 3, &mut rng), 3, 3).unwrap();
        push(
            "classification of a maximally entangled vector",
            if verdict.class == EntanglementClass::MaximallyEntangled {
                0.0
            } else {
                1.0
            },
            0.0,
            0.0,
        );
        let t = 0.9;
        let verdict = entangle::classify(&tilted(t), 2, 2).unwrap();
        push(
            "classification of the tilted vector (capacity)",
            verdict.alpha_value,
            0.5 + t * (1.0f64 - t * t).sqrt(),
            1e-5,
        );
    }

    // frame-sum lower bound
    {
        push(
            "frame-sum bound of a separable qubit vector",
            entangle::alpha_rank_one_lower(&vec_tensor(&basis_vec(2, 1), &basis_vec(2, 0)), 2, 2)
                .unwrap(),
            0.5,
            1e-12,
        );
        push(
            "frame-sum bound of a maximally entangled qutrit vector",
            entangle::alpha_rank_one_lower(&haar::maximally_entangled(3, 3, &mut rng), 3, 3)
                .unwrap(),
            1.0,
            1e-10,
        );
        push(
            "frame-sum bound of the tilted vector at t = 0.8",
            entangle::alpha_rank_one_lower(&tilted(0.8), 2, 2).unwrap(),
            0.98,
            1e-12,
        );
    }

    // capacity sweep endpoints
    {
        let sweep = entangle::capacity_sweep(2, 4).unwrap();
        push("capacity sweep start", sweep[0].1, 0.5, 1e-5);
        push("capacity sweep end", sweep[4].1, 1.0, 1e-5);
    }

    // minimum-capacity projections factor through a rank-one leg
    {
        let p = ProjectionOperator::onto_vector(&basis_vec(2, 0)).unwrap();
        let e = ProjectionOperator::new(
            HermitianOperator::new(kron(&ComplexMatrix::identity(2), p.matrix())).unwrap(),
        )
        .unwrap();
        push(
            "minimum-capacity factorization check",
            if entangle::alpha_min_projection_check(&e).unwrap() {
                0.0
            } else {
                1.0
            },
            0.0,
            0.0,
        );
    }

    // capacity-1 detection on a plane containing an entangled line
    {
        let me = haar::maximally_entangled(2, 2, &mut rng);
        let other = haar::unit_vector(4, &mut rng);
        let x = Subspace::span(4, &[me, other]).unwrap();
        let e = x.projection().unwrap();
        push(
            "planted entangled line inside a plane",
            sdp::solve_alpha(e.base(), &u2, &u2, &opts).unwrap().value,
            1.0,
            1e-5,
        );
    }

    // sub-coupling completion of the half product
    {
        let left = MeasuredAlgebra::new(haar::density(2, &mut rng)).unwrap();
        let right = MeasuredAlgebra::new(haar::density(2, &mut rng)).unwrap();
        let product = kron(left.density().matrix(), right.density().matrix());
        let half = HermitianOperator::new(product.scale_re(0.5)).unwrap();
        let completed = model::complete_subcoupling(&half, &left, &right, 1e-9).unwrap();
        push(
            "completion of the half product",
            completed.density().matrix().sub(&product).max_norm(),
            0.0,
            1e-12,
        );
    }

    // join equivalence on a commuting instance
    {
        let p = haar::projection(2, 1, &mut rng);
        let q = haar::projection(3, 2, &mut rng);
        let sum = HermitianOperator::new(
            kron(p.matrix(), &ComplexMatrix::identity(3))
                .add(&kron(&ComplexMatrix::identity(2), q.matrix())),
        )
        .unwrap();
        let join = coupcap::linalg::proj_join(&p, &q).unwrap();
        let t = haar::psd_contraction(6, &mut rng);
        let below_sum = min_eigenvalue(&sum.sub(&t)).unwrap() >= -1e-9;
        let below_join = min_eigenvalue(&join.base().sub(&t)).unwrap() >= -1e-9;
        push(
            "join equivalence for commuting ampliations",
            if below_sum == below_join { 0.0 } else { 1.0 },
            0.0,
            0.0,
        );
    }

    // bistochastic grid of a permutation coupling
    {
        let n = 3usize;
        let perm = [2usize, 0, 1];
        let mut d = ComplexMatrix::zeros(n * n, n * n);
        for (i, &pi) in perm.iter().enumerate() {
            d.set(i * n + pi, i * n + pi, c(1.0 / n as f64, 0.0));
        }
        let ok = model::bistochastic_check(&HermitianOperator::new(d).unwrap(), n).unwrap();
        push(
            "permutation coupling has a bistochastic grid",
            if ok { 0.0 } else { 1.0 },
            0.0,
            0.0,
        );
    }

    // classical specialization: matching oracle and duality
    {
        let uniform = vec![1.0 / 3.0; 3];
        let inst =
            ClassicalInstance::from_support(uniform.clone(), uniform, &[(0, 0), (1, 1)]).unwrap();
        let (alpha, _) = classical::ot_alpha(&inst).unwrap();
        push(
            "partial-permutation transport value",
            alpha,
            2.0 / 3.0,
            1e-9,
        );
        let (beta, _, _) = classical::ot_beta(&inst).unwrap();
        push("partial-permutation covering value", beta, 2.0 / 3.0, 1e-8);
        let (gamma_v, _, _) = classical::ot_gamma(&inst).unwrap();
        push("partial-permutation cover value", gamma_v, 2.0 / 3.0, 1e-9);
        let (t, left, right) = classical::diag_embed(&inst).unwrap();
        push(
            "diagonal embedding agrees with the transport value",
            sdp::solve_alpha(&t, &left, &right, &opts).unwrap().value,
            2.0 / 3.0,
            1e-6,
        );
    }

    // schmidt reconstruction of a random vector
    {
        let xi = haar::unit_vector(6, &mut rng);
        let dec = entangle::schmidt(&xi, 2, 3).unwrap();
        push(
            "schmidt reconstruction",
            vec_norm(&vec_sub(&dec.reconstruct(), &xi)),
            0.0,
            1e-9,
        );
    }

    cases
}
