//! Coupling capacities of states on pairs of matrix algebras.
//!
//! Given two matrix algebras carrying states (density matrices) and a positive
//! contraction `T` on their tensor product, this crate computes
//!
//! * `alpha(T)` — the largest value a coupling of the two states assigns to `T`,
//! * `beta(T)`  — the cheapest positive covering `a ⊗ 1 + 1 ⊗ b ≥ T` priced by
//!   the states, and
//! * bounds for `gamma(T)` — the cheapest pair of projections whose lattice
//!   join dominates `T`,
//!
//! together with primal witnesses and dual certificates for each value. The
//! commutative specialization (diagonal algebras) is classical optimal
//! transport on finite sets and is solved by independent combinatorial
//! routines, which double as oracles for the matrix-algebra solvers.
//!
//! All numeric work is dense complex linear algebra over `f64`, self-contained
//! in [`linalg`]. Everything is deterministic: randomized searches take
//! explicit seeds.
//!
//! ```
//! use coupcap::{capacity, haar};
//! use coupcap::linalg::HermitianOperator;
//! use coupcap::model::MeasuredAlgebra;
//! use coupcap::sdp::SolverOptions;
//!
//! // a maximally entangled qubit pair saturates the coupling capacity
//! let mut rng = haar::rng(7);
//! let xi = haar::maximally_entangled(2, 2, &mut rng);
//! let t = HermitianOperator::outer(&xi);
//! let trace = MeasuredAlgebra::uniform(2);
//! let res = capacity::alpha(&t, &trace, &trace, &SolverOptions::default())?;
//! assert!((res.value - 1.0).abs() < 1e-6);
//! assert!(res.witness.is_some());
//! # Ok::<(), coupcap::Error>(())
//! ```

pub mod capacity;
pub mod classical;
pub mod entangle;
pub mod error;
pub mod gamma;
pub mod haar;
pub mod linalg;
pub mod model;
pub mod sdp;

pub use error::{Error, Result};
