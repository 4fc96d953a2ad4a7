//! Quantum graph homomorphisms through correlations and completely positive maps.
//!
//! The toolkit centers on the two-player graph homomorphism game: a referee
//! sends vertices of a graph `G` to Alice and Bob, who answer with vertices of
//! a graph `H` and win when equal questions get equal answers and adjacent
//! questions get adjacent answers. Everything here grows out of the
//! correlations `p(x,y|v,w)` describing such strategies:
//!
//! - [`graph`] — simple graphs, parsing, complements, operator-system supports.
//! - [`correlation`] — the correlation tensor, strategy checks, composition.
//! - [`membership`] — Gram-matrix feasibility tests (vectorial and B variants)
//!   and exact local-polytope membership.
//! - [`choi`] — Choi matrices of the induced maps and their trace/support
//!   preservation checks.
//! - [`cesaro`] — Cesàro averaging of self-strategies to idempotent maps and
//!   quantum core candidates.
//! - [`rep`] — finite-dimensional representations of the game relations, the
//!   trace bridge back to correlations, and the theta-function norm bound.
//! - [`theta`] — Lovász theta, its nonnegative variant, and the vectorial
//!   chromatic number.
//! - [`homo`] — exact classical homomorphism search, chromatic/clique numbers,
//!   and graph cores via retractions.
//! - [`linalg`], [`sdp`], [`lp`] — the dense symmetric eigensolver, the
//!   operator-splitting SDP solver, and a small exact simplex underneath.

pub mod cmatrix;
pub mod correlation;
pub mod graph;
pub mod homo;
pub mod linalg;
pub mod lp;
pub mod membership;
pub mod cesaro;
pub mod choi;
pub mod sample;
pub mod sdp;

pub use cesaro::{cesaro_idempotent, idempotent_leq, quantum_core_candidate};
pub use choi::{choi_of, one_norm, sigma, ChoiMap};
pub use correlation::{Correlation, StrategyReport};
pub use graph::{Graph, SupportSet};
pub use homo::VertexMap;
pub use membership::GramWitness;
