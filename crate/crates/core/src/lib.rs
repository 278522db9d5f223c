//! gk-lab: a desk-scale laboratory for constant-depth circuits with
//! generalized gates.
//!
//! The crate implements, end to end and with oracle-backed tests:
//!
//! * sparse multilinear polynomial arithmetic over prime fields, including
//!   exact interpolation on Hamming balls ([`poly`]);
//! * a gate/circuit model for unbounded fan-in AND/OR/NOT/MOD/MAJ/THR
//!   gates plus generalized gates that are arbitrary inside a small
//!   Hamming ball and constant outside it ([`circuit`]);
//! * probabilistic-polynomial samplers for single gates and whole circuits,
//!   with empirical error estimation and a brute-force minimum-degree
//!   oracle ([`probpoly`]);
//! * randomness-efficient probabilistic circuits: the isolation-based
//!   weight detector, its depth-5 assembly, and collapse to depth 2
//!   ([`depthred`]);
//! * the satisfiability pipeline through symmetric-function circuits with
//!   fast whole-cube evaluation ([`symsat`]);
//! * random-restriction experiments, exact decision-tree depth, and
//!   Walsh-Hadamard analysis ([`switchlab`]);
//! * instance generators, brute-force solvers and verifiers for the
//!   relation problems, exact correlation measurement, counting bounds,
//!   and an XOR-lemma checker ([`problems`]).
//!
//! Everything is seedable and deterministic: a report is reproducible
//! bit-for-bit from its configuration and 64-bit seed.

// Index loops over packed cubes and modulus checks read better as written.
#![allow(
    clippy::needless_range_loop,
    clippy::manual_is_multiple_of,
    clippy::manual_range_contains,
    clippy::too_many_arguments
)]

pub mod ball;
pub mod circuit;
pub mod depthred;
pub mod error;
pub mod field;
pub mod gen;
pub mod poly;
pub mod problems;
pub mod probpoly;
pub mod report;
pub mod rng;
pub mod switchlab;
pub mod symsat;

pub use error::{Caps, Error, Result};
