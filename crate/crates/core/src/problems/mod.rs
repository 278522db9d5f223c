//! Relation problems, brute-force solvers and verifiers, exact correlation
//! measurement, counting calculators, and the abelian XOR-lemma checker.

mod correlate;
mod counting;
mod hlf;
mod relations;
mod xor;

pub use correlate::{best_linear_agreement, exact_correlation, CorrelationTarget};
pub use counting::{counting_bounds, CountingReport};
pub use hlf::{solve_2dhlf_bruteforce, verify_2dhlf, HlfInstance};
pub use relations::{
    trits_from_two_bit, trits_to_two_bit, verify_relation, RelationInstance, RelationOutput,
    RelationReport, RelationTag,
};
pub use xor::{xor_lemma_check, XorReport};
