//! Decision procedures for parafreeness of fundamental groups of finite
//! graphs of groups with finitely generated free vertex groups and cyclic
//! (trivial or infinite cyclic) edge groups.
//!
//! The library certifies or refutes parafreeness by checking, exactly where
//! possible and soundly three-valued otherwise:
//!
//! 1. vertex groups are free (hence parafree),
//! 2. the abelianization is torsion-free of the expected rank,
//! 3. per removed edge, at least one attaching word is not a proper power,
//! 4. per cyclic edge, the edge generator survives in some finite nilpotent
//!    quotient.
//!
//! Every verdict carries machine-checkable evidence; `Unknown` is an honest
//! outcome, never a guess.

pub mod criteria;
pub mod graph;
pub mod instance;
pub mod lattice;
pub mod normal_form;
pub mod report;
pub mod rng;
pub mod ut;
pub mod witness;
pub mod words;

pub mod cli;

pub use criteria::{check_amalgam, check_gog, check_hnn, CheckOptions, Determination, Status, Verdict};
pub use graph::{decompose, expected_rank, spanning_tree, GraphOfGroups};
pub use lattice::{cokernel_invariants, is_primitive_vector, smith_normal_form, IntMatrix};
pub use words::{cyclic_reduce, exponent_vector, free_reduce, parse_word, primitive_root, Alphabet, Word};
