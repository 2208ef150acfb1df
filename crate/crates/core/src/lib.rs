//! Weighted quartet consensus.
//!
//! Given a multiset of unrooted binary trees on one taxon set, find a binary
//! tree sharing as many quartets with the input as possible. This crate
//! provides the quartet bookkeeping, a best-input-tree 2-approximation for
//! the inconsistency form, a derandomized 1/3-approximation and their
//! combination into a 1/2-approximation, a brute-force exact solver, a
//! parameterized branching solver, the cyclic-ordering gadget construction
//! and a small laboratory for dominance-structure experiments.

pub mod analysis;
pub mod approx;
pub mod error;
pub mod exact;
pub mod fpt;
pub mod quartets;
pub mod reduction;
pub mod tree;

pub use error::{Error, Result};
