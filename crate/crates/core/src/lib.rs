//! Finite invariants of oligomorphic permutation groups given as automorphism
//! groups of homogeneous relational structures.

pub mod algebraicity;
pub mod canon;
mod complete;
pub mod orbits;
pub mod corpus;
pub mod error;
pub mod format;
pub mod groupoid;
pub mod imaginaries;
pub mod inn_tree;
pub mod normalizer;
pub mod presentation;
pub mod structure;
pub mod types;
pub mod verdict;
pub mod wu;

pub use error::{Error, Result};
pub use verdict::Verdict;
