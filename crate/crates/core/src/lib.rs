//! Finite materializations of the tree-coding structures over the vocabulary
//! `P, L, V, T, <, ≺, H, F, G`, together with everything needed to exercise
//! them: an axiom checker, the substructure calculus, amalgamation and
//! joint-embedding searches, leveled-tree operations, a simulator for the
//! Kurepa-tree forcing poset with its Cohen-coordinate companion, and a
//! small-size spectrum laboratory.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, the command
//! line and any parallelism live in the `kurepa` companion crate.
#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod amalgam;
pub mod checker;
pub mod extension;
pub mod forcing;
pub mod morphisms;
pub mod spectrum;
pub mod structure;
pub mod treeops;
pub mod verdict;

pub use checker::{check, check_with, classify, CheckError, CheckOptions, Classification, LKind, Sentence};
pub use morphisms::{find_proper_extension, is_substructure_model, EmbeddingReport, MorphismError};
pub use structure::{Id, LevelElem, LevelKind, Mode, Node, StructureError, StructureParts, TauStructure};
pub use treeops::PrunedTree;
pub use verdict::{Verdict, Violation};
