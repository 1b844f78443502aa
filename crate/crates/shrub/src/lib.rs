//! Counting and optimization on graphs presented by bounded-depth tree-models,
//! in space polynomial in the model size.

pub mod domset_solver;
pub mod engine;
pub mod error;
pub mod graph;
pub mod hom_solver;
pub mod is_solver;
pub mod lcsgen;
pub mod maxcut_solver;
pub mod modmath;
pub mod oracle;
pub mod settrans;
pub mod tree_model;

pub use error::{Error, Result};
