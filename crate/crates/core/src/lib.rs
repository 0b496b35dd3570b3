//! Disclosure risk evaluation and control for categorical microdata.
//!
//! A decomposable log-linear model is selected for the key variables by AIC
//! hill climbing over chordal graphs ([`search`]). Its closed-form cell
//! probabilities ([`fit`]) give a per-record estimate of how likely each sample
//! unique is to be unique in the population ([`risk`]), and risky records are
//! swapped with partners in a way that leaves every clique marginal of the model
//! unchanged ([`swap`]).

pub mod cli;
pub mod error;
pub mod fit;
pub mod graph;
pub mod microdata;
pub mod oracle;
pub mod pipeline;
pub mod report;
pub mod risk;
pub mod search;
pub mod swap;
pub mod varset;

pub use error::{Error, Result};
pub use fit::{fit, FittedModel};
pub use graph::{decompose, mcs, CliqueDecomposition, Graph};
pub use microdata::{ingest_csv, Schema, SparseTable, Variable};
pub use varset::VarSet;
