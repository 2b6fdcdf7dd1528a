//! Subgroup representation audits and filtered augmentation for
//! categorical tabular data.
//!
//! The crate measures how well a synthetic dataset represents the
//! subgroups of a reference dataset (log-ratio disparity over full
//! protected-attribute combinations) and repairs under-represented
//! subgroups by generating candidate records conditionally, screening
//! them with a one-class SVM, and accepting batches only when a
//! discriminator cannot tell them apart from the real subgroup.

pub mod cli;
pub mod dataset;
pub mod disparity;
pub mod encode;
pub mod equalizer;
pub mod error;
pub mod filter;
pub mod generators;
pub mod report;
pub mod rng;
pub mod subgroups;

pub use dataset::{CohortSpec, ColumnSpec, Dataset, Row, Schema};
pub use error::{Error, Result};
