//! Two-pass entity disambiguation and linking.
//!
//! Mentions are found by greedy dictionary matching, then resolved to
//! knowledge-base entities in two passes: low-ambiguity ("easy") mentions by
//! prior thresholds, the rest ("hard") by a decision tree labeler and a
//! logistic regression scorer over five features computed against the easy
//! entities nearby.

pub mod builder;
pub mod bulk;
pub mod classify;
pub mod config;
pub mod disambig;
pub mod engine;
pub mod entity;
pub mod error;
pub mod eval;
pub mod features;
pub mod kb;
pub mod preprocess;
pub mod profile;
pub mod record;
pub mod sweep;

pub use engine::Engine;
pub use entity::EntityId;
pub use error::{EdlError, Result};
