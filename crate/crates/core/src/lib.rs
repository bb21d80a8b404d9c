//! Restaurant survival prediction from location-based social network snapshots.
//!
//! The pipeline takes two dated Yelp-style snapshots, labels restaurants that
//! were open at the end of the observation period as survived or dead by the
//! end of the prediction period, extracts four feature families (geography,
//! user mobility, business attributes, linguistics), trains imbalance-aware
//! classifiers, and produces local explanations for individual predictions.

pub mod attributes;
pub mod corpus;
pub mod error;
pub mod explain;
pub mod geo;
pub mod learn;
pub mod mobility;
pub mod numeric;
pub mod seed;
pub mod table;
pub mod text;

pub use error::{Error, Result};
