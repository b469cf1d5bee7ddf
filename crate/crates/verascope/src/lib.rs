//! Verascope assesses the veracity of circulating stories by combining
//! heterogeneous detectors, weighting each one by how reliable it is for
//! the story at hand, and explaining the resulting verdict. Around that
//! core it detects coordinated amplification, classifies the intent behind
//! it, and merges actor identities across platforms.
//!
//! Every run is a pure function of its inputs and a seed: corpora are
//! ordered collections, randomness is explicit, and serialized outputs are
//! byte-stable.

pub mod aggregator;
pub mod base_models;
pub mod config;
pub mod coordination;
pub mod corpus;
pub mod crossplatform;
pub mod error;
pub mod explainer;
pub mod features;
pub mod harness;

pub use error::{Error, Result};
