//! Cyberbullying analysis for media sessions (an image plus its comment
//! stream): corpus filtering, crowd-label aggregation, descriptive
//! analyses, feature extraction, linear classifiers and the detection and
//! incremental-prediction evaluation protocols.

pub mod analysis;
pub mod corpus;
pub mod error;
pub mod eval;
pub mod features;
pub mod labels;
pub mod lexicon;
pub mod models;
pub mod numerics;
pub mod util;

pub use error::{Error, Result};
