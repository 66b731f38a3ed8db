//! Session → feature vector: tokenisation, n-gram vocabularies, LSA,
//! temporal, social, image and post-time features, and the fitted
//! pipeline that assembles them under a fingerprinted schema.

pub mod lsa;
pub mod pipeline;
pub mod session;
pub mod text;

pub use lsa::{fit_lsa, project_lsa, LsaModel};
pub use pipeline::{
    prediction_config, text_segments, ComponentKind, FeatureConfig, FeatureGroup, FeatureSchema,
    FeatureVector, FittedPipeline, LadderLevel, TextConfig, DEFAULT_LSA_RANK, DEFAULT_MIN_DF,
};
pub use session::{
    image_features, interarrival_gaps, post_time_features, social_features, temporal_features,
    TemporalFeatures, DEFAULT_TEMPORAL_THRESHOLDS,
};
pub use text::{build_vocabulary, segment_terms, tokenize, vectorize_text, TermOptions, Vocabulary};
