//! Venue-category forecasting from self-position-reporting microblog
//! streams.
//!
//! The pipeline ingests JSONL stream tuples, resolves users into four
//! kinds of dynamic communities (opinions, language, geo networks,
//! temporal sessions), embeds tuples into fixed-length feature vectors,
//! trains a feed-forward classifier per community, and evaluates with
//! per-community accuracy and precision/recall reports.
//!
//! See the crate examples for one runnable walkthrough per capability.

pub mod affect;
pub mod annotate;
pub mod baselines;
pub mod community;
pub mod embed;
pub mod eval;
pub mod geonet;
pub mod ingest;
pub mod nn;
pub mod pipeline;
pub mod synth;
pub mod textsim;
pub mod timeutil;
