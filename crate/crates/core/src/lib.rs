//! Core scoring and inference routines for population-agreement evaluation.
//!
//! This crate measures how well individual raters (people or language models)
//! and whole rater populations agree about short declarative statements. The
//! three central quantities are *consensus* (how far a rating distribution is
//! from a 50/50 split), *awareness* (how accurately raters predict the
//! majority rating), and *commonsensicality* (their geometric mean). On top of
//! those sit the statistical machinery used to compare populations: Pearson
//! and Spearman correlation with exact Student-t p-values, bootstrap
//! contrasts, split-half reliability, calibration binning, OLS with k-fold
//! out-of-sample R², a random-intercept mixed model fitted by profiled REML,
//! and Elo win probabilities.
//!
//! The crate is `no_std`-compatible (requires `alloc`); file formats, the
//! CLI, and the elicitation HTTP client live in the companion `sensus` crate.
//! All randomized routines draw from [`rng::StreamRng`], a seedable
//! counter-based generator with numbered substreams, so results are
//! reproducible bit-for-bit from a seed regardless of evaluation order.

#![cfg_attr(not(feature = "std"), no_std)]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod corpus;
pub mod elicit;
pub mod metrics;
pub mod regress;
pub mod rng;
pub mod stats;
pub mod synth;

mod math;

pub use corpus::{Corpus, ModelMeta, ModelRatings, RatingMatrix, Statement};
pub use metrics::{ScoreRecord, StatementAggregate};
