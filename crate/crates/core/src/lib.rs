//! Evaluation metrology for multi-task video evaluation campaigns.
//!
//! The crate covers the full scoring pipeline of a campaign:
//!
//! - [`io`]: submission and reference formats (ranked runs, stratified
//!   judgments, activity instance documents, answer sheets, rating files).
//! - [`pooling`]: stratified dedup-and-sample assessment pools and the
//!   per-topic pooling/judging statistics.
//! - [`retrieval`]: AP/MAP, extended inferred AP from sampled judgments, MRR,
//!   accuracy, precision/recall/F, the novelty metric and summarization scores.
//! - [`detection`]: streaming activity-detection scoring (alignment, DET
//!   curves, Pmiss@RFA, nAUDC, time-based false alarms, N_MODE/minMODE).
//! - [`stats`]: paired randomization tests, Pearson correlation and
//!   direct-assessment standardization.
//!
//! Everything here is a pure function of its inputs. Apart from the pairwise
//! significance matrix, parallel drivers live in the command-line crate.

pub mod detection;
pub mod error;
pub mod io;
pub mod plot;
pub mod pooling;
pub mod retrieval;
pub mod round;
pub mod stats;
pub mod synth;

pub use error::{Error, Result};
pub use io::{
    ActivityInstance, ActivityInstanceSet, AnswerSheet, DaRatingFile, JudgmentSet, RankedRun,
    TopicId,
};
