//! Submission and reference file formats.
//!
//! Every parser is a pure function over a reader and rejects bad input with
//! the offending line (or record) number. Serializers emit a canonical,
//! byte-stable form: `write(parse(x))` is a fixed point of `parse ∘ write`.

mod activity;
mod answers;
mod da;
mod judgments;
mod run;
mod validate;

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

pub use activity::{
    parse_activity_set, write_activity_set, ActivityInstance, ActivityInstanceSet, BoundingBox,
    InstanceSetKind, ObjectBox,
};
pub use answers::{parse_answer_sheet, write_answer_sheet, Answer, AnswerEntry, AnswerSheet};
pub use da::{parse_da_ratings, write_da_ratings, DaRating, DaRatingFile};
pub use judgments::{
    parse_judgments, parse_strata, write_judgments, write_strata, Judgment, JudgmentSet,
    Stratum, StrataTable,
};
pub use run::{
    parse_retrieval_run, write_retrieval_run, RankedEntry, RankedRun, RunKind, RunParseOptions,
    Task, TrainingType, DEFAULT_RANK_LIMIT,
};
pub use validate::{canonicalize, validate_run, Finding, Severity, ValidationReport};

/// Topic (query, feature) identifier.
///
/// Ordered numerically when both ids are unsigned integers, lexicographically
/// otherwise, with numeric ids sorting first.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TopicId(pub String);

impl TopicId {
    pub fn new(id: impl Into<String>) -> Self {
        TopicId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    fn numeric(&self) -> Option<u64> {
        if self.0.is_empty() || !self.0.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        self.0.parse().ok()
    }
}

impl Ord for TopicId {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self.numeric(), other.numeric()) {
            (Some(a), Some(b)) => a.cmp(&b).then_with(|| self.0.cmp(&other.0)),
            (Some(_), None) => Ordering::Less,
            (None, Some(_)) => Ordering::Greater,
            (None, None) => self.0.cmp(&other.0),
        }
    }
}

impl PartialOrd for TopicId {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for TopicId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for TopicId {
    fn from(s: &str) -> Self {
        TopicId(s.to_string())
    }
}

impl From<u32> for TopicId {
    fn from(n: u32) -> Self {
        TopicId(n.to_string())
    }
}

/// Splits a tab-separated record, trimming a trailing carriage return.
pub(crate) fn tab_fields(line: &str) -> Vec<&str> {
    line.trim_end_matches('\r').split('\t').collect()
}

/// Formats a real so that parsing it back yields the same bits.
pub(crate) fn fmt_real(x: f64) -> String {
    if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x}")
    }
}
