use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{JudgmentSet, RankedRun, DEFAULT_RANK_LIMIT};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Finding {
    pub severity: Severity,
    pub message: String,
}

impl fmt::Display for Finding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{tag}: {}", self.message)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub findings: Vec<Finding>,
}

impl ValidationReport {
    pub fn errors(&self) -> impl Iterator<Item = &Finding> {
        self.findings.iter().filter(|f| f.severity == Severity::Error)
    }

    pub fn warnings(&self) -> impl Iterator<Item = &Finding> {
        self.findings.iter().filter(|f| f.severity == Severity::Warning)
    }

    pub fn is_ok(&self) -> bool {
        self.errors().next().is_none()
    }
}

/// Checks a run against its structural invariants and, when judgments are
/// given, against the evaluated topic list. Findings come errors first, then
/// warnings, each group in topic order.
pub fn validate_run(run: &RankedRun, judgments: Option<&JudgmentSet>) -> ValidationReport {
    let mut errors = Vec::new();
    let mut warnings = Vec::new();

    if let Some(j) = judgments {
        for topic in j.topics.keys() {
            if !run.entries.contains_key(topic) {
                warnings.push(format!("missing topic {topic}"));
            }
        }
    }

    for (topic, list) in &run.entries {
        if list.len() > DEFAULT_RANK_LIMIT as usize {
            errors.push(format!("topic {topic}: {} entries exceed rank limit {DEFAULT_RANK_LIMIT}", list.len()));
        }
        let mut items = HashSet::new();
        for (i, e) in list.iter().enumerate() {
            if e.rank != i as u32 + 1 {
                errors.push(format!("topic {topic}: expected rank {} but found {}", i + 1, e.rank));
                break;
            }
        }
        for e in list {
            if !items.insert(e.item.as_str()) {
                errors.push(format!("topic {topic}: duplicate item {}", e.item));
            }
        }
        if let Some(w) = list.windows(2).find(|w| w[1].score > w[0].score) {
            warnings.push(format!(
                "topic {topic}: score increases from rank {} to rank {}; rank order kept as authoritative",
                w[0].rank, w[1].rank
            ));
        }
    }

    let findings = errors
        .into_iter()
        .map(|message| Finding { severity: Severity::Error, message })
        .chain(warnings.into_iter().map(|message| Finding { severity: Severity::Warning, message }))
        .collect();
    ValidationReport { findings }
}

/// Orders every topic's entries by rank. Stable, so equal ranks keep input
/// order; applying it twice changes nothing.
pub fn canonicalize(run: &mut RankedRun) {
    for list in run.entries.values_mut() {
        list.sort_by_key(|e| e.rank);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::{RankedEntry, StrataTable, Task, TopicId};
    use std::collections::BTreeMap;

    fn judgments_for(topics: impl IntoIterator<Item = u32>) -> JudgmentSet {
        JudgmentSet {
            topics: topics.into_iter().map(|t| (TopicId::from(t), vec![])).collect(),
            strata: StrataTable::two_stratum_default(),
        }
    }

    fn run_for(topics: impl IntoIterator<Item = u32>) -> RankedRun {
        RankedRun::from_lists("r", Task::Avs, topics.into_iter().map(|t| (TopicId::from(t), vec!["a", "b"])))
    }

    #[test]
    fn all_topics_covered() {
        let report = validate_run(&run_for(1701..=1730), Some(&judgments_for(1701..=1730)));
        assert!(report.findings.is_empty());
    }

    #[test]
    fn missing_topic_warning() {
        let report = validate_run(&run_for(1701..=1729), Some(&judgments_for(1701..=1730)));
        assert!(report.is_ok());
        let msgs: Vec<_> = report.warnings().map(|f| f.message.as_str()).collect();
        assert_eq!(msgs, ["missing topic 1730"]);
    }

    #[test]
    fn increasing_scores_warn_and_resort_is_stable() {
        // Scores ascending with rank, generated rather than hand written.
        let entries: Vec<RankedEntry> = (1..=20u32)
            .map(|r| RankedEntry { item: format!("i{r}"), rank: r, score: r as f64 * 0.5 })
            .collect();
        let mut run = RankedRun::new("r", Task::Avs);
        run.entries = BTreeMap::from([(TopicId::from(1u32), entries)]);
        let report = validate_run(&run, None);
        assert_eq!(report.warnings().count(), 1);
        assert!(report.findings[0].message.contains("rank order kept"));

        let before = run.clone();
        canonicalize(&mut run);
        assert_eq!(run, before);
        canonicalize(&mut run);
        assert_eq!(run, before);
    }

    #[test]
    fn structural_errors_reported() {
        let mut run = run_for([1]);
        run.entries.get_mut(&TopicId::from(1u32)).unwrap()[1].item = "a".into();
        let report = validate_run(&run, None);
        assert!(!report.is_ok());
        assert!(report.findings[0].message.contains("duplicate item a"));
    }
}
