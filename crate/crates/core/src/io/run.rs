use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{fmt_real, tab_fields, TopicId};
use crate::error::{Error, Result};

/// Maximum number of ranked items accepted per topic unless overridden.
pub const DEFAULT_RANK_LIMIT: u32 = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Task {
    #[serde(rename = "AVS")]
    Avs,
    #[serde(rename = "DSDI")]
    Dsdi,
}

impl FromStr for Task {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "AVS" => Ok(Task::Avs),
            "DSDI" => Ok(Task::Dsdi),
            _ => Err(Error::invalid(format!("unknown task '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RunKind {
    #[default]
    Common,
    Novelty,
}

impl FromStr for RunKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "common" => Ok(RunKind::Common),
            "novelty" => Ok(RunKind::Novelty),
            _ => Err(Error::invalid(format!("unknown run kind '{s}'"))),
        }
    }
}

impl fmt::Display for RunKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RunKind::Common => "common",
            RunKind::Novelty => "novelty",
        })
    }
}

/// Declared training-data category of a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TrainingType {
    A,
    D,
    E,
    F,
    L,
    N,
    O,
}

impl FromStr for TrainingType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "A" => TrainingType::A,
            "D" => TrainingType::D,
            "E" => TrainingType::E,
            "F" => TrainingType::F,
            "L" => TrainingType::L,
            "N" => TrainingType::N,
            "O" => TrainingType::O,
            _ => return Err(Error::invalid(format!("unknown training type '{s}'"))),
        })
    }
}

impl fmt::Display for TrainingType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedEntry {
    pub item: String,
    pub rank: u32,
    pub score: f64,
}

/// One system's ranked lists for every topic it answered.
///
/// Entries of a topic are stored in rank order `1..=n` without gaps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedRun {
    pub run_tag: String,
    pub task: Task,
    pub run_kind: RunKind,
    pub training_type: Option<TrainingType>,
    pub entries: BTreeMap<TopicId, Vec<RankedEntry>>,
    pub processing_time: BTreeMap<TopicId, f64>,
}

impl RankedRun {
    pub fn new(run_tag: impl Into<String>, task: Task) -> Self {
        RankedRun {
            run_tag: run_tag.into(),
            task,
            run_kind: RunKind::Common,
            training_type: None,
            entries: BTreeMap::new(),
            processing_time: BTreeMap::new(),
        }
    }

    /// Builds a run from ranked item lists, assigning ranks 1..n and
    /// strictly decreasing scores.
    pub fn from_lists<I, S>(run_tag: impl Into<String>, task: Task, lists: I) -> Self
    where
        I: IntoIterator<Item = (TopicId, Vec<S>)>,
        S: Into<String>,
    {
        let mut run = RankedRun::new(run_tag, task);
        for (topic, items) in lists {
            let n = items.len();
            let entries = items
                .into_iter()
                .enumerate()
                .map(|(i, item)| RankedEntry {
                    item: item.into(),
                    rank: i as u32 + 1,
                    score: (n - i) as f64,
                })
                .collect();
            run.entries.insert(topic, entries);
        }
        run
    }

    /// Item ids of a topic in rank order (empty if the topic is absent).
    pub fn ranked_items(&self, topic: &TopicId) -> Vec<&str> {
        self.entries
            .get(topic)
            .map(|es| es.iter().map(|e| e.item.as_str()).collect())
            .unwrap_or_default()
    }

    pub fn topics(&self) -> impl Iterator<Item = &TopicId> {
        self.entries.keys()
    }

    pub fn num_entries(&self) -> usize {
        self.entries.values().map(Vec::len).sum()
    }
}

/// Options for [`parse_retrieval_run`].
#[derive(Debug, Clone)]
pub struct RunParseOptions {
    pub task: Task,
    pub rank_limit: u32,
    /// When set, topics outside this list are rejected.
    pub topics: Option<BTreeSet<TopicId>>,
}

impl RunParseOptions {
    pub fn new(task: Task) -> Self {
        RunParseOptions { task, rank_limit: DEFAULT_RANK_LIMIT, topics: None }
    }

    pub fn with_rank_limit(mut self, rank_limit: u32) -> Self {
        self.rank_limit = rank_limit;
        self
    }

    pub fn with_topics(mut self, topics: impl IntoIterator<Item = TopicId>) -> Self {
        self.topics = Some(topics.into_iter().collect());
        self
    }
}

/// Parses a run file: `topic<TAB>item<TAB>rank<TAB>score<TAB>run_tag` lines
/// preceded by optional `#meta key=value` headers.
pub fn parse_retrieval_run<R: BufRead>(reader: R, options: &RunParseOptions) -> Result<RankedRun> {
    let mut run_tag: Option<String> = None;
    let mut run_kind = RunKind::Common;
    let mut training_type = None;
    let mut processing_time = BTreeMap::new();
    // topic -> (rank -> entry), plus item -> line for duplicate reporting
    let mut by_topic: BTreeMap<TopicId, BTreeMap<u32, RankedEntry>> = BTreeMap::new();
    let mut seen_items: HashMap<(TopicId, String), usize> = HashMap::new();

    let set_tag = |tag: &str, line: usize, run_tag: &mut Option<String>| -> Result<()> {
        match run_tag {
            Some(existing) if existing != tag => Err(Error::parse(
                line,
                format!("run tag '{tag}' differs from '{existing}'"),
            )),
            Some(_) => Ok(()),
            None => {
                *run_tag = Some(tag.to_string());
                Ok(())
            }
        }
    };

    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line?;
        let trimmed = line.trim_end_matches('\r');
        if trimmed.trim().is_empty() {
            continue;
        }
        if let Some(meta) = trimmed.strip_prefix("#meta ") {
            let (key, value) = meta
                .split_once('=')
                .ok_or_else(|| Error::parse(lineno, "meta header must be key=value"))?;
            let value = value.trim();
            match key.trim() {
                "run_tag" => set_tag(value, lineno, &mut run_tag)?,
                "run_kind" => {
                    run_kind = value.parse().map_err(|e: Error| Error::parse(lineno, e.to_string()))?
                }
                "training_type" => {
                    training_type =
                        Some(value.parse().map_err(|e: Error| Error::parse(lineno, e.to_string()))?)
                }
                "processing_time" => {
                    let (topic, secs) = value.split_once(':').ok_or_else(|| {
                        Error::parse(lineno, "processing_time must be topic:seconds")
                    })?;
                    let secs: f64 = secs
                        .trim()
                        .parse()
                        .map_err(|_| Error::parse(lineno, format!("bad processing time '{secs}'")))?;
                    if !secs.is_finite() || secs < 0.0 {
                        return Err(Error::parse(lineno, "processing time must be nonnegative"));
                    }
                    processing_time.insert(TopicId::new(topic.trim()), secs);
                }
                // Unknown keys are tolerated so newer writers stay readable.
                _ => {}
            }
            continue;
        }
        if trimmed.starts_with('#') {
            continue;
        }

        let fields = tab_fields(trimmed);
        if fields.len() != 5 {
            return Err(Error::parse(
                lineno,
                format!("expected 5 tab-separated fields, found {}", fields.len()),
            ));
        }
        let topic = TopicId::new(fields[0].trim());
        let item = fields[1].trim();
        if topic.as_str().is_empty() || item.is_empty() {
            return Err(Error::parse(lineno, "empty topic or item id"));
        }
        let rank: i64 = fields[2]
            .trim()
            .parse()
            .map_err(|_| Error::parse(lineno, format!("bad rank '{}'", fields[2])))?;
        if rank < 1 {
            return Err(Error::parse(lineno, "rank must be ≥ 1"));
        }
        if rank > options.rank_limit as i64 {
            return Err(Error::parse(
                lineno,
                format!("topic {topic}: rank {rank} exceeds rank limit {}", options.rank_limit),
            ));
        }
        let rank = rank as u32;
        let score: f64 = fields[3]
            .trim()
            .parse()
            .map_err(|_| Error::parse(lineno, format!("bad score '{}'", fields[3])))?;
        if !score.is_finite() {
            return Err(Error::parse(lineno, "score must be finite"));
        }
        set_tag(fields[4].trim(), lineno, &mut run_tag)?;

        if let Some(allowed) = &options.topics {
            if !allowed.contains(&topic) {
                return Err(Error::parse(lineno, format!("unknown topic id {topic}")));
            }
        }
        if let Some(first) = seen_items.insert((topic.clone(), item.to_string()), lineno) {
            return Err(Error::parse(
                lineno,
                format!("duplicate item {item} for topic {topic} (first on line {first})"),
            ));
        }
        let ranks = by_topic.entry(topic.clone()).or_default();
        if ranks.len() as u32 >= options.rank_limit {
            return Err(Error::parse(
                lineno,
                format!("topic {topic} has more than {} entries (rank limit)", options.rank_limit),
            ));
        }
        if ranks.insert(rank, RankedEntry { item: item.to_string(), rank, score }).is_some() {
            return Err(Error::parse(lineno, format!("duplicate rank {rank} for topic {topic}")));
        }
    }

    let mut entries = BTreeMap::new();
    for (topic, ranks) in by_topic {
        let n = ranks.len() as u32;
        if let Some((&last, _)) = ranks.last_key_value() {
            if last != n {
                let missing = (1..=n).find(|r| !ranks.contains_key(r)).unwrap_or(n);
                return Err(Error::invalid(format!("topic {topic}: rank gap, rank {missing} missing")));
            }
        }
        entries.insert(topic, ranks.into_values().collect());
    }

    let run_tag = run_tag.ok_or_else(|| Error::invalid("run has no run tag"))?;
    Ok(RankedRun {
        run_tag,
        task: options.task,
        run_kind,
        training_type,
        entries,
        processing_time,
    })
}

/// Writes the canonical form of a run.
pub fn write_retrieval_run<W: Write>(run: &RankedRun, mut out: W) -> Result<()> {
    writeln!(out, "#meta run_tag={}", run.run_tag)?;
    writeln!(out, "#meta run_kind={}", run.run_kind)?;
    if let Some(tt) = run.training_type {
        writeln!(out, "#meta training_type={tt}")?;
    }
    for (topic, secs) in &run.processing_time {
        writeln!(out, "#meta processing_time={topic}:{}", fmt_real(*secs))?;
    }
    for (topic, list) in &run.entries {
        for e in list {
            writeln!(out, "{topic}\t{}\t{}\t{}\t{}", e.item, e.rank, fmt_real(e.score), run.run_tag)?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<RankedRun> {
        parse_retrieval_run(text.as_bytes(), &RunParseOptions::new(Task::Avs))
    }

    #[test]
    fn three_lines_one_topic() {
        let run = parse("1701\ta\t1\t0.9\tr1\n1701\tb\t2\t0.8\tr1\n1701\tc\t3\t0.7\tr1\n").unwrap();
        assert_eq!(run.entries.len(), 1);
        assert_eq!(run.ranked_items(&"1701".into()), ["a", "b", "c"]);
        assert_eq!(run.run_tag, "r1");
    }

    #[test]
    fn entries_sorted_by_rank() {
        let run = parse("1\tb\t2\t0.5\tr\n1\ta\t1\t0.9\tr\n").unwrap();
        assert_eq!(run.ranked_items(&"1".into()), ["a", "b"]);
    }

    #[test]
    fn rank_zero_rejected() {
        let err = parse("1701\ta\t0\t0.9\tr1\n").unwrap_err();
        assert!(err.to_string().contains("rank must be ≥ 1"), "{err}");
        assert!(err.to_string().starts_with("line 1"));
    }

    #[test]
    fn over_limit_names_topic_and_limit() {
        let mut text = String::new();
        for r in 1..=1001 {
            text.push_str(&format!("1701\ti{r}\t{r}\t{}\tr\n", 2000 - r));
        }
        let err = parse(&text).unwrap_err().to_string();
        assert!(err.contains("1701") && err.contains("1000"), "{err}");
    }

    #[test]
    fn duplicate_item_and_rank_gap() {
        let err = parse("1\ta\t1\t1\tr\n1\ta\t2\t1\tr\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
        let err = parse("1\ta\t1\t1\tr\n1\tb\t3\t1\tr\n").unwrap_err();
        assert!(err.to_string().contains("rank 2 missing"), "{err}");
        let err = parse("1\ta\t1\t1\tr\n1\tb\t1\t1\tr\n").unwrap_err();
        assert!(err.to_string().contains("duplicate rank"));
    }

    #[test]
    fn malformed_line_reports_line_number() {
        let err = parse("#meta run_kind=common\n1\ta\t1\t1\tr\n1\tb\t2\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
        let err = parse("1\ta\tone\t1\tr\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
    }

    #[test]
    fn unknown_topic_rejected_with_topic_list() {
        let opts = RunParseOptions::new(Task::Avs).with_topics(["1701".into()]);
        let err = parse_retrieval_run("1702\ta\t1\t1\tr\n".as_bytes(), &opts).unwrap_err();
        assert!(err.to_string().contains("unknown topic id 1702"));
    }

    #[test]
    fn meta_headers() {
        let run = parse(
            "#meta run_kind=novelty\n#meta training_type=F\n#meta processing_time=1701:12.5\n1701\ta\t1\t1\tx\n",
        )
        .unwrap();
        assert_eq!(run.run_kind, RunKind::Novelty);
        assert_eq!(run.training_type, Some(TrainingType::F));
        assert_eq!(run.processing_time[&TopicId::from("1701")], 12.5);
        assert!(parse("#meta training_type=Z\n").is_err());
    }

    #[test]
    fn mixed_run_tags_rejected() {
        assert!(parse("1\ta\t1\t1\tr1\n1\tb\t2\t1\tr2\n").is_err());
    }

    #[test]
    fn canonical_form_is_fixed_point() {
        let text = "# comment\n1702\tz\t1\t3\tr\n1701\tb\t2\t0.25\tr\n1701\ta\t1\t1e-3\tr\n#meta processing_time=1701:3\n";
        let run = parse(text).unwrap();
        let mut first = Vec::new();
        write_retrieval_run(&run, &mut first).unwrap();
        let reparsed = parse(std::str::from_utf8(&first).unwrap()).unwrap();
        assert_eq!(reparsed, run);
        let mut second = Vec::new();
        write_retrieval_run(&reparsed, &mut second).unwrap();
        assert_eq!(first, second);
    }
}
