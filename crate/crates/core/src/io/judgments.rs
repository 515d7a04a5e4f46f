use std::collections::{BTreeMap, HashMap, HashSet};
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::{fmt_real, tab_fields, TopicId};
use crate::error::{Error, Result};

/// A rank range of the assessment pool sampled at a single rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stratum {
    pub id: u32,
    pub rank_lo: u32,
    pub rank_hi: u32,
    pub rate: f64,
}

impl Stratum {
    pub fn contains_rank(&self, rank: u32) -> bool {
        (self.rank_lo..=self.rank_hi).contains(&rank)
    }
}

/// Strata ordered by rank range. Ranges are disjoint and ascending; rates lie in (0, 1].
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StrataTable {
    strata: Vec<Stratum>,
}

impl StrataTable {
    pub fn new(mut strata: Vec<Stratum>) -> Result<Self> {
        strata.sort_by_key(|s| s.rank_lo);
        let mut ids = HashSet::new();
        for (i, s) in strata.iter().enumerate() {
            if !ids.insert(s.id) {
                return Err(Error::invalid(format!("duplicate stratum id {}", s.id)));
            }
            if s.rank_lo < 1 || s.rank_lo > s.rank_hi {
                return Err(Error::invalid(format!(
                    "stratum {}: invalid rank range {}..{}",
                    s.id, s.rank_lo, s.rank_hi
                )));
            }
            if !(s.rate > 0.0 && s.rate <= 1.0) {
                return Err(Error::invalid(format!(
                    "stratum {}: sampling rate {} outside (0,1]",
                    s.id, s.rate
                )));
            }
            if i > 0 && strata[i - 1].rank_hi >= s.rank_lo {
                return Err(Error::invalid(format!(
                    "stratum {} overlaps stratum {}",
                    s.id,
                    strata[i - 1].id
                )));
            }
        }
        Ok(StrataTable { strata })
    }

    /// The usual two-stratum plan: everything at ranks 1..=300, 25% of 301..=1000.
    pub fn two_stratum_default() -> Self {
        StrataTable::new(vec![
            Stratum { id: 1, rank_lo: 1, rank_hi: 300, rate: 1.0 },
            Stratum { id: 2, rank_lo: 301, rank_hi: 1000, rate: 0.25 },
        ])
        .expect("default strata are valid")
    }

    pub fn iter(&self) -> impl Iterator<Item = &Stratum> {
        self.strata.iter()
    }

    pub fn len(&self) -> usize {
        self.strata.len()
    }

    pub fn is_empty(&self) -> bool {
        self.strata.is_empty()
    }

    pub fn get(&self, id: u32) -> Option<&Stratum> {
        self.strata.iter().find(|s| s.id == id)
    }

    pub fn rate(&self, id: u32) -> Option<f64> {
        self.get(id).map(|s| s.rate)
    }

    pub fn stratum_for_rank(&self, rank: u32) -> Option<&Stratum> {
        self.strata.iter().find(|s| s.contains_rank(rank))
    }

    /// Rates keyed by stratum id.
    pub fn rates(&self) -> BTreeMap<u32, f64> {
        self.strata.iter().map(|s| (s.id, s.rate)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Judgment {
    pub item: String,
    pub stratum: u32,
    pub relevant: bool,
}

/// Per-topic relevance labels with the sampling plan they were drawn under.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct JudgmentSet {
    /// Judgments of each topic, sorted by item id.
    pub topics: BTreeMap<TopicId, Vec<Judgment>>,
    pub strata: StrataTable,
}

impl JudgmentSet {
    pub fn topic(&self, topic: &TopicId) -> &[Judgment] {
        self.topics.get(topic).map(Vec::as_slice).unwrap_or(&[])
    }

    /// item -> (stratum, relevant) for one topic.
    pub fn labels(&self, topic: &TopicId) -> HashMap<&str, (u32, bool)> {
        self.topic(topic)
            .iter()
            .map(|j| (j.item.as_str(), (j.stratum, j.relevant)))
            .collect()
    }

    pub fn relevant_items(&self, topic: &TopicId) -> HashSet<&str> {
        self.topic(topic).iter().filter(|j| j.relevant).map(|j| j.item.as_str()).collect()
    }

    pub fn num_relevant(&self, topic: &TopicId) -> usize {
        self.topic(topic).iter().filter(|j| j.relevant).count()
    }
}

/// Parses `stratum_id<TAB>rank_lo<TAB>rank_hi<TAB>sampling_rate` lines.
pub fn parse_strata<R: BufRead>(reader: R) -> Result<StrataTable> {
    let mut strata = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line?;
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let f = tab_fields(&line);
        if f.len() != 4 {
            return Err(Error::parse(lineno, format!("expected 4 fields, found {}", f.len())));
        }
        let num = |s: &str, what: &str| -> Result<u32> {
            s.trim().parse().map_err(|_| Error::parse(lineno, format!("bad {what} '{s}'")))
        };
        let rate: f64 = f[3]
            .trim()
            .parse()
            .map_err(|_| Error::parse(lineno, format!("bad sampling rate '{}'", f[3])))?;
        if !(rate > 0.0 && rate <= 1.0) {
            return Err(Error::parse(lineno, format!("sampling rate {rate} outside (0,1]")));
        }
        strata.push(Stratum {
            id: num(f[0], "stratum id")?,
            rank_lo: num(f[1], "rank_lo")?,
            rank_hi: num(f[2], "rank_hi")?,
            rate,
        });
    }
    StrataTable::new(strata)
}

/// Parses `topic<TAB>stratum<TAB>item<TAB>label` lines against a strata table.
pub fn parse_judgments<R: BufRead>(reader: R, strata: StrataTable) -> Result<JudgmentSet> {
    let mut topics: BTreeMap<TopicId, Vec<Judgment>> = BTreeMap::new();
    let mut seen: HashMap<(TopicId, String), usize> = HashMap::new();
    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line?;
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let f = tab_fields(&line);
        if f.len() != 4 {
            return Err(Error::parse(lineno, format!("expected 4 fields, found {}", f.len())));
        }
        let topic = TopicId::new(f[0].trim());
        let stratum: u32 = f[1]
            .trim()
            .parse()
            .map_err(|_| Error::parse(lineno, format!("bad stratum id '{}'", f[1])))?;
        if strata.get(stratum).is_none() {
            return Err(Error::parse(lineno, format!("unknown stratum id {stratum}")));
        }
        let item = f[2].trim().to_string();
        let relevant = match f[3].trim() {
            "0" => false,
            "1" => true,
            other => return Err(Error::parse(lineno, format!("label must be 0 or 1, got '{other}'"))),
        };
        if let Some(first) = seen.insert((topic.clone(), item.clone()), lineno) {
            return Err(Error::parse(
                lineno,
                format!("duplicate judgment for topic {topic} item {item} (first on line {first})"),
            ));
        }
        topics.entry(topic).or_default().push(Judgment { item, stratum, relevant });
    }
    for list in topics.values_mut() {
        list.sort_by(|a, b| a.item.cmp(&b.item));
    }
    Ok(JudgmentSet { topics, strata })
}

pub fn write_strata<W: Write>(strata: &StrataTable, mut out: W) -> Result<()> {
    for s in strata.iter() {
        writeln!(out, "{}\t{}\t{}\t{}", s.id, s.rank_lo, s.rank_hi, fmt_real(s.rate))?;
    }
    Ok(())
}

pub fn write_judgments<W: Write>(judgments: &JudgmentSet, mut out: W) -> Result<()> {
    for (topic, list) in &judgments.topics {
        for j in list {
            writeln!(out, "{topic}\t{}\t{}\t{}", j.stratum, j.item, u8::from(j.relevant))?;
        }
    }
    Ok(())
}
