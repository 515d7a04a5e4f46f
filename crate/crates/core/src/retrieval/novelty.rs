use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::{JudgmentSet, RankedRun, TopicId};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoveltyMode {
    /// Sum weights only over relevant items no other run retrieved.
    #[default]
    UniqueOnly,
    /// Sum `1 - N/M` over every relevant item the run retrieved.
    AllWeighted,
}

/// Per (topic, item) retrieval counts over a consideration set of `M` runs.
/// The weight of an item is `1 - N/M` where `N` runs retrieved it.
#[derive(Debug, Clone)]
pub struct NoveltyWeights {
    total_runs: usize,
    run_tags: HashSet<String>,
    counts: HashMap<TopicId, HashMap<String, usize>>,
}

impl NoveltyWeights {
    pub fn new(runs: &[RankedRun]) -> Self {
        let mut counts: HashMap<TopicId, HashMap<String, usize>> = HashMap::new();
        for run in runs {
            for (topic, list) in &run.entries {
                let per_topic = counts.entry(topic.clone()).or_default();
                // An item appears once per run, so each run adds at most 1.
                for e in list {
                    *per_topic.entry(e.item.clone()).or_insert(0) += 1;
                }
            }
        }
        let run_tags = runs.iter().map(|r| r.run_tag.clone()).collect();
        NoveltyWeights { total_runs: runs.len(), run_tags, counts }
    }

    pub fn total_runs(&self) -> usize {
        self.total_runs
    }

    pub fn times_retrieved(&self, topic: &TopicId, item: &str) -> usize {
        self.counts.get(topic).and_then(|m| m.get(item)).copied().unwrap_or(0)
    }

    pub fn weight(&self, topic: &TopicId, item: &str) -> f64 {
        1.0 - self.times_retrieved(topic, item) as f64 / self.total_runs as f64
    }

    /// Novelty of a member run. Lets callers scoring many runs against the
    /// same consideration set count retrievals once.
    pub fn score(&self, run: &RankedRun, judgments: &JudgmentSet, mode: NoveltyMode) -> Result<NoveltyScore> {
        novelty_with_weights(run, self, judgments, mode, self.run_tags.contains(&run.run_tag))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicNovelty {
    /// Sum of weights for the topic.
    pub raw: f64,
    /// `raw` divided by the best achievable sum, `(1 - 1/M) * R`.
    pub normalized: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoveltyScore {
    pub run_tag: String,
    pub mode: NoveltyMode,
    pub raw_mean: f64,
    pub normalized_mean: f64,
    pub per_topic: BTreeMap<TopicId, TopicNovelty>,
}

/// Novelty of `run` against the consideration set `all_runs` (which must
/// contain it), averaged over the judged topics. Rank order inside runs is
/// irrelevant: only membership enters the weights.
pub fn novelty_score(
    run: &RankedRun,
    all_runs: &[RankedRun],
    judgments: &JudgmentSet,
    mode: NoveltyMode,
) -> Result<NoveltyScore> {
    NoveltyWeights::new(all_runs).score(run, judgments, mode)
}

pub(crate) fn novelty_with_weights(
    run: &RankedRun,
    weights: &NoveltyWeights,
    judgments: &JudgmentSet,
    mode: NoveltyMode,
    in_set: bool,
) -> Result<NoveltyScore> {
    let m = weights.total_runs();
    if m < 2 {
        return Err(Error::invalid(format!("novelty needs at least 2 runs in the consideration set, got {m}")));
    }
    if !in_set {
        return Err(Error::invalid(format!("run {} is not in the consideration set", run.run_tag)));
    }
    if judgments.topics.is_empty() {
        return Err(Error::invalid("novelty needs at least one judged topic"));
    }
    let unique_weight = 1.0 - 1.0 / m as f64;
    let mut per_topic = BTreeMap::new();
    for topic in judgments.topics.keys() {
        let relevant = judgments.relevant_items(topic);
        // Rank order keeps the summation order, and so the bits, stable.
        let mut seen = HashSet::new();
        let raw: f64 = run
            .ranked_items(topic)
            .into_iter()
            .filter(|item| seen.insert(*item) && relevant.contains(*item))
            .map(|item| match mode {
                NoveltyMode::UniqueOnly if weights.times_retrieved(topic, item) == 1 => unique_weight,
                NoveltyMode::UniqueOnly => 0.0,
                NoveltyMode::AllWeighted => weights.weight(topic, item),
            })
            .sum();
        let best = unique_weight * relevant.len() as f64;
        let normalized = if best > 0.0 { raw / best } else { 0.0 };
        per_topic.insert(topic.clone(), TopicNovelty { raw, normalized });
    }
    let n = per_topic.len() as f64;
    Ok(NoveltyScore {
        run_tag: run.run_tag.clone(),
        mode,
        raw_mean: per_topic.values().map(|t| t.raw).sum::<f64>() / n,
        normalized_mean: per_topic.values().map(|t| t.normalized).sum::<f64>() / n,
        per_topic,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::{Judgment, StrataTable, Task};

    fn run(tag: &str, items: &[&str]) -> RankedRun {
        RankedRun::from_lists(tag, Task::Avs, [(TopicId::from(1u32), items.to_vec())])
    }

    fn qrels(rel: &[&str]) -> JudgmentSet {
        let list = rel.iter().map(|i| Judgment { item: i.to_string(), stratum: 1, relevant: true }).collect();
        JudgmentSet { topics: BTreeMap::from([(TopicId::from(1u32), list)]), strata: StrataTable::two_stratum_default() }
    }

    #[test]
    fn item_in_every_run_weighs_zero() {
        let runs = [run("a", &["x"]), run("b", &["x"]), run("c", &["x"])];
        let w = NoveltyWeights::new(&runs);
        assert_eq!(w.weight(&TopicId::from(1u32), "x"), 0.0);
        for mode in [NoveltyMode::UniqueOnly, NoveltyMode::AllWeighted] {
            assert_eq!(novelty_score(&runs[0], &runs, &qrels(&["x"]), mode).unwrap().raw_mean, 0.0);
        }
    }

    #[test]
    fn unique_item_among_33_runs() {
        let mut runs = vec![run("r0", &["u"])];
        runs.extend((1..33).map(|i| run(&format!("r{i}"), &["common"])));
        let s = novelty_score(&runs[0], &runs, &qrels(&["u"]), NoveltyMode::UniqueOnly).unwrap();
        assert!((s.raw_mean - (1.0 - 1.0 / 33.0)).abs() < 1e-15);
        assert!((s.raw_mean - 0.9697).abs() < 1e-4);
        assert_eq!(s.normalized_mean, 1.0);
    }

    #[test]
    fn needs_two_runs_and_membership() {
        let a = run("a", &["x"]);
        assert!(novelty_score(&a, std::slice::from_ref(&a), &qrels(&["x"]), NoveltyMode::UniqueOnly).is_err());
        let b = run("b", &["x"]);
        let c = run("c", &["x"]);
        assert!(novelty_score(&a, &[b, c], &qrels(&["x"]), NoveltyMode::UniqueOnly).is_err());
    }

    #[test]
    fn rank_order_does_not_matter() {
        let a = run("a", &["p", "q", "r"]);
        let a_rev = run("a", &["r", "q", "p"]);
        let b = run("b", &["q"]);
        let j = qrels(&["p", "q", "r"]);
        for mode in [NoveltyMode::UniqueOnly, NoveltyMode::AllWeighted] {
            let s1 = novelty_score(&a, &[a.clone(), b.clone()], &j, mode).unwrap();
            let s2 = novelty_score(&a_rev, &[a_rev.clone(), b.clone()], &j, mode).unwrap();
            assert_eq!(s1.raw_mean, s2.raw_mean);
        }
    }

    #[test]
    fn three_run_fixture_vs_enumeration() {
        let items = ["i0", "i1", "i2", "i3", "i4", "i5", "i6"];
        // Item i is retrieved by the runs whose bit is set in (i+1).
        let lists: Vec<Vec<&str>> = (0..3)
            .map(|r| items.iter().enumerate().filter(|(i, _)| (i + 1) & (1 << r) != 0).map(|(_, s)| *s).collect())
            .collect();
        let runs: Vec<RankedRun> = lists.iter().enumerate().map(|(r, l)| run(&format!("r{r}"), l)).collect();
        let relevant = ["i0", "i2", "i3", "i6"];
        let j = qrels(&relevant);
        for (r, target) in runs.iter().enumerate() {
            let mut unique = 0.0;
            let mut weighted = 0.0;
            for (i, item) in items.iter().enumerate() {
                let mask = i + 1;
                if mask & (1 << r) == 0 || !relevant.contains(item) {
                    continue;
                }
                let n = (mask as u32).count_ones() as f64;
                weighted += 1.0 - n / 3.0;
                if n == 1.0 {
                    unique += 1.0 - 1.0 / 3.0;
                }
            }
            let got = novelty_score(target, &runs, &j, NoveltyMode::UniqueOnly).unwrap();
            assert!((got.raw_mean - unique).abs() < 1e-15);
            let got = novelty_score(target, &runs, &j, NoveltyMode::AllWeighted).unwrap();
            assert!((got.raw_mean - weighted).abs() < 1e-15);
            assert!((0.0..=1.0).contains(&got.normalized_mean));
        }
    }
}
