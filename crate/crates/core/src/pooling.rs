//! Stratified assessment pools.
//!
//! For every topic the union of submitted items is split into strata by the
//! best rank at which any run submitted the item. The first stratum (ranks
//! 1..=300 in the default plan) is pooled in full; deeper strata are pooled by
//! independent per-item Bernoulli draws at the stratum's rate. The draw for an
//! item is a hash of `(seed, topic, item)`, so membership does not depend on
//! the order runs are supplied in.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::io::{JudgmentSet, RankedRun, Stratum, StrataTable, TopicId};
use crate::round::percent_half_up;

pub const DEFAULT_CHUNK_SIZE: usize = 1000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoolSpec {
    pub strata: StrataTable,
    pub chunk_size: usize,
    pub seed: u64,
}

impl PoolSpec {
    pub fn new(strata: StrataTable, seed: u64) -> Self {
        PoolSpec { strata, chunk_size: DEFAULT_CHUNK_SIZE, seed }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PooledItem {
    pub item: String,
    pub stratum: u32,
}

/// Pool of one topic.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TopicPool {
    /// Pooled items ordered by stratum, then item id.
    pub items: Vec<PooledItem>,
    /// Dedup candidates per stratum before sampling.
    pub candidates: BTreeMap<u32, usize>,
}

impl TopicPool {
    pub fn pooled_in(&self, stratum: u32) -> impl Iterator<Item = &str> {
        self.items.iter().filter(move |p| p.stratum == stratum).map(|p| p.item.as_str())
    }
}

/// An assessor work unit: at most `chunk_size` items of one stratum.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PoolChunk {
    pub topic: TopicId,
    /// 1-based, counted per topic.
    pub index: usize,
    pub stratum: u32,
    pub items: Vec<String>,
}

impl PoolChunk {
    pub fn file_name(&self) -> String {
        format!("pool.{}.{}.txt", self.topic, self.index)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoolSet {
    pub spec: PoolSpec,
    pub topics: BTreeMap<TopicId, TopicPool>,
    pub chunks: Vec<PoolChunk>,
}

#[derive(Debug, Serialize)]
#[serde(rename_all = "camelCase")]
struct ManifestChunk<'a> {
    file: String,
    topic: &'a TopicId,
    stratum: u32,
    items: usize,
}

#[derive(Debug, Serialize)]
#[serde(rename_all = "camelCase")]
struct Manifest<'a> {
    sampling: &'static str,
    seed: u64,
    chunk_size: usize,
    strata: Vec<&'a Stratum>,
    chunks: Vec<ManifestChunk<'a>>,
    topics: BTreeMap<&'a TopicId, &'a BTreeMap<u32, usize>>,
}

impl PoolSet {
    /// Chunk files as `(file name, contents)`, one item id per line.
    pub fn chunk_files(&self) -> Vec<(String, String)> {
        self.chunks
            .iter()
            .map(|c| {
                let mut body = String::new();
                for item in &c.items {
                    body.push_str(item);
                    body.push('\n');
                }
                (c.file_name(), body)
            })
            .collect()
    }

    /// JSON manifest mapping chunk files to strata. Records the sampling
    /// scheme and seed so a pool can be rebuilt.
    pub fn manifest_json(&self) -> String {
        let manifest = Manifest {
            sampling: "bernoulli",
            seed: self.spec.seed,
            chunk_size: self.spec.chunk_size,
            strata: self.spec.strata.iter().collect(),
            chunks: self
                .chunks
                .iter()
                .map(|c| ManifestChunk {
                    file: c.file_name(),
                    topic: &c.topic,
                    stratum: c.stratum,
                    items: c.items.len(),
                })
                .collect(),
            topics: self.topics.iter().map(|(t, p)| (t, &p.candidates)).collect(),
        };
        let mut s = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
        s.push('\n');
        s
    }
}

/// Uniform draw in [0, 1) keyed by `(seed, topic, item)`.
pub fn inclusion_draw(seed: u64, topic: &TopicId, item: &str) -> f64 {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update(topic.as_str().as_bytes());
    h.update([0u8]);
    h.update(item.as_bytes());
    let digest = h.finalize();
    let mut word = [0u8; 8];
    word.copy_from_slice(&digest[..8]);
    (u64::from_le_bytes(word) >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Stratum of every submitted item: the first stratum whose rank range holds
/// any rank the item was submitted at. Items outside every range are absent.
pub fn stratum_membership(
    runs: &[RankedRun],
    strata: &StrataTable,
) -> BTreeMap<TopicId, HashMap<String, u32>> {
    let order: HashMap<u32, usize> = strata.iter().enumerate().map(|(i, s)| (s.id, i)).collect();
    let mut out: BTreeMap<TopicId, HashMap<String, u32>> = BTreeMap::new();
    for run in runs {
        for (topic, list) in &run.entries {
            let members = out.entry(topic.clone()).or_default();
            for e in list {
                let Some(s) = strata.stratum_for_rank(e.rank) else { continue };
                members
                    .entry(e.item.clone())
                    .and_modify(|cur| {
                        if order[&s.id] < order[cur] {
                            *cur = s.id;
                        }
                    })
                    .or_insert(s.id);
            }
        }
    }
    out
}

/// Builds the assessment pools for every topic any run answered.
pub fn build_pools(runs: &[RankedRun], spec: &PoolSpec) -> Result<PoolSet> {
    if runs.is_empty() {
        return Err(Error::invalid("cannot build pools from an empty run set"));
    }
    if spec.chunk_size == 0 {
        return Err(Error::invalid("chunk size must be positive"));
    }
    let membership = stratum_membership(runs, &spec.strata);
    let mut topics = BTreeMap::new();
    let mut chunks = Vec::new();

    for (topic, members) in membership {
        let mut by_stratum: BTreeMap<u32, Vec<&str>> =
            spec.strata.iter().map(|s| (s.id, Vec::new())).collect();
        for (item, s) in &members {
            by_stratum.get_mut(s).expect("known stratum").push(item);
        }
        let mut pool = TopicPool::default();
        let mut next_chunk = 1;
        for stratum in spec.strata.iter() {
            let mut candidates = std::mem::take(by_stratum.get_mut(&stratum.id).unwrap());
            candidates.sort_unstable();
            pool.candidates.insert(stratum.id, candidates.len());
            let pooled: Vec<&str> = candidates
                .into_iter()
                .filter(|item| stratum.rate >= 1.0 || inclusion_draw(spec.seed, &topic, item) < stratum.rate)
                .collect();
            for part in pooled.chunks(spec.chunk_size) {
                chunks.push(PoolChunk {
                    topic: topic.clone(),
                    index: next_chunk,
                    stratum: stratum.id,
                    items: part.iter().map(|s| s.to_string()).collect(),
                });
                next_chunk += 1;
            }
            pool.items
                .extend(pooled.into_iter().map(|item| PooledItem { item: item.to_string(), stratum: stratum.id }));
        }
        topics.insert(topic, pool);
    }
    Ok(PoolSet { spec: spec.clone(), topics, chunks })
}

/// One row of the pooling and judging statistics table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoolStatsRow {
    pub topic: TopicId,
    pub total_submitted: u64,
    pub unique_submitted: u64,
    pub pct_unique: f64,
    pub judged: u64,
    pub pct_unique_judged: f64,
    pub relevant: u64,
    pub pct_judged_relevant: f64,
}

impl PoolStatsRow {
    /// Percentages are 2-decimal half-up; zero denominators give 0.00.
    pub fn from_counts(topic: TopicId, total: u64, unique: u64, judged: u64, relevant: u64) -> Self {
        PoolStatsRow {
            topic,
            total_submitted: total,
            unique_submitted: unique,
            pct_unique: percent_half_up(unique, total),
            judged,
            pct_unique_judged: percent_half_up(judged, unique),
            relevant,
            pct_judged_relevant: percent_half_up(relevant, judged),
        }
    }
}

/// Per-topic pooling statistics. `judged` comes from the judgments when
/// given, otherwise from the pool size.
pub fn pool_stats(runs: &[RankedRun], pools: &PoolSet, judgments: Option<&JudgmentSet>) -> Vec<PoolStatsRow> {
    let mut topics: BTreeSet<&TopicId> = pools.topics.keys().collect();
    if let Some(j) = judgments {
        topics.extend(j.topics.keys());
    }
    topics
        .into_iter()
        .map(|topic| {
            let mut total = 0u64;
            let mut unique = BTreeSet::new();
            for run in runs {
                if let Some(list) = run.entries.get(topic) {
                    total += list.len() as u64;
                    unique.extend(list.iter().map(|e| e.item.as_str()));
                }
            }
            let (judged, relevant) = match judgments {
                Some(j) => (j.topic(topic).len() as u64, j.num_relevant(topic) as u64),
                None => (pools.topics.get(topic).map_or(0, |p| p.items.len() as u64), 0),
            };
            PoolStatsRow::from_counts(topic.clone(), total, unique.len() as u64, judged, relevant)
        })
        .collect()
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TopicUniqueness {
    pub unique_relevant: usize,
    pub shared_relevant: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct UniquenessReport {
    pub per_topic: BTreeMap<TopicId, TopicUniqueness>,
    /// Relevant items submitted by this team and no other, summed over topics.
    pub per_team: BTreeMap<String, usize>,
}

/// Counts relevant items found by exactly one team versus several. Runs
/// missing from `team_of` form a team of their own, named by run tag.
pub fn uniqueness_report(
    runs: &[RankedRun],
    judgments: &JudgmentSet,
    team_of: &HashMap<String, String>,
) -> UniquenessReport {
    let team = |run: &RankedRun| team_of.get(&run.run_tag).cloned().unwrap_or_else(|| run.run_tag.clone());
    let mut report = UniquenessReport::default();
    for run in runs {
        report.per_team.entry(team(run)).or_insert(0);
    }
    for topic in judgments.topics.keys() {
        let relevant = judgments.relevant_items(topic);
        let mut teams_of_item: BTreeMap<&str, BTreeSet<String>> = BTreeMap::new();
        for run in runs {
            let Some(list) = run.entries.get(topic) else { continue };
            for e in list.iter().filter(|e| relevant.contains(e.item.as_str())) {
                teams_of_item.entry(e.item.as_str()).or_default().insert(team(run));
            }
        }
        let mut row = TopicUniqueness::default();
        for teams in teams_of_item.values() {
            if teams.len() == 1 {
                row.unique_relevant += 1;
                *report.per_team.get_mut(teams.iter().next().unwrap()).unwrap() += 1;
            } else {
                row.shared_relevant += 1;
            }
        }
        report.per_topic.insert(topic.clone(), row);
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::{Judgment, Task};

    fn run(tag: &str, topic: u32, items: Vec<String>) -> RankedRun {
        RankedRun::from_lists(tag, Task::Avs, [(TopicId::from(topic), items)])
    }

    fn items(prefix: &str, n: usize) -> Vec<String> {
        (0..n).map(|i| format!("{prefix}{i:04}")).collect()
    }

    fn one_stratum(hi: u32, rate: f64) -> StrataTable {
        StrataTable::new(vec![Stratum { id: 1, rank_lo: 1, rank_hi: hi, rate }]).unwrap()
    }

    #[test]
    fn identical_runs_dedup() {
        let runs = [run("a", 1, items("s", 300)), run("b", 1, items("s", 300))];
        let pools = build_pools(&runs, &PoolSpec::new(one_stratum(300, 1.0), 7)).unwrap();
        assert_eq!(pools.topics[&TopicId::from(1u32)].items.len(), 300);
    }

    #[test]
    fn empty_run_set_rejected() {
        assert!(build_pools(&[], &PoolSpec::new(one_stratum(300, 1.0), 7)).is_err());
    }

    #[test]
    fn second_stratum_is_reproducible_and_in_support() {
        let runs = [run("a", 1, items("s", 1000))];
        let spec = PoolSpec::new(StrataTable::two_stratum_default(), 42);
        let p1 = build_pools(&runs, &spec).unwrap();
        let p2 = build_pools(&runs, &spec).unwrap();
        assert_eq!(p1, p2);
        let pool = &p1.topics[&TopicId::from(1u32)];
        assert_eq!(pool.pooled_in(1).count(), 300);
        let n2 = pool.pooled_in(2).count();
        assert!(n2 <= 700);
        assert_eq!(pool.candidates[&2], 700);
    }

    #[test]
    fn second_stratum_size_matches_binomial_over_seeds() {
        let runs = [run("a", 1, items("s", 1000))];
        let mut total = 0usize;
        let seeds = 1000;
        for seed in 0..seeds {
            let spec = PoolSpec::new(StrataTable::two_stratum_default(), seed);
            total += build_pools(&runs, &spec).unwrap().topics[&TopicId::from(1u32)].pooled_in(2).count();
        }
        let mean = total as f64 / seeds as f64;
        // Binomial(700, 0.25): sd of a single draw is sqrt(131.25); of the mean over 1000 seeds, /sqrt(1000).
        let sd_mean = (700.0f64 * 0.25 * 0.75).sqrt() / (seeds as f64).sqrt();
        assert!((mean - 175.0).abs() < 3.0 * sd_mean, "mean {mean}");
    }

    #[test]
    fn full_rates_pool_whole_union() {
        let strata = StrataTable::new(vec![
            Stratum { id: 1, rank_lo: 1, rank_hi: 3, rate: 1.0 },
            Stratum { id: 2, rank_lo: 4, rank_hi: 10, rate: 1.0 },
        ])
        .unwrap();
        let runs = [run("a", 1, items("x", 8)), run("b", 1, items("y", 5))];
        let pools = build_pools(&runs, &PoolSpec::new(strata, 1)).unwrap();
        assert_eq!(pools.topics[&TopicId::from(1u32)].items.len(), 13);
    }

    #[test]
    fn stratum_is_best_rank_across_runs() {
        let strata = StrataTable::new(vec![
            Stratum { id: 1, rank_lo: 1, rank_hi: 2, rate: 1.0 },
            Stratum { id: 2, rank_lo: 3, rank_hi: 4, rate: 1.0 },
        ])
        .unwrap();
        let a = run("a", 1, vec!["p".into(), "q".into(), "r".into(), "s".into()]);
        let b = run("b", 1, vec!["s".into(), "t".into(), "u".into(), "p".into()]);
        let m = stratum_membership(&[a, b], &strata);
        let t = &m[&TopicId::from(1u32)];
        assert_eq!((t["p"], t["s"], t["r"], t["u"]), (1, 1, 2, 2));
        assert!(!t.contains_key("zz"));
    }

    #[test]
    fn chunks_sorted_and_bounded() {
        let runs = [run("a", 5, items("z", 25))];
        let mut spec = PoolSpec::new(one_stratum(100, 1.0), 0);
        spec.chunk_size = 10;
        let pools = build_pools(&runs, &spec).unwrap();
        let sizes: Vec<usize> = pools.chunks.iter().map(|c| c.items.len()).collect();
        assert_eq!(sizes, [10, 10, 5]);
        for c in &pools.chunks {
            assert!(c.items.windows(2).all(|w| w[0] < w[1]));
        }
        let files = pools.chunk_files();
        assert_eq!(files[0].0, "pool.5.1.txt");
        assert!(pools.manifest_json().contains("\"sampling\": \"bernoulli\""));
    }

    #[test]
    fn table_percentages_from_counts() {
        let row = PoolStatsRow::from_counts("1701".into(), 33000, 29188, 4274, 528);
        assert_eq!(row.pct_unique, 88.45);
        assert_eq!(row.pct_judged_relevant, 12.35);
        assert_eq!(row.pct_unique_judged, 14.64);
        let zero = PoolStatsRow::from_counts("1".into(), 10, 10, 0, 0);
        assert_eq!(zero.pct_judged_relevant, 0.0);
    }

    fn judged(topic: u32, rel: &[&str]) -> JudgmentSet {
        let list = rel.iter().map(|i| Judgment { item: i.to_string(), stratum: 1, relevant: true }).collect();
        JudgmentSet { topics: BTreeMap::from([(TopicId::from(topic), list)]), strata: one_stratum(1000, 1.0) }
    }

    #[test]
    fn single_team_everything_unique() {
        let runs = [run("a1", 1, vec!["x".into(), "y".into()]), run("a2", 1, vec!["y".into()])];
        let teams = HashMap::from([("a1".into(), "A".into()), ("a2".into(), "A".into())]);
        let rep = uniqueness_report(&runs, &judged(1, &["x", "y"]), &teams);
        assert_eq!(rep.per_topic[&TopicId::from(1u32)].unique_relevant, 2);
        assert_eq!(rep.per_team["A"], 2);
    }

    #[test]
    fn two_team_item_is_shared() {
        let runs = [run("a", 1, vec!["x".into(), "y".into()]), run("b", 1, vec!["y".into()])];
        let rep = uniqueness_report(&runs, &judged(1, &["x", "y"]), &HashMap::new());
        assert_eq!(rep.per_topic[&TopicId::from(1u32)], TopicUniqueness { unique_relevant: 1, shared_relevant: 1 });
        assert_eq!(rep.per_team["a"], 1);
        assert_eq!(rep.per_team["b"], 0);
    }

    #[test]
    fn three_teams_match_incidence_enumeration() {
        // Incidence pattern over 7 relevant items: every non-empty subset of 3 teams once.
        let teams = ["A", "B", "C"];
        let mut lists: Vec<Vec<String>> = vec![vec![]; 3];
        let mut rel = Vec::new();
        for mask in 1u32..8 {
            let item = format!("m{mask}");
            for (t, list) in lists.iter_mut().enumerate() {
                if mask & (1 << t) != 0 {
                    list.push(item.clone());
                }
            }
            rel.push(item);
        }
        lists[0].push("noise".into());
        let runs: Vec<RankedRun> = lists.into_iter().zip(teams).map(|(l, t)| run(t, 1, l)).collect();
        let rel_refs: Vec<&str> = rel.iter().map(String::as_str).collect();
        let rep = uniqueness_report(&runs, &judged(1, &rel_refs), &HashMap::new());

        // Brute force over the item x team incidence matrix.
        let mut unique = 0;
        let mut per_team = [0usize; 3];
        for mask in 1u32..8 {
            if mask.count_ones() == 1 {
                unique += 1;
                per_team[mask.trailing_zeros() as usize] += 1;
            }
        }
        let row = &rep.per_topic[&TopicId::from(1u32)];
        assert_eq!(row.unique_relevant, unique);
        assert_eq!(row.shared_relevant, 7 - unique);
        for (t, name) in teams.iter().enumerate() {
            assert_eq!(rep.per_team[*name], per_team[t]);
        }
    }
}
