//! Seeded synthetic fixtures for tests, benchmarks and the `gen` command.

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::io::{
    ActivityInstance, ActivityInstanceSet, BoundingBox, Judgment, JudgmentSet, ObjectBox, RankedEntry, RankedRun,
    StrataTable, Task, TopicId, TrainingType,
};
use crate::pooling::PoolSet;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AvsSynthConfig {
    pub runs: usize,
    pub topics: usize,
    /// Entries per topic per run.
    pub depth: usize,
    /// Candidate shots per topic.
    pub collection: usize,
    pub relevant_rate: f64,
    /// Runs per team.
    pub runs_per_team: usize,
    pub seed: u64,
}

impl Default for AvsSynthConfig {
    fn default() -> Self {
        AvsSynthConfig {
            runs: 33,
            topics: 30,
            depth: 1000,
            collection: 3000,
            relevant_rate: 0.05,
            runs_per_team: 4,
            seed: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AvsFixture {
    pub runs: Vec<RankedRun>,
    /// Ground-truth relevant shots per topic.
    pub truth: BTreeMap<TopicId, BTreeSet<String>>,
    /// run tag -> team.
    pub teams: BTreeMap<String, String>,
}

pub fn avs_fixture(cfg: &AvsSynthConfig) -> AvsFixture {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let collection = cfg.collection.max(cfg.depth);
    let topics: Vec<TopicId> = (1..=cfg.topics as u32).map(TopicId::from).collect();
    let names: Vec<Vec<String>> = topics.iter().map(|t| (0..collection).map(|i| format!("shot{t}_{i}")).collect()).collect();
    let relevance: Vec<Vec<bool>> =
        topics.iter().map(|_| (0..collection).map(|_| rng.random_bool(cfg.relevant_rate.clamp(0.0, 1.0))).collect()).collect();
    let truth = topics
        .iter()
        .zip(names.iter().zip(&relevance))
        .map(|(t, (n, r))| (t.clone(), n.iter().zip(r).filter(|(_, &r)| r).map(|(n, _)| n.clone()).collect()))
        .collect();

    let mut runs = Vec::with_capacity(cfg.runs);
    let mut teams = BTreeMap::new();
    let per_team = cfg.runs_per_team.max(1);
    for k in 0..cfg.runs {
        let tag = format!("team{:02}_run{}", k / per_team + 1, k % per_team + 1);
        teams.insert(tag.clone(), format!("team{:02}", k / per_team + 1));
        let skill = rng.random_range(0.2..2.0);
        let mut run = RankedRun::new(tag, Task::Avs);
        run.training_type = Some(if k % 2 == 0 { TrainingType::D } else { TrainingType::A });
        for (ti, topic) in topics.iter().enumerate() {
            let mut scored: Vec<(f64, usize)> = (0..collection)
                .map(|i| {
                    let noise: f64 = rng.random::<f64>() + rng.random::<f64>() + rng.random::<f64>();
                    (if relevance[ti][i] { skill } else { 0.0 } + noise, i)
                })
                .collect();
            scored.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
            let entries = scored
                .iter()
                .take(cfg.depth)
                .enumerate()
                .map(|(r, &(s, i))| RankedEntry { item: names[ti][i].clone(), rank: r as u32 + 1, score: (s * 1e6).round() / 1e6 })
                .collect();
            run.entries.insert(topic.clone(), entries);
            run.processing_time.insert(topic.clone(), (rng.random_range(5.0..600.0) * 10.0f64).round() / 10.0);
        }
        runs.push(run);
    }
    AvsFixture { runs, truth, teams }
}

/// Labels every pooled item from the ground truth.
pub fn judge_pools(pools: &PoolSet, truth: &BTreeMap<TopicId, BTreeSet<String>>) -> JudgmentSet {
    let topics = pools
        .topics
        .iter()
        .map(|(t, pool)| {
            let rel = truth.get(t);
            let mut js: Vec<Judgment> = pool
                .items
                .iter()
                .map(|p| Judgment {
                    item: p.item.clone(),
                    stratum: p.stratum,
                    relevant: rel.is_some_and(|r| r.contains(&p.item)),
                })
                .collect();
            js.sort_by(|a, b| a.item.cmp(&b.item));
            (t.clone(), js)
        })
        .collect();
    JudgmentSet { topics, strata: pools.spec.strata.clone() }
}

/// Every retrieved item judged, all in one stratum at rate 1.
pub fn full_judgments(runs: &[RankedRun], truth: &BTreeMap<TopicId, BTreeSet<String>>) -> JudgmentSet {
    let strata = StrataTable::new(vec![crate::io::Stratum { id: 1, rank_lo: 1, rank_hi: u32::MAX, rate: 1.0 }])
        .expect("valid single stratum");
    let mut topics: BTreeMap<TopicId, BTreeSet<String>> = BTreeMap::new();
    for run in runs {
        for (t, entries) in &run.entries {
            topics.entry(t.clone()).or_default().extend(entries.iter().map(|e| e.item.clone()));
        }
    }
    let topics = topics
        .into_iter()
        .map(|(t, items)| {
            let rel = truth.get(&t);
            let js = items
                .into_iter()
                .map(|item| Judgment { relevant: rel.is_some_and(|r| r.contains(&item)), item, stratum: 1 })
                .collect();
            (t, js)
        })
        .collect();
    JudgmentSet { topics, strata }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ActevSynthConfig {
    pub activities: usize,
    pub videos: usize,
    pub frames_per_video: u64,
    pub instances_per_activity: usize,
    /// Probability that a reference instance gets a system detection.
    pub detect_rate: f64,
    pub false_alarms_per_activity: usize,
    /// Annotate object boxes (needed for AOD).
    pub objects: bool,
    pub seed: u64,
}

impl Default for ActevSynthConfig {
    fn default() -> Self {
        ActevSynthConfig {
            activities: 20,
            videos: 10,
            frames_per_video: 9000,
            instances_per_activity: 25,
            detect_rate: 0.75,
            false_alarms_per_activity: 10,
            objects: true,
            seed: 1,
        }
    }
}

const OBJECT_STEP: u64 = 10;

fn jitter_box(rng: &mut ChaCha8Rng, b: &BoundingBox) -> BoundingBox {
    BoundingBox {
        x: (b.x + rng.random_range(-6.0..6.0f64)).round(),
        y: (b.y + rng.random_range(-6.0..6.0f64)).round(),
        w: b.w,
        h: b.h,
    }
}

fn random_box(rng: &mut ChaCha8Rng) -> BoundingBox {
    BoundingBox {
        x: rng.random_range(0..1800) as f64,
        y: rng.random_range(0..1000) as f64,
        w: rng.random_range(20..120) as f64,
        h: rng.random_range(40..200) as f64,
    }
}

fn objects(rng: &mut ChaCha8Rng, begin: u64, end: u64) -> BTreeMap<u64, Vec<ObjectBox>> {
    let b = random_box(rng);
    (begin..=end).step_by(OBJECT_STEP as usize).map(|f| (f, vec![ObjectBox { bbox: b, conf: None }])).collect()
}

/// Reference and system instance sets over the same videos.
pub fn actev_fixture(cfg: &ActevSynthConfig) -> (ActivityInstanceSet, ActivityInstanceSet) {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let frames = cfg.frames_per_video.max(400);
    let durations: BTreeMap<String, f64> =
        (1..=cfg.videos.max(1)).map(|v| (format!("video{v:03}"), frames as f64 / 1800.0)).collect();
    let videos: Vec<String> = durations.keys().cloned().collect();
    let mut reference = Vec::new();
    let mut system = Vec::new();
    let conf = |rng: &mut ChaCha8Rng, lo: f64, hi: f64| (rng.random_range(lo..hi) * 1e4f64).round() / 1e4;
    for a in 1..=cfg.activities {
        let activity = format!("activity_{a:02}");
        for _ in 0..cfg.instances_per_activity {
            let video = videos[rng.random_range(0..videos.len())].clone();
            let len = rng.random_range(30..300u64);
            let begin = rng.random_range(0..frames - len);
            let end = begin + len;
            let objs = if cfg.objects { objects(&mut rng, begin, end) } else { BTreeMap::new() };
            if rng.random_bool(cfg.detect_rate.clamp(0.0, 1.0)) {
                let b = (begin as i64 + rng.random_range(-20..20i64)).clamp(0, frames as i64 - 1) as u64;
                let e = (end as i64 + rng.random_range(-20..20i64)).clamp(b as i64, frames as i64 - 1) as u64;
                let mut sys_objs = BTreeMap::new();
                for (f, boxes) in objs.range(b..=e) {
                    if !rng.random_bool(0.9) {
                        continue;
                    }
                    let boxes = boxes
                        .iter()
                        .map(|o| ObjectBox { bbox: jitter_box(&mut rng, &o.bbox), conf: Some(conf(&mut rng, 0.3, 1.0)) })
                        .collect();
                    sys_objs.insert(*f, boxes);
                }
                system.push(ActivityInstance {
                    activity: activity.clone(),
                    video_id: video.clone(),
                    begin_frame: b,
                    end_frame: e,
                    confidence: Some(conf(&mut rng, 0.3, 1.0)),
                    objects: sys_objs,
                });
            }
            reference.push(ActivityInstance {
                activity: activity.clone(),
                video_id: video,
                begin_frame: begin,
                end_frame: end,
                confidence: None,
                objects: objs,
            });
        }
        for _ in 0..cfg.false_alarms_per_activity {
            let video = videos[rng.random_range(0..videos.len())].clone();
            let len = rng.random_range(30..300u64);
            let begin = rng.random_range(0..frames - len);
            let objs = if cfg.objects {
                objects(&mut rng, begin, begin + len)
                    .into_iter()
                    .map(|(f, bs)| (f, bs.into_iter().map(|o| ObjectBox { conf: Some(0.5), ..o }).collect()))
                    .collect()
            } else {
                BTreeMap::new()
            };
            system.push(ActivityInstance {
                activity: activity.clone(),
                video_id: video,
                begin_frame: begin,
                end_frame: begin + len,
                confidence: Some(conf(&mut rng, 0.0, 0.7)),
                objects: objs,
            });
        }
    }
    (
        ActivityInstanceSet { video_durations: durations.clone(), instances: reference },
        ActivityInstanceSet { video_durations: durations, instances: system },
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::InstanceSetKind;

    #[test]
    fn avs_is_seeded() {
        let cfg = AvsSynthConfig { runs: 3, topics: 2, depth: 50, collection: 120, ..Default::default() };
        let a = avs_fixture(&cfg);
        assert_eq!(a, avs_fixture(&cfg));
        assert_ne!(a.runs, avs_fixture(&AvsSynthConfig { seed: 2, ..cfg }).runs);
        assert!(a.runs.iter().all(|r| r.entries.values().all(|e| e.len() == 50)));
        assert_eq!(a.teams.len(), 3);
    }

    #[test]
    fn actev_is_valid() {
        let cfg = ActevSynthConfig { activities: 3, instances_per_activity: 5, ..Default::default() };
        let (r, s) = actev_fixture(&cfg);
        assert_eq!((r.clone(), s.clone()), actev_fixture(&cfg));
        let (mut vr, mut vs) = (r.clone(), s.clone());
        vr.validate(InstanceSetKind::Reference).unwrap();
        vs.validate(InstanceSetKind::System).unwrap();
        assert_eq!((vr, vs), (r.clone(), s));
        assert_eq!(r.instances.len(), 15);
    }
}
