use std::borrow::Cow;
use std::collections::{BTreeMap, HashMap};

use campaign_eval::io::{RankedRun, RunKind, Task, TopicId};
use campaign_eval::plot::scatter_svg;
use campaign_eval::pooling::{stratum_membership, uniqueness_report, UniquenessReport};
use campaign_eval::retrieval::{
    extended_inferred_ap, mean_over_topics, NoveltyScore, NoveltyWeights, SampledTopic, Support, TopicScore,
};
use rayon::prelude::*;
use serde::Serialize;

use super::write_report;
use crate::config::JobConfig;
use crate::error::{CliError, Context};
use crate::load;
use crate::report::{csv_line, num, Output};
use crate::JobKind;

#[derive(Serialize)]
struct RunResult {
    run_tag: String,
    team: String,
    run_kind: String,
    training_type: Option<String>,
    mean_xinfap: f64,
    topics: Vec<TopicScore>,
    #[serde(skip_serializing_if = "Option::is_none")]
    novelty: Option<NoveltyScore>,
}

#[derive(Serialize)]
struct AvsResults {
    epsilon: f64,
    judged_topics: usize,
    runs: Vec<RunResult>,
    uniqueness: UniquenessReport,
}

/// Weights for the novelty of `run`: every run counts, except that a
/// novelty run drops the other runs of its own team.
fn consideration_weights<'a>(
    run: &RankedRun,
    runs: &[RankedRun],
    shared: &'a NoveltyWeights,
    team_of: &impl Fn(&str) -> String,
) -> Cow<'a, NoveltyWeights> {
    if run.run_kind != RunKind::Novelty {
        return Cow::Borrowed(shared);
    }
    let team = team_of(&run.run_tag);
    let set: Vec<RankedRun> =
        runs.iter().filter(|r| r.run_tag == run.run_tag || team_of(&r.run_tag) != team).cloned().collect();
    Cow::Owned(NoveltyWeights::new(&set))
}

pub fn score_avs(config: &JobConfig, out: &mut Output) -> Result<(), CliError> {
    let params = &config.retrieval;
    let runs = load::runs(&config.inputs.runs, Task::Avs, params.rank_limit)?;
    let strata = load::strata(config.inputs.strata.as_deref())?;
    let judgments = load::judgments(load::require(&config.inputs.judgments, "judgments")?, strata)?;
    if judgments.topics.is_empty() {
        return Err(CliError::invalid("judgments cover no topics"));
    }
    let teams = match &config.inputs.teams {
        Some(p) => load::pairs(p)?,
        None => BTreeMap::new(),
    };
    let team_of = |tag: &str| teams.get(tag).cloned().unwrap_or_else(|| load::default_team(tag));

    let membership = stratum_membership(&runs, &judgments.strata);
    let rates = judgments.strata.rates();
    let sampled: BTreeMap<&TopicId, SampledTopic> = judgments
        .topics
        .keys()
        .map(|t| {
            let judged = judgments.labels(t);
            let unjudged = membership
                .get(t)
                .map(|m| {
                    m.iter()
                        .filter(|(item, _)| !judged.contains_key(item.as_str()))
                        .map(|(item, s)| (item.as_str(), *s))
                        .collect()
                })
                .unwrap_or_default();
            (t, SampledTopic { judged, membership: unjudged, rates: rates.clone() })
        })
        .collect();

    let shared = if params.novelty { NoveltyWeights::new(&runs) } else { NoveltyWeights::new(&[]) };
    let mut results: Vec<RunResult> = runs
        .par_iter()
        .map(|run| {
            let topics = sampled
                .iter()
                .map(|(&t, topic)| {
                    let items = run.ranked_items(t);
                    let s = extended_inferred_ap(&items, topic, params.epsilon).context(format!("{} topic {t}", run.run_tag))?;
                    Ok(TopicScore {
                        topic: t.clone(),
                        metric: "xinfAP".into(),
                        value: s.value,
                        support: Support {
                            num_judged: topic.judged.len(),
                            num_relevant: topic.num_relevant(),
                            num_retrieved: items.len(),
                        },
                        degenerate: s.degenerate,
                    })
                })
                .collect::<Result<Vec<_>, CliError>>()?;
            let novelty = if params.novelty {
                let weights = consideration_weights(run, &runs, &shared, &team_of);
                Some(weights.score(run, &judgments, params.novelty_mode).context(&run.run_tag)?)
            } else {
                None
            };
            Ok(RunResult {
                run_tag: run.run_tag.clone(),
                team: team_of(&run.run_tag),
                run_kind: run.run_kind.to_string(),
                training_type: run.training_type.map(|t| format!("{t:?}")),
                mean_xinfap: mean_over_topics(&topics)?,
                topics,
                novelty,
            })
        })
        .collect::<Result<_, CliError>>()?;
    results.sort_by(|a, b| a.run_tag.cmp(&b.run_tag));

    let mut topics_csv = csv_line(["run", "topic", "xinfap", "judged", "relevant", "retrieved", "degenerate"]);
    for r in &results {
        for t in &r.topics {
            topics_csv.push_str(&csv_line([
                r.run_tag.clone(),
                t.topic.to_string(),
                num(t.value),
                t.support.num_judged.to_string(),
                t.support.num_relevant.to_string(),
                t.support.num_retrieved.to_string(),
                t.degenerate.to_string(),
            ]));
        }
    }
    out.write("avs_topics.csv", topics_csv)?;

    let mut header = vec!["run", "team", "run_kind", "training_type", "mean_xinfap", "topics"];
    if params.novelty {
        header.extend(["novelty_raw", "novelty_normalized"]);
    }
    let mut runs_csv = csv_line(header);
    for r in &results {
        let mut row = vec![
            r.run_tag.clone(),
            r.team.clone(),
            r.run_kind.clone(),
            r.training_type.clone().unwrap_or_default(),
            num(r.mean_xinfap),
            r.topics.len().to_string(),
        ];
        if let Some(n) = &r.novelty {
            row.extend([num(n.raw_mean), num(n.normalized_mean)]);
        }
        runs_csv.push_str(&csv_line(row));
    }
    out.write("avs_runs.csv", runs_csv)?;

    // Processing time against score, for topics where the run reported a time.
    let score_of: HashMap<(&str, &TopicId), f64> = results
        .iter()
        .flat_map(|r| r.topics.iter().map(move |t| ((r.run_tag.as_str(), &t.topic), t.value)))
        .collect();
    let mut time_csv = csv_line(["run", "topic", "seconds", "xinfap"]);
    let mut points = Vec::new();
    for run in &runs {
        for (t, secs) in &run.processing_time {
            if let Some(&v) = score_of.get(&(run.run_tag.as_str(), t)) {
                time_csv.push_str(&csv_line([run.run_tag.clone(), t.to_string(), num(*secs), num(v)]));
                points.push((*secs, v));
            }
        }
    }
    if !points.is_empty() {
        out.write("time_score.csv", time_csv)?;
        out.write("time_score.svg", scatter_svg("Processing time vs score", "Seconds per topic", "xinfAP", &points))?;
    }

    let team_map: HashMap<String, String> = runs.iter().map(|r| (r.run_tag.clone(), team_of(&r.run_tag))).collect();
    let uniqueness = uniqueness_report(&runs, &judgments, &team_map);
    let summary = AvsResults { epsilon: params.epsilon, judged_topics: sampled.len(), runs: results, uniqueness };
    write_report(out, JobKind::ScoreAvs, config, summary)
}
