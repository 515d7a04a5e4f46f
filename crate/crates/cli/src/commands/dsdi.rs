use std::collections::{BTreeMap, BTreeSet};

use campaign_eval::io::{Task, TopicId};
use campaign_eval::retrieval::{average_precision, prf, Prf};
use rayon::prelude::*;
use serde::Serialize;

use super::{median, write_report};
use crate::config::JobConfig;
use crate::error::CliError;
use crate::load;
use crate::report::{csv_line, num, Output};
use crate::JobKind;

#[derive(Serialize)]
struct FeatureScore {
    feature: TopicId,
    ap: f64,
    tp: u64,
    fp: u64,
    fn_: u64,
    prf: Prf,
    degenerate: bool,
}

#[derive(Serialize)]
struct DsdiRun {
    run_tag: String,
    map: f64,
    categories: BTreeMap<String, f64>,
    features: Vec<FeatureScore>,
}

#[derive(Serialize)]
struct FeatureSpread {
    feature: TopicId,
    min: f64,
    median: f64,
    max: f64,
}

#[derive(Serialize)]
struct DsdiResults {
    scored_features: Vec<TopicId>,
    excluded_features: Vec<TopicId>,
    runs: Vec<DsdiRun>,
    feature_spread: Vec<FeatureSpread>,
}

pub fn score_dsdi(config: &JobConfig, out: &mut Output) -> Result<(), CliError> {
    let params = &config.retrieval;
    let runs = load::runs(&config.inputs.runs, Task::Dsdi, params.rank_limit)?;
    let strata = load::strata(config.inputs.strata.as_deref())?;
    let judgments = load::judgments(load::require(&config.inputs.judgments, "judgments")?, strata)?;
    let excluded: BTreeSet<TopicId> = params.excluded_features.iter().map(|f| TopicId::new(f.trim())).collect();
    let features: Vec<&TopicId> = judgments.topics.keys().filter(|t| !excluded.contains(*t)).collect();
    if features.is_empty() {
        return Err(CliError::invalid("no feature left to score after exclusions"));
    }
    let categories: BTreeMap<TopicId, String> = match &config.inputs.categories {
        Some(p) => load::pairs(p)?.into_iter().map(|(k, v)| (TopicId::new(k), v)).collect(),
        None => BTreeMap::new(),
    };

    let mut results: Vec<DsdiRun> = runs
        .par_iter()
        .map(|run| {
            let scores: Vec<FeatureScore> = features
                .iter()
                .map(|&f| {
                    let relevant = judgments.relevant_items(f);
                    let items = run.ranked_items(f);
                    let ap = average_precision(&items, &relevant);
                    let tp = items.iter().filter(|i| relevant.contains(*i)).count() as u64;
                    let fp = items.len() as u64 - tp;
                    let fn_ = relevant.len() as u64 - tp;
                    FeatureScore { feature: f.clone(), ap: ap.value, tp, fp, fn_, prf: prf(tp, fp, fn_), degenerate: ap.degenerate }
                })
                .collect();
            let map = scores.iter().map(|s| s.ap).sum::<f64>() / scores.len() as f64;
            let mut by_cat: BTreeMap<String, Vec<f64>> = BTreeMap::new();
            for s in &scores {
                if let Some(c) = categories.get(&s.feature) {
                    by_cat.entry(c.clone()).or_default().push(s.ap);
                }
            }
            let categories = by_cat.into_iter().map(|(c, v)| (c, v.iter().sum::<f64>() / v.len() as f64)).collect();
            DsdiRun { run_tag: run.run_tag.clone(), map, categories, features: scores }
        })
        .collect();
    results.sort_by(|a, b| a.run_tag.cmp(&b.run_tag));

    let mut fcsv = csv_line(["run", "feature", "ap", "tp", "fp", "fn", "precision", "recall", "f1"]);
    for r in &results {
        for s in &r.features {
            fcsv.push_str(&csv_line([
                r.run_tag.clone(),
                s.feature.to_string(),
                num(s.ap),
                s.tp.to_string(),
                s.fp.to_string(),
                s.fn_.to_string(),
                num(s.prf.precision),
                num(s.prf.recall),
                num(s.prf.f1),
            ]));
        }
    }
    out.write("dsdi_features.csv", fcsv)?;

    let mut rcsv = csv_line(["run", "map", "features"]);
    for r in &results {
        rcsv.push_str(&csv_line([r.run_tag.clone(), num(r.map), r.features.len().to_string()]));
    }
    out.write("dsdi_runs.csv", rcsv)?;

    if !categories.is_empty() {
        let mut ccsv = csv_line(["run", "category", "mean_ap"]);
        for r in &results {
            for (c, v) in &r.categories {
                ccsv.push_str(&csv_line([r.run_tag.clone(), c.clone(), num(*v)]));
            }
        }
        out.write("dsdi_categories.csv", ccsv)?;
    }

    let spread: Vec<FeatureSpread> = features
        .iter()
        .enumerate()
        .map(|(i, &f)| {
            let mut v: Vec<f64> = results.iter().map(|r| r.features[i].ap).collect();
            let med = median(&mut v);
            FeatureSpread { feature: f.clone(), min: v[0], median: med, max: v[v.len() - 1] }
        })
        .collect();
    let mut scsv = csv_line(["feature", "min", "median", "max"]);
    for s in &spread {
        scsv.push_str(&csv_line([s.feature.to_string(), num(s.min), num(s.median), num(s.max)]));
    }
    out.write("dsdi_feature_spread.csv", scsv)?;

    let results = DsdiResults {
        scored_features: features.into_iter().cloned().collect(),
        excluded_features: excluded.into_iter().collect(),
        runs: results,
        feature_spread: spread,
    };
    write_report(out, JobKind::ScoreDsdi, config, results)
}
