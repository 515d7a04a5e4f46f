use campaign_eval::io::{Task, TopicId};
use campaign_eval::pooling::{build_pools, pool_stats, PoolSpec, PoolStatsRow};
use campaign_eval::round::fmt_fixed;
use serde::Serialize;

use super::write_report;
use crate::config::JobConfig;
use crate::error::CliError;
use crate::load;
use crate::report::{csv_line, Output};
use crate::JobKind;

#[derive(Serialize)]
struct PoolSummary {
    runs: usize,
    topics: usize,
    chunks: usize,
    pooled_items: usize,
    stats: Vec<PoolStatsRow>,
}

pub fn pool(config: &JobConfig, out: &mut Output) -> Result<(), CliError> {
    let runs = load::runs(&config.inputs.runs, Task::Avs, config.retrieval.rank_limit)?;
    let strata = load::strata(config.inputs.strata.as_deref())?;
    let mut spec = PoolSpec::new(strata.clone(), config.seed);
    spec.chunk_size = config.retrieval.chunk_size;
    let pools = build_pools(&runs, &spec)?;
    let judgments = config.inputs.judgments.as_deref().map(|p| load::judgments(p, strata)).transpose()?;

    for (name, body) in pools.chunk_files() {
        out.write(&name, body)?;
    }
    out.write("manifest.json", pools.manifest_json())?;

    let mut rows = pool_stats(&runs, &pools, judgments.as_ref());
    let sum = |f: fn(&PoolStatsRow) -> u64| rows.iter().map(f).sum::<u64>();
    let total = PoolStatsRow::from_counts(
        TopicId::new("all"),
        sum(|r| r.total_submitted),
        sum(|r| r.unique_submitted),
        sum(|r| r.judged),
        sum(|r| r.relevant),
    );
    rows.push(total);
    let mut csv = csv_line([
        "topic",
        "total_submitted",
        "unique_submitted",
        "pct_unique",
        "judged",
        "pct_unique_judged",
        "relevant",
        "pct_judged_relevant",
    ]);
    for r in &rows {
        csv.push_str(&csv_line([
            r.topic.to_string(),
            r.total_submitted.to_string(),
            r.unique_submitted.to_string(),
            fmt_fixed(r.pct_unique, 2),
            r.judged.to_string(),
            fmt_fixed(r.pct_unique_judged, 2),
            r.relevant.to_string(),
            fmt_fixed(r.pct_judged_relevant, 2),
        ]));
    }
    out.write("pool_stats.csv", csv)?;

    let summary = PoolSummary {
        runs: runs.len(),
        topics: pools.topics.len(),
        chunks: pools.chunks.len(),
        pooled_items: pools.topics.values().map(|p| p.items.len()).sum(),
        stats: rows,
    };
    write_report(out, JobKind::Pool, config, summary)
}
