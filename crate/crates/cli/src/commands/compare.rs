use std::collections::BTreeMap;

use campaign_eval::plot::significance_svg;
use campaign_eval::stats::{significance_matrix, RandomizationOptions, SignificanceMatrix};
use serde::Serialize;

use super::write_report;
use crate::config::JobConfig;
use crate::error::CliError;
use crate::load;
use crate::report::Output;
use crate::JobKind;

#[derive(Serialize)]
struct CompareResults {
    metric: String,
    units: usize,
    options: RandomizationOptions,
    matrix: SignificanceMatrix,
}

/// Reads `run, unit, metric...` rows into run -> unit -> value.
fn read_scores(path: &std::path::Path, metric: Option<&str>) -> Result<(String, BTreeMap<String, BTreeMap<String, f64>>), CliError> {
    let bad = |m: String| CliError::invalid(format!("{}: {m}", path.display()));
    let mut reader = csv::Reader::from_reader(load::open(path)?);
    let headers = reader.headers().map_err(|e| bad(e.to_string()))?.clone();
    if headers.len() < 3 {
        return Err(bad("expected run, unit and metric columns".into()));
    }
    let col = match metric {
        Some(m) => headers.iter().position(|h| h == m).ok_or_else(|| bad(format!("no column named {m}")))?,
        None => 2,
    };
    let mut runs: BTreeMap<String, BTreeMap<String, f64>> = BTreeMap::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        let field = |k: usize| rec.get(k).unwrap_or("").trim();
        let value: f64 = field(col).parse().map_err(|_| bad(format!("record {}: bad value {:?}", i + 1, field(col))))?;
        if runs.entry(field(0).to_string()).or_default().insert(field(1).to_string(), value).is_some() {
            return Err(bad(format!("record {}: duplicate unit {} for run {}", i + 1, field(1), field(0))));
        }
    }
    Ok((headers[col].to_string(), runs))
}

pub fn compare(config: &JobConfig, out: &mut Output) -> Result<(), CliError> {
    let path = load::require(&config.inputs.scores, "scores")?;
    let (metric, runs) = read_scores(path, config.stats.metric.as_deref())?;
    if runs.len() < 2 {
        return Err(CliError::invalid("compare needs at least two runs"));
    }
    let units: Vec<&String> = runs.values().next().expect("nonempty").keys().collect();
    for (run, scores) in &runs {
        if scores.keys().collect::<Vec<_>>() != units {
            return Err(CliError::invalid(format!("run {run} is not scored on the same units as the others")));
        }
    }
    let options = RandomizationOptions {
        iterations: config.stats.iterations,
        seed: config.seed,
        statistic: config.stats.statistic,
        ..Default::default()
    };
    let vectors: Vec<(String, Vec<f64>)> = runs.iter().map(|(r, s)| (r.clone(), s.values().copied().collect())).collect();
    let matrix = significance_matrix(&vectors, &options, config.stats.alpha)?;
    out.write("significance.csv", matrix.to_csv())?;
    out.write("significance.svg", significance_svg(&format!("Randomization test on {metric}"), &matrix))?;
    let n = units.len();
    write_report(out, JobKind::Compare, config, CompareResults { metric, units: n, options, matrix })
}
