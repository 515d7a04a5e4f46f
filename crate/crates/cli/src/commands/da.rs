use std::collections::{BTreeMap, BTreeSet};

use campaign_eval::stats::{da_aggregate, pearson, DaOptions, DaTable};
use serde::{Deserialize, Serialize};

use super::write_report;
use crate::config::JobConfig;
use crate::error::CliError;
use crate::load;
use crate::report::{csv_line, num, Output};
use crate::JobKind;

#[derive(Debug, Deserialize)]
struct MetricRecord {
    system_id: String,
    video_id: String,
    metric: String,
    value: f64,
}

#[derive(Serialize)]
struct Correlation {
    metric: String,
    systems: usize,
    pearson_z: Option<f64>,
    pearson_raw: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    note: Option<String>,
}

#[derive(Serialize)]
struct DaResults {
    table: DaTable,
    correlations: Vec<Correlation>,
}

/// Per metric and system: mean over videos of the per-video mean value.
fn metric_means(path: &std::path::Path) -> Result<BTreeMap<String, BTreeMap<String, f64>>, CliError> {
    let mut reader = csv::Reader::from_reader(load::open(path)?);
    let mut cells: BTreeMap<(String, String), BTreeMap<String, Vec<f64>>> = BTreeMap::new();
    for (i, rec) in reader.deserialize::<MetricRecord>().enumerate() {
        let rec = rec.map_err(|e| CliError::invalid(format!("{} record {}: {e}", path.display(), i + 1)))?;
        if !rec.value.is_finite() {
            return Err(CliError::invalid(format!("{} record {}: value must be finite", path.display(), i + 1)));
        }
        cells.entry((rec.metric, rec.system_id)).or_default().entry(rec.video_id).or_default().push(rec.value);
    }
    let mut out: BTreeMap<String, BTreeMap<String, f64>> = BTreeMap::new();
    for ((metric, system), videos) in cells {
        let per_video: Vec<f64> = videos.values().map(|v| v.iter().sum::<f64>() / v.len() as f64).collect();
        out.entry(metric).or_default().insert(system, per_video.iter().sum::<f64>() / per_video.len() as f64);
    }
    Ok(out)
}

pub fn da(config: &JobConfig, out: &mut Output) -> Result<(), CliError> {
    let ratings = load::ratings(load::require(&config.inputs.ratings, "ratings")?)?;
    let options = DaOptions {
        workers: match &config.inputs.workers {
            Some(p) => Some(load::lines(p)?.into_iter().collect::<BTreeSet<_>>()),
            None => None,
        },
    };
    let table = da_aggregate(&ratings, &options)?;
    out.write("da_systems.csv", table.to_csv())?;

    let mut vcsv = csv_line(["system_id", "video_id", "raw", "z"]);
    for v in &table.per_video {
        vcsv.push_str(&csv_line([v.system_id.clone(), v.video_id.clone(), num(v.raw), num(v.z)]));
    }
    out.write("da_videos.csv", vcsv)?;

    let mut wcsv = csv_line(["worker_id", "ratings", "mean", "sd", "flagged"]);
    for (w, s) in &table.workers {
        wcsv.push_str(&csv_line([w.clone(), s.n.to_string(), num(s.mean), num(s.sd), s.flagged.to_string()]));
    }
    out.write("da_workers.csv", wcsv)?;

    let mut correlations = Vec::new();
    if let Some(p) = &config.inputs.metrics {
        for (metric, by_system) in metric_means(p)? {
            let common: Vec<&String> = by_system.keys().filter(|s| table.systems.contains_key(*s)).collect();
            let xs: Vec<f64> = common.iter().map(|s| by_system[*s]).collect();
            let z: Vec<f64> = common.iter().map(|s| table.systems[*s].z).collect();
            let raw: Vec<f64> = common.iter().map(|s| table.systems[*s].raw).collect();
            let (pz, pr) = (pearson(&xs, &z), pearson(&xs, &raw));
            let note = pz.as_ref().err().or(pr.as_ref().err()).map(|e| e.to_string());
            correlations.push(Correlation { metric, systems: common.len(), pearson_z: pz.ok(), pearson_raw: pr.ok(), note });
        }
        let mut ccsv = csv_line(["metric", "systems", "pearson_z", "pearson_raw"]);
        for c in &correlations {
            ccsv.push_str(&csv_line([
                c.metric.clone(),
                c.systems.to_string(),
                c.pearson_z.map(num).unwrap_or_default(),
                c.pearson_raw.map(num).unwrap_or_default(),
            ]));
        }
        out.write("da_correlation.csv", ccsv)?;
    }
    write_report(out, JobKind::Da, config, DaResults { table, correlations })
}
