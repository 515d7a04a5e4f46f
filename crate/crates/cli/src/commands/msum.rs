use std::collections::BTreeMap;

use campaign_eval::retrieval::{msum_objective, msum_precision, msum_subjective};
use campaign_eval::round::fmt_fixed;
use serde::{Deserialize, Serialize};

use super::write_report;
use crate::config::JobConfig;
use crate::error::{CliError, Context};
use crate::load;
use crate::report::{csv_line, Output};
use crate::JobKind;

#[derive(Debug, Deserialize)]
struct MsumRecord {
    system_id: String,
    video_id: String,
    correct: u64,
    possible: u64,
    #[serde(default)]
    false_claims: Option<u64>,
    #[serde(default)]
    tempo: Option<f64>,
    #[serde(default)]
    contextuality: Option<f64>,
    #[serde(default)]
    redundancy: Option<f64>,
}

#[derive(Serialize)]
struct MsumRow {
    system_id: String,
    video_id: String,
    objective_all: f64,
    precision: Option<f64>,
    subjective_all: Option<f64>,
}

#[derive(Serialize)]
struct MsumSystem {
    system_id: String,
    summaries: usize,
    /// Pooled: total correct over total possible key facts.
    objective_all: f64,
    precision: Option<f64>,
    subjective_all: Option<f64>,
}

#[derive(Serialize)]
struct MsumResults {
    rows: Vec<MsumRow>,
    systems: Vec<MsumSystem>,
}

fn fixed(v: Option<f64>) -> String {
    v.map(|v| fmt_fixed(v, 3)).unwrap_or_default()
}

pub fn score_msum(config: &JobConfig, out: &mut Output) -> Result<(), CliError> {
    let path = load::require(&config.inputs.msum, "summary scores")?;
    let mut reader = csv::Reader::from_reader(load::open(path)?);
    let mut rows = Vec::new();
    let mut totals: BTreeMap<String, (u64, u64, u64, u64, Vec<f64>, usize)> = BTreeMap::new();
    for (i, rec) in reader.deserialize::<MsumRecord>().enumerate() {
        let what = format!("{} record {}", path.display(), i + 1);
        let rec = rec.map_err(|e| CliError::invalid(format!("{what}: {e}")))?;
        let objective = msum_objective(rec.correct, rec.possible).context(&what)?;
        let precision = rec.false_claims.map(|f| msum_precision(rec.correct, f).value);
        let subjective = match (rec.tempo, rec.contextuality, rec.redundancy) {
            (Some(t), Some(c), Some(r)) => Some(msum_subjective(t, c, r).context(&what)?),
            (None, None, None) => None,
            _ => return Err(CliError::invalid(format!("{what}: subjective ratings must be all present or all empty"))),
        };
        let t = totals.entry(rec.system_id.clone()).or_default();
        t.0 += rec.correct;
        t.1 += rec.possible;
        if let Some(f) = rec.false_claims {
            t.2 += rec.correct;
            t.3 += f;
        }
        t.4.extend(subjective);
        t.5 += 1;
        rows.push(MsumRow {
            system_id: rec.system_id,
            video_id: rec.video_id,
            objective_all: objective,
            precision,
            subjective_all: subjective,
        });
    }
    if rows.is_empty() {
        return Err(CliError::invalid(format!("{}: no summary records", path.display())));
    }

    let mut csv = csv_line(["system_id", "video_id", "objective_all", "precision", "subjective_all"]);
    rows.sort_by(|a, b| (&a.system_id, &a.video_id).cmp(&(&b.system_id, &b.video_id)));
    for r in &rows {
        csv.push_str(&csv_line([
            r.system_id.clone(),
            r.video_id.clone(),
            fmt_fixed(r.objective_all, 3),
            fixed(r.precision),
            fixed(r.subjective_all),
        ]));
    }
    out.write("msum.csv", csv)?;

    let systems: Vec<MsumSystem> = totals
        .into_iter()
        .map(|(s, (c, p, pc, f, subj, n))| MsumSystem {
            system_id: s,
            summaries: n,
            objective_all: c as f64 / p as f64,
            precision: (pc + f > 0).then(|| pc as f64 / (pc + f) as f64),
            subjective_all: (!subj.is_empty()).then(|| subj.iter().sum::<f64>() / subj.len() as f64),
        })
        .collect();
    let mut scsv = csv_line(["system_id", "summaries", "objective_all", "precision", "subjective_all"]);
    for s in &systems {
        scsv.push_str(&csv_line([
            s.system_id.clone(),
            s.summaries.to_string(),
            fmt_fixed(s.objective_all, 3),
            fixed(s.precision),
            fixed(s.subjective_all),
        ]));
    }
    out.write("msum_systems.csv", scsv)?;
    write_report(out, JobKind::ScoreMsum, config, MsumResults { rows, systems })
}
