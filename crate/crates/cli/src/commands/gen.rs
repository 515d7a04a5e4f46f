use std::collections::BTreeMap;

use campaign_eval::io::{write_activity_set, write_judgments, write_retrieval_run, write_strata, StrataTable};
use campaign_eval::pooling::{build_pools, PoolSpec};
use campaign_eval::synth::{actev_fixture, avs_fixture, judge_pools, ActevSynthConfig, AvsSynthConfig};
use serde::Serialize;

use super::write_report;
use crate::config::JobConfig;
use crate::error::CliError;
use crate::report::{csv_line, Output};
use crate::{GenKind, JobKind};

#[derive(Serialize)]
#[serde(untagged)]
enum Generated {
    Avs { config: AvsSynthConfig, runs: Vec<String>, judged: usize },
    Actev { config: ActevSynthConfig, reference_instances: usize, system_instances: usize },
}

fn to_bytes(f: impl FnOnce(&mut Vec<u8>) -> campaign_eval::Result<()>) -> Result<Vec<u8>, CliError> {
    let mut buf = Vec::new();
    f(&mut buf).map_err(CliError::internal)?;
    Ok(buf)
}

/// Writes a synthetic fixture. AVS: runs, strata, judgments of the seeded
/// pool and a team map. ActEV: reference and system instance sets.
pub fn gen(kind: GenKind, config: &JobConfig, out: &mut Output) -> Result<(), CliError> {
    let generated = match kind {
        GenKind::Avs => {
            let cfg = AvsSynthConfig { seed: config.seed, ..config.gen.avs };
            let fixture = avs_fixture(&cfg);
            let strata = StrataTable::two_stratum_default();
            let pools = build_pools(&fixture.runs, &PoolSpec::new(strata.clone(), config.seed))?;
            let judgments = judge_pools(&pools, &fixture.truth);
            let mut tags = Vec::new();
            for run in &fixture.runs {
                out.write(&format!("runs/{}.txt", run.run_tag), to_bytes(|b| write_retrieval_run(run, b))?)?;
                tags.push(run.run_tag.clone());
            }
            out.write("strata.txt", to_bytes(|b| write_strata(&strata, b))?)?;
            out.write("judgments.txt", to_bytes(|b| write_judgments(&judgments, b))?)?;
            let teams: String = fixture.teams.iter().map(|(r, t)| format!("{r}\t{t}\n")).collect();
            out.write("teams.tsv", teams)?;
            let mut truth = csv_line(["topic", "relevant"]);
            let counts: BTreeMap<_, _> = fixture.truth.iter().map(|(t, s)| (t.to_string(), s.len())).collect();
            for (t, n) in counts {
                truth.push_str(&csv_line([t, n.to_string()]));
            }
            out.write("truth_counts.csv", truth)?;
            Generated::Avs { config: cfg, runs: tags, judged: judgments.topics.values().map(Vec::len).sum() }
        }
        GenKind::Actev => {
            let cfg = ActevSynthConfig { seed: config.seed, ..config.gen.actev };
            let (reference, system) = actev_fixture(&cfg);
            out.write("reference.json", to_bytes(|b| write_activity_set(&reference, b))?)?;
            out.write("system.json", to_bytes(|b| write_activity_set(&system, b))?)?;
            Generated::Actev {
                config: cfg,
                reference_instances: reference.instances.len(),
                system_instances: system.instances.len(),
            }
        }
    };
    write_report(out, JobKind::Gen(kind), config, generated)
}
