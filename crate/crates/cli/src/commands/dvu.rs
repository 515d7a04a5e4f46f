use campaign_eval::io::Answer;
use campaign_eval::retrieval::{accuracy, mrr_sheets};
use serde::Serialize;

use super::{stem_of, write_report};
use crate::config::JobConfig;
use crate::error::{CliError, Context};
use crate::load;
use crate::report::{csv_line, num, Output};
use crate::JobKind;

#[derive(Serialize)]
struct DvuRun {
    run: String,
    accuracy: f64,
    mrr: f64,
}

#[derive(Serialize)]
struct DvuResults {
    multiple_choice_questions: usize,
    ranked_list_questions: usize,
    runs: Vec<DvuRun>,
}

pub fn score_dvu(config: &JobConfig, out: &mut Output) -> Result<(), CliError> {
    let key_path = load::require(&config.inputs.key, "answer key")?;
    let key = load::answer_sheet(key_path)?;
    if config.inputs.answers.is_empty() {
        return Err(CliError::invalid("no answer sheets given"));
    }
    let mut runs = Vec::new();
    for p in &config.inputs.answers {
        let sheet = load::answer_sheet(p)?;
        runs.push(DvuRun {
            run: stem_of(p),
            accuracy: accuracy(&sheet, &key).context(p.display())?,
            mrr: mrr_sheets(&sheet, &key).context(p.display())?,
        });
    }
    runs.sort_by(|a, b| a.run.cmp(&b.run));
    if runs.windows(2).any(|w| w[0].run == w[1].run) {
        return Err(CliError::invalid("two answer sheets share a file name"));
    }
    let mut csv = csv_line(["run", "accuracy", "mrr"]);
    for r in &runs {
        csv.push_str(&csv_line([r.run.clone(), num(r.accuracy), num(r.mrr)]));
    }
    out.write("dvu.csv", csv)?;
    let mc = key.entries.iter().filter(|e| matches!(e.answer, Answer::Choice(_))).count();
    let results = DvuResults { multiple_choice_questions: mc, ranked_list_questions: key.entries.len() - mc, runs };
    write_report(out, JobKind::ScoreDvu, config, results)
}
