//! Input loading with file-level error context.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::BufReader;
use std::path::Path;

use campaign_eval::io::{
    parse_activity_set, parse_answer_sheet, parse_da_ratings, parse_judgments, parse_retrieval_run, parse_strata,
    validate_run, ActivityInstanceSet, AnswerSheet, DaRatingFile, InstanceSetKind, JudgmentSet, RankedRun,
    RunParseOptions, Severity, StrataTable, Task,
};

use crate::error::{CliError, Context};

pub(crate) fn open(path: &Path) -> Result<BufReader<File>, CliError> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| CliError::invalid(format!("cannot open {}: {e}", path.display())))
}

pub(crate) fn require<'a>(p: &'a Option<std::path::PathBuf>, what: &str) -> Result<&'a Path, CliError> {
    p.as_deref().ok_or_else(|| CliError::invalid(format!("missing input: {what}")))
}

pub(crate) fn strata(path: Option<&Path>) -> Result<StrataTable, CliError> {
    match path {
        Some(p) => parse_strata(open(p)?).context(p.display()),
        None => Ok(StrataTable::two_stratum_default()),
    }
}

pub(crate) fn judgments(path: &Path, strata: StrataTable) -> Result<JudgmentSet, CliError> {
    parse_judgments(open(path)?, strata).context(path.display())
}

/// Parses runs and reports validation findings; errors fail the job,
/// warnings go to standard error.
pub(crate) fn runs(paths: &[std::path::PathBuf], task: Task, rank_limit: u32) -> Result<Vec<RankedRun>, CliError> {
    if paths.is_empty() {
        return Err(CliError::invalid("no run files given"));
    }
    let opts = RunParseOptions::new(task).with_rank_limit(rank_limit);
    let mut out: Vec<RankedRun> = Vec::with_capacity(paths.len());
    let mut tags = BTreeSet::new();
    for p in paths {
        let run = parse_retrieval_run(open(p)?, &opts).context(p.display())?;
        let report = validate_run(&run, None);
        for f in &report.findings {
            match f.severity {
                Severity::Error => return Err(CliError::invalid(format!("{}: {}", p.display(), f.message))),
                Severity::Warning => eprintln!("warning: {}: {}", p.display(), f.message),
            }
        }
        if !tags.insert(run.run_tag.clone()) {
            return Err(CliError::invalid(format!("{}: run tag {} used by more than one file", p.display(), run.run_tag)));
        }
        out.push(run);
    }
    Ok(out)
}

pub(crate) fn activity_set(path: &Path, kind: InstanceSetKind) -> Result<ActivityInstanceSet, CliError> {
    parse_activity_set(open(path)?, kind).context(path.display())
}

pub(crate) fn answer_sheet(path: &Path) -> Result<AnswerSheet, CliError> {
    parse_answer_sheet(open(path)?).context(path.display())
}

pub(crate) fn ratings(path: &Path) -> Result<DaRatingFile, CliError> {
    parse_da_ratings(open(path)?).context(path.display())
}

/// Non-empty, non-comment lines.
pub(crate) fn lines(path: &Path) -> Result<Vec<String>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::invalid(format!("cannot read {}: {e}", path.display())))?;
    Ok(text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(String::from)
        .collect())
}

/// Two-column tab-separated map, e.g. run tag to team.
pub(crate) fn pairs(path: &Path) -> Result<BTreeMap<String, String>, CliError> {
    let mut out = BTreeMap::new();
    for (i, line) in lines(path)?.iter().enumerate() {
        let (k, v) = line
            .split_once('\t')
            .ok_or_else(|| CliError::invalid(format!("{}: entry {}: expected two tab-separated fields", path.display(), i + 1)))?;
        if out.insert(k.trim().to_string(), v.trim().to_string()).is_some() {
            return Err(CliError::invalid(format!("{}: duplicate key {k}", path.display())));
        }
    }
    Ok(out)
}

/// Default team of a run: the tag up to its first underscore.
pub(crate) fn default_team(run_tag: &str) -> String {
    run_tag.split('_').next().unwrap_or(run_tag).to_string()
}
