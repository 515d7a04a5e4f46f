//! Command drivers. Each reads its inputs from a resolved [`JobConfig`],
//! writes CSV/SVG/JSON artifacts to the output directory and returns the
//! paths it wrote.

mod actev;
mod avs;
mod compare;
mod da;
mod dsdi;
mod dvu;
mod gen;
mod msum;
mod plot;
mod pool;

use std::path::PathBuf;

use serde::Serialize;

use crate::config::JobConfig;
use crate::error::CliError;
use crate::report::{Output, ScoreReport};
use crate::JobKind;

pub use actev::score_actev;
pub use avs::score_avs;
pub use compare::compare;
pub use da::da;
pub use dsdi::score_dsdi;
pub use dvu::score_dvu;
pub use gen::gen;
pub use msum::score_msum;
pub use plot::det_plot;
pub use pool::pool;

pub fn dispatch(kind: JobKind, config: &JobConfig) -> Result<Vec<PathBuf>, CliError> {
    let mut out = Output::create(&config.output_dir())?;
    match kind {
        JobKind::Pool => pool(config, &mut out)?,
        JobKind::ScoreAvs => score_avs(config, &mut out)?,
        JobKind::ScoreActev => score_actev(config, &mut out)?,
        JobKind::ScoreDvu => score_dvu(config, &mut out)?,
        JobKind::ScoreDsdi => score_dsdi(config, &mut out)?,
        JobKind::ScoreMsum => score_msum(config, &mut out)?,
        JobKind::Da => da(config, &mut out)?,
        JobKind::Compare => compare(config, &mut out)?,
        JobKind::DetPlot => det_plot(config, &mut out)?,
        JobKind::Gen(g) => gen(g, config, &mut out)?,
    }
    Ok(out.written().to_vec())
}

fn write_report<T: Serialize>(out: &mut Output, kind: JobKind, config: &JobConfig, results: T) -> Result<(), CliError> {
    let report = ScoreReport::new(kind.name(), config, results)?;
    out.write("report.json", report.to_json()?)?;
    Ok(())
}

/// Median of a nonempty slice; the mean of the middle pair for even sizes.
fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 { values[n / 2] } else { (values[n / 2 - 1] + values[n / 2]) / 2.0 }
}

/// File-name-safe form of an identifier.
fn file_stem(id: &str) -> String {
    id.chars().map(|c| if c.is_ascii_alphanumeric() || "-_.".contains(c) { c } else { '_' }).collect()
}

fn stem_of(path: &std::path::Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| path.display().to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn medians() {
        assert_eq!(median(&mut [3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&mut [4.0, 1.0, 2.0, 3.0]), 2.5);
    }

    #[test]
    fn stems() {
        assert_eq!(file_stem("person opens/door"), "person_opens_door");
    }
}
