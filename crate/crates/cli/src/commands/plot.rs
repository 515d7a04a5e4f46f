use campaign_eval::plot::det_svg;

use super::{stem_of, write_report};
use crate::config::JobConfig;
use crate::error::CliError;
use crate::load;
use crate::report::Output;
use crate::JobKind;

/// Reads the `rfa` and `pmiss` columns of a DET CSV.
fn read_curve(path: &std::path::Path) -> Result<Vec<(f64, f64)>, CliError> {
    let bad = |m: String| CliError::invalid(format!("{}: {m}", path.display()));
    let mut reader = csv::Reader::from_reader(load::open(path)?);
    let headers = reader.headers().map_err(|e| bad(e.to_string()))?.clone();
    let find = |name: &str| headers.iter().position(|h| h == name).ok_or_else(|| bad(format!("no {name} column")));
    let (xi, yi) = (find("rfa")?, find("pmiss")?);
    let mut points = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        let get = |k: usize| -> Result<f64, CliError> {
            rec.get(k).unwrap_or("").parse().map_err(|_| bad(format!("record {}: bad number", i + 1)))
        };
        points.push((get(xi)?, get(yi)?));
    }
    Ok(points)
}

pub fn det_plot(config: &JobConfig, out: &mut Output) -> Result<(), CliError> {
    if config.inputs.curves.is_empty() {
        return Err(CliError::invalid("no curve files given"));
    }
    let curves = config
        .inputs
        .curves
        .iter()
        .map(|p| Ok((stem_of(p), read_curve(p)?)))
        .collect::<Result<Vec<_>, CliError>>()?;
    let title = config.plot.title.clone().unwrap_or_else(|| "DET curves".into());
    out.write("det.svg", det_svg(&title, &curves, config.plot.x_max))?;
    let names: Vec<&String> = curves.iter().map(|(n, _)| n).collect();
    write_report(out, JobKind::DetPlot, config, names)
}
