use std::collections::BTreeSet;

use campaign_eval::detection::{
    aggregate_activities, det_curve_with_alignment, mean_curve, naudc, nmode_at_rfa, pmiss_at_rfa, ActivityAggregate,
    AlignMode, DetCurve, TfaOptions,
};
use campaign_eval::io::InstanceSetKind;
use campaign_eval::plot::det_svg;
use rayon::prelude::*;
use serde::Serialize;

use super::{file_stem, write_report};
use crate::config::JobConfig;
use crate::error::{CliError, Context};
use crate::load;
use crate::report::{csv_line, num, Output};
use crate::JobKind;

#[derive(Serialize)]
struct ActivityResult {
    activity: String,
    n_true: usize,
    n_sys: usize,
    pmiss_at_rfa: Option<f64>,
    naudc: Option<f64>,
    nmode_at_rfa: Option<f64>,
    #[serde(skip)]
    curve: Option<DetCurve>,
}

#[derive(Serialize)]
struct ActevResults {
    mode: AlignMode,
    rfa_target: f64,
    audc_bound: f64,
    mode_rfa_target: f64,
    pmiss_at_rfa: ActivityAggregate,
    naudc: ActivityAggregate,
    #[serde(skip_serializing_if = "Option::is_none")]
    nmode_at_rfa: Option<ActivityAggregate>,
    activities: Vec<ActivityResult>,
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

pub fn score_actev(config: &JobConfig, out: &mut Output) -> Result<(), CliError> {
    let d = &config.detection;
    let reference = load::activity_set(load::require(&config.inputs.reference, "reference")?, InstanceSetKind::Reference)?;
    let system = load::activity_set(load::require(&config.inputs.system, "system")?, InstanceSetKind::System)?;
    let activities: BTreeSet<&str> = reference.activities().into_iter().chain(system.activities()).collect();
    if activities.is_empty() {
        return Err(CliError::invalid("no activity instances in reference or system"));
    }
    let tfa = d.tfa.then_some(TfaOptions { frame_rate: d.frame_rate, pooling: d.tfa_pooling });

    let results: Vec<ActivityResult> = activities
        .par_iter()
        .map(|&activity| {
            let r = reference.restrict(activity);
            let s = system.restrict(activity);
            let mut res = ActivityResult {
                activity: activity.to_string(),
                n_true: r.instances.len(),
                n_sys: s.instances.len(),
                pmiss_at_rfa: None,
                naudc: None,
                nmode_at_rfa: None,
                curve: None,
            };
            if r.instances.is_empty() {
                return Ok(res);
            }
            let (curve, alignment) =
                det_curve_with_alignment(&r, &s, &d.congruence, d.mode, tfa.as_ref()).context(activity)?;
            res.pmiss_at_rfa = Some(pmiss_at_rfa(&curve, d.rfa_target)?);
            res.naudc = Some(naudc(&curve, d.audc_bound)?);
            if d.mode == AlignMode::Aod {
                let conf: Vec<f64> = s.instances.iter().map(|i| i.confidence()).collect();
                res.nmode_at_rfa = nmode_at_rfa(&curve, &alignment, &conf, d.mode_rfa_target);
            }
            res.curve = Some(curve);
            Ok(res)
        })
        .collect::<Result<_, CliError>>()?;

    let column = |f: fn(&ActivityResult) -> Option<f64>| -> Vec<(String, Option<f64>)> {
        results.iter().map(|r| (r.activity.clone(), f(r))).collect()
    };
    let pmiss_agg = aggregate_activities(&column(|r| r.pmiss_at_rfa))?;
    let naudc_agg = aggregate_activities(&column(|r| r.naudc))?;
    let nmode_agg = if d.mode == AlignMode::Aod { aggregate_activities(&column(|r| r.nmode_at_rfa)).ok() } else { None };

    let mut csv = csv_line(["activity", "n_true", "n_sys", "pmiss_at_rfa", "naudc", "nmode_at_rfa"]);
    for r in &results {
        csv.push_str(&csv_line([
            r.activity.clone(),
            r.n_true.to_string(),
            r.n_sys.to_string(),
            opt(r.pmiss_at_rfa),
            opt(r.naudc),
            opt(r.nmode_at_rfa),
        ]));
    }
    out.write("actev_activities.csv", csv)?;

    let mut summary = csv_line(["metric", "mean", "activities", "excluded"]);
    let rfa = d.rfa_target;
    let mut rows = vec![(format!("pmiss@{rfa}rfa"), &pmiss_agg), (format!("naudc@{}rfa", d.audc_bound), &naudc_agg)];
    if let Some(a) = &nmode_agg {
        rows.push((format!("nmode@{}rfa", d.mode_rfa_target), a));
    }
    for (name, a) in rows {
        summary.push_str(&csv_line([name, num(a.mean), a.included.len().to_string(), a.excluded.join(" ")]));
    }
    out.write("actev_summary.csv", summary)?;

    let curves: Vec<&DetCurve> = results.iter().filter_map(|r| r.curve.as_ref()).collect();
    let x_max = d.audc_bound.max(d.rfa_target) * 5.0;
    for c in &curves {
        let stem = file_stem(&c.activity);
        out.write(&format!("det/{stem}.csv"), c.to_csv())?;
        let pts = c.points.iter().map(|p| (p.rfa, p.pmiss)).collect();
        out.write(&format!("det/{stem}.svg"), det_svg(&c.activity, &[(c.activity.clone(), pts)], x_max))?;
    }
    let owned: Vec<DetCurve> = curves.iter().map(|c| (*c).clone()).collect();
    let mean = mean_curve(&owned);
    let mut mean_csv = csv_line(["rfa", "pmiss"]);
    for (x, y) in &mean {
        mean_csv.push_str(&csv_line([num(*x), num(*y)]));
    }
    out.write("det/mean.csv", mean_csv)?;
    out.write("det/mean.svg", det_svg("Mean DET curve", &[("mean".to_string(), mean)], x_max))?;

    let report = ActevResults {
        mode: d.mode,
        rfa_target: d.rfa_target,
        audc_bound: d.audc_bound,
        mode_rfa_target: d.mode_rfa_target,
        pmiss_at_rfa: pmiss_agg,
        naudc: naudc_agg,
        nmode_at_rfa: nmode_agg,
        activities: results,
    };
    write_report(out, JobKind::ScoreActev, config, report)
}
