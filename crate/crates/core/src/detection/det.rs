use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::align::{align_instances, AlignMode, Alignment};
use super::intervals::IntervalSet;
use super::CongruenceParams;
use crate::error::{Error, Result};
use crate::io::ActivityInstanceSet;

pub const DEFAULT_FRAME_RATE: f64 = 30.0;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub cd: usize,
    pub md: usize,
    pub fa: usize,
}

/// Error counts at decision threshold `tau` given a fixed alignment.
///
/// A matched pair whose system confidence reaches `tau` is a correct
/// detection, otherwise its reference is missed. Unmatched system instances
/// at or above `tau` are false alarms.
pub fn confusion_counts(alignment: &Alignment, sys_confidences: &[f64], tau: f64) -> Confusion {
    let n_ref = alignment.pairs.len() + alignment.unmatched_ref.len();
    let cd = alignment.pairs.iter().filter(|p| sys_confidences[p.sys_index] >= tau).count();
    let fa = alignment.unmatched_sys.iter().filter(|&&j| sys_confidences[j] >= tau).count();
    Confusion { cd, md: n_ref - cd, fa }
}

pub fn pmiss(n_md: usize, n_true: usize) -> Result<f64> {
    if n_true == 0 {
        return Err(Error::invalid("Pmiss undefined without reference instances"));
    }
    Ok(n_md as f64 / n_true as f64)
}

/// False alarms per minute of video.
pub fn rfa(n_fa: usize, minutes: f64) -> Result<f64> {
    if !(minutes > 0.0) {
        return Err(Error::invalid(format!("video duration must be positive, got {minutes} minutes")));
    }
    Ok(n_fa as f64 / minutes)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TfaPooling {
    /// One ratio over all videos: summed false-alarm time over summed non-target time.
    #[default]
    Corpus,
    /// Mean of per-video ratios over videos with non-target time.
    PerVideo,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TfaOptions {
    pub frame_rate: f64,
    pub pooling: TfaPooling,
}

impl Default for TfaOptions {
    fn default() -> Self {
        TfaOptions { frame_rate: DEFAULT_FRAME_RATE, pooling: TfaPooling::Corpus }
    }
}

fn video_minutes(reference: &ActivityInstanceSet, system: &ActivityInstanceSet) -> BTreeMap<String, f64> {
    let mut minutes = system.video_durations.clone();
    minutes.extend(reference.video_durations.iter().map(|(k, v)| (k.clone(), *v)));
    minutes
}

/// Time-based false alarm: the fraction of non-target time (frames outside
/// every reference instance) that system instances at or above `tau` cover.
pub fn tfa(reference: &ActivityInstanceSet, system: &ActivityInstanceSet, tau: f64, options: &TfaOptions) -> Result<f64> {
    let minutes = video_minutes(reference, system);
    let mut fa_frames = 0u64;
    let mut non_target = 0u64;
    let mut ratios = Vec::new();
    for (video, mins) in &minutes {
        let total = (mins * 60.0 * options.frame_rate).round() as u64;
        if total == 0 {
            continue;
        }
        let spans = |set: &ActivityInstanceSet, keep: &dyn Fn(f64) -> bool| {
            IntervalSet::from_spans(
                set.instances
                    .iter()
                    .filter(|i| &i.video_id == video && keep(i.confidence()))
                    .map(|i| (i.begin_frame, i.end_frame))
                    .collect(),
            )
            .clip(0, total - 1)
        };
        let target = spans(reference, &|_| true);
        let positive = spans(system, &|c| c >= tau);
        let fa = positive.len() - positive.intersection_len(&target);
        let nt = total - target.len();
        fa_frames += fa;
        non_target += nt;
        if nt > 0 {
            ratios.push(fa as f64 / nt as f64);
        }
    }
    if non_target == 0 {
        return Err(Error::invalid("no non-target time in the scored videos"));
    }
    Ok(match options.pooling {
        TfaPooling::Corpus => fa_frames as f64 / non_target as f64,
        TfaPooling::PerVideo => ratios.iter().sum::<f64>() / ratios.len() as f64,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetPoint {
    /// Decision threshold; `+inf` keeps no system instance.
    pub threshold: f64,
    pub pmiss: f64,
    pub rfa: f64,
    pub tfa: Option<f64>,
}

/// Operating points of one activity, thresholds strictly decreasing. Along
/// the list RFA never decreases and Pmiss never increases.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetCurve {
    pub activity: String,
    pub points: Vec<DetPoint>,
    pub n_true: usize,
    pub minutes: f64,
}

impl DetCurve {
    /// Right-continuous step function Pmiss(rfa): the Pmiss of the last
    /// point with RFA at most `x`, or 1 left of every point.
    pub fn pmiss_step(&self, x: f64) -> f64 {
        let idx = self.points.partition_point(|p| p.rfa <= x);
        if idx == 0 { 1.0 } else { self.points[idx - 1].pmiss }
    }

    /// Point selected by [`pmiss_at_rfa`].
    pub fn operating_point(&self, target_rfa: f64) -> Option<&DetPoint> {
        let idx = self.points.partition_point(|p| p.rfa <= target_rfa);
        idx.checked_sub(1).map(|i| &self.points[i])
    }

    pub fn to_csv(&self) -> String {
        let with_tfa = self.points.iter().any(|p| p.tfa.is_some());
        let mut out = String::from(if with_tfa { "threshold,pmiss,rfa,tfa\n" } else { "threshold,pmiss,rfa\n" });
        for p in &self.points {
            let thr = if p.threshold.is_infinite() { "inf".to_string() } else { format!("{}", p.threshold) };
            out.push_str(&format!("{thr},{},{}", p.pmiss, p.rfa));
            if with_tfa {
                out.push_str(&format!(",{}", p.tfa.unwrap_or(f64::NAN)));
            }
            out.push('\n');
        }
        out
    }
}

/// Aligns once, then sweeps the threshold over `+inf` and every distinct
/// system confidence in descending order.
pub fn det_curve(
    reference: &ActivityInstanceSet,
    system: &ActivityInstanceSet,
    params: &CongruenceParams,
    mode: AlignMode,
    tfa_options: Option<&TfaOptions>,
) -> Result<DetCurve> {
    det_curve_with_alignment(reference, system, params, mode, tfa_options).map(|(c, _)| c)
}

/// [`det_curve`] that also returns the alignment it swept.
pub fn det_curve_with_alignment(
    reference: &ActivityInstanceSet,
    system: &ActivityInstanceSet,
    params: &CongruenceParams,
    mode: AlignMode,
    tfa_options: Option<&TfaOptions>,
) -> Result<(DetCurve, Alignment)> {
    let alignment = align_instances(reference, system, params, mode)?;
    let n_true = reference.instances.len();
    if n_true == 0 {
        return Err(Error::invalid(format!("activity {} has no reference instances", alignment.activity)));
    }
    let minutes: f64 = video_minutes(reference, system).values().sum();
    let confidences: Vec<f64> = system.instances.iter().map(|i| i.confidence()).collect();
    let mut thresholds = confidences.clone();
    thresholds.sort_by(|a, b| b.total_cmp(a));
    thresholds.dedup();

    let mut points = Vec::with_capacity(thresholds.len() + 1);
    for tau in std::iter::once(f64::INFINITY).chain(thresholds) {
        let c = confusion_counts(&alignment, &confidences, tau);
        points.push(DetPoint {
            threshold: tau,
            pmiss: pmiss(c.md, n_true)?,
            rfa: rfa(c.fa, minutes)?,
            tfa: tfa_options.map(|o| tfa(reference, system, tau, o)).transpose()?,
        });
    }
    let activity = alignment.activity.clone();
    Ok((DetCurve { activity, points, n_true, minutes }, alignment))
}

/// Pmiss at a false-alarm rate: the last point with RFA at most the target,
/// 1.0 if none qualifies.
pub fn pmiss_at_rfa(curve: &DetCurve, target_rfa: f64) -> Result<f64> {
    if curve.points.is_empty() {
        return Err(Error::invalid("empty DET curve"));
    }
    if !(target_rfa >= 0.0) {
        return Err(Error::invalid(format!("target RFA must be nonnegative, got {target_rfa}")));
    }
    Ok(curve.pmiss_step(target_rfa))
}

/// Normalized partial area under the DET curve, `(1/a) * integral_0^a Pmiss(x) dx`
/// over the step function of [`DetCurve::pmiss_step`]. 0 is perfect.
pub fn naudc(curve: &DetCurve, a: f64) -> Result<f64> {
    if !(a > 0.0) {
        return Err(Error::invalid(format!("nAUDC bound must be positive, got {a}")));
    }
    if curve.points.is_empty() {
        return Err(Error::invalid("empty DET curve"));
    }
    let mut breaks: Vec<f64> = std::iter::once(0.0)
        .chain(curve.points.iter().map(|p| p.rfa).filter(|&x| x > 0.0 && x < a))
        .collect();
    breaks.dedup();
    breaks.push(a);
    let area: f64 = breaks.windows(2).map(|w| (w[1] - w[0]) * curve.pmiss_step(w[0])).sum();
    Ok((area / a).clamp(0.0, 1.0))
}

/// Mean minMODE of the correctly detected pairs at the operating point
/// chosen for `target_rfa`. `None` outside AOD or without detections there.
pub fn nmode_at_rfa(curve: &DetCurve, alignment: &Alignment, sys_confidences: &[f64], target_rfa: f64) -> Option<f64> {
    let tau = curve.operating_point(target_rfa)?.threshold;
    let modes: Vec<f64> = alignment
        .pairs
        .iter()
        .filter(|p| sys_confidences[p.sys_index] >= tau)
        .filter_map(|p| p.min_mode)
        .collect();
    (!modes.is_empty()).then(|| modes.iter().sum::<f64>() / modes.len() as f64)
}

/// Mean of several curves' Pmiss step functions, evaluated at every RFA
/// breakpoint of any curve. Returns `(rfa, mean pmiss)` pairs.
pub fn mean_curve(curves: &[DetCurve]) -> Vec<(f64, f64)> {
    if curves.is_empty() {
        return Vec::new();
    }
    let mut xs: Vec<f64> = curves.iter().flat_map(|c| c.points.iter().map(|p| p.rfa)).collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    xs.into_iter()
        .map(|x| (x, curves.iter().map(|c| c.pmiss_step(x)).sum::<f64>() / curves.len() as f64))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActivityAggregate {
    pub mean: f64,
    pub included: Vec<String>,
    /// Activities without reference instances.
    pub excluded: Vec<String>,
}

/// Unweighted mean over activities. `None` marks an activity without
/// reference instances; it is left out and listed.
pub fn aggregate_activities(values: &[(String, Option<f64>)]) -> Result<ActivityAggregate> {
    let included: Vec<(&String, f64)> = values.iter().filter_map(|(a, v)| v.map(|v| (a, v))).collect();
    if included.is_empty() {
        return Err(Error::invalid("no activity has reference instances"));
    }
    Ok(ActivityAggregate {
        mean: included.iter().map(|(_, v)| v).sum::<f64>() / included.len() as f64,
        included: included.iter().map(|(a, _)| (*a).clone()).collect(),
        excluded: values.iter().filter(|(_, v)| v.is_none()).map(|(a, _)| a.clone()).collect(),
    })
}
