use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::assignment::max_weight_assignment;
use super::mode::min_mode;
use super::CongruenceParams;
use crate::error::{Error, Result};
use crate::io::ActivityInstanceSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AlignMode {
    /// Activity detection: temporal localization only.
    #[serde(rename = "AD")]
    Ad,
    /// Activity and object detection: temporal plus object congruence.
    #[serde(rename = "AOD")]
    Aod,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchedPair {
    pub ref_index: usize,
    pub sys_index: usize,
    pub temporal_iou: f64,
    /// Pair weight normalized to (1, 2): 1 for the match itself plus the
    /// scaled confidence and tie-breaking terms.
    pub kernel: f64,
    /// minMODE of the pair (AOD only).
    pub min_mode: Option<f64>,
}

/// One-to-one mapping between the reference and system instances of one activity.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Alignment {
    pub activity: String,
    /// Sorted by reference index.
    pub pairs: Vec<MatchedPair>,
    pub unmatched_ref: Vec<usize>,
    pub unmatched_sys: Vec<usize>,
}

/// Rank of each system confidence among the distinct confidences of the
/// set, ascending from 1. Equal confidences share a rank.
pub fn confidence_ranks(system: &ActivityInstanceSet) -> Vec<usize> {
    let mut distinct: Vec<f64> = system.instances.iter().map(|i| i.confidence()).collect();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    system
        .instances
        .iter()
        .map(|i| distinct.partition_point(|&c| c < i.confidence()) + 1)
        .collect()
}

fn single_label(set: &ActivityInstanceSet, what: &str) -> Result<Option<String>> {
    let labels = set.activities();
    match labels.len() {
        0 => Ok(None),
        1 => Ok(labels.into_iter().next().map(str::to_string)),
        _ => Err(Error::invalid(format!(
            "{what} set mixes activities: {}",
            labels.into_iter().collect::<Vec<_>>().join(", ")
        ))),
    }
}

/// Aligns the instances of one activity.
///
/// A pair is eligible when both instances lie in the same video and their
/// temporal IoU reaches `min_temporal_iou` (any shared frame at 0); in AOD
/// mode the pair's object congruence `1 - minMODE` must also exceed
/// `min_congruence`. Among eligible pairs the alignment is an exact
/// maximum-weight matching under a tiered objective: the number of matched
/// pairs first, then the confidence ranks of the matched system instances,
/// then the weighted temporal IoU (plus congruence in AOD).
///
/// Ranking confidence above the temporal terms means the matched set has the
/// most system instances at or above every threshold, so the error counts
/// at each threshold are the best any one-to-one mapping can reach.
pub fn align_instances(
    reference: &ActivityInstanceSet,
    system: &ActivityInstanceSet,
    params: &CongruenceParams,
    mode: AlignMode,
) -> Result<Alignment> {
    let ref_label = single_label(reference, "reference")?;
    let sys_label = single_label(system, "system")?;
    let activity = match (ref_label, sys_label) {
        (Some(a), Some(b)) if a != b => {
            return Err(Error::invalid(format!("reference activity {a} differs from system activity {b}")))
        }
        (Some(a), _) | (None, Some(a)) => a,
        (None, None) => String::new(),
    };

    let n_ref = reference.instances.len();
    let n_sys = system.instances.len();
    let ranks = confidence_ranks(system);
    let distinct = ranks.iter().copied().max().unwrap_or(0);
    let k = n_ref.min(n_sys);
    let count_tier = (k * distinct + 1) as f64;
    let congruence_weight = if mode == AlignMode::Aod { params.congruence_weight } else { 0.0 };
    let tie_scale = match (params.tiou_weight + congruence_weight) * (k + 1) as f64 {
        s if s > 0.0 => s,
        _ => 1.0,
    };

    // Eligible pairs only ever join instances of the same video.
    let mut videos: BTreeMap<&str, (Vec<usize>, Vec<usize>)> = BTreeMap::new();
    for (i, r) in reference.instances.iter().enumerate() {
        videos.entry(r.video_id.as_str()).or_default().0.push(i);
    }
    for (j, s) in system.instances.iter().enumerate() {
        videos.entry(s.video_id.as_str()).or_default().1.push(j);
    }

    let mut pairs = Vec::new();
    for (refs, syss) in videos.values() {
        if refs.is_empty() || syss.is_empty() {
            continue;
        }
        let mut info: BTreeMap<(usize, usize), (f64, Option<f64>)> = BTreeMap::new();
        let weights: Vec<Vec<Option<f64>>> = refs
            .iter()
            .map(|&i| {
                let r = &reference.instances[i];
                syss.iter()
                    .map(|&j| {
                        let s = &system.instances[j];
                        r.overlap(s)?;
                        let tiou = r.temporal_iou(s);
                        if tiou < params.min_temporal_iou {
                            return None;
                        }
                        let (congruence, mm) = match mode {
                            AlignMode::Ad => (0.0, None),
                            AlignMode::Aod => {
                                let mm = min_mode(r, s, params);
                                let c = mm.congruence();
                                if c <= params.min_congruence {
                                    return None;
                                }
                                (c, Some(mm.value))
                            }
                        };
                        info.insert((i, j), (tiou, mm));
                        let tie = (params.tiou_weight * tiou + congruence_weight * congruence) / tie_scale;
                        Some(count_tier + ranks[j] as f64 + tie)
                    })
                    .collect()
            })
            .collect();
        for (row, col) in max_weight_assignment(&weights).into_iter().enumerate() {
            let Some(col) = col else { continue };
            let (i, j) = (refs[row], syss[col]);
            let (tiou, mm) = info[&(i, j)];
            pairs.push(MatchedPair {
                ref_index: i,
                sys_index: j,
                temporal_iou: tiou,
                kernel: weights[row][col].unwrap() / count_tier,
                min_mode: mm,
            });
        }
    }
    pairs.sort_by_key(|p| p.ref_index);

    let mut ref_used = vec![false; n_ref];
    let mut sys_used = vec![false; n_sys];
    for p in &pairs {
        ref_used[p.ref_index] = true;
        sys_used[p.sys_index] = true;
    }
    Ok(Alignment {
        activity,
        pairs,
        unmatched_ref: (0..n_ref).filter(|&i| !ref_used[i]).collect(),
        unmatched_sys: (0..n_sys).filter(|&j| !sys_used[j]).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::ActivityInstance;

    fn set(spans: &[(u64, u64, f64)]) -> ActivityInstanceSet {
        ActivityInstanceSet {
            video_durations: BTreeMap::from([("v".to_string(), 10.0)]),
            instances: spans
                .iter()
                .map(|&(b, e, c)| ActivityInstance {
                    activity: "walk".into(),
                    video_id: "v".into(),
                    begin_frame: b,
                    end_frame: e,
                    confidence: Some(c),
                    objects: Default::default(),
                })
                .collect(),
        }
    }

    #[test]
    fn overlapping_pair_matches() {
        let a = align_instances(&set(&[(10, 50, 1.0)]), &set(&[(30, 70, 0.8)]), &CongruenceParams::default(), AlignMode::Ad)
            .unwrap();
        assert_eq!(a.pairs.len(), 1);
        assert!((a.pairs[0].temporal_iou - 21.0 / 61.0).abs() < 1e-15);
        assert!((a.pairs[0].temporal_iou - 0.3443).abs() < 1e-4);
        assert!(a.pairs[0].kernel > 1.0 && a.pairs[0].kernel < 2.0);
    }

    #[test]
    fn disjoint_spans_stay_unmatched() {
        let a = align_instances(&set(&[(10, 50, 1.0)]), &set(&[(51, 70, 0.8)]), &CongruenceParams::default(), AlignMode::Ad)
            .unwrap();
        assert!(a.pairs.is_empty());
        assert_eq!((a.unmatched_ref.len(), a.unmatched_sys.len()), (1, 1));
    }

    #[test]
    fn other_video_never_matches() {
        let mut sys = set(&[(10, 50, 0.8)]);
        sys.instances[0].video_id = "w".into();
        sys.video_durations.insert("w".into(), 1.0);
        let a = align_instances(&set(&[(10, 50, 1.0)]), &sys, &CongruenceParams::default(), AlignMode::Ad).unwrap();
        assert!(a.pairs.is_empty());
    }

    #[test]
    fn temporal_threshold() {
        let p = CongruenceParams { min_temporal_iou: 0.5, ..Default::default() };
        let a = align_instances(&set(&[(10, 50, 1.0)]), &set(&[(30, 70, 0.8)]), &p, AlignMode::Ad).unwrap();
        assert!(a.pairs.is_empty());
    }

    #[test]
    fn cardinality_before_confidence() {
        // s0 overlaps both references, s1 only r0: matching both references
        // forces s0 onto r1 even though s0 is the less confident one.
        let r = set(&[(0, 10, 1.0), (20, 30, 1.0)]);
        let s = set(&[(5, 25, 0.1), (0, 10, 0.9)]);
        let a = align_instances(&r, &s, &CongruenceParams::default(), AlignMode::Ad).unwrap();
        assert_eq!(a.pairs.len(), 2);
        assert_eq!((a.pairs[0].sys_index, a.pairs[1].sys_index), (1, 0));
    }

    #[test]
    fn higher_confidence_preferred_over_better_overlap() {
        let r = set(&[(0, 100, 1.0)]);
        let s = set(&[(0, 100, 0.2), (90, 200, 0.9)]);
        let a = align_instances(&r, &s, &CongruenceParams::default(), AlignMode::Ad).unwrap();
        assert_eq!(a.pairs[0].sys_index, 1);
    }

    #[test]
    fn mixed_labels_rejected() {
        let mut r = set(&[(0, 1, 1.0), (2, 3, 1.0)]);
        r.instances[1].activity = "run".into();
        assert!(align_instances(&r, &set(&[]), &CongruenceParams::default(), AlignMode::Ad).is_err());
        let mut s = set(&[(0, 1, 1.0)]);
        s.instances[0].activity = "run".into();
        assert!(align_instances(&set(&[(0, 1, 1.0)]), &s, &CongruenceParams::default(), AlignMode::Ad).is_err());
    }

    #[test]
    fn ranks_share_ties() {
        assert_eq!(confidence_ranks(&set(&[(0, 1, 0.5), (0, 1, 0.2), (0, 1, 0.5), (0, 1, 0.9)])), [2, 1, 2, 3]);
    }

    #[test]
    fn aod_needs_object_congruence() {
        let r = set(&[(0, 10, 1.0)]);
        let s = set(&[(0, 10, 0.7)]);
        let a = align_instances(&r, &s, &CongruenceParams::default(), AlignMode::Aod).unwrap();
        assert!(a.pairs.is_empty(), "reference without boxes cannot be matched in AOD");
    }
}
