//! Normalized multiple-object detection error (N_MODE) for one instance pair.
//!
//! Only frames inside the temporal overlap of the reference and system
//! instances are scored. In each frame, reference and system boxes are
//! matched one-to-one (maximum cardinality, then maximum IoU) among pairs
//! with spatial IoU of at least `spatial_iou`; system boxes below the object
//! confidence threshold are ignored. Then
//!
//! ```text
//! N_MODE(tau) = sum_t (C_MD * MD_t(tau) + C_FA * FA_t(tau)) / sum_t N_R(t)
//! ```
//!
//! and minMODE is the minimum over every distinct object confidence, plus a
//! threshold above all of them (no system boxes kept).

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::assignment::max_weight_assignment;
use super::CongruenceParams;
use crate::error::{Error, Result};
use crate::io::{ActivityInstance, ObjectBox};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrameCounts {
    pub md: usize,
    pub fa: usize,
    pub cd: usize,
}

/// Matches the boxes of one frame at object threshold `tau_obj`.
pub fn frame_mode(ref_boxes: &[ObjectBox], sys_boxes: &[ObjectBox], tau_obj: f64, params: &CongruenceParams) -> FrameCounts {
    let kept: Vec<&ObjectBox> = sys_boxes.iter().filter(|b| b.confidence() >= tau_obj).collect();
    let k = ref_boxes.len().min(kept.len());
    let weights: Vec<Vec<Option<f64>>> = ref_boxes
        .iter()
        .map(|r| {
            kept.iter()
                .map(|s| {
                    let iou = r.bbox.iou(&s.bbox);
                    (iou >= params.spatial_iou && iou > 0.0).then_some((k + 1) as f64 + iou)
                })
                .collect()
        })
        .collect();
    let cd = max_weight_assignment(&weights).iter().flatten().count();
    FrameCounts { md: ref_boxes.len() - cd, fa: kept.len() - cd, cd }
}

fn overlap_frames<'a>(
    reference: &'a ActivityInstance,
    system: &'a ActivityInstance,
) -> Vec<(&'a [ObjectBox], &'a [ObjectBox])> {
    let Some((lo, hi)) = reference.overlap(system) else { return Vec::new() };
    let frames: BTreeSet<u64> = reference
        .objects
        .range(lo..=hi)
        .chain(system.objects.range(lo..=hi))
        .map(|(f, _)| *f)
        .collect();
    let empty: &[ObjectBox] = &[];
    frames
        .into_iter()
        .map(|f| {
            (
                reference.objects.get(&f).map_or(empty, Vec::as_slice),
                system.objects.get(&f).map_or(empty, Vec::as_slice),
            )
        })
        .collect()
}

fn n_mode_over(frames: &[(&[ObjectBox], &[ObjectBox])], tau_obj: f64, params: &CongruenceParams) -> Option<f64> {
    let n_ref: usize = frames.iter().map(|(r, _)| r.len()).sum();
    if n_ref == 0 {
        return None;
    }
    let cost: f64 = frames
        .iter()
        .map(|(r, s)| {
            let c = frame_mode(r, s, tau_obj, params);
            params.cost_md * c.md as f64 + params.cost_fa * c.fa as f64
        })
        .sum();
    Some(cost / n_ref as f64)
}

/// N_MODE of an instance pair at one object threshold. Fails when the
/// overlap frames hold no reference boxes.
pub fn n_mode(reference: &ActivityInstance, system: &ActivityInstance, tau_obj: f64, params: &CongruenceParams) -> Result<f64> {
    n_mode_over(&overlap_frames(reference, system), tau_obj, params)
        .ok_or_else(|| Error::invalid("no reference boxes in the overlap frames"))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MinMode {
    /// Minimum N_MODE; 1.0 when degenerate.
    pub value: f64,
    /// Object threshold attaining the minimum (largest such threshold).
    pub threshold: f64,
    /// No reference boxes over the overlap frames.
    pub degenerate: bool,
}

impl MinMode {
    /// Congruence term `1 - minMODE`, clamped to [0, 1]; 0 when degenerate.
    pub fn congruence(&self) -> f64 {
        if self.degenerate {
            0.0
        } else {
            1.0 - self.value.clamp(0.0, 1.0)
        }
    }
}

/// Minimum N_MODE over object thresholds.
pub fn min_mode(reference: &ActivityInstance, system: &ActivityInstance, params: &CongruenceParams) -> MinMode {
    let frames = overlap_frames(reference, system);
    let mut thresholds: Vec<f64> = frames
        .iter()
        .flat_map(|(_, s)| s.iter().map(ObjectBox::confidence))
        .collect();
    thresholds.sort_by(|a, b| b.total_cmp(a));
    thresholds.dedup();
    let mut best = MinMode { value: 1.0, threshold: f64::INFINITY, degenerate: true };
    for tau in std::iter::once(f64::INFINITY).chain(thresholds) {
        let Some(v) = n_mode_over(&frames, tau, params) else { return best };
        if best.degenerate || v < best.value {
            best = MinMode { value: v, threshold: tau, degenerate: false };
        }
    }
    best
}
