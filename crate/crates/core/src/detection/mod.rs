//! Streaming activity-detection scoring.
//!
//! Scoring an activity runs in three steps: a single global alignment of
//! reference and system instances ([`align_instances`]), a sweep of the
//! decision threshold over the system confidences producing a
//! [`DetCurve`], and summaries of that curve ([`pmiss_at_rfa`],
//! [`naudc`]). For the object-and-activity task the alignment also
//! requires, and rewards, object detection congruence `1 - minMODE`.

mod align;
mod assignment;
mod det;
mod intervals;
mod mode;

use serde::{Deserialize, Serialize};

pub use align::{align_instances, confidence_ranks, AlignMode, Alignment, MatchedPair};
pub use assignment::max_weight_assignment;
pub use det::{
    aggregate_activities, confusion_counts, det_curve, det_curve_with_alignment, mean_curve, naudc, nmode_at_rfa, pmiss,
    pmiss_at_rfa, rfa, tfa, ActivityAggregate, Confusion, DetCurve, DetPoint, TfaOptions,
    TfaPooling, DEFAULT_FRAME_RATE,
};
pub use mode::{frame_mode, min_mode, n_mode, FrameCounts, MinMode};

/// Alignment and object-matching parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CongruenceParams {
    /// Minimum temporal IoU for a pair to be eligible. At 0 any intersection
    /// of at least one frame qualifies.
    pub min_temporal_iou: f64,
    /// Minimum spatial IoU for two boxes to match.
    pub spatial_iou: f64,
    pub cost_md: f64,
    pub cost_fa: f64,
    /// Relative weight of temporal IoU in the tie-breaking tier.
    pub tiou_weight: f64,
    /// Relative weight of `1 - minMODE` in the tie-breaking tier (AOD only).
    pub congruence_weight: f64,
    /// AOD pairs need congruence strictly above this value.
    pub min_congruence: f64,
}

impl Default for CongruenceParams {
    fn default() -> Self {
        CongruenceParams {
            min_temporal_iou: 0.0,
            spatial_iou: 0.5,
            cost_md: 1.0,
            cost_fa: 1.0,
            tiou_weight: 1.0,
            congruence_weight: 1.0,
            min_congruence: 0.0,
        }
    }
}
