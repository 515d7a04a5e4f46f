use std::collections::{BTreeMap, BTreeSet};
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InstanceSetKind {
    Reference,
    System,
}

/// Axis-aligned box in pixels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
}

impl BoundingBox {
    pub fn area(&self) -> f64 {
        self.w * self.h
    }

    pub fn iou(&self, other: &BoundingBox) -> f64 {
        let ix = (self.x + self.w).min(other.x + other.w) - self.x.max(other.x);
        let iy = (self.y + self.h).min(other.y + other.h) - self.y.max(other.y);
        if ix <= 0.0 || iy <= 0.0 {
            return 0.0;
        }
        let inter = ix * iy;
        inter / (self.area() + other.area() - inter)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObjectBox {
    #[serde(flatten)]
    pub bbox: BoundingBox,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub conf: Option<f64>,
}

impl ObjectBox {
    pub fn confidence(&self) -> f64 {
        self.conf.unwrap_or(1.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ActivityInstance {
    pub activity: String,
    pub video_id: String,
    pub begin_frame: u64,
    pub end_frame: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub confidence: Option<f64>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub objects: BTreeMap<u64, Vec<ObjectBox>>,
}

impl ActivityInstance {
    /// Inclusive frame count.
    pub fn num_frames(&self) -> u64 {
        self.end_frame - self.begin_frame + 1
    }

    pub fn confidence(&self) -> f64 {
        self.confidence.unwrap_or(1.0)
    }

    /// Inclusive intersection of two spans, if any.
    pub fn overlap(&self, other: &ActivityInstance) -> Option<(u64, u64)> {
        let lo = self.begin_frame.max(other.begin_frame);
        let hi = self.end_frame.min(other.end_frame);
        (lo <= hi).then_some((lo, hi))
    }

    /// Temporal IoU over inclusive frame spans.
    pub fn temporal_iou(&self, other: &ActivityInstance) -> f64 {
        match self.overlap(other) {
            None => 0.0,
            Some((lo, hi)) => {
                let inter = (hi - lo + 1) as f64;
                let union = (self.num_frames() + other.num_frames()) as f64 - inter;
                inter / union
            }
        }
    }
}

/// Reference or system activity instances plus the durations of their videos.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ActivityInstanceSet {
    /// Video durations in minutes.
    pub video_durations: BTreeMap<String, f64>,
    pub instances: Vec<ActivityInstance>,
}

impl ActivityInstanceSet {
    pub fn activities(&self) -> BTreeSet<&str> {
        self.instances.iter().map(|i| i.activity.as_str()).collect()
    }

    /// Instances of one activity; durations are kept in full.
    pub fn restrict(&self, activity: &str) -> ActivityInstanceSet {
        ActivityInstanceSet {
            video_durations: self.video_durations.clone(),
            instances: self.instances.iter().filter(|i| i.activity == activity).cloned().collect(),
        }
    }

    pub fn total_minutes(&self) -> f64 {
        self.video_durations.values().sum()
    }

    pub fn validate(&mut self, kind: InstanceSetKind) -> Result<()> {
        for (video, minutes) in &self.video_durations {
            if !(minutes.is_finite() && *minutes > 0.0) {
                return Err(Error::invalid(format!("video {video}: duration must be positive")));
            }
        }
        for (idx, inst) in (1..).zip(self.instances.iter_mut()) {
            if inst.begin_frame > inst.end_frame {
                return Err(Error::record(
                    idx,
                    format!("beginFrame {} > endFrame {}", inst.begin_frame, inst.end_frame),
                ));
            }
            if !self.video_durations.contains_key(&inst.video_id) {
                return Err(Error::record(idx, format!("video {} has no duration entry", inst.video_id)));
            }
            match kind {
                InstanceSetKind::Reference => {
                    inst.confidence = None;
                    for boxes in inst.objects.values_mut() {
                        for b in boxes.iter_mut() {
                            b.conf = None;
                        }
                    }
                }
                InstanceSetKind::System => match inst.confidence {
                    None => return Err(Error::record(idx, "system instance without confidence")),
                    Some(c) if !(0.0..=1.0).contains(&c) => {
                        return Err(Error::record(idx, format!("confidence {c} outside [0,1]")))
                    }
                    Some(_) => {}
                },
            }
            for (frame, boxes) in &inst.objects {
                for b in boxes {
                    if !(b.bbox.w > 0.0 && b.bbox.h > 0.0) {
                        return Err(Error::record(idx, format!("frame {frame}: box with nonpositive extent")));
                    }
                    if kind == InstanceSetKind::System && b.conf.is_none() {
                        return Err(Error::record(idx, format!("frame {frame}: object box without conf")));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Parses and validates an activity instance document.
pub fn parse_activity_set<R: Read>(reader: R, kind: InstanceSetKind) -> Result<ActivityInstanceSet> {
    let mut set: ActivityInstanceSet = serde_json::from_reader(reader)?;
    set.validate(kind)?;
    Ok(set)
}

pub fn write_activity_set<W: Write>(set: &ActivityInstanceSet, mut out: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, set)?;
    writeln!(out)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const ONE_REF: &str = r#"{"videoDurations": {"v1": 5.0},
        "instances": [{"activity": "walk", "videoId": "v1", "beginFrame": 10, "endFrame": 50, "confidence": 0.3}]}"#;

    #[test]
    fn reference_ignores_confidence() {
        let set = parse_activity_set(ONE_REF.as_bytes(), InstanceSetKind::Reference).unwrap();
        assert_eq!(set.instances.len(), 1);
        assert_eq!(set.instances[0].confidence, None);
    }

    #[test]
    fn system_requires_confidence() {
        let doc = r#"{"videoDurations": {"v1": 5.0},
            "instances": [{"activity": "walk", "videoId": "v1", "beginFrame": 10, "endFrame": 50}]}"#;
        let err = parse_activity_set(doc.as_bytes(), InstanceSetKind::System).unwrap_err();
        assert!(err.to_string().contains("without confidence"));
    }

    #[test]
    fn objects_on_three_frames() {
        let doc = r#"{"videoDurations": {"v1": 5.0},
            "instances": [{"activity": "a", "videoId": "v1", "beginFrame": 0, "endFrame": 9, "confidence": 1.0,
              "objects": {"1": [{"x": 0, "y": 0, "w": 10, "h": 10, "conf": 0.9}],
                          "2": [{"x": 1, "y": 1, "w": 10, "h": 10, "conf": 0.8}],
                          "5": [{"x": 2, "y": 2, "w": 10, "h": 10, "conf": 0.7}]}}]}"#;
        let set = parse_activity_set(doc.as_bytes(), InstanceSetKind::System).unwrap();
        assert_eq!(set.instances[0].objects.len(), 3);
    }

    #[test]
    fn invalid_spans_boxes_and_videos() {
        let begin_after_end = r#"{"videoDurations": {"v1": 5.0},
            "instances": [{"activity": "a", "videoId": "v1", "beginFrame": 9, "endFrame": 3}]}"#;
        assert!(parse_activity_set(begin_after_end.as_bytes(), InstanceSetKind::Reference).is_err());
        let flat_box = r#"{"videoDurations": {"v1": 5.0},
            "instances": [{"activity": "a", "videoId": "v1", "beginFrame": 0, "endFrame": 3,
              "objects": {"1": [{"x": 0, "y": 0, "w": 0, "h": 10}]}}]}"#;
        assert!(parse_activity_set(flat_box.as_bytes(), InstanceSetKind::Reference).is_err());
        let no_duration = r#"{"videoDurations": {},
            "instances": [{"activity": "a", "videoId": "v1", "beginFrame": 0, "endFrame": 3}]}"#;
        assert!(parse_activity_set(no_duration.as_bytes(), InstanceSetKind::Reference).is_err());
    }

    #[test]
    fn temporal_iou_inclusive() {
        let set = parse_activity_set(ONE_REF.as_bytes(), InstanceSetKind::Reference).unwrap();
        let a = set.instances[0].clone();
        let b = ActivityInstance { begin_frame: 30, end_frame: 70, ..a.clone() };
        assert!((a.temporal_iou(&b) - 21.0 / 61.0).abs() < 1e-15);
        let c = ActivityInstance { begin_frame: 51, end_frame: 70, ..a.clone() };
        assert_eq!(a.temporal_iou(&c), 0.0);
    }

    #[test]
    fn box_iou() {
        let a = BoundingBox { x: 0.0, y: 0.0, w: 2.0, h: 2.0 };
        let b = BoundingBox { x: 1.0, y: 0.0, w: 2.0, h: 2.0 };
        assert!((a.iou(&b) - 2.0 / 6.0).abs() < 1e-15);
        assert_eq!(a.iou(&a), 1.0);
    }

    #[test]
    fn serialization_uses_exact_field_names() {
        let set = parse_activity_set(ONE_REF.as_bytes(), InstanceSetKind::Reference).unwrap();
        let mut out = Vec::new();
        write_activity_set(&set, &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        for key in ["videoDurations", "instances", "videoId", "beginFrame", "endFrame"] {
            assert!(text.contains(key), "{key}");
        }
        let back = parse_activity_set(text.as_bytes(), InstanceSetKind::Reference).unwrap();
        assert_eq!(back, set);
    }
}
