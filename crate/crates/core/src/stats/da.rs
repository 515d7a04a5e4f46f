use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::DaRatingFile;

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DaOptions {
    /// Keep only these workers, when given.
    pub workers: Option<BTreeSet<String>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WorkerStats {
    pub n: usize,
    pub mean: f64,
    /// Sample (n-1) standard deviation; 0 when n < 2.
    pub sd: f64,
    /// Fewer than 2 ratings or zero spread: every z of this worker is 0.
    pub flagged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemDa {
    /// Mean over videos of the per-video mean raw rating.
    pub raw: f64,
    /// Mean over videos of the per-video mean z.
    pub z: f64,
    pub videos: usize,
    pub ratings: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VideoDa {
    pub system_id: String,
    pub video_id: String,
    pub ratings: usize,
    pub raw: f64,
    pub z: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DaTable {
    pub workers: BTreeMap<String, WorkerStats>,
    /// Standardized value of each kept record, in file order.
    pub z: Vec<f64>,
    /// Micro-averaged cells, sorted by system then video.
    pub per_video: Vec<VideoDa>,
    pub systems: BTreeMap<String, SystemDa>,
}

impl DaTable {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("system_id,videos,ratings,raw,z\n");
        for (s, d) in &self.systems {
            out.push_str(&format!("{s},{},{},{},{}\n", d.videos, d.ratings, d.raw, d.z));
        }
        out
    }
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Standardizes ratings per worker, micro-averages per (system, video) and
/// then averages over each system's videos.
pub fn da_aggregate(ratings: &DaRatingFile, options: &DaOptions) -> Result<DaTable> {
    let records: Vec<_> = ratings
        .records
        .iter()
        .filter(|r| options.workers.as_ref().is_none_or(|w| w.contains(&r.worker_id)))
        .collect();
    if records.is_empty() {
        return Err(Error::invalid(if ratings.records.is_empty() {
            "empty rating file"
        } else {
            "no ratings left after the worker filter"
        }));
    }

    let mut by_worker: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
    for r in &records {
        by_worker.entry(&r.worker_id).or_default().push(r.rating);
    }
    let workers: BTreeMap<String, WorkerStats> = by_worker
        .into_iter()
        .map(|(w, xs)| {
            let m = mean(&xs);
            let sd = if xs.len() < 2 {
                0.0
            } else {
                (xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64).sqrt()
            };
            let stats = WorkerStats { n: xs.len(), mean: m, sd, flagged: xs.len() < 2 || sd == 0.0 };
            (w.to_string(), stats)
        })
        .collect();

    let z: Vec<f64> = records
        .iter()
        .map(|r| {
            let w = &workers[&r.worker_id];
            if w.flagged { 0.0 } else { (r.rating - w.mean) / w.sd }
        })
        .collect();

    let mut cells: BTreeMap<(String, String), (Vec<f64>, Vec<f64>)> = BTreeMap::new();
    for (r, &zi) in records.iter().zip(&z) {
        let cell = cells.entry((r.system_id.clone(), r.video_id.clone())).or_default();
        cell.0.push(r.rating);
        cell.1.push(zi);
    }
    let per_video: Vec<VideoDa> = cells
        .into_iter()
        .map(|((system_id, video_id), (raw, z))| VideoDa { system_id, video_id, ratings: raw.len(), raw: mean(&raw), z: mean(&z) })
        .collect();

    let mut systems: BTreeMap<String, (Vec<f64>, Vec<f64>, usize)> = BTreeMap::new();
    for v in &per_video {
        let e = systems.entry(v.system_id.clone()).or_default();
        e.0.push(v.raw);
        e.1.push(v.z);
        e.2 += v.ratings;
    }
    let systems = systems
        .into_iter()
        .map(|(s, (raw, z, n))| (s, SystemDa { raw: mean(&raw), z: mean(&z), videos: raw.len(), ratings: n }))
        .collect();
    Ok(DaTable { workers, z, per_video, systems })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::DaRating;

    fn file(rows: &[(&str, &str, &str, f64)]) -> DaRatingFile {
        DaRatingFile {
            records: rows
                .iter()
                .map(|&(w, s, v, r)| DaRating { worker_id: w.into(), system_id: s.into(), video_id: v.into(), rating: r })
                .collect(),
        }
    }

    #[test]
    fn two_point_standardization() {
        let t = da_aggregate(&file(&[("w", "s", "v1", 40.0), ("w", "s", "v2", 60.0)]), &Default::default()).unwrap();
        let expect = [-std::f64::consts::FRAC_1_SQRT_2, std::f64::consts::FRAC_1_SQRT_2];
        // Sample sd of {40, 60} is 10*sqrt(2).
        for (z, e) in t.z.iter().zip(expect) {
            assert!((z - e).abs() < 1e-12);
        }
        assert!(t.systems["s"].z.abs() < 1e-12);
        assert_eq!(t.systems["s"].raw, 50.0);
    }

    #[test]
    fn constant_workers_are_flagged() {
        let t = da_aggregate(
            &file(&[("a", "s", "v", 70.0), ("a", "t", "v", 70.0), ("b", "s", "v", 20.0)]),
            &Default::default(),
        )
        .unwrap();
        assert!(t.workers.values().all(|w| w.flagged));
        assert!(t.z.iter().all(|&z| z == 0.0));
        assert!(t.systems.values().all(|s| s.z == 0.0));
    }

    #[test]
    fn hand_computed_table() {
        // Worker means: w1 = 50 (sd 20), w2 = 30 (sd 10).
        let t = da_aggregate(
            &file(&[
                ("w1", "A", "v1", 70.0),
                ("w1", "B", "v1", 30.0),
                ("w1", "A", "v2", 50.0),
                ("w2", "A", "v1", 40.0),
                ("w2", "A", "v2", 30.0),
                ("w2", "B", "v2", 20.0),
            ]),
            &Default::default(),
        )
        .unwrap();
        // A/v1: (1 + 1)/2 = 1, A/v2: 0 -> A = 0.5; B/v1: -1, B/v2: -1 -> B = -1.
        assert!((t.systems["A"].z - 0.5).abs() < 1e-12);
        assert!((t.systems["B"].z + 1.0).abs() < 1e-12);
        assert!((t.systems["A"].raw - 47.5).abs() < 1e-12);
        assert_eq!(t.systems["A"].ratings, 4);
    }

    #[test]
    fn worker_filter_and_errors() {
        let f = file(&[("a", "s", "v", 10.0), ("a", "s", "w", 20.0), ("b", "s", "v", 90.0)]);
        let only_a = DaOptions { workers: Some(["a".to_string()].into()) };
        assert_eq!(da_aggregate(&f, &only_a).unwrap().z.len(), 2);
        let none = DaOptions { workers: Some(["zz".to_string()].into()) };
        assert!(da_aggregate(&f, &none).is_err());
        assert!(da_aggregate(&file(&[]), &Default::default()).is_err());
    }
}
