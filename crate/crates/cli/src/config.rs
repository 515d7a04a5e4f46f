//! Job configuration: a TOML file merged with command-line overrides.

use std::path::{Path, PathBuf};

use campaign_eval::detection::{AlignMode, CongruenceParams, TfaPooling, DEFAULT_FRAME_RATE};
use campaign_eval::retrieval::{NoveltyMode, DEFAULT_EPSILON};
use campaign_eval::stats::{TestStatistic, DEFAULT_ITERATIONS};
use campaign_eval::synth::{ActevSynthConfig, AvsSynthConfig};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "CAMPAIGN_EVAL_OUT";
pub const DEFAULT_OUT_DIR: &str = "campaign-eval-out";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TaskKind {
    Avs,
    Actev,
    Dvu,
    Dsdi,
    Msum,
    Da,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Inputs {
    pub runs: Vec<PathBuf>,
    pub judgments: Option<PathBuf>,
    pub strata: Option<PathBuf>,
    /// `run_tag <TAB> team` lines.
    pub teams: Option<PathBuf>,
    pub reference: Option<PathBuf>,
    pub system: Option<PathBuf>,
    pub key: Option<PathBuf>,
    pub answers: Vec<PathBuf>,
    pub ratings: Option<PathBuf>,
    /// Worker include-list, one id per line.
    pub workers: Option<PathBuf>,
    /// Caption metric values, CSV `system_id,video_id,metric,value`.
    pub metrics: Option<PathBuf>,
    pub msum: Option<PathBuf>,
    /// `feature <TAB> category` lines.
    pub categories: Option<PathBuf>,
    pub scores: Option<PathBuf>,
    pub curves: Vec<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RetrievalParams {
    pub rank_limit: u32,
    pub chunk_size: usize,
    pub epsilon: f64,
    pub novelty: bool,
    pub novelty_mode: NoveltyMode,
    pub excluded_features: Vec<String>,
}

impl Default for RetrievalParams {
    fn default() -> Self {
        RetrievalParams {
            rank_limit: campaign_eval::io::DEFAULT_RANK_LIMIT,
            chunk_size: campaign_eval::pooling::DEFAULT_CHUNK_SIZE,
            epsilon: DEFAULT_EPSILON,
            novelty: false,
            novelty_mode: NoveltyMode::UniqueOnly,
            excluded_features: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DetectionParams {
    pub mode: AlignMode,
    pub congruence: CongruenceParams,
    pub rfa_target: f64,
    pub audc_bound: f64,
    pub mode_rfa_target: f64,
    pub tfa: bool,
    pub frame_rate: f64,
    pub tfa_pooling: TfaPooling,
}

impl Default for DetectionParams {
    fn default() -> Self {
        DetectionParams {
            mode: AlignMode::Ad,
            congruence: CongruenceParams::default(),
            rfa_target: 0.1,
            audc_bound: 0.2,
            mode_rfa_target: 0.1,
            tfa: false,
            frame_rate: DEFAULT_FRAME_RATE,
            tfa_pooling: TfaPooling::Corpus,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StatsParams {
    pub iterations: u64,
    pub alpha: f64,
    pub statistic: TestStatistic,
    /// Column of the scores table to compare; defaults to the third.
    pub metric: Option<String>,
}

impl Default for StatsParams {
    fn default() -> Self {
        StatsParams { iterations: DEFAULT_ITERATIONS, alpha: 0.05, statistic: TestStatistic::MeanDifference, metric: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlotParams {
    pub x_max: f64,
    pub title: Option<String>,
}

impl Default for PlotParams {
    fn default() -> Self {
        PlotParams { x_max: 1.0, title: None }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenParams {
    pub avs: AvsSynthConfig,
    pub actev: ActevSynthConfig,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct JobConfig {
    pub task: Option<TaskKind>,
    pub seed: u64,
    /// Worker threads; does not affect any output.
    pub jobs: Option<usize>,
    pub output_dir: Option<PathBuf>,
    pub inputs: Inputs,
    pub retrieval: RetrievalParams,
    pub detection: DetectionParams,
    pub stats: StatsParams,
    pub plot: PlotParams,
    pub gen: GenParams,
}

impl JobConfig {
    /// Reads a TOML config. Relative input paths are taken relative to the
    /// config file.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::invalid(format!("cannot read config {}: {e}", path.display())))?;
        let mut cfg: JobConfig =
            toml::from_str(&text).map_err(|e| CliError::invalid(format!("config {}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        cfg.rebase(base);
        Ok(cfg)
    }

    fn rebase(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        let i = &mut self.inputs;
        for p in i.runs.iter_mut().chain(i.answers.iter_mut()).chain(i.curves.iter_mut()) {
            fix(p);
        }
        for p in [
            &mut i.judgments,
            &mut i.strata,
            &mut i.teams,
            &mut i.reference,
            &mut i.system,
            &mut i.key,
            &mut i.ratings,
            &mut i.workers,
            &mut i.metrics,
            &mut i.msum,
            &mut i.categories,
            &mut i.scores,
        ]
        .into_iter()
        .flatten()
        {
            fix(p);
        }
        if let Some(p) = &mut self.output_dir {
            fix(p);
        }
    }

    /// Every input path named by the config.
    pub fn input_paths(&self) -> Vec<&Path> {
        let i = &self.inputs;
        let mut out: Vec<&Path> = i.runs.iter().chain(&i.answers).chain(&i.curves).map(|p| p.as_path()).collect();
        out.extend(
            [
                &i.judgments,
                &i.strata,
                &i.teams,
                &i.reference,
                &i.system,
                &i.key,
                &i.ratings,
                &i.workers,
                &i.metrics,
                &i.msum,
                &i.categories,
                &i.scores,
            ]
            .into_iter()
            .flatten()
            .map(|p| p.as_path()),
        );
        out
    }

    pub fn check(&self) -> Result<(), CliError> {
        for p in self.input_paths() {
            if !p.is_file() {
                return Err(CliError::invalid(format!("input file {} does not exist", p.display())));
            }
        }
        let r = &self.retrieval;
        if r.rank_limit == 0 || r.chunk_size == 0 {
            return Err(CliError::invalid("rank_limit and chunk_size must be positive"));
        }
        if !(r.epsilon >= 0.0) {
            return Err(CliError::invalid("epsilon must be nonnegative"));
        }
        let d = &self.detection;
        let c = &d.congruence;
        if !(0.0..=1.0).contains(&c.min_temporal_iou) || !(0.0..=1.0).contains(&c.spatial_iou) {
            return Err(CliError::invalid("IoU thresholds must lie in [0,1]"));
        }
        if !(0.0..1.0).contains(&c.min_congruence) {
            return Err(CliError::invalid("min_congruence must lie in [0,1)"));
        }
        if !(c.cost_md >= 0.0 && c.cost_fa >= 0.0 && c.tiou_weight >= 0.0 && c.congruence_weight >= 0.0) {
            return Err(CliError::invalid("costs and weights must be nonnegative"));
        }
        if !(d.rfa_target >= 0.0 && d.mode_rfa_target >= 0.0 && d.audc_bound > 0.0 && d.frame_rate > 0.0) {
            return Err(CliError::invalid("operating points must be nonnegative, nAUDC bound and frame rate positive"));
        }
        let s = &self.stats;
        if !(s.alpha > 0.0 && s.alpha < 1.0) || s.iterations == 0 {
            return Err(CliError::invalid("alpha must lie in (0,1) and iterations be positive"));
        }
        if self.jobs == Some(0) {
            return Err(CliError::invalid("jobs must be positive"));
        }
        Ok(())
    }

    pub fn output_dir(&self) -> PathBuf {
        self.output_dir
            .clone()
            .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR))
    }

    /// SHA-256 over the resolved configuration (without the thread count and
    /// output location, which do not change results) and the digest of every
    /// input file.
    pub fn hash(&self, input_digests: &std::collections::BTreeMap<String, String>) -> String {
        let mut view = self.clone();
        view.jobs = None;
        view.output_dir = None;
        let mut h = Sha256::new();
        h.update(serde_json::to_vec(&view).expect("config serializes"));
        for (path, digest) in input_digests {
            h.update(path.as_bytes());
            h.update([0]);
            h.update(digest.as_bytes());
        }
        hex(&h.finalize())
    }
}

pub(crate) fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toml_round_trip() {
        let cfg: JobConfig = toml::from_str(
            r#"
task = "actev"
seed = 7
[inputs]
reference = "ref.json"
[detection]
mode = "AOD"
congruence = { spatial_iou = 0.6 }
"#,
        )
        .unwrap();
        assert_eq!(cfg.task, Some(TaskKind::Actev));
        assert_eq!(cfg.detection.mode, AlignMode::Aod);
        assert_eq!(cfg.detection.congruence.spatial_iou, 0.6);
        assert_eq!(cfg.detection.congruence.cost_md, 1.0);
        assert_eq!(cfg.retrieval.epsilon, DEFAULT_EPSILON);
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(toml::from_str::<JobConfig>("sede = 1").is_err());
    }

    #[test]
    fn hash_ignores_jobs_and_output() {
        let a = JobConfig::default();
        let b = JobConfig { jobs: Some(8), output_dir: Some("x".into()), ..Default::default() };
        let c = JobConfig { seed: 1, ..Default::default() };
        let none = Default::default();
        assert_eq!(a.hash(&none), b.hash(&none));
        assert_ne!(a.hash(&none), c.hash(&none));
    }

    #[test]
    fn range_checks() {
        let mut cfg = JobConfig::default();
        assert!(cfg.check().is_ok());
        cfg.detection.congruence.spatial_iou = 1.5;
        assert!(cfg.check().is_err());
    }
}
