//! Scoring jobs for campaign-eval: config handling, command drivers and
//! report writing. The `campaign-eval` binary is a thin wrapper over [`run`].

pub mod commands;
pub mod config;
pub mod error;
mod load;
pub mod report;

use std::path::PathBuf;

use campaign_eval::detection::{AlignMode, TfaPooling};
use campaign_eval::retrieval::NoveltyMode;
use campaign_eval::stats::TestStatistic;
use clap::{Args, Parser, Subcommand, ValueEnum};

pub use config::{JobConfig, TaskKind};
pub use error::CliError;
pub use report::ScoreReport;

#[derive(Debug, Parser)]
#[command(name = "campaign-eval", version, about = "Scoring toolkit for video retrieval and detection campaigns")]
pub struct Cli {
    /// TOML job configuration; command-line flags override it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads. Outputs do not depend on it.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Output directory [default: $CAMPAIGN_EVAL_OUT, else ./campaign-eval-out]
    #[arg(long, short, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build stratified assessment pools from ranked runs.
    Pool(PoolArgs),
    /// Score ad-hoc search runs with extended inferred AP.
    ScoreAvs(AvsArgs),
    /// Score activity detection output against a reference.
    ScoreActev(ActevArgs),
    /// Score question answering submissions (accuracy, MRR).
    ScoreDvu(DvuArgs),
    /// Score feature detection runs (MAP, precision/recall/F).
    ScoreDsdi(DsdiArgs),
    /// Score movie summaries.
    ScoreMsum(MsumArgs),
    /// Standardize and aggregate direct-assessment ratings.
    Da(DaArgs),
    /// Pairwise randomization tests between runs.
    Compare(CompareArgs),
    /// Draw DET curves from CSV files.
    DetPlot(DetPlotArgs),
    /// Write a seeded synthetic fixture.
    Gen(GenArgs),
}

#[derive(Debug, Args)]
pub struct PoolArgs {
    #[arg(long, num_args = 1..)]
    pub runs: Vec<PathBuf>,
    #[arg(long)]
    pub strata: Option<PathBuf>,
    /// Judgments, for the judged/relevant columns of the statistics table.
    #[arg(long)]
    pub judgments: Option<PathBuf>,
    #[arg(long)]
    pub chunk_size: Option<usize>,
    #[arg(long)]
    pub rank_limit: Option<u32>,
}

#[derive(Debug, Args)]
pub struct AvsArgs {
    #[arg(long, num_args = 1..)]
    pub runs: Vec<PathBuf>,
    #[arg(long)]
    pub judgments: Option<PathBuf>,
    #[arg(long)]
    pub strata: Option<PathBuf>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Also compute the novelty metric.
    #[arg(long)]
    pub novelty: bool,
    #[arg(long, value_enum)]
    pub novelty_mode: Option<NoveltyArg>,
    /// `run_tag <TAB> team` lines; by default a run's team is its tag up to the first `_`.
    #[arg(long)]
    pub teams: Option<PathBuf>,
    #[arg(long)]
    pub rank_limit: Option<u32>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum NoveltyArg {
    UniqueOnly,
    AllWeighted,
}

#[derive(Debug, Args)]
pub struct ActevArgs {
    #[arg(long)]
    pub reference: Option<PathBuf>,
    #[arg(long)]
    pub system: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
    #[arg(long)]
    pub rfa_target: Option<f64>,
    #[arg(long)]
    pub audc_bound: Option<f64>,
    #[arg(long)]
    pub temporal_iou: Option<f64>,
    #[arg(long)]
    pub spatial_iou: Option<f64>,
    #[arg(long)]
    pub min_congruence: Option<f64>,
    /// Add time-based false alarm to the DET points.
    #[arg(long)]
    pub tfa: bool,
    #[arg(long)]
    pub frame_rate: Option<f64>,
    #[arg(long)]
    pub tfa_per_video: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModeArg {
    Ad,
    Aod,
}

#[derive(Debug, Args)]
pub struct DvuArgs {
    #[arg(long)]
    pub key: Option<PathBuf>,
    /// One answer sheet per run; the run name is the file stem.
    #[arg(long, num_args = 1..)]
    pub answers: Vec<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DsdiArgs {
    #[arg(long, num_args = 1..)]
    pub runs: Vec<PathBuf>,
    #[arg(long)]
    pub judgments: Option<PathBuf>,
    #[arg(long)]
    pub strata: Option<PathBuf>,
    #[arg(long)]
    pub categories: Option<PathBuf>,
    /// Feature ids removed from every result.
    #[arg(long, value_delimiter = ',')]
    pub exclude: Vec<String>,
    #[arg(long)]
    pub rank_limit: Option<u32>,
}

#[derive(Debug, Args)]
pub struct MsumArgs {
    /// CSV `system_id,video_id,correct,possible,false_claims,tempo,contextuality,redundancy`.
    #[arg(long)]
    pub input: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DaArgs {
    #[arg(long)]
    pub ratings: Option<PathBuf>,
    /// Worker include-list, one id per line.
    #[arg(long)]
    pub workers: Option<PathBuf>,
    /// Precomputed caption metrics, CSV `system_id,video_id,metric,value`.
    #[arg(long)]
    pub metrics: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    /// CSV with run id, unit id and metric columns.
    #[arg(long)]
    pub scores: Option<PathBuf>,
    #[arg(long)]
    pub metric: Option<String>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub iterations: Option<u64>,
    #[arg(long, value_enum)]
    pub statistic: Option<StatisticArg>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum StatisticArg {
    MeanDifference,
    PairedT,
}

#[derive(Debug, Args)]
pub struct DetPlotArgs {
    #[arg(long, num_args = 1..)]
    pub curves: Vec<PathBuf>,
    #[arg(long)]
    pub x_max: Option<f64>,
    #[arg(long)]
    pub title: Option<String>,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(value_enum)]
    pub kind: GenKind,
    #[arg(long)]
    pub runs: Option<usize>,
    #[arg(long)]
    pub topics: Option<usize>,
    #[arg(long)]
    pub depth: Option<usize>,
    #[arg(long)]
    pub activities: Option<usize>,
    #[arg(long)]
    pub videos: Option<usize>,
    #[arg(long)]
    pub instances: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GenKind {
    Avs,
    Actev,
}

/// A command with its fully resolved configuration.
#[derive(Debug, Clone)]
pub struct Job {
    pub kind: JobKind,
    pub config: JobConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JobKind {
    Pool,
    ScoreAvs,
    ScoreActev,
    ScoreDvu,
    ScoreDsdi,
    ScoreMsum,
    Da,
    Compare,
    DetPlot,
    Gen(GenKind),
}

impl JobKind {
    pub fn name(self) -> &'static str {
        match self {
            JobKind::Pool => "pool",
            JobKind::ScoreAvs => "score-avs",
            JobKind::ScoreActev => "score-actev",
            JobKind::ScoreDvu => "score-dvu",
            JobKind::ScoreDsdi => "score-dsdi",
            JobKind::ScoreMsum => "score-msum",
            JobKind::Da => "da",
            JobKind::Compare => "compare",
            JobKind::DetPlot => "det-plot",
            JobKind::Gen(_) => "gen",
        }
    }

    fn task(self) -> Option<TaskKind> {
        match self {
            JobKind::Pool | JobKind::ScoreAvs => Some(TaskKind::Avs),
            JobKind::ScoreActev => Some(TaskKind::Actev),
            JobKind::ScoreDvu => Some(TaskKind::Dvu),
            JobKind::ScoreDsdi => Some(TaskKind::Dsdi),
            JobKind::ScoreMsum => Some(TaskKind::Msum),
            JobKind::Da => Some(TaskKind::Da),
            JobKind::Compare | JobKind::DetPlot | JobKind::Gen(_) => None,
        }
    }
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

fn set_opt<T>(slot: &mut Option<T>, value: Option<T>) {
    if value.is_some() {
        *slot = value;
    }
}

fn set_list<T>(slot: &mut Vec<T>, value: Vec<T>) {
    if !value.is_empty() {
        *slot = value;
    }
}

impl Cli {
    /// Loads the config file and applies flag overrides.
    pub fn resolve(self) -> Result<Job, CliError> {
        let mut c = match &self.config {
            Some(p) => JobConfig::load(p)?,
            None => JobConfig::default(),
        };
        set(&mut c.seed, self.seed);
        set_opt(&mut c.jobs, self.jobs);
        set_opt(&mut c.output_dir, self.out);
        let i = &mut c.inputs;
        let r = &mut c.retrieval;
        let kind = match self.command {
            Command::Pool(a) => {
                set_list(&mut i.runs, a.runs);
                set_opt(&mut i.strata, a.strata);
                set_opt(&mut i.judgments, a.judgments);
                set(&mut r.chunk_size, a.chunk_size);
                set(&mut r.rank_limit, a.rank_limit);
                JobKind::Pool
            }
            Command::ScoreAvs(a) => {
                set_list(&mut i.runs, a.runs);
                set_opt(&mut i.judgments, a.judgments);
                set_opt(&mut i.strata, a.strata);
                set_opt(&mut i.teams, a.teams);
                set(&mut r.epsilon, a.epsilon);
                set(&mut r.rank_limit, a.rank_limit);
                r.novelty |= a.novelty;
                set(
                    &mut r.novelty_mode,
                    a.novelty_mode.map(|m| match m {
                        NoveltyArg::UniqueOnly => NoveltyMode::UniqueOnly,
                        NoveltyArg::AllWeighted => NoveltyMode::AllWeighted,
                    }),
                );
                JobKind::ScoreAvs
            }
            Command::ScoreActev(a) => {
                set_opt(&mut i.reference, a.reference);
                set_opt(&mut i.system, a.system);
                let d = &mut c.detection;
                set(&mut d.mode, a.mode.map(|m| if matches!(m, ModeArg::Aod) { AlignMode::Aod } else { AlignMode::Ad }));
                set(&mut d.rfa_target, a.rfa_target);
                set(&mut d.audc_bound, a.audc_bound);
                set(&mut d.congruence.min_temporal_iou, a.temporal_iou);
                set(&mut d.congruence.spatial_iou, a.spatial_iou);
                set(&mut d.congruence.min_congruence, a.min_congruence);
                set(&mut d.frame_rate, a.frame_rate);
                d.tfa |= a.tfa || a.tfa_per_video;
                if a.tfa_per_video {
                    d.tfa_pooling = TfaPooling::PerVideo;
                }
                JobKind::ScoreActev
            }
            Command::ScoreDvu(a) => {
                set_opt(&mut i.key, a.key);
                set_list(&mut i.answers, a.answers);
                JobKind::ScoreDvu
            }
            Command::ScoreDsdi(a) => {
                set_list(&mut i.runs, a.runs);
                set_opt(&mut i.judgments, a.judgments);
                set_opt(&mut i.strata, a.strata);
                set_opt(&mut i.categories, a.categories);
                set_list(&mut r.excluded_features, a.exclude);
                set(&mut r.rank_limit, a.rank_limit);
                JobKind::ScoreDsdi
            }
            Command::ScoreMsum(a) => {
                set_opt(&mut i.msum, a.input);
                JobKind::ScoreMsum
            }
            Command::Da(a) => {
                set_opt(&mut i.ratings, a.ratings);
                set_opt(&mut i.workers, a.workers);
                set_opt(&mut i.metrics, a.metrics);
                JobKind::Da
            }
            Command::Compare(a) => {
                set_opt(&mut i.scores, a.scores);
                let s = &mut c.stats;
                set_opt(&mut s.metric, a.metric);
                set(&mut s.alpha, a.alpha);
                set(&mut s.iterations, a.iterations);
                set(
                    &mut s.statistic,
                    a.statistic.map(|s| match s {
                        StatisticArg::MeanDifference => TestStatistic::MeanDifference,
                        StatisticArg::PairedT => TestStatistic::PairedT,
                    }),
                );
                JobKind::Compare
            }
            Command::DetPlot(a) => {
                set_list(&mut i.curves, a.curves);
                set(&mut c.plot.x_max, a.x_max);
                set_opt(&mut c.plot.title, a.title);
                JobKind::DetPlot
            }
            Command::Gen(a) => {
                let g = &mut c.gen;
                set(&mut g.avs.runs, a.runs);
                set(&mut g.avs.topics, a.topics);
                set(&mut g.avs.depth, a.depth);
                set(&mut g.actev.activities, a.activities);
                set(&mut g.actev.videos, a.videos);
                set(&mut g.actev.instances_per_activity, a.instances);
                JobKind::Gen(a.kind)
            }
        };
        if let (Some(want), Some(got)) = (kind.task(), c.task) {
            if want != got {
                return Err(CliError::invalid(format!(
                    "config task {got:?} does not match command {}",
                    kind.name()
                )));
            }
        }
        c.task = kind.task().or(c.task);
        c.check()?;
        Ok(Job { kind, config: c })
    }
}

/// Runs a resolved job on a thread pool of the configured size and returns
/// the files it wrote, in writing order.
pub fn execute(job: &Job) -> Result<Vec<PathBuf>, CliError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(job.config.jobs.unwrap_or(0))
        .build()
        .map_err(CliError::internal)?;
    pool.install(|| commands::dispatch(job.kind, &job.config))
}

/// Resolves and executes already-parsed arguments.
pub fn run(cli: Cli) -> Result<Vec<PathBuf>, CliError> {
    execute(&cli.resolve()?)
}
