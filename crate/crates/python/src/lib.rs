//! Python bindings. Inputs are passed as file contents (strings) or plain
//! Python containers; results come back as floats, tuples and dicts.

use std::collections::{BTreeMap, HashMap, HashSet};

use campaign_eval::detection::{self, AlignMode, CongruenceParams, DetCurve};
use campaign_eval::io::{self, ActivityInstanceSet, InstanceSetKind, JudgmentSet, RankedRun, RunParseOptions, Task};
use campaign_eval::pooling::{self, PoolSpec};
use campaign_eval::retrieval::{self, NoveltyMode, NoveltyWeights, SampledTopic};
use campaign_eval::stats::{self, PairedScores, RandomizationOptions, TestStatistic};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

fn err(e: campaign_eval::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn task(name: &str) -> PyResult<Task> {
    name.parse().map_err(|_| PyValueError::new_err(format!("unknown task '{name}'")))
}

fn align_mode(name: &str) -> PyResult<AlignMode> {
    match name.to_ascii_uppercase().as_str() {
        "AD" => Ok(AlignMode::Ad),
        "AOD" => Ok(AlignMode::Aod),
        _ => Err(PyValueError::new_err(format!("mode must be AD or AOD, got '{name}'"))),
    }
}

/// A parsed ranked submission.
#[pyclass(name = "Run", frozen)]
struct PyRun {
    inner: RankedRun,
}

#[pymethods]
impl PyRun {
    #[getter]
    fn run_tag(&self) -> &str {
        &self.inner.run_tag
    }

    #[getter]
    fn run_kind(&self) -> String {
        self.inner.run_kind.to_string()
    }

    fn topics(&self) -> Vec<String> {
        self.inner.topics().map(|t| t.to_string()).collect()
    }

    fn ranked_items(&self, topic: &str) -> Vec<String> {
        self.inner.ranked_items(&io::TopicId::new(topic)).into_iter().map(str::to_string).collect()
    }

    fn to_text(&self) -> PyResult<String> {
        let mut buf = Vec::new();
        io::write_retrieval_run(&self.inner, &mut buf).map_err(err)?;
        Ok(String::from_utf8_lossy(&buf).into_owned())
    }

    fn __repr__(&self) -> String {
        format!("Run({}, {} entries)", self.inner.run_tag, self.inner.num_entries())
    }
}

/// Relevance judgments with their strata table.
#[pyclass(name = "Judgments", frozen)]
struct PyJudgments {
    inner: JudgmentSet,
}

#[pymethods]
impl PyJudgments {
    fn topics(&self) -> Vec<String> {
        self.inner.topics.keys().map(|t| t.to_string()).collect()
    }

    fn num_relevant(&self, topic: &str) -> usize {
        self.inner.num_relevant(&io::TopicId::new(topic))
    }

    fn num_judged(&self, topic: &str) -> usize {
        self.inner.topic(&io::TopicId::new(topic)).len()
    }
}

/// Reference or system activity instances.
#[pyclass(name = "ActivitySet", frozen)]
struct PyActivitySet {
    inner: ActivityInstanceSet,
}

#[pymethods]
impl PyActivitySet {
    fn activities(&self) -> Vec<String> {
        self.inner.activities().into_iter().map(str::to_string).collect()
    }

    fn __len__(&self) -> usize {
        self.inner.instances.len()
    }
}

/// DET curve of one activity.
#[pyclass(name = "DetCurve", frozen)]
struct PyDetCurve {
    inner: DetCurve,
}

#[pymethods]
impl PyDetCurve {
    #[getter]
    fn activity(&self) -> &str {
        &self.inner.activity
    }

    #[getter]
    fn n_true(&self) -> usize {
        self.inner.n_true
    }

    #[getter]
    fn minutes(&self) -> f64 {
        self.inner.minutes
    }

    /// `(threshold, pmiss, rfa)` per operating point, starting at `+inf`.
    fn points(&self) -> Vec<(f64, f64, f64)> {
        self.inner.points.iter().map(|p| (p.threshold, p.pmiss, p.rfa)).collect()
    }

    fn pmiss_at_rfa(&self, target: f64) -> PyResult<f64> {
        detection::pmiss_at_rfa(&self.inner, target).map_err(err)
    }

    fn naudc(&self, bound: f64) -> PyResult<f64> {
        detection::naudc(&self.inner, bound).map_err(err)
    }

    fn to_csv(&self) -> String {
        self.inner.to_csv()
    }
}

#[pyfunction]
#[pyo3(signature = (text, task_name = "avs", rank_limit = io::DEFAULT_RANK_LIMIT))]
fn parse_run(text: &str, task_name: &str, rank_limit: u32) -> PyResult<PyRun> {
    let options = RunParseOptions::new(task(task_name)?).with_rank_limit(rank_limit);
    let inner = io::parse_retrieval_run(text.as_bytes(), &options).map_err(err)?;
    Ok(PyRun { inner })
}

/// Builds a run from `{topic: [item, ...]}` in rank order.
#[pyfunction]
#[pyo3(signature = (run_tag, lists, task_name = "avs"))]
fn run_from_lists(run_tag: &str, lists: BTreeMap<String, Vec<String>>, task_name: &str) -> PyResult<PyRun> {
    let lists = lists.into_iter().map(|(t, items)| (io::TopicId::new(t), items));
    Ok(PyRun { inner: RankedRun::from_lists(run_tag, task(task_name)?, lists) })
}

/// Parses judgments; without a strata table the default two strata are used.
#[pyfunction]
#[pyo3(signature = (text, strata = None))]
fn parse_judgments(text: &str, strata: Option<&str>) -> PyResult<PyJudgments> {
    let table = match strata {
        Some(s) => io::parse_strata(s.as_bytes()).map_err(err)?,
        None => io::StrataTable::two_stratum_default(),
    };
    Ok(PyJudgments { inner: io::parse_judgments(text.as_bytes(), table).map_err(err)? })
}

#[pyfunction]
#[pyo3(signature = (text, system = true))]
fn parse_activity_set(text: &str, system: bool) -> PyResult<PyActivitySet> {
    let kind = if system { InstanceSetKind::System } else { InstanceSetKind::Reference };
    Ok(PyActivitySet { inner: io::parse_activity_set(text.as_bytes(), kind).map_err(err)? })
}

#[pyfunction]
fn average_precision(ranked: Vec<String>, relevant: Vec<String>) -> f64 {
    let relevant: HashSet<&str> = relevant.iter().map(String::as_str).collect();
    retrieval::average_precision(&ranked, &relevant).value
}

/// Extended inferred AP of one ranked list. `judged` maps item to
/// `(stratum, relevant)`, `membership` maps unjudged pooled items to their
/// stratum and `rates` maps stratum to sampling rate.
#[pyfunction]
#[pyo3(signature = (ranked, judged, rates, membership = None, epsilon = retrieval::DEFAULT_EPSILON))]
fn xinfap(
    ranked: Vec<String>,
    judged: HashMap<String, (u32, bool)>,
    rates: BTreeMap<u32, f64>,
    membership: Option<HashMap<String, u32>>,
    epsilon: f64,
) -> PyResult<f64> {
    let membership = membership.unwrap_or_default();
    let topic = SampledTopic {
        judged: judged.iter().map(|(k, v)| (k.as_str(), *v)).collect(),
        membership: membership.iter().map(|(k, v)| (k.as_str(), *v)).collect(),
        rates,
    };
    retrieval::extended_inferred_ap(&ranked, &topic, epsilon).map(|s| s.value).map_err(err)
}

fn inner_runs(runs: &[PyRef<'_, PyRun>]) -> Vec<RankedRun> {
    runs.iter().map(|r| r.inner.clone()).collect()
}

/// Per-run, per-topic xinfAP against sampled judgments: `{run: {topic: value}}`.
#[pyfunction]
#[pyo3(signature = (runs, judgments, epsilon = retrieval::DEFAULT_EPSILON))]
fn score_runs(
    runs: Vec<PyRef<'_, PyRun>>,
    judgments: PyRef<'_, PyJudgments>,
    epsilon: f64,
) -> PyResult<BTreeMap<String, BTreeMap<String, f64>>> {
    let runs = inner_runs(&runs);
    let j = &judgments.inner;
    let membership = pooling::stratum_membership(&runs, &j.strata);
    let rates = j.strata.rates();
    let mut out = BTreeMap::new();
    for run in &runs {
        let mut per_topic = BTreeMap::new();
        for topic in j.topics.keys() {
            let judged = j.labels(topic);
            let unjudged = membership
                .get(topic)
                .map(|m| m.iter().filter(|(i, _)| !judged.contains_key(i.as_str())).map(|(i, s)| (i.as_str(), *s)).collect())
                .unwrap_or_default();
            let sampled = SampledTopic { judged, membership: unjudged, rates: rates.clone() };
            let items = run.ranked_items(topic);
            let v = retrieval::extended_inferred_ap(&items, &sampled, epsilon).map_err(err)?.value;
            per_topic.insert(topic.to_string(), v);
        }
        out.insert(run.run_tag.clone(), per_topic);
    }
    Ok(out)
}

/// Pool chunk files as `{file name: contents}`.
#[pyfunction]
#[pyo3(signature = (runs, strata = None, seed = 0, chunk_size = pooling::DEFAULT_CHUNK_SIZE))]
fn build_pools(runs: Vec<PyRef<'_, PyRun>>, strata: Option<&str>, seed: u64, chunk_size: usize) -> PyResult<BTreeMap<String, String>> {
    let table = match strata {
        Some(s) => io::parse_strata(s.as_bytes()).map_err(err)?,
        None => io::StrataTable::two_stratum_default(),
    };
    let spec = PoolSpec { chunk_size, ..PoolSpec::new(table, seed) };
    let pools = pooling::build_pools(&inner_runs(&runs), &spec).map_err(err)?;
    Ok(pools.chunk_files().into_iter().collect())
}

/// Pooling statistics for given counts: `(pct_unique, pct_unique_judged, pct_judged_relevant)`.
#[pyfunction]
fn pool_stats_row(total: u64, unique: u64, judged: u64, relevant: u64) -> (f64, f64, f64) {
    let r = pooling::PoolStatsRow::from_counts(io::TopicId::new("all"), total, unique, judged, relevant);
    (r.pct_unique, r.pct_unique_judged, r.pct_judged_relevant)
}

/// Mean novelty of every run: `{run: (raw, normalized)}`.
#[pyfunction]
#[pyo3(signature = (runs, judgments, unique_only = true))]
fn novelty(
    runs: Vec<PyRef<'_, PyRun>>,
    judgments: PyRef<'_, PyJudgments>,
    unique_only: bool,
) -> PyResult<BTreeMap<String, (f64, f64)>> {
    let runs = inner_runs(&runs);
    let mode = if unique_only { NoveltyMode::UniqueOnly } else { NoveltyMode::AllWeighted };
    let weights = NoveltyWeights::new(&runs);
    runs.iter()
        .map(|r| {
            let s = weights.score(r, &judgments.inner, mode).map_err(err)?;
            Ok((r.run_tag.clone(), (s.raw_mean, s.normalized_mean)))
        })
        .collect()
}

#[pyfunction]
#[pyo3(signature = (reference, system, activity, mode = "AD", min_temporal_iou = 0.0, spatial_iou = 0.5))]
fn det_curve(
    reference: PyRef<'_, PyActivitySet>,
    system: PyRef<'_, PyActivitySet>,
    activity: &str,
    mode: &str,
    min_temporal_iou: f64,
    spatial_iou: f64,
) -> PyResult<PyDetCurve> {
    let params = CongruenceParams { min_temporal_iou, spatial_iou, ..Default::default() };
    let curve = detection::det_curve(
        &reference.inner.restrict(activity),
        &system.inner.restrict(activity),
        &params,
        align_mode(mode)?,
        None,
    )
    .map_err(err)?;
    Ok(PyDetCurve { inner: curve })
}

/// Paired randomization test: `(p_value, observed, exhaustive)`.
#[pyfunction]
#[pyo3(signature = (a, b, iterations = stats::DEFAULT_ITERATIONS, seed = 0, paired_t = false, exhaustive_limit = stats::EXHAUSTIVE_LIMIT))]
fn randomization_test(
    a: Vec<f64>,
    b: Vec<f64>,
    iterations: u64,
    seed: u64,
    paired_t: bool,
    exhaustive_limit: usize,
) -> PyResult<(f64, f64, bool)> {
    let pairs = PairedScores::from_values(a, b).map_err(err)?;
    let statistic = if paired_t { TestStatistic::PairedT } else { TestStatistic::MeanDifference };
    let opts = RandomizationOptions { iterations, seed, statistic, exhaustive_limit };
    let r = stats::randomization_test(&pairs, &opts).map_err(err)?;
    Ok((r.p_value, r.observed, r.exhaustive))
}

#[pyfunction]
fn pearson(xs: Vec<f64>, ys: Vec<f64>) -> PyResult<f64> {
    stats::pearson(&xs, &ys).map_err(err)
}

/// DA aggregation of `(worker, system, video, rating)` records: `{system: (raw, z)}`.
#[pyfunction]
fn da_scores(records: Vec<(String, String, String, f64)>) -> PyResult<BTreeMap<String, (f64, f64)>> {
    let file = io::DaRatingFile {
        records: records
            .into_iter()
            .map(|(worker_id, system_id, video_id, rating)| io::DaRating { worker_id, system_id, video_id, rating })
            .collect(),
    };
    let table = stats::da_aggregate(&file, &Default::default()).map_err(err)?;
    Ok(table.systems.into_iter().map(|(s, d)| (s, (d.raw, d.z))).collect())
}

#[pyfunction]
fn msum_objective(correct: u64, possible: u64) -> PyResult<f64> {
    retrieval::msum_objective(correct, possible).map_err(err)
}

#[pyfunction]
fn msum_precision(correct: u64, false_claims: u64) -> f64 {
    retrieval::msum_precision(correct, false_claims).value
}

#[pyfunction]
fn msum_subjective(tempo: f64, contextuality: f64, redundancy: f64) -> PyResult<f64> {
    retrieval::msum_subjective(tempo, contextuality, redundancy).map_err(err)
}

#[pyfunction]
fn round_half_up(value: f64, decimals: u32) -> f64 {
    campaign_eval::round::round_half_up(value, decimals)
}

#[pymodule]
fn campaign_eval_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<PyRun>()?;
    m.add_class::<PyJudgments>()?;
    m.add_class::<PyActivitySet>()?;
    m.add_class::<PyDetCurve>()?;
    m.add_function(wrap_pyfunction!(parse_run, m)?)?;
    m.add_function(wrap_pyfunction!(run_from_lists, m)?)?;
    m.add_function(wrap_pyfunction!(parse_judgments, m)?)?;
    m.add_function(wrap_pyfunction!(parse_activity_set, m)?)?;
    m.add_function(wrap_pyfunction!(average_precision, m)?)?;
    m.add_function(wrap_pyfunction!(xinfap, m)?)?;
    m.add_function(wrap_pyfunction!(score_runs, m)?)?;
    m.add_function(wrap_pyfunction!(build_pools, m)?)?;
    m.add_function(wrap_pyfunction!(pool_stats_row, m)?)?;
    m.add_function(wrap_pyfunction!(novelty, m)?)?;
    m.add_function(wrap_pyfunction!(det_curve, m)?)?;
    m.add_function(wrap_pyfunction!(randomization_test, m)?)?;
    m.add_function(wrap_pyfunction!(pearson, m)?)?;
    m.add_function(wrap_pyfunction!(da_scores, m)?)?;
    m.add_function(wrap_pyfunction!(msum_objective, m)?)?;
    m.add_function(wrap_pyfunction!(msum_precision, m)?)?;
    m.add_function(wrap_pyfunction!(msum_subjective, m)?)?;
    m.add_function(wrap_pyfunction!(round_half_up, m)?)?;
    Ok(())
}
