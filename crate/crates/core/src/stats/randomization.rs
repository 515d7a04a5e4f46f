use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::TopicId;

pub const DEFAULT_ITERATIONS: u64 = 100_000;
/// Largest n enumerated exhaustively (2^n sign assignments).
pub const EXHAUSTIVE_LIMIT: usize = 20;
const CHUNK: u64 = 4096;
const TIE_TOLERANCE: f64 = 1e-12;

/// Per-topic scores of two runs, aligned by topic.
#[derive(Debug, Clone, PartialEq)]
pub struct PairedScores {
    pub topics: Vec<TopicId>,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

impl PairedScores {
    pub fn new(topics: Vec<TopicId>, a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        if topics.len() != a.len() || a.len() != b.len() {
            return Err(Error::invalid(format!(
                "length mismatch: {} topics, {} and {} scores",
                topics.len(),
                a.len(),
                b.len()
            )));
        }
        Ok(PairedScores { topics, a, b })
    }

    pub fn from_values(a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        let topics = (1..=a.len() as u32).map(TopicId::from).collect();
        Self::new(topics, a, b)
    }

    /// Aligns two per-topic score maps; both must cover the same topics.
    pub fn from_maps(a: &std::collections::BTreeMap<TopicId, f64>, b: &std::collections::BTreeMap<TopicId, f64>) -> Result<Self> {
        if let Some(t) = a.keys().find(|t| !b.contains_key(*t)).or_else(|| b.keys().find(|t| !a.contains_key(*t))) {
            return Err(Error::invalid(format!("topic {t} is scored for only one run")));
        }
        Self::new(a.keys().cloned().collect(), a.values().copied().collect(), b.values().copied().collect())
    }

    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TestStatistic {
    /// |mean(a - b)|
    #[default]
    MeanDifference,
    /// |paired t| on the differences.
    PairedT,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RandomizationOptions {
    pub iterations: u64,
    pub seed: u64,
    pub statistic: TestStatistic,
    /// Enumerate all assignments when n is at most this.
    pub exhaustive_limit: usize,
}

impl Default for RandomizationOptions {
    fn default() -> Self {
        RandomizationOptions {
            iterations: DEFAULT_ITERATIONS,
            seed: 0,
            statistic: TestStatistic::MeanDifference,
            exhaustive_limit: EXHAUSTIVE_LIMIT,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RandomizationResult {
    pub p_value: f64,
    pub observed: f64,
    pub mean_difference: f64,
    pub exhaustive: bool,
    /// Assignments counted, including the identity.
    pub assignments: u64,
}

// Sign flips leave sum of squares unchanged, so both statistics are functions
// of the signed sum alone.
struct Stat {
    n: f64,
    sum_sq: f64,
    kind: TestStatistic,
}

impl Stat {
    fn eval(&self, sum: f64) -> f64 {
        let mean = sum / self.n;
        match self.kind {
            TestStatistic::MeanDifference => mean.abs(),
            TestStatistic::PairedT => {
                let var = (self.sum_sq - self.n * mean * mean) / (self.n - 1.0);
                if var > 1e-300 {
                    mean.abs() / (var / self.n).sqrt()
                } else if mean.abs() > 0.0 {
                    f64::INFINITY
                } else {
                    0.0
                }
            }
        }
    }
}

/// Two-sided paired randomization test over sign flips of the per-topic
/// differences. Exhaustive for small n, seeded Monte Carlo otherwise. Monte
/// Carlo draws come in fixed chunks, each from its own counter-based stream,
/// so the p-value does not depend on the thread count.
pub fn randomization_test(pairs: &PairedScores, options: &RandomizationOptions) -> Result<RandomizationResult> {
    let n = pairs.len();
    if n < 2 {
        return Err(Error::invalid(format!("randomization test needs at least 2 topics, got {n}")));
    }
    let d: Vec<f64> = pairs.a.iter().zip(&pairs.b).map(|(a, b)| a - b).collect();
    let stat = Stat { n: n as f64, sum_sq: d.iter().map(|x| x * x).sum(), kind: options.statistic };
    let total: f64 = d.iter().sum();
    let observed = stat.eval(total);
    let cutoff = if observed.is_finite() { observed - TIE_TOLERANCE * observed.abs().max(1.0) } else { observed };
    let hit = |sum: f64| stat.eval(sum) >= cutoff;

    if n <= options.exhaustive_limit.min(EXHAUSTIVE_LIMIT) {
        let masks = 1u64 << n;
        let count: u64 = (0..masks.div_ceil(CHUNK))
            .into_par_iter()
            .map(|c| {
                (c * CHUNK..((c + 1) * CHUNK).min(masks))
                    .filter(|&mask| {
                        let flipped: f64 = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| d[i]).sum();
                        hit(total - 2.0 * flipped)
                    })
                    .count() as u64
            })
            .sum();
        return Ok(RandomizationResult {
            p_value: count as f64 / masks as f64,
            observed,
            mean_difference: total / n as f64,
            exhaustive: true,
            assignments: masks,
        });
    }

    if options.iterations == 0 {
        return Err(Error::invalid("Monte Carlo randomization needs at least 1 iteration"));
    }
    let iterations = options.iterations;
    let count: u64 = (0..iterations.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
            rng.set_stream(c);
            (c * CHUNK..((c + 1) * CHUNK).min(iterations))
                .filter(|_| hit(d.iter().map(|x| if rng.random::<bool>() { -x } else { *x }).sum()))
                .count() as u64
        })
        .sum();
    Ok(RandomizationResult {
        p_value: (count + 1) as f64 / (iterations + 1) as f64,
        observed,
        mean_difference: total / n as f64,
        exhaustive: false,
        assignments: iterations + 1,
    })
}

/// Pairwise tests between runs. `better[i][j]` holds when run i has the higher
/// mean and the difference is significant at `alpha`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignificanceMatrix {
    pub names: Vec<String>,
    pub means: Vec<f64>,
    pub p_values: Vec<Vec<Option<f64>>>,
    pub better: Vec<Vec<bool>>,
    pub alpha: f64,
}

impl SignificanceMatrix {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("run");
        for n in &self.names {
            out.push(',');
            out.push_str(n);
        }
        out.push('\n');
        for (i, row) in self.p_values.iter().enumerate() {
            out.push_str(&self.names[i]);
            for p in row {
                out.push(',');
                if let Some(p) = p {
                    out.push_str(&format!("{p}"));
                }
            }
            out.push('\n');
        }
        out
    }
}

pub fn significance_matrix(
    runs: &[(String, Vec<f64>)],
    options: &RandomizationOptions,
    alpha: f64,
) -> Result<SignificanceMatrix> {
    let k = runs.len();
    let pairs: Vec<(usize, usize)> = (0..k).flat_map(|i| (i + 1..k).map(move |j| (i, j))).collect();
    let results: Vec<f64> = pairs
        .par_iter()
        .map(|&(i, j)| {
            let p = PairedScores::from_values(runs[i].1.clone(), runs[j].1.clone())?;
            randomization_test(&p, options).map(|r| r.p_value)
        })
        .collect::<Result<_>>()?;
    let means: Vec<f64> = runs.iter().map(|(_, v)| v.iter().sum::<f64>() / v.len().max(1) as f64).collect();
    let mut p_values = vec![vec![None; k]; k];
    let mut better = vec![vec![false; k]; k];
    for (&(i, j), &p) in pairs.iter().zip(&results) {
        p_values[i][j] = Some(p);
        p_values[j][i] = Some(p);
        if p < alpha {
            if means[i] > means[j] {
                better[i][j] = true;
            } else if means[j] > means[i] {
                better[j][i] = true;
            }
        }
    }
    Ok(SignificanceMatrix { names: runs.iter().map(|(n, _)| n.clone()).collect(), means, p_values, better, alpha })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn test(a: &[f64], b: &[f64], opts: &RandomizationOptions) -> RandomizationResult {
        randomization_test(&PairedScores::from_values(a.to_vec(), b.to_vec()).unwrap(), opts).unwrap()
    }

    #[test]
    fn identical_runs() {
        let a = [0.1, 0.5, 0.3, 0.9];
        assert_eq!(test(&a, &a, &Default::default()).p_value, 1.0);
        let a: Vec<f64> = (0..30).map(|i| i as f64 / 30.0).collect();
        assert_eq!(test(&a, &a, &Default::default()).p_value, 1.0);
    }

    #[test]
    fn three_topics() {
        let r = test(&[1.0; 3], &[0.0; 3], &Default::default());
        assert!(r.exhaustive);
        assert_eq!((r.p_value, r.assignments), (0.25, 8));
        let t = test(&[1.0; 3], &[0.0; 3], &RandomizationOptions { statistic: TestStatistic::PairedT, ..Default::default() });
        assert_eq!(t.p_value, 0.25);
    }

    #[test]
    fn symmetric_and_bounded() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in [2, 5, 12, 25] {
            let a: Vec<f64> = (0..n).map(|_| rng.random()).collect();
            let b: Vec<f64> = (0..n).map(|_| rng.random()).collect();
            let opts = RandomizationOptions { iterations: 2000, ..Default::default() };
            let ab = test(&a, &b, &opts).p_value;
            assert_eq!(ab, test(&b, &a, &opts).p_value);
            assert!(ab > 0.0 && ab <= 1.0);
        }
    }

    #[test]
    fn monte_carlo_near_exhaustive() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let a: Vec<f64> = (0..15).map(|_| rng.random::<f64>()).collect();
        let b: Vec<f64> = a.iter().map(|x| x - 0.08 + 0.3 * (rng.random::<f64>() - 0.5)).collect();
        let exact = test(&a, &b, &Default::default()).p_value;
        let mc_opts = RandomizationOptions { exhaustive_limit: 0, seed: 5, ..Default::default() };
        let mc = test(&a, &b, &mc_opts);
        assert!(!mc.exhaustive);
        let sigma = (exact * (1.0 - exact) / mc_opts.iterations as f64).sqrt();
        assert!((mc.p_value - exact).abs() <= 3.0 * sigma, "{} vs {exact}", mc.p_value);
        assert_eq!(mc, test(&a, &b, &mc_opts));
    }

    #[test]
    fn thread_count_does_not_matter() {
        let a: Vec<f64> = (0..25).map(|i| (i as f64 * 0.37).sin()).collect();
        let b: Vec<f64> = (0..25).map(|i| (i as f64 * 0.11).cos()).collect();
        let opts = RandomizationOptions { iterations: 20_000, seed: 9, ..Default::default() };
        let run = |threads| {
            rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(|| test(&a, &b, &opts))
        };
        assert_eq!(run(1), run(4));
    }

    #[test]
    fn errors() {
        assert!(PairedScores::from_values(vec![1.0], vec![1.0, 2.0]).is_err());
        let one = PairedScores::from_values(vec![1.0], vec![0.0]).unwrap();
        assert!(randomization_test(&one, &Default::default()).is_err());
    }

    #[test]
    fn matrix() {
        let runs = vec![
            ("hi".to_string(), vec![0.9; 8]),
            ("lo".to_string(), vec![0.1; 8]),
            ("lo2".to_string(), vec![0.1; 8]),
        ];
        let m = significance_matrix(&runs, &Default::default(), 0.05).unwrap();
        assert!(m.better[0][1] && m.better[0][2]);
        assert!(!m.better[1][0] && !m.better[1][2] && !m.better[2][1]);
        assert_eq!(m.p_values[1][2], Some(1.0));
        assert_eq!(m.p_values[0][0], None);
        assert!(m.to_csv().starts_with("run,hi,lo,lo2\nhi,,"));
    }
}
