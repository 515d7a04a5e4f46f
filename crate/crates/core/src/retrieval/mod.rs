//! Ranked-retrieval and categorical scoring.

mod ap;
mod answers;
mod msum;
mod novelty;
mod prf;
mod xinfap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::TopicId;

pub use ap::average_precision;
pub use answers::{accuracy, mrr, mrr_sheets};
pub use msum::{msum_objective, msum_precision, msum_subjective};
pub use novelty::{novelty_score, NoveltyMode, NoveltyScore, NoveltyWeights, TopicNovelty};
pub use prf::{prf, Prf};
pub use xinfap::{extended_inferred_ap, SampledTopic, DEFAULT_EPSILON};

/// A metric value together with a flag set when it was defined by
/// convention (an empty relevant set, a zero denominator).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scored {
    pub value: f64,
    pub degenerate: bool,
}

impl Scored {
    pub fn new(value: f64) -> Self {
        Scored { value, degenerate: false }
    }

    pub fn degenerate() -> Self {
        Scored { value: 0.0, degenerate: true }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Support {
    pub num_judged: usize,
    pub num_relevant: usize,
    pub num_retrieved: usize,
}

/// Score of one metric on one topic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicScore {
    pub topic: TopicId,
    pub metric: String,
    pub value: f64,
    pub support: Support,
    /// Set when the topic has no relevant items and the value is 0 by convention.
    pub degenerate: bool,
}

/// Arithmetic mean over topics. Degenerate topics count as 0.
pub fn mean_over_topics(scores: &[TopicScore]) -> Result<f64> {
    if scores.is_empty() {
        return Err(Error::invalid("mean over an empty topic list"));
    }
    let sum: f64 = scores.iter().map(|s| if s.degenerate { 0.0 } else { s.value }).sum();
    Ok(sum / scores.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ts(value: f64) -> TopicScore {
        TopicScore { topic: "1".into(), metric: "ap".into(), value, support: Support::default(), degenerate: false }
    }

    #[test]
    fn simple_means() {
        assert!((mean_over_topics(&[ts(0.5), ts(0.7)]).unwrap() - 0.6).abs() < 1e-15);
        assert_eq!(mean_over_topics(&[ts(0.3)]).unwrap(), 0.3);
        assert!(mean_over_topics(&[]).is_err());
        let mut d = ts(0.9);
        d.degenerate = true;
        assert_eq!(mean_over_topics(&[d, ts(0.4)]).unwrap(), 0.2);
    }

    #[test]
    fn thirty_topics_match_compensated_sum() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(30);
        let scores: Vec<TopicScore> = (0..30).map(|_| ts(rng.random::<f64>())).collect();
        // Neumaier summation as the independent route.
        let (mut sum, mut comp) = (0.0f64, 0.0f64);
        for s in &scores {
            let t = sum + s.value;
            comp += if sum.abs() >= s.value.abs() { (sum - t) + s.value } else { (s.value - t) + sum };
            sum = t;
        }
        let oracle = (sum + comp) / 30.0;
        assert!((mean_over_topics(&scores).unwrap() - oracle).abs() < 1e-14);
    }
}
