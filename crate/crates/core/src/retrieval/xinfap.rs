//! Extended inferred average precision.
//!
//! Estimates AP from a stratified sample of judgments. For a judged-relevant
//! item at rank `k` in stratum `s(k)` the estimator adds
//!
//! ```text
//! (1 / p_s(k)) * (1/k + (k-1)/k * E_k)
//! E_k = 1/(k-1) * sum_s |D_s,k| * (rel_s,k + eps) / (rel_s,k + nonrel_s,k + 2 eps)
//! ```
//!
//! where `D_s,k` holds the items above rank `k` that belong to stratum `s`
//! (judged or not) and `rel`/`nonrel` count the judged ones among them. The
//! sum is divided by the estimated number of relevant items
//! `R = sum_s rel_s / p_s`. Items outside every stratum add nothing to `E_k`.
//! With `eps = 0`, a stratum with nothing judged above `k` contributes 0.

use std::collections::{BTreeMap, HashMap};

use super::Scored;
use crate::error::{Error, Result};

/// Smoothing constant used unless configured otherwise.
pub const DEFAULT_EPSILON: f64 = 1e-5;

/// Sampled judgments of one topic.
#[derive(Debug, Clone, Default)]
pub struct SampledTopic<'a> {
    /// Judged items: stratum and label.
    pub judged: HashMap<&'a str, (u32, bool)>,
    /// Stratum of pooled items that were not judged. Judged items take their
    /// stratum from `judged`.
    pub membership: HashMap<&'a str, u32>,
    /// Sampling rate of each stratum.
    pub rates: BTreeMap<u32, f64>,
}

impl<'a> SampledTopic<'a> {
    /// A fully judged topic: every item in `relevant` or `nonrelevant`, one stratum at rate 1.
    pub fn fully_judged(relevant: &[&'a str], nonrelevant: &[&'a str]) -> Self {
        let judged = relevant
            .iter()
            .map(|&i| (i, (1, true)))
            .chain(nonrelevant.iter().map(|&i| (i, (1, false))))
            .collect();
        SampledTopic { judged, membership: HashMap::new(), rates: BTreeMap::from([(1, 1.0)]) }
    }

    fn stratum_of(&self, item: &str) -> Option<u32> {
        self.judged.get(item).map(|&(s, _)| s).or_else(|| self.membership.get(item).copied())
    }

    pub fn num_relevant(&self) -> usize {
        self.judged.values().filter(|(_, r)| *r).count()
    }
}

#[derive(Default, Clone, Copy)]
struct StratumCounts {
    above: usize,
    rel: usize,
    nonrel: usize,
}

/// Extended inferred AP of a ranked list. A topic with no judged-relevant
/// items scores 0 and is flagged.
pub fn extended_inferred_ap<S: AsRef<str>>(ranked: &[S], topic: &SampledTopic<'_>, epsilon: f64) -> Result<Scored> {
    if !(epsilon >= 0.0) {
        return Err(Error::invalid(format!("epsilon must be nonnegative, got {epsilon}")));
    }
    let index: HashMap<u32, usize> = topic.rates.keys().enumerate().map(|(i, &s)| (s, i)).collect();
    for (&s, &rate) in &topic.rates {
        if !(rate > 0.0 && rate <= 1.0) {
            return Err(Error::invalid(format!("stratum {s}: sampling rate {rate} outside (0,1]")));
        }
    }
    let rates: Vec<f64> = topic.rates.values().copied().collect();

    let mut r_hat = 0.0;
    for (item, &(s, relevant)) in &topic.judged {
        let slot = *index
            .get(&s)
            .ok_or_else(|| Error::invalid(format!("judged item {item} lies in stratum {s} with no sampling rate")))?;
        if relevant {
            r_hat += 1.0 / rates[slot];
        }
    }
    if r_hat == 0.0 {
        return Ok(Scored::degenerate());
    }

    let mut counts = vec![StratumCounts::default(); rates.len()];
    let mut total = 0.0;
    for (i, item) in ranked.iter().enumerate() {
        let item = item.as_ref();
        let k = i + 1;
        let slot = topic.stratum_of(item).and_then(|s| index.get(&s).copied());
        let label = topic.judged.get(item).map(|&(_, r)| r);

        if label == Some(true) {
            let slot = slot.expect("judged strata checked above");
            let precision = if k == 1 {
                1.0
            } else {
                let expected_rel_above: f64 = counts
                    .iter()
                    .filter(|c| c.above > 0)
                    .map(|c| {
                        let denom = (c.rel + c.nonrel) as f64 + 2.0 * epsilon;
                        if denom == 0.0 {
                            0.0
                        } else {
                            c.above as f64 * (c.rel as f64 + epsilon) / denom
                        }
                    })
                    .sum();
                // 1/k + (k-1)/k * (expected_rel_above / (k-1))
                (1.0 + expected_rel_above) / k as f64
            };
            total += precision / rates[slot];
        }

        if let Some(slot) = slot {
            let c = &mut counts[slot];
            c.above += 1;
            match label {
                Some(true) => c.rel += 1,
                Some(false) => c.nonrel += 1,
                None => {}
            }
        }
    }
    Ok(Scored::new(total / r_hat))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::retrieval::average_precision;
    use std::collections::HashSet;

    fn names(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("d{i}")).collect()
    }

    #[test]
    fn full_judgment_equals_ap() {
        let docs = names(10);
        let refs: Vec<&str> = docs.iter().map(String::as_str).collect();
        for mask in 0u32..1024 {
            let rel: Vec<&str> = (0..10).filter(|i| mask & (1 << i) != 0).map(|i| refs[i]).collect();
            let non: Vec<&str> = (0..10).filter(|i| mask & (1 << i) == 0).map(|i| refs[i]).collect();
            let topic = SampledTopic::fully_judged(&rel, &non);
            // Retrieve the first 7 only, so unretrieved relevant items matter.
            let got = extended_inferred_ap(&refs[..7], &topic, 0.0).unwrap();
            let relset: HashSet<&str> = rel.iter().copied().collect();
            let want = average_precision(&refs[..7], &relset);
            assert_eq!(got.degenerate, want.degenerate);
            assert!((got.value - want.value).abs() < 1e-12, "mask {mask}");
        }
    }

    #[test]
    fn no_relevant_is_zero() {
        let topic = SampledTopic::fully_judged(&[], &["a", "b"]);
        let got = extended_inferred_ap(&["a", "b"], &topic, DEFAULT_EPSILON).unwrap();
        assert_eq!(got.value, 0.0);
        assert!(got.degenerate);
    }

    #[test]
    fn errors_on_missing_stratum_and_bad_rate() {
        let mut topic = SampledTopic::fully_judged(&["a"], &[]);
        topic.judged.insert("b", (9, false));
        assert!(extended_inferred_ap(&["a"], &topic, 0.0).is_err());
        let mut topic = SampledTopic::fully_judged(&["a"], &[]);
        topic.rates.insert(1, 0.0);
        assert!(extended_inferred_ap(&["a"], &topic, 0.0).is_err());
        let topic = SampledTopic::fully_judged(&["a"], &[]);
        assert!(extended_inferred_ap(&["a"], &topic, -1.0).is_err());
    }

    #[test]
    fn unsampled_items_enter_only_through_stratum_counts() {
        // a(rel, s1) u(unjudged, s2) b(rel, s2 judged) ; stratum 2 at rate 0.5.
        let mut topic = SampledTopic::default();
        topic.rates = BTreeMap::from([(1, 1.0), (2, 0.5)]);
        topic.judged = HashMap::from([("a", (1, true)), ("b", (2, true)), ("c", (2, false))]);
        topic.membership = HashMap::from([("u", 2)]);
        let got = extended_inferred_ap(&["a", "u", "b", "c"], &topic, 0.0).unwrap().value;
        // R = 1 + 1/0.5 = 3. rank1: 1. rank3 (b): above = {a in s1 rel, u in s2 no judged} ->
        // E*(k-1) = 1*1/1 + 0 = 1, precision = (1+1)/3, weight 2.
        let want = (1.0 + 2.0 * (2.0 / 3.0)) / 3.0;
        assert!((got - want).abs() < 1e-15);
        // With smoothing the unjudged stratum contributes eps/(2 eps) = 1/2 per item.
        let smoothed = extended_inferred_ap(&["a", "u", "b", "c"], &topic, 1e-5).unwrap().value;
        let want = (1.0 + 2.0 * ((1.0 + 1.0 + 0.5) / 3.0)) / 3.0;
        assert!((smoothed - want).abs() < 1e-5);
    }

    #[test]
    fn items_outside_strata_count_only_in_rank() {
        let mut topic = SampledTopic::fully_judged(&["a", "b"], &[]);
        topic.judged.remove("x");
        let got = extended_inferred_ap(&["a", "x", "b"], &topic, 0.0).unwrap().value;
        assert!((got - 0.5 * (1.0 + 2.0 / 3.0)).abs() < 1e-15);
    }
}
