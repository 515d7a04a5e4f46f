use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prf {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// Set when any of the three hit a zero denominator.
    pub degenerate: bool,
}

/// Precision, recall and balanced F from detection counts.
pub fn prf(tp: u64, fp: u64, fn_: u64) -> Prf {
    let ratio = |num: u64, den: u64| if den == 0 { None } else { Some(num as f64 / den as f64) };
    let precision = ratio(tp, tp + fp);
    let recall = ratio(tp, tp + fn_);
    let f1 = ratio(2 * tp, 2 * tp + fp + fn_);
    Prf {
        precision: precision.unwrap_or(0.0),
        recall: recall.unwrap_or(0.0),
        f1: f1.unwrap_or(0.0),
        degenerate: precision.is_none() || recall.is_none() || f1.is_none(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn balanced_counts() {
        let p = prf(5, 5, 5);
        assert_eq!((p.precision, p.recall, p.f1), (0.5, 0.5, 0.5));
        assert_eq!(prf(3, 0, 0).f1, 1.0);
        let z = prf(0, 0, 0);
        assert!(z.degenerate);
        assert_eq!(z.f1, 0.0);
    }

    #[test]
    fn random_counts_match_harmonic_mean() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let (tp, fp, fn_) = (rng.random_range(1..500u64), rng.random_range(0..500u64), rng.random_range(0..500u64));
            let p = tp as f64 / (tp + fp) as f64;
            let r = tp as f64 / (tp + fn_) as f64;
            let got = prf(tp, fp, fn_);
            assert!((got.f1 - 2.0 * p * r / (p + r)).abs() < 1e-12);
            assert!(!got.degenerate);
        }
    }
}
