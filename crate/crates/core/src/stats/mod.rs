//! Statistical post-analysis of campaign scores.

mod da;
mod randomization;

pub use da::{da_aggregate, DaOptions, DaTable, SystemDa, VideoDa, WorkerStats};
pub use randomization::{
    randomization_test, significance_matrix, PairedScores, RandomizationOptions,
    RandomizationResult, SignificanceMatrix, TestStatistic, DEFAULT_ITERATIONS,
    EXHAUSTIVE_LIMIT,
};

use crate::error::{Error, Result};

/// Sample Pearson correlation coefficient.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(Error::invalid(format!("length mismatch: {} vs {}", xs.len(), ys.len())));
    }
    if xs.len() < 2 {
        return Err(Error::invalid("correlation needs at least 2 points"));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::invalid("correlation undefined for a constant vector"));
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    // Single-pass raw-moment formula, independent of the centered one above.
    fn pearson_moments(xs: &[f64], ys: &[f64]) -> f64 {
        let n = xs.len() as f64;
        let (sx, sy): (f64, f64) = (xs.iter().sum(), ys.iter().sum());
        let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| x * y).sum();
        let sxx: f64 = xs.iter().map(|x| x * x).sum();
        let syy: f64 = ys.iter().map(|y| y * y).sum();
        (n * sxy - sx * sy) / ((n * sxx - sx * sx).sqrt() * (n * syy - sy * sy).sqrt())
    }

    #[test]
    fn exact_linear() {
        let xs = [1.0, 2.0, 3.5, 7.0];
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 * x + 1.0).collect();
        let neg: Vec<f64> = xs.iter().map(|x| -x).collect();
        assert!((pearson(&xs, &ys).unwrap() - 1.0).abs() < 1e-15);
        assert!((pearson(&xs, &neg).unwrap() + 1.0).abs() < 1e-15);
    }

    #[test]
    fn errors() {
        assert!(pearson(&[1.0, 1.0], &[1.0, 2.0]).is_err());
        assert!(pearson(&[1.0], &[1.0]).is_err());
        assert!(pearson(&[1.0, 2.0], &[1.0]).is_err());
    }

    proptest! {
        #[test]
        fn matches_moment_formula(v in prop::collection::vec((0.0f64..1.0, 0.0f64..1.0), 10)) {
            let (xs, ys): (Vec<f64>, Vec<f64>) = v.into_iter().unzip();
            let r = pearson(&xs, &ys).unwrap();
            prop_assert!((r - pearson_moments(&xs, &ys)).abs() < 1e-12);
        }

        #[test]
        fn affine_invariance(v in prop::collection::vec((-5.0f64..5.0, -5.0f64..5.0), 3..30),
                             a in 0.1f64..10.0, b in -10.0f64..10.0) {
            let (xs, ys): (Vec<f64>, Vec<f64>) = v.into_iter().unzip();
            let r = pearson(&xs, &ys).unwrap();
            let t: Vec<f64> = xs.iter().map(|x| a * x + b).collect();
            let neg: Vec<f64> = ys.iter().map(|y| -y).collect();
            prop_assert!((pearson(&t, &ys).unwrap() - r).abs() < 1e-9);
            prop_assert!((pearson(&xs, &neg).unwrap() + r).abs() < 1e-12);
        }
    }
}
