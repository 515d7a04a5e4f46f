use super::Scored;
use crate::error::{Error, Result};

/// Fraction of the possible key facts a summary recalled.
pub fn msum_objective(correct: u64, possible: u64) -> Result<f64> {
    if possible == 0 {
        return Err(Error::invalid("objective score needs at least one possible key fact"));
    }
    if correct > possible {
        return Err(Error::invalid(format!("{correct} correct key facts exceed {possible} possible")));
    }
    Ok(correct as f64 / possible as f64)
}

/// `correct / (correct + false)`; 0 and flagged when nothing was claimed.
pub fn msum_precision(correct: u64, false_claims: u64) -> Scored {
    match correct + false_claims {
        0 => Scored::degenerate(),
        n => Scored::new(correct as f64 / n as f64),
    }
}

/// Combined subjective score from ratings on a 1..=7 scale. Redundancy is
/// the one scale where lower is better, so it enters as `8 - redundancy`.
pub fn msum_subjective(tempo_or_readability: f64, contextuality: f64, redundancy: f64) -> Result<f64> {
    for (name, v) in [
        ("tempo/readability", tempo_or_readability),
        ("contextuality", contextuality),
        ("redundancy", redundancy),
    ] {
        if !(1.0..=7.0).contains(&v) {
            return Err(Error::invalid(format!("{name} rating {v} outside [1,7]")));
        }
    }
    Ok((tempo_or_readability + contextuality + (8.0 - redundancy)) / 3.0)
}
