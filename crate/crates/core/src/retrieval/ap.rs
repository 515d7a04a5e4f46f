use std::collections::HashSet;

use super::Scored;

/// Non-interpolated average precision of a ranked list. Items outside
/// `relevant` (including unjudged ones) count as nonrelevant. With an empty
/// relevant set the value is 0 and flagged.
pub fn average_precision<S: AsRef<str>>(ranked: &[S], relevant: &HashSet<&str>) -> Scored {
    if relevant.is_empty() {
        return Scored::degenerate();
    }
    let mut hits = 0usize;
    let mut sum = 0.0;
    for (i, item) in ranked.iter().enumerate() {
        if relevant.contains(item.as_ref()) {
            hits += 1;
            sum += hits as f64 / (i + 1) as f64;
        }
    }
    Scored::new(sum / relevant.len() as f64)
}
