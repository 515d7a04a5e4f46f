//! Inclusive frame interval sets.

/// Sorted, disjoint, non-adjacent inclusive intervals.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub(crate) struct IntervalSet(Vec<(u64, u64)>);

impl IntervalSet {
    pub(crate) fn from_spans(mut spans: Vec<(u64, u64)>) -> Self {
        spans.sort_unstable();
        let mut merged: Vec<(u64, u64)> = Vec::with_capacity(spans.len());
        for (lo, hi) in spans {
            match merged.last_mut() {
                Some(last) if lo <= last.1.saturating_add(1) => last.1 = last.1.max(hi),
                _ => merged.push((lo, hi)),
            }
        }
        IntervalSet(merged)
    }

    pub(crate) fn clip(&self, lo: u64, hi: u64) -> Self {
        IntervalSet(
            self.0
                .iter()
                .filter_map(|&(a, b)| {
                    let (a, b) = (a.max(lo), b.min(hi));
                    (a <= b).then_some((a, b))
                })
                .collect(),
        )
    }

    pub(crate) fn len(&self) -> u64 {
        self.0.iter().map(|(a, b)| b - a + 1).sum()
    }

    pub(crate) fn intersection_len(&self, other: &IntervalSet) -> u64 {
        let (mut i, mut j, mut total) = (0, 0, 0);
        while i < self.0.len() && j < other.0.len() {
            let (a0, a1) = self.0[i];
            let (b0, b1) = other.0[j];
            let lo = a0.max(b0);
            let hi = a1.min(b1);
            if lo <= hi {
                total += hi - lo + 1;
            }
            if a1 < b1 {
                i += 1;
            } else {
                j += 1;
            }
        }
        total
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn merge_and_measure() {
        let a = IntervalSet::from_spans(vec![(5, 9), (0, 2), (3, 4), (20, 25)]);
        assert_eq!(a.0, vec![(0, 9), (20, 25)]);
        assert_eq!(a.len(), 16);
        let b = IntervalSet::from_spans(vec![(8, 21)]);
        assert_eq!(a.intersection_len(&b), 4);
        assert_eq!(a.clip(1, 22).len(), 12);
    }
}
