use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::io::{Answer, AnswerSheet};

/// Mean reciprocal rank: the mean over questions of `1 / rank(correct)`,
/// 0 where the correct id is absent. An empty question set scores 0.
pub fn mrr<S: AsRef<str>, K: AsRef<str>>(answers: &[Vec<S>], keys: &[K]) -> Result<f64> {
    if answers.len() != keys.len() {
        return Err(Error::invalid(format!(
            "{} ranked lists but {} keys",
            answers.len(),
            keys.len()
        )));
    }
    if keys.is_empty() {
        return Ok(0.0);
    }
    let sum: f64 = answers
        .iter()
        .zip(keys)
        .map(|(list, key)| {
            list.iter()
                .position(|c| c.as_ref() == key.as_ref())
                .map_or(0.0, |p| 1.0 / (p + 1) as f64)
        })
        .sum();
    Ok(sum / keys.len() as f64)
}

/// MRR over the ranked-list questions of an answer key. The correct id of a
/// ranked-list key entry is its first candidate. Missing answers score 0.
pub fn mrr_sheets(answers: &AnswerSheet, key: &AnswerSheet) -> Result<f64> {
    check_known(answers, key)?;
    let mut lists: Vec<Vec<&str>> = Vec::new();
    let mut keys = Vec::new();
    for entry in &key.entries {
        let Answer::Ranked(correct) = &entry.answer else { continue };
        let Some(correct) = correct.first() else { continue };
        keys.push(correct.as_str());
        lists.push(match answers.get(&entry.query_id) {
            Some(Answer::Ranked(list)) => list.iter().map(String::as_str).collect(),
            Some(Answer::Choice(c)) => vec![c.as_str()],
            None => Vec::new(),
        });
    }
    mrr(&lists, &keys)
}

/// Fraction of multiple-choice questions in `key` answered correctly.
/// Unanswered questions count as wrong; order does not matter.
pub fn accuracy(answers: &AnswerSheet, key: &AnswerSheet) -> Result<f64> {
    check_known(answers, key)?;
    let mut total = 0usize;
    let mut correct = 0usize;
    for entry in &key.entries {
        let Answer::Choice(want) = &entry.answer else { continue };
        total += 1;
        if matches!(answers.get(&entry.query_id), Some(Answer::Choice(got)) if got == want) {
            correct += 1;
        }
    }
    Ok(if total == 0 { 0.0 } else { correct as f64 / total as f64 })
}

fn check_known(answers: &AnswerSheet, key: &AnswerSheet) -> Result<()> {
    let known: HashSet<&str> = key.entries.iter().map(|e| e.query_id.as_str()).collect();
    match answers.entries.iter().find(|e| !known.contains(e.query_id.as_str())) {
        Some(e) => Err(Error::invalid(format!("unknown query id {} in submission", e.query_id))),
        None => Ok(()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::AnswerEntry;
    use rand::seq::SliceRandom;
    use rand::{Rng, SeedableRng};

    #[test]
    fn reciprocal_ranks() {
        let answers = vec![vec!["k", "x"], vec!["x", "k"], vec!["x", "y", "z", "k"]];
        let got = mrr(&answers, &["k", "k", "k"]).unwrap();
        assert!((got - 1.75 / 3.0).abs() < 1e-15);
        assert!((got - 0.5833).abs() < 1e-4);
        assert_eq!(mrr(&[vec!["a"], vec!["b"]], &["a", "b"]).unwrap(), 1.0);
        assert!(mrr(&[vec!["a"]], &["a", "b"]).is_err());
    }

    #[test]
    fn random_instances_vs_scan() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let n = rng.random_range(1..8);
            let mut lists = Vec::new();
            let mut keys = Vec::new();
            let mut oracle = 0.0;
            for _ in 0..n {
                let mut list: Vec<String> = (0..6).map(|i| format!("c{i}")).collect();
                list.shuffle(&mut rng);
                list.truncate(rng.random_range(0..6));
                let key = format!("c{}", rng.random_range(0..6));
                for (i, c) in list.iter().enumerate() {
                    if *c == key {
                        oracle += 1.0 / (i as f64 + 1.0);
                        break;
                    }
                }
                lists.push(list);
                keys.push(key);
            }
            oracle /= n as f64;
            assert!((mrr(&lists, &keys).unwrap() - oracle).abs() < 1e-15);
        }
    }

    fn mc(pairs: &[(&str, &str)]) -> AnswerSheet {
        AnswerSheet {
            entries: pairs
                .iter()
                .map(|(q, a)| AnswerEntry { query_id: q.to_string(), answer: Answer::Choice(a.to_string()) })
                .collect(),
        }
    }

    #[test]
    fn accuracy_cases() {
        let key = mc(&[("q1", "a"), ("q2", "b"), ("q3", "c"), ("q4", "d")]);
        let sub = mc(&[("q1", "a"), ("q2", "b"), ("q3", "c"), ("q4", "x")]);
        assert_eq!(accuracy(&sub, &key).unwrap(), 0.75);
        let mut shuffled = sub.clone();
        shuffled.entries.reverse();
        assert_eq!(accuracy(&shuffled, &key).unwrap(), 0.75);

        let five = mc(&[("1", "a"), ("2", "a"), ("3", "a"), ("4", "a"), ("5", "a")]);
        assert_eq!(accuracy(&AnswerSheet::default(), &five).unwrap(), 0.0);

        assert!(accuracy(&mc(&[("zz", "a")]), &key).is_err());
    }

    #[test]
    fn key_as_submission_scores_one() {
        let mut key = mc(&[("q1", "a")]);
        key.entries.push(AnswerEntry { query_id: "q2".into(), answer: Answer::Ranked(vec!["p".into()]) });
        assert_eq!(accuracy(&key, &key).unwrap(), 1.0);
        assert_eq!(mrr_sheets(&key, &key).unwrap(), 1.0);
    }
}
