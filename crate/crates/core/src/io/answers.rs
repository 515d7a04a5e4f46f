use std::collections::HashSet;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::tab_fields;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Answer {
    /// Multiple-choice answer: a single choice id.
    Choice(String),
    /// Ranked candidate list, best first.
    Ranked(Vec<String>),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnswerEntry {
    pub query_id: String,
    pub answer: Answer,
}

/// Question-answering submission or answer key.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnswerSheet {
    pub entries: Vec<AnswerEntry>,
}

impl AnswerSheet {
    pub fn get(&self, query_id: &str) -> Option<&Answer> {
        self.entries.iter().find(|e| e.query_id == query_id).map(|e| &e.answer)
    }
}

/// Parses `query_id<TAB>mc|rl<TAB>answer_or_comma_list` lines.
pub fn parse_answer_sheet<R: BufRead>(reader: R) -> Result<AnswerSheet> {
    let mut entries = Vec::new();
    let mut seen = HashSet::new();
    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line?;
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let f = tab_fields(&line);
        if f.len() != 3 {
            return Err(Error::parse(lineno, format!("expected 3 fields, found {}", f.len())));
        }
        let query_id = f[0].trim().to_string();
        if !seen.insert(query_id.clone()) {
            return Err(Error::parse(lineno, format!("duplicate query {query_id}")));
        }
        let answer = match f[1].trim() {
            "mc" => Answer::Choice(f[2].trim().to_string()),
            "rl" => {
                let list: Vec<String> = f[2]
                    .split(',')
                    .map(|s| s.trim().to_string())
                    .filter(|s| !s.is_empty())
                    .collect();
                let mut uniq = HashSet::new();
                if let Some(dup) = list.iter().find(|c| !uniq.insert(c.as_str())) {
                    return Err(Error::parse(lineno, format!("duplicate candidate {dup} in ranked list")));
                }
                Answer::Ranked(list)
            }
            other => return Err(Error::parse(lineno, format!("unknown answer kind '{other}'"))),
        };
        entries.push(AnswerEntry { query_id, answer });
    }
    Ok(AnswerSheet { entries })
}

pub fn write_answer_sheet<W: Write>(sheet: &AnswerSheet, mut out: W) -> Result<()> {
    for e in &sheet.entries {
        match &e.answer {
            Answer::Choice(c) => writeln!(out, "{}\tmc\t{c}", e.query_id)?,
            Answer::Ranked(list) => writeln!(out, "{}\trl\t{}", e.query_id, list.join(","))?,
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_both_kinds() {
        let sheet = parse_answer_sheet("q1\tmc\tB\nq2\trl\tx,y,z\n".as_bytes()).unwrap();
        assert_eq!(sheet.get("q1"), Some(&Answer::Choice("B".into())));
        assert_eq!(sheet.get("q2"), Some(&Answer::Ranked(vec!["x".into(), "y".into(), "z".into()])));
        let mut out = Vec::new();
        write_answer_sheet(&sheet, &mut out).unwrap();
        assert_eq!(out, b"q1\tmc\tB\nq2\trl\tx,y,z\n");
    }

    #[test]
    fn rejects_duplicate_candidates() {
        let err = parse_answer_sheet("q\trl\ta,b,a\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
        assert!(parse_answer_sheet("q\txx\ta\n".as_bytes()).is_err());
    }
}
