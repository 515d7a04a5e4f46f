use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::fmt_real;
use crate::error::{Error, Result};

/// One direct-assessment rating on the 0-100 scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DaRating {
    pub worker_id: String,
    pub system_id: String,
    pub video_id: String,
    pub rating: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DaRatingFile {
    pub records: Vec<DaRating>,
}

const HEADER: [&str; 4] = ["worker_id", "system_id", "video_id", "rating"];

/// Parses a CSV with header `worker_id,system_id,video_id,rating`.
pub fn parse_da_ratings<R: Read>(reader: R) -> Result<DaRatingFile> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let header = rdr.headers()?.clone();
    if header.iter().collect::<Vec<_>>() != HEADER {
        return Err(Error::parse(1, format!("expected header {}", HEADER.join(","))));
    }
    let mut records = Vec::new();
    for (idx, row) in rdr.deserialize::<DaRating>().enumerate() {
        let line = idx + 2;
        let rec = row.map_err(|e| Error::parse(line, e.to_string()))?;
        if !(0.0..=100.0).contains(&rec.rating) {
            return Err(Error::parse(line, format!("rating {} outside [0,100]", rec.rating)));
        }
        records.push(rec);
    }
    Ok(DaRatingFile { records })
}

pub fn write_da_ratings<W: Write>(file: &DaRatingFile, mut out: W) -> Result<()> {
    writeln!(out, "{}", HEADER.join(","))?;
    for r in &file.records {
        writeln!(out, "{},{},{},{}", r.worker_id, r.system_id, r.video_id, fmt_real(r.rating))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_write() {
        let text = "worker_id,system_id,video_id,rating\nw1,s1,v1,40\nw1,s1,v2,60.5\n";
        let f = parse_da_ratings(text.as_bytes()).unwrap();
        assert_eq!(f.records.len(), 2);
        let mut out = Vec::new();
        write_da_ratings(&f, &mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), text);
    }

    #[test]
    fn out_of_range_and_bad_header() {
        let err = parse_da_ratings("worker_id,system_id,video_id,rating\nw,s,v,101\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
        assert!(parse_da_ratings("worker,system,video,rating\n".as_bytes()).is_err());
    }
}
