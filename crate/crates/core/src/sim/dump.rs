//! Plain-text dump of delivered pairs, one `delivery_time_s,generation_duration_s,werner` line each.
//! Lines starting with `#` carry run metadata and are ignored on read.

use std::io::{self, Write};

use thiserror::Error;

use super::PairRecord;
use crate::scalar::Scalar;

pub const DUMP_HEADER: &str = "delivery_time_s,generation_duration_s,werner";

#[derive(Debug, Error)]
pub enum DumpError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Writes `# key=value` metadata lines, the column header and one line per record.
pub fn write_records<T: Scalar, W: Write>(
    out: &mut W,
    metadata: &[(String, String)],
    records: &[PairRecord<T>],
) -> io::Result<()> {
    for (key, value) in metadata {
        writeln!(out, "# {key}={value}")?;
    }
    writeln!(out, "{DUMP_HEADER}")?;
    for r in records {
        // Display is shortest round-trip, so parsing restores the exact value
        writeln!(out, "{},{},{}", r.delivery_time, r.generation_duration, r.werner)?;
    }
    Ok(())
}

pub fn format_records<T: Scalar>(metadata: &[(String, String)], records: &[PairRecord<T>]) -> String {
    let mut buf = Vec::new();
    write_records(&mut buf, metadata, records).expect("writing to memory cannot fail");
    String::from_utf8(buf).expect("dump output is ASCII")
}

pub fn parse_records<T: Scalar + std::str::FromStr>(source: &str) -> Result<Vec<PairRecord<T>>, DumpError> {
    let mut records = Vec::new();
    for (i, raw) in source.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') || line == DUMP_HEADER {
            continue;
        }
        let err = |message: String| DumpError::Parse { line: i + 1, message };
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 3 {
            return Err(err(format!("expected 3 fields, found {}", fields.len())));
        }
        let num = |s: &str| s.parse::<T>().map_err(|_| err(format!("invalid number {s:?}")));
        let record = PairRecord {
            delivery_time: num(fields[0])?,
            generation_duration: num(fields[1])?,
            werner: num(fields[2])?,
        };
        if !(record.generation_duration >= T::zero()) || !record.delivery_time.is_finite() {
            return Err(err("times must be finite and non-negative".into()));
        }
        records.push(record);
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_exact() {
        let recs = vec![
            PairRecord { werner: 0.1 + 0.2, delivery_time: 1.0 / 3.0, generation_duration: 1.0 / 3.0 },
            PairRecord { werner: 5e-324, delivery_time: 2.0, generation_duration: 2.0 - 1.0 / 3.0 },
        ];
        let meta = vec![("seed".to_string(), "7".to_string())];
        let text = format_records(&meta, &recs);
        assert!(text.starts_with("# seed=7\n"));
        assert_eq!(parse_records::<f64>(&text).unwrap(), recs);
    }

    #[test]
    fn rejects_malformed() {
        assert!(matches!(parse_records::<f64>("1,2\n"), Err(DumpError::Parse { line: 1, .. })));
        assert!(parse_records::<f64>("# x\n1,abc,0.5\n").is_err());
        assert!(parse_records::<f64>("1,-1,0.5\n").is_err());
    }
}
