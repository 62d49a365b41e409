//! Single-column CSV ingestion.

use std::path::Path;

use serde::Serialize;

use crate::error::{CliError, Result};

/// Row accounting for one ingested file.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct IngestStats {
    /// Data rows seen, header excluded.
    pub rows: usize,
    pub kept: usize,
    /// Empty fields and blank lines.
    pub missing: usize,
    pub non_numeric: usize,
    /// `NaN`, `NA`, `null`, infinities and the like.
    pub nan: usize,
    /// Zeros removed by the zero filter.
    pub zeros: usize,
}

impl IngestStats {
    /// Rows dropped as unusable; filtered zeros are counted separately.
    pub fn dropped(&self) -> usize {
        self.missing + self.non_numeric + self.nan
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub values: Vec<f64>,
    pub stats: IngestStats,
}

const NAN_MARKERS: [&str; 5] = ["na", "n/a", "nan", "null", "none"];

/// Reads the `value` column of a headered file, or the only column of an
/// unheadered one.
pub fn ingest_csv(path: &Path, zero_filter: bool) -> Result<Sample> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
    let sample = ingest_str(&text, zero_filter)
        .map_err(|source| CliError::Csv { path: path.to_path_buf(), source })?
        .map_err(|msg| CliError::Config(format!("{}: {msg}", path.display())))?;
    if sample.values.is_empty() {
        return Err(CliError::EmptyData(path.to_path_buf()));
    }
    Ok(sample)
}

/// Parses CSV text. The outer error is a malformed file, the inner one a
/// file without a usable column.
pub fn ingest_str(
    text: &str,
    zero_filter: bool,
) -> std::result::Result<std::result::Result<Sample, String>, csv::Error> {
    let mut reader =
        csv::ReaderBuilder::new().has_headers(false).flexible(true).trim(csv::Trim::All).from_reader(text.as_bytes());
    let mut stats = IngestStats::default();
    let mut values = Vec::new();
    let mut record = csv::StringRecord::new();
    let mut column = None;
    let mut first = true;
    while reader.read_record(&mut record)? {
        if first {
            first = false;
            if let Some(i) = record.iter().position(|f| f.eq_ignore_ascii_case("value")) {
                column = Some(i);
                continue;
            }
            if record.len() != 1 {
                return Ok(Err(format!(
                    "expected a `value` column or a single column, found {} columns",
                    record.len()
                )));
            }
            column = Some(0);
        }
        stats.rows += 1;
        let field = record.get(column.unwrap_or(0)).unwrap_or("");
        if field.is_empty() {
            stats.missing += 1;
            continue;
        }
        match field.parse::<f64>() {
            Ok(v) if !v.is_finite() => stats.nan += 1,
            Ok(v) if v == 0.0 && zero_filter => stats.zeros += 1,
            Ok(v) => values.push(v),
            Err(_) if NAN_MARKERS.contains(&field.to_ascii_lowercase().as_str()) => stats.nan += 1,
            Err(_) => stats.non_numeric += 1,
        }
    }
    // The reader skips blank lines; count them as missing rows.
    let blank = text.lines().filter(|l| l.trim_end_matches('\r').is_empty()).count();
    stats.missing += blank;
    stats.rows += blank;
    stats.kept = values.len();
    Ok(Ok(Sample { values, stats }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ingest(text: &str, zero_filter: bool) -> Sample {
        ingest_str(text, zero_filter).unwrap().unwrap()
    }

    #[test]
    fn drops_empty_and_non_numeric() {
        let s = ingest("1.5\n\nx\n2.0\n", false);
        assert_eq!(s.values, vec![1.5, 2.0]);
        assert_eq!(s.stats.dropped(), 2);
        assert_eq!((s.stats.missing, s.stats.non_numeric), (1, 1));
    }

    #[test]
    fn zero_filter() {
        assert_eq!(ingest("0\n0\n3.1\n", true).values, vec![3.1]);
        let s = ingest("0\n0\n3.1\n", false);
        assert_eq!(s.values, vec![0.0, 0.0, 3.1]);
        assert_eq!(ingest("0\n0.0\n3.1\n", true).stats.zeros, 2);
    }

    #[test]
    fn headered_value_column() {
        let s = ingest("date,Value,flag\n2001-01-01,4.5,a\n2001-01-02,,b\n2001-01-03,NaN,c\n2001-01-04,NA,d\n", false);
        assert_eq!(s.values, vec![4.5]);
        assert_eq!((s.stats.rows, s.stats.missing, s.stats.nan), (4, 1, 2));
    }

    #[test]
    fn quoted_fields_and_crlf() {
        let s = ingest("value\r\n\"1.25\"\r\n 7 \r\n", false);
        assert_eq!(s.values, vec![1.25, 7.0]);
    }

    #[test]
    fn unheadered_multi_column_is_rejected() {
        assert!(ingest_str("1,2\n3,4\n", false).unwrap().is_err());
    }

    #[test]
    fn missing_file_is_io_error() {
        let err = ingest_csv(Path::new("/nonexistent/data.csv"), false).unwrap_err();
        assert!(matches!(err, CliError::Io { .. }));
    }
}
