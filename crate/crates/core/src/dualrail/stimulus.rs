//! Input value files: one sample per line, whitespace-separated signed
//! decimal columns (one column per input port), `#` comments and blank
//! lines ignored.

use thiserror::Error;

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum StimulusError {
    #[error("line {line}: invalid value '{text}' (expected a signed decimal)")]
    BadValue { line: usize, text: String },
    #[error("line {line}: expected {expected} columns, got {got}")]
    RaggedRow {
        line: usize,
        expected: usize,
        got: usize,
    },
    #[error("stimulus file has no samples")]
    Empty,
}

/// Parse a stimulus file into sample rows.
pub fn parse_stimulus(text: &str) -> Result<Vec<Vec<i64>>, StimulusError> {
    let mut rows: Vec<Vec<i64>> = Vec::new();
    let mut width: Option<usize> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let mut row = Vec::new();
        for tok in body.split_whitespace() {
            let v: i64 = tok.parse().map_err(|_| StimulusError::BadValue {
                line,
                text: tok.to_string(),
            })?;
            row.push(v);
        }
        match width {
            None => width = Some(row.len()),
            Some(w) if w != row.len() => {
                return Err(StimulusError::RaggedRow {
                    line,
                    expected: w,
                    got: row.len(),
                })
            }
            _ => {}
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(StimulusError::Empty);
    }
    Ok(rows)
}
