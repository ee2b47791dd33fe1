//! Plain comma-separated input: `x,y` signals and `x1,x2,y` scatter rows.
//! A single non-numeric first line is treated as a header.

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum CsvError {
    #[error("line {line}: expected {expected} comma-separated values")]
    WrongArity { line: usize, expected: usize },
    #[error("line {line}: cannot parse `{value}` as a number")]
    BadNumber { line: usize, value: String },
    #[error("line {line}: non-finite value")]
    NotFinite { line: usize },
    #[error("duplicate design point x = {x}")]
    DuplicateX { x: f64 },
    #[error("no data rows")]
    Empty,
}

fn parse_rows(text: &str, cols: usize) -> Result<Vec<Vec<f64>>, CsvError> {
    let mut rows = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() {
            continue;
        }
        let fields: Vec<&str> = trimmed.split(',').map(str::trim).collect();
        let parsed: Result<Vec<f64>, _> = fields.iter().map(|f| f.parse::<f64>()).collect();
        match parsed {
            Ok(vals) => {
                if vals.len() != cols {
                    return Err(CsvError::WrongArity {
                        line,
                        expected: cols,
                    });
                }
                if vals.iter().any(|v| !v.is_finite()) {
                    return Err(CsvError::NotFinite { line });
                }
                rows.push(vals);
            }
            Err(_) => {
                // Only the first line may fail to parse, as a header.
                if rows.is_empty() && idx == 0 {
                    continue;
                }
                let bad = fields
                    .iter()
                    .find(|f| f.parse::<f64>().is_err())
                    .unwrap_or(&trimmed);
                return Err(CsvError::BadNumber {
                    line,
                    value: (*bad).to_string(),
                });
            }
        }
    }
    if rows.is_empty() {
        return Err(CsvError::Empty);
    }
    Ok(rows)
}

/// `x,y` rows sorted ascending by x; equal design points are rejected
/// because the chain graph needs a strict order.
pub fn read_signal(text: &str) -> Result<(Vec<f64>, Vec<f64>), CsvError> {
    let mut rows = parse_rows(text, 2)?;
    rows.sort_by(|a, b| a[0].partial_cmp(&b[0]).unwrap());
    for pair in rows.windows(2) {
        if pair[0][0] == pair[1][0] {
            return Err(CsvError::DuplicateX { x: pair[0][0] });
        }
    }
    Ok((
        rows.iter().map(|r| r[0]).collect(),
        rows.iter().map(|r| r[1]).collect(),
    ))
}

/// `x1,x2,y` rows in input order.
pub fn read_scatter(text: &str) -> Result<Vec<(f64, f64, f64)>, CsvError> {
    Ok(parse_rows(text, 3)?
        .into_iter()
        .map(|r| (r[0], r[1], r[2]))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn signal_basic() {
        let (x, y) = read_signal("0,1\n1,2\n").unwrap();
        assert_eq!(x, vec![0.0, 1.0]);
        assert_eq!(y, vec![1.0, 2.0]);
    }

    #[test]
    fn signal_sorts_by_x() {
        let (x, y) = read_signal("2,20\n0,0\n1,10\n").unwrap();
        assert_eq!(x, vec![0.0, 1.0, 2.0]);
        assert_eq!(y, vec![0.0, 10.0, 20.0]);
    }

    #[test]
    fn signal_rejects_duplicate_x() {
        assert_eq!(
            read_signal("0,1\n0,2\n"),
            Err(CsvError::DuplicateX { x: 0.0 })
        );
    }

    #[test]
    fn header_line_is_skipped() {
        let (x, _) = read_signal("x,y\n0,1\n1,2\n").unwrap();
        assert_eq!(x.len(), 2);
        let rows = read_scatter("x1,x2,y\n0.1,0.2,1\n").unwrap();
        assert_eq!(rows, vec![(0.1, 0.2, 1.0)]);
    }

    #[test]
    fn bad_number_mid_file_errors() {
        assert!(matches!(
            read_signal("0,1\n1,oops\n"),
            Err(CsvError::BadNumber { line: 2, .. })
        ));
    }

    #[test]
    fn wrong_arity_errors() {
        assert!(matches!(
            read_scatter("1,2\n"),
            Err(CsvError::WrongArity { line: 1, .. })
        ));
    }
}
