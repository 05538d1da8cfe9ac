//! Numeric CSV tables with a fixed header.

use std::io::Read;
use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum TableError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("expected header `{expected}`, found `{found}`")]
    Header { expected: String, found: String },
    #[error("line {line}: {reason}")]
    Row { line: u64, reason: String },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

/// Parsed rows; optional trailing columns that were absent are `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn column(&self, i: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r[i]).collect()
    }
}

/// Reads a table whose header must start with `required` and may continue
/// with a prefix of `optional`. Lines starting with `#` are comments.
pub fn read_table<R: Read>(reader: R, required: &[&str], optional: &[&str]) -> Result<Table, TableError> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(reader);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    let expected_full: Vec<&str> = required.iter().chain(optional).copied().collect();
    let ok = header.len() >= required.len()
        && header.len() <= expected_full.len()
        && header.iter().zip(&expected_full).all(|(h, e)| h == e);
    if !ok {
        return Err(TableError::Header {
            expected: expected_full.join(","),
            found: header.join(","),
        });
    }
    let mut rows = Vec::new();
    for record in rdr.records() {
        let record = record?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        if record.len() != header.len() {
            return Err(TableError::Row {
                line,
                reason: format!("expected {} fields, found {}", header.len(), record.len()),
            });
        }
        let mut row = Vec::with_capacity(header.len());
        for (field, name) in record.iter().zip(&header) {
            let v: f64 = field.parse().map_err(|_| TableError::Row {
                line,
                reason: format!("`{field}` in column {name} is not a number"),
            })?;
            if !v.is_finite() {
                return Err(TableError::Row {
                    line,
                    reason: format!("non-finite value in column {name}"),
                });
            }
            row.push(v);
        }
        rows.push(row);
    }
    Ok(Table { columns: header, rows })
}

pub fn read_table_file(path: &Path, required: &[&str], optional: &[&str]) -> Result<Table, TableError> {
    let file = std::fs::File::open(path).map_err(|source| TableError::Io {
        path: path.display().to_string(),
        source,
    })?;
    read_table(file, required, optional)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_required_and_optional_columns() {
        let text = "d_m,V_a_V,sigma_V\n# comment\n1e-6,0.002,1e-4\n2e-6,0.003,1e-4\n";
        let t = read_table(text.as_bytes(), &["d_m", "V_a_V"], &["sigma_V"]).unwrap();
        assert_eq!(t.columns.len(), 3);
        assert_eq!(t.column(1), vec![0.002, 0.003]);
        let t = read_table("d_m,V_a_V\n1,2\n".as_bytes(), &["d_m", "V_a_V"], &["sigma_V"]).unwrap();
        assert_eq!(t.rows, vec![vec![1.0, 2.0]]);
    }

    #[test]
    fn rejects_wrong_header_and_bad_numbers() {
        let r = read_table("x,y\n1,2\n".as_bytes(), &["d_m", "V_a_V"], &[]);
        assert!(matches!(r, Err(TableError::Header { .. })));
        let r = read_table("d_m,V_a_V\n1,abc\n".as_bytes(), &["d_m", "V_a_V"], &[]);
        assert!(matches!(r, Err(TableError::Row { line: 2, .. })), "{r:?}");
    }
}
