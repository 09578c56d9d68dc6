use std::path::Path;

use ndarray::Array2;

use super::{parse_err, read_bytes, write_bytes};
use crate::error::Result;
use crate::scalar::Scalar;

/// Comma-separated rows; each value printed in the shortest form that parses
/// back to the same `f64` (at most 17 significant digits).
pub fn format_matrix_csv<T: Scalar>(matrix: &Array2<T>) -> String {
    let mut out = String::new();
    for row in matrix.outer_iter() {
        let line: Vec<String> = row.iter().map(|v| v.as_f64().to_string()).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

pub fn write_matrix_csv<T: Scalar>(matrix: &Array2<T>, path: impl AsRef<Path>) -> Result<()> {
    write_bytes(path.as_ref(), format_matrix_csv(matrix).as_bytes())
}

pub fn parse_matrix_csv<T: Scalar>(bytes: &[u8]) -> Result<Array2<T>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(bytes);
    let mut values = Vec::new();
    let mut cols = None;
    let mut rows = 0;
    for record in reader.records() {
        let record = record.map_err(parse_err)?;
        if *cols.get_or_insert(record.len()) != record.len() {
            return Err(parse_err(format!("row {rows} has {} values", record.len())));
        }
        for field in record.iter() {
            let v: f64 = field
                .parse()
                .map_err(|_| parse_err(format!("row {rows}: '{field}' is not a number")))?;
            if !v.is_finite() {
                return Err(parse_err(format!("row {rows}: non-finite value '{field}'")));
            }
            values.push(T::from_f64(v).ok_or_else(|| parse_err("value out of range"))?);
        }
        rows += 1;
    }
    let cols = cols.ok_or_else(|| parse_err("matrix file is empty"))?;
    Array2::from_shape_vec((rows, cols), values).map_err(parse_err)
}

pub fn read_matrix_csv<T: Scalar>(path: impl AsRef<Path>) -> Result<Array2<T>> {
    parse_matrix_csv(&read_bytes(path.as_ref())?)
}
