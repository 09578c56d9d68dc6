use std::path::Path;

use ndarray::Array2;

use super::{parse_err, read_bytes, write_bytes};
use crate::error::{Result, UnmixError};
use crate::simulate::GroundTruthMap;

pub fn parse_groundtruth(bytes: &[u8]) -> Result<GroundTruthMap> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(bytes);
    let mut labels = Vec::new();
    let mut cols = None;
    let mut rows = 0;
    for record in reader.records() {
        let record = record.map_err(parse_err)?;
        if *cols.get_or_insert(record.len()) != record.len() {
            return Err(parse_err(format!("row {rows} has {} labels", record.len())));
        }
        for field in record.iter() {
            let v: i64 = field
                .parse()
                .map_err(|_| parse_err(format!("row {rows}: '{field}' is not an integer")))?;
            if v < 0 {
                return Err(UnmixError::NegativeLabel(v));
            }
            labels.push(u32::try_from(v).map_err(|_| parse_err(format!("label {v} too large")))?);
        }
        rows += 1;
    }
    let cols = cols.ok_or_else(|| parse_err("groundtruth file is empty"))?;
    let labels = Array2::from_shape_vec((rows, cols), labels).map_err(parse_err)?;
    GroundTruthMap::new(labels)
}

pub fn read_groundtruth(path: impl AsRef<Path>) -> Result<GroundTruthMap> {
    parse_groundtruth(&read_bytes(path.as_ref())?)
}

pub fn write_groundtruth(map: &GroundTruthMap, path: impl AsRef<Path>) -> Result<()> {
    let mut out = String::new();
    for row in map.labels().outer_iter() {
        let line: Vec<String> = row.iter().map(u32::to_string).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    write_bytes(path.as_ref(), out.as_bytes())
}
