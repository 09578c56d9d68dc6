use std::path::{Path, PathBuf};

use ndarray::{Array3, Axis};

use super::{parse_err, read_bytes, write_bytes};
use crate::error::{Result, UnmixError};
use crate::model::{check_wavelengths, HyperspectralCube};
use crate::scalar::Scalar;

const SAMPLE_FORMAT: &str = "float32";
const BYTE_ORDER: &str = "little_endian";
const INTERLEAVE: &str = "bsq";

/// Contents of a `.hdr` file.
#[derive(Debug, Clone, PartialEq)]
pub struct CubeHeader {
    pub rows: usize,
    pub cols: usize,
    pub bands: usize,
    pub wavelengths: Vec<f64>,
}

impl CubeHeader {
    /// Expected `.raw` length in bytes, `None` on overflow.
    pub fn payload_len(&self) -> Option<usize> {
        self.rows.checked_mul(self.cols)?.checked_mul(self.bands)?.checked_mul(4)
    }

    pub fn to_text(&self) -> String {
        let wl: Vec<String> = self.wavelengths.iter().map(f64::to_string).collect();
        format!(
            "rows: {}\ncols: {}\nbands: {}\nwavelengths: {}\nsample_format: {SAMPLE_FORMAT}\nbyte_order: {BYTE_ORDER}\ninterleave: {INTERLEAVE}\n",
            self.rows,
            self.cols,
            self.bands,
            wl.join(",")
        )
    }

    pub fn parse(bytes: &[u8]) -> Result<Self> {
        let text = std::str::from_utf8(bytes).map_err(|_| parse_err("header is not UTF-8"))?;
        let (mut rows, mut cols, mut bands, mut wavelengths) = (None, None, None, None);
        let (mut format, mut order, mut interleave) = (None, None, None);
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once(':')
                .ok_or_else(|| parse_err(format!("header line {n} has no ':'")))?;
            let value = value.trim();
            let dim = |v: &str| -> Result<usize> {
                match v.parse::<usize>() {
                    Ok(d) if d > 0 => Ok(d),
                    _ => Err(parse_err(format!("'{}' must be a positive integer", key.trim()))),
                }
            };
            let slot_taken = match key.trim() {
                "rows" => rows.replace(dim(value)?).is_some(),
                "cols" => cols.replace(dim(value)?).is_some(),
                "bands" => bands.replace(dim(value)?).is_some(),
                "wavelengths" => {
                    let wl = value
                        .split(',')
                        .map(|s| match s.trim().parse::<f64>() {
                            Ok(w) if w.is_finite() => Ok(w),
                            _ => Err(parse_err(format!("bad wavelength '{}'", s.trim()))),
                        })
                        .collect::<Result<Vec<_>>>()?;
                    wavelengths.replace(wl).is_some()
                }
                "sample_format" => format.replace(value.to_string()).is_some(),
                "byte_order" => order.replace(value.to_string()).is_some(),
                "interleave" => interleave.replace(value.to_string()).is_some(),
                other => return Err(parse_err(format!("unknown header key '{other}'"))),
            };
            if slot_taken {
                return Err(parse_err(format!("duplicate header key '{}'", key.trim())));
            }
        }
        let missing = |k: &str| parse_err(format!("header is missing '{k}'"));
        let expect = |got: Option<String>, key: &str, want: &str| -> Result<()> {
            match got {
                Some(v) if v == want => Ok(()),
                Some(v) => Err(parse_err(format!("unsupported {key} '{v}', expected '{want}'"))),
                None => Err(missing(key)),
            }
        };
        expect(format, "sample_format", SAMPLE_FORMAT)?;
        expect(order, "byte_order", BYTE_ORDER)?;
        expect(interleave, "interleave", INTERLEAVE)?;
        let header = Self {
            rows: rows.ok_or_else(|| missing("rows"))?,
            cols: cols.ok_or_else(|| missing("cols"))?,
            bands: bands.ok_or_else(|| missing("bands"))?,
            wavelengths: wavelengths.ok_or_else(|| missing("wavelengths"))?,
        };
        if header.wavelengths.len() != header.bands {
            return Err(UnmixError::HeaderMismatch(format!(
                "{} wavelengths for {} bands",
                header.wavelengths.len(),
                header.bands
            )));
        }
        check_wavelengths(&header.wavelengths)?;
        Ok(header)
    }
}

/// `(base.hdr, base.raw)` for a path given with or without either extension.
pub fn cube_paths(path: impl AsRef<Path>) -> (PathBuf, PathBuf) {
    let path = path.as_ref();
    let base = match path.extension().and_then(|e| e.to_str()) {
        Some("hdr" | "raw") => path.with_extension(""),
        _ => path.to_path_buf(),
    };
    let with = |ext: &str| {
        let mut s = base.clone().into_os_string();
        s.push(".");
        s.push(ext);
        PathBuf::from(s)
    };
    (with("hdr"), with("raw"))
}

pub fn parse_cube<T: Scalar>(header: &[u8], payload: &[u8]) -> Result<HyperspectralCube<T>> {
    let header = CubeHeader::parse(header)?;
    let expected = header
        .payload_len()
        .ok_or_else(|| UnmixError::HeaderMismatch("declared dimensions overflow".into()))?;
    if payload.len() != expected {
        return Err(UnmixError::HeaderMismatch(format!(
            "payload is {} bytes, header declares {}x{}x{} float32 = {expected}",
            payload.len(),
            header.rows,
            header.cols,
            header.bands
        )));
    }
    let samples: Vec<T> = payload
        .chunks_exact(4)
        .map(|b| T::lit(f32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64))
        .collect();
    if samples.iter().any(|v| !v.is_finite()) {
        return Err(parse_err("payload contains non-finite samples"));
    }
    let bsq = Array3::from_shape_vec((header.bands, header.rows, header.cols), samples)
        .map_err(parse_err)?;
    let values = bsq.permuted_axes([1, 2, 0]);
    HyperspectralCube::new(values, header.wavelengths)
}

pub fn read_cube<T: Scalar>(path: impl AsRef<Path>) -> Result<HyperspectralCube<T>> {
    let (hdr, raw) = cube_paths(path);
    parse_cube(&read_bytes(&hdr)?, &read_bytes(&raw)?)
}

/// Header text and BSQ payload for `cube`; samples are rounded to `f32`.
pub fn encode_cube<T: Scalar>(cube: &HyperspectralCube<T>) -> (String, Vec<u8>) {
    let header = CubeHeader {
        rows: cube.rows(),
        cols: cube.cols(),
        bands: cube.bands(),
        wavelengths: cube.wavelengths().to_vec(),
    };
    let mut payload = Vec::with_capacity(header.payload_len().unwrap_or(0));
    for band in cube.values().axis_iter(Axis(2)) {
        for v in band.iter() {
            payload.extend_from_slice(&(v.as_f64() as f32).to_le_bytes());
        }
    }
    (header.to_text(), payload)
}

pub fn write_cube<T: Scalar>(cube: &HyperspectralCube<T>, path: impl AsRef<Path>) -> Result<()> {
    let (hdr, raw) = cube_paths(path);
    let (text, payload) = encode_cube(cube);
    write_bytes(&hdr, text.as_bytes())?;
    write_bytes(&raw, &payload)
}
