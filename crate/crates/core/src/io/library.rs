use std::path::Path;

use ndarray::Array2;

use super::{parse_err, read_bytes, write_bytes};
use crate::error::{Result, UnmixError};
use crate::scalar::Scalar;
use crate::simulate::SpectralLibrary;

/// Reflectances down to this value are read as calibration noise and clamped
/// to zero; anything lower is rejected.
const NEGATIVE_TOLERANCE: f64 = -0.01;

pub fn parse_library<T: Scalar>(bytes: &[u8]) -> Result<SpectralLibrary<T>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(bytes);
    let header = reader.headers().map_err(parse_err)?.clone();
    if header.get(0) != Some("wavelength_nm") {
        return Err(parse_err("library header must start with 'wavelength_nm'"));
    }
    let names: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
    if names.is_empty() || names.iter().any(|n| n.is_empty()) {
        return Err(parse_err("library needs at least one named signature"));
    }

    let mut wavelengths = Vec::new();
    let mut columns: Vec<Vec<T>> = vec![Vec::new(); names.len()];
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(parse_err)?;
        let mut fields = record.iter();
        let wl: f64 = parse_number(fields.next().unwrap_or(""), row)?;
        if let Some(&prev) = wavelengths.last() {
            if wl <= prev {
                return Err(UnmixError::NonMonotoneWavelengths(row));
            }
        }
        wavelengths.push(wl);
        for (k, field) in fields.enumerate() {
            let mut value = parse_number(field, row)?;
            if value < NEGATIVE_TOLERANCE {
                return Err(UnmixError::NegativeReflectance {
                    signature: names[k].clone(),
                    value,
                });
            }
            if value < 0.0 {
                value = 0.0;
            }
            columns[k].push(T::from_f64(value).ok_or_else(|| parse_err("value out of range"))?);
        }
    }
    if wavelengths.is_empty() {
        return Err(parse_err("library has no rows"));
    }
    let bands = wavelengths.len();
    let flat: Vec<T> = columns.into_iter().flatten().collect();
    let signatures = Array2::from_shape_vec((names.len(), bands), flat).map_err(parse_err)?;
    SpectralLibrary::new(wavelengths, names, signatures)
}

fn parse_number(field: &str, row: usize) -> Result<f64> {
    let v: f64 = field
        .parse()
        .map_err(|_| parse_err(format!("row {row}: '{field}' is not a number")))?;
    if !v.is_finite() {
        return Err(parse_err(format!("row {row}: non-finite value '{field}'")));
    }
    Ok(v)
}

pub fn read_library<T: Scalar>(path: impl AsRef<Path>) -> Result<SpectralLibrary<T>> {
    parse_library(&read_bytes(path.as_ref())?)
}

pub fn write_library<T: Scalar>(library: &SpectralLibrary<T>, path: impl AsRef<Path>) -> Result<()> {
    let mut out = String::from("wavelength_nm");
    for name in library.names() {
        out.push(',');
        out.push_str(name);
    }
    out.push('\n');
    for (b, wl) in library.wavelengths().iter().enumerate() {
        out.push_str(&wl.to_string());
        for v in library.signatures().column(b) {
            out.push(',');
            out.push_str(&v.as_f64().to_string());
        }
        out.push('\n');
    }
    write_bytes(path.as_ref(), out.as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_library() {
        let lib: SpectralLibrary<f64> = parse_library(b"wavelength_nm,grass\n400,0.1\n500,0.2").unwrap();
        assert_eq!(lib.names(), &["grass".to_string()]);
        assert_eq!(lib.wavelengths(), &[400.0, 500.0]);
        assert_eq!(lib.signature("grass").unwrap().to_vec(), vec![0.1, 0.2]);
    }

    #[test]
    fn rejects_bad_libraries() {
        let cases: [(&[u8], fn(&UnmixError) -> bool); 6] = [
            (b"wavelength_nm,a\n400,0.1\n400,0.2", |e| matches!(e, UnmixError::NonMonotoneWavelengths(1))),
            (b"wavelength_nm,a\n400,-0.5", |e| matches!(e, UnmixError::NegativeReflectance { .. })),
            (b"wavelength_nm,a\n400,0.1,0.3", |e| matches!(e, UnmixError::Parse(_))),
            (b"wavelength_nm,a\n400,abc", |e| matches!(e, UnmixError::Parse(_))),
            (b"band,a\n400,0.1", |e| matches!(e, UnmixError::Parse(_))),
            (b"wavelength_nm,a\n", |e| matches!(e, UnmixError::Parse(_))),
        ];
        for (bytes, check) in cases {
            let err = parse_library::<f64>(bytes).unwrap_err();
            assert!(check(&err), "{:?} -> {err:?}", String::from_utf8_lossy(bytes));
        }
    }

    #[test]
    fn small_negatives_clamp_to_zero() {
        let lib: SpectralLibrary<f64> = parse_library(b"wavelength_nm,a\n400,-0.005\n410,0.2").unwrap();
        assert_eq!(lib.signature("a").unwrap()[0], 0.0);
    }

    #[test]
    fn bundled_library_parses() {
        let lib: SpectralLibrary<f64> =
            parse_library(include_bytes!("../../data/mini_library.csv")).unwrap();
        assert_eq!(lib.names().len(), 5);
        assert_eq!(lib.bands(), 53);
    }

    #[test]
    fn fifty_band_round_trip() {
        let names: Vec<String> = ["a", "b", "c", "d"].iter().map(|s| s.to_string()).collect();
        let sig = Array2::from_shape_fn((4, 50), |(k, b)| ((k * 50 + b) as f64 * 0.37).sin().abs());
        let wl: Vec<f64> = (0..50).map(|b| 400.0 + 10.5 * b as f64).collect();
        let lib = SpectralLibrary::new(wl, names, sig).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("lib.csv");
        write_library(&lib, &path).unwrap();
        let back: SpectralLibrary<f64> = read_library(&path).unwrap();
        assert_eq!(back.names(), lib.names());
        assert_eq!(back.wavelengths(), lib.wavelengths());
        for (a, b) in back.signatures().iter().zip(lib.signatures().iter()) {
            assert!((a - b).abs() <= 1e-12);
        }
    }
}
