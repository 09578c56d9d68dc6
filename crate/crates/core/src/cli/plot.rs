use std::fmt::Write;
use std::path::Path;

use super::{create_dir, RunConfig, PlotArgs, EXIT_OK};
use crate::error::{Result, UnmixError};
use crate::io;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 60.0;

/// Line chart of cost against iteration. A single-entry trace is drawn as one
/// point marker.
pub fn trace_svg(costs: &[f64]) -> String {
    let (lo, hi) = costs
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &c| (lo.min(c), hi.max(c)));
    let span_x = (costs.len().max(2) - 1) as f64;
    let plot_w = WIDTH - 2.0 * MARGIN;
    let plot_h = HEIGHT - 2.0 * MARGIN;
    let px = |i: usize| MARGIN + plot_w * i as f64 / span_x;
    let py = |c: f64| {
        if hi > lo {
            HEIGHT - MARGIN - plot_h * (c - lo) / (hi - lo)
        } else {
            HEIGHT / 2.0
        }
    };

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let (x0, y0, x1, y1) = (MARGIN, HEIGHT - MARGIN, WIDTH - MARGIN, MARGIN);
    let _ = writeln!(
        svg,
        r#"<path d="M{x0} {y1} L{x0} {y0} L{x1} {y0}" fill="none" stroke="black"/>"#
    );
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" text-anchor="middle" font-size="12">iteration</text>"#,
        WIDTH / 2.0,
        HEIGHT - 20.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="15" y="{}" font-size="12" transform="rotate(-90 15 {})" text-anchor="middle">cost</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0
    );
    if !costs.is_empty() {
        let _ = writeln!(svg, r#"<text x="{}" y="{}" font-size="10" text-anchor="end">{hi:.4e}</text>"#, x0 - 4.0, y1 + 4.0);
        let _ = writeln!(svg, r#"<text x="{}" y="{}" font-size="10" text-anchor="end">{lo:.4e}</text>"#, x0 - 4.0, y0);
        let _ = writeln!(svg, r#"<text x="{x1}" y="{}" font-size="10" text-anchor="end">{}</text>"#, y0 + 14.0, costs.len() - 1);
    }
    match costs {
        [] => {}
        [c] => {
            let _ = writeln!(svg, r#"<circle cx="{}" cy="{}" r="3" fill="steelblue"/>"#, px(0), py(*c));
        }
        _ => {
            let points: Vec<String> = costs
                .iter()
                .enumerate()
                .map(|(i, &c)| format!("{:.2},{:.2}", px(i), py(c)))
                .collect();
            let _ = writeln!(
                svg,
                r#"<polyline points="{}" fill="none" stroke="steelblue" stroke-width="1.5"/>"#,
                points.join(" ")
            );
        }
    }
    svg.push_str("</svg>\n");
    svg
}

/// Binary 8-bit PGM of one abundance column laid out row-major.
pub fn abundance_pgm(values: impl IntoIterator<Item = f64>, rows: usize, cols: usize) -> Vec<u8> {
    let mut out = format!("P5\n{cols} {rows}\n255\n").into_bytes();
    out.extend(values.into_iter().map(|a| (255.0 * a.clamp(0.0, 1.0)).round() as u8));
    out
}

fn read_trace(path: &Path) -> Result<Vec<f64>> {
    let bytes = io::read_bytes(path)?;
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(&bytes[..]);
    let mut costs = Vec::new();
    for record in reader.records() {
        let record = record.map_err(io::parse_err)?;
        let cost = record
            .get(1)
            .and_then(|s| s.parse::<f64>().ok())
            .filter(|c| c.is_finite())
            .ok_or_else(|| io::parse_err(format!("bad trace row {}", costs.len())))?;
        costs.push(cost);
    }
    Ok(costs)
}

pub(crate) fn run(args: &PlotArgs, file: &RunConfig) -> Result<i32> {
    let out = super::require(&args.out, &file.out, "out")?;
    if let Some(trace) = args.trace.clone().or_else(|| file.trace.clone()) {
        let costs = read_trace(&trace)?;
        io::write_bytes(&out, trace_svg(&costs).as_bytes())?;
        return Ok(EXIT_OK);
    }
    let Some(path) = args.abundance.clone().or_else(|| file.abundance.clone()) else {
        return Err(UnmixError::InvalidConfig("one of --trace or --abundance is required".into()));
    };
    let rows = super::require(&args.rows, &file.rows, "rows")?;
    let cols = super::require(&args.cols, &file.cols, "cols")?;
    let a = io::read_matrix_csv::<f64>(&path)?;
    if rows.checked_mul(cols) != Some(a.nrows()) {
        return Err(UnmixError::dims(format!(
            "{rows}x{cols} raster for {} abundance rows",
            a.nrows()
        )));
    }
    create_dir(&out)?;
    for (k, column) in a.columns().into_iter().enumerate() {
        let pgm = abundance_pgm(column.iter().copied(), rows, cols);
        io::write_bytes(&out.join(format!("abundance_{}.pgm", k + 1)), &pgm)?;
    }
    Ok(EXIT_OK)
}
