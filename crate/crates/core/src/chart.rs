//! Chart serialisation: CSV (the interchange format), JSON, SVG and ASCII.
//!
//! CSV has the header `s,t,u,dim`, one row per non-zero cell in `(s, t, u)`
//! order, with `u` left empty for singly graded charts. A CSV file carries no
//! window, so reading one back infers `smax`/`tmax` from the largest cell.

use std::fmt::Write as _;
use std::str::FromStr;

use serde::Deserialize;

use crate::homological::{CellKey, ChartCell, ExtChart};

#[derive(Debug, thiserror::Error)]
pub enum ChartIoError {
    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("bad chart: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChartFormat {
    Csv,
    Json,
    Svg,
    Ascii,
}

impl FromStr for ChartFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(ChartFormat::Csv),
            "json" => Ok(ChartFormat::Json),
            "svg" => Ok(ChartFormat::Svg),
            "ascii" => Ok(ChartFormat::Ascii),
            other => Err(format!("unknown format '{other}' (expected csv, json, svg or ascii)")),
        }
    }
}

pub fn render(chart: &ExtChart, format: ChartFormat) -> Result<String, ChartIoError> {
    Ok(match format {
        ChartFormat::Csv => to_csv(chart)?,
        ChartFormat::Json => to_json(chart)?,
        ChartFormat::Svg => to_svg(chart),
        ChartFormat::Ascii => to_ascii(chart),
    })
}

pub fn to_csv(chart: &ExtChart) -> Result<String, ChartIoError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["s", "t", "u", "dim"])?;
    for c in &chart.cells {
        let u = c.u.map(|u| u.to_string()).unwrap_or_default();
        w.write_record([c.s.to_string(), c.t.to_string(), u, c.dim.to_string()])?;
    }
    let bytes = w.into_inner().map_err(|e| ChartIoError::Invalid(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| ChartIoError::Invalid(e.to_string()))
}

#[derive(Deserialize)]
struct CsvRow {
    s: usize,
    t: i64,
    u: Option<i64>,
    dim: usize,
}

pub fn from_csv(text: &str) -> Result<ExtChart, ChartIoError> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let headers = r.headers()?.clone();
    if headers.iter().collect::<Vec<_>>() != ["s", "t", "u", "dim"] {
        return Err(ChartIoError::Invalid(format!(
            "expected header s,t,u,dim, found {}",
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut cells = Vec::new();
    for row in r.deserialize() {
        let row: CsvRow = row?;
        if row.dim > 0 {
            cells.push(ChartCell {
                s: row.s,
                t: row.t,
                u: row.u,
                dim: row.dim,
            });
        }
    }
    let bigraded = cells.iter().any(|c| c.u.is_some());
    if cells.iter().any(|c| c.u.is_some() != bigraded) {
        return Err(ChartIoError::Invalid("mixed empty and non-empty u".into()));
    }
    cells.sort_by_key(ChartCell::key);
    for pair in cells.windows(2) {
        if pair[0].key() == pair[1].key() {
            return Err(ChartIoError::Invalid(format!("duplicate cell {}", pair[0].key())));
        }
    }
    Ok(ExtChart {
        algebra: String::new(),
        coefficients: String::new(),
        bigraded,
        smax: cells.iter().map(|c| c.s).max().unwrap_or(0),
        tmax: cells.iter().map(|c| c.t).max().unwrap_or(0),
        exact_smax: None,
        exact_tmax: None,
        cells,
        truncated: Vec::new(),
        classes: Vec::new(),
        products: Vec::new(),
        brackets: Vec::new(),
    })
}

pub fn to_json(chart: &ExtChart) -> Result<String, ChartIoError> {
    let mut s = serde_json::to_string_pretty(chart)?;
    s.push('\n');
    Ok(s)
}

pub fn from_json(text: &str) -> Result<ExtChart, ChartIoError> {
    let mut chart: ExtChart = serde_json::from_str(text)?;
    chart.cells.sort_by_key(ChartCell::key);
    chart.truncated.sort();
    Ok(chart)
}

/// Read a chart in either JSON (leading `{`) or CSV.
pub fn read_chart(text: &str) -> Result<ExtChart, ChartIoError> {
    if text.trim_start().starts_with('{') {
        from_json(text)
    } else {
        from_csv(text)
    }
}

/// Adams-convention plot: x = stem `t − s`, y = `s`, one dot per basis class;
/// for trigraded charts the weight `u` is shown as colour.
pub fn to_svg(chart: &ExtChart) -> String {
    const CELL: i64 = 32;
    const MARGIN: i64 = 40;
    let max_stem = chart.cells.iter().map(|c| c.t - c.s as i64).max().unwrap_or(0).max(chart.tmax.min(64));
    let max_s = chart.smax as i64;
    let width = MARGIN * 2 + (max_stem + 1) * CELL;
    let height = MARGIN * 2 + (max_s + 1) * CELL;
    let x = |stem: i64| MARGIN + stem * CELL + CELL / 2;
    let y = |s: i64| height - MARGIN - s * CELL - CELL / 2;
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="10">"#
    );
    let title = format!("Ext over {} with coefficients {}", chart.algebra, chart.coefficients);
    let _ = writeln!(out, r#"<title>{}</title>"#, escape(&title));
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    for stem in 0..=max_stem {
        let _ = writeln!(
            out,
            r##"<line x1="{0}" y1="{1}" x2="{0}" y2="{2}" stroke="#eee"/><text x="{0}" y="{3}" text-anchor="middle">{4}</text>"##,
            x(stem),
            y(0) + CELL / 2,
            y(max_s) - CELL / 2,
            height - MARGIN / 2,
            stem
        );
    }
    for s in 0..=max_s {
        let _ = writeln!(
            out,
            r##"<line x1="{0}" y1="{2}" x2="{1}" y2="{2}" stroke="#eee"/><text x="{3}" y="{4}" text-anchor="end">{5}</text>"##,
            x(0) - CELL / 2,
            x(max_stem) + CELL / 2,
            y(s),
            MARGIN - 8,
            y(s) + 3,
            s
        );
    }
    for s in 0..=max_s {
        for stem in 0..=max_stem {
            if cell_truncated(chart, s as usize, stem) {
                let _ = writeln!(
                    out,
                    r##"<rect x="{}" y="{}" width="{CELL}" height="{CELL}" fill="#f4f4f4"/>"##,
                    x(stem) - CELL / 2,
                    y(s) - CELL / 2
                );
            }
        }
    }
    // group cells at the same (stem, s) so their dots sit side by side
    let mut groups: std::collections::BTreeMap<(i64, usize), Vec<&ChartCell>> = Default::default();
    for c in &chart.cells {
        groups.entry((c.t - c.s as i64, c.s)).or_default().push(c);
    }
    for ((stem, s), cells) in groups {
        let total: usize = cells.iter().map(|c| c.dim).sum();
        let mut k = 0;
        for c in cells {
            for _ in 0..c.dim {
                let offset = (k as i64 * 2 - (total as i64 - 1)) * 4;
                let colour = match c.u {
                    Some(u) => format!("hsl({}, 70%, 40%)", (u * 47).rem_euclid(360)),
                    None => "black".into(),
                };
                let _ = writeln!(
                    out,
                    r#"<circle cx="{}" cy="{}" r="3" fill="{colour}"><title>{}</title></circle>"#,
                    x(stem) + offset,
                    y(s as i64),
                    c.key()
                );
                k += 1;
            }
        }
    }
    out.push_str("</svg>\n");
    out
}

/// Whether any cell at `(stem, s)` lies outside the chart's exact region.
fn cell_truncated(chart: &ExtChart, s: usize, stem: i64) -> bool {
    let t = stem + s as i64;
    chart.exact_smax.is_some_and(|x| s > x)
        || chart.exact_tmax.is_some_and(|x| t > x)
        || chart
            .truncated
            .iter()
            .any(|k: &CellKey| k.s == s && k.t - k.s as i64 == stem)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// A text grid: rows `s` from the top, columns stems; each entry is the total
/// dimension at `(stem, s)` (`.` for zero, `*` for ten or more), followed by
/// `?` where the cell is truncated.
pub fn to_ascii(chart: &ExtChart) -> String {
    let max_stem = chart
        .cells
        .iter()
        .map(|c| c.t - c.s as i64)
        .max()
        .unwrap_or(0)
        .max(chart.tmax)
        .max(0);
    let mut grid = vec![vec![0usize; max_stem as usize + 1]; chart.smax + 1];
    for c in &chart.cells {
        let stem = c.t - c.s as i64;
        if c.s <= chart.smax && stem >= 0 {
            grid[c.s][stem as usize] += c.dim;
        }
    }
    let mut out = String::new();
    let _ = writeln!(
        out,
        "Ext over {} ({}), s <= {}, t <= {}",
        if chart.algebra.is_empty() { "?" } else { &chart.algebra },
        if chart.coefficients.is_empty() { "?" } else { &chart.coefficients },
        chart.smax,
        chart.tmax
    );
    for s in (0..=chart.smax).rev() {
        let _ = write!(out, "{s:>3} |");
        for stem in 0..=max_stem {
            let n = grid[s][stem as usize];
            let truncated = cell_truncated(chart, s, stem);
            let ch = match n {
                0 if truncated => " ?".to_string(),
                0 => " .".to_string(),
                1..=9 if truncated => format!("{n}?"),
                1..=9 => format!(" {n}"),
                _ if truncated => "*?".to_string(),
                _ => " *".to_string(),
            };
            let _ = write!(out, " {ch}");
        }
        out.push('\n');
    }
    let _ = write!(out, "    +");
    for _ in 0..=max_stem {
        out.push_str("---");
    }
    out.push('\n');
    let _ = write!(out, "     ");
    for stem in 0..=max_stem {
        let _ = write!(out, " {stem:>2}");
    }
    out.push('\n');
    out
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::homological::{ext_chart, AlgebraFlavor, ChartOptions, FreeResolution, WindowedAlgebra};

    fn chart(flavor: AlgebraFlavor, smax: usize, tmax: i64) -> ExtChart {
        let res = FreeResolution::of_ground_field(Arc::new(WindowedAlgebra::new(flavor)), smax, tmax);
        ext_chart(&res, smax, tmax, ChartOptions::all())
    }

    #[test]
    fn csv_round_trip() {
        let c = chart(AlgebraFlavor::Classical, 4, 10);
        let text = to_csv(&c).unwrap();
        assert!(text.starts_with("s,t,u,dim\n0,0,,1\n"));
        let back = from_csv(&text).unwrap();
        assert_eq!(back.cells, c.cells);
        assert!(!back.bigraded);
        let g = chart(AlgebraFlavor::G, 3, 16);
        let text = to_csv(&g).unwrap();
        assert!(text.contains("\n1,2,1,1\n"));
        assert_eq!(from_csv(&text).unwrap().cells, g.cells);
        assert!(from_csv("a,b\n1,2\n").is_err());
        assert!(from_csv("s,t,u,dim\n1,2,,1\n1,2,,1\n").is_err());
    }

    #[test]
    fn json_round_trip_and_determinism() {
        let c = chart(AlgebraFlavor::Classical, 3, 8);
        let a = to_json(&c).unwrap();
        assert_eq!(a, to_json(&chart(AlgebraFlavor::Classical, 3, 8)).unwrap());
        assert_eq!(read_chart(&a).unwrap(), c);
    }

    #[test]
    fn svg_and_ascii() {
        let c = chart(AlgebraFlavor::A0, 3, 8);
        let svg = to_svg(&c);
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
        assert_eq!(svg.matches("<circle").count(), c.cells.iter().map(|x| x.dim).sum::<usize>());
        assert!(svg.contains("hsl("));
        let ascii = to_ascii(&chart(AlgebraFlavor::Classical, 3, 8));
        // h0 tower in stem 0
        assert!(ascii.lines().any(|l| l.starts_with("  3 |  1")));
        assert_eq!("ascii".parse::<ChartFormat>().unwrap(), ChartFormat::Ascii);
        assert!("png".parse::<ChartFormat>().is_err());
    }
}
