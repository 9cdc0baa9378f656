//! CSV serialization.
//!
//! Numbers are written in scientific notation with 12 significant digits,
//! rows end in `\n`, and the output depends only on the data written.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::params::{EngineTag, TimeSeries};

pub const SERIES_HEADER: &str = "t,p,engine,params_digest";

/// Formats `x` with 12 significant digits.
pub fn format_value(x: f64) -> String {
    format!("{x:.11e}")
}

fn io_error(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.display().to_string(),
        source,
    }
}

fn clean_field(s: &str) -> String {
    s.replace([',', '\n', '\r'], ";")
}

/// Renders one or more series under a single `t,p,engine,params_digest` header.
pub fn render_series(series: &[TimeSeries]) -> String {
    let mut out = String::from(SERIES_HEADER);
    out.push('\n');
    for s in series {
        let digest = clean_field(s.params_digest());
        for (t, p) in s.points() {
            out.push_str(&format_value(t));
            out.push(',');
            out.push_str(&format_value(p));
            out.push(',');
            out.push_str(s.engine().as_str());
            out.push(',');
            out.push_str(&digest);
            out.push('\n');
        }
    }
    out
}

pub fn write_series_csv(series: &[TimeSeries], path: &Path) -> Result<()> {
    fs::write(path, render_series(series)).map_err(|e| io_error(path, e))
}

/// A table cell: numbers get the 12-digit format, text is written as is.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Text(String),
    Empty,
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

pub fn render_table(header: &[&str], rows: &[Vec<Cell>]) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row
            .iter()
            .map(|c| match c {
                Cell::Num(x) => format_value(*x),
                Cell::Text(s) => clean_field(s),
                Cell::Empty => String::new(),
            })
            .collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

pub fn write_table_csv(header: &[&str], rows: &[Vec<Cell>], path: &Path) -> Result<()> {
    fs::write(path, render_table(header, rows)).map_err(|e| io_error(path, e))
}

/// Reads a file written by [`write_series_csv`], one series per engine/digest run.
pub fn read_series_csv(path: &Path) -> Result<Vec<TimeSeries>> {
    let text = fs::read_to_string(path).map_err(|e| io_error(path, e))?;
    parse_series(&text)
}

pub fn parse_series(text: &str) -> Result<Vec<TimeSeries>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(SERIES_HEADER) => {}
        other => {
            return Err(Error::domain(format!(
                "expected header `{SERIES_HEADER}`, got {other:?}"
            )))
        }
    }
    let mut out = Vec::new();
    let mut current: Option<(EngineTag, String, Vec<f64>, Vec<f64>)> = None;
    for (idx, line) in lines.enumerate() {
        let fields: Vec<&str> = line.splitn(4, ',').collect();
        let bad = || Error::domain(format!("malformed series row {}: `{line}`", idx + 2));
        if fields.len() != 4 {
            return Err(bad());
        }
        let t: f64 = fields[0].parse().map_err(|_| bad())?;
        let p: f64 = fields[1].parse().map_err(|_| bad())?;
        let tag = EngineTag::parse(fields[2]).ok_or_else(bad)?;
        let digest = fields[3];
        let same = matches!(&current, Some((ct, cd, ts, _))
            if *ct == tag && cd == digest && ts.last().is_some_and(|&last| t > last));
        if !same {
            if let Some((ct, cd, ts, ps)) = current.take() {
                out.push(TimeSeries::new(ts, ps, ct, cd)?);
            }
            current = Some((tag, digest.to_string(), Vec::new(), Vec::new()));
        }
        if let Some((_, _, ts, ps)) = current.as_mut() {
            ts.push(t);
            ps.push(p);
        }
    }
    if let Some((ct, cd, ts, ps)) = current {
        out.push(TimeSeries::new(ts, ps, ct, cd)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(format_value(1.0), "1.00000000000e0");
        assert_eq!(format_value(0.541341132946451), "5.41341132946e-1");
        assert_eq!(format_value(0.0), "0.00000000000e0");
    }

    #[test]
    fn empty_series_is_header_only() {
        let s = TimeSeries::new(vec![], vec![], EngineTag::Bath, "x").unwrap();
        assert_eq!(render_series(&[s]), "t,p,engine,params_digest\n");
    }

    #[test]
    fn tables_render_cells() {
        let t = render_table(
            &["a", "b", "c"],
            &[vec![Cell::Num(0.5), "x,y".into(), Cell::Empty]],
        );
        assert_eq!(t, "a,b,c\n5.00000000000e-1,x;y,\n");
    }

    #[test]
    fn rejects_bad_header() {
        assert!(parse_series("t,p\n").is_err());
    }

    proptest! {
        #[test]
        fn round_trip_keeps_twelve_digits(
            vals in prop::collection::vec(0.0f64..=1.0, 1..40),
            step in 1e-4f64..1.0,
        ) {
            let times: Vec<f64> = (0..vals.len()).map(|i| i as f64 * step).collect();
            let s = TimeSeries::new(times, vals, EngineTag::Collision, "collision;g=1").unwrap();
            let back = parse_series(&render_series(std::slice::from_ref(&s))).unwrap();
            prop_assert_eq!(back.len(), 1);
            let b = &back[0];
            prop_assert_eq!(b.engine(), s.engine());
            prop_assert_eq!(b.params_digest(), s.params_digest());
            for ((t0, p0), (t1, p1)) in s.points().zip(b.points()) {
                prop_assert!((t0 - t1).abs() <= 5e-12 * t0.abs().max(f64::MIN_POSITIVE));
                prop_assert!((p0 - p1).abs() <= 5e-12 * p0.abs().max(f64::MIN_POSITIVE));
                // re-rendering the parsed value is a fixed point
                prop_assert_eq!(format_value(p1), format_value(p0));
            }
        }
    }
}
