//! CSV emission and re-reading of convergence tables.
//!
//! RFC-4180-style: `\n` line endings, fields quoted only when they would
//! need it (no field written here ever does), floats printed with 17
//! significant digits so a re-read compares equal.

use super::ConvergenceRow;
use crate::{Error, Result};

pub const HEADER: &str =
    "h,dt,final_time,rel_l2_error,hs_star_error,weighted_error,wall_seconds,max_fp_iters";

fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

/// Render rows as CSV text.
pub fn write_rows(rows: &[ConvergenceRow]) -> String {
    let mut out = String::from(HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            fmt_f64(r.h),
            fmt_f64(r.dt),
            fmt_f64(r.final_time),
            fmt_opt(r.rel_l2_error),
            fmt_opt(r.hs_star_error),
            fmt_opt(r.weighted_error),
            fmt_f64(r.wall_seconds),
            r.max_fp_iters,
        ));
    }
    out
}

fn unquote(field: &str) -> &str {
    field
        .strip_prefix('"')
        .and_then(|s| s.strip_suffix('"'))
        .unwrap_or(field)
}

fn parse_field(field: &str) -> Result<Option<f64>> {
    let field = unquote(field.trim());
    if field.is_empty() {
        return Ok(None);
    }
    field
        .parse::<f64>()
        .map(Some)
        .map_err(|e| Error::InvalidInput(format!("bad CSV number {field:?}: {e}")))
}

/// Parse CSV text produced by [`write_rows`].
pub fn read_rows(text: &str) -> Result<Vec<ConvergenceRow>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim() == HEADER => {}
        other => {
            return Err(Error::InvalidInput(format!(
                "unexpected CSV header {other:?}"
            )))
        }
    }
    let mut rows = Vec::new();
    for line in lines {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 8 {
            return Err(Error::InvalidInput(format!(
                "expected 8 CSV fields, got {} in {line:?}",
                fields.len()
            )));
        }
        let req = |i: usize| -> Result<f64> {
            parse_field(fields[i])?
                .ok_or_else(|| Error::InvalidInput(format!("missing field {i} in {line:?}")))
        };
        rows.push(ConvergenceRow {
            h: req(0)?,
            dt: req(1)?,
            final_time: req(2)?,
            rel_l2_error: parse_field(fields[3])?,
            hs_star_error: parse_field(fields[4])?,
            weighted_error: parse_field(fields[5])?,
            wall_seconds: req(6)?,
            max_fp_iters: unquote(fields[7].trim()).parse().map_err(|e| {
                Error::InvalidInput(format!("bad iteration count {:?}: {e}", fields[7]))
            })?,
        });
    }
    Ok(rows)
}
