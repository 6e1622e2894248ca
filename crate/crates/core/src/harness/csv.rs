//! CSV persistence for run traces and aggregate summaries.
//!
//! Trace schema: `algo,objective,d,seed,iter,evals,elapsed_ns,f,grad_norm`
//! (empty cell when the gradient norm is unrecorded). Summary schema:
//! `algo,objective,d,iter,gap_min,gap_med,gap_max`. LF line endings; floats
//! print in shortest round-trip form so `parse(emit(x)) = x` for every
//! numeric field.

use super::runner::SummaryRow;
use crate::error::{Error, Result};
use crate::search::{RunTrace, TraceMeta, TraceRow};
use std::io::Write;

pub const TRACE_HEADER: &str = "algo,objective,d,seed,iter,evals,elapsed_ns,f,grad_norm";
pub const SUMMARY_HEADER: &str = "algo,objective,d,iter,gap_min,gap_med,gap_max";

pub fn traces_to_csv_string(traces: &[RunTrace]) -> String {
    let mut out = String::with_capacity(64 * (1 + traces.iter().map(|t| t.rows.len()).sum::<usize>()));
    out.push_str(TRACE_HEADER);
    out.push('\n');
    for t in traces {
        for row in &t.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{}\n",
                t.meta.algorithm,
                t.meta.objective,
                t.meta.d,
                t.meta.seed,
                row.iter,
                row.evals,
                row.elapsed_ns,
                row.f,
                row.grad_norm.map(|g| g.to_string()).unwrap_or_default(),
            ));
        }
    }
    out
}

pub fn summary_to_csv_string(rows: &[SummaryRow]) -> String {
    let mut out = String::new();
    out.push_str(SUMMARY_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.algo, r.objective, r.d, r.index, r.gap_min, r.gap_med, r.gap_max
        ));
    }
    out
}

/// Writes a string to `path`, surfacing I/O errors with the path attached.
pub fn write_string(path: &str, contents: &str) -> Result<()> {
    let io_err = |source| Error::Io {
        path: path.to_string(),
        source,
    };
    if let Some(parent) = std::path::Path::new(path).parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent).map_err(io_err)?;
        }
    }
    let mut file = std::fs::File::create(path).map_err(io_err)?;
    file.write_all(contents.as_bytes()).map_err(io_err)
}

pub fn emit_traces_csv(traces: &[RunTrace], path: &str) -> Result<()> {
    write_string(path, &traces_to_csv_string(traces))
}

pub fn emit_summary_csv(rows: &[SummaryRow], path: &str) -> Result<()> {
    write_string(path, &summary_to_csv_string(rows))
}

/// Parses trace CSV back into runs (grouped by contiguous
/// (algo, objective, d, seed) rows; the config hash is not persisted).
pub fn parse_traces_csv(text: &str) -> Result<Vec<RunTrace>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == TRACE_HEADER => {}
        other => {
            return Err(Error::config(format!(
                "unexpected trace header: {other:?}"
            )))
        }
    }
    let mut traces: Vec<RunTrace> = Vec::new();
    for (lineno, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 9 {
            return Err(Error::config(format!(
                "line {}: expected 9 fields, got {}",
                lineno + 2,
                fields.len()
            )));
        }
        let parse_err = |what: &str| {
            Error::config(format!("line {}: bad {what}: {line}", lineno + 2))
        };
        let meta = TraceMeta {
            algorithm: fields[0].to_string(),
            objective: fields[1].to_string(),
            d: fields[2].parse().map_err(|_| parse_err("d"))?,
            seed: fields[3].parse().map_err(|_| parse_err("seed"))?,
            config_hash: String::new(),
        };
        let row = TraceRow {
            iter: fields[4].parse().map_err(|_| parse_err("iter"))?,
            evals: fields[5].parse().map_err(|_| parse_err("evals"))?,
            elapsed_ns: fields[6].parse().map_err(|_| parse_err("elapsed_ns"))?,
            f: fields[7].parse().map_err(|_| parse_err("f"))?,
            grad_norm: if fields[8].is_empty() {
                None
            } else {
                Some(fields[8].parse().map_err(|_| parse_err("grad_norm"))?)
            },
        };
        match traces.last_mut() {
            Some(t) if t.meta == meta && row.iter != 0 => t.rows.push(row),
            _ => traces.push(RunTrace {
                meta,
                rows: vec![row],
                // The iterate itself is not persisted.
                final_x: crate::Vector::zeros(0),
            }),
        }
    }
    Ok(traces)
}
