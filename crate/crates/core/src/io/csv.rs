//! Plot-ready CSV output for traces and multi-trial aggregates.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::solvers::ConvergenceTrace;

pub const TRACE_HEADER: &str = "k,rel_error,log10_rel_error,residual_norm,gamma_q,seconds";
pub const AGGREGATE_HEADER: &str = "k,median,q10,q90";

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:e}")).unwrap_or_default()
}

pub fn format_trace_csv(trace: &ConvergenceTrace) -> String {
    let mut out = String::from(TRACE_HEADER);
    out.push('\n');
    for (rec, rel) in trace.iterations.iter().zip(trace.relative_errors()) {
        let _ = writeln!(
            out,
            "{},{},{},{:e},{},{:e}",
            rec.k,
            opt(rel),
            opt(rel.map(f64::log10)),
            rec.residual_norm,
            opt(rec.gamma_q),
            rec.seconds
        );
    }
    out
}

pub fn write_trace_csv(trace: &ConvergenceTrace, path: &Path) -> Result<()> {
    if trace.iterations.is_empty() {
        return Err(Error::InvalidConfig("empty trace".into()));
    }
    fs::write(path, format_trace_csv(trace)).map_err(|e| Error::io(path, e))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub k: usize,
    pub median: f64,
    pub q10: f64,
    pub q90: f64,
}

/// Lower empirical quantile: the `⌈p·T⌉`-th smallest of `T` values.
pub fn empirical_quantile(sorted: &[f64], p: f64) -> f64 {
    let t = sorted.len();
    let rank = ((p * t as f64) * (1.0 - 1e-12)).ceil() as usize;
    sorted[rank.clamp(1, t) - 1]
}

/// Per-`k` median and 0.1/0.9 quantiles of the relative error across
/// trials. A trial that stopped before some `k` contributes its last
/// recorded value there.
pub fn aggregate_relative_errors(traces: &[ConvergenceTrace]) -> Result<Vec<AggregateRow>> {
    if traces.is_empty() {
        return Err(Error::InvalidConfig("no traces to aggregate".into()));
    }
    let mut ks: Vec<usize> = traces
        .iter()
        .flat_map(|t| t.iterations.iter().map(|r| r.k))
        .collect();
    ks.sort_unstable();
    ks.dedup();
    let series: Vec<Vec<(usize, f64)>> = traces
        .iter()
        .map(|t| {
            t.iterations
                .iter()
                .zip(t.relative_errors())
                .map(|(r, e)| {
                    e.map(|e| (r.k, e))
                        .ok_or_else(|| Error::InvalidConfig("trace without ground truth".into()))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let mut out = Vec::with_capacity(ks.len());
    let mut vals = Vec::with_capacity(traces.len());
    for &k in &ks {
        vals.clear();
        for s in &series {
            let at = s.partition_point(|&(kk, _)| kk <= k);
            if at > 0 {
                vals.push(s[at - 1].1);
            }
        }
        if vals.len() < traces.len() {
            continue;
        }
        vals.sort_unstable_by(f64::total_cmp);
        out.push(AggregateRow {
            k,
            median: empirical_quantile(&vals, 0.5),
            q10: empirical_quantile(&vals, 0.1),
            q90: empirical_quantile(&vals, 0.9),
        });
    }
    Ok(out)
}

pub fn format_aggregate_csv(rows: &[AggregateRow]) -> String {
    let mut out = String::from(AGGREGATE_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(out, "{},{:e},{:e},{:e}", r.k, r.median, r.q10, r.q90);
    }
    out
}

pub fn write_aggregate_csv(rows: &[AggregateRow], path: &Path) -> Result<()> {
    fs::write(path, format_aggregate_csv(rows)).map_err(|e| Error::io(path, e))
}
