//! Comparison of two probability tables on the intersection of their
//! sample grids, with an optional upper-bound check against Monte-Carlo
//! standard errors.

use anyhow::{bail, Result};
use contagion_core::canonical::JsonWriter;

use crate::csv::Table;

/// Times closer than this are considered the same grid point.
const TIME_MATCH_TOL: f64 = 1e-9;

/// One bound violation: the reference susceptible probability exceeded the
/// candidate's by more than the allowance.
#[derive(Debug, Clone)]
pub struct Violation {
    /// Node id.
    pub node: usize,
    /// Sample time (from the candidate grid).
    pub t: f64,
    /// Amount by which the reference exceeded candidate + allowance.
    pub excess: f64,
}

/// Result of comparing a candidate table against a reference table.
#[derive(Debug, Clone)]
pub struct Report {
    /// Common sample times.
    pub n_common_times: usize,
    /// Nodes compared.
    pub n_nodes: usize,
    /// Per-node max |ΔS| over common times.
    pub max_abs_delta_s: Vec<f64>,
    /// Per-node bound-violation counts (all zero unless bound checking).
    pub bound_violations: Vec<usize>,
    /// Global max |Δ| per label column.
    pub global_max_abs_delta: Vec<(String, f64)>,
    /// Absolute allowance used by the bound check, if one ran.
    pub bound_atol: Option<f64>,
    /// Individual violations.
    pub violations: Vec<Violation>,
}

impl Report {
    /// Total violations across nodes.
    pub fn total_violations(&self) -> usize {
        self.bound_violations.iter().sum()
    }

    /// Canonical JSON document (sorted keys, 17-digit floats).
    pub fn to_canonical_json(&self) -> String {
        let mut w = JsonWriter::new();
        w.begin_object();
        if let Some(atol) = self.bound_atol {
            w.key("bound_atol").float(atol);
            w.key("bound_violation_total")
                .uint(self.total_violations() as u64);
        }
        w.key("global_max_abs_delta").begin_object();
        let mut sorted: Vec<&(String, f64)> = self.global_max_abs_delta.iter().collect();
        sorted.sort_by(|a, b| a.0.cmp(&b.0));
        for (label, v) in sorted {
            w.key(label).float(*v);
        }
        w.end_object();
        w.key("n_common_times").uint(self.n_common_times as u64);
        w.key("n_nodes").uint(self.n_nodes as u64);
        w.key("per_node").begin_array();
        for k in 0..self.n_nodes {
            w.begin_object();
            w.key("bound_violations")
                .uint(self.bound_violations[k] as u64);
            w.key("max_abs_delta_s").float(self.max_abs_delta_s[k]);
            w.key("node").uint(k as u64);
            w.end_object();
        }
        w.end_array();
        if self.bound_atol.is_some() {
            w.key("violations").begin_array();
            for v in &self.violations {
                w.begin_object();
                w.key("excess").float(v.excess);
                w.key("node").uint(v.node as u64);
                w.key("t").float(v.t);
                w.end_object();
            }
            w.end_array();
        }
        w.end_object();
        w.finish()
    }
}

/// Settings for the bound check.
#[derive(Debug, Clone, Copy, Default)]
pub struct BoundCheck {
    /// Absolute allowance added on top of `3 · SE`.
    pub atol: f64,
}

/// Compare `candidate` against `reference` over the intersection of their
/// sample grids.
///
/// With `bound` set, any common point where
/// `reference S − candidate S > 3·SE + atol` counts as a violation; the
/// standard error comes from `stderr_table` when given, else from the
/// reference's own `_se` columns, else zero.
pub fn compare(
    candidate: &Table,
    reference: &Table,
    bound: Option<BoundCheck>,
    stderr_table: Option<&Table>,
) -> Result<Report> {
    if candidate.n_nodes != reference.n_nodes {
        bail!(
            "node counts differ: candidate {}, reference {}",
            candidate.n_nodes,
            reference.n_nodes
        );
    }
    if candidate.n_exposed != reference.n_exposed {
        bail!(
            "exposed-class counts differ: candidate {}, reference {}",
            candidate.n_exposed,
            reference.n_exposed
        );
    }
    if let Some(se) = stderr_table {
        if se.n_nodes != reference.n_nodes || se.n_exposed != reference.n_exposed {
            bail!("stderr table shape does not match the reference table");
        }
        if !se.has_se {
            bail!("stderr table has no _se columns");
        }
    }

    // Intersect grids pairwise within tolerance.
    let mut common: Vec<(usize, usize)> = Vec::new();
    for (ci, &ct) in candidate.times.iter().enumerate() {
        if let Some(ri) = reference
            .times
            .iter()
            .position(|&rt| (rt - ct).abs() <= TIME_MATCH_TOL.max(1e-9 * ct.abs()))
        {
            common.push((ci, ri));
        }
    }
    if common.len() < 2 {
        bail!(
            "sample grids intersect on {} points; need at least 2",
            common.len()
        );
    }

    let n_nodes = candidate.n_nodes;
    let n_labels = candidate.n_labels();
    let labels = crate::csv::label_names(candidate.n_exposed);
    let mut max_abs_delta_s = vec![0.0f64; n_nodes];
    let mut bound_violations = vec![0usize; n_nodes];
    let mut global = vec![0.0f64; n_labels];
    let mut violations = Vec::new();

    for &(ci, ri) in &common {
        // Standard errors come from a grid matched against the reference.
        let se_ti = stderr_table.map(|se| {
            se.times
                .iter()
                .position(|&st| {
                    (st - reference.times[ri]).abs()
                        <= TIME_MATCH_TOL.max(1e-9 * reference.times[ri].abs())
                })
                .ok_or(reference.times[ri])
        });
        for k in 0..n_nodes {
            for (label, worst) in global.iter_mut().enumerate() {
                let d = (candidate.value(ci, k, label) - reference.value(ri, k, label)).abs();
                *worst = worst.max(d);
                if label == 0 {
                    max_abs_delta_s[k] = max_abs_delta_s[k].max(d);
                }
            }
            if let Some(check) = bound {
                let se = match &se_ti {
                    Some(Ok(ti)) => stderr_table.expect("present").stderr(*ti, k, 0),
                    Some(Err(t)) => bail!("stderr table has no sample at t = {t}"),
                    None => reference.stderr(ri, k, 0),
                };
                let excess =
                    reference.value(ri, k, 0) - candidate.value(ci, k, 0) - (3.0 * se + check.atol);
                if excess > 0.0 {
                    bound_violations[k] += 1;
                    violations.push(Violation {
                        node: k,
                        t: candidate.times[ci],
                        excess,
                    });
                }
            }
        }
    }

    Ok(Report {
        n_common_times: common.len(),
        n_nodes,
        max_abs_delta_s,
        bound_violations,
        global_max_abs_delta: labels.into_iter().zip(global).collect(),
        bound_atol: bound.map(|b| b.atol),
        violations,
    })
}
