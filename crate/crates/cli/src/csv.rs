//! CSV emission and parsing for node-state probability tables.
//!
//! Schema: header `t,node,S,E_1,...,E_{Nu},I,R`, one row per
//! `(sample time, node)`, times outer, nodes inner, every float rendered
//! with 17 significant digits. Ensemble tables append standard-error
//! companions `S_se,...,R_se`.

use anyhow::{bail, Context, Result};
use contagion_core::canonical::float_repr;
use contagion_core::integrate::Trajectory;
use contagion_core::stochastic::{label_count, EnsembleEstimate};

/// Column labels `S,E_1,..,E_n,I,R` for a given exposed-class count.
pub fn label_names(n_exposed: usize) -> Vec<String> {
    let mut names = vec!["S".to_string()];
    for u in 1..=n_exposed {
        names.push(format!("E_{u}"));
    }
    names.push("I".to_string());
    names.push("R".to_string());
    names
}

fn header(n_exposed: usize, with_se: bool) -> String {
    let labels = label_names(n_exposed);
    let mut cols = vec!["t".to_string(), "node".to_string()];
    cols.extend(labels.iter().cloned());
    if with_se {
        cols.extend(labels.iter().map(|l| format!("{l}_se")));
    }
    cols.join(",")
}

/// Render a deterministic trajectory.
pub fn write_trajectory(traj: &Trajectory) -> String {
    let n_exposed = traj.states[0].n_exposed();
    let n_nodes = traj.states[0].n_nodes();
    let mut out = header(n_exposed, false);
    out.push('\n');
    for (ti, st) in traj.states.iter().enumerate() {
        let t = float_repr(traj.sample_times[ti]);
        for k in 0..n_nodes {
            out.push_str(&t);
            out.push(',');
            out.push_str(&k.to_string());
            out.push(',');
            out.push_str(&float_repr(st.s(k)));
            for u in 0..n_exposed {
                out.push(',');
                out.push_str(&float_repr(st.e(k, u)));
            }
            out.push(',');
            out.push_str(&float_repr(st.i(k)));
            out.push(',');
            out.push_str(&float_repr(st.r(k)));
            out.push('\n');
        }
    }
    out
}

/// Render closed-form chain values for depths `0..=k_max`.
pub fn write_closed_form(
    k_max: usize,
    lambda: f64,
    gamma: f64,
    sample_times: &[f64],
) -> Result<String> {
    let mut out = header(0, false);
    out.push('\n');
    for &t in sample_times {
        let ts = float_repr(t);
        for k in 0..=k_max {
            let (s, i, r) = contagion_core::sir::closed_form_chain(k, t, lambda, gamma)?;
            out.push_str(&format!(
                "{ts},{k},{},{},{}\n",
                float_repr(s),
                float_repr(i),
                float_repr(r)
            ));
        }
    }
    Ok(out)
}

/// Render an ensemble estimate with its standard-error columns.
pub fn write_ensemble(est: &EnsembleEstimate) -> String {
    let n_labels = label_count(est.n_exposed);
    let mut out = header(est.n_exposed, true);
    out.push('\n');
    for (ti, &t) in est.sample_times.iter().enumerate() {
        let ts = float_repr(t);
        for k in 0..est.n_nodes {
            out.push_str(&ts);
            out.push(',');
            out.push_str(&k.to_string());
            for label in 0..n_labels {
                out.push(',');
                out.push_str(&float_repr(est.prob(ti, k, label)));
            }
            for label in 0..n_labels {
                out.push(',');
                out.push_str(&float_repr(est.stderr(ti, k, label)));
            }
            out.push('\n');
        }
    }
    out
}

/// Render oracle marginals.
pub fn write_master(sol: &contagion_core::oracle::MasterSolution) -> String {
    let n_labels = label_count(sol.n_exposed);
    let mut out = header(sol.n_exposed, false);
    out.push('\n');
    for (ti, &t) in sol.sample_times.iter().enumerate() {
        let ts = float_repr(t);
        for k in 0..sol.n_nodes {
            out.push_str(&ts);
            out.push(',');
            out.push_str(&k.to_string());
            for label in 0..n_labels {
                out.push(',');
                out.push_str(&float_repr(sol.prob(ti, k, label)));
            }
            out.push('\n');
        }
    }
    out
}

/// A parsed probability table.
#[derive(Debug, Clone)]
pub struct Table {
    /// Exposed-class count implied by the header.
    pub n_exposed: usize,
    /// Whether `_se` companion columns are present.
    pub has_se: bool,
    /// Distinct sample times in file order.
    pub times: Vec<f64>,
    /// Node count (ids must be dense `0..n_nodes`).
    pub n_nodes: usize,
    /// Probabilities indexed `[time][node][label]`.
    values: Vec<f64>,
    /// Standard errors in the same layout (empty unless `has_se`).
    se: Vec<f64>,
}

impl Table {
    /// Labels per node.
    pub fn n_labels(&self) -> usize {
        label_count(self.n_exposed)
    }

    /// Probability of `label` at `(times[ti], node)`.
    pub fn value(&self, ti: usize, node: usize, label: usize) -> f64 {
        self.values[(ti * self.n_nodes + node) * self.n_labels() + label]
    }

    /// Standard error of the same estimate; zero when the table has none.
    pub fn stderr(&self, ti: usize, node: usize, label: usize) -> f64 {
        if self.has_se {
            self.se[(ti * self.n_nodes + node) * self.n_labels() + label]
        } else {
            0.0
        }
    }
}

/// Parse a probability table, validating the header and the
/// dense-node/rectangular-grid structure.
pub fn parse_table(text: &str) -> Result<Table> {
    let mut lines = text.lines();
    let header_line = lines.next().context("empty CSV")?;
    let cols: Vec<&str> = header_line.split(',').collect();
    if cols.len() < 5 || cols[0] != "t" || cols[1] != "node" || cols[2] != "S" {
        bail!("unexpected CSV header {header_line:?}");
    }
    // Count E_u columns.
    let mut n_exposed = 0;
    while cols[3 + n_exposed] == format!("E_{}", n_exposed + 1) {
        n_exposed += 1;
    }
    let n_labels = n_exposed + 3;
    if cols[3 + n_exposed] != "I" || cols[4 + n_exposed] != "R" {
        bail!("unexpected CSV header {header_line:?}");
    }
    let has_se = cols.len() > 2 + n_labels;
    let expected_cols = if has_se {
        2 + 2 * n_labels
    } else {
        2 + n_labels
    };
    if cols.len() != expected_cols {
        bail!(
            "expected {expected_cols} columns for {n_exposed} exposed classes, found {}",
            cols.len()
        );
    }
    if has_se {
        let labels = label_names(n_exposed);
        for (i, l) in labels.iter().enumerate() {
            let want = format!("{l}_se");
            if cols[2 + n_labels + i] != want {
                bail!(
                    "expected column {want:?}, found {:?}",
                    cols[2 + n_labels + i]
                );
            }
        }
    }

    struct Row {
        t: f64,
        node: usize,
        vals: Vec<f64>,
        se: Vec<f64>,
    }
    let mut rows = Vec::new();
    for (lineno, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != expected_cols {
            bail!("line {}: expected {expected_cols} fields", lineno + 2);
        }
        let t: f64 = fields[0]
            .parse()
            .with_context(|| format!("line {}: bad t", lineno + 2))?;
        let node: usize = fields[1]
            .parse()
            .with_context(|| format!("line {}: bad node", lineno + 2))?;
        let mut vals = Vec::with_capacity(n_labels);
        for f in &fields[2..2 + n_labels] {
            vals.push(
                f.parse::<f64>()
                    .with_context(|| format!("line {}: bad value", lineno + 2))?,
            );
        }
        let mut se = Vec::new();
        if has_se {
            for f in &fields[2 + n_labels..] {
                se.push(
                    f.parse::<f64>()
                        .with_context(|| format!("line {}: bad stderr", lineno + 2))?,
                );
            }
        }
        rows.push(Row { t, node, vals, se });
    }
    if rows.is_empty() {
        bail!("CSV contains no data rows");
    }

    let n_nodes = rows.iter().map(|r| r.node).max().expect("nonempty") + 1;
    let mut times = Vec::new();
    for r in &rows {
        if times.last() != Some(&r.t) && !times.contains(&r.t) {
            times.push(r.t);
        }
    }
    let mut values = vec![f64::NAN; times.len() * n_nodes * n_labels];
    let mut se = vec![
        0.0;
        if has_se {
            times.len() * n_nodes * n_labels
        } else {
            0
        }
    ];
    for r in &rows {
        let ti = times.iter().position(|&t| t == r.t).expect("time recorded");
        let base = (ti * n_nodes + r.node) * n_labels;
        for (i, &v) in r.vals.iter().enumerate() {
            values[base + i] = v;
        }
        if has_se {
            for (i, &v) in r.se.iter().enumerate() {
                se[base + i] = v;
            }
        }
    }
    if values.iter().any(|v| v.is_nan()) {
        bail!("CSV grid is not rectangular: some (time, node) cells are missing");
    }
    Ok(Table {
        n_exposed,
        has_se,
        times,
        n_nodes,
        values,
        se,
    })
}
