//! SIR node-probability dynamics.
//!
//! Three routes to `⟨S_k⟩, ⟨I_k⟩, ⟨R_k⟩`:
//!
//! * [`closed_form_chain`] — explicit solution on a uniform-rate chain with
//!   the root at node 0;
//! * [`SirRootedExact`] — the exact linear system on any rooted tree;
//! * [`SirRta`] — the rooted-tree approximation on arbitrary networks, whose
//!   susceptible probabilities upper-bound the true ones.

use crate::error::{Error, Result};
use crate::net::{ContagionNetwork, InitialCondition, Model, RootedTreeInfo};
use crate::state::layout;

/// Partial Poisson sum `Σ_{n=0}^{terms-1} e^{-x} x^n / n!`.
///
/// Accumulated by the term recurrence `p_{n} = p_{n-1} · x / n`, so every
/// intermediate stays in `[0, 1]` and no factorial is ever formed.
fn poisson_partial_sum(terms: usize, x: f64) -> f64 {
    let mut term = (-x).exp();
    let mut sum = 0.0;
    for n in 0..terms {
        sum += term;
        term *= x / (n + 1) as f64;
    }
    sum.min(1.0)
}

/// Closed-form `(S, I, R)` for a uniform chain at depth `k` and time `t`.
///
/// Node 0 is the initially infectious root, so `k = 0` returns
/// `(0, e^{-γt}, 1 - e^{-γt})`. The same values describe any node at depth
/// `k` from the root of a uniform-rate rooted tree.
pub fn closed_form_chain(k: usize, t: f64, lambda: f64, gamma: f64) -> Result<(f64, f64, f64)> {
    let valid_rate = lambda.is_finite() && lambda > 0.0;
    if !valid_rate {
        return Err(Error::InvalidParameter(format!(
            "lambda must be positive, got {lambda}"
        )));
    }
    if gamma < 0.0 || !gamma.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "gamma must be nonnegative, got {gamma}"
        )));
    }
    if t < 0.0 || !t.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "time must be nonnegative, got {t}"
        )));
    }
    let total = lambda + gamma;
    let q = (lambda / total).powi(k as i32);
    // Tail masses of Poisson(total·t) and Poisson(lambda·t) below k events.
    let head_total = poisson_partial_sum(k, total * t);
    let head_inf = poisson_partial_sum(k, lambda * t);
    let decay = (-gamma * t).exp();

    let s = 1.0 - q * (1.0 - head_total);
    let i = decay * (1.0 - head_inf);
    let r = q * (1.0 - head_total) - decay * (1.0 - head_inf);
    Ok((s, i, r))
}

/// Pair probability `⟨I_{p(k)} S_k⟩` recovered from node probabilities on a
/// rooted tree: `((λ+γ_p)/λ)·S_k − S_p − γ_p/λ`.
///
/// Diagnostic only; on rooted-tree trajectories the result lies in `[0, 1]`
/// up to integration error, and callers are expected to assert that.
pub fn pair_prob_is(s_k: f64, s_p: f64, lambda_k: f64, gamma_p: f64) -> Result<f64> {
    let valid_rate = lambda_k.is_finite() && lambda_k > 0.0;
    if !valid_rate {
        return Err(Error::InvalidParameter(format!(
            "lambda must be positive, got {lambda_k}"
        )));
    }
    Ok((lambda_k + gamma_p) / lambda_k * s_k - s_p - gamma_p / lambda_k)
}

/// Exact SIR system on a rooted tree.
///
/// The susceptible equations close through the parent:
/// `dS_k/dt = −(λ_k+γ_p)S_k + λ_k S_p + γ_p` with `S_root ≡ 0`, and
/// `dI_k/dt = −dS_k/dt − γ_k I_k`. Recovered mass is never integrated.
#[derive(Debug, Clone)]
pub struct SirRootedExact {
    root: usize,
    parent: Vec<usize>,
    /// λ_k = λ_{k←p(k)}; unused at the root.
    lambda_from_parent: Vec<f64>,
    gamma: Vec<f64>,
}

impl SirRootedExact {
    /// Build the system for a network and its detected rooted tree.
    pub fn new(net: &ContagionNetwork, tree: &RootedTreeInfo) -> Result<Self> {
        if net.model() != Model::Sir {
            return Err(Error::InvalidParameter(
                "SirRootedExact requires an SIR network".into(),
            ));
        }
        let n = net.n_nodes();
        if tree.parent.len() != n || tree.root >= n {
            return Err(Error::InvalidParameter(
                "rooted tree info does not match the network".into(),
            ));
        }
        let mut lambda_from_parent = vec![0.0; n];
        for (k, lam) in lambda_from_parent.iter_mut().enumerate() {
            if k == tree.root {
                continue;
            }
            let p = tree.parent[k];
            *lam = net
                .in_edges(k)
                .iter()
                .find(|&&(j, _)| j == p)
                .map(|&(_, l)| l)
                .ok_or_else(|| {
                    Error::InvalidNetwork(format!("no edge from parent {p} to node {k}"))
                })?;
        }
        let gamma = (0..n).map(|k| net.gamma(k)).collect();
        Ok(Self {
            root: tree.root,
            parent: tree.parent.clone(),
            lambda_from_parent,
            gamma,
        })
    }

    /// Evaluate the right-hand side (layout: `[S, I]` per node).
    pub fn rhs(&self, y: &[f64], dy: &mut [f64]) {
        let n = self.parent.len();
        for k in 0..n {
            let (ds, di);
            if k == self.root {
                ds = 0.0;
                di = -self.gamma[k] * y[layout::i(k, 0)];
            } else {
                let p = self.parent[k];
                let lam = self.lambda_from_parent[k];
                let gp = self.gamma[p];
                ds = -(lam + gp) * y[layout::s(k, 0)] + lam * y[layout::s(p, 0)] + gp;
                di = -ds - self.gamma[k] * y[layout::i(k, 0)];
            }
            dy[layout::s(k, 0)] = ds;
            dy[layout::i(k, 0)] = di;
        }
    }
}

/// Rooted-tree approximation for SIR on an arbitrary network.
///
/// Each upstream neighbour contributes the clipped bracket
/// `[−γ_j S_k(0) + (λ_{k←j}+γ_j) S_k − λ_{k←j} S_j]⁺` to `−dS_k/dt`, so the
/// susceptible probabilities are nonincreasing by construction and
/// upper-bound the exact marginals.
#[derive(Debug, Clone)]
pub struct SirRta {
    /// Per node: upstream `(j, λ_{k←j}, γ_j)`.
    neighbors: Vec<Vec<(usize, f64, f64)>>,
    /// `S_k(0)` captured when the system is built.
    s0: Vec<f64>,
    gamma: Vec<f64>,
}

impl SirRta {
    /// Build the system, capturing `S(0)` from the initial condition.
    ///
    /// Fails when any node starts with recovered mass: initially recovered
    /// nodes must be pruned from the network beforehand.
    pub fn new(net: &ContagionNetwork, init: &InitialCondition) -> Result<Self> {
        if net.model() != Model::Sir {
            return Err(Error::InvalidParameter(
                "SirRta requires an SIR network".into(),
            ));
        }
        net.check_initial_condition(init)?;
        if init.any_recovered() {
            return Err(Error::InvalidInitialCondition(
                "bound system requires R = 0 at every node; prune recovered nodes first".into(),
            ));
        }
        let n = net.n_nodes();
        let neighbors = (0..n)
            .map(|k| {
                net.in_edges(k)
                    .iter()
                    .map(|&(j, lam)| (j, lam, net.gamma(j)))
                    .collect()
            })
            .collect();
        let s0 = init.nodes.iter().map(|node| node.s).collect();
        let gamma = (0..n).map(|k| net.gamma(k)).collect();
        Ok(Self {
            neighbors,
            s0,
            gamma,
        })
    }

    /// Evaluate the right-hand side (layout: `[S, I]` per node).
    pub fn rhs(&self, y: &[f64], dy: &mut [f64]) {
        for (k, nbrs) in self.neighbors.iter().enumerate() {
            let s_k = y[layout::s(k, 0)];
            let mut infection = 0.0;
            for &(j, lam, gamma_j) in nbrs {
                let bracket =
                    -gamma_j * self.s0[k] + (lam + gamma_j) * s_k - lam * y[layout::s(j, 0)];
                if bracket > 0.0 {
                    infection += bracket;
                }
            }
            dy[layout::s(k, 0)] = -infection;
            dy[layout::i(k, 0)] = infection - self.gamma[k] * y[layout::i(k, 0)];
        }
    }
}
