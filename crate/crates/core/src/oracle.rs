//! Exact master-equation solver over the joint state space of a small
//! network; the ground truth against which the approximate systems and the
//! stochastic estimates are verified.
//!
//! Joint states are mixed-radix words with one digit per node, base
//! `N_u + 3` (`S = 0`, `E(u) = u`, `I = N_u + 1`, `R = N_u + 2`), node 0
//! least significant. The generator is kept in coordinate form and applied
//! with RK4 so the solver shares the integrator's convergence behaviour.

use crate::error::{Error, Result};
use crate::integrate::{rk4_step, Rk4Work};
use crate::net::{ContagionNetwork, InitialCondition};
use crate::stochastic::label_count;

/// Hard cap on the joint state count.
pub const STATE_SPACE_LIMIT: u64 = 1 << 20;

/// Probability mass may drift from one by at most this much.
pub const MASS_TOL: f64 = 1e-10;

/// Individual probabilities may go negative by at most this much.
pub const NEGATIVITY_TOL: f64 = 1e-12;

/// Sparse transition-rate structure of the joint Markov chain.
#[derive(Debug, Clone)]
pub struct MasterGenerator {
    n_nodes: usize,
    n_exposed: usize,
    radix: usize,
    n_states: usize,
    /// Digit place values: `pow[k] = radix^k`.
    pow: Vec<usize>,
    /// Off-diagonal entries `(from, to, rate)`; the diagonal is implicit as
    /// the negative sum of each row.
    transitions: Vec<(u32, u32, f64)>,
}

impl MasterGenerator {
    /// Number of joint states.
    pub fn n_states(&self) -> usize {
        self.n_states
    }

    /// Off-diagonal transitions.
    pub fn transitions(&self) -> &[(u32, u32, f64)] {
        &self.transitions
    }

    /// Digit (label index) of `node` within joint state `s`.
    #[inline]
    pub fn digit(&self, s: usize, node: usize) -> usize {
        s / self.pow[node] % self.radix
    }

    /// Total outgoing rate of a joint state.
    pub fn exit_rate(&self, s: usize) -> f64 {
        self.transitions
            .iter()
            .filter(|&&(f, _, _)| f as usize == s)
            .map(|&(_, _, q)| q)
            .sum()
    }
}

/// Enumerate the sparse generator of the joint chain.
///
/// Rates per node and joint state match the SSA hazards exactly; refuses
/// networks whose state count `(N_u + 3)^n` exceeds [`STATE_SPACE_LIMIT`].
pub fn build_generator(net: &ContagionNetwork) -> Result<MasterGenerator> {
    let n = net.n_nodes();
    let n_exposed = net.n_exposed();
    let radix = label_count(n_exposed);
    let states = (radix as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    if states > STATE_SPACE_LIMIT as u128 {
        return Err(Error::StateSpaceTooLarge {
            states,
            limit: STATE_SPACE_LIMIT,
        });
    }
    let n_states = states as usize;
    let pow: Vec<usize> = (0..n)
        .scan(1usize, |acc, _| {
            let v = *acc;
            *acc *= radix;
            Some(v)
        })
        .collect();
    let infectious = n_exposed + 1;
    let recovered = n_exposed + 2;

    let mut transitions = Vec::new();
    let mut digits = vec![0usize; n];
    for s in 0..n_states {
        for (k, d) in digits.iter_mut().enumerate() {
            *d = s / pow[k] % radix;
        }
        let mut push = |k: usize, new_digit: usize, rate: f64| {
            if rate > 0.0 {
                let to = (s as i64 + (new_digit as i64 - digits[k] as i64) * pow[k] as i64) as u32;
                transitions.push((s as u32, to, rate));
            }
        };
        for k in 0..n {
            match digits[k] {
                0 => {
                    let lam_total: f64 = net
                        .in_edges(k)
                        .iter()
                        .filter(|&&(j, _)| digits[j] == infectious)
                        .map(|&(_, l)| l)
                        .sum();
                    if lam_total > 0.0 {
                        match net.seir_rates(k) {
                            None => push(k, infectious, lam_total),
                            Some(r) => {
                                for (u, &phi_u) in r.phi.iter().enumerate() {
                                    push(k, 1 + u, lam_total * phi_u);
                                }
                                push(k, infectious, lam_total * (1.0 - r.phi_total()));
                            }
                        }
                    }
                }
                d if d <= n_exposed => {
                    let r = net.seir_rates(k).expect("exposed digit on SIR network");
                    let u = d - 1;
                    for v in 0..n_exposed {
                        if v != u {
                            push(k, 1 + v, r.a[u][v]);
                        }
                    }
                    push(k, infectious, r.mu[u]);
                    push(k, recovered, r.nu[u]);
                }
                d if d == infectious => push(k, recovered, net.gamma(k)),
                _ => {}
            }
        }
    }
    Ok(MasterGenerator {
        n_nodes: n,
        n_exposed,
        radix,
        n_states,
        pow,
        transitions,
    })
}

/// Per-node label marginals (and requested pair marginals) of the master
/// equation on a sample grid.
#[derive(Debug, Clone)]
pub struct MasterSolution {
    /// Sample instants, starting at zero.
    pub sample_times: Vec<f64>,
    /// Nodes in the network.
    pub n_nodes: usize,
    /// Exposed classes.
    pub n_exposed: usize,
    /// Requested `(j, k)` pairs for `⟨I_j S_k⟩`.
    pub pairs: Vec<(usize, usize)>,
    marginals: Vec<f64>,
    pair_is: Vec<f64>,
}

impl MasterSolution {
    /// Marginal probability of `label` at `(sample_times[ti], node)`.
    pub fn prob(&self, ti: usize, node: usize, label: usize) -> f64 {
        let n_labels = label_count(self.n_exposed);
        self.marginals[(ti * self.n_nodes + node) * n_labels + label]
    }

    /// Pair marginal `⟨I_j S_k⟩` for the `pi`-th requested pair.
    pub fn pair_is(&self, ti: usize, pi: usize) -> f64 {
        self.pair_is[ti * self.pairs.len() + pi]
    }
}

/// Integrate `dP/dt = P · Q` with RK4 and extract marginals every
/// `sample_dt`.
///
/// The initial distribution is the product of the per-node categorical
/// initial conditions. Mass conservation and nonnegativity are enforced at
/// every step.
pub fn solve_master(
    gen: &MasterGenerator,
    init: &InitialCondition,
    t_end: f64,
    dt: f64,
    sample_dt: f64,
    pairs: &[(usize, usize)],
) -> Result<MasterSolution> {
    if init.nodes.len() != gen.n_nodes || init.n_exposed() != gen.n_exposed {
        return Err(Error::InvalidInitialCondition(
            "initial condition does not match the generator's network shape".into(),
        ));
    }
    for &(j, k) in pairs {
        if j >= gen.n_nodes || k >= gen.n_nodes {
            return Err(Error::InvalidParameter(format!(
                "pair ({j}, {k}) references nodes outside the network"
            )));
        }
    }
    let (per_sample, n_samples) = crate::integrate::grid(t_end, dt, sample_dt)?;

    // Product-form initial distribution, node 0 least significant.
    let mut p = vec![1.0f64];
    let mut block = 1usize;
    for node in &init.nodes {
        let mut weights = Vec::with_capacity(gen.radix);
        weights.push(node.s);
        weights.extend_from_slice(&node.e);
        weights.push(node.i);
        weights.push(node.r);
        let mut next = vec![0.0; block * gen.radix];
        for (d, &w) in weights.iter().enumerate() {
            if w != 0.0 {
                for i in 0..block {
                    next[d * block + i] = p[i] * w;
                }
            }
        }
        p = next;
        block *= gen.radix;
    }

    let transitions = &gen.transitions;
    let rhs = move |y: &[f64], dy: &mut [f64]| {
        dy.fill(0.0);
        for &(from, to, rate) in transitions {
            let flow = rate * y[from as usize];
            dy[from as usize] -= flow;
            dy[to as usize] += flow;
        }
    };

    let mut work = Rk4Work::new(gen.n_states);
    let n_labels = label_count(gen.n_exposed);
    let mut sample_times = Vec::with_capacity(n_samples + 1);
    let mut marginals = Vec::with_capacity((n_samples + 1) * gen.n_nodes * n_labels);
    let mut pair_is = Vec::with_capacity((n_samples + 1) * pairs.len());

    let record = |t: f64, p: &[f64], marginals: &mut Vec<f64>, pair_is: &mut Vec<f64>| {
        let base = marginals.len();
        marginals.resize(base + gen.n_nodes * n_labels, 0.0);
        for (s, &ps) in p.iter().enumerate() {
            if ps != 0.0 {
                for k in 0..gen.n_nodes {
                    marginals[base + k * n_labels + gen.digit(s, k)] += ps;
                }
            }
        }
        for &(j, k) in pairs {
            let mut acc = 0.0;
            for (s, &ps) in p.iter().enumerate() {
                if gen.digit(s, j) == gen.n_exposed + 1 && gen.digit(s, k) == 0 {
                    acc += ps;
                }
            }
            pair_is.push(acc);
        }
        let _ = t;
    };

    check_distribution(&p, 0.0)?;
    sample_times.push(0.0);
    record(0.0, &p, &mut marginals, &mut pair_is);

    for sample in 1..=n_samples {
        for step in 0..per_sample {
            rk4_step(&rhs, &mut p, dt, &mut work);
            let t = ((sample - 1) * per_sample + step + 1) as f64 * dt;
            check_distribution(&p, t)?;
        }
        let t = sample as f64 * sample_dt;
        sample_times.push(t);
        record(t, &p, &mut marginals, &mut pair_is);
    }

    Ok(MasterSolution {
        sample_times,
        n_nodes: gen.n_nodes,
        n_exposed: gen.n_exposed,
        pairs: pairs.to_vec(),
        marginals,
        pair_is,
    })
}

fn check_distribution(p: &[f64], t: f64) -> Result<()> {
    let mut sum = 0.0;
    let mut min = f64::INFINITY;
    for &v in p {
        sum += v;
        min = min.min(v);
    }
    if (sum - 1.0).abs() > MASS_TOL {
        return Err(Error::IntegrationFailure {
            t,
            reason: format!("probability mass drifted to {sum}"),
        });
    }
    if min < -NEGATIVITY_TOL || !min.is_finite() {
        return Err(Error::IntegrationFailure {
            t,
            reason: format!("negative probability {min}"),
        });
    }
    Ok(())
}
