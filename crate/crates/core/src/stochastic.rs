//! Exact stochastic simulation (direct-method SSA) and ensemble averaging.
//!
//! Hazards follow the model transition table exactly: a susceptible node
//! accumulates `Σ λ_{k←j}` over infectious upstream neighbours and lands in
//! exposed class `u` with probability `φ_u` (directly infectious with
//! `1 − Σφ`); an exposed node of class `u` carries hazards `a_{v←u}`, `μ_u`,
//! `ν_u`; an infectious node recovers at `γ`. Ensemble replicas are seeded
//! independently from a master seed, so estimates depend only on
//! `(inputs, master_seed)` — never on the worker count or schedule.

use crate::error::{Error, Result};
use crate::net::{ContagionNetwork, InitialCondition, Model};
use crate::rng::{replica_seed, Xoshiro256PlusPlus};

/// Discrete state of one node.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeStateLabel {
    /// Susceptible.
    Susceptible,
    /// Exposed of class `u + 1` (zero-based field).
    Exposed(usize),
    /// Infectious.
    Infectious,
    /// Recovered.
    Recovered,
}

impl NodeStateLabel {
    /// Dense index: `S = 0`, `E(u) = u`, `I = N_u + 1`, `R = N_u + 2`.
    pub fn index(self, n_exposed: usize) -> usize {
        match self {
            NodeStateLabel::Susceptible => 0,
            NodeStateLabel::Exposed(u) => {
                assert!(u < n_exposed, "exposed class {u} out of range");
                1 + u
            }
            NodeStateLabel::Infectious => n_exposed + 1,
            NodeStateLabel::Recovered => n_exposed + 2,
        }
    }

    /// Inverse of [`NodeStateLabel::index`].
    pub fn from_index(idx: usize, n_exposed: usize) -> Self {
        match idx {
            0 => NodeStateLabel::Susceptible,
            u if u <= n_exposed => NodeStateLabel::Exposed(u - 1),
            i if i == n_exposed + 1 => NodeStateLabel::Infectious,
            r if r == n_exposed + 2 => NodeStateLabel::Recovered,
            _ => panic!("label index {idx} out of range for {n_exposed} exposed classes"),
        }
    }

    /// Ordering phase: S < E(any) < I < R. Runs only ever move forward.
    pub fn phase(self) -> u8 {
        match self {
            NodeStateLabel::Susceptible => 0,
            NodeStateLabel::Exposed(_) => 1,
            NodeStateLabel::Infectious => 2,
            NodeStateLabel::Recovered => 3,
        }
    }
}

/// Number of distinct labels on a network with `n_exposed` classes.
pub fn label_count(n_exposed: usize) -> usize {
    n_exposed + 3
}

/// One transition of one node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GillespieEvent {
    /// Event time.
    pub time: f64,
    /// Node that changed state.
    pub node: usize,
    /// Its new label.
    pub new_label: NodeStateLabel,
}

/// Precomputed per-network tables for the SSA inner loop.
struct Simulator<'n> {
    net: &'n ContagionNetwork,
    n_exposed: usize,
    /// Total exit rate of each exposed class, per node.
    exposed_exit: Vec<Vec<f64>>,
}

impl<'n> Simulator<'n> {
    fn new(net: &'n ContagionNetwork) -> Self {
        let n_exposed = net.n_exposed();
        let exposed_exit = (0..net.n_nodes())
            .map(|k| match net.seir_rates(k) {
                Some(r) => (0..n_exposed)
                    .map(|u| r.a[u].iter().sum::<f64>() + r.mu[u] + r.nu[u])
                    .collect(),
                None => Vec::new(),
            })
            .collect();
        Self {
            net,
            n_exposed,
            exposed_exit,
        }
    }

    fn infectious_idx(&self) -> usize {
        self.n_exposed + 1
    }

    fn recovered_idx(&self) -> usize {
        self.n_exposed + 2
    }

    /// Hazard of node `k` in the given label, from scratch.
    fn hazard(&self, labels: &[usize], k: usize) -> f64 {
        let label = labels[k];
        if label == 0 {
            let inf = self.infectious_idx();
            self.net
                .in_edges(k)
                .iter()
                .filter(|&&(j, _)| labels[j] == inf)
                .map(|&(_, lam)| lam)
                .sum()
        } else if label <= self.n_exposed {
            self.exposed_exit[k][label - 1]
        } else if label == self.infectious_idx() {
            self.net.gamma(k)
        } else {
            0.0
        }
    }

    /// Draw the new label of a susceptible node that just got infected.
    fn infection_outcome(&self, k: usize, rng: &mut Xoshiro256PlusPlus) -> usize {
        match self.net.seir_rates(k) {
            None => self.infectious_idx(),
            Some(r) => {
                let u = rng.next_f64();
                let mut cum = 0.0;
                for (class, &phi_u) in r.phi.iter().enumerate() {
                    cum += phi_u;
                    if u < cum {
                        return 1 + class;
                    }
                }
                self.infectious_idx()
            }
        }
    }

    /// Draw the destination of an exposed node of class `u` leaving its class.
    fn exposed_outcome(&self, k: usize, class: usize, rng: &mut Xoshiro256PlusPlus) -> usize {
        let r = self
            .net
            .seir_rates(k)
            .expect("exposed label on SIR network");
        let total = self.exposed_exit[k][class];
        let target = rng.next_f64() * total;
        let mut cum = 0.0;
        for v in 0..self.n_exposed {
            cum += r.a[class][v];
            if target < cum {
                return 1 + v;
            }
        }
        cum += r.mu[class];
        if target < cum {
            self.infectious_idx()
        } else {
            self.recovered_idx()
        }
    }

    /// Run one trajectory in place, appending transitions to `events`.
    fn run(
        &self,
        labels: &mut [usize],
        hazards: &mut [f64],
        t_max: f64,
        rng: &mut Xoshiro256PlusPlus,
        events: &mut Vec<GillespieEvent>,
    ) {
        for (k, h) in hazards.iter_mut().enumerate() {
            *h = self.hazard(labels, k);
        }
        let mut t = 0.0;
        loop {
            let total: f64 = hazards.iter().sum();
            if total <= 0.0 {
                return;
            }
            t += rng.next_exp(total);
            if t > t_max {
                return;
            }
            // Select the transitioning node proportionally to its hazard.
            let target = rng.next_f64() * total;
            let mut cum = 0.0;
            let mut node = usize::MAX;
            for (k, &h) in hazards.iter().enumerate() {
                if h > 0.0 {
                    cum += h;
                    node = k;
                    if target < cum {
                        break;
                    }
                }
            }
            debug_assert!(node != usize::MAX);

            let old = labels[node];
            let new = if old == 0 {
                self.infection_outcome(node, rng)
            } else if old <= self.n_exposed {
                self.exposed_outcome(node, old - 1, rng)
            } else {
                self.recovered_idx()
            };
            labels[node] = new;
            hazards[node] = self.hazard(labels, node);

            // Infectiousness changes touch downstream susceptible hazards.
            let inf = self.infectious_idx();
            if new == inf || old == inf {
                for &(m, _) in self.net.out_edges(node) {
                    if labels[m] == 0 {
                        hazards[m] = self.hazard(labels, m);
                    }
                }
            }
            events.push(GillespieEvent {
                time: t,
                node,
                new_label: NodeStateLabel::from_index(new, self.n_exposed),
            });
        }
    }
}

/// Total transition hazard of a labelled network state; the same quantity
/// the SSA samples waiting times from. Exposed so that the master-equation
/// generator can be cross-checked against the simulator.
pub fn total_hazard(net: &ContagionNetwork, labels: &[NodeStateLabel]) -> f64 {
    let sim = Simulator::new(net);
    let idx: Vec<usize> = labels.iter().map(|l| l.index(net.n_exposed())).collect();
    (0..net.n_nodes()).map(|k| sim.hazard(&idx, k)).sum()
}

/// Simulate one exact trajectory from the given initial labels.
///
/// Returns the ordered list of transitions up to `t_max`; the simulation
/// stops early once no transition is possible.
pub fn gillespie_run(
    net: &ContagionNetwork,
    init_labels: &[NodeStateLabel],
    t_max: f64,
    rng: &mut Xoshiro256PlusPlus,
) -> Result<Vec<GillespieEvent>> {
    if init_labels.len() != net.n_nodes() {
        return Err(Error::InvalidInitialCondition(format!(
            "expected {} initial labels, found {}",
            net.n_nodes(),
            init_labels.len()
        )));
    }
    let valid_horizon = t_max.is_finite() && t_max > 0.0;
    if !valid_horizon {
        return Err(Error::InvalidParameter(format!(
            "t_max must be positive, got {t_max}"
        )));
    }
    let n_exposed = net.n_exposed();
    for (k, &l) in init_labels.iter().enumerate() {
        if let NodeStateLabel::Exposed(u) = l {
            if net.model() == Model::Sir || u >= n_exposed {
                return Err(Error::InvalidInitialCondition(format!(
                    "node {k}: exposed label invalid for this network"
                )));
            }
        }
    }
    let sim = Simulator::new(net);
    let mut labels: Vec<usize> = init_labels.iter().map(|l| l.index(n_exposed)).collect();
    let mut hazards = vec![0.0; net.n_nodes()];
    let mut events = Vec::new();
    sim.run(&mut labels, &mut hazards, t_max, rng, &mut events);
    Ok(events)
}

/// Monte-Carlo estimates of per-node label probabilities with standard
/// errors, on a fixed sample-time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleEstimate {
    /// Sample instants.
    pub sample_times: Vec<f64>,
    /// Replica count.
    pub n_runs: usize,
    /// Nodes in the network.
    pub n_nodes: usize,
    /// Exposed classes in the network.
    pub n_exposed: usize,
    /// Occupation counts, indexed `[time][node][label]`.
    counts: Vec<u64>,
}

impl EnsembleEstimate {
    fn idx(&self, ti: usize, node: usize, label: usize) -> usize {
        (ti * self.n_nodes + node) * label_count(self.n_exposed) + label
    }

    /// Estimated probability of `label` at `(sample_times[ti], node)`.
    pub fn prob(&self, ti: usize, node: usize, label: usize) -> f64 {
        self.counts[self.idx(ti, node, label)] as f64 / self.n_runs as f64
    }

    /// Binomial standard error `sqrt(p̂(1−p̂)/n_runs)` of the same estimate.
    pub fn stderr(&self, ti: usize, node: usize, label: usize) -> f64 {
        let p = self.prob(ti, node, label);
        (p * (1.0 - p) / self.n_runs as f64).sqrt()
    }

    /// Raw occupation count.
    pub fn count(&self, ti: usize, node: usize, label: usize) -> u64 {
        self.counts[self.idx(ti, node, label)]
    }
}

/// Worker count used by [`ensemble_estimate`]: the `CONTAGION_THREADS`
/// environment variable when set, otherwise the available parallelism
/// (capped at 8). Only throughput depends on it.
pub fn default_threads() -> usize {
    if let Ok(v) = std::env::var("CONTAGION_THREADS") {
        if let Ok(n) = v.trim().parse::<usize>() {
            if n >= 1 {
                return n;
            }
        }
    }
    std::thread::available_parallelism().map_or(1, |n| n.get().min(8))
}

/// Estimate label probabilities by averaging `n_runs` independent replicas.
///
/// Replica `r` draws its own initial labels from the per-node categorical
/// initial condition and then runs the SSA, all under a generator seeded
/// with `mix(master_seed, r)`.
pub fn ensemble_estimate(
    net: &ContagionNetwork,
    init: &InitialCondition,
    n_runs: usize,
    sample_times: &[f64],
    master_seed: u64,
) -> Result<EnsembleEstimate> {
    ensemble_estimate_with_threads(
        net,
        init,
        n_runs,
        sample_times,
        master_seed,
        default_threads(),
    )
}

/// [`ensemble_estimate`] with an explicit worker count; the result is
/// bit-identical for every `threads >= 1`.
pub fn ensemble_estimate_with_threads(
    net: &ContagionNetwork,
    init: &InitialCondition,
    n_runs: usize,
    sample_times: &[f64],
    master_seed: u64,
    threads: usize,
) -> Result<EnsembleEstimate> {
    if sample_times.is_empty() {
        return Err(Error::InvalidParameter(
            "sample_times must not be empty".into(),
        ));
    }
    if sample_times.iter().any(|&t| t < 0.0 || !t.is_finite())
        || sample_times.windows(2).any(|w| w[1] <= w[0])
    {
        return Err(Error::InvalidParameter(
            "sample_times must be nonnegative and strictly increasing".into(),
        ));
    }
    if n_runs == 0 {
        return Err(Error::InvalidParameter("n_runs must be at least 1".into()));
    }
    net.check_initial_condition(init)?;
    let threads = threads.max(1).min(n_runs);

    let n_nodes = net.n_nodes();
    let n_exposed = net.n_exposed();
    let n_labels = label_count(n_exposed);
    let t_max = *sample_times.last().expect("nonempty");
    let table_len = sample_times.len() * n_nodes * n_labels;

    let worker = |lo: usize, hi: usize| -> Vec<u64> {
        let sim = Simulator::new(net);
        let mut counts = vec![0u64; table_len];
        let mut labels = vec![0usize; n_nodes];
        let mut snapshot = vec![0usize; n_nodes];
        let mut hazards = vec![0.0; n_nodes];
        let mut events = Vec::new();
        for replica in lo..hi {
            let mut rng =
                Xoshiro256PlusPlus::seed_from_u64(replica_seed(master_seed, replica as u64));
            // Initial label of every node, drawn in node order.
            for (k, node) in init.nodes.iter().enumerate() {
                let u = rng.next_f64();
                let mut cum = node.s;
                labels[k] = 'label: {
                    if u < cum {
                        break 'label 0;
                    }
                    for (class, &e) in node.e.iter().enumerate() {
                        cum += e;
                        if u < cum {
                            break 'label 1 + class;
                        }
                    }
                    if u < cum + node.i {
                        n_exposed + 1
                    } else {
                        n_exposed + 2
                    }
                };
            }
            events.clear();
            snapshot.copy_from_slice(&labels);
            sim.run(&mut labels, &mut hazards, t_max, &mut rng, &mut events);

            // Piecewise-constant readout: state after all events <= t.
            let mut ev = 0;
            for (ti, &t) in sample_times.iter().enumerate() {
                while ev < events.len() && events[ev].time <= t {
                    snapshot[events[ev].node] = events[ev].new_label.index(n_exposed);
                    ev += 1;
                }
                let base = ti * n_nodes * n_labels;
                for k in 0..n_nodes {
                    counts[base + k * n_labels + snapshot[k]] += 1;
                }
            }
        }
        counts
    };

    let chunk = n_runs.div_ceil(threads);
    let mut counts = vec![0u64; table_len];
    if threads == 1 {
        counts = worker(0, n_runs);
    } else {
        let partials: Vec<Vec<u64>> = std::thread::scope(|scope| {
            let handles: Vec<_> = (0..threads)
                .map(|w| {
                    let lo = w * chunk;
                    let hi = ((w + 1) * chunk).min(n_runs);
                    scope.spawn(move || worker(lo, hi))
                })
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("worker panicked"))
                .collect()
        });
        // Merge in replica order; integer sums are order-independent anyway.
        for partial in partials {
            for (acc, v) in counts.iter_mut().zip(partial) {
                *acc += v;
            }
        }
    }

    Ok(EnsembleEstimate {
        sample_times: sample_times.to_vec(),
        n_runs,
        n_nodes,
        n_exposed,
        counts,
    })
}
