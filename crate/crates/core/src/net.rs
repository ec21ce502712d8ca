//! Contact networks, rate parameters, graph generators and file formats.
//!
//! A network stores directed infection rates `λ_{k←j}` (an undirected contact
//! is two directed edges, so the two directions may carry different rates)
//! together with per-node recovery/progression parameters. Everything is
//! immutable after construction and validated up front.

use std::collections::HashSet;

use serde::Deserialize;

use crate::canonical::JsonWriter;
use crate::error::{Error, Result};
use crate::rng::Xoshiro256PlusPlus;

/// Absolute tolerance for "probabilities sum to one" checks on inputs.
pub const IC_SUM_TOL: f64 = 1e-12;

/// Contagion model carried by a network.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Model {
    /// Susceptible–infectious–recovered.
    Sir,
    /// Susceptible–exposed(–class)–infectious–recovered.
    Seir,
}

/// Per-node rates for the SIR model.
#[derive(Debug, Clone, PartialEq)]
pub struct SirNodeRates {
    /// Recovery rate γ ≥ 0.
    pub gamma: f64,
}

/// Per-node rates for the generalised SEIR model with `N_u` exposed classes.
///
/// `a[u][v]` is the rate at which an exposed node moves from class `u+1` to
/// class `v+1`; the diagonal must be zero.
#[derive(Debug, Clone, PartialEq)]
pub struct SeirNodeRates {
    /// Recovery rate of an infectious node, γ ≥ 0.
    pub gamma: f64,
    /// Probability that infection lands the node in exposed class `u+1`;
    /// the remainder `1 − Σφ` goes directly to infectious.
    pub phi: Vec<f64>,
    /// Rates exposed class → infectious, μ ≥ 0.
    pub mu: Vec<f64>,
    /// Rates exposed class → recovered, ν ≥ 0.
    pub nu: Vec<f64>,
    /// Exposed-class transition rates, zero diagonal.
    pub a: Vec<Vec<f64>>,
}

impl SeirNodeRates {
    /// `Σ_u φ_u`, the total probability of entering an exposed state.
    pub fn phi_total(&self) -> f64 {
        self.phi.iter().sum()
    }

    fn validate(&self, n_exposed: usize, node: usize) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidNetwork(msg));
        if self.gamma < 0.0 || !self.gamma.is_finite() {
            return bad(format!("node {node}: gamma must be finite and >= 0"));
        }
        if self.phi.len() != n_exposed || self.mu.len() != n_exposed || self.nu.len() != n_exposed {
            return bad(format!(
                "node {node}: phi/mu/nu must all have length {n_exposed}"
            ));
        }
        if self.a.len() != n_exposed || self.a.iter().any(|row| row.len() != n_exposed) {
            return bad(format!("node {node}: a must be {n_exposed}x{n_exposed}"));
        }
        for u in 0..n_exposed {
            if self.phi[u] < 0.0 {
                return bad(format!("node {node}: phi[{u}] negative"));
            }
            if self.mu[u] < 0.0 || self.nu[u] < 0.0 {
                return bad(format!("node {node}: mu/nu[{u}] negative"));
            }
            if self.mu[u] + self.nu[u] <= 0.0 {
                // Needed for the invertibility of the class-transition matrix.
                return bad(format!("node {node}: mu[{u}] + nu[{u}] must be positive"));
            }
            if self.a[u][u] != 0.0 {
                return bad(format!("node {node}: a[{u}][{u}] must be zero"));
            }
            for v in 0..n_exposed {
                if self.a[u][v] < 0.0 {
                    return bad(format!("node {node}: a[{u}][{v}] negative"));
                }
            }
        }
        let total = self.phi_total();
        if !(0.0..=1.0 + IC_SUM_TOL).contains(&total) {
            return bad(format!(
                "node {node}: sum of phi is {total}, outside [0, 1]"
            ));
        }
        Ok(())
    }
}

/// Node rates for either model.
#[derive(Debug, Clone, PartialEq)]
pub enum NodeRates {
    /// SIR rates.
    Sir(SirNodeRates),
    /// SEIR rates.
    Seir(SeirNodeRates),
}

/// One directed infection edge: node `to` is infected by node `from` at rate
/// `lambda` while `from` is infectious and `to` susceptible.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    /// Source (infecting) node.
    pub from: usize,
    /// Target (infected) node.
    pub to: usize,
    /// Infection rate λ_{to←from} > 0.
    pub lambda: f64,
}

/// A validated, immutable contagion network.
#[derive(Debug, Clone)]
pub struct ContagionNetwork {
    model: Model,
    n_nodes: usize,
    n_exposed: usize,
    edges: Vec<Edge>,
    rates: Vec<NodeRates>,
    in_edges: Vec<Vec<(usize, f64)>>,
    out_edges: Vec<Vec<(usize, f64)>>,
}

impl ContagionNetwork {
    /// Build and validate a network.
    pub fn new(
        model: Model,
        n_nodes: usize,
        n_exposed: usize,
        mut edges: Vec<Edge>,
        rates: Vec<NodeRates>,
    ) -> Result<Self> {
        if n_nodes == 0 {
            return Err(Error::InvalidNetwork(
                "network must have at least one node".into(),
            ));
        }
        if model == Model::Sir && n_exposed != 0 {
            return Err(Error::InvalidNetwork(
                "SIR networks must have zero exposed classes".into(),
            ));
        }
        if rates.len() != n_nodes {
            return Err(Error::InvalidNetwork(format!(
                "expected {n_nodes} node rate entries, found {}",
                rates.len()
            )));
        }
        for (k, r) in rates.iter().enumerate() {
            match (model, r) {
                (Model::Sir, NodeRates::Sir(s)) => {
                    if s.gamma < 0.0 || !s.gamma.is_finite() {
                        return Err(Error::InvalidNetwork(format!(
                            "node {k}: gamma must be finite and >= 0"
                        )));
                    }
                }
                (Model::Seir, NodeRates::Seir(s)) => s.validate(n_exposed, k)?,
                _ => {
                    return Err(Error::InvalidNetwork(format!(
                        "node {k}: rate kind does not match network model"
                    )))
                }
            }
        }
        edges.sort_by_key(|e| (e.from, e.to));
        let mut seen = HashSet::new();
        for e in &edges {
            if e.from >= n_nodes || e.to >= n_nodes {
                return Err(Error::InvalidNetwork(format!(
                    "edge {}->{} references a node outside 0..{n_nodes}",
                    e.from, e.to
                )));
            }
            if e.from == e.to {
                return Err(Error::InvalidNetwork(format!(
                    "self-edge at node {}",
                    e.from
                )));
            }
            let valid_rate = e.lambda.is_finite() && e.lambda > 0.0;
            if !valid_rate {
                return Err(Error::InvalidNetwork(format!(
                    "edge {}->{} has non-positive rate {}; zero-rate edges must be omitted",
                    e.from, e.to, e.lambda
                )));
            }
            if !seen.insert((e.from, e.to)) {
                return Err(Error::InvalidNetwork(format!(
                    "duplicate edge {}->{}",
                    e.from, e.to
                )));
            }
        }
        let mut in_edges = vec![Vec::new(); n_nodes];
        let mut out_edges = vec![Vec::new(); n_nodes];
        for e in &edges {
            out_edges[e.from].push((e.to, e.lambda));
            in_edges[e.to].push((e.from, e.lambda));
        }
        // `edges` is sorted by (from, to), so out lists are already ordered;
        // in lists need their own sort for deterministic neighbour order.
        for list in &mut in_edges {
            list.sort_by_key(|&(j, _)| j);
        }
        Ok(Self {
            model,
            n_nodes,
            n_exposed,
            edges,
            rates,
            in_edges,
            out_edges,
        })
    }

    /// Contagion model.
    pub fn model(&self) -> Model {
        self.model
    }

    /// Number of nodes.
    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    /// Number of exposed classes (0 for SIR).
    pub fn n_exposed(&self) -> usize {
        self.n_exposed
    }

    /// All directed edges, sorted by `(from, to)`.
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Recovery rate γ of node `k`.
    pub fn gamma(&self, k: usize) -> f64 {
        match &self.rates[k] {
            NodeRates::Sir(r) => r.gamma,
            NodeRates::Seir(r) => r.gamma,
        }
    }

    /// SEIR rates of node `k`; `None` on SIR networks.
    pub fn seir_rates(&self, k: usize) -> Option<&SeirNodeRates> {
        match &self.rates[k] {
            NodeRates::Sir(_) => None,
            NodeRates::Seir(r) => Some(r),
        }
    }

    /// Incoming edges of `k` as `(source, λ_{k←source})`, sorted by source.
    pub fn in_edges(&self, k: usize) -> &[(usize, f64)] {
        &self.in_edges[k]
    }

    /// Outgoing edges of `j` as `(target, λ_{target←j})`, sorted by target.
    pub fn out_edges(&self, j: usize) -> &[(usize, f64)] {
        &self.out_edges[j]
    }

    /// Upstream neighbour set of `k`: nodes `j` with `λ_{k←j} > 0`, ascending.
    pub fn upstream_neighbors(&self, k: usize) -> Result<Vec<usize>> {
        if k >= self.n_nodes {
            return Err(Error::InvalidParameter(format!(
                "node id {k} outside 0..{}",
                self.n_nodes
            )));
        }
        Ok(self.in_edges[k].iter().map(|&(j, _)| j).collect())
    }

    /// Check an initial condition against this network's shape.
    pub fn check_initial_condition(&self, ic: &InitialCondition) -> Result<()> {
        if ic.nodes.len() != self.n_nodes {
            return Err(Error::InvalidInitialCondition(format!(
                "initial condition has {} nodes, network has {}",
                ic.nodes.len(),
                self.n_nodes
            )));
        }
        if ic.n_exposed() != self.n_exposed {
            return Err(Error::InvalidInitialCondition(format!(
                "initial condition has {} exposed classes, network has {}",
                ic.n_exposed(),
                self.n_exposed
            )));
        }
        Ok(())
    }

    /// Number of undirected contacts (pairs connected in either direction).
    pub fn undirected_edge_count(&self) -> usize {
        self.undirected_skeleton().len()
    }

    /// Unordered node pairs connected by at least one directed edge.
    pub fn undirected_skeleton(&self) -> HashSet<(usize, usize)> {
        self.edges
            .iter()
            .map(|e| (e.from.min(e.to), e.from.max(e.to)))
            .collect()
    }

    /// True when every node is reachable from node 0 over the skeleton.
    pub fn is_connected(&self) -> bool {
        let mut visited = vec![false; self.n_nodes];
        let mut queue = std::collections::VecDeque::from([0usize]);
        visited[0] = true;
        let mut count = 1;
        while let Some(k) = queue.pop_front() {
            for &(j, _) in self.in_edges(k).iter().chain(self.out_edges(k)) {
                if !visited[j] {
                    visited[j] = true;
                    count += 1;
                    queue.push_back(j);
                }
            }
        }
        count == self.n_nodes
    }

    /// Canonical JSON document for this network (sorted keys, 17-digit floats).
    pub fn to_canonical_json(&self) -> String {
        let mut w = JsonWriter::new();
        w.begin_object();
        w.key("edges").begin_array();
        for e in &self.edges {
            w.begin_object();
            w.key("from").uint(e.from as u64);
            w.key("lambda").float(e.lambda);
            w.key("to").uint(e.to as u64);
            w.end_object();
        }
        w.end_array();
        w.key("model").string(match self.model {
            Model::Sir => "SIR",
            Model::Seir => "SEIR",
        });
        w.key("n_exposed_classes").uint(self.n_exposed as u64);
        w.key("n_nodes").uint(self.n_nodes as u64);
        w.key("nodes").begin_array();
        for r in &self.rates {
            w.begin_object();
            match r {
                NodeRates::Sir(s) => {
                    w.key("gamma").float(s.gamma);
                }
                NodeRates::Seir(s) => {
                    w.key("a").begin_array();
                    for row in &s.a {
                        w.begin_array();
                        for &v in row {
                            w.float(v);
                        }
                        w.end_array();
                    }
                    w.end_array();
                    w.key("gamma").float(s.gamma);
                    w.key("mu").begin_array();
                    for &v in &s.mu {
                        w.float(v);
                    }
                    w.end_array();
                    w.key("nu").begin_array();
                    for &v in &s.nu {
                        w.float(v);
                    }
                    w.end_array();
                    w.key("phi").begin_array();
                    for &v in &s.phi {
                        w.float(v);
                    }
                    w.end_array();
                }
            }
            w.end_object();
        }
        w.end_array();
        w.end_object();
        w.finish()
    }

    /// Parse a network from its JSON document.
    pub fn from_json(text: &str) -> Result<Self> {
        let file: NetworkFile =
            serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        let model = match file.model.as_str() {
            "SIR" => Model::Sir,
            "SEIR" => Model::Seir,
            other => return Err(Error::Parse(format!("unknown model {other:?}"))),
        };
        let edges = file
            .edges
            .into_iter()
            .map(|e| Edge {
                from: e.from,
                to: e.to,
                lambda: e.lambda,
            })
            .collect();
        let rates = file
            .nodes
            .into_iter()
            .enumerate()
            .map(|(k, n)| match model {
                Model::Sir => Ok(NodeRates::Sir(SirNodeRates { gamma: n.gamma })),
                Model::Seir => {
                    let missing =
                        |f: &str| Error::Parse(format!("node {k}: SEIR field {f:?} missing"));
                    Ok(NodeRates::Seir(SeirNodeRates {
                        gamma: n.gamma,
                        phi: n.phi.ok_or_else(|| missing("phi"))?,
                        mu: n.mu.ok_or_else(|| missing("mu"))?,
                        nu: n.nu.ok_or_else(|| missing("nu"))?,
                        a: n.a.ok_or_else(|| missing("a"))?,
                    }))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(model, file.n_nodes, file.n_exposed_classes, edges, rates)
    }
}

#[derive(Deserialize)]
struct NetworkFile {
    model: String,
    n_nodes: usize,
    n_exposed_classes: usize,
    edges: Vec<EdgeFile>,
    nodes: Vec<NodeFile>,
}

#[derive(Deserialize)]
struct EdgeFile {
    from: usize,
    to: usize,
    lambda: f64,
}

#[derive(Deserialize)]
struct NodeFile {
    gamma: f64,
    #[serde(default)]
    phi: Option<Vec<f64>>,
    #[serde(default)]
    mu: Option<Vec<f64>>,
    #[serde(default)]
    nu: Option<Vec<f64>>,
    #[serde(default)]
    a: Option<Vec<Vec<f64>>>,
}

/// Initial state probabilities of one node.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeInit {
    /// P(susceptible at t = 0).
    pub s: f64,
    /// P(exposed of each class at t = 0).
    pub e: Vec<f64>,
    /// P(infectious at t = 0).
    pub i: f64,
    /// P(recovered at t = 0).
    pub r: f64,
}

/// Per-node initial label distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct InitialCondition {
    /// One entry per node.
    pub nodes: Vec<NodeInit>,
}

impl InitialCondition {
    /// Validate probability ranges and per-node normalisation.
    pub fn new(nodes: Vec<NodeInit>) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::InvalidInitialCondition("no nodes".into()));
        }
        let n_exposed = nodes[0].e.len();
        for (k, n) in nodes.iter().enumerate() {
            if n.e.len() != n_exposed {
                return Err(Error::InvalidInitialCondition(format!(
                    "node {k}: expected {n_exposed} exposed entries, found {}",
                    n.e.len()
                )));
            }
            let mut sum = n.s + n.i + n.r;
            for &e in &n.e {
                sum += e;
                if !(0.0..=1.0).contains(&e) {
                    return Err(Error::InvalidInitialCondition(format!(
                        "node {k}: exposed probability {e} outside [0, 1]"
                    )));
                }
            }
            for (name, v) in [("S", n.s), ("I", n.i), ("R", n.r)] {
                if !(0.0..=1.0).contains(&v) {
                    return Err(Error::InvalidInitialCondition(format!(
                        "node {k}: {name} probability {v} outside [0, 1]"
                    )));
                }
            }
            if (sum - 1.0).abs() > IC_SUM_TOL {
                return Err(Error::InvalidInitialCondition(format!(
                    "node {k}: probabilities sum to {sum}, not 1"
                )));
            }
        }
        Ok(Self { nodes })
    }

    /// Number of exposed classes carried per node.
    pub fn n_exposed(&self) -> usize {
        self.nodes.first().map_or(0, |n| n.e.len())
    }

    /// Standard single-source condition: node `root` infectious with
    /// probability one, everyone else susceptible.
    pub fn single_infectious(n_nodes: usize, n_exposed: usize, root: usize) -> Result<Self> {
        Self::with_root_distribution(n_nodes, n_exposed, root, vec![0.0; n_exposed], 1.0)
    }

    /// Condition where node `root` starts with the given exposed/infectious
    /// split (`e0`, `i0` summing to one) and every other node is susceptible.
    pub fn with_root_distribution(
        n_nodes: usize,
        n_exposed: usize,
        root: usize,
        e0: Vec<f64>,
        i0: f64,
    ) -> Result<Self> {
        if root >= n_nodes {
            return Err(Error::InvalidParameter(format!(
                "root {root} outside 0..{n_nodes}"
            )));
        }
        let mut nodes = Vec::with_capacity(n_nodes);
        for k in 0..n_nodes {
            if k == root {
                nodes.push(NodeInit {
                    s: 0.0,
                    e: e0.clone(),
                    i: i0,
                    r: 0.0,
                });
            } else {
                nodes.push(NodeInit {
                    s: 1.0,
                    e: vec![0.0; n_exposed],
                    i: 0.0,
                    r: 0.0,
                });
            }
        }
        Self::new(nodes)
    }

    /// True when any node carries initial recovered mass.
    pub fn any_recovered(&self) -> bool {
        self.nodes.iter().any(|n| n.r != 0.0)
    }

    /// Canonical JSON document (sorted keys, 17-digit floats).
    pub fn to_canonical_json(&self) -> String {
        let mut w = JsonWriter::new();
        w.begin_object();
        w.key("nodes").begin_array();
        for n in &self.nodes {
            w.begin_object();
            w.key("E").begin_array();
            for &e in &n.e {
                w.float(e);
            }
            w.end_array();
            w.key("I").float(n.i);
            w.key("R").float(n.r);
            w.key("S").float(n.s);
            w.end_object();
        }
        w.end_array();
        w.end_object();
        w.finish()
    }

    /// Parse an initial condition from its JSON document.
    pub fn from_json(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct IcFile {
            nodes: Vec<IcNodeFile>,
        }
        #[derive(Deserialize)]
        struct IcNodeFile {
            #[serde(rename = "S")]
            s: f64,
            #[serde(rename = "E", default)]
            e: Vec<f64>,
            #[serde(rename = "I")]
            i: f64,
            #[serde(rename = "R", default)]
            r: f64,
        }
        let file: IcFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        Self::new(
            file.nodes
                .into_iter()
                .map(|n| NodeInit {
                    s: n.s,
                    e: n.e,
                    i: n.i,
                    r: n.r,
                })
                .collect(),
        )
    }
}

/// Parent structure of a rooted tree: the unique initially non-susceptible
/// node and, for every other node, its neighbour on the path to the root.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RootedTreeInfo {
    /// The unique source node.
    pub root: usize,
    /// `parent[k]` for `k != root`; `parent[root] == root`.
    pub parent: Vec<usize>,
}

/// Detect whether `(net, init)` forms a rooted tree: the undirected skeleton
/// is a connected tree and exactly one node is deterministically
/// non-susceptible (`S₀ = 0`, `R₀ = 0`) while every other node is
/// deterministically susceptible (`S₀ = 1`).
///
/// Returns `None` whenever any condition fails; absence is a valid result,
/// not an error.
pub fn detect_rooted_tree(
    net: &ContagionNetwork,
    init: &InitialCondition,
) -> Option<RootedTreeInfo> {
    if net.check_initial_condition(init).is_err() {
        return None;
    }
    let n = net.n_nodes();
    let skeleton = net.undirected_skeleton();
    if skeleton.len() != n.saturating_sub(1) {
        return None;
    }

    // The unique root: S0 = 0 with no recovered mass; all others exactly
    // susceptible.
    let mut root = None;
    for (k, node) in init.nodes.iter().enumerate() {
        if node.s == 1.0 {
            if node.i != 0.0 || node.r != 0.0 || node.e.iter().any(|&e| e != 0.0) {
                return None;
            }
        } else if node.s == 0.0 && node.r == 0.0 {
            if root.replace(k).is_some() {
                return None;
            }
        } else {
            return None;
        }
    }
    let root = root?;

    // Breadth-first traversal assigns parents and doubles as the
    // connectivity check (a disconnected forest cannot reach all nodes).
    let mut adjacency = vec![Vec::new(); n];
    for &(a, b) in &skeleton {
        adjacency[a].push(b);
        adjacency[b].push(a);
    }
    for list in &mut adjacency {
        list.sort_unstable();
    }
    let mut parent = vec![usize::MAX; n];
    parent[root] = root;
    let mut queue = std::collections::VecDeque::from([root]);
    let mut visited = 1;
    while let Some(k) = queue.pop_front() {
        for &j in &adjacency[k] {
            if parent[j] == usize::MAX {
                parent[j] = k;
                visited += 1;
                queue.push_back(j);
            }
        }
    }
    if visited != n {
        return None;
    }
    Some(RootedTreeInfo { root, parent })
}

/// Graph topology produced by [`generate_network`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GraphKind {
    /// Path graph: node `i` connected to `i + 1`.
    Chain {
        /// Number of nodes, ≥ 1.
        n: usize,
    },
    /// Uniform random labelled tree via a random Prüfer sequence.
    PruferTree {
        /// Number of nodes, ≥ 1.
        n: usize,
    },
    /// Erdős–Rényi G(n, p): each unordered pair connected with probability `p`.
    ErdosRenyi {
        /// Number of nodes, ≥ 1.
        n: usize,
        /// Connection probability in [0, 1].
        p: f64,
    },
    /// Random Prüfer tree plus `extra` distinct non-tree edges chosen
    /// uniformly at random.
    TreePlusEdges {
        /// Number of nodes, ≥ 1.
        n: usize,
        /// Number of additional edges.
        extra: usize,
    },
}

impl GraphKind {
    fn n(&self) -> usize {
        match *self {
            GraphKind::Chain { n }
            | GraphKind::PruferTree { n }
            | GraphKind::ErdosRenyi { n, .. }
            | GraphKind::TreePlusEdges { n, .. } => n,
        }
    }
}

/// Generator request: topology plus uniform rates for every edge and node.
#[derive(Debug, Clone)]
pub struct GeneratorSpec {
    /// Topology to generate.
    pub kind: GraphKind,
    /// Infection rate λ applied to both directions of every contact.
    pub lambda: f64,
    /// Uniform node rates; decides whether the network is SIR or SEIR.
    pub rates: NodeRates,
}

/// Generate a network; a pure function of `(spec, seed)`.
///
/// Contacts are undirected, so every generated pair is stored as two
/// directed edges carrying the same rate.
pub fn generate_network(spec: &GeneratorSpec, seed: u64) -> Result<ContagionNetwork> {
    let n = spec.kind.n();
    if n == 0 {
        return Err(Error::InvalidParameter("generator needs n >= 1".into()));
    }
    let valid_rate = spec.lambda.is_finite() && spec.lambda > 0.0;
    if !valid_rate {
        return Err(Error::InvalidParameter(format!(
            "lambda must be positive and finite, got {}",
            spec.lambda
        )));
    }
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
    let pairs: Vec<(usize, usize)> = match spec.kind {
        GraphKind::Chain { n } => (0..n.saturating_sub(1)).map(|i| (i, i + 1)).collect(),
        GraphKind::PruferTree { n } => random_prufer_tree(n, &mut rng),
        GraphKind::ErdosRenyi { n, p } => {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidParameter(format!(
                    "connection probability {p} outside [0, 1]"
                )));
            }
            let mut pairs = Vec::new();
            for i in 0..n {
                for j in i + 1..n {
                    if rng.next_f64() < p {
                        pairs.push((i, j));
                    }
                }
            }
            pairs
        }
        GraphKind::TreePlusEdges { n, extra } => {
            let mut pairs = random_prufer_tree(n, &mut rng);
            let tree: HashSet<(usize, usize)> = pairs.iter().copied().collect();
            let mut candidates: Vec<(usize, usize)> = Vec::new();
            for i in 0..n {
                for j in i + 1..n {
                    if !tree.contains(&(i, j)) {
                        candidates.push((i, j));
                    }
                }
            }
            if extra > candidates.len() {
                return Err(Error::InvalidParameter(format!(
                    "{extra} extra edges requested but only {} non-tree pairs exist",
                    candidates.len()
                )));
            }
            // Partial Fisher–Yates: draw `extra` distinct candidates.
            for idx in 0..extra {
                let pick = idx + rng.next_usize(candidates.len() - idx);
                candidates.swap(idx, pick);
                pairs.push(candidates[idx]);
            }
            pairs
        }
    };

    let mut edges = Vec::with_capacity(pairs.len() * 2);
    for (i, j) in pairs {
        edges.push(Edge {
            from: i,
            to: j,
            lambda: spec.lambda,
        });
        edges.push(Edge {
            from: j,
            to: i,
            lambda: spec.lambda,
        });
    }
    let rates = vec![spec.rates.clone(); n];
    let (model, n_exposed) = match &spec.rates {
        NodeRates::Sir(_) => (Model::Sir, 0),
        NodeRates::Seir(s) => (Model::Seir, s.phi.len()),
    };
    ContagionNetwork::new(model, n, n_exposed, edges, rates)
}

/// Uniform random labelled tree: draw a Prüfer sequence of length `n − 2`
/// with entries uniform on node ids, then decode it.
fn random_prufer_tree(n: usize, rng: &mut Xoshiro256PlusPlus) -> Vec<(usize, usize)> {
    match n {
        0 | 1 => Vec::new(),
        2 => vec![(0, 1)],
        _ => {
            let seq: Vec<usize> = (0..n - 2).map(|_| rng.next_usize(n)).collect();
            prufer_decode(n, &seq)
        }
    }
}

/// Standard Prüfer sequence decoding, smallest-leaf-first.
fn prufer_decode(n: usize, seq: &[usize]) -> Vec<(usize, usize)> {
    debug_assert_eq!(seq.len(), n - 2);
    let mut degree = vec![1usize; n];
    for &s in seq {
        degree[s] += 1;
    }
    let mut leaves: std::collections::BinaryHeap<std::cmp::Reverse<usize>> = (0..n)
        .filter(|&k| degree[k] == 1)
        .map(std::cmp::Reverse)
        .collect();
    let mut pairs = Vec::with_capacity(n - 1);
    for &s in seq {
        let std::cmp::Reverse(leaf) = leaves.pop().expect("prufer decode: no leaf available");
        pairs.push((leaf.min(s), leaf.max(s)));
        degree[s] -= 1;
        if degree[s] == 1 {
            leaves.push(std::cmp::Reverse(s));
        }
    }
    let std::cmp::Reverse(a) = leaves.pop().expect("prufer decode: missing final leaf");
    let std::cmp::Reverse(b) = leaves.pop().expect("prufer decode: missing final leaf");
    pairs.push((a.min(b), a.max(b)));
    pairs
}
