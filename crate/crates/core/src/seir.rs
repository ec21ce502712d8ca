//! Generalised multi-class SEIR node-probability dynamics.
//!
//! The exposed classes of node `k` evolve linearly under the matrix `A_k`
//! assembled by [`assemble_a`]; the closed susceptible equations only need
//! the projections `μᵀA⁻¹` and `νᵀA⁻¹`, precomputed once per node in
//! [`SeirDerived`]. Systems mirror the SIR module: [`SeirRootedExact`] on
//! rooted trees, [`SeirChainSingleClass`] as its scalar chain form, and
//! [`SeirRta`] as the general-network upper bound.

use crate::error::{Error, Result};
use crate::linalg::{lu_solve, transpose};
use crate::net::{ContagionNetwork, InitialCondition, Model, RootedTreeInfo, SeirNodeRates};
use crate::state::layout;

/// Tolerance on the identity `μᵀA⁻¹ + νᵀA⁻¹ = eᵀ`.
const PROJECTION_IDENTITY_TOL: f64 = 1e-12;

/// Tolerance for comparing the root's `φ` with its initial exposed mass.
const ROOT_PHI_TOL: f64 = 1e-12;

/// Assemble the exposed-class transition matrix `A` (row-major).
///
/// Column `v` carries the total outflow `μ_v + ν_v + Σ_{w≠v} a_{w←v}` on the
/// diagonal and `−a_{u←v}` off it, so the column sums equal `μ_v + ν_v`.
pub fn assemble_a(rates: &SeirNodeRates) -> Result<Vec<f64>> {
    let n = rates.phi.len();
    if rates.mu.len() != n
        || rates.nu.len() != n
        || rates.a.len() != n
        || rates.a.iter().any(|row| row.len() != n)
    {
        return Err(Error::InvalidParameter(
            "phi, mu, nu and a must share one exposed-class dimension".into(),
        ));
    }
    let mut a = vec![0.0; n * n];
    for v in 0..n {
        let outflow: f64 = (0..n).filter(|&w| w != v).map(|w| rates.a[v][w]).sum();
        a[v * n + v] = rates.mu[v] + rates.nu[v] + outflow;
        for u in 0..n {
            if u != v {
                a[u * n + v] = -rates.a[v][u];
            }
        }
    }
    Ok(a)
}

/// Per-node quantities derived from [`SeirNodeRates`]: the matrix `A` and
/// the projections `μᵀA⁻¹`, `νᵀA⁻¹` with their contractions against `φ`.
#[derive(Debug, Clone)]
pub struct SeirDerived {
    /// Exposed-class count.
    pub n_exposed: usize,
    /// Row-major `A`.
    pub a: Vec<f64>,
    /// Row vector `μᵀA⁻¹`.
    pub mu_t_ainv: Vec<f64>,
    /// Row vector `νᵀA⁻¹`.
    pub nu_t_ainv: Vec<f64>,
    /// Scalar `μᵀA⁻¹φ`.
    pub mu_t_ainv_phi: f64,
    /// Scalar `νᵀA⁻¹φ`.
    pub nu_t_ainv_phi: f64,
}

/// Solve the two systems `Aᵀx = μ` and `Aᵀx = ν` (never forming `A⁻¹`) and
/// package the result.
///
/// Fails when the solve is numerically singular or when the exact identity
/// `μᵀA⁻¹ + νᵀA⁻¹ = eᵀ` is violated beyond 1e-12, which would indicate an
/// untrustworthy factorisation.
pub fn node_projections(rates: &SeirNodeRates) -> Result<SeirDerived> {
    let a = assemble_a(rates)?;
    let n = rates.phi.len();
    let at = transpose(n, &a);
    let mu_t_ainv = lu_solve(n, &at, &rates.mu)?;
    let nu_t_ainv = lu_solve(n, &at, &rates.nu)?;
    for u in 0..n {
        let sum = mu_t_ainv[u] + nu_t_ainv[u];
        if (sum - 1.0).abs() > PROJECTION_IDENTITY_TOL {
            return Err(Error::SingularMatrix(format!(
                "projection identity violated at class {u}: mu'A^-1 + nu'A^-1 = {sum}"
            )));
        }
    }
    let dot = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(a, b)| a * b).sum::<f64>();
    Ok(SeirDerived {
        n_exposed: n,
        mu_t_ainv_phi: dot(&mu_t_ainv, &rates.phi),
        nu_t_ainv_phi: dot(&nu_t_ainv, &rates.phi),
        a,
        mu_t_ainv,
        nu_t_ainv,
    })
}

/// Node-local pieces shared by the SEIR systems.
#[derive(Debug, Clone)]
struct NodeParams {
    gamma: f64,
    phi: Vec<f64>,
    mu: Vec<f64>,
    phi_total: f64,
    derived: SeirDerived,
}

fn node_params(net: &ContagionNetwork) -> Result<Vec<NodeParams>> {
    (0..net.n_nodes())
        .map(|k| {
            let rates = net.seir_rates(k).ok_or_else(|| {
                Error::InvalidParameter("SEIR system requires a SEIR network".into())
            })?;
            Ok(NodeParams {
                gamma: rates.gamma,
                phi: rates.phi.clone(),
                mu: rates.mu.clone(),
                phi_total: rates.phi_total(),
                derived: node_projections(rates)?,
            })
        })
        .collect()
}

/// `dE_k`, `dI_k` from the shared tail of all three systems, given the
/// already-computed `dS_k`.
#[inline]
fn exposed_infectious_rhs(
    params: &NodeParams,
    n_exposed: usize,
    k: usize,
    ds: f64,
    y: &[f64],
    dy: &mut [f64],
) {
    let mut mu_dot_e = 0.0;
    for u in 0..n_exposed {
        // (A_k E_k)_u
        let mut a_e = 0.0;
        for v in 0..n_exposed {
            a_e += params.derived.a[u * n_exposed + v] * y[layout::e(k, v, n_exposed)];
        }
        dy[layout::e(k, u, n_exposed)] = -params.phi[u] * ds - a_e;
        mu_dot_e += params.mu[u] * y[layout::e(k, u, n_exposed)];
    }
    dy[layout::i(k, n_exposed)] =
        -(1.0 - params.phi_total) * ds - params.gamma * y[layout::i(k, n_exposed)] + mu_dot_e;
}

/// Exact SEIR system on a rooted tree.
///
/// For `k ≠ root` with parent `p`:
/// `dS_k/dt = λ_k νᵀA_p⁻¹φ_p + γ_p − (λ_k+γ_p)S_k + λ_k(1 − νᵀA_p⁻¹φ_p)S_p +
/// λ_k μᵀA_p⁻¹E_p`, with the root's `φ` pinned to its initial exposed
/// distribution.
#[derive(Debug, Clone)]
pub struct SeirRootedExact {
    root: usize,
    parent: Vec<usize>,
    lambda_from_parent: Vec<f64>,
    params: Vec<NodeParams>,
    n_exposed: usize,
}

impl SeirRootedExact {
    /// Build the system; the supplied `φ` at the root must equal the root's
    /// initial exposed distribution (the closure constant depends on it).
    pub fn new(
        net: &ContagionNetwork,
        tree: &RootedTreeInfo,
        init: &InitialCondition,
    ) -> Result<Self> {
        if net.model() != Model::Seir {
            return Err(Error::InvalidParameter(
                "SeirRootedExact requires a SEIR network".into(),
            ));
        }
        net.check_initial_condition(init)?;
        let n = net.n_nodes();
        if tree.parent.len() != n || tree.root >= n {
            return Err(Error::InvalidParameter(
                "rooted tree info does not match the network".into(),
            ));
        }
        let root_rates = net.seir_rates(tree.root).expect("model checked above");
        let root_e0 = &init.nodes[tree.root].e;
        for (u, (&phi_u, &e0_u)) in root_rates.phi.iter().zip(root_e0).enumerate() {
            if (phi_u - e0_u).abs() > ROOT_PHI_TOL {
                return Err(Error::InvalidInitialCondition(format!(
                    "root phi[{u}] = {phi_u} conflicts with initial exposed mass {e0_u}; \
                     the rooted system requires phi at the root to equal the root's \
                     initial exposed distribution"
                )));
            }
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
        Ok(Self {
            root: tree.root,
            parent: tree.parent.clone(),
            lambda_from_parent,
            params: node_params(net)?,
            n_exposed: net.n_exposed(),
        })
    }

    /// Evaluate the right-hand side (layout: `[S, E.., I]` per node).
    pub fn rhs(&self, y: &[f64], dy: &mut [f64]) {
        let nu = self.n_exposed;
        for k in 0..self.parent.len() {
            let ds = if k == self.root {
                0.0
            } else {
                let p = self.parent[k];
                let lam = self.lambda_from_parent[k];
                let pp = &self.params[p];
                let mut mu_ainv_e = 0.0;
                for u in 0..nu {
                    mu_ainv_e += pp.derived.mu_t_ainv[u] * y[layout::e(p, u, nu)];
                }
                lam * pp.derived.nu_t_ainv_phi + pp.gamma - (lam + pp.gamma) * y[layout::s(k, nu)]
                    + lam * (1.0 - pp.derived.nu_t_ainv_phi) * y[layout::s(p, nu)]
                    + lam * mu_ainv_e
            };
            dy[layout::s(k, nu)] = ds;
            exposed_infectious_rhs(&self.params[k], nu, k, ds, y, dy);
        }
    }
}

/// Scalar chain specialisation: one exposed class, uniform rates, root at
/// node 0. Agrees with [`SeirRootedExact`] on the same chain to roundoff.
#[derive(Debug, Clone)]
pub struct SeirChainSingleClass {
    n_nodes: usize,
    lambda: f64,
    phi: f64,
    mu: f64,
    nu: f64,
    gamma: f64,
    /// `νA⁻¹φ = (ν/(μ+ν))·φ`, matching the general system's arithmetic.
    nu_ainv_phi: f64,
    /// `μA⁻¹ = μ/(μ+ν)`.
    mu_ainv: f64,
}

impl SeirChainSingleClass {
    /// Build the chain system.
    ///
    /// The root convention is inherited: initial conditions integrated with
    /// this system must put exposed mass `phi` (and infectious `1 − phi`) on
    /// node 0.
    pub fn new(
        n_nodes: usize,
        lambda: f64,
        phi: f64,
        mu: f64,
        nu: f64,
        gamma: f64,
    ) -> Result<Self> {
        if n_nodes == 0 {
            return Err(Error::InvalidParameter(
                "chain needs at least one node".into(),
            ));
        }
        let valid_rate = lambda.is_finite() && lambda > 0.0;
        if !valid_rate {
            return Err(Error::InvalidParameter("lambda must be positive".into()));
        }
        if !(0.0..=1.0).contains(&phi) {
            return Err(Error::InvalidParameter("phi must lie in [0, 1]".into()));
        }
        if mu < 0.0 || nu < 0.0 || mu + nu <= 0.0 || gamma < 0.0 {
            return Err(Error::InvalidParameter(
                "rates must be nonnegative with mu + nu > 0".into(),
            ));
        }
        let nu_ainv_phi = nu / (mu + nu) * phi;
        let mu_ainv = mu / (mu + nu);
        Ok(Self {
            n_nodes,
            lambda,
            phi,
            mu,
            nu,
            gamma,
            nu_ainv_phi,
            mu_ainv,
        })
    }

    /// Evaluate the right-hand side (layout: `[S, E, I]` per node).
    pub fn rhs(&self, y: &[f64], dy: &mut [f64]) {
        let (lam, phi, mu, nu, gamma) = (self.lambda, self.phi, self.mu, self.nu, self.gamma);
        for k in 0..self.n_nodes {
            let ds = if k == 0 {
                0.0
            } else {
                lam * self.nu_ainv_phi + gamma - (lam + gamma) * y[layout::s(k, 1)]
                    + lam * (1.0 - self.nu_ainv_phi) * y[layout::s(k - 1, 1)]
                    + lam * (self.mu_ainv * y[layout::e(k - 1, 0, 1)])
            };
            dy[layout::s(k, 1)] = ds;
            dy[layout::e(k, 0, 1)] = -phi * ds - (mu + nu) * y[layout::e(k, 0, 1)];
            dy[layout::i(k, 1)] =
                -(1.0 - phi) * ds - gamma * y[layout::i(k, 1)] + mu * y[layout::e(k, 0, 1)];
        }
    }
}

/// SEIR rooted-tree approximation on an arbitrary network.
///
/// Each upstream neighbour `j` contributes the clipped bracket
/// `[−λ νᵀA_j⁻¹(φ_j S_j(0) + E_j(0)) − γ_j S_k(0) + (λ+γ_j)S_k
///   − λ(1−e·φ_j)S_j − λ μᵀA_j⁻¹(φ_j S_j + E_j)]⁺`
/// to `−dS_k/dt`. On rooted trees the non-parent brackets are nonpositive
/// and the system reduces to [`SeirRootedExact`].
#[derive(Debug, Clone)]
pub struct SeirRta {
    neighbors: Vec<Vec<(usize, f64)>>,
    params: Vec<NodeParams>,
    /// `νᵀA_j⁻¹(φ_j S_j(0) + E_j(0))` per node, frozen at construction.
    nu_proj_init: Vec<f64>,
    s0: Vec<f64>,
    n_exposed: usize,
}

impl SeirRta {
    /// Build the system, capturing the initial state.
    pub fn new(net: &ContagionNetwork, init: &InitialCondition) -> Result<Self> {
        if net.model() != Model::Seir {
            return Err(Error::InvalidParameter(
                "SeirRta requires a SEIR network".into(),
            ));
        }
        net.check_initial_condition(init)?;
        if init.any_recovered() {
            return Err(Error::InvalidInitialCondition(
                "bound system requires R = 0 at every node; prune recovered nodes first".into(),
            ));
        }
        let n = net.n_nodes();
        let params = node_params(net)?;
        let nu_proj_init = (0..n)
            .map(|j| {
                let d = &params[j].derived;
                let mut acc = d.nu_t_ainv_phi * init.nodes[j].s;
                for u in 0..net.n_exposed() {
                    acc += d.nu_t_ainv[u] * init.nodes[j].e[u];
                }
                acc
            })
            .collect();
        let neighbors = (0..n).map(|k| net.in_edges(k).to_vec()).collect();
        let s0 = init.nodes.iter().map(|node| node.s).collect();
        Ok(Self {
            neighbors,
            params,
            nu_proj_init,
            s0,
            n_exposed: net.n_exposed(),
        })
    }

    /// Evaluate the right-hand side (layout: `[S, E.., I]` per node).
    pub fn rhs(&self, y: &[f64], dy: &mut [f64]) {
        let nu = self.n_exposed;
        for (k, nbrs) in self.neighbors.iter().enumerate() {
            let s_k = y[layout::s(k, nu)];
            let mut infection = 0.0;
            for &(j, lam) in nbrs {
                let pj = &self.params[j];
                let dj = &pj.derived;
                let mut mu_proj = dj.mu_t_ainv_phi * y[layout::s(j, nu)];
                for u in 0..nu {
                    mu_proj += dj.mu_t_ainv[u] * y[layout::e(j, u, nu)];
                }
                let bracket = -lam * self.nu_proj_init[j] - pj.gamma * self.s0[k]
                    + (lam + pj.gamma) * s_k
                    - lam * (1.0 - pj.phi_total) * y[layout::s(j, nu)]
                    - lam * mu_proj;
                if bracket > 0.0 {
                    infection += bracket;
                }
            }
            let ds = -infection;
            dy[layout::s(k, nu)] = ds;
            exposed_infectious_rhs(&self.params[k], nu, k, ds, y, dy);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net::{detect_rooted_tree, generate_network, GeneratorSpec, GraphKind, NodeRates};

    fn fig3_rates() -> SeirNodeRates {
        SeirNodeRates {
            gamma: 0.1,
            phi: vec![0.8],
            mu: vec![1.2],
            nu: vec![0.05],
            a: vec![vec![0.0]],
        }
    }

    fn seir_chain(n: usize) -> ContagionNetwork {
        generate_network(
            &GeneratorSpec {
                kind: GraphKind::Chain { n },
                lambda: 1.0,
                rates: NodeRates::Seir(fig3_rates()),
            },
            0,
        )
        .unwrap()
    }

    #[test]
    fn assemble_a_scalar() {
        let rates = SeirNodeRates {
            gamma: 0.1,
            phi: vec![0.8],
            mu: vec![1.2],
            nu: vec![0.05],
            a: vec![vec![0.0]],
        };
        assert_eq!(assemble_a(&rates).unwrap(), vec![1.25]);
    }

    #[test]
    fn assemble_a_two_classes() {
        let rates = SeirNodeRates {
            gamma: 0.1,
            phi: vec![0.5, 0.5],
            mu: vec![0.0, 1.0],
            nu: vec![0.1, 0.2],
            a: vec![vec![0.0, 0.5], vec![0.0, 0.0]],
        };
        let a = assemble_a(&rates).unwrap();
        assert_eq!(a, vec![0.6, 0.0, -0.5, 1.2]);
        // Column sums equal mu + nu.
        assert!((a[0] + a[2] - 0.1).abs() < 1e-15);
        assert!((a[1] + a[3] - 1.2).abs() < 1e-15);
    }

    #[test]
    fn assemble_a_diagonal_when_no_class_transitions() {
        let rates = SeirNodeRates {
            gamma: 0.0,
            phi: vec![0.3, 0.3, 0.3],
            mu: vec![1.0, 2.0, 3.0],
            nu: vec![0.5, 0.5, 0.5],
            a: vec![vec![0.0; 3]; 3],
        };
        let a = assemble_a(&rates).unwrap();
        for u in 0..3 {
            for v in 0..3 {
                let expected = if u == v {
                    rates.mu[v] + rates.nu[v]
                } else {
                    0.0
                };
                assert_eq!(a[u * 3 + v], expected);
            }
        }
    }

    #[test]
    fn assemble_a_rejects_dimension_mismatch() {
        let rates = SeirNodeRates {
            gamma: 0.1,
            phi: vec![0.5, 0.5],
            mu: vec![1.0],
            nu: vec![0.1, 0.2],
            a: vec![vec![0.0, 0.5], vec![0.0, 0.0]],
        };
        assert!(assemble_a(&rates).is_err());
    }

    #[test]
    fn projections_scalar_case() {
        let d = node_projections(&fig3_rates()).unwrap();
        assert!((d.mu_t_ainv[0] - 0.96).abs() < 1e-15);
        assert!((d.nu_t_ainv[0] - 0.04).abs() < 1e-15);
        assert!((d.mu_t_ainv_phi - 0.768).abs() < 1e-15);
        assert!((d.nu_t_ainv_phi - 0.032).abs() < 1e-15);
    }

    #[test]
    fn projections_sum_to_one_two_classes() {
        let rates = SeirNodeRates {
            gamma: 0.1,
            phi: vec![0.5, 0.5],
            mu: vec![0.0, 1.0],
            nu: vec![0.1, 0.2],
            a: vec![vec![0.0, 0.5], vec![0.0, 0.0]],
        };
        let d = node_projections(&rates).unwrap();
        for u in 0..2 {
            assert!((d.mu_t_ainv[u] + d.nu_t_ainv[u] - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn rooted_exact_rhs_at_t0() {
        let net = seir_chain(3);
        let ic = InitialCondition::with_root_distribution(3, 1, 0, vec![0.8], 0.2).unwrap();
        let tree = detect_rooted_tree(&net, &ic).unwrap();
        let sys = SeirRootedExact::new(&net, &tree, &ic).unwrap();
        // Layout per node: [S, E, I].
        let y = [0.0, 0.8, 0.2, 1.0, 0.0, 0.0, 1.0, 0.0, 0.0];
        let mut dy = [0.0; 9];
        sys.rhs(&y, &mut dy);
        assert!((dy[3] - -0.2).abs() < 1e-15, "dS_1 = {}", dy[3]);
        assert!(dy[6].abs() < 1e-15, "dS_2 = {}", dy[6]);
        assert!((dy[1] - -1.0).abs() < 1e-15, "dE_0 = {}", dy[1]);
        assert!((dy[2] - 0.94).abs() < 1e-15, "dI_0 = {}", dy[2]);
    }

    #[test]
    fn rooted_exact_rejects_phi_root_conflict() {
        let net = seir_chain(3);
        // Root carries pure infectious mass, conflicting with phi = 0.8.
        let ic = InitialCondition::single_infectious(3, 1, 0).unwrap();
        let tree = detect_rooted_tree(&net, &ic).unwrap();
        assert!(SeirRootedExact::new(&net, &tree, &ic).is_err());
    }

    #[test]
    fn chain_single_class_matches_general_system() {
        let n = 6;
        let net = seir_chain(n);
        let ic = InitialCondition::with_root_distribution(n, 1, 0, vec![0.8], 0.2).unwrap();
        let tree = detect_rooted_tree(&net, &ic).unwrap();
        let general = SeirRootedExact::new(&net, &tree, &ic).unwrap();
        let chain = SeirChainSingleClass::new(n, 1.0, 0.8, 1.2, 0.05, 0.1).unwrap();
        let mut rng = crate::rng::Xoshiro256PlusPlus::seed_from_u64(5);
        for _ in 0..200 {
            // Random sub-stochastic states exercise every term.
            let mut y = vec![0.0; 3 * n];
            for k in 0..n {
                let (a, b, c) = (rng.next_f64(), rng.next_f64(), rng.next_f64());
                let norm = 1.0_f64.max(a + b + c);
                y[3 * k] = a / norm;
                y[3 * k + 1] = b / norm;
                y[3 * k + 2] = c / norm;
            }
            let (mut d1, mut d2) = (vec![0.0; 3 * n], vec![0.0; 3 * n]);
            general.rhs(&y, &mut d1);
            chain.rhs(&y, &mut d2);
            for c in 0..3 * n {
                assert!(
                    (d1[c] - d2[c]).abs() <= 1e-12,
                    "component {c}: {} vs {}",
                    d1[c],
                    d2[c]
                );
            }
        }
    }

    #[test]
    fn chain_rhs_examples() {
        let chain = SeirChainSingleClass::new(3, 1.0, 0.8, 1.2, 0.05, 0.1).unwrap();
        let y = [0.0, 0.8, 0.2, 1.0, 0.0, 0.0, 1.0, 0.0, 0.0];
        let mut dy = [0.0; 9];
        chain.rhs(&y, &mut dy);
        assert!((dy[3] - -0.2).abs() < 1e-15, "dS_1 = {}", dy[3]);
        assert_eq!(dy[0], 0.0);
        assert!(dy[6].abs() < 1e-15, "dS_2 = {}", dy[6]);
    }

    #[test]
    fn rta_reduces_to_rooted_exact_on_tree_states() {
        let net = seir_chain(4);
        let ic = InitialCondition::with_root_distribution(4, 1, 0, vec![0.8], 0.2).unwrap();
        let tree = detect_rooted_tree(&net, &ic).unwrap();
        let exact = SeirRootedExact::new(&net, &tree, &ic).unwrap();
        let rta = SeirRta::new(&net, &ic).unwrap();
        // Mid-trajectory-shaped state: S grows with depth, root pinned at 0.
        let y = [
            0.0, 0.3, 0.4, // node 0
            0.5, 0.25, 0.15, // node 1
            0.8, 0.08, 0.04, // node 2
            0.95, 0.01, 0.01, // node 3
        ];
        let (mut d1, mut d2) = ([0.0; 12], [0.0; 12]);
        exact.rhs(&y, &mut d1);
        rta.rhs(&y, &mut d2);
        for c in 0..12 {
            assert!(
                (d1[c] - d2[c]).abs() < 1e-14,
                "component {c}: {} vs {}",
                d1[c],
                d2[c]
            );
        }
    }

    #[test]
    fn rta_with_zero_exposed_classes_matches_sir_rta() {
        let rates = NodeRates::Seir(SeirNodeRates {
            gamma: 0.1,
            phi: vec![],
            mu: vec![],
            nu: vec![],
            a: vec![],
        });
        let seir_net = generate_network(
            &GeneratorSpec {
                kind: GraphKind::TreePlusEdges { n: 8, extra: 3 },
                lambda: 1.0,
                rates,
            },
            11,
        )
        .unwrap();
        let sir_net = generate_network(
            &GeneratorSpec {
                kind: GraphKind::TreePlusEdges { n: 8, extra: 3 },
                lambda: 1.0,
                rates: NodeRates::Sir(crate::net::SirNodeRates { gamma: 0.1 }),
            },
            11,
        )
        .unwrap();
        let ic = InitialCondition::single_infectious(8, 0, 0).unwrap();
        let seir = SeirRta::new(&seir_net, &ic).unwrap();
        let sir = crate::sir::SirRta::new(&sir_net, &ic).unwrap();
        let mut rng = crate::rng::Xoshiro256PlusPlus::seed_from_u64(9);
        for _ in 0..100 {
            let mut y = vec![0.0; 16];
            for k in 0..8 {
                let (a, b) = (rng.next_f64(), rng.next_f64());
                let norm = 1.0_f64.max(a + b);
                y[2 * k] = a / norm;
                y[2 * k + 1] = b / norm;
            }
            let (mut d1, mut d2) = (vec![0.0; 16], vec![0.0; 16]);
            seir.rhs(&y, &mut d1);
            sir.rhs(&y, &mut d2);
            for c in 0..16 {
                assert!((d1[c] - d2[c]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn recovery_flux_identity() {
        // d(S + E + I)/dt must equal -(nu·E + gamma·I) for both systems.
        let net = seir_chain(4);
        let ic = InitialCondition::with_root_distribution(4, 1, 0, vec![0.8], 0.2).unwrap();
        let tree = detect_rooted_tree(&net, &ic).unwrap();
        let exact = SeirRootedExact::new(&net, &tree, &ic).unwrap();
        let rta = SeirRta::new(&net, &ic).unwrap();
        let mut rng = crate::rng::Xoshiro256PlusPlus::seed_from_u64(3);
        for _ in 0..100 {
            let mut y = vec![0.0; 12];
            for k in 0..4 {
                let (a, b, c) = (rng.next_f64(), rng.next_f64(), rng.next_f64());
                let norm = 1.0_f64.max(a + b + c);
                y[3 * k] = a / norm;
                y[3 * k + 1] = b / norm;
                y[3 * k + 2] = c / norm;
            }
            for sys in [0, 1] {
                let mut dy = vec![0.0; 12];
                if sys == 0 {
                    exact.rhs(&y, &mut dy);
                } else {
                    rta.rhs(&y, &mut dy);
                }
                for k in 0..4 {
                    let dtotal = dy[3 * k] + dy[3 * k + 1] + dy[3 * k + 2];
                    let recovery = 0.05 * y[3 * k + 1] + 0.1 * y[3 * k + 2];
                    assert!(
                        (dtotal + recovery).abs() <= 1e-12,
                        "node {k} sys {sys}: {dtotal} vs -{recovery}"
                    );
                }
            }
        }
    }
}
