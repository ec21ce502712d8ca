//! Flat state vector for the deterministic node-probability systems.

use crate::net::InitialCondition;

/// Per-node probabilities `⟨S⟩, ⟨E⁽¹⁾⟩..⟨E⁽ᴺᵘ⁾⟩, ⟨I⟩` in one flat buffer.
///
/// The recovered probability is never stored or integrated: it is always
/// reconstructed as `1 − S − ΣE − I`, so the conservation law holds exactly
/// by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeProbabilityState {
    n_nodes: usize,
    n_exposed: usize,
    data: Vec<f64>,
}

impl NodeProbabilityState {
    /// Components stored per node.
    #[inline]
    pub fn stride(&self) -> usize {
        self.n_exposed + 2
    }

    /// Build a state from raw storage (length `n_nodes * (n_exposed + 2)`).
    pub fn from_raw(n_nodes: usize, n_exposed: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), n_nodes * (n_exposed + 2));
        Self {
            n_nodes,
            n_exposed,
            data,
        }
    }

    /// Build the state vector holding the mean of an initial condition.
    pub fn from_initial_condition(ic: &InitialCondition) -> Self {
        let n_nodes = ic.nodes.len();
        let n_exposed = ic.n_exposed();
        let mut data = Vec::with_capacity(n_nodes * (n_exposed + 2));
        for node in &ic.nodes {
            data.push(node.s);
            data.extend_from_slice(&node.e);
            data.push(node.i);
        }
        Self {
            n_nodes,
            n_exposed,
            data,
        }
    }

    /// Number of nodes.
    #[inline]
    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    /// Number of exposed classes.
    #[inline]
    pub fn n_exposed(&self) -> usize {
        self.n_exposed
    }

    /// Raw flat storage.
    #[inline]
    pub fn raw(&self) -> &[f64] {
        &self.data
    }

    /// Mutable raw flat storage.
    #[inline]
    pub fn raw_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    /// `⟨S_k⟩`.
    #[inline]
    pub fn s(&self, k: usize) -> f64 {
        self.data[k * self.stride()]
    }

    /// `⟨E_k⁽ᵘ⁾⟩` for class index `u` in `0..n_exposed`.
    #[inline]
    pub fn e(&self, k: usize, u: usize) -> f64 {
        debug_assert!(u < self.n_exposed);
        self.data[k * self.stride() + 1 + u]
    }

    /// `⟨I_k⟩`.
    #[inline]
    pub fn i(&self, k: usize) -> f64 {
        self.data[k * self.stride() + 1 + self.n_exposed]
    }

    /// `⟨R_k⟩`, reconstructed from conservation.
    #[inline]
    pub fn r(&self, k: usize) -> f64 {
        let base = k * self.stride();
        let mut rest = 0.0;
        for v in &self.data[base..base + self.stride()] {
            rest += v;
        }
        1.0 - rest
    }
}

/// Slice helpers shared by the RHS implementations, which work on raw
/// buffers rather than [`NodeProbabilityState`] to keep the integrator
/// allocation-free.
pub mod layout {
    /// Index of `S_k` in a flat buffer with the given exposed count.
    #[inline]
    pub fn s(k: usize, n_exposed: usize) -> usize {
        k * (n_exposed + 2)
    }

    /// Index of `E_k^(u)`.
    #[inline]
    pub fn e(k: usize, u: usize, n_exposed: usize) -> usize {
        k * (n_exposed + 2) + 1 + u
    }

    /// Index of `I_k`.
    #[inline]
    pub fn i(k: usize, n_exposed: usize) -> usize {
        k * (n_exposed + 2) + 1 + n_exposed
    }
}
