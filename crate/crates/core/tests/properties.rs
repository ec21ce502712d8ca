//! Randomised property tests for the algebraic identities and the file
//! formats.

use contagion_core::net::{
    generate_network, ContagionNetwork, GeneratorSpec, GraphKind, NodeRates, SeirNodeRates,
    SirNodeRates,
};
use contagion_core::seir::node_projections;
use contagion_core::sir::closed_form_chain;
use proptest::prelude::*;

/// Valid SEIR rate sets with up to five exposed classes and rates in (0, 10].
fn seir_rates_strategy() -> impl Strategy<Value = SeirNodeRates> {
    (1usize..=5).prop_flat_map(|n| {
        (
            1e-3..10.0f64,
            prop::collection::vec(1e-3..1.0f64, n),
            0.0..1.0f64,
            prop::collection::vec(1e-3..10.0f64, n),
            prop::collection::vec(1e-3..10.0f64, n),
            prop::collection::vec(0.0..10.0f64, n * n),
        )
            .prop_map(move |(gamma, raw_phi, phi_total, mu, nu, a_flat)| {
                let sum: f64 = raw_phi.iter().sum();
                let phi = raw_phi.iter().map(|&p| p * phi_total / sum).collect();
                let mut a = vec![vec![0.0; n]; n];
                for u in 0..n {
                    for v in 0..n {
                        if u != v {
                            a[u][v] = a_flat[u * n + v];
                        }
                    }
                }
                SeirNodeRates {
                    gamma,
                    phi,
                    mu,
                    nu,
                    a,
                }
            })
    })
}

proptest! {
    /// μᵀA⁻¹ + νᵀA⁻¹ = eᵀ and every projection entry lies in [0, 1].
    #[test]
    fn projection_identities(rates in seir_rates_strategy()) {
        let d = node_projections(&rates).unwrap();
        for u in 0..d.n_exposed {
            let sum = d.mu_t_ainv[u] + d.nu_t_ainv[u];
            prop_assert!((sum - 1.0).abs() <= 1e-12, "sum {sum}");
            for v in [d.mu_t_ainv[u], d.nu_t_ainv[u]] {
                prop_assert!((-1e-13..=1.0 + 1e-13).contains(&v), "entry {v}");
            }
        }
    }

    /// The closed-form chain solution is a probability vector at all depths
    /// and times, and conserves mass to 1e-12.
    #[test]
    fn closed_form_is_stochastic(
        k in 0usize..40,
        t in 0.0..150.0f64,
        lambda in 1e-3..10.0f64,
        gamma in 0.0..10.0f64,
    ) {
        let (s, i, r) = closed_form_chain(k, t, lambda, gamma).unwrap();
        prop_assert!((s + i + r - 1.0).abs() <= 1e-12);
        for v in [s, i, r] {
            prop_assert!((-1e-12..=1.0 + 1e-12).contains(&v), "component {v}");
        }
    }

    /// Canonical network documents reparse to byte-identical documents.
    #[test]
    fn network_json_round_trip(
        n in 1usize..12,
        p in 0.0..1.0f64,
        seed in any::<u64>(),
        lambda in 1e-3..10.0f64,
        gamma in 0.0..10.0f64,
    ) {
        let net = generate_network(
            &GeneratorSpec {
                kind: GraphKind::ErdosRenyi { n, p },
                lambda,
                rates: NodeRates::Sir(SirNodeRates { gamma }),
            },
            seed,
        )
        .unwrap();
        let doc = net.to_canonical_json();
        let back = ContagionNetwork::from_json(&doc).unwrap();
        prop_assert_eq!(doc, back.to_canonical_json());
    }
}
