//! Minimal end-to-end run: generate a random graph, integrate the
//! upper-bound system, print the network-averaged susceptible bound.

use contagion_core::integrate::integrate;
use contagion_core::net::{generate_network, GeneratorSpec, GraphKind, NodeRates, SirNodeRates};
use contagion_core::sir::SirRta;
use contagion_core::{InitialCondition, NodeProbabilityState, Result};

fn main() -> Result<()> {
    let n = 100;
    let net = generate_network(
        &GeneratorSpec {
            kind: GraphKind::ErdosRenyi { n, p: 0.05 },
            lambda: 1.0,
            rates: NodeRates::Sir(SirNodeRates { gamma: 0.1 }),
        },
        42,
    )?;
    let ic = InitialCondition::single_infectious(n, 0, 0)?;
    let system = SirRta::new(&net, &ic)?;
    let y0 = NodeProbabilityState::from_initial_condition(&ic);
    let trajectory = integrate(|y, dy| system.rhs(y, dy), &y0, 12.0, 1e-3, 0.5)?;
    for (ti, st) in trajectory.states.iter().enumerate() {
        let avg: f64 = (0..n).map(|k| st.s(k)).sum::<f64>() / n as f64;
        println!(
            "t = {:5.1}  mean S bound = {avg:.4}",
            trajectory.sample_times[ti]
        );
    }
    Ok(())
}
