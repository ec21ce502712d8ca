//! Fixed-step classical Runge–Kutta integration on a sample grid.
//!
//! All right-hand sides in this crate are autonomous and globally Lipschitz
//! (the positive-part clip is continuous piecewise-linear), with eigenvalues
//! of order `λ + γ`, so a fixed step of `1e-3` is far inside the stability
//! region and no adaptive or stiff machinery is warranted.

use crate::error::{Error, Result};
use crate::state::NodeProbabilityState;

/// Default integration step.
pub const DEFAULT_DT: f64 = 1e-3;

/// Default output spacing.
pub const DEFAULT_SAMPLE_DT: f64 = 0.05;

/// Probabilities may stray this far outside `[0, 1]` before the integrator
/// aborts; anything larger indicates a defective right-hand side rather than
/// roundoff.
pub const PROBABILITY_TOL: f64 = 1e-9;

/// A sampled solution: states on a strictly increasing time grid starting
/// at zero.
#[derive(Debug, Clone)]
pub struct Trajectory {
    /// Sample instants; `sample_times[0] == 0`.
    pub sample_times: Vec<f64>,
    /// One state per sample instant; `states[0]` is the initial state.
    pub states: Vec<NodeProbabilityState>,
}

impl Trajectory {
    /// Largest absolute componentwise difference against another trajectory
    /// on the shared grid (the grids must be identical).
    pub fn sup_distance(&self, other: &Trajectory) -> f64 {
        assert_eq!(self.sample_times.len(), other.sample_times.len());
        let mut worst = 0.0f64;
        for (a, b) in self.states.iter().zip(&other.states) {
            for (x, y) in a.raw().iter().zip(b.raw()) {
                worst = worst.max((x - y).abs());
            }
        }
        worst
    }
}

/// One classical RK4 step of size `dt` over the buffers in `work`.
pub(crate) fn rk4_step<F>(rhs: &F, y: &mut [f64], dt: f64, work: &mut Rk4Work)
where
    F: Fn(&[f64], &mut [f64]) + ?Sized,
{
    let n = y.len();
    let Rk4Work {
        k1,
        k2,
        k3,
        k4,
        tmp,
    } = work;
    rhs(y, k1);
    for i in 0..n {
        tmp[i] = y[i] + 0.5 * dt * k1[i];
    }
    rhs(tmp, k2);
    for i in 0..n {
        tmp[i] = y[i] + 0.5 * dt * k2[i];
    }
    rhs(tmp, k3);
    for i in 0..n {
        tmp[i] = y[i] + dt * k3[i];
    }
    rhs(tmp, k4);
    let w = dt / 6.0;
    for i in 0..n {
        y[i] += w * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
}

/// Scratch buffers for [`rk4_step`].
pub(crate) struct Rk4Work {
    k1: Vec<f64>,
    k2: Vec<f64>,
    k3: Vec<f64>,
    k4: Vec<f64>,
    tmp: Vec<f64>,
}

impl Rk4Work {
    pub(crate) fn new(n: usize) -> Self {
        Self {
            k1: vec![0.0; n],
            k2: vec![0.0; n],
            k3: vec![0.0; n],
            k4: vec![0.0; n],
            tmp: vec![0.0; n],
        }
    }
}

/// Resolve grid parameters: steps per sample interval and number of samples.
pub(crate) fn grid(t_end: f64, dt: f64, sample_dt: f64) -> Result<(usize, usize)> {
    let ordered = dt > 0.0 && sample_dt >= dt && t_end >= sample_dt;
    if !ordered {
        return Err(Error::InvalidParameter(format!(
            "need 0 < dt <= sample_dt <= t_end, got dt={dt}, sample_dt={sample_dt}, t_end={t_end}"
        )));
    }
    let per_sample = (sample_dt / dt).round();
    if per_sample < 1.0 || (per_sample * dt - sample_dt).abs() > 1e-9 * sample_dt {
        return Err(Error::InvalidParameter(format!(
            "sample_dt={sample_dt} is not an integer multiple of dt={dt}"
        )));
    }
    // Integrate through the last full sample interval not exceeding t_end.
    let n_samples = (t_end / sample_dt + 1e-9).floor() as usize;
    Ok((per_sample as usize, n_samples))
}

/// Integrate `dy/dt = rhs(y)` from `y0` to `t_end`, recording the state
/// every `sample_dt`.
///
/// Aborts with [`Error::IntegrationFailure`] as soon as any probability
/// (including the reconstructed recovered mass) leaves
/// `[-PROBABILITY_TOL, 1 + PROBABILITY_TOL]`; out-of-range states are never
/// clamped because they would mask an integrator or right-hand-side defect.
pub fn integrate<F>(
    rhs: F,
    y0: &NodeProbabilityState,
    t_end: f64,
    dt: f64,
    sample_dt: f64,
) -> Result<Trajectory>
where
    F: Fn(&[f64], &mut [f64]),
{
    let (per_sample, n_samples) = grid(t_end, dt, sample_dt)?;
    let n_nodes = y0.n_nodes();
    let n_exposed = y0.n_exposed();
    let dim = y0.raw().len();

    let mut y = y0.raw().to_vec();
    check_probabilities(&y, n_nodes, n_exposed, 0.0)?;

    let mut work = Rk4Work::new(dim);
    let mut sample_times = Vec::with_capacity(n_samples + 1);
    let mut states = Vec::with_capacity(n_samples + 1);
    sample_times.push(0.0);
    states.push(y0.clone());

    for sample in 1..=n_samples {
        for step in 0..per_sample {
            rk4_step(&rhs, &mut y, dt, &mut work);
            let t = ((sample - 1) * per_sample + step + 1) as f64 * dt;
            check_probabilities(&y, n_nodes, n_exposed, t)?;
        }
        sample_times.push(sample as f64 * sample_dt);
        states.push(NodeProbabilityState::from_raw(
            n_nodes,
            n_exposed,
            y.clone(),
        ));
    }
    Ok(Trajectory {
        sample_times,
        states,
    })
}

fn check_probabilities(y: &[f64], n_nodes: usize, n_exposed: usize, t: f64) -> Result<()> {
    let stride = n_exposed + 2;
    let lo = -PROBABILITY_TOL;
    let hi = 1.0 + PROBABILITY_TOL;
    for k in 0..n_nodes {
        let mut sum = 0.0;
        for (c, &v) in y[k * stride..(k + 1) * stride].iter().enumerate() {
            if !(lo..=hi).contains(&v) || v.is_nan() {
                return Err(Error::IntegrationFailure {
                    t,
                    reason: format!("node {k} component {c} left [0, 1]: {v}"),
                });
            }
            sum += v;
        }
        let r = 1.0 - sum;
        if !(lo..=hi).contains(&r) || r.is_nan() {
            return Err(Error::IntegrationFailure {
                t,
                reason: format!("node {k} recovered mass left [0, 1]: {r}"),
            });
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar_state(s: f64) -> NodeProbabilityState {
        // One SIR node: [S, I].
        NodeProbabilityState::from_raw(1, 0, vec![s, 0.0])
    }

    #[test]
    fn identity_dynamics_hold_state() {
        let y0 = NodeProbabilityState::from_raw(2, 0, vec![0.25, 0.5, 1.0, 0.0]);
        let traj = integrate(|_, dy| dy.fill(0.0), &y0, 10.0, 1e-2, 0.5).unwrap();
        assert_eq!(traj.sample_times.len(), 21);
        for st in &traj.states {
            assert_eq!(st.raw(), y0.raw());
        }
    }

    #[test]
    fn linear_test_equation_accuracy() {
        // dS/dt = -1.1 S + 0.1 from S(0) = 1 has S(t) = (0.1 + e^{-1.1 t})/1.1.
        let rhs = |y: &[f64], dy: &mut [f64]| {
            dy[0] = -1.1 * y[0] + 0.1;
            dy[1] = 0.0;
        };
        let traj = integrate(rhs, &scalar_state(1.0), 10.0, 1e-3, 0.1).unwrap();
        let mut worst = 0.0f64;
        for (t, st) in traj.sample_times.iter().zip(&traj.states) {
            let exact = (0.1 + (-1.1 * t).exp()) / 1.1;
            worst = worst.max((st.s(0) - exact).abs());
        }
        assert!(worst <= 1e-9, "max error {worst}");
    }

    #[test]
    fn grid_validation() {
        let y0 = scalar_state(1.0);
        let zero = |_: &[f64], dy: &mut [f64]| dy.fill(0.0);
        assert!(integrate(zero, &y0, 1.0, 0.0, 0.1).is_err());
        assert!(integrate(zero, &y0, 1.0, 0.2, 0.1).is_err());
        assert!(integrate(zero, &y0, 0.05, 1e-3, 0.1).is_err());
        // sample_dt not a multiple of dt.
        assert!(integrate(zero, &y0, 1.0, 3e-3, 0.01).is_err());
    }

    #[test]
    fn invariant_breach_reports_time_and_node() {
        let rhs = |_: &[f64], dy: &mut [f64]| {
            dy[0] = 10.0; // S grows past 1 quickly
            dy[1] = 0.0;
        };
        let err = integrate(rhs, &scalar_state(0.5), 10.0, 1e-2, 0.1).unwrap_err();
        match err {
            Error::IntegrationFailure { t, reason } => {
                assert!(t > 0.0);
                assert!(reason.contains("node 0"), "{reason}");
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn partial_last_interval_is_dropped() {
        let zero = |_: &[f64], dy: &mut [f64]| dy.fill(0.0);
        let traj = integrate(zero, &scalar_state(1.0), 1.04, 1e-2, 0.25).unwrap();
        assert_eq!(traj.sample_times, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
    }
}
