//! Fixed-step closed-loop simulation of the controlled network.
//!
//! Integration is classical RK4 with the control held constant across each
//! step (zero-order hold). The control is recomputed every
//! `control_update_every` steps (default: every step); at the paper-scale
//! step size the integrator error is negligible next to the control
//! discretization, so the step scheme never becomes the accuracy
//! bottleneck.

use crate::controller::{ControlDecision, SdreController, SdreWeights};
use crate::kuramoto::{
    control_matrix_b, drift_f, freq_diff_c, full_dynamics, phase_differences, DesiredConfig,
    ErrorState, NetworkParams, PhaseState,
};
use crate::linalg::{pinv, Vector};
use serde::{Deserialize, Serialize};

/// Horizon and step configuration for one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    /// Horizon in seconds.
    pub t_final: f64,
    /// Step size in seconds.
    pub dt: f64,
    /// Keep every k-th step in the trajectory (the terminal state is always kept).
    #[serde(default = "one")]
    pub record_every: usize,
    /// Recompute the control every k-th step, holding it in between.
    #[serde(default = "one")]
    pub control_update_every: usize,
}

fn one() -> usize {
    1
}

impl SimConfig {
    pub fn new(t_final: f64, dt: f64) -> Self {
        SimConfig { t_final, dt, record_every: 1, control_update_every: 1 }
    }

    pub fn validate(&self) -> Result<(), String> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err("dt must be positive".into());
        }
        if !(self.t_final >= self.dt && self.t_final.is_finite()) {
            return Err("t_final must be at least one step".into());
        }
        if self.record_every == 0 || self.control_update_every == 0 {
            return Err("record_every and control_update_every must be at least 1".into());
        }
        Ok(())
    }

    pub fn steps(&self) -> usize {
        (self.t_final / self.dt + 1e-9).floor() as usize
    }
}

/// One recorded instant of the closed loop.
#[derive(Debug, Clone)]
pub struct TrajectoryRecord {
    pub t: f64,
    pub theta: Vector,
    /// Phase differences of `theta` (exact, by construction).
    pub x: Vector,
    /// `x − x_des` (exact, by construction).
    pub e: Vector,
    /// Control applied at (or held through) this instant.
    pub u: Vector,
    pub care_residual: f64,
    pub fallback_used: bool,
}

/// Figure-level summary of one run.
#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub final_e_inf_norm: f64,
    pub final_u: Vec<f64>,
    pub peak_u_inf_norm: f64,
    /// Number of integration steps taken.
    pub steps: usize,
    pub any_fallback: bool,
    /// Some applied input component went negative (the sign convention of
    /// the model reads `u_i` as a coupling strength; negative values are
    /// allowed and reported, not rejected).
    pub any_negative_u: bool,
}

/// One classical RK4 step of the full phase dynamics with `u` held constant.
pub fn rk4_step(params: &NetworkParams, theta: &PhaseState, u: &Vector, dt: f64) -> PhaseState {
    assert!(dt > 0.0, "step size must be positive");
    let f = |th: &Vector| full_dynamics(params, &PhaseState::new(th.clone()), u);
    let th = theta.theta();
    let k1 = f(th);
    let k2 = f(&th.add(&k1.scale(dt / 2.0)));
    let k3 = f(&th.add(&k2.scale(dt / 2.0)));
    let k4 = f(&th.add(&k3.scale(dt)));
    let incr = k1.add(&k2.scale(2.0)).add(&k3.scale(2.0)).add(&k4).scale(dt / 6.0);
    PhaseState::new(th.add(&incr))
}

/// The long-run control limit implied by the bias compensation at zero
/// error: `u_ss = 1 − B⁺(0) · (f(0) + c)`. This is the independent check
/// value for every reported steady-state input.
pub fn steady_state_u(params: &NetworkParams, cfg: &DesiredConfig) -> Vector {
    let zero = ErrorState::zero(params.n() - 1);
    let b0 = control_matrix_b(params, cfg, &zero);
    let rhs = drift_f(params, cfg, &zero).add(&freq_diff_c(params));
    let correction = pinv(&b0, None)
        .expect("SVD of the control matrix did not converge")
        .mul_vec(&rhs);
    Vector::new((0..params.n()).map(|i| 1.0 - correction.get(i)).collect())
}

/// Run the closed loop from `theta0`: at every step the reduced error is
/// measured, the controller evaluated (or held), the instant recorded, and
/// the full dynamics advanced by RK4. The terminal state is recorded with a
/// final controller evaluation so the summary reflects `t = t_final`.
pub fn run_closed_loop(
    params: &NetworkParams,
    cfg: &DesiredConfig,
    weights: &SdreWeights,
    theta0: &PhaseState,
    sim: &SimConfig,
) -> (Vec<TrajectoryRecord>, RunSummary) {
    let controller = SdreController::new(params.clone(), cfg.clone(), weights.clone());
    run_with_controller(&controller, theta0, sim)
}

/// As [`run_closed_loop`], with a caller-configured controller.
pub fn run_with_controller(
    controller: &SdreController,
    theta0: &PhaseState,
    sim: &SimConfig,
) -> (Vec<TrajectoryRecord>, RunSummary) {
    sim.validate().expect("invalid simulation config");
    let params = controller.params();
    let x_des = controller.cfg().x_des();
    assert_eq!(theta0.n(), params.n(), "initial state size mismatch");

    let steps = sim.steps();
    let mut records = Vec::with_capacity(steps / sim.record_every + 2);
    let mut theta = theta0.clone();
    let mut held: Option<ControlDecision> = None;
    let mut any_fallback = false;
    let mut any_negative_u = false;
    let mut peak_u = 0.0_f64;

    for k in 0..=steps {
        let x = phase_differences(&theta);
        let e = ErrorState::new(x.sub(x_des));

        let refresh = k % sim.control_update_every == 0 || k == steps || held.is_none();
        if refresh {
            let d = controller.control_step(&e);
            any_fallback |= d.fallback_used;
            held = Some(d);
        }
        let decision = held.as_ref().unwrap();
        peak_u = peak_u.max(decision.u.inf_norm());
        any_negative_u |= decision.u.as_slice().iter().any(|&v| v < 0.0);

        if k % sim.record_every == 0 || k == steps {
            records.push(TrajectoryRecord {
                t: k as f64 * sim.dt,
                theta: theta.theta().clone(),
                x: x.clone(),
                e: e.e().clone(),
                u: decision.u.clone(),
                care_residual: decision.care_residual,
                fallback_used: decision.fallback_used,
            });
        }

        if k < steps {
            theta = rk4_step(params, &theta, &decision.u, sim.dt);
        }
    }

    let last = records.last().expect("at least one record");
    let summary = RunSummary {
        final_e_inf_norm: last.e.inf_norm(),
        final_u: last.u.to_vec(),
        peak_u_inf_norm: peak_u,
        steps,
        any_fallback,
        any_negative_u,
    };
    (records, summary)
}
