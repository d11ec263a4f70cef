//! The SDRE control law for phase-locking a Kuramoto network.
//!
//! The applied input is `u = 1 + v_bias + v_sdre`:
//!
//! * `v_bias = −B⁺(e) · (f(0) + c)` cancels the constant bias that the
//!   frequency differences and the factorization intercept inject into the
//!   error dynamics; `B⁺` is the Moore–Penrose pseudoinverse of the control
//!   matrix at the current error, so the correction is minimum-norm.
//! * `v_sdre = −R⁻¹ Bᵀ(e) P(e) · e` is pointwise LQR feedback, with `P(e)`
//!   solving the Riccati equation for the frozen pair `(A(e), B(e))`.
//!
//! The factorization `f(e) ≈ f(0) + A(e)·e` pairs the Jacobian at the
//! current error with the intercept at zero error. It is implemented
//! exactly in that form; for large deviations the mismatch between the two
//! expansion points shows up as a transient offset in the error dynamics.
//!
//! `f(0)` and `c` depend only on the scenario, so the controller computes
//! them once at construction. `B(e)` and its pseudoinverse are rebuilt
//! every step.

use crate::kuramoto::{
    control_matrix_b, drift_f, freq_diff_c, jacobian_a, DesiredConfig, ErrorState, NetworkParams,
};
use crate::linalg::{cholesky, lu_solve, pinv, Matrix, Vector};
use crate::riccati::{controllability_rank, solve_care, CareProblem, RiccatiError};

/// LQR weights for the reduced error state (`q`, (N−1)²) and the control
/// deviation (`r`, N²).
#[derive(Debug, Clone)]
pub struct SdreWeights {
    q: Matrix,
    r: Matrix,
}

impl SdreWeights {
    pub fn new(q: Matrix, r: Matrix) -> Result<Self, RiccatiError> {
        let sym = |m: &Matrix| {
            m.is_square() && m.sub(&m.transpose()).frobenius_norm() <= 1e-10 * m.frobenius_norm()
        };
        if !sym(&q) || !sym(&r) || cholesky(&r).is_none() {
            return Err(RiccatiError::BadWeights);
        }
        Ok(SdreWeights { q, r })
    }

    /// `Q = q_scale·I` and `R = r_scale·I`, the only weighting shape the
    /// bundled scenarios use.
    pub fn scaled_identity(state_dim: usize, input_dim: usize, q_scale: f64, r_scale: f64) -> Self {
        assert!(q_scale >= 0.0, "q_scale must be nonnegative");
        assert!(r_scale > 0.0, "r_scale must be positive");
        SdreWeights {
            q: Matrix::identity(state_dim).scale(q_scale),
            r: Matrix::identity(input_dim).scale(r_scale),
        }
    }

    pub fn q(&self) -> &Matrix {
        &self.q
    }
    pub fn r(&self) -> &Matrix {
        &self.r
    }
}

/// One control evaluation. `u = 1 + v_bias + v_sdre` holds exactly,
/// componentwise, by construction.
#[derive(Debug, Clone)]
pub struct ControlDecision {
    pub v_bias: Vector,
    pub v_sdre: Vector,
    pub u: Vector,
    /// Feedback gain `R⁻¹BᵀP` (N × N−1); zero when the solve was skipped.
    pub gain: Matrix,
    /// Riccati residual of the underlying solve; NaN when no solve ran.
    pub care_residual: f64,
    /// The Riccati solve failed (or was skipped) and `v_sdre` fell back to zero.
    pub fallback_used: bool,
    /// `‖B(e)‖_F` is numerically zero: the input multiplies a vanishing
    /// coupling sum everywhere, so no control authority exists and `u = 1`.
    pub no_authority: bool,
    /// Kalman rank of `(A(e), B(e))`, when the diagnostic is enabled.
    pub controllability_rank: Option<usize>,
}

/// Per-scenario SDRE controller with the constant pieces precomputed.
#[derive(Debug, Clone)]
pub struct SdreController {
    params: NetworkParams,
    cfg: DesiredConfig,
    weights: SdreWeights,
    /// `f(0) + c`, the constant bias the feedforward term cancels.
    bias_rhs: Vector,
    /// Compute and attach the Kalman controllability rank on every step.
    /// Off by default: the SVD of the n×(n·m) Kalman matrix dwarfs the cost
    /// of everything else at large N, and the value is a diagnostic only.
    pub check_controllability: bool,
}

const NO_AUTHORITY_NORM: f64 = 1e-12;

impl SdreController {
    pub fn new(params: NetworkParams, cfg: DesiredConfig, weights: SdreWeights) -> Self {
        let n = params.n();
        assert_eq!(cfg.dim(), n - 1, "target dimension must be N−1");
        assert_eq!(weights.q.rows(), n - 1, "Q must be (N−1)×(N−1)");
        assert_eq!(weights.r.rows(), n, "R must be N×N");
        let f0 = drift_f(&params, &cfg, &ErrorState::zero(n - 1));
        let bias_rhs = f0.add(&freq_diff_c(&params));
        SdreController { params, cfg, weights, bias_rhs, check_controllability: false }
    }

    pub fn params(&self) -> &NetworkParams {
        &self.params
    }
    pub fn cfg(&self) -> &DesiredConfig {
        &self.cfg
    }
    pub fn weights(&self) -> &SdreWeights {
        &self.weights
    }

    /// Feedforward bias compensation `v_bias = −B⁺(e) · (f(0) + c)`.
    ///
    /// The pseudoinverse always exists; when `B(e) = 0` the result is zero
    /// and [`SdreController::control_step`] reports the no-authority flag.
    pub fn bias_control(&self, e: &ErrorState) -> Vector {
        let b = control_matrix_b(&self.params, &self.cfg, e);
        self.bias_from(&b)
    }

    fn bias_from(&self, b: &Matrix) -> Vector {
        let b_pinv = pinv(b, None).expect("SVD of the control matrix did not converge");
        b_pinv.mul_vec(&self.bias_rhs).scale(-1.0)
    }

    /// Pointwise Riccati feedback at the current error: returns
    /// `(v_sdre, gain, residual)` or the propagated solver failure.
    pub fn sdre_feedback(&self, e: &ErrorState) -> Result<(Vector, Matrix, f64), RiccatiError> {
        let a = jacobian_a(&self.params, &self.cfg, e);
        let b = control_matrix_b(&self.params, &self.cfg, e);
        self.feedback_from(a, b, e)
    }

    fn feedback_from(&self, a: Matrix, b: Matrix, e: &ErrorState) -> Result<(Vector, Matrix, f64), RiccatiError> {
        let prob = CareProblem::new(a, b.clone(), self.weights.q.clone(), self.weights.r.clone())?;
        let sol = solve_care(&prob)?;
        // gain = R⁻¹ Bᵀ P
        let bt_p = b.transpose().matmul(&sol.p);
        let gain = lu_solve(&self.weights.r, &bt_p).map_err(|_| RiccatiError::BadWeights)?;
        let v_sdre = gain.mul_vec(e.e()).scale(-1.0);
        Ok((v_sdre, gain, sol.residual_norm))
    }

    /// Assemble the full control input `u = 1 + v_bias + v_sdre`.
    ///
    /// Degeneracies never abort: a failed Riccati solve keeps the bias term
    /// and zeroes the feedback (flagged), and a vanishing `B(e)` returns the
    /// nominal `u = 1` with both flags set.
    pub fn control_step(&self, e: &ErrorState) -> ControlDecision {
        let n = self.params.n();
        let b = control_matrix_b(&self.params, &self.cfg, e);

        if b.frobenius_norm() < NO_AUTHORITY_NORM {
            return ControlDecision {
                v_bias: Vector::zeros(n),
                v_sdre: Vector::zeros(n),
                u: Vector::filled(n, 1.0),
                gain: Matrix::zeros(n, n - 1),
                care_residual: f64::NAN,
                fallback_used: true,
                no_authority: true,
                controllability_rank: None,
            };
        }

        let a = jacobian_a(&self.params, &self.cfg, e);
        let controllability = if self.check_controllability {
            controllability_rank(&a, &b).ok()
        } else {
            None
        };

        let v_bias = self.bias_from(&b);
        let (v_sdre, gain, care_residual, fallback_used) =
            match self.feedback_from(a, b, e) {
                Ok((v, g, res)) => (v, g, res, false),
                Err(_) => (Vector::zeros(n), Matrix::zeros(n, n - 1), f64::NAN, true),
            };

        let u = Vector::new(
            (0..n)
                .map(|i| 1.0 + v_bias.get(i) + v_sdre.get(i))
                .collect(),
        );
        ControlDecision {
            v_bias,
            v_sdre,
            u,
            gain,
            care_residual,
            fallback_used,
            no_authority: false,
            controllability_rank: controllability,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn benchmark_controller(q_scale: f64) -> SdreController {
        let params = NetworkParams::new(4, 1.0, Vector::new(vec![1.30, 1.39, 0.44, 1.28]));
        let cfg = DesiredConfig::new(Vector::new(vec![-0.74, 0.27, 0.15]));
        let weights = SdreWeights::scaled_identity(3, 4, q_scale, 1.0);
        SdreController::new(params, cfg, weights)
    }

    #[test]
    fn zero_bias_when_nothing_to_compensate() {
        // Identical frequencies and zero targets: f(0) + c = 0.
        let params = NetworkParams::new(4, 1.0, Vector::filled(4, 0.9));
        let cfg = DesiredConfig::new(Vector::zeros(3));
        let ctrl = SdreController::new(params, cfg, SdreWeights::scaled_identity(3, 4, 1.0, 1.0));
        let e = ErrorState::new(Vector::new(vec![0.4, -0.2, 0.1]));
        assert!(ctrl.bias_control(&e).inf_norm() < 1e-12);
    }

    #[test]
    fn steady_bias_reaches_reported_coupling_strengths() {
        // At e = 0 the compensated input 1 + v_bias is the long-run limit of
        // the controlled trajectory; reference values for this network are
        // [0.82, −1.16, 6.56, 4.63] (two-decimal readings).
        let ctrl = benchmark_controller(1000.0);
        let v_bias = ctrl.bias_control(&ErrorState::zero(3));
        let expect = [0.82, -1.16, 6.56, 4.63];
        for (i, &target) in expect.iter().enumerate() {
            let u_i = 1.0 + v_bias.get(i);
            assert!((u_i - target).abs() <= 0.2, "component {i}: {u_i} vs {target}");
        }
    }

    #[test]
    fn bias_residual_is_least_squares_minimal() {
        let ctrl = benchmark_controller(1000.0);
        let e = ErrorState::new(Vector::new(vec![1.0, -0.29, -1.12]));
        let b = control_matrix_b(ctrl.params(), ctrl.cfg(), &e);
        let v_bias = ctrl.bias_control(&e);

        // Independent least-squares route: solve the normal equations
        // B Bᵀ y = −(f(0)+c), v = Bᵀ y (minimum-norm for full row rank B).
        let bbt = b.matmul(&b.transpose());
        let rhs = ctrl.bias_rhs.scale(-1.0).as_column();
        let y = lu_solve(&bbt, &rhs).unwrap();
        let v_ls = b.transpose().matmul(&y).col(0);

        let res_pinv = b.mul_vec(&v_bias).add(&ctrl.bias_rhs).norm2();
        let res_ls = b.mul_vec(&v_ls).add(&ctrl.bias_rhs).norm2();
        assert!(res_pinv <= res_ls + 1e-10, "{res_pinv} vs {res_ls}");
        assert!((v_bias.sub(&v_ls)).inf_norm() < 1e-8, "minimum-norm solutions must agree");
    }

    #[test]
    fn feedback_vanishes_at_zero_error() {
        let ctrl = benchmark_controller(1000.0);
        let (v_sdre, _, residual) = ctrl.sdre_feedback(&ErrorState::zero(3)).unwrap();
        assert_eq!(v_sdre.inf_norm(), 0.0, "feedback is linear in e");
        assert!(residual.is_finite());
    }

    #[test]
    fn scalar_network_matches_closed_form_care() {
        // N = 2 reduces the Riccati equation to a scalar quadratic:
        // with g = (b₁² + b₂²)/r, p = (a + √(a² + g·q)) / g.
        let params = NetworkParams::new(2, 1.0, Vector::new(vec![0.3, 0.8]));
        let cfg = DesiredConfig::new(Vector::new(vec![0.9]));
        let weights = SdreWeights::scaled_identity(1, 2, 5.0, 2.0);
        let ctrl = SdreController::new(params.clone(), cfg.clone(), weights);
        let e = ErrorState::new(Vector::new(vec![0.37]));

        let a = jacobian_a(&params, &cfg, &e).get(0, 0);
        let b = control_matrix_b(&params, &cfg, &e);
        let (b1, b2) = (b.get(0, 0), b.get(0, 1));
        let (q, r) = (5.0, 2.0);
        let g = (b1 * b1 + b2 * b2) / r;
        let p = (a + (a * a + g * q).sqrt()) / g;
        let expect = [-b1 * p * e.e().get(0) / r, -b2 * p * e.e().get(0) / r];

        let (v_sdre, _, _) = ctrl.sdre_feedback(&e).unwrap();
        for (i, &target) in expect.iter().enumerate() {
            assert!(
                (v_sdre.get(i) - target).abs() < 1e-9,
                "component {i}: {} vs {target}",
                v_sdre.get(i)
            );
        }
    }

    #[test]
    fn weight_scaling_leaves_feedback_unchanged() {
        let e = ErrorState::new(Vector::new(vec![0.5, -0.8, 0.2]));
        let v1 = benchmark_controller(1000.0).sdre_feedback(&e).unwrap().0;

        let params = NetworkParams::new(4, 1.0, Vector::new(vec![1.30, 1.39, 0.44, 1.28]));
        let cfg = DesiredConfig::new(Vector::new(vec![-0.74, 0.27, 0.15]));
        let doubled = SdreWeights::scaled_identity(3, 4, 2000.0, 2.0);
        let v2 = SdreController::new(params, cfg, doubled).sdre_feedback(&e).unwrap().0;

        let rel = v1.sub(&v2).inf_norm() / v1.inf_norm().max(1e-12);
        assert!(rel <= 1e-8, "gain must be invariant under (Q,R) → (cQ,cR): {rel}");
    }

    #[test]
    fn no_authority_at_perfect_sync_returns_nominal_input() {
        // Equal frequencies, zero targets, zero error: B = 0.
        let params = NetworkParams::new(3, 1.0, Vector::filled(3, 1.1));
        let cfg = DesiredConfig::new(Vector::zeros(2));
        let ctrl = SdreController::new(params, cfg, SdreWeights::scaled_identity(2, 3, 10.0, 1.0));
        let d = ctrl.control_step(&ErrorState::zero(2));
        assert_eq!(d.u.as_slice(), &[1.0, 1.0, 1.0]);
        assert!(d.no_authority && d.fallback_used);
        assert!(d.care_residual.is_nan());
    }

    #[test]
    fn decision_decomposition_is_exact() {
        let ctrl = benchmark_controller(1000.0);
        let d = ctrl.control_step(&ErrorState::new(Vector::new(vec![1.0, -0.29, -1.12])));
        for i in 0..4 {
            assert_eq!(d.u.get(i), 1.0 + d.v_bias.get(i) + d.v_sdre.get(i));
        }
        assert!(!d.fallback_used && !d.no_authority);
        assert!(d.care_residual.is_finite());
        assert_eq!(d.gain.rows(), 4);
        assert_eq!(d.gain.cols(), 3);
    }

    #[test]
    fn control_step_at_zero_error_is_pure_bias() {
        let ctrl = benchmark_controller(1000.0);
        let d = ctrl.control_step(&ErrorState::zero(3));
        let v_bias = ctrl.bias_control(&ErrorState::zero(3));
        for i in 0..4 {
            assert_eq!(d.u.get(i), 1.0 + v_bias.get(i));
        }
    }

    #[test]
    fn frozen_gain_is_linear_in_error() {
        let ctrl = benchmark_controller(1000.0);
        let e = ErrorState::new(Vector::new(vec![0.6, -0.1, 0.4]));
        let d = ctrl.control_step(&e);
        let scaled = d.gain.mul_vec(&e.e().scale(3.0)).scale(-1.0);
        let direct = d.gain.mul_vec(e.e()).scale(-3.0);
        assert!(scaled.sub(&direct).inf_norm() < 1e-12);
    }

    #[test]
    fn controllability_diagnostic_when_enabled() {
        let mut ctrl = benchmark_controller(1000.0);
        ctrl.check_controllability = true;
        let d = ctrl.control_step(&ErrorState::new(Vector::new(vec![1.0, -0.29, -1.12])));
        assert_eq!(d.controllability_rank, Some(3), "benchmark state is fully controllable");
    }
}
