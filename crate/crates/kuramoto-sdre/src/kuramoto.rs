//! The controlled Kuramoto model in reduced phase-difference coordinates.
//!
//! A network of N all-to-all coupled phase oscillators with multiplicative
//! control evolves as
//!
//! ```text
//! θ̇_i = ω_i + (K/N) · u_i · Σ_j sin(θ_j − θ_i)
//! ```
//!
//! The model is invariant under a global phase shift, so the minimal state
//! is the vector of adjacent differences `X_i = θ_{i+1} − θ_i` (length
//! N−1), and the tracking error is `e = X − X^des`. This module provides
//! the pieces of the error dynamics `ė = f(e) + c + B(e)·v`: the drift
//! `f`, the frequency-difference vector `c`, the control influence matrix
//! `B` and the exact Jacobian `A = ∂f/∂e` used as the state-dependent
//! system matrix.
//!
//! Phases live on the real line, unwrapped. Nothing here reduces angles
//! mod 2π: desired differences such as 1.2 rad must not alias, and every
//! quantity below depends on phase differences only, so unbounded phases
//! are harmless.

use crate::linalg::{Matrix, Vector};

/// Network-level constants: size, global coupling gain and natural
/// frequencies (rad/s).
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkParams {
    n: usize,
    coupling: f64,
    omega: Vector,
}

impl NetworkParams {
    pub fn new(n: usize, coupling: f64, omega: Vector) -> Self {
        assert!(n >= 2, "need at least two oscillators");
        assert!(coupling > 0.0 && coupling.is_finite(), "coupling gain must be positive");
        assert_eq!(omega.len(), n, "one natural frequency per oscillator");
        NetworkParams { n, coupling, omega }
    }

    pub fn n(&self) -> usize {
        self.n
    }
    pub fn coupling(&self) -> f64 {
        self.coupling
    }
    pub fn omega(&self) -> &Vector {
        &self.omega
    }
    /// The `K/N` prefactor shared by every coupling term.
    fn gain(&self) -> f64 {
        self.coupling / self.n as f64
    }
}

/// Target phase differences `X^des` (length N−1).
#[derive(Debug, Clone, PartialEq)]
pub struct DesiredConfig {
    x_des: Vector,
}

impl DesiredConfig {
    pub fn new(x_des: Vector) -> Self {
        DesiredConfig { x_des }
    }

    pub fn x_des(&self) -> &Vector {
        &self.x_des
    }

    pub fn dim(&self) -> usize {
        self.x_des.len()
    }
}

/// Unwrapped oscillator phases (length N).
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseState {
    theta: Vector,
}

impl PhaseState {
    pub fn new(theta: Vector) -> Self {
        PhaseState { theta }
    }

    pub fn theta(&self) -> &Vector {
        &self.theta
    }

    pub fn n(&self) -> usize {
        self.theta.len()
    }
}

/// Reduced tracking error `e = X − X^des` (length N−1).
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorState {
    e: Vector,
}

impl ErrorState {
    pub fn new(e: Vector) -> Self {
        ErrorState { e }
    }

    pub fn zero(dim: usize) -> Self {
        ErrorState { e: Vector::zeros(dim) }
    }

    pub fn e(&self) -> &Vector {
        &self.e
    }

    pub fn dim(&self) -> usize {
        self.e.len()
    }
}

/// `S_i = Σ_k sin(θ_k − θ_i)` for every i, via the angle-addition identity
/// `sin(θ_k − θ_i) = sin θ_k cos θ_i − cos θ_k sin θ_i`, which needs only
/// one sin/cos pair per oscillator.
fn coupling_sums(theta: &Vector) -> Vec<f64> {
    let (mut sum_sin, mut sum_cos) = (0.0, 0.0);
    let trig: Vec<(f64, f64)> = theta
        .as_slice()
        .iter()
        .map(|&t| {
            let (s, c) = t.sin_cos();
            sum_sin += s;
            sum_cos += c;
            (s, c)
        })
        .collect();
    trig.iter().map(|&(s, c)| c * sum_sin - s * sum_cos).collect()
}

/// Adjacent phase differences `X_i = θ_{i+1} − θ_i`, without wrapping.
pub fn phase_differences(state: &PhaseState) -> Vector {
    let th = state.theta.as_slice();
    assert!(th.len() >= 2);
    Vector::new(th.windows(2).map(|w| w[1] - w[0]).collect())
}

/// Phases with `θ_1 = 0` as reference: `θ_k = Σ_{l<k} (e_l + X^des_l)`.
///
/// This is the controller-side convention; the simulator integrates true
/// phases. Both agree on every difference-dependent quantity.
pub fn reconstruct_phases(e: &ErrorState, cfg: &DesiredConfig) -> PhaseState {
    assert_eq!(e.dim(), cfg.dim(), "error and target dimension mismatch");
    let mut theta = Vec::with_capacity(e.dim() + 1);
    let mut acc = 0.0;
    theta.push(0.0);
    for i in 0..e.dim() {
        acc += e.e.get(i) + cfg.x_des.get(i);
        theta.push(acc);
    }
    PhaseState::new(Vector::new(theta))
}

/// Full phase dynamics `θ̇_i = ω_i + (K/N) u_i Σ_j sin(θ_j − θ_i)`.
pub fn full_dynamics(params: &NetworkParams, state: &PhaseState, u: &Vector) -> Vector {
    assert_eq!(state.n(), params.n, "phase state size mismatch");
    assert_eq!(u.len(), params.n, "one control input per oscillator");
    let sums = coupling_sums(&state.theta);
    let gain = params.gain();
    Vector::new(
        (0..params.n)
            .map(|i| params.omega.get(i) + gain * u.get(i) * sums[i])
            .collect(),
    )
}

/// Natural-frequency differences `c_i = ω_{i+1} − ω_i`.
pub fn freq_diff_c(params: &NetworkParams) -> Vector {
    Vector::new(params.omega.as_slice().windows(2).map(|w| w[1] - w[0]).collect())
}

/// Nonlinear drift of the error dynamics,
/// `f_i = (K/N) [Σ_k sin(θ_k − θ_{i+1}) − Σ_k sin(θ_k − θ_i)]`,
/// with the phases reconstructed from `e`.
pub fn drift_f(params: &NetworkParams, cfg: &DesiredConfig, e: &ErrorState) -> Vector {
    assert_eq!(cfg.dim(), params.n - 1, "target dimension must be N−1");
    let theta = reconstruct_phases(e, cfg);
    let sums = coupling_sums(&theta.theta);
    let gain = params.gain();
    Vector::new((0..params.n - 1).map(|i| gain * (sums[i + 1] - sums[i])).collect())
}

/// Control influence matrix `B(e)` ((N−1)×N), two nonzeros per row:
/// `B_{i,i} = −(K/N) Σ_k sin(θ_k − θ_i)` and
/// `B_{i,i+1} = +(K/N) Σ_k sin(θ_k − θ_{i+1})`.
pub fn control_matrix_b(params: &NetworkParams, cfg: &DesiredConfig, e: &ErrorState) -> Matrix {
    assert_eq!(cfg.dim(), params.n - 1, "target dimension must be N−1");
    let theta = reconstruct_phases(e, cfg);
    let sums = coupling_sums(&theta.theta);
    let gain = params.gain();
    let mut b = Matrix::zeros(params.n - 1, params.n);
    for i in 0..params.n - 1 {
        b.set(i, i, -gain * sums[i]);
        b.set(i, i + 1, gain * sums[i + 1]);
    }
    b
}

/// Exact Jacobian `A(e) = ∂f/∂e` ((N−1)×(N−1)).
///
/// Differentiating `f_i` needs `∂θ_k/∂e_j`, which the reconstruction
/// formula `θ_k = Σ_{l<k} (e_l + X^des_l)` fixes as the indicator
/// `∂θ_k/∂e_j = 1 iff k ≥ j+1` (0-indexed). Substituting into
///
/// ```text
/// A_ij = (K/N) Σ_k [ cos(θ_k − θ_{i+1}) (∂θ_k − ∂θ_{i+1})/∂e_j
///                  − cos(θ_k − θ_i)     (∂θ_k − ∂θ_i)/∂e_j ]
/// ```
///
/// and collecting the indicator-weighted cosine sums into suffix sums
/// `suf_p(q) = Σ_{k≥q} cos(θ_k − θ_p)` gives the closed form
///
/// ```text
/// A_ij = (K/N) [ suf_{i+1}(j+1) − suf_i(j+1)
///              − 1{i≥j}·tot_{i+1} + 1{i>j}·tot_i ]
/// ```
///
/// with `tot_p = suf_p(0)`. The suffix sums come from the angle-addition
/// identity `cos(θ_k − θ_p) = cos θ_k cos θ_p + sin θ_k sin θ_p`, so the
/// whole Jacobian costs O(N²) with O(N) trig calls.
pub fn jacobian_a(params: &NetworkParams, cfg: &DesiredConfig, e: &ErrorState) -> Matrix {
    assert_eq!(cfg.dim(), params.n - 1, "target dimension must be N−1");
    let n = params.n;
    let theta = reconstruct_phases(e, cfg);
    let trig: Vec<(f64, f64)> = theta.theta.as_slice().iter().map(|&t| t.sin_cos()).collect();

    // Suffix sums of cos θ and sin θ: sc[q] = Σ_{k≥q} cos θ_k, ss[q] likewise.
    let mut sc = vec![0.0; n + 1];
    let mut ss = vec![0.0; n + 1];
    for k in (0..n).rev() {
        sc[k] = sc[k + 1] + trig[k].1;
        ss[k] = ss[k + 1] + trig[k].0;
    }
    // suf[p][q] = cos θ_p · sc[q] + sin θ_p · ss[q]
    let suf = |p: usize, q: usize| trig[p].1 * sc[q] + trig[p].0 * ss[q];

    let gain = params.gain();
    Matrix::from_fn(n - 1, n - 1, |i, j| {
        let mut v = suf(i + 1, j + 1) - suf(i, j + 1);
        if i >= j {
            v -= suf(i + 1, 0);
        }
        if i > j {
            v += suf(i, 0);
        }
        gain * v
    })
}
