//! Steering networks of Kuramoto phase oscillators to prescribed
//! phase-locked configurations with state-dependent Riccati equation (SDRE)
//! feedback.
//!
//! The building blocks, bottom to top:
//!
//! * [`linalg`] — dense matrices and vectors, LU solves, SVD, pseudoinverse.
//! * [`riccati`] — the continuous-time algebraic Riccati solver
//!   (structure-preserving doubling) and the Kalman rank diagnostic.
//! * [`kuramoto`] — the controlled oscillator model in reduced
//!   phase-difference coordinates: drift, control matrix, exact Jacobian.
//! * [`controller`] — bias compensation plus pointwise Riccati feedback,
//!   assembled into the applied input `u = 1 + v_bias + v_sdre`.
//! * [`sim`] — fixed-step RK4 closed-loop runs with trajectory recording.
//! * [`scenarios`] — declarative run definitions, the bundled benchmark
//!   scenarios, and seeded deterministic input sampling.
//! * [`cli`] / [`output`] — the command-line surface: CSV trajectories,
//!   JSON summaries and SVG plots.

pub mod cli;
pub mod controller;
pub mod kuramoto;
pub mod linalg;
pub mod output;
pub mod riccati;
pub mod scenarios;
pub mod sim;
