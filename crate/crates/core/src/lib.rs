//! Symplectic 2×2 evolution matrices for a parametric oscillator
//! `q̈ + β(τ) q = 0`: propagation, Floquet classification, stability-chart
//! scans, pulse design and exact inverse design from a prescribed θ(τ).

// `!(x > 0.0)` rejects NaN together with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod floquet;
pub mod propagator;
pub mod pulse;
pub mod strutt;
pub mod sym2;
pub mod theta;
pub mod units;
