//! A numerical laboratory for the circuit view of bias-free ReLU networks.
//!
//! The crate decomposes the output, gradient, and Hessian of a feedforward
//! ReLU network (binary classification, hinge loss, no biases) into basis
//! circuits, the multiplicative paths through the network, and provides the
//! machinery to check the decompositions exactly at small scale and
//! statistically at desk scale:
//!
//! - [`nn`]: networks, forward pass with gate recording, hinge risk,
//!   backprop gradient, Hessian-vector products with frozen gates.
//! - [`gates`]: the finite-temperature gate sampler and its zero-temperature
//!   degeneration to deterministic ReLU.
//! - [`circuits`]: basis-circuit values, exact enumeration, perturbation
//!   circuits of order one and two, uniform circuit sampling.
//! - [`spectral`]: dense Hessians, a symmetric eigensolver, stochastic
//!   Lanczos spectral densities, spectrum-symmetry scoring.
//! - [`diagnostics`]: symmetry reports, the plasticity order parameter,
//!   bootstrap Hessian-entry statistics, coupling reports.
//! - [`harness`]: datasets, the training loop, run directories, and
//!   experiment orchestration.
//!
//! [`eigen`] (Householder + implicit QL) and [`stats`] (moments, exact
//! binomial intervals, rank correlation) support the above.
//!
//! All numeric code is generic over the scalar type through [`Real`];
//! concrete `f64` and `f32` aliases are exported at the crate root.

pub mod circuits;
pub mod diagnostics;
pub mod eigen;
pub mod error;
pub mod gates;
pub mod harness;
pub mod loss;
pub mod nn;
pub mod scalar;
pub mod spectral;
pub mod stats;

pub use error::{Error, Result};
pub use loss::{hinge_deriv, hinge_loss, Hinge, MarginLoss};
pub use nn::{
    evaluate, grad_norm_squared, Example, ForwardTrace, GatePattern, InitScheme, Network,
};
pub use scalar::Real;

/// `f64` network.
pub type Net64 = Network<f64>;
/// `f32` network.
pub type Net32 = Network<f32>;
/// `f64` example.
pub type Example64 = Example<f64>;
/// `f32` example.
pub type Example32 = Example<f32>;
/// `f64` spectral density.
pub type Density64 = spectral::SpectralDensity<f64>;
/// `f64` circuit sample.
pub type CircuitValue64 = circuits::CircuitValue<f64>;
