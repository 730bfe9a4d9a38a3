//! Langevin price models driven by fat-tailed noise.
//!
//! Three models map the drift plus noise accumulated over a horizon, `x = α·t + W(t)`,
//! to a price:
//!
//! * the standard (geometric Brownian motion) model, `S = S₀·eˣ`;
//! * a logistic model with a quadratic saturation term `−βS²`;
//! * a homogeneously saturated model in which the price draws down a money reservoir,
//!   giving the transcendental relation `S·e^{β(S − S₀)} = S₀·eˣ`.
//!
//! [`montecarlo`] runs seeded experiments with Student's t noise and summarises them.
//! [`pricing`] evaluates the European-call kernel truncated at a chosen confidence level.

pub mod distributions;
mod error;
pub mod models;
pub mod montecarlo;
pub mod pricing;
pub mod quadrature;
pub mod roots;
pub mod stats;

pub use error::{Error, Result};
