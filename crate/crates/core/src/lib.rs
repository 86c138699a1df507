//! Calculus on error functions: envelopes, first-order and Taylor jets,
//! transcendental functions defined by areas, mean value witnesses,
//! bracketed integrals and an expression language tying them together.
//!
//! The numeric core is generic over [`Real`] (`f32` or `f64`); the aliases
//! below fix it to `f64`.

pub mod envelope;
pub mod error;
pub mod expr;
pub mod geomfun;
pub mod integral;
pub mod jet;
pub mod meanvalue;
pub mod scalar;
pub mod suites;
pub mod taylor;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Envelope = envelope::ErrorEnvelope<f64>;
pub type FunnelBox = envelope::FunnelBox<f64>;
pub type Jet = jet::Jet1<f64>;
pub type Jet0 = jet::Jet0<f64>;
pub type Taylor = taylor::TaylorJet<f64>;
pub type Bracket = integral::IntegralBracket<f64>;
pub type Engine = expr::Engine<'static, f64>;
