//! Gradient descent-ascent instances compiled from a Pure-Circuit instance
//! and a linear variational inequality, together with desk-scale solvers, a
//! decoder from stationary points back to either source problem, and
//! numerical audits of the inequalities that make the decoding sound.

pub mod decoder;
pub mod error;
pub mod experiment;
pub mod gates;
pub mod gradcheck;
pub mod lin_vi;
pub mod params;
pub mod pure_circuit;
pub mod reduction;
pub mod seeds;
pub mod solver;

pub use error::{Error, Result};
pub use lin_vi::{LinViInstance, SlackReport};
pub use params::{GdaParams, PaperParams, ParamMode, Premises};
pub use pure_circuit::{Assignment, PureCircuitInstance, Trit};
pub use reduction::{GdaInstance, JointPoint};
