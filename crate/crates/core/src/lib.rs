//! Hybrid precoding with a fixed-phase-shifter (FPS) analog network and a
//! dynamic switch network for multiuser mm-wave MIMO-OFDM.
//!
//! All numerical code is generic over [`Real`] (`f32` or `f64`); the
//! `*64` aliases below fix the scalar for the common double-precision case.

pub mod altmin;
pub mod cancel;
pub mod digital;
pub mod error;
pub mod eval;
pub mod experiment;
pub mod linalg;
pub mod oracles;
pub mod pipeline;
pub mod scalar;
pub mod system;
pub mod tensor;

pub use error::{Error, Result};
pub use scalar::{CMat, CVec, RMat, Real};

pub type CMat64 = CMat<f64>;
pub type CVec64 = CVec<f64>;
pub type RMat64 = RMat<f64>;
pub type ChannelRealization64 = system::ChannelRealization<f64>;
pub type AltMinState64 = altmin::AltMinState<f64>;
pub type GroupSolution64 = altmin::GroupSolution<f64>;
pub type HybridSolution64 = cancel::HybridSolution<f64>;
pub type Prepared64 = pipeline::Prepared<f64>;
