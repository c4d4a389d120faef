//! Simulation and analysis of phase-rotation synthesis for phase-encoded
//! quantum images.
//!
//! A grayscale image of `2^n × 2^n` pixels is encoded as the state
//! `Σ_j (|0⟩ + e^{iθ_j}|1⟩) ⊗ |j⟩` (normalized). Two such images, a carrier
//! and an embedder, are combined by estimating their phases and applying a
//! diagonal rotation whose grey-branch entries squash the summed phase back
//! into `(0, π/2)`.
//!
//! Module map:
//!
//! - [`phasecore`]: phase/gray images, the grey-level codec and phase restriction.
//! - [`statevec`]: dense statevector preparation, reindexing and phase readout.
//! - [`mpe`]: phase-estimation noise models, covariant phase measurement
//!   sampling and circular statistics.
//! - [`synthesis`]: the corrected and naive rotation operators and the
//!   three-step synthesis pipeline.
//! - [`analysis`]: compression ratios, overflow classification and
//!   uncertainty diagnostics.
//! - [`pgm`]: 8-bit PGM (P2/P5) codec.
//! - [`rng`]: counter-based deterministic random streams.

pub mod analysis;
pub mod error;
pub mod mpe;
pub mod pgm;
pub mod phasecore;
pub mod rng;
pub mod statevec;
pub mod synthesis;

pub use error::{Error, Result};
pub use phasecore::{GrayImage, PhaseCodec, PhaseImage, PhaseMap};
pub use statevec::{GateTrace, StateVector};
pub use synthesis::{DiagonalUnitary, OperatorKind, SynthesisParams, SynthesisRun};
