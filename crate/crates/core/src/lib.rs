//! Simulation and analysis toolkit for multi-bit optical phase coding with a
//! split-detector interferometer.
//!
//! Information rides on two degrees of freedom of a continuous-wave beam: a
//! longitudinal phase θ ∈ [0, π) and one of four transverse phase-front
//! profiles (±u₀, ±u_f0, where u_f0 is u₀ with a sign flip for x < 0).
//! The crate models the full read-out chain:
//!
//! * [`modes`] — the one-dimensional mode basis and split-detector overlap
//!   integrals,
//! * [`encoding`] — the four-symbol alphabet, the pit-depth ↔ phase mapping
//!   for an optical disc, and the bit-level track codec,
//! * [`detection`] — segment photocurrents, the A–D photocurrent
//!   combinations, their quantum noise, shot-noise Monte Carlo, and the
//!   φ-scan decoder,
//! * [`noise`] — SNR, minimum resolvable phase Δθ_min, and encodable level
//!   counts,
//! * [`capacity`] — allocation of a fixed photon budget between coherent
//!   amplitude and squeezing,
//! * [`spectral`] — signal/noise power spectral densities for single and
//!   consecutive windowed measurements.
//!
//! All numerics are generic over the scalar type through [`Real`]; the
//! `*64` aliases at the crate root pin the common `f64` instantiations.

pub mod capacity;
pub mod detection;
pub mod encoding;
pub mod modes;
pub mod noise;
pub mod spectral;

mod real;

pub use real::Real;

/// `f64` spatial grid.
pub type SpatialGrid64 = modes::SpatialGrid<f64>;
/// `f64` transverse mode.
pub type TransverseMode64 = modes::TransverseMode<f64>;
/// `f64` phase symbol.
pub type PhaseSymbol64 = encoding::PhaseSymbol<f64>;
/// `f64` pit description.
pub type PitSpec64 = encoding::PitSpec<f64>;
/// `f64` input-beam state.
pub type BeamState64 = detection::BeamState<f64>;
/// `f64` detection result.
pub type DetectionResult64 = detection::DetectionResult<f64>;
/// `f64` SNR report.
pub type SnrReport64 = noise::SnrReport<f64>;
/// `f64` capacity optimisation result.
pub type CapacityResult64 = capacity::CapacityResult<f64>;
/// `f64` sampled power spectral density.
pub type PsdCurve64 = spectral::PsdCurve<f64>;
