//! Measurement noise figures: SNR, minimum resolvable phase, level counts.
//!
//! For any of the four transforms the informative combination has mean
//! ±2αβ₀ sin(φ−θ) and variance α²V_b(ψ) + β₀²V_a(ψ) with ψ = φ−θ+π/2, so
//! the SNR is
//!
//! ```text
//! R = 4 α² β₀² sin²(φ−θ) / (α² V_b + β₀² V_a)
//! ```
//!
//! Setting R = 1 at the optimal φ−θ = π/2 defines the smallest detectable
//! phase step Δθ_min = asin √[(α²V_b + β₀²V_a)/(4α²β₀²)]. Since θ is only
//! determined modulo π, π/Δθ_min phase levels are resolvable, and the four
//! transverse symbols multiply that by 4: L_max = 4π/Δθ_min.

use thiserror::Error;

use crate::detection::BeamState;
use crate::Real;

/// Planck constant (J·s).
pub const PLANCK: f64 = 6.626_070_15e-34;
/// Speed of light (m/s).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

#[derive(Debug, Error, PartialEq)]
pub enum NoiseError {
    /// SNR = 1 is out of reach even at the optimal phase: the asin argument
    /// exceeds 1. Distinct from a numerical failure.
    #[error("configuration cannot reach SNR = 1: asin argument {0} > 1")]
    Unresolvable(f64),
    #[error("unphysical input: {0}")]
    Unphysical(&'static str),
}

/// Noise configuration of the two input beams.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    Coherent,
    OneSqueezed,
    TwoSqueezed,
    /// β₀ ≫ α: the reference acts as a local oscillator and its noise drops
    /// out.
    HomodyneLimit,
}

/// Summary of the noise performance of a beam pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnrReport<F> {
    /// SNR at the optimal phase difference φ−θ = π/2.
    pub snr: F,
    pub delta_theta_min: F,
    pub l_max: F,
    pub log2_l_max: F,
    pub regime: Regime,
}

fn squeezed<F: Real>(beam: &BeamState<F>) -> bool {
    let tol = F::one() - F::lit(1e-12);
    beam.var_plus() < tol || beam.var_minus() < tol
}

/// Measured-quadrature variances at the optimum φ−θ = π/2 (ψ = π, i.e. the
/// amplitude quadrature of each beam).
fn optimal_variances<F: Real>(beam3: &BeamState<F>, beam2: &BeamState<F>) -> (F, F) {
    (beam3.var_at(F::PI()), beam2.var_at(F::PI()))
}

/// SNR of the informative combination at phase difference φ−θ.
pub fn snr<F: Real>(
    beam3: &BeamState<F>,
    beam2: &BeamState<F>,
    phi_minus_theta: F,
) -> Result<F, NoiseError> {
    let alpha2 = beam3.amplitude() * beam3.amplitude();
    let beta2 = beam2.amplitude() * beam2.amplitude();
    let psi = phi_minus_theta + F::FRAC_PI_2();
    let denom = alpha2 * beam2.var_at(psi) + beta2 * beam3.var_at(psi);
    if !(denom > F::zero()) {
        return Err(NoiseError::Unphysical("zero noise variance"));
    }
    let s = phi_minus_theta.sin();
    Ok(F::lit(4.0) * alpha2 * beta2 * s * s / denom)
}

/// Homodyne-limit SNR (β₀ ≫ α): 4α² sin²(φ−θ) / V_a.
pub fn snr_homodyne<F: Real>(beam3: &BeamState<F>, phi_minus_theta: F) -> Result<F, NoiseError> {
    let psi = phi_minus_theta + F::FRAC_PI_2();
    let va = beam3.var_at(psi);
    if !(va > F::zero()) {
        return Err(NoiseError::Unphysical("zero noise variance"));
    }
    let alpha2 = beam3.amplitude() * beam3.amplitude();
    let s = phi_minus_theta.sin();
    Ok(F::lit(4.0) * alpha2 * s * s / va)
}

fn delta_theta_from_arg<F: Real>(arg: F) -> Result<F, NoiseError> {
    if !arg.is_finite() || arg > F::one() {
        return Err(NoiseError::Unresolvable(arg.to_f64().unwrap_or(f64::INFINITY)));
    }
    if !(arg > F::zero()) {
        return Err(NoiseError::Unphysical("vanishing noise-to-signal ratio"));
    }
    Ok(arg.sqrt().asin())
}

/// Smallest detectable phase step (SNR = 1 at φ−θ = π/2):
/// asin √[(α²V_b + β₀²V_a)/(4α²β₀²)].
pub fn delta_theta_min<F: Real>(
    beam3: &BeamState<F>,
    beam2: &BeamState<F>,
) -> Result<F, NoiseError> {
    let alpha2 = beam3.amplitude() * beam3.amplitude();
    let beta2 = beam2.amplitude() * beam2.amplitude();
    let (va, vb) = optimal_variances(beam3, beam2);
    let arg = (alpha2 * vb + beta2 * va) / (F::lit(4.0) * alpha2 * beta2);
    delta_theta_from_arg(arg)
}

/// Homodyne-limit version: asin √(V_a/4α²).
pub fn delta_theta_min_homodyne<F: Real>(beam3: &BeamState<F>) -> Result<F, NoiseError> {
    let alpha2 = beam3.amplitude() * beam3.amplitude();
    let va = beam3.var_at(F::PI());
    delta_theta_from_arg(va / (F::lit(4.0) * alpha2))
}

/// Total encodable levels, 4π/Δθ_min.
pub fn l_max<F: Real>(beam3: &BeamState<F>, beam2: &BeamState<F>) -> Result<F, NoiseError> {
    Ok(F::lit(4.0) * F::PI() / delta_theta_min(beam3, beam2)?)
}

/// Homodyne-limit level count.
pub fn l_max_homodyne<F: Real>(beam3: &BeamState<F>) -> Result<F, NoiseError> {
    Ok(F::lit(4.0) * F::PI() / delta_theta_min_homodyne(beam3)?)
}

/// Full report at the optimal phase difference, with the regime inferred
/// from the beams' variances.
pub fn report<F: Real>(beam3: &BeamState<F>, beam2: &BeamState<F>) -> Result<SnrReport<F>, NoiseError> {
    let snr = snr(beam3, beam2, F::FRAC_PI_2())?;
    let dt = delta_theta_min(beam3, beam2)?;
    let l = F::lit(4.0) * F::PI() / dt;
    let regime = match (squeezed(beam3), squeezed(beam2)) {
        (false, false) => Regime::Coherent,
        (true, true) => Regime::TwoSqueezed,
        _ => Regime::OneSqueezed,
    };
    Ok(SnrReport { snr, delta_theta_min: dt, l_max: l, log2_l_max: l.log2(), regime })
}

/// Report for the homodyne limit β₀ ≫ α.
pub fn report_homodyne<F: Real>(beam3: &BeamState<F>) -> Result<SnrReport<F>, NoiseError> {
    let snr = snr_homodyne(beam3, F::FRAC_PI_2())?;
    let dt = delta_theta_min_homodyne(beam3)?;
    let l = F::lit(4.0) * F::PI() / dt;
    Ok(SnrReport { snr, delta_theta_min: dt, l_max: l, log2_l_max: l.log2(), regime: Regime::HomodyneLimit })
}

/// Photon flux of a beam: P·λ/(hc) photons per second.
pub fn photons_per_second<F: Real>(power_watts: F, wavelength_m: F) -> F {
    power_watts * wavelength_m / F::lit(PLANCK * SPEED_OF_LIGHT)
}

/// Photons detected in one measurement window: P·T·λ/(hc).
pub fn photons_per_window<F: Real>(power_watts: F, wavelength_m: F, window_s: F) -> F {
    photons_per_second(power_watts, wavelength_m) * window_s
}
