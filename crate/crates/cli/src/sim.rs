//! End-to-end storage channel: payload bits -> pits -> transformed beam ->
//! split detection with shot noise -> phi-scan decode -> bits.
//!
//! Each pit is read by scanning the reference phase over [0, pi); every
//! scan sample is an independent measurement window, so each gets a fresh
//! Gaussian fluctuation with the analytic variance. The noise is injected
//! at the segment level so the combination identities of the detection
//! result stay intact. Pit read-outs draw from per-pit ChaCha streams
//! derived from one seed (stream 0 is the payload generator), which makes
//! the report independent of processing order and reproducible.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use phasecode::detection::{analytic_detection, decode, BeamState, DecodeOutcome, DetectionResult};
use phasecode::encoding::{
    bits_to_track, pit_to_symbol, quantize_theta, theta_of_level, EncodingError, LevelCode,
    PhaseSymbol, Track, Transform,
};
use phasecode::noise::{delta_theta_min, NoiseError};

use crate::CliError;

#[derive(Debug, Clone)]
pub struct ChannelConfig {
    pub levels_per_theta: u32,
    pub wavelength: f64,
    pub alpha: f64,
    pub beta: f64,
    pub squeeze_signal_db: f64,
    pub squeeze_reference_db: f64,
    pub phi_steps: usize,
    pub noiseless: bool,
    pub seed: u64,
    pub trials: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ChannelReport {
    pub pits_per_trial: usize,
    pub trials: u64,
    pub pits_total: u64,
    pub decided: u64,
    pub undecidable: u64,
    pub symbol_errors: u64,
    /// Symbol error rate among decided pits.
    pub symbol_error_rate: f64,
    pub ser_ci95: [f64; 2],
    pub bit_errors: u64,
    pub bits_compared: u64,
    pub bit_error_rate: f64,
    /// SNR of one scan sample at the level spacing pi/levels_per_theta.
    pub snr_at_level_spacing: Option<f64>,
    pub delta_theta_min: Option<f64>,
}

/// Wilson 95% score interval for a binomial proportion.
fn wilson_ci(successes: u64, n: u64) -> [f64; 2] {
    if n == 0 {
        return [0.0, 1.0];
    }
    let z = 1.959963984540054_f64;
    let nf = n as f64;
    let p = successes as f64 / nf;
    let z2 = z * z;
    let denom = 1.0 + z2 / nf;
    let center = (p + z2 / (2.0 * nf)) / denom;
    let half = z * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt() / denom;
    [(center - half).max(0.0), (center + half).min(1.0)]
}

fn beams(cfg: &ChannelConfig) -> Result<(BeamState<f64>, BeamState<f64>), CliError> {
    let b3 = BeamState::amplitude_squeezed_db(cfg.alpha, 0.0, cfg.squeeze_signal_db)
        .map_err(|e| CliError::Validation(e.to_string()))?;
    let b2 = BeamState::amplitude_squeezed_db(cfg.beta, 0.0, cfg.squeeze_reference_db)
        .map_err(|e| CliError::Validation(e.to_string()))?;
    Ok((b3, b2))
}

/// Add one Gaussian draw per combination at the segment level, keeping
/// A and B noise-free as in the linearized model.
pub(crate) fn add_combination_noise(
    r: &DetectionResult<f64>,
    rng: &mut ChaCha8Rng,
) -> DetectionResult<f64> {
    let zc: f64 = StandardNormal.sample(rng);
    let zd: f64 = StandardNormal.sample(rng);
    let nc = r.noise_var_c.sqrt() * zc;
    let nd = r.noise_var_d.sqrt() * zd;
    DetectionResult::from_segments(
        r.d1 + (nc + nd) / 4.0,
        r.d2 + (nd - nc) / 4.0,
        r.d3 - (nc + nd) / 4.0,
        r.d4 + (nc - nd) / 4.0,
        r.noise_var_c,
        r.noise_var_d,
    )
}

/// Quantize a decoded symbol onto the level circle of its shape:
/// zeta = theta + (sign < 0)*pi, cells of width pi/levels.
fn decoded_level(code: &LevelCode, transform: Transform, theta: f64) -> (Transform, u32) {
    let lpt = code.levels_per_theta();
    let symbol = PhaseSymbol::canonical(transform, theta);
    let zeta = symbol.zeta();
    let two_lpt = 2 * lpt;
    let mut k = (zeta * lpt as f64 / std::f64::consts::PI).floor() as i64;
    k = k.rem_euclid(two_lpt as i64);
    let k = k as u32;
    let negative = k >= lpt;
    let theta_level = k % lpt;
    let t = match (transform.is_flipped(), negative) {
        (false, false) => Transform::PlusU0,
        (false, true) => Transform::MinusU0,
        (true, false) => Transform::PlusUf0,
        (true, true) => Transform::MinusUf0,
    };
    (t, theta_level)
}

/// Generate the payload track for a run: `pits` pits of random bits drawn
/// from stream 0 of the seed.
pub fn generate_track(
    pits: usize,
    code: LevelCode,
    wavelength: f64,
    seed: u64,
) -> Result<Track<f64>, EncodingError> {
    let bpp = code.bits_per_pit()? as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(0);
    let bits: Vec<bool> = (0..pits * bpp).map(|_| rng.gen::<bool>()).collect();
    bits_to_track(&bits, code, wavelength)
}

pub fn run_channel(track: &Track<f64>, cfg: &ChannelConfig) -> Result<ChannelReport, CliError> {
    if track.pits.is_empty() {
        return Err(CliError::Validation("track has no pits".into()));
    }
    let lpt = track.code.levels_per_theta();
    if cfg.phi_steps <= lpt as usize {
        return Err(CliError::Validation(format!(
            "phi-steps ({}) must exceed levels-per-theta ({lpt}) so the scan resolves one level",
            cfg.phi_steps
        )));
    }
    let bpp = track
        .code
        .bits_per_pit()
        .map_err(|e| CliError::Validation(e.to_string()))? as usize;
    let (beam3, beam2) = beams(cfg)?;

    let (snr_spacing, dt_min) = match delta_theta_min(&beam3, &beam2) {
        Ok(dt) => {
            let spacing = std::f64::consts::PI / lpt as f64;
            let r = (spacing.sin() / dt.sin()).powi(2);
            (Some(r), Some(dt))
        }
        Err(NoiseError::Unresolvable(_)) => (None, None),
        Err(e) => return Err(CliError::Validation(e.to_string())),
    };

    let n_pits = track.pits.len();
    let mut decided = 0u64;
    let mut undecidable = 0u64;
    let mut symbol_errors = 0u64;
    let mut bit_errors = 0u64;
    let mut bits_compared = 0u64;

    for trial in 0..cfg.trials {
        for (i, pit) in track.pits.iter().enumerate() {
            let truth = pit_to_symbol(pit);
            let truth_level = quantize_theta(truth.theta(), lpt);
            // Re-center on the cell the codec wrote; the pit stores the cell
            // center exactly.
            let symbol =
                PhaseSymbol::new(truth.transform(), theta_of_level(truth_level, lpt)).unwrap();

            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(1 + trial * n_pits as u64 + i as u64);
            let noiseless = cfg.noiseless;
            let outcome = decode(
                |phi| {
                    let clean = analytic_detection(&symbol, &beam3, &beam2.with_phase(phi));
                    if noiseless {
                        clean
                    } else {
                        add_combination_noise(&clean, &mut rng)
                    }
                },
                cfg.phi_steps,
            )
            .map_err(|e| CliError::Validation(e.to_string()))?;

            match outcome {
                DecodeOutcome::Undecidable { .. } => undecidable += 1,
                DecodeOutcome::Decoded(d) => {
                    decided += 1;
                    let (t_hat, level_hat) = decoded_level(&track.code, d.transform, d.theta);
                    let ok = t_hat == truth.transform() && level_hat == truth_level;
                    if !ok {
                        symbol_errors += 1;
                    }
                    let sent = track.code.level_of(truth.transform(), truth_level);
                    let got = track.code.level_of(t_hat, level_hat);
                    bit_errors += u64::from((sent ^ got).count_ones());
                    bits_compared += bpp as u64;
                }
            }
        }
    }

    let ser = if decided > 0 { symbol_errors as f64 / decided as f64 } else { 0.0 };
    let ber = if bits_compared > 0 { bit_errors as f64 / bits_compared as f64 } else { 0.0 };
    Ok(ChannelReport {
        pits_per_trial: n_pits,
        trials: cfg.trials,
        pits_total: n_pits as u64 * cfg.trials,
        decided,
        undecidable,
        symbol_errors,
        symbol_error_rate: ser,
        ser_ci95: wilson_ci(symbol_errors, decided),
        bit_errors,
        bits_compared,
        bit_error_rate: ber,
        snr_at_level_spacing: snr_spacing,
        delta_theta_min: dt_min,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(noiseless: bool, lpt: u32) -> ChannelConfig {
        ChannelConfig {
            levels_per_theta: lpt,
            wavelength: 1e-6,
            alpha: 10.0,
            beta: 10.0,
            squeeze_signal_db: 0.0,
            squeeze_reference_db: 0.0,
            phi_steps: 64,
            noiseless,
            seed: 11,
            trials: 1,
        }
    }

    #[test]
    fn noiseless_channel_is_error_free() {
        let cfg = config(true, 16);
        let code = LevelCode::new(cfg.levels_per_theta).unwrap();
        let track = generate_track(400, code, cfg.wavelength, cfg.seed).unwrap();
        let report = run_channel(&track, &cfg).unwrap();
        assert_eq!(report.symbol_errors, 0);
        assert_eq!(report.bit_errors, 0);
        assert_eq!(report.undecidable, 0);
        assert_eq!(report.decided, 400);
    }

    #[test]
    fn dark_beam_is_all_undecidable() {
        let mut cfg = config(true, 16);
        cfg.alpha = 0.0;
        let code = LevelCode::new(cfg.levels_per_theta).unwrap();
        let track = generate_track(50, code, cfg.wavelength, cfg.seed).unwrap();
        let report = run_channel(&track, &cfg).unwrap();
        assert_eq!(report.undecidable, 50);
        assert_eq!(report.decided, 0);
    }

    #[test]
    fn reports_are_reproducible() {
        let cfg = config(false, 16);
        let code = LevelCode::new(cfg.levels_per_theta).unwrap();
        let track = generate_track(100, code, cfg.wavelength, cfg.seed).unwrap();
        let a = run_channel(&track, &cfg).unwrap();
        let b = run_channel(&track, &cfg).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }

    #[test]
    fn coarse_code_under_noise_is_still_clean() {
        // Level spacing pi/8 at alpha = beta = 10: far above the resolvable
        // limit, so a noisy read must make no symbol errors on 200 pits.
        let cfg = config(false, 8);
        let code = LevelCode::new(cfg.levels_per_theta).unwrap();
        let track = generate_track(200, code, cfg.wavelength, cfg.seed).unwrap();
        let report = run_channel(&track, &cfg).unwrap();
        assert!(report.snr_at_level_spacing.unwrap() > 25.0);
        assert_eq!(report.symbol_errors, 0);
    }

    #[test]
    fn phi_resolution_must_beat_the_level_grid() {
        let mut cfg = config(true, 64);
        cfg.phi_steps = 64;
        let code = LevelCode::new(64).unwrap();
        let track = generate_track(4, code, cfg.wavelength, cfg.seed).unwrap();
        assert!(matches!(run_channel(&track, &cfg), Err(CliError::Validation(_))));
    }

    #[test]
    fn wilson_interval_brackets_the_point_estimate() {
        let [lo, hi] = wilson_ci(50, 1000);
        assert!(lo < 0.05 && 0.05 < hi);
        assert!(lo > 0.03 && hi < 0.07);
        assert_eq!(wilson_ci(0, 0), [0.0, 1.0]);
    }
}
