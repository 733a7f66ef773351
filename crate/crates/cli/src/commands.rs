//! Implementations of the six experiment commands.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::PathBuf;

use serde::Serialize;

use phasecode::capacity::{optimize_capacity, CapacityError, PhotonBudget, SearchConfig};
use phasecode::detection::{
    analytic_detection, decode, simulate_detection, BeamState, DecodeOutcome, DecodedSymbol,
    ScanRow, write_scan_csv,
};
use phasecode::encoding::{LevelCode, PhaseSymbol, Track};
use phasecode::modes::SpatialGrid;
use phasecode::noise::{self, NoiseError};
use phasecode::spectral::{
    peak_and_bandwidth, psd_consecutive, psd_single, MeasurementWindow, PsdCurve,
};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::args::*;
use crate::manifest::Manifest;
use crate::outguard::OutputGuard;
use crate::sim::{self, ChannelConfig};
use crate::CliError;

fn validation<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Validation(e.to_string())
}

fn io_err<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Other(e.to_string())
}

/// Full round-trip float formatting, `nan` for unavailable values.
fn num(x: f64) -> String {
    if x.is_nan() {
        "nan".to_string()
    } else {
        format!("{x}")
    }
}

struct Artifact {
    guard: OutputGuard,
    out_dir: PathBuf,
    outputs: Vec<String>,
}

impl Artifact {
    fn new(out_dir: &PathBuf) -> Result<Self, CliError> {
        std::fs::create_dir_all(out_dir)
            .map_err(|e| io_err(format!("creating {}: {e}", out_dir.display())))?;
        Ok(Self { guard: OutputGuard::new(), out_dir: out_dir.clone(), outputs: Vec::new() })
    }

    fn writer(&mut self, name: &str) -> Result<BufWriter<File>, CliError> {
        let path = self.out_dir.join(name);
        self.guard.register(&path);
        self.outputs.push(name.to_string());
        let f = File::create(&path).map_err(|e| io_err(format!("{}: {e}", path.display())))?;
        Ok(BufWriter::new(f))
    }

    /// Write the manifest next to the primary artifact and keep everything.
    fn finish(
        mut self,
        command: &str,
        args: Vec<String>,
        seed: Option<u64>,
    ) -> Result<(), CliError> {
        let primary = self.out_dir.join(&self.outputs[0]);
        let mpath = Manifest::path_for(&primary);
        self.guard.register(&mpath);
        Manifest::new(command, args, seed, self.outputs.clone()).write(&mpath)?;
        self.guard.disarm();
        Ok(())
    }
}

fn beams_from(args: &BeamArgs) -> Result<(BeamState<f64>, BeamState<f64>), CliError> {
    let b3 = BeamState::amplitude_squeezed_db(args.alpha, 0.0, args.squeeze_signal_db)
        .map_err(validation)?;
    let b2 = BeamState::amplitude_squeezed_db(args.beta, 0.0, args.squeeze_reference_db)
        .map_err(validation)?;
    Ok((b3, b2))
}

pub fn run_detect(args: &DetectArgs) -> Result<(), CliError> {
    let symbol = PhaseSymbol::new(args.transform, args.theta).map_err(validation)?;
    let (beam3, beam2) = beams_from(&args.beams)?;
    if args.phi_steps < 2 {
        return Err(CliError::Validation("phi-steps must be at least 2".into()));
    }

    let rows: Vec<ScanRow<f64>> = match args.path {
        DetectPath::Analytic => {
            phasecode::detection::phi_scan(&symbol, &beam3, &beam2, args.phi_steps)
        }
        DetectPath::Numerical => {
            let grid =
                SpatialGrid::new(args.grid_half_width, args.grid_points).map_err(validation)?;
            (0..args.phi_steps)
                .map(|k| {
                    let phi = std::f64::consts::PI * k as f64 / args.phi_steps as f64;
                    let b2 = beam2.with_phase(phi);
                    simulate_detection(&symbol, &beam3, &b2, &grid)
                        .map(|result| ScanRow { phi, result })
                })
                .collect::<Result<_, _>>()
                .map_err(validation)?
        }
    };

    let mut artifact = Artifact::new(&args.output.out_dir)?;
    {
        let mut w = artifact.writer(&args.out)?;
        write_scan_csv(&rows, &mut w).map_err(io_err)?;
        w.flush().map_err(io_err)?;
    }
    artifact.finish("detect", args.canonical_args(), None)
}

#[derive(Debug, Serialize)]
struct DecodedEcho {
    transform: String,
    theta: f64,
    phi_opt: f64,
    amplitude: f64,
    confidence: f64,
}

impl From<&DecodedSymbol<f64>> for DecodedEcho {
    fn from(d: &DecodedSymbol<f64>) -> Self {
        Self {
            transform: d.transform.to_string(),
            theta: d.theta,
            phi_opt: d.phi_opt,
            amplitude: d.amplitude,
            confidence: d.confidence,
        }
    }
}

#[derive(Debug, Serialize)]
struct DecodeReport {
    transform: String,
    theta: f64,
    alpha: f64,
    beta: f64,
    squeeze_signal_db: f64,
    squeeze_reference_db: f64,
    phi_steps: usize,
    noisy: bool,
    seed: Option<u64>,
    trials: u64,
    decided: u64,
    undecidable: u64,
    transform_accuracy: f64,
    theta_rmse: f64,
    mean_confidence: f64,
    first_decode: Option<DecodedEcho>,
    first_undecidable_candidates: Option<Vec<DecodedEcho>>,
}

pub fn run_decode(args: &DecodeArgs) -> Result<(), CliError> {
    let symbol = PhaseSymbol::new(args.transform, args.theta).map_err(validation)?;
    let (beam3, beam2) = beams_from(&args.beams)?;
    if args.trials == 0 {
        return Err(CliError::Validation("trials must be at least 1".into()));
    }

    let mut decided = 0u64;
    let mut undecidable = 0u64;
    let mut transform_ok = 0u64;
    let mut sq_err = 0.0f64;
    let mut conf_sum = 0.0f64;
    let mut first_decode = None;
    let mut first_undecidable = None;

    for trial in 0..args.trials {
        let mut rng = args.seed.map(|s| {
            let mut r = ChaCha8Rng::seed_from_u64(s);
            r.set_stream(trial + 1);
            r
        });
        let noisy = args.noisy;
        let outcome = decode(
            |phi| {
                let clean = analytic_detection(&symbol, &beam3, &beam2.with_phase(phi));
                match (&mut rng, noisy) {
                    (Some(r), true) => sim::add_combination_noise(&clean, r),
                    _ => clean,
                }
            },
            args.phi_steps,
        )
        .map_err(validation)?;

        match outcome {
            DecodeOutcome::Decoded(d) => {
                decided += 1;
                if d.transform == args.transform {
                    transform_ok += 1;
                }
                let two_pi = 2.0 * std::f64::consts::PI;
                let mut dz = (d.symbol().zeta() - symbol.zeta()).rem_euclid(two_pi);
                if dz > std::f64::consts::PI {
                    dz -= two_pi;
                }
                sq_err += dz * dz;
                conf_sum += d.confidence;
                if first_decode.is_none() {
                    first_decode = Some(DecodedEcho::from(&d));
                }
            }
            DecodeOutcome::Undecidable { candidates } => {
                undecidable += 1;
                if first_undecidable.is_none() {
                    first_undecidable =
                        Some(candidates.iter().map(DecodedEcho::from).collect::<Vec<_>>());
                }
            }
        }
    }

    let report = DecodeReport {
        transform: args.transform.to_string(),
        theta: args.theta,
        alpha: args.beams.alpha,
        beta: args.beams.beta,
        squeeze_signal_db: args.beams.squeeze_signal_db,
        squeeze_reference_db: args.beams.squeeze_reference_db,
        phi_steps: args.phi_steps,
        noisy: args.noisy,
        seed: args.seed,
        trials: args.trials,
        decided,
        undecidable,
        transform_accuracy: if decided > 0 { transform_ok as f64 / decided as f64 } else { 0.0 },
        theta_rmse: if decided > 0 { (sq_err / decided as f64).sqrt() } else { f64::NAN },
        mean_confidence: if decided > 0 { conf_sum / decided as f64 } else { f64::NAN },
        first_decode,
        first_undecidable_candidates: first_undecidable,
    };

    let mut artifact = Artifact::new(&args.output.out_dir)?;
    {
        let mut w = artifact.writer(&args.out)?;
        serde_json::to_writer_pretty(&mut w, &report).map_err(io_err)?;
        w.write_all(b"\n").map_err(io_err)?;
        w.flush().map_err(io_err)?;
    }
    artifact.finish("decode", args.canonical_args(), args.seed)?;
    if decided == 0 {
        return Err(CliError::Physics(
            "every trial was undecidable: both combinations sit below the noise floor".into(),
        ));
    }
    Ok(())
}

pub fn run_snr_sweep(args: &SnrSweepArgs) -> Result<(), CliError> {
    if !(args.alpha_min > 0.0 && args.alpha_max >= args.alpha_min) {
        return Err(CliError::Validation("need 0 < alpha-min <= alpha-max".into()));
    }
    if args.steps == 0 {
        return Err(CliError::Validation("steps must be at least 1".into()));
    }
    if args.spacing == Spacing::Log && args.alpha_min <= 0.0 {
        return Err(CliError::Validation("log spacing needs alpha-min > 0".into()));
    }

    let alphas = args.spacing.grid(args.alpha_min, args.alpha_max, args.steps);
    let mut resolvable = 0usize;
    let mut artifact = Artifact::new(&args.output.out_dir)?;
    {
        let mut w = artifact.writer(&args.out)?;
        writeln!(
            w,
            "alpha,beta,V_a_plus,V_a_minus,V_b_plus,V_b_minus,snr,delta_theta_min,log2_l_max"
        )
        .map_err(io_err)?;
        for &alpha in &alphas {
            let beta = match args.beta {
                BetaSpec::Fixed(b) => b,
                BetaSpec::EqualAlpha => alpha,
            };
            let b3 = BeamState::amplitude_squeezed_db(alpha, 0.0, args.squeeze_signal_db)
                .map_err(validation)?;
            let b2 = BeamState::amplitude_squeezed_db(beta, 0.0, args.squeeze_reference_db)
                .map_err(validation)?;
            let snr = noise::snr(&b3, &b2, args.phi_minus_theta).map_err(validation)?;
            let (dt, log2_l) = match noise::delta_theta_min(&b3, &b2) {
                Ok(dt) => {
                    resolvable += 1;
                    (dt, (4.0 * std::f64::consts::PI / dt).log2())
                }
                Err(NoiseError::Unresolvable(_)) => (f64::NAN, f64::NAN),
                Err(e) => return Err(validation(e)),
            };
            writeln!(
                w,
                "{},{},{},{},{},{},{},{},{}",
                num(alpha),
                num(beta),
                num(b3.var_plus()),
                num(b3.var_minus()),
                num(b2.var_plus()),
                num(b2.var_minus()),
                num(snr),
                num(dt),
                num(log2_l)
            )
            .map_err(io_err)?;
        }
        w.flush().map_err(io_err)?;
    }
    artifact.finish("snr-sweep", args.canonical_args(), None)?;
    if resolvable == 0 {
        return Err(CliError::Physics(
            "no sweep point reaches SNR = 1: all rows unresolvable".into(),
        ));
    }
    Ok(())
}

pub fn run_capacity_sweep(args: &CapacitySweepArgs) -> Result<(), CliError> {
    if args.points == 0 {
        return Err(CliError::Validation("points must be at least 1".into()));
    }
    if args.regimes.is_empty() {
        return Err(CliError::Validation("need at least one regime".into()));
    }
    let budgets = args.spacing.grid(args.nbar_min, args.nbar_max, args.points);
    let cfg = SearchConfig::default();

    let mut feasible = 0usize;
    let mut artifact = Artifact::new(&args.output.out_dir)?;
    {
        let mut w = artifact.writer(&args.out)?;
        writeln!(w, "n_bar,regime,log2_lmax,alpha,beta,squeezing_dB_beam1,squeezing_dB_beam2")
            .map_err(io_err)?;
        for &n_bar in &budgets {
            for regime in &args.regimes {
                let budget = PhotonBudget::new(n_bar, regime.0).map_err(validation)?;
                match optimize_capacity(&budget, &cfg) {
                    Ok(r) => {
                        feasible += 1;
                        writeln!(
                            w,
                            "{},{},{},{},{},{},{}",
                            num(n_bar),
                            regime.0.label(),
                            num(r.best_log2_levels),
                            num(r.allocation.signal.alpha),
                            num(r.allocation.reference.alpha),
                            num(r.allocation.signal.squeezing_db()),
                            num(r.allocation.reference.squeezing_db())
                        )
                        .map_err(io_err)?;
                    }
                    Err(CapacityError::BelowThreshold) => {
                        writeln!(
                            w,
                            "{},{},nan,nan,nan,nan,nan",
                            num(n_bar),
                            regime.0.label()
                        )
                        .map_err(io_err)?;
                    }
                    Err(e) => return Err(validation(e)),
                }
            }
        }
        w.flush().map_err(io_err)?;
    }
    artifact.finish("capacity-sweep", args.canonical_args(), None)?;
    if feasible == 0 {
        return Err(CliError::Physics(
            "every budget point is below the SNR = 1 threshold".into(),
        ));
    }
    Ok(())
}

fn normalized_psd_rows(
    curve: &PsdCurve<f64>,
    window_s: f64,
    norm: f64,
    noise_scale: f64,
) -> Vec<(f64, f64, f64)> {
    curve
        .nu
        .iter()
        .zip(curve.signal.iter().zip(curve.noise.iter()))
        .map(|(&nu, (&s, &n))| (nu * window_s, s / norm, n * noise_scale / norm))
        .collect()
}

pub fn run_psd(args: &PsdArgs) -> Result<(), CliError> {
    let rate = match (args.photon_rate, args.power_watts) {
        (Some(n), _) => n,
        (None, Some(p)) => noise::photons_per_second(p, args.wavelength_m),
        (None, None) => 1.0 / (args.window_s * args.window_s),
    };
    if !(rate > 0.0 && rate.is_finite()) {
        return Err(CliError::Validation(format!(
            "photon rate must be positive, resolved to {rate}"
        )));
    }

    let noise_scale = 10f64.powf(args.squeeze_db / 10.0);
    let (curve, norm) = match args.scheme {
        SchemeArg::Single => {
            let w = MeasurementWindow::single(args.window_s, rate).map_err(validation)?;
            let curve = psd_single(&w).map_err(validation)?;
            let norm = curve.signal[0]; // N^2 T at DC
            (curve, norm)
        }
        SchemeArg::Consecutive => {
            let w = MeasurementWindow::consecutive(args.window_s, args.gap_s, rate)
                .map_err(validation)?;
            let curve = psd_consecutive(&w).map_err(validation)?;
            // Figure normalization: the gap-0 curve's peak is 1.
            let w0 = MeasurementWindow::consecutive(args.window_s, 0.0, rate)
                .map_err(validation)?;
            let base = if args.gap_s == 0.0 {
                curve.clone()
            } else {
                psd_consecutive(&w0).map_err(validation)?
            };
            let norm = peak_and_bandwidth(&base).map_err(validation)?.value;
            (curve, norm)
        }
    };

    let rows = normalized_psd_rows(&curve, args.window_s, norm, noise_scale);
    let mut artifact = Artifact::new(&args.output.out_dir)?;
    {
        let mut w = artifact.writer(&args.out)?;
        writeln!(w, "nu_times_T,signal_normalized,noise_normalized").map_err(io_err)?;
        for (x, s, n) in rows {
            writeln!(w, "{},{},{}", num(x), num(s), num(n)).map_err(io_err)?;
        }
        w.flush().map_err(io_err)?;
    }
    artifact.finish("psd", args.canonical_args(rate), None)
}

#[derive(Debug, Serialize)]
struct ChannelConfigEcho {
    pits: usize,
    levels_per_theta: u32,
    bits_per_pit: u32,
    wavelength_m: f64,
    alpha: f64,
    beta: f64,
    squeeze_signal_db: f64,
    squeeze_reference_db: f64,
    phi_steps: usize,
    noiseless: bool,
    seed: u64,
    trials: u64,
}

#[derive(Debug, Serialize)]
struct ChannelSimOutput {
    config: ChannelConfigEcho,
    report: sim::ChannelReport,
}

pub fn run_channel_sim(args: &ChannelSimArgs) -> Result<(), CliError> {
    let seed = args.seed.expect("clap enforces --seed");
    let code = LevelCode::new(args.levels_per_theta).map_err(validation)?;
    let bpp = code.bits_per_pit().map_err(validation)?;
    if args.trials == 0 {
        return Err(CliError::Validation("trials must be at least 1".into()));
    }

    let track = match &args.track_in {
        Some(path) => {
            let f = File::open(path)
                .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
            let track = Track::<f64>::read(BufReader::new(f)).map_err(validation)?;
            if track.code != code {
                return Err(CliError::Validation(format!(
                    "track file uses levels_per_theta {}, flags say {}",
                    track.code.levels_per_theta(),
                    args.levels_per_theta
                )));
            }
            track
        }
        None => {
            if args.pits == 0 {
                return Err(CliError::Validation("pits must be at least 1".into()));
            }
            sim::generate_track(args.pits, code, args.wavelength_m, seed).map_err(validation)?
        }
    };

    let cfg = ChannelConfig {
        levels_per_theta: args.levels_per_theta,
        wavelength: args.wavelength_m,
        alpha: args.beams.alpha,
        beta: args.beams.beta,
        squeeze_signal_db: args.beams.squeeze_signal_db,
        squeeze_reference_db: args.beams.squeeze_reference_db,
        phi_steps: args.phi_steps,
        noiseless: args.noiseless,
        seed,
        trials: args.trials,
    };
    let report = sim::run_channel(&track, &cfg)?;
    let all_undecidable = report.decided == 0;

    let output = ChannelSimOutput {
        config: ChannelConfigEcho {
            pits: track.pits.len(),
            levels_per_theta: args.levels_per_theta,
            bits_per_pit: bpp,
            wavelength_m: args.wavelength_m,
            alpha: args.beams.alpha,
            beta: args.beams.beta,
            squeeze_signal_db: args.beams.squeeze_signal_db,
            squeeze_reference_db: args.beams.squeeze_reference_db,
            phi_steps: args.phi_steps,
            noiseless: args.noiseless,
            seed,
            trials: args.trials,
        },
        report,
    };

    let mut artifact = Artifact::new(&args.output.out_dir)?;
    {
        let mut w = artifact.writer(&args.out)?;
        serde_json::to_writer_pretty(&mut w, &output).map_err(io_err)?;
        w.write_all(b"\n").map_err(io_err)?;
        w.flush().map_err(io_err)?;
    }
    if let Some(track_out) = &args.track_out {
        let mut w = artifact.writer(track_out)?;
        track.write(&mut w).map_err(io_err)?;
        w.flush().map_err(io_err)?;
    }
    artifact.finish("channel-sim", args.canonical_args(), Some(seed))?;
    if all_undecidable {
        return Err(CliError::Physics(
            "every pit was undecidable: read-out beam too weak for the noise floor".into(),
        ));
    }
    Ok(())
}
