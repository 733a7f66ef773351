//! Command-line surface.
//!
//! Every command also accepts `--config <file>` with `key = value` lines
//! (keys are the long flag names); explicit flags override the file. Each
//! run writes its primary artifact plus a `<artifact>.manifest.json`
//! recording the fully resolved configuration, the tool version and the
//! seed, so `phasecode rerun <manifest>` reproduces it byte for byte.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};

use phasecode::capacity::SqueezeRegime;
use phasecode::encoding::Transform;

#[derive(Debug, Parser)]
#[command(
    name = "phasecode",
    version,
    about = "Split-detector optical phase coding experiments",
    args_override_self = true
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tabulate the photocurrent combinations over a phi scan for one symbol.
    Detect(DetectArgs),
    /// Simulate read-outs of a known symbol and decode them.
    Decode(DecodeArgs),
    /// Sweep beam amplitudes and report SNR, resolvable phase and levels.
    SnrSweep(SnrSweepArgs),
    /// Optimize encodable levels over a photon-budget sweep.
    CapacitySweep(CapacitySweepArgs),
    /// Signal/noise power spectral densities of windowed measurements.
    Psd(PsdArgs),
    /// End-to-end pit stream: encode, read out with shot noise, decode.
    ChannelSim(ChannelSimArgs),
    /// Re-run a command from a run manifest.
    Rerun(RerunArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Detect(_) => "detect",
            Command::Decode(_) => "decode",
            Command::SnrSweep(_) => "snr-sweep",
            Command::CapacitySweep(_) => "capacity-sweep",
            Command::Psd(_) => "psd",
            Command::ChannelSim(_) => "channel-sim",
            Command::Rerun(_) => "rerun",
        }
    }
}

#[derive(Debug, Args)]
pub struct OutputOpts {
    /// Directory artifacts are written into.
    #[arg(long, env = "PHASECODE_OUT_DIR", default_value = ".")]
    pub out_dir: PathBuf,
    /// Key-value config file; explicit flags win.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

impl OutputOpts {
    fn canonical_args(&self, out: &mut Vec<String>) {
        out.push("--out-dir".into());
        out.push(self.out_dir.display().to_string());
    }
}

fn push_flag(out: &mut Vec<String>, name: &str, value: impl fmt::Display) {
    out.push(format!("--{name}"));
    out.push(value.to_string());
}

#[derive(Debug, Args)]
pub struct BeamArgs {
    /// Signal-beam coherent amplitude (sqrt photons per window).
    #[arg(long, default_value_t = 10.0)]
    pub alpha: f64,
    /// Reference-beam coherent amplitude.
    #[arg(long, default_value_t = 10.0)]
    pub beta: f64,
    /// Signal-beam squeezing of the measured quadrature, dB (negative
    /// squeezes; V+ = 10^(dB/10), V- = 1/V+).
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub squeeze_signal_db: f64,
    /// Reference-beam squeezing, dB.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub squeeze_reference_db: f64,
}

impl BeamArgs {
    fn canonical_args(&self, out: &mut Vec<String>) {
        push_flag(out, "alpha", self.alpha);
        push_flag(out, "beta", self.beta);
        push_flag(out, "squeeze-signal-db", self.squeeze_signal_db);
        push_flag(out, "squeeze-reference-db", self.squeeze_reference_db);
    }
}

/// Which detection implementation a scan uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum DetectPath {
    /// Closed-form photocurrent table.
    Analytic,
    /// Half-line integration of the interfered fields on the grid.
    Numerical,
}

impl fmt::Display for DetectPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DetectPath::Analytic => "analytic",
            DetectPath::Numerical => "numerical",
        })
    }
}

#[derive(Debug, Args)]
pub struct DetectArgs {
    /// Transverse transform: plus-u0, minus-u0, plus-uf0, minus-uf0.
    #[arg(long, default_value = "plus-u0", allow_hyphen_values = true)]
    pub transform: Transform,
    /// Longitudinal phase in [0, pi).
    #[arg(long, default_value_t = 0.0)]
    pub theta: f64,
    #[command(flatten)]
    pub beams: BeamArgs,
    /// Number of phi samples on [0, pi).
    #[arg(long, default_value_t = 128)]
    pub phi_steps: usize,
    #[arg(long, value_enum, default_value_t = DetectPath::Analytic)]
    pub path: DetectPath,
    /// Grid points for the numerical path (even).
    #[arg(long, default_value_t = 4096)]
    pub grid_points: usize,
    /// Grid half-width in waists for the numerical path.
    #[arg(long, default_value_t = 8.0)]
    pub grid_half_width: f64,
    /// Output CSV name.
    #[arg(long, default_value = "detect.csv")]
    pub out: String,
    #[command(flatten)]
    pub output: OutputOpts,
}

impl DetectArgs {
    pub fn canonical_args(&self) -> Vec<String> {
        let mut v = Vec::new();
        push_flag(&mut v, "transform", self.transform);
        push_flag(&mut v, "theta", self.theta);
        self.beams.canonical_args(&mut v);
        push_flag(&mut v, "phi-steps", self.phi_steps);
        push_flag(&mut v, "path", self.path);
        push_flag(&mut v, "grid-points", self.grid_points);
        push_flag(&mut v, "grid-half-width", self.grid_half_width);
        push_flag(&mut v, "out", &self.out);
        self.output.canonical_args(&mut v);
        v
    }
}

#[derive(Debug, Args)]
pub struct DecodeArgs {
    #[arg(long, default_value = "plus-u0", allow_hyphen_values = true)]
    pub transform: Transform,
    #[arg(long, default_value_t = 0.3)]
    pub theta: f64,
    #[command(flatten)]
    pub beams: BeamArgs,
    #[arg(long, default_value_t = 64)]
    pub phi_steps: usize,
    /// Add shot noise to every scan sample (requires --seed).
    #[arg(long, requires = "seed")]
    pub noisy: bool,
    /// RNG seed; mandatory for noisy runs.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Independent decode repetitions.
    #[arg(long, default_value_t = 100)]
    pub trials: u64,
    #[arg(long, default_value = "decode_report.json")]
    pub out: String,
    #[command(flatten)]
    pub output: OutputOpts,
}

impl DecodeArgs {
    pub fn canonical_args(&self) -> Vec<String> {
        let mut v = Vec::new();
        push_flag(&mut v, "transform", self.transform);
        push_flag(&mut v, "theta", self.theta);
        self.beams.canonical_args(&mut v);
        push_flag(&mut v, "phi-steps", self.phi_steps);
        if self.noisy {
            v.push("--noisy".into());
        }
        if let Some(seed) = self.seed {
            push_flag(&mut v, "seed", seed);
        }
        push_flag(&mut v, "trials", self.trials);
        push_flag(&mut v, "out", &self.out);
        self.output.canonical_args(&mut v);
        v
    }
}

/// Reference amplitude in a sweep: a number, or `alpha` to track the
/// signal amplitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BetaSpec {
    Fixed(f64),
    EqualAlpha,
}

impl FromStr for BetaSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "alpha" {
            return Ok(BetaSpec::EqualAlpha);
        }
        s.parse::<f64>().map(BetaSpec::Fixed).map_err(|e| format!("bad beta '{s}': {e}"))
    }
}

impl fmt::Display for BetaSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BetaSpec::Fixed(x) => write!(f, "{x}"),
            BetaSpec::EqualAlpha => f.write_str("alpha"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Spacing {
    Linear,
    Log,
}

impl fmt::Display for Spacing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Spacing::Linear => "linear",
            Spacing::Log => "log",
        })
    }
}

impl Spacing {
    pub fn grid(&self, lo: f64, hi: f64, points: usize) -> Vec<f64> {
        if points == 1 {
            return vec![lo];
        }
        (0..points)
            .map(|i| {
                let t = i as f64 / (points - 1) as f64;
                match self {
                    Spacing::Linear => lo + (hi - lo) * t,
                    Spacing::Log => lo * (hi / lo).powf(t),
                }
            })
            .collect()
    }
}

#[derive(Debug, Args)]
pub struct SnrSweepArgs {
    #[arg(long, default_value_t = 1.0)]
    pub alpha_min: f64,
    #[arg(long, default_value_t = 100.0)]
    pub alpha_max: f64,
    #[arg(long, default_value_t = 50)]
    pub steps: usize,
    #[arg(long, value_enum, default_value_t = Spacing::Log)]
    pub spacing: Spacing,
    /// Reference amplitude: a number, or `alpha` to track the signal beam.
    #[arg(long, default_value = "alpha")]
    pub beta: BetaSpec,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub squeeze_signal_db: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub squeeze_reference_db: f64,
    /// Phase difference phi - theta the SNR is evaluated at.
    #[arg(long, default_value_t = std::f64::consts::FRAC_PI_2)]
    pub phi_minus_theta: f64,
    #[arg(long, default_value = "snr_sweep.csv")]
    pub out: String,
    #[command(flatten)]
    pub output: OutputOpts,
}

impl SnrSweepArgs {
    pub fn canonical_args(&self) -> Vec<String> {
        let mut v = Vec::new();
        push_flag(&mut v, "alpha-min", self.alpha_min);
        push_flag(&mut v, "alpha-max", self.alpha_max);
        push_flag(&mut v, "steps", self.steps);
        push_flag(&mut v, "spacing", self.spacing);
        push_flag(&mut v, "beta", self.beta);
        push_flag(&mut v, "squeeze-signal-db", self.squeeze_signal_db);
        push_flag(&mut v, "squeeze-reference-db", self.squeeze_reference_db);
        push_flag(&mut v, "phi-minus-theta", self.phi_minus_theta);
        push_flag(&mut v, "out", &self.out);
        self.output.canonical_args(&mut v);
        v
    }
}

/// Clap-friendly wrapper for the squeeze regime names.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RegimeArg(pub SqueezeRegime);

impl FromStr for RegimeArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(RegimeArg(match s {
            "both_coherent" => SqueezeRegime::BothCoherent,
            "one_squeezed" => SqueezeRegime::OneSqueezed,
            "both_squeezed" => SqueezeRegime::BothSqueezed,
            _ => return Err(format!(
                "unknown regime '{s}' (both_coherent | one_squeezed | both_squeezed)"
            )),
        }))
    }
}

impl fmt::Display for RegimeArg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.0.label())
    }
}

#[derive(Debug, Args)]
pub struct CapacitySweepArgs {
    /// Smallest total photon number per bandwidth-time (both beams).
    #[arg(long, default_value_t = 1.0)]
    pub nbar_min: f64,
    #[arg(long, default_value_t = 100.0)]
    pub nbar_max: f64,
    #[arg(long, default_value_t = 20)]
    pub points: usize,
    #[arg(long, value_enum, default_value_t = Spacing::Log)]
    pub spacing: Spacing,
    /// Comma-separated regimes to sweep.
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "both_coherent,one_squeezed,both_squeezed"
    )]
    pub regimes: Vec<RegimeArg>,
    #[arg(long, default_value = "capacity_sweep.csv")]
    pub out: String,
    #[command(flatten)]
    pub output: OutputOpts,
}

impl CapacitySweepArgs {
    pub fn canonical_args(&self) -> Vec<String> {
        let mut v = Vec::new();
        push_flag(&mut v, "nbar-min", self.nbar_min);
        push_flag(&mut v, "nbar-max", self.nbar_max);
        push_flag(&mut v, "points", self.points);
        push_flag(&mut v, "spacing", self.spacing);
        let regimes: Vec<String> = self.regimes.iter().map(|r| r.to_string()).collect();
        push_flag(&mut v, "regimes", regimes.join(","));
        push_flag(&mut v, "out", &self.out);
        self.output.canonical_args(&mut v);
        v
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum SchemeArg {
    Single,
    Consecutive,
}

impl fmt::Display for SchemeArg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SchemeArg::Single => "single",
            SchemeArg::Consecutive => "consecutive",
        })
    }
}

#[derive(Debug, Args)]
pub struct PsdArgs {
    #[arg(long, value_enum, default_value_t = SchemeArg::Single)]
    pub scheme: SchemeArg,
    /// Measurement window T in seconds.
    #[arg(long, default_value_t = 1e-7)]
    pub window_s: f64,
    /// Gap T' between the two windows (consecutive scheme), seconds.
    #[arg(long, default_value_t = 0.0)]
    pub gap_s: f64,
    /// Detected photon rate N in photons/second. Default: 1/T^2, which puts
    /// the single-scheme noise floor at the DC signal power.
    #[arg(long, conflicts_with = "power_watts")]
    pub photon_rate: Option<f64>,
    /// Alternatively, optical power in watts (with --wavelength-m).
    #[arg(long)]
    pub power_watts: Option<f64>,
    /// Read-out wavelength in meters (used with --power-watts).
    #[arg(long, default_value_t = 1e-6)]
    pub wavelength_m: f64,
    /// Broadband squeezing of the noise floor, dB (negative lowers it).
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub squeeze_db: f64,
    #[arg(long, default_value = "psd.csv")]
    pub out: String,
    #[command(flatten)]
    pub output: OutputOpts,
}

impl PsdArgs {
    pub fn canonical_args(&self, resolved_rate: f64) -> Vec<String> {
        let mut v = Vec::new();
        push_flag(&mut v, "scheme", self.scheme);
        push_flag(&mut v, "window-s", self.window_s);
        push_flag(&mut v, "gap-s", self.gap_s);
        push_flag(&mut v, "photon-rate", resolved_rate);
        push_flag(&mut v, "wavelength-m", self.wavelength_m);
        push_flag(&mut v, "squeeze-db", self.squeeze_db);
        push_flag(&mut v, "out", &self.out);
        self.output.canonical_args(&mut v);
        v
    }
}

#[derive(Debug, Args)]
pub struct ChannelSimArgs {
    /// Number of pits to generate (ignored when --track-in is given).
    #[arg(long, default_value_t = 10000)]
    pub pits: usize,
    /// Theta levels per transverse symbol (power of two).
    #[arg(long, default_value_t = 16)]
    pub levels_per_theta: u32,
    #[arg(long, default_value_t = 1e-6)]
    pub wavelength_m: f64,
    #[command(flatten)]
    pub beams: BeamArgs,
    #[arg(long, default_value_t = 64)]
    pub phi_steps: usize,
    /// Disable shot noise (the seed still drives the payload bits).
    #[arg(long)]
    pub noiseless: bool,
    /// RNG seed for payload and shot noise.
    #[arg(long, required = true)]
    pub seed: Option<u64>,
    /// Whole-track repetitions accumulated into one report.
    #[arg(long, default_value_t = 1)]
    pub trials: u64,
    /// Read the pit sequence from a track file instead of generating one.
    #[arg(long)]
    pub track_in: Option<PathBuf>,
    /// Also write the simulated track to this file (inside --out-dir).
    #[arg(long)]
    pub track_out: Option<String>,
    #[arg(long, default_value = "channel_report.json")]
    pub out: String,
    #[command(flatten)]
    pub output: OutputOpts,
}

impl ChannelSimArgs {
    pub fn canonical_args(&self) -> Vec<String> {
        let mut v = Vec::new();
        push_flag(&mut v, "pits", self.pits);
        push_flag(&mut v, "levels-per-theta", self.levels_per_theta);
        push_flag(&mut v, "wavelength-m", self.wavelength_m);
        self.beams.canonical_args(&mut v);
        push_flag(&mut v, "phi-steps", self.phi_steps);
        if self.noiseless {
            v.push("--noiseless".into());
        }
        push_flag(&mut v, "seed", self.seed.expect("seed is required"));
        push_flag(&mut v, "trials", self.trials);
        if let Some(p) = &self.track_in {
            push_flag(&mut v, "track-in", p.display());
        }
        if let Some(p) = &self.track_out {
            push_flag(&mut v, "track-out", p);
        }
        push_flag(&mut v, "out", &self.out);
        self.output.canonical_args(&mut v);
        v
    }
}

#[derive(Debug, Args)]
pub struct RerunArgs {
    /// Path to a `*.manifest.json` written by a previous run.
    pub manifest: PathBuf,
}
