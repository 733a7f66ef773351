//! Symbol alphabet and the optical-disc pit model.
//!
//! A stored symbol is one of four transverse transformations of the read-out
//! beam together with a longitudinal phase θ ∈ [0, π):
//!
//! ```text
//! (1)  u0 -> +e^{iθ} u0      (2)  u0 -> -e^{iθ} u0
//! (3)  u0 -> +e^{iθ} uf0     (4)  u0 -> -e^{iθ} uf0
//! ```
//!
//! θ and the transform sign are aliased: (+, θ+π) describes the same field
//! as (−, θ), which is why θ is kept strictly inside [0, π) and the sign bit
//! carries the rest. On a disc, θ comes from the pit depth through the
//! round-trip phase 2·(2π·depth/λ), while the transverse profile comes from
//! the pit's cross-track shape and its orientation.

use std::fmt;
use std::io::{self, BufRead, Write};
use std::str::FromStr;

use num_complex::Complex;
use thiserror::Error;

use crate::modes::{SpatialGrid, TransverseMode};
use crate::Real;

#[derive(Debug, Error, PartialEq)]
pub enum EncodingError {
    #[error("theta must lie in [0, pi), got {0}")]
    ThetaOutOfRange(f64),
    #[error("pit depth must lie in [0, lambda/2], got depth {depth} for lambda {lambda}")]
    DepthOutOfRange { depth: f64, lambda: f64 },
    #[error("wavelength must be positive and finite, got {0}")]
    BadWavelength(f64),
    #[error("levels_per_theta must be a positive power of two for bit packing, got {0}")]
    LevelsNotPowerOfTwo(u32),
    #[error("levels_per_theta must be at least 1")]
    ZeroLevels,
    #[error("track file parse error on line {line}: {reason}")]
    TrackParse { line: usize, reason: String },
    #[error("track i/o: {0}")]
    TrackIo(String),
}

impl From<io::Error> for EncodingError {
    fn from(e: io::Error) -> Self {
        EncodingError::TrackIo(e.to_string())
    }
}

/// The four transverse phase-front transformations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Transform {
    PlusU0,
    MinusU0,
    PlusUf0,
    MinusUf0,
}

impl Transform {
    pub const ALL: [Transform; 4] =
        [Transform::PlusU0, Transform::MinusU0, Transform::PlusUf0, Transform::MinusUf0];

    /// True for the ±u_f0 profiles.
    pub fn is_flipped(self) -> bool {
        matches!(self, Transform::PlusUf0 | Transform::MinusUf0)
    }

    /// +1 or −1 front factor.
    pub fn sign<F: Real>(self) -> F {
        match self {
            Transform::PlusU0 | Transform::PlusUf0 => F::one(),
            Transform::MinusU0 | Transform::MinusUf0 => -F::one(),
        }
    }

    pub fn index(self) -> u8 {
        match self {
            Transform::PlusU0 => 0,
            Transform::MinusU0 => 1,
            Transform::PlusUf0 => 2,
            Transform::MinusUf0 => 3,
        }
    }

    pub fn from_index(i: u8) -> Option<Self> {
        Some(match i {
            0 => Transform::PlusU0,
            1 => Transform::MinusU0,
            2 => Transform::PlusUf0,
            3 => Transform::MinusUf0,
            _ => return None,
        })
    }

    fn from_parts(flipped: bool, negative: bool) -> Self {
        match (flipped, negative) {
            (false, false) => Transform::PlusU0,
            (false, true) => Transform::MinusU0,
            (true, false) => Transform::PlusUf0,
            (true, true) => Transform::MinusUf0,
        }
    }
}

impl fmt::Display for Transform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Transform::PlusU0 => "+u0",
            Transform::MinusU0 => "-u0",
            Transform::PlusUf0 => "+uf0",
            Transform::MinusUf0 => "-uf0",
        };
        f.write_str(s)
    }
}

impl FromStr for Transform {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "+u0" | "plus-u0" => Transform::PlusU0,
            "-u0" | "minus-u0" => Transform::MinusU0,
            "+uf0" | "plus-uf0" => Transform::PlusUf0,
            "-uf0" | "minus-uf0" => Transform::MinusUf0,
            _ => return Err(format!("unknown transform '{s}' (expected +u0, -u0, +uf0, -uf0)")),
        })
    }
}

/// One stored symbol: a transverse transform plus a longitudinal phase.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseSymbol<F> {
    transform: Transform,
    theta: F,
}

impl<F: Real> PhaseSymbol<F> {
    pub fn new(transform: Transform, theta: F) -> Result<Self, EncodingError> {
        if !(theta >= F::zero() && theta < F::PI()) {
            return Err(EncodingError::ThetaOutOfRange(theta.to_f64().unwrap_or(f64::NAN)));
        }
        Ok(Self { transform, theta })
    }

    /// Fold an arbitrary phase into [0, π), moving each odd π step into
    /// the transform sign: (s, θ+π) ≡ (−s, θ).
    pub fn canonical(transform: Transform, theta: F) -> Self {
        let two_pi = F::PI() + F::PI();
        let mut t = theta % two_pi;
        if t < F::zero() {
            t += two_pi;
        }
        let mut tr = transform;
        if t >= F::PI() {
            t -= F::PI();
            tr = Transform::from_parts(tr.is_flipped(), tr.sign::<F>() > F::zero());
        }
        // Guard against t == pi after rounding of the subtraction above.
        if t >= F::PI() {
            t = F::zero();
        }
        Self { transform: tr, theta: t }
    }

    pub fn transform(&self) -> Transform {
        self.transform
    }

    pub fn theta(&self) -> F {
        self.theta
    }

    /// Position on the detectable phase circle of this symbol's shape:
    /// ζ = θ for + transforms, θ + π for − transforms, in [0, 2π).
    pub fn zeta(&self) -> F {
        if self.transform.sign::<F>() > F::zero() {
            self.theta
        } else {
            self.theta + F::PI()
        }
    }
}

/// Unit-power complex field profile: e^{iθ}·(±u₀ or ±u_f0), to be scaled
/// by the beam amplitude.
#[derive(Debug, Clone)]
pub struct FieldProfile<F> {
    grid: SpatialGrid<F>,
    samples: Vec<Complex<F>>,
}

impl<F: Real> FieldProfile<F> {
    pub fn grid(&self) -> &SpatialGrid<F> {
        &self.grid
    }

    pub fn samples(&self) -> &[Complex<F>] {
        &self.samples
    }

    /// ∫ |field|² dx over the grid.
    pub fn power(&self) -> F {
        let mut neg = F::zero();
        let mut pos = F::zero();
        for i in self.grid.negative_indices() {
            neg += self.grid.weight(i) * self.samples[i].norm_sqr();
        }
        for i in self.grid.positive_indices() {
            pos += self.grid.weight(i) * self.samples[i].norm_sqr();
        }
        neg + pos
    }
}

/// Apply a symbol's transformation to the TEM₀₀ read-out profile.
///
/// The input must be the unflipped fundamental mode; the flip, the sign and
/// the longitudinal phase factor all come from the symbol. The
/// transformation is lossless, so the output power equals the input norm.
pub fn apply_transform<F: Real>(
    mode: &TransverseMode<F>,
    symbol: &PhaseSymbol<F>,
) -> FieldProfile<F> {
    debug_assert!(!mode.flipped(), "apply_transform expects the base TEM00 profile");
    let grid = *mode.grid();
    let phase = Complex::new(symbol.theta.cos(), symbol.theta.sin()) * symbol.transform.sign::<F>();
    let flip = symbol.transform.is_flipped();
    let samples = (0..grid.n_points())
        .map(|i| {
            let mut a = mode.amplitude()[i];
            if flip && i < grid.n_points() / 2 {
                a = -a;
            }
            phase * a
        })
        .collect();
    FieldProfile { grid, samples }
}

/// Cross-track profile of a pit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PitShape {
    /// Uniform depth: reflects ±u₀.
    Flat,
    /// Half the track recessed by λ/4: reflects ±u_f0.
    HalfStep,
}

impl fmt::Display for PitShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PitShape::Flat => "flat",
            PitShape::HalfStep => "half-step",
        })
    }
}

/// Sign orientation of a pit: which of the two profile signs it produces.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    Positive,
    Negative,
}

impl fmt::Display for Orientation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Orientation::Positive => "+",
            Orientation::Negative => "-",
        })
    }
}

/// Geometry of one pit. Depth is a length in the same unit as `wavelength`
/// and is restricted to [0, λ/2] (one full round-trip period).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PitSpec<F> {
    pub depth: F,
    pub shape: PitShape,
    pub orientation: Orientation,
    pub wavelength: F,
}

impl<F: Real> PitSpec<F> {
    pub fn new(
        depth: F,
        shape: PitShape,
        orientation: Orientation,
        wavelength: F,
    ) -> Result<Self, EncodingError> {
        if !(wavelength.is_finite() && wavelength > F::zero()) {
            return Err(EncodingError::BadWavelength(wavelength.to_f64().unwrap_or(f64::NAN)));
        }
        if !(depth >= F::zero() && depth <= wavelength / F::lit(2.0)) {
            return Err(EncodingError::DepthOutOfRange {
                depth: depth.to_f64().unwrap_or(f64::NAN),
                lambda: wavelength.to_f64().unwrap_or(f64::NAN),
            });
        }
        Ok(Self { depth, shape, orientation, wavelength })
    }
}

/// Read a pit: the round-trip phase is twice the single-pass 2π·depth/λ
/// (reflection doubles the path), folded modulo π; the transform comes from
/// the fixed (shape, orientation) lookup.
pub fn pit_to_symbol<F: Real>(pit: &PitSpec<F>) -> PhaseSymbol<F> {
    let raw = F::lit(4.0) * F::PI() * pit.depth / pit.wavelength;
    let theta = raw % F::PI();
    let transform = Transform::from_parts(
        pit.shape == PitShape::HalfStep,
        pit.orientation == Orientation::Negative,
    );
    PhaseSymbol { transform, theta }
}

/// Inverse of [`pit_to_symbol`] on canonical pits: depth = θλ/(4π) ∈ [0, λ/4).
pub fn symbol_to_pit<F: Real>(symbol: &PhaseSymbol<F>, wavelength: F) -> PitSpec<F> {
    let depth = symbol.theta * wavelength / (F::lit(4.0) * F::PI());
    PitSpec {
        depth,
        shape: if symbol.transform.is_flipped() { PitShape::HalfStep } else { PitShape::Flat },
        orientation: if symbol.transform.sign::<F>() > F::zero() {
            Orientation::Positive
        } else {
            Orientation::Negative
        },
        wavelength,
    }
}

/// Level budget of a track: 4 transverse symbols × a uniform θ grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LevelCode {
    levels_per_theta: u32,
}

impl LevelCode {
    pub fn new(levels_per_theta: u32) -> Result<Self, EncodingError> {
        if levels_per_theta == 0 {
            return Err(EncodingError::ZeroLevels);
        }
        Ok(Self { levels_per_theta })
    }

    pub fn levels_per_theta(&self) -> u32 {
        self.levels_per_theta
    }

    pub fn total_levels(&self) -> u32 {
        4 * self.levels_per_theta
    }

    /// Bits packed into one pit; requires a power-of-two θ grid.
    pub fn bits_per_pit(&self) -> Result<u32, EncodingError> {
        if !self.levels_per_theta.is_power_of_two() {
            return Err(EncodingError::LevelsNotPowerOfTwo(self.levels_per_theta));
        }
        Ok(self.total_levels().trailing_zeros())
    }

    /// Combined level index: transform index times the θ grid plus θ level.
    pub fn level_of(&self, transform: Transform, theta_level: u32) -> u32 {
        debug_assert!(theta_level < self.levels_per_theta);
        u32::from(transform.index()) * self.levels_per_theta + theta_level
    }

    pub fn split_level(&self, level: u32) -> (Transform, u32) {
        debug_assert!(level < self.total_levels());
        let t = Transform::from_index((level / self.levels_per_theta) as u8).unwrap();
        (t, level % self.levels_per_theta)
    }
}

/// Uniform quantizer over [0, π): index = floor(θ·levels/π), clamped.
/// Monotone nondecreasing in θ.
pub fn quantize_theta<F: Real>(theta: F, levels_per_theta: u32) -> u32 {
    debug_assert!(levels_per_theta >= 1);
    let scaled = theta * F::from_u32(levels_per_theta).unwrap() / F::PI();
    let idx = scaled.floor().to_i64().unwrap_or(0).max(0) as u32;
    idx.min(levels_per_theta - 1)
}

/// Center of the quantization cell: θ = (index + ½)·π/levels.
pub fn theta_of_level<F: Real>(index: u32, levels_per_theta: u32) -> F {
    debug_assert!(index < levels_per_theta);
    (F::from_u32(index).unwrap() + F::lit(0.5)) * F::PI() / F::from_u32(levels_per_theta).unwrap()
}

/// A serialized sequence of pits plus everything needed to decode it.
#[derive(Debug, Clone, PartialEq)]
pub struct Track<F> {
    pub wavelength: F,
    pub code: LevelCode,
    /// Number of payload bits before zero-padding to a whole pit.
    pub payload_bits: usize,
    pub pits: Vec<PitSpec<F>>,
}

/// Pack a bitstream into pits, log₂(total_levels) bits per pit, big-endian
/// by pit order (the first bit of the stream is the most significant bit of
/// the first pit's level index). The tail is zero-padded; the payload length
/// is recorded in the track header so decoding can strip the pad.
pub fn bits_to_track<F: Real>(
    bits: &[bool],
    code: LevelCode,
    wavelength: F,
) -> Result<Track<F>, EncodingError> {
    let bpp = code.bits_per_pit()? as usize;
    if !(wavelength.is_finite() && wavelength > F::zero()) {
        return Err(EncodingError::BadWavelength(wavelength.to_f64().unwrap_or(f64::NAN)));
    }
    let n_pits = bits.len().div_ceil(bpp);
    let mut pits = Vec::with_capacity(n_pits);
    for p in 0..n_pits {
        let mut level: u32 = 0;
        for k in 0..bpp {
            let bit = bits.get(p * bpp + k).copied().unwrap_or(false);
            level = (level << 1) | u32::from(bit);
        }
        let (transform, theta_level) = code.split_level(level);
        let theta = theta_of_level::<F>(theta_level, code.levels_per_theta());
        let symbol = PhaseSymbol { transform, theta };
        pits.push(symbol_to_pit(&symbol, wavelength));
    }
    Ok(Track { wavelength, code, payload_bits: bits.len(), pits })
}

/// Noise-free decode of a track back into its payload bits.
pub fn track_to_bits<F: Real>(track: &Track<F>) -> Result<Vec<bool>, EncodingError> {
    let bpp = track.code.bits_per_pit()? as usize;
    let mut bits = Vec::with_capacity(track.pits.len() * bpp);
    for pit in &track.pits {
        let symbol = pit_to_symbol(pit);
        let theta_level = quantize_theta(symbol.theta(), track.code.levels_per_theta());
        let level = track.code.level_of(symbol.transform(), theta_level);
        for k in (0..bpp).rev() {
            bits.push(level >> k & 1 == 1);
        }
    }
    bits.truncate(track.payload_bits);
    Ok(bits)
}

const TRACK_MAGIC: &str = "phasecode-track v1";

impl<F: Real> Track<F> {
    /// Line-oriented text format:
    ///
    /// ```text
    /// phasecode-track v1
    /// wavelength <float>
    /// levels_per_theta <int>
    /// payload_bits <int>
    /// pits <int>
    /// <depth> <shape> <orientation>     one line per pit
    /// ```
    ///
    /// Floats are written in shortest round-trip form, so write → read is
    /// bit-exact.
    pub fn write<W: Write>(&self, mut out: W) -> Result<(), EncodingError> {
        writeln!(out, "{TRACK_MAGIC}")?;
        writeln!(out, "wavelength {}", self.wavelength)?;
        writeln!(out, "levels_per_theta {}", self.code.levels_per_theta())?;
        writeln!(out, "payload_bits {}", self.payload_bits)?;
        writeln!(out, "pits {}", self.pits.len())?;
        for p in &self.pits {
            writeln!(out, "{} {} {}", p.depth, p.shape, p.orientation)?;
        }
        Ok(())
    }

    pub fn read<R: BufRead>(input: R) -> Result<Self, EncodingError> {
        let parse_err = |line: usize, reason: &str| EncodingError::TrackParse {
            line,
            reason: reason.to_string(),
        };
        let mut lines = input.lines().enumerate();
        let mut next = |expect: &str| -> Result<(usize, String), EncodingError> {
            match lines.next() {
                Some((i, Ok(l))) => Ok((i + 1, l)),
                Some((i, Err(e))) => Err(parse_err(i + 1, &e.to_string())),
                None => Err(parse_err(0, &format!("missing {expect}"))),
            }
        };

        let (ln, magic) = next("header")?;
        if magic.trim() != TRACK_MAGIC {
            return Err(parse_err(ln, "bad magic line"));
        }
        let mut field = |name: &str| -> Result<(usize, String), EncodingError> {
            let (ln, l) = next(name)?;
            let mut it = l.split_whitespace();
            match (it.next(), it.next()) {
                (Some(k), Some(v)) if k == name => Ok((ln, v.to_string())),
                _ => Err(parse_err(ln, &format!("expected '{name} <value>'"))),
            }
        };
        let (ln, wl) = field("wavelength")?;
        let wavelength = wl
            .parse::<f64>()
            .map_err(|e| parse_err(ln, &e.to_string()))
            .map(F::lit)?;
        let (ln, lv) = field("levels_per_theta")?;
        let code = LevelCode::new(lv.parse().map_err(|_| parse_err(ln, "bad integer"))?)?;
        let (ln, pb) = field("payload_bits")?;
        let payload_bits = pb.parse().map_err(|_| parse_err(ln, "bad integer"))?;
        let (ln, np) = field("pits")?;
        let n_pits: usize = np.parse().map_err(|_| parse_err(ln, "bad integer"))?;

        let mut pits = Vec::with_capacity(n_pits);
        for _ in 0..n_pits {
            let (ln, l) = next("pit record")?;
            let mut it = l.split_whitespace();
            let depth = it
                .next()
                .ok_or_else(|| parse_err(ln, "missing depth"))?
                .parse::<f64>()
                .map_err(|e| parse_err(ln, &e.to_string()))
                .map(F::lit)?;
            let shape = match it.next() {
                Some("flat") => PitShape::Flat,
                Some("half-step") => PitShape::HalfStep,
                _ => return Err(parse_err(ln, "bad shape (flat | half-step)")),
            };
            let orientation = match it.next() {
                Some("+") => Orientation::Positive,
                Some("-") => Orientation::Negative,
                _ => return Err(parse_err(ln, "bad orientation (+ | -)")),
            };
            pits.push(PitSpec::new(depth, shape, orientation, wavelength)?);
        }
        Ok(Track { wavelength, code, payload_bits, pits })
    }
}
