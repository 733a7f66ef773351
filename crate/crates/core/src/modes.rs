//! One-dimensional transverse mode basis for split detection.
//!
//! The natural basis for a two-segment detector is the fundamental mode
//! u₀(x) together with its flipped counterpart u_f0(x), equal to +u₀ for
//! x > 0 and −u₀ for x < 0. Every photocurrent in the read-out scheme
//! reduces to overlap integrals of these profiles over the full line or
//! one half-line, so the grid is built so that those three integrals share
//! one set of quadrature weights.

use std::io::{self, Write};

use thiserror::Error;

use crate::Real;

#[derive(Debug, Error, PartialEq)]
pub enum ModeError {
    #[error("grid half-width must be positive and finite, got {0}")]
    BadHalfWidth(f64),
    #[error("grid needs an even point count of at least 16, got {0}")]
    BadPointCount(usize),
    #[error(
        "grid too narrow for this waist: spans {span_waists:.2} waists, \
         normalization defect {defect:.3e} (limit 1e-6)"
    )]
    GridTooNarrow { span_waists: f64, defect: f64 },
    #[error("waist must be positive and finite, got {0}")]
    BadWaist(f64),
    #[error("mode is already flipped")]
    AlreadyFlipped,
    #[error("modes live on different grids")]
    GridMismatch,
}

/// Integration region of an overlap integral, split at the detector
/// boundary x = 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Region {
    Full,
    /// x < 0 segment.
    NegativeHalf,
    /// x > 0 segment.
    PositiveHalf,
}

/// Uniform symmetric grid on [−half_width, +half_width] in waist units.
///
/// The point count is even, so no sample ever sits on the split boundary
/// x = 0 and every sample has an exact mirror partner: `x(n-1-i) == -x(i)`
/// bit for bit. Integrals use composite-trapezoid weights; half-line
/// integrals are masked sums with the same weights, which makes
/// `full == negative_half + positive_half` hold by construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpatialGrid<F> {
    half_width: F,
    n_points: usize,
    spacing: F,
}

impl<F: Real> SpatialGrid<F> {
    pub fn new(half_width: F, n_points: usize) -> Result<Self, ModeError> {
        if !(half_width.is_finite() && half_width > F::zero()) {
            return Err(ModeError::BadHalfWidth(half_width.to_f64().unwrap_or(f64::NAN)));
        }
        if n_points < 16 || n_points % 2 != 0 {
            return Err(ModeError::BadPointCount(n_points));
        }
        let spacing = (half_width + half_width) / F::from_usize(n_points - 1).unwrap();
        Ok(Self { half_width, n_points, spacing })
    }

    /// ±8 waists, 4096 points. The fundamental mode normalizes on this grid
    /// to a defect of a few 1e-15.
    pub fn default_grid() -> Self {
        Self::new(F::lit(8.0), 4096).expect("default grid parameters are valid")
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn half_width(&self) -> F {
        self.half_width
    }

    pub fn spacing(&self) -> F {
        self.spacing
    }

    /// Sample abscissa. Evaluated as half_width·k/(n−1) with the odd
    /// integer k = 2i−(n−1), so mirrored indices give exactly negated x.
    pub fn x(&self, i: usize) -> F {
        debug_assert!(i < self.n_points);
        let k = 2 * i as i64 - (self.n_points as i64 - 1);
        self.half_width * F::from_i64(k).unwrap() / F::from_usize(self.n_points - 1).unwrap()
    }

    /// Trapezoid weight of sample `i`.
    pub fn weight(&self, i: usize) -> F {
        debug_assert!(i < self.n_points);
        if i == 0 || i == self.n_points - 1 {
            self.spacing * F::lit(0.5)
        } else {
            self.spacing
        }
    }

    /// Index range of the x < 0 samples.
    pub fn negative_indices(&self) -> std::ops::Range<usize> {
        0..self.n_points / 2
    }

    /// Index range of the x > 0 samples.
    pub fn positive_indices(&self) -> std::ops::Range<usize> {
        self.n_points / 2..self.n_points
    }

    fn weighted_sum(&self, a: &[F], b: &[F], idx: std::ops::Range<usize>) -> F {
        let mut acc = F::zero();
        for i in idx {
            acc += self.weight(i) * a[i] * b[i];
        }
        acc
    }
}

/// Normalized transverse amplitude profile sampled on a [`SpatialGrid`].
#[derive(Debug, Clone)]
pub struct TransverseMode<F> {
    grid: SpatialGrid<F>,
    order: u32,
    flipped: bool,
    waist: F,
    samples: Vec<F>,
}

impl<F: Real> TransverseMode<F> {
    pub fn grid(&self) -> &SpatialGrid<F> {
        &self.grid
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn flipped(&self) -> bool {
        self.flipped
    }

    pub fn waist(&self) -> F {
        self.waist
    }

    pub fn amplitude(&self) -> &[F] {
        &self.samples
    }

    /// Write the profile as `x,amplitude` CSV rows for plotting.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "x,amplitude")?;
        for i in 0..self.grid.n_points() {
            writeln!(out, "{},{}", self.grid.x(i), self.samples[i])?;
        }
        Ok(())
    }
}

/// Fundamental mode u₀(x) = (2/π)^¼ w^{−½} exp(−x²/w²), renormalized on the
/// grid after sampling.
pub fn make_tem00<F: Real>(grid: &SpatialGrid<F>, waist: F) -> Result<TransverseMode<F>, ModeError> {
    make_hermite_gauss(grid, waist, 0)
}

/// Hermite–Gauss mode of the given order. Only order 0 carries signal in the
/// read-out scheme; higher orders are exposed for noise-mode bookkeeping.
pub fn make_hermite_gauss<F: Real>(
    grid: &SpatialGrid<F>,
    waist: F,
    order: u32,
) -> Result<TransverseMode<F>, ModeError> {
    if !(waist.is_finite() && waist > F::zero()) {
        return Err(ModeError::BadWaist(waist.to_f64().unwrap_or(f64::NAN)));
    }
    let n = grid.n_points();
    let mut samples = Vec::with_capacity(n);
    let norm0 = F::lit(2.0 / std::f64::consts::PI).powf(F::lit(0.25)) / waist.sqrt();
    // (2^n n!)^(-1/2) factor of the Hermite normalization.
    let mut fact = F::one();
    for k in 1..=order {
        fact *= F::lit(2.0) * F::from_u32(k).unwrap();
    }
    let norm = norm0 / fact.sqrt();
    for i in 0..n {
        let x = grid.x(i) / waist;
        let xi = F::SQRT_2() * x;
        samples.push(norm * hermite(order, xi) * (-x * x).exp());
    }

    let norm_sq = grid.weighted_sum(&samples, &samples, 0..n);
    let defect = (norm_sq - F::one()).abs();
    let span_waists = grid.half_width() / waist;
    if span_waists < F::lit(5.0) || defect > F::lit(1e-6) {
        return Err(ModeError::GridTooNarrow {
            span_waists: span_waists.to_f64().unwrap_or(f64::NAN),
            defect: defect.to_f64().unwrap_or(f64::NAN),
        });
    }
    let scale = norm_sq.sqrt().recip();
    for s in &mut samples {
        *s *= scale;
    }
    Ok(TransverseMode { grid: *grid, order, flipped: false, waist, samples })
}

fn hermite<F: Real>(order: u32, xi: F) -> F {
    let mut h_prev = F::one();
    if order == 0 {
        return h_prev;
    }
    let two = F::lit(2.0);
    let mut h = two * xi;
    for k in 1..order {
        let next = two * xi * h - two * F::from_u32(k).unwrap() * h_prev;
        h_prev = h;
        h = next;
    }
    h
}

/// Flip the sign of the profile for x < 0, turning u_n into u_fn.
pub fn make_flipped<F: Real>(mode: &TransverseMode<F>) -> Result<TransverseMode<F>, ModeError> {
    if mode.flipped {
        return Err(ModeError::AlreadyFlipped);
    }
    let mut samples = mode.samples.clone();
    for i in mode.grid.negative_indices() {
        samples[i] = -samples[i];
    }
    Ok(TransverseMode { flipped: true, samples, ..*mode })
}

/// ∫_region a(x)·b(x) dx with the grid's quadrature weights. The full-line
/// value is the exact sum of the two half-line values.
pub fn overlap<F: Real>(
    a: &TransverseMode<F>,
    b: &TransverseMode<F>,
    region: Region,
) -> Result<F, ModeError> {
    if a.grid != b.grid {
        return Err(ModeError::GridMismatch);
    }
    let g = &a.grid;
    let value = match region {
        Region::NegativeHalf => g.weighted_sum(&a.samples, &b.samples, g.negative_indices()),
        Region::PositiveHalf => g.weighted_sum(&a.samples, &b.samples, g.positive_indices()),
        Region::Full => {
            g.weighted_sum(&a.samples, &b.samples, g.negative_indices())
                + g.weighted_sum(&a.samples, &b.samples, g.positive_indices())
        }
    };
    Ok(value)
}
