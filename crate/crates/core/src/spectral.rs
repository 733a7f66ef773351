//! Signal and noise power spectral densities of windowed disc read-out.
//!
//! A static read-out integrates N photons/s over one top-hat window of
//! length T; the Wiener–Khinchine relation turns the DC signal line into
//! a sinc² lobe, S₁(ν) = N²T·sinc²(πTν), over a white shot-noise floor
//! N₁ = N/T. Differencing two consecutive windows (lengths T, gap T′)
//! rejects DC and moves the signal power up to ν ≈ 0.37/T (T′ = 0); the
//! transfer factor averaged over the carrier phase Θ reduces to
//!
//! ```text
//! eta2(nu) = 4 sin²(πνT) sin²(πν(T+T′)) / (πνT)²
//! ```
//!
//! normalized here so the single-window scheme has eta1(ν) = sinc²(πνT)
//! under the same Θ-average, making S_scheme(ν) = N²T·eta_scheme(ν)
//! directly comparable between the two schemes. The consecutive noise
//! floor is 2N/T: two independent windows.

use thiserror::Error;

use crate::Real;

#[derive(Debug, Error, PartialEq)]
pub enum SpectralError {
    #[error("window length must be positive, got {0}")]
    BadWindow(f64),
    #[error("gap must be nonnegative, got {0}")]
    BadGap(f64),
    #[error("photon rate must be nonnegative, got {0}")]
    BadRate(f64),
    #[error("operation needs scheme {expected}, window has {actual}")]
    WrongScheme { expected: &'static str, actual: &'static str },
    #[error("band [{lo}, {hi}] is not inside the curve's frequency range")]
    BandOutOfRange { lo: f64, hi: f64 },
    #[error("bandwidth must be nonnegative, got {0}")]
    BadBandwidth(f64),
    #[error("curve has no strict interior peak")]
    NoInteriorPeak,
    #[error("half-maximum crossing not bracketed by the curve's grid")]
    HalfMaxNotBracketed,
    #[error("curve needs at least 8 samples, got {0}")]
    CurveTooShort(usize),
}

/// Measurement scheme of a window configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    Single,
    ConsecutiveDifference,
}

impl Scheme {
    fn label(&self) -> &'static str {
        match self {
            Scheme::Single => "single",
            Scheme::ConsecutiveDifference => "consecutive_difference",
        }
    }
}

/// Top-hat measurement window(s): length T seconds, gap T′ (consecutive
/// scheme only), photon rate N per second.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasurementWindow<F> {
    window: F,
    gap: F,
    photon_rate: F,
    scheme: Scheme,
}

impl<F: Real> MeasurementWindow<F> {
    pub fn single(window: F, photon_rate: F) -> Result<Self, SpectralError> {
        Self::new(window, F::zero(), photon_rate, Scheme::Single)
    }

    pub fn consecutive(window: F, gap: F, photon_rate: F) -> Result<Self, SpectralError> {
        Self::new(window, gap, photon_rate, Scheme::ConsecutiveDifference)
    }

    pub fn new(window: F, gap: F, photon_rate: F, scheme: Scheme) -> Result<Self, SpectralError> {
        if !(window.is_finite() && window > F::zero()) {
            return Err(SpectralError::BadWindow(window.to_f64().unwrap_or(f64::NAN)));
        }
        if !(gap.is_finite() && gap >= F::zero()) {
            return Err(SpectralError::BadGap(gap.to_f64().unwrap_or(f64::NAN)));
        }
        if !(photon_rate.is_finite() && photon_rate >= F::zero()) {
            return Err(SpectralError::BadRate(photon_rate.to_f64().unwrap_or(f64::NAN)));
        }
        Ok(Self { window, gap, photon_rate, scheme })
    }

    pub fn window(&self) -> F {
        self.window
    }

    pub fn gap(&self) -> F {
        self.gap
    }

    pub fn photon_rate(&self) -> F {
        self.photon_rate
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    /// Default frequency grid: 4096 uniform samples on [0, 4/T]. The PSDs
    /// are double-sided and even in ν, so only ν ≥ 0 is tabulated.
    pub fn default_nu_grid(&self) -> Vec<F> {
        let n = 4096;
        let top = F::lit(4.0) / self.window;
        (0..n).map(|i| top * F::from_usize(i).unwrap() / F::from_usize(n - 1).unwrap()).collect()
    }
}

/// Sampled double-sided PSD pair over sideband frequency ν ≥ 0.
#[derive(Debug, Clone, PartialEq)]
pub struct PsdCurve<F> {
    pub nu: Vec<F>,
    pub signal: Vec<F>,
    pub noise: Vec<F>,
}

fn sinc<F: Real>(x: F) -> F {
    if x.abs() < F::lit(1e-30) {
        F::one()
    } else {
        x.sin() / x
    }
}

/// Single-measurement signal PSD, N²T·sinc²(πTν).
pub fn signal_psd_single<F: Real>(window: &MeasurementWindow<F>, nu: F) -> F {
    let n = window.photon_rate;
    let t = window.window;
    let s = sinc(F::PI() * t * nu);
    n * n * t * s * s
}

/// Single-measurement noise PSD: white, N/T.
pub fn noise_psd_single<F: Real>(window: &MeasurementWindow<F>) -> F {
    window.photon_rate / window.window
}

/// Closed-form window transfer factor of the consecutive difference,
/// 4 sin²(πνT) sin²(πν(T+T′)) / (πνT)². Even in ν and zero at DC.
pub fn eta2_closed_form<F: Real>(window: &MeasurementWindow<F>, nu: F) -> F {
    let x = F::PI() * nu * window.window;
    if x.abs() < F::lit(1e-30) {
        return F::zero();
    }
    let y = F::PI() * nu * (window.window + window.gap);
    let sx = x.sin();
    let sy = y.sin();
    F::lit(4.0) * sx * sx * sy * sy / (x * x)
}

/// The same transfer factor computed the direct way: difference of the two
/// window integrals of a unit sine at frequency ν, squared and averaged
/// over a uniform grid of initial phases Θ, normalized so that the
/// single-window factor evaluates to 1 at DC.
pub fn eta2_theta_average<F: Real>(window: &MeasurementWindow<F>, nu: F, n_phases: usize) -> F {
    let t = window.window;
    let tp = window.gap;
    let omega = F::lit(2.0) * F::PI() * nu;
    if omega.abs() < F::lit(1e-30) {
        return F::zero();
    }
    // One window integral: int_a^b sin(omega t + Theta) dt
    //   = (cos(omega a + Theta) - cos(omega b + Theta)) / omega.
    let window_integral = |a: F, b: F, theta: F| -> F {
        ((omega * a + theta).cos() - (omega * b + theta).cos()) / omega
    };
    let mut acc = F::zero();
    let np = F::from_usize(n_phases).unwrap();
    for k in 0..n_phases {
        let theta = F::lit(2.0) * F::PI() * F::from_usize(k).unwrap() / np;
        let first = window_integral(F::zero(), t, theta);
        let second = window_integral(t + tp, F::lit(2.0) * t + tp, theta);
        let diff = first - second;
        acc += diff * diff;
    }
    let mean_sq = acc / np;
    // <I^2> for the single window at DC is T^2/2; dividing by it makes the
    // single-window factor sinc^2 with value 1 at DC.
    mean_sq * F::lit(2.0) / (t * t)
}

/// Consecutive-difference noise PSD: white, 2N/T (two independent windows).
pub fn noise_psd_consecutive<F: Real>(window: &MeasurementWindow<F>) -> F {
    F::lit(2.0) * window.photon_rate / window.window
}

/// Number of phases used for the Θ-average in [`psd_consecutive`].
pub const THETA_PHASES: usize = 256;

/// Single-measurement PSD pair on the default grid.
pub fn psd_single<F: Real>(window: &MeasurementWindow<F>) -> Result<PsdCurve<F>, SpectralError> {
    if window.scheme != Scheme::Single {
        return Err(SpectralError::WrongScheme {
            expected: Scheme::Single.label(),
            actual: window.scheme.label(),
        });
    }
    let nu = window.default_nu_grid();
    let noise_level = noise_psd_single(window);
    let signal = nu.iter().map(|&v| signal_psd_single(window, v)).collect();
    let noise = nu.iter().map(|_| noise_level).collect();
    Ok(PsdCurve { nu, signal, noise })
}

/// Consecutive-difference PSD pair on the default grid. The signal is
/// N²T·η₂(ν) with η₂ evaluated by the Θ-grid average ([`THETA_PHASES`]
/// phases), which matches [`eta2_closed_form`] to machine precision.
pub fn psd_consecutive<F: Real>(
    window: &MeasurementWindow<F>,
) -> Result<PsdCurve<F>, SpectralError> {
    if window.scheme != Scheme::ConsecutiveDifference {
        return Err(SpectralError::WrongScheme {
            expected: Scheme::ConsecutiveDifference.label(),
            actual: window.scheme.label(),
        });
    }
    let nu = window.default_nu_grid();
    let n = window.photon_rate;
    let amp = n * n * window.window;
    let noise_level = noise_psd_consecutive(window);
    let signal = nu
        .iter()
        .map(|&v| amp * eta2_theta_average(window, v, THETA_PHASES))
        .collect();
    let noise = nu.iter().map(|_| noise_level).collect();
    Ok(PsdCurve { nu, signal, noise })
}

/// Noise floor selection for [`band_snr`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseFloor<F> {
    /// The curve's shot-noise floor as tabulated.
    Shot,
    /// Broadband squeezing: the floor is scaled by 10^(dB/10).
    SqueezedDb(F),
}

/// Integrated signal power over integrated noise power in the band
/// `nu_center ± bandwidth/2` (trapezoid rule, band edges interpolated).
/// A zero bandwidth degenerates to the pointwise PSD ratio.
pub fn band_snr<F: Real>(
    curve: &PsdCurve<F>,
    nu_center: F,
    bandwidth: F,
    floor: NoiseFloor<F>,
) -> Result<F, SpectralError> {
    if curve.nu.len() < 2 {
        return Err(SpectralError::CurveTooShort(curve.nu.len()));
    }
    if !(bandwidth >= F::zero()) {
        return Err(SpectralError::BadBandwidth(bandwidth.to_f64().unwrap_or(f64::NAN)));
    }
    let half = bandwidth / F::lit(2.0);
    let lo = nu_center - half;
    let hi = nu_center + half;
    let first = curve.nu[0];
    let last = *curve.nu.last().unwrap();
    if !(lo >= first && hi <= last) {
        return Err(SpectralError::BandOutOfRange {
            lo: lo.to_f64().unwrap_or(f64::NAN),
            hi: hi.to_f64().unwrap_or(f64::NAN),
        });
    }
    let scale = match floor {
        NoiseFloor::Shot => F::one(),
        NoiseFloor::SqueezedDb(db) => F::lit(10.0).powf(db / F::lit(10.0)),
    };

    let interp = |values: &[F], x: F| -> F {
        let i = match curve.nu.iter().position(|&v| v >= x) {
            Some(0) => 1,
            Some(i) => i,
            None => curve.nu.len() - 1,
        };
        let (x0, x1) = (curve.nu[i - 1], curve.nu[i]);
        let t = if x1 > x0 { (x - x0) / (x1 - x0) } else { F::zero() };
        values[i - 1] + (values[i] - values[i - 1]) * t
    };

    if bandwidth == F::zero() {
        let s = interp(&curve.signal, nu_center);
        let n = interp(&curve.noise, nu_center) * scale;
        return Ok(s / n);
    }

    // Trapezoid over interior grid samples plus interpolated band edges.
    let integrate = |values: &[F]| -> F {
        let mut xs: Vec<F> = vec![lo];
        let mut ys: Vec<F> = vec![interp(values, lo)];
        for (i, &v) in curve.nu.iter().enumerate() {
            if v > lo && v < hi {
                xs.push(v);
                ys.push(values[i]);
            }
        }
        xs.push(hi);
        ys.push(interp(values, hi));
        let mut acc = F::zero();
        for i in 1..xs.len() {
            acc += (ys[i] + ys[i - 1]) * (xs[i] - xs[i - 1]) / F::lit(2.0);
        }
        acc
    };
    let s = integrate(&curve.signal);
    let n: F = integrate(&curve.noise) * scale;
    Ok(s / n)
}

/// Parabolically refined peak location/value and the full width at half
/// maximum of the signal curve's main lobe.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak<F> {
    pub nu_peak: F,
    pub value: F,
    pub fwhm: F,
}

/// Locate the signal peak and its FWHM.
///
/// The curves are double-sided and even, so a maximum at the first sample
/// (DC) counts as an interior peak by reflection and its FWHM is twice the
/// positive-side half-width. A flat or monotone-to-the-edge curve is
/// rejected.
pub fn peak_and_bandwidth<F: Real>(curve: &PsdCurve<F>) -> Result<Peak<F>, SpectralError> {
    let n = curve.signal.len();
    if n < 8 {
        return Err(SpectralError::CurveTooShort(n));
    }
    let mut imax = 0;
    for i in 1..n {
        if curve.signal[i] > curve.signal[imax] {
            imax = i;
        }
    }
    if imax == n - 1 {
        return Err(SpectralError::NoInteriorPeak);
    }

    let (nu_peak, value) = if imax == 0 {
        // Even reflection: the vertex of the parabola through
        // (-nu1, y1), (0, y0), (nu1, y1) sits at DC.
        if !(curve.signal[0] > curve.signal[1]) {
            return Err(SpectralError::NoInteriorPeak);
        }
        (curve.nu[0], curve.signal[0])
    } else {
        let (y0, y1, y2) = (curve.signal[imax - 1], curve.signal[imax], curve.signal[imax + 1]);
        let denom = y0 - F::lit(2.0) * y1 + y2;
        if !(y1 > y0 && y1 > y2) {
            return Err(SpectralError::NoInteriorPeak);
        }
        let h = curve.nu[imax] - curve.nu[imax - 1];
        let offset = (y0 - y2) / (F::lit(2.0) * denom) * h;
        let value = y1 - (y0 - y2) * offset / (F::lit(4.0) * h);
        (curve.nu[imax] + offset, value)
    };

    let half = value / F::lit(2.0);
    let cross_right = {
        let mut found = None;
        for i in imax..n - 1 {
            if curve.signal[i] >= half && curve.signal[i + 1] < half {
                let t = (curve.signal[i] - half) / (curve.signal[i] - curve.signal[i + 1]);
                found = Some(curve.nu[i] + (curve.nu[i + 1] - curve.nu[i]) * t);
                break;
            }
        }
        found.ok_or(SpectralError::HalfMaxNotBracketed)?
    };
    let fwhm = if imax == 0 {
        F::lit(2.0) * (cross_right - curve.nu[0])
    } else {
        let mut found = None;
        for i in (1..=imax).rev() {
            if curve.signal[i] >= half && curve.signal[i - 1] < half {
                let t = (curve.signal[i] - half) / (curve.signal[i] - curve.signal[i - 1]);
                found = Some(curve.nu[i] - (curve.nu[i] - curve.nu[i - 1]) * t);
                break;
            }
        }
        let cross_left = found.ok_or(SpectralError::HalfMaxNotBracketed)?;
        cross_right - cross_left
    };
    Ok(Peak { nu_peak, value, fwhm })
}
