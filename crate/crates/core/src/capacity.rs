//! Allocation of a fixed photon budget between coherent amplitude and
//! squeezing.
//!
//! A beam holding n̄ photons per bandwidth-time can spend them on coherent
//! amplitude (signal) or on squeezing its measured quadrature (noise), per
//! n̄ = ¼(α² + V⁺ + V⁻ − 2). Squeezing photons do not contribute to the
//! signal, so for a fixed total there is an optimum split. With
//! minimum-uncertainty states (V⁻ = 1/V⁺) measured at the squeezed
//! quadrature, the per-beam noise-to-signal contribution V/α² is minimized
//! in closed form at V* = 1/(2m+1) for a beam carrying m photons, leaving a
//! one-dimensional search over how the total is divided between the two
//! beams.

use thiserror::Error;

use crate::detection::BeamState;
use crate::Real;

#[derive(Debug, Error, PartialEq)]
pub enum CapacityError {
    #[error("total photon number must lie in [0.1, 1e4], got {0}")]
    BudgetOutOfRange(f64),
    #[error("budget too small: no allocation reaches SNR = 1")]
    BelowThreshold,
    #[error("internal beam construction failed: {0}")]
    BadAllocation(String),
}

/// Which beams may be squeezed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SqueezeRegime {
    BothCoherent,
    /// Signal beam squeezed, reference coherent.
    OneSqueezed,
    BothSqueezed,
}

impl SqueezeRegime {
    pub const ALL: [SqueezeRegime; 3] =
        [SqueezeRegime::BothCoherent, SqueezeRegime::OneSqueezed, SqueezeRegime::BothSqueezed];

    pub fn label(&self) -> &'static str {
        match self {
            SqueezeRegime::BothCoherent => "both_coherent",
            SqueezeRegime::OneSqueezed => "one_squeezed",
            SqueezeRegime::BothSqueezed => "both_squeezed",
        }
    }
}

/// Mean photons per bandwidth-time summed over both input beams.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhotonBudget<F> {
    n_bar_total: F,
    regime: SqueezeRegime,
}

impl<F: Real> PhotonBudget<F> {
    pub fn new(n_bar_total: F, regime: SqueezeRegime) -> Result<Self, CapacityError> {
        if !(n_bar_total >= F::lit(0.1) && n_bar_total <= F::lit(1e4)) {
            return Err(CapacityError::BudgetOutOfRange(
                n_bar_total.to_f64().unwrap_or(f64::NAN),
            ));
        }
        Ok(Self { n_bar_total, regime })
    }

    pub fn n_bar_total(&self) -> F {
        self.n_bar_total
    }

    pub fn regime(&self) -> SqueezeRegime {
        self.regime
    }
}

/// Photons per bandwidth-time of one beam, ¼(α² + V⁺ + V⁻ − 2).
pub fn photons_of_state<F: Real>(alpha: F, v_plus: F, v_minus: F) -> F {
    (alpha * alpha + v_plus + v_minus - F::lit(2.0)) / F::lit(4.0)
}

/// One beam of the optimal allocation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamAlloc<F> {
    pub photons: F,
    pub alpha: F,
    pub var_plus: F,
    pub var_minus: F,
}

impl<F: Real> BeamAlloc<F> {
    fn coherent(m: F) -> Self {
        Self { photons: m, alpha: (F::lit(4.0) * m).sqrt(), var_plus: F::one(), var_minus: F::one() }
    }

    /// Closed-form optimum of V/α² under the photon constraint:
    /// V* = 1/(2m+1), α² = 4m(m+1)/(2m+1).
    fn squeezed(m: F) -> Self {
        let v = (F::lit(2.0) * m + F::one()).recip();
        let alpha2 = F::lit(4.0) * m - (v + v.recip() - F::lit(2.0));
        Self { photons: m, alpha: alpha2.max(F::zero()).sqrt(), var_plus: v, var_minus: v.recip() }
    }

    /// Noise-to-signal contribution V⁺/α² of this beam.
    fn contribution(&self) -> F {
        self.var_plus / (self.alpha * self.alpha)
    }

    pub fn beam_state(&self, phase: F) -> Result<BeamState<F>, CapacityError> {
        BeamState::new(self.alpha, phase, self.var_plus, self.var_minus)
            .map_err(|e| CapacityError::BadAllocation(e.to_string()))
    }

    /// Squeezing in dB, 10·log₁₀ V⁺ (negative = squeezed, 0 = coherent).
    pub fn squeezing_db(&self) -> F {
        F::lit(10.0) * self.var_plus.log10()
    }
}

/// Optimal split of the budget over the two beams.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Allocation<F> {
    /// Beam 1 / beam 3: carries the symbol.
    pub signal: BeamAlloc<F>,
    /// Beam 2: the interferometer reference.
    pub reference: BeamAlloc<F>,
}

/// Result of a capacity optimization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapacityResult<F> {
    pub regime: SqueezeRegime,
    pub n_bar_total: F,
    pub delta_theta_min: F,
    pub l_max: F,
    pub best_log2_levels: F,
    pub allocation: Allocation<F>,
    /// Fractional gain in log₂ L_max over the both-coherent optimum at the
    /// same budget (0 for the coherent regime itself).
    pub improvement_vs_coherent: F,
}

/// Search controls for the outer golden-section minimization.
#[derive(Debug, Clone, Copy)]
pub struct SearchConfig {
    /// Absolute tolerance on the beam-1 photon fraction.
    pub split_tol: f64,
    pub max_iter: u32,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self { split_tol: 1e-12, max_iter: 200 }
    }
}

/// Golden-section minimization of a unimodal function on [lo, hi].
fn golden_min<F: Real>(f: impl Fn(F) -> F, lo: F, hi: F, tol: F, max_iter: u32) -> F {
    let inv_phi = F::lit(0.618_033_988_749_894_9);
    let mut a = lo;
    let mut b = hi;
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..max_iter {
        if (b - a).abs() <= tol {
            break;
        }
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2);
        }
    }
    (a + b) / F::lit(2.0)
}

fn allocation_at<F: Real>(budget: &PhotonBudget<F>, t: F) -> Allocation<F> {
    let m1 = t * budget.n_bar_total;
    let m2 = (F::one() - t) * budget.n_bar_total;
    match budget.regime {
        SqueezeRegime::BothCoherent => {
            Allocation { signal: BeamAlloc::coherent(m1), reference: BeamAlloc::coherent(m2) }
        }
        SqueezeRegime::OneSqueezed => {
            Allocation { signal: BeamAlloc::squeezed(m1), reference: BeamAlloc::coherent(m2) }
        }
        SqueezeRegime::BothSqueezed => {
            Allocation { signal: BeamAlloc::squeezed(m1), reference: BeamAlloc::squeezed(m2) }
        }
    }
}

fn objective<F: Real>(budget: &PhotonBudget<F>, t: F) -> F {
    let alloc = allocation_at(budget, t);
    alloc.signal.contribution() + alloc.reference.contribution()
}

fn optimize_raw<F: Real>(
    budget: &PhotonBudget<F>,
    cfg: &SearchConfig,
) -> Result<(F, F, Allocation<F>), CapacityError> {
    let eps = F::lit(1e-9);
    let t_best = golden_min(
        |t| objective(budget, t),
        eps,
        F::one() - eps,
        F::lit(cfg.split_tol),
        cfg.max_iter,
    );
    let alloc = allocation_at(budget, t_best);
    // asin argument of delta_theta_min for this allocation.
    let arg = (alloc.signal.contribution() + alloc.reference.contribution()) / F::lit(4.0);
    if !(arg <= F::one()) {
        return Err(CapacityError::BelowThreshold);
    }
    let dt = arg.sqrt().asin();
    let l = F::lit(4.0) * F::PI() / dt;
    Ok((dt, l, alloc))
}

/// Maximize log₂ L_max over all budget splits allowed by the regime.
pub fn optimize_capacity<F: Real>(
    budget: &PhotonBudget<F>,
    cfg: &SearchConfig,
) -> Result<CapacityResult<F>, CapacityError> {
    let (dt, l, alloc) = optimize_raw(budget, cfg)?;
    let log2_l = l.log2();
    let improvement = if budget.regime == SqueezeRegime::BothCoherent {
        F::zero()
    } else {
        let coherent = PhotonBudget { n_bar_total: budget.n_bar_total, regime: SqueezeRegime::BothCoherent };
        let (_, l_coh, _) = optimize_raw(&coherent, cfg)?;
        (log2_l - l_coh.log2()) / l_coh.log2()
    };
    Ok(CapacityResult {
        regime: budget.regime,
        n_bar_total: budget.n_bar_total,
        delta_theta_min: dt,
        l_max: l,
        best_log2_levels: log2_l,
        allocation: alloc,
        improvement_vs_coherent: improvement,
    })
}

/// Squeezing (dB, negative) each beam needs at the optimal allocation.
pub fn required_squeezing<F: Real>(budget: &PhotonBudget<F>) -> Result<(F, F), CapacityError> {
    let result = optimize_capacity(budget, &SearchConfig::default())?;
    Ok((result.allocation.signal.squeezing_db(), result.allocation.reference.squeezing_db()))
}
