//! Area spectral efficiency and structural diagnostics: how each tier's
//! density moves the network-wide success probability, and the highest
//! reliability the network can reach.

use crate::coverage::{self, CoverageError};
use crate::model::{ModelError, NetworkModel, TierConfig};
use crate::specfun;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricsError {
    #[error("per-tier success vector has length {got}, expected {expected}")]
    LengthMismatch { got: usize, expected: usize },
    #[error("all densities are zero; diagnostics undefined")]
    AllZeroDensities,
    #[error(
        "exact reliability maximum is only established for unbiased networks \
         serving a common number of users; use asymptotic mode instead"
    )]
    ExactModeRequiresUsdma,
    #[error(transparent)]
    Coverage(#[from] CoverageError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Whether a quantity is computed from the exact Toeplitz-series route or
/// the large-threshold closed form.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Exact,
    Asymptotic,
}

/// One point of the ASE-vs-reliability tradeoff curve.
#[derive(Debug, Clone, PartialEq)]
pub struct TradeoffPoint {
    /// Link-reliability requirement in `[0, 1]`.
    pub theta: f64,
    /// Density vector, per km².
    pub lambda_vec: Vec<f64>,
    /// Achieved ASE, bit/s/Hz/km².
    pub ase_km2: f64,
    /// Achieved success probability.
    pub ps: f64,
    pub feasible: bool,
}

/// Converts an areal quantity per km² to per m².
pub fn ase_km2_to_m2(value_per_km2: f64) -> f64 {
    value_per_km2 * 1e-6
}

/// Area spectral efficiency `ASE = Σ_k λ_k U_k p_s(k) log2(1+γ̂)` in
/// bit/s/Hz/km².
///
/// `ps_per_tier` supplies the per-tier success probabilities; entries for
/// zero-density tiers are ignored (they may be anything, including NaN).
pub fn ase(model: &NetworkModel, gamma_hat: f64, ps_per_tier: &[f64]) -> Result<f64, MetricsError> {
    if ps_per_tier.len() != model.num_tiers() {
        return Err(MetricsError::LengthMismatch {
            got: ps_per_tier.len(),
            expected: model.num_tiers(),
        });
    }
    let rate = (1.0 + gamma_hat).log2();
    let mut total = 0.0;
    for (tier, ps) in model.tiers().iter().zip(ps_per_tier) {
        if tier.lambda > 0.0 {
            total += tier.lambda * f64::from(tier.users) * ps * rate;
        }
    }
    Ok(total)
}

/// Large-threshold ASE closed form
/// `ASE ~ γ̂^{-δ} sinc(δ) log2(1+γ̂) (c1ᵀλ)(c2ᵀλ)/(dᵀλ)`, bit/s/Hz/km².
///
/// Positively homogeneous of degree 1 in the density vector.
pub fn ase_asymptotic(model: &NetworkModel, gamma_hat: f64) -> Result<f64, MetricsError> {
    let cv = model.coefficient_vectors()?;
    let lambda = model.densities();
    Ok(ase_asymptotic_at(
        model.delta(),
        &cv.c1,
        &cv.c2,
        &cv.d,
        &lambda,
        gamma_hat,
    ))
}

/// Same closed form evaluated at an arbitrary density vector; used by the
/// optimizers, which sweep densities without rebuilding models.
pub fn ase_asymptotic_at(
    delta: f64,
    c1: &[f64],
    c2: &[f64],
    d: &[f64],
    lambda: &[f64],
    gamma_hat: f64,
) -> f64 {
    let c1l = dot(c1, lambda);
    let c2l = dot(c2, lambda);
    let dl = dot(d, lambda);
    if dl == 0.0 {
        return 0.0;
    }
    gamma_hat.powf(-delta) * specfun::sinc_norm(delta) * (1.0 + gamma_hat).log2() * c1l * c2l / dl
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Sign of the partial derivative of the network success probability with
/// respect to each tier's density, evaluated at the model's densities.
///
/// The sign of `∂(cᵀλ/dᵀλ)/∂λ_i` equals the sign of
/// `Σ_j d_i d_j λ_j (c_i/d_i - c_j/d_j)`; it does not change as `λ_i`
/// varies, so one evaluation characterizes the whole monotonicity. Zero is
/// reported only inside a relative 1e-14 dead-band, which absorbs
/// floating-point sign noise at the invariance point without masking real
/// trends.
pub fn monotonicity_signs(model: &NetworkModel) -> Result<Vec<i8>, MetricsError> {
    let lambda = model.densities();
    monotonicity_signs_at(model, &lambda)
}

/// Monotonicity signs at an explicit density vector.
pub fn monotonicity_signs_at(
    model: &NetworkModel,
    lambda: &[f64],
) -> Result<Vec<i8>, MetricsError> {
    if lambda.iter().all(|&l| l == 0.0) {
        return Err(MetricsError::AllZeroDensities);
    }
    let cv = model.coefficient_vectors()?;
    let ratios: Vec<f64> = cv.c.iter().zip(&cv.d).map(|(c, d)| c / d).collect();
    let k = model.num_tiers();
    let mut signs = Vec::with_capacity(k);
    for i in 0..k {
        let mut numerator = 0.0;
        let mut scale = 0.0;
        for j in 0..k {
            let weight = cv.d[i] * cv.d[j] * lambda[j];
            numerator += weight * (ratios[i] - ratios[j]);
            scale += weight * (ratios[i].abs() + ratios[j].abs());
        }
        signs.push(if numerator.abs() <= 1e-14 * scale {
            0
        } else if numerator > 0.0 {
            1
        } else {
            -1
        });
    }
    Ok(signs)
}

/// Maximum achievable success probability and the tier that achieves it.
#[derive(Debug, Clone, PartialEq)]
pub struct PsMax {
    pub value: f64,
    /// Achieving tier (lowest index on ties).
    pub tier_index: usize,
    /// Other tier indices tied with the winner, if any.
    pub tied_with: Vec<usize>,
}

/// Maximum success probability over all density choices in the box
/// `0 <= λ <= λ^max`.
///
/// It is attained by activating a single tier: in asymptotic mode the tier
/// with the largest `[Γ(D+δ)/Γ(D)] / [Γ(U+δ)/Γ(U)]` ratio, with value
/// `γ̂^{-δ} sinc(δ) · max ratio`; in exact mode (proved only for unbiased
/// common-U networks) the tier with the most antennas, with value equal to
/// that tier's density-free success probability. Tiers pinned to zero by
/// `λ^max = 0` cannot be activated and are excluded from the argmax. Ties
/// break to the lowest tier index and are reported.
pub fn ps_max(model: &NetworkModel, gamma_hat: f64, mode: Mode) -> Result<PsMax, MetricsError> {
    let deployable = |i: &usize| model.tiers()[*i].lambda_max > 0.0;
    match mode {
        Mode::Asymptotic => {
            let cv = model.coefficient_vectors()?;
            let ratios: Vec<f64> = cv.c.iter().zip(&cv.d).map(|(c, d)| c / d).collect();
            let (tier_index, tied_with) = argmax_with_ties(&ratios, deployable);
            let delta = model.delta();
            let value = gamma_hat.powf(-delta) * specfun::sinc_norm(delta) * ratios[tier_index];
            Ok(PsMax {
                value,
                tier_index,
                tied_with,
            })
        }
        Mode::Exact => {
            if !model.is_unbiased_usdma() {
                return Err(MetricsError::ExactModeRequiresUsdma);
            }
            let antennas: Vec<f64> = model
                .tiers()
                .iter()
                .map(|t| f64::from(t.antennas))
                .collect();
            let (tier_index, tied_with) = argmax_with_ties(&antennas, deployable);
            let value = usdma_tier_ps(model, tier_index, gamma_hat)?;
            Ok(PsMax {
                value,
                tier_index,
                tied_with,
            })
        }
    }
}

/// Density-free per-tier success probability of an unbiased common-U
/// network, computed on a synthetic single-tier model (the value is
/// independent of every density and power).
pub fn usdma_tier_ps(
    model: &NetworkModel,
    tier_index: usize,
    gamma_hat: f64,
) -> Result<f64, MetricsError> {
    let tier = model.tiers()[tier_index];
    let single = NetworkModel::new(
        model.alpha(),
        vec![TierConfig::new(1.0, 1.0, 1.0, tier.antennas, tier.users)],
    )?;
    Ok(coverage::ps_exact_tier(&single, 0, gamma_hat)?)
}

fn argmax_with_ties<F: Fn(&usize) -> bool>(values: &[f64], eligible: F) -> (usize, Vec<usize>) {
    let candidates: Vec<usize> = (0..values.len()).filter(|i| eligible(i)).collect();
    assert!(!candidates.is_empty(), "no deployable tier");
    let mut best = candidates[0];
    for &i in &candidates[1..] {
        if values[i] > values[best] {
            best = i;
        }
    }
    let tied = candidates
        .iter()
        .filter(|&&i| i != best && values[i] == values[best])
        .copied()
        .collect();
    (best, tied)
}
