//! Success (coverage) probability of the typical user.
//!
//! The exact value comes from a lower-triangular Toeplitz representation of
//! the SIR distribution: the per-tier success probability equals `A` times
//! the sum of the first `D_k` power-series coefficients of `1/F(z)`, where
//! `F(z) = Σ q_i z^i` collects the interference coefficients [`q_coefficients`]
//! and `D_k = M_k - U_k + 1` is the serving diversity order. The reciprocal
//! coefficients are produced by the standard power-series recursion, which
//! is both cheaper and numerically stabler than forming and inverting the
//! Toeplitz matrix; the dense inverse exists only as a test oracle.
//!
//! The large-threshold limit has a closed form, exposed by
//! [`ps_asymptotic_tier`] and [`ps_asymptotic`]. The asymptotic values are
//! deliberately not clamped to `[0, 1]`: they may exceed one at small
//! thresholds and are documented as such.

use crate::model::{ModelError, NetworkModel};
use crate::specfun::{self, Hyp2F1Params, SpecFunError};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CoverageError {
    #[error("tier inactive: conditional success probability undefined (tier {tier})")]
    InactiveTier { tier: usize },
    #[error("tier index {tier} out of range for a {num_tiers}-tier model")]
    TierOutOfRange { tier: usize, num_tiers: usize },
    #[error("SIR threshold must be positive, got {gamma_hat}")]
    NonPositiveThreshold { gamma_hat: f64 },
    #[error("series length must be at least 1")]
    EmptySeries,
    #[error("hypergeometric evaluation failed at coefficient i = {i}, tier j = {j}: {source}")]
    Hypergeometric {
        i: usize,
        j: usize,
        source: SpecFunError,
    },
    #[error("leading series coefficient is zero; upstream model state is corrupt")]
    ZeroLeadingCoefficient,
    #[error(
        "reciprocal series coefficient t_{n} = {value} is negative beyond tolerance; \
         this indicates a special-function fault"
    )]
    NegativeReciprocal { n: usize, value: f64 },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    SpecFun(#[from] SpecFunError),
}

/// Tag distinguishing the interference series from its reciprocal.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeriesKind {
    /// Coefficients `q_0..q_{n-1}` of `F(z)`.
    QSeries,
    /// Coefficients `t_0..t_{n-1}` of `1/F(z)`.
    Reciprocal,
}

/// Finite prefix of a power series tied to the serving tier and threshold
/// it was built for.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesCoefficients {
    pub values: Vec<f64>,
    pub tier_index: usize,
    pub gamma_hat: f64,
    pub kind: SeriesKind,
}

/// Interference series coefficients `q_0..q_{n-1}` for the user served by
/// tier `k` at linear SIR threshold `gamma_hat`:
///
/// ```text
/// q_i = Σ_j λ_j (P_j B_j)^δ  Γ(U_j+i)/(Γ(U_j) Γ(i+1)) · δ/(δ-i)
///        · ρ_kj^i · 2F1(i-δ, U_j+i; i+1-δ; -ρ_kj),   ρ_kj = U_k B_k γ̂ /(U_j B_j)
/// ```
///
/// `q_0 > 0` and `q_i < 0` for `i >= 1`: the factor `δ/(δ-i)` is negative
/// there while everything else stays positive. Zero-density tiers
/// contribute nothing.
pub fn q_coefficients(
    model: &NetworkModel,
    k: usize,
    gamma_hat: f64,
    n: usize,
) -> Result<SeriesCoefficients, CoverageError> {
    let num_tiers = model.num_tiers();
    if k >= num_tiers {
        return Err(CoverageError::TierOutOfRange { tier: k, num_tiers });
    }
    if !(gamma_hat > 0.0) || !gamma_hat.is_finite() {
        return Err(CoverageError::NonPositiveThreshold { gamma_hat });
    }
    if n == 0 {
        return Err(CoverageError::EmptySeries);
    }
    let delta = model.delta();
    let serving = &model.tiers()[k];
    let serving_weight = f64::from(serving.users) * serving.bias;

    let mut values = vec![0.0; n];
    for (j, tier) in model.tiers().iter().enumerate() {
        if tier.lambda == 0.0 {
            continue;
        }
        let users = f64::from(tier.users);
        let rho = serving_weight * gamma_hat / (users * tier.bias);
        let tier_weight = tier.lambda * (tier.power * tier.bias).powf(delta);
        let lgamma_u = specfun::log_gamma(users)?;
        for (i, slot) in values.iter_mut().enumerate() {
            let fi = i as f64;
            let params = Hyp2F1Params::new(fi - delta, users + fi, fi + 1.0 - delta, rho)
                .map_err(|source| CoverageError::Hypergeometric { i, j, source })?;
            let hyp = specfun::gauss_2f1_neg(params)
                .map_err(|source| CoverageError::Hypergeometric { i, j, source })?;
            // Γ(U+i)/(Γ(U)Γ(i+1)) ρ^i, assembled in log space.
            let log_comb = specfun::log_gamma(users + fi)?
                - lgamma_u
                - specfun::log_gamma(fi + 1.0)?
                + fi * rho.ln();
            *slot += tier_weight * log_comb.exp() * (delta / (delta - fi)) * hyp;
        }
    }
    Ok(SeriesCoefficients {
        values,
        tier_index: k,
        gamma_hat,
        kind: SeriesKind::QSeries,
    })
}

// Allow tiny negative noise relative to t_0 before declaring a fault.
const RECIPROCAL_SIGN_TOL: f64 = 1e-12;

/// First `length` coefficients of `1/F(z)` by the power-series reciprocal
/// recursion `t_0 = 1/q_0`, `t_n = -(1/q_0) Σ_{i<n} q_{n-i} t_i`.
///
/// These equal the first column of the inverse of the lower-triangular
/// Toeplitz matrix built from `q`. Every `t_n` is mathematically
/// nonnegative for valid interference series (`q_0 > 0`, `q_i <= 0`); the
/// sign is checked numerically and a violation is reported rather than
/// silently summed.
pub fn reciprocal_series(
    q: &SeriesCoefficients,
    length: usize,
) -> Result<SeriesCoefficients, CoverageError> {
    assert!(
        length <= q.values.len(),
        "requested {length} coefficients from a series of length {}",
        q.values.len()
    );
    if length == 0 {
        return Err(CoverageError::EmptySeries);
    }
    let q0 = q.values[0];
    if q0 == 0.0 {
        return Err(CoverageError::ZeroLeadingCoefficient);
    }
    let mut t = Vec::with_capacity(length);
    t.push(1.0 / q0);
    for n in 1..length {
        let mut acc = 0.0;
        for i in 0..n {
            acc += q.values[n - i] * t[i];
        }
        t.push(-acc / q0);
    }
    let floor = -RECIPROCAL_SIGN_TOL * t[0].abs();
    if let Some((n, &value)) = t.iter().enumerate().find(|(_, v)| **v < floor) {
        return Err(CoverageError::NegativeReciprocal { n, value });
    }
    Ok(SeriesCoefficients {
        values: t,
        tier_index: q.tier_index,
        gamma_hat: q.gamma_hat,
        kind: SeriesKind::Reciprocal,
    })
}

/// Exact success probability of a user served by tier `k`:
/// `p_s(k) = A · Σ_{n<D_k} t_n`. Clamped to `[0, 1]` (the floating residue
/// of the series route is below 1e-12).
///
/// A zero-density tier cannot serve, so asking for its conditional success
/// probability is an error rather than 0 or 1.
pub fn ps_exact_tier(
    model: &NetworkModel,
    k: usize,
    gamma_hat: f64,
) -> Result<f64, CoverageError> {
    let num_tiers = model.num_tiers();
    if k >= num_tiers {
        return Err(CoverageError::TierOutOfRange { tier: k, num_tiers });
    }
    if model.tiers()[k].lambda == 0.0 {
        return Err(CoverageError::InactiveTier { tier: k });
    }
    let dof = model.tiers()[k].degrees_of_freedom() as usize;
    let q = q_coefficients(model, k, gamma_hat, dof)?;
    let t = reciprocal_series(&q, dof)?;
    let sum: f64 = t.values.iter().sum();
    Ok((model.a_norm() * sum).clamp(0.0, 1.0))
}

/// Exact overall success probability `p_s = Σ_k A_k p_s(k)`; zero-density
/// tiers carry zero weight and are skipped.
pub fn ps_exact(model: &NetworkModel, gamma_hat: f64) -> Result<f64, CoverageError> {
    let assoc = model.association_probabilities();
    let mut total = 0.0;
    for (k, weight) in assoc.iter().enumerate() {
        if *weight > 0.0 {
            total += weight * ps_exact_tier(model, k, gamma_hat)?;
        }
    }
    Ok(total)
}

/// Large-threshold closed form of the per-tier success probability:
///
/// ```text
/// p_s(k) ~ A γ̂^{-δ} sinc(δ) (U_k B_k)^{-δ} Γ(D_k+δ)/Γ(D_k) / (dᵀλ)
/// ```
///
/// Evaluable at any positive threshold, accurate for large ones; the value
/// may exceed 1 at small thresholds and is intentionally left unclamped.
pub fn ps_asymptotic_tier(
    model: &NetworkModel,
    k: usize,
    gamma_hat: f64,
) -> Result<f64, CoverageError> {
    let num_tiers = model.num_tiers();
    if k >= num_tiers {
        return Err(CoverageError::TierOutOfRange { tier: k, num_tiers });
    }
    if !(gamma_hat > 0.0) || !gamma_hat.is_finite() {
        return Err(CoverageError::NonPositiveThreshold { gamma_hat });
    }
    let delta = model.delta();
    let tier = &model.tiers()[k];
    let cv = model.coefficient_vectors()?;
    let d_dot_lambda: f64 = cv
        .d
        .iter()
        .zip(model.tiers())
        .map(|(d, t)| d * t.lambda)
        .sum();
    let numerator = (f64::from(tier.users) * tier.bias).powf(-delta)
        * specfun::gamma_ratio(f64::from(tier.degrees_of_freedom()), delta)?;
    Ok(model.a_norm() * gamma_hat.powf(-delta) * specfun::sinc_norm(delta) * numerator
        / d_dot_lambda)
}

/// Large-threshold overall success probability in vector form:
/// `p_s ~ γ̂^{-δ} sinc(δ) (cᵀλ)/(dᵀλ)`.
pub fn ps_asymptotic(model: &NetworkModel, gamma_hat: f64) -> Result<f64, CoverageError> {
    if !(gamma_hat > 0.0) || !gamma_hat.is_finite() {
        return Err(CoverageError::NonPositiveThreshold { gamma_hat });
    }
    let delta = model.delta();
    let cv = model.coefficient_vectors()?;
    let mut c_dot = 0.0;
    let mut d_dot = 0.0;
    for ((c, d), tier) in cv.c.iter().zip(&cv.d).zip(model.tiers()) {
        c_dot += c * tier.lambda;
        d_dot += d * tier.lambda;
    }
    Ok(gamma_hat.powf(-delta) * specfun::sinc_norm(delta) * c_dot / d_dot)
}
