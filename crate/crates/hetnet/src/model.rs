//! Network description: per-tier parameters, validation, association
//! probabilities and the tier coefficient vectors used by the asymptotic
//! coverage formulas and the optimizers.

use crate::specfun::{self, SpecFunError};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("alpha must exceed 2 (got {alpha})")]
    AlphaTooSmall { alpha: f64 },
    #[error("network must contain at least one tier")]
    NoTiers,
    #[error("degenerate network: all tier densities are zero")]
    DegenerateNetwork,
    #[error("tier {tier}: users ({users}) may not exceed antennas ({antennas})")]
    UsersExceedAntennas { tier: usize, users: u32, antennas: u32 },
    #[error("tier {tier}: users must be at least 1")]
    ZeroUsers { tier: usize },
    #[error("tier {tier}: antennas must be at least 1")]
    ZeroAntennas { tier: usize },
    #[error("tier {tier}: transmit power must be positive (got {value})")]
    NonPositivePower { tier: usize, value: f64 },
    #[error("tier {tier}: bias must be positive (got {value})")]
    NonPositiveBias { tier: usize, value: f64 },
    #[error("tier {tier}: density must be nonnegative and finite (got {value})")]
    InvalidDensity { tier: usize, value: f64 },
    #[error("tier {tier}: density {value} exceeds deployment ceiling {max}")]
    DensityAboveMax { tier: usize, value: f64, max: f64 },
    #[error(transparent)]
    SpecFun(#[from] SpecFunError),
}

/// Per-tier base-station parameters.
///
/// `lambda` is the active density and `lambda_max` the deployed ceiling,
/// both in BSs per km². `bias` is the dimensionless association weight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TierConfig {
    pub lambda: f64,
    pub power: f64,
    pub bias: f64,
    pub antennas: u32,
    pub users: u32,
    pub lambda_max: f64,
}

impl TierConfig {
    /// Tier with `lambda_max` defaulting to the configured density.
    pub fn new(lambda: f64, power: f64, bias: f64, antennas: u32, users: u32) -> Self {
        Self {
            lambda,
            power,
            bias,
            antennas,
            users,
            lambda_max: lambda,
        }
    }

    pub fn with_lambda_max(mut self, lambda_max: f64) -> Self {
        self.lambda_max = lambda_max;
        self
    }

    /// Serving-link diversity order `D = M - U + 1`.
    pub fn degrees_of_freedom(&self) -> u32 {
        self.antennas - self.users + 1
    }

    fn validate(&self, tier: usize) -> Result<(), ModelError> {
        if self.users == 0 {
            return Err(ModelError::ZeroUsers { tier });
        }
        if self.antennas == 0 {
            return Err(ModelError::ZeroAntennas { tier });
        }
        if self.users > self.antennas {
            return Err(ModelError::UsersExceedAntennas {
                tier,
                users: self.users,
                antennas: self.antennas,
            });
        }
        if !(self.power > 0.0) || !self.power.is_finite() {
            return Err(ModelError::NonPositivePower {
                tier,
                value: self.power,
            });
        }
        if !(self.bias > 0.0) || !self.bias.is_finite() {
            return Err(ModelError::NonPositiveBias {
                tier,
                value: self.bias,
            });
        }
        if !(self.lambda >= 0.0) || !self.lambda.is_finite() {
            return Err(ModelError::InvalidDensity {
                tier,
                value: self.lambda,
            });
        }
        if !(self.lambda_max >= 0.0) || !self.lambda_max.is_finite() {
            return Err(ModelError::InvalidDensity {
                tier,
                value: self.lambda_max,
            });
        }
        if self.lambda > self.lambda_max {
            return Err(ModelError::DensityAboveMax {
                tier,
                value: self.lambda,
                max: self.lambda_max,
            });
        }
        Ok(())
    }
}

/// Coefficient vectors of the asymptotic coverage and ASE expressions,
/// indexed by tier:
///
/// - `c[i] = (P_i/U_i)^δ Γ(D_i+δ)/Γ(D_i)` (coverage numerator),
/// - `d[i] = (P_i/U_i)^δ Γ(U_i+δ)/Γ(U_i)` (interference denominator),
/// - `c1[i] = (P_i B_i)^δ` (association weight, so `c1·λ` is the model
///   normalizer `A`),
/// - `c2[i] = U_i^{1-δ} B_i^{-δ} Γ(D_i+δ)/Γ(D_i)`.
///
/// They satisfy `c1[i] * c2[i] = U_i * c[i]` identically.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientVectors {
    pub c: Vec<f64>,
    pub d: Vec<f64>,
    pub c1: Vec<f64>,
    pub c2: Vec<f64>,
}

/// Validated K-tier network. Immutable after construction; every derived
/// field is consistent with the tier list and the path-loss exponent.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkModel {
    tiers: Vec<TierConfig>,
    alpha: f64,
    delta: f64,
    a_norm: f64,
}

impl NetworkModel {
    /// Validates the raw description and computes the derived fields.
    pub fn new(alpha: f64, tiers: Vec<TierConfig>) -> Result<Self, ModelError> {
        if !(alpha > 2.0) || !alpha.is_finite() {
            return Err(ModelError::AlphaTooSmall { alpha });
        }
        if tiers.is_empty() {
            return Err(ModelError::NoTiers);
        }
        for (idx, tier) in tiers.iter().enumerate() {
            tier.validate(idx)?;
        }
        if tiers.iter().all(|t| t.lambda == 0.0) {
            return Err(ModelError::DegenerateNetwork);
        }
        let delta = 2.0 / alpha;
        let a_norm = tiers
            .iter()
            .map(|t| t.lambda * (t.power * t.bias).powf(delta))
            .sum();
        Ok(Self {
            tiers,
            alpha,
            delta,
            a_norm,
        })
    }

    /// Same tier parameters with the active densities replaced. The new
    /// densities must respect each tier's `lambda_max`.
    pub fn with_densities(&self, lambda: &[f64]) -> Result<Self, ModelError> {
        assert_eq!(lambda.len(), self.tiers.len(), "density vector length");
        let tiers = self
            .tiers
            .iter()
            .zip(lambda)
            .map(|(t, &l)| TierConfig { lambda: l, ..*t })
            .collect();
        Self::new(self.alpha, tiers)
    }

    pub fn tiers(&self) -> &[TierConfig] {
        &self.tiers
    }

    pub fn num_tiers(&self) -> usize {
        self.tiers.len()
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// `δ = 2/α`, in `(0, 1)`.
    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Normalizer `A = Σ_j λ_j (P_j B_j)^δ`. Positive for every valid model.
    pub fn a_norm(&self) -> f64 {
        self.a_norm
    }

    pub fn densities(&self) -> Vec<f64> {
        self.tiers.iter().map(|t| t.lambda).collect()
    }

    pub fn density_ceilings(&self) -> Vec<f64> {
        self.tiers.iter().map(|t| t.lambda_max).collect()
    }

    /// True when every tier is unbiased (`B = 1`) and serves the same
    /// number of users.
    pub fn is_unbiased_usdma(&self) -> bool {
        let u0 = self.tiers[0].users;
        self.tiers.iter().all(|t| t.users == u0 && t.bias == 1.0)
    }

    /// Probability the typical user associates with each tier:
    /// `A_k = λ_k (P_k B_k)^δ / A`. Sums to one; zero exactly for
    /// zero-density tiers.
    pub fn association_probabilities(&self) -> Vec<f64> {
        self.tiers
            .iter()
            .map(|t| {
                if t.lambda == 0.0 {
                    0.0
                } else {
                    t.lambda * (t.power * t.bias).powf(self.delta) / self.a_norm
                }
            })
            .collect()
    }

    /// Tier coefficient vectors; independent of the densities.
    pub fn coefficient_vectors(&self) -> Result<CoefficientVectors, ModelError> {
        let delta = self.delta;
        let k = self.tiers.len();
        let mut c = Vec::with_capacity(k);
        let mut d = Vec::with_capacity(k);
        let mut c1 = Vec::with_capacity(k);
        let mut c2 = Vec::with_capacity(k);
        for t in &self.tiers {
            let dof = f64::from(t.degrees_of_freedom());
            let users = f64::from(t.users);
            let gd = specfun::gamma_ratio(dof, delta)?;
            let gu = specfun::gamma_ratio(users, delta)?;
            let pu = (t.power / users).powf(delta);
            c.push(pu * gd);
            d.push(pu * gu);
            c1.push((t.power * t.bias).powf(delta));
            c2.push(users.powf(1.0 - delta) * t.bias.powf(-delta) * gd);
        }
        Ok(CoefficientVectors { c, d, c1, c2 })
    }
}

/// Reference three-tier SDMA configuration used across tests and docs:
/// densities [100, 500, 1000] per km², antennas [8, 4, 1], users [4, 2, 1],
/// powers [6.3, 0.13, 0.05] W, bias 1/U, path-loss exponent 4.
pub fn reference_three_tier() -> NetworkModel {
    NetworkModel::new(
        4.0,
        vec![
            TierConfig::new(100.0, 6.3, 1.0 / 4.0, 8, 4),
            TierConfig::new(500.0, 0.13, 1.0 / 2.0, 4, 2),
            TierConfig::new(1000.0, 0.05, 1.0, 1, 1),
        ],
    )
    .expect("reference config is valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn delta_derived_from_alpha() {
        let m = NetworkModel::new(4.0, vec![TierConfig::new(1.0, 1.0, 1.0, 1, 1)]).unwrap();
        assert_eq!(m.delta(), 0.5);
    }

    #[test]
    fn reference_config_accepted_with_expected_dof() {
        let m = reference_three_tier();
        let dof: Vec<u32> = m.tiers().iter().map(|t| t.degrees_of_freedom()).collect();
        assert_eq!(dof, vec![5, 3, 1]);
    }

    #[test]
    fn alpha_at_boundary_rejected() {
        let err = NetworkModel::new(2.0, vec![TierConfig::new(1.0, 1.0, 1.0, 1, 1)]).unwrap_err();
        assert!(err.to_string().contains("alpha must exceed 2"));
    }

    #[test]
    fn degenerate_network_rejected() {
        let err = NetworkModel::new(
            4.0,
            vec![
                TierConfig::new(0.0, 1.0, 1.0, 1, 1),
                TierConfig::new(0.0, 2.0, 1.0, 2, 1),
            ],
        )
        .unwrap_err();
        assert!(err.to_string().contains("degenerate network"));
    }

    #[test]
    fn invalid_tiers_rejected() {
        assert!(NetworkModel::new(4.0, vec![]).is_err());
        assert!(NetworkModel::new(4.0, vec![TierConfig::new(1.0, 1.0, 1.0, 2, 3)]).is_err());
        assert!(NetworkModel::new(4.0, vec![TierConfig::new(1.0, 0.0, 1.0, 1, 1)]).is_err());
        assert!(NetworkModel::new(4.0, vec![TierConfig::new(1.0, 1.0, 0.0, 1, 1)]).is_err());
        assert!(NetworkModel::new(4.0, vec![TierConfig::new(1.0, 1.0, 1.0, 1, 0)]).is_err());
        let above_max = TierConfig::new(2.0, 1.0, 1.0, 1, 1).with_lambda_max(1.0);
        assert!(NetworkModel::new(4.0, vec![above_max]).is_err());
    }

    #[test]
    fn association_single_tier_and_symmetry() {
        let m = NetworkModel::new(4.0, vec![TierConfig::new(3.0, 2.0, 1.0, 2, 1)]).unwrap();
        assert_eq!(m.association_probabilities(), vec![1.0]);

        let twin = TierConfig::new(5.0, 1.7, 1.0, 2, 2);
        let m = NetworkModel::new(3.5, vec![twin, twin]).unwrap();
        let a = m.association_probabilities();
        assert!((a[0] - 0.5).abs() < 1e-15 && (a[1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn association_zero_density_tier_gets_zero() {
        let m = NetworkModel::new(
            4.0,
            vec![
                TierConfig::new(0.0, 1.0, 1.0, 1, 1),
                TierConfig::new(2.0, 1.0, 1.0, 1, 1),
            ],
        )
        .unwrap();
        assert_eq!(m.association_probabilities(), vec![0.0, 1.0]);
    }

    #[test]
    fn coefficient_ratios_on_reference_config() {
        let m = reference_three_tier();
        let cv = m.coefficient_vectors().unwrap();
        let ratios: Vec<f64> = cv.c.iter().zip(&cv.d).map(|(c, d)| c / d).collect();
        // Gamma recurrence gives Γ(D+δ)/Γ(D) / (Γ(U+δ)/Γ(U)) = 9/8, 5/4, 1
        // for (D,U) = (5,4), (3,2), (1,1) at δ = 1/2.
        let expected = [1.125, 1.25, 1.0];
        for (r, e) in ratios.iter().zip(expected) {
            assert!((r - e).abs() < 1e-12, "ratio {r}, expected {e}");
        }
    }

    #[test]
    fn coefficient_identity_c1_c2_equals_u_times_c() {
        let m = reference_three_tier();
        let cv = m.coefficient_vectors().unwrap();
        for (i, t) in m.tiers().iter().enumerate() {
            let lhs = cv.c1[i] * cv.c2[i];
            let rhs = f64::from(t.users) * cv.c[i];
            assert!((lhs - rhs).abs() < 1e-12 * rhs, "tier {i}");
        }
    }

    #[test]
    fn siso_tier_has_unit_cd_ratio() {
        let m = NetworkModel::new(4.0, vec![TierConfig::new(10.0, 0.3, 1.0, 1, 1)]).unwrap();
        let cv = m.coefficient_vectors().unwrap();
        assert_eq!(cv.c[0], cv.d[0]);
    }

    fn arbitrary_model() -> impl Strategy<Value = NetworkModel> {
        let tier = (
            0.0f64..500.0,
            0.01f64..10.0,
            0.1f64..4.0,
            1u32..9,
            1u32..5,
        )
            .prop_map(|(l, p, b, m, u)| {
                let users = u.min(m);
                TierConfig::new(l, p, b, m, users)
            });
        (2.1f64..6.0, proptest::collection::vec(tier, 1..5)).prop_filter_map(
            "needs one active tier",
            |(alpha, mut tiers)| {
                if tiers.iter().all(|t| t.lambda == 0.0) {
                    tiers[0].lambda = 1.0;
                    tiers[0].lambda_max = 1.0;
                }
                NetworkModel::new(alpha, tiers).ok()
            },
        )
    }

    proptest! {
        #[test]
        fn association_sums_to_one(m in arbitrary_model()) {
            let sum: f64 = m.association_probabilities().iter().sum();
            prop_assert!((sum - 1.0).abs() < 1e-12);
        }

        #[test]
        fn association_invariant_under_common_scaling(m in arbitrary_model(), c in 0.1f64..50.0) {
            let scaled_tiers: Vec<TierConfig> = m
                .tiers()
                .iter()
                .map(|t| TierConfig::new(t.lambda * c, t.power, t.bias, t.antennas, t.users))
                .collect();
            let scaled = NetworkModel::new(m.alpha(), scaled_tiers).unwrap();
            for (a, b) in m
                .association_probabilities()
                .iter()
                .zip(scaled.association_probabilities())
            {
                prop_assert!((a - b).abs() < 1e-12);
            }
        }

        #[test]
        fn coefficients_do_not_depend_on_densities(m in arbitrary_model()) {
            let cv = m.coefficient_vectors().unwrap();
            let doubled = m
                .tiers()
                .iter()
                .map(|t| TierConfig::new(t.lambda * 2.0, t.power, t.bias, t.antennas, t.users))
                .collect();
            let cv2 = NetworkModel::new(m.alpha(), doubled)
                .unwrap()
                .coefficient_vectors()
                .unwrap();
            prop_assert_eq!(cv, cv2);
        }

        // The c/d ratio orders with D against U: the gamma ratio
        // Γ(a+δ)/Γ(a) is strictly increasing in a.
        #[test]
        fn cd_ratio_ordered_by_dof_vs_users(m in arbitrary_model()) {
            let cv = m.coefficient_vectors().unwrap();
            for (i, t) in m.tiers().iter().enumerate() {
                let ratio = cv.c[i] / cv.d[i];
                let dof = t.degrees_of_freedom();
                if dof == t.users {
                    prop_assert!((ratio - 1.0).abs() < 1e-12);
                } else if dof > t.users {
                    prop_assert!(ratio > 1.0);
                } else {
                    prop_assert!(ratio < 1.0);
                }
                prop_assert!(cv.c1[i] > 0.0 && cv.c2[i] > 0.0);
            }
        }
    }
}
