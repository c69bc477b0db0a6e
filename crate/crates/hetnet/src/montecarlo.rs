//! Seeded Monte Carlo oracle for the network model.
//!
//! Each trial drops every tier as an independent Poisson point process in a
//! disc around the typical user (Slivnyak: the user sits at the origin),
//! applies the biased association rule to the per-tier nearest stations,
//! draws the channel gains, and forms the SIR. Gains follow the analytical
//! model: the serving link draws `Gamma(D_k, 1)` and every interfering
//! station in tier `j` draws `Gamma(U_j, 1)`, so the simulator validates
//! the coverage series machinery rather than a physical-layer precoder.
//!
//! Trials are keyed to `(seed, trial index)` through independent ChaCha
//! streams, so results are reproducible bit for bit regardless of the
//! parallel schedule.

use crate::model::NetworkModel;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("trial count must be at least 1")]
    NoTrials,
    #[error("threshold grid must be nonempty")]
    EmptyGrid,
    #[error("SIR thresholds must be positive and finite, got {value}")]
    BadThreshold { value: f64 },
    #[error("region radius must be nonnegative and finite, got {value}")]
    BadRadius { value: f64 },
}

/// Monte Carlo run parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub trials: u64,
    pub seed: u64,
    /// Simulation disc radius in meters; 0 selects the automatic radius.
    pub region_radius_m: f64,
    /// SIR thresholds, linear scale.
    pub gamma_hat_grid: Vec<f64>,
}

impl SimConfig {
    pub fn new(trials: u64, seed: u64, gamma_hat_grid: Vec<f64>) -> Self {
        Self {
            trials,
            seed,
            region_radius_m: 0.0,
            gamma_hat_grid,
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if self.trials == 0 {
            return Err(SimError::NoTrials);
        }
        if self.gamma_hat_grid.is_empty() {
            return Err(SimError::EmptyGrid);
        }
        for &g in &self.gamma_hat_grid {
            if !(g > 0.0) || !g.is_finite() {
                return Err(SimError::BadThreshold { value: g });
            }
        }
        if !(self.region_radius_m >= 0.0) || !self.region_radius_m.is_finite() {
            return Err(SimError::BadRadius {
                value: self.region_radius_m,
            });
        }
        Ok(())
    }

    /// Explicit radius if set, otherwise [`auto_region_radius_m`].
    pub fn resolved_radius_m(&self, model: &NetworkModel) -> f64 {
        if self.region_radius_m > 0.0 {
            self.region_radius_m
        } else {
            auto_region_radius_m(model)
        }
    }
}

/// Smallest disc radius (meters) whose expected station count is at least
/// 10^4 in total and at least 10^3 for the densest tier.
pub fn auto_region_radius_m(model: &NetworkModel) -> f64 {
    const MIN_TOTAL: f64 = 1e4;
    const MIN_DENSEST: f64 = 1e3;
    let total_per_m2: f64 = model.tiers().iter().map(|t| t.lambda * 1e-6).sum();
    let densest_per_m2 = model
        .tiers()
        .iter()
        .map(|t| t.lambda * 1e-6)
        .fold(0.0, f64::max);
    let r_total = (MIN_TOTAL / (std::f64::consts::PI * total_per_m2)).sqrt();
    let r_densest = (MIN_DENSEST / (std::f64::consts::PI * densest_per_m2)).sqrt();
    r_total.max(r_densest)
}

/// Result of a single deployment draw.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialOutcome {
    pub serving_tier: usize,
    pub serving_distance_m: f64,
    pub sir: f64,
}

impl TrialOutcome {
    pub fn succeeds(&self, gamma_hat: f64) -> bool {
        self.sir >= gamma_hat
    }
}

/// Empirical success probabilities with their uncertainty and per-tier
/// breakdown.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationReport {
    pub gamma_hat_grid: Vec<f64>,
    /// Empirical success probability per threshold.
    pub ps_hat: Vec<f64>,
    /// Binomial standard error per threshold.
    pub stderr: Vec<f64>,
    /// Conditional success frequency per threshold and tier (0 when the
    /// tier never served).
    pub per_tier_success: Vec<Vec<f64>>,
    /// Fraction of trials served by each tier; sums to one.
    pub association_freq: Vec<f64>,
    pub trials_used: u64,
    /// Trials redrawn because no tier realized any station.
    pub redrawn_trials: u64,
    pub seed: u64,
    pub region_radius_m: f64,
    /// Expected station count in the region (radius-adequacy audit).
    pub expected_bs_in_region: f64,
    /// Expected station count of the densest tier.
    pub expected_bs_densest_tier: f64,
}

/// Gamma(shape, 1) for integer shape as the negative log of a product of
/// uniforms, chunked so the running product never underflows.
fn gamma_integer_shape<R: Rng>(shape: u32, rng: &mut R) -> f64 {
    let mut acc = 0.0;
    let mut product = 1.0f64;
    let mut in_chunk = 0u32;
    for _ in 0..shape {
        product *= 1.0 - rng.gen::<f64>();
        in_chunk += 1;
        if in_chunk == 40 {
            acc -= product.ln();
            product = 1.0;
            in_chunk = 0;
        }
    }
    acc - product.ln()
}

/// One deployment: sample every tier's PPP in the disc, associate by
/// maximum biased received power among per-tier nearest stations, draw the
/// serving gain, and form the SIR with the serving station excluded from
/// the interference. Returns the outcome and the number of redraws that
/// were needed because every tier came up empty.
pub fn run_trial<R: Rng>(
    model: &NetworkModel,
    region_radius_m: f64,
    rng: &mut R,
) -> (TrialOutcome, u64) {
    let alpha = model.alpha();
    let half_alpha = alpha * 0.5;
    let alpha_is_four = alpha == 4.0;
    let pow_neg_alpha = |r2: f64| -> f64 {
        if alpha_is_four {
            1.0 / (r2 * r2)
        } else {
            r2.powf(-half_alpha)
        }
    };
    let r2_max = region_radius_m * region_radius_m;
    let num_tiers = model.num_tiers();

    let mut redraws = 0u64;
    loop {
        // Per tier: nearest-station record and total interferer-style power.
        let mut nearest_r2 = vec![f64::INFINITY; num_tiers];
        let mut nearest_contribution = vec![0.0f64; num_tiers];
        let mut tier_power_sum = vec![0.0f64; num_tiers];
        let mut any_station = false;

        for (j, tier) in model.tiers().iter().enumerate() {
            let lambda_m2 = tier.lambda * 1e-6;
            if lambda_m2 == 0.0 {
                continue;
            }
            let mean = lambda_m2 * std::f64::consts::PI * r2_max;
            let count = Poisson::new(mean).expect("positive mean").sample(rng) as u64;
            if count == 0 {
                continue;
            }
            any_station = true;
            let per_user_power = tier.power / f64::from(tier.users);
            for _ in 0..count {
                // Uniform position in the disc: squared distance is
                // uniform on [0, R²]; the angle never matters.
                let r2 = r2_max * rng.gen::<f64>();
                let gain = gamma_integer_shape(tier.users, rng);
                let w = per_user_power * gain * pow_neg_alpha(r2);
                tier_power_sum[j] += w;
                if r2 < nearest_r2[j] {
                    nearest_r2[j] = r2;
                    nearest_contribution[j] = w;
                }
            }
        }
        if !any_station {
            redraws += 1;
            continue;
        }

        // Association: maximize P_j B_j r_j^{-alpha} over non-empty tiers.
        let mut serving = usize::MAX;
        let mut best_metric = f64::NEG_INFINITY;
        for (j, tier) in model.tiers().iter().enumerate() {
            if nearest_r2[j].is_finite() {
                let metric = tier.power * tier.bias * pow_neg_alpha(nearest_r2[j]);
                if metric > best_metric {
                    best_metric = metric;
                    serving = j;
                }
            }
        }
        let serving_tier_cfg = &model.tiers()[serving];
        let interference: f64 =
            tier_power_sum.iter().sum::<f64>() - nearest_contribution[serving];
        let serving_gain = gamma_integer_shape(serving_tier_cfg.degrees_of_freedom(), rng);
        let signal = serving_tier_cfg.power / f64::from(serving_tier_cfg.users)
            * serving_gain
            * pow_neg_alpha(nearest_r2[serving]);
        let sir = if interference > 0.0 {
            signal / interference
        } else {
            f64::INFINITY
        };
        return (
            TrialOutcome {
                serving_tier: serving,
                serving_distance_m: nearest_r2[serving].sqrt(),
                sir,
            },
            redraws,
        );
    }
}

/// Runs `sim.trials` independent trials, in parallel, each on its own
/// ChaCha stream keyed by the trial index. The returned outcomes are in
/// trial order and identical for any thread count.
pub fn run_trials(
    model: &NetworkModel,
    sim: &SimConfig,
) -> Result<(Vec<TrialOutcome>, u64), SimError> {
    sim.validate()?;
    let radius = sim.resolved_radius_m(model);
    let results: Vec<(TrialOutcome, u64)> = (0..sim.trials as usize)
        .into_par_iter()
        .with_min_len(64)
        .map(|index| {
            let mut rng = ChaCha8Rng::seed_from_u64(sim.seed);
            rng.set_stream(index as u64);
            run_trial(model, radius, &mut rng)
        })
        .collect();
    let redraws = results.iter().map(|(_, r)| r).sum();
    Ok((results.into_iter().map(|(o, _)| o).collect(), redraws))
}

/// Estimates the success probability on the threshold grid, along with
/// per-tier association and conditional success frequencies.
///
/// Deterministic: the same model and configuration produce an identical
/// report.
pub fn simulate_ps(model: &NetworkModel, sim: &SimConfig) -> Result<SimulationReport, SimError> {
    let (outcomes, redrawn_trials) = run_trials(model, sim)?;
    let radius = sim.resolved_radius_m(model);
    let num_tiers = model.num_tiers();
    let grid = &sim.gamma_hat_grid;
    let trials = sim.trials;

    let mut assoc_counts = vec![0u64; num_tiers];
    let mut success_counts = vec![0u64; grid.len()];
    let mut tier_success_counts = vec![vec![0u64; num_tiers]; grid.len()];
    for outcome in &outcomes {
        assoc_counts[outcome.serving_tier] += 1;
        for (gi, &gamma) in grid.iter().enumerate() {
            if outcome.succeeds(gamma) {
                success_counts[gi] += 1;
                tier_success_counts[gi][outcome.serving_tier] += 1;
            }
        }
    }

    let ps_hat: Vec<f64> = success_counts
        .iter()
        .map(|&c| c as f64 / trials as f64)
        .collect();
    let stderr = ps_hat
        .iter()
        .map(|&p| (p * (1.0 - p) / trials as f64).sqrt())
        .collect();
    let per_tier_success = tier_success_counts
        .iter()
        .map(|row| {
            row.iter()
                .zip(&assoc_counts)
                .map(|(&s, &a)| if a == 0 { 0.0 } else { s as f64 / a as f64 })
                .collect()
        })
        .collect();
    let association_freq = assoc_counts
        .iter()
        .map(|&c| c as f64 / trials as f64)
        .collect();

    let expected_bs_in_region: f64 = model
        .tiers()
        .iter()
        .map(|t| t.lambda * 1e-6 * std::f64::consts::PI * radius * radius)
        .sum();
    let expected_bs_densest_tier = model
        .tiers()
        .iter()
        .map(|t| t.lambda * 1e-6 * std::f64::consts::PI * radius * radius)
        .fold(0.0, f64::max);

    Ok(SimulationReport {
        gamma_hat_grid: grid.clone(),
        ps_hat,
        stderr,
        per_tier_success,
        association_freq,
        trials_used: trials,
        redrawn_trials,
        seed: sim.seed,
        region_radius_m: radius,
        expected_bs_in_region,
        expected_bs_densest_tier,
    })
}
