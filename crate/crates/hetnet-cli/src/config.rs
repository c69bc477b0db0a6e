//! Configuration file schema and loading.
//!
//! A network is a JSON object with a path-loss exponent and a tier array:
//!
//! ```json
//! {
//!   "alpha": 4.0,
//!   "tiers": [
//!     { "lambda_per_km2": 100, "power_w": 6.3, "bias": "1/U",
//!       "antennas": 8, "users": 4 }
//!   ]
//! }
//! ```
//!
//! `bias` is either a positive number or the literal string `"1/U"` for a
//! bias equal to the reciprocal of the tier's user count; it defaults to 1.
//! `lambda_max_per_km2` defaults to `lambda_per_km2`.

use crate::CliError;
use hetnet::model::{NetworkModel, TierConfig};
use serde::Deserialize;
use sha2::{Digest, Sha256};
use std::path::Path;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    alpha: f64,
    tiers: Vec<RawTier>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTier {
    lambda_per_km2: f64,
    #[serde(default)]
    lambda_max_per_km2: Option<f64>,
    power_w: f64,
    #[serde(default)]
    bias: Option<BiasSpec>,
    antennas: u32,
    users: u32,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum BiasSpec {
    Value(f64),
    Formula(String),
}

/// A model together with the hash of the bytes it was parsed from.
pub struct LoadedConfig {
    pub model: NetworkModel,
    pub sha256: String,
    pub path: String,
}

pub fn load(path: &Path) -> Result<LoadedConfig, CliError> {
    let bytes = std::fs::read(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let raw: RawConfig = serde_json::from_slice(&bytes)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let mut tiers = Vec::with_capacity(raw.tiers.len());
    for (index, tier) in raw.tiers.iter().enumerate() {
        let bias = match &tier.bias {
            None => 1.0,
            Some(BiasSpec::Value(v)) => *v,
            Some(BiasSpec::Formula(s)) if s == "1/U" => {
                if tier.users == 0 {
                    return Err(CliError::Config(format!(
                        "tier {index}: bias \"1/U\" requires users >= 1"
                    )));
                }
                1.0 / f64::from(tier.users)
            }
            Some(BiasSpec::Formula(s)) => {
                return Err(CliError::Config(format!(
                    "tier {index}: unsupported bias expression {s:?} (use a number or \"1/U\")"
                )));
            }
        };
        let lambda_max = tier.lambda_max_per_km2.unwrap_or(tier.lambda_per_km2);
        tiers.push(
            TierConfig::new(tier.lambda_per_km2, tier.power_w, bias, tier.antennas, tier.users)
                .with_lambda_max(lambda_max),
        );
    }
    let model = NetworkModel::new(raw.alpha, tiers)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let sha256 = hex_digest(&bytes);
    Ok(LoadedConfig {
        model,
        sha256,
        path: path.display().to_string(),
    })
}

fn hex_digest(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    digest.iter().map(|b| format!("{b:02x}")).collect()
}
