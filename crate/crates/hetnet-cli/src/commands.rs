//! The four commands: threshold sweeps, tradeoff optimization, Monte Carlo
//! runs, and network diagnostics. Each returns a fully materialized CSV
//! document plus a status; nothing is written until a command succeeds.

use crate::config::LoadedConfig;
use crate::output::{fmt_f64, CsvDocument};
use crate::{CliError, CommandStatus};
use hetnet::coverage::{self, CoverageError};
use hetnet::metrics::{self, Mode};
use hetnet::montecarlo::{self, SimConfig};
use hetnet::optimize::{self, GeneralOptions, OptimizeError};

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Inclusive sweep grid; rejects empty or ill-formed ranges before any
/// output exists.
pub fn sweep_grid(from: f64, to: f64, step: f64) -> Result<Vec<f64>, CliError> {
    if !(step > 0.0) || !step.is_finite() {
        return Err(CliError::Config(format!("sweep step must be positive, got {step}")));
    }
    if !(from <= to) {
        return Err(CliError::Config(format!(
            "empty sweep: from {from} exceeds to {to}"
        )));
    }
    let mut grid = Vec::new();
    let mut index = 0u32;
    loop {
        let value = from + f64::from(index) * step;
        if value > to + 1e-9 * step {
            break;
        }
        grid.push(value);
        index += 1;
    }
    Ok(grid)
}

fn numeric(err: CoverageError) -> CliError {
    match err {
        CoverageError::Hypergeometric { .. } | CoverageError::NegativeReciprocal { .. } => {
            CliError::Numeric(err.to_string())
        }
        other => CliError::Config(other.to_string()),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum PsMode {
    Exact,
    Asymptotic,
    Both,
}

pub fn cmd_ps(
    loaded: &LoadedConfig,
    grid_db: &[f64],
    mode: PsMode,
) -> Result<(CsvDocument, CommandStatus), CliError> {
    let model = &loaded.model;
    let k = model.num_tiers();
    let exact_on = mode != PsMode::Asymptotic;
    let asym_on = mode != PsMode::Exact;

    let mut columns = vec!["gamma_db".to_string()];
    if exact_on {
        columns.push("ps_exact".to_string());
    }
    if asym_on {
        columns.push("ps_asym".to_string());
    }
    if exact_on {
        columns.extend((1..=k).map(|i| format!("ps_exact_tier_{i}")));
    }
    if asym_on {
        columns.extend((1..=k).map(|i| format!("ps_asym_tier_{i}")));
    }
    let mut doc = CsvDocument::new(columns);

    for &db in grid_db {
        let gamma = db_to_linear(db);
        let mut row = vec![fmt_f64(db)];
        if exact_on {
            row.push(fmt_f64(coverage::ps_exact(model, gamma).map_err(numeric)?));
        }
        if asym_on {
            row.push(fmt_f64(coverage::ps_asymptotic(model, gamma).map_err(numeric)?));
        }
        if exact_on {
            for tier in 0..k {
                if model.tiers()[tier].lambda > 0.0 {
                    row.push(fmt_f64(
                        coverage::ps_exact_tier(model, tier, gamma).map_err(numeric)?,
                    ));
                } else {
                    row.push(fmt_f64(f64::NAN));
                }
            }
        }
        if asym_on {
            for tier in 0..k {
                row.push(fmt_f64(
                    coverage::ps_asymptotic_tier(model, tier, gamma).map_err(numeric)?,
                ));
            }
        }
        doc.push_row(row);
    }
    Ok((doc, CommandStatus::Success))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum TradeoffMethod {
    Usdma,
    General,
    Grid,
}

pub struct TradeoffParams {
    pub grid_theta: Vec<f64>,
    pub gamma_db: f64,
    pub method: TradeoffMethod,
    pub restarts: usize,
    pub epsilon: f64,
    pub max_iters: usize,
    pub seed: u64,
    pub resolution: usize,
}

pub fn cmd_tradeoff(
    loaded: &LoadedConfig,
    params: &TradeoffParams,
) -> Result<(CsvDocument, CommandStatus), CliError> {
    let model = &loaded.model;
    let k = model.num_tiers();
    if params.method == TradeoffMethod::Usdma && !model.is_unbiased_usdma() {
        return Err(CliError::Config(
            "method usdma requires an unbiased configuration with a common user count".into(),
        ));
    }
    let gamma = db_to_linear(params.gamma_db);
    let options = GeneralOptions {
        restarts: params.restarts,
        epsilon: params.epsilon,
        max_iters: params.max_iters,
        seed: params.seed,
    };

    let mut columns = vec![
        "theta".to_string(),
        "feasible".to_string(),
        "ase_km2".to_string(),
        "ase_m2".to_string(),
        "ps_achieved".to_string(),
    ];
    columns.extend((1..=k).map(|i| format!("lambda_{i}")));
    columns.push("restarts".to_string());
    columns.push("converged".to_string());
    let mut doc = CsvDocument::new(columns);

    let mut any_feasible = false;
    let mut any_nonconverged = false;
    for &theta in &params.grid_theta {
        if !(0.0..=1.0).contains(&theta) {
            return Err(CliError::Config(format!("theta {theta} outside [0, 1]")));
        }
        let outcome = match params.method {
            TradeoffMethod::Usdma => optimize::optimize_usdma(model, theta, gamma),
            TradeoffMethod::General => optimize::optimize_general(model, theta, gamma, options),
            TradeoffMethod::Grid => {
                optimize::grid_search_oracle(model, theta, gamma, params.resolution)
            }
        };
        let row = match outcome {
            Ok(result) if result.feasible => {
                any_feasible = true;
                if !result.converged {
                    any_nonconverged = true;
                }
                let mut row = vec![
                    fmt_f64(theta),
                    "true".to_string(),
                    fmt_f64(result.ase_km2),
                    fmt_f64(metrics::ase_km2_to_m2(result.ase_km2)),
                    fmt_f64(result.ps),
                ];
                row.extend(result.lambda_opt.iter().map(|&l| fmt_f64(l)));
                row.push(result.restarts.to_string());
                row.push(result.converged.to_string());
                row
            }
            Ok(_) | Err(OptimizeError::Infeasible { .. }) => infeasible_row(theta, k),
            Err(OptimizeError::Metrics(e)) => return Err(CliError::Config(e.to_string())),
            Err(e) => return Err(CliError::Config(e.to_string())),
        };
        doc.push_row(row);
    }
    let status = if !any_feasible {
        CommandStatus::InfeasibleOnly
    } else if any_nonconverged {
        CommandStatus::NonConverged
    } else {
        CommandStatus::Success
    };
    Ok((doc, status))
}

fn infeasible_row(theta: f64, k: usize) -> Vec<String> {
    let mut row = vec![
        fmt_f64(theta),
        "false".to_string(),
        "nan".to_string(),
        "nan".to_string(),
        "nan".to_string(),
    ];
    row.extend(std::iter::repeat("nan".to_string()).take(k));
    row.push("0".to_string());
    row.push("true".to_string());
    row
}

pub struct SimulateParams {
    pub trials: u64,
    pub seed: u64,
    pub gamma_db: Vec<f64>,
    pub region_radius_m: f64,
}

pub fn cmd_simulate(
    loaded: &LoadedConfig,
    params: &SimulateParams,
) -> Result<(CsvDocument, CommandStatus), CliError> {
    if params.trials < 100 {
        return Err(CliError::Config(format!(
            "trials must be at least 100 for a meaningful standard error, got {}",
            params.trials
        )));
    }
    if params.gamma_db.is_empty() {
        return Err(CliError::Config("at least one --gamma-db value required".into()));
    }
    let model = &loaded.model;
    let k = model.num_tiers();
    let grid: Vec<f64> = params.gamma_db.iter().map(|&db| db_to_linear(db)).collect();
    let sim = SimConfig {
        trials: params.trials,
        seed: params.seed,
        region_radius_m: params.region_radius_m,
        gamma_hat_grid: grid,
    };
    let report =
        montecarlo::simulate_ps(model, &sim).map_err(|e| CliError::Config(e.to_string()))?;

    let mut columns = vec![
        "gamma_db".to_string(),
        "ps_hat".to_string(),
        "stderr".to_string(),
    ];
    columns.extend((1..=k).map(|i| format!("ps_tier_{i}")));
    columns.extend((1..=k).map(|i| format!("assoc_tier_{i}")));
    columns.push("trials".to_string());
    columns.push("seed".to_string());
    columns.push("radius_m".to_string());
    let mut doc = CsvDocument::new(columns);

    for (gi, &db) in params.gamma_db.iter().enumerate() {
        let mut row = vec![
            fmt_f64(db),
            fmt_f64(report.ps_hat[gi]),
            fmt_f64(report.stderr[gi]),
        ];
        row.extend(report.per_tier_success[gi].iter().map(|&v| fmt_f64(v)));
        row.extend(report.association_freq.iter().map(|&v| fmt_f64(v)));
        row.push(report.trials_used.to_string());
        row.push(report.seed.to_string());
        row.push(fmt_f64(report.region_radius_m));
        doc.push_row(row);
    }
    Ok((doc, CommandStatus::Success))
}

pub struct DiagnoseReport {
    pub text: String,
    pub doc: CsvDocument,
}

pub fn cmd_diagnose(loaded: &LoadedConfig, gamma_db: f64) -> Result<DiagnoseReport, CliError> {
    let model = &loaded.model;
    let gamma = db_to_linear(gamma_db);
    let cv = model
        .coefficient_vectors()
        .map_err(|e| CliError::Config(e.to_string()))?;
    let ratios: Vec<f64> = cv.c.iter().zip(&cv.d).map(|(c, d)| c / d).collect();
    let ceilings = model.density_ceilings();
    let signs = metrics::monotonicity_signs_at(model, &ceilings)
        .map_err(|e| CliError::Config(e.to_string()))?;
    let asym = metrics::ps_max(model, gamma, Mode::Asymptotic)
        .map_err(|e| CliError::Config(e.to_string()))?;
    let exact = if model.is_unbiased_usdma() {
        Some(
            metrics::ps_max(model, gamma, Mode::Exact)
                .map_err(|e| CliError::Config(e.to_string()))?,
        )
    } else {
        None
    };
    let ceiling = exact.as_ref().map_or(asym.value, |e| e.value);

    let mut text = String::new();
    text.push_str(&format!("network: {} tiers, alpha = {}, gamma = {gamma_db} dB\n", model.num_tiers(), model.alpha()));
    for (i, r) in ratios.iter().enumerate() {
        let sign = match signs[i] {
            1 => "+1 (densifying raises reliability)",
            -1 => "-1 (densifying lowers reliability)",
            _ => "0 (reliability invariant)",
        };
        text.push_str(&format!("tier {}: c/d ratio = {r:.6}, sign at lambda_max = {sign}\n", i + 1));
    }
    let all_equal = ratios.iter().all(|r| (r - ratios[0]).abs() < 1e-14);
    if all_equal {
        text.push_str("invariance: p_s independent of all densities (equal c/d ratios)\n");
    }
    text.push_str(&format!(
        "asymptotic p_s_max = {:.6} achieved by tier {}\n",
        asym.value,
        asym.tier_index + 1
    ));
    if let Some(e) = &exact {
        text.push_str(&format!(
            "exact p_s_max (unbiased common-U) = {:.6} achieved by tier {} (most antennas)\n",
            e.value,
            e.tier_index + 1
        ));
    }
    text.push_str(&format!("feasibility ceiling: theta <= {ceiling:.6}\n"));

    let mut doc = CsvDocument::new(vec![
        "tier".to_string(),
        "cd_ratio".to_string(),
        "sign_at_lambda_max".to_string(),
        "is_max_tier".to_string(),
        "ps_max_asymptotic".to_string(),
        "ps_max_exact".to_string(),
        "theta_ceiling".to_string(),
    ]);
    for (i, r) in ratios.iter().enumerate() {
        doc.push_row(vec![
            (i + 1).to_string(),
            fmt_f64(*r),
            signs[i].to_string(),
            (i == exact.as_ref().map_or(asym.tier_index, |e| e.tier_index)).to_string(),
            fmt_f64(asym.value),
            fmt_f64(exact.as_ref().map_or(f64::NAN, |e| e.value)),
            fmt_f64(ceiling),
        ]);
    }
    Ok(DiagnoseReport { text, doc })
}
