//! Density optimization: maximize area spectral efficiency subject to a
//! link-reliability floor.
//!
//! Two solvers cover the two regimes:
//!
//! - [`optimize_usdma`] handles unbiased networks whose tiers all serve the
//!   same number of users. There the exact ASE and reliability are both
//!   linear in the substituted variables `y_k = p_s(k) λ_k`, and a greedy
//!   that deactivates tiers in ascending order of their reliability
//!   coefficient `b_k` is provably optimal.
//! - [`optimize_general`] handles arbitrary networks through the asymptotic
//!   closed forms: a Dinkelbach outer loop reduces the quadratic-over-linear
//!   ASE to a sequence of parametric problems, each solved by sequential
//!   convex programming with a first-order expansion of the numerator. The
//!   inner subproblem is a box LP with one extra halfspace, solved exactly
//!   by [`solve_lp_box_halfspace`]. SCP only reaches local maxima, so the
//!   solver multi-starts from seeded uniform draws over the density box.
//!
//! [`grid_search_oracle`] brute-forces the same problems on a lattice and
//! exists to certify the solvers in tests and from the CLI.

use crate::coverage;
use crate::metrics::{self, ase_asymptotic_at, dot, Mode, MetricsError};
use crate::model::{ModelError, NetworkModel};
use crate::specfun;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OptimizeError {
    #[error("theta must lie in [0, 1], got {theta}")]
    InvalidTheta { theta: f64 },
    #[error(
        "reliability requirement {theta} exceeds the maximum achievable \
         success probability {ps_max}"
    )]
    Infeasible { theta: f64, ps_max: f64 },
    #[error("solver requires an unbiased network with a common number of users per tier")]
    NotUsdma,
    #[error("grid search supports at most {max} tiers, got {num_tiers}")]
    TooManyTiers { num_tiers: usize, max: usize },
    #[error("grid resolution must be at least {min}, got {resolution}")]
    ResolutionTooCoarse { resolution: usize, min: usize },
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Per-start record of how a solution was reached.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SolverTrace {
    /// Dinkelbach iterates; nondecreasing by construction.
    pub dinkelbach_t: Vec<f64>,
    /// Total inner SCP subproblems solved.
    pub scp_steps: usize,
    /// Tier indices in the order the U-SDMA greedy drove them to zero.
    pub deactivation_order: Vec<usize>,
    /// Whether the reliability constraint is binding at the solution.
    pub constraint_active: bool,
    /// Starting density vector of this run.
    pub initial_lambda: Vec<f64>,
    pub converged: bool,
}

/// Outcome of a density optimization.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizationResult {
    /// Optimal densities, per km²; empty when infeasible.
    pub lambda_opt: Vec<f64>,
    /// Achieved ASE in bit/s/Hz/km², under the solver's objective (exact
    /// for the U-SDMA solver, asymptotic for the general solver).
    pub ase_km2: f64,
    /// Achieved reliability under the solver's model.
    pub ps: f64,
    /// Exact success probability re-scored at the solution, when defined.
    pub ps_exact_rescored: Option<f64>,
    pub feasible: bool,
    pub converged: bool,
    pub traces: Vec<SolverTrace>,
    /// Number of initializations used.
    pub restarts: usize,
    pub best_restart: usize,
}

impl OptimizationResult {
    /// Trace of the winning start.
    pub fn trace(&self) -> &SolverTrace {
        &self.traces[self.best_restart]
    }
}

/// Feasibility of a reliability requirement, along with the network's
/// achievable ceiling.
#[derive(Debug, Clone, PartialEq)]
pub struct Feasibility {
    pub feasible: bool,
    pub ps_max: metrics::PsMax,
}

/// A requirement is feasible iff it does not exceed the maximum success
/// probability over the density box.
pub fn feasibility(
    model: &NetworkModel,
    theta: f64,
    gamma_hat: f64,
    mode: Mode,
) -> Result<Feasibility, OptimizeError> {
    if !(0.0..=1.0).contains(&theta) {
        return Err(OptimizeError::InvalidTheta { theta });
    }
    let ps_max = metrics::ps_max(model, gamma_hat, mode)?;
    Ok(Feasibility {
        feasible: theta <= ps_max.value,
        ps_max,
    })
}

/// Exact ASE maximization for unbiased common-U networks.
///
/// With `y_k = p_s(k) λ_k` the ASE is proportional to `Σ y_k` and the
/// reliability constraint becomes `Σ b_k y_k >= 0` with
/// `b_k = (P_k/U)^δ [1 - Θ/p_s(k)]`. Starting from the ceiling, tiers are
/// driven to zero in ascending `b_k` order (ties to the lower index) until
/// the constraint holds; the pivot tier is then raised to the fractional
/// level that makes the constraint bind exactly.
pub fn optimize_usdma(
    model: &NetworkModel,
    theta: f64,
    gamma_hat: f64,
) -> Result<OptimizationResult, OptimizeError> {
    if !model.is_unbiased_usdma() {
        return Err(OptimizeError::NotUsdma);
    }
    let feas = feasibility(model, theta, gamma_hat, Mode::Exact)?;
    if !feas.feasible {
        return Err(OptimizeError::Infeasible {
            theta,
            ps_max: feas.ps_max.value,
        });
    }
    let k = model.num_tiers();
    let delta = model.delta();
    let users = f64::from(model.tiers()[0].users);
    let ps_tier: Vec<f64> = (0..k)
        .map(|i| metrics::usdma_tier_ps(model, i, gamma_hat))
        .collect::<Result<_, _>>()?;
    let b: Vec<f64> = model
        .tiers()
        .iter()
        .zip(&ps_tier)
        .map(|(t, ps)| (t.power / users).powf(delta) * (1.0 - theta / ps))
        .collect();
    let y_max: Vec<f64> = model
        .tiers()
        .iter()
        .zip(&ps_tier)
        .map(|(t, ps)| ps * t.lambda_max)
        .collect();

    let mut y = y_max.clone();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&i, &j| b[i].partial_cmp(&b[j]).unwrap().then(i.cmp(&j)));

    let mut trace = SolverTrace {
        initial_lambda: model.density_ceilings(),
        converged: true,
        ..Default::default()
    };
    let mut next = order.iter();
    while dot(&b, &y) < 0.0 {
        let &i = next.next().expect("constraint reachable: y = 0 is feasible");
        y[i] = 0.0;
        trace.deactivation_order.push(i);
        let slack = dot(&b, &y);
        if slack >= 0.0 {
            // b[i] < 0 here: a tier with b >= 0 never helps the constraint
            // by leaving, so the greedy cannot reach one while short.
            y[i] = slack / -b[i];
            break;
        }
    }
    trace.constraint_active = !trace.deactivation_order.is_empty();

    let lambda_opt: Vec<f64> = y.iter().zip(&ps_tier).map(|(y, ps)| y / ps).collect();
    let ase_km2 = users * (1.0 + gamma_hat).log2() * y.iter().sum::<f64>();
    let ps = usdma_network_ps(model, &lambda_opt, &ps_tier);
    let ps_exact_rescored = model
        .with_densities(&lambda_opt)
        .ok()
        .and_then(|m| coverage::ps_exact(&m, gamma_hat).ok());
    Ok(OptimizationResult {
        lambda_opt,
        ase_km2,
        ps,
        ps_exact_rescored,
        feasible: true,
        converged: true,
        traces: vec![trace],
        restarts: 1,
        best_restart: 0,
    })
}

/// Network success probability of an unbiased common-U network at an
/// arbitrary density vector: a `(P_k/U)^δ λ_k`-weighted average of the
/// density-free per-tier values.
fn usdma_network_ps(model: &NetworkModel, lambda: &[f64], ps_tier: &[f64]) -> f64 {
    let delta = model.delta();
    let users = f64::from(model.tiers()[0].users);
    let mut num = 0.0;
    let mut den = 0.0;
    for ((t, &l), ps) in model.tiers().iter().zip(lambda).zip(ps_tier) {
        let w = (t.power / users).powf(delta) * l;
        num += w * ps;
        den += w;
    }
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

/// Value of the free coordinate `i` on the hyperplane `aᵀλ = 0`, the other
/// coordinates held fixed. Shared by the LP solver and the vertex
/// enumeration oracle so both produce bit-identical vertices.
pub fn halfspace_pivot_value(a: &[f64], lambda: &[f64], i: usize) -> f64 {
    let rest: f64 = a
        .iter()
        .zip(lambda)
        .enumerate()
        .filter(|(j, _)| *j != i)
        .map(|(_, (aj, lj))| aj * lj)
        .sum();
    -rest / a[i]
}

/// Exact solution of `maximize gᵀλ subject to 0 <= λ <= λ^max, aᵀλ >= 0`.
///
/// The region is never empty (`λ = 0` always qualifies). The unconstrained
/// box optimum is repaired toward the halfspace by moving coordinates in
/// ascending order of objective loss per unit of constraint gain; with a
/// single general constraint this greedy is the exact parametric LP
/// solution, and the final fractional coordinate is placed on the
/// hyperplane itself.
pub fn solve_lp_box_halfspace(g: &[f64], a: &[f64], lambda_max: &[f64]) -> Vec<f64> {
    let k = g.len();
    assert_eq!(a.len(), k);
    assert_eq!(lambda_max.len(), k);
    let mut lambda: Vec<f64> = (0..k)
        .map(|i| {
            if g[i] > 0.0 || (g[i] == 0.0 && a[i] >= 0.0) {
                lambda_max[i]
            } else {
                0.0
            }
        })
        .collect();
    if dot(a, &lambda) >= 0.0 {
        return lambda;
    }

    // (coordinate, objective cost per unit of constraint slack gained)
    let mut moves: Vec<(usize, f64)> = Vec::new();
    for i in 0..k {
        if lambda_max[i] == 0.0 {
            continue;
        }
        if lambda[i] > 0.0 && a[i] < 0.0 {
            moves.push((i, g[i].max(0.0) / -a[i]));
        } else if lambda[i] == 0.0 && a[i] > 0.0 {
            moves.push((i, -g[i] / a[i]));
        }
    }
    moves.sort_by(|(i, ri), (j, rj)| ri.partial_cmp(rj).unwrap().then(i.cmp(j)));

    for (i, _) in moves {
        let target = if lambda[i] > 0.0 { 0.0 } else { lambda_max[i] };
        let gain = a[i] * (target - lambda[i]);
        let deficit = -dot(a, &lambda);
        if deficit <= 0.0 {
            break;
        }
        if gain < deficit {
            lambda[i] = target;
        } else {
            lambda[i] = halfspace_pivot_value(a, &lambda, i).clamp(0.0, lambda_max[i]);
            break;
        }
    }
    lambda
}

/// Options for the general (Dinkelbach + SCP) solver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneralOptions {
    /// Random initializations over the density box.
    pub restarts: usize,
    /// Convergence threshold for both loops.
    pub epsilon: f64,
    /// Iteration cap per loop; exceeding it flags non-convergence.
    pub max_iters: usize,
    /// Seed for the initialization draws.
    pub seed: u64,
}

impl Default for GeneralOptions {
    fn default() -> Self {
        Self {
            restarts: 20,
            epsilon: 1e-6,
            max_iters: 100,
            seed: 0,
        }
    }
}

/// Numerator of the asymptotic ASE fraction, `N(λ) = (c1ᵀλ)(c2ᵀλ)`.
pub fn ase_numerator(c1: &[f64], c2: &[f64], lambda: &[f64]) -> f64 {
    dot(c1, lambda) * dot(c2, lambda)
}

/// Gradient `∇N(λ) = c1 (c2ᵀλ) + c2 (c1ᵀλ)`.
pub fn ase_numerator_gradient(c1: &[f64], c2: &[f64], lambda: &[f64]) -> Vec<f64> {
    let c1l = dot(c1, lambda);
    let c2l = dot(c2, lambda);
    c1.iter()
        .zip(c2)
        .map(|(a, b)| a * c2l + b * c1l)
        .collect()
}

/// Locally optimal densities for a general network under the asymptotic
/// reliability constraint `γ̂^{-δ} sinc(δ) cᵀλ / dᵀλ >= Θ`.
///
/// Each start runs a Dinkelbach iteration on `t = N(λ)/dᵀλ`; for fixed `t`
/// the parametric problem is attacked by successive first-order expansions
/// of `N`, each yielding a box-plus-halfspace LP solved exactly. The best
/// local optimum over all starts is returned, ties to the lowest start
/// index. Exceeding the iteration caps yields the best iterate flagged
/// `converged: false` rather than an error.
pub fn optimize_general(
    model: &NetworkModel,
    theta: f64,
    gamma_hat: f64,
    options: GeneralOptions,
) -> Result<OptimizationResult, OptimizeError> {
    assert!(options.restarts >= 1, "at least one start required");
    let feas = feasibility(model, theta, gamma_hat, Mode::Asymptotic)?;
    if !feas.feasible {
        return Err(OptimizeError::Infeasible {
            theta,
            ps_max: feas.ps_max.value,
        });
    }
    let delta = model.delta();
    let cv = model.coefficient_vectors()?;
    let lambda_max = model.density_ceilings();
    let scale = gamma_hat.powf(-delta) * specfun::sinc_norm(delta);
    // Halfspace form of the reliability constraint.
    let a: Vec<f64> = cv
        .c
        .iter()
        .zip(&cv.d)
        .map(|(c, d)| scale * c - theta * d)
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let mut traces = Vec::with_capacity(options.restarts);
    let mut solutions = Vec::with_capacity(options.restarts);
    for _ in 0..options.restarts {
        let initial: Vec<f64> = lambda_max.iter().map(|&m| rng.gen::<f64>() * m).collect();
        let (lambda, trace) = dinkelbach_scp(&cv.c1, &cv.c2, &cv.d, &a, &lambda_max, initial, &options);
        traces.push(trace);
        solutions.push(lambda);
    }

    let mut best_restart = 0;
    let mut best_value = f64::NEG_INFINITY;
    for (r, lambda) in solutions.iter().enumerate() {
        let value = ase_asymptotic_at(delta, &cv.c1, &cv.c2, &cv.d, lambda, gamma_hat);
        if value > best_value {
            best_value = value;
            best_restart = r;
        }
    }
    let lambda_opt = solutions[best_restart].clone();
    let d_dot = dot(&cv.d, &lambda_opt);
    let ps = if d_dot == 0.0 {
        0.0
    } else {
        scale * dot(&cv.c, &lambda_opt) / d_dot
    };
    let ps_exact_rescored = model
        .with_densities(&lambda_opt)
        .ok()
        .and_then(|m| coverage::ps_exact(&m, gamma_hat).ok());
    let converged = traces[best_restart].converged;
    Ok(OptimizationResult {
        lambda_opt,
        ase_km2: best_value,
        ps,
        ps_exact_rescored,
        feasible: true,
        converged,
        traces,
        restarts: options.restarts,
        best_restart,
    })
}

fn norm(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

fn dinkelbach_scp(
    c1: &[f64],
    c2: &[f64],
    d: &[f64],
    a: &[f64],
    lambda_max: &[f64],
    initial: Vec<f64>,
    options: &GeneralOptions,
) -> (Vec<f64>, SolverTrace) {
    let mut trace = SolverTrace {
        initial_lambda: initial.clone(),
        ..Default::default()
    };
    let mut current = if dot(d, &initial) > 0.0 {
        initial
    } else {
        lambda_max.to_vec()
    };
    let mut t = ase_numerator(c1, c2, &current) / dot(d, &current);
    trace.dinkelbach_t.push(t);

    for _ in 0..options.max_iters {
        // Inner SCP loop at fixed t.
        let mut inner_converged = false;
        for _ in 0..options.max_iters {
            let grad = ase_numerator_gradient(c1, c2, &current);
            let g: Vec<f64> = grad.iter().zip(d).map(|(gi, di)| gi - t * di).collect();
            let next = solve_lp_box_halfspace(&g, a, lambda_max);
            trace.scp_steps += 1;
            let step: f64 = current
                .iter()
                .zip(&next)
                .map(|(x, y)| (x - y) * (x - y))
                .sum::<f64>()
                .sqrt();
            let base = norm(&current);
            current = next;
            if step <= options.epsilon * base.max(f64::MIN_POSITIVE) {
                inner_converged = true;
                break;
            }
        }
        let d_dot = dot(d, &current);
        if d_dot == 0.0 {
            // Degenerate stationary point at the origin; nothing to improve.
            trace.converged = inner_converged;
            trace.constraint_active = false;
            return (current, trace);
        }
        let residual = ase_numerator(c1, c2, &current) - t * d_dot;
        if inner_converged && residual < options.epsilon {
            trace.converged = true;
            trace.constraint_active = dot(a, &current) <= options.epsilon * norm(a) * norm(&current);
            return (current, trace);
        }
        if residual > 0.0 {
            // Classical Dinkelbach update; strictly increases t.
            t += residual / d_dot;
            trace.dinkelbach_t.push(t);
        }
    }
    trace.converged = false;
    trace.constraint_active = dot(a, &current) <= options.epsilon * norm(a) * norm(&current);
    (current, trace)
}

/// Exhaustive lattice search over the density box; the certification
/// oracle for both solvers.
///
/// `resolution` counts subdivisions per axis (so each axis takes
/// `resolution + 1` values including both endpoints). For unbiased
/// common-U models the exact objective and constraint are used, matching
/// [`optimize_usdma`]; otherwise the asymptotic forms are used, matching
/// [`optimize_general`]. An infeasible requirement yields
/// `feasible = false` with an empty density vector.
pub fn grid_search_oracle(
    model: &NetworkModel,
    theta: f64,
    gamma_hat: f64,
    resolution: usize,
) -> Result<OptimizationResult, OptimizeError> {
    const MAX_TIERS: usize = 4;
    const MIN_RESOLUTION: usize = 50;
    let k = model.num_tiers();
    if k > MAX_TIERS {
        return Err(OptimizeError::TooManyTiers {
            num_tiers: k,
            max: MAX_TIERS,
        });
    }
    if resolution < MIN_RESOLUTION {
        return Err(OptimizeError::ResolutionTooCoarse {
            resolution,
            min: MIN_RESOLUTION,
        });
    }
    if !(0.0..=1.0).contains(&theta) {
        return Err(OptimizeError::InvalidTheta { theta });
    }
    let delta = model.delta();
    let lambda_max = model.density_ceilings();
    let axes: Vec<Vec<f64>> = lambda_max
        .iter()
        .map(|&m| {
            (0..=resolution)
                .map(|s| m * s as f64 / resolution as f64)
                .collect()
        })
        .collect();

    // (objective weight per tier, constraint weight per tier) for the
    // linear U-SDMA forms; None selects the asymptotic quadratic form.
    let usdma = if model.is_unbiased_usdma() {
        let users = f64::from(model.tiers()[0].users);
        let ps_tier: Vec<f64> = (0..k)
            .map(|i| metrics::usdma_tier_ps(model, i, gamma_hat))
            .collect::<Result<_, _>>()?;
        let rate = users * (1.0 + gamma_hat).log2();
        let obj: Vec<f64> = ps_tier.iter().map(|ps| rate * ps).collect();
        let con: Vec<f64> = model
            .tiers()
            .iter()
            .zip(&ps_tier)
            .map(|(t, ps)| (t.power / users).powf(delta) * (ps - theta))
            .collect();
        Some((obj, con, ps_tier))
    } else {
        None
    };
    let cv = model.coefficient_vectors()?;
    let scale = gamma_hat.powf(-delta) * specfun::sinc_norm(delta);
    let asym_con: Vec<f64> = cv
        .c
        .iter()
        .zip(&cv.d)
        .map(|(c, d)| scale * c - theta * d)
        .collect();

    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut point = vec![0.0; k];
    let mut indices = vec![0usize; k];
    loop {
        for (i, &idx) in indices.iter().enumerate() {
            point[i] = axes[i][idx];
        }
        if point.iter().any(|&l| l > 0.0) {
            let (value, feasible) = match &usdma {
                Some((obj, con, _)) => (dot(obj, &point), dot(con, &point) >= -1e-12),
                None => (
                    ase_asymptotic_at(delta, &cv.c1, &cv.c2, &cv.d, &point, gamma_hat),
                    dot(&asym_con, &point) >= -1e-12,
                ),
            };
            if feasible && best.as_ref().map_or(true, |(b, _)| value > *b) {
                best = Some((value, point.clone()));
            }
        }
        // Odometer increment over the lattice.
        let mut axis = 0;
        loop {
            if axis == k {
                break;
            }
            indices[axis] += 1;
            if indices[axis] <= resolution {
                break;
            }
            indices[axis] = 0;
            axis += 1;
        }
        if axis == k {
            break;
        }
    }

    match best {
        Some((value, lambda)) => {
            let ps = match &usdma {
                Some((_, _, ps_tier)) => usdma_network_ps(model, &lambda, ps_tier),
                None => {
                    let d_dot = dot(&cv.d, &lambda);
                    scale * dot(&cv.c, &lambda) / d_dot
                }
            };
            let ps_exact_rescored = model
                .with_densities(&lambda)
                .ok()
                .and_then(|m| coverage::ps_exact(&m, gamma_hat).ok());
            Ok(OptimizationResult {
                lambda_opt: lambda,
                ase_km2: value,
                ps,
                ps_exact_rescored,
                feasible: true,
                converged: true,
                traces: vec![SolverTrace::default()],
                restarts: 1,
                best_restart: 0,
            })
        }
        None => Ok(OptimizationResult {
            lambda_opt: Vec::new(),
            ase_km2: 0.0,
            ps: 0.0,
            ps_exact_rescored: None,
            feasible: false,
            converged: true,
            traces: vec![SolverTrace::default()],
            restarts: 1,
            best_restart: 0,
        }),
    }
}
