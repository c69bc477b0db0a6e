//! Shared oracles for the integration suites. Everything here is an
//! independent route to a quantity the library computes another way:
//! numerical quadrature for the interference coefficients, dense triangular
//! inversion for the success probability, and vertex enumeration for the
//! box-plus-halfspace LP.

use hetnet::model::{NetworkModel, TierConfig};
use hetnet::optimize::halfspace_pivot_value;
use rand::Rng;

/// Adaptive Simpson quadrature on [a, b] to absolute tolerance `tol`.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
        let m = 0.5 * (a + b);
        let fm = f(m);
        ((b - a) / 6.0 * (fa + 4.0 * fm + fb), m, fm)
    }
    fn recurse<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        whole: f64,
        m: f64,
        fm: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let (left, lm, flm) = simpson(f, a, fa, m, fm);
        let (right, rm, frm) = simpson(f, m, fm, b, fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            left + right + delta / 15.0
        } else {
            recurse(f, a, fa, m, fm, left, lm, flm, 0.5 * tol, depth - 1)
                + recurse(f, m, fm, b, fb, right, rm, frm, 0.5 * tol, depth - 1)
        }
    }
    let fa = f(a);
    let fb = f(b);
    let (whole, m, fm) = simpson(f, a, fa, b, fb);
    recurse(f, a, fa, b, fb, whole, m, fm, tol, 48)
}

/// Interference coefficients `q_0..q_{n-1}` by direct quadrature of the
/// defining integrals (the route the power-series identity was extracted
/// from), entirely independent of the hypergeometric evaluator.
///
/// After normalizing the integration variable, tier `j` contributes
/// `δ ∫_0^{Y_j} h_m(y) y^{m-δ-1} dy` with `Y_j = P_k B_k / (P_j B_j)`,
/// `h_0(y) = 1 - (1+β_j y)^{-U_j}` (added to `A`) and
/// `h_m(y) = [(U_j)_m/m!] (β_j)^m (1+β_j y)^{-(U_j+m)}` entering with a
/// minus sign for `m >= 1`, where `β_j = γ̂ P_j U_k / (P_k U_j)`. A power
/// substitution removes the endpoint singularity before Simpson runs.
pub fn q_quadrature_oracle(
    model: &NetworkModel,
    k: usize,
    gamma_hat: f64,
    n: usize,
) -> Vec<f64> {
    let delta = model.delta();
    let serving = &model.tiers()[k];
    let pk_bk = serving.power * serving.bias;
    let mut q = vec![0.0; n];
    for tier in model.tiers() {
        if tier.lambda == 0.0 {
            continue;
        }
        let users = f64::from(tier.users);
        let beta = gamma_hat * tier.power * f64::from(serving.users)
            / (serving.power * users);
        let y_max = pk_bk / (tier.power * tier.bias);
        let weight = tier.lambda * pk_bk.powf(delta);
        // m = 0: substitute y = z^{1/(1-delta)} and integrate h0(y)/y.
        {
            let p = 1.0 / (1.0 - delta);
            let z_max = y_max.powf(1.0 - delta);
            let phi = |z: f64| -> f64 {
                if z == 0.0 {
                    users * beta
                } else {
                    let y = z.powf(p);
                    -(-users * (beta * y).ln_1p()).exp_m1() / y
                }
            };
            let integral = adaptive_simpson(&phi, 0.0, z_max, 1e-13 * z_max.max(1.0)) * p;
            q[0] += weight * delta * integral;
        }
        // m >= 1: substitute y = z^{1/(m-delta)}; the transformed
        // integrand is (1+beta y)^{-(U+m)} scaled by constants.
        let mut pochhammer = 1.0;
        let mut factorial = 1.0;
        let mut beta_pow = 1.0;
        for (m, slot) in q.iter_mut().enumerate().skip(1) {
            let mf = m as f64;
            pochhammer *= users + mf - 1.0;
            factorial *= mf;
            beta_pow *= beta;
            let exponent = 1.0 / (mf - delta);
            let z_max = y_max.powf(mf - delta);
            let psi =
                |z: f64| -> f64 { (1.0 + beta * z.powf(exponent)).powf(-(users + mf)) };
            let integral = adaptive_simpson(&psi, 0.0, z_max, 1e-13 * z_max.max(1.0));
            *slot -= weight * delta / (mf - delta) * pochhammer / factorial * beta_pow * integral;
        }
    }
    // The m = 0 integral supplies q_0 - A.
    q[0] += model.a_norm();
    q
}

/// Success probability through the dense route: build the lower-triangular
/// Toeplitz matrix from the first `D_k` interference coefficients, invert
/// it by forward substitution, and take `A` times the induced L1 norm
/// (maximum absolute column sum).
pub fn ps_dense_toeplitz(model: &NetworkModel, k: usize, gamma_hat: f64) -> f64 {
    let dof = model.tiers()[k].degrees_of_freedom() as usize;
    let q = hetnet::coverage::q_coefficients(model, k, gamma_hat, dof)
        .expect("coefficients")
        .values;
    let mut matrix = vec![vec![0.0; dof]; dof];
    for (row, entries) in matrix.iter_mut().enumerate() {
        for (col, entry) in entries.iter_mut().enumerate().take(row + 1) {
            *entry = q[row - col];
        }
    }
    // Forward substitution per unit column.
    let mut inverse = vec![vec![0.0; dof]; dof];
    for col in 0..dof {
        for row in 0..dof {
            let rhs = if row == col { 1.0 } else { 0.0 };
            let mut acc = rhs;
            for mid in 0..row {
                acc -= matrix[row][mid] * inverse[mid][col];
            }
            inverse[row][col] = acc / matrix[row][row];
        }
    }
    let norm = (0..dof)
        .map(|col| (0..dof).map(|row| inverse[row][col].abs()).sum::<f64>())
        .fold(0.0, f64::max);
    model.a_norm() * norm
}

/// Exact optimum of `max gᵀλ` over the box intersected with `aᵀλ >= 0`,
/// by enumerating every vertex of the feasible polytope: box corners that
/// satisfy the halfspace, plus box-edge intersections with the hyperplane.
pub fn lp_vertex_oracle(g: &[f64], a: &[f64], lambda_max: &[f64]) -> (Vec<f64>, f64) {
    let k = g.len();
    let dot = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(p, q)| p * q).sum::<f64>();
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut consider = |point: Vec<f64>| {
        let value = dot(g, &point);
        if best.as_ref().map_or(true, |(b, _)| value > *b) {
            best = Some((value, point));
        }
    };
    for mask in 0u32..(1 << k) {
        let corner: Vec<f64> = (0..k)
            .map(|i| if mask & (1 << i) != 0 { lambda_max[i] } else { 0.0 })
            .collect();
        if dot(a, &corner) >= 0.0 {
            consider(corner);
        }
    }
    for free in 0..k {
        if a[free] == 0.0 {
            continue;
        }
        for mask in 0u32..(1 << (k - 1)) {
            let mut point = Vec::with_capacity(k);
            let mut bit = 0;
            for i in 0..k {
                if i == free {
                    point.push(0.0);
                } else {
                    point.push(if mask & (1 << bit) != 0 { lambda_max[i] } else { 0.0 });
                    bit += 1;
                }
            }
            let value = halfspace_pivot_value(a, &point, free);
            if value >= 0.0 && value <= lambda_max[free] {
                point[free] = value;
                consider(point);
            }
        }
    }
    let (value, point) = best.expect("origin is always feasible");
    (point, value)
}

/// Deterministic random valid model for oracle sweeps. Diversity order is
/// kept at 10 or below.
pub fn random_model<R: Rng>(rng: &mut R) -> NetworkModel {
    loop {
        let k = rng.gen_range(1..=4);
        let alpha = rng.gen_range(2.2..6.0);
        let tiers: Vec<TierConfig> = (0..k)
            .map(|_| {
                let antennas = rng.gen_range(1..=12u32);
                let min_users = antennas.saturating_sub(9).max(1);
                let users = rng.gen_range(min_users..=antennas);
                let bias = if rng.gen_bool(0.3) {
                    1.0 / f64::from(users)
                } else {
                    rng.gen_range(0.1..4.0)
                };
                TierConfig::new(
                    rng.gen_range(0.5..500.0),
                    rng.gen_range(0.01..10.0),
                    bias,
                    antennas,
                    users,
                )
            })
            .collect();
        if let Ok(model) = NetworkModel::new(alpha, tiers) {
            return model;
        }
    }
}
