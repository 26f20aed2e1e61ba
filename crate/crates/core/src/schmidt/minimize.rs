//! Numerical minimization of `e(c)` subject to `δ(c) = Δ` over ordered
//! sequences.
//!
//! The cone `c_0 ≥ c_1 ≥ … ≥ 0` is parametrized as `c_N = Σ_{k≥N} w_k²`,
//! the unit norm is handled by evaluating on `u = c/‖c‖`, and the equality
//! constraint by an augmented Lagrangian. Inner problems are solved with
//! L-BFGS. Nothing here knows the geometric answer; it is the independent
//! check of the analytic minimizer.

use std::f64::consts::LN_2;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{
    delta_gradient, delta_of_coefficients, entropy_gradient, entropy_of_coefficients,
    SchmidtSequence,
};
use crate::closed_form::EprUncertainty;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinimizeOptions {
    pub restarts: usize,
    pub seed: u64,
    pub max_outer: usize,
    pub max_inner: usize,
    /// Required `|δ(c) − Δ|` at the returned point.
    pub feasibility_tol: f64,
    pub grad_tol: f64,
    /// Finish with a Newton solve of the stationarity equations.
    pub polish: bool,
}

impl Default for MinimizeOptions {
    fn default() -> Self {
        Self {
            restarts: 6,
            seed: 0,
            max_outer: 80,
            max_inner: 3000,
            feasibility_tol: 1e-8,
            grad_tol: 1e-11,
            polish: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RestartRecord {
    pub restart: usize,
    pub minimum_bits: f64,
    pub feasibility_residual: f64,
    pub outer_iterations: usize,
    pub feasible: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MinimizeOutcome {
    pub minimizer: SchmidtSequence,
    pub minimum_bits: f64,
    pub feasibility_residual: f64,
    /// Allowed shortfall of the minimum below `f(Δ)` from truncation:
    /// `1e-4 · 40/d`.
    pub tol_truncation: f64,
    pub restarts: Vec<RestartRecord>,
    /// Whether the Newton polish was accepted.
    pub polished: bool,
}

impl MinimizeOutcome {
    /// `c_{N+1}/c_N` for the leading `count` indices.
    pub fn ratios(&self, count: usize) -> Vec<f64> {
        self.minimizer
            .coefficients()
            .windows(2)
            .take(count)
            .map(|w| w[1] / w[0])
            .collect()
    }

    /// Spread of the per-restart minima among feasible restarts.
    pub fn restart_spread(&self) -> f64 {
        let vals: Vec<f64> = self
            .restarts
            .iter()
            .filter(|r| r.feasible)
            .map(|r| r.minimum_bits)
            .collect();
        let lo = vals.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if vals.is_empty() {
            f64::NAN
        } else {
            hi - lo
        }
    }
}

pub fn tol_truncation(d: usize) -> f64 {
    1e-4 * 40.0 / d as f64
}

/// Minimizes `e(c)` over ordered unit sequences of length `d` with
/// `δ(c) = Δ`, keeping the best feasible result over seeded restarts.
pub fn minimize_entropy_constrained(
    delta: EprUncertainty,
    d: usize,
    options: &MinimizeOptions,
) -> Result<MinimizeOutcome> {
    let target = delta.value();
    if !(target < 1.0) {
        return Err(Error::InvalidInput(
            "constrained minimization needs Δ < 1".into(),
        ));
    }
    if d < 10 {
        return Err(Error::InvalidInput(format!(
            "truncation must be >= 10, got {d}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let mut best: Option<(Vec<f64>, f64, f64)> = None;
    let mut records = Vec::with_capacity(options.restarts.max(1));

    for restart in 0..options.restarts.max(1) {
        let decay: f64 = rng.random_range(0.0..0.3);
        let w0: Vec<f64> = (0..d)
            .map(|k| rng.random_range(0.05..1.0) * (-decay * k as f64).exp())
            .collect();
        let run = augmented_lagrangian(w0, target, options);
        let u = cone_point(&run.w);
        let value = entropy_of_coefficients(&u);
        let residual = (delta_of_coefficients(&u) - target).abs();
        let feasible = residual <= options.feasibility_tol;
        records.push(RestartRecord {
            restart,
            minimum_bits: value,
            feasibility_residual: residual,
            outer_iterations: run.outer_iterations,
            feasible,
        });
        let better = match &best {
            None => true,
            Some((_, bv, br)) => {
                let best_feasible = *br <= options.feasibility_tol;
                match (feasible, best_feasible) {
                    (true, false) => true,
                    (false, true) => false,
                    (true, true) => value < *bv,
                    (false, false) => residual < *br,
                }
            }
        };
        if better {
            best = Some((u, value, residual));
        }
    }

    let (mut u, mut value, mut residual) = best.expect("at least one restart");
    if residual > options.feasibility_tol {
        return Err(Error::NonConvergence {
            best_bits: value,
            residual,
        });
    }
    let mut polished = false;
    if options.polish {
        if let Some((p, lambda)) = kkt_polish(&u, target) {
            let p_value = entropy_of_coefficients(&p);
            let p_residual = (delta_of_coefficients(&p) - target).abs();
            // the unpolished value is off by about |de/dΔ| · residual
            let slack = POLISH_SLACK + 2.0 * (lambda / LN_2).abs() * residual;
            if p_residual <= options.feasibility_tol && p_value <= value + slack {
                u = p;
                value = p_value;
                residual = p_residual;
                polished = true;
            }
        }
    }
    Ok(MinimizeOutcome {
        minimizer: SchmidtSequence::new(u)?,
        minimum_bits: value,
        feasibility_residual: residual,
        tol_truncation: tol_truncation(d),
        restarts: records,
        polished,
    })
}

/// Largest entropy increase, in bits, accepted from the Newton polish.
const POLISH_SLACK: f64 = 1e-12;

/// Coefficients below this fraction of `c_0` are re-derived by the polish.
const POLISH_TRUST: f64 = 1e-3;

/// Newton's method on the stationarity system of
/// `e(c) − λ(δ(c) − Δ) − μ(‖c‖² − 1)` in the variables `(ln c, λ, μ)`.
///
/// Row `N` of the stationarity block is divided by `c_N`, so every equation
/// is resolved relative to its own coefficient. First-order methods cannot
/// do this for coefficients whose squares fall below the rounding level of
/// `e(c)`. If the solve from all of `c0` fails, only its leading
/// coefficients are kept (fewer on each further failure); the system is
/// solved on them and then grown one coefficient at a time up to the full
/// length. Returns `None` unless every stage converges and the result is
/// positive and nonincreasing. Also returns `λ = de/dΔ` in nats.
fn kkt_polish(c0: &[f64], target: f64) -> Option<(Vec<f64>, f64)> {
    let d = c0.len();
    if c0.iter().any(|v| !(*v > 0.0)) {
        return None;
    }
    let trusted = c0
        .iter()
        .take_while(|v| **v >= POLISH_TRUST * c0[0])
        .count()
        .clamp(3.min(d), d);
    let mut starts = vec![d];
    let mut keep = trusted;
    while keep < d && starts.last() != Some(&keep) {
        starts.push(keep);
        keep = (keep / 2).max(3.min(d));
    }
    let (mut c, mut lambda, mut mu) = starts.into_iter().find_map(|keep| {
        let mut c = c0[..keep].to_vec();
        let mut gd = vec![0.0; keep];
        delta_gradient(&c, &mut gd);
        let a = DMatrix::from_fn(keep, 2, |n, j| if j == 0 { gd[n] / c[n] } else { 2.0 });
        let b = DVector::from_fn(keep, |n, _| -2.0 * ((c[n] * c[n]).ln() + 1.0));
        let lm = a.svd(true, true).solve(&b, 1e-14).ok()?;
        let (mut lambda, mut mu) = (lm[0], lm[1]);
        newton_kkt(&mut c, &mut lambda, &mut mu, target)?;
        Some((c, lambda, mu))
    })?;
    while c.len() < d {
        let k = c.len();
        c.push(c[k - 1] * (c[k - 1] / c[k - 2]));
        newton_kkt(&mut c, &mut lambda, &mut mu, target)?;
    }
    let ordered = c.windows(2).all(|w| w[1] <= w[0]);
    ordered.then_some((c, lambda))
}

fn kkt_residual(c: &[f64], lambda: f64, mu: f64, target: f64, gd: &mut Vec<f64>) -> DVector<f64> {
    let d = c.len();
    gd.resize(d, 0.0);
    delta_gradient(c, gd);
    let mut f = DVector::zeros(d + 2);
    for n in 0..d {
        f[n] = -2.0 * ((c[n] * c[n]).ln() + 1.0) - lambda * gd[n] / c[n] - 2.0 * mu;
    }
    f[d] = delta_of_coefficients(c) - target;
    f[d + 1] = c.iter().map(|v| v * v).sum::<f64>() - 1.0;
    f
}

/// Jacobian of [`kkt_residual`] in `(ln c, λ, μ)`; `gd` is `∇δ(c)`.
fn kkt_jacobian(c: &[f64], lambda: f64, gd: &[f64]) -> DMatrix<f64> {
    let d = c.len();
    let mut j = DMatrix::<f64>::zeros(d + 2, d + 2);
    for n in 0..d {
        let nf = n as f64;
        j[(n, n)] = -4.0 - 4.0 * nf * lambda + lambda * gd[n] / c[n];
        if n >= 1 {
            j[(n, n - 1)] = 2.0 * nf * lambda * c[n - 1] / c[n];
        }
        if n + 1 < d {
            j[(n, n + 1)] = 2.0 * (nf + 1.0) * lambda * c[n + 1] / c[n];
        }
        j[(n, d)] = -gd[n] / c[n];
        j[(n, d + 1)] = -2.0;
        j[(d, n)] = gd[n] * c[n];
        j[(d + 1, n)] = 2.0 * c[n] * c[n];
    }
    j
}

/// Damped Newton iteration; `None` if the scaled residual stays above
/// `1e-10`.
fn newton_kkt(c: &mut Vec<f64>, lambda: &mut f64, mu: &mut f64, target: f64) -> Option<()> {
    let d = c.len();
    let mut gd = Vec::new();
    let mut f = kkt_residual(c, *lambda, *mu, target, &mut gd);
    for _ in 0..60 {
        let merit = f.norm();
        if merit < 1e-13 {
            break;
        }
        let j = kkt_jacobian(c, *lambda, &gd);
        let step = j.lu().solve(&(-&f))?;
        let mut alpha = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let trial: Vec<f64> = (0..d).map(|n| c[n] * (alpha * step[n]).exp()).collect();
            let (tl, tm) = (*lambda + alpha * step[d], *mu + alpha * step[d + 1]);
            let tf = kkt_residual(&trial, tl, tm, target, &mut gd);
            if tf.norm() < (1.0 - 1e-4 * alpha) * merit {
                *c = trial;
                *lambda = tl;
                *mu = tm;
                f = tf;
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    (f.norm() <= 1e-10).then_some(())
}

/// `u = c/‖c‖` with `c_N = Σ_{k≥N} w_k²`.
fn cone_point(w: &[f64]) -> Vec<f64> {
    let mut c = vec![0.0; w.len()];
    let mut acc = 0.0;
    for k in (0..w.len()).rev() {
        acc += w[k] * w[k];
        c[k] = acc;
    }
    let norm = c.iter().map(|v| v * v).sum::<f64>().sqrt();
    c.iter_mut().for_each(|v| *v /= norm);
    // monotone up to rounding in the suffix sums; make it exact
    for k in 1..c.len() {
        if c[k] > c[k - 1] {
            c[k] = c[k - 1];
        }
    }
    c
}

struct AlRun {
    w: Vec<f64>,
    outer_iterations: usize,
}

fn augmented_lagrangian(mut w: Vec<f64>, target: f64, options: &MinimizeOptions) -> AlRun {
    let d = w.len();
    let mut multiplier = 0.0;
    let mut penalty = 10.0;
    let mut prev_violation = f64::INFINITY;
    let mut outer = 0;
    let mut scratch = Scratch::new(d);

    while outer < options.max_outer {
        outer += 1;
        let (m, p) = (multiplier, penalty);
        lbfgs(
            &mut w,
            |x, g| scratch.lagrangian(x, g, target, m, p),
            options.max_inner,
            options.grad_tol,
        );
        rescale(&mut w);
        let u = cone_point(&w);
        let violation = delta_of_coefficients(&u) - target;
        if violation.abs() <= 0.1 * options.feasibility_tol {
            break;
        }
        multiplier += penalty * violation;
        if violation.abs() > 0.25 * prev_violation {
            penalty = (penalty * 5.0).min(1e9);
        }
        prev_violation = violation.abs();
    }
    AlRun {
        w,
        outer_iterations: outer,
    }
}

/// Rescales `w` so that the cone point has unit norm before normalization;
/// the objective is scale-invariant, this only keeps `w` well-sized.
fn rescale(w: &mut [f64]) {
    let mut acc = 0.0;
    let mut norm_sq = 0.0;
    for k in (0..w.len()).rev() {
        acc += w[k] * w[k];
        norm_sq += acc * acc;
    }
    let s = norm_sq.sqrt().sqrt();
    if s > 0.0 && s.is_finite() {
        w.iter_mut().for_each(|v| *v /= s);
    }
}

struct Scratch {
    c: Vec<f64>,
    ge: Vec<f64>,
    gd: Vec<f64>,
}

impl Scratch {
    fn new(d: usize) -> Self {
        Self {
            c: vec![0.0; d],
            ge: vec![0.0; d],
            gd: vec![0.0; d],
        }
    }

    /// `e(u) + m·g + (p/2)·g²` with `g = δ(u) − Δ`, and its gradient in `w`.
    fn lagrangian(&mut self, w: &[f64], grad: &mut [f64], target: f64, m: f64, p: f64) -> f64 {
        let d = w.len();
        let mut acc = 0.0;
        for k in (0..d).rev() {
            acc += w[k] * w[k];
            self.c[k] = acc;
        }
        let norm = self.c.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !(norm > 0.0) {
            grad.iter_mut().for_each(|g| *g = 0.0);
            return f64::INFINITY;
        }
        self.c.iter_mut().for_each(|v| *v /= norm);
        let u = &self.c;
        let e = entropy_of_coefficients(u);
        let g = delta_of_coefficients(u) - target;
        entropy_gradient(u, &mut self.ge);
        delta_gradient(u, &mut self.gd);
        let weight = m + p * g;
        // dL/du, then project out u (normalization) and scale by 1/‖c‖
        for k in 0..d {
            self.ge[k] += weight * self.gd[k];
        }
        let along: f64 = self.ge.iter().zip(u).map(|(a, b)| a * b).sum();
        for (ge, uk) in self.ge.iter_mut().zip(u) {
            *ge = (*ge - along * uk) / norm;
        }
        // c_N = Σ_{k≥N} w_k²  ⇒  dL/dw_k = 2 w_k Σ_{N≤k} dL/dc_N
        let mut prefix = 0.0;
        for k in 0..d {
            prefix += self.ge[k];
            grad[k] = 2.0 * w[k] * prefix;
        }
        e + m * g + 0.5 * p * g * g
    }
}

/// Limited-memory BFGS with a backtracking Armijo line search.
fn lbfgs<F>(x: &mut [f64], mut f: F, max_iter: usize, grad_tol: f64)
where
    F: FnMut(&[f64], &mut [f64]) -> f64,
{
    const MEMORY: usize = 12;
    let n = x.len();
    let mut g = vec![0.0; n];
    let mut fx = f(x, &mut g);
    let mut s_hist: Vec<Vec<f64>> = Vec::new();
    let mut y_hist: Vec<Vec<f64>> = Vec::new();
    let mut rho_hist: Vec<f64> = Vec::new();
    let mut dir = vec![0.0; n];
    let mut x_new = vec![0.0; n];
    let mut g_new = vec![0.0; n];
    let mut alpha_buf = [0.0; MEMORY];
    let mut stall = 0;

    for _ in 0..max_iter {
        let gmax = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if gmax <= grad_tol {
            break;
        }
        // two-loop recursion
        dir.copy_from_slice(&g);
        let m = s_hist.len();
        for i in (0..m).rev() {
            let a = rho_hist[i] * dot(&s_hist[i], &dir);
            alpha_buf[i] = a;
            axpy(-a, &y_hist[i], &mut dir);
        }
        let gamma = if m > 0 {
            dot(&s_hist[m - 1], &y_hist[m - 1]) / dot(&y_hist[m - 1], &y_hist[m - 1])
        } else {
            1.0 / g.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-300)
        };
        dir.iter_mut().for_each(|v| *v *= gamma);
        for i in 0..m {
            let b = rho_hist[i] * dot(&y_hist[i], &dir);
            axpy(alpha_buf[i] - b, &s_hist[i], &mut dir);
        }
        dir.iter_mut().for_each(|v| *v = -*v);
        let mut slope = dot(&g, &dir);
        if !(slope < 0.0) {
            // not a descent direction: restart from steepest descent
            s_hist.clear();
            y_hist.clear();
            rho_hist.clear();
            let scale = 1.0 / g.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-300);
            for (dv, gv) in dir.iter_mut().zip(&g) {
                *dv = -gv * scale;
            }
            slope = dot(&g, &dir);
        }

        let mut step = 1.0;
        let mut accepted = false;
        for _ in 0..60 {
            for i in 0..n {
                x_new[i] = x[i] + step * dir[i];
            }
            let f_new = f(&x_new, &mut g_new);
            if f_new.is_finite() && f_new <= fx + 1e-4 * step * slope {
                let improvement = fx - f_new;
                let s: Vec<f64> = (0..n).map(|i| x_new[i] - x[i]).collect();
                let y: Vec<f64> = (0..n).map(|i| g_new[i] - g[i]).collect();
                let sy = dot(&s, &y);
                if sy > 1e-16 * dot(&y, &y).sqrt() * dot(&s, &s).sqrt() {
                    if s_hist.len() == MEMORY {
                        s_hist.remove(0);
                        y_hist.remove(0);
                        rho_hist.remove(0);
                    }
                    s_hist.push(s);
                    y_hist.push(y);
                    rho_hist.push(1.0 / sy);
                }
                x.copy_from_slice(&x_new);
                g.copy_from_slice(&g_new);
                stall = if improvement <= 1e-16 * fx.abs().max(1.0) {
                    stall + 1
                } else {
                    0
                };
                fx = f_new;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted || stall >= 5 {
            break;
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}
