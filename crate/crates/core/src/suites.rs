//! Seeded property suites over the Fock-space oracle.
//!
//! Each runner returns a [`SuiteReport`] listing every violated case, so a
//! failing run can be reproduced from the printed seed and parameters.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::closed_form::{f_of_delta, EprUncertainty};
use crate::fock::{
    d0_moment_check, d0_monte_carlo, epr_uncertainty_state, prop1_check, random_schmidt_sequence,
    random_state_with_bases, tmss_state, BasisKind, Support, TruncatedPureState, C64,
};
use crate::schmidt::{
    delta_functional, fixed_point, minimize_entropy_constrained, recursion_iterate,
    MinimizeOptions, RecursionOutcome,
};
use crate::symplectic::StandardFormParams;
use crate::Result;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub name: &'static str,
    pub cases: usize,
    /// Smallest slack seen; negative beyond the tolerance means a violation.
    pub worst_margin: f64,
    pub failures: Vec<String>,
    /// Per-case notes worth printing even on success.
    pub notes: Vec<String>,
}

impl SuiteReport {
    fn new(name: &'static str) -> Self {
        Self {
            name,
            cases: 0,
            worst_margin: f64::INFINITY,
            failures: Vec::new(),
            notes: Vec::new(),
        }
    }

    fn record(&mut self, margin: f64, failure: Option<String>) {
        self.cases += 1;
        self.worst_margin = self.worst_margin.min(margin);
        if let Some(f) = failure {
            self.failures.push(f);
        }
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty() && self.cases > 0
    }

    pub fn summary(&self) -> String {
        format!(
            "{}: {} ({} cases, {} failures, worst margin {:.3e})",
            self.name,
            if self.passed() { "PASS" } else { "FAIL" },
            self.cases,
            self.failures.len(),
            self.worst_margin
        )
    }
}

/// Default slack for the Schmidt-sequence inequality `Δ(ψ) ≥ δ(c)`.
pub const LEMMA1_TOL: f64 = 1e-8;
/// Default slack for `E(ψ) ≥ f(Δ(ψ))`.
pub const PROP1_TOL: f64 = 1e-8;
/// Default largest `E − f(Δ)` accepted as equality for squeezed states.
pub const PROP1_EQUALITY_GAP: f64 = 1e-6;
/// Monte Carlo shards of the d0 suite, fixed so results do not depend on
/// the thread count.
pub const D0_SHARDS: usize = 64;

/// `Δ(ψ) ≥ δ(c)` for states with prescribed Schmidt coefficients `c` in
/// random local bases, at dimensions `2..=max_dim`.
pub fn run_lemma1(seed: u64, trials: usize, max_dim: usize, tol: f64) -> Result<SuiteReport> {
    let mut report = SuiteReport::new("lemma1");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let max_dim = max_dim.max(2);
    for trial in 0..trials {
        let d = rng.random_range(2..=max_dim);
        let len = rng.random_range(1..=d);
        let target = random_schmidt_sequence(&mut rng, len);
        let basis = match trial % 4 {
            0 => BasisKind::Fock,
            1 => BasisKind::NearFock(rng.random_range(0.01..0.2)),
            _ => BasisKind::Haar,
        };
        let state_seed: u64 = rng.random();
        let psi = random_state_with_bases(state_seed, d, Some(&target), basis)?;
        let delta = epr_uncertainty_state(&psi)?.value();
        let bound = delta_functional(&target);
        let margin = delta - bound;
        let failure = (margin < -tol).then(|| {
            format!(
                "trial {trial}: seed {state_seed}, d {d}, basis {basis:?}, c {:?}: Δ(ψ) = {delta:.12e} < δ(c) = {bound:.12e}",
                target.coefficients()
            )
        });
        report.record(margin, failure);
    }
    Ok(report)
}

/// Constrained minimization of `e(c)` at truncation `d` against `f(Δ)` and
/// the geometric ratio `(1 − Δ)/(1 + Δ)` over the first `ratio_count`
/// indices.
pub fn run_lemma2(
    deltas: &[f64],
    d: usize,
    seed: u64,
    value_tol: f64,
    ratio_tol: f64,
    ratio_count: usize,
) -> Result<SuiteReport> {
    let mut report = SuiteReport::new("lemma2");
    for &delta in deltas {
        let delta = EprUncertainty::new(delta)?;
        let options = MinimizeOptions {
            seed,
            ..MinimizeOptions::default()
        };
        let out = minimize_entropy_constrained(delta, d, &options)?;
        let f = f_of_delta(delta);
        let q = (1.0 - delta.value()) / (1.0 + delta.value());
        let value_gap = (out.minimum_bits - f).abs();
        let ratio_gap = out
            .ratios(ratio_count)
            .iter()
            .fold(0.0f64, |m, x| m.max((x - q).abs()));
        let margin = (value_tol - value_gap).min(ratio_tol - ratio_gap);
        report.notes.push(format!(
            "Δ = {}: min e = {:.10}, f(Δ) = {:.10}, |gap| = {:.3e}, max ratio error = {:.3e}, feasibility {:.1e}",
            delta.value(),
            out.minimum_bits,
            f,
            value_gap,
            ratio_gap,
            out.feasibility_residual
        ));
        let failure = (margin < 0.0).then(|| {
            format!(
                "Δ = {}: minimum {:.10} vs f(Δ) {:.10}, ratios {:?} vs {q:.10}",
                delta.value(),
                out.minimum_bits,
                f,
                out.ratios(ratio_count)
            )
        });
        report.record(margin, failure);
    }
    Ok(report)
}

/// `E(ψ) ≥ f(Δ(ψ))` on random states of dimension `≤ max_dim`, plus
/// near-equality on truncated two-mode squeezed states at `tmss_dim`.
pub fn run_prop1(
    seed: u64,
    trials: usize,
    max_dim: usize,
    tmss_rs: &[f64],
    tmss_dim: usize,
    tol: f64,
    equality_gap: f64,
) -> Result<SuiteReport> {
    let mut report = SuiteReport::new("prop1");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let max_dim = max_dim.max(2);
    for trial in 0..trials {
        let d = rng.random_range(2..=max_dim);
        let state_seed: u64 = rng.random();
        let (kind, psi) = match trial % 3 {
            0 => (
                "grid",
                random_state_with_bases(state_seed, d, None, BasisKind::Haar)?,
            ),
            1 => {
                let len = rng.random_range(1..=d);
                let target = random_schmidt_sequence(&mut rng, len);
                let eps = rng.random_range(0.0..0.3);
                (
                    "near-fock",
                    random_state_with_bases(
                        state_seed,
                        d,
                        Some(&target),
                        BasisKind::NearFock(eps),
                    )?,
                )
            }
            _ => ("phased-diagonal", phased_diagonal(&mut rng, d)?),
        };
        let check = prop1_check(&psi)?;
        let failure = (check.margin < -tol).then(|| {
            format!(
                "trial {trial}: {kind}, seed {state_seed}, d {d}: E = {:.12e} < f(Δ) = {:.12e} at Δ = {:.12e}",
                check.entropy,
                check.bound,
                check.delta.value()
            )
        });
        report.record(check.margin, failure);
    }
    for &r in tmss_rs {
        let psi = tmss_state(r, tmss_dim)?;
        let check = prop1_check(&psi)?;
        let slack = (check.margin + tol).min(equality_gap - check.margin);
        let failure = (slack < 0.0).then(|| {
            format!(
                "tmss r = {r}, d = {tmss_dim}: E − f(Δ) = {:.3e} outside [−{tol:e}, {equality_gap:e}]",
                check.margin
            )
        });
        report
            .notes
            .push(format!("tmss r = {r}: E − f(Δ) = {:.3e}", check.margin));
        report.record(check.margin.min(slack), failure);
    }
    Ok(report)
}

/// Diagonal state `Σ c_N e^{iφ_N} |N, N⟩` with a random Schmidt sequence.
fn phased_diagonal(rng: &mut impl Rng, d: usize) -> Result<TruncatedPureState> {
    let len = rng.random_range(1..=d);
    let target = random_schmidt_sequence(rng, len);
    let mut grid = DMatrix::<C64>::zeros(d, d);
    for (n, c) in target.coefficients().iter().enumerate() {
        let phi = rng.random_range(0.0..std::f64::consts::TAU);
        grid[(n, n)] = C64::from_polar(*c, phi);
    }
    TruncatedPureState::new(grid, Support::Exact)
}

/// Recursion started at `x* ∓ eps` and at `x*` for each `r`: below the fixed
/// point it collapses, above it escapes normalization, and at it stays
/// within `fixed_tol` for `steps` steps.
pub fn run_recursion(rs: &[f64], eps: f64, steps: usize, fixed_tol: f64) -> Result<SuiteReport> {
    let mut report = SuiteReport::new("recursion");
    for &r in rs {
        let x_star = fixed_point(r);
        let cases = [
            (x_star - eps, "collapses"),
            (x_star, "fixed-point"),
            (x_star + eps, "escapes-normalization"),
        ];
        for (x0, expected) in cases {
            if !(x0 > 0.0 && x0 <= 1.0) {
                report
                    .notes
                    .push(format!("r = {r}: x0 = {x0} outside (0, 1], skipped"));
                continue;
            }
            let t = recursion_iterate(r, x0, steps, fixed_tol)?;
            let got = t.outcome.label();
            let mut ok = got == expected;
            let mut margin = if ok { 0.0 } else { -1.0 };
            if t.outcome == RecursionOutcome::FixedPoint {
                let dev = t.max_deviation_from(x_star);
                margin = fixed_tol - dev;
                ok &= dev <= fixed_tol && t.xs.len() == steps + 1;
            }
            report.notes.push(format!("r = {r}, x0 = {x0:.12}: {got}"));
            let failure = (!ok).then(|| {
                format!(
                    "r = {r}, x0 = {x0:.15}: expected {expected}, got {:?} after {} values",
                    t.outcome,
                    t.xs.len()
                )
            });
            report.record(margin, failure);
        }
    }
    Ok(report)
}

/// Analytic and Monte Carlo reconstruction of a balanced symmetric state
/// from displaced squeezed states.
#[allow(clippy::too_many_arguments)]
pub fn run_d0(
    params: &StandardFormParams,
    tol: f64,
    analytic_tol: f64,
    dim: usize,
    samples: usize,
    seed: u64,
    mc_tol: f64,
) -> Result<SuiteReport> {
    let mut report = SuiteReport::new("d0");
    let check = d0_moment_check(&params.to_cm()?, tol)?;
    report.notes.push(format!(
        "analytic: Δ = {:.12}, r_Δ = {:.12}, max deviation {:.3e}",
        check.delta.value(),
        check.r_delta,
        check.max_deviation
    ));
    let failure = (check.max_deviation > analytic_tol)
        .then(|| format!("analytic mixture deviates by {:.3e}", check.max_deviation));
    report.record(analytic_tol - check.max_deviation, failure);

    if samples > 0 {
        let mc = d0_monte_carlo(&check, dim, samples, seed, D0_SHARDS)?;
        report.notes.push(format!(
            "monte carlo: d = {dim}, {samples} samples, max deviation {:.3e}, max edge occupancy {:.1e}",
            mc.max_deviation, mc.max_edge_occupancy
        ));
        let failure = (mc.max_deviation > mc_tol).then(|| {
            format!(
                "monte carlo deviates by {:.3e} (d = {dim}, {samples} samples, seed {seed})",
                mc.max_deviation
            )
        });
        report.record(mc_tol - mc.max_deviation, failure);
    }
    Ok(report)
}
