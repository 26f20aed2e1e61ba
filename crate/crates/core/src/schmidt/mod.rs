//! Functionals on ordered Schmidt sequences.
//!
//! A [`SchmidtSequence`] is a finite truncation of an element of
//! `{c ∈ l² : ‖c‖ = 1, c_N ≥ c_{N+1} ≥ 0}`. The entropy `e(c)` and the
//! correlation functional `δ(c)` are the two objects of the variational
//! problem; the geometric sequence is its solution.

mod minimize;
mod recursion;

pub use minimize::{minimize_entropy_constrained, MinimizeOptions, MinimizeOutcome, RestartRecord};
pub use recursion::{fixed_point, recursion_iterate, RecursionOutcome, RecursionTrajectory};

use std::f64::consts::LN_2;

use nalgebra::{Matrix2, Vector2};

use crate::closed_form::EprUncertainty;
use crate::{Error, Result};

/// Norm tolerance accepted when constructing a sequence.
pub const NORM_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct SchmidtSequence {
    c: Vec<f64>,
}

impl SchmidtSequence {
    /// Checks non-negativity, monotonicity and unit norm.
    pub fn new(c: Vec<f64>) -> Result<Self> {
        if c.is_empty() {
            return Err(Error::InvalidInput("empty Schmidt sequence".into()));
        }
        if c.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidInput(
                "Schmidt coefficients must be finite and non-negative".into(),
            ));
        }
        if let Some(i) = c.windows(2).position(|w| w[1] > w[0]) {
            return Err(Error::InvalidInput(format!(
                "Schmidt coefficients increase at index {}",
                i + 1
            )));
        }
        let norm_sq: f64 = c.iter().map(|v| v * v).sum();
        if (norm_sq - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidInput(format!(
                "Schmidt sequence has squared norm {norm_sq}"
            )));
        }
        Ok(Self { c })
    }

    /// Normalizes a non-negative, nonincreasing sequence.
    pub fn normalized(mut c: Vec<f64>) -> Result<Self> {
        let norm = c.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::InvalidInput(
                "sequence has zero or non-finite norm".into(),
            ));
        }
        c.iter_mut().for_each(|v| *v /= norm);
        Self::new(c)
    }

    /// Sorts the absolute values into nonincreasing order and normalizes.
    pub fn from_unordered(c: &[f64]) -> Result<Self> {
        let mut c: Vec<f64> = c.iter().map(|v| v.abs()).collect();
        c.sort_by(|a, b| b.total_cmp(a));
        Self::normalized(c)
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.c
    }

    pub fn len(&self) -> usize {
        self.c.len()
    }

    pub fn is_empty(&self) -> bool {
        self.c.is_empty()
    }

    /// Copy padded with zeros to length `d`.
    pub fn padded(&self, d: usize) -> Vec<f64> {
        let mut c = self.c.clone();
        c.resize(d.max(c.len()), 0.0);
        c
    }

    pub fn entropy(&self) -> f64 {
        entropy_e(self)
    }

    pub fn delta(&self) -> f64 {
        delta_functional(self)
    }
}

/// `e(c) = −Σ c_N² log₂ c_N²` with `0 log 0 = 0`.
pub fn entropy_e(c: &SchmidtSequence) -> f64 {
    entropy_of_coefficients(&c.c)
}

pub(crate) fn entropy_of_coefficients(c: &[f64]) -> f64 {
    c.iter()
        .map(|v| v * v)
        .filter(|p| *p > 0.0)
        .map(|p| -p * p.log2())
        .sum::<f64>()
        .max(0.0)
}

/// `δ(c) = 1 + 2 Σ_N N (c_N² − c_N c_{N−1})`. The `N = 0` term vanishes.
pub fn delta_functional(c: &SchmidtSequence) -> f64 {
    delta_of_coefficients(&c.c)
}

pub(crate) fn delta_of_coefficients(c: &[f64]) -> f64 {
    1.0 + 2.0
        * c.windows(2)
            .enumerate()
            .map(|(i, w)| (i + 1) as f64 * (w[1] * w[1] - w[1] * w[0]))
            .sum::<f64>()
}

/// Ratio `q = (1 − Δ)/(1 + Δ) = tanh(r_Δ)` of the geometric sequence with
/// `δ = Δ`.
pub fn geometric_ratio(delta: EprUncertainty) -> f64 {
    let d = delta.value();
    (1.0 - d) / (1.0 + d)
}

/// Normalized truncation of `c_N ∝ q^N`, `q = (1 − Δ)/(1 + Δ)`.
pub fn geometric_sequence(delta: EprUncertainty, d: usize) -> Result<SchmidtSequence> {
    if d < 2 {
        return Err(Error::InvalidInput(format!(
            "truncation length must be >= 2, got {d}"
        )));
    }
    let q = geometric_ratio(delta);
    let mut c = Vec::with_capacity(d);
    let mut v = 1.0;
    for _ in 0..d {
        c.push(v);
        v *= q;
    }
    SchmidtSequence::normalized(c)
}

/// Lagrange multipliers of the stationarity condition, with `λ` written as
/// `2r/sinh²(r)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiplierState {
    pub r: f64,
    pub lambda: f64,
    pub mu: f64,
    /// Ratios `x_N = c_{N+1}/c_N`, when attached to a sequence.
    pub x: Vec<f64>,
}

impl MultiplierState {
    pub fn new(r: f64, mu: f64) -> Result<Self> {
        if !(r > 0.0) || !r.is_finite() {
            return Err(Error::InvalidInput(format!(
                "multiplier parameter r must be > 0, got {r}"
            )));
        }
        Ok(Self {
            r,
            lambda: lambda_of_r(r),
            mu,
            x: Vec::new(),
        })
    }

    /// Multipliers of the geometric sequence with correlation `Δ`: the
    /// ratio `q` satisfies `q = e^{−2r}` in the multiplier parametrization.
    pub fn for_geometric(delta: EprUncertainty) -> Result<Self> {
        let q = geometric_ratio(delta);
        if !(q > 0.0 && q < 1.0) {
            return Err(Error::InvalidInput(format!(
                "no geometric stationary point for Δ = {}",
                delta.value()
            )));
        }
        let r = -0.5 * q.ln();
        // 2c_N[Nλ + μ − ln c_N²] = λ[N c_{N−1} + (N+1) c_{N+1}] at N = 0 with c_0² = 1 − q²
        let lambda = lambda_of_r(r);
        let mu = (1.0 - q * q).ln() + 0.5 * lambda * q;
        Ok(Self {
            r,
            lambda,
            mu,
            x: vec![q],
        })
    }

    pub fn attach(mut self, c: &SchmidtSequence) -> Self {
        self.x = c
            .coefficients()
            .windows(2)
            .map(|w| if w[0] > 0.0 { w[1] / w[0] } else { 0.0 })
            .collect();
        self
    }
}

/// `λ = 2r / sinh²(r)`.
pub fn lambda_of_r(r: f64) -> f64 {
    2.0 * r / r.sinh().powi(2)
}

/// Left minus right side of the stationarity condition
/// `2c_N[Nλ + μ − ln c_N²] = λ[N c_{N−1} + (N+1) c_{N+1}]`, per index.
///
/// `c_{−1} = 1` (it is multiplied by `N = 0`) and the sequence is continued
/// by zero past its end, so the last residual carries the truncation.
pub fn euler_lagrange_residual(c: &SchmidtSequence, lambda: f64, mu: f64) -> Result<Vec<f64>> {
    let c = c.coefficients();
    if c.iter().any(|v| *v <= 0.0) {
        return Err(Error::InvalidInput(
            "stationarity residual needs strictly positive coefficients".into(),
        ));
    }
    let at = |i: isize| -> f64 {
        if i < 0 {
            1.0
        } else {
            c.get(i as usize).copied().unwrap_or(0.0)
        }
    };
    Ok((0..c.len())
        .map(|n| {
            let nf = n as f64;
            let i = n as isize;
            let cn = c[n];
            2.0 * cn * (nf * lambda + mu - (cn * cn).ln())
                - lambda * (nf * at(i - 1) + (nf + 1.0) * at(i + 1))
        })
        .collect())
}

/// Least-squares `(λ, μ)` making the residual vanish on `indices`.
pub fn fit_multipliers(c: &SchmidtSequence, indices: &[usize]) -> Result<(f64, f64)> {
    let coeffs = c.coefficients();
    if indices.len() < 2 || indices.iter().any(|&i| i + 1 >= coeffs.len()) {
        return Err(Error::InvalidInput(
            "need at least two interior indices to fit multipliers".into(),
        ));
    }
    // residual = λ·a_N + μ·b_N − y_N
    let mut normal = Matrix2::zeros();
    let mut rhs = Vector2::zeros();
    for &n in indices {
        let nf = n as f64;
        let prev = if n == 0 { 1.0 } else { coeffs[n - 1] };
        let cn = coeffs[n];
        if cn <= 0.0 {
            return Err(Error::InvalidInput("zero coefficient in fit".into()));
        }
        let a = 2.0 * nf * cn - nf * prev - (nf + 1.0) * coeffs[n + 1];
        let b = 2.0 * cn;
        let y = 2.0 * cn * (cn * cn).ln();
        let row = Vector2::new(a, b);
        normal += row * row.transpose();
        rhs += row * y;
    }
    let sol = normal
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Conditioning("singular multiplier fit".into()))?;
    Ok((sol[0], sol[1]))
}

/// `∂e/∂c_N` in bits.
pub(crate) fn entropy_gradient(c: &[f64], out: &mut [f64]) {
    for (g, &v) in out.iter_mut().zip(c) {
        *g = if v == 0.0 {
            0.0
        } else {
            -2.0 * v * ((v * v).ln() + 1.0) / LN_2
        };
    }
}

/// Gradient of `δ(c)` viewed as a function of unconstrained `c`.
pub(crate) fn delta_gradient(c: &[f64], out: &mut [f64]) {
    let d = c.len();
    for n in 0..d {
        let nf = n as f64;
        let mut g = 4.0 * nf * c[n];
        if n >= 1 {
            g -= 2.0 * nf * c[n - 1];
        }
        if n + 1 < d {
            g -= 2.0 * (nf + 1.0) * c[n + 1];
        }
        out[n] = g;
    }
}
