//! The ratio recursion `x_{N+1} = x_N − A_N − B_N` obtained by subtracting
//! consecutive stationarity conditions, with
//!
//! ```text
//! A_N = 4/(N+2) · [sinh²(r_N) − (r_N/r) sinh²(r)],   r_N = −½ ln x_N
//! B_N = N/(N+2) · [1/x_N − 1/x_{N−1}]
//! ```
//!
//! Its only trajectory compatible with a normalizable sequence is the
//! constant one, `x_N = e^{−2r}`.

use serde::Serialize;

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum RecursionOutcome {
    /// Stayed within the fixed-point tolerance of `x_0` for every step.
    FixedPoint,
    /// Reached `x_N ≤ 0` at `step`.
    Collapses { step: usize },
    /// Reached `x_N > 1` at `step`; the sequence cannot be normalized.
    EscapesNormalization { step: usize },
    /// None of the above within the step budget.
    Undecided,
}

impl RecursionOutcome {
    pub fn label(&self) -> &'static str {
        match self {
            Self::FixedPoint => "fixed-point",
            Self::Collapses { .. } => "collapses",
            Self::EscapesNormalization { .. } => "escapes-normalization",
            Self::Undecided => "undecided",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecursionTrajectory {
    pub r: f64,
    pub xs: Vec<f64>,
    pub outcome: RecursionOutcome,
}

impl RecursionTrajectory {
    pub fn is_strictly_decreasing(&self) -> bool {
        self.xs.windows(2).all(|w| w[1] < w[0])
    }

    pub fn is_strictly_increasing(&self) -> bool {
        self.xs.windows(2).all(|w| w[1] > w[0])
    }

    pub fn max_deviation_from(&self, x: f64) -> f64 {
        self.xs.iter().fold(0.0, |m, v| m.max((v - x).abs()))
    }
}

/// Fixed point of the recursion for multiplier parameter `r`.
pub fn fixed_point(r: f64) -> f64 {
    (-2.0 * r).exp()
}

/// Iterates the ratio recursion from `x_0` for at most `n_max` steps.
///
/// `fixed_tol` is the band around `x_0` within which a trajectory that
/// never leaves `(0, 1]` is classified as a fixed point.
pub fn recursion_iterate(
    r: f64,
    x0: f64,
    n_max: usize,
    fixed_tol: f64,
) -> Result<RecursionTrajectory> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::InvalidInput(format!("r must be > 0, got {r}")));
    }
    if !(x0 > 0.0 && x0 <= 1.0) {
        return Err(Error::InvalidInput(format!(
            "x0 must lie in (0, 1], got {x0}"
        )));
    }
    let sinh2_r = r.sinh().powi(2);
    if !sinh2_r.is_finite() {
        return Err(Error::Range(format!("sinh²(r) overflows for r = {r}")));
    }
    let x_star = fixed_point(r);
    // exp and ln are not exact inverses; at the floating-point fixed point
    // r_N must equal r exactly, otherwise rounding alone drives the
    // (unstable) fixed point away.
    let rate = |x: f64| if x == x_star { r } else { -0.5 * x.ln() };

    let mut xs = Vec::with_capacity(n_max + 1);
    xs.push(x0);
    let mut prev = f64::NAN;
    let mut x = x0;
    for n in 0..n_max {
        let nf = n as f64;
        let r_n = rate(x);
        let sinh2_rn = r_n.sinh().powi(2);
        let a = 4.0 / (nf + 2.0) * (sinh2_rn - r_n / r * sinh2_r);
        let b = if n == 0 {
            0.0
        } else {
            nf / (nf + 2.0) * (1.0 / x - 1.0 / prev)
        };
        let next = x - a - b;
        xs.push(next);
        let step = n + 1;
        if next.is_nan() || next <= 0.0 {
            return Ok(RecursionTrajectory {
                r,
                xs,
                outcome: RecursionOutcome::Collapses { step },
            });
        }
        if next > 1.0 {
            return Ok(RecursionTrajectory {
                r,
                xs,
                outcome: RecursionOutcome::EscapesNormalization { step },
            });
        }
        prev = x;
        x = next;
    }
    let traj = RecursionTrajectory {
        r,
        xs,
        outcome: RecursionOutcome::Undecided,
    };
    let outcome = if traj.max_deviation_from(x0) <= fixed_tol {
        RecursionOutcome::FixedPoint
    } else {
        RecursionOutcome::Undecided
    };
    Ok(RecursionTrajectory { outcome, ..traj })
}
