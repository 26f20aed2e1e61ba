//! One-parameter sweeps over symmetric standard forms.

use clap::ValueEnum;
use gaussian_eof::StandardFormParams;
use rayon::prelude::*;

use crate::report::{evaluate_params, Evaluation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Axis {
    /// `n`, with `--kx` and `--kp` fixed.
    N,
    /// `k_x = k_p = k`, with `--n` fixed.
    K,
    /// `k_x`, with `--n` and `--kp` fixed.
    Kx,
    /// `k_p`, with `--n` and `--kx` fixed.
    Kp,
    /// Two-mode squeezed vacuum `(cosh 2r, sinh 2r, sinh 2r)`.
    R,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPlan {
    pub axis: Axis,
    pub lo: f64,
    pub hi: f64,
    pub steps: usize,
    pub n: Option<f64>,
    pub kx: Option<f64>,
    pub kp: Option<f64>,
}

impl SweepPlan {
    /// Checks the range and that the fixed parameters the axis needs are
    /// present.
    pub fn validate(&self) -> Result<(), String> {
        if !self.lo.is_finite() || !self.hi.is_finite() {
            return Err("range bounds must be finite".into());
        }
        match self.steps {
            0 => return Err("--steps must be at least 1".into()),
            1 if self.lo != self.hi => {
                return Err("a single-point sweep needs --lo equal to --hi".into())
            }
            1 => {}
            _ if !(self.lo < self.hi) => return Err("--lo must be below --hi".into()),
            _ => {}
        }
        let need = |name: &str, v: Option<f64>| {
            v.map(|_| ())
                .ok_or_else(|| format!("sweeping {:?} needs --{name}", self.axis).to_lowercase())
        };
        match self.axis {
            Axis::N => {
                need("kx", self.kx)?;
                need("kp", self.kp)?;
            }
            Axis::K => need("n", self.n)?,
            Axis::Kx => {
                need("n", self.n)?;
                need("kp", self.kp)?;
            }
            Axis::Kp => {
                need("n", self.n)?;
                need("kx", self.kx)?;
            }
            Axis::R => {}
        }
        Ok(())
    }

    /// Grid values `lo + i (hi − lo)/(steps − 1)`, with the last point
    /// pinned to `hi`.
    pub fn grid(&self) -> Vec<f64> {
        if self.steps == 1 {
            return vec![self.lo];
        }
        let last = self.steps - 1;
        (0..self.steps)
            .map(|i| {
                if i == last {
                    self.hi
                } else {
                    self.lo + (self.hi - self.lo) * i as f64 / last as f64
                }
            })
            .collect()
    }

    pub fn params_at(&self, x: f64) -> StandardFormParams {
        let (n, kx, kp) = (
            self.n.unwrap_or(f64::NAN),
            self.kx.unwrap_or(f64::NAN),
            self.kp.unwrap_or(f64::NAN),
        );
        match self.axis {
            Axis::N => StandardFormParams::symmetric(x, kx, kp),
            Axis::K => StandardFormParams::symmetric(n, x, x),
            Axis::Kx => StandardFormParams::symmetric(n, x, kp),
            Axis::Kp => StandardFormParams::symmetric(n, kx, x),
            Axis::R => {
                let (c, s) = ((2.0 * x).cosh(), (2.0 * x).sinh());
                StandardFormParams::symmetric(c, s, s)
            }
        }
    }
}

/// Evaluates every grid point; rows come back in grid order.
pub fn run_sweep(plan: &SweepPlan, tol: f64) -> Vec<Evaluation> {
    plan.grid()
        .par_iter()
        .map(|x| evaluate_params(&plan.params_at(*x), tol))
        .collect()
}
