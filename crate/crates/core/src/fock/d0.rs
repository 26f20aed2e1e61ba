//! The Gaussian mixture of displaced squeezed states that reproduces a
//! balanced symmetric state.
//!
//! With `γ_δ` the covariance of `Ψ_s(r_δ)` and `M = γ − γ_δ ⪰ 0`, the state
//! is `∫ p(ξ) W(ξ) |Ψ_s⟩⟨Ψ_s| W(ξ)† dξ` with `W(ξ) = exp(iξᵀR)`. Under this
//! convention `W(ξ)` shifts the means by `Ωᵀξ` (checked against Fock space
//! in the tests), and the mixture covariance is `γ_δ + 2 Ωᵀ Σ_ξ Ω` for a
//! Gaussian `p` with covariance `Σ_ξ`. Matching `γ` therefore needs
//!
//! ```text
//! Σ_ξ = Ω M Ωᵀ / 2,   i.e.   p(ξ) ∝ exp(−ξᵀ (Ω M Ωᵀ)⁻¹ ξ)
//! ```
//!
//! on the support of `M`. `M` is singular (rank two for balanced states,
//! zero for pure ones), so the weight is sampled through a factor of `Σ_ξ`
//! rather than through its inverse.

use nalgebra::{DMatrix, Matrix4, SymmetricEigen, Vector4};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use super::{ladder_moments, tmss_state, QuadratureMoments, WeylFactory, C64};
use crate::closed_form::{r_of_delta, EprUncertainty};
use crate::symplectic::{
    min_eigenvalue_of_difference, tmss_cm, validate_cm, CovarianceMatrix, SymplecticForm,
};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct D0Check {
    pub gamma: CovarianceMatrix,
    pub delta: EprUncertainty,
    pub r_delta: f64,
    pub gamma_delta: CovarianceMatrix,
    /// Covariance `Σ_ξ` of the displacement weight.
    pub weight_covariance: Matrix4<f64>,
    /// Covariance of the mixture from first and second moments.
    pub mixture_cm: Matrix4<f64>,
    pub max_deviation: f64,
}

/// Analytic moment check of the displaced-squeezed-state mixture.
///
/// `δ` is read off `γ` as its EPR-uncertainty, so the decomposition applies
/// only to balanced inputs; otherwise `γ − γ_δ` fails to be PSD and the
/// check reports [`Error::DecompositionInapplicable`].
pub fn d0_moment_check(gamma: &CovarianceMatrix, tol: f64) -> Result<D0Check> {
    let validity = validate_cm(gamma, tol);
    if !validity.valid {
        return Err(Error::InvalidCovariance {
            min_eigenvalue: validity.min_eigenvalue,
            symmetric: validity.symmetric,
        });
    }
    let delta = EprUncertainty::clamped(gamma.epr_variance_sum())?;
    let r_delta = r_of_delta(delta);
    let gamma_delta = tmss_cm(r_delta)?;
    let min_eig = min_eigenvalue_of_difference(gamma, &gamma_delta);
    if min_eig < -tol {
        return Err(Error::DecompositionInapplicable {
            min_eigenvalue: min_eig,
        });
    }
    let omega = *SymplecticForm::new().matrix();
    let m = gamma.matrix() - gamma_delta.matrix();
    let weight_covariance = 0.5 * omega * m * omega.transpose();

    // mean of W(ξ)Ψ_s is d = Ωᵀξ, so Cov(d) = Ωᵀ Σ_ξ Ω, and a state with
    // mean d has ⟨{R_i, R_j}⟩ = γ_δ + 2 d dᵀ
    let shift_cov = omega.transpose() * weight_covariance * omega;
    let mixture_cm = gamma_delta.matrix() + 2.0 * shift_cov;
    let max_deviation = (mixture_cm - gamma.matrix()).amax();
    Ok(D0Check {
        gamma: *gamma,
        delta,
        r_delta,
        gamma_delta,
        weight_covariance,
        mixture_cm,
        max_deviation,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonteCarloReport {
    pub samples: usize,
    pub dim: usize,
    pub mixture_cm: Matrix4<f64>,
    pub max_deviation: f64,
    /// Largest top-two-level occupancy seen over all displaced states.
    pub max_edge_occupancy: f64,
}

/// Monte Carlo estimate of the mixture covariance in Fock space.
///
/// Draws `ξ` from the weight of `check`, displaces the truncated squeezed
/// state with exact single-mode Weyl unitaries at dimension `dim`, and
/// averages the quadrature moments. Work is split into `shards`, each with
/// its own deterministic seed; results are merged in shard order.
pub fn d0_monte_carlo(
    check: &D0Check,
    dim: usize,
    samples: usize,
    seed: u64,
    shards: usize,
) -> Result<MonteCarloReport> {
    if samples == 0 {
        return Err(Error::InvalidInput("need at least one sample".into()));
    }
    let shards = shards.clamp(1, samples);
    let base = tmss_state(check.r_delta, dim)?;
    let factor = sampling_factor(&check.weight_covariance);
    let weyl = WeylFactory::new(dim);

    let partials: Vec<Accumulator> = (0..shards)
        .into_par_iter()
        .map(|shard| {
            let count = samples / shards + usize::from(shard < samples % shards);
            let shard_seed = seed ^ (shard as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
            let mut rng = ChaCha8Rng::seed_from_u64(shard_seed);
            let mut work = Workspace::new(&weyl);
            let mut acc = Accumulator::default();
            for _ in 0..count {
                let z = Vector4::from_fn(|_, _| StandardNormal.sample(&mut rng));
                let xi = factor * z;
                let psi = work.displace(base.coefficients(), &xi);
                let moments = QuadratureMoments::from_ladder(&ladder_moments(&psi));
                acc.add(&moments, edge_occupancy(&psi));
            }
            acc
        })
        .collect();

    let total = partials
        .into_iter()
        .fold(Accumulator::default(), |a, b| a.merge(b));
    let n = total.count as f64;
    let mean = total.mean / n;
    let second = total.second / n;
    let mixture_cm = second - 2.0 * mean * mean.transpose();
    let max_deviation = (mixture_cm - check.gamma.matrix()).amax();
    Ok(MonteCarloReport {
        samples,
        dim,
        mixture_cm,
        max_deviation,
        max_edge_occupancy: total.max_edge,
    })
}

/// `L` with `L Lᵀ = Σ`, clipping rounding-level negative eigenvalues.
fn sampling_factor(sigma: &Matrix4<f64>) -> Matrix4<f64> {
    let sym = 0.5 * (sigma + sigma.transpose());
    let eig = SymmetricEigen::new(sym);
    let roots = eig.eigenvalues.map(|v| v.max(0.0).sqrt());
    eig.eigenvectors * Matrix4::from_diagonal(&roots)
}

fn edge_occupancy(psi: &DMatrix<C64>) -> f64 {
    let d = psi.nrows();
    let edge = d.saturating_sub(2);
    let mut p = 0.0;
    for m in 0..d {
        for n in 0..d {
            if n >= edge || m >= edge {
                p += psi[(n, m)].norm_sqr();
            }
        }
    }
    p
}

#[derive(Debug, Clone, Default)]
struct Accumulator {
    count: usize,
    mean: Vector4<f64>,
    second: Matrix4<f64>,
    max_edge: f64,
}

impl Accumulator {
    fn add(&mut self, m: &QuadratureMoments, edge: f64) {
        self.count += 1;
        self.mean += m.mean;
        self.second += m.second;
        self.max_edge = self.max_edge.max(edge);
    }

    fn merge(mut self, other: Self) -> Self {
        self.count += other.count;
        self.mean += other.mean;
        self.second += other.second;
        self.max_edge = self.max_edge.max(other.max_edge);
        self
    }
}

/// Scratch buffers for `ψ ↦ U_A ψ U_Bᵀ` with `U = Φ V E Vᵀ Φ*`, applied
/// factor by factor in real arithmetic.
struct Workspace<'a> {
    weyl: &'a WeylFactory,
    vt: DMatrix<f64>,
    re: DMatrix<f64>,
    im: DMatrix<f64>,
    tmp_re: DMatrix<f64>,
    tmp_im: DMatrix<f64>,
}

impl<'a> Workspace<'a> {
    fn new(weyl: &'a WeylFactory) -> Self {
        let d = weyl.dim();
        Self {
            weyl,
            vt: weyl.vectors().transpose(),
            re: DMatrix::zeros(d, d),
            im: DMatrix::zeros(d, d),
            tmp_re: DMatrix::zeros(d, d),
            tmp_im: DMatrix::zeros(d, d),
        }
    }

    fn displace(&mut self, psi: &DMatrix<C64>, xi: &Vector4<f64>) -> DMatrix<C64> {
        let d = self.weyl.dim();
        let v = self.weyl.vectors();
        let vt = &self.vt;
        let x = self.weyl.values();
        let (amp_a, theta_a) = (xi[0].hypot(xi[1]), xi[1].atan2(xi[0]));
        let (amp_b, theta_b) = (xi[2].hypot(xi[3]), xi[3].atan2(xi[2]));

        // Φ_A* ψ Φ_B*
        for m in 0..d {
            for n in 0..d {
                let z =
                    psi[(n, m)] * C64::from_polar(1.0, -(theta_a * n as f64 + theta_b * m as f64));
                self.re[(n, m)] = z.re;
                self.im[(n, m)] = z.im;
            }
        }
        // Vᵀ (·) V
        self.tmp_re.gemm(1.0, vt, &self.re, 0.0);
        self.tmp_im.gemm(1.0, vt, &self.im, 0.0);
        self.re.gemm(1.0, &self.tmp_re, v, 0.0);
        self.im.gemm(1.0, &self.tmp_im, v, 0.0);
        // E_A (·) E_B elementwise
        for m in 0..d {
            for n in 0..d {
                let phase = C64::from_polar(1.0, amp_a * x[n] + amp_b * x[m]);
                let z = C64::new(self.re[(n, m)], self.im[(n, m)]) * phase;
                self.re[(n, m)] = z.re;
                self.im[(n, m)] = z.im;
            }
        }
        // V (·) Vᵀ
        self.tmp_re.gemm(1.0, v, &self.re, 0.0);
        self.tmp_im.gemm(1.0, v, &self.im, 0.0);
        self.re.gemm(1.0, &self.tmp_re, vt, 0.0);
        self.im.gemm(1.0, &self.tmp_im, vt, 0.0);
        // Φ_A (·) Φ_B
        DMatrix::from_fn(d, d, |n, m| {
            C64::new(self.re[(n, m)], self.im[(n, m)])
                * C64::from_polar(1.0, theta_a * n as f64 + theta_b * m as f64)
        })
    }
}
