//! Truncated Fock-space oracle.
//!
//! Two-mode pure states are stored as a `d × d` grid of amplitudes over
//! `|N⟩_A ⊗ |M⟩_B`. Quadrature moments are assembled from normally ordered
//! ladder moments (`⟨a⟩`, `⟨a²⟩`, `⟨a†a⟩`, `⟨ab⟩`, `⟨a†b⟩`, …), each of which
//! only ever lowers, so they are exact for any state supported inside the
//! truncation. Products of truncated `X` and `P` matrices are never formed.

mod d0;
mod random;

pub use d0::{d0_moment_check, d0_monte_carlo, D0Check, MonteCarloReport};
pub use random::{
    haar_unitary, near_identity_unitary, random_schmidt_sequence, random_state,
    random_state_with_bases, BasisKind,
};

use std::f64::consts::FRAC_1_SQRT_2;

use nalgebra::{Complex, DMatrix, DVector, Matrix4, SymmetricEigen, Vector4};

use crate::closed_form::{f_of_delta, EprUncertainty};
use crate::schmidt::{entropy_e, SchmidtSequence};
use crate::symplectic::CovarianceMatrix;
use crate::{Error, Result};

pub type C64 = Complex<f64>;

/// Maximum probability in the top two Fock levels of either mode for a
/// truncated state's quadrature moments to be trusted.
pub const EDGE_OCCUPANCY_MAX: f64 = 1e-8;

/// Discarded weight above which a truncated state is flagged.
pub const DISCARDED_WEIGHT_WARN: f64 = 1e-10;

const NORM_TOL: f64 = 1e-9;

/// How a state relates to the infinite-dimensional one it represents.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Support {
    /// Exactly supported on the first `d` levels of each mode.
    Exact,
    /// Cut off from an infinite expansion and renormalized.
    Truncated { discarded_weight: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedPureState {
    coeff: DMatrix<C64>,
    support: Support,
}

impl TruncatedPureState {
    pub fn new(coeff: DMatrix<C64>, support: Support) -> Result<Self> {
        if !coeff.is_square() || coeff.nrows() < 2 {
            return Err(Error::InvalidInput(
                "state grid must be square with d >= 2".into(),
            ));
        }
        if coeff.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidInput(
                "state grid has non-finite amplitudes".into(),
            ));
        }
        let norm_sq = coeff.norm_squared();
        if (norm_sq - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidInput(format!(
                "state has squared norm {norm_sq}"
            )));
        }
        Ok(Self { coeff, support })
    }

    /// Normalizes `coeff` and wraps it as an exactly supported state.
    pub fn normalized(coeff: DMatrix<C64>) -> Result<Self> {
        let norm = coeff.norm();
        if !(norm > 0.0) {
            return Err(Error::InvalidInput("zero state".into()));
        }
        Self::new(coeff.unscale(norm), Support::Exact)
    }

    /// `Σ c_N |N⟩|N⟩`.
    pub fn fock_diagonal(c: &[f64], d: usize) -> Result<Self> {
        if c.len() > d {
            return Err(Error::InvalidInput("more coefficients than levels".into()));
        }
        let mut grid = DMatrix::zeros(d, d);
        for (n, v) in c.iter().enumerate() {
            grid[(n, n)] = C64::new(*v, 0.0);
        }
        Self::normalized(grid)
    }

    pub fn dim(&self) -> usize {
        self.coeff.nrows()
    }

    pub fn coefficients(&self) -> &DMatrix<C64> {
        &self.coeff
    }

    pub fn support(&self) -> Support {
        self.support
    }

    pub fn discarded_weight(&self) -> f64 {
        match self.support {
            Support::Exact => 0.0,
            Support::Truncated { discarded_weight } => discarded_weight,
        }
    }

    pub fn truncation_warning(&self) -> bool {
        self.discarded_weight() > DISCARDED_WEIGHT_WARN
    }

    /// Probability in the top two levels of either mode.
    pub fn edge_occupancy(&self) -> f64 {
        let d = self.dim();
        let edge = d.saturating_sub(2);
        let mut p = 0.0;
        for n in 0..d {
            for m in 0..d {
                if n >= edge || m >= edge {
                    p += self.coeff[(n, m)].norm_sqr();
                }
            }
        }
        p
    }
}

/// Truncated ladder operator `a|N⟩ = √N |N−1⟩` and its adjoint.
#[derive(Debug, Clone, PartialEq)]
pub struct LadderMatrices {
    pub a: DMatrix<f64>,
    pub a_dagger: DMatrix<f64>,
}

impl LadderMatrices {
    pub fn new(d: usize) -> Self {
        let mut a = DMatrix::zeros(d, d);
        for n in 1..d {
            a[(n - 1, n)] = (n as f64).sqrt();
        }
        let a_dagger = a.transpose();
        Self { a, a_dagger }
    }

    /// `[a, a†]`; the identity except `1 − d` in the last diagonal entry.
    pub fn commutator(&self) -> DMatrix<f64> {
        &self.a * &self.a_dagger - &self.a_dagger * &self.a
    }

    /// `X = (a + a†)/√2` restricted to the truncation.
    pub fn position(&self) -> DMatrix<f64> {
        (&self.a + &self.a_dagger) * FRAC_1_SQRT_2
    }
}

/// Normally ordered ladder moments of a two-mode pure state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LadderMoments {
    pub a: C64,
    pub b: C64,
    pub aa: C64,
    pub bb: C64,
    pub ab: C64,
    /// `⟨a† b⟩`.
    pub ad_b: C64,
    pub n_a: f64,
    pub n_b: f64,
}

pub fn ladder_moments(psi: &DMatrix<C64>) -> LadderMoments {
    let d = psi.nrows();
    let sq: Vec<f64> = (0..=d).map(|n| (n as f64).sqrt()).collect();
    let zero = C64::new(0.0, 0.0);
    let (mut a, mut b, mut aa, mut bb, mut ab, mut ad_b) = (zero, zero, zero, zero, zero, zero);
    let (mut n_a, mut n_b) = (0.0, 0.0);
    for m in 0..d {
        for n in 0..d {
            let z = psi[(n, m)];
            let p = z.norm_sqr();
            n_a += n as f64 * p;
            n_b += m as f64 * p;
            if n >= 1 {
                a += psi[(n - 1, m)].conj() * z * sq[n];
            }
            if n >= 2 {
                aa += psi[(n - 2, m)].conj() * z * (sq[n] * sq[n - 1]);
            }
            if m >= 1 {
                b += psi[(n, m - 1)].conj() * z * sq[m];
            }
            if m >= 2 {
                bb += psi[(n, m - 2)].conj() * z * (sq[m] * sq[m - 1]);
            }
            if n >= 1 && m >= 1 {
                ab += psi[(n - 1, m - 1)].conj() * z * (sq[n] * sq[m]);
            }
            // ⟨aψ, bψ⟩ over (aψ)[k,l] = √(k+1) ψ[k+1,l], (bψ)[k,l] = √(l+1) ψ[k,l+1]
            if n + 1 < d && m + 1 < d {
                ad_b += psi[(n + 1, m)].conj() * psi[(n, m + 1)] * (sq[n + 1] * sq[m + 1]);
            }
        }
    }
    LadderMoments {
        a,
        b,
        aa,
        bb,
        ab,
        ad_b,
        n_a,
        n_b,
    }
}

/// First moments and symmetrized second moments `⟨R_iR_j + R_jR_i⟩`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureMoments {
    pub mean: Vector4<f64>,
    pub second: Matrix4<f64>,
}

impl QuadratureMoments {
    pub fn from_ladder(l: &LadderMoments) -> Self {
        let one = C64::new(1.0, 0.0);
        // α = (a, a†, b, b†); g[k][l] = ⟨α_k α_l⟩
        let g = [
            [l.aa, one * (l.n_a + 1.0), l.ab, l.ad_b.conj()],
            [one * l.n_a, l.aa.conj(), l.ad_b, l.ab.conj()],
            [l.ab, l.ad_b, l.bb, one * (l.n_b + 1.0)],
            [l.ad_b.conj(), l.ab.conj(), one * l.n_b, l.bb.conj()],
        ];
        let alpha = [l.a, l.a.conj(), l.b, l.b.conj()];
        let h = FRAC_1_SQRT_2;
        let i = C64::new(0.0, 1.0);
        // R = T α
        let t = [
            [one * h, one * h, C64::default(), C64::default()],
            [-i * h, i * h, C64::default(), C64::default()],
            [C64::default(), C64::default(), one * h, one * h],
            [C64::default(), C64::default(), -i * h, i * h],
        ];
        let mut mean = Vector4::zeros();
        let mut second = Matrix4::zeros();
        for r in 0..4 {
            mean[r] = (0..4).map(|k| t[r][k] * alpha[k]).sum::<C64>().re;
            for s in 0..4 {
                let mut acc = C64::default();
                for k in 0..4 {
                    for q in 0..4 {
                        acc += t[r][k] * t[s][q] * (g[k][q] + g[q][k]);
                    }
                }
                second[(r, s)] = acc.re;
            }
        }
        Self { mean, second }
    }

    /// `γ = ⟨{R_i, R_j}⟩ − 2⟨R_i⟩⟨R_j⟩`.
    pub fn covariance(&self) -> Matrix4<f64> {
        self.second - 2.0 * self.mean * self.mean.transpose()
    }
}

fn check_edge(psi: &TruncatedPureState) -> Result<()> {
    if let Support::Truncated { .. } = psi.support {
        let edge = psi.edge_occupancy();
        if edge >= EDGE_OCCUPANCY_MAX {
            return Err(Error::Truncation(format!(
                "edge occupancy {edge:.3e} exceeds {EDGE_OCCUPANCY_MAX:.0e}"
            )));
        }
    }
    Ok(())
}

pub fn quadrature_moments(psi: &TruncatedPureState) -> Result<QuadratureMoments> {
    check_edge(psi)?;
    Ok(QuadratureMoments::from_ladder(&ladder_moments(&psi.coeff)))
}

/// Covariance matrix of a pure state.
pub fn state_cm(psi: &TruncatedPureState) -> Result<CovarianceMatrix> {
    CovarianceMatrix::new(quadrature_moments(psi)?.covariance())
}

/// `Δ(ψ) = min(1, ½[Δ²(X_A − X_B) + Δ²(P_A + P_B)])`.
///
/// States inside the truncation are always in the operator domains, so the
/// infinite-variance branch does not arise here.
pub fn epr_uncertainty_state(psi: &TruncatedPureState) -> Result<EprUncertainty> {
    EprUncertainty::clamped(state_cm(psi)?.epr_variance_sum())
}

/// Schmidt coefficients: singular values of the grid, nonincreasing.
pub fn schmidt_coefficients(psi: &TruncatedPureState) -> Result<SchmidtSequence> {
    let sv = psi.coeff.singular_values();
    SchmidtSequence::from_unordered(sv.as_slice())
}

pub fn entropy_of_state(psi: &TruncatedPureState) -> Result<f64> {
    Ok(entropy_e(&schmidt_coefficients(psi)?))
}

/// `|Ψ_s(r)⟩` cut at `d` levels and renormalized.
pub fn tmss_state(r: f64, d: usize) -> Result<TruncatedPureState> {
    if d < 2 {
        return Err(Error::InvalidInput(format!(
            "dimension must be >= 2, got {d}"
        )));
    }
    if !(r >= 0.0) || !r.is_finite() {
        return Err(Error::InvalidInput(format!(
            "squeezing must be >= 0, got {r}"
        )));
    }
    let t = r.tanh();
    let c0 = 1.0 / r.cosh();
    let mut grid = DMatrix::zeros(d, d);
    let mut kept = 0.0;
    let mut v = c0;
    for n in 0..d {
        grid[(n, n)] = C64::new(v, 0.0);
        kept += v * v;
        v *= t;
    }
    // tail Σ_{N≥d} c_N² = t^{2d} exactly
    let discarded_weight = t.powi(2 * d as i32).min(1.0 - kept).max(0.0);
    let norm = kept.sqrt();
    TruncatedPureState::new(grid.unscale(norm), Support::Truncated { discarded_weight })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prop1Check {
    pub entropy: f64,
    pub delta: EprUncertainty,
    /// `f(Δ(ψ))`, the entropy of the squeezed state with the same `Δ`.
    pub bound: f64,
    /// `E(ψ) − f(Δ(ψ))`, nonnegative when the bound holds.
    pub margin: f64,
}

pub fn prop1_check(psi: &TruncatedPureState) -> Result<Prop1Check> {
    let entropy = entropy_of_state(psi)?;
    let delta = epr_uncertainty_state(psi)?;
    let bound = f_of_delta(delta);
    Ok(Prop1Check {
        entropy,
        delta,
        bound,
        margin: entropy - bound,
    })
}

/// Builds single-mode Weyl operators `exp(i(ξ_x X + ξ_p P))` at dimension
/// `d` from one eigendecomposition of the truncated `X`.
///
/// `ξ_x X + ξ_p P = |ξ| e^{iθN} X e^{−iθN}` with `θ = atan2(ξ_p, ξ_x)`, so
/// only the eigenphases and the diagonal rotation change per call.
#[derive(Debug, Clone)]
pub struct WeylFactory {
    vectors: DMatrix<f64>,
    values: DVector<f64>,
}

impl WeylFactory {
    pub fn new(d: usize) -> Self {
        let x = LadderMatrices::new(d).position();
        let eig = SymmetricEigen::new(x);
        Self {
            vectors: eig.eigenvectors,
            values: eig.eigenvalues,
        }
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub(crate) fn vectors(&self) -> &DMatrix<f64> {
        &self.vectors
    }

    pub(crate) fn values(&self) -> &DVector<f64> {
        &self.values
    }

    pub fn unitary(&self, xi_x: f64, xi_p: f64) -> DMatrix<C64> {
        let d = self.dim();
        let amp = xi_x.hypot(xi_p);
        let theta = xi_p.atan2(xi_x);
        let v = self.vectors.map(|x| C64::new(x, 0.0));
        let phased = DMatrix::from_fn(d, d, |i, k| {
            v[(i, k)] * C64::from_polar(1.0, amp * self.values[k])
        });
        let core = phased * v.transpose();
        DMatrix::from_fn(d, d, |i, j| {
            core[(i, j)] * C64::from_polar(1.0, theta * (i as f64 - j as f64))
        })
    }

    /// `W_A(ξ_0, ξ_1) ⊗ W_B(ξ_2, ξ_3) ψ`.
    pub fn displace(
        &self,
        psi: &TruncatedPureState,
        xi: &Vector4<f64>,
    ) -> Result<TruncatedPureState> {
        if psi.dim() != self.dim() {
            return Err(Error::InvalidInput("dimension mismatch".into()));
        }
        let ua = self.unitary(xi[0], xi[1]);
        let ub = self.unitary(xi[2], xi[3]);
        let out = ua * psi.coefficients() * ub.transpose();
        let norm = out.norm();
        TruncatedPureState::new(out.unscale(norm), psi.support())
    }
}
