//! Seeded test-vector generators.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{Support, TruncatedPureState, C64};
use crate::schmidt::SchmidtSequence;
use crate::{Error, Result};

/// Local bases used for the Schmidt vectors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BasisKind {
    /// `u_N = v_N = |N⟩`.
    Fock,
    /// Haar-random unitaries on each side.
    Haar,
    /// Orthogonalized `I + ε G` with complex Gaussian `G`, i.e. Fock
    /// vectors tilted by roughly `ε`.
    NearFock(f64),
}

fn complex_gaussian(rng: &mut impl Rng) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Q factor of `m` with the phases of `diag(R)` pushed into `Q`, which makes
/// it Haar distributed for a Ginibre input.
fn orthonormalize(m: DMatrix<C64>) -> DMatrix<C64> {
    let d = m.nrows();
    let qr = m.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..d {
        let rjj = r[(j, j)];
        let phase = if rjj.norm() > 0.0 {
            rjj / rjj.norm()
        } else {
            C64::new(1.0, 0.0)
        };
        for i in 0..d {
            q[(i, j)] *= phase;
        }
    }
    q
}

pub fn haar_unitary(rng: &mut impl Rng, d: usize) -> DMatrix<C64> {
    orthonormalize(DMatrix::from_fn(d, d, |_, _| complex_gaussian(rng)))
}

pub fn near_identity_unitary(rng: &mut impl Rng, d: usize, eps: f64) -> DMatrix<C64> {
    let m = DMatrix::from_fn(d, d, |i, j| {
        let base = if i == j {
            C64::new(1.0, 0.0)
        } else {
            C64::default()
        };
        base + complex_gaussian(rng) * eps
    });
    orthonormalize(m)
}

/// Random nonincreasing unit sequence of length `len`, mixing flat,
/// decaying and sparse shapes so that `δ(c)` covers most of `(0, 1]`.
pub fn random_schmidt_sequence(rng: &mut impl Rng, len: usize) -> SchmidtSequence {
    let shape = rng.random_range(0..3);
    let raw: Vec<f64> = match shape {
        0 => (0..len).map(|_| rng.random::<f64>()).collect(),
        1 => {
            let q: f64 = rng.random_range(0.05..0.95);
            (0..len)
                .map(|n| q.powi(n as i32) * rng.random_range(0.7..1.3))
                .collect()
        }
        _ => {
            let keep = rng.random_range(1..=len);
            (0..len)
                .map(|n| if n < keep { rng.random::<f64>() } else { 0.0 })
                .collect()
        }
    };
    // an all-zero draw has probability zero; fall back to a product state
    SchmidtSequence::from_unordered(&raw)
        .unwrap_or_else(|_| SchmidtSequence::new(vec![1.0]).expect("unit sequence"))
}

/// `Σ_N c_N u_N ⊗ v_N` over bases of the chosen kind, or a normalized
/// Gaussian grid when no Schmidt sequence is given. Deterministic in `seed`.
pub fn random_state_with_bases(
    seed: u64,
    d: usize,
    prescribed: Option<&SchmidtSequence>,
    basis: BasisKind,
) -> Result<TruncatedPureState> {
    if d < 2 {
        return Err(Error::InvalidInput(format!(
            "dimension must be >= 2, got {d}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let Some(target) = prescribed else {
        let grid = DMatrix::from_fn(d, d, |_, _| complex_gaussian(&mut rng));
        return TruncatedPureState::normalized(grid);
    };
    if target.len() > d {
        return Err(Error::InvalidInput(format!(
            "Schmidt sequence of length {} does not fit dimension {d}",
            target.len()
        )));
    }
    let (u, v) = match basis {
        BasisKind::Fock => (DMatrix::identity(d, d), DMatrix::identity(d, d)),
        BasisKind::Haar => (haar_unitary(&mut rng, d), haar_unitary(&mut rng, d)),
        BasisKind::NearFock(eps) => (
            near_identity_unitary(&mut rng, d, eps),
            near_identity_unitary(&mut rng, d, eps),
        ),
    };
    let c = target.padded(d);
    let mut grid = DMatrix::<C64>::zeros(d, d);
    for (n, cn) in c.iter().enumerate().filter(|(_, v)| **v > 0.0) {
        for i in 0..d {
            let ui = u[(i, n)] * *cn;
            for j in 0..d {
                grid[(i, j)] += ui * v[(j, n)];
            }
        }
    }
    let norm = grid.norm();
    TruncatedPureState::new(grid.unscale(norm), Support::Exact)
}

/// Haar-basis variant, see [`random_state_with_bases`].
pub fn random_state(
    seed: u64,
    d: usize,
    prescribed: Option<&SchmidtSequence>,
) -> Result<TruncatedPureState> {
    random_state_with_bases(seed, d, prescribed, BasisKind::Haar)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{entropy_of_state, epr_uncertainty_state, schmidt_coefficients};
    use crate::schmidt::{delta_functional, entropy_e};

    #[test]
    fn haar_is_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let u = haar_unitary(&mut rng, 7);
        assert!((&u * u.adjoint() - DMatrix::<C64>::identity(7, 7)).camax() < 1e-12);
    }

    #[test]
    fn deterministic_per_seed() {
        let c = SchmidtSequence::normalized(vec![3.0, 2.0, 1.0]).unwrap();
        let a = random_state(11, 5, Some(&c)).unwrap();
        let b = random_state(11, 5, Some(&c)).unwrap();
        let other = random_state(12, 5, Some(&c)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, other);
    }

    #[test]
    fn product_spec_gives_product_state() {
        let c = SchmidtSequence::new(vec![1.0, 0.0, 0.0]).unwrap();
        let psi = random_state(5, 6, Some(&c)).unwrap();
        assert!(entropy_of_state(&psi).unwrap().abs() < 1e-10);
    }

    #[test]
    fn svd_recovers_spec() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for seed in 0..20 {
            let c = random_schmidt_sequence(&mut rng, 6);
            let psi = random_state(seed, 8, Some(&c)).unwrap();
            assert!((entropy_of_state(&psi).unwrap() - entropy_e(&c)).abs() < 1e-10);
            let got = schmidt_coefficients(&psi).unwrap();
            for (a, b) in got.coefficients().iter().zip(c.coefficients()) {
                assert!((a - b).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn fock_bases_attain_delta_functional() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for seed in 0..20 {
            let c = random_schmidt_sequence(&mut rng, 8);
            let psi = random_state_with_bases(seed, 8, Some(&c), BasisKind::Fock).unwrap();
            let delta = epr_uncertainty_state(&psi).unwrap().value();
            assert!((delta - delta_functional(&c).min(1.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn spec_too_long_rejected() {
        let c = SchmidtSequence::normalized(vec![1.0; 5]).unwrap();
        assert!(random_state(0, 4, Some(&c)).is_err());
        assert!(random_state(0, 1, None).is_err());
    }

    #[test]
    fn schmidt_bound_holds_across_500_seeds() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let c = random_schmidt_sequence(&mut rng, 6);
        let delta_c = delta_functional(&c);
        for seed in 0..500 {
            let psi = random_state(seed, 6, Some(&c)).unwrap();
            let delta = epr_uncertainty_state(&psi).unwrap().value();
            assert!(delta >= delta_c - 1e-8);
        }
    }
}
