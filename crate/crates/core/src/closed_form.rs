//! Closed-form scalar functions and the symmetric-state EoF.

use std::f64::consts::LN_2;

use serde::Serialize;

use crate::symplectic::{
    reduce_to_standard_form, validate_cm, CovarianceMatrix, StandardFormParams,
};
use crate::{Error, Result};

/// EPR-uncertainty, a value in `(0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
#[serde(transparent)]
pub struct EprUncertainty(f64);

impl EprUncertainty {
    pub fn new(delta: f64) -> Result<Self> {
        if delta > 0.0 && delta <= 1.0 {
            Ok(Self(delta))
        } else {
            Err(Error::InvalidInput(format!(
                "EPR-uncertainty must lie in (0, 1], got {delta}"
            )))
        }
    }

    /// `min(1, raw)`; values above one come from states without EPR
    /// correlations (or noise just above the separable boundary).
    pub fn clamped(raw: f64) -> Result<Self> {
        if raw.is_nan() {
            return Err(Error::InvalidInput("EPR-uncertainty is NaN".into()));
        }
        Self::new(raw.min(1.0))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// `−x log₂ x` with `0 log 0 = 0`.
fn neg_xlog2x(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        -x * x.log2()
    }
}

/// `r_Δ = −½ ln Δ`.
pub fn r_of_delta(delta: EprUncertainty) -> f64 {
    // `-0.0` for Δ = 1 would print as "-0"
    (-0.5 * delta.value().ln()).max(0.0)
}

/// `Δ[Ψ_s(r)] = e^{−2r}`.
pub fn delta_of_tmss(r: f64) -> Result<EprUncertainty> {
    if !(r >= 0.0) {
        return Err(Error::InvalidInput(format!(
            "squeezing must be >= 0, got {r}"
        )));
    }
    let delta = (-2.0 * r).exp();
    if delta <= 0.0 {
        return Err(Error::Range(format!("e^(-2r) underflows for r = {r}")));
    }
    EprUncertainty::new(delta)
}

/// Entropy of entanglement of the two-mode squeezed vacuum, in bits:
/// `cosh²r log cosh²r − sinh²r log sinh²r`.
///
/// Evaluated as `log₂ cosh²r + sinh²r · log₂(1 + 1/sinh²r)`, which has no
/// cancellation for large `r` and is exactly zero at `r = 0`.
pub fn entropy_of_tmss(r: f64) -> f64 {
    let r = r.abs();
    if r == 0.0 {
        return 0.0;
    }
    let sh2 = r.sinh().powi(2);
    (sh2.ln_1p() + sh2 * sh2.recip().ln_1p()) / LN_2
}

/// `c±(Δ) = (Δ^{−1/2} ± Δ^{1/2})²/4`.
pub fn c_plus_minus(delta: EprUncertainty) -> (f64, f64) {
    let d = delta.value();
    let c_plus = (1.0 + d).powi(2) / (4.0 * d);
    let c_minus = (1.0 - d).powi(2) / (4.0 * d);
    (c_plus, c_minus)
}

/// `f(Δ) = c₊ log₂ c₊ − c₋ log₂ c₋`.
pub fn f_of_delta(delta: EprUncertainty) -> f64 {
    let (_, c_minus) = c_plus_minus(delta);
    if c_minus == 0.0 {
        return 0.0;
    }
    // c₊ = 1 + c₋: c₊ log c₊ − c₋ log c₋ = log c₊ + c₋ log(1 + 1/c₋)
    (c_minus.ln_1p() + c_minus * c_minus.recip().ln_1p()) / LN_2
}

/// Plain evaluation of the printed expression, kept for comparison in
/// tests and small-`Δ` diagnostics.
pub fn f_of_delta_direct(delta: EprUncertainty) -> f64 {
    let (c_plus, c_minus) = c_plus_minus(delta);
    -neg_xlog2x(c_plus) + neg_xlog2x(c_minus)
}

fn require_symmetric(params: &StandardFormParams, tol: f64) -> Result<()> {
    if params.is_symmetric(tol) {
        Ok(())
    } else {
        Err(Error::Asymmetric {
            n: params.n,
            m: params.m,
        })
    }
}

/// `Δ(σ) = min(1, √((n − k_x)(n − k_p)))` for a symmetric standard form.
pub fn epr_uncertainty_of_standard_form(
    params: &StandardFormParams,
    tol: f64,
) -> Result<EprUncertainty> {
    require_symmetric(params, tol)?;
    let product = (params.n - params.k_x) * (params.n - params.k_p);
    if !(product > 0.0) {
        return Err(Error::InvalidInput(format!(
            "(n - k_x)(n - k_p) = {product} is not positive"
        )));
    }
    EprUncertainty::clamped(product.sqrt())
}

/// `(n − k_x)(n − k_p) < 1` up to `tol`.
pub fn is_entangled(params: &StandardFormParams, tol: f64) -> bool {
    (params.n - params.k_x) * (params.n - params.k_p) < 1.0 - tol
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EntanglementReport {
    pub valid: bool,
    pub symmetric: bool,
    pub separable: bool,
    pub delta: EprUncertainty,
    pub r_delta: f64,
    pub eof_bits: f64,
    pub standard_form: StandardFormParams,
}

/// Entanglement of formation of a symmetric two-mode Gaussian state.
///
/// Invalid matrices and asymmetric states are errors; the formula
/// `E_F = f(√((n − k_x)(n − k_p)))` is only established for `m = n`.
pub fn eof_symmetric(gamma: &CovarianceMatrix, tol: f64) -> Result<EntanglementReport> {
    let validity = validate_cm(gamma, tol);
    if !validity.valid {
        return Err(Error::InvalidCovariance {
            min_eigenvalue: validity.min_eigenvalue,
            symmetric: validity.symmetric,
        });
    }
    let standard_form = reduce_to_standard_form(gamma, tol)?;
    eof_of_standard_form(&standard_form, tol)
}

/// Same as [`eof_symmetric`], starting from already reduced parameters.
pub fn eof_of_standard_form(params: &StandardFormParams, tol: f64) -> Result<EntanglementReport> {
    let validity = validate_cm(&params.to_cm()?, tol);
    if !validity.valid {
        return Err(Error::InvalidCovariance {
            min_eigenvalue: validity.min_eigenvalue,
            symmetric: validity.symmetric,
        });
    }
    require_symmetric(params, tol)?;
    let separable = !is_entangled(params, tol);
    let delta = epr_uncertainty_of_standard_form(params, tol)?;
    let eof_bits = if separable { 0.0 } else { f_of_delta(delta) };
    Ok(EntanglementReport {
        valid: true,
        symmetric: true,
        separable,
        delta,
        r_delta: r_of_delta(delta),
        eof_bits,
        standard_form: *params,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symplectic::tmss_cm;
    use crate::DEFAULT_TOL;

    fn d(x: f64) -> EprUncertainty {
        EprUncertainty::new(x).unwrap()
    }

    /// −Σ p log₂ p over p_N = tanh^{2N}(r)/cosh²(r), summed until the tail
    /// is below machine precision.
    fn tmss_entropy_by_summation(r: f64) -> f64 {
        let t2 = r.tanh().powi(2);
        let mut p = 1.0 / r.cosh().powi(2);
        let mut total = 0.0;
        while p > 1e-300 {
            total -= p * p.log2();
            p *= t2;
        }
        total
    }

    #[test]
    fn epr_uncertainty_domain() {
        assert!(EprUncertainty::new(0.0).is_err());
        assert!(EprUncertainty::new(1.0 + 1e-12).is_err());
        assert!(EprUncertainty::new(f64::NAN).is_err());
        assert_eq!(EprUncertainty::clamped(1.3).unwrap().value(), 1.0);
    }

    #[test]
    fn r_of_delta_examples() {
        assert_eq!(r_of_delta(d(1.0)), 0.0);
        assert!((r_of_delta(d((-2.0f64).exp())) - 1.0).abs() < 1e-15);
        assert!((r_of_delta(d(0.5)) - 0.346_573_590_279_972_6).abs() < 1e-15);
    }

    #[test]
    fn delta_of_tmss_examples() {
        assert_eq!(delta_of_tmss(0.0).unwrap().value(), 1.0);
        assert!((delta_of_tmss(1.0).unwrap().value() - 0.135_335_283_236_612_7).abs() < 1e-15);
        assert!(delta_of_tmss(-1.0).is_err());
    }

    #[test]
    fn round_trip_r_delta() {
        for i in 1..=1000 {
            let delta = i as f64 / 1000.0;
            let back = delta_of_tmss(r_of_delta(d(delta))).unwrap().value();
            assert!((back - delta).abs() < 1e-14);
        }
    }

    #[test]
    fn tmss_entropy_against_series() {
        assert_eq!(entropy_of_tmss(0.0), 0.0);
        let series = tmss_entropy_by_summation(1.0);
        assert!((entropy_of_tmss(1.0) - series).abs() < 1e-12);
        // frozen from the series oracle
        assert!(
            (entropy_of_tmss(1.0) - 2.336_909_300_545_897).abs() < 1e-9,
            "{}",
            entropy_of_tmss(1.0)
        );
        for r in [0.01, 0.1, 0.5, 2.0, 4.0] {
            assert!((entropy_of_tmss(r) - tmss_entropy_by_summation(r)).abs() < 1e-10);
        }
    }

    #[test]
    fn c_plus_minus_examples() {
        assert_eq!(c_plus_minus(d(1.0)), (1.0, 0.0));
        let (p, m) = c_plus_minus(d(0.5));
        assert!((p - 1.125).abs() < 1e-15 && (m - 0.125).abs() < 1e-15);
        for i in 1..=100 {
            let (p, m) = c_plus_minus(d(i as f64 / 100.0));
            assert!((p - m - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn f_examples() {
        assert_eq!(f_of_delta(d(1.0)), 0.0);
        let expected = 1.125 * 1.125f64.log2() - 0.125 * 0.125f64.log2();
        assert!((f_of_delta(d(0.5)) - expected).abs() < 1e-15);
        assert!((f_of_delta(d(0.5)) - 0.566_17).abs() < 1e-5);
        let e2 = (-2.0f64).exp();
        assert!((f_of_delta(d(e2)) - entropy_of_tmss(1.0)).abs() < 1e-12);
        assert!((f_of_delta(d(0.5)) - f_of_delta_direct(d(0.5))).abs() < 1e-14);
    }

    #[test]
    fn f_matches_tmss_entropy_on_r_grid() {
        for i in 1..=500 {
            let r = 5.0 * i as f64 / 500.0;
            let lhs = f_of_delta(delta_of_tmss(r).unwrap());
            assert!((lhs - entropy_of_tmss(r)).abs() < 1e-12, "r = {r}");
        }
    }

    #[test]
    fn standard_form_delta_examples() {
        let vac = StandardFormParams::symmetric(1.0, 0.0, 0.0);
        assert_eq!(
            epr_uncertainty_of_standard_form(&vac, DEFAULT_TOL)
                .unwrap()
                .value(),
            1.0
        );
        let p = StandardFormParams::symmetric(2.0, 1.5, 1.5);
        assert!(
            (epr_uncertainty_of_standard_form(&p, DEFAULT_TOL)
                .unwrap()
                .value()
                - 0.5)
                .abs()
                < 1e-15
        );
        let r = 0.7f64;
        let t = StandardFormParams::symmetric((2.0 * r).cosh(), (2.0 * r).sinh(), (2.0 * r).sinh());
        let got = epr_uncertainty_of_standard_form(&t, DEFAULT_TOL)
            .unwrap()
            .value();
        assert!((got - (-2.0 * r).exp()).abs() < 1e-14);
        let asym = StandardFormParams::new(2.0, 2.5, 1.0, 1.0);
        assert!(matches!(
            epr_uncertainty_of_standard_form(&asym, DEFAULT_TOL),
            Err(Error::Asymmetric { .. })
        ));
    }

    #[test]
    fn entanglement_criterion_examples() {
        assert!(!is_entangled(
            &StandardFormParams::symmetric(1.0, 0.0, 0.0),
            DEFAULT_TOL
        ));
        assert!(is_entangled(
            &StandardFormParams::symmetric(2.0, 1.5, 1.5),
            DEFAULT_TOL
        ));
        assert!(!is_entangled(
            &StandardFormParams::symmetric(2.0, 0.9, 0.9),
            DEFAULT_TOL
        ));
    }

    #[test]
    fn eof_examples() {
        for r in [0.1, 0.5, 1.0, 2.0] {
            let rep = eof_symmetric(&tmss_cm(r).unwrap(), DEFAULT_TOL).unwrap();
            assert!((rep.eof_bits - entropy_of_tmss(r)).abs() < 1e-9);
            assert!(!rep.separable);
        }
        let g = StandardFormParams::symmetric(2.0, 1.5, 1.5)
            .to_cm()
            .unwrap();
        let rep = eof_symmetric(&g, DEFAULT_TOL).unwrap();
        assert!((rep.eof_bits - 0.566_17).abs() < 1e-5);
        assert!((rep.delta.value() - 0.5).abs() < 1e-12);

        let g = StandardFormParams::symmetric(2.0, 0.9, 0.9)
            .to_cm()
            .unwrap();
        let rep = eof_symmetric(&g, DEFAULT_TOL).unwrap();
        assert!(rep.separable);
        assert_eq!(rep.eof_bits, 0.0);
    }

    #[test]
    fn eof_errors() {
        let bad = StandardFormParams::symmetric(1.0, 0.5, 0.5)
            .to_cm()
            .unwrap();
        assert!(matches!(
            eof_symmetric(&bad, DEFAULT_TOL),
            Err(Error::InvalidCovariance { .. })
        ));
        let asym = StandardFormParams::new(2.0, 3.0, 1.0, 1.0).to_cm().unwrap();
        assert!(matches!(
            eof_symmetric(&asym, DEFAULT_TOL),
            Err(Error::Asymmetric { .. })
        ));
    }
}
