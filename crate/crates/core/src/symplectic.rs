//! Covariance-matrix algebra for two modes.
//!
//! Matrices are ordered `(X_A, P_A, X_B, P_B)`. The standard form is
//!
//! ```text
//! | n    0    k_x  0   |
//! | 0    n    0   -k_p |
//! | k_x  0    m    0   |
//! | 0   -k_p  0    m   |
//! ```
//!
//! with the signs carried by the matrix expansion and `k_x >= |k_p|`.

use nalgebra::{Matrix2, Matrix4, SMatrix, SymmetricEigen, Vector2, Vector4};
use serde::Serialize;

use crate::{Error, Result};

/// The two-mode symplectic form `Ω`, with `[R_i, R_j] = i Ω_ij`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymplecticForm {
    omega: Matrix4<f64>,
}

impl SymplecticForm {
    pub fn new() -> Self {
        let mut omega = Matrix4::zeros();
        omega[(0, 1)] = 1.0;
        omega[(1, 0)] = -1.0;
        omega[(2, 3)] = 1.0;
        omega[(3, 2)] = -1.0;
        Self { omega }
    }

    pub fn matrix(&self) -> &Matrix4<f64> {
        &self.omega
    }

    /// Mean shift `Ωᵀ ξ` produced by the Weyl operator `exp(i ξᵀ R)`.
    pub fn weyl_shift(&self, xi: &Vector4<f64>) -> Vector4<f64> {
        self.omega.transpose() * xi
    }
}

impl Default for SymplecticForm {
    fn default() -> Self {
        Self::new()
    }
}

/// Real 4×4 second-moment matrix, vacuum-normalized to the identity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CovarianceMatrix {
    gamma: Matrix4<f64>,
}

impl CovarianceMatrix {
    /// Wraps a matrix after checking its entries are finite. Physical
    /// validity is a separate question, see [`validate_cm`].
    pub fn new(gamma: Matrix4<f64>) -> Result<Self> {
        if gamma.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(
                "covariance matrix has non-finite entries".into(),
            ));
        }
        Ok(Self { gamma })
    }

    pub fn from_rows(rows: [[f64; 4]; 4]) -> Result<Self> {
        Self::new(Matrix4::from_fn(|i, j| rows[i][j]))
    }

    pub fn identity() -> Self {
        Self {
            gamma: Matrix4::identity(),
        }
    }

    pub fn matrix(&self) -> &Matrix4<f64> {
        &self.gamma
    }

    pub fn block_a(&self) -> Matrix2<f64> {
        self.gamma.fixed_view::<2, 2>(0, 0).into_owned()
    }

    pub fn block_b(&self) -> Matrix2<f64> {
        self.gamma.fixed_view::<2, 2>(2, 2).into_owned()
    }

    pub fn block_c(&self) -> Matrix2<f64> {
        self.gamma.fixed_view::<2, 2>(0, 2).into_owned()
    }

    /// The four local symplectic invariants `(det A, det B, det C, det γ)`.
    pub fn local_invariants(&self) -> [f64; 4] {
        [
            self.block_a().determinant(),
            self.block_b().determinant(),
            self.block_c().determinant(),
            self.gamma.determinant(),
        ]
    }

    /// `S γ Sᵀ` for a (local) symplectic `S`.
    pub fn conjugate(&self, s: &Matrix4<f64>) -> Self {
        Self {
            gamma: s * self.gamma * s.transpose(),
        }
    }

    /// `½[Δ²(X_A − X_B) + Δ²(P_A + P_B)]` read off the matrix, unclamped.
    pub fn epr_variance_sum(&self) -> f64 {
        let g = &self.gamma;
        0.25 * (g[(0, 0)] + g[(2, 2)] - 2.0 * g[(0, 2)] + g[(1, 1)] + g[(3, 3)] + 2.0 * g[(1, 3)])
    }
}

/// Standard-form parameters `(n, m, k_x, k_p)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StandardFormParams {
    pub n: f64,
    pub m: f64,
    pub k_x: f64,
    pub k_p: f64,
}

impl StandardFormParams {
    pub fn new(n: f64, m: f64, k_x: f64, k_p: f64) -> Self {
        Self { n, m, k_x, k_p }
    }

    /// Symmetric standard form, `m = n`.
    pub fn symmetric(n: f64, k_x: f64, k_p: f64) -> Self {
        Self::new(n, n, k_x, k_p)
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        (self.m - self.n).abs() <= tol * self.n.abs().max(1.0)
    }

    pub fn to_cm(&self) -> Result<CovarianceMatrix> {
        let Self { n, m, k_x, k_p } = *self;
        CovarianceMatrix::from_rows([
            [n, 0.0, k_x, 0.0],
            [0.0, n, 0.0, -k_p],
            [k_x, 0.0, m, 0.0],
            [0.0, -k_p, 0.0, m],
        ])
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidityReport {
    pub valid: bool,
    pub symmetric: bool,
    /// Smallest eigenvalue of the Hermitian matrix `γ + iΩ`.
    pub min_eigenvalue: f64,
}

/// Checks `γ = γᵀ` and `γ + iΩ ⪰ 0` within `tol`.
pub fn validate_cm(gamma: &CovarianceMatrix, tol: f64) -> ValidityReport {
    let g = gamma.matrix();
    let symmetric = (g - g.transpose()).amax() <= tol;
    let sym = 0.5 * (g + g.transpose());
    let min_eigenvalue = min_eigenvalue_hermitian(&sym, SymplecticForm::new().matrix());
    let scale = sym.amax().max(1.0);
    ValidityReport {
        valid: symmetric && min_eigenvalue >= -tol * scale,
        symmetric,
        min_eigenvalue,
    }
}

/// Smallest eigenvalue of the Hermitian `S + iK` (`K` antisymmetric), read
/// off its real embedding `[[S, −K], [K, S]]`.
fn min_eigenvalue_hermitian(s: &Matrix4<f64>, k: &Matrix4<f64>) -> f64 {
    let mut h = SMatrix::<f64, 8, 8>::zeros();
    h.fixed_view_mut::<4, 4>(0, 0).copy_from(s);
    h.fixed_view_mut::<4, 4>(4, 4).copy_from(s);
    h.fixed_view_mut::<4, 4>(0, 4).copy_from(&(-k));
    h.fixed_view_mut::<4, 4>(4, 0).copy_from(k);
    h.symmetric_eigenvalues().min()
}

/// `(S, √det A)` with `S` symplectic and `S A S = √det A · I`.
fn normalize_block(a: &Matrix2<f64>) -> Result<(Matrix2<f64>, f64)> {
    let eig = SymmetricEigen::new(0.5 * (a + a.transpose()));
    let (a1, a2) = (eig.eigenvalues[0], eig.eigenvalues[1]);
    if !(a1 > 0.0 && a2 > 0.0) {
        return Err(Error::Conditioning("singular local block".into()));
    }
    let n = (a1 * a2).sqrt();
    let d = Matrix2::from_diagonal(&Vector2::new((n / a1).sqrt(), (n / a2).sqrt()));
    Ok((eig.eigenvectors * d * eig.eigenvectors.transpose(), n))
}

/// Recovers `(n, m, k_x, k_p)`.
///
/// Local symplectics bring `A` and `B` to `n I` and `m I` with
/// `n = √det A`, `m = √det B`; the singular values of the transformed `C`
/// are then `k_x ≥ |k_p|`. `k_p` carries the sign of `−det C`, so it is
/// negative only for states whose `C` block has positive determinant. The
/// result is checked against all four local invariants.
pub fn reduce_to_standard_form(gamma: &CovarianceMatrix, tol: f64) -> Result<StandardFormParams> {
    let report = validate_cm(gamma, tol);
    if !report.valid {
        return Err(Error::InvalidCovariance {
            min_eigenvalue: report.min_eigenvalue,
            symmetric: report.symmetric,
        });
    }
    let [det_a, det_b, det_c, det_g] = gamma.local_invariants();
    let (s_a, n) = normalize_block(&gamma.block_a())?;
    let (s_b, m) = normalize_block(&gamma.block_b())?;
    let c = s_a * gamma.block_c() * s_b;
    let sv = c.singular_values();
    let k_x = sv[0].max(sv[1]);
    let k_p = sv[0].min(sv[1]).copysign(-c.determinant());

    let params = StandardFormParams { n, m, k_x, k_p };
    let rebuilt = params.to_cm()?.local_invariants();
    let original = [det_a, det_b, det_c, det_g];
    for (a, b) in rebuilt.iter().zip(original.iter()) {
        if (a - b).abs() > 1e3 * tol * b.abs().max(1.0) {
            return Err(Error::Conditioning(format!(
                "standard form reproduces invariant {b} as {a}"
            )));
        }
    }
    Ok(params)
}

/// Standard form after the local squeezing that equalizes the `X` and `P`
/// sectors: `X` entries scaled by `s²`, `P` entries by `s⁻²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BalancedParams {
    pub n_x: f64,
    pub k_x: f64,
    pub n_p: f64,
    pub k_p: f64,
    /// Quadrature scale `s = [(n − k_p)/(n − k_x)]^{1/4}`.
    pub scale: f64,
}

impl BalancedParams {
    pub fn to_cm(&self) -> Result<CovarianceMatrix> {
        let Self {
            n_x, k_x, n_p, k_p, ..
        } = *self;
        CovarianceMatrix::from_rows([
            [n_x, 0.0, k_x, 0.0],
            [0.0, n_p, 0.0, -k_p],
            [k_x, 0.0, n_x, 0.0],
            [0.0, -k_p, 0.0, n_p],
        ])
    }

    /// `(n_x − k_x)(n_p − k_p)`, equal to the pre-squeezing product.
    pub fn gap_product(&self) -> f64 {
        (self.n_x - self.k_x) * (self.n_p - self.k_p)
    }
}

/// Local squeezer multiplying both `X` quadratures by `s` and dividing both
/// `P` quadratures by `s`.
pub fn local_squeezer(s: f64) -> Matrix4<f64> {
    Matrix4::from_diagonal(&Vector4::new(s, 1.0 / s, s, 1.0 / s))
}

pub fn apply_balancing_squeezing(params: &StandardFormParams, tol: f64) -> Result<BalancedParams> {
    let StandardFormParams { n, m, k_x, k_p } = *params;
    if !params.is_symmetric(tol) {
        return Err(Error::Asymmetric { n, m });
    }
    if !(k_x >= k_p && k_p >= 0.0) {
        return Err(Error::InvalidInput(format!(
            "balancing needs k_x >= k_p >= 0, got k_x = {k_x}, k_p = {k_p}"
        )));
    }
    if n - k_x <= tol {
        return Err(Error::BoundaryState);
    }
    let scale = ((n - k_p) / (n - k_x)).powf(0.25);
    let s2 = scale * scale;
    Ok(BalancedParams {
        n_x: n * s2,
        k_x: k_x * s2,
        n_p: n / s2,
        k_p: k_p / s2,
        scale,
    })
}

/// `γ_a ⪰ γ_b` up to `tol`.
pub fn psd_order(gamma_a: &CovarianceMatrix, gamma_b: &CovarianceMatrix, tol: f64) -> bool {
    min_eigenvalue_of_difference(gamma_a, gamma_b) >= -tol
}

pub fn min_eigenvalue_of_difference(gamma_a: &CovarianceMatrix, gamma_b: &CovarianceMatrix) -> f64 {
    let diff = gamma_a.matrix() - gamma_b.matrix();
    let sym = 0.5 * (diff + diff.transpose());
    sym.symmetric_eigenvalues().min()
}

/// Covariance matrix of the two-mode squeezed vacuum with squeezing `r`.
pub fn tmss_cm(r: f64) -> Result<CovarianceMatrix> {
    if !(r >= 0.0) || !r.is_finite() {
        return Err(Error::InvalidInput(format!(
            "squeezing must be finite and >= 0, got {r}"
        )));
    }
    let c = (2.0 * r).cosh();
    let s = (2.0 * r).sinh();
    StandardFormParams::symmetric(c, s, s).to_cm()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::DEFAULT_TOL;

    fn rotation(theta: f64) -> Matrix2<f64> {
        let (s, c) = theta.sin_cos();
        Matrix2::new(c, s, -s, c)
    }

    fn local(sa: Matrix2<f64>, sb: Matrix2<f64>) -> Matrix4<f64> {
        let mut s = Matrix4::zeros();
        s.fixed_view_mut::<2, 2>(0, 0).copy_from(&sa);
        s.fixed_view_mut::<2, 2>(2, 2).copy_from(&sb);
        s
    }

    /// exp(r(a†b† − ab)) in the (X_A, P_A, X_B, P_B) Heisenberg picture.
    fn two_mode_squeezer(r: f64) -> Matrix4<f64> {
        let (c, s) = (r.cosh(), r.sinh());
        Matrix4::new(
            c, 0.0, s, 0.0, //
            0.0, c, 0.0, -s, //
            s, 0.0, c, 0.0, //
            0.0, -s, 0.0, c,
        )
    }

    #[test]
    fn omega_squares_to_minus_identity() {
        let o = *SymplecticForm::new().matrix();
        assert_eq!(o * o, -Matrix4::identity());
        assert_eq!(o.transpose(), -o);
    }

    #[test]
    fn vacuum_is_valid() {
        let r = validate_cm(&CovarianceMatrix::identity(), DEFAULT_TOL);
        assert!(r.valid);
        assert!(r.min_eigenvalue.abs() < 1e-12);
    }

    #[test]
    fn scalar_validity_examples() {
        let ok = StandardFormParams::symmetric(2.0, 1.5, 1.5)
            .to_cm()
            .unwrap();
        assert!(validate_cm(&ok, DEFAULT_TOL).valid);
        let bad = StandardFormParams::symmetric(1.0, 0.5, 0.5)
            .to_cm()
            .unwrap();
        let report = validate_cm(&bad, DEFAULT_TOL);
        assert!(!report.valid);
        assert!(report.min_eigenvalue < 0.0);
    }

    #[test]
    fn non_finite_rejected() {
        let mut m = Matrix4::identity();
        m[(1, 2)] = f64::NAN;
        assert!(matches!(
            CovarianceMatrix::new(m),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn asymmetric_matrix_is_invalid() {
        let mut m = Matrix4::identity();
        m[(0, 1)] = 0.1;
        let r = validate_cm(&CovarianceMatrix::new(m).unwrap(), DEFAULT_TOL);
        assert!(!r.symmetric && !r.valid);
    }

    #[test]
    fn identity_reduces_to_vacuum_params() {
        let p = reduce_to_standard_form(&CovarianceMatrix::identity(), DEFAULT_TOL).unwrap();
        assert_eq!(p, StandardFormParams::new(1.0, 1.0, 0.0, 0.0));
    }

    #[test]
    fn squeezer_conjugation_matches_tmss_cm() {
        for r in [0.1, 0.5, 1.0] {
            let s = two_mode_squeezer(r);
            let built = CovarianceMatrix::identity().conjugate(&s);
            let direct = tmss_cm(r).unwrap();
            assert!((built.matrix() - direct.matrix()).amax() < 1e-12);
            let p = reduce_to_standard_form(&built, DEFAULT_TOL).unwrap();
            assert!((p.n - (2.0 * r).cosh()).abs() < 1e-12);
            assert!((p.m - (2.0 * r).cosh()).abs() < 1e-12);
            assert!((p.k_x - (2.0 * r).sinh()).abs() < 1e-9);
            assert!((p.k_p - (2.0 * r).sinh()).abs() < 1e-9);
        }
    }

    #[test]
    fn tmss_cm_rejects_negative_and_zero_is_vacuum() {
        assert!(tmss_cm(-0.1).is_err());
        assert_eq!(tmss_cm(0.0).unwrap(), CovarianceMatrix::identity());
    }

    #[test]
    fn local_symplectic_round_trip() {
        let stored = [
            StandardFormParams::new(2.0, 2.0, 1.5, 1.0),
            StandardFormParams::new(3.0, 2.5, 2.0, 0.5),
            StandardFormParams::new(1.5, 1.5, 0.3, -0.2),
        ];
        let mut state = 0x2545_f491_u64;
        let mut next = || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for p in stored {
            let gamma = p.to_cm().unwrap();
            for _ in 0..20 {
                let sa = rotation(6.0 * next())
                    * Matrix2::from_diagonal(&nalgebra::Vector2::new(0.5 + next(), 1.0))
                    * rotation(6.0 * next());
                // unit-determinant squeeze on B
                let z = 0.5 + next();
                let sb = rotation(6.0 * next())
                    * Matrix2::from_diagonal(&nalgebra::Vector2::new(z, 1.0 / z))
                    * rotation(6.0 * next());
                let sa = sa / sa.determinant().sqrt();
                let moved = gamma.conjugate(&local(sa, sb));
                let back = reduce_to_standard_form(&moved, DEFAULT_TOL).unwrap();
                assert!((back.n - p.n).abs() < 1e-9, "{back:?} vs {p:?}");
                assert!((back.m - p.m).abs() < 1e-9);
                assert!((back.k_x - p.k_x).abs() < 1e-9);
                assert!((back.k_p - p.k_p).abs() < 1e-9);
                let inv0 = gamma.local_invariants();
                let inv1 = moved.local_invariants();
                for (a, b) in inv0.iter().zip(inv1.iter()) {
                    assert!((a - b).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn invalid_input_is_not_reduced() {
        let bad = StandardFormParams::symmetric(1.0, 0.5, 0.5)
            .to_cm()
            .unwrap();
        assert!(matches!(
            reduce_to_standard_form(&bad, DEFAULT_TOL),
            Err(Error::InvalidCovariance { .. })
        ));
    }

    #[test]
    fn balancing_examples() {
        let p = StandardFormParams::symmetric(2.0, 1.5, 1.5);
        let b = apply_balancing_squeezing(&p, DEFAULT_TOL).unwrap();
        assert_eq!(b.scale, 1.0);
        assert_eq!((b.n_x, b.k_x, b.n_p, b.k_p), (2.0, 1.5, 2.0, 1.5));

        let p = StandardFormParams::symmetric(2.0, 1.5, 1.0);
        let b = apply_balancing_squeezing(&p, DEFAULT_TOL).unwrap();
        assert!((b.scale - 2f64.powf(0.25)).abs() < 1e-15);
        let expected = 0.5_f64.sqrt();
        assert!((b.n_x - b.k_x - expected).abs() < 1e-12);
        assert!((b.n_p - b.k_p - expected).abs() < 1e-12);
        assert!((b.gap_product() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn balancing_is_a_local_squeeze() {
        let p = StandardFormParams::symmetric(2.0, 1.5, 1.0);
        let b = apply_balancing_squeezing(&p, DEFAULT_TOL).unwrap();
        let direct = p.to_cm().unwrap().conjugate(&local_squeezer(b.scale));
        assert!((direct.matrix() - b.to_cm().unwrap().matrix()).amax() < 1e-12);
        let i0 = p.to_cm().unwrap().local_invariants();
        let i1 = b.to_cm().unwrap().local_invariants();
        for (a, c) in i0.iter().zip(i1.iter()) {
            assert!((a - c).abs() < 1e-9);
        }
    }

    #[test]
    fn balancing_rejects_boundary() {
        let p = StandardFormParams::symmetric(1.0, 1.0, 0.0);
        assert_eq!(
            apply_balancing_squeezing(&p, DEFAULT_TOL),
            Err(Error::BoundaryState)
        );
        // no physical state sits on the boundary
        assert!(!validate_cm(&p.to_cm().unwrap(), DEFAULT_TOL).valid);
    }

    #[test]
    fn psd_order_examples() {
        let g = StandardFormParams::symmetric(2.0, 1.5, 1.5)
            .to_cm()
            .unwrap();
        assert!(psd_order(&g, &g, DEFAULT_TOL));
        let r_delta = -0.5 * 0.5f64.ln();
        assert!(psd_order(&g, &tmss_cm(r_delta).unwrap(), DEFAULT_TOL));
        assert!(!psd_order(
            &CovarianceMatrix::identity(),
            &tmss_cm(1.0).unwrap(),
            DEFAULT_TOL
        ));
    }

    #[test]
    fn weyl_shift_is_omega_transpose() {
        let xi = Vector4::new(1.0, 2.0, 3.0, 4.0);
        let d = SymplecticForm::new().weyl_shift(&xi);
        assert_eq!(d, Vector4::new(-2.0, 1.0, -4.0, 3.0));
    }
}
