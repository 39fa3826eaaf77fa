//! Second-order statistics of 1-bit quantized, zero-mean, proper complex
//! Gaussian vectors.
//!
//! For `r ~ CN(0, C)` and `q = sign(Re r) + j sign(Im r)`:
//!
//! - `E[q q^H] = (4/pi) (asin(K Re{C} K) + j asin(K Im{C} K))`
//! - `E[q q^H] ~ (4/pi) (K C K + (pi/2 - 1) I)` when `asin(x) ~ x`
//! - `E[q r^H] = sqrt(4/pi) K C`
//!
//! where `K = diag(C)^(-1/2)`.

use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, PI};


use crate::{CMatrix, Complex64, Error, Result};

/// `pi/2 - 1`, the diagonal offset of the linearized arcsine law.
pub const LINEARIZATION_OFFSET: f64 = FRAC_PI_2 - 1.0;

/// Which form of the arcsine law models a 1-bit converter's output
/// covariance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum ArcsineMode {
    #[default]
    Exact,
    Linearized,
}

impl ArcsineMode {
    /// Output covariance of the quantizer for input covariance `c_r`.
    pub fn output_cov(self, c_r: &CovMatrix) -> Result<CovMatrix> {
        match self {
            Self::Exact => arcsine_cov_exact(c_r),
            Self::Linearized => arcsine_cov_linearized(c_r),
        }
    }
}

/// Slack allowed on normalized correlations before they count as invalid.
const CORRELATION_SLACK: f64 = 1e-9;

/// Square Hermitian matrix with a real, non-negative diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct CovMatrix(CMatrix);

impl CovMatrix {
    pub fn new(m: CMatrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::InvalidParameter(alloc::format!(
                "covariance must be square, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        if m.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::InvalidParameter("covariance has non-finite entries".into()));
        }
        let scale = m.iter().fold(0.0f64, |a, z| a.max(z.norm())).max(f64::MIN_POSITIVE);
        let n = m.nrows();
        for i in 0..n {
            let d = m[(i, i)];
            if d.im.abs() > 1e-10 * scale || d.re < 0.0 {
                return Err(Error::DegenerateInput { index: i, value: d.re });
            }
            for j in 0..i {
                if (m[(i, j)] - m[(j, i)].conj()).norm() > 1e-10 * scale {
                    return Err(Error::InvalidParameter(alloc::format!(
                        "covariance is not Hermitian at ({i}, {j})"
                    )));
                }
            }
        }
        Ok(Self(m))
    }

    /// Wraps a matrix that is Hermitian by construction, symmetrizing away
    /// rounding noise.
    pub(crate) fn from_hermitian(m: CMatrix) -> Self {
        let h = (&m + m.adjoint()) * Complex64::new(0.5, 0.0);
        Self(h)
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.0[(i, i)].re).collect()
    }

    pub fn trace(&self) -> f64 {
        self.diagonal().iter().sum()
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let eig = nalgebra::SymmetricEigen::new(self.0.clone());
        let mut v: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        v.sort_by(f64::total_cmp);
        v
    }

    /// Positive semidefinite up to `-1e-8 * trace / dim`.
    pub fn is_psd(&self) -> bool {
        if self.dim() == 0 {
            return true;
        }
        let tol = 1e-8 * self.trace() / self.dim() as f64;
        self.eigenvalues().first().is_none_or(|&l| l >= -tol)
    }
}

/// Per-entry scaling `1 / sqrt(diag(C)[i])`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagNormalizer {
    values: Vec<f64>,
}

impl DiagNormalizer {
    /// Identity scaling of dimension `n`.
    pub fn identity(n: usize) -> Self {
        Self { values: alloc::vec![1.0; n] }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `diag(values) * m`
    pub fn scale_rows(&self, m: &CMatrix) -> CMatrix {
        let mut out = m.clone();
        for (i, mut row) in out.row_iter_mut().enumerate() {
            row *= Complex64::new(self.values[i], 0.0);
        }
        out
    }

    /// `m * diag(values)`
    pub fn scale_cols(&self, m: &CMatrix) -> CMatrix {
        let mut out = m.clone();
        for (j, mut col) in out.column_iter_mut().enumerate() {
            col *= Complex64::new(self.values[j], 0.0);
        }
        out
    }

    /// `diag(values) * m * diag(values)`
    pub fn sandwich(&self, m: &CMatrix) -> CMatrix {
        CMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)] * (self.values[i] * self.values[j]))
    }
}

/// `diag(C)^(-1/2)`. Fails on any non-positive diagonal entry.
pub fn kappa(c: &CMatrix) -> Result<DiagNormalizer> {
    let n = c.nrows().min(c.ncols());
    let values = (0..n)
        .map(|i| {
            let d = c[(i, i)].re;
            if d > 0.0 && d.is_finite() {
                Ok(1.0 / d.sqrt())
            } else {
                Err(Error::DegenerateInput { index: i, value: d })
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DiagNormalizer { values })
}

fn normalized_correlation(v: f64, row: usize, col: usize) -> Result<f64> {
    if v.abs() > 1.0 + CORRELATION_SLACK {
        return Err(Error::NotCovariance { row, col, value: v });
    }
    Ok(v.clamp(-1.0, 1.0))
}

/// Normalized covariance `K C K` with correlations clamped to [-1, 1].
fn normalized(c: &CovMatrix) -> Result<(DiagNormalizer, CMatrix)> {
    let k = kappa(c.matrix())?;
    let mut n = k.sandwich(c.matrix());
    let dim = c.dim();
    for i in 0..dim {
        // exactly 1 by definition; asin is ill-conditioned there
        n[(i, i)] = Complex64::new(1.0, 0.0);
        for j in 0..dim {
            if i == j {
                continue;
            }
            let z = n[(i, j)];
            n[(i, j)] = Complex64::new(
                normalized_correlation(z.re, i, j)?,
                normalized_correlation(z.im, i, j)?,
            );
        }
    }
    Ok((k, n))
}

/// Exact covariance of the quantizer output (arcsine law).
pub fn arcsine_cov_exact(c_r: &CovMatrix) -> Result<CovMatrix> {
    let (_, n) = normalized(c_r)?;
    let g = 4.0 / PI;
    let out = n.map(|z| Complex64::new(g * z.re.asin(), g * z.im.asin()));
    Ok(CovMatrix::from_hermitian(out))
}

/// Linearized arcsine law `(4/pi) (K C K + (pi/2 - 1) I)`.
pub fn arcsine_cov_linearized(c_r: &CovMatrix) -> Result<CovMatrix> {
    let (_, mut n) = normalized(c_r)?;
    for i in 0..n.nrows() {
        n[(i, i)] += LINEARIZATION_OFFSET;
    }
    Ok(CovMatrix::from_hermitian(n * Complex64::new(4.0 / PI, 0.0)))
}

/// Cross-covariance `E[q r^H] = sqrt(4/pi) K C` between quantizer output
/// and input.
pub fn cross_cov_quantized(c_r: &CovMatrix) -> Result<CMatrix> {
    let (k, _) = normalized(c_r)?;
    Ok(k.scale_rows(c_r.matrix()) * Complex64::new((4.0 / PI).sqrt(), 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    
    use crate::dsp::sign_1bit;
    use nalgebra::DMatrix;
    use proptest::prelude::*;
    use rand_chacha::ChaCha8Rng;
    use rand_core::SeedableRng;
    use rand_distr::{Distribution, StandardNormal};

    fn real(rows: usize, data: &[f64]) -> CovMatrix {
        let m = DMatrix::from_row_slice(rows, rows, data).map(|v| Complex64::new(v, 0.0));
        CovMatrix::new(m).unwrap()
    }

    fn random_cov(rng: &mut ChaCha8Rng, n: usize) -> CovMatrix {
        let g = CMatrix::from_fn(n, n, |_, _| {
            Complex64::new(StandardNormal.sample(rng), StandardNormal.sample(rng))
        });
        let scale: Vec<f64> = (0..n).map(|i| 0.5 + i as f64).collect();
        let c = &g * g.adjoint() / Complex64::new(n as f64, 0.0);
        let c = CMatrix::from_fn(n, n, |i, j| c[(i, j)] * (scale[i] * scale[j]));
        CovMatrix::from_hermitian(c)
    }

    #[test]
    fn kappa_examples() {
        let k = kappa(real(2, &[4.0, 0.0, 0.0, 9.0]).matrix()).unwrap();
        assert_eq!(k.values()[0], 0.5);
        assert!((k.values()[1] - 1.0 / 3.0).abs() < 1e-15);
        let k = kappa(&CMatrix::identity(3, 3)).unwrap();
        assert_eq!(k.values(), &[1.0, 1.0, 1.0]);
        let z = real(2, &[1.0, 0.0, 0.0, 0.0]);
        assert_eq!(kappa(z.matrix()), Err(Error::DegenerateInput { index: 1, value: 0.0 }));
    }

    #[test]
    fn exact_identity_and_half_correlation() {
        let out = arcsine_cov_exact(&real(3, &[1., 0., 0., 0., 1., 0., 0., 0., 1.])).unwrap();
        assert!((out.matrix() - CMatrix::identity(3, 3) * Complex64::new(2.0, 0.0)).norm() < 1e-14);
        let out = arcsine_cov_exact(&real(2, &[1.0, 0.5, 0.5, 1.0])).unwrap();
        assert!((out.matrix()[(0, 1)].re - 2.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn linearized_vs_exact() {
        let lin = arcsine_cov_linearized(&real(2, &[1.0, 0.0, 0.0, 1.0])).unwrap();
        assert!((lin.matrix()[(0, 0)].re - 2.0).abs() < 1e-14);
        let c = real(2, &[1.0, 0.1, 0.1, 1.0]);
        let lin = arcsine_cov_linearized(&c).unwrap().matrix()[(0, 1)].re;
        let exact = arcsine_cov_exact(&c).unwrap().matrix()[(0, 1)].re;
        assert!((lin - 0.127324).abs() < 1e-6, "{lin}");
        assert!((exact - 0.127537).abs() < 1e-6, "{exact}");
    }

    #[test]
    fn cross_cov_identity_and_scaling() {
        let x = cross_cov_quantized(&real(2, &[1.0, 0.0, 0.0, 1.0])).unwrap();
        assert!((x[(0, 0)].re - core::f64::consts::FRAC_2_SQRT_PI).abs() < 1e-14);
        let c = real(2, &[2.0, 0.3, 0.3, 0.5]);
        let c4 = CovMatrix::new(c.matrix() * Complex64::new(9.0, 0.0)).unwrap();
        let a = cross_cov_quantized(&c).unwrap();
        let b = cross_cov_quantized(&c4).unwrap();
        assert!((b - a * Complex64::new(3.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn rejects_invalid_correlation() {
        let bad = real(2, &[1.0, 1.5, 1.5, 1.0]);
        assert!(matches!(arcsine_cov_exact(&bad), Err(Error::NotCovariance { .. })));
        assert!(matches!(arcsine_cov_linearized(&bad), Err(Error::NotCovariance { .. })));
        assert!(matches!(cross_cov_quantized(&bad), Err(Error::NotCovariance { .. })));
        // rounding excess is clamped
        let edge = real(2, &[1.0, 1.0 + 5e-10, 1.0 + 5e-10, 1.0]);
        let out = arcsine_cov_exact(&edge).unwrap();
        assert!((out.matrix()[(0, 1)].re - 2.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_non_hermitian() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 0.2, 0.3, 1.0]).map(|v| Complex64::new(v, 0.0));
        assert!(CovMatrix::new(m).is_err());
    }

    #[test]
    fn monte_carlo_pair() {
        // correlated complex pair, real and imaginary correlation
        let c = CMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::new(1.0, 0.0),
                Complex64::new(0.5, 0.3),
                Complex64::new(0.5, -0.3),
                Complex64::new(2.0, 0.0),
            ],
        );
        let c = CovMatrix::new(c).unwrap();
        let l = c.matrix().clone().cholesky().unwrap().l();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 1_000_000usize;
        let mut sum_q = [[Complex64::new(0.0, 0.0); 2]; 2];
        let mut sum_q2 = [[0.0f64; 2]; 2];
        let mut sum_x = [[Complex64::new(0.0, 0.0); 2]; 2];
        let mut sum_x2 = [[0.0f64; 2]; 2];
        let h = core::f64::consts::FRAC_1_SQRT_2;
        for _ in 0..n {
            let z = nalgebra::Vector2::new(
                Complex64::new(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng)) * h,
                Complex64::new(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng)) * h,
            );
            let r = &l * z;
            let q = [sign_1bit(r[0]), sign_1bit(r[1])];
            for i in 0..2 {
                for j in 0..2 {
                    let p = q[i] * q[j].conj();
                    sum_q[i][j] += p;
                    sum_q2[i][j] += p.norm_sqr();
                    let x = q[i] * r[j].conj();
                    sum_x[i][j] += x;
                    sum_x2[i][j] += x.norm_sqr();
                }
            }
        }
        let exact = arcsine_cov_exact(&c).unwrap();
        let cross = cross_cov_quantized(&c).unwrap();
        let nf = n as f64;
        for i in 0..2 {
            for j in 0..2 {
                let m = sum_q[i][j] / nf;
                let se = ((sum_q2[i][j] / nf - m.norm_sqr()) / nf).sqrt().max(1e-12);
                assert!((m - exact.matrix()[(i, j)]).norm() < 3.0 * se, "C_rQ({i},{j})");
                let m = sum_x[i][j] / nf;
                let se = ((sum_x2[i][j] / nf - m.norm_sqr()) / nf).sqrt();
                assert!((m - cross[(i, j)]).norm() < 3.0 * se, "C_rQr({i},{j})");
            }
        }
    }

    #[test]
    fn exact_is_psd_with_unit_diagonal_gain() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in [2usize, 5, 16, 32] {
            let c = random_cov(&mut rng, n);
            let q = arcsine_cov_exact(&c).unwrap();
            assert!(q.is_psd(), "dim {n}");
            assert!(q.diagonal().iter().all(|d| (d - 2.0).abs() < 1e-14));
            let m = q.matrix();
            assert!((m - m.adjoint()).norm() < 1e-14);
        }
    }

    proptest! {
        #[test]
        fn linearization_error_bounded_and_cubic(rho in -0.99f64..0.99, t in 0.01f64..1.0) {
            let c = real(2, &[1.0, rho, rho, 1.0]);
            let err = (arcsine_cov_exact(&c).unwrap().matrix()[(0, 1)]
                - arcsine_cov_linearized(&c).unwrap().matrix()[(0, 1)]).norm();
            let m = rho.abs();
            prop_assert!(err <= 4.0 / PI * (m.asin() - m) + 1e-15);
            // shrinking the correlation by t shrinks the gap at least like t^3
            let cs = real(2, &[1.0, rho * t, rho * t, 1.0]);
            let err_s = (arcsine_cov_exact(&cs).unwrap().matrix()[(0, 1)]
                - arcsine_cov_linearized(&cs).unwrap().matrix()[(0, 1)]).norm();
            prop_assert!(err_s <= err * t.powi(3) + 1e-15);
        }

        #[test]
        fn exact_monotone_in_correlation(a in -0.99f64..0.98, d in 0.001f64..0.01) {
            let b = (a + d).min(0.99);
            let lo = arcsine_cov_exact(&real(2, &[1.0, a, a, 1.0])).unwrap().matrix()[(0, 1)].re;
            let hi = arcsine_cov_exact(&real(2, &[1.0, b, b, 1.0])).unwrap().matrix()[(0, 1)].re;
            prop_assert!(hi > lo);
        }
    }
}
