//! The 2π-periodic coupling function σ: finite Fourier representation,
//! sampling, evaluation, and its action as a multiplication operator in the
//! Fourier basis.
//!
//! Coefficients follow the convention σ̂_m = (2π)^{-1/2} ∫ σ(x) e^{-imx} dx,
//! so that σ(x) = (2π)^{-1/2} Σ σ̂_m e^{imx} and the mean value is σ̂₀/√(2π).

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::hermlin::HermitianMatrix;

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

/// Grid used for essential-bound estimation and product checks.
const ESS_GRID: usize = 4096;

#[derive(Debug, Clone, PartialEq)]
pub enum CouplingError {
    /// σ̂_{-m} differs from conj(σ̂_m) beyond tolerance.
    AsymmetricCoefficients {
        mode: i32,
        violation: f64,
    },
    NonFinite,
    /// from_samples needs a power-of-two length ≥ 8.
    BadSampleLength {
        len: usize,
    },
    /// evaluate produced an imaginary residue above 1e-10.
    ImaginaryResidue {
        at: f64,
        residue: f64,
    },
}

impl std::fmt::Display for CouplingError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CouplingError::AsymmetricCoefficients { mode, violation } => write!(
                f,
                "coefficients violate Hermitian symmetry at mode {mode} by {violation:.3e}"
            ),
            CouplingError::NonFinite => write!(f, "non-finite coupling data"),
            CouplingError::BadSampleLength { len } => {
                write!(f, "sample length {len} is not a power of two >= 8")
            }
            CouplingError::ImaginaryResidue { at, residue } => {
                write!(
                    f,
                    "imaginary residue {residue:.3e} evaluating coupling at x={at}"
                )
            }
        }
    }
}

impl std::error::Error for CouplingError {}

/// A real-valued 2π-periodic coupling as a trigonometric polynomial.
///
/// Immutable after construction; cheap to clone and safe to share across
/// sweep workers.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingFunction {
    coeffs: BTreeMap<i32, Complex64>,
    max_index: u32,
    mean: f64,
    ess_inf: f64,
    ess_sup: f64,
}

impl CouplingFunction {
    /// The constant coupling σ ≡ α.
    pub fn constant(alpha: f64) -> Self {
        let mut coeffs = BTreeMap::new();
        if alpha != 0.0 {
            coeffs.insert(0, Complex64::new(alpha * TWO_PI.sqrt(), 0.0));
        }
        CouplingFunction {
            coeffs,
            max_index: 0,
            mean: alpha,
            ess_inf: alpha,
            ess_sup: alpha,
        }
    }

    /// Build from a mode → amplitude map. The map must satisfy the Hermitian
    /// symmetry σ̂_{-m} = conj(σ̂_m) to within 1e-12 of the coefficient scale;
    /// it is then symmetrized exactly.
    pub fn from_fourier(
        coeffs: impl IntoIterator<Item = (i32, Complex64)>,
    ) -> Result<Self, CouplingError> {
        let raw: BTreeMap<i32, Complex64> = coeffs.into_iter().collect();
        if raw.values().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(CouplingError::NonFinite);
        }
        let scale = raw
            .values()
            .map(|z| z.norm())
            .fold(0.0f64, f64::max)
            .max(1.0);
        let mut sym = BTreeMap::new();
        let zero = Complex64::new(0.0, 0.0);
        for (&m, &v) in &raw {
            let partner = raw.get(&-m).copied().unwrap_or(zero);
            let violation = (v - partner.conj()).norm();
            if violation > 1e-12 * scale {
                return Err(CouplingError::AsymmetricCoefficients { mode: m, violation });
            }
            let s = 0.5 * (v + partner.conj());
            if s != zero {
                sym.insert(m, s);
            }
        }
        Ok(Self::from_symmetric(sym))
    }

    /// Build from real samples on the uniform grid x_j = -π + 2πj/L over
    /// [-π, π). The length must be a power of two ≥ 8; the retained modes are
    /// |m| ≤ L/2 - 1 and coefficients below 1e-14 of the data scale are
    /// pruned. Content at or above the Nyquist mode L/2 aliases into the
    /// retained range in the usual DFT fashion (m and m - L are
    /// indistinguishable on the grid); it is kept, not rejected.
    pub fn from_samples(samples: &[f64]) -> Result<Self, CouplingError> {
        let len = samples.len();
        if len < 8 || !len.is_power_of_two() {
            return Err(CouplingError::BadSampleLength { len });
        }
        if samples.iter().any(|x| !x.is_finite()) {
            return Err(CouplingError::NonFinite);
        }
        let scale = samples
            .iter()
            .map(|x| x.abs())
            .fold(0.0f64, f64::max)
            .max(1.0);
        let half = len / 2;
        let mut sym = BTreeMap::new();
        for m in 0..half as i32 {
            // direct DFT; lengths stay small enough that O(L·M) is fine
            let mut acc = Complex64::new(0.0, 0.0);
            for (j, &s) in samples.iter().enumerate() {
                let x = -std::f64::consts::PI + TWO_PI * (j as f64) / (len as f64);
                let phase = -(m as f64) * x;
                acc += s * Complex64::new(phase.cos(), phase.sin());
            }
            let coeff = acc * TWO_PI.sqrt() / (len as f64);
            if coeff.norm() > 1e-14 * scale {
                if m == 0 {
                    sym.insert(0, Complex64::new(coeff.re, 0.0));
                } else {
                    sym.insert(m, coeff);
                    sym.insert(-m, coeff.conj());
                }
            }
        }
        Ok(Self::from_symmetric(sym))
    }

    fn from_symmetric(coeffs: BTreeMap<i32, Complex64>) -> Self {
        let max_index = coeffs.keys().map(|m| m.unsigned_abs()).max().unwrap_or(0);
        let mean = coeffs.get(&0).map(|z| z.re / TWO_PI.sqrt()).unwrap_or(0.0);
        let mut cf = CouplingFunction {
            coeffs,
            max_index,
            mean,
            ess_inf: 0.0,
            ess_sup: 0.0,
        };
        let (lo, hi) = cf.grid_bounds();
        cf.ess_inf = lo;
        cf.ess_sup = hi;
        cf
    }

    /// Essential bounds estimated on a 4096-point grid (lower bound for the
    /// supremum, upper bound for the infimum; exact for the trigonometric
    /// polynomials handled here up to grid resolution).
    fn grid_bounds(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for j in 0..ESS_GRID {
            let x = -std::f64::consts::PI + TWO_PI * (j as f64) / (ESS_GRID as f64);
            let v = self.evaluate_raw(x);
            lo = lo.min(v);
            hi = hi.max(v);
        }
        (lo, hi)
    }

    pub fn max_index(&self) -> u32 {
        self.max_index
    }

    /// Mean value σ̃ = (2π)^{-1} ∫ σ.
    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn ess_inf(&self) -> f64 {
        self.ess_inf
    }

    pub fn ess_sup(&self) -> f64 {
        self.ess_sup
    }

    /// Fourier coefficient σ̂_m (zero when absent).
    pub fn coeff(&self, m: i32) -> Complex64 {
        self.coeffs
            .get(&m)
            .copied()
            .unwrap_or(Complex64::new(0.0, 0.0))
    }

    pub fn coeffs(&self) -> impl Iterator<Item = (i32, Complex64)> + '_ {
        self.coeffs.iter().map(|(&m, &v)| (m, v))
    }

    fn evaluate_raw(&self, x: f64) -> f64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (&m, &c) in &self.coeffs {
            let phase = (m as f64) * x;
            acc += c * Complex64::new(phase.cos(), phase.sin());
        }
        acc.re / TWO_PI.sqrt()
    }

    /// Evaluate σ(x). The imaginary residue of the Fourier sum must stay
    /// below 1e-10; it is asserted and discarded.
    pub fn evaluate(&self, x: f64) -> Result<f64, CouplingError> {
        if !x.is_finite() {
            return Err(CouplingError::NonFinite);
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for (&m, &c) in &self.coeffs {
            let phase = (m as f64) * x;
            acc += c * Complex64::new(phase.cos(), phase.sin());
        }
        let scale = 1.0f64.max(acc.norm());
        if acc.im.abs() > 1e-10 * scale {
            return Err(CouplingError::ImaginaryResidue {
                at: x,
                residue: acc.im,
            });
        }
        Ok(acc.re / TWO_PI.sqrt())
    }

    /// The multiplication operator σ· on Fourier modes n, m ∈ [-N, N]:
    /// entry (n, m) = σ̂_{n-m} / √(2π). Dense Hermitian output.
    pub fn multiplication_matrix(&self, n_modes: usize) -> HermitianMatrix {
        if (n_modes as u32) < self.max_index {
            log::warn!(
                "multiplication_matrix: truncation N={} below coupling degree M={}",
                n_modes,
                self.max_index
            );
        }
        let dim = 2 * n_modes + 1;
        let inv = 1.0 / TWO_PI.sqrt();
        let mut data = vec![Complex64::new(0.0, 0.0); dim * dim];
        for i in 0..dim {
            for j in i..dim {
                // modes n = i - N, m = j - N, difference n - m = i - j
                let d = i as i64 - j as i64;
                let c = self.coeff(d as i32) * inv;
                data[i * dim + j] = c;
                data[j * dim + i] = c.conj();
            }
        }
        for i in 0..dim {
            data[i * dim + i] = Complex64::new(data[i * dim + i].re, 0.0);
        }
        HermitianMatrix::from_rows_unchecked(dim, data)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cosine(beta: f64) -> CouplingFunction {
        let amp = Complex64::new(beta * (std::f64::consts::PI / 2.0).sqrt(), 0.0);
        CouplingFunction::from_fourier([(1, amp), (-1, amp)]).unwrap()
    }

    #[test]
    fn constant_roundtrip() {
        let c = CouplingFunction::from_fourier([(0, Complex64::new(TWO_PI.sqrt() * 0.1, 0.0))])
            .unwrap();
        assert!((c.mean() - 0.1).abs() < 1e-15);
        assert!((c.evaluate(2.3).unwrap() - 0.1).abs() < 1e-14);
        assert_eq!(c.max_index(), 0);
    }

    #[test]
    fn cosine_pair() {
        let c = cosine(0.5);
        assert!((c.mean() - 0.0).abs() < 1e-15);
        assert!((c.evaluate(0.0).unwrap() - 0.5).abs() < 1e-14);
        assert!((c.evaluate(1.1).unwrap() - 0.5 * (1.1f64).cos()).abs() < 1e-14);
        assert!((c.ess_sup() - 0.5).abs() < 1e-6);
        assert!((c.ess_inf() + 0.5).abs() < 1e-6);
    }

    #[test]
    fn asymmetric_input_rejected() {
        let r = CouplingFunction::from_fourier([
            (1, Complex64::new(1.0, 0.0)),
            (-1, Complex64::new(2.0, 0.0)),
        ]);
        assert!(matches!(
            r,
            Err(CouplingError::AsymmetricCoefficients { .. })
        ));
    }

    #[test]
    fn samples_all_ones() {
        let c = CouplingFunction::from_samples(&[1.0; 64]).unwrap();
        assert!((c.coeff(0).re - TWO_PI.sqrt()).abs() < 1e-12);
        assert_eq!(c.max_index(), 0);
        assert!((c.evaluate(0.77).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn samples_cosine() {
        let n = 64;
        let samples: Vec<f64> = (0..n)
            .map(|j| (-std::f64::consts::PI + TWO_PI * (j as f64) / (n as f64)).cos())
            .collect();
        let c = CouplingFunction::from_samples(&samples).unwrap();
        let want = (std::f64::consts::PI / 2.0).sqrt();
        assert!((c.coeff(1) - Complex64::new(want, 0.0)).norm() < 1e-12);
        assert!((c.coeff(-1) - Complex64::new(want, 0.0)).norm() < 1e-12);
        assert_eq!(c.max_index(), 1);
    }

    #[test]
    fn samples_roundtrip_on_grid() {
        let n = 32;
        let xs: Vec<f64> = (0..n)
            .map(|j| -std::f64::consts::PI + TWO_PI * (j as f64) / (n as f64))
            .collect();
        let samples: Vec<f64> = xs
            .iter()
            .map(|&x| 0.3 + 0.2 * x.cos() - 0.1 * (3.0 * x).sin())
            .collect();
        let c = CouplingFunction::from_samples(&samples).unwrap();
        for (x, s) in xs.iter().zip(samples.iter()) {
            assert!((c.evaluate(*x).unwrap() - s).abs() < 1e-12);
        }
    }

    #[test]
    fn sub_nyquist_exact_and_alias_documented() {
        let n = 16usize;
        let xs: Vec<f64> = (0..n)
            .map(|j| -std::f64::consts::PI + TWO_PI * (j as f64) / (n as f64))
            .collect();
        // sub-Nyquist mode: exact coefficients
        let samples: Vec<f64> = xs.iter().map(|&x| (5.0 * x).cos()).collect();
        let c = CouplingFunction::from_samples(&samples).unwrap();
        let want = (std::f64::consts::PI / 2.0).sqrt();
        assert!((c.coeff(5).re - want).abs() < 1e-12);
        // cos((L-1)x) on the grid is indistinguishable from cos(x): the
        // documented alias lands on m = ±1
        let samples: Vec<f64> = xs.iter().map(|&x| (15.0 * x).cos()).collect();
        let c = CouplingFunction::from_samples(&samples).unwrap();
        assert!((c.coeff(1).re - want).abs() < 1e-12);
        assert_eq!(c.coeff(5).norm(), 0.0);
    }

    #[test]
    fn non_finite_coefficients_rejected() {
        let r = CouplingFunction::from_fourier([(0, Complex64::new(f64::INFINITY, 0.0))]);
        assert!(matches!(r, Err(CouplingError::NonFinite)));
    }

    #[test]
    fn bad_lengths_rejected() {
        assert!(CouplingFunction::from_samples(&[0.0; 24]).is_err());
        assert!(CouplingFunction::from_samples(&[0.0; 4]).is_err());
        assert!(CouplingFunction::from_samples(&[f64::NAN; 8]).is_err());
    }

    #[test]
    fn constant_multiplication_is_scaled_identity() {
        let c = CouplingFunction::constant(0.7);
        let m = c.multiplication_matrix(3);
        for i in 0..7 {
            for j in 0..7 {
                let want = if i == j { 0.7 } else { 0.0 };
                assert!((m.entry(i, j) - Complex64::new(want, 0.0)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn cosine_multiplication_band() {
        let c = cosine(0.4);
        let m = c.multiplication_matrix(2);
        for i in 0..5usize {
            for j in 0..5usize {
                let want = if i.abs_diff(j) == 1 { 0.2 } else { 0.0 };
                assert!(
                    (m.entry(i, j) - Complex64::new(want, 0.0)).norm() < 1e-15,
                    "entry ({i},{j})"
                );
            }
        }
    }

    #[test]
    fn multiplication_matches_pointwise_product() {
        // random real trig polynomial σ of degree 2 times a test polynomial f
        let sigma = CouplingFunction::from_fourier([
            (0, Complex64::new(0.3, 0.0)),
            (1, Complex64::new(0.2, 0.1)),
            (-1, Complex64::new(0.2, -0.1)),
            (2, Complex64::new(-0.05, 0.02)),
            (-2, Complex64::new(-0.05, -0.02)),
        ])
        .unwrap();
        let n = 6usize;
        let dim = 2 * n + 1;
        let mat = sigma.multiplication_matrix(n);
        // f with coefficients on |m| <= N - M
        let mut fhat = vec![Complex64::new(0.0, 0.0); dim];
        fhat[n] = Complex64::new(0.5, 0.0);
        fhat[n + 1] = Complex64::new(0.3, -0.2);
        fhat[n - 1] = Complex64::new(0.3, 0.2);
        fhat[n + 4] = Complex64::new(-0.1, 0.05);
        fhat[n - 4] = Complex64::new(-0.1, -0.05);
        // matrix action
        let mut out = vec![Complex64::new(0.0, 0.0); dim];
        for i in 0..dim {
            for j in 0..dim {
                out[i] += mat.entry(i, j) * fhat[j];
            }
        }
        // grid oracle: products evaluated pointwise, projected back
        let grid = 256usize;
        for (i, want_i) in out.iter().enumerate() {
            let m_out = i as i64 - n as i64;
            let mut acc = Complex64::new(0.0, 0.0);
            for g in 0..grid {
                let x = -std::f64::consts::PI + TWO_PI * (g as f64) / (grid as f64);
                let sig = sigma.evaluate(x).unwrap();
                let mut f = Complex64::new(0.0, 0.0);
                for (j, fj) in fhat.iter().enumerate() {
                    let mode = j as i64 - n as i64;
                    let ph = (mode as f64) * x;
                    f += fj * Complex64::new(ph.cos(), ph.sin());
                }
                f /= TWO_PI.sqrt();
                let ph = -(m_out as f64) * x;
                acc += sig * f * Complex64::new(ph.cos(), ph.sin());
            }
            let proj = acc * TWO_PI.sqrt() / (grid as f64);
            assert!(
                (proj - want_i).norm() < 1e-10,
                "mode {m_out}: {proj} vs {want_i}"
            );
        }
    }

    #[test]
    fn mean_matches_grid_average() {
        let sigma = CouplingFunction::from_fourier([
            (0, Complex64::new(0.9, 0.0)),
            (3, Complex64::new(0.1, -0.3)),
            (-3, Complex64::new(0.1, 0.3)),
        ])
        .unwrap();
        let grid = 4096usize;
        let mut avg = 0.0;
        for g in 0..grid {
            let x = -std::f64::consts::PI + TWO_PI * (g as f64) / (grid as f64);
            avg += sigma.evaluate(x).unwrap();
        }
        avg /= grid as f64;
        assert!((avg - sigma.mean()).abs() < 1e-10);
        assert!(sigma.ess_inf() <= sigma.mean() && sigma.mean() <= sigma.ess_sup());
    }

    proptest! {
        #[test]
        fn sample_then_rebuild_recovers_coefficients(
            a0 in -1.0f64..1.0,
            a1 in -1.0f64..1.0,
            b2 in -1.0f64..1.0,
        ) {
            // σ(x) = a0 + a1 cos x + b2 sin 2x sampled on 64 points
            let n = 64usize;
            let samples: Vec<f64> = (0..n)
                .map(|j| {
                    let x = -std::f64::consts::PI + TWO_PI * (j as f64) / (n as f64);
                    a0 + a1 * x.cos() + b2 * (2.0 * x).sin()
                })
                .collect();
            let c = CouplingFunction::from_samples(&samples).unwrap();
            let half = (std::f64::consts::PI / 2.0).sqrt();
            prop_assert!((c.coeff(0).re - a0 * TWO_PI.sqrt()).abs() < 1e-12);
            prop_assert!((c.coeff(1) - Complex64::new(a1 * half, 0.0)).norm() < 1e-12);
            prop_assert!((c.coeff(2) - Complex64::new(0.0, -b2 * half)).norm() < 1e-12);
            // and evaluation reproduces the samples
            for (j, s) in samples.iter().enumerate() {
                let x = -std::f64::consts::PI + TWO_PI * (j as f64) / (n as f64);
                prop_assert!((c.evaluate(x).unwrap() - s).abs() < 1e-11);
            }
        }
    }

    #[test]
    fn random_real_sigma_matrix_is_hermitian() {
        // Hermiticity is enforced structurally; verify entries vs definition
        let sigma = CouplingFunction::from_fourier([
            (1, Complex64::new(0.12, 0.07)),
            (-1, Complex64::new(0.12, -0.07)),
        ])
        .unwrap();
        let m = sigma.multiplication_matrix(4);
        for i in 0..9 {
            for j in 0..9 {
                assert!((m.entry(i, j) - m.entry(j, i).conj()).norm() < 1e-14);
            }
        }
    }
}
