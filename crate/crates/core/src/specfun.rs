//! Branch-correct elementary and special functions shared by all modules.
//!
//! Everything here is for positive real arguments (the Macdonald function K₀)
//! or for complex arguments off the closed negative real axis (principal
//! square root and logarithm). No complex-argument K₀ is provided: the symbol
//! formulas that need complex spectral parameters are routed through `log` and
//! `sqrt` only.

use num_complex::Complex64;

use crate::quad;

/// Euler-Mascheroni constant, -ψ(1).
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// ln 2.
pub const LN_2: f64 = std::f64::consts::LN_2;

/// ς = (ln 2 - γ) / (2π), the additive constant of the boundary symbol.
/// Strictly positive.
pub const VARSIGMA: f64 = (LN_2 - EULER_GAMMA) / (2.0 * std::f64::consts::PI);

/// The mathematical constants used throughout, bundled for inspection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Constants {
    pub euler_gamma: f64,
    pub ln2: f64,
    pub varsigma: f64,
}

impl Constants {
    pub const fn standard() -> Self {
        Constants {
            euler_gamma: EULER_GAMMA,
            ln2: LN_2,
            varsigma: VARSIGMA,
        }
    }
}

impl Default for Constants {
    fn default() -> Self {
        Self::standard()
    }
}

/// Errors raised by the special-function layer.
#[derive(Debug, Clone, PartialEq)]
pub enum SpecFunError {
    /// Argument outside the function domain.
    Domain { what: &'static str, value: String },
}

impl std::fmt::Display for SpecFunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SpecFunError::Domain { what, value } => {
                write!(f, "domain error in {what}: argument {value}")
            }
        }
    }
}

impl std::error::Error for SpecFunError {}

// Chebyshev expansion of K0(x) e^x sqrt(x) on x in [2, inf), in the variable
// v = 4/x - 1 in (-1, 1]. Generated by interpolation at 48 Chebyshev nodes
// against 40-digit reference values; truncated where coefficients fall below
// 1e-19. Convention: f(v) = c[0]/2 + sum_{k>=1} c[k] T_k(v).
const K0_CHEB: [f64; 28] = [
    2.440_303_082_065_955_5,
    -0.031_448_101_311_964_5,
    1.569_883_885_730_053_3e-3,
    -1.284_954_958_162_780_2e-4,
    1.394_981_371_887_65e-5,
    -1.831_755_522_719_119_5e-6,
    2.766_813_639_445_015e-7,
    -4.660_489_897_687_948e-8,
    8.574_034_017_414_225e-9,
    -1.697_534_509_389_061_4e-9,
    3.577_397_281_400_328_3e-10,
    -7.957_489_244_477_396e-11,
    1.855_949_114_954_926_4e-11,
    -4.514_597_883_374_519e-12,
    1.140_340_588_207_344_1e-12,
    -2.980_096_923_148_178_4e-13,
    8.032_890_775_068_375e-14,
    -2.227_513_326_746_296_5e-14,
    6.340_076_476_276_646e-15,
    -1.848_593_377_920_907e-15,
    5.512_055_999_404_333_5e-16,
    -1.678_231_125_754_900_6e-16,
    5.210_391_777_643_554_3e-17,
    -1.647_580_593_984_263_2e-17,
    5.300_433_771_177_335_4e-18,
    -1.733_171_200_582_100_1e-18,
    5.755_109_202_882_729e-19,
    -1.939_095_605_318_355_3e-19,
];

fn cheb_eval(coeffs: &[f64], v: f64) -> f64 {
    let mut b0 = 0.0;
    let mut b1 = 0.0;
    for &c in coeffs.iter().skip(1).rev() {
        let b2 = b1;
        b1 = b0;
        b0 = 2.0 * v * b1 - b2 + c;
    }
    v * b0 - b1 + coeffs[0] / 2.0
}

/// K₀(x) for x > 0: ascending series coupled to I₀ below the crossover,
/// Chebyshev fit of K₀(x)·eˣ·√x above it. Relative error below 1e-13 on
/// [1e-6, 700]; underflows to zero once eˣ is no longer representable.
pub fn bessel_k0(x: f64) -> Result<f64, SpecFunError> {
    if !x.is_finite() || x <= 0.0 {
        return Err(SpecFunError::Domain {
            what: "bessel_k0",
            value: format!("{x}"),
        });
    }
    Ok(k0_positive(x))
}

/// K₀ without the domain check; callers guarantee x > 0.
pub(crate) fn k0_positive(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    if x <= 2.0 {
        // K0 = -(ln(x/2) + γ) I0(x) + Σ_{m≥1} H_m (x²/4)^m / (m!)²
        let t = 0.25 * x * x;
        let mut i0 = 1.0;
        let mut term = 1.0;
        let mut companion = 0.0;
        let mut harmonic = 0.0;
        for m in 1..40 {
            let mf = m as f64;
            term *= t / (mf * mf);
            harmonic += 1.0 / mf;
            i0 += term;
            companion += term * harmonic;
            if term < 1e-19 * i0 {
                break;
            }
        }
        -((0.5 * x).ln() + EULER_GAMMA) * i0 + companion
    } else if x > 746.0 {
        0.0
    } else {
        let v = 4.0 / x - 1.0;
        cheb_eval(&K0_CHEB, v) * (-x).exp() / x.sqrt()
    }
}

/// Principal square root on C \ (-∞, 0]; the result has strictly positive
/// real part.
pub fn principal_sqrt(z: Complex64) -> Result<Complex64, SpecFunError> {
    check_off_cut("principal_sqrt", z)?;
    Ok(z.sqrt())
}

/// Principal logarithm on C \ (-∞, 0]; the imaginary part lies in (-π, π).
pub fn principal_log(z: Complex64) -> Result<Complex64, SpecFunError> {
    check_off_cut("principal_log", z)?;
    Ok(z.ln())
}

fn check_off_cut(what: &'static str, z: Complex64) -> Result<(), SpecFunError> {
    if !z.re.is_finite() || !z.im.is_finite() || (z.im == 0.0 && z.re <= 0.0) {
        return Err(SpecFunError::Domain {
            what,
            value: format!("{z}"),
        });
    }
    Ok(())
}

/// ∫₀^∞ K₀(r)² r dr by adaptive quadrature (= 1/2 exactly).
pub fn k0_square_moment() -> f64 {
    k0_square_moment_scaled(1.0).expect("unit scale is valid")
}

/// ∫₀^∞ K₀(a r)² r dr for a > 0; equals 1/(2a²).
pub fn k0_square_moment_scaled(a: f64) -> Result<f64, SpecFunError> {
    if !a.is_finite() || a <= 0.0 {
        return Err(SpecFunError::Domain {
            what: "k0_square_moment_scaled",
            value: format!("{a}"),
        });
    }
    let f = |r: f64| {
        if r == 0.0 {
            0.0
        } else {
            let k = k0_positive(a * r);
            k * k * r
        }
    };
    // Split at the knee of K0 and truncate where K0(ar)^2 r < 1e-40.
    let upper = 60.0 / a;
    let mid = (1.0 / a).min(upper);
    let tol = 1e-12;
    Ok(quad::adaptive(&f, 0.0, mid, tol) + quad::adaptive(&f, mid, upper, tol))
}
