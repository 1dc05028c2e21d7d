//! Model 2: an infinite periodic family of parallel leaky wires (a grating).
//!
//! The wires occupy {(x₁, 2πn, 0)} in R³ with the same 2π-periodic coupling
//! σ(x₁) on each. After Bloch reduction in both lattice directions, the
//! boundary operator keeps the model-1 shape with the logarithmic symbol
//! replaced by the strip point-interaction symbol t(z,k₂), evaluated at
//! z = k₂² - |(n+k₁)² + k₂² - λ|. Two representations of t are implemented:
//!
//! * an image sum over the wire lattice (exponentially convergent for z < 0),
//! * a renormalized mode sum valid on all of z < k₂², anchored at t(-1,0).
//!
//! Their agreement on the overlap is the module's central correctness check.
//! The renormalized sum accumulates the modes in symmetric pairs (n, -n) so
//! the O(1/n²) parts cancel, and closes with an Euler-Maclaurin tail for the
//! remaining O(1/n³) terms.

use num_complex::Complex64;

use crate::coupling::CouplingFunction;
use crate::fiber_line::{canonical_quasimomentum, FiberError};
use crate::hermlin::{brent_root, BandedHermitian, Bracket, HermitianMatrix};
use crate::search::RootSearch;
use crate::specfun::{self, VARSIGMA};

const PI: f64 = std::f64::consts::PI;
const TWO_PI: f64 = 2.0 * PI;
const FOUR_PI: f64 = 4.0 * PI;
const SQRT_TWO_PI_INV: f64 = 0.398_942_280_401_432_7;

/// Representation switch: the image sum is used for z below this, the
/// renormalized mode sum from here up to the threshold k₂².
const REPRESENTATION_SWITCH: f64 = -0.05;

/// Cached anchor value and truncation policy for evaluating t(z,k₂).
///
/// Immutable after construction; the anchor t(-1,0) is computed once from the
/// image representation, where every other ingredient of the renormalized sum
/// vanishes termwise.
#[derive(Debug, Clone)]
pub struct GratingSymbolContext {
    anchor: f64,
    image_cutoff: u32,
    mode_cutoff: u32,
    term_tol: f64,
}

impl GratingSymbolContext {
    pub fn new(image_cutoff: u32, mode_cutoff: u32, term_tol: f64) -> Result<Self, FiberError> {
        if image_cutoff < 64 {
            return Err(FiberError::InvalidQuery {
                reason: "image_cutoff must be at least 64".into(),
            });
        }
        if mode_cutoff < 10_000 {
            return Err(FiberError::InvalidQuery {
                reason: "mode_cutoff must be at least 10000".into(),
            });
        }
        if !(term_tol > 1e-30) || !(term_tol < 1e-6) {
            return Err(FiberError::InvalidQuery {
                reason: "term_tol must lie in (1e-30, 1e-6)".into(),
            });
        }
        let anchor = image_sum(-1.0, 0.0, image_cutoff, term_tol)?;
        Ok(GratingSymbolContext {
            anchor,
            image_cutoff,
            mode_cutoff,
            term_tol,
        })
    }

    pub fn standard() -> Self {
        Self::new(256, 10_000, 1e-14).expect("standard parameters are valid")
    }

    /// t(-1, 0), the anchor of the renormalized representation.
    pub fn anchor(&self) -> f64 {
        self.anchor
    }

    pub fn image_cutoff(&self) -> u32 {
        self.image_cutoff
    }

    pub fn mode_cutoff(&self) -> u32 {
        self.mode_cutoff
    }

    pub fn term_tol(&self) -> f64 {
        self.term_tol
    }
}

impl Default for GratingSymbolContext {
    fn default() -> Self {
        Self::standard()
    }
}

fn image_sum(z: f64, k2: f64, cutoff: u32, term_tol: f64) -> Result<f64, FiberError> {
    let root = (-z).sqrt();
    let mut s = (-z).ln() / FOUR_PI - VARSIGMA;
    let mut converged = false;
    for j in 1..=cutoff {
        let x = TWO_PI * (j as f64) * root;
        let k0 = specfun::k0_positive(x);
        let term = (TWO_PI * (j as f64) * k2).cos() * k0 / PI;
        s -= term;
        if k0 / PI < term_tol {
            converged = true;
            break;
        }
    }
    if !converged {
        // geometric tail bound from K₀'s exponential decay
        let q = (-TWO_PI * root).exp();
        let bound = specfun::k0_positive(TWO_PI * (cutoff as f64) * root) / PI * q / (1.0 - q);
        if bound > 1e-11 {
            return Err(FiberError::TailTooLarge { bound });
        }
    }
    Ok(s)
}

/// t(z,k₂) through the image representation
/// (4π)^{-1} log(-z) - ς - π^{-1} Σ_j cos(2πjk₂) K₀(2πj√(-z)); z < 0.
pub fn t_image(z: f64, k2: f64, ctx: &GratingSymbolContext) -> Result<f64, FiberError> {
    if !(z < 0.0) || !z.is_finite() {
        return Err(FiberError::InvalidQuery {
            reason: format!("t_image requires z < 0, got {z}"),
        });
    }
    image_sum(z, k2, ctx.image_cutoff, ctx.term_tol)
}

/// t(z,k₂) through the renormalized mode sum, valid on z < k₂²:
/// anchor - (4π)^{-1} Σ_n [((n+k₂)² - z)^{-1/2} - (n² + 1)^{-1/2}],
/// accumulated over symmetric pairs with an Euler-Maclaurin tail.
pub fn t_renormalized(z: f64, k2: f64, ctx: &GratingSymbolContext) -> Result<f64, FiberError> {
    if !(z < k2 * k2) || !z.is_finite() {
        return Err(FiberError::InvalidQuery {
            reason: format!("t_renormalized requires z < k2², got z={z}, k2={k2}"),
        });
    }
    let n_top = ctx.mode_cutoff as f64;
    let mut sum = 1.0 / (k2 * k2 - z).sqrt() - 1.0;
    for n in 1..=ctx.mode_cutoff {
        let nf = n as f64;
        let plus = ((nf + k2) * (nf + k2) - z).sqrt().recip();
        let minus = ((nf - k2) * (nf - k2) - z).sqrt().recip();
        let reference = 2.0 / (nf * nf + 1.0).sqrt();
        sum += plus + minus - reference;
    }
    // paired terms decay like (2k₂² + z + 1)/n³; close with the tail
    // Σ_{n>N} n^{-3} = 1/(2N²) - 1/(2N³) + 1/(4N⁴) + O(N^{-6})
    let c3 = 2.0 * k2 * k2 + z + 1.0;
    sum += c3
        * (0.5 / (n_top * n_top) - 0.5 / (n_top * n_top * n_top)
            + 0.25 / (n_top * n_top * n_top * n_top));
    Ok(ctx.anchor - sum / FOUR_PI)
}

/// t(z,k₂) with automatic representation choice: image sum for z < -0.05,
/// renormalized sum on [-0.05, k₂²).
pub fn t_eval(z: f64, k2: f64, ctx: &GratingSymbolContext) -> Result<f64, FiberError> {
    if z < REPRESENTATION_SWITCH {
        t_image(z, k2, ctx)
    } else {
        t_renormalized(z, k2, ctx)
    }
}

/// The unique λ(α,k₂) ∈ (-∞, k₂²) with t(λ,k₂) + α = 0, located by Brent on
/// an auto-expanded bracket; |t + α| ≤ 1e-10 at the root.
pub fn lambda_const(alpha: f64, k2: f64, ctx: &GratingSymbolContext) -> Result<f64, FiberError> {
    let k2 = canonical_quasimomentum(k2);
    let threshold = k2 * k2;
    let f = |z: f64| t_eval(z, k2, ctx).map(|t| t + alpha);
    // t decreases from +∞ to -∞; expand until the bracket straddles zero
    let mut lo = (crate::fiber_line::xi(alpha) - 0.5).min(-1.0);
    let mut tries = 0;
    while f(lo)? <= 0.0 {
        lo = lo * 2.0 - 1.0;
        tries += 1;
        if tries > 60 {
            return Err(FiberError::BracketExpansion {
                what: "lambda_const lower edge",
            });
        }
    }
    let mut hi_off = 0.25 * (threshold - lo).min(1.0);
    let mut hi = threshold - hi_off;
    tries = 0;
    while f(hi)? >= 0.0 {
        hi_off *= 0.25;
        hi = threshold - hi_off;
        tries += 1;
        if tries > 200 {
            return Err(FiberError::BracketExpansion {
                what: "lambda_const upper edge",
            });
        }
    }
    let bracket = Bracket::new(lo, hi)?;
    let root = brent_root(|z| f(z).unwrap_or(f64::NAN), bracket, 1e-13)?;
    let residual = f(root)?;
    if residual.abs() > 1e-10 {
        return Err(FiberError::BracketExpansion {
            what: "lambda_const polish",
        });
    }
    Ok(root)
}

/// Diagonal symbol of the grating boundary operator:
/// α_n(λ,k) = t(k₂² - |(n+k₁)² + k₂² - λ|, k₂).
pub fn alpha_grating(
    n: i64,
    lambda: f64,
    k: [f64; 2],
    ctx: &GratingSymbolContext,
) -> Result<f64, FiberError> {
    let delta = (n as f64 + k[0]) * (n as f64 + k[0]) + k[1] * k[1] - lambda;
    if delta.abs() < 1e-300 {
        return Err(FiberError::ThresholdCollision { n, lambda });
    }
    t_eval(k[1] * k[1] - delta.abs(), k[1], ctx)
}

/// |α_n(λ,k) - ((4π)^{-1} log((n+k₁)² - λ) + ς·(-1))| for λ < k₁², evaluated
/// in the analytically cancelled form π^{-1} |Σ_j cos(2πjk₂) K₀(2πj s_n)|
/// with s_n = √((n+k₁)² - λ). A direct floating-point subtraction of the two
/// symbols bottoms out near 1e-17; this form resolves the full exponential
/// decay in |n|.
pub fn symbol_deviation(
    n: i64,
    lambda: f64,
    k: [f64; 2],
    ctx: &GratingSymbolContext,
) -> Result<f64, FiberError> {
    let gap = (n as f64 + k[0]) * (n as f64 + k[0]) - lambda;
    if !(gap > 0.0) {
        return Err(FiberError::InvalidQuery {
            reason: "symbol_deviation requires a closed mode (lambda < (n+k1)²)".into(),
        });
    }
    let s_n = gap.sqrt();
    let mut acc = 0.0;
    for j in 1..=ctx.image_cutoff {
        let x = TWO_PI * (j as f64) * s_n;
        let k0 = specfun::k0_positive(x);
        acc += (TWO_PI * (j as f64) * k[1]).cos() * k0 / PI;
        if k0 == 0.0 || k0 / PI < ctx.term_tol * acc.abs().max(1e-300) {
            break;
        }
    }
    Ok(acc.abs())
}

/// Distance from λ to the grating threshold set τ(k) = {|n+k|²: n ∈ Z²}.
/// The scan covers |n₁| ≤ √λ + 2 (capped at 10⁶ to bound the work; beyond
/// the cap the reported distance may only be an overestimate for absurdly
/// large λ).
pub fn tau_distance(lambda: f64, k: [f64; 2]) -> f64 {
    let mut best = f64::INFINITY;
    let reach = (lambda.max(0.0).sqrt() as i64 + 2).min(1_000_000);
    for n1 in -reach..=reach {
        let part = (n1 as f64 + k[0]) * (n1 as f64 + k[0]);
        let rem = lambda - part;
        let mut cands = vec![0i64, -1, 1];
        if rem > 0.0 {
            let s = rem.sqrt();
            for base in [-s - k[1], s - k[1]] {
                cands.push(base.floor() as i64);
                cands.push(base.ceil() as i64);
            }
        }
        for n2 in cands {
            let t = part + (n2 as f64 + k[1]) * (n2 as f64 + k[1]);
            best = best.min((t - lambda).abs());
        }
    }
    best
}

/// Parameters of one fiber solve for the grating model.
#[derive(Debug, Clone)]
pub struct GratingFiberQuery {
    k: [f64; 2],
    sigma: CouplingFunction,
    n_modes: usize,
    lambda_tol: f64,
    threshold_margin: f64,
}

impl GratingFiberQuery {
    pub fn new(
        k: [f64; 2],
        sigma: CouplingFunction,
        n_modes: usize,
        lambda_tol: f64,
        threshold_margin: f64,
    ) -> Result<Self, FiberError> {
        if !(lambda_tol > 0.0) || !(threshold_margin > 0.0) {
            return Err(FiberError::InvalidQuery {
                reason: "tolerances must be positive".into(),
            });
        }
        if !k[0].is_finite() || !k[1].is_finite() {
            return Err(FiberError::InvalidQuery {
                reason: "non-finite quasimomentum".into(),
            });
        }
        if (n_modes as u32) < sigma.max_index() {
            return Err(FiberError::InvalidQuery {
                reason: format!(
                    "truncation N={} below coupling degree M={}",
                    n_modes,
                    sigma.max_index()
                ),
            });
        }
        Ok(GratingFiberQuery {
            k: [canonical_quasimomentum(k[0]), canonical_quasimomentum(k[1])],
            sigma,
            n_modes,
            lambda_tol,
            threshold_margin,
        })
    }

    pub fn k(&self) -> [f64; 2] {
        self.k
    }

    pub fn sigma(&self) -> &CouplingFunction {
        &self.sigma
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn lambda_tol(&self) -> f64 {
        self.lambda_tol
    }

    pub fn threshold_margin(&self) -> f64 {
        self.threshold_margin
    }

    /// Continuum threshold min τ(k) = k₁² + k₂².
    pub fn threshold(&self) -> f64 {
        self.k[0] * self.k[0] + self.k[1] * self.k[1]
    }
}

/// A guided mode of the grating fiber operator.
#[derive(Debug, Clone)]
pub struct GuidedMode {
    pub lambda: f64,
    pub k: [f64; 2],
    pub coeffs: Vec<(i64, Complex64)>,
    pub residual: f64,
    pub multiplicity: usize,
    pub near_threshold: bool,
}

fn banded_a_grating(
    q: &GratingFiberQuery,
    lambda: f64,
    ctx: &GratingSymbolContext,
) -> BandedHermitian {
    let nn = q.n_modes as i64;
    let sigma_mean_entry = q.sigma.coeff(0).re * SQRT_TWO_PI_INV;
    let diag: Vec<f64> = (-nn..=nn)
        .map(|n| {
            // below-threshold search keeps the argument valid; see module doc
            alpha_grating(n, lambda, q.k, ctx).expect("symbol valid in the search region")
                + sigma_mean_entry
        })
        .collect();
    let dim = diag.len();
    let bw = (q.sigma.max_index() as usize).min(dim.saturating_sub(1));
    let bands: Vec<Vec<Complex64>> = (1..=bw)
        .map(|d| {
            (0..dim - d)
                .map(|_| q.sigma.coeff(-(d as i32)) * SQRT_TWO_PI_INV)
                .collect()
        })
        .collect();
    BandedHermitian::new(diag, bands).expect("assembly is structurally valid")
}

/// Dense truncated matrix of the grating A(λ,k); λ must keep the threshold
/// margin to the full two-dimensional threshold set.
pub fn assemble_a_grating(
    q: &GratingFiberQuery,
    lambda: f64,
    ctx: &GratingSymbolContext,
) -> Result<HermitianMatrix, FiberError> {
    let d = tau_distance(lambda, q.k);
    if d < q.threshold_margin {
        return Err(FiberError::ThresholdProximity {
            lambda,
            distance: d,
        });
    }
    Ok(banded_a_grating(q, lambda, ctx).to_dense())
}

/// Eigenvalues of the truncated grating fiber operator below k₁² + k₂²,
/// with the same counting/rooting kernel as the line model.
pub fn discrete_spectrum_grating(
    q: &GratingFiberQuery,
    ctx: &GratingSymbolContext,
) -> Result<Vec<GuidedMode>, FiberError> {
    let search = RootSearch {
        assemble: |l: f64| banded_a_grating(q, l, ctx),
        lambda_tol: q.lambda_tol,
    };
    let hi = q.threshold() - q.threshold_margin;
    let mut lo = lambda_const(q.sigma.ess_inf(), q.k[1], ctx)? + q.k[0] * q.k[0] - 0.5;
    let mut step = 1.0;
    let mut attempts = 0;
    while search.count(lo) > 0 {
        lo -= step;
        step *= 2.0;
        attempts += 1;
        if attempts > 60 {
            return Err(FiberError::Search(
                "could not find a lambda below the whole spectrum".into(),
            ));
        }
    }
    let roots = search.roots_in(lo, hi)?;
    let clusters = search.cluster(&roots);
    let modes: Vec<i64> = (-(q.n_modes as i64)..=q.n_modes as i64).collect();
    let mut out: Vec<GuidedMode> = clusters
        .into_iter()
        .map(|c| GuidedMode {
            lambda: c.lambda,
            k: q.k,
            coeffs: modes.iter().copied().zip(c.kernel_vector).collect(),
            residual: c.residual,
            multiplicity: c.multiplicity,
            near_threshold: false,
        })
        .collect();
    let probe = q.threshold() - 1e-3 * q.threshold_margin;
    let extra = search.count(probe).saturating_sub(search.count(hi));
    if extra > 0 {
        let lambda = q.threshold() - 0.5 * q.threshold_margin;
        let matrix = banded_a_grating(q, lambda, ctx);
        let vector = matrix.null_vector(0.0);
        out.push(GuidedMode {
            lambda,
            k: q.k,
            coeffs: modes.iter().copied().zip(vector).collect(),
            residual: f64::INFINITY,
            multiplicity: extra,
            near_threshold: true,
        });
    }
    if out.is_empty() {
        return Err(FiberError::EmptySpectrum);
    }
    Ok(out)
}

/// Which representation of the strip field ψ to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PsiMethod {
    /// transverse-mode sum; exponentially convergent for y ≠ 0
    Mode,
    /// lattice image sum (requires z < 0); the only route on the axis y = 0
    Image,
}

/// The strip point-interaction field
/// ψ(x₂,y) = ½ Σ_n e^{inx₂} s_n^{-1} e^{-s_n |y|}, s_n = √((n+k₂)² - z),
/// or equivalently Σ_m e^{-ik₂(x₂+2πm)} K₀(√(-z) √((x₂+2πm)² + y²)).
pub fn psi_field(
    x2: f64,
    y: f64,
    z: f64,
    k2: f64,
    ctx: &GratingSymbolContext,
    method: PsiMethod,
) -> Result<Complex64, FiberError> {
    if x2 == 0.0 && y == 0.0 {
        return Err(FiberError::InvalidQuery {
            reason: "psi is singular at the interaction site (0,0)".into(),
        });
    }
    match method {
        PsiMethod::Mode => {
            if !(z < k2 * k2) {
                return Err(FiberError::InvalidQuery {
                    reason: format!("mode sum requires z < k2², got {z}"),
                });
            }
            if y == 0.0 {
                return Err(FiberError::ModeSumOnAxis);
            }
            let ay = y.abs();
            let mut acc = Complex64::new(0.0, 0.0);
            let mut n = 0i64;
            loop {
                let mut biggest: f64 = 0.0;
                let pair: &[i64] = if n == 0 { &[0] } else { &[n, -n] };
                for &m in pair {
                    let s = ((m as f64 + k2) * (m as f64 + k2) - z).sqrt();
                    let magnitude = (-s * ay).exp() / s;
                    biggest = biggest.max(magnitude);
                    let phase = (m as f64) * x2;
                    acc += Complex64::new(phase.cos(), phase.sin()) * magnitude;
                }
                if n > 0 && biggest < ctx.term_tol {
                    break;
                }
                n += 1;
                if n as u32 > ctx.mode_cutoff {
                    return Err(FiberError::ModeSumOnAxis);
                }
            }
            Ok(acc * 0.5)
        }
        PsiMethod::Image => {
            if !(z < 0.0) {
                return Err(FiberError::InvalidQuery {
                    reason: format!("image sum requires z < 0, got {z}"),
                });
            }
            let root = (-z).sqrt();
            let mut acc = Complex64::new(0.0, 0.0);
            let mut m = 0i64;
            loop {
                let mut biggest: f64 = 0.0;
                let pair: &[i64] = if m == 0 { &[0] } else { &[m, -m] };
                for &mm in pair {
                    let shift = x2 + TWO_PI * mm as f64;
                    let rho = (shift * shift + y * y).sqrt();
                    let k0 = specfun::k0_positive(root * rho);
                    biggest = biggest.max(k0);
                    let phase = -k2 * shift;
                    acc += Complex64::new(phase.cos(), phase.sin()) * k0;
                }
                if m > 0 && biggest < ctx.term_tol {
                    break;
                }
                m += 1;
                if m as u32 > ctx.image_cutoff {
                    return Err(FiberError::TailTooLarge { bound: biggest });
                }
            }
            Ok(acc)
        }
    }
}

/// Operator norm of the inter-wire coupling block T_j(z) for z < 0:
/// (2π)^{-1} sup_ξ K₀(2πj √(ξ² - z)) = (2π)^{-1} K₀(2πj √(-z)).
pub fn tj_norm(j: u32, z: f64) -> Result<f64, FiberError> {
    if j == 0 {
        return Err(FiberError::InvalidQuery {
            reason: "tj_norm requires j >= 1".into(),
        });
    }
    if !(z < 0.0) {
        return Err(FiberError::InvalidQuery {
            reason: format!("tj_norm requires z < 0, got {z}"),
        });
    }
    Ok(specfun::k0_positive(TWO_PI * (j as f64) * (-z).sqrt()) / TWO_PI)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fiber_line::xi;

    // frozen 20-digit references from the series/root evaluations
    const ANCHOR: f64 = -0.018_743_220_958_073_229;
    const T_M2_K025: f64 = 0.036_707_828_059_845_650;
    const T_M1_KHALF: f64 = -0.018_159_704_041_760_375;
    const LAMBDA_00: f64 = -1.262_956_894_663_051_2;
    const LAMBDA_0_K025: f64 = -1.260_945_765_142_026_6;
    const LAMBDA_50: f64 = -2.533_005_045_26e-4;
    const T_HALFTHRESHOLD: f64 = -0.467_064_921_712_066_87;

    fn ctx() -> GratingSymbolContext {
        GratingSymbolContext::standard()
    }

    #[test]
    fn anchor_value_and_recomputation() {
        let c = ctx();
        assert!((c.anchor() - ANCHOR).abs() < 1e-12);
        let again = t_image(-1.0, 0.0, &c).unwrap();
        assert_eq!(c.anchor(), again);
    }

    #[test]
    fn image_alternating_at_half() {
        let c = ctx();
        let v = t_image(-1.0, 0.5, &c).unwrap();
        assert!((v - T_M1_KHALF).abs() < 1e-12);
        // sign pattern: -ς + (K₀(2π) - K₀(4π) + ...)/π
        let leading = -VARSIGMA
            + (specfun::bessel_k0(TWO_PI).unwrap() - specfun::bessel_k0(2.0 * TWO_PI).unwrap())
                / PI;
        assert!((v - leading).abs() < 1e-9);
    }

    #[test]
    fn image_large_negative_z_limit() {
        let c = ctx();
        let z = -1e4;
        let v = t_image(z, 0.3, &c).unwrap();
        assert!((v - ((-z).ln() / FOUR_PI - VARSIGMA)).abs() < 1e-12);
    }

    #[test]
    fn image_rejects_nonnegative() {
        let c = ctx();
        assert!(t_image(0.0, 0.0, &c).is_err());
        assert!(t_image(0.5, 0.0, &c).is_err());
    }

    #[test]
    fn renormalized_at_anchor_is_exact() {
        let c = ctx();
        let v = t_renormalized(-1.0, 0.0, &c).unwrap();
        assert_eq!(v, c.anchor());
    }

    #[test]
    fn dual_representation_spot_check() {
        let c = ctx();
        let a = t_renormalized(-2.0, 0.25, &c).unwrap();
        let b = t_image(-2.0, 0.25, &c).unwrap();
        assert!((a - b).abs() < 1e-9, "{a} vs {b}");
        assert!((b - T_M2_K025).abs() < 1e-12);
    }

    #[test]
    fn dual_representation_overlap_sweep() {
        let c = ctx();
        let mut worst: f64 = 0.0;
        for iz in 0..20 {
            let z = -1.0 + 0.95 * (iz as f64) / 19.0;
            for ik in 0..11 {
                let k2 = -0.5 + (ik as f64) / 10.0;
                let a = t_renormalized(z, k2, &c).unwrap();
                let b = t_image(z, k2, &c).unwrap();
                worst = worst.max((a - b).abs());
            }
        }
        assert!(worst <= 1e-9, "max discrepancy {worst}");
    }

    #[test]
    fn threshold_blowup() {
        let c = ctx();
        let k2 = 0.25;
        let t6 = t_renormalized(k2 * k2 - 1e-6, k2, &c).unwrap();
        let t8 = t_renormalized(k2 * k2 - 1e-8, k2, &c).unwrap();
        assert!(t6 < -70.0, "t at 1e-6 below threshold: {t6}");
        assert!(t8 < t6);
    }

    #[test]
    fn t_eval_decreasing_and_above_zero_region() {
        let c = ctx();
        let k2 = 0.25;
        let v = t_eval(k2 * k2 / 2.0, k2, &c).unwrap();
        assert!((v - T_HALFTHRESHOLD).abs() < 1e-9);
        let samples = [-3.0, -1.0, -0.2, -0.05, -0.01, 0.01, 0.03125, 0.055];
        let mut prev = f64::INFINITY;
        for z in samples {
            let t = t_eval(z, k2, &c).unwrap();
            assert!(t < prev, "not decreasing at z={z}");
            prev = t;
        }
    }

    #[test]
    fn t_asymptotic_bound_desk_scale() {
        // |t(z,k₂) - (4π)^{-1}log(-z)| ≤ 0.02 for z ≤ -1, any k₂
        let c = ctx();
        for iz in 0..20 {
            let z = -(1.0 + (iz as f64) * (iz as f64));
            for ik in 0..6 {
                let k2 = -0.5 + (ik as f64) / 5.0;
                let t = t_eval(z, k2, &c).unwrap();
                assert!((t - (-z).ln() / FOUR_PI).abs() <= 0.02);
            }
        }
    }

    #[test]
    fn lambda_const_reference_roots() {
        let c = ctx();
        let l00 = lambda_const(0.0, 0.0, &c).unwrap();
        assert!((l00 - LAMBDA_00).abs() < 1e-8, "{l00}");
        assert!((l00 - (-1.2630)).abs() < 1e-3);
        let l = lambda_const(0.0, 0.25, &c).unwrap();
        assert!((l - LAMBDA_0_K025).abs() < 1e-8, "{l}");
        // |t + α| ≤ 1e-10 at the root
        assert!(t_eval(l00, 0.0, &c).unwrap().abs() <= 1e-10);
    }

    #[test]
    fn lambda_const_increasing_in_alpha_and_threshold_approach() {
        let c = ctx();
        let l5 = lambda_const(5.0, 0.0, &c).unwrap();
        assert!((l5 - LAMBDA_50).abs() < 1e-7, "{l5}");
        assert!(l5 > -5e-4 && l5 < 0.0);
        let mut prev = f64::NEG_INFINITY;
        for alpha in [-0.5, -0.1, 0.0, 0.1, 1.0, 5.0] {
            let l = lambda_const(alpha, 0.0, &c).unwrap();
            assert!(l > prev, "not increasing at alpha={alpha}");
            prev = l;
        }
    }

    #[test]
    fn lambda_const_even_in_k2() {
        let c = ctx();
        let a = lambda_const(0.0, 0.25, &c).unwrap();
        let b = lambda_const(0.0, -0.25, &c).unwrap();
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn alpha_grating_closed_mode_argument() {
        // for Δ > 0 the argument equals λ - (n+k₁)²
        let c = ctx();
        let k = [0.2, 0.3];
        let lambda = -0.7;
        let n = 1i64;
        let direct = alpha_grating(n, lambda, k, &c).unwrap();
        let z = lambda - (n as f64 + k[0]) * (n as f64 + k[0]);
        let expected = t_eval(z, k[1], &c).unwrap();
        assert!((direct - expected).abs() < 1e-15);
    }

    #[test]
    fn alpha_grating_diagonal_zero_at_constant_spectrum() {
        let c = ctx();
        let k = [0.2, 0.3];
        for alpha in [0.0, 0.1] {
            let lam_base = lambda_const(alpha, k[1], &c).unwrap();
            for n in [-1i64, 0, 2] {
                let lambda = lam_base + (n as f64 + k[0]) * (n as f64 + k[0]);
                let v = alpha_grating(n, lambda, k, &c).unwrap();
                assert!((v + alpha).abs() < 1e-9, "n={n} alpha={alpha}: {v}");
            }
        }
    }

    #[test]
    fn symbol_deviation_tunneling_decay() {
        let c = ctx();
        let k = [0.3, 0.25];
        let lambda = -0.5;
        let d1 = symbol_deviation(1, lambda, k, &c).unwrap();
        let d2 = symbol_deviation(2, lambda, k, &c).unwrap();
        assert!(d2 < d1 * (-6.0f64).exp());
        // matches the naive subtraction where that is still resolvable
        let line = ((1.0 + k[0]) * (1.0 + k[0]) - lambda).ln() / FOUR_PI - VARSIGMA;
        let naive = (alpha_grating(1, lambda, k, &c).unwrap() - line).abs();
        assert!((naive - d1).abs() < 1e-14);
    }

    #[test]
    fn assemble_constant_is_diagonal_and_entries_converge() {
        let c = ctx();
        let q = GratingFiberQuery::new([0.1, 0.2], CouplingFunction::constant(0.15), 6, 1e-9, 1e-6)
            .unwrap();
        let m = assemble_a_grating(&q, -1.2, &c).unwrap();
        for i in 0..13 {
            for j in 0..13 {
                if i != j {
                    assert_eq!(m.entry(i, j).norm(), 0.0);
                }
            }
        }
        // doubling the image cutoff moves no entry beyond 1e-11
        let c2 = GratingSymbolContext::new(512, 10_000, 1e-14).unwrap();
        let m2 = assemble_a_grating(&q, -1.2, &c2).unwrap();
        for i in 0..13 {
            assert!((m.entry(i, i).re - m2.entry(i, i).re).abs() <= 1e-11);
        }
    }

    #[test]
    fn assemble_complex_coupling_is_hermitian() {
        // a sin component gives genuinely complex off-diagonal entries
        let c = ctx();
        let sigma = CouplingFunction::from_fourier([
            (0, Complex64::new(0.1 * TWO_PI.sqrt(), 0.0)),
            (2, Complex64::new(0.03, -0.04)),
            (-2, Complex64::new(0.03, 0.04)),
        ])
        .unwrap();
        let q = GratingFiberQuery::new([0.15, -0.3], sigma, 5, 1e-9, 1e-6).unwrap();
        let m = assemble_a_grating(&q, -0.9, &c).unwrap();
        for i in 0..11 {
            for j in 0..11 {
                assert!((m.entry(i, j) - m.entry(j, i).conj()).norm() < 1e-15);
            }
        }
        assert!(m.entry(0, 2).im != 0.0);
    }

    #[test]
    fn grating_spectrum_constant_exactness() {
        let c = ctx();
        let q = GratingFiberQuery::new([0.0, 0.0], CouplingFunction::constant(0.0), 48, 1e-9, 1e-6)
            .unwrap();
        let modes = discrete_spectrum_grating(&q, &c).unwrap();
        // {λ(0,0) + n²} ∩ (-∞, 0): n = 0 simple, n = ±1 double
        assert_eq!(modes.len(), 2);
        assert!((modes[0].lambda - LAMBDA_00).abs() < 1e-7);
        assert_eq!(modes[0].multiplicity, 1);
        assert!((modes[1].lambda - (LAMBDA_00 + 1.0)).abs() < 1e-7);
        assert_eq!(modes[1].multiplicity, 2);
    }

    #[test]
    fn grating_trial_bound_and_sandwich() {
        let c = ctx();
        let amp = Complex64::new(0.05 * (PI / 2.0).sqrt(), 0.0);
        let sigma = CouplingFunction::from_fourier([
            (0, Complex64::new(0.1 * TWO_PI.sqrt(), 0.0)),
            (1, amp),
            (-1, amp),
        ])
        .unwrap();
        let q = GratingFiberQuery::new([0.2, 0.3], sigma.clone(), 24, 1e-9, 1e-6).unwrap();
        let modes = discrete_spectrum_grating(&q, &c).unwrap();
        let lowest = modes[0].lambda;
        let upper = lambda_const(sigma.mean(), 0.3, &c).unwrap() + 0.04;
        let lower = lambda_const(sigma.ess_inf(), 0.3, &c).unwrap() + 0.04;
        assert!(lowest <= upper + 1e-9, "trial bound: {lowest} vs {upper}");
        assert!(lowest >= lower - 1e-9, "sandwich: {lowest} vs {lower}");
    }

    #[test]
    fn psi_dual_representation() {
        let c = ctx();
        let m = psi_field(1.0, 0.5, -1.0, 0.25, &c, PsiMethod::Mode).unwrap();
        let i = psi_field(1.0, 0.5, -1.0, 0.25, &c, PsiMethod::Image).unwrap();
        assert!((m - i).norm() < 1e-9, "mode {m} vs image {i}");
        let frozen = Complex64::new(0.346_031_548_221_853_65, -0.085_950_338_824_933_18);
        assert!((m - frozen).norm() < 1e-11);
    }

    #[test]
    fn psi_symmetry_at_k2_zero() {
        let c = ctx();
        let a = psi_field(0.9, 0.3, -0.7, 0.0, &c, PsiMethod::Mode).unwrap();
        let b = psi_field(-0.9, 0.3, -0.7, 0.0, &c, PsiMethod::Mode).unwrap();
        assert!((a - b).norm() < 1e-12);
    }

    #[test]
    fn psi_boundary_value_is_unit() {
        let c = ctx();
        let mut prev_gap = f64::INFINITY;
        for rho in [1e-4, 1e-6, 1e-8] {
            let s = rho / 2.0f64.sqrt();
            let v = psi_field(s, s, -1.0, 0.25, &c, PsiMethod::Image).unwrap();
            let ratio = -v.re / rho.ln();
            let gap = (ratio - 1.0).abs();
            assert!(gap < 0.05, "rho={rho}: ratio {ratio}");
            assert!(gap < prev_gap);
            prev_gap = gap;
        }
    }

    #[test]
    fn psi_error_paths() {
        let c = ctx();
        assert!(psi_field(0.0, 0.0, -1.0, 0.0, &c, PsiMethod::Image).is_err());
        assert!(matches!(
            psi_field(1.0, 0.0, -1.0, 0.0, &c, PsiMethod::Mode),
            Err(FiberError::ModeSumOnAxis)
        ));
        assert!(psi_field(1.0, 0.5, 0.5, 0.0, &c, PsiMethod::Image).is_err());
        // image handles the axis when x2 ≠ 0
        assert!(psi_field(1.0, 0.0, -1.0, 0.25, &c, PsiMethod::Image).is_ok());
    }

    #[test]
    fn tj_norm_values_and_decay() {
        let v = tj_norm(1, -1.0).unwrap();
        assert!((v - 1.458_789_317_986_563e-4).abs() < 1e-15);
        // series increment at j = 5 is already below 1e-15
        assert!(tj_norm(5, -1.0).unwrap() < 1e-15);
        // geometric decay e^{-2π√(-z)} with the √(j/(j+1)) prefactor of the
        // large-argument form of K₀; cruder agreement without it stays ~1/(2j)
        for z in [-0.5f64, -1.0, -2.0] {
            let expected = (-TWO_PI * (-z).sqrt()).exp();
            for j in 2..5u32 {
                let ratio = tj_norm(j + 1, z).unwrap() / tj_norm(j, z).unwrap();
                let refined = expected * ((j as f64) / (j as f64 + 1.0)).sqrt();
                assert!((ratio / refined - 1.0).abs() < 0.02, "j={j} z={z}");
                assert!((ratio / expected - 1.0).abs() < 0.25, "j={j} z={z}");
            }
        }
        assert!(tj_norm(0, -1.0).is_err());
        assert!(tj_norm(1, 0.5).is_err());
    }

    #[test]
    fn context_validation() {
        assert!(GratingSymbolContext::new(8, 10_000, 1e-14).is_err());
        assert!(GratingSymbolContext::new(256, 100, 1e-14).is_err());
        assert!(GratingSymbolContext::new(256, 10_000, 1e-40).is_err());
    }

    #[test]
    fn xi_is_nearby_reference_for_lambda_const() {
        // the image-sum correction shifts the root slightly below ξ(0)
        let c = ctx();
        let l = lambda_const(0.0, 0.0, &c).unwrap();
        assert!(l < xi(0.0));
        assert!((l - xi(0.0)).abs() < 3e-3);
    }
}
