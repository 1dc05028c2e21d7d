//! Model 1: a single leaky wire in R³.
//!
//! The fiber operator H(k), k ∈ Q = [-1/2, 1/2), has eigenvalues exactly
//! where the boundary operator
//!
//! ```text
//! (A(λ,k) f)(x) = (2π)^{-1/2} Σ_n α_n(λ,k) f̂_n e^{inx} + σ(x) f(x),
//! α_n(λ,k) = (4π)^{-1} log |(n+k)² - λ| - ς,
//! ```
//!
//! has a kernel vector supported on closed modes ((n+k)² > λ). Below the
//! continuum threshold k² every mode is closed and the diagonal is strictly
//! decreasing in λ, so eigenvalues are found by counting bisection plus Brent
//! polishing on the crossing branch. Above the threshold the matrix is
//! restricted to the closed modes and scanned for kernel points.

use num_complex::Complex64;

use crate::coupling::{CouplingError, CouplingFunction};
use crate::hermlin::{
    smallest_singular_value, BandedHermitian, ComplexMatrix, HermitianMatrix, HermlinError,
};
use crate::quad;
use crate::search::{RootSearch, SearchError};
use crate::specfun::{self, EULER_GAMMA, VARSIGMA};

const PI: f64 = std::f64::consts::PI;
const TWO_PI: f64 = 2.0 * PI;
const FOUR_PI: f64 = 4.0 * PI;
const SQRT_TWO_PI_INV: f64 = 0.398_942_280_401_432_7; // (2π)^{-1/2}

/// Open-row tolerance for accepting an embedded kernel point: the kernel
/// vector of the restricted matrix must also annihilate the coupling rows on
/// the open modes (Σ_m σ̂_{n-m} f̂_m = 0 for open n).
const OPEN_ROW_TOL: f64 = 1e-8;

#[derive(Debug)]
pub enum FiberError {
    InvalidQuery {
        reason: String,
    },
    /// |(n+k)² - λ| vanished: λ sits on a threshold.
    ThresholdCollision {
        n: i64,
        lambda: f64,
    },
    /// λ closer to the threshold set than the configured margin.
    ThresholdProximity {
        lambda: f64,
        distance: f64,
    },
    WindowTouchesThreshold {
        n: i64,
    },
    /// The strip [k-δ, k+δ] contains a threshold for this λ.
    StripContainsThreshold {
        n: i64,
    },
    /// The discrete spectrum came back empty, contradicting its guaranteed
    /// non-emptiness.
    EmptySpectrum,
    GridOnWire {
        index: usize,
    },
    /// Analytic tail estimate of the mode sum exceeds the error budget.
    TailTooLarge {
        bound: f64,
    },
    /// Root bracketing could not be expanded to a sign change.
    BracketExpansion {
        what: &'static str,
    },
    /// The mode sum cannot reach the tolerance on the axis y = 0.
    ModeSumOnAxis,
    Coupling(CouplingError),
    Linalg(HermlinError),
    Search(String),
}

impl std::fmt::Display for FiberError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FiberError::InvalidQuery { reason } => write!(f, "invalid query: {reason}"),
            FiberError::ThresholdCollision { n, lambda } => {
                write!(f, "threshold collision at mode n={n}, lambda={lambda}")
            }
            FiberError::ThresholdProximity { lambda, distance } => write!(
                f,
                "lambda={lambda} is within {distance:.3e} of the threshold set"
            ),
            FiberError::WindowTouchesThreshold { n } => {
                write!(f, "search window touches the threshold of mode n={n}")
            }
            FiberError::StripContainsThreshold { n } => {
                write!(
                    f,
                    "complexification strip crosses the threshold of mode n={n}"
                )
            }
            FiberError::EmptySpectrum => {
                write!(f, "empty discrete spectrum (expected non-empty)")
            }
            FiberError::GridOnWire { index } => {
                write!(f, "grid point {index} lies on the wire (y = 0)")
            }
            FiberError::TailTooLarge { bound } => {
                write!(f, "tail bound {bound:.3e} exceeds the error budget")
            }
            FiberError::BracketExpansion { what } => {
                write!(f, "could not expand a sign-change bracket for {what}")
            }
            FiberError::ModeSumOnAxis => {
                write!(
                    f,
                    "mode sum does not converge to tolerance at y = 0; use the image sum"
                )
            }
            FiberError::Coupling(e) => write!(f, "{e}"),
            FiberError::Linalg(e) => write!(f, "{e}"),
            FiberError::Search(msg) => write!(f, "search failure: {msg}"),
        }
    }
}

impl std::error::Error for FiberError {}

impl From<CouplingError> for FiberError {
    fn from(e: CouplingError) -> Self {
        FiberError::Coupling(e)
    }
}

impl From<HermlinError> for FiberError {
    fn from(e: HermlinError) -> Self {
        FiberError::Linalg(e)
    }
}

impl From<SearchError> for FiberError {
    fn from(e: SearchError) -> Self {
        FiberError::Search(e.to_string())
    }
}

/// Fold a quasimomentum into the Brillouin zone Q = [-1/2, 1/2).
pub fn canonical_quasimomentum(k: f64) -> f64 {
    let mut r = k - k.round();
    if r >= 0.5 {
        r -= 1.0;
    }
    if r < -0.5 {
        r += 1.0;
    }
    r
}

/// ξ(α) = -4 exp(2(-2πα - γ)): the unique eigenvalue parameter of the
/// constant-coupling point interaction. Strictly increasing and negative,
/// with the exact shift law ξ(α + h) = ξ(α) e^{-4πh}.
pub fn xi(alpha: f64) -> f64 {
    -4.0 * (2.0 * (-TWO_PI * alpha - EULER_GAMMA)).exp()
}

/// Distance from λ to the threshold set τ(k) = {(n+k)²}.
pub fn tau_distance(lambda: f64, k: f64) -> f64 {
    let mut d = f64::INFINITY;
    if lambda > 0.0 {
        let s = lambda.sqrt();
        for base in [-s - k, s - k] {
            for cand in [base.floor(), base.ceil()] {
                let t = (cand + k) * (cand + k);
                d = d.min((t - lambda).abs());
            }
        }
    }
    for n in -1..=1i64 {
        let t = (n as f64 + k) * (n as f64 + k);
        d = d.min((t - lambda).abs());
    }
    d
}

/// Diagonal symbol α_n(λ,k) = (4π)^{-1} log|(n+k)² - λ| - ς.
pub fn alpha_line(n: i64, lambda: f64, k: f64) -> Result<f64, FiberError> {
    let gap = (n as f64 + k) * (n as f64 + k) - lambda;
    if gap.abs() < 1e-300 {
        return Err(FiberError::ThresholdCollision { n, lambda });
    }
    Ok(gap.abs().ln() / FOUR_PI - VARSIGMA)
}

/// Parameters of one fiber solve for the line model.
#[derive(Debug, Clone)]
pub struct LineFiberQuery {
    k: f64,
    sigma: CouplingFunction,
    n_modes: usize,
    lambda_tol: f64,
    threshold_margin: f64,
}

impl LineFiberQuery {
    /// `k` is folded into Q; the truncation must cover the coupling degree
    /// and the tolerances must be positive.
    pub fn new(
        k: f64,
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
        if !k.is_finite() {
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
        Ok(LineFiberQuery {
            k: canonical_quasimomentum(k),
            sigma,
            n_modes,
            lambda_tol,
            threshold_margin,
        })
    }

    pub fn k(&self) -> f64 {
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

    /// Continuum threshold of H(k): min τ(k) = k².
    pub fn threshold(&self) -> f64 {
        self.k * self.k
    }
}

/// A guided mode of the fiber operator: an eigenvalue λ with its normalized
/// Fourier coefficient vector.
#[derive(Debug, Clone)]
pub struct GuidedMode {
    pub lambda: f64,
    pub k: f64,
    /// (mode index n, f̂_n), Σ|f̂_n|² = 1
    pub coeffs: Vec<(i64, Complex64)>,
    /// smallest |eigenvalue| of A(λ,k) at acceptance
    pub residual: f64,
    pub multiplicity: usize,
    /// set when λ lies within the threshold margin and was flagged instead of
    /// refined
    pub near_threshold: bool,
    /// for embedded modes: norm of the coupling rows on the open modes
    pub open_residual: f64,
}

/// Banded assembly of A(λ,k) on an explicit mode list.
fn banded_on_modes(
    modes: &[i64],
    sigma: &CouplingFunction,
    lambda: f64,
    k: f64,
) -> BandedHermitian {
    let dim = modes.len();
    let sigma_mean_entry = sigma.coeff(0).re * SQRT_TWO_PI_INV;
    let diag: Vec<f64> = modes
        .iter()
        .map(|&n| {
            let gap = (n as f64 + k) * (n as f64 + k) - lambda;
            gap.abs().ln() / FOUR_PI - VARSIGMA + sigma_mean_entry
        })
        .collect();
    let bw = (sigma.max_index() as usize).min(dim.saturating_sub(1));
    let bands: Vec<Vec<Complex64>> = (1..=bw)
        .map(|d| {
            (0..dim - d)
                .map(|i| {
                    let diff = modes[i] - modes[i + d];
                    if diff.unsigned_abs() as u32 <= sigma.max_index() {
                        sigma.coeff(diff as i32) * SQRT_TWO_PI_INV
                    } else {
                        Complex64::new(0.0, 0.0)
                    }
                })
                .collect()
        })
        .collect();
    BandedHermitian::new(diag, bands).expect("assembly is structurally valid")
}

fn full_mode_list(n_modes: usize) -> Vec<i64> {
    (-(n_modes as i64)..=n_modes as i64).collect()
}

pub(crate) fn banded_a_line(q: &LineFiberQuery, lambda: f64) -> BandedHermitian {
    banded_on_modes(&full_mode_list(q.n_modes), &q.sigma, lambda, q.k)
}

/// Dense truncated matrix of A(λ,k) on modes |n| ≤ N.
/// λ must keep the configured distance from the threshold set.
pub fn assemble_a_line(q: &LineFiberQuery, lambda: f64) -> Result<HermitianMatrix, FiberError> {
    let d = tau_distance(lambda, q.k);
    if d < q.threshold_margin {
        return Err(FiberError::ThresholdProximity {
            lambda,
            distance: d,
        });
    }
    Ok(banded_a_line(q, lambda).to_dense())
}

/// Number of eigenvalues of the truncated fiber operator below λ
/// (= negative eigenvalues of A(λ,k)); λ must stay below k² - margin.
pub fn counting_function(q: &LineFiberQuery, lambda: f64) -> Result<usize, FiberError> {
    if lambda >= q.threshold() - q.threshold_margin {
        return Err(FiberError::ThresholdProximity {
            lambda,
            distance: q.threshold() - lambda,
        });
    }
    let search = RootSearch {
        assemble: |l: f64| banded_a_line(q, l),
        lambda_tol: q.lambda_tol,
    };
    Ok(search.count(lambda))
}

fn modes_from_cluster(
    q: &LineFiberQuery,
    modes: &[i64],
    cluster: crate::search::ClusteredRoot,
    near_threshold: bool,
    open_residual: f64,
) -> GuidedMode {
    GuidedMode {
        lambda: cluster.lambda,
        k: q.k,
        coeffs: modes.iter().copied().zip(cluster.kernel_vector).collect(),
        residual: cluster.residual,
        multiplicity: cluster.multiplicity,
        near_threshold,
        open_residual,
    }
}

/// All eigenvalues of the truncated H(k) below k² - margin, ascending, with
/// multiplicities resolved by clustering. Eigenvalues within the margin of
/// the threshold are reported flagged, not refined.
pub fn discrete_spectrum(q: &LineFiberQuery) -> Result<Vec<GuidedMode>, FiberError> {
    let modes = full_mode_list(q.n_modes);
    let search = RootSearch {
        assemble: |l: f64| banded_on_modes(&modes, &q.sigma, l, q.k),
        lambda_tol: q.lambda_tol,
    };
    let hi = q.threshold() - q.threshold_margin;
    let mut lo = xi(q.sigma.ess_inf()) + q.threshold() - 0.5;
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
    let mut out: Vec<GuidedMode> = clusters
        .into_iter()
        .map(|c| modes_from_cluster(q, &modes, c, false, 0.0))
        .collect();

    // flag eigenvalues hiding inside the threshold margin
    let probe = q.threshold() - 1e-3 * q.threshold_margin;
    let main_count = search.count(hi);
    let probe_count = search.count(probe);
    if probe_count > main_count {
        let lambda = q.threshold() - 0.5 * q.threshold_margin;
        let matrix = banded_on_modes(&modes, &q.sigma, lambda, q.k);
        let vector = matrix.null_vector(0.0);
        let below = matrix.inertia_below(0.0).below;
        let mut residual = f64::INFINITY;
        if below > 0 {
            residual = residual.min(matrix.eigval_by_index(below - 1, 1e-14).abs());
        }
        if below < matrix.dim() {
            residual = residual.min(matrix.eigval_by_index(below, 1e-14).abs());
        }
        out.push(GuidedMode {
            lambda,
            k: q.k,
            coeffs: modes.iter().copied().zip(vector).collect(),
            residual,
            multiplicity: probe_count - main_count,
            near_threshold: true,
            open_residual: 0.0,
        });
    }
    if out.is_empty() {
        return Err(FiberError::EmptySpectrum);
    }
    Ok(out)
}

/// Kernel points of A(λ,k) restricted to the closed modes, for λ in a window
/// above the continuum threshold. The window must keep the threshold margin
/// to every (n+k)². A restricted kernel vector is accepted only when the
/// coupling rows on the open modes vanish on it, which is the full kernel
/// condition; an empty result is valid output.
pub fn embedded_kernel_search(
    q: &LineFiberQuery,
    window: (f64, f64),
) -> Result<Vec<GuidedMode>, FiberError> {
    let (wlo, whi) = window;
    if !(wlo < whi) {
        return Err(FiberError::InvalidQuery {
            reason: format!("empty window ({wlo}, {whi})"),
        });
    }
    for n in -(q.n_modes as i64 + 1)..=(q.n_modes as i64 + 1) {
        let t = (n as f64 + q.k) * (n as f64 + q.k);
        if t >= wlo - q.threshold_margin && t <= whi + q.threshold_margin {
            return Err(FiberError::WindowTouchesThreshold { n });
        }
    }
    let mid = 0.5 * (wlo + whi);
    let all = full_mode_list(q.n_modes);
    let closed: Vec<i64> = all
        .iter()
        .copied()
        .filter(|&n| (n as f64 + q.k) * (n as f64 + q.k) > mid)
        .collect();
    let open: Vec<i64> = all
        .iter()
        .copied()
        .filter(|&n| (n as f64 + q.k) * (n as f64 + q.k) < mid)
        .collect();
    if closed.is_empty() {
        return Ok(Vec::new());
    }
    let search = RootSearch {
        assemble: |l: f64| banded_on_modes(&closed, &q.sigma, l, q.k),
        lambda_tol: q.lambda_tol,
    };
    let roots = search.roots_in(wlo, whi)?;
    let clusters = search.cluster(&roots);
    let mut out = Vec::new();
    for c in clusters {
        // open-row condition: (σ f)^_n = 0 for open n
        let mut open_norm2 = 0.0;
        for &n in &open {
            let mut row = Complex64::new(0.0, 0.0);
            for (&m, f) in closed.iter().zip(c.kernel_vector.iter()) {
                let diff = n - m;
                if diff.unsigned_abs() as u32 <= q.sigma.max_index() {
                    row += q.sigma.coeff(diff as i32) * SQRT_TWO_PI_INV * f;
                }
            }
            open_norm2 += row.norm_sqr();
        }
        let open_residual = open_norm2.sqrt();
        if open_residual <= OPEN_ROW_TOL {
            out.push(modes_from_cluster(q, &closed, c, false, open_residual));
        } else {
            log::debug!(
                "embedded candidate at λ={} rejected: open-row residual {open_residual:.3e}",
                c.lambda
            );
        }
    }
    Ok(out)
}

/// Reconstruct the guided-mode field u(x, y) on (x, |y|) sample points:
/// u = (2π)^{-1/2} Σ f̂_n e^{inx} K₀(√((n+k)² - λ) |y|).
pub fn reconstruct_field(
    mode: &GuidedMode,
    grid: &[(f64, f64)],
) -> Result<Vec<Complex64>, FiberError> {
    for (n, _) in &mode.coeffs {
        if (*n as f64 + mode.k) * (*n as f64 + mode.k) <= mode.lambda {
            return Err(FiberError::ThresholdCollision {
                n: *n,
                lambda: mode.lambda,
            });
        }
    }
    let mut out = Vec::with_capacity(grid.len());
    for (idx, &(x, y)) in grid.iter().enumerate() {
        let r = y.abs();
        if r == 0.0 {
            return Err(FiberError::GridOnWire { index: idx });
        }
        let mut u = Complex64::new(0.0, 0.0);
        for &(n, f) in &mode.coeffs {
            if f.norm_sqr() == 0.0 {
                continue;
            }
            let c = ((n as f64 + mode.k) * (n as f64 + mode.k) - mode.lambda).sqrt();
            let radial = specfun::k0_positive(c * r);
            let phase = (n as f64) * x;
            u += f * Complex64::new(phase.cos(), phase.sin()) * radial;
        }
        out.push(u * SQRT_TWO_PI_INV);
    }
    Ok(out)
}

/// Probe of the complexified fiber symbol at μ = k + iη in the strip
/// |Re μ - k| < δ.
#[derive(Debug, Clone)]
pub struct ComplexifiedQuery {
    pub lambda: f64,
    pub k: f64,
    pub delta: f64,
    pub etas: Vec<f64>,
}

/// Smallest singular values of A(λ, k+iη) for each probe height η. The
/// non-selfadjoint matrix diag((4π)^{-1} log((n+μ)² - λ) - ς) + σ is
/// assembled densely; its inverse norm is 1/s_min.
pub fn complexified_bound_probe(
    c: &ComplexifiedQuery,
    sigma: &CouplingFunction,
    n_modes: usize,
) -> Result<Vec<(f64, f64)>, FiberError> {
    if c.k == 0.0 || c.k.abs() >= 0.5 {
        return Err(FiberError::InvalidQuery {
            reason: "complexification requires k in Q \\ {0}".into(),
        });
    }
    if !(c.delta > 0.0 && c.delta < c.k.abs()) {
        return Err(FiberError::InvalidQuery {
            reason: "delta must lie in (0, |k|)".into(),
        });
    }
    if c.etas.is_empty() || c.etas.windows(2).any(|w| w[0] >= w[1]) || c.etas[0] <= 0.0 {
        return Err(FiberError::InvalidQuery {
            reason: "etas must be increasing and positive".into(),
        });
    }
    let nn = n_modes as i64;
    for n in -(nn + 1)..=(nn + 1) {
        let e1 = (n as f64 + c.k - c.delta).powi(2);
        let e2 = (n as f64 + c.k + c.delta).powi(2);
        let (lo, hi) = if e1 < e2 { (e1, e2) } else { (e2, e1) };
        if c.lambda >= lo && c.lambda <= hi {
            return Err(FiberError::StripContainsThreshold { n });
        }
    }
    let dim = 2 * n_modes + 1;
    let mut out = Vec::with_capacity(c.etas.len());
    for &eta in &c.etas {
        let mu = Complex64::new(c.k, eta);
        let mut data = vec![Complex64::new(0.0, 0.0); dim * dim];
        for i in 0..dim {
            let n = i as i64 - nn;
            let w = (n as f64 + mu) * (n as f64 + mu) - c.lambda;
            // the strip condition keeps w off the branch cut
            let logw =
                specfun::principal_log(w).map_err(|_| FiberError::StripContainsThreshold { n })?;
            data[i * dim + i] = logw / FOUR_PI - VARSIGMA;
            for j in 0..dim {
                if i != j {
                    let diff = (i as i64 - j as i64) as i32;
                    data[i * dim + j] += sigma.coeff(diff) * SQRT_TWO_PI_INV;
                }
            }
            data[i * dim + i] += Complex64::new(sigma.coeff(0).re * SQRT_TWO_PI_INV, 0.0);
        }
        let m = ComplexMatrix::from_rows(dim, data)?;
        out.push((eta, smallest_singular_value(&m)?));
    }
    Ok(out)
}

/// Both sides of the Hilbert-Schmidt norm identity for the traced free
/// resolvent at spectral point -a.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HsNormIdentity {
    /// (2π)^{-1} Σ_n ((n+k)² + a)^{-1} · ∫₀^∞ K₀(r)² r dr, with an analytic
    /// integral estimate for the |n| > n_cut tail.
    pub closed_form: f64,
    /// direct 2D quadrature of the squared kernel
    pub kernel_quadrature: f64,
}

/// Evaluate ‖γ R₀(-a, k)‖²_HS both through the mode-sum identity and by
/// direct quadrature of the kernel.
pub fn hs_norm_identity(a: f64, k: f64, n_cut: usize) -> Result<HsNormIdentity, FiberError> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(FiberError::InvalidQuery {
            reason: "a must be positive".into(),
        });
    }
    let moment = specfun::k0_square_moment();
    let mut partial = 0.0;
    for n in -(n_cut as i64)..=n_cut as i64 {
        partial += 1.0 / ((n as f64 + k) * (n as f64 + k) + a);
    }
    // midpoint-rule tail: Σ_{|n| > C} ≈ ∫_{C+1/2}^∞ both one-sided branches
    let sa = a.sqrt();
    let edge = n_cut as f64 + 0.5;
    let tail = ((PI / 2.0 - ((edge + k) / sa).atan()) + (PI / 2.0 - ((edge - k) / sa).atan())) / sa;
    let tail_err = (1.0 / ((edge + k) * (edge + k) + a) + 1.0 / ((edge - k) * (edge - k) + a))
        / (n_cut as f64);
    if tail_err * moment / TWO_PI > 1e-6 {
        return Err(FiberError::TailTooLarge { bound: tail_err });
    }
    let closed_form = moment / TWO_PI * (partial + tail);

    // direct quadrature of (2π)² ∫∫ |F(ξ,r)|² r dr dξ, where F is the traced
    // fiber kernel F(ξ,r) = (2π)^{-2} Σ_n e^{inξ} K₀(√((n+k)²+a) r). For
    // small r the equivalent image representation
    //   F = Σ_m e^{-ik(ξ+2πm)} e^{-√a ρ_m}/(4πρ_m),  ρ_m = √((ξ+2πm)²+r²),
    // converges in a handful of terms; the two agree by Poisson summation and
    // the agreement is asserted at the switch radius. The logarithmically
    // singular corner r < r_cut is replaced by the free kernel (4πρ)^{-1},
    // whose contribution integrates in closed form (error a few 1e-6 there).
    let r_cut = 1e-3;
    let r_switch = 0.3;
    let sa = a.sqrt();
    let image_f = move |xi: f64, r: f64| -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        let m_span = (45.0 / (TWO_PI * sa)).ceil() as i64 + 2;
        for m in -m_span..=m_span {
            let s = xi + TWO_PI * m as f64;
            let rho = (s * s + r * r).sqrt();
            let w = sa * rho;
            if w > 45.0 {
                continue;
            }
            let phase = -k * s;
            acc += Complex64::new(phase.cos(), phase.sin()) * ((-w).exp() / (FOUR_PI * rho));
        }
        acc
    };
    let c_of = |n: i64| ((n as f64 + k) * (n as f64 + k) + a).sqrt();
    let c_min = c_of(0).min(c_of(-1)).min(c_of(1));
    let r_max = 45.0 / c_min;
    let inner_modes = |r: f64| {
        // coefficient tables K₀(c_n r) for n ≥ 0 and n < 0
        let mut pos: Vec<f64> = Vec::new();
        let mut neg: Vec<f64> = Vec::new();
        let mut n = 0i64;
        loop {
            let cp = c_of(n) * r;
            let up = if cp <= 45.0 {
                specfun::k0_positive(cp)
            } else {
                0.0
            };
            if n == 0 {
                pos.push(up);
            } else {
                let cm = c_of(-n) * r;
                let um = if cm <= 45.0 {
                    specfun::k0_positive(cm)
                } else {
                    0.0
                };
                if up == 0.0 && um == 0.0 {
                    break;
                }
                pos.push(up);
                neg.push(um);
            }
            n += 1;
        }
        let norm = 1.0 / (TWO_PI * TWO_PI);
        let f2 = move |xi: f64| {
            let rot = Complex64::new(xi.cos(), xi.sin());
            let mut accp = Complex64::new(0.0, 0.0);
            for m in (1..pos.len()).rev() {
                accp = (accp + pos[m]) * rot;
            }
            let mut accn = Complex64::new(0.0, 0.0);
            for m in (1..=neg.len()).rev() {
                accn = (accn + neg[m - 1]) * rot.conj();
            }
            ((accp + accn + pos[0]) * norm).norm_sqr()
        };
        quad::adaptive(&f2, -PI, PI, 1e-10)
    };
    // representation agreement at the switch radius
    debug_assert!(
        (image_f(0.37, r_switch).norm_sqr() - {
            let mut s = Complex64::new(0.0, 0.0);
            for n in -400..=400i64 {
                let c = c_of(n) * r_switch;
                if c <= 45.0 {
                    let ph = 0.37 * n as f64;
                    s += Complex64::new(ph.cos(), ph.sin()) * specfun::k0_positive(c);
                }
            }
            (s / (TWO_PI * TWO_PI)).norm_sqr()
        })
        .abs()
            < 1e-12
    );
    let inner_images =
        |r: f64| quad::adaptive(&|xi: f64| image_f(xi, r).norm_sqr(), -PI, PI, 1e-10);
    let outer_small = quad::adaptive(&|r: f64| inner_images(r) * r, r_cut, r_switch, 1e-9);
    let outer_large = quad::adaptive(&|r: f64| inner_modes(r) * r, r_switch, r_max, 1e-9);
    let outer = outer_small + outer_large;
    // (2π)² (4π)^{-2} ∫₀^{rc}∫ r/(ξ²+r²) dξ dr = ½[rc·atan(π/rc) + (π/2)ln(1+rc²/π²)]
    let corner =
        0.5 * (r_cut * (PI / r_cut).atan() + (PI / 2.0) * (1.0 + r_cut * r_cut / (PI * PI)).ln());
    let kernel_quadrature = TWO_PI * TWO_PI * outer + corner;
    Ok(HsNormIdentity {
        closed_form,
        kernel_quadrature,
    })
}

/// Exact lattice resolvent sum Σ_n ((n+k)² + a)^{-1}; used as the reference
/// for the truncated closed form.
#[cfg(test)]
pub(crate) fn resolvent_sum_closed(a: f64, k: f64) -> f64 {
    let sa = a.sqrt();
    let s = (TWO_PI * sa).sinh();
    let c = (TWO_PI * sa).cosh();
    PI / sa * s / (c - (TWO_PI * k).cos())
}
