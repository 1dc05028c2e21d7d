//! Shared eigenvalue search kernel for the fiber operators.
//!
//! Both models reduce to the same problem: the boundary matrix A(λ) has a
//! strictly decreasing diagonal symbol in λ and a λ-independent coupling
//! block, so every eigenvalue branch of A(·) is strictly decreasing and
//! crosses zero at most once. Eigenvalues of the fiber operator are located
//! by bisection on the negative-eigenvalue count of A(λ) (the counting
//! function) to isolate each branch, followed by Brent's method on the branch
//! value itself.

use num_complex::Complex64;

use crate::hermlin::{brent_root, BandedHermitian, Bracket, HermlinError};

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum SearchError {
    Hermlin(HermlinError),
    /// The polished root escaped its isolation interval.
    BracketFailure {
        lambda_lo: f64,
        lambda_hi: f64,
    },
}

impl From<HermlinError> for SearchError {
    fn from(e: HermlinError) -> Self {
        SearchError::Hermlin(e)
    }
}

impl std::fmt::Display for SearchError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SearchError::Hermlin(e) => write!(f, "{e}"),
            SearchError::BracketFailure {
                lambda_lo,
                lambda_hi,
            } => {
                write!(f, "bracket failure on [{lambda_lo}, {lambda_hi}]")
            }
        }
    }
}

/// A located zero crossing of one eigenvalue branch of A(·).
#[derive(Debug, Clone)]
pub(crate) struct RawRoot {
    pub lambda: f64,
    #[allow(dead_code)]
    pub branch: usize,
}

/// A cluster of coincident roots: an eigenvalue of the fiber operator with
/// its multiplicity, kernel vector and residual.
#[derive(Debug, Clone)]
pub(crate) struct ClusteredRoot {
    pub lambda: f64,
    pub multiplicity: usize,
    /// smallest |eigenvalue| of A at the accepted λ
    pub residual: f64,
    pub kernel_vector: Vec<Complex64>,
}

pub(crate) struct RootSearch<F>
where
    F: Fn(f64) -> BandedHermitian,
{
    pub assemble: F,
    pub lambda_tol: f64,
}

impl<F> RootSearch<F>
where
    F: Fn(f64) -> BandedHermitian,
{
    /// Negative-eigenvalue count of A(λ); when λ sits numerically on a root
    /// the factorization reports a borderline pivot and the count is retried
    /// at a slightly perturbed λ.
    pub fn count(&self, lambda: f64) -> usize {
        let nudge = 1e-2 * self.lambda_tol;
        let mut last = 0usize;
        for attempt in 0..6 {
            let l = match attempt {
                0 => lambda,
                a if a % 2 == 1 => lambda + nudge * (1 << (a / 2)) as f64,
                a => lambda - nudge * (1 << (a / 2)) as f64,
            };
            let inertia = (self.assemble)(l).inertia_below(0.0);
            last = inertia.below;
            if !inertia.borderline {
                return inertia.below;
            }
        }
        log::debug!("borderline counting at lambda={lambda}; keeping last count {last}");
        last
    }

    /// Value of the j-th smallest eigenvalue branch of A at λ.
    fn branch(&self, j: usize, lambda: f64) -> f64 {
        (self.assemble)(lambda).eigval_by_index(j, 1e-13)
    }

    /// All roots of the eigenvalue branches of A(·) in (lo, hi].
    pub fn roots_in(&self, lo: f64, hi: f64) -> Result<Vec<RawRoot>, SearchError> {
        let c_lo = self.count(lo);
        let c_hi = self.count(hi);
        let mut roots = Vec::with_capacity(c_hi.saturating_sub(c_lo));
        for branch in c_lo..c_hi {
            // isolate the branch crossing by counting bisection
            let mut a = lo;
            let mut b = hi;
            let isolation = (64.0 * self.lambda_tol).max(1e-3 * (hi - lo));
            while b - a > isolation {
                let mid = 0.5 * (a + b);
                if self.count(mid) <= branch {
                    a = mid;
                } else {
                    b = mid;
                }
            }
            // polish with Brent on the branch value; g(a) >= 0 > g(b)
            let g = |lambda: f64| self.branch(branch, lambda);
            let bracket = Bracket::new(a, b).map_err(SearchError::Hermlin)?;
            let root = match brent_root(g, bracket, self.lambda_tol) {
                Ok(r) if r.is_finite() => r,
                _ => {
                    // fall back to pure counting bisection at full resolution
                    let mut a2 = a;
                    let mut b2 = b;
                    while b2 - a2 > self.lambda_tol {
                        let mid = 0.5 * (a2 + b2);
                        if self.count(mid) <= branch {
                            a2 = mid;
                        } else {
                            b2 = mid;
                        }
                    }
                    0.5 * (a2 + b2)
                }
            };
            if !(root >= a && root <= b) {
                return Err(SearchError::BracketFailure {
                    lambda_lo: a,
                    lambda_hi: b,
                });
            }
            roots.push(RawRoot {
                lambda: root,
                branch,
            });
        }
        Ok(roots)
    }

    /// Cluster coincident roots into eigenvalues with multiplicities and
    /// attach kernel vectors and residuals.
    pub fn cluster(&self, roots: &[RawRoot]) -> Vec<ClusteredRoot> {
        let mut out = Vec::new();
        let mut i = 0;
        let radius = 10.0 * self.lambda_tol;
        while i < roots.len() {
            let mut j = i + 1;
            while j < roots.len() && roots[j].lambda - roots[j - 1].lambda <= radius {
                j += 1;
            }
            let members = &roots[i..j];
            let center = members.iter().map(|r| r.lambda).sum::<f64>() / members.len() as f64;
            let matrix = (self.assemble)(center);
            // residual: the eigenvalue of A(center) nearest zero
            let below = matrix.inertia_below(0.0).below;
            let mut residual = f64::INFINITY;
            if below > 0 {
                residual = residual.min(matrix.eigval_by_index(below - 1, 1e-14).abs());
            }
            if below < matrix.dim() {
                residual = residual.min(matrix.eigval_by_index(below, 1e-14).abs());
            }
            // confirm the cluster size against the near-zero eigenvalue count
            let eps = (4.0 * residual).max(1e-12 * matrix.gershgorin().1.abs().max(1.0));
            let near_zero = matrix.count_in(-eps, eps);
            if near_zero != members.len() {
                log::debug!(
                    "cluster at λ={center}: branch count {} vs near-zero count {near_zero}",
                    members.len()
                );
            }
            let kernel_vector = matrix.null_vector(0.0);
            out.push(ClusteredRoot {
                lambda: center,
                multiplicity: members.len(),
                residual,
                kernel_vector,
            });
            i = j;
        }
        out
    }
}
