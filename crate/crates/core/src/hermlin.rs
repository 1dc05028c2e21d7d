//! Dense Hermitian eigenvalues, banded inertia kernels, and bracketed root
//! finding. This is the only numerical-linear-algebra surface in the crate.
//!
//! Complex Hermitian eigenproblems are solved by embedding A = X + iY into the
//! real symmetric matrix [[X, -Y], [Y, X]] of doubled size, tridiagonalizing
//! with Householder reflections and running implicit-shift QL; the doubled
//! spectrum is then deduplicated in adjacent pairs. For the fiber sweeps, where
//! only eigenvalue counts and a single branch value are needed per spectral
//! parameter, a banded LDL^H factorization provides the inertia in O(dim·bw²)
//! without any dense work; it is cross-checked against the dense path in tests.

use num_complex::Complex64;

/// Errors raised by the linear-algebra kernels.
#[derive(Debug, Clone, PartialEq)]
pub enum HermlinError {
    NotHermitian {
        max_asymmetry: f64,
    },
    NotSquare,
    Empty,
    NonFinite,
    NoConvergence {
        iterations: usize,
    },
    /// Paired eigenvalues of the real embedding failed to match.
    PairingFailure {
        gap: f64,
    },
    /// An eigenvalue sits on the counting boundary (strict mode only).
    BorderlineEigenvalue {
        value: f64,
    },
    NoSignChange {
        f_lo: f64,
        f_hi: f64,
    },
    IterationCap {
        limit: usize,
    },
    BadBracket {
        lo: f64,
        hi: f64,
    },
}

impl std::fmt::Display for HermlinError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            HermlinError::NotHermitian { max_asymmetry } => {
                write!(
                    f,
                    "matrix is not Hermitian (max asymmetry {max_asymmetry:.3e})"
                )
            }
            HermlinError::NotSquare => write!(f, "matrix is not square"),
            HermlinError::Empty => write!(f, "matrix is empty"),
            HermlinError::NonFinite => write!(f, "matrix has non-finite entries"),
            HermlinError::NoConvergence { iterations } => {
                write!(
                    f,
                    "QL iteration did not converge within {iterations} sweeps"
                )
            }
            HermlinError::PairingFailure { gap } => {
                write!(f, "embedded eigenvalue pairing failed (gap {gap:.3e})")
            }
            HermlinError::BorderlineEigenvalue { value } => {
                write!(
                    f,
                    "eigenvalue {value:.3e} is borderline at the counting threshold"
                )
            }
            HermlinError::NoSignChange { f_lo, f_hi } => {
                write!(
                    f,
                    "no sign change across bracket (f(lo)={f_lo:.3e}, f(hi)={f_hi:.3e})"
                )
            }
            HermlinError::IterationCap { limit } => {
                write!(f, "root finder exceeded {limit} iterations")
            }
            HermlinError::BadBracket { lo, hi } => write!(f, "invalid bracket [{lo}, {hi}]"),
        }
    }
}

impl std::error::Error for HermlinError {}

/// Dense Hermitian matrix, row-major complex storage.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl HermitianMatrix {
    /// Build from row-major entries, enforcing Hermitian symmetry to within
    /// 1e-12 of the largest entry magnitude.
    pub fn from_rows(dim: usize, data: Vec<Complex64>) -> Result<Self, HermlinError> {
        if dim == 0 {
            return Err(HermlinError::Empty);
        }
        if data.len() != dim * dim {
            return Err(HermlinError::NotSquare);
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(HermlinError::NonFinite);
        }
        let scale = data
            .iter()
            .map(|z| z.norm())
            .fold(0.0f64, f64::max)
            .max(1e-300);
        let mut worst = 0.0f64;
        for i in 0..dim {
            for j in i..dim {
                let asym = (data[i * dim + j] - data[j * dim + i].conj()).norm();
                worst = worst.max(asym);
            }
        }
        if worst > 1e-12 * scale {
            return Err(HermlinError::NotHermitian {
                max_asymmetry: worst,
            });
        }
        Ok(HermitianMatrix { dim, data })
    }

    /// Build from entries known to be exactly Hermitian by construction.
    pub(crate) fn from_rows_unchecked(dim: usize, data: Vec<Complex64>) -> Self {
        debug_assert_eq!(data.len(), dim * dim);
        HermitianMatrix { dim, data }
    }

    pub fn from_real_rows(dim: usize, rows: &[f64]) -> Result<Self, HermlinError> {
        let data = rows.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        Self::from_rows(dim, data)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.dim + j]
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.entry(i, i).re).sum()
    }

    fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0f64, f64::max)
    }
}

/// General dense complex matrix (for the non-selfadjoint complexified probe).
#[derive(Debug, Clone)]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn from_rows(dim: usize, data: Vec<Complex64>) -> Result<Self, HermlinError> {
        if dim == 0 {
            return Err(HermlinError::Empty);
        }
        if data.len() != dim * dim {
            return Err(HermlinError::NotSquare);
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(HermlinError::NonFinite);
        }
        Ok(ComplexMatrix { dim, data })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.dim + j]
    }
}

// ---------------------------------------------------------------------------
// real symmetric kernel: Householder tridiagonalization + implicit-shift QL
// ---------------------------------------------------------------------------

/// Reduce a real symmetric matrix (row-major, destroyed) to tridiagonal form;
/// returns (diagonal, subdiagonal). Eigenvalues only, no vector accumulation.
fn householder_tridiagonalize(a: &mut [f64], n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut sub = vec![0.0; n.saturating_sub(1)];
    let mut v = vec![0.0; n];
    let mut p = vec![0.0; n];
    for col in 0..n.saturating_sub(2) {
        // Householder vector for A[col+1.., col]
        let mut norm2 = 0.0;
        for i in col + 1..n {
            norm2 += a[i * n + col] * a[i * n + col];
        }
        let x0 = a[(col + 1) * n + col];
        let norm = norm2.sqrt();
        if norm == 0.0 {
            sub[col] = 0.0;
            continue;
        }
        let alpha = if x0 >= 0.0 { -norm } else { norm };
        sub[col] = alpha;
        let mut vnorm2 = 0.0;
        for i in col + 1..n {
            let vi = if i == col + 1 {
                x0 - alpha
            } else {
                a[i * n + col]
            };
            v[i] = vi;
            vnorm2 += vi * vi;
        }
        if vnorm2 == 0.0 {
            continue;
        }
        let inv = 1.0 / vnorm2.sqrt();
        for item in v.iter_mut().take(n).skip(col + 1) {
            *item *= inv;
        }
        // u = A v on the trailing block, p = 2(u - (v'u) v); A -= v p' + p v'
        let mut vu = 0.0;
        for i in col + 1..n {
            let mut s = 0.0;
            for j in col + 1..n {
                s += a[i * n + j] * v[j];
            }
            p[i] = s;
            vu += v[i] * s;
        }
        for i in col + 1..n {
            p[i] = 2.0 * (p[i] - vu * v[i]);
        }
        for i in col + 1..n {
            for j in col + 1..n {
                a[i * n + j] -= v[i] * p[j] + p[i] * v[j];
            }
        }
        a[(col + 1) * n + col] = alpha;
    }
    if n >= 2 {
        sub[n - 2] = a[(n - 1) * n + (n - 2)];
    }
    let diag = (0..n).map(|i| a[i * n + i]).collect();
    (diag, sub)
}

/// Implicit-shift QL on a symmetric tridiagonal matrix; ascending eigenvalues.
fn tridiag_eigvals(mut d: Vec<f64>, mut e: Vec<f64>) -> Result<Vec<f64>, HermlinError> {
    let n = d.len();
    e.push(0.0);
    const MAX_SWEEPS: usize = 50;
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > MAX_SWEEPS {
                return Err(HermlinError::NoConvergence {
                    iterations: MAX_SWEEPS,
                });
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let mut s = 1.0;
            let mut c = 1.0;
            let mut p = 0.0;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                if i == l {
                    d[l] -= p;
                    e[l] = g;
                    e[m] = 0.0;
                }
            }
        }
    }
    d.sort_by(|a, b| a.partial_cmp(b).expect("finite eigenvalues"));
    Ok(d)
}

fn real_symmetric_eigvals(a: &mut [f64], n: usize) -> Result<Vec<f64>, HermlinError> {
    let (d, e) = householder_tridiagonalize(a, n);
    tridiag_eigvals(d, e)
}

/// All eigenvalues of a Hermitian matrix, ascending, via the doubled real
/// symmetric embedding [[X, -Y], [Y, X]]. Deterministic for identical input.
pub fn eigvals_hermitian(m: &HermitianMatrix) -> Result<Vec<f64>, HermlinError> {
    let n = m.dim;
    let nn = 2 * n;
    let mut b = vec![0.0f64; nn * nn];
    for i in 0..n {
        for j in 0..n {
            let z = m.entry(i, j);
            b[i * nn + j] = z.re;
            b[i * nn + (n + j)] = -z.im;
            b[(n + i) * nn + j] = z.im;
            b[(n + i) * nn + (n + j)] = z.re;
        }
    }
    let doubled = real_symmetric_eigvals(&mut b, nn)?;
    // every eigenvalue appears exactly twice; deduplicate positionally
    let scale = doubled
        .iter()
        .fold(0.0f64, |acc, &x| acc.max(x.abs()))
        .max(1e-300);
    let mut out = Vec::with_capacity(n);
    for pair in doubled.chunks_exact(2) {
        let gap = (pair[1] - pair[0]).abs();
        if gap > 1e-9 * scale {
            return Err(HermlinError::PairingFailure { gap });
        }
        out.push(0.5 * (pair[0] + pair[1]));
    }
    Ok(out)
}

/// Result of [`negative_count`]: the strict count plus a flag marking
/// eigenvalues within 1e-12·‖M‖ of zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NegativeCount {
    pub count: usize,
    pub borderline: bool,
}

/// Number of eigenvalues strictly below zero.
pub fn negative_count(m: &HermitianMatrix) -> Result<NegativeCount, HermlinError> {
    let eigs = eigvals_hermitian(m)?;
    let scale = m.max_abs().max(1e-300);
    let count = eigs.iter().filter(|&&x| x < 0.0).count();
    let borderline = eigs.iter().any(|&x| x.abs() <= 1e-12 * scale);
    Ok(NegativeCount { count, borderline })
}

/// Strict verification-mode variant: borderline eigenvalues are an error.
pub fn negative_count_strict(m: &HermitianMatrix) -> Result<usize, HermlinError> {
    let nc = negative_count(m)?;
    if nc.borderline {
        let eigs = eigvals_hermitian(m)?;
        let v = eigs
            .iter()
            .copied()
            .min_by(|a, b| a.abs().partial_cmp(&b.abs()).expect("finite"))
            .unwrap_or(0.0);
        return Err(HermlinError::BorderlineEigenvalue { value: v });
    }
    Ok(nc.count)
}

/// Smallest singular value of a general complex square matrix, via the
/// eigenvalues of the Hermitian Gram form MᴴM.
pub fn smallest_singular_value(m: &ComplexMatrix) -> Result<f64, HermlinError> {
    let n = m.dim;
    let mut gram = vec![Complex64::new(0.0, 0.0); n * n];
    for i in 0..n {
        for j in i..n {
            let mut s = Complex64::new(0.0, 0.0);
            for k in 0..n {
                s += m.entry(k, i).conj() * m.entry(k, j);
            }
            gram[i * n + j] = s;
            gram[j * n + i] = s.conj();
        }
    }
    // force an exactly real diagonal
    for i in 0..n {
        gram[i * n + i] = Complex64::new(gram[i * n + i].re, 0.0);
    }
    let g = HermitianMatrix::from_rows_unchecked(n, gram);
    let eigs = eigvals_hermitian(&g)?;
    Ok(eigs[0].max(0.0).sqrt())
}

// ---------------------------------------------------------------------------
// bracketed root finding
// ---------------------------------------------------------------------------

/// A sign-change bracket for root finding.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bracket {
    lo: f64,
    hi: f64,
}

impl Bracket {
    pub fn new(lo: f64, hi: f64) -> Result<Self, HermlinError> {
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(HermlinError::BadBracket { lo, hi });
        }
        Ok(Bracket { lo, hi })
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }
}

const BRENT_MAX_ITER: usize = 200;

/// Brent's method on a bracketed sign change; converges when the bracket
/// width falls below `tol`. At most 200 iterations.
pub fn brent_root(
    mut f: impl FnMut(f64) -> f64,
    bracket: Bracket,
    tol: f64,
) -> Result<f64, HermlinError> {
    let (mut a, mut b) = (bracket.lo, bracket.hi);
    let mut fa = f(a);
    let mut fb = f(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(HermlinError::NoSignChange { f_lo: fa, f_hi: fb });
    }
    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut e = b - a;
    for _ in 0..BRENT_MAX_ITER {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = 2.0 * f64::EPSILON * b.abs() + 0.5 * tol;
        let xm = 0.5 * (c - b);
        if xm.abs() <= tol1 || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            // inverse quadratic / secant step
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                let qq = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * xm * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            let min1 = 3.0 * xm * q - (tol1 * q).abs();
            let min2 = (e * q).abs();
            if 2.0 * p < min1.min(min2) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        if d.abs() > tol1 {
            b += d;
        } else {
            b += tol1.copysign(xm);
        }
        fb = f(b);
        if fb == 0.0 {
            return Ok(b);
        }
    }
    Err(HermlinError::IterationCap {
        limit: BRENT_MAX_ITER,
    })
}

// ---------------------------------------------------------------------------
// banded Hermitian kernels (inertia, eigenvalue slicing, near-null vectors)
// ---------------------------------------------------------------------------

/// Hermitian matrix with small bandwidth: a real diagonal plus `half_bw`
/// complex superdiagonal bands.
#[derive(Debug, Clone)]
pub struct BandedHermitian {
    dim: usize,
    half_bw: usize,
    diag: Vec<f64>,
    /// bands[d-1][i] = entry (i, i+d), length dim-d
    bands: Vec<Vec<Complex64>>,
}

/// Inertia slice: number of eigenvalues strictly below the shift. When the
/// factorization met a pivot at the floor (the shift sits numerically on an
/// eigenvalue of a leading block), `borderline` is set and the count may be
/// off by that multiplicity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Inertia {
    pub below: usize,
    pub borderline: bool,
}

impl BandedHermitian {
    pub fn new(diag: Vec<f64>, bands: Vec<Vec<Complex64>>) -> Result<Self, HermlinError> {
        let dim = diag.len();
        if dim == 0 {
            return Err(HermlinError::Empty);
        }
        for (d, band) in bands.iter().enumerate() {
            if band.len() != dim - (d + 1) {
                return Err(HermlinError::NotSquare);
            }
        }
        if diag.iter().any(|x| !x.is_finite())
            || bands
                .iter()
                .flatten()
                .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(HermlinError::NonFinite);
        }
        let half_bw = bands.len();
        Ok(BandedHermitian {
            dim,
            half_bw,
            diag,
            bands,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn half_bandwidth(&self) -> usize {
        self.half_bw
    }

    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        if i == j {
            return Complex64::new(self.diag[i], 0.0);
        }
        let (lo, hi) = if i < j { (i, j) } else { (j, i) };
        let d = hi - lo;
        if d > self.half_bw {
            return Complex64::new(0.0, 0.0);
        }
        let v = self.bands[d - 1][lo];
        if i < j {
            v
        } else {
            v.conj()
        }
    }

    /// Densify for cross-checks against the dense path.
    pub fn to_dense(&self) -> HermitianMatrix {
        let n = self.dim;
        let mut data = vec![Complex64::new(0.0, 0.0); n * n];
        for i in 0..n {
            for j in 0..n {
                data[i * n + j] = self.entry(i, j);
            }
        }
        HermitianMatrix::from_rows_unchecked(n, data)
    }

    fn scale(&self) -> f64 {
        let d = self.diag.iter().fold(0.0f64, |m, &x| m.max(x.abs()));
        let b = self
            .bands
            .iter()
            .flatten()
            .fold(0.0f64, |m, z| m.max(z.norm()));
        d.max(b).max(1e-300)
    }

    /// Gershgorin enclosure of the spectrum.
    pub fn gershgorin(&self) -> (f64, f64) {
        let n = self.dim;
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let mut r = 0.0;
            for d in 1..=self.half_bw {
                if i + d < n {
                    r += self.bands[d - 1][i].norm();
                }
                if i >= d {
                    r += self.bands[d - 1][i - d].norm();
                }
            }
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        (lo, hi)
    }

    /// Number of eigenvalues strictly below `shift`, from the signs of the
    /// pivots of the LDL^H factorization of A - shift·I (Sylvester's law).
    /// Pivots at the floor are treated as negative and flagged borderline,
    /// so the count never fails; a borderline count may be off by the
    /// multiplicity sitting exactly on the shift.
    pub fn inertia_below(&self, shift: f64) -> Inertia {
        let n = self.dim;
        let b = self.half_bw;
        let pivmin = 1e-16 * (self.scale() + shift.abs());
        // l[i][d-1] = L(i, i-d); d[i] pivots
        let mut lrows: Vec<Vec<Complex64>> = vec![vec![Complex64::new(0.0, 0.0); b]; n];
        let mut piv = vec![0.0f64; n];
        let mut below = 0usize;
        let mut borderline = false;
        for j in 0..n {
            let start = j.saturating_sub(b);
            let mut dj = self.diag[j] - shift;
            for k in start..j {
                let ljk = lrows[j][j - k - 1];
                dj -= ljk.norm_sqr() * piv[k];
            }
            if dj.abs() < pivmin {
                dj = -pivmin;
                borderline = true;
            }
            piv[j] = dj;
            if dj < 0.0 {
                below += 1;
            }
            let iend = (j + b).min(n - 1);
            for i in j + 1..=iend {
                let mut aij = self.entry(i, j);
                let kstart = i.saturating_sub(b);
                for k in kstart..j {
                    let lik = lrows[i][i - k - 1];
                    let ljk = lrows[j][j - k - 1];
                    aij -= lik * ljk.conj() * piv[k];
                }
                lrows[i][i - j - 1] = aij / dj;
            }
        }
        Inertia { below, borderline }
    }

    /// The j-th smallest eigenvalue (0-based) by Sturm bisection on the
    /// inertia, to absolute tolerance `tol`.
    pub fn eigval_by_index(&self, j: usize, tol: f64) -> f64 {
        assert!(j < self.dim, "eigenvalue index out of range");
        let (mut lo, mut hi) = self.gershgorin();
        lo -= 1e-8;
        hi += 1e-8;
        let resolution = tol.max(1e-15 * self.scale());
        while hi - lo > resolution {
            let mid = 0.5 * (lo + hi);
            if self.inertia_below(mid).below > j {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Eigenvalue count in the half-open interval [lo, hi).
    pub fn count_in(&self, lo: f64, hi: f64) -> usize {
        let a = self.inertia_below(lo).below;
        let b = self.inertia_below(hi).below;
        b.saturating_sub(a)
    }

    /// Approximate null vector of A - shift·I by inverse iteration with a
    /// banded partially pivoted LU. Deterministic start vector; the phase is
    /// fixed so the largest-magnitude component is real positive.
    pub fn null_vector(&self, shift: f64) -> Vec<Complex64> {
        let lu = BandedLu::factor(self, shift);
        let n = self.dim;
        let mut v: Vec<Complex64> = (0..n)
            .map(|i| Complex64::new(1.0 + 1e-3 * (i as f64) / (n as f64), 0.0))
            .collect();
        normalize(&mut v);
        for _ in 0..3 {
            let mut w = v.clone();
            lu.solve(&mut w);
            normalize(&mut w);
            v = w;
        }
        // deterministic phase: rotate the largest entry to the positive real axis
        let mut best = 0usize;
        for i in 1..n {
            if v[i].norm_sqr() > v[best].norm_sqr() {
                best = i;
            }
        }
        let phase = v[best] / v[best].norm();
        for z in v.iter_mut() {
            *z /= phase;
        }
        v
    }

    /// Solve (A - shift·I) x = rhs through the banded LU (test hook).
    #[cfg(test)]
    pub(crate) fn solve_shifted(&self, shift: f64, rhs: &[Complex64]) -> Vec<Complex64> {
        let lu = BandedLu::factor(self, shift);
        let mut x = rhs.to_vec();
        lu.solve(&mut x);
        x
    }

    /// Residual ‖(A - shift)v‖₂ for a unit vector v.
    pub fn residual(&self, shift: f64, v: &[Complex64]) -> f64 {
        let n = self.dim;
        let mut acc = 0.0;
        for i in 0..n {
            let mut s = Complex64::new(
                (self.diag[i] - shift) * v[i].re,
                (self.diag[i] - shift) * v[i].im,
            );
            for d in 1..=self.half_bw {
                if i + d < n {
                    s += self.bands[d - 1][i] * v[i + d];
                }
                if i >= d {
                    s += self.bands[d - 1][i - d].conj() * v[i - d];
                }
            }
            acc += s.norm_sqr();
        }
        acc.sqrt()
    }
}

fn normalize(v: &mut [Complex64]) {
    let n2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
    let inv = 1.0 / n2.sqrt();
    for z in v.iter_mut() {
        *z *= inv;
    }
}

/// Banded LU with partial pivoting in LAPACK-style column band storage
/// (bandwidth b lower, 2b upper after fill).
struct BandedLu {
    dim: usize,
    b: usize,
    /// ab[(row_offset) * dim + col] with row_offset = 2b + i - j in [0, 3b]
    ab: Vec<Complex64>,
    /// pivots[j] = row swapped into position j at elimination step j; the
    /// factorization is L = P(0)·L(0)···P(n-1)·L(n-1) as in banded LAPACK,
    /// so the solver interleaves the swaps with the forward substitution
    pivots: Vec<usize>,
}

impl BandedLu {
    fn at(&self, i: usize, j: usize) -> Complex64 {
        self.ab[(2 * self.b + i - j) * self.dim + j]
    }

    fn at_mut(&mut self, i: usize, j: usize) -> &mut Complex64 {
        &mut self.ab[(2 * self.b + i - j) * self.dim + j]
    }

    fn factor(m: &BandedHermitian, shift: f64) -> Self {
        let n = m.dim;
        let b = m.half_bw.max(1);
        let width = 3 * b + 1;
        let mut lu = BandedLu {
            dim: n,
            b,
            ab: vec![Complex64::new(0.0, 0.0); width * n],
            pivots: (0..n).collect(),
        };
        for j in 0..n {
            let ilo = j.saturating_sub(b);
            let ihi = (j + b).min(n - 1);
            for i in ilo..=ihi {
                let mut v = m.entry(i, j);
                if i == j {
                    v -= Complex64::new(shift, 0.0);
                }
                *lu.at_mut(i, j) = v;
            }
        }
        let clamp = 1e-280_f64.max(1e-16 * (m.scale() + shift.abs()));
        for j in 0..n {
            let ihi = (j + b).min(n - 1);
            let mut p = j;
            let mut pmag = lu.at(j, j).norm();
            for i in j + 1..=ihi {
                let mag = lu.at(i, j).norm();
                if mag > pmag {
                    p = i;
                    pmag = mag;
                }
            }
            lu.pivots[j] = p;
            if p != j {
                // swap only the active part of the rows; the L region stays
                // attached to its position, which the solver accounts for by
                // replaying the swaps during forward substitution
                let chi = (j + 2 * b).min(n - 1);
                for c in j..=chi {
                    let a = lu.at(p, c);
                    let bb = lu.at(j, c);
                    *lu.at_mut(p, c) = bb;
                    *lu.at_mut(j, c) = a;
                }
            }
            let mut pivot = lu.at(j, j);
            if pivot.norm() < clamp {
                // keep the factorization usable for inverse iteration
                pivot = if pivot.norm() == 0.0 {
                    Complex64::new(clamp, 0.0)
                } else {
                    pivot * (clamp / pivot.norm())
                };
                *lu.at_mut(j, j) = pivot;
            }
            for i in j + 1..=ihi {
                let mult = lu.at(i, j) / pivot;
                *lu.at_mut(i, j) = mult;
                let chi = (j + 2 * b).min(n - 1);
                for c in j + 1..=chi {
                    let ajc = lu.at(j, c);
                    *lu.at_mut(i, c) -= mult * ajc;
                }
            }
        }
        lu
    }

    fn solve(&self, rhs: &mut [Complex64]) {
        let n = self.dim;
        let b = self.b;
        let mut x = rhs.to_vec();
        // forward substitution with the swaps interleaved, matching the
        // stored product form of L
        for j in 0..n {
            x.swap(j, self.pivots[j]);
            let ihi = (j + b).min(n - 1);
            let xj = x[j];
            for i in j + 1..=ihi {
                let l = self.at(i, j);
                x[i] -= l * xj;
            }
        }
        // back substitution with U
        for j in (0..n).rev() {
            let chi = (j + 2 * b).min(n - 1);
            let mut s = x[j];
            for c in j + 1..=chi {
                s -= self.at(j, c) * x[c];
            }
            x[j] = s / self.at(j, j);
        }
        rhs.copy_from_slice(&x);
    }
}
