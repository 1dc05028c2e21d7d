//! Quasimomentum sweeps: dispersion curves over the Brillouin zone, the
//! threshold landscape, refinement, and the gap report for the full operator.
//!
//! The spectrum of the full operator is the union over k of the fiber
//! spectra, so a sweep solves one fiber problem per grid point (in parallel,
//! with a deterministic ordered reduction) and assembles the eigenvalues into
//! curves by sorted index. Curves of a self-adjoint analytic family may cross,
//! but the union and gap computation are invariant under relabeling.

use rayon::prelude::*;

use crate::coupling::CouplingFunction;
use crate::fiber_grating::{discrete_spectrum_grating, GratingFiberQuery, GratingSymbolContext};
use crate::fiber_line::{discrete_spectrum, FiberError, LineFiberQuery};

#[derive(Debug)]
pub enum SweepError {
    /// A fiber solve failed at the given grid point.
    Fiber {
        k_desc: String,
        source: FiberError,
    },
    /// detect_gaps needs a converged band structure.
    NotConverged,
    /// refine exhausted its doubling budget.
    RefinementStalled {
        movement: f64,
        doublings: usize,
    },
    InvalidGrid {
        reason: String,
    },
}

impl std::fmt::Display for SweepError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SweepError::Fiber { k_desc, source } => {
                write!(f, "fiber solve failed at k = {k_desc}: {source}")
            }
            SweepError::NotConverged => {
                write!(f, "band structure is not converged; run refine first")
            }
            SweepError::RefinementStalled {
                movement,
                doublings,
            } => write!(
                f,
                "refinement did not converge after {doublings} doublings (movement {movement:.3e})"
            ),
            SweepError::InvalidGrid { reason } => write!(f, "invalid k grid: {reason}"),
        }
    }
}

impl std::error::Error for SweepError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Model {
    Line,
    Grating,
}

/// Quasimomentum sample set: scalars for the line, pairs for the grating.
#[derive(Debug, Clone, PartialEq)]
pub enum KSet {
    Line(Vec<f64>),
    Grating(Vec<[f64; 2]>),
}

impl KSet {
    pub fn len(&self) -> usize {
        match self {
            KSet::Line(v) => v.len(),
            KSet::Grating(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn describe(&self, i: usize) -> String {
        match self {
            KSet::Line(v) => format!("{}", v[i]),
            KSet::Grating(v) => format!("({}, {})", v[i][0], v[i][1]),
        }
    }

    /// Insert midpoints between consecutive samples (count -> 2·count - 1).
    fn densify(&self) -> KSet {
        match self {
            KSet::Line(v) => {
                let mut out = Vec::with_capacity(2 * v.len() - 1);
                for w in v.windows(2) {
                    out.push(w[0]);
                    out.push(0.5 * (w[0] + w[1]));
                }
                out.push(*v.last().expect("non-empty grid"));
                KSet::Line(out)
            }
            KSet::Grating(v) => {
                let mut out = Vec::with_capacity(2 * v.len() - 1);
                for w in v.windows(2) {
                    out.push(w[0]);
                    out.push([0.5 * (w[0][0] + w[1][0]), 0.5 * (w[0][1] + w[1][1])]);
                }
                out.push(*v.last().expect("non-empty grid"));
                KSet::Grating(out)
            }
        }
    }
}

/// Uniform inclusive grid [-1/2, 1/2] with `count` points; odd counts hit
/// k = 0 and both zone edges, which carry the band extrema. The edge k = 1/2
/// is the same fiber as -1/2 after folding into Q.
pub fn line_grid(count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![0.0];
    }
    (0..count)
        .map(|i| -0.5 + (i as f64) / ((count - 1) as f64))
        .collect()
}

/// Inclusive product grid over [-1/2, 1/2]², row-major in k₂.
pub fn grating_grid(count1: usize, count2: usize) -> Vec<[f64; 2]> {
    let g1 = line_grid(count1);
    let g2 = line_grid(count2);
    let mut out = Vec::with_capacity(count1 * count2);
    for &a in &g1 {
        for &b in &g2 {
            out.push([a, b]);
        }
    }
    out
}

/// Piecewise-linear path through the given vertices with `count` samples.
pub fn grating_path(vertices: &[[f64; 2]], count: usize) -> Result<Vec<[f64; 2]>, SweepError> {
    if vertices.len() < 2 || count < 2 {
        return Err(SweepError::InvalidGrid {
            reason: "path needs at least two vertices and two samples".into(),
        });
    }
    let mut lengths = Vec::with_capacity(vertices.len() - 1);
    let mut total = 0.0;
    for w in vertices.windows(2) {
        let l = ((w[1][0] - w[0][0]).powi(2) + (w[1][1] - w[0][1]).powi(2)).sqrt();
        lengths.push(l);
        total += l;
    }
    if total == 0.0 {
        return Err(SweepError::InvalidGrid {
            reason: "degenerate path".into(),
        });
    }
    let mut out = Vec::with_capacity(count);
    for i in 0..count {
        let mut s = total * (i as f64) / ((count - 1) as f64);
        let mut seg = 0usize;
        while seg + 1 < lengths.len() && s > lengths[seg] {
            s -= lengths[seg];
            seg += 1;
        }
        let t = if lengths[seg] > 0.0 {
            s / lengths[seg]
        } else {
            0.0
        };
        let a = vertices[seg];
        let b = vertices[seg + 1];
        out.push([
            a[0] + t.min(1.0) * (b[0] - a[0]),
            a[1] + t.min(1.0) * (b[1] - a[1]),
        ]);
    }
    Ok(out)
}

/// Solver parameters shared by every fiber solve of a sweep.
#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub model: Model,
    pub sigma: CouplingFunction,
    pub n_modes: usize,
    pub lambda_tol: f64,
    pub threshold_margin: f64,
    pub ctx: GratingSymbolContext,
}

impl SweepConfig {
    pub fn line(sigma: CouplingFunction, n_modes: usize) -> Self {
        SweepConfig {
            model: Model::Line,
            sigma,
            n_modes,
            lambda_tol: 1e-9,
            threshold_margin: 1e-6,
            ctx: GratingSymbolContext::standard(),
        }
    }

    pub fn grating(sigma: CouplingFunction, n_modes: usize) -> Self {
        SweepConfig {
            model: Model::Grating,
            ..Self::line(sigma, n_modes)
        }
    }
}

/// One eigenvalue of one fiber, as carried by the band structure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandPoint {
    pub lambda: f64,
    pub multiplicity: usize,
    pub residual: f64,
    pub near_threshold: bool,
}

/// Dispersion curves over a quasimomentum grid plus the threshold landscape.
#[derive(Debug, Clone)]
pub struct BandStructure {
    pub model: Model,
    pub kpoints: KSet,
    /// per k-point: eigenvalues ascending (not multiplicity-expanded)
    pub spectra: Vec<Vec<BandPoint>>,
    /// per k-point: continuum threshold min τ(k)
    pub thresholds: Vec<f64>,
    pub n_modes: usize,
    pub converged: bool,
    config: SweepConfig,
}

impl BandStructure {
    /// Eigenvalues at grid point `ki`, expanded by multiplicity, ascending.
    pub fn expanded(&self, ki: usize) -> Vec<BandPoint> {
        let mut out = Vec::new();
        for p in &self.spectra[ki] {
            for _ in 0..p.multiplicity {
                out.push(*p);
            }
        }
        out
    }

    /// Largest multiplicity-expanded band count over the grid.
    pub fn curve_count(&self) -> usize {
        self.spectra
            .iter()
            .map(|s| s.iter().map(|p| p.multiplicity).sum::<usize>())
            .max()
            .unwrap_or(0)
    }

    /// Value of curve `band` at grid point `ki`, when present.
    pub fn curve_value(&self, band: usize, ki: usize) -> Option<f64> {
        self.expanded(ki).get(band).map(|p| p.lambda)
    }

    /// Mark as converged on external evidence (a resolution-stability
    /// comparison); `refine` sets the flag itself.
    pub fn into_converged(mut self) -> BandStructure {
        self.converged = true;
        self
    }

    pub fn config(&self) -> &SweepConfig {
        &self.config
    }
}

fn solve_line(cfg: &SweepConfig, k: f64) -> Result<Vec<BandPoint>, FiberError> {
    let q = LineFiberQuery::new(
        k,
        cfg.sigma.clone(),
        cfg.n_modes,
        cfg.lambda_tol,
        cfg.threshold_margin,
    )?;
    let modes = discrete_spectrum(&q)?;
    Ok(modes
        .into_iter()
        .map(|m| BandPoint {
            lambda: m.lambda,
            multiplicity: m.multiplicity,
            residual: m.residual,
            near_threshold: m.near_threshold,
        })
        .collect())
}

fn solve_grating(cfg: &SweepConfig, k: [f64; 2]) -> Result<Vec<BandPoint>, FiberError> {
    let q = GratingFiberQuery::new(
        k,
        cfg.sigma.clone(),
        cfg.n_modes,
        cfg.lambda_tol,
        cfg.threshold_margin,
    )?;
    let modes = discrete_spectrum_grating(&q, &cfg.ctx)?;
    Ok(modes
        .into_iter()
        .map(|m| BandPoint {
            lambda: m.lambda,
            multiplicity: m.multiplicity,
            residual: m.residual,
            near_threshold: m.near_threshold,
        })
        .collect())
}

/// Solve every fiber problem on the grid (concurrently; the reduction is an
/// ordered collect, so results are independent of scheduling) and assemble
/// the band structure. Any fiber failure aborts with the offending k.
pub fn sweep(cfg: &SweepConfig, kset: &KSet) -> Result<BandStructure, SweepError> {
    if kset.is_empty() {
        return Err(SweepError::InvalidGrid {
            reason: "empty k grid".into(),
        });
    }
    let results: Vec<Result<Vec<BandPoint>, FiberError>> = match (cfg.model, kset) {
        (Model::Line, KSet::Line(ks)) => ks.par_iter().map(|&k| solve_line(cfg, k)).collect(),
        (Model::Grating, KSet::Grating(ks)) => {
            ks.par_iter().map(|&k| solve_grating(cfg, k)).collect()
        }
        _ => {
            return Err(SweepError::InvalidGrid {
                reason: "grid dimensionality does not match the model".into(),
            })
        }
    };
    let mut spectra = Vec::with_capacity(results.len());
    for (i, r) in results.into_iter().enumerate() {
        match r {
            Ok(points) => spectra.push(points),
            Err(source) => {
                return Err(SweepError::Fiber {
                    k_desc: kset.describe(i),
                    source,
                })
            }
        }
    }
    let thresholds = match kset {
        KSet::Line(ks) => ks
            .iter()
            .map(|&k| {
                let kc = crate::fiber_line::canonical_quasimomentum(k);
                kc * kc
            })
            .collect(),
        KSet::Grating(ks) => ks
            .iter()
            .map(|k| {
                let k1 = crate::fiber_line::canonical_quasimomentum(k[0]);
                let k2 = crate::fiber_line::canonical_quasimomentum(k[1]);
                k1 * k1 + k2 * k2
            })
            .collect(),
    };
    Ok(BandStructure {
        model: cfg.model,
        kpoints: kset.clone(),
        spectra,
        thresholds,
        n_modes: cfg.n_modes,
        converged: false,
        config: cfg.clone(),
    })
}

/// Maximum curve movement between two band structures on the coarse grid
/// (the fine one contains the coarse points at even indices).
fn curve_movement(coarse: &BandStructure, fine: &BandStructure) -> f64 {
    let mut worst: f64 = 0.0;
    for ki in 0..coarse.kpoints.len() {
        let a = coarse.expanded(ki);
        let b = fine.expanded(2 * ki);
        for (pa, pb) in a.iter().zip(b.iter()) {
            if pa.near_threshold || pb.near_threshold {
                continue;
            }
            worst = worst.max((pa.lambda - pb.lambda).abs());
        }
    }
    worst
}

/// Double the truncation and the grid density until the maximum curve
/// movement drops below lambda_tol; at most 4 doublings. The returned band
/// structure carries the converged flag.
pub fn refine(b: BandStructure) -> Result<BandStructure, SweepError> {
    let mut current = b;
    let mut movement = f64::INFINITY;
    for _ in 0..4 {
        let mut cfg = current.config.clone();
        cfg.n_modes *= 2;
        let denser = current.kpoints.densify();
        let next = sweep(&cfg, &denser)?;
        movement = curve_movement(&current, &next);
        if movement <= current.config.lambda_tol.max(1e-12) {
            let mut done = next;
            done.converged = true;
            return Ok(done);
        }
        current = next;
    }
    Err(SweepError::RefinementStalled {
        movement,
        doublings: 4,
    })
}

/// The computed negative spectrum of the full operator as disjoint closed
/// intervals, with the open gaps between them.
#[derive(Debug, Clone, PartialEq)]
pub struct GapReport {
    pub union: Vec<(f64, f64)>,
    pub gaps: Vec<(f64, f64)>,
    pub converged: bool,
}

/// Merge per-band intervals and report the gaps of the negative spectrum.
/// Requires a converged band structure.
pub fn detect_gaps(b: &BandStructure) -> Result<GapReport, SweepError> {
    if !b.converged {
        return Err(SweepError::NotConverged);
    }
    let bands = b.curve_count();
    let mut intervals: Vec<(f64, f64)> = Vec::new();
    for band in 0..bands {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for ki in 0..b.kpoints.len() {
            if let Some(v) = b.curve_value(band, ki) {
                lo = lo.min(v);
                hi = hi.max(v);
            }
        }
        // clip to the negative half-line for the gap report
        if lo < 0.0 {
            intervals.push((lo, hi.min(0.0)));
        }
    }
    intervals.sort_by(|a, b| a.partial_cmp(b).expect("finite intervals"));
    let mut union: Vec<(f64, f64)> = Vec::new();
    for iv in intervals {
        match union.last_mut() {
            Some(last) if iv.0 <= last.1 => last.1 = last.1.max(iv.1),
            _ => union.push(iv),
        }
    }
    let mut gaps = Vec::new();
    for w in union.windows(2) {
        gaps.push((w[0].1, w[1].0));
    }
    if let Some(last) = union.last() {
        if last.1 < 0.0 {
            gaps.push((last.1, 0.0));
        }
    }
    Ok(GapReport {
        union,
        gaps,
        converged: b.converged,
    })
}
