//! Deterministic CSV and JSON artifact writers.
//!
//! Floating values in CSV are serialized with 17 significant digits so that
//! identical runs produce byte-identical files regardless of thread count.

use serde::Serialize;

use leakywire::band_sweep::{BandStructure, GapReport, KSet, Model};
use leakywire::fiber_grating::GuidedMode as GratingMode;
use leakywire::fiber_line::GuidedMode as LineMode;

/// 17 significant digits, scientific.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Line model: k, band_index, lambda, threshold, flag.
/// Grating model: k1, k2, band_index, lambda, threshold, flag.
pub fn bands_csv(b: &BandStructure) -> String {
    let mut out = String::new();
    match b.model {
        Model::Line => out.push_str("k,band_index,lambda,threshold,flag\n"),
        Model::Grating => out.push_str("k1,k2,band_index,lambda,threshold,flag\n"),
    }
    for ki in 0..b.kpoints.len() {
        let prefix = match &b.kpoints {
            KSet::Line(v) => fmt_f64(v[ki]),
            KSet::Grating(v) => format!("{},{}", fmt_f64(v[ki][0]), fmt_f64(v[ki][1])),
        };
        for (band, point) in b.expanded(ki).iter().enumerate() {
            let flag = if point.near_threshold { 1 } else { 0 };
            out.push_str(&format!(
                "{prefix},{band},{},{},{flag}\n",
                fmt_f64(point.lambda),
                fmt_f64(b.thresholds[ki]),
            ));
        }
    }
    out
}

#[derive(Serialize)]
struct GapReportDoc {
    model: &'static str,
    union: Vec<[f64; 2]>,
    gaps: Vec<[f64; 2]>,
    converged: bool,
    n_modes: usize,
    k_count: usize,
}

pub fn gaps_json(b: &BandStructure, report: &GapReport) -> String {
    let doc = GapReportDoc {
        model: match b.model {
            Model::Line => "line",
            Model::Grating => "grating",
        },
        union: report.union.iter().map(|&(a, c)| [a, c]).collect(),
        gaps: report.gaps.iter().map(|&(a, c)| [a, c]).collect(),
        converged: report.converged,
        n_modes: b.n_modes,
        k_count: b.kpoints.len(),
    };
    serde_json::to_string_pretty(&doc).expect("serializable") + "\n"
}

#[derive(Serialize)]
struct CoeffDoc {
    n: i64,
    re: f64,
    im: f64,
}

#[derive(Serialize)]
struct ModeDoc {
    lambda: f64,
    multiplicity: usize,
    residual: f64,
    near_threshold: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    open_residual: Option<f64>,
    coeffs: Vec<CoeffDoc>,
}

#[derive(Serialize)]
struct FiberDoc {
    model: &'static str,
    k: Vec<f64>,
    threshold: f64,
    discrete: Vec<ModeDoc>,
    embedded: Vec<ModeDoc>,
}

fn line_mode_doc(m: &LineMode, embedded: bool) -> ModeDoc {
    ModeDoc {
        lambda: m.lambda,
        multiplicity: m.multiplicity,
        residual: m.residual,
        near_threshold: m.near_threshold,
        open_residual: if embedded {
            Some(m.open_residual)
        } else {
            None
        },
        coeffs: m
            .coeffs
            .iter()
            .map(|&(n, c)| CoeffDoc {
                n,
                re: c.re,
                im: c.im,
            })
            .collect(),
    }
}

pub fn line_fiber_json(
    k: f64,
    threshold: f64,
    discrete: &[LineMode],
    embedded: &[LineMode],
) -> String {
    let doc = FiberDoc {
        model: "line",
        k: vec![k],
        threshold,
        discrete: discrete.iter().map(|m| line_mode_doc(m, false)).collect(),
        embedded: embedded.iter().map(|m| line_mode_doc(m, true)).collect(),
    };
    serde_json::to_string_pretty(&doc).expect("serializable") + "\n"
}

pub fn grating_fiber_json(k: [f64; 2], threshold: f64, discrete: &[GratingMode]) -> String {
    let doc = FiberDoc {
        model: "grating",
        k: vec![k[0], k[1]],
        threshold,
        discrete: discrete
            .iter()
            .map(|m| ModeDoc {
                lambda: m.lambda,
                multiplicity: m.multiplicity,
                residual: m.residual,
                near_threshold: m.near_threshold,
                open_residual: None,
                coeffs: m
                    .coeffs
                    .iter()
                    .map(|&(n, c)| CoeffDoc {
                        n,
                        re: c.re,
                        im: c.im,
                    })
                    .collect(),
            })
            .collect(),
        embedded: Vec::new(),
    };
    serde_json::to_string_pretty(&doc).expect("serializable") + "\n"
}

/// Rows of the tvalues table: z, k2, both representations where defined,
/// and their discrepancy (empty cells where a representation is undefined).
pub fn tvalues_csv(rows: &[(f64, f64, Option<f64>, Option<f64>)]) -> String {
    let mut out = String::from("z,k2,t_renormalized,t_image,discrepancy\n");
    for &(z, k2, ren, img) in rows {
        let r = ren.map(fmt_f64).unwrap_or_default();
        let i = img.map(fmt_f64).unwrap_or_default();
        let d = match (ren, img) {
            (Some(a), Some(b)) => fmt_f64((a - b).abs()),
            _ => String::new(),
        };
        out.push_str(&format!("{},{},{r},{i},{d}\n", fmt_f64(z), fmt_f64(k2)));
    }
    out
}

/// Field samples of one guided mode: x, y, re(u), im(u), |u|.
pub fn modes_csv(samples: &[(f64, f64, num_complex::Complex64)]) -> String {
    let mut out = String::from("x,y,re_u,im_u,abs_u\n");
    for &(x, y, u) in samples {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            fmt_f64(x),
            fmt_f64(y),
            fmt_f64(u.re),
            fmt_f64(u.im),
            fmt_f64(u.norm()),
        ));
    }
    out
}
