//! Command-line front end for the leaky-wire spectral solver.
//!
//! Subcommands: `bands` (dispersion curves + gap report), `fiber` (one fixed
//! quasimomentum, discrete and embedded spectrum), `tvalues` (the grating
//! symbol in both representations), `modes` (field samples of one guided
//! mode), `verify` (the numerical self-check battery).
//!
//! Exit codes: 0 success, 1 invariant or solver failure, 2 configuration
//! error.

mod config;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use leakywire::band_sweep::{detect_gaps, refine, sweep, Model, SweepConfig};
use leakywire::fiber_grating::{
    discrete_spectrum_grating, GratingFiberQuery, GratingSymbolContext,
};
use leakywire::fiber_line::{
    discrete_spectrum, embedded_kernel_search, reconstruct_field, LineFiberQuery,
};
use leakywire::verify;

use config::{parse_config, RunConfig};

#[derive(Parser)]
#[command(
    name = "leakywire",
    version,
    about = "Guided-mode spectra of periodically modulated leaky wires"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sweep the Brillouin zone, refine and emit band CSV + gap-report JSON
    Bands {
        /// JSON run configuration
        #[arg(long)]
        config: PathBuf,
        /// worker threads (overrides the config; default auto)
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Discrete (and optionally embedded) spectrum at one quasimomentum
    Fiber {
        #[arg(long)]
        config: PathBuf,
        /// line-model quasimomentum
        #[arg(long, allow_hyphen_values = true)]
        k: Option<f64>,
        /// grating quasimomentum components
        #[arg(long, allow_hyphen_values = true)]
        k1: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        k2: Option<f64>,
        /// embedded search window "lo,hi" above the threshold (line model)
        #[arg(long, value_parser = parse_range)]
        window: Option<(f64, f64)>,
        /// output path (defaults to outputs.fiber_json or fiber.json)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Table of t(z,k2) in both representations with the discrepancy column
    Tvalues {
        /// single evaluation point z
        #[arg(long, allow_hyphen_values = true)]
        z: Option<f64>,
        /// range sweep "lo,hi" with --z-count points
        #[arg(long, value_parser = parse_range, allow_hyphen_values = true)]
        z_range: Option<(f64, f64)>,
        #[arg(long, default_value_t = 50)]
        z_count: usize,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        k2: f64,
        /// output CSV path (stdout when omitted)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Field samples of one guided mode on an (x, y) grid (line model)
    Modes {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        k: f64,
        /// band index (ascending, multiplicity-expanded)
        #[arg(long, default_value_t = 0)]
        band: usize,
        /// number of x samples over [-π, π)
        #[arg(long, default_value_t = 64)]
        x_count: usize,
        /// comma-separated |y| offsets
        #[arg(long, default_value = "0.25,0.5,1.0,2.0")]
        y: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the numerical self-verification battery
    Verify,
}

fn parse_range(s: &str) -> Result<(f64, f64), String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 2 {
        return Err("expected \"lo,hi\"".into());
    }
    let lo: f64 = parts[0].trim().parse().map_err(|e| format!("{e}"))?;
    let hi: f64 = parts[1].trim().parse().map_err(|e| format!("{e}"))?;
    Ok((lo, hi))
}

fn read_config(path: &Path) -> Result<RunConfig, ExitCode> {
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("config error: cannot read {}: {e}", path.display());
            return Err(ExitCode::from(2));
        }
    };
    parse_config(&text).map_err(|e| {
        eprintln!("{e}");
        ExitCode::from(2)
    })
}

fn write_artifact(path: &Path, contents: &str) -> Result<(), ExitCode> {
    if let Err(e) = std::fs::write(path, contents) {
        eprintln!("error: cannot write {}: {e}", path.display());
        return Err(ExitCode::from(1));
    }
    Ok(())
}

fn sweep_config(cfg: &RunConfig) -> Result<SweepConfig, ExitCode> {
    let ctx = GratingSymbolContext::new(256, 10_000, cfg.term_tol).map_err(|e| {
        eprintln!("config error: {e}");
        ExitCode::from(2)
    })?;
    Ok(SweepConfig {
        model: cfg.model,
        sigma: cfg.sigma.clone(),
        n_modes: cfg.truncation,
        lambda_tol: cfg.lambda_tol,
        threshold_margin: cfg.threshold_margin,
        ctx,
    })
}

fn output_path(cfg: &RunConfig, key: &str, fallback: &str) -> PathBuf {
    PathBuf::from(
        cfg.outputs
            .get(key)
            .cloned()
            .unwrap_or_else(|| fallback.to_string()),
    )
}

fn run_bands(config: &Path, threads: Option<usize>) -> ExitCode {
    let cfg = match read_config(config) {
        Ok(c) => c,
        Err(code) => return code,
    };
    let scfg = match sweep_config(&cfg) {
        Ok(s) => s,
        Err(code) => return code,
    };
    let threads = threads.or(cfg.threads);
    let compute = || -> Result<_, leakywire::band_sweep::SweepError> {
        let base = sweep(&scfg, &cfg.kset)?;
        let refined = refine(base)?;
        let report = detect_gaps(&refined)?;
        Ok((refined, report))
    };
    let result = match threads {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(n).build();
            match pool {
                Ok(p) => p.install(compute),
                Err(e) => {
                    eprintln!("error: thread pool: {e}");
                    return ExitCode::from(1);
                }
            }
        }
        None => compute(),
    };
    match result {
        Ok((refined, report)) => {
            let csv_path = output_path(&cfg, "bands_csv", "bands.csv");
            let json_path = output_path(&cfg, "gaps_json", "gaps.json");
            if let Err(code) = write_artifact(&csv_path, &output::bands_csv(&refined)) {
                return code;
            }
            if let Err(code) = write_artifact(&json_path, &output::gaps_json(&refined, &report)) {
                return code;
            }
            println!(
                "bands: {} k-points, {} curves -> {}, {}",
                refined.kpoints.len(),
                refined.curve_count(),
                csv_path.display(),
                json_path.display()
            );
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn run_fiber(
    config: &Path,
    k: Option<f64>,
    k1: Option<f64>,
    k2: Option<f64>,
    window: Option<(f64, f64)>,
    out: Option<PathBuf>,
) -> ExitCode {
    let cfg = match read_config(config) {
        Ok(c) => c,
        Err(code) => return code,
    };
    let out = out.unwrap_or_else(|| output_path(&cfg, "fiber_json", "fiber.json"));
    match cfg.model {
        Model::Line => {
            let Some(k) = k else {
                eprintln!("config error: the line model needs --k");
                return ExitCode::from(2);
            };
            let q = match LineFiberQuery::new(
                k,
                cfg.sigma.clone(),
                cfg.truncation,
                cfg.lambda_tol,
                cfg.threshold_margin,
            ) {
                Ok(q) => q,
                Err(e) => {
                    eprintln!("config error: {e}");
                    return ExitCode::from(2);
                }
            };
            let discrete = match discrete_spectrum(&q) {
                Ok(m) => m,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(1);
                }
            };
            let embedded = match window {
                Some(w) => match embedded_kernel_search(&q, w) {
                    Ok(m) => m,
                    Err(e) => {
                        eprintln!("error: {e}");
                        return ExitCode::from(1);
                    }
                },
                None => Vec::new(),
            };
            let doc = output::line_fiber_json(q.k(), q.threshold(), &discrete, &embedded);
            if let Err(code) = write_artifact(&out, &doc) {
                return code;
            }
            println!(
                "fiber: k = {}, {} discrete, {} embedded -> {}",
                q.k(),
                discrete.len(),
                embedded.len(),
                out.display()
            );
            ExitCode::SUCCESS
        }
        Model::Grating => {
            let (Some(k1), Some(k2)) = (k1, k2) else {
                eprintln!("config error: the grating model needs --k1 and --k2");
                return ExitCode::from(2);
            };
            if window.is_some() {
                eprintln!("config error: --window applies to the line model only");
                return ExitCode::from(2);
            }
            let ctx = match GratingSymbolContext::new(256, 10_000, cfg.term_tol) {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("config error: {e}");
                    return ExitCode::from(2);
                }
            };
            let q = match GratingFiberQuery::new(
                [k1, k2],
                cfg.sigma.clone(),
                cfg.truncation,
                cfg.lambda_tol,
                cfg.threshold_margin,
            ) {
                Ok(q) => q,
                Err(e) => {
                    eprintln!("config error: {e}");
                    return ExitCode::from(2);
                }
            };
            match discrete_spectrum_grating(&q, &ctx) {
                Ok(modes) => {
                    let doc = output::grating_fiber_json(q.k(), q.threshold(), &modes);
                    if let Err(code) = write_artifact(&out, &doc) {
                        return code;
                    }
                    println!(
                        "fiber: k = ({}, {}), {} discrete -> {}",
                        q.k()[0],
                        q.k()[1],
                        modes.len(),
                        out.display()
                    );
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(1)
                }
            }
        }
    }
}

fn run_tvalues(
    z: Option<f64>,
    z_range: Option<(f64, f64)>,
    z_count: usize,
    k2: f64,
    out: Option<PathBuf>,
) -> ExitCode {
    let ctx = GratingSymbolContext::standard();
    let zs: Vec<f64> = match (z, z_range) {
        (Some(z), None) => vec![z],
        (None, Some((lo, hi))) if z_count >= 2 && lo < hi => (0..z_count)
            .map(|i| lo + (hi - lo) * (i as f64) / ((z_count - 1) as f64))
            .collect(),
        (None, None) => {
            eprintln!("config error: tvalues needs --z or --z-range");
            return ExitCode::from(2);
        }
        _ => {
            eprintln!("config error: give either --z or a valid --z-range with --z-count >= 2");
            return ExitCode::from(2);
        }
    };
    let mut rows = Vec::with_capacity(zs.len());
    for z in zs {
        if z >= k2 * k2 {
            eprintln!(
                "config error: z = {z} is not below the threshold k2² = {}",
                k2 * k2
            );
            return ExitCode::from(2);
        }
        let ren = leakywire::fiber_grating::t_renormalized(z, k2, &ctx).ok();
        let img = if z < 0.0 {
            leakywire::fiber_grating::t_image(z, k2, &ctx).ok()
        } else {
            None
        };
        if ren.is_none() && img.is_none() {
            eprintln!("error: t(z,k2) undefined at z = {z}");
            return ExitCode::from(1);
        }
        rows.push((z, k2, ren, img));
    }
    let csv = output::tvalues_csv(&rows);
    match out {
        Some(path) => {
            if let Err(code) = write_artifact(&path, &csv) {
                return code;
            }
            println!("tvalues: {} rows -> {}", rows.len(), path.display());
        }
        None => print!("{csv}"),
    }
    ExitCode::SUCCESS
}

fn run_modes(
    config: &Path,
    k: f64,
    band: usize,
    x_count: usize,
    y_list: &str,
    out: Option<PathBuf>,
) -> ExitCode {
    let cfg = match read_config(config) {
        Ok(c) => c,
        Err(code) => return code,
    };
    if cfg.model != Model::Line {
        eprintln!("config error: the modes subcommand supports the line model");
        return ExitCode::from(2);
    }
    let ys: Vec<f64> = match y_list
        .split(',')
        .map(|s| s.trim().parse::<f64>())
        .collect::<Result<Vec<f64>, _>>()
    {
        Ok(v) if !v.is_empty() && v.iter().all(|&y| y != 0.0 && y.is_finite()) => v,
        _ => {
            eprintln!("config error: --y must be a comma-separated list of nonzero offsets");
            return ExitCode::from(2);
        }
    };
    if x_count == 0 {
        eprintln!("config error: --x-count must be positive");
        return ExitCode::from(2);
    }
    let q = match LineFiberQuery::new(
        k,
        cfg.sigma.clone(),
        cfg.truncation,
        cfg.lambda_tol,
        cfg.threshold_margin,
    ) {
        Ok(q) => q,
        Err(e) => {
            eprintln!("config error: {e}");
            return ExitCode::from(2);
        }
    };
    let modes = match discrete_spectrum(&q) {
        Ok(m) => m,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    // multiplicity-expanded band index
    let mut expanded = Vec::new();
    for m in &modes {
        for _ in 0..m.multiplicity {
            expanded.push(m);
        }
    }
    let Some(mode) = expanded.get(band) else {
        eprintln!(
            "config error: band index {band} out of range ({} bands at k = {})",
            expanded.len(),
            q.k()
        );
        return ExitCode::from(2);
    };
    let mut grid = Vec::with_capacity(x_count * ys.len());
    for &y in &ys {
        for i in 0..x_count {
            let x =
                -std::f64::consts::PI + 2.0 * std::f64::consts::PI * (i as f64) / (x_count as f64);
            grid.push((x, y));
        }
    }
    let field = match reconstruct_field(mode, &grid) {
        Ok(f) => f,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    let samples: Vec<(f64, f64, num_complex::Complex64)> = grid
        .iter()
        .zip(field)
        .map(|(&(x, y), u)| (x, y, u))
        .collect();
    let out = out.unwrap_or_else(|| output_path(&cfg, "modes_csv", "modes.csv"));
    if let Err(code) = write_artifact(&out, &output::modes_csv(&samples)) {
        return code;
    }
    println!(
        "modes: band {band} at k = {} (lambda = {}) -> {}",
        q.k(),
        mode.lambda,
        out.display()
    );
    ExitCode::SUCCESS
}

fn run_verify() -> ExitCode {
    println!("running the verification battery");
    let results = verify::run_all();
    let mut all_ok = true;
    for r in &results {
        let status = if r.passed { "PASS" } else { "FAIL" };
        println!(
            "[{status}] criterion {:>2}: {:<42} ({:>7.2} s)  {}",
            r.index, r.name, r.seconds, r.detail
        );
        all_ok &= r.passed;
    }
    if all_ok {
        println!("verify: all {} criteria passed", results.len());
        ExitCode::SUCCESS
    } else {
        let failed: Vec<usize> = results
            .iter()
            .filter(|r| !r.passed)
            .map(|r| r.index)
            .collect();
        println!("verify: FAILED criteria {failed:?}");
        ExitCode::from(1)
    }
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = Cli::parse();
    match cli.command {
        Command::Bands { config, threads } => run_bands(&config, threads),
        Command::Fiber {
            config,
            k,
            k1,
            k2,
            window,
            out,
        } => run_fiber(&config, k, k1, k2, window, out),
        Command::Tvalues {
            z,
            z_range,
            z_count,
            k2,
            out,
        } => run_tvalues(z, z_range, z_count, k2, out),
        Command::Modes {
            config,
            k,
            band,
            x_count,
            y,
            out,
        } => run_modes(&config, k, band, x_count, &y, out),
        Command::Verify => run_verify(),
    }
}
