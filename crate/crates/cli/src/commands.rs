use std::path::{Path, PathBuf};
use std::time::Instant;

use baker_core::ensemble::{DEFAULT_BINS, DEFAULT_BURN_IN};
use baker_core::exact::statistic_mode;
use baker_core::export::{
    db_csv, fr_csv, histogram_csv, marginal_csv, partial_sums_csv, pi_csv, surface_csv, sweep_csv,
    write_json, write_text, zeta_csv,
};
use baker_core::fluctuation::{variance_ratio, DEFAULT_MIN_COUNT};
use baker_core::selftest::run_selftest;
use baker_core::stats::chi_square_uniform;
use baker_core::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::Settings;
use crate::{CliError, Grid, Mode, Scheme, Source, Variant};

#[derive(Serialize)]
struct Manifest<'a> {
    command: &'a str,
    version: &'static str,
    seed: Option<u64>,
    config: &'a std::collections::BTreeMap<String, String>,
    artifacts: Vec<String>,
    wall_time_s: f64,
    summary: Value,
}

/// Artifacts written so far, plus the command summary for the manifest.
struct Run {
    out: PathBuf,
    artifacts: Vec<String>,
    summary: Value,
}

impl Run {
    fn text(&mut self, name: &str, body: &str) -> Result<(), CliError> {
        let path = self.out.join(name);
        write_text(&path, body)?;
        self.artifacts.push(path.display().to_string());
        Ok(())
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        let path = self.out.join(name);
        write_json(&path, value)?;
        self.artifacts.push(path.display().to_string());
        Ok(())
    }
}

/// Runs one command. A failure found after the artifacts are written (no
/// convergence, failed self-test) still produces the manifest.
pub fn run(name: &str, mut s: Settings, out: &Path) -> Result<(), CliError> {
    let start = Instant::now();
    let mut run = Run {
        out: out.to_path_buf(),
        artifacts: Vec::new(),
        summary: Value::Null,
    };
    let deferred = match name {
        "density" => density(&mut s, &mut run)?,
        "surface" => surface(&mut s, &mut run)?,
        "fr" => fr(&mut s, &mut run)?,
        "ratefunc" => ratefunc(&mut s, &mut run)?,
        "db" => db(&mut s, &mut run)?,
        "transport" => transport(&mut s, &mut run)?,
        "selftest" => selftest(&mut run)?,
        other => return Err(CliError::Usage(format!("unknown command {other}"))),
    };
    run.text("resolved.cfg", &s.resolved_text())?;
    let manifest_path = out.join("manifest.json");
    run.artifacts.push(manifest_path.display().to_string());
    let manifest = Manifest {
        command: name,
        version: env!("CARGO_PKG_VERSION"),
        seed: s.resolved().get("seed").and_then(|v| v.parse().ok()),
        config: s.resolved(),
        artifacts: run.artifacts.clone(),
        wall_time_s: start.elapsed().as_secs_f64(),
        summary: run.summary.clone(),
    };
    write_json(&manifest_path, &manifest)?;
    for a in &run.artifacts {
        println!("wrote {a}");
    }
    match deferred {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

type Outcome = Result<Option<CliError>, CliError>;

fn usage(e: Error) -> CliError {
    CliError::Usage(e.to_string())
}

/// Map parameters with the default strip `x̃ = ell`, `ε = 1/2 - ell`.
fn params(
    s: &mut Settings,
    default_ell: f64,
    default_q: impl Fn(f64) -> f64,
) -> Result<MapParams64, CliError> {
    let ell = s.get("ell", default_ell)?;
    if !(ell > 0.0 && ell <= 0.25) {
        return Err(CliError::Usage(format!("ell = {ell} outside (0, 1/4]")));
    }
    let q = s.get("q", default_q(ell))?;
    let strip_x = s.get("strip-x", ell)?;
    let strip_eps = s.get("strip-eps", 0.5 - ell)?;
    MapParams::with_strip(ell, q, strip_x, strip_eps).map_err(usage)
}

fn dissipative_q(ell: f64) -> f64 {
    0.5 - 2.0 * ell
}

fn variant(s: &mut Settings) -> Result<MapVariant, CliError> {
    Ok(match s.get("variant", Variant::Reversible)? {
        Variant::Reversible => MapVariant::ReversibleM,
        Variant::Irreversible => MapVariant::IrreversibleK,
    })
}

fn sim(s: &mut Settings, params: MapParams64, n_iter: usize) -> Result<SimConfig64, CliError> {
    let variant = variant(s)?;
    let n_ens = s.get("n-ens", 1000usize)?;
    let n_iter = s.get("n-iter", n_iter)?;
    let burn_in = s.get("burn-in", DEFAULT_BURN_IN)?;
    let seed = s.get("seed", 0u64)?;
    let cfg = SimConfig::new(params, variant)
        .with_sizes(n_ens, n_iter, burn_in)
        .with_seed(seed);
    cfg.validate().map_err(usage)?;
    Ok(cfg)
}

fn density(s: &mut Settings, run: &mut Run) -> Outcome {
    let params = params(s, 0.15, |_| 0.0)?;
    let cfg = sim(s, params, 1000)?;
    let bins = s.get("bins", DEFAULT_BINS)?;
    let h = empirical_density(&cfg, bins, bins).map_err(usage)?;
    run.text("histogram.csv", &histogram_csv(&h))?;
    run.text("x_marginal.csv", &marginal_csv(&h.x_density()))?;
    run.text("y_marginal.csv", &marginal_csv(&h.y_density()))?;
    let rho = stationary_density(params.ell())?;
    let y_test = chi_square_uniform(&h.y_counts(), 0.01);
    let sidecar = json!({
        "ell": params.ell(),
        "q": params.q(),
        "strip_x": params.strip_x(),
        "strip_eps": params.strip_eps(),
        "variant": format!("{:?}", cfg.variant),
        "seed": cfg.seed,
        "nx": h.nx,
        "ny": h.ny,
        "total": h.total,
        "normalization": "density = count * nx * ny / total",
        "projected_density": [rho.rho_l, rho.rho_r],
        "band_density": [h.x_band_density(0.0, 0.5), h.x_band_density(0.5, 1.0)],
        "y_uniform_chi_square": y_test,
    });
    run.json("density.json", &sidecar)?;
    run.summary = sidecar;
    Ok(None)
}

fn surface(s: &mut Settings, run: &mut Run) -> Outcome {
    let ells: Vec<f64> = match s.get_opt::<f64>("ell")? {
        Some(ell) => vec![ell],
        None => {
            let k = s.get("ell-points", 25usize)?;
            (1..=k).map(|i| 0.25 * i as f64 / k as f64).collect()
        }
    };
    let qs: Vec<f64> = match s.get_opt::<f64>("q")? {
        Some(q) => vec![q],
        None => {
            let k = s.get("q-points", 25usize)?;
            (0..k).map(|j| 0.5 * j as f64 / k as f64).collect()
        }
    };
    if ells.is_empty() || qs.is_empty() {
        return Err(CliError::Usage("empty (ell, q) grid".into()));
    }
    let mut rows = Vec::with_capacity(ells.len() * qs.len());
    for &ell in &ells {
        for &q in &qs {
            let p = MapParams::new(ell, q).map_err(usage)?;
            rows.push([ell, q, mean_lambda(&p)]);
        }
    }
    run.text("surface.csv", &surface_csv(&rows))?;
    let negative: Vec<[f64; 3]> = rows.iter().copied().filter(|r| r[2] < 0.0).collect();
    if !negative.is_empty() {
        eprintln!(
            "warning: {} grid cells with negative mean contraction rate",
            negative.len()
        );
    }
    run.summary = json!({
        "cells": rows.len(),
        "min": rows.iter().map(|r| r[2]).fold(f64::INFINITY, f64::min),
        "max": rows.iter().map(|r| r[2]).fold(f64::NEG_INFINITY, f64::max),
        "negative_cells": negative,
    });
    Ok(None)
}

/// π_n with the grid, axis and source recorded for the sidecar.
struct PiRun {
    pi: PiHistogram,
    mean_lambda: f64,
    params: MapParams64,
    dist: Option<EnDistribution>,
    grid: Grid,
    source: Source,
    seed: Option<u64>,
}

fn pi_run(s: &mut Settings) -> Result<PiRun, CliError> {
    let params = params(s, 0.15, dissipative_q)?;
    let n = s.get("n", 200usize)?;
    if n == 0 {
        return Err(CliError::Usage("n must be at least 1".into()));
    }
    let delta: f64 = s.get("delta", 0.05)?;
    let p_max: f64 = s.get("p-max", 4.0)?;
    let min_count = s.get("min-count", DEFAULT_MIN_COUNT)?;
    let source = s.get("source", Source::Mc)?;
    let requested = s.get("grid", Grid::Auto)?;
    let m = mean_lambda(&params);
    let axis = PiAxis::normalized(m).unwrap_or(PiAxis::Raw);
    let lattice = match statistic_mode(&params) {
        StatisticMode::Equilibrium => Some(params.lambda_local(Region::A).abs()),
        StatisticMode::Dissipative => Some(params.lambda_local(Region::B).abs()),
        StatisticMode::Generic => None,
    }
    .filter(|u| *u > 0.0);
    // Atom spacing on the binned axis, and the grid extent on that axis.
    let (unit, extent) = match axis {
        PiAxis::Raw => (lattice, lattice.map_or(p_max, |u| n as f64 * u)),
        PiAxis::Normalized { .. } => (lattice.map(|u| u / (n as f64 * m)), p_max),
    };
    let grid = match requested {
        Grid::Auto => match (unit, axis, source) {
            (Some(_), PiAxis::Raw, _) => Grid::Atoms,
            (Some(_), _, Source::Exact) => Grid::Paired,
            _ => Grid::Tiling,
        },
        g => g,
    };
    let config = match (grid, unit) {
        (Grid::Tiling, _) | (Grid::Auto, _) => FRConfig::tiling(n, 2.0 * delta, extent),
        (Grid::Atoms, Some(u)) => FRConfig::atom_resolved(n, u, extent),
        (Grid::Paired, Some(u)) => FRConfig::commensurate(n, u, 2.0 * delta, extent),
        (_, None) => {
            return Err(CliError::Usage(
                "atom grids need a lattice statistic (q = 0 or q = 1/2 - 2 ell)".into(),
            ))
        }
    }
    .map_err(usage)?
    .with_min_count(min_count);
    let (pi, dist, seed) = match source {
        Source::Exact => {
            let dist = exact_en_distribution(&params, n)?;
            let pi = estimate_pi(&config, PiSource::ExactDp(&dist), axis)?;
            (pi, Some(dist), None)
        }
        Source::Mc => {
            let cfg = sim(s, params, 1000 * n)?;
            if cfg.n_iter < n {
                return Err(CliError::Usage(format!(
                    "n-iter = {} is shorter than one segment",
                    cfg.n_iter
                )));
            }
            let sums = segment_sums(&cfg, n)?;
            (
                estimate_pi(&config, PiSource::MonteCarlo(&sums), axis)?,
                None,
                Some(cfg.seed),
            )
        }
    };
    Ok(PiRun {
        pi,
        mean_lambda: m,
        params,
        dist,
        grid,
        source,
        seed,
    })
}

fn pi_sidecar(r: &PiRun) -> Value {
    json!({
        "n": r.pi.n,
        "delta": r.pi.delta,
        "ell": r.params.ell(),
        "q": r.params.q(),
        "seed": r.seed,
        "source": r.source.to_string(),
        "grid": r.grid.to_string(),
        "axis": match r.pi.axis { PiAxis::Raw => "n_lambda_bar", PiAxis::Normalized { .. } => "e_n" },
        "mean_lambda": r.mean_lambda,
        "segments": r.pi.total,
    })
}

fn fr(s: &mut Settings, run: &mut Run) -> Outcome {
    let r = pi_run(s)?;
    run.text("pi.csv", &pi_csv(&r.pi))?;
    let check = fr_check(&r.pi, r.mean_lambda)?;
    run.text("fr.csv", &fr_csv(&check))?;
    let mut sidecar = pi_sidecar(&r);
    sidecar["slope"] = json!(check.slope);
    sidecar["slope_stderr"] = json!(check.slope_stderr);
    sidecar["points"] = json!(check.points);
    run.json("fr.json", &sidecar)?;
    println!(
        "fluctuation relation slope {:.6} ± {:.6}",
        check.slope, check.slope_stderr
    );
    run.summary = sidecar;
    Ok(None)
}

fn ratefunc(s: &mut Settings, run: &mut Run) -> Outcome {
    let r = pi_run(s)?;
    run.text("pi.csv", &pi_csv(&r.pi))?;
    let zeta = rate_function(&r.pi)?;
    run.text("zeta.csv", &zeta_csv(&zeta))?;
    let fit = fit_parabola(&zeta)?;
    let mut sidecar = pi_sidecar(&r);
    sidecar["fit"] = json!(fit);
    sidecar["convex"] = json!(zeta.is_convex(1e-9));
    sidecar["argmin"] = json!(zeta.argmin().map(|pt| pt.p));
    sidecar["variance_ratio"] = json!(r.dist.as_ref().map(variance_ratio));
    run.json("fit.json", &sidecar)?;
    println!("parabola a = {:.6e}, b = {:.6e}", fit.a, fit.b);
    run.summary = sidecar;
    Ok(None)
}

fn db(s: &mut Settings, run: &mut Run) -> Outcome {
    let ell = s.get("ell", 0.15)?;
    let q = s.get("q", 0.0)?;
    let params = MapParams::new(ell, q).map_err(usage)?;
    let scheme = match s.get("scheme", Scheme::Q4)? {
        Scheme::Q4 => ReversalScheme::Q4,
        Scheme::Q3 => ReversalScheme::Q3,
    };
    let report = db_report(&params, scheme);
    run.text("db.csv", &db_csv(&report))?;
    let sidecar = json!({
        "ell": ell,
        "q": q,
        "scheme": scheme.to_string(),
        "max_mismatch": report.max_mismatch,
    });
    run.json("db.json", &sidecar)?;
    println!("max mismatch {:e}", report.max_mismatch);
    run.summary = sidecar;
    Ok(None)
}

fn transport(s: &mut Settings, run: &mut Run) -> Outcome {
    let params = params(s, 0.25, dissipative_q)?;
    let variant = variant(s)?;
    let mode = match s.get("mode", Mode::Equilibrium)? {
        Mode::Equilibrium => EnsembleMode::MicrocanonicalEquilibrium,
        Mode::Stationary => EnsembleMode::Stationary,
    };
    let config = GKConfig {
        variant,
        n_ens: s.get("n-ens", 100_000usize)?,
        n_iter: s.get("n-iter", 50usize)?,
        burn_in: s.get("burn-in", DEFAULT_BURN_IN)?,
        seed: s.get("seed", 0u64)?,
        ..GKConfig::new(params, mode)
    };
    let biases = s.get_list("biases")?;
    let estimate = green_kubo_estimate(&config)?;
    let exact = green_kubo_exact(params.ell(), config.n_iter)?;
    run.text("partial_sums.csv", &partial_sums_csv(&estimate))?;
    run.text("exact_partial_sums.csv", &partial_sums_csv(&exact))?;
    let mut failures = Vec::new();
    if !estimate.converged {
        failures.push(format!(
            "estimate at ell = {} (drift {:.3e})",
            params.ell(),
            estimate.drift
        ));
    }
    let sweep = match &biases {
        Some(b) => {
            for &bias in b {
                ell_of_bias(bias).map_err(usage)?;
            }
            let rows = bias_sweep(b, &config)?;
            run.text("sweep.csv", &sweep_csv(&rows))?;
            for row in rows.iter().filter(|r| !r.converged) {
                failures.push(format!("sweep at bias {}", row.bias));
            }
            Some(rows)
        }
        None => None,
    };
    let sidecar = json!({
        "ell": params.ell(),
        "q": params.q(),
        "mode": format!("{mode:?}"),
        "variant": format!("{variant:?}"),
        "n_ens": config.n_ens,
        "n_iter": config.n_iter,
        "seed": config.seed,
        "l_value": estimate.l_value,
        "stderr": estimate.stderr,
        "drift": estimate.drift,
        "converged": estimate.converged,
        "exact_l_value": exact.l_value,
        "exact_gamma": exact.gamma,
        "exact_tail_bound": exact.tail_bound,
        "sweep": sweep,
    });
    run.json("transport.json", &sidecar)?;
    println!(
        "L = {:.6} ± {:.6} (coarse chain {:.6})",
        estimate.l_value, estimate.stderr, exact.l_value
    );
    run.summary = sidecar;
    Ok((!failures.is_empty())
        .then(|| CliError::Numeric(format!("not converged: {}", failures.join("; ")))))
}

fn selftest(run: &mut Run) -> Outcome {
    let checks = run_selftest();
    for c in &checks {
        println!(
            "{} {}: {}",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.detail
        );
    }
    run.json("selftest.json", &checks)?;
    let failed: Vec<&str> = checks
        .iter()
        .filter(|c| !c.passed)
        .map(|c| c.name.as_str())
        .collect();
    run.summary = json!({ "checks": checks.len(), "failed": failed });
    Ok((!failed.is_empty()).then(|| CliError::Selftest(failed.join("; "))))
}
