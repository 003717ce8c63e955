//! Subcommand implementations.

use std::path::{Path, PathBuf};

use serde::Serialize;

use epsense_core::model::IDX_E0;
use epsense_core::{
    conditioned_populations, integrate_master, make_params, propagate_no_jump, run_ensemble,
    run_sensing_campaign, spectrum_sweep, CampaignReport, Density3, PureState2, SystemParams,
    TimeGrid,
};

use crate::config::RunConfig;
use crate::output::{open_out, write_text, CsvWriter};
use crate::svg::{self, Axes, Series, SeriesStyle};
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum OutFormat {
    Csv,
    Json,
}

fn params(cfg: &RunConfig) -> Result<SystemParams, CliError> {
    make_params(cfg.omega, cfg.kappa_q, cfg.kappa_p).map_err(CliError::config)
}

fn grid(cfg: &RunConfig) -> Result<TimeGrid, CliError> {
    TimeGrid::new(cfg.t0, cfg.t_max, cfg.n_points).map_err(CliError::config)
}

fn write_json<T: Serialize>(path: Option<&Path>, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Io(format!("serialization failed: {e}")))?;
    text.push('\n');
    write_text(path, &text)
}

/// `spectrum`: splitting and theoretical sensitivity over a coupling grid.
pub fn cmd_spectrum(
    cfg: &RunConfig,
    out: Option<&Path>,
    format: OutFormat,
) -> Result<(), CliError> {
    if cfg.n_omega < 1 || cfg.omega_max < cfg.omega_min || cfg.omega_min < 0.0 {
        return Err(CliError::Config("invalid omega grid".into()));
    }
    let p = params(cfg)?;
    let omegas: Vec<f64> = if cfg.n_omega == 1 {
        vec![cfg.omega_min]
    } else {
        (0..cfg.n_omega)
            .map(|k| {
                cfg.omega_min
                    + (cfg.omega_max - cfg.omega_min) * k as f64 / (cfg.n_omega - 1) as f64
            })
            .collect()
    };
    let rows = spectrum_sweep(&p, &omegas).map_err(CliError::config)?;
    match format {
        OutFormat::Json => write_json(out, &rows),
        OutFormat::Csv => {
            let w = open_out(out)?;
            let mut csv =
                CsvWriter::new(w, &["omega", "delta_omega", "re_E", "im_E", "S_theory"])?;
            for r in rows {
                csv.row(&[r.omega, r.delta_omega, r.re_e, r.im_e, r.s_theory.unwrap_or(f64::NAN)])?;
            }
            Ok(())
        }
    }
}

#[derive(Debug, Serialize)]
struct EvolveRow {
    t: f64,
    p_e0: f64,
    p_g1: f64,
    p_g0: f64,
    cond_p_e: f64,
    cond_p_g1: f64,
    survival: f64,
}

/// `evolve`: unconditioned Lindblad populations and conditioned no-jump
/// populations from |e,0>.
pub fn cmd_evolve(cfg: &RunConfig, out: Option<&Path>, format: OutFormat) -> Result<(), CliError> {
    let p = params(cfg)?;
    let g = grid(cfg)?;
    let rho_t = integrate_master(&p, &Density3::basis_state(IDX_E0), &g).map_err(CliError::config)?;
    let rows: Result<Vec<EvolveRow>, CliError> = rho_t
        .iter()
        .zip(g.times())
        .map(|(rho, t)| {
            let (p_g0, p_e0, p_g1) = rho.populations();
            let psi = propagate_no_jump(&p, &PureState2::excited(), t).map_err(CliError::config)?;
            let (cond_p_e, cond_p_g1) =
                conditioned_populations(&psi).map_err(CliError::config)?;
            Ok(EvolveRow { t, p_e0, p_g1, p_g0, cond_p_e, cond_p_g1, survival: psi.norm_sqr() })
        })
        .collect();
    let rows = rows?;
    match format {
        OutFormat::Json => write_json(out, &rows),
        OutFormat::Csv => {
            let w = open_out(out)?;
            let mut csv = CsvWriter::new(
                w,
                &["t", "p_e0", "p_g1", "p_g0", "cond_p_e", "cond_p_g1", "survival"],
            )?;
            for r in rows {
                csv.row(&[r.t, r.p_e0, r.p_g1, r.p_g0, r.cond_p_e, r.cond_p_g1, r.survival])?;
            }
            Ok(())
        }
    }
}

#[derive(Debug, Serialize)]
struct TrajPointSummary {
    t: f64,
    survival: f64,
    survival_theory: f64,
    z: f64,
}

#[derive(Debug, Serialize)]
struct TrajSummary {
    schema_version: u32,
    n_traj: u64,
    seed: u64,
    max_abs_z: f64,
    points: Vec<TrajPointSummary>,
}

/// `trajectories`: quantum-jump ensemble statistics (CSV) plus a JSON
/// summary with survival-vs-theory z-scores.
pub fn cmd_trajectories(
    cfg: &RunConfig,
    out: Option<&Path>,
    summary: Option<&Path>,
) -> Result<(), CliError> {
    if cfg.n_traj < 1 {
        return Err(CliError::Config("n_traj must be at least 1".into()));
    }
    let p = params(cfg)?;
    let g = grid(cfg)?;
    let stats = run_ensemble(&p, &g, cfg.n_traj, cfg.seed);

    let w = open_out(out)?;
    let mut csv = CsvWriter::new(
        w,
        &["t", "survival", "survival_theory", "cond_p_e", "cond_p_g1"],
    )?;
    let mut points = Vec::with_capacity(g.n_points);
    for (k, t) in g.times().into_iter().enumerate() {
        let theory = propagate_no_jump(&p, &PureState2::excited(), t)
            .map_err(CliError::config)?
            .norm_sqr();
        let emp = stats.survival_fraction[k];
        let sigma = (theory * (1.0 - theory) / cfg.n_traj as f64).sqrt();
        let z = if (emp - theory).abs() < 1e-15 {
            0.0
        } else if sigma > 0.0 {
            (emp - theory) / sigma
        } else {
            f64::INFINITY
        };
        points.push(TrajPointSummary { t, survival: emp, survival_theory: theory, z });
        csv.row(&[t, emp, theory, stats.conditioned_p_e[k], stats.conditioned_p_g1[k]])?;
    }
    let max_abs_z = points.iter().map(|p| p.z.abs()).fold(0.0, f64::max);
    let summary_doc = TrajSummary {
        schema_version: 1,
        n_traj: cfg.n_traj,
        seed: cfg.seed,
        max_abs_z,
        points,
    };
    let summary_path: Option<PathBuf> = summary
        .map(Path::to_path_buf)
        .or_else(|| out.map(|o| o.with_extension("summary.json")));
    if let Some(path) = summary_path {
        write_json(Some(&path), &summary_doc)?;
    }
    Ok(())
}

/// `sense`: full synthetic sensing campaign. Writes the JSON report,
/// optional CSV of (|dOmega/Omega_0|, S) points, and an optional log-log
/// SVG with fitted power-law lines.
pub fn cmd_sense(
    cfg: &RunConfig,
    out: Option<&Path>,
    csv_path: Option<&Path>,
    plot: bool,
) -> Result<(), CliError> {
    if cfg.rel_offsets.iter().any(|&x| x <= 0.0 || !x.is_finite()) {
        return Err(CliError::Config(
            "rel_offsets must be positive (the EP itself is excluded)".into(),
        ));
    }
    let p = params(cfg)?;
    let o0 = p.omega_ep();
    if o0 <= 0.0 {
        return Err(CliError::Config("balanced losses have no EP to probe".into()));
    }
    let mut omegas: Vec<f64> =
        cfg.rel_offsets.iter().rev().map(|x| o0 * (1.0 - x)).filter(|&w| w >= 0.0).collect();
    omegas.extend(cfg.rel_offsets.iter().map(|x| o0 * (1.0 + x)));
    let g = grid(cfg)?;
    let report = run_sensing_campaign(&omegas, &p, &g, cfg.shots, cfg.seed)
        .map_err(CliError::config)?;

    write_json(out, &report)?;

    if let Some(path) = csv_path {
        let w = open_out(Some(path))?;
        let mut csv = CsvWriter::new(w, &["rel_offset", "S", "delta_omega"])?;
        for pt in &report.points {
            csv.row(&[(pt.delta_omega / o0).abs(), pt.s, pt.delta_omega])?;
        }
    }

    if plot {
        let plot_path = out
            .map(|o| o.with_extension("svg"))
            .ok_or_else(|| CliError::Config("--plot requires --out".into()))?;
        write_sense_plot(&report, o0, &plot_path)?;
    }

    // non-convergence or a side that had points but no fit is a soft
    // failure: the report is complete, the exit code signals it
    let any_unconverged = report.points.iter().any(|pt| !pt.converged);
    let n_above = report.points.iter().filter(|pt| pt.delta_omega > 0.0).count();
    let n_below = report.points.iter().filter(|pt| pt.delta_omega < 0.0).count();
    let missing_above = n_above > 0 && report.power_law_above.is_none();
    let missing_below = n_below > 0 && report.power_law_below.is_none();
    if any_unconverged || missing_above || missing_below {
        return Err(CliError::Fit(format!(
            "campaign incomplete: unconverged={any_unconverged} missing_above={missing_above} missing_below={missing_below}"
        )));
    }
    Ok(())
}

fn write_sense_plot(
    report: &CampaignReport,
    omega_ep: f64,
    path: &Path,
) -> Result<(), CliError> {
    let mut series = Vec::new();
    for (name, above) in [("above EP", true), ("below EP", false)] {
        let pts: Vec<(f64, f64)> = report
            .points
            .iter()
            .filter(|pt| (pt.delta_omega > 0.0) == above && pt.converged)
            .map(|pt| ((pt.delta_omega / omega_ep).abs(), pt.s))
            .collect();
        if !pts.is_empty() {
            series.push(Series { name: name.into(), points: pts, style: SeriesStyle::Points });
        }
    }
    for (name, fit) in [
        ("fit above", &report.power_law_above),
        ("fit below", &report.power_law_below),
    ] {
        if let Some(f) = fit {
            let pts: Vec<(f64, f64)> = (0..=40)
                .map(|k| {
                    let x = 10f64.powf(-2.0 + 1.8 * k as f64 / 40.0);
                    (x, f.a * x.powf(f.b))
                })
                .collect();
            series.push(Series { name: name.into(), points: pts, style: SeriesStyle::Line });
        }
    }
    let svg = svg::render(
        &series,
        Axes { log_x: true, log_y: true },
        "|dOmega / Omega_0|",
        "S",
    )
    .ok_or_else(|| CliError::Config("nothing to plot".into()))?;
    write_text(Some(path), &svg)
}

/// `plot`: render selected CSV columns as an SVG chart.
pub fn cmd_plot(
    input: &Path,
    x_col: &str,
    y_cols: &[String],
    log_x: bool,
    log_y: bool,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let mut reader = csv::Reader::from_path(input)
        .map_err(|e| CliError::Config(format!("cannot read CSV {}: {e}", input.display())))?;
    let headers = reader
        .headers()
        .map_err(|e| CliError::Config(format!("malformed CSV: {e}")))?
        .clone();
    let col_index = |name: &str| -> Result<usize, CliError> {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| CliError::Config(format!("column `{name}` not found")))
    };
    let xi = col_index(x_col)?;
    let yis: Vec<usize> = y_cols.iter().map(|c| col_index(c)).collect::<Result<_, _>>()?;

    let mut series: Vec<Series> = y_cols
        .iter()
        .map(|c| Series { name: c.clone(), points: Vec::new(), style: SeriesStyle::Line })
        .collect();
    for record in reader.records() {
        let record = record.map_err(|e| CliError::Config(format!("malformed CSV: {e}")))?;
        let x: f64 = match record.get(xi).and_then(|s| s.parse().ok()) {
            Some(v) => v,
            None => continue,
        };
        for (s, &yi) in series.iter_mut().zip(&yis) {
            if let Some(y) = record.get(yi).and_then(|v| v.parse::<f64>().ok()) {
                s.points.push((x, y));
            }
        }
    }
    let svg = svg::render(&series, Axes { log_x, log_y }, x_col, &y_cols.join(", "))
        .ok_or_else(|| CliError::Config("no data rows to plot".into()))?;
    write_text(out, &svg)
}
