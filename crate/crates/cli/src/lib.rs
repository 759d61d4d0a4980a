//! Command implementations behind the `xeit` binary: load a JSON experiment
//! config, dispatch the requested run, and write CSV/JSON results (plus
//! optional SVG plots) into an output directory.
//!
//! Every output directory also receives `config_echo.json` with the fully
//! resolved configuration, so emitted files always carry their provenance.
//! Runs are deterministic: identical configs produce byte-identical outputs.

pub mod svg;

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use thiserror::Error;
use xeit_core::config::{ExperimentConfig, Mode};
use xeit_core::propagation::{ComparisonOutput, FieldSnapshot, RunOutput};
use xeit_core::spectrum::{DipReport, SpectrumScan};
use xeit_core::{Error as CoreError, ErrorClass};

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("could not write {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("config declares mode '{found}' but the '{expected}' subcommand was invoked")]
    ModeMismatch { expected: &'static str, found: &'static str },
}

impl From<xeit_core::config::ConfigError> for CliError {
    fn from(e: xeit_core::config::ConfigError) -> Self {
        CliError::Core(e.into())
    }
}

impl CliError {
    /// Process exit code: 2 for configuration/validation problems, 3 for
    /// numerical failures.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) => match e.class() {
                ErrorClass::Configuration => 2,
                ErrorClass::Numerical => 3,
            },
            CliError::Io { .. } | CliError::ModeMismatch { .. } => 2,
        }
    }
}

/// Load the config, check its mode, run it, and write all outputs.
pub fn execute(
    mode: Mode,
    config_path: &Path,
    out_dir: &Path,
    plot: bool,
) -> Result<(), CliError> {
    let config = ExperimentConfig::from_path(config_path)?;
    if config.mode != mode {
        return Err(CliError::ModeMismatch {
            expected: mode.as_str(),
            found: config.mode.as_str(),
        });
    }
    fs::create_dir_all(out_dir).map_err(|source| CliError::Io {
        path: out_dir.to_path_buf(),
        source,
    })?;
    write_file(out_dir.join("config_echo.json"), &config_echo(&config))?;
    match mode {
        Mode::Spectrum => cmd_spectrum(&config, out_dir, plot),
        Mode::Store => cmd_store(&config, out_dir, plot),
        Mode::Propagate => cmd_propagate(&config, out_dir, plot),
    }
}

/// Reflectivity scan: writes `spectrum.csv`, `dip_report.json`, and
/// optionally `spectrum.svg`.
pub fn cmd_spectrum(
    config: &ExperimentConfig,
    out_dir: &Path,
    plot: bool,
) -> Result<(), CliError> {
    let params = config.cavity_params()?;
    let field = config.hyperfine_field()?;
    let scan_cfg = config.scan_config()?;
    let coupling = config
        .coupling_const_override()
        .unwrap_or_else(|| xeit_core::default_coupling_const(&params));
    let scan = xeit_core::scan_with(
        (scan_cfg.delta_min, scan_cfg.delta_max),
        scan_cfg.n_points,
        &params,
        &field,
        coupling,
    )
    .map_err(CoreError::from)?;

    write_file(out_dir.join("spectrum.csv"), &spectrum_csv(&scan))?;
    let report = xeit_core::analyze_dip(&scan).map_err(CoreError::from)?;
    write_file(out_dir.join("dip_report.json"), &dip_report_json(config, &report))?;

    if plot {
        let panel = svg::Panel {
            title: "Cavity reflectivity".into(),
            x_label: "detuning [gamma]".into(),
            y_label: "|r|^2".into(),
            series: vec![svg::Series {
                label: String::new(),
                points: scan
                    .detunings
                    .iter()
                    .zip(&scan.reflectivity)
                    .map(|(x, y)| (*x, *y))
                    .collect(),
            }],
        };
        write_file(out_dir.join("spectrum.svg"), &svg::render(&[panel]))?;
    }
    Ok(())
}

/// Storage experiment: writes `snapshots.csv`, `metrics.json`, and
/// optionally `waterfall.svg`.
pub fn cmd_store(config: &ExperimentConfig, out_dir: &Path, plot: bool) -> Result<(), CliError> {
    let out = xeit_core::run(config)?;
    report_warnings(&out.warnings);
    let grid = config.build_grid()?;
    write_file(out_dir.join("snapshots.csv"), &snapshots_csv(&out.snapshots, &grid))?;
    write_file(out_dir.join("metrics.json"), &metrics_json(config, &out))?;
    if plot {
        write_file(out_dir.join("waterfall.svg"), &waterfall_svg(&out.snapshots, &grid))?;
    }
    Ok(())
}

/// Two-solver comparison at constant splitting: writes both snapshot sets
/// and `agreement.json`, optionally `propagation.svg`.
pub fn cmd_propagate(
    config: &ExperimentConfig,
    out_dir: &Path,
    plot: bool,
) -> Result<(), CliError> {
    let out = xeit_core::propagate_comparison(config)?;
    report_warnings(&out.warnings);
    let grid = config.build_grid()?;
    write_file(
        out_dir.join("snapshots_polariton.csv"),
        &snapshots_csv(&out.sl_snapshots, &grid),
    )?;
    write_file(
        out_dir.join("snapshots_reference.csv"),
        &reference_csv(&out.upwind_snapshots, &grid),
    )?;
    write_file(out_dir.join("agreement.json"), &agreement_json(config, &out))?;
    if plot {
        let final_t = config.time_window()?.1;
        let mut series: Vec<svg::Series> = out
            .sl_snapshots
            .iter()
            .map(|snap| svg::Series {
                label: format!("t = {:.2} tau0", snap.t),
                points: snap
                    .omega
                    .iter()
                    .enumerate()
                    .map(|(i, o)| (grid.z(i), o.norm()))
                    .collect(),
            })
            .collect();
        series.push(svg::Series {
            label: format!("upwind, t = {final_t:.2} tau0"),
            points: out
                .upwind_final_omega
                .iter()
                .enumerate()
                .map(|(i, o)| (grid.z(i), o.norm()))
                .collect(),
        });
        let panel = svg::Panel {
            title: "Slow-light propagation".into(),
            x_label: "z [c tau0]".into(),
            y_label: "|Omega|".into(),
            series,
        };
        write_file(out_dir.join("propagation.svg"), &svg::render(&[panel]))?;
    }
    Ok(())
}

fn report_warnings(warnings: &[xeit_core::ScheduleIssue]) {
    for w in warnings {
        eprintln!("xeit: warning: {}", w.message);
    }
}

fn write_file(path: PathBuf, content: &str) -> Result<(), CliError> {
    let mut file = fs::File::create(&path).map_err(|source| CliError::Io {
        path: path.clone(),
        source,
    })?;
    file.write_all(content.as_bytes())
        .map_err(|source| CliError::Io { path, source })
}

fn config_echo(config: &ExperimentConfig) -> String {
    let mut text = serde_json::to_string_pretty(config).expect("config serializes");
    text.push('\n');
    text
}

fn spectrum_csv(scan: &SpectrumScan) -> String {
    let mut out = String::from("delta_gamma,re_r,im_r,reflectivity\n");
    for i in 0..scan.detunings.len() {
        let r = scan.reflectivity_amplitude[i];
        let _ = writeln!(
            out,
            "{:e},{:e},{:e},{:e}",
            scan.detunings[i], r.re, r.im, scan.reflectivity[i]
        );
    }
    out
}

fn snapshots_csv(snapshots: &[FieldSnapshot], grid: &xeit_core::Grid1D) -> String {
    let mut out = String::from("t_tau0,z_ctau0,re_psi,im_psi,abs_omega2,abs_matter2\n");
    for snap in snapshots {
        for (i, psi) in snap.psi.iter().enumerate() {
            let _ = writeln!(
                out,
                "{:e},{:e},{:e},{:e},{:e},{:e}",
                snap.t,
                grid.z(i),
                psi.re,
                psi.im,
                snap.omega_intensity[i],
                snap.matter[i].norm_sqr()
            );
        }
    }
    out
}

fn reference_csv(snapshots: &[(f64, Vec<Complex64>)], grid: &xeit_core::Grid1D) -> String {
    let mut out = String::from("t_tau0,z_ctau0,re_omega,im_omega\n");
    for (t, omega) in snapshots {
        for (i, o) in omega.iter().enumerate() {
            let _ = writeln!(out, "{:e},{:e},{:e},{:e}", t, grid.z(i), o.re, o.im);
        }
    }
    out
}

fn dip_report_json(config: &ExperimentConfig, report: &DipReport) -> String {
    let mut value = serde_json::json!({
        "dip_position": report.dip_position,
        "dip_depth": report.dip_depth,
        "flank_peaks": report.flank_peaks,
        "fwhm": report.fwhm,
        "cavity_detuning_gamma": config.cavity.delta_c,
    });
    if let Some(coeff) = config.angle_coeff_urad_per_gamma {
        // Optional incidence-angle labeling of the cavity detuning, relative
        // to the resonant angle.
        value["incidence_angle_offset_urad"] =
            serde_json::json!(coeff * config.cavity.delta_c);
    }
    value["config"] = serde_json::to_value(config).expect("config serializes");
    let mut text = serde_json::to_string_pretty(&value).expect("report serializes");
    text.push('\n');
    text
}

fn metrics_json(config: &ExperimentConfig, out: &RunOutput) -> String {
    let value = serde_json::json!({
        "retrieval_efficiency": out.metrics.retrieval_efficiency,
        "delay": out.metrics.delay,
        "phase_shift": out.metrics.phase_shift,
        "l2_shape_error": out.metrics.l2_shape_error,
        "config": serde_json::to_value(config).expect("config serializes"),
    });
    let mut text = serde_json::to_string_pretty(&value).expect("metrics serialize");
    text.push('\n');
    text
}

fn agreement_json(config: &ExperimentConfig, out: &ComparisonOutput) -> String {
    let value = serde_json::json!({
        "l2_distance": out.l2_distance,
        "fitted_velocity_polariton": out.sl_fitted_velocity,
        "fitted_velocity_upwind": out.upwind_fitted_velocity,
        "formula_velocity": out.formula_velocity,
        "upwind_cfl": out.upwind_cfl,
        "config": serde_json::to_value(config).expect("config serializes"),
    });
    let mut text = serde_json::to_string_pretty(&value).expect("agreement serializes");
    text.push('\n');
    text
}

fn waterfall_svg(snapshots: &[FieldSnapshot], grid: &xeit_core::Grid1D) -> String {
    let series_of = |selector: &dyn Fn(&FieldSnapshot, usize) -> f64| -> Vec<svg::Series> {
        snapshots
            .iter()
            .map(|snap| svg::Series {
                label: format!("t = {:.2} tau0", snap.t),
                points: (0..grid.n_points).map(|i| (grid.z(i), selector(snap, i))).collect(),
            })
            .collect()
    };
    let psi_panel = svg::Panel {
        title: "Polariton field |Psi|".into(),
        x_label: "z [c tau0]".into(),
        y_label: "|Psi|".into(),
        series: series_of(&|snap, i| snap.psi_intensity[i].sqrt()),
    };
    let omega_panel = svg::Panel {
        title: "Field part |Omega|".into(),
        x_label: "z [c tau0]".into(),
        y_label: "|Omega|".into(),
        series: series_of(&|snap, i| snap.omega_intensity[i].sqrt()),
    };
    svg::render(&[psi_panel, omega_panel])
}
