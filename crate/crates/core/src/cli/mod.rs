//! Batch front-end: one JSON config in, reports, profiles and tables out.

pub mod config;
pub mod plot;

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::Parser;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{fmt17, load_profile_csv, save_profile_csv};
use crate::params::critical_exponent;
use crate::solvers::{
    a_star, concentration_study, critical_fiber_scan, excited_state, gn_battery, normalized_ground_state, sharp_gn,
    shoot_qp, SolveReport,
};

pub use config::{Command, Overrides, ParamsConfig, RunConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_NOT_CONVERGED: i32 = 2;

pub const REPORT_FILE: &str = "report.json";
pub const PROFILE_FILE: &str = "profile.csv";

#[derive(Debug, Parser)]
#[command(
    name = "qnls",
    about = "Normalized solutions of the quasilinear Schrödinger equation"
)]
pub struct Args {
    /// Run configuration (JSON).
    #[arg(long)]
    pub config: PathBuf,
    /// `key=value`, applied on top of the config; repeatable.
    #[arg(long = "override", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    #[arg(long)]
    pub quiet: bool,
}

/// How a run that produced its outputs ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Done,
    NotConverged,
}

impl Outcome {
    pub fn exit_code(self) -> i32 {
        match self {
            Outcome::Done => EXIT_OK,
            Outcome::NotConverged => EXIT_NOT_CONVERGED,
        }
    }
}

/// Exit status for a failed run: bad input is `1`, solver failure `2`.
pub fn error_exit_code(err: &Error) -> i32 {
    match err {
        Error::NoFiberRoot { .. }
        | Error::LeftCriticalSet
        | Error::ShootingBracket(_)
        | Error::MassNotMatched { .. }
        | Error::Integrator(_) => EXIT_NOT_CONVERGED,
        _ => EXIT_INVALID,
    }
}

pub fn main_with(args: Args) -> i32 {
    let result = RunConfig::load(&args.config, &args.overrides).and_then(|c| run_config(&c, args.quiet));
    match result {
        Ok(outcome) => outcome.exit_code(),
        Err(err) => {
            eprintln!("qnls: {err}");
            error_exit_code(&err)
        }
    }
}

struct Console {
    quiet: bool,
}

impl Console {
    fn line(&self, text: impl AsRef<str>) {
        if !self.quiet {
            println!("{}", text.as_ref());
        }
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}

fn write_csv(path: &Path, header: &str, rows: impl IntoIterator<Item = Vec<String>>) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = std::io::BufWriter::new(file);
    writeln!(out, "{header}").map_err(|e| Error::io(path, e))?;
    for row in rows {
        writeln!(out, "{}", row.join(",")).map_err(|e| Error::io(path, e))?;
    }
    out.flush().map_err(|e| Error::io(path, e))
}

#[derive(Serialize)]
struct QpJson {
    #[serde(rename = "N")]
    dim: usize,
    p: f64,
    beta: f64,
    support_radius: f64,
    l1_norm: f64,
    residual: f64,
    profile_path: String,
}

#[derive(Serialize)]
struct AstarJson {
    #[serde(rename = "N")]
    dim: usize,
    p: f64,
    a_star: f64,
}

#[derive(Serialize)]
struct GnJson {
    #[serde(rename = "N")]
    dim: usize,
    p: f64,
    sharp_constant: f64,
    fields: usize,
    max_ratio: f64,
    tolerance: f64,
    passed: bool,
}

/// Dispatches `config.command` and writes its outputs into the output
/// directory.
pub fn run_config(config: &RunConfig, quiet: bool) -> Result<Outcome> {
    let console = Console { quiet };
    let dir = config.output_dir()?;
    let dim = config.dim();
    let p_star = critical_exponent(dim);
    // Validation happens before anything is written.
    match config.command {
        Command::Solve => config.model_params(p_star, 1.0).validate()?,
        Command::Excited => config.model_params(p_star, 1.0).validate_excited()?,
        Command::Qp | Command::Gncheck => config.model_params(p_star, 1.0).validate()?,
        _ => {}
    }
    std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;

    match config.command {
        Command::Qp => {
            let p = config.params.p.expect("checked on load");
            let qp = shoot_qp(p, dim, &config.grid)?;
            save_profile_csv(&dir.join(PROFILE_FILE), &qp.profile)?;
            plot::profile_dat(&dir.join("profile.dat"), &qp.profile)?;
            write_json(
                &dir.join("qp.json"),
                &QpJson {
                    dim,
                    p,
                    beta: qp.beta,
                    support_radius: qp.support_radius,
                    l1_norm: qp.l1_norm,
                    residual: qp.residual(),
                    profile_path: PROFILE_FILE.into(),
                },
            )?;
            console.line(format!(
                "Q_p (N={dim}, p={p}): beta = {}, support = {}, ||Q||_1 = {}",
                qp.beta, qp.support_radius, qp.l1_norm
            ));
            Ok(Outcome::Done)
        }
        Command::Astar => {
            let value = a_star(dim)?;
            write_json(
                &dir.join("astar.json"),
                &AstarJson {
                    dim,
                    p: p_star,
                    a_star: value,
                },
            )?;
            console.line(format!("a_*(N={dim}) = {value}"));
            Ok(Outcome::Done)
        }
        Command::Solve => {
            let params = config.model_params(p_star, 1.0);
            let report = normalized_ground_state(&params, &config.ground_options()?)?;
            finish_report(&dir, &report, config, &console)
        }
        Command::Excited => {
            let params = config.model_params(p_star, 1.0);
            let k = config.k.expect("checked on load");
            let report = excited_state(&params, k, &config.grid)?;
            finish_report(&dir, &report, config, &console)
        }
        Command::ScanCritical => {
            let masses = match &config.masses {
                Some(m) => m.clone(),
                None => {
                    let a = a_star(dim)?;
                    let factors = config
                        .mass_factors
                        .clone()
                        .unwrap_or(config::DEFAULT_MASS_FACTORS.to_vec());
                    factors.iter().map(|f| f * a).collect()
                }
            };
            let rows = critical_fiber_scan(dim, &masses, &config.grid)?;
            write_csv(
                &dir.join("scan.csv"),
                "a,classification,inf_fiber_energy",
                rows.iter()
                    .map(|r| vec![fmt17(r.a), r.classification.as_str().into(), fmt17(r.inf_fiber_energy)]),
            )?;
            for r in &rows {
                console.line(format!(
                    "a = {}: {} (inf = {:e}, coefficient = {:e})",
                    r.a,
                    r.classification.as_str(),
                    r.inf_fiber_energy,
                    r.coefficient
                ));
            }
            Ok(Outcome::Done)
        }
        Command::Concentrate => {
            let offsets = config.offsets.clone().unwrap_or(config::DEFAULT_OFFSETS.to_vec());
            let mut options = config.ground_options()?;
            options.seed = None;
            let rows = concentration_study(dim, &offsets, &options, config.overrides.rescaling_constant)?;
            write_csv(
                &dir.join("concentration.csv"),
                "delta,a_n,eps_n,w_l1,dist_l1,dist_l2",
                rows.iter().map(|r| {
                    [r.delta, r.a_n, r.eps_n, r.w_l1, r.dist_l1, r.dist_l2]
                        .iter()
                        .map(|v| fmt17(*v))
                        .collect()
                }),
            )?;
            plot::concentration_dat(&dir.join("concentration.dat"), &rows)?;
            for r in &rows {
                console.line(format!(
                    "delta = {}: eps = {:e}, ||w||_1 = {}, L1 = {:e}, L2 = {:e}{}",
                    r.delta,
                    r.eps_n,
                    r.w_l1,
                    r.dist_l1,
                    r.dist_l2,
                    if r.converged { "" } else { " (not converged)" }
                ));
            }
            Ok(if rows.iter().all(|r| r.converged) {
                Outcome::Done
            } else {
                Outcome::NotConverged
            })
        }
        Command::Gncheck => {
            let p = config.params.p.expect("checked on load");
            let params = config.model_params(p, 1.0);
            let tolerance = config.overrides.gn_tolerance.unwrap_or(config::DEFAULT_GN_TOLERANCE);
            let ratios = match &config.seed_profile {
                Some(path) => {
                    let sharp = sharp_gn(p, dim, &crate::grid::GridConfig::default())?;
                    vec![crate::functionals::gn_functional_check(
                        &load_profile_csv(path, dim)?,
                        &params,
                        &sharp,
                    )?]
                }
                None => gn_battery(
                    dim,
                    p,
                    config.overrides.gn_fields.unwrap_or(config::DEFAULT_GN_FIELDS),
                    config.seed,
                )?,
            };
            write_csv(
                &dir.join("gncheck.csv"),
                "field,ratio",
                ratios.iter().enumerate().map(|(i, r)| vec![i.to_string(), fmt17(*r)]),
            )?;
            let max_ratio = ratios.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let passed = max_ratio <= 1.0 + tolerance;
            write_json(
                &dir.join("gncheck.json"),
                &GnJson {
                    dim,
                    p,
                    sharp_constant: sharp_gn(p, dim, &crate::grid::GridConfig::default())?.constant,
                    fields: ratios.len(),
                    max_ratio,
                    tolerance,
                    passed,
                },
            )?;
            console.line(format!("GN ratio over {} fields: max {max_ratio}", ratios.len()));
            Ok(if passed { Outcome::Done } else { Outcome::NotConverged })
        }
    }
}

fn finish_report(dir: &Path, report: &SolveReport, config: &RunConfig, console: &Console) -> Result<Outcome> {
    save_profile_csv(&dir.join(PROFILE_FILE), &report.profile)?;
    report.to_json(PROFILE_FILE).save(&dir.join(REPORT_FILE))?;
    plot::profile_dat(&dir.join("profile.dat"), &report.profile)?;
    let params = config.model_params(critical_exponent(config.dim()), 1.0).with_mu(0.0);
    let range = config.overrides.fiber_range.unwrap_or(config::DEFAULT_FIBER_RANGE);
    plot::fiber_dat(&dir.join("fiber.dat"), &report.profile, &params, range)?;
    if let Some(label) = report.label {
        console.line(format!("[{label}]"));
    }
    console.line(format!(
        "{}: energy = {}, lambda = {}, mass = {}, nodes = {}, pohozaev = {:e}, converged = {}",
        config.command.as_str(),
        report.energy,
        report.lambda,
        report.mass,
        report.node_count,
        report.pohozaev_residual,
        report.converged
    ));
    Ok(if report.converged {
        Outcome::Done
    } else {
        Outcome::NotConverged
    })
}
