//! Command dispatch for the `heatbasis` binary: parse a JSON experiment
//! configuration, run it and emit CSV files plus a canonical config echo
//! into the output directory. Identical configurations produce
//! byte-identical outputs.

pub mod config;

use config::{CommandName, ExperimentConfig, ProbePoint};
use heatbasis::caloric::Field;
use heatbasis::dobasis;
use heatbasis::domain::SpacePoint;
use heatbasis::potentials::{green_identity, PotentialResolution};
use heatbasis::specialfn::{bessel_zero, ZeroKind};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid-config: {0}")]
    InvalidConfig(String),
    #[error("numerical: {0}")]
    Numerical(heatbasis::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl From<heatbasis::Error> for CliError {
    fn from(e: heatbasis::Error) -> Self {
        match e {
            heatbasis::Error::Io(io) => CliError::Io(io),
            other => CliError::Numerical(other),
        }
    }
}

impl CliError {
    /// Process exit status: 2 for configuration problems, 3 for numerical
    /// failures, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::InvalidConfig(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io(_) => 1,
        }
    }

    /// One-line machine-readable error record.
    pub fn machine_line(&self) -> String {
        let (kind, message) = match self {
            CliError::InvalidConfig(m) => ("invalid-config", m.clone()),
            CliError::Numerical(e) => ("numerical", e.to_string()),
            CliError::Io(e) => ("io", e.to_string()),
        };
        format!(
            "{{\"error\":{},\"message\":{}}}",
            serde_json::to_string(kind).unwrap(),
            serde_json::to_string(&message).unwrap()
        )
    }
}

/// Full-precision scientific notation (17 significant digits), enough to
/// round-trip any f64.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn point3(x: &[f64]) -> SpacePoint {
    let mut p = [0.0; 3];
    p[..x.len()].copy_from_slice(x);
    p
}

/// Load, validate and run one configuration. Returns the paths written.
/// `expected` guards against invoking a config under the wrong subcommand.
pub fn run(
    expected: Option<CommandName>,
    config_path: &Path,
    out_dir: &Path,
) -> Result<Vec<PathBuf>, CliError> {
    let text = std::fs::read_to_string(config_path)?;
    let config: ExperimentConfig =
        serde_json::from_str(&text).map_err(|e| CliError::InvalidConfig(e.to_string()))?;
    if let Some(expected) = expected {
        if expected != config.command() {
            return Err(CliError::InvalidConfig(format!(
                "config declares command {} but {} was invoked",
                config.command(),
                expected
            )));
        }
    }
    config.validate()?;
    std::fs::create_dir_all(out_dir)?;

    let mut written = Vec::new();
    // canonical echo: parsing the echo and re-running reproduces the outputs
    let echo_path = out_dir.join("config_echo.json");
    let echo = serde_json::to_string_pretty(&config)
        .map_err(|e| CliError::InvalidConfig(e.to_string()))?;
    std::fs::write(&echo_path, echo + "\n")?;
    written.push(echo_path);

    match &config {
        ExperimentConfig::BesselZeros(c) => {
            let mut csv = String::from("nu,m,kind,zero\n");
            for &nu in &c.orders {
                for &kind in &c.kinds {
                    for m in 1..=c.max_zero_index {
                        let zero = bessel_zero(nu, m, kind)?;
                        let kind_name = match kind {
                            ZeroKind::Function => "function",
                            ZeroKind::Derivative => "derivative",
                        };
                        writeln!(csv, "{},{m},{kind_name},{}", fmt_f64(nu), fmt_f64(zero))
                            .unwrap();
                    }
                }
            }
            written.push(write_file(out_dir, &c.output, &csv)?);
        }
        ExperimentConfig::GreenCheck(c) => {
            let res: PotentialResolution = c.resolution.clone().into();
            let mut csv = String::from("target,x1,x2,x3,t,u,reproduced,residual\n");
            for (idx, target) in c.targets.iter().enumerate() {
                for probe in &c.probes {
                    let x = point3(&probe.x);
                    let check = green_identity(target, &c.cylinder, &res, &x, probe.t)?;
                    writeln!(
                        csv,
                        "{idx},{},{},{},{},{},{},{}",
                        fmt_f64(x[0]),
                        fmt_f64(x[1]),
                        fmt_f64(x[2]),
                        fmt_f64(probe.t),
                        fmt_f64(check.target),
                        fmt_f64(check.reproduced),
                        fmt_f64(check.residual),
                    )
                    .unwrap();
                }
            }
            written.push(write_file(out_dir, &c.output, &csv)?);
        }
        ExperimentConfig::Basis(c) => {
            let dictionary = c.dictionary.build(&c.big)?;
            let pair = dobasis::build_gram_pair(
                dictionary,
                &c.omega,
                &c.big,
                c.spec_big,
                c.omega_resolution,
                c.big_resolution,
            )?;
            let basis = dobasis::double_orthogonal_basis(&pair, c.rel_tol)?;
            let mut mu_csv = String::from("nu,mu_nu\n");
            for (i, mu) in basis.mu().iter().enumerate() {
                writeln!(mu_csv, "{},{}", i + 1, fmt_f64(*mu)).unwrap();
            }
            written.push(write_file(out_dir, &c.eigenvalues_output, &mu_csv)?);

            let d = basis.diagnostics();
            let mut diag_csv = String::from("metric,value\n");
            writeln!(diag_csv, "dictionary_size,{}", pair.order()).unwrap();
            writeln!(diag_csv, "rank,{}", basis.rank()).unwrap();
            writeln!(diag_csv, "big_residual,{}", fmt_f64(d.big_residual)).unwrap();
            writeln!(diag_csv, "small_residual,{}", fmt_f64(d.small_residual)).unwrap();
            writeln!(
                diag_csv,
                "mu_max,{}",
                fmt_f64(basis.mu().first().copied().unwrap_or(0.0))
            )
            .unwrap();
            writeln!(
                diag_csv,
                "mu_min,{}",
                fmt_f64(basis.mu().last().copied().unwrap_or(0.0))
            )
            .unwrap();
            written.push(write_file(out_dir, &c.diagnostics_output, &diag_csv)?);
        }
        ExperimentConfig::Density(c) => {
            let curve = dobasis::density_experiment(&c.experiment)?;
            let mut csv = String::from("n,residual,residual_over_norm\n");
            for point in &curve {
                writeln!(
                    csv,
                    "{},{},{}",
                    point.dictionary_size,
                    fmt_f64(point.residual),
                    fmt_f64(point.residual_over_norm),
                )
                .unwrap();
            }
            written.push(write_file(out_dir, &c.output, &csv)?);
        }
        ExperimentConfig::Continue(c) => {
            let dictionary = c.dictionary.build(&c.big)?;
            let pair = dobasis::build_gram_pair(
                dictionary,
                &c.omega,
                &c.big,
                c.spec_big,
                c.omega_resolution,
                c.big_resolution,
            )?;
            let basis = dobasis::double_orthogonal_basis(&pair, c.rel_tol)?;
            let scale = probe_scale(&c.target, &c.probes);
            let mut csv = String::from("n_trunc,max_abs_error,max_rel_error\n");
            for &n_trunc in &c.truncation_sweep {
                if n_trunc > basis.rank() {
                    continue;
                }
                let continued = dobasis::continue_solution(&c.target, &basis, &pair, n_trunc)?;
                let mut worst = 0.0f64;
                for probe in &c.probes {
                    let x = point3(&probe.x);
                    let err = (continued.value(&x, probe.t) - c.target.value(&x, probe.t)).abs();
                    worst = worst.max(err);
                }
                writeln!(
                    csv,
                    "{n_trunc},{},{}",
                    fmt_f64(worst),
                    fmt_f64(worst / scale),
                )
                .unwrap();
            }
            written.push(write_file(out_dir, &c.output, &csv)?);
        }
    }
    Ok(written)
}

fn probe_scale(target: &dyn Field, probes: &[ProbePoint]) -> f64 {
    probes
        .iter()
        .map(|p| target.value(&point3(&p.x), p.t).abs())
        .fold(0.0f64, f64::max)
        .max(1e-300)
}

fn write_file(dir: &Path, name: &str, content: &str) -> Result<PathBuf, CliError> {
    let path = dir.join(name);
    std::fs::write(&path, content)?;
    Ok(path)
}
