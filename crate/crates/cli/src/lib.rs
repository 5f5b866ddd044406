//! Command-line front end: parses flags into a [`RunConfig`], runs one
//! subcommand against `sobstab-core` and writes a JSON or CSV report.
//!
//! Exit codes: 0 on success, 2 for invalid input, 3 when the numerics fail
//! to converge.

mod config;
mod render;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::Parser;
use serde::Deserialize;
use serde_json::{json, Value};
use thiserror::Error;

use sobstab_core::functionals::{
    stability_report_with, Coefficients, QuadratureSettings, SpectralFunction,
};
use sobstab_core::geometry::{critical_exponent, product_radius, Geometry};
use sobstab_core::hessian::{self, product_radius_spectrum, quartic_budget, MAX_CUTOFF};
use sobstab_core::optimizer::minimize_quotient_with;
use sobstab_core::stability::{scan_family, sharp_constant, EpsilonGrid, Family};
use sobstab_core::{GeometryKind, VERSION};

pub use config::{Cli, Command, CommandKind, Flags, GeometryArg, OutputFormat, RunConfig};

/// Radii of `radius-sweep`, as multiples of 1/√(d−2).
pub const SWEEP_FACTORS: [f64; 8] = [0.5, 0.7, 0.9, 1.0, 1.1, 1.3, 1.5, 2.0];

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Core(#[from] sobstab_core::Error),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed input {}: {source}", path.display())]
    Input {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) if e.is_numerical() => 3,
            _ => 2,
        }
    }
}

/// A finished computation, ready to be written in either format.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    /// The configuration as executed (geometry fields resolved).
    pub config: RunConfig,
    pub result: Value,
    pub csv: String,
}

impl Report {
    pub fn json(&self) -> Value {
        json!({
            "config": self.config,
            "version": VERSION,
            "result": self.result,
        })
    }

    pub fn render(&self) -> String {
        match self.config.output {
            OutputFormat::Json => {
                let mut s = serde_json::to_string_pretty(&self.json()).expect("finite JSON tree");
                s.push('\n');
                s
            }
            OutputFormat::Csv => self.csv.clone(),
        }
    }
}

/// Parses `argv` (program name first), runs it and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let (kind, flags) = cli.command.split();
    let config = RunConfig::new(kind, flags);
    match execute(&config).and_then(|report| emit(&report)) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn settings(config: &RunConfig) -> QuadratureSettings {
    QuadratureSettings {
        grid_cap: config.quad_cap,
    }
}

fn geometry(config: &RunConfig) -> Result<Geometry, CliError> {
    Ok(Geometry::new(config.geometry.into(), config.q, config.d)?)
}

fn validate(config: &RunConfig) -> Result<(), CliError> {
    if config.quad_cap < 512 {
        return Err(CliError::Invalid(format!(
            "--quad-cap {} is below the smallest usable grid 512",
            config.quad_cap
        )));
    }
    if config.cutoff > MAX_CUTOFF {
        return Err(CliError::Invalid(format!(
            "--cutoff {} exceeds {MAX_CUTOFF}",
            config.cutoff
        )));
    }
    Ok(())
}

/// Runs the subcommand described by `config` without writing anything.
pub fn execute(config: &RunConfig) -> Result<Report, CliError> {
    validate(config)?;
    let mut config = config.clone();
    let (result, csv) = match config.subcommand {
        CommandKind::Eval => {
            let (g, u) = read_input(&config)?;
            config.geometry = g.kind.into();
            config.q = g.q;
            if let Some(d) = g.d {
                config.d = d;
            }
            let r = stability_report_with(&u, &settings(&config))?;
            (to_value(&r), render::deficit_csv(&r))
        }
        CommandKind::RadiusSweep => {
            let r0 = product_radius(config.d)?;
            let mut rows = Vec::new();
            for factor in SWEEP_FACTORS {
                let s = product_radius_spectrum(config.d, factor * r0, config.cutoff);
                rows.push(json!({
                    "factor": factor,
                    "radius": factor * r0,
                    "counts": s.counts,
                    "kernel_modes": s.kernel_modes,
                }));
            }
            let csv = render::sweep_csv(&rows);
            (
                json!({ "d": config.d, "standard_radius": r0, "sweep": rows }),
                csv,
            )
        }
        _ => {
            let g = geometry(&config)?;
            config.q = g.q;
            run_on_geometry(&config, &g)?
        }
    };
    Ok(Report {
        config,
        result,
        csv,
    })
}

fn run_on_geometry(config: &RunConfig, g: &Geometry) -> Result<(Value, String), CliError> {
    Ok(match config.subcommand {
        CommandKind::Constants => {
            let key = if g.kind == GeometryKind::Circle { "S" } else { "Y" };
            let mut m = serde_json::Map::new();
            m.insert("geometry".into(), to_value(&g.kind));
            m.insert("q".into(), json!(g.q));
            m.insert("d".into(), json!(g.d));
            m.insert(key.into(), json!(g.sobolev_constant));
            m.insert("mass".into(), json!(g.mass));
            m.insert("volume".into(), json!(g.volume));
            if let Some(d) = g.d {
                let crit = critical_exponent(d);
                m.insert("critical_exponent".into(), crit.is_finite().then_some(crit).into());
            }
            m.insert("sharp_constant".into(), json!(sharp_constant(g)));
            m.insert(
                "corrector_coefficient".into(),
                json!(hessian::corrector_coefficient(g)),
            );
            let csv = render::key_value_csv(&m);
            (Value::Object(m), csv)
        }
        CommandKind::Scan => {
            let grid = EpsilonGrid::new(config.eps_start, config.eps_factor, config.eps_count)?;
            let s = scan_family(g, Family::Extremal, &grid, &settings(config))?;
            (to_value(&s), render::scan_csv(&s))
        }
        CommandKind::Spectrum => {
            let s = hessian::spectrum(g, config.cutoff);
            let mut v = to_value(&s);
            v["kernel_dimension"] = json!(s.kernel_dimension());
            (v, render::spectrum_csv(&s))
        }
        CommandKind::Optimize => {
            let o = minimize_quotient_with(g, config.modes, config.restarts, config.seed, &settings(config))?;
            (to_value(&o), render::optimize_csv(&o))
        }
        CommandKind::Budget => {
            let b = quartic_budget(g);
            let mut v = to_value(&b);
            v["corrector_coefficient"] = json!(hessian::corrector_coefficient(g));
            v["sharp_constant"] = json!(sharp_constant(g));
            let csv = render::key_value_csv(v.as_object().expect("struct serializes to an object"));
            (v, csv)
        }
        CommandKind::Eval | CommandKind::RadiusSweep => unreachable!("handled by execute"),
    })
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report types serialize")
}

#[derive(Debug, Deserialize)]
struct InputGeometry {
    kind: GeometryKind,
    q: Option<f64>,
    d: Option<usize>,
}

#[derive(Debug, Deserialize)]
struct InputFile {
    geometry: InputGeometry,
    coefficients: Coefficients,
}

fn read_input(config: &RunConfig) -> Result<(Geometry, SpectralFunction), CliError> {
    let path = config
        .input
        .as_ref()
        .ok_or_else(|| CliError::Invalid("eval needs --input <path>".into()))?;
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.clone(),
        source,
    })?;
    let file: InputFile = serde_json::from_str(&text).map_err(|source| CliError::Input {
        path: path.clone(),
        source,
    })?;
    let kind = file.geometry.kind;
    let q = match (kind, file.geometry.q) {
        (GeometryKind::Product, q) => q.unwrap_or(f64::NAN),
        (_, Some(q)) => q,
        (_, None) => return Err(CliError::Invalid("input geometry needs \"q\"".into())),
    };
    let d = match (kind, file.geometry.d) {
        (GeometryKind::Circle, d) => d.unwrap_or(1),
        (_, Some(d)) => d,
        (_, None) => return Err(CliError::Invalid("input geometry needs \"d\"".into())),
    };
    let g = Geometry::new(kind, q, d)?;
    let u = SpectralFunction::new(g, file.coefficients)?;
    Ok((g, u))
}

fn emit(report: &Report) -> Result<(), CliError> {
    let text = report.render();
    match &report.config.output_path {
        Some(path) => write_atomically(path, text.as_bytes()),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|source| CliError::Io {
                    path: PathBuf::from("<stdout>"),
                    source,
                })
        }
    }
}

/// Writes to a temporary file next to `path`, then renames it into place.
fn write_atomically(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let io = |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(bytes).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(argv: &[&str]) -> RunConfig {
        let cli = Cli::try_parse_from(argv).unwrap();
        let (kind, flags) = cli.command.split();
        RunConfig::new(kind, flags)
    }

    #[test]
    fn constants_circle() {
        let r = execute(&config(&["sobstab", "constants", "--geometry", "circle", "--q", "4"])).unwrap();
        let s = r.result["S"].as_f64().unwrap();
        assert!((s - 19.739208802178716).abs() < 1e-12);
        let c = r.result["sharp_constant"].as_f64().unwrap();
        assert!((c - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn argv_round_trip() {
        let c = config(&[
            "sobstab", "scan", "--geometry", "sphere", "--d", "2", "--q", "3",
            "--eps-start", "0.07", "--eps-factor", "0.6", "--seed", "99",
        ]);
        let argv = c.to_argv();
        let again = config(&argv.iter().map(String::as_str).collect::<Vec<_>>());
        assert_eq!(c, again);
    }

    #[test]
    fn exit_code_mapping() {
        let numerical = CliError::Core(sobstab_core::Error::SearchDegenerate);
        assert_eq!(numerical.exit_code(), 3);
        assert_eq!(CliError::Invalid("x".into()).exit_code(), 2);
        assert_eq!(CliError::Core(sobstab_core::Error::DimensionTooSmall(2)).exit_code(), 2);
    }

    #[test]
    fn product_records_effective_exponent() {
        let r = execute(&config(&["sobstab", "budget", "--geometry", "product", "--d", "4"])).unwrap();
        assert_eq!(r.config.q, 4.0);
        let c = r.result["sharp_constant"].as_f64().unwrap();
        assert!((c - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn cutoff_is_validated() {
        let e = execute(&config(&["sobstab", "spectrum", "--cutoff", "65"])).unwrap_err();
        assert_eq!(e.exit_code(), 2);
    }
}
