use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use sobstab_core::functionals::DEFAULT_GRID_CAP;
use sobstab_core::GeometryKind;

#[derive(Debug, Parser)]
#[command(name = "sobstab", version, about = "Deficits, spectra and quartic stability constants of Sobolev inequalities")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CommandKind {
    Constants,
    Eval,
    Scan,
    Spectrum,
    RadiusSweep,
    Optimize,
    Budget,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Derived constants of a geometry and its sharp stability constant
    Constants(Flags),
    /// Deficit report of a function read from --input
    Eval(Flags),
    /// ε-scan of the extremal family with exponent fit and extrapolation
    Scan(Flags),
    /// Spectrum of the linearized operator at the constants
    Spectrum(Flags),
    /// Product spectra across circle radii around 1/√(d−2)
    RadiusSweep(Flags),
    /// Multi-start simplex search for the smallest quotient
    Optimize(Flags),
    /// Fourth-order coefficient budget
    Budget(Flags),
}

impl Command {
    pub fn split(self) -> (CommandKind, Flags) {
        match self {
            Command::Constants(f) => (CommandKind::Constants, f),
            Command::Eval(f) => (CommandKind::Eval, f),
            Command::Scan(f) => (CommandKind::Scan, f),
            Command::Spectrum(f) => (CommandKind::Spectrum, f),
            Command::RadiusSweep(f) => (CommandKind::RadiusSweep, f),
            Command::Optimize(f) => (CommandKind::Optimize, f),
            Command::Budget(f) => (CommandKind::Budget, f),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GeometryArg {
    Circle,
    Sphere,
    Product,
}

impl From<GeometryArg> for GeometryKind {
    fn from(g: GeometryArg) -> Self {
        match g {
            GeometryArg::Circle => GeometryKind::Circle,
            GeometryArg::Sphere => GeometryKind::Sphere,
            GeometryArg::Product => GeometryKind::Product,
        }
    }
}

impl From<GeometryKind> for GeometryArg {
    fn from(g: GeometryKind) -> Self {
        match g {
            GeometryKind::Circle => GeometryArg::Circle,
            GeometryKind::Sphere => GeometryArg::Sphere,
            GeometryKind::Product => GeometryArg::Product,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Json,
    Csv,
}

/// Flags shared by every subcommand; each one reads what it needs.
#[derive(Debug, Clone, Args)]
pub struct Flags {
    #[arg(long, value_enum, default_value = "circle")]
    pub geometry: GeometryArg,
    /// Exponent (ignored on the product, where q = 2d/(d−2)).
    #[arg(long, default_value_t = 4.0)]
    pub q: f64,
    #[arg(long, default_value_t = 3)]
    pub d: usize,
    /// Fourier modes / zonal degrees searched by `optimize`.
    #[arg(long, default_value_t = 8)]
    pub modes: usize,
    #[arg(long, default_value_t = 16)]
    pub cutoff: usize,
    #[arg(long, default_value_t = 0.08)]
    pub eps_start: f64,
    #[arg(long, default_value_t = 0.5)]
    pub eps_factor: f64,
    #[arg(long, default_value_t = 5)]
    pub eps_count: usize,
    /// Largest uniform quadrature grid.
    #[arg(long, default_value_t = DEFAULT_GRID_CAP)]
    pub quad_cap: usize,
    #[arg(long, default_value_t = 16)]
    pub restarts: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "json")]
    pub output: OutputFormat,
    /// Write the report here (atomically) instead of standard output.
    #[arg(long)]
    pub output_path: Option<PathBuf>,
    /// Coefficient file for `eval`.
    #[arg(long)]
    pub input: Option<PathBuf>,
}

/// Everything that determines a run. Embedded in every JSON report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub subcommand: CommandKind,
    pub geometry: GeometryArg,
    pub q: f64,
    pub d: usize,
    pub modes: usize,
    pub cutoff: usize,
    pub eps_start: f64,
    pub eps_factor: f64,
    pub eps_count: usize,
    pub quad_cap: usize,
    pub restarts: usize,
    pub seed: u64,
    pub output: OutputFormat,
    pub output_path: Option<PathBuf>,
    pub input: Option<PathBuf>,
}

impl RunConfig {
    pub fn new(subcommand: CommandKind, f: Flags) -> Self {
        Self {
            subcommand,
            geometry: f.geometry,
            q: f.q,
            d: f.d,
            modes: f.modes,
            cutoff: f.cutoff,
            eps_start: f.eps_start,
            eps_factor: f.eps_factor,
            eps_count: f.eps_count,
            quad_cap: f.quad_cap,
            restarts: f.restarts,
            seed: f.seed,
            output: f.output,
            output_path: f.output_path,
            input: f.input,
        }
    }

    /// Command line that reproduces this run. Floats use Rust's shortest
    /// round-trip form, so they parse back to the same bits.
    pub fn to_argv(&self) -> Vec<String> {
        let sub = serde_json::to_value(self.subcommand).expect("unit variant");
        let geometry = serde_json::to_value(self.geometry).expect("unit variant");
        let output = serde_json::to_value(self.output).expect("unit variant");
        let mut argv = vec![
            "sobstab".to_string(),
            sub.as_str().unwrap_or_default().to_string(),
            format!("--geometry={}", geometry.as_str().unwrap_or_default()),
            format!("--q={:?}", self.q),
            format!("--d={}", self.d),
            format!("--modes={}", self.modes),
            format!("--cutoff={}", self.cutoff),
            format!("--eps-start={:?}", self.eps_start),
            format!("--eps-factor={:?}", self.eps_factor),
            format!("--eps-count={}", self.eps_count),
            format!("--quad-cap={}", self.quad_cap),
            format!("--restarts={}", self.restarts),
            format!("--seed={}", self.seed),
            format!("--output={}", output.as_str().unwrap_or_default()),
        ];
        if let Some(p) = &self.output_path {
            argv.push(format!("--output-path={}", p.display()));
        }
        if let Some(p) = &self.input {
            argv.push(format!("--input={}", p.display()));
        }
        argv
    }
}
