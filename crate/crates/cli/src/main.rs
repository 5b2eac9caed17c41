//! `hodgebench`: spectra, Reilly ledgers and eigenvalue-bound reports.
//!
//! Exit codes: 0 success, 1 usage or I/O error, 2 mesh validation failure,
//! 3 solver failure, 4 residual not decreasing across levels, 5 bound
//! violated.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use hodgebench::mesh::MeshError;
use hodgebench::reilly::ReillyError;
use hodgebench::spectrum::SpectrumError;
use thiserror::Error;

use config::{parse_levels, Command, RunConfig};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("io: {0}")]
    Io(String),
    #[error("mesh validation failed [{code}]: {0}", code = .0.code())]
    Mesh(MeshError),
    #[error("spectrum: {0}")]
    Spectrum(SpectrumError),
    #[error("reilly: {0}")]
    Reilly(ReillyError),
    #[error("bounds: {0}")]
    Bounds(hodgebench::bounds::BoundsError),
    #[error("{0} did not decrease across levels")]
    NotDecreasing(&'static str),
    #[error("bound violated: {}", .0.join("; "))]
    Violation(Vec<String>),
}

impl From<MeshError> for CliError {
    fn from(e: MeshError) -> Self {
        CliError::Mesh(e)
    }
}

impl From<SpectrumError> for CliError {
    fn from(e: SpectrumError) -> Self {
        CliError::Spectrum(e)
    }
}

impl From<ReillyError> for CliError {
    fn from(e: ReillyError) -> Self {
        match e {
            ReillyError::Mesh(m) => CliError::Mesh(m),
            ReillyError::Spectrum(s) => CliError::Spectrum(s),
            other => CliError::Reilly(other),
        }
    }
}

impl From<hodgebench::bounds::BoundsError> for CliError {
    fn from(e: hodgebench::bounds::BoundsError) -> Self {
        use hodgebench::bounds::BoundsError as B;
        match e {
            B::Mesh(m) => CliError::Mesh(m),
            B::Spectrum(s) => CliError::Spectrum(s),
            other => CliError::Bounds(other),
        }
    }
}

fn spectrum_code(e: &SpectrumError) -> u8 {
    match e {
        SpectrumError::NotConverged { .. } | SpectrumError::NotPositiveDefinite { .. } => 3,
        SpectrumError::NotASurface | SpectrumError::NonPositiveWeight { .. } => 2,
        _ => 1,
    }
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Io(_) | CliError::Reilly(_) | CliError::Bounds(_) => 1,
            CliError::Mesh(_) => 2,
            CliError::Spectrum(e) => spectrum_code(e),
            CliError::NotDecreasing(_) => 4,
            CliError::Violation(_) => 5,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "hodgebench", version, about = "Hodge spectra, Reilly ledgers and eigenvalue bounds on hypersurfaces")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Debug, Subcommand)]
enum Sub {
    /// Hodge-Laplacian spectrum of a closed surface mesh.
    Spectrum(Flags),
    /// Reilly-identity ledgers over refinement levels of a solid mesh.
    Reilly(Flags),
    /// Eigenvalue-bound verdicts on a suite or a single geometry.
    Bounds(Flags),
    /// Runs a JSON config file.
    Run {
        config: PathBuf,
    },
}

#[derive(Debug, Clone)]
struct Levels(Vec<usize>);

#[derive(Debug, Args)]
struct Flags {
    /// Geometry spec `name:param,...` (icosphere, ellipsoid, torus, ball, sphere).
    #[arg(long)]
    geometry: Option<String>,
    /// Mesh file (.off, .obj or .tet).
    #[arg(long)]
    mesh: Option<PathBuf>,
    /// Form degree.
    #[arg(long)]
    p: Option<usize>,
    /// Number of eigenvalues.
    #[arg(long, default_value_t = 10)]
    k: usize,
    /// Refinement levels: `A..B`, `A,B,...` or one level.
    #[arg(long, value_parser = |s: &str| parse_levels(s).map(Levels))]
    levels: Option<Levels>,
    /// Field for `reilly`: linear-x1, radial-sq, zero, or a built-in form or function.
    #[arg(long)]
    field: Option<String>,
    /// Boundary model for `reilly`: fitted, analytic or flat.
    #[arg(long, default_value = "fitted")]
    boundary: String,
    /// Eigen-solver tolerance, residual floor, or relative verdict tolerance.
    #[arg(long, allow_hyphen_values = true)]
    tol: Option<f64>,
    /// Output directory.
    #[arg(long, env = "HODGEBENCH_OUT", default_value = "hodgebench-out")]
    out: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Bounds suite: spheres or ellipsoids.
    #[arg(long)]
    suite: Option<String>,
    /// Restricts `bounds` to the named inequalities (repeatable).
    #[arg(long)]
    theorem: Vec<String>,
    /// Require the DEC residual to decrease strictly across levels.
    #[arg(long)]
    strict_dec: bool,
}

impl Flags {
    fn into_config(self, command: Command) -> RunConfig {
        RunConfig {
            command,
            geometry: self.geometry,
            mesh: self.mesh,
            p: self.p,
            k: self.k,
            levels: self.levels.map(|l| l.0).unwrap_or_default(),
            field: self.field,
            boundary: self.boundary,
            tol: self.tol,
            out: self.out,
            seed: self.seed,
            suite: self.suite,
            theorem: self.theorem,
            strict_dec: self.strict_dec,
        }
    }
}

fn load_config(path: &PathBuf) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

fn run(cli: Cli) -> Result<(), CliError> {
    let config = match cli.command {
        Sub::Spectrum(f) => f.into_config(Command::Spectrum),
        Sub::Reilly(f) => f.into_config(Command::Reilly),
        Sub::Bounds(f) => f.into_config(Command::Bounds),
        Sub::Run { config } => load_config(&config)?,
    };
    config.validate()?;
    match config.command {
        Command::Spectrum => commands::spectrum(&config),
        Command::Reilly => commands::reilly(&config),
        Command::Bounds => commands::bounds(&config),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_code_contract() {
        assert_eq!(CliError::Mesh(MeshError::WrongKind { expected: "solid" }).exit_code(), 2);
        let stalled = SpectrumError::NotConverged { basis: 10, residuals: vec![1.0] };
        assert_eq!(CliError::from(ReillyError::Spectrum(stalled)).exit_code(), 3);
        assert_eq!(CliError::from(ReillyError::Mesh(MeshError::Io("x".into()))).exit_code(), 2);
        assert_eq!(CliError::NotDecreasing("residual").exit_code(), 4);
        assert_eq!(CliError::Violation(vec!["main_lower_bound".into()]).exit_code(), 5);
        assert_eq!(CliError::Config("bad".into()).exit_code(), 1);
    }

    #[test]
    fn flags_parse_into_config() {
        let cli = Cli::try_parse_from([
            "hodgebench", "reilly", "--field", "radial-sq", "--levels", "1..3", "--out", "o", "--strict-dec",
        ])
        .unwrap();
        let Sub::Reilly(flags) = cli.command else { panic!("wrong subcommand") };
        let c = flags.into_config(Command::Reilly);
        assert_eq!(c.levels, vec![1, 2, 3]);
        assert!(c.strict_dec);
        assert_eq!(c.field.as_deref(), Some("radial-sq"));
        assert!(Cli::try_parse_from(["hodgebench", "bounds", "--levels", "x"]).is_err());
    }
}
