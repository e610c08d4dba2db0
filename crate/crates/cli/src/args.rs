use std::path::PathBuf;

use clap::{ArgGroup, Args, Parser, Subcommand};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(name = "vml", version, about = "Abelian and local nonabelian vortex moduli toolkit")]
pub struct Cli {
    /// Seed for randomized sweeps; echoed in every output.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Abelian vortex solver on a flat torus.
    Vortex {
        #[command(subcommand)]
        action: VortexAction,
    },
    /// Towers of Hecke modifications.
    Hecke {
        #[command(subcommand)]
        action: HeckeAction,
    },
    /// Partition strata of the symmetric product.
    Strata {
        #[command(subcommand)]
        action: StrataAction,
    },
    /// Fundamental group of the moduli space.
    Pi1 {
        #[command(subcommand)]
        action: Pi1Action,
    },
    /// Runs every acceptance check and writes one signed summary.
    ReportAll(ReportArgs),

    #[command(name = "vortex-solve", hide = true)]
    VortexSolve(VortexArgs),
    #[command(name = "hecke-build", hide = true)]
    HeckeBuild(HeckeArgs),
    #[command(name = "strata-enum", hide = true)]
    StrataEnum(StrataArgs),
    #[command(name = "pi1-moduli", hide = true)]
    Pi1Moduli(Pi1Args),
    #[command(name = "pi1-abelianize", hide = true)]
    Pi1Abelianize(AbelianizeArgs),
    #[command(name = "pi1-nogo", hide = true)]
    Pi1Nogo(Pi1Args),
}

#[derive(Debug, Subcommand)]
pub enum VortexAction {
    Solve(VortexArgs),
}

#[derive(Debug, Subcommand)]
pub enum HeckeAction {
    Build(HeckeArgs),
}

#[derive(Debug, Subcommand)]
pub enum StrataAction {
    Enum(StrataArgs),
}

#[derive(Debug, Subcommand)]
pub enum Pi1Action {
    Moduli(Pi1Args),
    Abelianize(AbelianizeArgs),
    Nogo(Pi1Args),
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct Output {
    /// Output JSON path; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
#[command(group(ArgGroup::new("shape").required(true).args(["torus", "periods", "volume"])))]
pub struct VortexArgs {
    /// Rectangular torus side lengths `L1,L2`.
    #[arg(long)]
    pub torus: Option<String>,
    /// General periods `a+bi,c+di`.
    #[arg(long)]
    pub periods: Option<String>,
    /// Square torus of the given area.
    #[arg(long)]
    pub volume: Option<f64>,
    /// Zeros of the Higgs field as `x+iy:m,...`; `:m` defaults to 1.
    #[arg(long, allow_hyphen_values = true)]
    pub points: String,
    #[arg(long, default_value_t = 1.0)]
    pub e: f64,
    #[arg(long, default_value_t = 1.0)]
    pub tau: f64,
    #[arg(long, default_value_t = vml_core::vortex::DEFAULT_TOL)]
    pub tol: f64,
    /// Samples along each period.
    #[arg(long, default_value_t = vml_core::vortex::DEFAULT_GRID)]
    pub grid: usize,
    #[arg(long, default_value_t = vml_core::vortex::DEFAULT_MAX_ITERS)]
    pub max_iters: usize,
    /// Directory receiving CSV dumps of h, v, |u|² and B.
    #[arg(long)]
    pub dump_fields: Option<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    pub output: Output,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct HeckeArgs {
    /// Rank of the trivial bundle being modified.
    #[arg(long)]
    pub n: usize,
    /// Tower datum JSON: `{"groups": [{"point": "a+bi", "hyperplanes": [[c0, ...], ...]}]}`.
    #[arg(long)]
    pub datum: PathBuf,
    #[command(flatten)]
    #[serde(flatten)]
    pub output: Output,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct StrataArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub d: i64,
    #[arg(long, default_value_t = 1)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub g: usize,
    #[command(flatten)]
    #[serde(flatten)]
    pub output: Output,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct Pi1Args {
    #[arg(long)]
    pub g: usize,
    #[arg(long)]
    pub n: usize,
    #[arg(long, allow_hyphen_values = true)]
    pub d: i64,
    #[command(flatten)]
    #[serde(flatten)]
    pub output: Output,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct AbelianizeArgs {
    /// Presentation JSON: `{"num_generators": k, "relators": [[1, 2, -1, -2], ...]}`.
    #[arg(long)]
    pub presentation: PathBuf,
    #[command(flatten)]
    #[serde(flatten)]
    pub output: Output,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ReportArgs {
    /// Grid used by the vortex criteria.
    #[arg(long, default_value_t = vml_core::vortex::DEFAULT_GRID)]
    pub grid: usize,
    #[command(flatten)]
    #[serde(flatten)]
    pub output: Output,
}

/// A parsed invocation with the nested and flat spellings unified.
#[derive(Debug, Clone)]
pub enum Task {
    VortexSolve(VortexArgs),
    HeckeBuild(HeckeArgs),
    StrataEnum(StrataArgs),
    Pi1Moduli(Pi1Args),
    Pi1Abelianize(AbelianizeArgs),
    Pi1Nogo(Pi1Args),
    ReportAll(ReportArgs),
}

impl From<Command> for Task {
    fn from(c: Command) -> Self {
        match c {
            Command::Vortex { action: VortexAction::Solve(a) } | Command::VortexSolve(a) => Task::VortexSolve(a),
            Command::Hecke { action: HeckeAction::Build(a) } | Command::HeckeBuild(a) => Task::HeckeBuild(a),
            Command::Strata { action: StrataAction::Enum(a) } | Command::StrataEnum(a) => Task::StrataEnum(a),
            Command::Pi1 { action: Pi1Action::Moduli(a) } | Command::Pi1Moduli(a) => Task::Pi1Moduli(a),
            Command::Pi1 { action: Pi1Action::Abelianize(a) } | Command::Pi1Abelianize(a) => Task::Pi1Abelianize(a),
            Command::Pi1 { action: Pi1Action::Nogo(a) } | Command::Pi1Nogo(a) => Task::Pi1Nogo(a),
            Command::ReportAll(a) => Task::ReportAll(a),
        }
    }
}

impl Task {
    pub fn name(&self) -> &'static str {
        match self {
            Task::VortexSolve(_) => "vortex-solve",
            Task::HeckeBuild(_) => "hecke-build",
            Task::StrataEnum(_) => "strata-enum",
            Task::Pi1Moduli(_) => "pi1-moduli",
            Task::Pi1Abelianize(_) => "pi1-abelianize",
            Task::Pi1Nogo(_) => "pi1-nogo",
            Task::ReportAll(_) => "report-all",
        }
    }

    pub fn output(&self) -> &Output {
        match self {
            Task::VortexSolve(a) => &a.output,
            Task::HeckeBuild(a) => &a.output,
            Task::StrataEnum(a) => &a.output,
            Task::Pi1Moduli(a) | Task::Pi1Nogo(a) => &a.output,
            Task::Pi1Abelianize(a) => &a.output,
            Task::ReportAll(a) => &a.output,
        }
    }

    /// Resolved parameters, defaults included, without the output path.
    pub fn parameters(&self) -> serde_json::Value {
        let mut v = match self {
            Task::VortexSolve(a) => serde_json::to_value(a),
            Task::HeckeBuild(a) => serde_json::to_value(a),
            Task::StrataEnum(a) => serde_json::to_value(a),
            Task::Pi1Moduli(a) | Task::Pi1Nogo(a) => serde_json::to_value(a),
            Task::Pi1Abelianize(a) => serde_json::to_value(a),
            Task::ReportAll(a) => serde_json::to_value(a),
        }
        .expect("arguments serialize");
        if let Some(map) = v.as_object_mut() {
            map.remove("out");
            map.retain(|_, value| !value.is_null());
        }
        v
    }
}
