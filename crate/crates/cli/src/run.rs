//! Subcommand surface and orchestration.
//!
//! Exit codes: 0 success, 1 input/usage error, 2 verification failure (the
//! surface was built but a geometric property check failed even after the
//! path retry).

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use oscul_core::analysis::{linearity_detect, radius_profile, structure_score};
use oscul_core::pipeline::build_surface;
use oscul_core::pyramid::induct;
use oscul_core::{Closure, RunConfig};
use serde_json::Value;

use crate::csv::read_points;
use crate::export::export_mesh;
use crate::report;
use crate::CliError;

#[derive(Parser)]
#[command(
    name = "oscul",
    about = "Osculating-hypersphere surface fitting on point clouds",
    version
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit per-point osculating spheres and report the radius profile.
    Fit(CommonArgs),
    /// Structure and linearity diagnostics on the radius profile.
    Analyze(CommonArgs),
    /// Full pipeline: surgery, assembly, verification, optional mesh export.
    Assemble(AssembleArgs),
    /// Inductive dimensionality descent.
    Pyramid(PyramidArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// CSV file of points, one row per point.
    #[arg(long)]
    input: PathBuf,
    /// Report destination; stdout when omitted.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Neighbor contraction factor in (0, 1).
    #[arg(long)]
    epsilon: Option<f64>,
    /// Cap chord radius in (0, epsilon].
    #[arg(long)]
    delta: Option<f64>,
    /// Seed for path tie-breaking and the injectivity retry.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct AssembleArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// End closure for the assembled surface.
    #[arg(long, value_enum)]
    closure: Option<ClosureArg>,
    /// Mesh export path; format from the extension (.svg for d=2, .obj for d=3).
    #[arg(long)]
    mesh: Option<PathBuf>,
    /// Cap on accepted path-refinement moves (0 disables refinement).
    #[arg(long)]
    path_move_budget: Option<usize>,
}

#[derive(Args)]
struct PyramidArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long, value_enum)]
    closure: Option<ClosureArg>,
    /// Dimension to descend to (1 <= target < input dimension).
    #[arg(long)]
    target_dim: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum ClosureArg {
    Loop,
    Infinity,
}

impl From<ClosureArg> for Closure {
    fn from(v: ClosureArg) -> Self {
        match v {
            ClosureArg::Loop => Closure::Loop,
            ClosureArg::Infinity => Closure::Infinity,
        }
    }
}

fn build_config(
    common: &CommonArgs,
    closure: Option<ClosureArg>,
    path_move_budget: Option<usize>,
) -> Result<RunConfig, CliError> {
    let mut cfg = RunConfig::default();
    if let Some(e) = common.epsilon {
        cfg.epsilon = e;
        // Keep the delta <= epsilon invariant when only epsilon moves.
        if common.delta.is_none() {
            cfg.delta = e / 10.0;
        }
    }
    if let Some(d) = common.delta {
        cfg.delta = d;
    }
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    if let Some(c) = closure {
        cfg.closure = c.into();
    }
    if path_move_budget.is_some() {
        cfg.path_move_budget = path_move_budget;
    }
    Ok(cfg.validated()?)
}

/// Parse argv and run; the process exit code.
pub fn main_entry() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Usage problems are input errors (exit 1), not clap's default 2,
            // which this tool reserves for verification failures.
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    ExitCode::SUCCESS
                }
                _ => ExitCode::from(1),
            };
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn dispatch(cli: Cli) -> Result<ExitCode, CliError> {
    oscul_core::init_threads_from_env();
    match cli.command {
        Command::Fit(args) => {
            let cfg = build_config(&args, None, None)?;
            let cloud = read_points(&args.input)?;
            let profile = radius_profile(&cloud, cfg.epsilon)?;
            let doc = report::build_document(vec![
                ("config", Some(report::config_section(&cfg))),
                ("profile", Some(report::profile_section(&profile))),
            ]);
            report::write_report(&doc, args.output.as_deref())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Analyze(args) => {
            let cfg = build_config(&args, None, None)?;
            let cloud = read_points(&args.input)?;
            let profile = radius_profile(&cloud, cfg.epsilon)?;
            let assessment = structure_score(&profile, cfg.noise_threshold)?;
            let linearity = linearity_detect(&cloud, &profile, 0.9)?;
            let doc = report::build_document(vec![
                ("config", Some(report::config_section(&cfg))),
                ("profile", Some(report::profile_section(&profile))),
                ("structure", Some(report::structure_section(&assessment, &profile))),
                ("linearity", Some(report::linearity_section(&linearity))),
            ]);
            report::write_report(&doc, args.output.as_deref())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Assemble(args) => {
            let cfg = build_config(&args.common, args.closure, args.path_move_budget)?;
            let cloud = read_points(&args.common.input)?;
            let profile = radius_profile(&cloud, cfg.epsilon)?;
            let assessment = structure_score(&profile, cfg.noise_threshold)?;
            let linearity = linearity_detect(&cloud, &profile, 0.9)?;
            let build = build_surface(&cloud, &cfg)?;
            let doc = report::build_document(vec![
                ("config", Some(report::config_section(&cfg))),
                ("profile", Some(report::profile_section(&profile))),
                ("structure", Some(report::structure_section(&assessment, &profile))),
                ("linearity", Some(report::linearity_section(&linearity))),
                ("properties", Some(report::properties_section(&build.report, build.retried))),
                ("components", Some(report::components_section(&build.surface, &build.plan))),
            ]);
            report::write_report(&doc, args.common.output.as_deref())?;
            if let Some(mesh_path) = &args.mesh {
                export_mesh(&build.surface, &cloud, mesh_path)?;
            }
            if build.report.violations.is_empty() {
                Ok(ExitCode::SUCCESS)
            } else {
                for v in &build.report.violations {
                    eprintln!("verification: {v}");
                }
                Ok(ExitCode::from(2))
            }
        }
        Command::Pyramid(args) => {
            let cfg = build_config(&args.common, args.closure, None)?;
            let cloud = read_points(&args.common.input)?;
            let pyramid = induct(&cloud, args.target_dim, &cfg)?;
            let doc: Value = report::build_document(vec![
                ("config", Some(report::config_section(&cfg))),
                ("pyramid", Some(report::pyramid_section(&pyramid))),
            ]);
            report::write_report(&doc, args.common.output.as_deref())?;
            Ok(ExitCode::SUCCESS)
        }
    }
}
