//! `lsl`: classify, deform and verify spacelike surfaces in the Lorentzian
//! space forms from the command line.
//!
//! Exit codes: 0 when every asserted property holds, 1 when one fails, 2 for
//! usage and configuration errors.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod config;

use std::fs;
use std::io::Write;
use std::path::Path;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use lsl::curvature::{BuiltinChart, MetricLattice, MetricSource, DEFAULT_STEP};
use lsl::families::deform_family_base;
use lsl::mesh::Mesh;
use lsl::suites::{run_suite, Suite, SuiteOptions, AUDIT_FRAMES};
use lsl::surface::classify;
use lsl::twistor::prop31_crosscheck;

use config::{RunConfig, SurfaceArgs};

#[derive(Parser)]
#[command(name = "lsl", version, about = "Spacelike surfaces in Lorentzian space forms")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a family on its grid and write the mesh.
    Build(SurfaceArgs),
    /// Classify a family member or a lattice chart.
    Classify {
        #[command(flatten)]
        surface: SurfaceArgs,
        /// Also compare every flag with holomorphy of the matching lift.
        #[arg(long)]
        lifts: bool,
    },
    /// Deform the totally umbilic member of a family by `--lambda` along
    /// its positive null normals and write the mesh.
    Deform(SurfaceArgs),
    /// Curvature integrability conditions of a metric chart.
    Audit(AuditArgs),
    /// Run a named verification suite.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct AuditArgs {
    /// flat, s41, h41, conformal or product.
    #[arg(long, conflicts_with = "metric")]
    chart: Option<String>,
    /// JSON metric lattice.
    #[arg(long)]
    metric: Option<String>,
    /// Seed of the random frames.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Random frames per sample point.
    #[arg(long, default_value_t = AUDIT_FRAMES)]
    frames: usize,
    /// Step of the metric derivatives.
    #[arg(long = "fd-step", default_value_t = DEFAULT_STEP)]
    fd_step: f64,
    /// Fail unless the conditions of this structure hold (`oplus` or `og`).
    #[arg(long)]
    expect: Option<String>,
    #[arg(long, default_value_t = 1e-4)]
    tol: f64,
    /// Output file (stdout otherwise).
    #[arg(long)]
    out: Option<String>,
}

#[derive(Args)]
struct VerifyArgs {
    /// prop31, deformation, coefficients, integrability, cr-compare,
    /// conformal, tension or stereographic.
    suite: String,
    /// Restrict to one space form.
    #[arg(long)]
    space: Option<String>,
    /// Normal-bundle scale of the Grassmannian metric (tension suite).
    #[arg(long = "lambdaG")]
    lambda_g: Option<f64>,
    /// Seed of the random draws.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Grid resolution per axis.
    #[arg(long)]
    grid: Option<usize>,
    #[arg(long = "fd-step")]
    fd_step: Option<f64>,
    /// Tolerance of the analytically vanishing residuals.
    #[arg(long)]
    tol: Option<f64>,
    /// Random `λ` per family.
    #[arg(long)]
    draws: Option<usize>,
    /// Output file (stdout otherwise).
    #[arg(long)]
    out: Option<String>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    if let Err(e) = config::init_threads() {
        eprintln!("error: {e:#}");
        return ExitCode::from(2);
    }
    match run(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cmd: Command) -> Result<bool> {
    match cmd {
        Command::Build(a) => {
            let cfg = RunConfig::from_args(&a)?;
            write_mesh(&Mesh::from_immersion(&cfg.immersion()?)?, cfg.out.as_deref())?;
            Ok(true)
        }
        Command::Classify { surface, lifts } => {
            let cfg = RunConfig::from_args(&surface)?;
            let imm = cfg.immersion()?;
            let report = classify(&imm, cfg.tol)?;
            if !lifts {
                write_json(&report, cfg.out.as_deref())?;
                return Ok(true);
            }
            let table = prop31_crosscheck(&imm, cfg.tol)?;
            let ok = table.all_agree;
            write_json(&serde_json::json!({ "classification": report, "lifts": table }), cfg.out.as_deref())?;
            Ok(ok)
        }
        Command::Deform(a) => {
            let cfg = RunConfig::from_args(&a)?;
            let Some(spec) = &cfg.family else { bail!("deform needs a family (--family or --spec)") };
            write_mesh(&Mesh::from_immersion(&deform_family_base(spec)?)?, cfg.out.as_deref())?;
            Ok(true)
        }
        Command::Audit(a) => audit(a),
        Command::Verify(a) => verify(a),
    }
}

#[derive(Serialize)]
struct AuditRow {
    x: [f64; 4],
    oplus: [f64; 2],
    og: [f64; 4],
}

#[derive(Serialize)]
struct AuditReport {
    source: String,
    frames: usize,
    seed: u64,
    fd_step: f64,
    oplus_sup: f64,
    og_sup: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    expect: Option<String>,
    tolerance: f64,
    pass: bool,
    points: Vec<AuditRow>,
}

fn audit(a: AuditArgs) -> Result<bool> {
    if !(a.tol > 0.0) {
        bail!("tolerance {:e} must be positive", a.tol);
    }
    if a.frames == 0 {
        bail!("at least one frame per point is needed");
    }
    let (source, name) = match (&a.chart, &a.metric) {
        (Some(c), None) => (MetricSource::Builtin(BuiltinChart::from_name(c)?), c.clone()),
        (None, Some(path)) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {path}"))?;
            let lat: MetricLattice = serde_json::from_str(&text).with_context(|| format!("parsing {path}"))?;
            lat.validate()?;
            (MetricSource::Lattice(lat.into()), path.clone())
        }
        _ => bail!("audit needs exactly one of --chart or --metric"),
    };
    let pts = source.audit(a.fd_step, a.frames, a.seed)?;
    let oplus_sup = pts.iter().map(|p| p.oplus_max()).fold(0.0, f64::max);
    let og_sup = pts.iter().map(|p| p.og_max()).fold(0.0, f64::max);
    let pass = match a.expect.as_deref() {
        None => true,
        Some("oplus") => oplus_sup < a.tol,
        Some("og") => og_sup < a.tol,
        Some(other) => bail!("unknown expectation {other:?} (expected oplus or og)"),
    };
    let report = AuditReport {
        source: name,
        frames: a.frames,
        seed: a.seed,
        fd_step: a.fd_step,
        oplus_sup,
        og_sup,
        expect: a.expect,
        tolerance: a.tol,
        pass,
        points: pts.into_iter().map(|p| AuditRow { x: p.x, oplus: p.oplus, og: p.og }).collect(),
    };
    write_json(&report, a.out.as_deref())?;
    Ok(pass)
}

fn verify(a: VerifyArgs) -> Result<bool> {
    let suite: Suite = a.suite.parse()?;
    let mut opts = SuiteOptions { seed: a.seed, lambda_g: a.lambda_g, ..Default::default() };
    if let Some(s) = &a.space {
        opts.space = Some(s.parse()?);
    }
    if let Some(n) = a.grid {
        opts.resolution = n;
    }
    if let Some(h) = a.fd_step {
        config::check_fd_step(h)?;
        opts.fd_step = h;
    }
    if let Some(t) = a.tol {
        opts.tol = t;
    }
    if let Some(d) = a.draws {
        opts.draws = d;
    }
    let report = run_suite(suite, &opts)?;
    write_json(&report, a.out.as_deref())?;
    for c in report.checks.iter().filter(|c| !c.pass) {
        eprintln!("failed: {} ({:e} vs {:e})", c.name, c.value, c.bound);
    }
    Ok(report.pass)
}

fn write_json(value: &impl Serialize, out: Option<&str>) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {path}"))?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

/// CSV when the output path ends in `.csv`, JSON otherwise.
fn write_mesh(mesh: &Mesh, out: Option<&str>) -> Result<()> {
    match out {
        Some(path) if Path::new(path).extension().is_some_and(|e| e == "csv") => {
            let f = fs::File::create(path).with_context(|| format!("writing {path}"))?;
            mesh.write_csv(std::io::BufWriter::new(f))?;
            Ok(())
        }
        _ => write_json(mesh, out),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn command_line_is_consistent() {
        Cli::command().debug_assert();
    }
}
