//! The `verify` command: load a spec file, draw sample points, run the
//! selected check groups and report.
//!
//! Exit status is 0 when every check passes or is skipped, 1 when any check
//! fails and 2 for configuration and parse errors.

mod config;
mod report;
mod spec_file;

pub use config::{
    parse_reals, BoxSpec, CheckGroup, Overrides, ReportFormat, RunConfig, DEFAULT_BOX,
    DEFAULT_POINTS, DEFAULT_SEED, DEFAULT_TOLERANCE,
};
pub use report::{format_real, Counts, Report, ENGINE_NAME, ENGINE_VERSION};
pub use spec_file::{
    load_spec, BoxText, FactorText, LoadedSpec, PotentialText, SamplingText, SpecText,
};

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::check::Sweep;
use crate::dwp::{DoublyWarpedProduct, Formula};
use crate::error::{Error, Result};
use crate::residual::ResidualSummary;
use crate::sampling::{sample_points, Screen, MAX_CONDITION};
use crate::solitons::{
    contraction_consistency, factor_checks, residual, FactorContext, SolitonKind,
};
use crate::special::{concircular_checks, conharmonic_checks, SpecialContext};
use crate::suite::{self, NamedField, SuiteContext};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "warpcheck",
    version,
    about = "Checks closed-form curvature and soliton formulas on doubly warped products against a brute-force oracle"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run check groups on the product described by a spec file.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Spec file (TOML).
    pub spec: PathBuf,
    /// Comma-separated check groups, or `all`.
    #[arg(long, value_parser = parse_checks)]
    pub checks: Option<::std::vec::Vec<CheckGroup>>,
    /// Number of sample points.
    #[arg(long)]
    pub points: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// `LO,HI` for every coordinate, or `LO,HI;LO,HI;…` per coordinate.
    #[arg(long = "box", allow_hyphen_values = true, value_parser = parse_box)]
    pub bounds: Option<BoxSpec>,
    #[arg(long = "tol")]
    pub tolerance: Option<f64>,
    /// Comma-separated coordinates of the anchor point used by the factor
    /// checks. Defaults to the box center.
    #[arg(long, allow_hyphen_values = true, value_parser = parse_anchor)]
    pub anchor: Option<::std::vec::Vec<f64>>,
    /// Write the report here instead of standard output.
    #[arg(long = "report")]
    pub report_path: Option<PathBuf>,
    #[arg(long, value_parser = parse_format)]
    pub format: Option<ReportFormat>,
    /// Closed forms to check where a corrected and an original form differ.
    #[arg(long, value_parser = parse_formula)]
    pub formula: Option<Formula>,
    /// Evaluate sample points on one thread.
    #[arg(long)]
    pub sequential: bool,
}

// The fully qualified `Vec` paths above keep clap from reading those
// fields as repeated arguments.
fn parse_checks(s: &str) -> std::result::Result<Vec<CheckGroup>, Error> {
    CheckGroup::parse_list(s)
}

fn parse_box(s: &str) -> std::result::Result<BoxSpec, Error> {
    s.parse()
}

fn parse_anchor(s: &str) -> std::result::Result<Vec<f64>, Error> {
    parse_reals(s)
}

fn parse_format(s: &str) -> std::result::Result<ReportFormat, Error> {
    s.parse()
}

fn parse_formula(s: &str) -> std::result::Result<Formula, Error> {
    match s.to_ascii_lowercase().as_str() {
        "corrected" => Ok(Formula::Corrected),
        "original" => Ok(Formula::Original),
        _ => Err(Error::Config(format!(
            "unknown formula `{s}` (expected corrected or original)"
        ))),
    }
}

impl VerifyArgs {
    pub fn overrides(&self) -> Overrides {
        Overrides {
            checks: self.checks.clone(),
            points: self.points,
            seed: self.seed,
            bounds: self.bounds.clone(),
            tolerance: self.tolerance,
            anchor: self.anchor.clone(),
            report_path: self.report_path.clone(),
            format: self.format,
            formula: self.formula,
            execution: self
                .sequential
                .then_some(crate::exec::Execution::Sequential),
        }
    }
}

/// Draws the sample points. Candidates where an expression is undefined or
/// the metric is singular or ill-conditioned are redrawn; a nonpositive
/// warping value is an error.
pub fn draw_points(dwp: &DoublyWarpedProduct, config: &RunConfig) -> Result<Vec<Vec<f64>>> {
    let bx = config.bounds.resolve(dwp.dim())?;
    sample_points(&bx, config.points, config.seed, |p| {
        match dwp.warping_values(p) {
            Err(e @ Error::NonPositiveWarping { .. }) => return Err(e),
            Err(_) => return Ok(Screen::Reject),
            Ok(_) => {}
        }
        Ok(match dwp.oracle_at(p) {
            Ok(geo) if geo.condition_number() <= MAX_CONDITION => Screen::Accept,
            _ => Screen::Reject,
        })
    })
}

/// The anchor point: the configured one, or the box center.
pub fn resolve_anchor(dwp: &DoublyWarpedProduct, config: &RunConfig) -> Result<Vec<f64>> {
    let anchor = match &config.anchor {
        Some(a) => a.clone(),
        None => config.bounds.resolve(dwp.dim())?.center(),
    };
    if anchor.len() != dwp.dim() {
        return Err(Error::Config(format!(
            "anchor has {} coordinates but the product has {}",
            anchor.len(),
            dwp.dim()
        )));
    }
    dwp.warping_values(&anchor)?;
    Ok(anchor)
}

fn soliton_group(
    spec: &LoadedSpec,
    anchor: &[f64],
    sweep: Sweep,
    formula: Formula,
) -> Vec<ResidualSummary> {
    if spec.solitons.is_empty() {
        return vec![ResidualSummary::skipped(
            "solitons",
            sweep.tolerance,
            "no soliton sections in the input file",
        )];
    }
    let m = spec.dwp.product();
    let mut out = Vec::new();
    for (i, s) in spec.solitons.iter().enumerate() {
        let prefix = format!("solitons.{}.{}", i + 1, s.kind.name());
        let sums = residual(&prefix, s, m, &sweep);
        let ctx = FactorContext {
            dwp: &spec.dwp,
            spec: s,
            anchor,
            sweep,
            formula,
        };
        out.extend(factor_checks(&ctx, &prefix, &sums[0]));
        if s.kind == SolitonKind::Riemann {
            let id = format!("{prefix}.contraction");
            out.push(match contraction_consistency(&id, s, m, &sweep) {
                Ok(r) => r,
                Err(e) => ResidualSummary::skipped(&id, sweep.tolerance, format!("dimension: {e}")),
            });
        }
        out.extend(sums);
    }
    out
}

/// Runs every selected group on a loaded spec. Results are sorted by check
/// id. Errors are configuration problems: a bad box or anchor, a
/// nonpositive warping at a sampled point, or too many rejected samples.
pub fn run_checks(config: &RunConfig, spec: &LoadedSpec) -> Result<Report> {
    let dwp = &spec.dwp;
    let points = draw_points(dwp, config)?;
    let anchor = resolve_anchor(dwp, config)?;
    let sweep = Sweep::new(&points, config.tolerance).with_exec(config.execution);
    let tol = config.tolerance;
    let ctx = SuiteContext::new(dwp, sweep).with_formula(config.formula);
    let extra: Vec<NamedField> = spec
        .potential
        .iter()
        .map(|e| NamedField {
            name: "psi".into(),
            field: e.clone(),
        })
        .collect();
    let fields = suite::hessian_fields(dwp, &extra)?;
    let no_psi = |id: &str| ResidualSummary::skipped(id, tol, "no [potential] section");
    let special = SpecialContext {
        dwp,
        anchor: &anchor,
        sweep,
        formula: config.formula,
    };

    let mut checks = Vec::new();
    for group in &config.checks {
        match group {
            CheckGroup::Connection => checks.extend(suite::connection(&ctx)),
            CheckGroup::Frame => checks.extend(suite::frame(&ctx)),
            CheckGroup::Lemma1 => checks.extend(suite::lemma1(&ctx)),
            CheckGroup::Lemma2 => checks.extend(suite::lemma2(&ctx)),
            CheckGroup::Lemma5 => checks.extend(suite::lemma5(&ctx)),
            CheckGroup::Hessian => {
                checks.extend(suite::hessian(&ctx, &fields));
                if extra.is_empty() {
                    checks.push(no_psi("hessian.psi"));
                }
            }
            CheckGroup::Scalar => checks.extend(suite::scalar(&ctx)),
            CheckGroup::Laplacian => {
                checks.extend(suite::laplacian(&ctx, &fields));
                if extra.is_empty() {
                    checks.push(no_psi("laplacian.psi"));
                }
            }
            CheckGroup::Dwp => checks.extend(suite::structure(&ctx)),
            CheckGroup::Solitons => {
                checks.extend(soliton_group(spec, &anchor, sweep, config.formula))
            }
            CheckGroup::Concircular => checks.extend(concircular_checks(&special, "concircular")),
            CheckGroup::Conharmonic => checks.extend(conharmonic_checks(&special, "conharmonic")),
        }
    }
    checks.sort_by(|a, b| a.check_id.cmp(&b.check_id));
    Ok(Report {
        config: config.clone(),
        checks,
    })
}

/// Loads the input file, resolves the configuration and runs the checks.
pub fn verify(args: &VerifyArgs) -> Result<Report> {
    let spec = load_spec(&args.spec)?;
    let config = RunConfig::resolve(args.spec.clone(), &spec.sampling, args.overrides())?;
    run_checks(&config, &spec)
}

fn emit(report: &Report, stdout: &mut dyn Write) -> Result<()> {
    let text = match report.config.format {
        ReportFormat::Text => report.render_text(),
        ReportFormat::Structured => report.render_structured(),
    };
    match &report.config.report_path {
        Some(path) => {
            std::fs::write(path, text)?;
            let c = report.counts();
            writeln!(
                stdout,
                "{} passed, {} failed, {} skipped; report written to {}",
                c.pass,
                c.fail,
                c.skipped,
                path.display()
            )?;
        }
        None => stdout.write_all(text.as_bytes())?,
    }
    Ok(())
}

/// Entry point shared by the binary and the tests. Returns the exit status.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() {
                EXIT_CONFIG
            } else {
                EXIT_PASS
            };
            let out: &mut dyn Write = if e.use_stderr() { stderr } else { stdout };
            let _ = write!(out, "{}", e.render());
            return code;
        }
    };
    let Command::Verify(args) = cli.command;
    match verify(&args) {
        Ok(report) => match emit(&report, stdout) {
            Ok(()) => report.exit_code(),
            Err(e) => {
                let _ = writeln!(stderr, "error: {e}");
                EXIT_CONFIG
            }
        },
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            EXIT_CONFIG
        }
    }
}
