//! Run configuration: defaults, spec-file `[sampling]` values and command
//! line overrides, in increasing precedence.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::Serialize;

use super::spec_file::{BoxText, SamplingText};
use crate::dwp::Formula;
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::sampling::SampleBox;

pub const DEFAULT_POINTS: usize = 64;
pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_TOLERANCE: f64 = 1e-8;
pub const DEFAULT_BOX: (f64, f64) = (-1.0, 1.0);

/// A named group of checks selectable with `--checks`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckGroup {
    Connection,
    Frame,
    Lemma1,
    Lemma2,
    Lemma5,
    Hessian,
    Scalar,
    Laplacian,
    Dwp,
    Solitons,
    Concircular,
    Conharmonic,
}

impl CheckGroup {
    pub const ALL: [CheckGroup; 12] = [
        CheckGroup::Connection,
        CheckGroup::Frame,
        CheckGroup::Lemma1,
        CheckGroup::Lemma2,
        CheckGroup::Lemma5,
        CheckGroup::Hessian,
        CheckGroup::Scalar,
        CheckGroup::Laplacian,
        CheckGroup::Dwp,
        CheckGroup::Solitons,
        CheckGroup::Concircular,
        CheckGroup::Conharmonic,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CheckGroup::Connection => "connection",
            CheckGroup::Frame => "frame",
            CheckGroup::Lemma1 => "lemma1",
            CheckGroup::Lemma2 => "lemma2",
            CheckGroup::Lemma5 => "lemma5",
            CheckGroup::Hessian => "hessian",
            CheckGroup::Scalar => "scalar",
            CheckGroup::Laplacian => "laplacian",
            CheckGroup::Dwp => "dwp",
            CheckGroup::Solitons => "solitons",
            CheckGroup::Concircular => "concircular",
            CheckGroup::Conharmonic => "conharmonic",
        }
    }

    /// Parses a comma-separated list. `all` selects every group; the result
    /// is sorted and free of duplicates.
    pub fn parse_list(text: &str) -> Result<Vec<CheckGroup>> {
        let mut out = Vec::new();
        for item in text.split(',').map(str::trim) {
            if item.eq_ignore_ascii_case("all") {
                out.extend(CheckGroup::ALL);
                continue;
            }
            out.push(
                CheckGroup::ALL
                    .into_iter()
                    .find(|g| g.name().eq_ignore_ascii_case(item))
                    .ok_or_else(|| {
                        let names: Vec<&str> = CheckGroup::ALL.iter().map(|g| g.name()).collect();
                        Error::Config(format!(
                            "unknown check group `{item}` (expected all or one of {})",
                            names.join(", ")
                        ))
                    })?,
            );
        }
        out.sort();
        out.dedup();
        Ok(out)
    }
}

impl fmt::Display for CheckGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Sampling box as given: one interval for every coordinate, or a list.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum BoxSpec {
    Global([f64; 2]),
    PerCoord(Vec<[f64; 2]>),
}

impl BoxSpec {
    pub fn resolve(&self, dim: usize) -> Result<SampleBox> {
        match self {
            BoxSpec::Global([lo, hi]) => SampleBox::uniform(dim, *lo, *hi),
            BoxSpec::PerCoord(v) if v.len() == dim => {
                SampleBox::new(v.iter().map(|&[lo, hi]| (lo, hi)).collect())
            }
            BoxSpec::PerCoord(v) => Err(Error::Config(format!(
                "box has {} intervals but the product has {dim} coordinates",
                v.len()
            ))),
        }
    }
}

impl From<BoxText> for BoxSpec {
    fn from(b: BoxText) -> Self {
        match b {
            BoxText::Global(g) => BoxSpec::Global(g),
            BoxText::PerCoord(v) => BoxSpec::PerCoord(v),
        }
    }
}

fn parse_pair(text: &str) -> Result<[f64; 2]> {
    let v = parse_reals(text)?;
    match v[..] {
        [lo, hi] => Ok([lo, hi]),
        _ => Err(Error::Config(format!("expected LO,HI, got `{text}`"))),
    }
}

/// `LO,HI` for every coordinate, or `LO,HI;LO,HI;…` per coordinate.
impl FromStr for BoxSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s
            .split(';')
            .map(str::trim)
            .filter(|p| !p.is_empty())
            .collect();
        match parts[..] {
            [] => Err(Error::Config("empty box".into())),
            [one] => Ok(BoxSpec::Global(parse_pair(one)?)),
            _ => Ok(BoxSpec::PerCoord(
                parts.iter().map(|p| parse_pair(p)).collect::<Result<_>>()?,
            )),
        }
    }
}

/// Comma-separated reals.
pub fn parse_reals(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| Error::Config(format!("`{}` is not a number", t.trim())))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    #[default]
    Text,
    Structured,
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "text" => Ok(ReportFormat::Text),
            "structured" | "json" => Ok(ReportFormat::Structured),
            _ => Err(Error::Config(format!(
                "unknown report format `{s}` (expected text or structured)"
            ))),
        }
    }
}

/// Command-line values; `None` falls back to the input file, then to the
/// defaults.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub checks: Option<Vec<CheckGroup>>,
    pub points: Option<usize>,
    pub seed: Option<u64>,
    pub bounds: Option<BoxSpec>,
    pub tolerance: Option<f64>,
    pub anchor: Option<Vec<f64>>,
    pub report_path: Option<PathBuf>,
    pub format: Option<ReportFormat>,
    pub formula: Option<Formula>,
    pub execution: Option<Execution>,
}

/// Resolved settings of one run. The serialized form is echoed in the
/// structured report and leaves out settings that only affect where and
/// how the report is written.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub spec_path: PathBuf,
    pub checks: Vec<CheckGroup>,
    pub points: usize,
    pub seed: u64,
    #[serde(rename = "box")]
    pub bounds: BoxSpec,
    pub tolerance: f64,
    pub anchor: Option<Vec<f64>>,
    pub formula: Formula,
    #[serde(skip)]
    pub report_path: Option<PathBuf>,
    #[serde(skip)]
    pub format: ReportFormat,
    #[serde(skip)]
    pub execution: Execution,
}

impl RunConfig {
    pub fn resolve(spec_path: PathBuf, sampling: &SamplingText, o: Overrides) -> Result<Self> {
        let cfg = RunConfig {
            spec_path,
            checks: o.checks.unwrap_or_else(|| CheckGroup::ALL.to_vec()),
            points: o.points.or(sampling.points).unwrap_or(DEFAULT_POINTS),
            seed: o.seed.or(sampling.seed).unwrap_or(DEFAULT_SEED),
            bounds: o
                .bounds
                .or_else(|| sampling.bounds.clone().map(BoxSpec::from))
                .unwrap_or(BoxSpec::Global([DEFAULT_BOX.0, DEFAULT_BOX.1])),
            tolerance: o
                .tolerance
                .or(sampling.tolerance)
                .unwrap_or(DEFAULT_TOLERANCE),
            anchor: o.anchor.or_else(|| sampling.anchor.clone()),
            formula: o.formula.unwrap_or_default(),
            report_path: o.report_path,
            format: o.format.unwrap_or_default(),
            execution: o.execution.unwrap_or_default(),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.points == 0 {
            return Err(Error::Config("points must be at least 1".into()));
        }
        if !(self.tolerance > 0.0 && self.tolerance.is_finite()) {
            return Err(Error::Config(format!(
                "tolerance must be positive, got {}",
                self.tolerance
            )));
        }
        if self.checks.is_empty() {
            return Err(Error::Config("no check groups selected".into()));
        }
        if let Some(a) = &self.anchor {
            if a.iter().any(|v| !v.is_finite()) {
                return Err(Error::Config("anchor coordinates must be finite".into()));
            }
        }
        // Interval validity is checked again once the dimension is known.
        self.bounds.resolve(match &self.bounds {
            BoxSpec::Global(_) => 1,
            BoxSpec::PerCoord(v) => v.len(),
        })?;
        Ok(())
    }
}
