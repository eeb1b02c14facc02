//! The TOML spec file: two factor sections, an optional potential, any
//! number of soliton sections and optional sampling settings.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use serde::Deserialize;

use crate::dwp::DoublyWarpedProduct;
use crate::error::{Error, Result};
use crate::expr::Expression;
use crate::geometry::ChartManifold;
use crate::solitons::{Scalar, SolitonSpec, SolitonText};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FactorText {
    pub dim: usize,
    pub coords: Vec<String>,
    pub metric: Vec<Vec<Scalar>>,
    pub warping: Scalar,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialText {
    pub psi: Scalar,
}

/// An interval for every coordinate, or one per coordinate.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum BoxText {
    Global([f64; 2]),
    PerCoord(Vec<[f64; 2]>),
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplingText {
    pub points: Option<usize>,
    pub seed: Option<u64>,
    #[serde(rename = "box")]
    pub bounds: Option<BoxText>,
    pub tolerance: Option<f64>,
    pub anchor: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecText {
    pub factor: BTreeMap<String, FactorText>,
    pub potential: Option<PotentialText>,
    /// `[soliton]` or `[[soliton]]`.
    pub soliton: Option<toml::Value>,
    #[serde(default)]
    pub sampling: SamplingText,
}

/// A fully parsed spec file.
#[derive(Debug, Clone)]
pub struct LoadedSpec {
    pub dwp: DoublyWarpedProduct,
    pub potential: Option<Expression>,
    pub solitons: Vec<SolitonSpec>,
    pub sampling: SamplingText,
}

fn scalar_text(s: &Scalar) -> String {
    match s {
        Scalar::Number(v) => format!("{v:?}"),
        Scalar::Text(t) => t.clone(),
    }
}

fn build_factor(name: &str, f: &FactorText) -> Result<(ChartManifold, Expression)> {
    let fail = |msg: String| Error::Spec(format!("[factor.{name}]: {msg}"));
    if f.coords.len() != f.dim {
        return Err(fail(format!(
            "dim = {} but {} coordinates given",
            f.dim,
            f.coords.len()
        )));
    }
    if f.metric.len() != f.dim || f.metric.iter().any(|row| row.len() != f.dim) {
        return Err(fail(format!("metric must be a {0}x{0} matrix", f.dim)));
    }
    let rows: Vec<Vec<String>> = f
        .metric
        .iter()
        .map(|row| row.iter().map(scalar_text).collect())
        .collect();
    let chart = ChartManifold::new(&f.coords, &rows).map_err(|e| fail(e.to_string()))?;
    let warping = Expression::parse(&scalar_text(&f.warping), chart.coords().clone())
        .map_err(|e| fail(format!("warping: {e}")))?;
    Ok((chart, warping))
}

impl SpecText {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Spec(e.to_string().trim_end().to_string()))
    }

    /// Builds the product and parses every expression.
    pub fn build(self) -> Result<LoadedSpec> {
        for key in self.factor.keys() {
            if key != "1" && key != "2" {
                return Err(Error::Spec(format!("unknown section [factor.{key}]")));
            }
        }
        let factor = |key: &str| {
            self.factor
                .get(key)
                .ok_or_else(|| Error::Spec(format!("missing required section [factor.{key}]")))
                .and_then(|f| build_factor(key, f))
        };
        let (chart1, f1) = factor("1")?;
        let (chart2, f2) = factor("2")?;
        let dwp = DoublyWarpedProduct::from_parts(chart1, chart2, f1, f2)
            .map_err(|e| Error::Spec(format!("product: {e}")))?;
        let coords: Arc<[String]> = dwp.product().coords().clone();
        let potential = self
            .potential
            .as_ref()
            .map(|p| Expression::parse(&scalar_text(&p.psi), coords.clone()))
            .transpose()
            .map_err(|e| Error::Spec(format!("[potential]: {e}")))?;
        let psi_text = self.potential.as_ref().map(|p| scalar_text(&p.psi));
        let sections: Vec<toml::Value> = match self.soliton {
            None => Vec::new(),
            Some(toml::Value::Array(v)) => v,
            Some(v) => vec![v],
        };
        let solitons = sections
            .iter()
            .enumerate()
            .map(|(i, v)| {
                let fail = |msg: String| Error::Spec(format!("soliton {}: {msg}", i + 1));
                let text: SolitonText = v
                    .clone()
                    .try_into()
                    .map_err(|e: toml::de::Error| fail(e.message().to_string()))?;
                SolitonSpec::from_text(&text, &coords, psi_text.as_deref())
                    .map_err(|e| fail(e.to_string()))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(LoadedSpec {
            dwp,
            potential,
            solitons,
            sampling: self.sampling,
        })
    }
}

/// Reads, parses and builds a spec file. Warping positivity is checked
/// when the sample points are drawn.
pub fn load_spec(path: &Path) -> Result<LoadedSpec> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Spec(format!("cannot read {}: {e}", path.display())))?;
    SpecText::parse(&text)
        .and_then(SpecText::build)
        .map_err(|e| Error::Spec(format!("{}: {e}", path.display())))
}
