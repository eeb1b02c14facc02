use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::Expression;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolitonKind {
    Yamabe,
    Conformal,
    Ricci,
    Riemann,
    EtaYamabe,
    EtaRicci,
    FAlmostRicci,
    FAlmostEtaRicci,
    Einstein,
    QuasiEinstein,
}

impl SolitonKind {
    pub const ALL: [SolitonKind; 10] = [
        SolitonKind::Yamabe,
        SolitonKind::Conformal,
        SolitonKind::Ricci,
        SolitonKind::Riemann,
        SolitonKind::EtaYamabe,
        SolitonKind::EtaRicci,
        SolitonKind::FAlmostRicci,
        SolitonKind::FAlmostEtaRicci,
        SolitonKind::Einstein,
        SolitonKind::QuasiEinstein,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SolitonKind::Yamabe => "yamabe",
            SolitonKind::Conformal => "conformal",
            SolitonKind::Ricci => "ricci",
            SolitonKind::Riemann => "riemann",
            SolitonKind::EtaYamabe => "eta_yamabe",
            SolitonKind::EtaRicci => "eta_ricci",
            SolitonKind::FAlmostRicci => "f_almost_ricci",
            SolitonKind::FAlmostEtaRicci => "f_almost_eta_ricci",
            SolitonKind::Einstein => "einstein",
            SolitonKind::QuasiEinstein => "quasi_einstein",
        }
    }

    /// Scalar and 1-form fields the equation reads, besides the potential.
    pub fn fields(self) -> &'static [&'static str] {
        match self {
            SolitonKind::Yamabe | SolitonKind::Ricci | SolitonKind::Riemann => &["lambda"],
            SolitonKind::Conformal => &["gamma"],
            SolitonKind::EtaYamabe | SolitonKind::EtaRicci => &["lambda", "mu", "eta"],
            SolitonKind::FAlmostRicci => &["lambda", "f"],
            SolitonKind::FAlmostEtaRicci => &["lambda", "f", "mu", "eta"],
            SolitonKind::Einstein => &[],
            SolitonKind::QuasiEinstein => &["alpha", "beta", "eta"],
        }
    }

    /// Fields that may be omitted.
    fn optional(self) -> &'static [&'static str] {
        match self {
            SolitonKind::Conformal => &["gamma"],
            _ => &[],
        }
    }

    pub fn uses_eta(self) -> bool {
        matches!(
            self,
            SolitonKind::EtaYamabe | SolitonKind::EtaRicci | SolitonKind::FAlmostEtaRicci
        )
    }

    pub fn uses_potential(self) -> bool {
        !matches!(self, SolitonKind::Einstein | SolitonKind::QuasiEinstein)
    }
}

impl fmt::Display for SolitonKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SolitonKind {
    type Err = Error;

    /// Accepts an optional `gradient_` prefix, and `almost_` in front of the
    /// kinds whose λ may be a function.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        let s = s.strip_prefix("gradient_").unwrap_or(&s);
        let find = |name: &str| SolitonKind::ALL.into_iter().find(|k| k.name() == name);
        if let Some(k) = find(s) {
            return Ok(k);
        }
        if let Some(k) = s.strip_prefix("almost_").and_then(find) {
            if matches!(
                k,
                SolitonKind::Yamabe
                    | SolitonKind::Ricci
                    | SolitonKind::Riemann
                    | SolitonKind::EtaYamabe
                    | SolitonKind::EtaRicci
            ) {
                return Ok(k);
            }
        }
        Err(Error::InvalidSoliton(format!("unknown soliton type `{s}`")))
    }
}

/// A number or an expression string, as written in a spec file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Scalar {
    Number(f64),
    Text(String),
}

impl Scalar {
    pub fn to_expression(&self, coords: &Arc<[String]>) -> Result<Expression> {
        match self {
            Scalar::Number(v) => Ok(Expression::constant(*v, coords.clone())),
            Scalar::Text(s) => Ok(Expression::parse(s, coords.clone())?),
        }
    }
}

/// Soliton section of a spec file before parsing its expressions.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolitonText {
    #[serde(rename = "type")]
    pub kind: String,
    pub psi: Option<Scalar>,
    pub lambda: Option<Scalar>,
    pub mu: Option<Scalar>,
    pub eta: Option<Vec<Scalar>>,
    #[serde(rename = "A")]
    pub a: Option<Vec<Scalar>>,
    pub f: Option<Scalar>,
    pub alpha: Option<Scalar>,
    pub beta: Option<Scalar>,
    pub gamma: Option<Scalar>,
}

/// A soliton equation with all of its data as expressions on one chart.
/// Constant data are constant expressions.
#[derive(Debug, Clone)]
pub struct SolitonSpec {
    pub kind: SolitonKind,
    pub psi: Expression,
    pub lambda: Option<Expression>,
    pub mu: Option<Expression>,
    /// η, or `A` for the quasi-Einstein kind, in coordinate components.
    pub eta: Option<Vec<Expression>>,
    pub f: Option<Expression>,
    pub alpha: Option<Expression>,
    pub beta: Option<Expression>,
    pub gamma: Option<Expression>,
}

impl SolitonSpec {
    pub fn new(kind: SolitonKind, psi: Expression) -> Self {
        SolitonSpec {
            kind,
            psi,
            lambda: None,
            mu: None,
            eta: None,
            f: None,
            alpha: None,
            beta: None,
            gamma: None,
        }
    }

    /// Parses every field against `coords`. `default_psi` is used when the
    /// section has no `psi` of its own; without either the potential is 0.
    pub fn from_text(
        text: &SolitonText,
        coords: &Arc<[String]>,
        default_psi: Option<&str>,
    ) -> Result<Self> {
        let kind: SolitonKind = text.kind.parse()?;
        let opt = |s: &Option<Scalar>| s.as_ref().map(|s| s.to_expression(coords)).transpose();
        let psi = match (&text.psi, default_psi) {
            (Some(s), _) => s.to_expression(coords)?,
            (None, Some(s)) => Expression::parse(s, coords.clone())?,
            (None, None) => Expression::constant(0.0, coords.clone()),
        };
        let form = match (&text.eta, &text.a) {
            (Some(_), Some(_)) => {
                return Err(Error::InvalidSoliton(
                    "give either `eta` or `A`, not both".into(),
                ));
            }
            (Some(v), None) | (None, Some(v)) => Some(
                v.iter()
                    .map(|s| s.to_expression(coords))
                    .collect::<Result<Vec<_>>>()?,
            ),
            (None, None) => None,
        };
        let spec = SolitonSpec {
            kind,
            psi,
            lambda: opt(&text.lambda)?,
            mu: opt(&text.mu)?,
            eta: form,
            f: opt(&text.f)?,
            alpha: opt(&text.alpha)?,
            beta: opt(&text.beta)?,
            gamma: opt(&text.gamma)?,
        };
        spec.validate(coords.len())?;
        Ok(spec)
    }

    pub fn lambda(mut self, e: Expression) -> Self {
        self.lambda = Some(e);
        self
    }

    pub fn mu(mut self, e: Expression) -> Self {
        self.mu = Some(e);
        self
    }

    pub fn eta(mut self, e: Vec<Expression>) -> Self {
        self.eta = Some(e);
        self
    }

    pub fn f(mut self, e: Expression) -> Self {
        self.f = Some(e);
        self
    }

    pub fn alpha(mut self, e: Expression) -> Self {
        self.alpha = Some(e);
        self
    }

    pub fn beta(mut self, e: Expression) -> Self {
        self.beta = Some(e);
        self
    }

    pub fn gamma(mut self, e: Expression) -> Self {
        self.gamma = Some(e);
        self
    }

    fn slot(&self, name: &str) -> bool {
        match name {
            "lambda" => self.lambda.is_some(),
            "mu" => self.mu.is_some(),
            "eta" => self.eta.is_some(),
            "f" => self.f.is_some(),
            "alpha" => self.alpha.is_some(),
            "beta" => self.beta.is_some(),
            "gamma" => self.gamma.is_some(),
            _ => false,
        }
    }

    /// Checks that exactly the fields the kind reads are present, that the
    /// 1-form has one component per coordinate, and that a quasi-Einstein β
    /// is not identically zero.
    pub fn validate(&self, dim: usize) -> Result<()> {
        let kind = self.kind;
        for &name in kind.fields() {
            if !self.slot(name) && !kind.optional().contains(&name) {
                return Err(Error::MissingField {
                    kind: kind.name(),
                    field: name,
                });
            }
        }
        for name in ["lambda", "mu", "eta", "f", "alpha", "beta", "gamma"] {
            if self.slot(name) && !kind.fields().contains(&name) {
                return Err(Error::InvalidSoliton(format!(
                    "field `{name}` is not used by soliton type `{kind}`"
                )));
            }
        }
        if let Some(eta) = &self.eta {
            if eta.len() != dim {
                return Err(Error::InvalidSoliton(format!(
                    "1-form has {} components on a {dim}-dimensional chart",
                    eta.len()
                )));
            }
        }
        if kind == SolitonKind::QuasiEinstein {
            let beta = self.beta.as_ref().expect("validated above");
            if beta.is_zero_literal() || (beta.is_constant() && beta.eval(&vec![0.0; dim])? == 0.0)
            {
                return Err(Error::InvalidSoliton(
                    "beta = 0 reduces the quasi-Einstein equation to the Einstein one; use type = \"einstein\"".into(),
                ));
            }
        }
        if !kind.uses_potential() && !self.psi.is_constant() {
            return Err(Error::InvalidSoliton(format!(
                "soliton type `{kind}` takes no potential"
            )));
        }
        Ok(())
    }

    /// Value of a scalar field at `p`.
    pub fn value(&self, name: &'static str, p: &[f64]) -> Result<f64> {
        let e = match name {
            "lambda" => &self.lambda,
            "mu" => &self.mu,
            "f" => &self.f,
            "alpha" => &self.alpha,
            "beta" => &self.beta,
            "gamma" => &self.gamma,
            _ => &None,
        };
        match e {
            Some(e) => Ok(e.eval(p)?),
            None => Err(Error::MissingField {
                kind: self.kind.name(),
                field: name,
            }),
        }
    }

    /// Components of η (or `A`) at `p`.
    pub fn form(&self, p: &[f64]) -> Result<DVector<f64>> {
        let eta = self.eta.as_ref().ok_or(Error::MissingField {
            kind: self.kind.name(),
            field: "eta",
        })?;
        let vals = eta
            .iter()
            .map(|e| e.eval(p))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        Ok(DVector::from_vec(vals))
    }
}
