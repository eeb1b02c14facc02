//! Concircular and conharmonic curvature: brute-force tensors, closed forms
//! on a doubly warped product, and the factor structures that flatness
//! forces.
//!
//! Both tensors are algebraic curvature tensors built from `R`, `Ric`, `τ`
//! and the metric:
//!
//! - `𝒞 = R − τ/(m(m−1)) G` with `G = ½ g∧g`,
//! - `ℋ = R − 1/(m−2) Ric∧g`, defined for `m ≥ 3`.
//!
//! "Flat" is decided numerically: the largest coordinate component over
//! the samples must be within tolerance.

mod concircular;
mod conharmonic;
mod search;

pub use concircular::{
    concircular_checks, concircular_closed, concircular_coefficient, concircular_mu,
    concircular_oracle, concircular_tensor, concircular_vector,
};
pub use conharmonic::{
    conharmonic_checks, conharmonic_closed, conharmonic_factor_equation, conharmonic_oracle,
    conharmonic_soliton, conharmonic_tensor, conharmonic_vector, ConharmonicClass,
};
pub use search::{grid_search, tensor_norm, SearchResult};

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::check::Sweep;
use crate::dwp::{DoublyWarpedProduct, Factor, Formula, ProductPoint};
use crate::error::{Error, Result};
use crate::geometry::{ChartManifold, PointGeometry, TensorValue};
use crate::residual::{normalized, ResidualSummary};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CurvatureVariant {
    Concircular,
    Conharmonic,
}

impl CurvatureVariant {
    pub fn name(self) -> &'static str {
        match self {
            CurvatureVariant::Concircular => "concircular",
            CurvatureVariant::Conharmonic => "conharmonic",
        }
    }

    /// The (0,4) tensor at a point.
    pub fn tensor(self, geo: &PointGeometry) -> Result<TensorValue> {
        match self {
            CurvatureVariant::Concircular => concircular_tensor(geo),
            CurvatureVariant::Conharmonic => conharmonic_tensor(geo),
        }
    }

    pub fn oracle(self, m: &ChartManifold, p: &[f64]) -> Result<TensorValue> {
        self.tensor(&m.geometry_at(p)?)
    }
}

/// Shared inputs of the concircular and conharmonic check groups.
#[derive(Debug, Clone, Copy)]
pub struct SpecialContext<'a> {
    pub dwp: &'a DoublyWarpedProduct,
    pub anchor: &'a [f64],
    pub sweep: Sweep<'a>,
    pub formula: Formula,
}

/// Largest violation of the algebraic curvature symmetries
/// `T(X,Y,Z,W) = −T(Y,X,Z,W) = −T(X,Y,W,Z) = T(Z,W,X,Y)` and the first
/// Bianchi identity, normalized by the tensor's size.
pub fn symmetry_defect(t: &TensorValue) -> f64 {
    let n = t.shape()[0];
    let mut worst: f64 = 0.0;
    for x in 0..n {
        for y in 0..n {
            for z in 0..n {
                for w in 0..n {
                    let v = t.get(&[x, y, z, w]);
                    worst = worst
                        .max((v + t.get(&[y, x, z, w])).abs())
                        .max((v + t.get(&[x, y, w, z])).abs())
                        .max((v - t.get(&[z, w, x, y])).abs())
                        .max((v + t.get(&[y, z, x, w]) + t.get(&[z, x, y, w])).abs());
                }
            }
        }
    }
    normalized(worst, t.max_abs())
}

/// `g^{xw} T_{xyzw}`: the contraction over the first and last slots.
pub fn ricci_contraction(
    t: &TensorValue,
    inverse: &nalgebra::DMatrix<f64>,
) -> nalgebra::DMatrix<f64> {
    let n = inverse.nrows();
    nalgebra::DMatrix::from_fn(n, n, |y, z| {
        let mut s = 0.0;
        for x in 0..n {
            for w in 0..n {
                s += inverse[(x, w)] * t.get(&[x, y, z, w]);
            }
        }
        s
    })
}

/// `Σ_a [T(∂_a, Y)Z]^a` over the coordinates of `which`, for a (1,3)
/// tensor given as a vector-valued map on product vectors. `Y` and `Z`
/// range over the coordinate vectors of `which`.
fn factor_trace<F>(pp: &ProductPoint, which: Factor, t: F) -> nalgebra::DMatrix<f64>
where
    F: Fn(&DVector<f64>, &DVector<f64>, &DVector<f64>) -> DVector<f64>,
{
    let d = pp.factor_dim(which);
    let off = pp.offset(which);
    let e = |i: usize| {
        let mut v = DVector::zeros(pp.dim());
        v[off + i] = 1.0;
        v
    };
    nalgebra::DMatrix::from_fn(d, d, |y, z| {
        (0..d).map(|a| t(&e(a), &e(y), &e(z))[off + a]).sum()
    })
}

/// Every ordered coordinate triple whose factors follow `pattern`.
fn coordinate_triples(pp: &ProductPoint, pattern: [Factor; 3]) -> Vec<[crate::dwp::Lift; 3]> {
    use crate::dwp::Lift;
    let basis = |w: Factor| -> Vec<Lift> {
        let d = pp.factor_dim(w);
        (0..d).map(|i| Lift::basis(w, d, i)).collect()
    };
    let (b0, b1, b2) = (basis(pattern[0]), basis(pattern[1]), basis(pattern[2]));
    let mut out = Vec::new();
    for a in &b0 {
        for b in &b1 {
            for c in &b2 {
                out.push([a.clone(), b.clone(), c.clone()]);
            }
        }
    }
    out
}

fn formula_name(formula: Formula) -> &'static str {
    match formula {
        Formula::Corrected => "corrected",
        Formula::Original => "original",
    }
}

fn other(formula: Formula) -> Formula {
    match formula {
        Formula::Corrected => Formula::Original,
        Formula::Original => Formula::Corrected,
    }
}

/// Skip reason for the factor consequences on a product with a
/// one-dimensional factor. Flatness is tested first, so this reason only
/// appears on flat products.
const DIMENSION_SKIP: &str = "dimension: requires m1 > 1 and m2 > 1";

fn require_factor_dims(dwp: &DoublyWarpedProduct, operation: &'static str) -> Result<()> {
    if dwp.m1() > 1 && dwp.m2() > 1 {
        return Ok(());
    }
    Err(Error::Dimension {
        operation,
        requirement: "m1 > 1 and m2 > 1",
        found: format!("m1 = {}, m2 = {}", dwp.m1(), dwp.m2()),
    })
}

/// Largest coordinate component of the variant over the samples.
fn flatness(ctx: &SpecialContext, variant: CurvatureVariant) -> Result<f64> {
    let m = ctx.dwp.product();
    let vals: Result<Vec<f64>> = ctx
        .sweep
        .exec
        .map(ctx.sweep.points, |p| Ok(variant.oracle(m, p)?.max_abs()))
        .into_iter()
        .collect();
    Ok(vals?.into_iter().fold(0.0, f64::max))
}

/// Skip reason when the variant is not numerically flat on the samples.
fn flatness_gate(
    ctx: &SpecialContext,
    variant: CurvatureVariant,
) -> std::result::Result<String, String> {
    let symbol = match variant {
        CurvatureVariant::Concircular => "C",
        CurvatureVariant::Conharmonic => "H",
    };
    match flatness(ctx, variant) {
        Ok(norm) if norm <= ctx.sweep.tolerance => Ok(format!(
            "numerically flat on the sampled region (max |{symbol}| = {norm:e})"
        )),
        Ok(norm) => Err(format!(
            "hypothesis fails (max |{symbol}| = {norm:e} exceeds tolerance {:e})",
            ctx.sweep.tolerance
        )),
        Err(e) => Err(format!("hypothesis could not be evaluated: {e}")),
    }
}

fn closed_vs_oracle<F, G>(
    ctx: &SpecialContext,
    id: &str,
    pattern: [Factor; 3],
    closed: F,
    oracle: G,
) -> ResidualSummary
where
    F: Fn(&ProductPoint, &[crate::dwp::Lift; 3], Formula) -> Result<DVector<f64>> + Sync + Send,
    G: Fn(&PointGeometry, &DVector<f64>, &DVector<f64>, &DVector<f64>) -> Result<DVector<f64>>
        + Sync
        + Send,
{
    let eval = |p: &[f64], formula: Formula| -> Result<f64> {
        let pp = ctx.dwp.at(p)?;
        let geo = ctx.dwp.oracle_at(p)?;
        let mut worst: f64 = 0.0;
        for args in coordinate_triples(&pp, pattern) {
            let [a, b, c] = &args;
            let want = oracle(&geo, &pp.embed(a), &pp.embed(b), &pp.embed(c))?;
            let got = closed(&pp, &args, formula)?;
            worst = worst.max(crate::residual::compare(got.as_slice(), want.as_slice()));
        }
        Ok(worst)
    };
    let s = ctx.sweep.max(id, |p| eval(p, ctx.formula));
    let alt = other(ctx.formula);
    match ctx.sweep.values(|p| eval(p, alt)) {
        Ok(items) => {
            let worst = items.iter().map(|r| r.value).fold(0.0, f64::max);
            s.with_note(format!(
                "{} closed form: max residual {worst:e}",
                formula_name(alt)
            ))
        }
        Err(_) => s,
    }
}

fn spread_note(name: &str, values: &[f64]) -> String {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    format!("{name} ranges over [{lo:e}, {hi:e}]")
}

fn skip_all(ids: &[String], tol: f64, reason: &str) -> Vec<ResidualSummary> {
    ids.iter()
        .map(|id| ResidualSummary::skipped(id, tol, reason))
        .collect()
}
