use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{
    closed_vs_oracle, factor_trace, flatness_gate, formula_name, other, require_factor_dims,
    ricci_contraction, skip_all, spread_note, symmetry_defect, CurvatureVariant, SpecialContext,
    DIMENSION_SKIP,
};
use crate::dwp::{Factor, Formula, Lift, ProductPoint, RiemannClass};
use crate::error::{Error, Result};
use crate::geometry::{kulkarni_nomizu_matrices, ChartManifold, PointGeometry, TensorValue};
use crate::residual::{compare, ResidualSummary, TermSum};
use crate::solitons::leaf_points;

/// Same-factor patterns of `ℋ(A,B)C` with closed forms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConharmonicClass {
    Xxx,
    Uuu,
}

impl ConharmonicClass {
    pub const ALL: [ConharmonicClass; 2] = [ConharmonicClass::Xxx, ConharmonicClass::Uuu];

    pub fn name(self) -> &'static str {
        match self {
            ConharmonicClass::Xxx => "xxx",
            ConharmonicClass::Uuu => "uuu",
        }
    }

    pub fn factor(self) -> Factor {
        match self {
            ConharmonicClass::Xxx => Factor::First,
            ConharmonicClass::Uuu => Factor::Second,
        }
    }
}

fn require_dim(n: usize) -> Result<()> {
    if n >= 3 {
        return Ok(());
    }
    Err(Error::Dimension {
        operation: "conharmonic curvature",
        requirement: "m >= 3",
        found: format!("m = {n}"),
    })
}

/// `ℋ = R − (1/(m−2)) Ric∧g` in coordinates.
pub fn conharmonic_tensor(geo: &PointGeometry) -> Result<TensorValue> {
    let n = geo.dim();
    require_dim(n)?;
    let kn = kulkarni_nomizu_matrices(geo.ricci(), geo.metric()).scale(1.0 / (n as f64 - 2.0));
    Ok(geo.riemann_tensor().combine(&kn, |r, s| r - s))
}

pub fn conharmonic_oracle(m: &ChartManifold, p: &[f64]) -> Result<TensorValue> {
    conharmonic_tensor(&m.geometry_at(p)?)
}

/// `ℋ(X,Y)Z = R(X,Y)Z − (g(Y,Z)QX − g(X,Z)QY + Ric(Y,Z)X − Ric(X,Z)Y)/(m−2)`.
pub fn conharmonic_vector(
    geo: &PointGeometry,
    x: &DVector<f64>,
    y: &DVector<f64>,
    z: &DVector<f64>,
) -> Result<DVector<f64>> {
    let n = geo.dim();
    require_dim(n)?;
    let q = geo.ricci_operator();
    let ric = |a: &DVector<f64>, b: &DVector<f64>| (a.transpose() * geo.ricci() * b)[(0, 0)];
    let sum = &q * x * geo.inner(y, z) - &q * y * geo.inner(x, z) + x * ric(y, z) - y * ric(x, z);
    Ok(geo.curvature(x, y, z) - sum / (n as f64 - 2.0))
}

/// `ℋ(A,B)C` with all arguments on one factor, from the closed-form
/// curvature, Ricci tensor and Ricci operator. The original form uses the
/// tangential Ricci operator, which leaves a spurious normal component.
pub fn conharmonic_closed(
    pp: &ProductPoint,
    class: ConharmonicClass,
    a: &Lift,
    b: &Lift,
    c: &Lift,
    formula: Formula,
) -> Result<DVector<f64>> {
    let n = pp.dim();
    require_dim(n)?;
    let riemann_class = match class {
        ConharmonicClass::Xxx => RiemannClass::Xyz,
        ConharmonicClass::Uuu => RiemannClass::Uvw,
    };
    let r = pp.riemann(riemann_class, a, b, c)?;
    let (x, y, z) = (pp.embed(a), pp.embed(b), pp.embed(c));
    let ric = pp.ricci();
    let ric_of = |u: &DVector<f64>, v: &DVector<f64>| (u.transpose() * &ric * v)[(0, 0)];
    let sum = pp.ricci_operator(a, formula) * pp.inner(&y, &z)
        - pp.ricci_operator(b, formula) * pp.inner(&x, &z)
        + &x * ric_of(&y, &z)
        - &y * ric_of(&x, &z);
    Ok(r - sum / (n as f64 - 2.0))
}

/// `(f, λ)` of the gradient f-almost Ricci soliton `f h^{f₁} + ¹Ric = λ g₁`
/// that conharmonic flatness induces on factor `which` (mirror for factor
/// 2). `λ₁ = f₂²/(m−m₁) (¹τ/f₂² − m₂/(f₁f₂²) Δ₁f₁ + (m₁−1)((m−2)g(∇l,∇l) − 2Δl))`
/// in both forms; `f = (m₁−2)m₂/((m−m₁)f₁)` corrected and
/// `−m₂(1−(m₁−1)f₂²)/((m−m₁)f₁f₂²)` original.
pub fn conharmonic_soliton(pp: &ProductPoint, which: Factor, formula: Formula) -> (f64, f64) {
    let m = pp.dim() as f64;
    let mw = pp.factor_dim(which) as f64;
    let mo = pp.factor_dim(which.other()) as f64;
    let geo = pp.factor_geometry(which);
    let fj = pp.warping_jet(which);
    let fw = fj.value;
    let fo = pp.warping_value(which.other());
    let lap_fw = geo.trace(&geo.hessian(fj));
    let grad = pp.log_norm2(which.other());
    let lap = pp.log_laplacian(which.other());
    let lambda = fo * fo / (m - mw)
        * (geo.scalar() / (fo * fo) - mo / (fw * fo * fo) * lap_fw
            + (mw - 1.0) * ((m - 2.0) * grad - 2.0 * lap));
    let f = match formula {
        Formula::Corrected => (mw - 2.0) * mo / ((m - mw) * fw),
        Formula::Original => -mo * (1.0 - (mw - 1.0) * fo * fo) / ((m - mw) * fw * fo * fo),
    };
    (f, lambda)
}

/// Terms of `f h_w^{f_w} + Ric_w − λ_w g_w` on factor `which`.
pub fn conharmonic_factor_equation(pp: &ProductPoint, which: Factor, formula: Formula) -> TermSum {
    let geo = pp.factor_geometry(which);
    let (f, lambda) = conharmonic_soliton(pp, which, formula);
    let d = geo.dim();
    let mut t = TermSum::new(d * d);
    t.add_matrix(&(geo.hessian(pp.warping_jet(which)) * f));
    t.add_matrix(geo.ricci());
    t.add_matrix(&(geo.metric() * -lambda));
    t
}

fn factor_claim(ctx: &SpecialContext, id: &str, which: Factor, gate_note: &str) -> ResidualSummary {
    let pts = leaf_points(ctx.dwp, ctx.sweep.points, ctx.anchor, which);
    let sweep = ctx.sweep.with_points(&pts);
    let eval = |p: &[f64], formula: Formula| -> Result<f64> {
        Ok(conharmonic_factor_equation(&ctx.dwp.at(p)?, which, formula).residual())
    };
    let mut s = sweep.max(id, |p| eval(p, ctx.formula));
    let data: Result<Vec<(f64, f64)>> = sweep
        .exec
        .map(&pts, |p| {
            Ok(conharmonic_soliton(&ctx.dwp.at(p)?, which, ctx.formula))
        })
        .into_iter()
        .collect();
    if let Ok(data) = data {
        let i = which.index();
        let fs: Vec<f64> = data.iter().map(|d| d.0).collect();
        let ls: Vec<f64> = data.iter().map(|d| d.1).collect();
        s = s
            .with_note(spread_note(&format!("f_{i}"), &fs))
            .with_note(spread_note(&format!("lambda_{i}"), &ls));
    }
    let alt = other(ctx.formula);
    if let Ok(items) = sweep.values(|p| eval(p, alt)) {
        let worst = items.iter().map(|r| r.value).fold(0.0, f64::max);
        s = s.with_note(format!(
            "{} coefficient f: max residual {worst:e}",
            formula_name(alt)
        ));
    }
    s.with_note(gate_note)
}

fn identity(ctx: &SpecialContext, id: &str, which: Factor) -> ResidualSummary {
    let pts = leaf_points(ctx.dwp, ctx.sweep.points, ctx.anchor, which);
    ctx.sweep.with_points(&pts).max(id, |p| {
        let pp = ctx.dwp.at(p)?;
        let geo = ctx.dwp.oracle_at(p)?;
        let m = pp.dim() as f64;
        let mw = pp.factor_dim(which) as f64;
        let traced = factor_trace(&pp, which, |x, y, z| {
            conharmonic_vector(&geo, x, y, z)
                .unwrap_or_else(|_| DVector::from_element(x.len(), f64::NAN))
        }) * ((m - 2.0) / (m - mw));
        let t = conharmonic_factor_equation(&pp, which, Formula::Corrected);
        Ok(compare(traced.as_slice(), t.values()))
    })
}

/// Largest component of `ℋ` whose indices are not all on one factor.
fn mixed_norm(ctx: &SpecialContext) -> Result<f64> {
    let m1 = ctx.dwp.m1();
    let m = ctx.dwp.product();
    let vals: Result<Vec<f64>> = ctx
        .sweep
        .exec
        .map(ctx.sweep.points, |p| {
            let t = conharmonic_oracle(m, p)?;
            let n = m.dim();
            let mut worst: f64 = 0.0;
            for x in 0..n {
                for y in 0..n {
                    for z in 0..n {
                        for w in 0..n {
                            let firsts = [x, y, z, w].iter().filter(|&&i| i < m1).count();
                            if firsts != 0 && firsts != 4 {
                                worst = worst.max(t.get(&[x, y, z, w]).abs());
                            }
                        }
                    }
                }
            }
            Ok(worst)
        })
        .into_iter()
        .collect();
    Ok(vals?.into_iter().fold(0.0, f64::max))
}

/// Closed forms against the oracle, algebraic properties of `ℋ`, and the
/// factor solitons induced by conharmonic flatness.
pub fn conharmonic_checks(ctx: &SpecialContext, prefix: &str) -> Vec<ResidualSummary> {
    let m = ctx.dwp.product();
    let tol = ctx.sweep.tolerance;
    let class_ids: Vec<String> = ConharmonicClass::ALL
        .iter()
        .map(|c| format!("{prefix}.{}", c.name()))
        .collect();
    let mut ids = class_ids.clone();
    ids.extend(
        [
            "mixed",
            "symmetries",
            "trace",
            "factor1",
            "factor1.identity",
            "factor2",
            "factor2.identity",
        ]
        .iter()
        .map(|s| format!("{prefix}.{s}")),
    );
    if require_dim(m.dim()).is_err() {
        return skip_all(&ids, tol, "dimension: requires m >= 3");
    }
    let mut out = Vec::new();
    for (class, id) in ConharmonicClass::ALL.into_iter().zip(&class_ids) {
        let w = class.factor();
        out.push(closed_vs_oracle(
            ctx,
            id,
            [w; 3],
            |pp, [a, b, c], f| conharmonic_closed(pp, class, a, b, c, f),
            conharmonic_vector,
        ));
    }
    let mixed = match mixed_norm(ctx) {
        Ok(v) => format!(
            "oracle-only: no closed form for mixed-factor components; max |H| there = {v:e}"
        ),
        Err(e) => format!("oracle-only: evaluation failed: {e}"),
    };
    out.push(ResidualSummary::skipped(
        format!("{prefix}.mixed"),
        tol,
        mixed,
    ));
    out.push(ctx.sweep.max(&format!("{prefix}.symmetries"), |p| {
        Ok(symmetry_defect(&conharmonic_oracle(m, p)?))
    }));
    out.push(
        ctx.sweep
            .max(&format!("{prefix}.trace"), |p| {
                let geo = m.geometry_at(p)?;
                let traced = ricci_contraction(&conharmonic_tensor(&geo)?, geo.inverse());
                let expect: DMatrix<f64> = geo.metric() * (-geo.scalar() / (m.dim() as f64 - 2.0));
                Ok(compare(traced.as_slice(), expect.as_slice()))
            })
            .with_note("Ricci contraction equals -tau/(m-2) g"),
    );

    let dims = require_factor_dims(ctx.dwp, "conharmonic flatness consequences").is_ok();
    let gate = flatness_gate(ctx, CurvatureVariant::Conharmonic).and_then(|note| {
        if dims {
            Ok(note)
        } else {
            Err(DIMENSION_SKIP.to_string())
        }
    });
    for which in [Factor::First, Factor::Second] {
        let id = format!("{prefix}.factor{}", which.index());
        out.push(match &gate {
            Ok(note) => factor_claim(ctx, &id, which, note),
            Err(reason) => ResidualSummary::skipped(&id, tol, reason.clone()),
        });
        out.push(identity(ctx, &format!("{id}.identity"), which));
    }
    out
}
