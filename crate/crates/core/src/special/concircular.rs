use nalgebra::{DMatrix, DVector};

use super::{
    closed_vs_oracle, factor_trace, flatness_gate, formula_name, other, require_factor_dims,
    ricci_contraction, skip_all, spread_note, symmetry_defect, CurvatureVariant, SpecialContext,
    DIMENSION_SKIP,
};
use crate::dwp::{Factor, Formula, Lift, ProductPoint, RiemannClass};
use crate::error::{Error, Result};
use crate::geometry::{kulkarni_nomizu_matrices, ChartManifold, PointGeometry, TensorValue};
use crate::residual::{compare, normalized, PointResidual, ResidualSummary};
use crate::solitons::leaf_points;

/// Coefficient of `G` in `𝒞`. The original form halves it.
pub fn concircular_coefficient(tau: f64, m: usize, formula: Formula) -> f64 {
    let m = m as f64;
    match formula {
        Formula::Corrected => tau / (m * (m - 1.0)),
        Formula::Original => tau / (2.0 * m * (m - 1.0)),
    }
}

fn require_dim(n: usize) -> Result<()> {
    if n >= 2 {
        return Ok(());
    }
    Err(Error::Dimension {
        operation: "concircular curvature",
        requirement: "m >= 2",
        found: format!("m = {n}"),
    })
}

/// `𝒞(X,Y,Z,W)` in coordinates.
pub fn concircular_tensor(geo: &PointGeometry) -> Result<TensorValue> {
    require_dim(geo.dim())?;
    let c = concircular_coefficient(geo.scalar(), geo.dim(), Formula::Corrected);
    let g = geo.metric();
    let big_g = kulkarni_nomizu_matrices(g, g).scale(0.5 * c);
    Ok(geo.riemann_tensor().combine(&big_g, |r, s| r - s))
}

pub fn concircular_oracle(m: &ChartManifold, p: &[f64]) -> Result<TensorValue> {
    concircular_tensor(&m.geometry_at(p)?)
}

/// `𝒞(X,Y)Z = R(X,Y)Z − c (g(Y,Z) X − g(X,Z) Y)`.
pub fn concircular_vector(
    geo: &PointGeometry,
    x: &DVector<f64>,
    y: &DVector<f64>,
    z: &DVector<f64>,
) -> DVector<f64> {
    let c = concircular_coefficient(geo.scalar(), geo.dim(), Formula::Corrected);
    geo.curvature(x, y, z) - (x * geo.inner(y, z) - y * geo.inner(x, z)) * c
}

/// `𝒞(A,B)C` for one of the six factor patterns, from the closed-form
/// curvature and factor metrics.
pub fn concircular_closed(
    pp: &ProductPoint,
    class: RiemannClass,
    a: &Lift,
    b: &Lift,
    c: &Lift,
    formula: Formula,
) -> Result<DVector<f64>> {
    let r = pp.riemann(class, a, b, c)?;
    let k = concircular_coefficient(pp.scalar(), pp.dim(), formula);
    let f1 = pp.warping_value(Factor::First);
    let f2 = pp.warping_value(Factor::Second);
    let g1 = |u: &Lift, v: &Lift| pp.factor_geometry(Factor::First).inner(&u.comps, &v.comps);
    let g2 = |u: &Lift, v: &Lift| pp.factor_geometry(Factor::Second).inner(&u.comps, &v.comps);
    let (av, bv) = (pp.embed(a), pp.embed(b));
    Ok(match class {
        RiemannClass::Xyz => r - (&av * g1(b, c) - &bv * g1(a, c)) * (k * f2 * f2),
        RiemannClass::Xyu | RiemannClass::Uvx => r,
        RiemannClass::Xuy => r + &bv * (k * f2 * f2 * g1(a, c)),
        RiemannClass::Uxv => r + &bv * (k * f1 * f1 * g2(a, c)),
        RiemannClass::Uvw => r - (&av * g2(b, c) - &bv * g2(a, c)) * (k * f1 * f1),
    })
}

/// Einstein constant that concircular flatness forces on factor `which`:
/// `μ₁ = (m₁ − 1) f₂² (g(∇l, ∇l) + τ/(m(m−1)))` and its mirror. The original
/// form is `f₂² (1 − m₁)(g(∇l, ∇l) + τ/(2m(m−1)))`.
pub fn concircular_mu(pp: &ProductPoint, which: Factor, formula: Formula) -> f64 {
    let mw = pp.factor_dim(which) as f64;
    let fo = pp.warping_value(which.other());
    let grad = pp.log_norm2(which.other());
    let c = concircular_coefficient(pp.scalar(), pp.dim(), formula);
    match formula {
        Formula::Corrected => (mw - 1.0) * fo * fo * (grad + c),
        Formula::Original => fo * fo * (1.0 - mw) * (grad + c),
    }
}

fn einstein_residual(pp: &ProductPoint, which: Factor, formula: Formula) -> f64 {
    let geo = pp.factor_geometry(which);
    let mu = concircular_mu(pp, which, formula);
    compare(geo.ricci().as_slice(), (geo.metric() * mu).as_slice())
}

/// `Y(k) X − X(k) Y` over coordinate pairs of the factor carrying `k`
/// (or the mirror with `l`), as a largest component.
fn wedge_defect(pp: &ProductPoint, which: Factor) -> f64 {
    let off = pp.offset(which);
    let d = pp.factor_dim(which);
    let dk = pp.log_gradient_covector(which);
    let mut worst: f64 = 0.0;
    for i in 0..d {
        for j in 0..d {
            let mut v = DVector::<f64>::zeros(d);
            v[i] += dk[off + j];
            v[j] -= dk[off + i];
            worst = worst.max(v.amax());
        }
    }
    worst
}

fn einstein_claim(
    ctx: &SpecialContext,
    id: &str,
    which: Factor,
    gate_note: &str,
) -> ResidualSummary {
    let pts = leaf_points(ctx.dwp, ctx.sweep.points, ctx.anchor, which);
    let sweep = ctx.sweep.with_points(&pts);
    let mut s = sweep.max(id, |p| {
        Ok(einstein_residual(&ctx.dwp.at(p)?, which, ctx.formula))
    });
    let mus: Result<Vec<f64>> = sweep
        .exec
        .map(&pts, |p| {
            Ok(concircular_mu(&ctx.dwp.at(p)?, which, ctx.formula))
        })
        .into_iter()
        .collect();
    if let Ok(mus) = mus {
        s = s.with_note(spread_note(&format!("mu_{}", which.index()), &mus));
    }
    let alt = other(ctx.formula);
    if let Ok(items) = sweep.values(|p| Ok(einstein_residual(&ctx.dwp.at(p)?, which, alt))) {
        let worst = items.iter().map(|r| r.value).fold(0.0, f64::max);
        s = s.with_note(format!(
            "{} Einstein constant: max residual {worst:e}",
            formula_name(alt)
        ));
    }
    s.with_note(gate_note)
}

/// `μ` compared with its value at the anchor along the leaf of `which`.
fn constancy_claim(
    ctx: &SpecialContext,
    id: &str,
    which: Factor,
    gate_note: &str,
) -> ResidualSummary {
    let pts = leaf_points(ctx.dwp, ctx.sweep.points, ctx.anchor, which);
    let base = match ctx.dwp.at(ctx.anchor) {
        Ok(pp) => concircular_mu(&pp, which, ctx.formula),
        Err(e) => return crate::check::failed(id, ctx.sweep.tolerance, &e),
    };
    ctx.sweep
        .with_points(&pts)
        .max(id, |p| {
            let mu = concircular_mu(&ctx.dwp.at(p)?, which, ctx.formula);
            Ok(normalized((mu - base).abs(), base.abs().max(mu.abs())))
        })
        .with_note(format!("anchor value mu_{} = {base:e}", which.index()))
        .with_note(gate_note)
}

/// Either the other factor's log-warping is constant or the wedge built
/// from this factor's log-warping vanishes. Reports the better branch.
fn dichotomy_claim(
    ctx: &SpecialContext,
    id: &str,
    which: Factor,
    gate_note: &str,
) -> ResidualSummary {
    let tol = ctx.sweep.tolerance;
    let normal = ctx
        .sweep
        .values(|p| Ok(ctx.dwp.at(p)?.log_gradient_covector(which.other()).amax()));
    let wedge = ctx
        .sweep
        .values(|p| Ok(wedge_defect(&ctx.dwp.at(p)?, which)));
    let (normal, wedge) = match (normal, wedge) {
        (Ok(n), Ok(w)) => (n, w),
        (Err(e), _) | (_, Err(e)) => return crate::check::failed(id, tol, &e),
    };
    let max = |v: &[PointResidual]| v.iter().map(|r| r.value).fold(0.0, f64::max);
    let (own, oth) = match which {
        Factor::First => ("k", "l"),
        Factor::Second => ("l", "k"),
    };
    let (items, branch) = if max(&normal) <= max(&wedge) {
        (
            normal,
            format!(
                "branch: d{oth} = 0, so f{} is constant and the product is singly warped",
                which.other().index()
            ),
        )
    } else {
        (
            wedge,
            format!(
                "branch: d{own}(Y) X - d{own}(X) Y = 0 on factor {}",
                which.index()
            ),
        )
    };
    ResidualSummary::from_points(id, tol, items)
        .with_note(branch)
        .with_note(gate_note)
}

fn identity(ctx: &SpecialContext, id: &str, which: Factor) -> ResidualSummary {
    let pts = leaf_points(ctx.dwp, ctx.sweep.points, ctx.anchor, which);
    ctx.sweep.with_points(&pts).max(id, |p| {
        let pp = ctx.dwp.at(p)?;
        let geo = ctx.dwp.oracle_at(p)?;
        let traced = factor_trace(&pp, which, |x, y, z| concircular_vector(&geo, x, y, z));
        let fgeo = pp.factor_geometry(which);
        let direct: DMatrix<f64> =
            fgeo.ricci() - fgeo.metric() * concircular_mu(&pp, which, Formula::Corrected);
        Ok(compare(traced.as_slice(), direct.as_slice()))
    })
}

/// Closed forms against the oracle, algebraic properties of `𝒞`, and the
/// factor consequences of concircular flatness.
pub fn concircular_checks(ctx: &SpecialContext, prefix: &str) -> Vec<ResidualSummary> {
    let m = ctx.dwp.product();
    let tol = ctx.sweep.tolerance;
    let mut out = Vec::new();
    for class in RiemannClass::ALL {
        out.push(closed_vs_oracle(
            ctx,
            &format!("{prefix}.{}", class.name()),
            class.pattern(),
            |pp, [a, b, c], f| concircular_closed(pp, class, a, b, c, f),
            |geo, x, y, z| Ok(concircular_vector(geo, x, y, z)),
        ));
    }
    out.push(ctx.sweep.max(&format!("{prefix}.symmetries"), |p| {
        Ok(symmetry_defect(&concircular_oracle(m, p)?))
    }));
    out.push(ctx.sweep.max(&format!("{prefix}.trace"), |p| {
        let geo = m.geometry_at(p)?;
        let t = concircular_tensor(&geo)?;
        let full = geo.trace(&ricci_contraction(&t, geo.inverse()));
        Ok(normalized(full.abs(), geo.scalar().abs()))
    }));

    let claims: Vec<String> = [1, 2]
        .iter()
        .flat_map(|i| {
            [
                format!("{prefix}.factor{i}.einstein"),
                format!("{prefix}.factor{i}.constancy"),
                format!("{prefix}.dichotomy{i}"),
            ]
        })
        .collect();
    let identities: Vec<String> = [1, 2]
        .iter()
        .map(|i| format!("{prefix}.factor{i}.identity"))
        .collect();
    let dims = require_factor_dims(ctx.dwp, "concircular flatness consequences").is_ok();
    let gate = flatness_gate(ctx, CurvatureVariant::Concircular).and_then(|note| {
        if dims {
            Ok(note)
        } else {
            Err(DIMENSION_SKIP.to_string())
        }
    });
    match gate {
        Err(reason) => out.extend(skip_all(&claims, tol, &reason)),
        Ok(note) => {
            for which in [Factor::First, Factor::Second] {
                let i = which.index();
                out.push(einstein_claim(
                    ctx,
                    &format!("{prefix}.factor{i}.einstein"),
                    which,
                    &note,
                ));
                out.push(constancy_claim(
                    ctx,
                    &format!("{prefix}.factor{i}.constancy"),
                    which,
                    &note,
                ));
                out.push(dichotomy_claim(
                    ctx,
                    &format!("{prefix}.dichotomy{i}"),
                    which,
                    &note,
                ));
            }
        }
    }
    if !dims {
        out.extend(skip_all(&identities, tol, DIMENSION_SKIP));
        return out;
    }
    for (id, which) in identities.iter().zip([Factor::First, Factor::Second]) {
        out.push(identity(ctx, id, which));
    }
    out
}
