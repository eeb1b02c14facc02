//! Structures induced on the factors of a doubly warped product by a soliton
//! on the product, and the mixed-block conditions.
//!
//! For each supported kind the factor equation `E_i = 0` is built from
//! factor data and the split formulas. `E_i` coincides with the `M_i` block
//! of the product equation for every potential, which the `.identity` checks
//! confirm without any soliton hypothesis. The factor claims themselves are
//! only reported when the product equation holds.

use nalgebra::{DMatrix, DVector};

use super::{contraction_pair, equation, unit_form, PointState, SolitonKind, SolitonSpec};
use crate::check::Sweep;
use crate::dwp::{DoublyWarpedProduct, Factor, Formula, ProductPoint};
use crate::error::{Error, Result};
use crate::expr::Jet2;
use crate::geometry::PointGeometry;
use crate::residual::{compare, ResidualSummary, TermSum};

/// Everything a factor check needs. `sweep.points` are product sample
/// points; factor points are built from them and the anchor.
#[derive(Debug, Clone, Copy)]
pub struct FactorContext<'a> {
    pub dwp: &'a DoublyWarpedProduct,
    pub spec: &'a SolitonSpec,
    pub anchor: &'a [f64],
    pub sweep: Sweep<'a>,
    pub formula: Formula,
}

/// Points on the leaf of `which` through the anchor: the `which` block of
/// each sample with the other block taken from the anchor.
pub fn leaf_points(
    dwp: &DoublyWarpedProduct,
    points: &[Vec<f64>],
    anchor: &[f64],
    which: Factor,
) -> Vec<Vec<f64>> {
    let m1 = dwp.m1();
    points
        .iter()
        .map(|p| match which {
            Factor::First => p[..m1].iter().chain(&anchor[m1..]).copied().collect(),
            Factor::Second => anchor[..m1].iter().chain(&p[m1..]).copied().collect(),
        })
        .collect()
}

/// `(1/f) h^f − h^{ln f} − (1/f²) df⊗df` on factor `which`, normalized.
pub fn log_hessian_identity(pp: &ProductPoint, which: Factor) -> f64 {
    let geo = pp.factor_geometry(which);
    let f = pp.warping_jet(which);
    let lhs = geo.hessian(f) / f.value;
    let rhs =
        geo.hessian(pp.log_jet(which)) + &f.gradient * f.gradient.transpose() / (f.value * f.value);
    compare(lhs.as_slice(), rhs.as_slice())
}

/// Pointwise fit `Ric = α g + β A⊗A` with `|A| = 1`.
#[derive(Debug, Clone)]
pub struct QuasiEinsteinFit {
    pub alpha: f64,
    pub beta: f64,
    /// Covector components of `A`.
    pub form: DVector<f64>,
    /// Spread of the eigenvalues assigned to `α`; zero for an exact fit.
    pub spread: f64,
}

/// Fits α, β and A from the eigen-decomposition of `g^{-1/2} Ric g^{-1/2}`.
/// The eigenvalue of multiplicity `m − 1` gives α and the remaining one
/// gives `α + β` and the direction of ξ.
pub fn fit_quasi_einstein(geo: &PointGeometry) -> Result<QuasiEinsteinFit> {
    let n = geo.dim();
    let l = geo
        .metric()
        .clone()
        .cholesky()
        .ok_or_else(|| Error::NotPositiveDefinite {
            point: geo.point().to_vec(),
        })?
        .l();
    let linv = l
        .clone()
        .try_inverse()
        .expect("Cholesky factor is invertible");
    let s = &linv * geo.ricci() * linv.transpose();
    let eig = ((&s + s.transpose()) * 0.5).symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let vals: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    // Odd one out is either the largest or the smallest eigenvalue.
    let spread_low = vals[n - 2] - vals[0];
    let spread_high = vals[n - 1] - vals[1];
    let (odd, cluster) = if n == 2 || spread_low <= spread_high {
        (n - 1, 0..n - 1)
    } else {
        (0, 1..n)
    };
    let alpha = vals[cluster.clone()].iter().sum::<f64>() / (n - 1) as f64;
    let spread = vals[cluster.end - 1] - vals[cluster.start];
    let v = eig.eigenvectors.column(order[odd]).into_owned();
    Ok(QuasiEinsteinFit {
        alpha,
        beta: vals[odd] - alpha,
        form: l * v,
        spread,
    })
}

/// Factor equation for `which` at a product point, with the factor λ.
pub(super) fn factor_equation(
    ctx: &FactorContext,
    pp: &ProductPoint,
    psi: &Jet2,
    which: Factor,
    formula: Formula,
) -> Result<(TermSum, f64)> {
    let spec = ctx.spec;
    let p = pp.point();
    let other = which.other();
    let geo = pp.factor_geometry(which);
    let g = geo.metric();
    let d = pp.factor_dim(which);
    let (mw, mo) = (d as f64, pp.factor_dim(other) as f64);
    let m = pp.dim() as f64;
    let (fw, fo) = (pp.warping_value(which), pp.warping_value(other));
    let h_psi = pp.factor_hessian(psi, which);
    let h_log = geo.hessian(pp.log_jet(which));
    let dlog = pp.restrict(pp.log_gradient_covector(which), which);
    let dd = &dlog * dlog.transpose();
    let lap_w = pp.log_laplacian(which);
    let lap_o = pp.log_laplacian(other);
    let grad_o_psi = pp.log_gradient(other).dot(&psi.gradient);
    let mut t = TermSum::new(d * d);
    let lambda_w = match spec.kind {
        SolitonKind::Yamabe => {
            let lambda = spec.value("lambda", p)?;
            let geo_o = pp.factor_geometry(other);
            let lap_fw = geo.trace(&geo.hessian(pp.warping_jet(which)));
            let lap_fo = geo_o.trace(&geo_o.hessian(pp.warping_jet(other)));
            let lw = -(fo * fo) / (fw * fw) * geo_o.scalar()
                + fo * fo * (lambda + grad_o_psi + mw * lap_o + mo * lap_w)
                + mo / fw * lap_fw
                + mw * fo / (fw * fw) * lap_fo;
            t.add_matrix(&h_psi);
            t.add_matrix(&(g * (lw - geo.scalar())));
            lw
        }
        SolitonKind::Ricci => {
            let lambda = spec.value("lambda", p)?;
            let lw = fo * fo * (lambda + lap_o - grad_o_psi);
            t.add_matrix(geo.ricci());
            t.add_matrix(&h_psi);
            t.add_matrix(&(&h_log * -mo));
            t.add_matrix(&(g * -lw));
            t.add_matrix(&(&dd * -mo));
            lw
        }
        SolitonKind::Riemann => {
            let lambda = spec.value("lambda", p)?;
            let lap_psi = pp.laplacian(psi);
            let lw = fo * fo * ((m - 1.0) * lambda + lap_o - lap_psi - (m - 2.0) * grad_o_psi);
            t.add_matrix(geo.ricci());
            t.add_matrix(&(&h_psi * (m - 2.0)));
            // The alternative second-factor potential subtracts m₁k, which is
            // constant along the second factor and so contributes no Hessian.
            if !(which == Factor::Second && formula == Formula::Original) {
                t.add_matrix(&(&h_log * -mo));
            }
            t.add_matrix(&(g * -lw));
            t.add_matrix(&(&dd * -mo));
            lw
        }
        SolitonKind::QuasiEinstein => {
            let alpha = spec.value("alpha", p)?;
            let oracle = ctx.dwp.oracle_at(p)?;
            let (a, beta) = unit_form(&oracle, &spec.form(p)?, spec.value("beta", p)?)?;
            let a_w = pp.restrict(&a, which);
            let lw = fo * fo * (alpha + lap_o);
            let f = -mo / fw;
            t.add_matrix(&(geo.hessian(pp.warping_jet(which)) * f));
            t.add_matrix(geo.ricci());
            t.add_matrix(&(g * -lw));
            t.add_matrix(&(&a_w * a_w.transpose() * -beta));
            lw
        }
        k => {
            return Err(Error::InvalidSoliton(format!(
                "no factor structure for soliton type `{k}`"
            )))
        }
    };
    Ok((t, lambda_w))
}

/// Unnormalized product equation whose diagonal blocks the factor
/// equations reproduce.
fn product_matrix(ctx: &FactorContext, p: &[f64]) -> Result<DMatrix<f64>> {
    let st = PointState::new(ctx.dwp.product(), ctx.spec, p)?;
    if ctx.spec.kind == SolitonKind::Riemann {
        return Ok(contraction_pair(ctx.spec, &st, p)?.1);
    }
    let n = st.dim();
    Ok(DMatrix::from_column_slice(
        n,
        n,
        equation(ctx.spec, &st, p)?.values(),
    ))
}

fn block(m: &DMatrix<f64>, pp: &ProductPoint, a: Factor, b: Factor) -> DMatrix<f64> {
    m.view(
        (pp.offset(a), pp.offset(b)),
        (pp.factor_dim(a), pp.factor_dim(b)),
    )
    .into_owned()
}

/// Terms of the mixed-block condition for the Yamabe and Ricci kinds.
fn mixed_terms(ctx: &FactorContext, pp: &ProductPoint, psi: &Jet2, formula: Formula) -> TermSum {
    let (m1, m2) = (pp.m1(), pp.m2());
    let dk = pp.restrict(pp.log_gradient_covector(Factor::First), Factor::First);
    let dl = pp.restrict(pp.log_gradient_covector(Factor::Second), Factor::Second);
    let dx = psi.gradient.rows(0, m1).into_owned();
    let du = psi.gradient.rows(m1, m2).into_owned();
    let mut t = TermSum::new(m1 * m2);
    if ctx.spec.kind == SolitonKind::Ricci {
        t.add_matrix(&(&dk * dl.transpose() * (pp.dim() as f64 - 2.0)));
    }
    match formula {
        Formula::Corrected => {
            t.add_matrix(&psi.hessian.view((0, m1), (m1, m2)).into_owned());
            t.add_matrix(&(-(&dx * dl.transpose())));
            t.add_matrix(&(-(&dk * du.transpose())));
        }
        Formula::Original => {
            t.add_matrix(&(&dk * du.transpose()));
            t.add_matrix(&(-(&dx * dl.transpose())));
        }
    }
    t
}

fn gate(ctx: &FactorContext, id: &str, product: &ResidualSummary) -> Option<ResidualSummary> {
    if product.passed() {
        return None;
    }
    Some(ResidualSummary::skipped(
        id,
        ctx.sweep.tolerance,
        format!(
            "hypothesis fails: product residual {:e} exceeds tolerance {:e}",
            product.max_abs_residual, product.tolerance
        ),
    ))
}

fn other(formula: Formula) -> Formula {
    match formula {
        Formula::Corrected => Formula::Original,
        Formula::Original => Formula::Corrected,
    }
}

fn formula_name(formula: Formula) -> &'static str {
    match formula {
        Formula::Corrected => "corrected",
        Formula::Original => "original",
    }
}

fn range_note(name: &str, values: &[f64], tol: f64) -> String {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let constant = if hi - lo <= tol {
        "constant"
    } else {
        "a function"
    };
    format!("{name} ranges over [{lo:e}, {hi:e}] ({constant} within tolerance)")
}

fn factor_claim(ctx: &FactorContext, id: &str, which: Factor) -> ResidualSummary {
    let pts = leaf_points(ctx.dwp, ctx.sweep.points, ctx.anchor, which);
    let sweep = ctx.sweep.with_points(&pts);
    let eval = |p: &[f64], formula: Formula| -> Result<(f64, f64)> {
        let pp = ctx.dwp.at(p)?;
        let psi = ctx.spec.psi.jet(p)?;
        let (t, lw) = factor_equation(ctx, &pp, &psi, which, formula)?;
        Ok((t.residual(), lw))
    };
    let mut s = sweep.max(id, |p| Ok(eval(p, ctx.formula)?.0));
    let lambdas: Result<Vec<f64>> = sweep
        .exec
        .map(&pts, |p| Ok(eval(p, ctx.formula)?.1))
        .into_iter()
        .collect();
    if let Ok(l) = lambdas {
        s = s.with_note(range_note(
            &format!("lambda_{}", which.index()),
            &l,
            ctx.sweep.tolerance,
        ));
    }
    s = s.with_note(format!(
        "verdict from the {} formula",
        formula_name(ctx.formula)
    ));
    if ctx.spec.kind == SolitonKind::Riemann && which == Factor::Second {
        let alt = other(ctx.formula);
        let r = sweep.values(|p| Ok(eval(p, alt)?.0));
        if let Ok(items) = r {
            let worst = items.iter().map(|r| r.value).fold(0.0, f64::max);
            s = s.with_note(format!(
                "{} potential candidate ({}): max residual {worst:e}",
                formula_name(alt),
                match alt {
                    Formula::Corrected => "(m-2) psi_2 - m_1 l",
                    Formula::Original => "(m-2) psi_2 - m_1 k",
                }
            ));
        }
    }
    s
}

fn factor_identity(ctx: &FactorContext, id: &str, which: Factor) -> ResidualSummary {
    let pts = leaf_points(ctx.dwp, ctx.sweep.points, ctx.anchor, which);
    ctx.sweep.with_points(&pts).max(id, |p| {
        let pp = ctx.dwp.at(p)?;
        let psi = ctx.spec.psi.jet(p)?;
        let (t, _) = factor_equation(ctx, &pp, &psi, which, Formula::Corrected)?;
        let b = block(&product_matrix(ctx, p)?, &pp, which, which);
        Ok(compare(t.values(), b.as_slice()))
    })
}

fn mixed_checks(
    ctx: &FactorContext,
    prefix: &str,
    product: &ResidualSummary,
) -> Vec<ResidualSummary> {
    let id = format!("{prefix}.mixed");
    let eval = |p: &[f64], formula: Formula| -> Result<f64> {
        let pp = ctx.dwp.at(p)?;
        let psi = ctx.spec.psi.jet(p)?;
        Ok(mixed_terms(ctx, &pp, &psi, formula).residual())
    };
    let claim = gate(ctx, &id, product).unwrap_or_else(|| {
        let mut s = ctx.sweep.max(&id, |p| eval(p, ctx.formula));
        let alt = other(ctx.formula);
        if let Ok(items) = ctx.sweep.values(|p| eval(p, alt)) {
            let worst = items.iter().map(|r| r.value).fold(0.0, f64::max);
            s = s.with_note(format!(
                "{} mixed condition: max residual {worst:e}",
                formula_name(alt)
            ));
        }
        s.with_note(dependence_note(ctx))
    });
    let ident_id = format!("{prefix}.mixed.identity");
    let identity = ctx.sweep.max(&ident_id, |p| {
        let pp = ctx.dwp.at(p)?;
        let psi = ctx.spec.psi.jet(p)?;
        let t = mixed_terms(ctx, &pp, &psi, Formula::Corrected);
        let b = block(&product_matrix(ctx, p)?, &pp, Factor::First, Factor::Second);
        Ok(compare(t.values(), b.as_slice()))
    });
    vec![claim, identity]
}

/// Whether the potential varies along each factor over the samples.
fn dependence_note(ctx: &FactorContext) -> String {
    let m1 = ctx.dwp.m1();
    let grads: Vec<(f64, f64)> =
        ctx.sweep
            .exec
            .map(ctx.sweep.points, |p| match ctx.spec.psi.jet(p) {
                Ok(j) => (
                    j.gradient.rows(0, m1).amax(),
                    j.gradient.rows(m1, ctx.dwp.m2()).amax(),
                ),
                Err(_) => (f64::NAN, f64::NAN),
            });
    let d1 = grads.iter().map(|g| g.0).fold(0.0, f64::max);
    let d2 = grads.iter().map(|g| g.1).fold(0.0, f64::max);
    let yes = |d: f64| if d > ctx.sweep.tolerance { "yes" } else { "no" };
    format!(
        "potential varies along factor 1: {}, along factor 2: {}",
        yes(d1),
        yes(d2)
    )
}

/// Factor, mixed and identity checks for the soliton at `prefix`, given the
/// summary of its product equation.
pub fn factor_checks(
    ctx: &FactorContext,
    prefix: &str,
    product: &ResidualSummary,
) -> Vec<ResidualSummary> {
    let kind = ctx.spec.kind;
    let mut out = Vec::new();
    match kind {
        SolitonKind::Yamabe
        | SolitonKind::Ricci
        | SolitonKind::Riemann
        | SolitonKind::QuasiEinstein => {}
        SolitonKind::Conformal => {
            out.extend(conformal_spot_check(
                ctx,
                &format!("{prefix}.nonexistence"),
                1e-3,
            ));
            return out;
        }
        _ => return out,
    }
    if kind == SolitonKind::Riemann && ctx.dwp.dim() < 3 {
        for which in [Factor::First, Factor::Second] {
            let id = format!("{prefix}.factor{}", which.index());
            out.push(ResidualSummary::skipped(
                &id,
                ctx.sweep.tolerance,
                "dimension: requires m >= 3",
            ));
        }
        return out;
    }
    for which in [Factor::First, Factor::Second] {
        let id = format!("{prefix}.factor{}", which.index());
        out.push(gate(ctx, &id, product).unwrap_or_else(|| factor_claim(ctx, &id, which)));
        out.push(factor_identity(ctx, &format!("{id}.identity"), which));
    }
    if matches!(kind, SolitonKind::Yamabe | SolitonKind::Ricci) {
        out.extend(mixed_checks(ctx, prefix, product));
    }
    if kind == SolitonKind::Ricci {
        let id = format!("{prefix}.log_hessian");
        let mut pts = leaf_points(ctx.dwp, ctx.sweep.points, ctx.anchor, Factor::First);
        pts.extend(leaf_points(
            ctx.dwp,
            ctx.sweep.points,
            ctx.anchor,
            Factor::Second,
        ));
        out.push(ctx.sweep.with_points(&pts).max(&id, |p| {
            let pp = ctx.dwp.at(p)?;
            Ok(log_hessian_identity(&pp, Factor::First)
                .max(log_hessian_identity(&pp, Factor::Second)))
        }));
    }
    out
}

/// On a non-trivial product every conformal candidate with a nonconstant
/// potential should leave a residual above `threshold` at every sample.
/// Returns nothing when that expectation does not apply.
pub fn conformal_spot_check(
    ctx: &FactorContext,
    id: &str,
    threshold: f64,
) -> Option<ResidualSummary> {
    let trivial = match ctx.dwp.triviality(ctx.sweep.points) {
        Ok(t) => !t.is_nontrivial(),
        Err(_) => true,
    };
    if trivial || ctx.spec.psi.is_constant() {
        return None;
    }
    let m = ctx.dwp.product();
    Some(
        ctx.sweep
            .lower_bound(id, threshold, |p| {
                let st = PointState::new(m, ctx.spec, p)?;
                Ok(equation(ctx.spec, &st, p)?.residual())
            })
            .with_note("consistency spot check only; nonexistence is not proven"),
    )
}
