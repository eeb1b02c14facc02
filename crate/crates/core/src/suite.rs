//! Check groups comparing the closed-form product formulas with the
//! brute-force geometry of the product chart.
//!
//! Every group returns one [`ResidualSummary`] per check id. Ids are
//! `<group>.<case>`, for example `lemma1.xuy` or `hessian.psi.xu`.

use nalgebra::{DMatrix, DVector};

use crate::check::Sweep;
use crate::dwp::{
    DoublyWarpedProduct, Factor, Formula, Lift, LiftedVector, ProductPoint, RiemannClass,
};
use crate::error::Result;
use crate::expr::{Expression, Jet2};
use crate::geometry::PointGeometry;
use crate::residual::{compare, ResidualSummary};

/// A named scalar field on the product chart whose Hessian and Laplacian
/// are checked.
#[derive(Debug, Clone)]
pub struct NamedField {
    pub name: String,
    pub field: Expression,
}

#[derive(Debug, Clone, Copy)]
pub struct SuiteContext<'a> {
    pub dwp: &'a DoublyWarpedProduct,
    pub sweep: Sweep<'a>,
    pub formula: Formula,
}

impl<'a> SuiteContext<'a> {
    pub fn new(dwp: &'a DoublyWarpedProduct, sweep: Sweep<'a>) -> Self {
        SuiteContext {
            dwp,
            sweep,
            formula: Formula::Corrected,
        }
    }

    pub fn with_formula(mut self, formula: Formula) -> Self {
        self.formula = formula;
        self
    }

    fn tol(&self) -> f64 {
        self.sweep.tolerance
    }

    /// Sweeps `f` with the selected formula and records the other formula's
    /// worst residual as a note.
    fn with_alternative<F>(&self, id: &str, f: F) -> ResidualSummary
    where
        F: Fn(&[f64], Formula) -> Result<f64> + Sync + Send,
    {
        let s = self.sweep.max(id, |p| f(p, self.formula));
        let alt = match self.formula {
            Formula::Corrected => Formula::Original,
            Formula::Original => Formula::Corrected,
        };
        match self.sweep.values(|p| f(p, alt)) {
            Ok(items) => {
                let worst = items.iter().map(|r| r.value).fold(0.0, f64::max);
                let name = if alt == Formula::Original {
                    "original"
                } else {
                    "corrected"
                };
                s.with_note(format!("{name} form: max residual {worst:e}"))
            }
            Err(_) => s,
        }
    }
}

fn basis(pp: &ProductPoint, which: Factor) -> Vec<Lift> {
    let d = pp.factor_dim(which);
    (0..d).map(|i| Lift::basis(which, d, i)).collect()
}

fn block(m: &DMatrix<f64>, m1: usize, rows: Factor, cols: Factor) -> DMatrix<f64> {
    let n = m.nrows();
    let span = |w: Factor| match w {
        Factor::First => (0, m1),
        Factor::Second => (m1, n - m1),
    };
    let (r0, rn) = span(rows);
    let (c0, cn) = span(cols);
    m.view((r0, c0), (rn, cn)).into_owned()
}

const BLOCKS: [(&str, Factor, Factor); 3] = [
    ("xx", Factor::First, Factor::First),
    ("xu", Factor::First, Factor::Second),
    ("uu", Factor::Second, Factor::Second),
];

/// Jet of `k` or `l` pulled back to the product.
fn log_jet(dwp: &DoublyWarpedProduct, which: Factor, p: &[f64]) -> Result<Jet2> {
    Ok(dwp.pullback(dwp.log_warping(which), which)?.jet(p)?)
}

/// Lifted fields used for the connection: every coordinate vector and one
/// field with nonconstant components.
fn connection_fields(dwp: &DoublyWarpedProduct, which: Factor) -> Result<Vec<LiftedVector>> {
    let coords = dwp.factor(which).coords();
    let mut out: Vec<LiftedVector> = (0..coords.len())
        .map(|i| dwp.coordinate_vector(which, i))
        .collect();
    let comps: Vec<String> = coords
        .iter()
        .map(|c| format!("1 + {c}*{}", coords[0]))
        .collect();
    out.push(dwp.lifted_vector(which, &comps)?);
    Ok(out)
}

/// `∇_A B` from the factor connections against the product Christoffels,
/// for the three factor pairings.
pub fn connection(ctx: &SuiteContext) -> Vec<ResidualSummary> {
    let fields = |w| connection_fields(ctx.dwp, w);
    let (first, second) = match (fields(Factor::First), fields(Factor::Second)) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(e), _) | (_, Err(e)) => {
            return ["xy", "xu", "uv"]
                .iter()
                .map(|c| crate::check::failed(&format!("connection.{c}"), ctx.tol(), &e))
                .collect();
        }
    };
    let pairs: [(&str, &[LiftedVector], &[LiftedVector]); 3] = [
        ("xy", &first, &first),
        ("xu", &first, &second),
        ("uv", &second, &second),
    ];
    pairs
        .iter()
        .map(|(name, aa, bb)| {
            ctx.sweep.max(&format!("connection.{name}"), |p| {
                let mut worst: f64 = 0.0;
                for a in aa.iter() {
                    for b in bb.iter() {
                        let closed = ctx.dwp.covariant_closed(a, b, p)?;
                        let oracle = ctx.dwp.covariant_oracle(a, b, p)?;
                        worst = worst.max(compare(closed.as_slice(), oracle.as_slice()));
                        if *name == "xu" {
                            let closed = ctx.dwp.covariant_closed(b, a, p)?;
                            let oracle = ctx.dwp.covariant_oracle(b, a, p)?;
                            worst = worst.max(compare(closed.as_slice(), oracle.as_slice()));
                        }
                    }
                }
                Ok(worst)
            })
        })
        .collect()
}

/// The Gram–Schmidt frame of the product stays adapted to the factors, and
/// rescaling its blocks by the warpings gives orthonormal factor frames.
pub fn frame(ctx: &SuiteContext) -> Vec<ResidualSummary> {
    let orthonormal = ctx.sweep.max("frame.orthonormal", |p| {
        let fr = ctx.dwp.adapted_frames(p)?;
        let geo = ctx.dwp.oracle_at(p)?;
        let n = ctx.dwp.dim();
        let defect =
            (fr.product.transpose() * geo.metric() * &fr.product - DMatrix::identity(n, n)).amax();
        Ok(defect.max(fr.leak))
    });
    let scaling = ctx.sweep.max("frame.factor_scaling", |p| {
        let fr = ctx.dwp.adapted_frames(p)?;
        let mut worst: f64 = 0.0;
        for (which, f) in [(Factor::First, &fr.factor1), (Factor::Second, &fr.factor2)] {
            let g = ctx
                .dwp
                .factor(which)
                .geometry_at(ctx.dwp.factor_point(p, which))?;
            let d = f.ncols();
            worst = worst.max((f.transpose() * g.metric() * f - DMatrix::identity(d, d)).amax());
        }
        Ok(worst)
    });
    vec![orthonormal, scaling]
}

fn class_residual(pp: &ProductPoint, geo: &PointGeometry, class: RiemannClass) -> Result<f64> {
    let [p0, p1, p2] = class.pattern();
    let mut worst: f64 = 0.0;
    for a in basis(pp, p0) {
        for b in basis(pp, p1) {
            for c in basis(pp, p2) {
                let closed = pp.riemann(class, &a, &b, &c)?;
                let oracle = geo.curvature(&pp.embed(&a), &pp.embed(&b), &pp.embed(&c));
                worst = worst.max(compare(closed.as_slice(), oracle.as_slice()));
            }
        }
    }
    Ok(worst)
}

/// The six curvature classes on lifted coordinate vectors, and the full
/// (1,3) tensor assembled from them.
pub fn lemma1(ctx: &SuiteContext) -> Vec<ResidualSummary> {
    let mut out: Vec<ResidualSummary> = RiemannClass::ALL
        .iter()
        .map(|&class| {
            ctx.sweep.max(&format!("lemma1.{}", class.name()), |p| {
                class_residual(&ctx.dwp.at(p)?, &ctx.dwp.oracle_at(p)?, class)
            })
        })
        .collect();
    out.push(ctx.sweep.max("lemma1.block_completeness", |p| {
        let pp = ctx.dwp.at(p)?;
        let geo = ctx.dwp.oracle_at(p)?;
        let n = ctx.dwp.dim();
        let unit = |i: usize| DVector::from_fn(n, |j, _| if i == j { 1.0 } else { 0.0 });
        let mut closed = Vec::with_capacity(n * n * n * n);
        let mut oracle = Vec::with_capacity(n * n * n * n);
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    closed.extend(pp.riemann_coordinate(a, b, c).iter());
                    oracle.extend(geo.curvature(&unit(a), &unit(b), &unit(c)).iter());
                }
            }
        }
        Ok(compare(&closed, &oracle))
    }));
    out
}

/// Ricci tensor blocks.
pub fn lemma2(ctx: &SuiteContext) -> Vec<ResidualSummary> {
    let m1 = ctx.dwp.m1();
    BLOCKS
        .iter()
        .map(|&(name, r, c)| {
            let s = ctx.sweep.max(&format!("lemma2.{name}"), |p| {
                let closed = ctx.dwp.at(p)?.ricci();
                let oracle = ctx.dwp.oracle_at(p)?;
                Ok(compare(
                    block(&closed, m1, r, c).as_slice(),
                    block(oracle.ricci(), m1, r, c).as_slice(),
                ))
            });
            if name == "xu" {
                s.with_note("Ric(X, U) = (m1 + m2 - 2) X(k) U(l)")
            } else {
                s
            }
        })
        .collect()
}

/// Ricci operator on lifted coordinate vectors of each factor.
pub fn lemma5(ctx: &SuiteContext) -> Vec<ResidualSummary> {
    [("x", Factor::First), ("u", Factor::Second)]
        .iter()
        .map(|&(name, which)| {
            ctx.with_alternative(&format!("lemma5.{name}"), |p, formula| {
                let pp = ctx.dwp.at(p)?;
                let q = ctx.dwp.oracle_at(p)?.ricci_operator();
                let mut worst: f64 = 0.0;
                for x in basis(&pp, which) {
                    let closed = pp.ricci_operator(&x, formula);
                    let oracle = &q * pp.embed(&x);
                    worst = worst.max(compare(closed.as_slice(), oracle.as_slice()));
                }
                Ok(worst)
            })
        })
        .collect()
}

/// `k`, `l` and the given fields, in that order.
pub fn hessian_fields(dwp: &DoublyWarpedProduct, extra: &[NamedField]) -> Result<Vec<NamedField>> {
    let mut out = Vec::with_capacity(2 + extra.len());
    for (name, which) in [("k", Factor::First), ("l", Factor::Second)] {
        out.push(NamedField {
            name: name.to_string(),
            field: dwp.pullback(dwp.log_warping(which), which)?,
        });
    }
    out.extend(extra.iter().cloned());
    Ok(out)
}

/// Hessian splitting, blockwise, for each field.
pub fn hessian(ctx: &SuiteContext, fields: &[NamedField]) -> Vec<ResidualSummary> {
    let m1 = ctx.dwp.m1();
    let mut out = Vec::new();
    for f in fields {
        for &(name, r, c) in &BLOCKS {
            let id = format!("hessian.{}.{name}", f.name);
            let eval = |p: &[f64], formula: Formula| -> Result<f64> {
                let jet = f.field.jet(p)?;
                let closed = ctx.dwp.at(p)?.hessian(&jet, formula);
                let oracle = ctx.dwp.oracle_at(p)?.hessian(&jet);
                Ok(compare(
                    block(&closed, m1, r, c).as_slice(),
                    block(&oracle, m1, r, c).as_slice(),
                ))
            };
            out.push(if name == "xu" {
                ctx.with_alternative(&id, eval)
            } else {
                ctx.sweep.max(&id, |p| eval(p, ctx.formula))
            });
        }
    }
    out
}

/// Scalar curvature.
pub fn scalar(ctx: &SuiteContext) -> Vec<ResidualSummary> {
    vec![ctx.sweep.max("scalar.tau", |p| {
        Ok(compare(
            &[ctx.dwp.at(p)?.scalar()],
            &[ctx.dwp.oracle_at(p)?.scalar()],
        ))
    })]
}

/// Laplacians of `k` and `l` from the factor splitting, and of each field
/// as the trace of its split Hessian.
pub fn laplacian(ctx: &SuiteContext, fields: &[NamedField]) -> Vec<ResidualSummary> {
    let mut out = Vec::new();
    for (name, which) in [("k", Factor::First), ("l", Factor::Second)] {
        out.push(ctx.sweep.max(&format!("laplacian.{name}"), |p| {
            let geo = ctx.dwp.oracle_at(p)?;
            let oracle = geo.trace(&geo.hessian(&log_jet(ctx.dwp, which, p)?));
            Ok(compare(&[ctx.dwp.at(p)?.log_laplacian(which)], &[oracle]))
        }));
    }
    for f in fields.iter().filter(|f| f.name != "k" && f.name != "l") {
        out.push(ctx.sweep.max(&format!("laplacian.{}", f.name), |p| {
            let jet = f.field.jet(p)?;
            let geo = ctx.dwp.oracle_at(p)?;
            Ok(compare(
                &[ctx.dwp.at(p)?.laplacian(&jet)],
                &[geo.trace(&geo.hessian(&jet))],
            ))
        }));
    }
    out
}

/// Structural properties of the product: the block metric, exact vanishing
/// of the mixed Ricci block when a warping is constant, and the reduction to
/// a singly warped product when `f2 ≡ 1`.
pub fn structure(ctx: &SuiteContext) -> Vec<ResidualSummary> {
    let tol = ctx.tol();
    let mut out = Vec::new();
    let metric = ctx.sweep.max("dwp.metric", |p| {
        Ok(compare(
            ctx.dwp.at(p)?.metric().as_slice(),
            ctx.dwp.oracle_at(p)?.metric().as_slice(),
        ))
    });
    let triviality = match ctx.dwp.triviality(ctx.sweep.points) {
        Ok(t) => t,
        Err(e) => {
            out.push(crate::check::failed("dwp.metric", tol, &e));
            return out;
        }
    };
    out.push(metric.with_note(triviality.describe()));

    let m1 = ctx.dwp.m1();
    out.push(if triviality.is_nontrivial() {
        ResidualSummary::skipped(
            "dwp.mixed_ricci",
            tol,
            "requires a constant warping function",
        )
    } else {
        ctx.sweep
            .max("dwp.mixed_ricci", |p| {
                Ok(block(&ctx.dwp.at(p)?.ricci(), m1, Factor::First, Factor::Second).amax())
            })
            .with_note("exact zero expected")
    });

    let unit_second = triviality.f2_constant
        && ctx
            .sweep
            .points
            .first()
            .is_some_and(|p| ctx.dwp.warping_values(p).is_ok_and(|(_, v2)| v2 == 1.0));
    out.push(if unit_second {
        ctx.sweep
            .max("dwp.warped_reduction", |p| {
                let a = ctx.dwp.at(p)?;
                let b = ctx.dwp.at_unwarped_second(p)?;
                let n = ctx.dwp.dim();
                let mut worst = (a.ricci() - b.ricci())
                    .amax()
                    .max((a.scalar() - b.scalar()).abs());
                for i in 0..n {
                    for j in 0..n {
                        for k in 0..n {
                            worst = worst.max(
                                (a.riemann_coordinate(i, j, k) - b.riemann_coordinate(i, j, k))
                                    .amax(),
                            );
                        }
                    }
                }
                Ok(worst)
            })
            .with_note("engine with l = 0 hard-coded; exact agreement expected")
    } else {
        ResidualSummary::skipped(
            "dwp.warped_reduction",
            tol,
            "requires f2 = 1 on the sampled region",
        )
    });
    out
}
