//! Gradient soliton equations on a chart: residuals of the defining tensor
//! equations, the contracted Riemann form, and the factor structures induced
//! on the two factors of a doubly warped product.

mod factor;
mod spec;

pub use factor::{
    conformal_spot_check, factor_checks, fit_quasi_einstein, leaf_points, log_hessian_identity,
    FactorContext, QuasiEinsteinFit,
};
pub use spec::{Scalar, SolitonKind, SolitonSpec, SolitonText};

use nalgebra::{DMatrix, DVector};

use crate::check::Sweep;
use crate::error::{Error, Result};
use crate::expr::Jet2;
use crate::geometry::{gram_schmidt, kulkarni_nomizu_matrices, ChartManifold, PointGeometry};
use crate::residual::{ResidualSummary, TermSum};

/// Oracle quantities of a chart at one point together with the potential.
#[derive(Debug, Clone)]
pub struct PointState {
    pub geo: PointGeometry,
    pub psi: Jet2,
    pub hessian: DMatrix<f64>,
    pub laplacian: f64,
}

impl PointState {
    pub fn new(m: &ChartManifold, spec: &SolitonSpec, p: &[f64]) -> Result<Self> {
        let geo = m.geometry_at(p)?;
        let psi = spec.psi.jet(p)?;
        let hessian = geo.hessian(&psi);
        let laplacian = geo.trace(&hessian);
        Ok(PointState {
            geo,
            psi,
            hessian,
            laplacian,
        })
    }

    pub fn dim(&self) -> usize {
        self.geo.dim()
    }
}

/// Shrinking, steady or expanding, with `|λ| ≤ tol` counted as steady.
pub fn classify(lambda: f64, tol: f64) -> &'static str {
    if lambda.abs() <= tol {
        "steady"
    } else if lambda > 0.0 {
        "shrinking"
    } else {
        "expanding"
    }
}

/// Unit-normalized 1-form and the rescaled coefficient: `β A⊗A` with `|A| = 1`.
pub(crate) fn unit_form(
    geo: &PointGeometry,
    a: &DVector<f64>,
    beta: f64,
) -> Result<(DVector<f64>, f64)> {
    let norm2 = (a.transpose() * geo.inverse() * a)[(0, 0)];
    if !(norm2 > 0.0) {
        return Err(Error::InvalidSoliton(format!(
            "1-form A vanishes at {:?}",
            geo.point()
        )));
    }
    Ok((a / norm2.sqrt(), beta * norm2))
}

/// Terms of the defining equation `Σ terms = 0`, flattened row-major. For
/// the Riemann kind this is the full (0,4) equation.
pub fn equation(spec: &SolitonSpec, st: &PointState, p: &[f64]) -> Result<TermSum> {
    use SolitonKind as K;
    let n = st.dim();
    let g = st.geo.metric();
    let kind = spec.kind;
    let mut t = TermSum::new(n * n);
    match kind {
        K::Yamabe | K::EtaYamabe => {
            let lambda = spec.value("lambda", p)?;
            t.add_matrix(&st.hessian);
            t.add_matrix(&(g * (lambda - st.geo.scalar())));
        }
        K::Conformal => {
            let gamma = match &spec.gamma {
                Some(e) => e.eval(p)?,
                None => st.laplacian / n as f64,
            };
            t.add_matrix(&st.hessian);
            t.add_matrix(&(g * -gamma));
        }
        K::Ricci | K::EtaRicci | K::FAlmostRicci | K::FAlmostEtaRicci => {
            let lambda = spec.value("lambda", p)?;
            match kind {
                K::FAlmostRicci | K::FAlmostEtaRicci => {
                    t.add_matrix(&(&st.hessian * spec.value("f", p)?))
                }
                _ => t.add_matrix(&st.hessian),
            };
            t.add_matrix(st.geo.ricci());
            t.add_matrix(&(g * -lambda));
        }
        K::Einstein => {
            t.add_matrix(st.geo.ricci());
            t.add_matrix(&(g * (-st.geo.scalar() / n as f64)));
        }
        K::QuasiEinstein => {
            let alpha = spec.value("alpha", p)?;
            let (a, beta) = unit_form(&st.geo, &spec.form(p)?, spec.value("beta", p)?)?;
            if beta == 0.0 {
                return Err(Error::InvalidSoliton(format!(
                    "beta vanishes at {p:?}; the equation reduces to the Einstein kind"
                )));
            }
            t.add_matrix(st.geo.ricci());
            t.add_matrix(&(g * -alpha));
            t.add_matrix(&(&a * a.transpose() * -beta));
        }
        K::Riemann => return riemann_full(spec, st, p),
    }
    if kind.uses_eta() {
        let eta = spec.form(p)?;
        t.add_matrix(&(&eta * eta.transpose() * -spec.value("mu", p)?));
    }
    Ok(t)
}

/// Coordinate components of `R + h∧g − λG` split into its three terms.
fn riemann_terms(spec: &SolitonSpec, st: &PointState, p: &[f64]) -> Result<[Vec<f64>; 3]> {
    let lambda = spec.value("lambda", p)?;
    let g = st.geo.metric();
    let r = st.geo.riemann_tensor();
    let hg = kulkarni_nomizu_matrices(&st.hessian, g);
    let big_g = kulkarni_nomizu_matrices(g, g).scale(-0.5 * lambda);
    Ok([r.data().to_vec(), hg.data().to_vec(), big_g.data().to_vec()])
}

pub fn riemann_full(spec: &SolitonSpec, st: &PointState, p: &[f64]) -> Result<TermSum> {
    let n = st.dim();
    let mut t = TermSum::new(n.pow(4));
    for term in riemann_terms(spec, st, p)? {
        t.add(&term);
    }
    Ok(t)
}

/// `h + Ric/(m−2) − ((m−1)λ − Δψ)/(m−2) g` for `m ≥ 3`, and
/// `Ric − (λ − Δψ) g` in dimension two.
pub fn riemann_contracted(spec: &SolitonSpec, st: &PointState, p: &[f64]) -> Result<TermSum> {
    let n = st.dim();
    let m = n as f64;
    let lambda = spec.value("lambda", p)?;
    let g = st.geo.metric();
    let mut t = TermSum::new(n * n);
    if n == 2 {
        t.add_matrix(st.geo.ricci());
        t.add_matrix(&(g * -(lambda - st.laplacian)));
    } else {
        t.add_matrix(&st.hessian);
        t.add_matrix(&(st.geo.ricci() / (m - 2.0)));
        t.add_matrix(&(g * -(((m - 1.0) * lambda - st.laplacian) / (m - 2.0))));
    }
    Ok(t)
}

/// Residuals of the soliton equation over the sample set. The Riemann kind
/// yields two summaries, `<prefix>` for the (0,4) equation and
/// `<prefix>.contracted` for its trace form.
pub fn residual(
    prefix: &str,
    spec: &SolitonSpec,
    m: &ChartManifold,
    sweep: &Sweep,
) -> Vec<ResidualSummary> {
    let main = sweep.max(prefix, |p| {
        Ok(equation(spec, &PointState::new(m, spec, p)?, p)?.residual())
    });
    let main = annotate(main, spec, sweep);
    if spec.kind != SolitonKind::Riemann {
        return vec![main];
    }
    let id = format!("{prefix}.contracted");
    let mut contracted = sweep.max(&id, |p| {
        Ok(riemann_contracted(spec, &PointState::new(m, spec, p)?, p)?.residual())
    });
    if m.dim() == 2 {
        contracted = contracted.with_note("dimension 2: Ric = (λ − Δψ) g");
    }
    vec![main, contracted]
}

fn annotate(mut s: ResidualSummary, spec: &SolitonSpec, sweep: &Sweep) -> ResidualSummary {
    if let Some(lambda) = &spec.lambda {
        if lambda.is_constant() {
            if let Ok(v) = lambda.eval(&vec![0.0; lambda.dim()]) {
                s = s.with_note(format!("lambda = {v}: {}", classify(v, sweep.tolerance)));
            }
        } else {
            s = s.with_note("lambda is a function: almost soliton");
        }
    }
    s
}

/// Contracts the (0,4) Riemann soliton equation over its first and last
/// slots in an orthonormal frame and compares the result with
/// `(m − 2) h + Ric − ((m − 1)λ − Δψ) g`. This holds for every ψ and λ.
pub fn contraction_consistency(
    id: &str,
    spec: &SolitonSpec,
    m: &ChartManifold,
    sweep: &Sweep,
) -> Result<ResidualSummary> {
    let n = m.dim();
    if n < 3 {
        return Err(Error::Dimension {
            operation: "contraction of the Riemann soliton equation",
            requirement: "m >= 3",
            found: format!("m = {n}"),
        });
    }
    Ok(sweep.max(id, |p| {
        let st = PointState::new(m, spec, p)?;
        let (contracted, direct) = contraction_pair(spec, &st, p)?;
        Ok(crate::residual::compare(
            contracted.as_slice(),
            direct.as_slice(),
        ))
    }))
}

/// The frame contraction of the (0,4) equation and the directly assembled
/// trace form, both as coordinate matrices.
pub fn contraction_pair(
    spec: &SolitonSpec,
    st: &PointState,
    p: &[f64],
) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let n = st.dim();
    let m = n as f64;
    let lambda = spec.value("lambda", p)?;
    let e4 = riemann_full(spec, st, p)?;
    let e4 = e4.values();
    let frame = gram_schmidt(st.geo.metric(), &DMatrix::identity(n, n))?;
    let f = frame.matrix();
    let at = |a: usize, b: usize, c: usize, d: usize| e4[((a * n + b) * n + c) * n + d];
    let contracted = DMatrix::from_fn(n, n, |b, c| {
        let mut s = 0.0;
        for i in 0..n {
            for a in 0..n {
                for d in 0..n {
                    s += f[(a, i)] * f[(d, i)] * at(a, b, c, d);
                }
            }
        }
        s
    });
    let direct = &st.hessian * (m - 2.0) + st.geo.ricci()
        - st.geo.metric() * ((m - 1.0) * lambda - st.laplacian);
    Ok((contracted, direct))
}

#[cfg(test)]
mod tests;
