use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{DoublyWarpedProduct, Factor, Formula, Lift};
use crate::error::{Error, Result};
use crate::expr::Jet2;
use crate::geometry::PointGeometry;

/// Factor membership pattern of `R(A, B)C` for the six closed-form classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RiemannClass {
    Xyz,
    Xyu,
    Uvx,
    Xuy,
    Uxv,
    Uvw,
}

impl RiemannClass {
    pub const ALL: [RiemannClass; 6] = [
        RiemannClass::Xyz,
        RiemannClass::Xyu,
        RiemannClass::Uvx,
        RiemannClass::Xuy,
        RiemannClass::Uxv,
        RiemannClass::Uvw,
    ];

    pub fn name(self) -> &'static str {
        match self {
            RiemannClass::Xyz => "xyz",
            RiemannClass::Xyu => "xyu",
            RiemannClass::Uvx => "uvx",
            RiemannClass::Xuy => "xuy",
            RiemannClass::Uxv => "uxv",
            RiemannClass::Uvw => "uvw",
        }
    }

    /// Factors of the three arguments `(A, B, C)` of `R(A, B)C`.
    pub fn pattern(self) -> [Factor; 3] {
        use Factor::{First as F, Second as S};
        match self {
            RiemannClass::Xyz => [F, F, F],
            RiemannClass::Xyu => [F, F, S],
            RiemannClass::Uvx => [S, S, F],
            RiemannClass::Xuy => [F, S, F],
            RiemannClass::Uxv => [S, F, S],
            RiemannClass::Uvw => [S, S, S],
        }
    }
}

/// Closed-form quantities of a doubly warped product at one point, built
/// from factor geometry and warping jets only.
#[derive(Debug, Clone)]
pub struct ProductPoint {
    point: Vec<f64>,
    m1: usize,
    m2: usize,
    geo1: PointGeometry,
    geo2: PointGeometry,
    f1: Jet2,
    f2: Jet2,
    k: Jet2,
    l: Jet2,
    metric: DMatrix<f64>,
    inverse: DMatrix<f64>,
    dk: DVector<f64>,
    dl: DVector<f64>,
    grad_k: DVector<f64>,
    grad_l: DVector<f64>,
    hess_k: DMatrix<f64>,
    hess_l: DMatrix<f64>,
    lap_k: f64,
    lap_l: f64,
}

fn block_diag(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let (n1, n2) = (a.nrows(), b.nrows());
    let mut out = DMatrix::zeros(n1 + n2, n1 + n2);
    out.view_mut((0, 0), (n1, n1)).copy_from(a);
    out.view_mut((n1, n1), (n2, n2)).copy_from(b);
    out
}

impl ProductPoint {
    pub(super) fn new(dwp: &DoublyWarpedProduct, p: &[f64], unwarped_second: bool) -> Result<Self> {
        let (_, v2) = dwp.warping_values(p)?;
        let (m1, m2) = (dwp.m1(), dwp.m2());
        let (p1, p2) = dwp.split(p);
        let geo1 = dwp.factor(Factor::First).geometry_at(p1)?;
        let geo2 = dwp.factor(Factor::Second).geometry_at(p2)?;
        let f1 = dwp.warping(Factor::First).jet(p1)?;
        let k = dwp.log_warping(Factor::First).jet(p1)?;
        let (f2, l) = if unwarped_second {
            if (v2 - 1.0).abs() > 1e-12 {
                return Err(Error::Shape(format!(
                    "second warping is {v2}, not 1, at {p:?}"
                )));
            }
            (Jet2::constant(m2, 1.0), Jet2::constant(m2, 0.0))
        } else {
            (
                dwp.warping(Factor::Second).jet(p2)?,
                dwp.log_warping(Factor::Second).jet(p2)?,
            )
        };
        let (w1, w2) = (f1.value, f2.value);

        let metric = block_diag(&(geo1.metric() * (w2 * w2)), &(geo2.metric() * (w1 * w1)));
        let inverse = block_diag(&(geo1.inverse() / (w2 * w2)), &(geo2.inverse() / (w1 * w1)));
        let mut dk = DVector::zeros(m1 + m2);
        dk.rows_mut(0, m1).copy_from(&k.gradient);
        let mut dl = DVector::zeros(m1 + m2);
        dl.rows_mut(m1, m2).copy_from(&l.gradient);
        let grad_k = &inverse * &dk;
        let grad_l = &inverse * &dl;

        let mut pp = ProductPoint {
            point: p.to_vec(),
            m1,
            m2,
            geo1,
            geo2,
            f1,
            f2,
            k,
            l,
            metric,
            inverse,
            dk,
            dl,
            grad_k,
            grad_l,
            hess_k: DMatrix::zeros(0, 0),
            hess_l: DMatrix::zeros(0, 0),
            lap_k: 0.0,
            lap_l: 0.0,
        };
        let kj = pp.embed_jet(&pp.k, Factor::First);
        let lj = pp.embed_jet(&pp.l, Factor::Second);
        pp.hess_k = pp.hessian(&kj, Formula::Corrected);
        pp.hess_l = pp.hessian(&lj, Formula::Corrected);
        pp.lap_k = pp.laplacian_split(Factor::First);
        pp.lap_l = pp.laplacian_split(Factor::Second);
        Ok(pp)
    }

    pub fn point(&self) -> &[f64] {
        &self.point
    }

    pub fn m1(&self) -> usize {
        self.m1
    }

    pub fn m2(&self) -> usize {
        self.m2
    }

    pub fn dim(&self) -> usize {
        self.m1 + self.m2
    }

    pub fn factor_dim(&self, which: Factor) -> usize {
        match which {
            Factor::First => self.m1,
            Factor::Second => self.m2,
        }
    }

    /// Index of the first product coordinate belonging to `which`.
    pub fn offset(&self, which: Factor) -> usize {
        match which {
            Factor::First => 0,
            Factor::Second => self.m1,
        }
    }

    pub fn metric(&self) -> &DMatrix<f64> {
        &self.metric
    }

    pub fn inverse(&self) -> &DMatrix<f64> {
        &self.inverse
    }

    pub fn inner(&self, a: &DVector<f64>, b: &DVector<f64>) -> f64 {
        (a.transpose() * &self.metric * b)[(0, 0)]
    }

    pub fn factor_geometry(&self, which: Factor) -> &PointGeometry {
        match which {
            Factor::First => &self.geo1,
            Factor::Second => &self.geo2,
        }
    }

    /// Jet of `f1` (first factor) or `f2` (second factor) in factor coordinates.
    pub fn warping_jet(&self, which: Factor) -> &Jet2 {
        match which {
            Factor::First => &self.f1,
            Factor::Second => &self.f2,
        }
    }

    pub fn warping_value(&self, which: Factor) -> f64 {
        self.warping_jet(which).value
    }

    /// Jet of `k` or `l` in factor coordinates.
    pub fn log_jet(&self, which: Factor) -> &Jet2 {
        match which {
            Factor::First => &self.k,
            Factor::Second => &self.l,
        }
    }

    /// `dk` or `dl` as a product covector.
    pub fn log_gradient_covector(&self, which: Factor) -> &DVector<f64> {
        match which {
            Factor::First => &self.dk,
            Factor::Second => &self.dl,
        }
    }

    /// `∇k` or `∇l` with respect to the product metric.
    pub fn log_gradient(&self, which: Factor) -> &DVector<f64> {
        match which {
            Factor::First => &self.grad_k,
            Factor::Second => &self.grad_l,
        }
    }

    /// `g(∇k, ∇k)` or `g(∇l, ∇l)`.
    pub fn log_norm2(&self, which: Factor) -> f64 {
        self.log_gradient_covector(which)
            .dot(self.log_gradient(which))
    }

    /// Product Hessian `h^k` or `h^l`.
    pub fn log_hessian(&self, which: Factor) -> &DMatrix<f64> {
        match which {
            Factor::First => &self.hess_k,
            Factor::Second => &self.hess_l,
        }
    }

    /// `Δk` or `Δl` from the Laplacian splitting.
    pub fn log_laplacian(&self, which: Factor) -> f64 {
        match which {
            Factor::First => self.lap_k,
            Factor::Second => self.lap_l,
        }
    }

    /// Hessian operator `H(E) = ∇_E ∇ψ = g⁻¹ h E`.
    pub fn hessian_operator(&self, h: &DMatrix<f64>, e: &DVector<f64>) -> DVector<f64> {
        &self.inverse * (h * e)
    }

    /// Product components of a factor tangent vector.
    pub fn embed(&self, v: &Lift) -> DVector<f64> {
        let mut out = DVector::zeros(self.dim());
        out.rows_mut(self.offset(v.factor), v.comps.len())
            .copy_from(&v.comps);
        out
    }

    /// The block of a product vector tangent to `which`.
    pub fn restrict(&self, v: &DVector<f64>, which: Factor) -> DVector<f64> {
        v.rows(self.offset(which), self.factor_dim(which))
            .into_owned()
    }

    /// Zero-extends a factor jet to the product chart.
    pub fn embed_jet(&self, jet: &Jet2, which: Factor) -> Jet2 {
        let n = self.dim();
        let off = self.offset(which);
        let d = jet.dim();
        let mut out = Jet2::constant(n, jet.value);
        out.gradient.rows_mut(off, d).copy_from(&jet.gradient);
        out.hessian
            .view_mut((off, off), (d, d))
            .copy_from(&jet.hessian);
        out
    }

    /// Factor Hessian of a product field, taking only derivatives along
    /// `which` with that factor's Christoffel symbols. This is the Hessian of
    /// the restriction of ψ to the leaf through the current point.
    pub fn factor_hessian(&self, psi: &Jet2, which: Factor) -> DMatrix<f64> {
        let off = self.offset(which);
        let d = self.factor_dim(which);
        let restricted = Jet2 {
            value: psi.value,
            gradient: psi.gradient.rows(off, d).into_owned(),
            hessian: psi.hessian.view((off, off), (d, d)).into_owned(),
        };
        self.factor_geometry(which).hessian(&restricted)
    }

    /// Mixed Hessian `h^ψ(∂_X, ∂_U)` block (first-factor rows).
    pub fn mixed_hessian(&self, psi: &Jet2, formula: Formula) -> DMatrix<f64> {
        let (m1, m2) = (self.m1, self.m2);
        DMatrix::from_fn(m1, m2, |a, u| {
            let xk = self.dk[a];
            let ul = self.dl[m1 + u];
            let xpsi = psi.gradient[a];
            let upsi = psi.gradient[m1 + u];
            match formula {
                Formula::Corrected => psi.hessian[(a, m1 + u)] - xpsi * ul - xk * upsi,
                Formula::Original => xk * upsi - xpsi * ul,
            }
        })
    }

    /// Product Hessian of ψ assembled from the splitting formulas.
    pub fn hessian(&self, psi: &Jet2, formula: Formula) -> DMatrix<f64> {
        let (m1, m2) = (self.m1, self.m2);
        let mut h = DMatrix::zeros(m1 + m2, m1 + m2);
        let l_psi = self.grad_l.dot(&psi.gradient);
        let k_psi = self.grad_k.dot(&psi.gradient);
        let xx =
            self.factor_hessian(psi, Factor::First) + self.metric.view((0, 0), (m1, m1)) * l_psi;
        let uu =
            self.factor_hessian(psi, Factor::Second) + self.metric.view((m1, m1), (m2, m2)) * k_psi;
        let xu = self.mixed_hessian(psi, formula);
        h.view_mut((0, 0), (m1, m1)).copy_from(&xx);
        h.view_mut((m1, m1), (m2, m2)).copy_from(&uu);
        h.view_mut((0, m1), (m1, m2)).copy_from(&xu);
        h.view_mut((m1, 0), (m2, m1)).copy_from(&xu.transpose());
        h
    }

    /// Special cases of the splitting for ψ = k and ψ = l, written directly:
    /// `h^k = h₁^k` and `h^l = g |∇l|²` on the first block,
    /// `h^k = g |∇k|²` and `h^l = h₂^l` on the second.
    pub fn log_hessian_blocks(&self, which: Factor) -> (DMatrix<f64>, DMatrix<f64>) {
        let (m1, m2) = (self.m1, self.m2);
        let g1 = self.metric.view((0, 0), (m1, m1)).into_owned();
        let g2 = self.metric.view((m1, m1), (m2, m2)).into_owned();
        match which {
            Factor::First => (
                self.geo1.hessian(&self.k),
                g2 * self.log_norm2(Factor::First),
            ),
            Factor::Second => (
                g1 * self.log_norm2(Factor::Second),
                self.geo2.hessian(&self.l),
            ),
        }
    }

    /// `Δk = Δ₁k / f2² + m2 f2² g1(∇k, ∇k)` and the mirror formula for `Δl`,
    /// with `∇` the product gradient.
    fn laplacian_split(&self, which: Factor) -> f64 {
        let geo = self.factor_geometry(which);
        let jet = self.log_jet(which);
        let own = geo.trace(&geo.hessian(jet));
        let grad = self.restrict(self.log_gradient(which), which);
        let other = self.warping_value(which.other());
        let m_other = self.factor_dim(which.other()) as f64;
        own / (other * other) + m_other * other * other * geo.inner(&grad, &grad)
    }

    /// Laplacian of ψ as the trace of the split Hessian.
    pub fn laplacian(&self, psi: &Jet2) -> f64 {
        self.inverse
            .component_mul(&self.hessian(psi, Formula::Corrected))
            .sum()
    }

    fn check_pattern(class: RiemannClass, args: [&Lift; 3]) -> Result<()> {
        for (arg, want) in args.iter().zip(class.pattern()) {
            if arg.factor != want {
                return Err(Error::Shape(format!(
                    "class {} expects its arguments on factors {:?}",
                    class.name(),
                    class.pattern().map(Factor::index)
                )));
            }
        }
        Ok(())
    }

    /// `R(A, B)C` from the closed forms for the given class.
    pub fn riemann(
        &self,
        class: RiemannClass,
        a: &Lift,
        b: &Lift,
        c: &Lift,
    ) -> Result<DVector<f64>> {
        Self::check_pattern(class, [a, b, c])?;
        let (av, bv, cv) = (self.embed(a), self.embed(b), self.embed(c));
        let d = |v: &DVector<f64>, w: Factor| self.log_gradient_covector(w).dot(v);
        use Factor::{First, Second};
        Ok(match class {
            RiemannClass::Xyz | RiemannClass::Uvw => {
                let (own, other) = if class == RiemannClass::Xyz {
                    (First, Second)
                } else {
                    (Second, First)
                };
                let r = self
                    .factor_geometry(own)
                    .curvature(&a.comps, &b.comps, &c.comps);
                let h = self.log_hessian(other);
                self.embed(&Lift::new(own, r))
                    + self.hessian_operator(h, &bv) * self.inner(&av, &cv)
                    - self.hessian_operator(h, &av) * self.inner(&bv, &cv)
            }
            RiemannClass::Xyu => (&av * d(&bv, First) - &bv * d(&av, First)) * d(&cv, Second),
            RiemannClass::Uvx => (&av * d(&bv, Second) - &bv * d(&av, Second)) * d(&cv, First),
            RiemannClass::Xuy => {
                let (x, u, y) = (&av, &bv, &cv);
                let h1k = self.geo1.hessian(&self.k);
                let hk = (a.comps.transpose() * &h1k * &c.comps)[(0, 0)];
                u * (hk + d(x, First) * d(y, First))
                    + x * (d(y, First) * d(u, Second))
                    + (self.hessian_operator(&self.hess_l, u) + &self.grad_l * d(u, Second))
                        * self.inner(x, y)
            }
            RiemannClass::Uxv => {
                let (u, x, v) = (&av, &bv, &cv);
                let h2l = self.geo2.hessian(&self.l);
                let hl = (a.comps.transpose() * &h2l * &c.comps)[(0, 0)];
                x * (hl + d(u, Second) * d(v, Second))
                    + u * (d(v, Second) * d(x, First))
                    + (self.hessian_operator(&self.hess_k, x) + &self.grad_k * d(x, First))
                        * self.inner(u, v)
            }
        })
    }

    /// `R(∂_a, ∂_b)∂_c` for product coordinate indices, dispatching to the
    /// closed-form classes and using `R(B, A) = −R(A, B)` for the two
    /// orderings without a class of their own.
    pub fn riemann_coordinate(&self, a: usize, b: usize, c: usize) -> DVector<f64> {
        let lift = |i: usize| {
            if i < self.m1 {
                Lift::basis(Factor::First, self.m1, i)
            } else {
                Lift::basis(Factor::Second, self.m2, i - self.m1)
            }
        };
        let (la, lb, lc) = (lift(a), lift(b), lift(c));
        use Factor::{First as F, Second as S};
        let (class, swap) = match (la.factor, lb.factor, lc.factor) {
            (F, F, F) => (RiemannClass::Xyz, false),
            (F, F, S) => (RiemannClass::Xyu, false),
            (S, S, F) => (RiemannClass::Uvx, false),
            (F, S, F) => (RiemannClass::Xuy, false),
            (S, F, F) => (RiemannClass::Xuy, true),
            (S, F, S) => (RiemannClass::Uxv, false),
            (F, S, S) => (RiemannClass::Uxv, true),
            (S, S, S) => (RiemannClass::Uvw, false),
        };
        if swap {
            -self.riemann(class, &lb, &la, &lc).expect("pattern matches")
        } else {
            self.riemann(class, &la, &lb, &lc).expect("pattern matches")
        }
    }

    /// Product Ricci tensor from the block formulas.
    pub fn ricci(&self) -> DMatrix<f64> {
        let (m1, m2) = (self.m1, self.m2);
        let n = (m1 + m2) as f64;
        let mut ric = DMatrix::zeros(m1 + m2, m1 + m2);
        for which in [Factor::First, Factor::Second] {
            let off = self.offset(which);
            let d = self.factor_dim(which);
            let geo = self.factor_geometry(which);
            let fj = self.warping_jet(which);
            let m_other = self.factor_dim(which.other()) as f64;
            let lap_other = self.log_laplacian(which.other());
            let block = geo.ricci()
                - geo.hessian(fj) * (m_other / fj.value)
                - self.metric.view((off, off), (d, d)) * lap_other;
            ric.view_mut((off, off), (d, d)).copy_from(&block);
        }
        let xu = DMatrix::from_fn(m1, m2, |a, u| (n - 2.0) * self.dk[a] * self.dl[m1 + u]);
        ric.view_mut((0, m1), (m1, m2)).copy_from(&xu);
        ric.view_mut((m1, 0), (m2, m1)).copy_from(&xu.transpose());
        ric
    }

    /// Ricci operator `Q` applied to a factor vector. The corrected form adds
    /// the normal component `(m − 2) X(k) ∇l` (resp. `(m − 2) U(l) ∇k`); the
    /// original form is the tangential part alone, with `H^{f1}` the factor
    /// Hessian operator.
    pub fn ricci_operator(&self, x: &Lift, formula: Formula) -> DVector<f64> {
        let which = x.factor;
        let geo = self.factor_geometry(which);
        let fj = self.warping_jet(which);
        let other = self.warping_value(which.other());
        let m_other = self.factor_dim(which.other()) as f64;
        let q = geo.ricci_operator() * &x.comps;
        let hf = geo.inverse() * (geo.hessian(fj) * &x.comps);
        let tangential = (q
            - hf * (m_other / fj.value)
            - &x.comps * (other * other * self.log_laplacian(which.other())))
            / (other * other);
        let mut out = self.embed(&Lift::new(which, tangential));
        if formula == Formula::Corrected {
            let n = self.dim() as f64;
            let xk = self.log_gradient_covector(which).dot(&self.embed(x));
            out += self.log_gradient(which.other()) * ((n - 2.0) * xk);
        }
        out
    }

    /// Scalar curvature from the factor scalar curvatures and Laplacians.
    pub fn scalar(&self) -> f64 {
        let (w1, w2) = (self.f1.value, self.f2.value);
        let (m1, m2) = (self.m1 as f64, self.m2 as f64);
        let lap1_f1 = self.geo1.trace(&self.geo1.hessian(&self.f1));
        let lap2_f2 = self.geo2.trace(&self.geo2.hessian(&self.f2));
        self.geo1.scalar() / (w2 * w2) + self.geo2.scalar() / (w1 * w1)
            - m2 / (w1 * w2 * w2) * lap1_f1
            - m1 / (w1 * w1 * w2) * lap2_f2
            - m1 * self.lap_l
            - m2 * self.lap_k
    }
}
