//! Doubly warped products `M1 ×_{f1,f2} M2` with metric `f2² g1 ⊕ f1² g2`.
//!
//! [`DoublyWarpedProduct`] owns the two factor charts and warping functions
//! and builds the product chart whose brute-force geometry serves as the
//! oracle. [`ProductPoint`] evaluates the closed-form product formulas from
//! factor data alone.

mod closed;

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::{BinOp, Expression, Jet2, Node};
use crate::geometry::{gram_schmidt, ChartManifold, PointGeometry};

pub use closed::{ProductPoint, RiemannClass};

/// Which factor a lifted object lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Factor {
    First,
    Second,
}

impl Factor {
    pub fn other(self) -> Factor {
        match self {
            Factor::First => Factor::Second,
            Factor::Second => Factor::First,
        }
    }

    pub fn index(self) -> u8 {
        match self {
            Factor::First => 1,
            Factor::Second => 2,
        }
    }
}

impl fmt::Display for Factor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "factor {}", self.index())
    }
}

/// Selects between a corrected closed form and the original statement where
/// the two differ.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Formula {
    #[default]
    Corrected,
    Original,
}

/// Tangent vector of one factor at a point, in that factor's coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Lift {
    pub factor: Factor,
    pub comps: DVector<f64>,
}

impl Lift {
    pub fn new(factor: Factor, comps: DVector<f64>) -> Self {
        Lift { factor, comps }
    }

    /// Coordinate basis vector `∂_i` of the given factor.
    pub fn basis(factor: Factor, dim: usize, i: usize) -> Self {
        let mut comps = DVector::zeros(dim);
        comps[i] = 1.0;
        Lift { factor, comps }
    }
}

/// A vector field on one factor, lifted to the product. Components are
/// expressions on the factor chart, so the lift is constant along the other
/// factor and has no components there.
#[derive(Debug, Clone)]
pub struct LiftedVector {
    factor: Factor,
    components: Vec<Expression>,
}

impl LiftedVector {
    pub fn factor(&self) -> Factor {
        self.factor
    }

    pub fn components(&self) -> &[Expression] {
        &self.components
    }
}

/// Whether each warping function is constant on a sample set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Triviality {
    pub f1_constant: bool,
    pub f2_constant: bool,
}

impl Triviality {
    /// Exactly one warping is constant.
    pub fn is_warped_product(&self) -> bool {
        self.f1_constant != self.f2_constant
    }

    pub fn is_direct(&self) -> bool {
        self.f1_constant && self.f2_constant
    }

    /// Neither warping is constant.
    pub fn is_nontrivial(&self) -> bool {
        !self.f1_constant && !self.f2_constant
    }

    pub fn describe(&self) -> &'static str {
        match (self.f1_constant, self.f2_constant) {
            (true, true) => "direct product",
            (false, true) => "warped product (f2 constant)",
            (true, false) => "warped product (f1 constant)",
            (false, false) => "non-trivial doubly warped product",
        }
    }
}

#[derive(Debug, Clone)]
pub struct DoublyWarpedProduct {
    factor1: ChartManifold,
    factor2: ChartManifold,
    f1: Expression,
    f2: Expression,
    k: Expression,
    l: Expression,
    product: ChartManifold,
}

fn square(node: &Node) -> Node {
    Node::Pow(Box::new(node.clone()), Box::new(Node::Num(2.0)))
}

fn log_of(e: &Expression) -> Expression {
    let node = Node::Call(crate::expr::Func::Log, Box::new(e.node().clone()));
    Expression::from_node(node, e.coords().clone())
}

impl DoublyWarpedProduct {
    /// Builds the product of two charts with warping functions given as text
    /// on the respective factor charts.
    pub fn new(factor1: ChartManifold, factor2: ChartManifold, f1: &str, f2: &str) -> Result<Self> {
        let f1 = factor1.field(f1)?;
        let f2 = factor2.field(f2)?;
        Self::from_parts(factor1, factor2, f1, f2)
    }

    pub fn from_parts(
        factor1: ChartManifold,
        factor2: ChartManifold,
        f1: Expression,
        f2: Expression,
    ) -> Result<Self> {
        if f1.coords() != factor1.coords() || f2.coords() != factor2.coords() {
            return Err(Error::Shape(
                "each warping function must be defined on its own factor chart".into(),
            ));
        }
        let (m1, m2) = (factor1.dim(), factor2.dim());
        let coords: Arc<[String]> = factor1
            .coords()
            .iter()
            .chain(factor2.coords().iter())
            .cloned()
            .collect();
        crate::expr::validate_coords(&coords)?;
        let f1_up = f1.lift(coords.clone(), 0);
        let f2_up = f2.lift(coords.clone(), m1);
        let m = m1 + m2;
        let mut metric = Vec::with_capacity(m * m);
        for i in 0..m {
            for j in 0..m {
                let node = match (i < m1, j < m1) {
                    (true, true) => {
                        let g = factor1.component(i, j).lift(coords.clone(), 0);
                        block_entry(&f2_up, &g)
                    }
                    (false, false) => {
                        let g = factor2.component(i - m1, j - m1).lift(coords.clone(), m1);
                        block_entry(&f1_up, &g)
                    }
                    _ => Node::Num(0.0),
                };
                metric.push(Expression::from_node(node, coords.clone()));
            }
        }
        let product = ChartManifold::from_expressions(coords, metric)?;
        let k = log_of(&f1);
        let l = log_of(&f2);
        Ok(DoublyWarpedProduct {
            factor1,
            factor2,
            f1,
            f2,
            k,
            l,
            product,
        })
    }

    pub fn m1(&self) -> usize {
        self.factor1.dim()
    }

    pub fn m2(&self) -> usize {
        self.factor2.dim()
    }

    pub fn dim(&self) -> usize {
        self.m1() + self.m2()
    }

    pub fn product(&self) -> &ChartManifold {
        &self.product
    }

    pub fn factor(&self, which: Factor) -> &ChartManifold {
        match which {
            Factor::First => &self.factor1,
            Factor::Second => &self.factor2,
        }
    }

    /// `f1` for the first factor, `f2` for the second, on the factor chart.
    pub fn warping(&self, which: Factor) -> &Expression {
        match which {
            Factor::First => &self.f1,
            Factor::Second => &self.f2,
        }
    }

    /// `k = ln f1` or `l = ln f2` on the factor chart.
    pub fn log_warping(&self, which: Factor) -> &Expression {
        match which {
            Factor::First => &self.k,
            Factor::Second => &self.l,
        }
    }

    fn offset(&self, which: Factor) -> usize {
        match which {
            Factor::First => 0,
            Factor::Second => self.m1(),
        }
    }

    /// Pulls a factor field back to the product chart.
    pub fn pullback(&self, e: &Expression, which: Factor) -> Result<Expression> {
        if e.coords() != self.factor(which).coords() {
            return Err(Error::Shape(format!(
                "expression is not defined on {which}"
            )));
        }
        Ok(e.lift(self.product.coords().clone(), self.offset(which)))
    }

    /// Parses a scalar field on the product chart.
    pub fn field(&self, text: &str) -> Result<Expression> {
        self.product.field(text)
    }

    pub fn split<'a>(&self, p: &'a [f64]) -> (&'a [f64], &'a [f64]) {
        p.split_at(self.m1())
    }

    pub fn factor_point<'a>(&self, p: &'a [f64], which: Factor) -> &'a [f64] {
        let (a, b) = self.split(p);
        match which {
            Factor::First => a,
            Factor::Second => b,
        }
    }

    /// Evaluates both warpings at `p`, failing on a nonpositive value.
    pub fn warping_values(&self, p: &[f64]) -> Result<(f64, f64)> {
        if p.len() != self.dim() {
            return Err(Error::Shape(format!(
                "point has {} coordinates, product has {}",
                p.len(),
                self.dim()
            )));
        }
        let (p1, p2) = self.split(p);
        let v1 = self.f1.eval(p1)?;
        let v2 = self.f2.eval(p2)?;
        for (which, v) in [(1, v1), (2, v2)] {
            if !(v > 0.0) {
                return Err(Error::NonPositiveWarping {
                    which,
                    value: v,
                    point: p.to_vec(),
                });
            }
        }
        Ok((v1, v2))
    }

    /// Brute-force geometry of the product chart at `p`.
    pub fn oracle_at(&self, p: &[f64]) -> Result<PointGeometry> {
        self.product.geometry_at(p)
    }

    /// Closed-form evaluator at `p`.
    pub fn at(&self, p: &[f64]) -> Result<ProductPoint> {
        ProductPoint::new(self, p, false)
    }

    /// Closed-form evaluator with `l ≡ 0` hard-coded, for products whose
    /// second warping is identically one.
    pub fn at_unwarped_second(&self, p: &[f64]) -> Result<ProductPoint> {
        ProductPoint::new(self, p, true)
    }

    /// Decides which warpings are constant over `points`: every gradient
    /// vanishes and the values agree to rounding.
    pub fn triviality(&self, points: &[Vec<f64>]) -> Result<Triviality> {
        let constant = |which: Factor| -> Result<bool> {
            let e = self.warping(which);
            if e.is_constant() {
                return Ok(true);
            }
            let mut first: Option<f64> = None;
            for p in points {
                let jet = e.jet(self.factor_point(p, which))?;
                let v0 = *first.get_or_insert(jet.value);
                let scale = 1.0 + v0.abs();
                if jet.gradient.amax() > 1e-12 * scale || (jet.value - v0).abs() > 1e-12 * scale {
                    return Ok(false);
                }
            }
            Ok(true)
        };
        Ok(Triviality {
            f1_constant: constant(Factor::First)?,
            f2_constant: constant(Factor::Second)?,
        })
    }

    /// A factor vector field from component expressions on its chart.
    pub fn lifted_vector<S: AsRef<str>>(&self, which: Factor, comps: &[S]) -> Result<LiftedVector> {
        let chart = self.factor(which);
        if comps.len() != chart.dim() {
            return Err(Error::Shape(format!(
                "{which} vector needs {} components, found {}",
                chart.dim(),
                comps.len()
            )));
        }
        let components = comps
            .iter()
            .map(|c| chart.field(c.as_ref()))
            .collect::<Result<Vec<_>>>()?;
        Ok(LiftedVector {
            factor: which,
            components,
        })
    }

    /// Coordinate vector field `∂_i` of a factor.
    pub fn coordinate_vector(&self, which: Factor, i: usize) -> LiftedVector {
        let chart = self.factor(which);
        let components = (0..chart.dim())
            .map(|j| Expression::constant(if i == j { 1.0 } else { 0.0 }, chart.coords().clone()))
            .collect();
        LiftedVector {
            factor: which,
            components,
        }
    }

    /// Product components of a lifted field at `p`.
    pub fn embed_field(&self, v: &LiftedVector, p: &[f64]) -> Result<DVector<f64>> {
        let fp = self.factor_point(p, v.factor);
        let mut out = DVector::zeros(self.dim());
        let off = self.offset(v.factor);
        for (i, c) in v.components.iter().enumerate() {
            out[off + i] = c.eval(fp)?;
        }
        Ok(out)
    }

    /// `∇_A B` from the product Christoffel symbols.
    pub fn covariant_oracle(
        &self,
        a: &LiftedVector,
        b: &LiftedVector,
        p: &[f64],
    ) -> Result<DVector<f64>> {
        let geo = self.oracle_at(p)?;
        let av = self.embed_field(a, p)?;
        let n = self.dim();
        let off = self.offset(b.factor);
        let mut jets = vec![Jet2::constant(n, 0.0); n];
        for (i, c) in b.components.iter().enumerate() {
            jets[off + i] = self.pullback(c, b.factor)?.jet(p)?;
        }
        Ok(geo.covariant_derivative(&av, &jets))
    }

    /// `∇_A B` from the factor connections and the warping gradients.
    pub fn covariant_closed(
        &self,
        a: &LiftedVector,
        b: &LiftedVector,
        p: &[f64],
    ) -> Result<DVector<f64>> {
        let pp = self.at(p)?;
        let av = self.embed_field(a, p)?;
        let bv = self.embed_field(b, p)?;
        let g_ab = pp.inner(&av, &bv);
        Ok(match (a.factor, b.factor) {
            (fa, fb) if fa == fb => {
                let fp = self.factor_point(p, fa);
                let geo = pp.factor_geometry(fa);
                let a_f = DVector::from_iterator(
                    a.components.len(),
                    a.components
                        .iter()
                        .map(|c| c.eval(fp))
                        .collect::<std::result::Result<Vec<_>, _>>()?,
                );
                let b_jets = b
                    .components
                    .iter()
                    .map(|c| c.jet(fp))
                    .collect::<std::result::Result<Vec<_>, _>>()?;
                let tangential = geo.covariant_derivative(&a_f, &b_jets);
                let mut out = DVector::zeros(self.dim());
                let off = self.offset(fa);
                out.rows_mut(off, tangential.len()).copy_from(&tangential);
                // Normal part: −g(A, B) ∇ of the log-warping of the other factor.
                out - pp.log_gradient(fa.other()) * g_ab
            }
            _ => {
                let (x, u) = if a.factor == Factor::First {
                    (&av, &bv)
                } else {
                    (&bv, &av)
                };
                let xk = pp.log_gradient_covector(Factor::First).dot(x);
                let ul = pp.log_gradient_covector(Factor::Second).dot(u);
                x * ul + u * xk
            }
        })
    }

    /// Orthonormal product frame adapted to the factors (the Gram–Schmidt
    /// process on a block-diagonal metric keeps each factor's coordinate
    /// vectors tangent to it), together with the factor frames obtained by
    /// scaling with `f2` and `f1`.
    pub fn adapted_frames(&self, p: &[f64]) -> Result<AdaptedFrames> {
        let geo = self.oracle_at(p)?;
        let (v1, v2) = self.warping_values(p)?;
        let n = self.dim();
        let product = gram_schmidt(geo.metric(), &DMatrix::identity(n, n))?
            .matrix()
            .clone();
        let m1 = self.m1();
        let scaled1 = product.view((0, 0), (m1, m1)) * v2;
        let scaled2 = product.view((m1, m1), (self.m2(), self.m2())) * v1;
        let leak = product
            .view((m1, 0), (self.m2(), m1))
            .amax()
            .max(product.view((0, m1), (m1, self.m2())).amax());
        Ok(AdaptedFrames {
            product,
            leak,
            factor1: scaled1,
            factor2: scaled2,
        })
    }
}

/// Output of [`DoublyWarpedProduct::adapted_frames`].
#[derive(Debug, Clone)]
pub struct AdaptedFrames {
    /// Columns are the product frame vectors.
    pub product: DMatrix<f64>,
    /// Largest off-block component; zero when the frame is adapted.
    pub leak: f64,
    /// `f2 e_i` in factor-1 coordinates.
    pub factor1: DMatrix<f64>,
    /// `f1 ω_j` in factor-2 coordinates.
    pub factor2: DMatrix<f64>,
}

fn block_entry(warp: &Expression, g: &Expression) -> Node {
    if g.is_zero_literal() {
        return Node::Num(0.0);
    }
    Node::Binary(
        BinOp::Mul,
        Box::new(square(warp.node())),
        Box::new(g.node().clone()),
    )
}
