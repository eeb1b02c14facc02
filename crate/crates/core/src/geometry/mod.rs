//! Brute-force Riemannian tensor calculus on a coordinate chart.
//!
//! Everything here is computed directly from the metric components and their
//! exact first and second derivatives. This is the reference against which
//! the closed-form product formulas in [`crate::dwp`] and [`crate::special`]
//! are checked.
//!
//! Conventions: `R(X,Y)Z = ∇_X∇_Y Z − ∇_Y∇_X Z − ∇_[X,Y] Z`,
//! `R(X,Y,Z,W) = g(R(X,Y)Z, W)`, `Ric(Y,Z) = tr(X ↦ R(X,Y)Z)` and
//! `Δψ = tr_g h^ψ`. With these the round sphere has positive Ricci curvature.

mod frame;
mod tensor;

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::expr::{Expression, Jet2};

pub use frame::{gram_schmidt, orthonormal_frame, Frame};
pub use tensor::{kulkarni_nomizu, kulkarni_nomizu_matrices, TensorValue, Variance};

/// A Riemannian metric on a single coordinate chart.
#[derive(Debug, Clone)]
pub struct ChartManifold {
    coords: Arc<[String]>,
    /// Row-major `dim × dim` metric components.
    metric: Vec<Expression>,
    /// `mirrored[i * dim + j]` is true when `g_ij` and `g_ji` are the same tree.
    mirrored: Vec<bool>,
}

impl ChartManifold {
    /// Parses a chart from coordinate names and a row-major matrix of
    /// component expressions.
    pub fn new<S: AsRef<str>, T: AsRef<str>>(coords: &[S], metric: &[Vec<T>]) -> Result<Self> {
        let coords: Arc<[String]> = coords.iter().map(|s| s.as_ref().to_string()).collect();
        crate::expr::validate_coords(&coords)?;
        let dim = coords.len();
        if metric.len() != dim || metric.iter().any(|row| row.len() != dim) {
            return Err(Error::Shape(format!(
                "metric must be {dim}x{dim} for coordinates {:?}",
                &coords[..]
            )));
        }
        let mut comps = Vec::with_capacity(dim * dim);
        for row in metric {
            for text in row {
                comps.push(Expression::parse(text.as_ref(), coords.clone())?);
            }
        }
        Self::from_expressions(coords, comps)
    }

    pub fn from_expressions(coords: Arc<[String]>, metric: Vec<Expression>) -> Result<Self> {
        let dim = coords.len();
        if dim == 0 {
            return Err(Error::Shape("chart needs at least one coordinate".into()));
        }
        if metric.len() != dim * dim {
            return Err(Error::Shape(format!(
                "expected {} metric components, found {}",
                dim * dim,
                metric.len()
            )));
        }
        if metric.iter().any(|e| e.coords() != &coords) {
            return Err(Error::Shape(
                "metric component bound to a different chart".into(),
            ));
        }
        let mirrored = (0..dim * dim)
            .map(|k| {
                let (i, j) = (k / dim, k % dim);
                metric[i * dim + j].node() == metric[j * dim + i].node()
            })
            .collect();
        Ok(ChartManifold {
            coords,
            metric,
            mirrored,
        })
    }

    /// Flat metric `δ_ij` on the given coordinates.
    pub fn euclidean<S: AsRef<str>>(coords: &[S]) -> Result<Self> {
        let n = coords.len();
        let metric: Vec<Vec<&str>> = (0..n)
            .map(|i| (0..n).map(|j| if i == j { "1" } else { "0" }).collect())
            .collect();
        Self::new(coords, &metric)
    }

    /// Diagonal metric from one expression per coordinate.
    pub fn diagonal<S: AsRef<str>, T: AsRef<str>>(coords: &[S], diag: &[T]) -> Result<Self> {
        let n = coords.len();
        let metric: Vec<Vec<&str>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| if i == j { diag[i].as_ref() } else { "0" })
                    .collect()
            })
            .collect();
        Self::new(coords, &metric)
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &Arc<[String]> {
        &self.coords
    }

    pub fn component(&self, i: usize, j: usize) -> &Expression {
        &self.metric[i * self.dim() + j]
    }

    /// Parses a scalar field on this chart.
    pub fn field(&self, text: &str) -> Result<Expression> {
        Ok(Expression::parse(text, self.coords.clone())?)
    }

    /// All oracle quantities at `point`.
    pub fn geometry_at(&self, point: &[f64]) -> Result<PointGeometry> {
        PointGeometry::compute(self, point)
    }
}

/// Point-local brute-force geometry: metric, Christoffel symbols, curvature.
#[derive(Debug, Clone)]
pub struct PointGeometry {
    point: Vec<f64>,
    metric: DMatrix<f64>,
    inverse: DMatrix<f64>,
    /// `Γ^a_{bc}` at `(a * n + b) * n + c`.
    christoffel: Vec<f64>,
    /// `R^a_{bcd}` with `(R(∂_c, ∂_d)∂_b)^a`, at `((a * n + b) * n + c) * n + d`.
    riemann: Vec<f64>,
    ricci: DMatrix<f64>,
    scalar: f64,
}

impl PointGeometry {
    fn compute(m: &ChartManifold, point: &[f64]) -> Result<Self> {
        let n = m.dim();
        if point.len() != n {
            return Err(Error::Shape(format!(
                "point has {} coordinates, chart has {n}",
                point.len()
            )));
        }
        let mut jets: Vec<Option<Jet2>> = vec![None; n * n];
        for i in 0..n {
            for j in i..n {
                jets[i * n + j] = Some(m.component(i, j).jet(point)?);
            }
        }
        let jet = |i: usize, j: usize| -> &Jet2 {
            let (a, b) = if i <= j { (i, j) } else { (j, i) };
            jets[a * n + b].as_ref().expect("upper triangle evaluated")
        };
        for i in 0..n {
            for j in 0..i {
                if !m.mirrored[i * n + j] {
                    let lower = m.component(i, j).eval(point)?;
                    let upper = jet(j, i).value;
                    if (lower - upper).abs() > 1e-12 * (1.0 + upper.abs()) {
                        return Err(Error::AsymmetricMetric {
                            i: j,
                            j: i,
                            upper,
                            lower,
                            point: point.to_vec(),
                        });
                    }
                }
            }
        }

        let metric = DMatrix::from_fn(n, n, |i, j| jet(i, j).value);
        let chol = metric
            .clone()
            .cholesky()
            .ok_or_else(|| Error::NotPositiveDefinite {
                point: point.to_vec(),
            })?;
        let inverse = chol.inverse();

        // dg[k][(i, j)] = ∂_k g_ij, ddg[(k, l)][(i, j)] = ∂_k ∂_l g_ij
        let dg = |k: usize, i: usize, j: usize| jet(i, j).gradient[k];
        let ddg = |k: usize, l: usize, i: usize, j: usize| jet(i, j).hessian[(k, l)];

        let idx3 = |a: usize, b: usize, c: usize| (a * n + b) * n + c;
        // First kind: Γ_{c,ab} = ½(∂_a g_bc + ∂_b g_ac − ∂_c g_ab)
        let mut first = vec![0.0; n * n * n];
        for c in 0..n {
            for a in 0..n {
                for b in 0..n {
                    first[idx3(c, a, b)] = 0.5 * (dg(a, b, c) + dg(b, a, c) - dg(c, a, b));
                }
            }
        }
        let mut christoffel = vec![0.0; n * n * n];
        for d in 0..n {
            for a in 0..n {
                for b in 0..n {
                    christoffel[idx3(d, a, b)] =
                        (0..n).map(|c| inverse[(d, c)] * first[idx3(c, a, b)]).sum();
                }
            }
        }

        // ∂_e g^{-1} = −g^{-1} (∂_e g) g^{-1}
        let dinv: Vec<DMatrix<f64>> = (0..n)
            .map(|e| {
                let de = DMatrix::from_fn(n, n, |i, j| dg(e, i, j));
                -(&inverse * de * &inverse)
            })
            .collect();
        // ∂_e Γ^d_{ab} at ((e * n + d) * n + a) * n + b
        let idx4 = |a: usize, b: usize, c: usize, d: usize| ((a * n + b) * n + c) * n + d;
        let mut dchris = vec![0.0; n * n * n * n];
        for e in 0..n {
            for a in 0..n {
                for b in 0..n {
                    let dfirst: Vec<f64> = (0..n)
                        .map(|c| 0.5 * (ddg(e, a, b, c) + ddg(e, b, a, c) - ddg(e, c, a, b)))
                        .collect();
                    for d in 0..n {
                        let mut s = 0.0;
                        for c in 0..n {
                            s += dinv[e][(d, c)] * first[idx3(c, a, b)]
                                + inverse[(d, c)] * dfirst[c];
                        }
                        dchris[idx4(e, d, a, b)] = s;
                    }
                }
            }
        }

        // R^a_{bcd} = ∂_c Γ^a_{db} − ∂_d Γ^a_{cb} + Γ^a_{ce} Γ^e_{db} − Γ^a_{de} Γ^e_{cb}
        let mut riemann = vec![0.0; n * n * n * n];
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    for d in 0..n {
                        let mut s = dchris[idx4(c, a, d, b)] - dchris[idx4(d, a, c, b)];
                        for e in 0..n {
                            s += christoffel[idx3(a, c, e)] * christoffel[idx3(e, d, b)]
                                - christoffel[idx3(a, d, e)] * christoffel[idx3(e, c, b)];
                        }
                        riemann[idx4(a, b, c, d)] = s;
                    }
                }
            }
        }

        // Ric(Y, Z) = Σ_a (R(∂_a, Y) Z)^a = Σ_a R^a_{Z a Y}
        let ricci = DMatrix::from_fn(n, n, |y, z| {
            (0..n).map(|a| riemann[idx4(a, z, a, y)]).sum::<f64>()
        });
        let scalar = inverse.component_mul(&ricci).sum();

        Ok(PointGeometry {
            point: point.to_vec(),
            metric,
            inverse,
            christoffel,
            riemann,
            ricci,
            scalar,
        })
    }

    pub fn dim(&self) -> usize {
        self.metric.nrows()
    }

    pub fn point(&self) -> &[f64] {
        &self.point
    }

    pub fn metric(&self) -> &DMatrix<f64> {
        &self.metric
    }

    pub fn inverse(&self) -> &DMatrix<f64> {
        &self.inverse
    }

    pub fn ricci(&self) -> &DMatrix<f64> {
        &self.ricci
    }

    pub fn scalar(&self) -> f64 {
        self.scalar
    }

    /// Ricci operator `Q = g^{-1} Ric`, so that `g(QX, Y) = Ric(X, Y)`.
    pub fn ricci_operator(&self) -> DMatrix<f64> {
        &self.inverse * &self.ricci
    }

    pub fn christoffel(&self, a: usize, b: usize, c: usize) -> f64 {
        let n = self.dim();
        self.christoffel[(a * n + b) * n + c]
    }

    /// `R^a_{bcd}`, the `a` component of `R(∂_c, ∂_d)∂_b`.
    pub fn riemann_component(&self, a: usize, b: usize, c: usize, d: usize) -> f64 {
        let n = self.dim();
        self.riemann[((a * n + b) * n + c) * n + d]
    }

    /// Ratio of extreme metric eigenvalues.
    pub fn condition_number(&self) -> f64 {
        let eig = self.metric.clone().symmetric_eigen();
        let max = eig.eigenvalues.max();
        let min = eig.eigenvalues.min();
        max / min
    }

    pub fn inner(&self, a: &DVector<f64>, b: &DVector<f64>) -> f64 {
        (a.transpose() * &self.metric * b)[(0, 0)]
    }

    /// `R(X, Y)Z` as a vector.
    pub fn curvature(&self, x: &DVector<f64>, y: &DVector<f64>, z: &DVector<f64>) -> DVector<f64> {
        let n = self.dim();
        DVector::from_fn(n, |a, _| {
            let mut s = 0.0;
            for b in 0..n {
                if z[b] == 0.0 {
                    continue;
                }
                for c in 0..n {
                    if x[c] == 0.0 {
                        continue;
                    }
                    for d in 0..n {
                        s += self.riemann_component(a, b, c, d) * z[b] * x[c] * y[d];
                    }
                }
            }
            s
        })
    }

    /// Fully covariant `R(X, Y, Z, W)`.
    pub fn riemann4(
        &self,
        x: &DVector<f64>,
        y: &DVector<f64>,
        z: &DVector<f64>,
        w: &DVector<f64>,
    ) -> f64 {
        self.inner(&self.curvature(x, y, z), w)
    }

    /// The (0,4) Riemann tensor in coordinates.
    pub fn riemann_tensor(&self) -> TensorValue {
        let n = self.dim();
        let mut t = TensorValue::zeros(n, &[Variance::Covariant; 4]);
        for x in 0..n {
            for y in 0..n {
                for z in 0..n {
                    for w in 0..n {
                        let v = (0..n)
                            .map(|a| self.metric[(w, a)] * self.riemann_component(a, z, x, y))
                            .sum();
                        t.set(&[x, y, z, w], v);
                    }
                }
            }
        }
        t
    }

    pub fn christoffel_tensor(&self) -> TensorValue {
        let n = self.dim();
        TensorValue::new(
            vec![n; 3],
            vec![
                Variance::Contravariant,
                Variance::Covariant,
                Variance::Covariant,
            ],
            self.christoffel.clone(),
        )
        .expect("shape matches")
    }

    /// Covariant Hessian `h_ij = ∂_i∂_j ψ − Γ^k_ij ∂_k ψ` from a jet of ψ in
    /// this chart.
    pub fn hessian(&self, psi: &Jet2) -> DMatrix<f64> {
        let n = self.dim();
        DMatrix::from_fn(n, n, |i, j| {
            psi.hessian[(i, j)]
                - (0..n)
                    .map(|k| self.christoffel(k, i, j) * psi.gradient[k])
                    .sum::<f64>()
        })
    }

    pub fn gradient(&self, psi: &Jet2) -> DVector<f64> {
        &self.inverse * &psi.gradient
    }

    pub fn trace(&self, bilinear: &DMatrix<f64>) -> f64 {
        self.inverse.component_mul(bilinear).sum()
    }

    /// `∇_A B` for a direction `a` and a vector field given by the jets of its
    /// components.
    pub fn covariant_derivative(&self, a: &DVector<f64>, b: &[Jet2]) -> DVector<f64> {
        let n = self.dim();
        DVector::from_fn(n, |k, _| {
            let mut s = b[k].gradient.dot(a);
            for i in 0..n {
                for j in 0..n {
                    s += self.christoffel(k, i, j) * a[i] * b[j].value;
                }
            }
            s
        })
    }
}

/// Metric and inverse at `p`.
pub fn metric_at(m: &ChartManifold, p: &[f64]) -> Result<(TensorValue, TensorValue)> {
    let geo = m.geometry_at(p)?;
    Ok((
        TensorValue::from_matrix(geo.metric(), [Variance::Covariant; 2]),
        TensorValue::from_matrix(geo.inverse(), [Variance::Contravariant; 2]),
    ))
}

pub fn christoffel(m: &ChartManifold, p: &[f64]) -> Result<TensorValue> {
    Ok(m.geometry_at(p)?.christoffel_tensor())
}

pub fn riemann_oracle(m: &ChartManifold, p: &[f64]) -> Result<TensorValue> {
    Ok(m.geometry_at(p)?.riemann_tensor())
}

pub fn ricci_oracle(m: &ChartManifold, p: &[f64]) -> Result<TensorValue> {
    Ok(TensorValue::from_matrix(
        m.geometry_at(p)?.ricci(),
        [Variance::Covariant; 2],
    ))
}

pub fn scalar_oracle(m: &ChartManifold, p: &[f64]) -> Result<f64> {
    Ok(m.geometry_at(p)?.scalar())
}

/// Gradient, Hessian and Laplacian of a scalar field.
#[derive(Debug, Clone)]
pub struct FieldDerivatives {
    pub gradient: TensorValue,
    pub hessian: TensorValue,
    pub laplacian: f64,
}

pub fn hessian_field(m: &ChartManifold, psi: &Expression, p: &[f64]) -> Result<FieldDerivatives> {
    if psi.coords() != m.coords() {
        return Err(Error::Shape("field is bound to a different chart".into()));
    }
    let geo = m.geometry_at(p)?;
    let jet = psi.jet(p)?;
    let h = geo.hessian(&jet);
    let grad = geo.gradient(&jet);
    Ok(FieldDerivatives {
        laplacian: geo.trace(&h),
        gradient: TensorValue::new(
            vec![m.dim()],
            vec![Variance::Contravariant],
            grad.as_slice().to_vec(),
        )
        .expect("shape matches"),
        hessian: TensorValue::from_matrix(&h, [Variance::Covariant; 2]),
    })
}
