use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variance {
    Covariant,
    Contravariant,
}

/// Dense coordinate tensor with row-major storage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TensorValue {
    shape: Vec<usize>,
    variance: Vec<Variance>,
    data: Vec<f64>,
}

impl TensorValue {
    pub fn new(shape: Vec<usize>, variance: Vec<Variance>, data: Vec<f64>) -> Result<Self> {
        if shape.len() != variance.len() {
            return Err(Error::Shape(format!(
                "{} indices but {} variance markers",
                shape.len(),
                variance.len()
            )));
        }
        let len: usize = shape.iter().product();
        if len != data.len() {
            return Err(Error::Shape(format!(
                "shape {shape:?} needs {len} entries, found {}",
                data.len()
            )));
        }
        Ok(TensorValue {
            shape,
            variance,
            data,
        })
    }

    pub fn zeros(dim: usize, variance: &[Variance]) -> Self {
        let shape = vec![dim; variance.len()];
        let len = shape.iter().product();
        TensorValue {
            shape,
            variance: variance.to_vec(),
            data: vec![0.0; len],
        }
    }

    pub fn from_matrix(m: &DMatrix<f64>, variance: [Variance; 2]) -> Self {
        let (r, c) = m.shape();
        let data = (0..r)
            .flat_map(|i| (0..c).map(move |j| m[(i, j)]))
            .collect();
        TensorValue {
            shape: vec![r, c],
            variance: variance.to_vec(),
            data,
        }
    }

    pub fn rank(&self) -> usize {
        self.shape.len()
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn variance(&self) -> &[Variance] {
        &self.variance
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    fn offset(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.shape.len());
        idx.iter()
            .zip(&self.shape)
            .fold(0, |acc, (&i, &n)| acc * n + i)
    }

    pub fn get(&self, idx: &[usize]) -> f64 {
        self.data[self.offset(idx)]
    }

    pub fn set(&mut self, idx: &[usize], v: f64) {
        let o = self.offset(idx);
        self.data[o] = v;
    }

    /// Rank-2 tensor as a matrix. Panics on other ranks.
    pub fn to_matrix(&self) -> DMatrix<f64> {
        assert_eq!(self.rank(), 2, "to_matrix needs a rank-2 tensor");
        DMatrix::from_row_slice(self.shape[0], self.shape[1], &self.data)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max_abs_diff(&self, other: &TensorValue) -> f64 {
        assert_eq!(self.shape, other.shape, "shape mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    /// Entrywise combination of two same-shape tensors.
    pub fn combine(&self, other: &TensorValue, f: impl Fn(f64, f64) -> f64) -> TensorValue {
        assert_eq!(self.shape, other.shape, "shape mismatch");
        TensorValue {
            shape: self.shape.clone(),
            variance: self.variance.clone(),
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    pub fn scale(&self, s: f64) -> TensorValue {
        TensorValue {
            shape: self.shape.clone(),
            variance: self.variance.clone(),
            data: self.data.iter().map(|v| v * s).collect(),
        }
    }

    /// Checks `T[.. a .. b ..] = T[.. b .. a ..]` for the given slots.
    pub fn is_symmetric(&self, a: usize, b: usize, tol: f64) -> bool {
        self.symmetry_defect(a, b, 1.0) <= tol
    }

    /// Largest `|T[.., i, .., j, ..] − sign * T[.., j, .., i, ..]|`.
    pub fn symmetry_defect(&self, a: usize, b: usize, sign: f64) -> f64 {
        let mut idx = vec![0; self.rank()];
        let mut worst: f64 = 0.0;
        for flat in 0..self.data.len() {
            let mut rem = flat;
            for k in (0..self.rank()).rev() {
                idx[k] = rem % self.shape[k];
                rem /= self.shape[k];
            }
            let v = self.data[flat];
            idx.swap(a, b);
            let w = self.get(&idx);
            idx.swap(a, b);
            worst = worst.max((v - sign * w).abs());
        }
        worst
    }
}

/// Kulkarni–Nomizu product of two symmetric (0,2) tensors:
/// `(A∧B)(X,Y,Z,W) = A(X,W)B(Y,Z) + A(Y,Z)B(X,W) − A(X,Z)B(Y,W) − A(Y,W)B(X,Z)`.
pub fn kulkarni_nomizu(a: &TensorValue, b: &TensorValue) -> Result<TensorValue> {
    if a.rank() != 2 || b.rank() != 2 || a.shape != b.shape || a.shape[0] != a.shape[1] {
        return Err(Error::Shape(
            "Kulkarni-Nomizu product needs two square rank-2 tensors of equal size".into(),
        ));
    }
    if a.variance
        .iter()
        .chain(&b.variance)
        .any(|v| *v != Variance::Covariant)
    {
        return Err(Error::Shape(
            "Kulkarni-Nomizu product needs covariant arguments".into(),
        ));
    }
    Ok(kulkarni_nomizu_matrices(&a.to_matrix(), &b.to_matrix()))
}

pub fn kulkarni_nomizu_matrices(a: &DMatrix<f64>, b: &DMatrix<f64>) -> TensorValue {
    let n = a.nrows();
    let mut t = TensorValue::zeros(n, &[Variance::Covariant; 4]);
    for x in 0..n {
        for y in 0..n {
            for z in 0..n {
                for w in 0..n {
                    let v = a[(x, w)] * b[(y, z)] + a[(y, z)] * b[(x, w)]
                        - a[(x, z)] * b[(y, w)]
                        - a[(y, w)] * b[(x, z)];
                    t.set(&[x, y, z, w], v);
                }
            }
        }
    }
    t
}
