use nalgebra::{DMatrix, DVector};

use super::ChartManifold;
use crate::error::{Error, Result};

/// Orthonormal frame at a point; columns are the frame vectors in
/// coordinate components.
#[derive(Debug, Clone)]
pub struct Frame {
    vectors: DMatrix<f64>,
}

impl Frame {
    pub fn len(&self) -> usize {
        self.vectors.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.ncols() == 0
    }

    pub fn vector(&self, i: usize) -> DVector<f64> {
        self.vectors.column(i).into_owned()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.vectors
    }
}

/// Gram–Schmidt on the columns of `start` with respect to `metric`, in column
/// order. Fails if the columns are linearly dependent.
pub fn gram_schmidt(metric: &DMatrix<f64>, start: &DMatrix<f64>) -> Result<Frame> {
    let n = metric.nrows();
    let mut out = DMatrix::zeros(n, start.ncols());
    for k in 0..start.ncols() {
        let mut v = start.column(k).into_owned();
        // Two passes keep the frame orthonormal to rounding on skewed metrics.
        for _ in 0..2 {
            for j in 0..k {
                let e = out.column(j).into_owned();
                let c = (e.transpose() * metric * &v)[(0, 0)];
                v -= e * c;
            }
        }
        let norm2 = (v.transpose() * metric * &v)[(0, 0)];
        if !(norm2 > 1e-24) {
            return Err(Error::Shape(format!("frame column {k} is degenerate")));
        }
        out.set_column(k, &(v / norm2.sqrt()));
    }
    Ok(Frame { vectors: out })
}

/// Orthonormal frame obtained from the coordinate basis.
pub fn orthonormal_frame(m: &ChartManifold, p: &[f64]) -> Result<Frame> {
    let geo = m.geometry_at(p)?;
    let n = m.dim();
    gram_schmidt(geo.metric(), &DMatrix::identity(n, n))
}
