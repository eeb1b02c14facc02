//! Sweeps a per-point residual over a sample set and summarizes it.

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::residual::{PointResidual, ResidualSummary, Status};

#[derive(Debug, Clone, Copy)]
pub struct Sweep<'a> {
    pub points: &'a [Vec<f64>],
    pub tolerance: f64,
    pub exec: Execution,
}

impl<'a> Sweep<'a> {
    pub fn new(points: &'a [Vec<f64>], tolerance: f64) -> Self {
        Sweep {
            points,
            tolerance,
            exec: Execution::default(),
        }
    }

    pub fn with_exec(mut self, exec: Execution) -> Self {
        self.exec = exec;
        self
    }

    pub fn with_points(mut self, points: &'a [Vec<f64>]) -> Self {
        self.points = points;
        self
    }

    /// Evaluates `f` at every point, in input order.
    pub fn values<F>(&self, f: F) -> Result<Vec<PointResidual>>
    where
        F: Fn(&[f64]) -> Result<f64> + Sync + Send,
    {
        self.exec
            .map(self.points, |p| f(p).map(|v| PointResidual::new(v, p)))
            .into_iter()
            .collect()
    }

    /// Max-reduced summary. An evaluation error fails the check.
    pub fn max<F>(&self, id: &str, f: F) -> ResidualSummary
    where
        F: Fn(&[f64]) -> Result<f64> + Sync + Send,
    {
        match self.values(f) {
            Ok(items) => ResidualSummary::from_points(id, self.tolerance, items),
            Err(e) => failed(id, self.tolerance, &e),
        }
    }

    /// Summary that passes only if every residual exceeds `threshold`.
    pub fn lower_bound<F>(&self, id: &str, threshold: f64, f: F) -> ResidualSummary
    where
        F: Fn(&[f64]) -> Result<f64> + Sync + Send,
    {
        match self.values(f) {
            Ok(items) => ResidualSummary::lower_bound(id, threshold, items),
            Err(e) => failed(id, threshold, &e),
        }
    }
}

pub fn failed(id: &str, tolerance: f64, err: &Error) -> ResidualSummary {
    ResidualSummary {
        check_id: id.to_string(),
        status: Status::Fail,
        max_abs_residual: f64::INFINITY,
        worst_point: Vec::new(),
        points: 0,
        tolerance,
        notes: vec![format!("evaluation error: {err}")],
    }
}
