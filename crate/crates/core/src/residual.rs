//! Residual bookkeeping: per-point values, deterministic max-reduction and
//! the per-check summary.

use std::cmp::Ordering;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

/// Normalized residual `|lhs − rhs|∞ / (1 + largest term magnitude)`.
pub fn normalized(diff: f64, scale: f64) -> f64 {
    diff / (1.0 + scale)
}

/// Accumulates an equation `Σ terms = 0` entrywise and reports the
/// normalized residual. Terms are added in the order given.
#[derive(Debug, Clone)]
pub struct TermSum {
    sum: Vec<f64>,
    scale: f64,
}

impl TermSum {
    pub fn new(len: usize) -> Self {
        TermSum {
            sum: vec![0.0; len],
            scale: 0.0,
        }
    }

    pub fn add(&mut self, term: &[f64]) -> &mut Self {
        assert_eq!(term.len(), self.sum.len(), "term length mismatch");
        for (s, t) in self.sum.iter_mut().zip(term) {
            *s += t;
            self.scale = self.scale.max(t.abs());
        }
        self
    }

    pub fn add_matrix(&mut self, term: &DMatrix<f64>) -> &mut Self {
        self.add(term.as_slice())
    }

    pub fn max_abs(&self) -> f64 {
        max_abs(&self.sum)
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn residual(&self) -> f64 {
        normalized(self.max_abs(), self.scale)
    }

    pub fn values(&self) -> &[f64] {
        &self.sum
    }
}

/// Largest absolute entry; NaN propagates as infinity.
pub fn max_abs(xs: &[f64]) -> f64 {
    xs.iter().fold(0.0, |m: f64, v| {
        if v.is_nan() {
            f64::INFINITY
        } else {
            m.max(v.abs())
        }
    })
}

/// Residual of `a − b` normalized by the larger of the two magnitudes.
pub fn compare(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len(), "length mismatch");
    let diff: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    normalized(max_abs(&diff), max_abs(a).max(max_abs(b)))
}

/// One residual value with the point that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct PointResidual {
    pub value: f64,
    pub point: Vec<f64>,
}

impl PointResidual {
    pub fn new(value: f64, point: &[f64]) -> Self {
        let value = if value.is_nan() { f64::INFINITY } else { value };
        PointResidual {
            value,
            point: point.to_vec(),
        }
    }

    /// Larger value wins; ties go to the lexicographically smaller point.
    fn outranks(&self, other: &PointResidual) -> bool {
        match self.value.total_cmp(&other.value) {
            Ordering::Greater => true,
            Ordering::Less => false,
            Ordering::Equal => lex_cmp(&self.point, &other.point) == Ordering::Less,
        }
    }
}

fn lex_cmp(a: &[f64], b: &[f64]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            Ordering::Equal => continue,
            o => return o,
        }
    }
    a.len().cmp(&b.len())
}

/// Deterministic max over per-point residuals, independent of input order.
pub fn reduce_max(items: impl IntoIterator<Item = PointResidual>) -> Option<PointResidual> {
    items.into_iter().fold(None, |best, r| match best {
        Some(b) if !r.outranks(&b) => Some(b),
        _ => Some(r),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Skipped => "skipped",
        }
    }
}

/// Outcome of one named check over a sample set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualSummary {
    pub check_id: String,
    pub status: Status,
    pub max_abs_residual: f64,
    pub worst_point: Vec<f64>,
    pub points: usize,
    pub tolerance: f64,
    pub notes: Vec<String>,
}

impl ResidualSummary {
    /// Summary from per-point residuals; passes iff the maximum is within
    /// `tolerance`.
    pub fn from_points(
        check_id: impl Into<String>,
        tolerance: f64,
        items: Vec<PointResidual>,
    ) -> Self {
        let points = items.len();
        let worst = reduce_max(items);
        let (max, worst_point) = worst.map_or((0.0, Vec::new()), |w| (w.value, w.point));
        ResidualSummary {
            check_id: check_id.into(),
            status: if max <= tolerance {
                Status::Pass
            } else {
                Status::Fail
            },
            max_abs_residual: max,
            worst_point,
            points,
            tolerance,
            notes: Vec::new(),
        }
    }

    pub fn skipped(check_id: impl Into<String>, tolerance: f64, reason: impl Into<String>) -> Self {
        ResidualSummary {
            check_id: check_id.into(),
            status: Status::Skipped,
            max_abs_residual: 0.0,
            worst_point: Vec::new(),
            points: 0,
            tolerance,
            notes: vec![format!("skipped: {}", reason.into())],
        }
    }

    /// Spot check expecting a nonzero residual everywhere: passes iff the
    /// smallest per-point residual exceeds `threshold`. The reported value
    /// and point are that minimum.
    pub fn lower_bound(
        check_id: impl Into<String>,
        threshold: f64,
        items: Vec<PointResidual>,
    ) -> Self {
        let points = items.len();
        let least = items
            .into_iter()
            .fold(None::<PointResidual>, |best, r| match best {
                Some(b)
                    if b.value
                        .total_cmp(&r.value)
                        .then_with(|| lex_cmp(&b.point, &r.point))
                        != Ordering::Greater =>
                {
                    Some(b)
                }
                _ => Some(r),
            });
        let (min, worst_point) = least.map_or((0.0, Vec::new()), |w| (w.value, w.point));
        ResidualSummary {
            check_id: check_id.into(),
            status: if points > 0 && min > threshold {
                Status::Pass
            } else {
                Status::Fail
            },
            max_abs_residual: min,
            worst_point,
            points,
            tolerance: threshold,
            notes: vec![format!(
                "lower bound: every residual must exceed {threshold:e}"
            )],
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.notes.push(note.into());
        self
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }

    pub fn failed(&self) -> bool {
        self.status == Status::Fail
    }
}
