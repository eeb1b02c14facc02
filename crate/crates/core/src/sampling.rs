//! Seeded uniform sampling in a coordinate box with rejection.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Candidates drawn per requested point before giving up.
pub const OVERSAMPLING_CAP: usize = 10;

/// Metrics with a larger eigenvalue ratio are rejected as ill-conditioned.
pub const MAX_CONDITION: f64 = 1e8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleBox {
    bounds: Vec<(f64, f64)>,
}

impl SampleBox {
    pub fn new(bounds: Vec<(f64, f64)>) -> Result<Self> {
        for (i, &(lo, hi)) in bounds.iter().enumerate() {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::Config(format!(
                    "box interval {i} must satisfy lo < hi, got [{lo}, {hi}]"
                )));
            }
        }
        Ok(SampleBox { bounds })
    }

    /// The same interval on every coordinate.
    pub fn uniform(dim: usize, lo: f64, hi: f64) -> Result<Self> {
        Self::new(vec![(lo, hi); dim])
    }

    pub fn dim(&self) -> usize {
        self.bounds.len()
    }

    pub fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    pub fn center(&self) -> Vec<f64> {
        self.bounds.iter().map(|(lo, hi)| 0.5 * (lo + hi)).collect()
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        p.len() == self.dim()
            && p.iter()
                .zip(&self.bounds)
                .all(|(x, (lo, hi))| *lo <= *x && *x <= *hi)
    }
}

/// Outcome of screening one candidate point.
#[derive(Debug, Clone, PartialEq)]
pub enum Screen {
    Accept,
    /// Resample: singular, ill-conditioned or outside an expression's domain.
    Reject,
}

/// Draws `count` points uniformly from `bx` with a ChaCha8 stream seeded by
/// `seed`. `screen` may reject a candidate or abort with a hard error. At most
/// `OVERSAMPLING_CAP * count` candidates are drawn.
pub fn sample_points<F>(
    bx: &SampleBox,
    count: usize,
    seed: u64,
    mut screen: F,
) -> Result<Vec<Vec<f64>>>
where
    F: FnMut(&[f64]) -> Result<Screen>,
{
    if count == 0 {
        return Err(Error::Config(
            "at least one sample point is required".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let attempts = OVERSAMPLING_CAP * count;
    let mut out = Vec::with_capacity(count);
    for _ in 0..attempts {
        let p: Vec<f64> = bx
            .bounds
            .iter()
            .map(|&(lo, hi)| rng.gen_range(lo..=hi))
            .collect();
        if screen(&p)? == Screen::Accept {
            out.push(p);
            if out.len() == count {
                return Ok(out);
            }
        }
    }
    Err(Error::Sampling {
        accepted: out.len(),
        wanted: count,
        attempts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_points() {
        let bx = SampleBox::uniform(3, -1.0, 2.0).unwrap();
        let a = sample_points(&bx, 20, 7, |_| Ok(Screen::Accept)).unwrap();
        let b = sample_points(&bx, 20, 7, |_| Ok(Screen::Accept)).unwrap();
        assert_eq!(a, b);
        assert!(a.iter().all(|p| bx.contains(p)));
        let c = sample_points(&bx, 20, 8, |_| Ok(Screen::Accept)).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn rejection_and_cap() {
        let bx = SampleBox::uniform(1, -1.0, 1.0).unwrap();
        let pts = sample_points(&bx, 10, 1, |p| {
            Ok(if p[0] > 0.0 {
                Screen::Accept
            } else {
                Screen::Reject
            })
        })
        .unwrap();
        assert!(pts.iter().all(|p| p[0] > 0.0));
        let err = sample_points(&bx, 10, 1, |_| Ok(Screen::Reject)).unwrap_err();
        assert!(matches!(
            err,
            Error::Sampling {
                accepted: 0,
                wanted: 10,
                attempts: 100
            }
        ));
    }

    #[test]
    fn bad_boxes() {
        assert!(SampleBox::new(vec![(1.0, 1.0)]).is_err());
        assert!(SampleBox::new(vec![(0.0, f64::NAN)]).is_err());
        assert_eq!(
            SampleBox::uniform(2, -1.0, 3.0).unwrap().center(),
            vec![1.0, 1.0]
        );
    }
}
