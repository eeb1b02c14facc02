//! Brute-force search for flat members of a two-parameter family.

use super::CurvatureVariant;
use crate::corpus::CorpusEntry;
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::sampling::{sample_points, Screen};

#[derive(Debug, Clone, PartialEq)]
pub struct SearchResult {
    pub a: f64,
    pub b: f64,
    /// Largest tensor component over the samples at `(a, b)`.
    pub norm: f64,
    /// Norms over the whole grid, row-major in `(a, b)`.
    pub grid: Vec<(f64, f64, f64)>,
}

/// Largest coordinate component of the variant over seeded samples in the
/// entry's box.
pub fn tensor_norm(
    entry: &CorpusEntry,
    variant: CurvatureVariant,
    points: usize,
    seed: u64,
) -> Result<f64> {
    let pts = sample_points(&entry.sample_box, points, seed, |_| Ok(Screen::Accept))?;
    let m = entry.dwp.product();
    let mut worst: f64 = 0.0;
    for p in &pts {
        worst = worst.max(variant.oracle(m, p)?.max_abs());
    }
    Ok(worst)
}

/// Evaluates `tensor_norm` on every grid pair and returns the smallest.
/// Ties keep the first pair in grid order.
pub fn grid_search<F>(
    family: F,
    a_values: &[f64],
    b_values: &[f64],
    variant: CurvatureVariant,
    points: usize,
    seed: u64,
    exec: Execution,
) -> Result<SearchResult>
where
    F: Fn(f64, f64) -> Result<CorpusEntry> + Sync + Send,
{
    let pairs: Vec<(f64, f64)> = a_values
        .iter()
        .flat_map(|&a| b_values.iter().map(move |&b| (a, b)))
        .collect();
    let norms: Result<Vec<f64>> = exec
        .map(&pairs, |&(a, b)| {
            tensor_norm(&family(a, b)?, variant, points, seed)
        })
        .into_iter()
        .collect();
    let grid: Vec<(f64, f64, f64)> = pairs
        .iter()
        .zip(norms?)
        .map(|(&(a, b), n)| (a, b, n))
        .collect();
    let best = grid
        .iter()
        .copied()
        .reduce(|best, x| if x.2 < best.2 { x } else { best })
        .ok_or_else(|| Error::Config("empty parameter grid".into()))?;
    Ok(SearchResult {
        a: best.0,
        b: best.1,
        norm: best.2,
        grid,
    })
}
