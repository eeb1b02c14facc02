//! Named example manifolds with known geometry, plus a default sampling box
//! for each.

use crate::dwp::DoublyWarpedProduct;
use crate::error::Result;
use crate::geometry::ChartManifold;
use crate::sampling::SampleBox;

#[derive(Debug, Clone)]
pub struct CorpusEntry {
    pub name: String,
    pub dwp: DoublyWarpedProduct,
    pub sample_box: SampleBox,
}

fn entry(name: &str, dwp: DoublyWarpedProduct, bounds: Vec<(f64, f64)>) -> Result<CorpusEntry> {
    Ok(CorpusEntry {
        name: name.to_string(),
        dwp,
        sample_box: SampleBox::new(bounds)?,
    })
}

fn unit_box(n: usize) -> Vec<(f64, f64)> {
    vec![(-1.0, 1.0); n]
}

/// `ℝ²(x, y) × ℝ(t)` with both warpings equal to one.
pub fn direct_flat() -> Result<CorpusEntry> {
    let dwp = DoublyWarpedProduct::new(
        ChartManifold::euclidean(&["x", "y"])?,
        ChartManifold::euclidean(&["t"])?,
        "1",
        "1",
    )?;
    entry("direct_flat", dwp, unit_box(3))
}

/// `ℝ²(x, y) ×_{e^x} ℝ(t)`: an ordinary warped product.
pub fn warped_exp() -> Result<CorpusEntry> {
    let dwp = DoublyWarpedProduct::new(
        ChartManifold::euclidean(&["x", "y"])?,
        ChartManifold::euclidean(&["t"])?,
        "exp(x)",
        "1",
    )?;
    entry("warped_exp", dwp, unit_box(3))
}

/// Flat `ℝ²(x, y)` and `ℝ(t)` with `f1 = e^x`, `f2 = cosh t`.
pub fn e2xe1() -> Result<CorpusEntry> {
    let dwp = DoublyWarpedProduct::new(
        ChartManifold::euclidean(&["x", "y"])?,
        ChartManifold::euclidean(&["t"])?,
        "exp(x)",
        "cosh(t)",
    )?;
    entry("e2xe1", dwp, unit_box(3))
}

/// Two curved 2-dimensional factors with non-diagonal metric and warpings
/// depending on every coordinate.
pub fn generic_2x2() -> Result<CorpusEntry> {
    let f1 = ChartManifold::new(
        &["x", "y"],
        &[vec!["1 + x^2/4", "y/5"], vec!["y/5", "1 + y^2/3"]],
    )?;
    let f2 = ChartManifold::diagonal(&["u", "v"], &["exp(u/3)", "1 + v^2/5"])?;
    let dwp = DoublyWarpedProduct::new(f1, f2, "exp(x/2 + y^2/5)", "cosh(u) + v^2/4")?;
    entry("generic_2x2", dwp, unit_box(4))
}

/// Hyperbolic `n`-space as `ℝ(t) ×_{e^t} ℝ^{n−1}`.
pub fn hyperbolic(n: usize) -> Result<CorpusEntry> {
    assert!(n >= 2, "hyperbolic space needs n >= 2");
    let coords: Vec<String> = (1..n).map(|i| format!("u{i}")).collect();
    let dwp = DoublyWarpedProduct::new(
        ChartManifold::euclidean(&["t"])?,
        ChartManifold::euclidean(&coords)?,
        "exp(t)",
        "1",
    )?;
    entry(&format!("hyperbolic{n}"), dwp, unit_box(n))
}

/// Family on `ℝ²(t, s) × ℝ²(u, v)` with `g1 = dt² + e^{2at} ds²`, flat `g2`,
/// `f1 = e^{bt}` and `f2 = 1`. For `a = b` this is hyperbolic 4-space of
/// curvature `−a²`.
pub fn hyperbolic_split_family(a: f64, b: f64) -> Result<CorpusEntry> {
    let g1 = ChartManifold::diagonal(&["t", "s"], &["1".to_string(), format!("exp(2*{a}*t)")])?;
    let dwp = DoublyWarpedProduct::new(
        g1,
        ChartManifold::euclidean(&["u", "v"])?,
        &format!("exp({b}*t)"),
        "1",
    )?;
    entry(&format!("hyperbolic_split({a},{b})"), dwp, unit_box(4))
}

/// Hyperbolic 4-space split as a product of a hyperbolic plane and a flat
/// plane.
pub fn hyperbolic4_split() -> Result<CorpusEntry> {
    let mut e = hyperbolic_split_family(1.0, 1.0)?;
    e.name = "hyperbolic4_split".into();
    Ok(e)
}

/// `ℝ(t) ×_{cosh t} ℝ²`, a quasi-Einstein warped product.
pub fn quasi_einstein_cosh() -> Result<CorpusEntry> {
    let dwp = DoublyWarpedProduct::new(
        ChartManifold::euclidean(&["t"])?,
        ChartManifold::euclidean(&["u", "v"])?,
        "cosh(t)",
        "1",
    )?;
    entry("quasi_einstein_cosh", dwp, unit_box(3))
}

/// Family `ℝ²(r, z) ×_{b r^a} S²`. At `a = b = 1` this is flat `ℝ⁴` in
/// cylindrical-spherical coordinates.
pub fn cylinder_sphere_family(a: f64, b: f64) -> Result<CorpusEntry> {
    let dwp = DoublyWarpedProduct::new(
        ChartManifold::euclidean(&["r", "z"])?,
        round_sphere2(&["th", "ph"])?,
        &format!("{b}*r^{a}"),
        "1",
    )?;
    entry(
        &format!("cylinder_sphere({a},{b})"),
        dwp,
        vec![(0.5, 2.0), (-1.0, 1.0), (0.5, 2.6), (-1.0, 1.0)],
    )
}

/// `(S³ × ℝ(t)) ×_{e^t} ℝ²`, isometric to `S³ × H³`.
pub fn s3_h3() -> Result<CorpusEntry> {
    let m1 = ChartManifold::diagonal(
        &["a", "b", "c", "t"],
        &["1", "sin(a)^2", "sin(a)^2*sin(b)^2", "1"],
    )?;
    let dwp = DoublyWarpedProduct::new(m1, ChartManifold::euclidean(&["u", "v"])?, "exp(t)", "1")?;
    entry(
        "s3_h3",
        dwp,
        vec![
            (0.5, 2.6),
            (0.5, 2.6),
            (-1.0, 1.0),
            (-1.0, 1.0),
            (-1.0, 1.0),
            (-1.0, 1.0),
        ],
    )
}

/// Round unit 2-sphere as `ℝ(th) ×_{sin th} ℝ(ph)`.
pub fn sphere2_warped() -> Result<CorpusEntry> {
    let dwp = DoublyWarpedProduct::new(
        ChartManifold::euclidean(&["th"])?,
        ChartManifold::euclidean(&["ph"])?,
        "sin(th)",
        "1",
    )?;
    entry("sphere2_warped", dwp, vec![(0.5, 2.6), (-1.0, 1.0)])
}

/// Round unit 2-sphere in polar coordinates.
pub fn round_sphere2<S: AsRef<str>>(coords: &[S]) -> Result<ChartManifold> {
    let th = coords[0].as_ref();
    ChartManifold::diagonal(coords, &["1".to_string(), format!("sin({th})^2")])
}

/// Round unit 3-sphere in hyperspherical coordinates `(a, b, c)`.
pub fn round_sphere3() -> Result<ChartManifold> {
    ChartManifold::diagonal(&["a", "b", "c"], &["1", "sin(a)^2", "sin(a)^2*sin(b)^2"])
}

/// Box away from the polar singularities of [`round_sphere2`] and
/// [`round_sphere3`].
pub fn sphere_box(n: usize) -> Result<SampleBox> {
    let polar = n.saturating_sub(1);
    SampleBox::new(
        (0..n)
            .map(|i| if i < polar { (0.5, 2.6) } else { (-1.0, 1.0) })
            .collect(),
    )
}

/// Direct, warped and doubly warped flat-factor products.
pub fn basic() -> Result<Vec<CorpusEntry>> {
    Ok(vec![direct_flat()?, warped_exp()?, e2xe1()?])
}

/// Every product in the corpus.
pub fn all() -> Result<Vec<CorpusEntry>> {
    Ok(vec![
        direct_flat()?,
        warped_exp()?,
        e2xe1()?,
        generic_2x2()?,
        hyperbolic(3)?,
        hyperbolic4_split()?,
        quasi_einstein_cosh()?,
        cylinder_sphere_family(1.0, 1.0)?,
        s3_h3()?,
    ])
}
