//! Acceptance run. Each criterion prints one PASS or FAIL line; the process
//! exits nonzero if any criterion fails.
//!
//! Closed forms are compared with the library's brute-force geometry, and
//! that geometry is in turn cross-checked against an independent
//! finite-difference computation from metric values alone, or against values
//! derived by hand.

use std::panic::{self, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use warpcheck::check::Sweep;
use warpcheck::cli;
use warpcheck::corpus::{self, CorpusEntry};
use warpcheck::dwp::{Factor, Formula, Lift, RiemannClass};
use warpcheck::expr::Expression;
use warpcheck::geometry::{ChartManifold, TensorValue};
use warpcheck::residual::{compare, ResidualSummary, Status};
use warpcheck::sampling::{sample_points, SampleBox, Screen};
use warpcheck::solitons::{
    contraction_consistency, equation, factor_checks, log_hessian_identity, residual, riemann_full,
    FactorContext, PointState, SolitonKind, SolitonSpec,
};
use warpcheck::special::{
    concircular_checks, concircular_oracle, conharmonic_checks, conharmonic_closed,
    conharmonic_oracle, ConharmonicClass, SpecialContext,
};
use warpcheck::suite::{self, NamedField, SuiteContext};
use warpcheck::Error;

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("closed-form curvature classes", c1_riemann_classes),
        ("Ricci, Ricci operator and scalar", c2_ricci_and_scalar),
        ("Hessian and Laplacian splitting", c3_hessian_and_laplacian),
        ("soliton definitions", c4_soliton_definitions),
        ("Riemann soliton contraction", c5_contraction),
        ("Ricci factor structures", c6_ricci_factor_structures),
        ("concircular curvature", c7_concircular),
        ("conharmonic curvature", c8_conharmonic),
        ("degenerate variants", c9_degenerate_variants),
        ("determinism and exit statuses", c10_cli_contract),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = match panic::catch_unwind(AssertUnwindSafe(run)) {
            Ok(r) => r,
            Err(e) => Err(e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into())),
        };
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail} ({secs:.1}s)", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {why} ({secs:.1}s)", i + 1);
            }
        }
    }
    println!(
        "\n{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}

// ---------------------------------------------------------------------------
// Shared helpers

const POINTS: usize = 64;

fn pts(bx: &SampleBox, n: usize, seed: u64) -> Vec<Vec<f64>> {
    sample_points(bx, n, seed, |_| Ok(Screen::Accept)).unwrap()
}

fn find<'a>(v: &'a [ResidualSummary], id: &str) -> Result<&'a ResidualSummary, String> {
    v.iter()
        .find(|s| s.check_id == id)
        .ok_or_else(|| format!("missing check {id}"))
}

/// Requires a pass at or below `tol` over at least `min_points` points and
/// returns the residual.
fn require(s: &ResidualSummary, tol: f64, min_points: usize) -> Result<f64, String> {
    ensure!(
        s.status == Status::Pass && s.max_abs_residual <= tol,
        "{} {} with residual {:e} (tolerance {tol:e}) {:?}",
        s.check_id,
        s.status.as_str(),
        s.max_abs_residual,
        s.notes
    );
    ensure!(
        s.points >= min_points,
        "{} ran on {} points",
        s.check_id,
        s.points
    );
    Ok(s.max_abs_residual)
}

fn require_all(v: &[ResidualSummary], tol: f64, min_points: usize) -> Result<f64, String> {
    let mut worst: f64 = 0.0;
    for s in v {
        worst = worst.max(require(s, tol, min_points)?);
    }
    Ok(worst)
}

fn coords(n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("x{i}")).collect()
}

fn constant(m: &ChartManifold, v: f64) -> Expression {
    Expression::constant(v, m.coords().clone())
}

/// A polynomial of degree at most three with seeded random coefficients.
fn random_polynomial(vars: &[&str], seed: u64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = vars.len();
    let mut terms = Vec::new();
    let mut exps = vec![0u32; n];
    loop {
        let deg: u32 = exps.iter().sum();
        if deg <= 3 {
            let c: f64 = rng.gen_range(-1.0..1.0);
            let mono: Vec<String> = exps
                .iter()
                .zip(vars)
                .filter(|(e, _)| **e > 0)
                .map(|(e, v)| format!("{v}^{e}"))
                .collect();
            terms.push(if mono.is_empty() {
                format!("({c:.6})")
            } else {
                format!("({c:.6})*{}", mono.join("*"))
            });
        }
        // Odometer over exponents 0..=3.
        let mut i = 0;
        while i < n && exps[i] == 3 {
            exps[i] = 0;
            i += 1;
        }
        if i == n {
            break;
        }
        exps[i] += 1;
    }
    terms.join(" + ")
}

// ---------------------------------------------------------------------------
// Independent finite-difference geometry.
//
// Everything below uses only pointwise metric and field values. Derivatives
// are five-point central differences; curvature differentiates Christoffel
// symbols that are themselves differenced, so the results carry about
// 1e-9 relative error.

const STEP: f64 = 1e-3;

fn d5<F: Fn(&[f64]) -> f64>(f: &F, p: &[f64], i: usize) -> f64 {
    let at = |s: f64| {
        let mut q = p.to_vec();
        q[i] += s * STEP;
        f(&q)
    };
    (at(-2.0) - 8.0 * at(-1.0) + 8.0 * at(1.0) - at(2.0)) / (12.0 * STEP)
}

struct Fd<'a> {
    m: &'a ChartManifold,
}

impl Fd<'_> {
    fn n(&self) -> usize {
        self.m.dim()
    }

    fn metric(&self, p: &[f64]) -> DMatrix<f64> {
        let n = self.n();
        DMatrix::from_fn(n, n, |i, j| self.m.component(i, j).eval(p).unwrap())
    }

    /// `Γ^a_bc`, flattened `(a * n + b) * n + c`.
    fn christoffel(&self, p: &[f64]) -> Vec<f64> {
        let n = self.n();
        let inv = self.metric(p).try_inverse().unwrap();
        let dg: Vec<DMatrix<f64>> = (0..n)
            .map(|k| {
                DMatrix::from_fn(n, n, |i, j| {
                    d5(&|q: &[f64]| self.m.component(i, j).eval(q).unwrap(), p, k)
                })
            })
            .collect();
        let mut out = vec![0.0; n * n * n];
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    out[(a * n + b) * n + c] = (0..n)
                        .map(|d| {
                            0.5 * inv[(a, d)] * (dg[b][(d, c)] + dg[c][(d, b)] - dg[d][(b, c)])
                        })
                        .sum();
                }
            }
        }
        out
    }

    /// `(R(∂c, ∂d)∂b)^a`, flattened `((a * n + b) * n + c) * n + d`.
    fn riemann(&self, p: &[f64]) -> Vec<f64> {
        let n = self.n();
        let idx = |a: usize, b: usize, c: usize| (a * n + b) * n + c;
        let gam = self.christoffel(p);
        let dgam: Vec<Vec<f64>> = (0..n)
            .map(|k| {
                let at = |s: f64| {
                    let mut q = p.to_vec();
                    q[k] += s * STEP;
                    self.christoffel(&q)
                };
                let (m2, m1, p1, p2) = (at(-2.0), at(-1.0), at(1.0), at(2.0));
                (0..n * n * n)
                    .map(|i| (m2[i] - 8.0 * m1[i] + 8.0 * p1[i] - p2[i]) / (12.0 * STEP))
                    .collect()
            })
            .collect();
        let mut out = vec![0.0; n.pow(4)];
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    for d in 0..n {
                        let mut v = dgam[c][idx(a, d, b)] - dgam[d][idx(a, c, b)];
                        for e in 0..n {
                            v += gam[idx(a, c, e)] * gam[idx(e, d, b)]
                                - gam[idx(a, d, e)] * gam[idx(e, c, b)];
                        }
                        out[((a * n + b) * n + c) * n + d] = v;
                    }
                }
            }
        }
        out
    }

    /// `R(∂x, ∂y, ∂z, ∂w) = g(R(∂x, ∂y)∂z, ∂w)`.
    fn riemann4(&self, p: &[f64]) -> TensorValue {
        let n = self.n();
        let r = self.riemann(p);
        let g = self.metric(p);
        let mut data = vec![0.0; n.pow(4)];
        for x in 0..n {
            for y in 0..n {
                for z in 0..n {
                    for w in 0..n {
                        data[((x * n + y) * n + z) * n + w] = (0..n)
                            .map(|a| g[(w, a)] * r[((a * n + z) * n + x) * n + y])
                            .sum();
                    }
                }
            }
        }
        let cov = vec![warpcheck::geometry::Variance::Covariant; 4];
        TensorValue::new(vec![n; 4], cov, data).unwrap()
    }

    fn ricci(&self, p: &[f64]) -> DMatrix<f64> {
        let n = self.n();
        let r = self.riemann(p);
        DMatrix::from_fn(n, n, |b, d| {
            (0..n).map(|a| r[((a * n + b) * n + a) * n + d]).sum()
        })
    }

    fn scalar(&self, p: &[f64]) -> f64 {
        let inv = self.metric(p).try_inverse().unwrap();
        inv.component_mul(&self.ricci(p)).sum()
    }

    fn hessian(&self, psi: &Expression, p: &[f64]) -> DMatrix<f64> {
        let n = self.n();
        let f = |q: &[f64]| psi.eval(q).unwrap();
        let grad: Vec<f64> = (0..n).map(|i| d5(&f, p, i)).collect();
        let gam = self.christoffel(p);
        DMatrix::from_fn(n, n, |i, j| {
            let second = d5(&|q: &[f64]| d5(&f, q, j), p, i);
            second
                - (0..n)
                    .map(|k| gam[(k * n + i) * n + j] * grad[k])
                    .sum::<f64>()
        })
    }
}

/// `(A∧B)(X,Y,Z,W) = A(X,W)B(Y,Z) + A(Y,Z)B(X,W) − A(X,Z)B(Y,W) − A(Y,W)B(X,Z)`.
fn kn(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Vec<f64> {
    let n = a.nrows();
    let mut out = vec![0.0; n.pow(4)];
    for x in 0..n {
        for y in 0..n {
            for z in 0..n {
                for w in 0..n {
                    out[((x * n + y) * n + z) * n + w] = a[(x, w)] * b[(y, z)]
                        + a[(y, z)] * b[(x, w)]
                        - a[(x, z)] * b[(y, w)]
                        - a[(y, w)] * b[(x, z)];
                }
            }
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Criteria

fn c1_riemann_classes() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut fd_worst: f64 = 0.0;
    for e in corpus::basic().unwrap() {
        let points = pts(&e.sample_box, POINTS, 11);
        let ctx = SuiteContext::new(&e.dwp, Sweep::new(&points, 1e-8));
        let out = suite::lemma1(&ctx);
        for class in RiemannClass::ALL {
            let s = find(&out, &format!("lemma1.{}", class.name()))?;
            worst = worst.max(require(s, 1e-8, 50)?);
        }
        worst = worst.max(require(find(&out, "lemma1.block_completeness")?, 1e-8, 50)?);

        let fd = Fd { m: e.dwp.product() };
        let n = e.dwp.dim();
        for p in points.iter().take(8) {
            let pp = e.dwp.at(p).unwrap();
            let r = fd.riemann(p);
            for a in 0..n {
                for b in 0..n {
                    for c in 0..n {
                        let closed = pp.riemann_coordinate(a, b, c);
                        let indep: Vec<f64> =
                            (0..n).map(|i| r[((i * n + c) * n + a) * n + b]).collect();
                        let res = compare(closed.as_slice(), &indep);
                        ensure!(
                            res <= 1e-6,
                            "{}: R(d{a}, d{b})d{c} differs from finite differences by {res:e}",
                            e.name
                        );
                        fd_worst = fd_worst.max(res);
                    }
                }
            }
        }
    }
    Ok(format!(
        "six classes on 3 products, max {worst:.1e}; finite-difference cross-check {fd_worst:.1e}"
    ))
}

/// Hand-derived `(∂_x k, ∂_y k)` and `∂_t l` for the flat-factor products.
fn log_derivatives(name: &str, p: &[f64]) -> ([f64; 2], f64) {
    match name {
        "direct_flat" => ([0.0, 0.0], 0.0),
        "warped_exp" => ([1.0, 0.0], 0.0),
        "e2xe1" => ([1.0, 0.0], p[2].tanh()),
        _ => unreachable!("{name}"),
    }
}

fn c2_ricci_and_scalar() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut mixed_worst: f64 = 0.0;
    let mut fd_worst: f64 = 0.0;
    for e in corpus::basic().unwrap() {
        let points = pts(&e.sample_box, POINTS, 12);
        let ctx = SuiteContext::new(&e.dwp, Sweep::new(&points, 1e-8));
        for out in [
            suite::lemma2(&ctx),
            suite::lemma5(&ctx),
            suite::scalar(&ctx),
        ] {
            worst = worst.max(require_all(&out, 1e-8, 50)?);
        }
        // Ric(X, U) = (m1 + m2 − 2) X(k) U(l) with X(k), U(l) by hand.
        let m = e.dwp.dim() as f64;
        for p in &points {
            let (dk, dl) = log_derivatives(&e.name, p);
            let geo = e.dwp.oracle_at(p).unwrap();
            let closed = e.dwp.at(p).unwrap().ricci();
            for (i, dk_i) in dk.iter().enumerate() {
                let expect = (m - 2.0) * dk_i * dl;
                for got in [geo.ricci()[(i, 2)], closed[(i, 2)], closed[(2, i)]] {
                    let r = compare(&[got], &[expect]);
                    ensure!(r <= 1e-8, "{}: Ric(X, U) off by {r:e} at {p:?}", e.name);
                    mixed_worst = mixed_worst.max(r);
                }
            }
        }
        let fd = Fd { m: e.dwp.product() };
        for p in points.iter().take(8) {
            let pp = e.dwp.at(p).unwrap();
            let r = compare(pp.ricci().as_slice(), fd.ricci(p).as_slice())
                .max(compare(&[pp.scalar()], &[fd.scalar(p)]));
            ensure!(r <= 1e-6, "{}: finite differences differ by {r:e}", e.name);
            fd_worst = fd_worst.max(r);
        }
    }
    Ok(format!(
        "max {worst:.1e}; Ric(X, U) by hand {mixed_worst:.1e}; finite differences {fd_worst:.1e}"
    ))
}

fn c3_hessian_and_laplacian() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut fd_worst: f64 = 0.0;
    let poly = random_polynomial(&["x", "y", "t"], 2024);
    for e in corpus::basic().unwrap() {
        let points = pts(&e.sample_box, POINTS, 13);
        let ctx = SuiteContext::new(&e.dwp, Sweep::new(&points, 1e-8));
        let extra = [
            NamedField {
                name: "x_plus_t2".into(),
                field: e.dwp.field("x + t^2").unwrap(),
            },
            NamedField {
                name: "poly".into(),
                field: e.dwp.field(&poly).unwrap(),
            },
        ];
        let fields = suite::hessian_fields(&e.dwp, &extra).unwrap();
        let names: Vec<&str> = fields.iter().map(|f| f.name.as_str()).collect();
        ensure!(names == ["k", "l", "x_plus_t2", "poly"], "fields {names:?}");
        let hess = suite::hessian(&ctx, &fields);
        ensure!(hess.len() == 12, "{} Hessian checks", hess.len());
        worst = worst.max(require_all(&hess, 1e-8, 50)?);
        let lap = suite::laplacian(&ctx, &fields);
        ensure!(lap.len() == 4, "{} Laplacian checks", lap.len());
        worst = worst.max(require_all(&lap, 1e-8, 50)?);

        let fd = Fd { m: e.dwp.product() };
        let psi = &extra[1].field;
        for p in points.iter().take(8) {
            let pp = e.dwp.at(p).unwrap();
            let jet = psi.jet(p).unwrap();
            let h = fd.hessian(psi, p);
            let inv = fd.metric(p).try_inverse().unwrap();
            let r = compare(
                pp.hessian(&jet, Formula::Corrected).as_slice(),
                h.as_slice(),
            )
            .max(compare(
                &[pp.laplacian(&jet)],
                &[inv.component_mul(&h).sum()],
            ));
            ensure!(r <= 1e-6, "{}: finite differences differ by {r:e}", e.name);
            fd_worst = fd_worst.max(r);
        }
    }
    Ok(format!(
        "k, l, x + t^2 and a random cubic on 3 products, max {worst:.1e}; finite differences {fd_worst:.1e}"
    ))
}

fn c4_soliton_definitions() -> Outcome {
    let mut gauss: f64 = 0.0;
    for n in 2..=4 {
        let m = ChartManifold::euclidean(&coords(n)).unwrap();
        let points = pts(&SampleBox::uniform(n, -2.0, 2.0).unwrap(), POINTS, 14);
        let sweep = Sweep::new(&points, 1e-10);
        for lambda in [0.5, -1.25] {
            let sq: Vec<String> = coords(n).iter().map(|x| format!("{x}^2")).collect();
            let psi = m
                .field(&format!("{} * ({})", lambda / 2.0, sq.join(" + ")))
                .unwrap();
            let spec = SolitonSpec::new(SolitonKind::Ricci, psi).lambda(constant(&m, lambda));
            gauss = gauss.max(require(
                &residual("gauss", &spec, &m, &sweep)[0],
                1e-10,
                50,
            )?);
        }
    }

    let s2 = corpus::round_sphere2(&["th", "ph"]).unwrap();
    let points = pts(&corpus::sphere_box(2).unwrap(), POINTS, 15);
    let spec = SolitonSpec::new(SolitonKind::Einstein, constant(&s2, 0.0));
    let sphere = require(
        &residual("s2", &spec, &s2, &Sweep::new(&points, 1e-10))[0],
        1e-10,
        50,
    )?;
    let fd = Fd { m: &s2 };
    for p in points.iter().take(8) {
        let tau = fd.scalar(p);
        ensure!(
            (tau - 2.0).abs() <= 1e-6,
            "sphere scalar {tau} by finite differences"
        );
    }

    let mut tau_worst: f64 = 0.0;
    for n in 2..=5 {
        let e = corpus::hyperbolic(n).unwrap();
        let m = e.dwp.product();
        let points = pts(&e.sample_box, POINTS, 16);
        let spec = SolitonSpec::new(SolitonKind::Einstein, constant(m, 0.0));
        require(
            &residual("h", &spec, m, &Sweep::new(&points, 1e-10))[0],
            1e-10,
            50,
        )?;
        let expect = -((n * (n - 1)) as f64);
        let fd = Fd { m };
        for (i, p) in points.iter().enumerate() {
            let tau = warpcheck::geometry::scalar_oracle(m, p).unwrap();
            let closed = e.dwp.at(p).unwrap().scalar();
            for v in [tau, closed] {
                ensure!(
                    (v - expect).abs() <= 1e-6,
                    "hyperbolic{n}: scalar {v}, expected {expect}"
                );
                tau_worst = tau_worst.max((v - expect).abs());
            }
            if i < 4 {
                let v = fd.scalar(p);
                ensure!(
                    (v - expect).abs() <= 1e-6,
                    "hyperbolic{n}: finite-difference scalar {v}"
                );
            }
        }
    }
    Ok(format!(
        "Gaussian n = 2..4 max {gauss:.1e}; sphere {sphere:.1e}; hyperbolic n = 2..5 |tau + n(n-1)| <= {tau_worst:.1e}"
    ))
}

/// A seeded positive-definite metric: diagonal entries in `[2.5, 3.5]`,
/// off-diagonal entries bounded by 0.3.
fn random_metric(n: usize, seed: u64) -> ChartManifold {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let xs = coords(n);
    let arg = |rng: &mut ChaCha8Rng| {
        let parts: Vec<String> = xs
            .iter()
            .map(|x| format!("({:.4})*{x}", rng.gen_range(-1.5..1.5)))
            .collect();
        parts.join(" + ")
    };
    let mut g = vec![vec![String::new(); n]; n];
    for i in 0..n {
        g[i][i] = format!("3 + 0.5*sin({})", arg(&mut rng));
        for j in i + 1..n {
            let e = format!("0.3*cos({})", arg(&mut rng));
            g[i][j] = e.clone();
            g[j][i] = e;
        }
    }
    ChartManifold::new(&xs, &g).unwrap()
}

fn c5_contraction() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut indep: f64 = 0.0;
    let mut cases = 0;
    for n in 3..=5 {
        for seed in 0..3u64 {
            let m = random_metric(n, 100 * n as u64 + seed);
            let names = coords(n);
            let vars: Vec<&str> = names.iter().map(String::as_str).collect();
            let psi = m.field(&random_polynomial(&vars[..3], seed)).unwrap();
            let lambda = ChaCha8Rng::seed_from_u64(seed).gen_range(-2.0..2.0);
            let spec = SolitonSpec::new(SolitonKind::Riemann, psi).lambda(constant(&m, lambda));
            let points = pts(&SampleBox::uniform(n, -0.5, 0.5).unwrap(), 20, seed);
            let s = contraction_consistency("c", &spec, &m, &Sweep::new(&points, 1e-8)).unwrap();
            worst = worst.max(require(&s, 1e-8, 20)?);

            // Coordinate contraction with the inverse metric instead of a frame.
            for p in points.iter().take(5) {
                let st = PointState::new(&m, &spec, p).unwrap();
                let e4 = riemann_full(&spec, &st, p).unwrap();
                let e4 = e4.values();
                let g = st.geo.metric();
                let inv = g.clone().try_inverse().unwrap();
                let contracted = DMatrix::from_fn(n, n, |b, c| {
                    let mut s = 0.0;
                    for a in 0..n {
                        for d in 0..n {
                            s += inv[(a, d)] * e4[((a * n + b) * n + c) * n + d];
                        }
                    }
                    s
                });
                let mm = n as f64;
                let lap = inv.component_mul(&st.hessian).sum();
                let direct =
                    &st.hessian * (mm - 2.0) + st.geo.ricci() - g * ((mm - 1.0) * lambda - lap);
                let r = compare(contracted.as_slice(), direct.as_slice());
                ensure!(
                    r <= 1e-8,
                    "dim {n}: coordinate contraction differs by {r:e}"
                );
                indep = indep.max(r);
            }
            cases += 1;
        }
    }
    let m2 = ChartManifold::euclidean(&["x", "y"]).unwrap();
    let spec =
        SolitonSpec::new(SolitonKind::Riemann, m2.field("x").unwrap()).lambda(constant(&m2, 1.0));
    let p = vec![vec![0.0, 0.0]];
    ensure!(
        matches!(
            contraction_consistency("c", &spec, &m2, &Sweep::new(&p, 1e-8)),
            Err(Error::Dimension { .. })
        ),
        "dimension 2 was not rejected"
    );
    Ok(format!(
        "{cases} random metrics in dims 3..5, max {worst:.1e}; coordinate contraction {indep:.1e}"
    ))
}

fn c6_ricci_factor_structures() -> Outcome {
    let e = corpus::direct_flat().unwrap();
    let m = e.dwp.product();
    let points = pts(&e.sample_box, POINTS, 17);
    let spec = SolitonSpec::new(
        SolitonKind::Ricci,
        m.field("0.4*(x^2 + y^2 + t^2)").unwrap(),
    )
    .lambda(constant(m, 0.8));
    let anchor = e.sample_box.center();
    let ctx = FactorContext {
        dwp: &e.dwp,
        spec: &spec,
        anchor: &anchor,
        sweep: Sweep::new(&points, 1e-10),
        formula: Formula::Corrected,
    };
    let product = residual("s", &spec, m, &ctx.sweep).remove(0);
    require(&product, 1e-10, 50)?;
    let out = factor_checks(&ctx, "s", &product);
    let mut worst: f64 = 0.0;
    for id in [
        "s.factor1",
        "s.factor2",
        "s.factor1.identity",
        "s.factor2.identity",
        "s.mixed",
        "s.log_hessian",
    ] {
        worst = worst.max(require(find(&out, id)?, 1e-10, 50)?);
    }

    // f''/f = (ln f)'' + (f'/f)², with each side by hand.
    type Side = fn(f64) -> (f64, f64);
    let cases: [(&str, Side); 2] = [
        ("exp(x)", |_| (1.0, 1.0)),
        ("1 + x^2", |x| {
            let f = 1.0 + x * x;
            (
                2.0 / f,
                (2.0 - 2.0 * x * x) / (f * f) + 4.0 * x * x / (f * f),
            )
        }),
    ];
    let mut ident: f64 = 0.0;
    for (f1, by_hand) in cases {
        let dwp = warpcheck::dwp::DoublyWarpedProduct::new(
            ChartManifold::euclidean(&["x", "y"]).unwrap(),
            ChartManifold::euclidean(&["t"]).unwrap(),
            f1,
            "cosh(t)",
        )
        .unwrap();
        for p in pts(&SampleBox::uniform(3, -1.0, 1.0).unwrap(), POINTS, 18) {
            let pp = dwp.at(&p).unwrap();
            let r = log_hessian_identity(&pp, Factor::First);
            ensure!(r <= 1e-10, "{f1}: identity residual {r:e} at {p:?}");
            ident = ident.max(r);
            let (lhs, rhs) = by_hand(p[0]);
            ensure!(
                (lhs - rhs).abs() <= 1e-12,
                "{f1}: hand sides differ at {p:?}"
            );
            let f = pp.warping_jet(Factor::First);
            let lib = pp.factor_geometry(Factor::First).hessian(f)[(0, 0)] / f.value;
            ensure!(
                (lib - lhs).abs() <= 1e-10,
                "{f1}: h(f)/f = {lib}, expected {lhs}"
            );
        }
    }
    Ok(format!(
        "Gaussian factor structures max {worst:.1e}; log-Hessian identity max {ident:.1e}"
    ))
}

fn special_context<'a>(
    e: &'a CorpusEntry,
    anchor: &'a [f64],
    points: &'a [Vec<f64>],
) -> SpecialContext<'a> {
    SpecialContext {
        dwp: &e.dwp,
        anchor,
        sweep: Sweep::new(points, 1e-8),
        formula: Formula::Corrected,
    }
}

fn c7_concircular() -> Outcome {
    let mut flat: f64 = 0.0;
    let s2 = corpus::round_sphere2(&["th", "ph"]).unwrap();
    let s3 = corpus::round_sphere3().unwrap();
    let h3 = corpus::hyperbolic(3).unwrap();
    let h4 = corpus::hyperbolic4_split().unwrap();
    let df = corpus::direct_flat().unwrap();
    let members: [(&str, &ChartManifold, SampleBox); 5] = [
        ("sphere2", &s2, corpus::sphere_box(2).unwrap()),
        ("sphere3", &s3, corpus::sphere_box(3).unwrap()),
        ("hyperbolic3", h3.dwp.product(), h3.sample_box.clone()),
        ("hyperbolic4_split", h4.dwp.product(), h4.sample_box.clone()),
        ("direct_flat", df.dwp.product(), df.sample_box.clone()),
    ];
    for (name, m, bx) in members {
        for p in pts(&bx, 30, 19) {
            let c = concircular_oracle(m, &p).unwrap().max_abs();
            ensure!(c <= 1e-9, "{name}: |C| = {c:e} at {p:?}");
            flat = flat.max(c);
        }
    }

    let e = corpus::e2xe1().unwrap();
    let anchor = e.sample_box.center();
    let points = pts(&e.sample_box, POINTS, 20);
    let out = concircular_checks(&special_context(&e, &anchor, &points), "c");
    let mut closed: f64 = 0.0;
    for class in RiemannClass::ALL {
        closed = closed.max(require(
            find(&out, &format!("c.{}", class.name()))?,
            1e-8,
            50,
        )?);
    }
    for id in ["c.factor1.einstein", "c.factor2.einstein", "c.dichotomy1"] {
        let s = find(&out, id)?;
        ensure!(
            s.status == Status::Skipped && s.notes[0].starts_with("skipped: hypothesis fails"),
            "E2xE1 {id} not gated: {} {:?}",
            s.status.as_str(),
            s.notes
        );
    }
    // Independent 𝒞 on E2xE1: nonzero, and equal to the oracle.
    let fd = Fd { m: e.dwp.product() };
    let mut c_min = f64::INFINITY;
    for p in points.iter().take(6) {
        let g = fd.metric(p);
        let c = 0.5 * fd.scalar(p) / 6.0;
        let big_g = kn(&g, &g);
        let r = fd.riemann4(p);
        let mine: Vec<f64> = r
            .data()
            .iter()
            .zip(&big_g)
            .map(|(r, s)| r - c * s)
            .collect();
        let lib = concircular_oracle(e.dwp.product(), p).unwrap();
        let d = compare(lib.data(), &mine);
        ensure!(
            d <= 1e-6,
            "E2xE1: oracle C differs from finite differences by {d:e}"
        );
        c_min = c_min.min(mine.iter().fold(0.0, |a: f64, b| a.max(b.abs())));
    }
    ensure!(c_min > 1e-3, "E2xE1 looks concircularly flat ({c_min:e})");

    let anchor = h4.sample_box.center();
    let points = pts(&h4.sample_box, 32, 21);
    let out = concircular_checks(&special_context(&h4, &anchor, &points), "c");
    require_all(
        &out.iter()
            .filter(|s| s.status != Status::Skipped)
            .cloned()
            .collect::<Vec<_>>(),
        1e-8,
        1,
    )?;
    let einstein = require(find(&out, "c.factor1.einstein")?, 1e-8, 1)?;
    // The hyperbolic plane factor has Ric = −g1, by hand.
    let f1 = h4.dwp.factor(Factor::First);
    let fd = Fd { m: f1 };
    for p in points.iter().take(6) {
        let q = &p[..2];
        let r = compare(fd.ricci(q).as_slice(), (-fd.metric(q)).as_slice());
        ensure!(r <= 1e-6, "hyperbolic plane Ric + g1 = {r:e}");
    }
    Ok(format!(
        "|C| <= {flat:.1e} on 5 constant-curvature spaces; E2xE1 closed forms {closed:.1e}, consequences gated; split hyperbolic Einstein constants {einstein:.1e}"
    ))
}

fn c8_conharmonic() -> Outcome {
    let mut flat: f64 = 0.0;
    let df = corpus::direct_flat().unwrap();
    let r4 = corpus::cylinder_sphere_family(1.0, 1.0).unwrap();
    for e in [&df, &r4] {
        for p in pts(&e.sample_box, 30, 22) {
            let h = conharmonic_oracle(e.dwp.product(), &p).unwrap().max_abs();
            ensure!(h <= 1e-9, "{}: |H| = {h:e}", e.name);
            flat = flat.max(h);
        }
    }

    let mut closed: f64 = 0.0;
    let mut members = 0;
    for e in corpus::all().unwrap() {
        if e.dwp.dim() < 3 {
            continue;
        }
        let anchor = e.sample_box.center();
        let points = pts(&e.sample_box, 16, 23);
        let out = conharmonic_checks(&special_context(&e, &anchor, &points), "h");
        for id in [
            "h.xxx",
            "h.uuu",
            "h.symmetries",
            "h.trace",
            "h.factor1.identity",
            "h.factor2.identity",
        ] {
            let s = find(&out, id)?;
            closed = closed.max(require(s, 1e-8, 16).map_err(|err| format!("{}: {err}", e.name))?);
        }
        members += 1;
    }

    // Independent ℋ on E2xE1.
    let e = corpus::e2xe1().unwrap();
    let fd = Fd { m: e.dwp.product() };
    for p in pts(&e.sample_box, 6, 24) {
        let g = fd.metric(&p);
        let ric_g = kn(&fd.ricci(&p), &g);
        let mine: Vec<f64> = fd
            .riemann4(&p)
            .data()
            .iter()
            .zip(&ric_g)
            .map(|(r, s)| r - s)
            .collect();
        let lib = conharmonic_oracle(e.dwp.product(), &p).unwrap();
        let d = compare(lib.data(), &mine);
        ensure!(
            d <= 1e-6,
            "E2xE1: oracle H differs from finite differences by {d:e}"
        );
    }

    let m2 = ChartManifold::euclidean(&["x", "y"]).unwrap();
    ensure!(
        matches!(
            conharmonic_oracle(&m2, &[0.0, 0.0]),
            Err(Error::Dimension { .. })
        ),
        "oracle accepted m = 2"
    );
    let s2 = corpus::sphere2_warped().unwrap();
    let p = s2.sample_box.center();
    let pp = s2.dwp.at(&p).unwrap();
    let x = Lift::basis(Factor::First, 1, 0);
    ensure!(
        matches!(
            conharmonic_closed(&pp, ConharmonicClass::Xxx, &x, &x, &x, Formula::Corrected),
            Err(Error::Dimension { .. })
        ),
        "closed form accepted m = 2"
    );
    let points = vec![p.clone()];
    let out = conharmonic_checks(&special_context(&s2, &p, &points), "h");
    ensure!(
        !out.is_empty() && out.iter().all(|s| s.status == Status::Skipped),
        "check group ran on m = 2"
    );
    Ok(format!(
        "|H| <= {flat:.1e} on flat space; closed forms on {members} products max {closed:.1e}; m = 2 rejected"
    ))
}

fn c9_degenerate_variants() -> Outcome {
    let e = corpus::generic_2x2().unwrap();
    let m = e.dwp.product();
    let points = pts(&e.sample_box, POINTS, 25);
    let sweep = Sweep::new(&points, 1e-8);
    let ex = |s: &str| m.field(s).unwrap();
    let psi = ex("x*u + y^2 - v");
    let lambda = ex("0.3 + x*v");
    let eta = vec![ex("1"), ex("y"), ex("u*v"), ex("2")];
    let zero_eta = vec![ex("0"); 4];
    let base = |k| SolitonSpec::new(k, psi.clone()).lambda(lambda.clone());

    let bits = |spec: &SolitonSpec| -> (Vec<u64>, u64, Vec<f64>) {
        let per_point = points
            .iter()
            .map(|p| {
                let st = PointState::new(m, spec, p).unwrap();
                equation(spec, &st, p).unwrap().residual().to_bits()
            })
            .collect();
        let s = residual("r", spec, m, &sweep).remove(0);
        (per_point, s.max_abs_residual.to_bits(), s.worst_point)
    };
    use SolitonKind as K;
    let families = [
        (
            "ricci",
            base(K::Ricci),
            vec![
                (
                    "eta_ricci mu = 0",
                    base(K::EtaRicci).mu(ex("0")).eta(eta.clone()),
                ),
                (
                    "eta_ricci eta = 0",
                    base(K::EtaRicci).mu(ex("1.3")).eta(zero_eta.clone()),
                ),
                ("f_almost_ricci f = 1", base(K::FAlmostRicci).f(ex("1"))),
                (
                    "f_almost_eta_ricci f = 1, mu = 0",
                    base(K::FAlmostEtaRicci)
                        .f(ex("1"))
                        .mu(ex("0"))
                        .eta(eta.clone()),
                ),
            ],
        ),
        (
            "yamabe",
            base(K::Yamabe),
            vec![
                (
                    "eta_yamabe mu = 0",
                    base(K::EtaYamabe).mu(ex("0")).eta(eta.clone()),
                ),
                (
                    "eta_yamabe eta = 0",
                    base(K::EtaYamabe).mu(ex("-0.7")).eta(zero_eta.clone()),
                ),
            ],
        ),
    ];
    let mut compared = 0;
    let mut nonzero = Vec::new();
    for (name, base_spec, variants) in &families {
        let reference = bits(base_spec);
        ensure!(
            f64::from_bits(reference.1) > 1e-3,
            "{name} base residual is trivially small"
        );
        nonzero.push(f64::from_bits(reference.1));
        for (label, spec) in variants {
            ensure!(bits(spec) == reference, "{label} differs from {name}");
            compared += 1;
        }
    }
    // A non-degenerate parameter does change the residual.
    let moved = bits(&base(K::FAlmostRicci).f(ex("1.5")));
    ensure!(
        moved.1 != bits(&families[0].1).1,
        "f = 1.5 reproduced the base residual"
    );
    Ok(format!(
        "{compared} degenerate variants bitwise equal to their base on {POINTS} points (base residuals {:.2e}, {:.2e})",
        nonzero[0], nonzero[1]
    ))
}

fn corpus_spec(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("corpus")
        .join(name)
}

fn run_cli(args: &[&str]) -> (i32, Vec<u8>) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let mut full = vec!["warpcheck"];
    full.extend_from_slice(args);
    let code = cli::run(full, &mut out, &mut err);
    (code, out)
}

fn c10_cli_contract() -> Outcome {
    let spec = corpus_spec("e2xe1.toml");
    let spec = spec.to_str().unwrap();
    let args = ["verify", spec, "--format", "structured"];
    let (code_a, a) = run_cli(&args);
    let (code_b, b) = run_cli(&args);
    let (code_c, c) = run_cli(&[&args[..], &["--sequential"]].concat());
    ensure!(a == b, "two identical runs gave different reports");
    ensure!(a == c, "sequential and parallel reports differ");
    ensure!(code_a == code_b && code_b == code_c, "exit statuses differ");
    let v: serde_json::Value = serde_json::from_slice(&a).map_err(|e| e.to_string())?;
    let checks = v["checks"].as_array().ok_or("no checks array")?;
    for c in checks {
        let status = c["status"].as_str().unwrap_or("");
        if status == "skipped" {
            continue;
        }
        let pass = c["max_abs_residual"].as_f64().unwrap_or(f64::INFINITY)
            <= c["tolerance"].as_f64().unwrap_or(0.0);
        ensure!(pass == (status == "pass"), "inconsistent status in {c}");
    }

    let exe = env!("CARGO_BIN_EXE_warpcheck");
    let status = |name: &str| {
        Command::new(exe)
            .arg("verify")
            .arg(corpus_spec(name))
            .output()
            .map(|o| o.status.code())
            .map_err(|e| e.to_string())
    };
    let codes = [
        ("direct_flat.toml", status("direct_flat.toml")?, 0),
        ("e2xe1.toml", status("e2xe1.toml")?, 1),
        ("malformed.toml", status("malformed.toml")?, 2),
    ];
    for (name, got, want) in codes {
        ensure!(got == Some(want), "{name}: exit {got:?}, expected {want}");
    }
    Ok(format!(
        "{} checks, {} report bytes identical across 3 runs; exit statuses 0/1/2",
        checks.len(),
        a.len()
    ))
}
