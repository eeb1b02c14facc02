use std::sync::Arc;

use super::factor::factor_equation;
use super::*;
use crate::corpus;
use crate::dwp::{DoublyWarpedProduct, Factor, Formula};
use crate::expr::Expression;
use crate::residual::Status;
use crate::sampling::{sample_points, SampleBox, Screen};

fn pts(bx: &SampleBox, n: usize, seed: u64) -> Vec<Vec<f64>> {
    sample_points(bx, n, seed, |_| Ok(Screen::Accept)).unwrap()
}

fn expr(m: &ChartManifold, s: &str) -> Expression {
    m.field(s).unwrap()
}

fn coords(n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("x{i}")).collect()
}

fn gaussian(n: usize, c: f64) -> String {
    let sq: Vec<String> = coords(n).iter().map(|x| format!("{x}^2")).collect();
    format!("{} * ({})", c / 2.0, sq.join(" + "))
}

#[test]
fn kinds_parse_with_prefixes() {
    assert_eq!(
        "gradient_ricci".parse::<SolitonKind>().unwrap(),
        SolitonKind::Ricci
    );
    assert_eq!(
        "almost_eta_ricci".parse::<SolitonKind>().unwrap(),
        SolitonKind::EtaRicci
    );
    assert_eq!(
        "Quasi_Einstein".parse::<SolitonKind>().unwrap(),
        SolitonKind::QuasiEinstein
    );
    assert!("almost_einstein".parse::<SolitonKind>().is_err());
    for k in SolitonKind::ALL {
        assert_eq!(k.name().parse::<SolitonKind>().unwrap(), k);
    }
}

#[test]
fn spec_validation() {
    let c: Arc<[String]> = vec!["x".to_string(), "y".to_string()].into();
    let text = |kind: &str| SolitonText {
        kind: kind.into(),
        ..Default::default()
    };
    let e = SolitonSpec::from_text(&text("eta_ricci"), &c, Some("x")).unwrap_err();
    assert!(matches!(
        e,
        Error::MissingField {
            field: "lambda",
            ..
        }
    ));
    let mut t = text("ricci");
    t.lambda = Some(Scalar::Number(1.0));
    t.mu = Some(Scalar::Number(1.0));
    assert!(SolitonSpec::from_text(&t, &c, None).is_err());
    let mut t = text("eta_yamabe");
    t.lambda = Some(Scalar::Text("x*y".into()));
    t.mu = Some(Scalar::Number(1.0));
    t.eta = Some(vec![Scalar::Number(1.0)]);
    assert!(SolitonSpec::from_text(&t, &c, None).is_err());
    t.eta = Some(vec![Scalar::Number(1.0), Scalar::Text("y".into())]);
    assert!(SolitonSpec::from_text(&t, &c, None).is_ok());
    let mut t = text("quasi_einstein");
    t.alpha = Some(Scalar::Number(1.0));
    t.beta = Some(Scalar::Number(0.0));
    t.a = Some(vec![Scalar::Number(1.0), Scalar::Number(0.0)]);
    let e = SolitonSpec::from_text(&t, &c, None).unwrap_err();
    assert!(e.to_string().contains("einstein"));
    let mut t = text("einstein");
    t.psi = Some(Scalar::Text("x".into()));
    assert!(SolitonSpec::from_text(&t, &c, None).is_err());
}

#[test]
fn classification_dead_band() {
    assert_eq!(classify(1e-9, 1e-8), "steady");
    assert_eq!(classify(-1e-9, 1e-8), "steady");
    assert_eq!(classify(0.5, 1e-8), "shrinking");
    assert_eq!(classify(-0.5, 1e-8), "expanding");
}

#[test]
fn gaussian_ricci_soliton_on_flat_space() {
    for n in 2..=4 {
        let m = ChartManifold::euclidean(&coords(n)).unwrap();
        let bx = SampleBox::uniform(n, -2.0, 2.0).unwrap();
        let points = pts(&bx, 30, n as u64);
        let sweep = Sweep::new(&points, 1e-10);
        for lambda in [0.5, -1.25] {
            let spec = SolitonSpec::new(SolitonKind::Ricci, expr(&m, &gaussian(n, lambda)))
                .lambda(Expression::constant(lambda, m.coords().clone()));
            let s = &residual("r", &spec, &m, &sweep)[0];
            assert!(s.passed(), "{s:?}");
            assert!(s.max_abs_residual <= 1e-10);
        }
        let spec = SolitonSpec::new(SolitonKind::Ricci, expr(&m, &gaussian(n, 1.0)))
            .lambda(Expression::constant(0.9, m.coords().clone()));
        assert!(residual("r", &spec, &m, &sweep)[0].failed());
    }
}

#[test]
fn round_sphere_and_hyperbolic_space_are_einstein() {
    let s2 = corpus::round_sphere2(&["th", "ph"]).unwrap();
    let points = pts(&corpus::sphere_box(2).unwrap(), 30, 1);
    let sweep = Sweep::new(&points, 1e-10);
    let spec = SolitonSpec::new(SolitonKind::Einstein, expr(&s2, "0"));
    assert!(residual("e", &spec, &s2, &sweep)[0].passed());
    for p in &points {
        assert!((s2.geometry_at(p).unwrap().scalar() - 2.0).abs() < 1e-12);
    }
    for n in 2..=5 {
        let e = corpus::hyperbolic(n).unwrap();
        let m = e.dwp.product();
        let points = pts(&e.sample_box, 30, 2);
        let sweep = Sweep::new(&points, 1e-10);
        let spec = SolitonSpec::new(SolitonKind::Einstein, expr(m, "0"));
        assert!(residual("e", &spec, m, &sweep)[0].passed());
        let nn = n as f64;
        for p in &points {
            assert!((m.geometry_at(p).unwrap().scalar() + nn * (nn - 1.0)).abs() < 1e-6);
        }
    }
}

#[test]
fn gaussian_riemann_soliton_has_lambda_twice_the_hessian_constant() {
    for n in 2..=4 {
        let m = ChartManifold::euclidean(&coords(n)).unwrap();
        let points = pts(&SampleBox::uniform(n, -1.0, 1.0).unwrap(), 20, 3);
        let sweep = Sweep::new(&points, 1e-10);
        let c = 0.75;
        let check = |lambda: f64| {
            let spec = SolitonSpec::new(SolitonKind::Riemann, expr(&m, &gaussian(n, c)))
                .lambda(Expression::constant(lambda, m.coords().clone()));
            residual("r", &spec, &m, &sweep)
        };
        let good = check(2.0 * c);
        assert_eq!(good.len(), 2);
        assert!(good.iter().all(|s| s.passed()), "{good:?}");
        assert_eq!(good[1].check_id, "r.contracted");
        assert!(check(c).iter().all(|s| s.failed()));
    }
}

#[test]
fn contraction_consistency_holds_for_any_potential() {
    let e = corpus::e2xe1().unwrap();
    let m = e.dwp.product();
    let points = pts(&e.sample_box, 20, 4);
    let sweep = Sweep::new(&points, 1e-8);
    let spec = SolitonSpec::new(SolitonKind::Riemann, expr(m, "x*t + sin(y) + t^3"))
        .lambda(expr(m, "0.3"));
    assert!(contraction_consistency("c", &spec, m, &sweep)
        .unwrap()
        .passed());

    let m4 = ChartManifold::new(
        &["a", "b", "c", "d"],
        &[
            vec!["2 + sin(a)", "0.3*b", "0", "0.1"],
            vec!["0.3*b", "1 + c^2", "0.2*a", "0"],
            vec!["0", "0.2*a", "3", "0.1*d"],
            vec!["0.1", "0", "0.1*d", "exp(b/2)"],
        ],
    )
    .unwrap();
    let points = pts(&SampleBox::uniform(4, -0.5, 0.5).unwrap(), 20, 5);
    let sweep = Sweep::new(&points, 1e-8);
    let spec = SolitonSpec::new(SolitonKind::Riemann, expr(&m4, "a*b - c^2*d + cos(d)"))
        .lambda(expr(&m4, "-1.7"));
    assert!(contraction_consistency("c", &spec, &m4, &sweep)
        .unwrap()
        .passed());

    let m2 = ChartManifold::euclidean(&["x", "y"]).unwrap();
    let spec = SolitonSpec::new(SolitonKind::Riemann, expr(&m2, "x")).lambda(expr(&m2, "1"));
    assert!(matches!(
        contraction_consistency("c", &spec, &m2, &Sweep::new(&points, 1e-8)),
        Err(Error::Dimension { .. })
    ));
}

#[test]
fn contracted_residual_is_bounded_by_full_residual_in_a_frame() {
    let e = corpus::generic_2x2().unwrap();
    let m = e.dwp.product();
    let n = m.dim();
    let spec = SolitonSpec::new(SolitonKind::Riemann, expr(m, "x^2 + u*v")).lambda(expr(m, "0.4"));
    for p in pts(&e.sample_box, 10, 6) {
        let st = PointState::new(m, &spec, &p).unwrap();
        let e4 = riemann_full(&spec, &st, &p).unwrap();
        let f = gram_schmidt(st.geo.metric(), &DMatrix::identity(n, n)).unwrap();
        let fm = f.matrix();
        let vals = e4.values();
        let at = |a: usize, b: usize, c: usize, d: usize| vals[((a * n + b) * n + c) * n + d];
        let mut frame_max: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let mut s = 0.0;
                        for a in 0..n {
                            for b in 0..n {
                                for c in 0..n {
                                    for d in 0..n {
                                        s += fm[(a, i)]
                                            * fm[(b, j)]
                                            * fm[(c, k)]
                                            * fm[(d, l)]
                                            * at(a, b, c, d);
                                    }
                                }
                            }
                        }
                        frame_max = frame_max.max(s.abs());
                    }
                }
            }
        }
        let (contracted, _) = contraction_pair(&spec, &st, &p).unwrap();
        let cf = fm.transpose() * contracted * fm;
        assert!(cf.amax() <= (n * n) as f64 * frame_max + 1e-12);
    }
}

#[test]
fn degenerate_variants_reproduce_base_residuals_bitwise() {
    let e = corpus::generic_2x2().unwrap();
    let m = e.dwp.product();
    let points = pts(&e.sample_box, 25, 7);
    let psi = expr(m, "x*u + y^2 - v");
    let lambda = expr(m, "0.3 + x*v");
    let eta = vec![expr(m, "1"), expr(m, "y"), expr(m, "u*v"), expr(m, "2")];
    let zero = expr(m, "0");
    let one = expr(m, "1");
    let run = |spec: SolitonSpec| -> Vec<u64> {
        points
            .iter()
            .map(|p| {
                let st = PointState::new(m, &spec, p).unwrap();
                equation(&spec, &st, p).unwrap().residual().to_bits()
            })
            .collect()
    };
    let base = |k| SolitonSpec::new(k, psi.clone()).lambda(lambda.clone());
    let ricci = run(base(SolitonKind::Ricci));
    assert_eq!(
        ricci,
        run(base(SolitonKind::EtaRicci)
            .mu(zero.clone())
            .eta(eta.clone()))
    );
    assert_eq!(ricci, run(base(SolitonKind::FAlmostRicci).f(one.clone())));
    assert_eq!(
        ricci,
        run(base(SolitonKind::FAlmostEtaRicci)
            .f(one.clone())
            .mu(zero.clone())
            .eta(eta.clone()))
    );
    let yamabe = run(base(SolitonKind::Yamabe));
    assert_eq!(yamabe, run(base(SolitonKind::EtaYamabe).mu(zero).eta(eta)));
    assert_ne!(ricci, yamabe);
}

fn context<'a>(
    dwp: &'a DoublyWarpedProduct,
    spec: &'a SolitonSpec,
    anchor: &'a [f64],
    points: &'a [Vec<f64>],
    tol: f64,
) -> FactorContext<'a> {
    FactorContext {
        dwp,
        spec,
        anchor,
        sweep: Sweep::new(points, tol),
        formula: Formula::Corrected,
    }
}

fn find<'a>(v: &'a [ResidualSummary], id: &str) -> &'a ResidualSummary {
    v.iter()
        .find(|s| s.check_id == id)
        .unwrap_or_else(|| panic!("no {id} in {v:?}"))
}

#[test]
fn ricci_factor_structures_on_gaussian_direct_product() {
    let e = corpus::direct_flat().unwrap();
    let m = e.dwp.product();
    let points = pts(&e.sample_box, 30, 8);
    let lambda = 0.8;
    let spec = SolitonSpec::new(SolitonKind::Ricci, expr(m, "0.4*(x^2 + y^2 + t^2)"))
        .lambda(expr(m, "0.8"));
    let anchor = e.sample_box.center();
    let ctx = context(&e.dwp, &spec, &anchor, &points, 1e-10);
    let product = residual("s", &spec, m, &ctx.sweep).remove(0);
    assert!(product.passed());
    let out = factor_checks(&ctx, "s", &product);
    for id in [
        "s.factor1",
        "s.factor2",
        "s.factor1.identity",
        "s.factor2.identity",
        "s.mixed",
        "s.mixed.identity",
        "s.log_hessian",
    ] {
        let s = find(&out, id);
        assert!(s.passed(), "{s:?}");
        assert!(s.max_abs_residual <= 1e-10);
    }
    // With k = l = 0 the factor λ equals the product λ.
    let p = &points[0];
    let pp = e.dwp.at(p).unwrap();
    let psi = spec.psi.jet(p).unwrap();
    for which in [Factor::First, Factor::Second] {
        let (_, lw) = factor_equation(&ctx, &pp, &psi, which, Formula::Corrected).unwrap();
        assert_eq!(lw, lambda);
    }
}

#[test]
fn log_hessian_identity_on_sample_warpings() {
    for f1 in ["exp(x)", "1 + x^2"] {
        let dwp = DoublyWarpedProduct::new(
            ChartManifold::euclidean(&["x", "y"]).unwrap(),
            ChartManifold::euclidean(&["t"]).unwrap(),
            f1,
            "cosh(t)",
        )
        .unwrap();
        for p in pts(&SampleBox::uniform(3, -1.0, 1.0).unwrap(), 50, 9) {
            let pp = dwp.at(&p).unwrap();
            assert!(log_hessian_identity(&pp, Factor::First) <= 1e-10);
            assert!(log_hessian_identity(&pp, Factor::Second) <= 1e-10);
        }
    }
}

#[test]
fn failing_product_gates_factor_claims() {
    let e = corpus::e2xe1().unwrap();
    let m = e.dwp.product();
    let points = pts(&e.sample_box, 20, 10);
    let anchor = e.sample_box.center();
    let spec = SolitonSpec::new(SolitonKind::Ricci, expr(m, "x + t^2")).lambda(expr(m, "0.5"));
    let ctx = context(&e.dwp, &spec, &anchor, &points, 1e-8);
    let product = residual("s", &spec, m, &ctx.sweep).remove(0);
    assert!(product.failed());
    let out = factor_checks(&ctx, "s", &product);
    for id in ["s.factor1", "s.factor2", "s.mixed"] {
        let s = find(&out, id);
        assert_eq!(s.status, Status::Skipped);
        assert!(s.notes[0].starts_with("skipped: hypothesis fails"));
    }
    for id in [
        "s.factor1.identity",
        "s.factor2.identity",
        "s.mixed.identity",
        "s.log_hessian",
    ] {
        assert!(find(&out, id).passed(), "{id}");
    }
}

fn kind_spec(kind: SolitonKind, m: &ChartManifold, psi: &str) -> SolitonSpec {
    let s = SolitonSpec::new(kind, expr(m, psi));
    match kind {
        SolitonKind::QuasiEinstein => {
            let n = m.dim();
            let mut a: Vec<Expression> = (0..n).map(|_| expr(m, "0.3")).collect();
            a[0] = expr(m, "1");
            SolitonSpec::new(kind, expr(m, "0"))
                .alpha(expr(m, "-0.5"))
                .beta(expr(m, "0.7"))
                .eta(a)
        }
        _ => s.lambda(expr(m, "0.3")),
    }
}

#[test]
fn factor_equations_are_blocks_of_the_product_equation() {
    for e in [
        corpus::e2xe1().unwrap(),
        corpus::generic_2x2().unwrap(),
        corpus::s3_h3().unwrap(),
    ] {
        let m = e.dwp.product();
        let points = pts(&e.sample_box, 8, 11);
        let anchor = e.sample_box.center();
        let c = m.coords();
        let psi = format!("{}*{} + {}^2", c[0], c[c.len() - 1], c[1]);
        for kind in [
            SolitonKind::Yamabe,
            SolitonKind::Ricci,
            SolitonKind::Riemann,
            SolitonKind::QuasiEinstein,
        ] {
            let spec = kind_spec(kind, m, &psi);
            let ctx = context(&e.dwp, &spec, &anchor, &points, 1e-9);
            let product = residual("s", &spec, m, &ctx.sweep).remove(0);
            let out = factor_checks(&ctx, "s", &product);
            for id in ["s.factor1.identity", "s.factor2.identity"] {
                let s = find(&out, id);
                assert!(s.passed(), "{} {kind}: {s:?}", e.name);
            }
            if matches!(kind, SolitonKind::Yamabe | SolitonKind::Ricci) {
                let s = find(&out, "s.mixed.identity");
                assert!(s.max_abs_residual <= 1e-10, "{} {kind}: {s:?}", e.name);
            }
        }
    }
}

#[test]
fn riemann_second_factor_alternative_potential_fails_when_l_is_curved() {
    let e = corpus::generic_2x2().unwrap();
    let m = e.dwp.product();
    let points = pts(&e.sample_box, 5, 12);
    let anchor = e.sample_box.center();
    let spec = kind_spec(SolitonKind::Riemann, m, "x*u");
    let ctx = context(&e.dwp, &spec, &anchor, &points, 1e-9);
    let mut worst: f64 = 0.0;
    for p in leaf_points(&e.dwp, &points, &anchor, Factor::Second) {
        let pp = e.dwp.at(&p).unwrap();
        let psi = spec.psi.jet(&p).unwrap();
        let (good, _) =
            factor_equation(&ctx, &pp, &psi, Factor::Second, Formula::Corrected).unwrap();
        let (bad, _) = factor_equation(&ctx, &pp, &psi, Factor::Second, Formula::Original).unwrap();
        let diff: f64 = good
            .values()
            .iter()
            .zip(bad.values())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        worst = worst.max(diff);
    }
    assert!(worst > 1e-3);
}

#[test]
fn riemann_factor_structures_on_flat_gaussian() {
    let e = corpus::direct_flat().unwrap();
    let m = e.dwp.product();
    let points = pts(&e.sample_box, 20, 13);
    let anchor = e.sample_box.center();
    let c = 0.6;
    let spec = SolitonSpec::new(SolitonKind::Riemann, expr(m, "0.3*(x^2 + y^2 + t^2)"))
        .lambda(expr(m, "1.2"));
    let ctx = context(&e.dwp, &spec, &anchor, &points, 1e-10);
    let sums = residual("s", &spec, m, &ctx.sweep);
    assert!(sums.iter().all(|s| s.passed()));
    let out = factor_checks(&ctx, "s", &sums[0]);
    for id in ["s.factor1", "s.factor2"] {
        assert!(find(&out, id).passed());
    }
    // k = l = 0: λ_i = (m − 1)λ − Δψ.
    let p = &points[0];
    let pp = e.dwp.at(p).unwrap();
    let psi = spec.psi.jet(p).unwrap();
    let (_, lw) = factor_equation(&ctx, &pp, &psi, Factor::First, Formula::Corrected).unwrap();
    assert!((lw - (2.0 * 2.0 * c - 3.0 * c)).abs() < 1e-14);
}

#[test]
fn quasi_einstein_warped_product_and_fit() {
    let e = corpus::quasi_einstein_cosh().unwrap();
    let m = e.dwp.product();
    let points = pts(&e.sample_box, 25, 14);
    let anchor = e.sample_box.center();
    let spec = SolitonSpec::new(SolitonKind::QuasiEinstein, expr(m, "0"))
        .alpha(expr(m, "-(1 + tanh(t)^2)"))
        .beta(expr(m, "-1/cosh(t)^2"))
        .eta(vec![expr(m, "1"), expr(m, "0"), expr(m, "0")]);
    let ctx = context(&e.dwp, &spec, &anchor, &points, 1e-10);
    let product = residual("q", &spec, m, &ctx.sweep).remove(0);
    assert!(product.passed(), "{product:?}");
    let out = factor_checks(&ctx, "q", &product);
    for s in &out {
        assert!(s.passed(), "{s:?}");
    }
    for p in &points {
        let geo = m.geometry_at(p).unwrap();
        let fit = fit_quasi_einstein(&geo).unwrap();
        let t = p[0];
        assert!((fit.alpha + 1.0 + t.tanh().powi(2)).abs() < 1e-12);
        assert!((fit.beta + 1.0 / t.cosh().powi(2)).abs() < 1e-12);
        assert!(fit.spread < 1e-12);
        assert!((fit.form[0].abs() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn fitted_quasi_einstein_data_on_e2xe1_satisfy_factor_identities() {
    let e = corpus::e2xe1().unwrap();
    let m = e.dwp.product();
    let points = pts(&e.sample_box, 10, 15);
    let anchor = e.sample_box.center();
    for p in leaf_points(&e.dwp, &points, &anchor, Factor::First) {
        let fit = fit_quasi_einstein(&m.geometry_at(&p).unwrap()).unwrap();
        let spec = SolitonSpec::new(SolitonKind::QuasiEinstein, expr(m, "0"))
            .alpha(Expression::constant(fit.alpha, m.coords().clone()))
            .beta(Expression::constant(fit.beta, m.coords().clone()))
            .eta(
                fit.form
                    .iter()
                    .map(|&v| Expression::constant(v, m.coords().clone()))
                    .collect(),
            );
        let one = vec![p.clone()];
        let ctx = context(&e.dwp, &spec, &anchor, &one, 1e-6);
        let pp = e.dwp.at(&p).unwrap();
        let (t, _) = factor_equation(
            &ctx,
            &pp,
            &spec.psi.jet(&p).unwrap(),
            Factor::First,
            Formula::Corrected,
        )
        .unwrap();
        let st = PointState::new(m, &spec, &p).unwrap();
        let full = DMatrix::from_column_slice(3, 3, equation(&spec, &st, &p).unwrap().values());
        let b = full.view((0, 0), (2, 2)).into_owned();
        assert!(crate::residual::compare(t.values(), b.as_slice()) < 1e-6);
    }
}

#[test]
fn yamabe_structures_on_direct_product_and_mixed_condition() {
    // Flat: h = −λ g with ψ = −λ|x|²/2.
    let e = corpus::direct_flat().unwrap();
    let m = e.dwp.product();
    let points = pts(&e.sample_box, 20, 16);
    let anchor = e.sample_box.center();
    let spec = SolitonSpec::new(SolitonKind::Yamabe, expr(m, "0.5*(x^2 + y^2) + 0.5*t^2"))
        .lambda(expr(m, "-1"));
    let ctx = context(&e.dwp, &spec, &anchor, &points, 1e-10);
    let product = residual("y", &spec, m, &ctx.sweep).remove(0);
    assert!(product.passed());
    for s in factor_checks(&ctx, "y", &product) {
        assert!(s.passed(), "{s:?}");
    }

    // ψ depending on the first factor only, with U(l) ≠ 0, violates the
    // mixed condition.
    let e = corpus::e2xe1().unwrap();
    let m = e.dwp.product();
    let points = pts(&e.sample_box, 20, 17);
    let spec = SolitonSpec::new(SolitonKind::Yamabe, expr(m, "x^2 + y")).lambda(expr(m, "0"));
    let pp_min = points
        .iter()
        .map(|p| {
            let pp = e.dwp.at(p).unwrap();
            let psi = spec.psi.jet(p).unwrap();
            pp.mixed_hessian(&psi, Formula::Corrected).amax()
        })
        .fold(f64::INFINITY, f64::min);
    assert!(pp_min > 0.0);
    let worst = points
        .iter()
        .map(|p| {
            e.dwp
                .at(p)
                .unwrap()
                .mixed_hessian(&spec.psi.jet(p).unwrap(), Formula::Corrected)
                .amax()
        })
        .fold(0.0, f64::max);
    assert!(worst > 1e-2);
}

#[test]
fn conformal_candidates_on_nontrivial_product_stay_away_from_zero() {
    let e = corpus::e2xe1().unwrap();
    let m = e.dwp.product();
    let points = pts(&e.sample_box, 30, 18);
    let anchor = e.sample_box.center();
    for psi in ["x + t^2", "exp(x)*cosh(t)", "x*y*t"] {
        let spec = SolitonSpec::new(SolitonKind::Conformal, expr(m, psi));
        let ctx = context(&e.dwp, &spec, &anchor, &points, 1e-8);
        let s = conformal_spot_check(&ctx, "c", 1e-3).unwrap();
        assert!(s.passed(), "{psi}: {s:?}");
    }
    let spec = SolitonSpec::new(SolitonKind::Conformal, expr(m, "1"));
    let ctx = context(&e.dwp, &spec, &anchor, &points, 1e-8);
    assert!(conformal_spot_check(&ctx, "c", 1e-3).is_none());
}
