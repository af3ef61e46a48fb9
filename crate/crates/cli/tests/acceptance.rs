use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector, Matrix2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use conullity::completeness::{
    completeness_certificate, jacobi_minimum_numeric, rotation_generator, solve_rotation,
    warped_metric_check, CertificateGrid, Verdict,
};
use conullity::connection::christoffel_at;
use conullity::curvature::{
    frenet_at, frenet_matrix_from_connection, nullity_residual, nullity_residual_general,
    one_over_a1_residual, plane_sec, riemann_at,
};
use conullity::fields::{builtin_ch_eta, constant, constant_2d, expr_1d, expr_2d};
use conullity::foliation::{
    build_turning_curve, build_turning_curve_with_limit, verify_foliation, SurfaceModel,
    TestRegion, CONVEXITY_TOL, P2,
};
use conullity::geodesics::{dphi_dx_check, exp_map, leaf_invariant_a};
use conullity::gluing::{check_dagger, smoothness_probe, ApproachGrid, DaggerOrders};
use conullity::library::{flat_bump_glue, order_two_control_glue, random_spec, standard_specs};
use conullity::metric::{metric_at, PerturbedModel};
use conullity::{Interval, ModelSpec, Point};

type Outcome = Result<String, String>;

fn sample_points(spec: &ModelSpec, seed: u64, count: usize) -> Vec<Point> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dom = spec.domain();
    let (lo, hi) = (dom.lo.max(-2.0) + 0.01, dom.hi.min(2.0) - 0.01);
    (0..count)
        .map(|_| {
            let x = rng.random_range(lo..hi);
            let u = rng.random_range(-1.0..1.0);
            let v = (0..spec.n()).map(|_| rng.random_range(-1.5..1.5)).collect();
            Point::new(x, u, v)
        })
        .collect()
}

fn eta_uu_fd(spec: &ModelSpec, x: f64, u: f64) -> f64 {
    let e = |t: f64| spec.eta().value(x, u + t);
    let h = 1e-3;
    (-e(2.0 * h) + 16.0 * e(h) - 30.0 * e(0.0) + 16.0 * e(-h) - e(-2.0 * h)) / (12.0 * h * h)
}

fn bound(label: &str, value: f64, tol: f64) -> Result<String, String> {
    let line = format!("{label} {value:.3e} (tol {tol:.0e})");
    if value <= tol {
        Ok(line)
    } else {
        Err(line)
    }
}

fn all_ok(parts: Vec<Outcome>) -> Outcome {
    let failed = parts.iter().any(|p| p.is_err());
    let text = parts
        .into_iter()
        .map(|p| match p {
            Ok(s) | Err(s) => s,
        })
        .collect::<Vec<_>>()
        .join("; ");
    if failed {
        Err(text)
    } else {
        Ok(text)
    }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn scalar_identity() -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for (k, (_, spec)) in standard_specs().iter().enumerate() {
        for p in sample_points(spec, 100 + k as u64, 200) {
            let r = riemann_at(spec, &p).map_err(err)?;
            let oracle = -2.0 * eta_uu_fd(spec, p.x, p.u) / spec.eta().value(p.x, p.u);
            worst = worst.max((r.scal_contraction - oracle).abs() / oracle.abs().max(1e-12));
        }
    }
    let elapsed = start.elapsed();
    all_ok(vec![
        bound("5 members x 200 points, relative error", worst, 1e-5),
        time_limit(elapsed, Duration::from_secs(30)),
    ])
}

fn time_limit(elapsed: Duration, limit: Duration) -> Outcome {
    let line = format!(
        "runtime {:.1} s (limit {} s)",
        elapsed.as_secs_f64(),
        limit.as_secs()
    );
    if elapsed < limit {
        Ok(line)
    } else {
        Err(line)
    }
}

fn nullity() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut control = f64::INFINITY;
    for (k, (_, spec)) in standard_specs().iter().enumerate() {
        let perturbed = PerturbedModel {
            base: spec.clone(),
            epsilon: 0.1,
        };
        for p in sample_points(spec, 200 + k as u64, 200) {
            worst = worst.max(nullity_residual(spec, &p).map_err(err)?);
            control = control.min(nullity_residual_general(&perturbed, &p.coords()).map_err(err)?);
        }
    }
    let ctl = format!("perturbed control min {control:.3e} (must exceed 1e-3)");
    all_ok(vec![
        bound("max residual", worst, 1e-6),
        if control > 1e-3 { Ok(ctl) } else { Err(ctl) },
    ])
}

/// `Γ^k_{xu}` and `Γ^k_{xv_i}` in closed form, with `v_0 = u` and `f_{n+1} = 0`.
fn christoffel_closed(spec: &ModelSpec, p: &Point) -> Vec<DVector<f64>> {
    let m = metric_at(spec, p).unwrap();
    let n = spec.n();
    let d = n + 2;
    let f = |j: usize| {
        if j >= 1 && j <= n {
            spec.f_at(j, 0, p.x)
        } else {
            0.0
        }
    };
    let gx = |j: usize| if j <= n { m.g[(0, j + 1)] } else { 0.0 };
    let ginv = |k: usize, j: usize| if j <= n { m.g_inv[(k, j + 1)] } else { 0.0 };
    let eta_u = spec.eta().partial(0, 1, p.x, p.u);
    let mut out = vec![DVector::from_fn(d, |k, _| {
        m.g_inv[(k, 0)] * (m.eta * eta_u + f(1) * gx(1)) + ginv(k, 1) * f(1)
    })];
    for i in 1..=n {
        out.push(DVector::from_fn(d, |k, _| {
            m.g_inv[(k, 0)] * (-f(i) * gx(i - 1) + f(i + 1) * gx(i + 1)) - ginv(k, i - 1) * f(i)
                + ginv(k, i + 1) * f(i + 1)
        }));
    }
    out
}

fn christoffel() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let specs = standard_specs();
    let (mut closed, mut leaf): (f64, f64) = (0.0, 0.0);
    for k in 0..500 {
        let spec = &specs[k % specs.len()].1;
        let p = sample_points(spec, rng.random(), 1).remove(0);
        let g = christoffel_at(spec, &p).map_err(err)?;
        let scale = 1.0 + g.max_abs();
        for (i, col) in christoffel_closed(spec, &p).iter().enumerate() {
            closed = closed.max((g.column(0, 1 + i) - col).amax() / scale);
        }
        let d = spec.n() + 2;
        for a in 0..d {
            for i in 1..d {
                for j in 1..d {
                    leaf = leaf.max(g.get(a, i, j).abs());
                }
            }
        }
    }
    all_ok(vec![
        bound(
            "500 samples, closed form vs general (relative)",
            closed,
            1e-9,
        ),
        bound("leaf symbols", leaf, 1e-12),
    ])
}

fn inverse() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst: f64 = 0.0;
    for k in 0..200 {
        let n = 1 + k % 4;
        let spec = random_spec(&mut rng, n);
        let p = sample_points(&spec, rng.random(), 1).remove(0);
        let m = metric_at(&spec, &p).map_err(err)?;
        let lu = m.g.clone().lu().try_inverse().ok_or("singular metric")?;
        worst = worst.max((&m.g_inv - lu).amax());
    }
    bound("200 samples n = 1..4, closed form vs LU", worst, 1e-10)
}

fn riemann() -> Outcome {
    let (mut triple, mut xuux): (f64, f64) = (0.0, 0.0);
    for (k, (_, spec)) in standard_specs().iter().enumerate() {
        for p in sample_points(spec, 500 + k as u64, 40) {
            let r = riemann_at(spec, &p).map_err(err)?;
            let m = metric_at(spec, &p).map_err(err)?;
            let eta_uu = spec.eta().partial(0, 2, p.x, p.u);
            let ratio = eta_uu / m.eta;
            for l in 0..spec.n() + 2 {
                let want = if l == 0 { -ratio } else { m.g[(0, l)] * ratio };
                triple = triple.max((r.tensor.get(l, 0, 1, 1) - want).abs());
            }
            xuux = xuux.max((r.tensor.lowered(0, 1, 1, 0) + m.eta * eta_uu).abs());
        }
    }
    all_ok(vec![
        bound("200 samples, R^._xuu", triple, 1e-6),
        bound("R(dx,du,du,dx) + eta eta_uu", xuux, 1e-6),
    ])
}

fn frenet() -> Outcome {
    let (mut ab, mut cov, mut inv): (f64, f64, f64) = (0.0, 0.0, 0.0);
    let mut nilpotent = true;
    for (k, (_, spec)) in standard_specs().iter().enumerate() {
        for p in sample_points(spec, 600 + k as u64, 40) {
            let fr = frenet_at(spec, &p).map_err(err)?;
            let conn = frenet_matrix_from_connection(spec, &p).map_err(err)?;
            let eta = spec.eta().value(p.x, p.u);
            let beta = -spec.eta().partial(0, 1, p.x, p.u) / eta;
            ab = ab.max((fr.beta - beta).abs() / (1.0 + beta.abs()));
            for (i, a) in fr.a.iter().enumerate() {
                let want = spec.f_at(i + 1, 0, p.x) / eta;
                ab = ab.max((a - want).abs() / (1.0 + want.abs()));
            }
            let scale = 1.0 + fr.frenet_derivative.amax();
            for a in 0..spec.n() + 2 {
                for b in 1..spec.n() + 2 {
                    ab = ab.max((fr.frenet_derivative[(a, b)] - conn[(a, b)]).abs() / scale);
                }
            }
            cov = cov.max(fr.covariant_residual);
            let c = fr.splitting_matrix;
            nilpotent &= c * c == Matrix2::zeros();
            inv = inv.max(one_over_a1_residual(spec, &p).map_err(err)?.unwrap_or(0.0));
        }
    }
    all_ok(vec![
        bound("a_i, beta (relative)", ab, 1e-12),
        bound("covariant recursion", cov, 1e-9),
        if nilpotent {
            Ok("C_T^2 = 0 exactly".into())
        } else {
            Err("C_T^2 != 0".into())
        },
        bound("(1/a_1)'' residual", inv, 1e-8),
    ])
}

fn exponential_map() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut coords, mut dphi, mut inner, mut basis): (f64, f64, f64, f64) = (0.0, 0.0, 0.0, 0.0);
    for (k, (_, spec)) in standard_specs().iter().enumerate() {
        let n = spec.n();
        for _ in 0..8 {
            let x0 = rng.random_range(-1.5..1.5);
            let mut w: Vec<f64> = (0..n + 1).map(|_| rng.random_range(-1.0..1.0)).collect();
            let norm = w.iter().map(|c| c * c).sum::<f64>().sqrt();
            let len = rng.random_range(0.0..10.0);
            w.iter_mut().for_each(|c| *c *= len / norm);
            let q = exp_map(spec, x0, &w).map_err(err)?;
            coords = coords.max((q.x - x0).abs().max((q.u - w[0]).abs()));
            for i in 0..n {
                coords = coords.max((q.v[i] - w[i + 1]).abs());
            }
        }
        for p in sample_points(spec, 700 + k as u64, 4) {
            let r = dphi_dx_check(spec, &p).map_err(err)?;
            dphi = dphi.max(r.residual);
            inner = inner.max(r.inner_product_residual);
            let mut ex = DVector::zeros(n + 2);
            ex[0] = 1.0;
            basis = basis.max((&r.closed_form - &ex).amax());
        }
    }
    all_ok(vec![
        bound("exp_map vs (x0, w), |w| <= 10", coords, 1e-7),
        bound("dphi residual", dphi, 1e-6),
        bound("inner products", inner, 1e-8),
        bound("closed-form dphi/dx vs coordinate dx", basis, 1e-6),
    ])
}

fn warp() -> Outcome {
    let range = Interval::new(0.0, 10.0).unwrap();
    let (mut orth, mut warped): (f64, f64) = (0.0, 0.0);
    for (name, spec) in standard_specs() {
        let r = if spec.domain().is_bounded() {
            Interval::new(0.0, spec.domain().hi - 0.3).unwrap()
        } else {
            range
        };
        let path = solve_rotation(&spec, r, 1e-3).map_err(err)?;
        if path.min_determinant() <= 0.0 {
            return Err(format!("{name}: det S <= 0"));
        }
        orth = orth.max(path.orthogonality_error());
        warped = warped.max(warped_metric_check(&spec, &path, 100, 9).map_err(err)?);
    }
    let frozen = ModelSpec::new(
        vec![constant(1.0), constant(2.0)],
        constant_2d(1.0),
        Interval::real_line(),
    )
    .map_err(err)?;
    let path = solve_rotation(&frozen, range, 1e-3).map_err(err)?;
    let a = rotation_generator(&frozen, 0.0);
    let expm: f64 = path
        .xs
        .iter()
        .zip(&path.s)
        .step_by(50)
        .map(|(x, s)| (s - DMatrix::exp(&(&a * *x))).amax())
        .fold(0.0, f64::max);
    all_ok(vec![
        bound("orthogonality over [0, 10]", orth, 1e-8),
        bound("warped metric", warped, 1e-7),
        bound("constant f vs matrix exponential", expm, 1e-7),
    ])
}

fn certificates() -> Outcome {
    let grid = CertificateGrid::default();
    let one = || vec![constant(1.0)];
    let real = Interval::real_line();
    let cases = [
        (
            "k = 0.5",
            builtin_ch_eta(constant(0.5)).map_err(err)?,
            Verdict::CompleteByCor,
        ),
        (
            "e^u",
            expr_2d("exp(u)").map_err(err)?,
            Verdict::CompleteByCor,
        ),
        (
            "e^(-(x^2+1)u)",
            expr_2d("exp(-(x^2+1)*u)").map_err(err)?,
            Verdict::Inconclusive,
        ),
    ];
    let mut parts = vec![];
    for (label, eta, want) in cases {
        let spec = ModelSpec::new(one(), eta, real).map_err(err)?;
        let c = completeness_certificate(&spec, &grid).map_err(err)?;
        let flagged = want != Verdict::Inconclusive || c.witness.is_some();
        let line = format!("{label} -> {}", c.verdict.name());
        parts.push(if c.verdict == want && flagged {
            Ok(line)
        } else {
            Err(line)
        });
    }
    let mut worst: f64 = 0.0;
    for i in 0..50 {
        let c = -0.98 + 1.96 * i as f64 / 49.0;
        let lambda = [0.5, 1.0, 2.0][i % 3];
        let exact = (1.0 - c * c).sqrt();
        let brute = brute_minimum(|t| (lambda * t).cosh() + c * (lambda * t).sinh());
        worst = worst
            .max((jacobi_minimum_numeric(c, lambda) - exact).abs())
            .max((brute - exact).abs());
    }
    parts.push(bound("sqrt(1 - c^2) minimum on 50 c-values", worst, 1e-6));
    all_ok(parts)
}

/// Grid scan of `[-50, 50]` followed by ternary refinement.
fn brute_minimum(f: impl Fn(f64) -> f64) -> f64 {
    let n = 20000;
    let at = |i: usize| -50.0 + 100.0 * i as f64 / n as f64;
    let best = (0..=n)
        .min_by(|&a, &b| f(at(a)).total_cmp(&f(at(b))))
        .unwrap();
    let (mut lo, mut hi) = (at(best.saturating_sub(1)), at((best + 1).min(n)));
    for _ in 0..200 {
        let (m1, m2) = (lo + (hi - lo) / 3.0, hi - (hi - lo) / 3.0);
        if f(m1) < f(m2) {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    f(0.5 * (lo + hi))
}

/// Foot point and distance to `s ↦ (tanh s, sech s)` via the Moebius map
/// taking that semicircle to the imaginary axis.
fn semicircle_foot(p: P2) -> (f64, f64) {
    let (a, b) = (p[0], p[1]);
    let den = (1.0 - a).powi(2) + b * b;
    let wr = ((1.0 + a) * (1.0 - a) - b * b) / den;
    let wi = 2.0 * b / den;
    ((wr * wr + wi * wi).sqrt().ln(), (wr.abs() / wi).asinh())
}

fn foliation() -> Outcome {
    let start = Instant::now();
    let s = SurfaceModel;
    let s_range = Interval::new(-8.0, 8.0).unwrap();
    let region = TestRegion::Fermi {
        s: Interval::new(-2.0, 2.0).unwrap(),
        u: Interval::new(-1.0, 1.0).unwrap(),
    };
    let mut parts = vec![];
    for (label, h) in [
        ("H = 0", constant(0.0)),
        ("H = sin(s)", expr_1d("sin(s)").map_err(err)?),
    ] {
        let curve =
            build_turning_curve(&s, h, [0.0, 1.0], [1.0, 0.0], s_range, 1e-2).map_err(err)?;
        let r = verify_foliation(&s, &curve, &region, 500, 10);
        let unique = r.samples.len() == 500
            && r.samples
                .iter()
                .all(|x| x.local_minima == 1 && !x.foot_at_end);
        let margin = r.min_convexity_margin();
        let line = format!("{label}: unique foot {unique}, convexity margin {margin:.3e}");
        parts.push(if unique && r.passed() && margin >= -CONVEXITY_TOL {
            Ok(line)
        } else {
            Err(line)
        });
        if label == "H = 0" {
            let foot = r
                .samples
                .iter()
                .map(|x| {
                    let (fs, d) = semicircle_foot(x.point);
                    (x.foot_s - fs).abs().max((x.distance - d).abs())
                })
                .fold(0.0, f64::max);
            parts.push(bound("H = 0 foot vs closed form", foot, 1e-6));
        }
    }
    let control = build_turning_curve_with_limit(
        &s,
        expr_1d("1.5*s").map_err(err)?,
        [0.0, 1.0],
        [1.0, 0.0],
        s_range,
        1e-2,
        f64::INFINITY,
    )
    .map_err(err)?;
    let r = verify_foliation(&s, &control, &region, 500, 11);
    parts.push(match &r.witness {
        Some((p, why)) => Ok(format!(
            "H = 1.5 s fails at ({:.3}, {:.3}): {why}",
            p[0], p[1]
        )),
        None => Err("H = 1.5 s control passed".into()),
    });
    parts.push(time_limit(start.elapsed(), Duration::from_secs(120)));
    all_ok(parts)
}

fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let inner: f64 = (1..n)
        .map(|i| f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 })
        .sum();
    (f(a) + f(b) + inner) * h / 3.0
}

fn leaf_invariant() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let (mut spread, mut diff, mut within): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for (_, spec) in standard_specs() {
        let n = spec.n();
        let (xa, xb) = (-1.0, 1.5);
        let mut values = vec![];
        for _ in 0..4 {
            let mut xs: Vec<f64> = (0..3).map(|_| rng.random_range(xa..xb)).collect();
            xs.sort_by(f64::total_cmp);
            let path: Vec<Point> = std::iter::once(xa)
                .chain(xs)
                .chain(std::iter::once(xb))
                .map(|x| {
                    let v = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
                    Point::new(x, rng.random_range(-1.0..1.0), v)
                })
                .collect();
            values.push(leaf_invariant_a(&spec, &path).map_err(err)?);
        }
        let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        spread = spread.max(hi - lo);
        let f1 = simpson(|x| spec.f_at(1, 0, x).abs(), xa, xb, 200_000);
        diff = diff.max(values.iter().map(|v| (v - f1).abs()).fold(0.0, f64::max));
        let same = [
            Point::new(0.3, -1.0, vec![0.5; n]),
            Point::new(0.3, 1.0, vec![-2.0; n]),
        ];
        within = within.max(leaf_invariant_a(&spec, &same).map_err(err)?.abs());
    }
    all_ok(vec![
        bound("spread over 4 paths", spread, 1e-8),
        bound("vs F_1 difference", diff, 1e-8),
        bound("within a leaf", within, 1e-12),
    ])
}

fn gluing() -> Outcome {
    let glue = flat_bump_glue(2).map_err(err)?;
    let pts: Vec<f64> = glue
        .smooth_set()
        .boundary_points()
        .into_iter()
        .take(5)
        .collect();
    let u_box = Interval::new(-1.0, 1.0).unwrap();
    let orders = DaggerOrders {
        k_max: 6,
        ab_max: 4,
        factors_max: 2,
    };
    let grid = ApproachGrid {
        m_min: 3,
        m_max: 20,
    };
    let dagger = check_dagger(&glue, &pts, u_box, orders, grid, 5).map_err(err)?;
    let mut probes = true;
    for c in &pts {
        probes &= smoothness_probe(&glue, *c, 4).map_err(err)?.passed();
    }
    let control = order_two_control_glue().map_err(err)?;
    let c_dagger = check_dagger(&control, &[0.0], u_box, orders, grid, 5).map_err(err)?;
    let c_probe = smoothness_probe(&control, 0.0, 4).map_err(err)?;
    let line = format!(
        "flat bump at {} points: decay {}, probe {}; order-2 control: decay {}, probe {}",
        pts.len(),
        dagger.passed(),
        probes,
        c_dagger.passed(),
        c_probe.passed()
    );
    if pts.len() == 5 && dagger.passed() && probes && !c_dagger.passed() && !c_probe.passed() {
        Ok(line)
    } else {
        Err(line)
    }
}

fn unit(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    let v: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
    let norm = v.iter().map(|c| c * c).sum::<f64>().sqrt();
    v.into_iter().map(|c| c / norm).collect()
}

fn plane_curvature() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let (mut generic, mut oracle, mut null): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for (k, (_, spec)) in standard_specs().iter().enumerate() {
        let d = spec.n() + 2;
        for p in sample_points(spec, 1300 + k as u64, 100) {
            let (a, b) = (unit(&mut rng, d), unit(&mut rng, d));
            let ps = plane_sec(spec, &p, &a, &b).map_err(err)?;
            generic = generic.max((ps.formula - ps.contraction).abs());
            let ab: f64 = a.iter().zip(&b).map(|(x, y)| x * y).sum();
            let wedge = a[d - 2] * b[d - 1] - a[d - 1] * b[d - 2];
            let sec = -spec.eta().partial(0, 2, p.x, p.u) / spec.eta().value(p.x, p.u);
            oracle = oracle.max((wedge * wedge / (1.0 - ab * ab) * sec - ps.contraction).abs());
            let mut t = vec![0.0; d];
            t[rng.random_range(0..spec.n())] = 1.0;
            let w = unit(&mut rng, d);
            null = null.max(plane_sec(spec, &p, &t, &w).map_err(err)?.formula.abs());
        }
    }
    all_ok(vec![
        bound(
            "100 planes per member, formula vs contraction",
            generic,
            1e-6,
        ),
        bound("contraction vs Scal/2 wedge oracle", oracle, 1e-6),
        bound("nullity planes", null, 1e-10),
    ])
}

fn run_all(dir: &Path) -> Result<Duration, String> {
    let cfg = dir.join("all.toml");
    fs::write(&cfg, "scenario = \"all\"\nseed = 7\noutput_dir = \"out\"\n").map_err(err)?;
    let start = Instant::now();
    let out = Command::new(env!("CARGO_BIN_EXE_conullity"))
        .current_dir(dir)
        .env_remove("CONULLITY_OUTPUT_DIR")
        .arg("run")
        .arg(&cfg)
        .output()
        .map_err(err)?;
    let elapsed = start.elapsed();
    if out.status.code() != Some(0) {
        return Err(format!(
            "run all exited with {:?}: {}",
            out.status.code(),
            String::from_utf8_lossy(&out.stderr)
        ));
    }
    Ok(elapsed)
}

fn csv_files(dir: &Path) -> Result<BTreeMap<String, Vec<u8>>, String> {
    let mut out = BTreeMap::new();
    for entry in fs::read_dir(dir).map_err(err)? {
        let path = entry.map_err(err)?.path();
        if path.extension().is_some_and(|e| e == "csv") {
            let name = path.file_name().unwrap().to_string_lossy().into_owned();
            out.insert(name, fs::read(&path).map_err(err)?);
        }
    }
    Ok(out)
}

fn determinism() -> Outcome {
    let (a, b) = (
        tempfile::tempdir().map_err(err)?,
        tempfile::tempdir().map_err(err)?,
    );
    let ta = run_all(a.path())?;
    let tb = run_all(b.path())?;
    let (fa, fb) = (
        csv_files(&a.path().join("out"))?,
        csv_files(&b.path().join("out"))?,
    );
    if fa.is_empty() {
        return Err("no CSV output".into());
    }
    if fa.keys().ne(fb.keys()) {
        return Err("CSV file sets differ".into());
    }
    if let Some((name, _)) = fa.iter().find(|(k, v)| fb[*k] != **v) {
        return Err(format!("{name} differs between runs"));
    }
    if fa.values().any(|v| v.contains(&b'\r')) {
        return Err("CR found in CSV output".into());
    }
    let slowest = ta.max(tb);
    all_ok(vec![
        Ok(format!(
            "{} CSV files byte-identical across two runs",
            fa.len()
        )),
        time_limit(slowest, Duration::from_secs(600)),
    ])
}

fn main() {
    let criteria: [(u32, &str, fn() -> Outcome); 14] = [
        (1, "scalar-curvature identity", scalar_identity),
        (2, "nullity", nullity),
        (3, "Christoffel closed forms", christoffel),
        (4, "inverse metric", inverse),
        (5, "curvature components", riemann),
        (6, "Frenet identities", frenet),
        (7, "exponential-map coordinates", exponential_map),
        (8, "warped product", warp),
        (9, "completeness certificates", certificates),
        (10, "foliation", foliation),
        (11, "leaf invariant", leaf_invariant),
        (12, "gluing", gluing),
        (13, "plane curvature", plane_curvature),
        (14, "end-to-end determinism", determinism),
    ];
    let mut failed = 0;
    for (n, title, f) in criteria {
        match f() {
            Ok(detail) => println!("PASS criterion {n}: {title}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {n}: {title}: {detail}");
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
