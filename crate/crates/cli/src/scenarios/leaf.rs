use rand::Rng;

use conullity::geodesics::{abs_f1_integral, leaf_invariant_a};
use conullity::{Error, ModelSpec, Point};

use super::{errored, Context};
use crate::report::{Check, Section};

fn paths(ctx: &Context, name: &str, spec: &ModelSpec, xa: f64, xb: f64) -> Vec<Vec<Point>> {
    let n = spec.n();
    let pt = |x: f64, u: f64, v1: f64| {
        let mut v = vec![0.0; n];
        v[0] = v1;
        Point::new(x, u, v)
    };
    let mid = 0.5 * (xa + xb);
    let mut out = vec![
        vec![pt(xa, 0.0, 0.0), pt(xb, 0.0, 0.0)],
        vec![pt(xa, 1.0, 3.0), pt(xb, 1.0, 3.0)],
        vec![pt(xa, -0.5, 0.5), pt(mid, 0.8, -1.0), pt(xb, 0.2, 2.0)],
    ];
    let mut rng = ctx.rng(&format!("leaf-paths-{name}"));
    while out.len() < ctx.cfg.leaf.paths {
        let mut xs: Vec<f64> = (0..3).map(|_| rng.random_range(xa..xb)).collect();
        xs.sort_by(f64::total_cmp);
        let mut path = vec![];
        for x in std::iter::once(xa).chain(xs).chain(std::iter::once(xb)) {
            let u = rng.random_range(-1.0..1.0);
            let v = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
            path.push(Point::new(x, u, v));
        }
        out.push(path);
    }
    out
}

pub fn run(ctx: &Context) -> Section {
    let mut sec = Section::new("leaf-invariant");
    for (name, spec) in &ctx.specs {
        spec_checks(ctx, name, spec, &mut sec);
    }
    sec
}

fn spec_checks(ctx: &Context, name: &str, spec: &ModelSpec, sec: &mut Section) {
    let tol = ctx.cfg.tolerances.leaf_invariant;
    let r = ctx.x_range(spec, ctx.cfg.leaf.x_range);
    let (xa, xb) = (r.lo, r.hi);
    let ps = paths(ctx, name, spec, xa, xb);
    let values: Result<Vec<f64>, Error> = ps.iter().map(|p| leaf_invariant_a(spec, p)).collect();
    let values = match values {
        Ok(v) => v,
        Err(e) => {
            sec.check(errored("path-independence", name, &e));
            return;
        }
    };
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    sec.line(format!(
        "[{name}] A between leaves x = {xa:.6} and x = {xb:.6}: {:.12}",
        values[0]
    ));
    let mut c = Check::bound("path-independence", name, hi - lo, tol);
    c.detail = format!("spread over {} monotone paths, {}", values.len(), c.detail);
    sec.check(c);

    let f1 = abs_f1_integral(spec, xa, xb);
    let diff = values.iter().map(|v| (v - f1).abs()).fold(0.0, f64::max);
    let mut c = Check::bound("f1-difference", name, diff, tol);
    c.detail = format!("A vs F_1(b) - F_1(a) = {f1:.12}, {}", c.detail);
    sec.check(c);

    let n = spec.n();
    let within = vec![
        Point::new(xa, -1.0, vec![0.5; n]),
        Point::new(xa, 0.7, vec![-1.0; n]),
        Point::new(xa, 1.5, vec![2.0; n]),
    ];
    match leaf_invariant_a(spec, &within) {
        Ok(a) => sec.check(Check::bound(
            "within-leaf",
            name,
            a.abs(),
            ctx.cfg.tolerances.within_leaf,
        )),
        Err(e) => sec.check(errored("within-leaf", name, &e)),
    }

    let back = vec![
        Point::new(xb, 0.0, vec![0.0; n]),
        Point::new(xa, 0.0, vec![0.0; n]),
    ];
    let rejected = matches!(
        leaf_invariant_a(spec, &back),
        Err(Error::NonMonotonePath { .. })
    );
    sec.check(Check::flag(
        "non-monotone-rejected",
        name,
        rejected,
        "a path with decreasing x is refused",
    ));
}
