use conullity::completeness::{rotation_generator, solve_rotation, warped_metric_check};
use conullity::fields::{constant, constant_2d};
use conullity::{Interval, ModelSpec};

use super::{errored, Context};
use crate::report::{Check, Section};

pub fn run(ctx: &Context) -> Section {
    let mut sec = Section::new("warp");
    for (name, spec) in &ctx.specs {
        spec_checks(ctx, name, spec, &mut sec);
    }
    sec
}

fn spec_checks(ctx: &Context, name: &str, spec: &ModelSpec, sec: &mut Section) {
    let w = &ctx.cfg.warp;
    let tol = &ctx.cfg.tolerances;
    let range = ctx.x_range(spec, w.x_range);
    if range.lo != w.x_range[0] || range.hi != w.x_range[1] {
        sec.line(format!(
            "[{name}] x-range clipped to [{:.6}, {:.6}]",
            range.lo, range.hi
        ));
    }
    let path = match solve_rotation(spec, range, w.step) {
        Ok(p) => p,
        Err(e) => {
            sec.check(errored("rotation-orthogonality", name, &e));
            return;
        }
    };
    let mut c = Check::bound(
        "rotation-orthogonality",
        name,
        path.orthogonality_error(),
        tol.rotation_drift,
    );
    c.detail = format!(
        "max |S^T S - I| over x in [{}, {}], {}",
        range.lo, range.hi, c.detail
    );
    let det = path.min_determinant();
    c.passed &= det > 0.0;
    sec.check(c);
    let mut c = Check::bound(
        "rotation-drift",
        name,
        path.drift_per_unit,
        tol.rotation_drift_per_unit,
    );
    c.detail = format!(
        "drift before projection per unit x at step {}, {}",
        w.step, c.detail
    );
    sec.check(c);

    match warped_metric_check(spec, &path, w.samples, ctx.seed(&format!("warp-{name}"))) {
        Ok(r) => {
            let mut c = Check::bound("warped-metric", name, r, tol.warped);
            c.detail = format!(
                "eta^2 dx^2 + |d(S V)|^2 vs metric_at at {} samples, {}",
                w.samples, c.detail
            );
            sec.check(c);
        }
        Err(e) => sec.check(errored("warped-metric", name, &e)),
    }

    // frozen coefficients: S(x) = exp((x - x0) A) exactly
    let anchor = if range.contains_closed(0.0) {
        0.0
    } else {
        range.lo
    };
    let frozen = ModelSpec::new(
        (1..=spec.n())
            .map(|j| constant(spec.f_at(j, 0, anchor)))
            .collect(),
        constant_2d(1.0),
        Interval::real_line(),
    );
    let res = frozen.and_then(|f| {
        let a = rotation_generator(&f, anchor);
        let p = solve_rotation(&f, range, w.step)?;
        Ok(p.xs
            .iter()
            .zip(&p.s)
            .map(|(x, s)| (s - (&a * (x - anchor)).exp()).amax())
            .fold(0.0, f64::max))
    });
    match res {
        Ok(err) => {
            let mut c = Check::bound("constant-f-matrix-exp", name, err, tol.matrix_exp);
            c.detail = format!(
                "f frozen at x = {anchor}: S vs exp((x - x0) A), {}",
                c.detail
            );
            sec.check(c);
        }
        Err(e) => sec.check(errored("constant-f-matrix-exp", name, &e)),
    }
}
