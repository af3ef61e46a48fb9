use rayon::prelude::*;

use conullity::curvature::{nullity_residual, nullity_residual_general, riemann_at};
use conullity::fields::check::{check_field_1d, check_field_2d};
use conullity::metric::{
    closed_form_inverse, gram_deviation, leading_minors_positive, max_abs, metric_at,
    orthonormal_frame, PerturbedModel,
};
use conullity::{Interval, ModelSpec};

use super::{bound_at, errored, fmt_point, worst, Context};
use crate::report::{Check, Section};

const CONTROL_EPSILON: f64 = 0.1;

pub fn run(ctx: &Context) -> Section {
    let mut sec = Section::new("invariants");
    for (name, spec) in &ctx.specs {
        spec_checks(ctx, name, spec, &mut sec);
    }
    sec
}

fn spec_checks(ctx: &Context, name: &str, spec: &ModelSpec, sec: &mut Section) {
    let tol = &ctx.cfg.tolerances;
    let s = &ctx.cfg.sampling;
    let xr = ctx.x_range(spec, s.x_range);
    let ur = Interval {
        lo: s.u_range[0],
        hi: s.u_range[1],
    };

    let mut fd_ok = true;
    let mut fd_worst: f64 = 0.0;
    let mut fd_where = None;
    for (i, f) in spec.f().iter().enumerate() {
        let c = check_field_1d(
            f.as_ref(),
            xr,
            s.fd_points,
            ctx.seed(&format!("fd-f{i}-{name}")),
        );
        fd_ok &= c.passed;
        if c.worst_error >= fd_worst {
            fd_worst = c.worst_error;
            fd_where = c
                .worst_at
                .map(|w| format!("f_{} order {} at x = {:.6}", i + 1, w.0, w.1));
        }
    }
    let c = check_field_2d(
        spec.eta().as_ref(),
        xr,
        ur,
        s.fd_points,
        ctx.seed(&format!("fd-eta-{name}")),
    );
    fd_ok &= c.passed;
    if c.worst_error >= fd_worst {
        fd_worst = c.worst_error;
        fd_where = c
            .worst_at
            .map(|w| format!("eta order {} at (x, u) = ({:.6}, {:.6})", w.0, w.1, w.2));
    }
    sec.check(
        Check::flag(
            "field-derivatives",
            name,
            fd_ok,
            format!("analytic vs finite-difference derivatives, worst scaled error {fd_worst:.3e}"),
        )
        .with_witness(fd_where),
    );

    let pts = ctx.random_points(spec, &format!("invariants-{name}"), s.points);

    let positive: Vec<_> = pts
        .par_iter()
        .map(|p| metric_at(spec, p).map(|m| (!leading_minors_positive(&m.g)) as u8 as f64))
        .collect();
    match positive
        .iter()
        .position(|r| !matches!(r, Ok(v) if *v == 0.0))
    {
        None => sec.check(Check::flag(
            "positivity",
            name,
            true,
            format!("leading minors positive at {} points", pts.len()),
        )),
        Some(i) => {
            let why = match &positive[i] {
                Err(e) => e.to_string(),
                Ok(_) => "non-positive leading minor".into(),
            };
            sec.check(
                Check::flag("positivity", name, false, why.clone())
                    .with_witness(Some(format!("{why} at {}", fmt_point(&pts[i])))),
            );
        }
    }

    let inverse = worst(
        pts.par_iter()
            .map(|p| {
                let m = metric_at(spec, p)?;
                let lu =
                    m.g.clone()
                        .lu()
                        .try_inverse()
                        .unwrap_or_else(|| m.g.clone() * f64::NAN);
                Ok((max_abs(&(closed_form_inverse(m.eta, &m.b) - lu)), p.clone()))
            })
            .collect(),
    );
    sec.check(bound_at("inverse", name, inverse, tol.inverse));

    let frame = worst(
        pts.par_iter()
            .map(|p| {
                let m = metric_at(spec, p)?;
                Ok((
                    gram_deviation(&m.g, &orthonormal_frame(spec, p)?),
                    p.clone(),
                ))
            })
            .collect(),
    );
    sec.check(bound_at("frame", name, frame, tol.frame));

    let scal: conullity::Result<Vec<_>> = pts
        .par_iter()
        .map(|p| riemann_at(spec, p).map(|r| (r.scal_contraction, r.scal)))
        .collect();
    match scal {
        Ok(vals) => {
            let (lo, hi) = vals
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |a, v| {
                    (a.0.min(v.1), a.1.max(v.1))
                });
            if hi - lo < 1e-9 {
                sec.line(format!("[{name}] Scal = {:.6}", 0.5 * (lo + hi)));
            } else {
                sec.line(format!("[{name}] Scal ranges over [{lo:.6}, {hi:.6}]"));
            }
            let (err, at) = vals
                .iter()
                .zip(&pts)
                .map(|(v, p)| ((v.0 - v.1).abs() / v.1.abs().max(1.0), p))
                .fold((0.0, None), |a, (e, p)| {
                    if e > a.0 || e.is_nan() {
                        (e, Some(p))
                    } else {
                        a
                    }
                });
            let mut c = Check::bound("scal-identity", name, err, tol.scal_rel)
                .with_witness(at.map(|p| format!("relative error {err:.3e} at {}", fmt_point(p))));
            c.detail = format!(
                "contraction vs -2 eta_uu/eta, {} points, {}",
                pts.len(),
                c.detail
            );
            sec.check(c);
        }
        Err(e) => sec.check(errored("scal-identity", name, &e)),
    }

    let nullity = worst(
        pts.par_iter()
            .map(|p| Ok((nullity_residual(spec, p)?, p.clone())))
            .collect(),
    );
    sec.check(bound_at("nullity", name, nullity, tol.nullity));

    let control = PerturbedModel {
        base: spec.clone(),
        epsilon: CONTROL_EPSILON,
    };
    let control_min: conullity::Result<Vec<f64>> = pts
        .par_iter()
        .map(|p| nullity_residual_general(&control, &p.coords()))
        .collect();
    match control_min {
        Ok(vals) => {
            let (i, m) = vals
                .iter()
                .enumerate()
                .fold(
                    (0, f64::INFINITY),
                    |a, (i, v)| if *v < a.1 { (i, *v) } else { a },
                );
            sec.check(
                Check::flag(
                    "nullity-control",
                    name,
                    m > tol.control_nullity,
                    format!(
                        "perturbed g_v1v1 by {CONTROL_EPSILON}(x^2 + u^2): min residual {m:.3e} (must exceed {:.1e})",
                        tol.control_nullity
                    ),
                )
                .with_witness(Some(format!("residual {m:.3e} at {}", fmt_point(&pts[i])))),
            );
        }
        Err(e) => sec.check(errored("nullity-control", name, &e)),
    }
}
