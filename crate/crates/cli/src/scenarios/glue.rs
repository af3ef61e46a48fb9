use conullity::curvature::nullity_residual_general;
use conullity::gluing::{
    assemble_glued_metric, check_dagger, irreducibility_proxy, smoothness_probe, ApproachGrid,
    DaggerOrders, GlueSpec,
};
use conullity::library::order_two_control_glue;
use conullity::metric::metric_at;
use conullity::{Interval, Point};

use super::{errored, Context};
use crate::config::{GlueDecl, Tolerances};
use crate::report::{num, Check, Section, Table};

fn u_box(d: &GlueDecl) -> Interval {
    Interval {
        lo: d.u_box[0],
        hi: d.u_box[1],
    }
}

fn orders(d: &GlueDecl) -> DaggerOrders {
    DaggerOrders {
        k_max: d.k_max,
        ab_max: d.ab_max,
        factors_max: d.factors_max,
    }
}

fn approach(d: &GlueDecl) -> ApproachGrid {
    ApproachGrid {
        m_min: d.m_min,
        m_max: d.m_max,
    }
}

pub fn run(ctx: &Context) -> Section {
    let mut sec = Section::new("glue");
    let d = &ctx.cfg.glue;
    let subject = format!("{} depth {}", d.library, d.depth);
    let glue = match d.build() {
        Ok(g) => g,
        Err(e) => {
            sec.check(Check::flag("dagger-decay", &subject, false, e.to_string()));
            return sec;
        }
    };
    let bpts = glue.smooth_set().boundary_points();
    sec.line(format!(
        "[{subject}] {} boundary points, n = {}",
        bpts.len(),
        glue.n()
    ));

    let dagger_pts: Vec<f64> = bpts
        .iter()
        .copied()
        .take(d.dagger_points.unwrap_or(bpts.len()))
        .collect();
    match check_dagger(
        &glue,
        &dagger_pts,
        u_box(d),
        orders(d),
        approach(d),
        d.u_samples,
    ) {
        Ok(r) => {
            sec.line(format!("[{subject}] slice: {}", r.slice()));
            sec.check(
                Check::flag(
                    "dagger-decay",
                    &subject,
                    r.passed(),
                    format!(
                        "{} products x {} boundary points, {} series",
                        r.products.len() / glue.n().max(1),
                        dagger_pts.len(),
                        r.series.len()
                    ),
                )
                .with_witness(r.witness.clone()),
            );
            let mut t = Table::new(
                "decay.csv",
                &["product_id", "boundary", "side", "distance", "value"],
            );
            for s in &r.series {
                let id = r.products[s.product].id();
                for (dist, v) in s.distances.iter().zip(&s.values) {
                    t.push(vec![
                        id.clone(),
                        num(s.boundary),
                        format!("{}", s.side as i32),
                        num(*dist),
                        num(*v),
                    ]);
                }
            }
            sec.tables.push(t);
        }
        Err(e) => sec.check(errored("dagger-decay", &subject, &e)),
    }

    for c in bpts.iter().take(d.probe_points) {
        match smoothness_probe(&glue, *c, d.probe_order) {
            Ok(p) => {
                let bad = p.orders.iter().find(|o| !o.passed);
                sec.check(
                    Check::flag(
                        "smoothness-probe",
                        &format!("{subject} at x = {c:.6}"),
                        p.passed(),
                        format!("one-sided derivatives of the modification to order {}", p.max_order),
                    )
                    .with_witness(bad.map(|o| {
                        format!(
                            "order {} component {:?}: left {:.6e}, right {:.6e}, cauchy {:.3e} (tol {:.3e})",
                            o.order, o.component, o.left, o.right, o.cauchy, o.tol
                        )
                    })),
                );
            }
            Err(e) => sec.check(errored("smoothness-probe", &subject, &e)),
        }
    }

    structure_checks(&glue, &subject, &bpts, d, &ctx.cfg.tolerances, &mut sec);

    if d.control {
        control(d, &mut sec);
    }
    sec
}

fn structure_checks(
    glue: &GlueSpec,
    subject: &str,
    bpts: &[f64],
    d: &GlueDecl,
    tol: &Tolerances,
    sec: &mut Section,
) {
    let mut identical = true;
    let mut checked = 0;
    let mut first_diff = None;
    for part in glue.smooth_set().parts() {
        let mid = if part.is_bounded() {
            part.midpoint()
        } else if part.lo.is_finite() {
            part.lo + 0.5
        } else {
            part.hi - 0.5
        };
        let Some(Ok(spec)) = glue.component_spec(mid) else {
            continue;
        };
        let p = Point::new(
            mid,
            -0.3,
            (0..glue.n()).map(|i| 0.9 - 0.4 * i as f64).collect(),
        );
        match (assemble_glued_metric(glue, &p), metric_at(&spec, &p)) {
            (Ok(a), Ok(b)) => {
                checked += 1;
                if a.g != b.g {
                    identical = false;
                    first_diff.get_or_insert(format!("x = {mid:.6}"));
                }
            }
            _ => {
                identical = false;
                first_diff.get_or_insert(format!("metric failed at x = {mid:.6}"));
            }
        }
    }
    sec.check(
        Check::flag(
            "family-inside",
            subject,
            identical && checked > 0,
            format!(
                "glued metric bit-identical to the component spec at {checked} component midpoints"
            ),
        )
        .with_witness(first_diff),
    );

    let (mut off, mut inside): (f64, f64) = (0.0, 0.0);
    for c in bpts {
        for side in [-1.0, 1.0] {
            let x = c + side * 1e-3;
            let Ok(m) = assemble_glued_metric(glue, &Point::new(x, 0.7, vec![1.3; glue.n()]))
            else {
                continue;
            };
            let worst = (1..glue.n() + 2)
                .map(|j| m.g[(0, j)].abs())
                .fold(0.0, f64::max);
            if glue.smooth_set().contains(x) {
                inside = inside.max(worst);
            } else {
                off = off.max(worst);
            }
        }
    }
    sec.line(format!(
        "[{subject}] max |g_x.| off-diagonal at distance 1e-3 inside S: {inside:.3e}"
    ));
    let mut c = Check::bound("modification-vanishes", subject, off, tol.modification);
    c.detail = format!(
        "|g_x.| off-diagonal at distance 1e-3 outside S, {}",
        c.detail
    );
    sec.check(c);

    let mut null: f64 = 0.0;
    let mut failure = None;
    for c in bpts.iter().take(4) {
        for side in [-1.0, 1.0] {
            let mut q = vec![c + side * 0.02, 0.6];
            q.extend((0..glue.n()).map(|i| 0.4 - 1.2 * i as f64));
            match nullity_residual_general(glue, &q) {
                Ok(r) => null = null.max(r),
                Err(e) => {
                    failure.get_or_insert(e.to_string());
                }
            }
        }
    }
    let mut c =
        Check::bound("nullity-across", subject, null, tol.nullity).with_witness(failure.clone());
    if failure.is_some() {
        c.passed = false;
    }
    c.detail = format!(
        "nullity residual at distance 0.02 on both sides, {}",
        c.detail
    );
    sec.check(c);

    let r = irreducibility_proxy(glue, d.window, 2001);
    for s in &r.strips {
        sec.line(format!(
            "[{subject}] f_{} vanishes on [{:.6}, {:.6}]{}",
            s.f_index,
            s.interval.lo,
            s.interval.hi,
            if s.in_complement { " (gap of S)" } else { "" }
        ));
    }
    for s in &r.splits {
        sec.line(format!(
            "[{subject}] over [{:.6}, {:.6}] the tangent space splits into coordinate blocks {:?}",
            s.interval.lo, s.interval.hi, s.blocks
        ));
    }
    sec.check(Check::flag(
        "irreducibility",
        subject,
        true,
        format!(
            "{}: {} zero strips",
            if r.reducible_on_strips() {
                "reducible on strips"
            } else {
                "no zero strips, locally irreducible"
            },
            r.strips.len()
        ),
    ));
}

fn control(d: &GlueDecl, sec: &mut Section) {
    let subject = "order-two control";
    let g = match order_two_control_glue() {
        Ok(g) => g,
        Err(e) => {
            sec.check(errored("control-fails", subject, &e));
            return;
        }
    };
    let dagger = check_dagger(
        &g,
        &[0.0, 1.0],
        u_box(d),
        orders(d),
        approach(d),
        d.u_samples,
    );
    let probe = smoothness_probe(&g, 0.0, d.probe_order);
    match (dagger, probe) {
        (Ok(r), Ok(p)) => {
            let failed = r.failed_products();
            let detail = format!(
                "decay fails for {} products (first {}), probe fails at order {}",
                failed.len(),
                failed.first().map_or("none", |s| s.as_str()),
                p.failed_order().map_or("none".into(), |o| o.to_string())
            );
            sec.check(
                Check::flag("control-fails", subject, !r.passed() && !p.passed(), detail)
                    .with_witness(Some("negative control passed a gluing check".into())),
            );
        }
        (Err(e), _) | (_, Err(e)) => sec.check(errored("control-fails", subject, &e)),
    }
}
