use conullity::fields::{EtaSolve, ScalarField1D};
use conullity::foliation::{
    build_turning_curve, build_turning_curve_with_limit, extract_eta, jacobi_cross_check,
    verify_foliation, SurfaceModel, TestRegion, TurningCurve, CONVEXITY_TOL, P2,
};
use conullity::{Interval, IntervalSet};

use super::{errored, Context};
use crate::config::FieldDecl;
use crate::report::{num, Check, Section, Table};

const SURFACE: SurfaceModel = SurfaceModel;
const START: (P2, P2) = ([0.0, 1.0], [1.0, 0.0]);

/// Foot point and distance to the unit semicircle `(tanh s, sech s)`,
/// via `z ↦ (1 + z)/(1 - z)` which maps it onto the imaginary axis.
pub(crate) fn semicircle_foot(p: P2) -> (f64, f64) {
    let (a, b) = (p[0], p[1]);
    let den = (1.0 - a).powi(2) + b * b;
    let wr = ((1.0 + a) * (1.0 - a) - b * b) / den;
    let wi = 2.0 * b / den;
    ((wr * wr + wi * wi).sqrt().ln(), (wr.abs() / wi).asinh())
}

fn label(d: &FieldDecl) -> String {
    match d {
        FieldDecl::Constant { value } => format!("H = {value}"),
        FieldDecl::Expr { expr } => format!("H = {expr}"),
        FieldDecl::Polynomial { coeffs } => format!("H = poly{coeffs:?}"),
        FieldDecl::Sine {
            amplitude,
            frequency,
            phase,
            offset,
        } => format!("H = {amplitude} sin({frequency} s + {phase}) + {offset}"),
        FieldDecl::FlatBump {
            center,
            radius,
            amplitude,
        } => format!("H = bump({center}, {radius}, {amplitude})"),
    }
}

fn is_zero(d: &FieldDecl) -> bool {
    matches!(d, FieldDecl::Constant { value } if *value == 0.0)
}

pub fn run(ctx: &Context) -> Section {
    let mut sec = Section::new("foliate");
    let f = &ctx.cfg.foliation;
    let s_range = Interval {
        lo: f.s_range[0],
        hi: f.s_range[1],
    };
    let region = TestRegion::Fermi {
        s: Interval {
            lo: f.region_s[0],
            hi: f.region_s[1],
        },
        u: Interval {
            lo: f.region_u[0],
            hi: f.region_u[1],
        },
    };
    for (k, decl) in f.turning.iter().enumerate() {
        let subject = label(decl);
        let h = match decl.build("foliation.turning") {
            Ok(h) => h,
            Err(e) => {
                sec.check(Check::flag(
                    "curve-residuals",
                    &subject,
                    false,
                    e.to_string(),
                ));
                continue;
            }
        };
        let curve =
            match build_turning_curve(&SURFACE, h.clone(), START.0, START.1, s_range, f.step) {
                Ok(c) => c,
                Err(e) => {
                    sec.check(errored("curve-residuals", &subject, &e));
                    continue;
                }
            };
        curve_checks(ctx, k, &subject, &curve, &region, is_zero(decl), &mut sec);
        eta_checks(ctx, &subject, &curve, &mut sec);
    }
    for decl in &f.controls {
        let subject = label(decl);
        let res = decl
            .build("foliation.controls")
            .map_err(|e| e.to_string())
            .and_then(|h: ScalarField1D| {
                build_turning_curve_with_limit(
                    &SURFACE,
                    h,
                    START.0,
                    START.1,
                    s_range,
                    f.step,
                    f64::INFINITY,
                )
                .map_err(|e| e.to_string())
            });
        match res {
            Ok(curve) => {
                let r = verify_foliation(
                    &SURFACE,
                    &curve,
                    &region,
                    f.samples,
                    ctx.seed(&format!("control-{subject}")),
                );
                let detail = match &r.witness {
                    Some((p, why)) => {
                        format!("failed as expected near ({:.6}, {:.6}): {why}", p[0], p[1])
                    }
                    None => "unexpectedly foliates".into(),
                };
                sec.check(
                    Check::flag("control-fails", &subject, !r.passed(), detail)
                        .with_witness(Some("negative control passed the foliation check".into())),
                );
            }
            Err(e) => sec.check(Check::flag("control-fails", &subject, false, e)),
        }
    }
    sec
}

fn curve_checks(
    ctx: &Context,
    k: usize,
    subject: &str,
    curve: &TurningCurve,
    region: &TestRegion,
    geodesic: bool,
    sec: &mut Section,
) {
    let f = &ctx.cfg.foliation;
    let tol = &ctx.cfg.tolerances;
    let (speed, angle_fd) = curve.fd_residuals();
    let worst = speed.max(angle_fd).max(curve.angle_residual());
    let mut c = Check::bound("curve-residuals", subject, worst, tol.foot);
    c.detail = format!(
        "unit speed, turning angle and frame drift {:.3e}, {}",
        curve.frame_norm_drift(),
        c.detail
    );
    sec.check(c);

    let r = verify_foliation(
        &SURFACE,
        curve,
        region,
        f.samples,
        ctx.seed(&format!("foliate-{subject}")),
    );
    let witness = r
        .witness
        .as_ref()
        .map(|(p, why)| format!("at ({:.6}, {:.6}): {why}", p[0], p[1]));
    let unique = r
        .samples
        .iter()
        .all(|s| s.local_minima == 1 && !s.foot_at_end);
    sec.check(
        Check::flag(
            "unique-foot",
            subject,
            unique,
            format!(
                "{} samples, max local minima {}",
                r.samples.len(),
                r.max_local_minima()
            ),
        )
        .with_witness(witness.clone()),
    );
    let margin = r.min_convexity_margin();
    sec.check(
        Check::flag(
            "cosh-convexity",
            subject,
            margin >= -CONVEXITY_TOL,
            format!("min (cosh d)'' - e^(-d) = {margin:.3e} (tol -{CONVEXITY_TOL:.1e})"),
        )
        .with_witness(witness),
    );
    if geodesic {
        let (mut err, mut at) = (0.0_f64, None);
        for s in &r.samples {
            let (fs, d) = semicircle_foot(s.point);
            let e = (s.foot_s - fs).abs().max((s.distance - d).abs());
            if !(e <= err) {
                err = e;
                at = Some(format!(
                    "at ({:.6}, {:.6}): foot {:.9} vs {fs:.9}",
                    s.point[0], s.point[1], s.foot_s
                ));
            }
        }
        let mut c = Check::bound("closed-form-foot", subject, err, tol.foot).with_witness(at);
        c.detail = format!(
            "foot point and distance vs Moebius projection, {}",
            c.detail
        );
        sec.check(c);
    }

    let mut curve_t = Table::new(format!("curve-{k}.csv"), &["s", "a", "b", "angle"]);
    for (i, row) in curve.rows().iter().enumerate() {
        if i % f.export_every.max(1) == 0 || i + 1 == curve.len() {
            curve_t.push_numbers(row);
        }
    }
    let mut foot_t = Table::new(
        format!("foot-{k}.csv"),
        &["point_a", "point_b", "foot_s", "distance"],
    );
    for s in &r.samples {
        foot_t.push(vec![
            num(s.point[0]),
            num(s.point[1]),
            num(s.foot_s),
            num(s.distance),
        ]);
    }
    sec.tables.push(curve_t);
    sec.tables.push(foot_t);
}

fn eta_checks(ctx: &Context, subject: &str, curve: &TurningCurve, sec: &mut Section) {
    let tol = ctx.cfg.tolerances.eta_extraction;
    let grid = EtaSolve {
        x_range: Interval { lo: -1.0, hi: 1.0 },
        x_nodes: 21,
        u_range: Interval { lo: -1.5, hi: 1.5 },
        step: 1e-3,
    };
    let smooth = IntervalSet::new(vec![Interval::real_line()]).expect("real line");
    let res = extract_eta(&SURFACE, curve, &smooth, grid).and_then(|e| {
        Ok((
            e.closed_form_residual,
            jacobi_cross_check(&SURFACE, curve, &e, 20, 1.5, 1e-3)?,
        ))
    });
    match res {
        Ok((closed, j)) => {
            let worst = closed.max(j.max_eta_error).max(j.max_orthogonality);
            let mut c = Check::bound("eta-extraction", subject, worst, tol);
            c.detail = format!(
                "cosh u + k sinh u residual {closed:.3e}, |J| - eta {:.3e}, <J, d_u> {:.3e} over {} geodesics, {}",
                j.max_eta_error, j.max_orthogonality, j.geodesics, c.detail
            );
            sec.check(c);
        }
        Err(e) => sec.check(errored("eta-extraction", subject, &e)),
    }
}
