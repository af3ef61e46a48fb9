use conullity::completeness::{
    completeness_certificate, jacobi_lower_bound, jacobi_minimum_numeric, Certificate,
    CertificateGrid, Verdict,
};
use conullity::fields::{builtin_ch_eta, constant, expr_2d};
use conullity::{Interval, ModelSpec};

use super::{errored, Context};
use crate::report::{Check, Section};

/// The worked examples run when no spec is configured.
fn worked_examples() -> Vec<(&'static str, ModelSpec, Verdict)> {
    let f = || vec![constant(1.0)];
    let real = Interval::real_line();
    vec![
        (
            "k-half",
            ModelSpec::new(f(), builtin_ch_eta(constant(0.5)).unwrap(), real).unwrap(),
            Verdict::CompleteByCor,
        ),
        (
            "exp-u",
            ModelSpec::new(f(), expr_2d("exp(u)").unwrap(), real).unwrap(),
            Verdict::CompleteByCor,
        ),
        (
            "exp-quadratic-x",
            ModelSpec::new(f(), expr_2d("exp(-(x^2+1)*u)").unwrap(), real).unwrap(),
            Verdict::Inconclusive,
        ),
        (
            "unit-interval",
            ModelSpec::new(
                f(),
                builtin_ch_eta(constant(0.5)).unwrap(),
                Interval { lo: 0.0, hi: 1.0 },
            )
            .unwrap(),
            Verdict::IncompleteDomain,
        ),
    ]
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".into(), |v| format!("{v:.6}"))
}

fn describe(name: &str, c: &Certificate, sec: &mut Section) {
    sec.line(format!("[{name}] verdict = {}", c.verdict.name()));
    sec.line(format!(
        "[{name}] binding point (x, u) = ({:.6}, {:.6}), max |k_gamma|/sqrt(|Scal|/2) = {:.6}",
        c.binding_point.0, c.binding_point.1, c.max_ratio
    ));
    sec.line(format!(
        "[{name}] epsilon = {}, Jacobi bound sqrt(1 - c^2) = {}, stated sqrt(1 - eps^2) = {}, sharp sqrt(eps(2 - eps)) = {}",
        opt(c.epsilon),
        opt(c.jacobi_lower_bound),
        opt(c.stated_constant),
        opt(c.sharp_constant)
    ));
    sec.line(format!(
        "[{name}] max Scal = {:.6}, max |k_gamma| = {:.6}, Lambda = {}",
        c.max_scal,
        c.max_abs_k,
        opt(c.lambda)
    ));
    if let Some(w) = &c.witness {
        sec.line(format!("[{name}] witness: {w}"));
    }
}

pub fn run(ctx: &Context) -> Section {
    let mut sec = Section::new("completeness");
    let d = &ctx.cfg.certificate;
    let grid = CertificateGrid {
        x_window: d.x_window,
        x_count: d.x_count,
        u_range: Interval {
            lo: d.u_range[0],
            hi: d.u_range[1],
        },
        u_count: d.u_count,
        lambda: d.lambda,
    };
    sec.line("verdicts are sufficient conditions only; Inconclusive does not claim incompleteness");

    if ctx.custom_spec {
        for (name, spec) in &ctx.specs {
            match completeness_certificate(spec, &grid) {
                Ok(c) => {
                    describe(name, &c, &mut sec);
                    sec.check(
                        Check::flag(
                            "certificate",
                            name,
                            c.verdict != Verdict::Inconclusive,
                            format!("verdict {}", c.verdict.name()),
                        )
                        .with_witness(c.witness.clone()),
                    );
                }
                Err(e) => sec.check(errored("certificate", name, &e)),
            }
        }
    } else {
        for (name, spec, want) in worked_examples() {
            match completeness_certificate(&spec, &grid) {
                Ok(c) => {
                    describe(name, &c, &mut sec);
                    sec.check(
                        Check::flag(
                            "certificate",
                            name,
                            c.verdict == want,
                            format!("verdict {} (expected {})", c.verdict.name(), want.name()),
                        )
                        .with_witness(c.witness.clone()),
                    );
                }
                Err(e) => sec.check(errored("certificate", name, &e)),
            }
        }
    }

    let count = d.c_values.max(2);
    let lambdas = [0.5, 1.0, 2.0];
    let mut worst: f64 = 0.0;
    let mut at = None;
    for i in 0..count {
        let c = -0.98 + 1.96 * i as f64 / (count - 1) as f64;
        let lambda = lambdas[i % lambdas.len()];
        let err = (jacobi_minimum_numeric(c, lambda) - jacobi_lower_bound(c)).abs();
        if !(err <= worst) {
            worst = err;
            at = Some(format!("c = {c:.6}, lambda = {lambda}: error {err:.3e}"));
        }
    }
    let mut check = Check::bound(
        "jacobi-minimum",
        "cosh + c sinh",
        worst,
        ctx.cfg.tolerances.jacobi_min,
    )
    .with_witness(at);
    check.detail = format!(
        "min_t cosh(lt) + c sinh(lt) vs sqrt(1 - c^2) on {count} c-values, {}",
        check.detail
    );
    sec.check(check);
    sec
}
