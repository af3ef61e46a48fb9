//! Ready-made family members, glue specs and random generators used by the
//! test suites and the command-line scenarios.

use std::sync::Arc;

use rand::Rng;

use crate::error::Result;
use crate::fields::{
    builtin_ch_eta, builtin_flat_bump, constant, expr_1d, expr_2d, PiecewiseLinear, Polynomial,
    Restricted, ScalarField1D, Sine, Sum,
};
use crate::gluing::GlueSpec;
use crate::interval::{Interval, IntervalSet};
use crate::metric::ModelSpec;

/// Curvature-homogeneous member: `f = (1, 2)`, `η = cosh u + 0.5 sinh u`.
pub fn curvature_homogeneous() -> ModelSpec {
    ModelSpec::new(
        vec![constant(1.0), constant(2.0)],
        builtin_ch_eta(constant(0.5)).unwrap(),
        Interval::real_line(),
    )
    .unwrap()
}

/// Five named members covering `n = 1..=3`, constant and varying `Scal`.
pub fn standard_specs() -> Vec<(&'static str, ModelSpec)> {
    let real = Interval::real_line();
    vec![
        ("curvature-homogeneous", curvature_homogeneous()),
        (
            "ch-cosine",
            ModelSpec::new(
                vec![
                    expr_1d("sin(x) + 2").unwrap(),
                    expr_1d("0.5*x^2 - 1").unwrap(),
                ],
                builtin_ch_eta(expr_1d("0.5*cos(x)").unwrap()).unwrap(),
                real,
            )
            .unwrap(),
        ),
        (
            "exp-quadratic",
            ModelSpec::new(
                vec![
                    expr_1d("sin(x) + 2").unwrap(),
                    expr_1d("0.5*x^2 - 1").unwrap(),
                ],
                expr_2d("exp(0.3*cos(x)*u + 0.2*u^2)").unwrap(),
                real,
            )
            .unwrap(),
        ),
        (
            "exp-linear",
            ModelSpec::new(
                vec![expr_1d("x").unwrap()],
                expr_2d("exp(-0.25*(x^2+1)*u)").unwrap(),
                real,
            )
            .unwrap(),
        ),
        (
            "bump-three",
            ModelSpec::new(
                vec![
                    builtin_flat_bump(0.0, 2.0, 1.5).unwrap(),
                    expr_1d("cos(2*x)").unwrap(),
                    constant(0.7),
                ],
                expr_2d("exp(0.4*sin(x)*u + 0.1*u^2)").unwrap(),
                Interval { lo: -3.0, hi: 3.0 },
            )
            .unwrap(),
        ),
    ]
}

pub fn standard_spec(name: &str) -> Option<ModelSpec> {
    standard_specs()
        .into_iter()
        .find(|(n, _)| *n == name)
        .map(|(_, s)| s)
}

/// Random member with `n` sinusoidal `f_i` and `η` of the form
/// `cosh u + k(x) sinh u` or `exp(k(x) u + c u²)`, `c > 0`, so that `Scal < 0`.
pub fn random_spec(rng: &mut impl Rng, n: usize) -> ModelSpec {
    let f: Vec<ScalarField1D> = (0..n)
        .map(|_| {
            Arc::new(Sine {
                amplitude: rng.random_range(0.2..2.0),
                frequency: rng.random_range(0.3..2.0),
                phase: rng.random_range(0.0..std::f64::consts::TAU),
                offset: rng.random_range(-1.0..1.0),
            }) as ScalarField1D
        })
        .collect();
    let amp = rng.random_range(0.1..0.9);
    let freq = rng.random_range(0.3..1.5);
    let eta = if rng.random_bool(0.5) {
        builtin_ch_eta(Arc::new(Sine {
            amplitude: amp,
            frequency: freq,
            phase: rng.random_range(0.0..1.0),
            offset: 0.0,
        }))
        .unwrap()
    } else {
        let c = rng.random_range(0.05..0.4);
        expr_2d(&format!("exp({amp}*cos({freq}*x)*u + {c}*u^2)")).unwrap()
    };
    ModelSpec::new(f, eta, Interval::real_line()).unwrap()
}

/// Turning angle with slope `±1`, switching sign at every boundary point of
/// `set` inside `[lo, hi]` and constant beyond.
pub fn kinked_turning_angle(set: &IntervalSet, lo: f64, hi: f64) -> Result<ScalarField1D> {
    let mut knots = vec![lo];
    knots.extend(
        set.boundary_points()
            .into_iter()
            .filter(|c| *c > lo && *c < hi),
    );
    knots.push(hi);
    let mut values = Vec::with_capacity(knots.len());
    let (mut h, mut slope) = (0.0, 1.0);
    values.push(h);
    for w in knots.windows(2) {
        h += slope * (w[1] - w[0]);
        slope = -slope;
        values.push(h);
    }
    Ok(Arc::new(PiecewiseLinear::new(knots, values)?))
}

/// `S` = complement of the depth-`depth` Cantor approximation, `f_1` a sum
/// of flat bumps on the bounded components, `f_2 = f_1 / 2`, and
/// `k_γ = 0.5 sin x`.
pub fn flat_bump_glue(depth: usize) -> Result<GlueSpec> {
    let set = IntervalSet::cantor_complement(depth)?;
    let bumps = |amp: f64| -> Result<ScalarField1D> {
        let parts = set
            .parts()
            .iter()
            .filter(|p| p.is_bounded())
            .map(|p| builtin_flat_bump(p.midpoint(), 0.5 * p.width(), amp))
            .collect::<Result<Vec<_>>>()?;
        Ok(Arc::new(Sum::new(parts)))
    };
    let f = vec![bumps(1.0)?, bumps(0.5)?];
    GlueSpec::with_curvature_homogeneous_eta(set, f, expr_1d("0.5*sin(x)")?)
}

/// `S = (0, 1)`, `f_1 = x²(1-x)²` (vanishing only to second order at the
/// ends) and `k_γ = 0.5 sin(ln(x(1-x)))`, whose `x`-derivative grows like
/// the inverse distance to the boundary.
pub fn order_two_control_glue() -> Result<GlueSpec> {
    let unit = Interval::new(0.0, 1.0)?;
    let f: ScalarField1D = Arc::new(Restricted::new(
        Arc::new(Polynomial::new(vec![0.0, 0.0, 1.0, -2.0, 1.0])),
        unit,
    ));
    GlueSpec::with_curvature_homogeneous_eta(
        IntervalSet::new(vec![unit])?,
        vec![f],
        expr_1d("0.5*sin(ln(x*(1-x)))")?,
    )
}
