use nalgebra::Matrix2;
use rand::Rng;
use rayon::prelude::*;

use conullity::connection::{christoffel_at, christoffel_oracle_xu, christoffel_oracle_xvi};
use conullity::curvature::{
    frenet_at, frenet_matrix_from_connection, initial_curvature_identities, one_over_a1_residual,
    plane_sec, riemann_at, riemann_oracle_xuu,
};
use conullity::metric::metric_at;
use conullity::{ModelSpec, Point};

use super::{bound_at, errored, fmt_point, split2, worst, Context};
use crate::report::{Check, Section};

pub fn run(ctx: &Context) -> Section {
    let mut sec = Section::new("curvature-oracles");
    for (name, spec) in &ctx.specs {
        spec_checks(ctx, name, spec, &mut sec);
    }
    sec
}

fn spec_checks(ctx: &Context, name: &str, spec: &ModelSpec, sec: &mut Section) {
    let tol = &ctx.cfg.tolerances;
    let s = &ctx.cfg.sampling;
    let n = spec.n();

    let cpts = ctx.random_points(spec, &format!("christoffel-{name}"), s.christoffel_points);
    let chris: Vec<conullity::Result<(f64, f64, Point)>> = cpts
        .par_iter()
        .map(|p| {
            let g = christoffel_at(spec, p)?;
            let scale = 1.0 + g.max_abs();
            let mut oracle = (g.column(0, 1) - christoffel_oracle_xu(spec, p)?).amax();
            for i in 1..=n {
                oracle =
                    oracle.max((g.column(0, 1 + i) - christoffel_oracle_xvi(spec, p, i)?).amax());
            }
            let mut leaf: f64 = 0.0;
            for k in 0..n + 2 {
                for i in 1..n + 2 {
                    for j in 1..n + 2 {
                        leaf = leaf.max(g.get(k, i, j).abs());
                    }
                }
            }
            Ok((oracle / scale, leaf, p.clone()))
        })
        .collect();
    let (oracle, leaf): (Vec<_>, Vec<_>) = split2(chris);
    let mut c = bound_at("christoffel-oracles", name, worst(oracle), tol.christoffel);
    c.detail = format!(
        "Gamma_xu and Gamma_xv_i vs general formula relative to 1 + max|Gamma|, {}",
        c.detail
    );
    sec.check(c);
    sec.check(bound_at(
        "leaf-symbols",
        name,
        worst(leaf),
        tol.leaf_symbols,
    ));

    let pts = ctx.random_points(spec, &format!("riemann-{name}"), s.points);
    let riemann: Vec<conullity::Result<(f64, f64, Point)>> = pts
        .par_iter()
        .map(|p| {
            let r = riemann_at(spec, p)?;
            let oracle = riemann_oracle_xuu(spec, p)?;
            let triple = (0..n + 2)
                .map(|l| (r.tensor.get(l, 0, 1, 1) - oracle[l]).abs())
                .fold(0.0, f64::max);
            let d = spec.eta().partials(p.x, p.u, 2);
            let xuux = (r.tensor.lowered(0, 1, 1, 0) + d.get(0, 0) * d.get(0, 2)).abs();
            Ok((triple, xuux, p.clone()))
        })
        .collect();
    let (triple, xuux): (Vec<_>, Vec<_>) = split2(riemann);
    sec.check(bound_at("riemann-xuu", name, worst(triple), tol.riemann));
    sec.check(bound_at("riemann-xuux", name, worst(xuux), tol.riemann));

    let frenet = worst(
        pts.par_iter()
            .map(|p| {
                let fr = frenet_at(spec, p)?;
                let conn = frenet_matrix_from_connection(spec, p)?;
                let m = metric_at(spec, p)?;
                let eta_u = spec.eta().partial(0, 1, p.x, p.u);
                let mut err = (fr.beta + eta_u / m.eta).abs() / (1.0 + fr.beta.abs());
                for (i, a) in fr.a.iter().enumerate() {
                    let want = spec.f_at(i + 1, 0, p.x) / m.eta;
                    err = err.max((a - want).abs() / (1.0 + want.abs()));
                }
                let scale = 1.0 + fr.frenet_derivative.amax();
                for a in 0..n + 2 {
                    for b in 1..n + 2 {
                        err = err.max((fr.frenet_derivative[(a, b)] - conn[(a, b)]).abs() / scale);
                    }
                }
                Ok((err, p.clone()))
            })
            .collect(),
    );
    let mut c = bound_at("frenet", name, frenet, tol.frenet);
    c.detail = format!(
        "a_i, beta and Frenet matrix vs connection (relative), {}",
        c.detail
    );
    sec.check(c);

    let covariant = worst(
        pts.par_iter()
            .map(|p| Ok((frenet_at(spec, p)?.covariant_residual, p.clone())))
            .collect(),
    );
    sec.check(bound_at(
        "covariant-recursion",
        name,
        covariant,
        tol.covariant,
    ));

    let nil: conullity::Result<Vec<bool>> = pts
        .par_iter()
        .map(|p| {
            let c = frenet_at(spec, p)?.splitting_matrix;
            Ok(c * c == Matrix2::zeros())
        })
        .collect();
    match nil {
        Ok(v) => {
            let bad = v.iter().position(|ok| !ok);
            sec.check(
                Check::flag(
                    "splitting-nilpotent",
                    name,
                    bad.is_none(),
                    format!("C_T^2 == 0 exactly at {} points", v.len()),
                )
                .with_witness(bad.map(|i| format!("C_T^2 != 0 at {}", fmt_point(&pts[i])))),
            );
        }
        Err(e) => sec.check(errored("splitting-nilpotent", name, &e)),
    }

    let ident = worst(
        pts.par_iter()
            .map(|p| {
                let (a, b) = initial_curvature_identities(spec, p)?;
                Ok((a.max(b), p.clone()))
            })
            .collect(),
    );
    sec.check(bound_at("curvature-identities", name, ident, tol.covariant));

    let inv = worst(
        pts.par_iter()
            .map(|p| Ok((one_over_a1_residual(spec, p)?.unwrap_or(0.0), p.clone())))
            .collect(),
    );
    sec.check(bound_at("one-over-a1", name, inv, tol.one_over_a1));

    plane_checks(ctx, name, spec, sec);
}

fn unit(v: Vec<f64>) -> Vec<f64> {
    let norm = v.iter().map(|c| c * c).sum::<f64>().sqrt();
    v.into_iter().map(|c| c / norm).collect()
}

fn plane_checks(ctx: &Context, name: &str, spec: &ModelSpec, sec: &mut Section) {
    let tol = &ctx.cfg.tolerances;
    let n = spec.n();
    let pts = ctx.random_points(spec, &format!("planes-{name}"), ctx.cfg.sampling.planes);
    let mut rng = ctx.rng(&format!("plane-vectors-{name}"));
    let rand_unit = |rng: &mut rand_chacha::ChaCha8Rng| {
        unit((0..n + 2).map(|_| rng.random_range(-1.0..1.0)).collect())
    };
    let planes: Vec<(Point, Vec<f64>, Vec<f64>, Vec<f64>, Vec<f64>)> = pts
        .into_iter()
        .map(|p| {
            let (a, b) = (rand_unit(&mut rng), rand_unit(&mut rng));
            let mut t = vec![0.0; n + 2];
            t[rng.random_range(0..n)] = 1.0;
            let other = rand_unit(&mut rng);
            (p, a, b, t, other)
        })
        .collect();
    let results: Vec<conullity::Result<(f64, f64, Point)>> = planes
        .par_iter()
        .map(|(p, a, b, t, other)| {
            let ps = plane_sec(spec, p, a, b)?;
            let ns = plane_sec(spec, p, t, other)?;
            let generic = (ps.formula - ps.contraction)
                .abs()
                .max((ns.formula - ns.contraction).abs());
            let null = ns.formula.abs();
            Ok((generic, null, p.clone()))
        })
        .collect();
    let (generic, null): (Vec<_>, Vec<_>) = split2(results);
    let mut c = bound_at("plane-sec", name, worst(generic), tol.plane_sec);
    c.detail = format!(
        "formula vs contraction on {} random and {} nullity planes, {}",
        planes.len(),
        planes.len(),
        c.detail
    );
    sec.check(c);
    let mut c = bound_at("nullity-planes", name, worst(null), tol.nullity_plane);
    c.detail = format!("plane_sec on planes containing some T_i, {}", c.detail);
    sec.check(c);
}
