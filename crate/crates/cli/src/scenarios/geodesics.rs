use nalgebra::DVector;
use rand::Rng;
use rayon::prelude::*;

use conullity::geodesics::{dphi_dx_check, exp_map, integrate_geodesic, GeodesicState};
use conullity::metric::{inner, metric_at, orthonormal_frame, Tangent};
use conullity::{Error, ModelSpec, Point};

use super::{bound_at, errored, split2, worst, Context};
use crate::report::{Check, Section, Table};

pub fn run(ctx: &Context) -> Section {
    let mut sec = Section::new("geodesics");
    for (name, spec) in &ctx.specs {
        exp_checks(ctx, name, spec, &mut sec);
        trajectories(ctx, name, spec, &mut sec);
        dphi_checks(ctx, name, spec, &mut sec);
    }
    sec
}

fn exp_checks(ctx: &Context, name: &str, spec: &ModelSpec, sec: &mut Section) {
    let g = &ctx.cfg.geodesics;
    let n = spec.n();
    let xr = ctx.x_range(spec, ctx.cfg.sampling.x_range);
    let mut rng = ctx.rng(&format!("exp-{name}"));
    let cases: Vec<(f64, Vec<f64>)> = (0..g.exp_samples)
        .map(|_| {
            let x0 = rng.random_range(xr.lo..xr.hi);
            let dir: Vec<f64> = (0..=n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let norm = dir.iter().map(|c| c * c).sum::<f64>().sqrt();
            let r = g.max_norm * rng.random_range(0.0..1.0_f64).sqrt();
            (x0, dir.iter().map(|c| c * r / norm).collect())
        })
        .collect();
    let res = worst(
        cases
            .par_iter()
            .map(|(x0, w)| {
                let q = exp_map(spec, *x0, w)?;
                let mut err = (q.x - x0).abs().max((q.u - w[0]).abs());
                for i in 0..n {
                    err = err.max((q.v[i] - w[i + 1]).abs());
                }
                Ok((err, Point::new(*x0, w[0], w[1..].to_vec())))
            })
            .collect(),
    );
    let mut c = bound_at("exp-map", name, res, ctx.cfg.tolerances.exp_map);
    c.detail = format!(
        "exp_(x0)(w) vs (x0, w) for {} vectors with |w| <= {}, {}",
        cases.len(),
        g.max_norm,
        c.detail
    );
    sec.check(c);
}

fn trajectories(ctx: &Context, name: &str, spec: &ModelSpec, sec: &mut Section) {
    let g = &ctx.cfg.geodesics;
    let n = spec.n();
    let starts = ctx.random_points(spec, &format!("geodesic-starts-{name}"), g.trajectories);
    let mut rng = ctx.rng(&format!("geodesic-dirs-{name}"));
    let dirs: Vec<Vec<f64>> = starts
        .iter()
        .map(|_| {
            let c: Vec<f64> = (0..n + 2).map(|_| rng.random_range(-1.0..1.0)).collect();
            let norm = c.iter().map(|v| v * v).sum::<f64>().sqrt();
            c.into_iter().map(|v| v / norm).collect()
        })
        .collect();
    let runs: Vec<Result<(Vec<GeodesicState>, Option<String>), Error>> = starts
        .par_iter()
        .zip(&dirs)
        .map(|(p, c)| {
            let frame = orthonormal_frame(spec, p)?;
            let v = frame
                .iter()
                .zip(c)
                .fold(Tangent::zeros(n + 2), |acc, (e, k)| acc + e * *k);
            let start = GeodesicState {
                p: p.clone(),
                velocity: v.as_slice().to_vec(),
                arc: 0.0,
            };
            match integrate_geodesic(spec, &start, g.length, g.step) {
                Ok(t) => Ok((t, None)),
                Err(Error::LeftDomain { trajectory, exit }) => Ok((
                    trajectory,
                    Some(format!("left the domain at x = {:.6}", exit.x)),
                )),
                Err(e) => Err(e),
            }
        })
        .collect();

    let mut worst_drift: f64 = 0.0;
    let mut worst_at = None;
    for (k, run) in runs.into_iter().enumerate() {
        let (traj, note) = match run {
            Ok(r) => r,
            Err(e) => {
                sec.check(errored("speed-drift", name, &e));
                continue;
            }
        };
        if let Some(note) = note {
            sec.line(format!(
                "[{name}] trajectory {k} {note} after arc {:.3}",
                traj.last().map_or(0.0, |s| s.arc)
            ));
        }
        let mut header = vec!["arc".to_string(), "x".into(), "u".into()];
        header.extend((1..=n).map(|i| format!("v_{i}")));
        header.push("speed_error".into());
        let mut table = Table::with_header(format!("geodesic-{name}-{k}.csv"), header);
        let mut g0 = None;
        for (i, s) in traj.iter().enumerate() {
            let err = match metric_at(spec, &s.p) {
                Ok(m) => {
                    let v = DVector::from_vec(s.velocity.clone());
                    let n2 = inner(&m.g, &v, &v);
                    n2 - *g0.get_or_insert(n2)
                }
                Err(_) => f64::NAN,
            };
            let length = s.arc.max(1.0);
            if !(err.abs() / length <= worst_drift) {
                worst_drift = err.abs() / length;
                worst_at = Some(format!(
                    "trajectory {k}, arc {:.3}: |g(v,v) - g0| = {:.3e}",
                    s.arc,
                    err.abs()
                ));
            }
            if i % g.export_every.max(1) == 0 || i + 1 == traj.len() {
                let mut row = vec![s.arc, s.p.x, s.p.u];
                row.extend(&s.p.v);
                row.push(err);
                table.push_numbers(&row);
            }
        }
        sec.tables.push(table);
    }
    let mut c = Check::bound(
        "speed-drift",
        name,
        worst_drift,
        ctx.cfg.tolerances.speed_drift,
    )
    .with_witness(worst_at);
    c.detail = format!(
        "{} unit-speed geodesics, length {}, step {}: drift per unit length {}",
        g.trajectories, g.length, g.step, c.detail
    );
    sec.check(c);
}

fn dphi_checks(ctx: &Context, name: &str, spec: &ModelSpec, sec: &mut Section) {
    let tol = &ctx.cfg.tolerances;
    let pts = ctx.random_points(spec, &format!("dphi-{name}"), ctx.cfg.geodesics.dphi_points);
    let rows: Vec<conullity::Result<(f64, f64, Point)>> = pts
        .par_iter()
        .map(|p| {
            let r = dphi_dx_check(spec, p)?;
            Ok((r.residual, r.inner_product_residual, p.clone()))
        })
        .collect();
    let (res, ip) = split2(rows);
    sec.check(bound_at("dphi", name, worst(res), tol.dphi));
    sec.check(bound_at(
        "dphi-inner-products",
        name,
        worst(ip),
        tol.inner_products,
    ));
}
