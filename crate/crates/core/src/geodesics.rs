//! Geodesics, the exponential-map coordinates and the leaf invariant.

use nalgebra::DVector;

use crate::connection::christoffel_general;
use crate::curvature::frenet_at;
use crate::error::{Error, Result};
use crate::metric::{frame_from, inner, metric_at, CoordinateMetric, ModelSpec, Point, Tangent};
use crate::numeric::{rk4_step, simpson};

pub const DEFAULT_STEP: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq)]
pub struct GeodesicState {
    pub p: Point,
    /// Coordinate components `(ẋ, u̇, v̇_1, …)`.
    pub velocity: Vec<f64>,
    pub arc: f64,
}

fn geodesic_rhs(metric: &dyn CoordinateMetric, y: &[f64]) -> Result<Vec<f64>> {
    let d = metric.dim();
    let (q, v) = y.split_at(d);
    let gamma = christoffel_general(metric, q)?;
    let acc = gamma.contract(v, v);
    let mut out = v.to_vec();
    out.extend(acc.iter().map(|a| -a));
    Ok(out)
}

/// RK4 in the affine parameter; returns `(q, v)` after `steps` steps of `dt`,
/// or the last valid state and the failure.
fn affine_rk4(
    metric: &dyn CoordinateMetric,
    q0: &[f64],
    v0: &[f64],
    dt: f64,
    steps: usize,
    mut visit: impl FnMut(usize, &[f64]),
) -> std::result::Result<Vec<f64>, (Vec<f64>, Error)> {
    let mut y: Vec<f64> = q0.iter().chain(v0).copied().collect();
    visit(0, &y);
    let dom = metric.x_domain();
    for s in 0..steps {
        let failure = std::cell::RefCell::new(None);
        let f = |_t: f64, state: &[f64]| match geodesic_rhs(metric, state) {
            Ok(r) => r,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                vec![0.0; state.len()]
            }
        };
        let next = rk4_step(&f, s as f64 * dt, &y, dt);
        if let Some(e) = failure.into_inner() {
            return Err((y, e));
        }
        if !dom.contains(next[0]) {
            return Err((
                y,
                Error::OutsideDomain {
                    x: next[0],
                    lo: dom.lo,
                    hi: dom.hi,
                },
            ));
        }
        y = next;
        visit(s + 1, &y);
    }
    Ok(y)
}

/// Integrates `ẍ^k + Γ^k_{ij} ẋ^i ẋ^j = 0` from `start` for arc length
/// `length`, sampling every `step` of arc.
pub fn integrate_geodesic(
    spec: &ModelSpec,
    start: &GeodesicState,
    length: f64,
    step: f64,
) -> Result<Vec<GeodesicState>> {
    if !(step > 0.0) || !(length >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "need step > 0 and length >= 0, got step {step}, length {length}"
        )));
    }
    let m = metric_at(spec, &start.p)?;
    let v0 = DVector::from_vec(start.velocity.clone());
    let speed = inner(&m.g, &v0, &v0).sqrt();
    if speed == 0.0 {
        return Ok(vec![start.clone()]);
    }
    let dt = step / speed;
    let steps = (length / step).round() as usize;
    let d = spec.n() + 2;
    let mut traj = Vec::with_capacity(steps + 1);
    let res = affine_rk4(
        spec,
        &start.p.coords(),
        &start.velocity,
        dt,
        steps,
        |s, y| {
            traj.push(GeodesicState {
                p: Point::from_coords(&y[..d]),
                velocity: y[d..].to_vec(),
                arc: start.arc + s as f64 * step,
            });
        },
    );
    match res {
        Ok(_) => Ok(traj),
        Err((last, _)) => {
            let exit = Point::from_coords(&last[..d]);
            Err(Error::LeftDomain {
                trajectory: traj,
                exit,
            })
        }
    }
}

/// `max |g(γ', γ') - g(γ'(0), γ'(0))|` along a trajectory.
pub fn speed_drift(spec: &ModelSpec, traj: &[GeodesicState]) -> Result<f64> {
    let mut g0 = None;
    let mut worst: f64 = 0.0;
    for s in traj {
        let m = metric_at(spec, &s.p)?;
        let v = DVector::from_vec(s.velocity.clone());
        let n2 = inner(&m.g, &v, &v);
        let base = *g0.get_or_insert(n2);
        worst = worst.max((n2 - base).abs());
    }
    Ok(worst)
}

/// Endpoint of the geodesic with initial data `(q0, v0)` at unit affine time.
pub fn exp_general(
    metric: &dyn CoordinateMetric,
    q0: &[f64],
    v0: &[f64],
    max_step: f64,
) -> Result<Vec<f64>> {
    let norm = v0.iter().map(|v| v * v).sum::<f64>().sqrt();
    let steps = ((norm / max_step).ceil() as usize).max(1);
    let d = metric.dim();
    match affine_rk4(metric, q0, v0, 1.0 / steps as f64, steps, |_, _| {}) {
        Ok(y) => Ok(y[..d].to_vec()),
        Err((last, _)) => Err(Error::LeftDomain {
            trajectory: Vec::new(),
            exit: Point::from_coords(&last[..d]),
        }),
    }
}

/// `exp_{γ(x0)}(u e_1 + Σ v_i T_i)` for `w = (u, v_1, …, v_n)`, with the
/// frame at `γ(x0) = (x0, 0, …, 0)` equal to the coordinate frame there.
pub fn exp_map(spec: &ModelSpec, x0: f64, w: &[f64]) -> Result<Point> {
    let n = spec.n();
    if w.len() != n + 1 {
        return Err(Error::DimensionMismatch {
            expected: n + 1,
            got: w.len(),
        });
    }
    let base = Point::on_base(x0, n);
    metric_at(spec, &base)?;
    let mut v0 = vec![0.0];
    v0.extend_from_slice(w);
    Ok(Point::from_coords(&exp_general(
        spec,
        &base.coords(),
        &v0,
        DEFAULT_STEP,
    )?))
}

/// `J(t) = η(x, tu) e_2 - t v_1 f_1(x) e_1 + Σ_i t (v_{i-1} f_i - v_{i+1} f_{i+1}) T_i`
/// along `t ↦ φ(x, t w)`.
#[derive(Debug, Clone, PartialEq)]
pub struct JacobiClosedForm {
    pub t: f64,
    pub coeff_e2: f64,
    pub coeff_e1: f64,
    pub coeff_t: Vec<f64>,
}

impl JacobiClosedForm {
    pub fn new(spec: &ModelSpec, p: &Point, t: f64) -> Self {
        let n = spec.n();
        let f: Vec<f64> = (1..=n).map(|j| spec.f_at(j, 0, p.x)).collect();
        let b = crate::metric::b_coefficients(&f, p);
        Self {
            t,
            coeff_e2: spec.eta().value(p.x, t * p.u),
            coeff_e1: -t * p.v[0] * f[0],
            coeff_t: b[1..].iter().map(|bi| t * bi).collect(),
        }
    }

    /// Coordinate components at `φ(x, t w)`.
    pub fn to_coords(&self, spec: &ModelSpec, p: &Point) -> Result<Tangent> {
        let at = Point::new(p.x, self.t * p.u, p.v.iter().map(|v| self.t * v).collect());
        let frame = frame_from(&metric_at(spec, &at)?);
        let mut j = &frame[0] * self.coeff_e2 + &frame[1] * self.coeff_e1;
        for (i, c) in self.coeff_t.iter().enumerate() {
            j += &frame[2 + i] * *c;
        }
        Ok(j)
    }
}

#[derive(Debug, Clone)]
pub struct DphiReport {
    /// `∂φ/∂x` from the closed-form `J(1)`.
    pub closed_form: Tangent,
    /// `∂φ/∂x` from central differences of the exponential map.
    pub finite_difference: Tangent,
    /// `max |closed_form - finite_difference|`.
    pub residual: f64,
    /// Worst error of `⟨∂φ/∂x, ∂φ/∂x⟩ = η² + Σ b_j²`, `⟨∂φ/∂x, ∂φ/∂u⟩ = -v_1 f_1`,
    /// `⟨∂φ/∂x, ∂φ/∂v_i⟩ = b_i`.
    pub inner_product_residual: f64,
    /// Deviation of the Frenet-transported frame at `γ(x ± h)` from the
    /// coordinate frame.
    pub frame_drift: f64,
}

pub const DPHI_FD_STEP: f64 = 1e-4;

/// Frame `(e_1, T_1, …, T_n)` at `γ(x0 + h)` from the Frenet equations
/// `∇_{γ'} E_b = Σ_a M_{ab} E_a` started from the coordinate frame at `γ(x0)`.
fn transported_frame(spec: &ModelSpec, x0: f64, h: f64) -> Result<Vec<Tangent>> {
    let n = spec.n();
    let dim = n + 2;
    // state: full frame (e_2, e_1, T_1..T_n), each dim components
    let mut y = vec![0.0; dim * dim];
    for b in 0..dim {
        y[b * dim + b] = 1.0;
    }
    let steps = 16;
    let ds = h / steps as f64;
    let failure = std::cell::RefCell::new(None);
    let f = |s: f64, st: &[f64]| -> Vec<f64> {
        let p = Point::on_base(x0 + s, n);
        let (fr, gamma) = match (frenet_at(spec, &p), christoffel_general(spec, &p.coords())) {
            (Ok(a), Ok(b)) => (a, b),
            (Err(e), _) | (_, Err(e)) => {
                failure.borrow_mut().get_or_insert(e);
                return vec![0.0; st.len()];
            }
        };
        let mut xdot = vec![0.0; dim];
        xdot[0] = 1.0;
        let mut out = vec![0.0; dim * dim];
        for b in 0..dim {
            let wb = &st[b * dim..(b + 1) * dim];
            let corr = gamma.contract(&xdot, wb);
            for k in 0..dim {
                let mut acc = -corr[k];
                for a in 0..dim {
                    acc += fr.frenet_derivative[(a, b)] * st[a * dim + k];
                }
                out[b * dim + k] = acc;
            }
        }
        out
    };
    for i in 0..steps {
        y = rk4_step(&f, i as f64 * ds, &y, ds);
    }
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    Ok((1..dim)
        .map(|b| Tangent::from_column_slice(&y[b * dim..(b + 1) * dim]))
        .collect())
}

pub fn dphi_dx_check(spec: &ModelSpec, p: &Point) -> Result<DphiReport> {
    let n = spec.n();
    let jac = JacobiClosedForm::new(spec, p, 1.0);
    let closed_form = jac.to_coords(spec, p)?;

    let h = DPHI_FD_STEP;
    let mut w = vec![p.u];
    w.extend_from_slice(&p.v);
    let mut ends = Vec::with_capacity(2);
    let mut frame_drift: f64 = 0.0;
    for sign in [1.0, -1.0] {
        let frame = transported_frame(spec, p.x, sign * h)?;
        for (b, e) in frame.iter().enumerate() {
            let mut want = Tangent::zeros(n + 2);
            want[b + 1] = 1.0;
            frame_drift = frame_drift.max((e - want).amax());
        }
        let mut v0 = Tangent::zeros(n + 2);
        for (c, e) in w.iter().zip(&frame) {
            v0 += e * *c;
        }
        let q0 = Point::on_base(p.x + sign * h, n).coords();
        ends.push(DVector::from_vec(exp_general(
            spec,
            &q0,
            v0.as_slice(),
            DEFAULT_STEP,
        )?));
    }
    let finite_difference = (&ends[0] - &ends[1]) / (2.0 * h);
    let residual = (&closed_form - &finite_difference).amax();

    let m = metric_at(spec, p)?;
    let f: Vec<f64> = (1..=n).map(|j| spec.f_at(j, 0, p.x)).collect();
    let mut ip: f64 = 0.0;
    let want_xx = m.eta * m.eta + m.b.iter().map(|b| b * b).sum::<f64>();
    ip = ip.max((inner(&m.g, &closed_form, &closed_form) - want_xx).abs());
    for j in 0..=n {
        let mut dv = Tangent::zeros(n + 2);
        dv[1 + j] = 1.0;
        let want = if j == 0 { -p.v[0] * f[0] } else { m.b[j] };
        ip = ip.max((inner(&m.g, &closed_form, &dv) - want).abs());
    }
    Ok(DphiReport {
        closed_form,
        finite_difference,
        residual,
        inner_product_residual: ip,
        frame_drift,
    })
}

const REFINE: f64 = 1e-3;

/// `A = ∫ |a_1(γ) ⟨γ', e_2⟩| dt` along a polyline with non-decreasing `x`.
pub fn leaf_invariant_a(spec: &ModelSpec, path: &[Point]) -> Result<f64> {
    for w in path.windows(2) {
        if w[1].x < w[0].x {
            return Err(Error::NonMonotonePath {
                from: w[0].x,
                to: w[1].x,
            });
        }
    }
    let integrand = |p: &Point, dir: &Tangent| -> Result<f64> {
        let m = metric_at(spec, p)?;
        let e = &frame_from(&m)[0];
        let a1 = spec.f_at(1, 0, p.x) / m.eta;
        Ok((a1 * inner(&m.g, dir, e)).abs())
    };
    let mut total = 0.0;
    for w in path.windows(2) {
        let (a, b) = (w[0].coords(), w[1].coords());
        let dir = Tangent::from_iterator(a.len(), a.iter().zip(&b).map(|(p, q)| q - p));
        let len = dir.norm();
        if len == 0.0 {
            continue;
        }
        let at = |t: f64| {
            Point::from_coords(
                &a.iter()
                    .zip(&b)
                    .map(|(p, q)| p + t * (q - p))
                    .collect::<Vec<_>>(),
            )
        };
        let pieces = ((len / REFINE).ceil() as usize).max(1);
        for k in 0..pieces {
            let (t0, t1) = (k as f64 / pieces as f64, (k + 1) as f64 / pieces as f64);
            for (s0, s1) in split_at_sign_changes(|t| spec.f_at(1, 0, at(t).x), t0, t1) {
                let mut err = None;
                let v = simpson(
                    |t| match integrand(&at(t), &dir) {
                        Ok(v) => v,
                        Err(e) => {
                            err.get_or_insert(e);
                            0.0
                        }
                    },
                    s0,
                    s1,
                    2,
                );
                if let Some(e) = err {
                    return Err(e);
                }
                total += v;
            }
        }
    }
    Ok(total)
}

/// Splits `[t0, t1]` at a sign change of `f` located by bisection.
fn split_at_sign_changes(f: impl Fn(f64) -> f64, t0: f64, t1: f64) -> Vec<(f64, f64)> {
    let (f0, f1) = (f(t0), f(t1));
    if f0 == 0.0 || f1 == 0.0 || f0.signum() == f1.signum() {
        return vec![(t0, t1)];
    }
    let (mut lo, mut hi) = (t0, t1);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if f(mid).signum() == f0.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let r = 0.5 * (lo + hi);
    vec![(t0, r), (r, t1)]
}

/// `F_1(b) - F_1(a)` with `F_1' = |f_1|`.
pub fn abs_f1_integral(spec: &ModelSpec, a: f64, b: f64) -> f64 {
    let pieces = (((b - a).abs() / REFINE).ceil() as usize).max(1);
    let mut total = 0.0;
    for k in 0..pieces {
        let t0 = a + (b - a) * k as f64 / pieces as f64;
        let t1 = a + (b - a) * (k + 1) as f64 / pieces as f64;
        for (s0, s1) in split_at_sign_changes(|x| spec.f_at(1, 0, x), t0, t1) {
            total += simpson(|x| spec.f_at(1, 0, x).abs(), s0, s1, 4);
        }
    }
    total
}
