//! Curves of prescribed turning angle on the hyperbolic plane, the foliation
//! by their orthogonal geodesics, and the resulting `η(x, u)`.
//!
//! The surface is the upper half-plane `{(a, b) : b > 0}` with metric
//! `(da² + db²) / b²`, so `sec = -1` and `Scal = -2`.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fields::{
    constant_2d, eta_from_scal, EtaFromScal, EtaSolve, Field1D, Field2D, SampledField1D,
    ScalarField1D, ScalarField2D,
};
use crate::interval::{Interval, IntervalSet};
use crate::numeric::{fd_weights, golden_section};

pub type P2 = [f64; 2];

const MIN_HEIGHT: f64 = 1e-12;

/// Constant curvature `-1` model surface.
#[derive(Debug, Clone, Copy, Default)]
pub struct SurfaceModel;

impl SurfaceModel {
    pub fn hyperbolic() -> Self {
        SurfaceModel
    }

    pub fn scal(&self) -> f64 {
        -2.0
    }

    pub fn distance(&self, p: P2, q: P2) -> f64 {
        self.cosh_distance(p, q).acosh()
    }

    pub fn cosh_distance(&self, p: P2, q: P2) -> f64 {
        let d2 = (p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2);
        (1.0 + d2 / (2.0 * p[1] * q[1])).max(1.0)
    }

    pub fn inner(&self, p: P2, x: P2, y: P2) -> f64 {
        (x[0] * y[0] + x[1] * y[1]) / (p[1] * p[1])
    }

    pub fn norm(&self, p: P2, x: P2) -> f64 {
        self.inner(p, x, x).sqrt()
    }

    /// `Γ(X, Y)` at `p`.
    pub fn christoffel(&self, p: P2, x: P2, y: P2) -> P2 {
        let b = p[1];
        [
            -(x[0] * y[1] + x[1] * y[0]) / b,
            (x[0] * y[0] - x[1] * y[1]) / b,
        ]
    }

    /// Rotation by a quarter turn; an isometry of each tangent plane.
    pub fn rotate(&self, v: P2) -> P2 {
        [-v[1], v[0]]
    }

    pub fn unit(&self, p: P2, v: P2) -> P2 {
        let n = self.norm(p, v);
        [v[0] / n, v[1] / n]
    }

    /// RK4 geodesic `(position, velocity)` samples at `0, step, …, length`.
    pub fn geodesic(&self, p: P2, v: P2, length: f64, step: f64) -> Vec<(P2, P2)> {
        let steps = (length.abs() / step).round().max(1.0) as usize;
        let h = length / steps as f64;
        let rhs = |y: [f64; 4]| -> [f64; 4] {
            let g = self.christoffel([y[0], y[1]], [y[2], y[3]], [y[2], y[3]]);
            [y[2], y[3], -g[0], -g[1]]
        };
        let mut y = [p[0], p[1], v[0], v[1]];
        let mut out = Vec::with_capacity(steps + 1);
        out.push((p, v));
        for _ in 0..steps {
            y = rk4_4(&|_, y| rhs(y), 0.0, y, h);
            out.push(([y[0], y[1]], [y[2], y[3]]));
        }
        out
    }

    pub fn exp(&self, p: P2, v: P2, step: f64) -> P2 {
        let len = self.norm(p, v);
        if len == 0.0 {
            return p;
        }
        let unit = [v[0] / len, v[1] / len];
        self.geodesic(p, unit, len, step).last().unwrap().0
    }
}

fn rk4_4(f: &impl Fn(f64, [f64; 4]) -> [f64; 4], t: f64, y: [f64; 4], h: f64) -> [f64; 4] {
    let add = |a: [f64; 4], b: [f64; 4], c: f64| {
        [
            a[0] + c * b[0],
            a[1] + c * b[1],
            a[2] + c * b[2],
            a[3] + c * b[3],
        ]
    };
    let k1 = f(t, y);
    let k2 = f(t + 0.5 * h, add(y, k1, 0.5 * h));
    let k3 = f(t + 0.5 * h, add(y, k2, 0.5 * h));
    let k4 = f(t + h, add(y, k3, h));
    let mut out = y;
    for i in 0..4 {
        out[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    out
}

/// Arc-length samples of a curve together with a parallel frame `E`.
#[derive(Debug, Clone)]
pub struct TurningCurve {
    pub s: Vec<f64>,
    pub position: Vec<P2>,
    pub tangent: Vec<P2>,
    /// `N = J T`.
    pub normal: Vec<P2>,
    pub frame: Vec<P2>,
    /// `H(s) - H(0)` at each node.
    pub turning: Vec<f64>,
    pub step: f64,
    pub h: ScalarField1D,
}

impl TurningCurve {
    pub fn len(&self) -> usize {
        self.s.len()
    }

    pub fn is_empty(&self) -> bool {
        self.s.is_empty()
    }

    pub fn range(&self) -> Interval {
        Interval {
            lo: self.s[0],
            hi: *self.s.last().unwrap(),
        }
    }

    fn index_near(&self, s: f64) -> usize {
        (((s - self.s[0]) / self.step).round().max(0.0) as usize).min(self.len() - 1)
    }

    /// Cubic Hermite interpolation of the position.
    pub fn position_at(&self, s: f64) -> P2 {
        let n = self.len();
        let i = (((s - self.s[0]) / self.step).floor().max(0.0) as usize).min(n - 2);
        let h = self.step;
        let t = (s - self.s[i]) / h;
        let (h00, h10, h01, h11) = (
            2.0 * t.powi(3) - 3.0 * t * t + 1.0,
            t.powi(3) - 2.0 * t * t + t,
            -2.0 * t.powi(3) + 3.0 * t * t,
            t.powi(3) - t * t,
        );
        let mut out = [0.0; 2];
        for c in 0..2 {
            out[c] = h00 * self.position[i][c]
                + h10 * h * self.tangent[i][c]
                + h01 * self.position[i + 1][c]
                + h11 * h * self.tangent[i + 1][c];
        }
        out
    }

    /// Signed angle from `E` to the stored tangent.
    pub fn frame_angle(&self, i: usize) -> f64 {
        let surface = SurfaceModel;
        let p = self.position[i];
        let e = self.frame[i];
        let t = self.tangent[i];
        surface
            .inner(p, t, surface.rotate(e))
            .atan2(surface.inner(p, t, e))
    }

    /// `max | |E|_g - 1 |`.
    pub fn frame_norm_drift(&self) -> f64 {
        let surface = SurfaceModel;
        self.position
            .iter()
            .zip(&self.frame)
            .map(|(p, e)| (surface.norm(*p, *e) - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// `max |frame angle - (H(s) - H(0))|` over the stored tangents.
    pub fn angle_residual(&self) -> f64 {
        (0..self.len())
            .map(|i| wrap(self.frame_angle(i) - self.turning[i]).abs())
            .fold(0.0, f64::max)
    }

    /// Velocity from a five-point difference of the positions at node `i`.
    pub fn velocity_fd(&self, i: usize) -> Option<P2> {
        if i < 2 || i + 2 >= self.len() {
            return None;
        }
        let w = [1.0, -8.0, 0.0, 8.0, -1.0];
        let mut v = [0.0; 2];
        for (k, wk) in w.iter().enumerate() {
            for c in 0..2 {
                v[c] += wk * self.position[i + k - 2][c];
            }
        }
        Some([v[0] / (12.0 * self.step), v[1] / (12.0 * self.step)])
    }

    /// Speed and turning-angle residuals with the velocity taken from
    /// position differences instead of the stored tangent.
    pub fn fd_residuals(&self) -> (f64, f64) {
        let surface = SurfaceModel;
        let mut speed: f64 = 0.0;
        let mut angle: f64 = 0.0;
        for i in 2..self.len().saturating_sub(2) {
            let v = self.velocity_fd(i).unwrap();
            let p = self.position[i];
            let e = self.frame[i];
            speed = speed.max((surface.norm(p, v) - 1.0).abs());
            let theta = surface
                .inner(p, v, surface.rotate(e))
                .atan2(surface.inner(p, v, e));
            angle = angle.max(wrap(theta - self.turning[i]).abs());
        }
        (speed, angle)
    }

    /// `(s, a, b, angle)` rows.
    pub fn rows(&self) -> Vec<[f64; 4]> {
        (0..self.len())
            .map(|i| {
                [
                    self.s[i],
                    self.position[i][0],
                    self.position[i][1],
                    self.frame_angle(i),
                ]
            })
            .collect()
    }
}

fn wrap(a: f64) -> f64 {
    let tau = std::f64::consts::TAU;
    a - tau * (a / tau).round()
}

/// Checks `|H(s) - H(t)| <= limit |s - t|` on consecutive points of a grid
/// of spacing `step / 2` covering `range`.
pub fn check_lipschitz(h: &dyn Field1D, range: Interval, step: f64, limit: f64) -> Result<()> {
    let count = ((range.width() / (0.5 * step)).ceil() as usize).max(1);
    let ds = range.width() / count as f64;
    let mut prev = (range.lo, h.value(range.lo));
    for i in 1..=count {
        let s = range.lo + i as f64 * ds;
        let v = h.value(s);
        let jump = (v - prev.1).abs();
        if jump > limit * (s - prev.0) * (1.0 + 1e-9) + 1e-12 {
            return Err(Error::LipschitzViolation {
                s: prev.0,
                t: s,
                jump,
                limit,
            });
        }
        prev = (s, v);
    }
    Ok(())
}

/// Builds the unit-speed curve with `γ(0) = p0`, `γ'(0) = v0` whose tangent
/// makes angle `H(s) - H(0)` with a parallel frame, for `H` Lipschitz-1.
pub fn build_turning_curve(
    surface: &SurfaceModel,
    h: ScalarField1D,
    p0: P2,
    v0: P2,
    s_range: Interval,
    step: f64,
) -> Result<TurningCurve> {
    build_turning_curve_with_limit(surface, h, p0, v0, s_range, step, 1.0)
}

/// As [`build_turning_curve`] with a caller-chosen Lipschitz bound, for
/// controls that deliberately exceed 1.
pub fn build_turning_curve_with_limit(
    surface: &SurfaceModel,
    h: ScalarField1D,
    p0: P2,
    v0: P2,
    s_range: Interval,
    step: f64,
    lipschitz_limit: f64,
) -> Result<TurningCurve> {
    if !(step > 0.0) || !s_range.is_bounded() || !s_range.contains_closed(0.0) {
        return Err(Error::InvalidParameter(
            "turning curve needs step > 0 and a bounded s-range containing 0".into(),
        ));
    }
    if !(p0[1] > 0.0) {
        return Err(Error::LeftHalfPlane { s: 0.0 });
    }
    let speed = surface.norm(p0, v0);
    if (speed - 1.0).abs() > 1e-9 {
        return Err(Error::NotUnit { norm: speed });
    }
    check_lipschitz(h.as_ref(), s_range, step, lipschitz_limit)?;

    let h0 = h.value(0.0);
    let theta = |s: f64| h.value(s) - h0;
    let rhs = |s: f64, y: [f64; 4]| -> [f64; 4] {
        let p = [y[0], y[1]];
        let e = [y[2], y[3]];
        let je = surface.rotate(e);
        let (sn, cs) = theta(s).sin_cos();
        let t = [cs * e[0] + sn * je[0], cs * e[1] + sn * je[1]];
        let g = surface.christoffel(p, t, e);
        [t[0], t[1], -g[0], -g[1]]
    };

    let up = (s_range.hi / step).round() as usize;
    let down = (-s_range.lo / step).round() as usize;
    let march = |count: usize, dir: f64| -> Result<Vec<(f64, [f64; 4])>> {
        let mut y = [p0[0], p0[1], v0[0], v0[1]];
        let mut out = Vec::with_capacity(count);
        for k in 0..count {
            let s = dir * k as f64 * step;
            y = rk4_4(&rhs, s, y, dir * step);
            let s_next = dir * (k + 1) as f64 * step;
            if !(y[1] > MIN_HEIGHT) || !y.iter().all(|v| v.is_finite()) {
                return Err(Error::LeftHalfPlane { s: s_next });
            }
            out.push((s_next, y));
        }
        Ok(out)
    };
    let mut states = march(down, -1.0)?;
    states.reverse();
    states.push((0.0, [p0[0], p0[1], v0[0], v0[1]]));
    states.extend(march(up, 1.0)?);

    let mut curve = TurningCurve {
        s: Vec::with_capacity(states.len()),
        position: Vec::with_capacity(states.len()),
        tangent: Vec::with_capacity(states.len()),
        normal: Vec::with_capacity(states.len()),
        frame: Vec::with_capacity(states.len()),
        turning: Vec::with_capacity(states.len()),
        step,
        h: h.clone(),
    };
    for (s, y) in states {
        let e = [y[2], y[3]];
        let je = surface.rotate(e);
        let th = theta(s);
        let (sn, cs) = th.sin_cos();
        let t = [cs * e[0] + sn * je[0], cs * e[1] + sn * je[1]];
        curve.s.push(s);
        curve.position.push([y[0], y[1]]);
        curve.tangent.push(t);
        curve.normal.push(surface.rotate(t));
        curve.frame.push(e);
        curve.turning.push(th);
    }
    Ok(curve)
}

/// Where [`verify_foliation`] draws its sample points.
#[derive(Debug, Clone, Copy)]
pub enum TestRegion {
    /// Uniform in `a ∈ a`, `b ∈ b`.
    Box { a: Interval, b: Interval },
    /// `exp_{γ(s)}(u N(s))` with `s` on a curve node in `s` and `u` uniform.
    Fermi { s: Interval, u: Interval },
}

#[derive(Debug, Clone, Copy)]
pub struct FootSample {
    pub point: P2,
    pub foot_s: f64,
    pub distance: f64,
    /// Interior local minima of `s ↦ d(p, γ(s))` on the curve grid.
    pub local_minima: usize,
    /// `min_i (L''_i - e^{-δ_i})` with `L = cosh δ`.
    pub convexity_margin: f64,
    pub foot_at_end: bool,
}

#[derive(Debug, Clone)]
pub struct FoliationReport {
    pub samples: Vec<FootSample>,
    pub convexity_tol: f64,
    /// First failing sample, with the reason.
    pub witness: Option<(P2, String)>,
}

impl FoliationReport {
    pub fn passed(&self) -> bool {
        self.witness.is_none()
    }

    pub fn max_local_minima(&self) -> usize {
        self.samples
            .iter()
            .map(|s| s.local_minima)
            .max()
            .unwrap_or(0)
    }

    pub fn min_convexity_margin(&self) -> f64 {
        self.samples
            .iter()
            .map(|s| s.convexity_margin)
            .fold(f64::INFINITY, f64::min)
    }

    /// `Err(FoliationFailure)` carrying the witness when a sample failed.
    pub fn ensure(self) -> Result<Self> {
        match &self.witness {
            None => Ok(self),
            Some((p, reason)) => Err(Error::FoliationFailure {
                a: p[0],
                b: p[1],
                reason: reason.clone(),
            }),
        }
    }
}

pub const CONVEXITY_TOL: f64 = 1e-3;

fn sample_point(
    surface: &SurfaceModel,
    curve: &TurningCurve,
    region: &TestRegion,
    rng: &mut ChaCha8Rng,
) -> P2 {
    match *region {
        TestRegion::Box { a, b } => [rng.random_range(a.lo..a.hi), rng.random_range(b.lo..b.hi)],
        TestRegion::Fermi { s, u } => {
            let i = curve.index_near(rng.random_range(s.lo..s.hi));
            let d = rng.random_range(u.lo..u.hi);
            let n = curve.normal[i];
            surface.exp(curve.position[i], [d * n[0], d * n[1]], 1e-3)
        }
    }
}

fn foot_sample(surface: &SurfaceModel, curve: &TurningCurve, p: P2) -> FootSample {
    let l: Vec<f64> = curve
        .position
        .iter()
        .map(|q| surface.cosh_distance(p, *q))
        .collect();
    let n = l.len();
    // collapse exact plateaus before looking for local minima
    let mut levels: Vec<(usize, f64)> = Vec::with_capacity(n);
    for (i, v) in l.iter().enumerate() {
        if levels.last().is_none_or(|last| last.1 != *v) {
            levels.push((i, *v));
        }
    }
    let local_minima = (1..levels.len().saturating_sub(1))
        .filter(|&k| levels[k].1 < levels[k - 1].1 && levels[k].1 < levels[k + 1].1)
        .count();
    let (imin, _) = l
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .unwrap();
    let foot_at_end = imin == 0 || imin == n - 1;
    let h2 = curve.step * curve.step;
    let convexity_margin = (1..n - 1)
        .map(|i| {
            (l[i - 1] - 2.0 * l[i] + l[i + 1]) / h2 - 1.0 / (l[i] + (l[i] * l[i] - 1.0).sqrt())
        })
        .fold(f64::INFINITY, f64::min);
    let (foot_s, distance) = if foot_at_end {
        (curve.s[imin], l[imin].acosh())
    } else {
        let (s, c) = golden_section(
            |s| surface.cosh_distance(p, curve.position_at(s)),
            curve.s[imin - 1],
            curve.s[imin + 1],
            1e-13,
        );
        (s, c.acosh())
    };
    FootSample {
        point: p,
        foot_s,
        distance,
        local_minima,
        convexity_margin,
        foot_at_end,
    }
}

/// Samples points of `region` and checks that each has a unique nearest
/// point on the curve and that `cosh d(p, γ(s))` is uniformly convex.
pub fn verify_foliation(
    surface: &SurfaceModel,
    curve: &TurningCurve,
    region: &TestRegion,
    samples: usize,
    seed: u64,
) -> FoliationReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points: Vec<P2> = (0..samples)
        .map(|_| sample_point(surface, curve, region, &mut rng))
        .collect();
    let results: Vec<FootSample> = points
        .par_iter()
        .map(|p| foot_sample(surface, curve, *p))
        .collect();
    let witness = results.iter().find_map(|r| {
        let reason = if r.foot_at_end {
            format!("nearest curve point is the end s = {}", r.foot_s)
        } else if r.local_minima != 1 {
            format!(
                "{} local minima of the distance along the curve",
                r.local_minima
            )
        } else if r.convexity_margin < -CONVEXITY_TOL {
            format!(
                "(cosh d)'' - exp(-d) = {:.3e} below -{CONVEXITY_TOL}",
                r.convexity_margin
            )
        } else {
            return None;
        };
        Some((r.point, reason))
    });
    FoliationReport {
        samples: results,
        convexity_tol: CONVEXITY_TOL,
        witness,
    }
}

/// `η` extracted from a turning curve, valid over the smooth set.
#[derive(Debug, Clone)]
pub struct ExtractedEta {
    pub field: Arc<EtaFromScal>,
    /// Frame-angle derivative `k_γ` sampled on the curve grid.
    pub k_gamma: Arc<SampledField1D>,
    pub smooth_set: IntervalSet,
    /// `max |η - (cosh u + k_γ sinh u)|` over the stored columns.
    pub closed_form_residual: f64,
}

impl ExtractedEta {
    pub fn eta(&self, x: f64, u: f64) -> Result<f64> {
        if !self.smooth_set.contains(x) {
            return Err(Error::NonSmoothPoint { x });
        }
        Ok(self.field.value(x, u))
    }

    pub fn as_field(&self) -> ScalarField2D {
        self.field.clone()
    }
}

/// Estimates `k_γ` as the derivative of the frame angle at curve nodes in
/// `grid.x_range` (which must lie in one component of `smooth_set`) and
/// solves `η_uu = η` with `η(x, 0) = 1`, `η_u(x, 0) = k_γ(x)`.
pub fn extract_eta(
    surface: &SurfaceModel,
    curve: &TurningCurve,
    smooth_set: &IntervalSet,
    grid: EtaSolve,
) -> Result<ExtractedEta> {
    let part = smooth_set
        .component_of(grid.x_range.lo)
        .ok_or(Error::NonSmoothPoint { x: grid.x_range.lo })?;
    if !part.contains(grid.x_range.hi) {
        return Err(Error::NonSmoothPoint { x: grid.x_range.hi });
    }
    let range = curve.range();
    let lo = curve.index_near(grid.x_range.lo).saturating_sub(2);
    let hi = (curve.index_near(grid.x_range.hi) + 2).min(curve.len() - 1);
    if curve.s[lo] > grid.x_range.lo
        || curve.s[hi] < grid.x_range.hi
        || lo < 2
        || hi + 2 >= curve.len()
    {
        return Err(Error::InvalidParameter(format!(
            "x-range ({}, {}) needs curve samples beyond it, curve covers ({}, {})",
            grid.x_range.lo, grid.x_range.hi, range.lo, range.hi
        )));
    }
    let angles: Vec<f64> = (0..curve.len()).map(|i| curve.frame_angle(i)).collect();
    let mut xs = Vec::new();
    let mut ks = Vec::new();
    for i in lo..=hi {
        let nodes = &curve.s[i - 2..=i + 2];
        if !nodes.iter().all(|s| part.contains(*s)) {
            continue;
        }
        let w = fd_weights(curve.s[i], nodes, 1);
        // unwrap the angle relative to the centre node
        let c = angles[i];
        let k: f64 = (0..5)
            .map(|j| w[j] * (c + wrap(angles[i - 2 + j] - c)))
            .sum();
        xs.push(curve.s[i]);
        ks.push(k);
    }
    let k_gamma = Arc::new(SampledField1D::new(xs, ks)?);
    let field = Arc::new(eta_from_scal(
        constant_2d(surface.scal()),
        k_gamma.clone(),
        grid,
    )?);
    let mut worst: f64 = 0.0;
    for x in field.column_xs() {
        let k = k_gamma.value(x);
        for u in grid.u_range.linspace(21) {
            worst = worst.max((field.value(x, u) - (u.cosh() + k * u.sinh())).abs());
        }
    }
    Ok(ExtractedEta {
        field,
        k_gamma,
        smooth_set: smooth_set.clone(),
        closed_form_residual: worst,
    })
}

/// Geometric check of an extracted `η`: along orthogonal geodesics
/// `u ↦ exp_{γ(x)}(-u N(x))` the variation field `J = ∂_x` must satisfy
/// `|J| = η(x, u)` and `⟨J, ∂_u⟩ = 0`.
#[derive(Debug, Clone, Copy)]
pub struct JacobiCheck {
    pub geodesics: usize,
    pub max_eta_error: f64,
    pub max_orthogonality: f64,
}

pub fn jacobi_cross_check(
    surface: &SurfaceModel,
    curve: &TurningCurve,
    eta: &ExtractedEta,
    geodesics: usize,
    u_max: f64,
    u_step: f64,
) -> Result<JacobiCheck> {
    let xr = eta.field.grid().x_range;
    let xs = xr.linspace(geodesics + 2);
    let weights = fd_weights(0.0, &[-2.0, -1.0, 0.0, 1.0, 2.0], 1);
    let rows: Vec<(f64, f64)> = xs[1..=geodesics]
        .par_iter()
        .map(|&x| -> Result<(f64, f64)> {
            let i = curve.index_near(x);
            if i < 2 || i + 2 >= curve.len() {
                return Err(Error::InvalidParameter(format!(
                    "x = {x} too close to the curve end"
                )));
            }
            let x = curve.s[i];
            let rays: Vec<Vec<(P2, P2)>> = (i - 2..=i + 2)
                .map(|j| {
                    let n = curve.normal[j];
                    surface.geodesic(curve.position[j], [-n[0], -n[1]], u_max, u_step)
                })
                .collect();
            let mut eta_err: f64 = 0.0;
            let mut orth: f64 = 0.0;
            for k in 0..rays[2].len() {
                let u = k as f64 * u_max / (rays[2].len() - 1) as f64;
                let (p, du) = rays[2][k];
                let mut jf = [0.0; 2];
                for (r, w) in rays.iter().zip(&weights) {
                    jf[0] += w * r[k].0[0] / curve.step;
                    jf[1] += w * r[k].0[1] / curve.step;
                }
                eta_err = eta_err.max((surface.norm(p, jf) - eta.eta(x, u)?).abs());
                orth = orth.max(surface.inner(p, jf, du).abs());
            }
            Ok((eta_err, orth))
        })
        .collect::<Result<_>>()?;
    Ok(JacobiCheck {
        geodesics,
        max_eta_error: rows.iter().map(|r| r.0).fold(0.0, f64::max),
        max_orthogonality: rows.iter().map(|r| r.1).fold(0.0, f64::max),
    })
}
