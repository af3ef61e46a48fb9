//! Gluing the family across the boundary of a smooth set `S ⊂ ℝ`.
//!
//! On `S × ℝ^{n+1}` the metric is the family member built from `f` and `η`;
//! off `S` every `f_i` is treated as zero, which leaves the product
//! `η² dx² + du² + Σ dv_i²`.

use std::sync::Arc;

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fields::{builtin_ch_eta, Derivative, Field1D, ScalarField1D, ScalarField2D};
use crate::foliation::check_lipschitz;
use crate::interval::{Interval, IntervalSet};
use crate::metric::{
    b_coefficients, metric_at, CoordinateMetric, MetricData, MetricJet, ModelSpec, Point,
};
use crate::numeric::fd_weights;

const NORMALIZATION_TOL: f64 = 1e-12;
const BOUNDARY_TOL: f64 = 1e-12;

/// `f` inside the set, zero outside.
#[derive(Debug, Clone)]
struct Masked {
    inner: ScalarField1D,
    set: IntervalSet,
}

impl Field1D for Masked {
    fn deriv(&self, k: usize, x: f64) -> f64 {
        if self.set.contains(x) {
            self.inner.deriv(k, x)
        } else {
            0.0
        }
    }
    fn max_order(&self) -> usize {
        self.inner.max_order()
    }
    fn describe(&self) -> String {
        format!("{} masked to S", self.inner.describe())
    }
}

#[derive(Debug, Clone)]
pub struct GlueSpec {
    smooth_set: IntervalSet,
    f: Vec<ScalarField1D>,
    eta: ScalarField2D,
    k_gamma: Option<ScalarField1D>,
    masked: ModelSpec,
}

impl GlueSpec {
    /// Checks `η(x, 0) = 1` on every component of `S` and that each `f_i`
    /// vanishes at the boundary points of `S`.
    pub fn new(smooth_set: IntervalSet, f: Vec<ScalarField1D>, eta: ScalarField2D) -> Result<Self> {
        if f.is_empty() {
            return Err(Error::InvalidParameter(
                "the nullity dimension n must be at least 1".into(),
            ));
        }
        for part in smooth_set.parts() {
            let w = part.clipped(10.0);
            let pad = 1e-3 * w.width();
            for x in (Interval {
                lo: w.lo + pad,
                hi: w.hi - pad,
            })
            .linspace(17)
            {
                let value = eta.value(x, 0.0);
                if (value - 1.0).abs() > NORMALIZATION_TOL {
                    return Err(Error::EtaNormalization { x, value });
                }
            }
        }
        for (i, fi) in f.iter().enumerate() {
            for c in smooth_set.boundary_points() {
                let v = fi.value(c);
                if !(v.abs() <= BOUNDARY_TOL) {
                    return Err(Error::InvalidParameter(format!(
                        "f_{} = {v} at boundary point {c}; it must vanish on the boundary of S",
                        i + 1
                    )));
                }
            }
        }
        let masked_f = f
            .iter()
            .map(|fi| {
                Arc::new(Masked {
                    inner: fi.clone(),
                    set: smooth_set.clone(),
                }) as ScalarField1D
            })
            .collect();
        let masked = ModelSpec::unchecked(masked_f, eta.clone(), Interval::real_line());
        Ok(Self {
            smooth_set,
            f,
            eta,
            k_gamma: None,
            masked,
        })
    }

    /// `η = cosh u + k_γ(x) sinh u`.
    pub fn with_curvature_homogeneous_eta(
        smooth_set: IntervalSet,
        f: Vec<ScalarField1D>,
        k_gamma: ScalarField1D,
    ) -> Result<Self> {
        let eta = builtin_ch_eta(k_gamma.clone())?;
        let mut g = Self::new(smooth_set, f, eta)?;
        g.k_gamma = Some(k_gamma);
        Ok(g)
    }

    /// `k_γ = H'` from a turning angle that is Lipschitz-1 on `[-window, window]`.
    pub fn from_turning_angle(
        smooth_set: IntervalSet,
        f: Vec<ScalarField1D>,
        h: ScalarField1D,
        window: f64,
    ) -> Result<Self> {
        check_lipschitz(h.as_ref(), Interval::new(-window, window)?, 1e-3, 1.0)?;
        Self::with_curvature_homogeneous_eta(smooth_set, f, Arc::new(Derivative::new(h, 1)))
    }

    pub fn n(&self) -> usize {
        self.f.len()
    }

    pub fn smooth_set(&self) -> &IntervalSet {
        &self.smooth_set
    }

    pub fn f(&self) -> &[ScalarField1D] {
        &self.f
    }

    pub fn eta(&self) -> &ScalarField2D {
        &self.eta
    }

    pub fn k_gamma(&self) -> Option<&ScalarField1D> {
        self.k_gamma.as_ref()
    }

    /// `f_i(x)` if `x ∈ S`, else 0 (1-based `i`, zero outside `1..=n`).
    pub fn f_masked(&self, i: usize, k: usize, x: f64) -> f64 {
        self.masked.f_at(i, k, x)
    }

    /// The family member on the component of `S` containing `x`.
    pub fn component_spec(&self, x: f64) -> Option<Result<ModelSpec>> {
        let part = *self.smooth_set.component_of(x)?;
        Some(ModelSpec::new(self.f.clone(), self.eta.clone(), part))
    }
}

impl CoordinateMetric for GlueSpec {
    fn dim(&self) -> usize {
        self.n() + 2
    }

    fn x_domain(&self) -> Interval {
        Interval::real_line()
    }

    fn metric_jet(&self, q: &[f64]) -> Result<MetricJet> {
        self.masked.metric_jet(q)
    }
}

pub fn assemble_glued_metric(glue: &GlueSpec, p: &Point) -> Result<MetricData> {
    metric_at(&glue.masked, p)
}

/// `g - (η² dx² + du² + Σ dv_i²)`: `Σ b_j²` in the `xx` slot and `b_j` in
/// the `x v_j` slots.
pub fn modification_at(glue: &GlueSpec, p: &Point) -> DMatrix<f64> {
    let fv: Vec<f64> = (1..=glue.n()).map(|i| glue.f_masked(i, 0, p.x)).collect();
    let b = b_coefficients(&fv, p);
    let dim = glue.n() + 2;
    let mut m = DMatrix::zeros(dim, dim);
    m[(0, 0)] = b.iter().map(|v| v * v).sum();
    for (j, bj) in b.iter().enumerate() {
        m[(0, 1 + j)] = *bj;
        m[(1 + j, 0)] = *bj;
    }
    m
}

#[derive(Debug, Clone, Copy)]
pub struct DaggerOrders {
    pub k_max: usize,
    /// Bound on `a + b` for each `∂_x^a ∂_u^b η` factor.
    pub ab_max: usize,
    /// Number of `η` factors per product.
    pub factors_max: usize,
}

impl Default for DaggerOrders {
    fn default() -> Self {
        Self {
            k_max: 6,
            ab_max: 4,
            factors_max: 2,
        }
    }
}

/// Approach distances `2^{-m}`, `m = m_min..=m_max`.
#[derive(Debug, Clone, Copy)]
pub struct ApproachGrid {
    pub m_min: u32,
    pub m_max: u32,
}

impl Default for ApproachGrid {
    fn default() -> Self {
        Self {
            m_min: 3,
            m_max: 20,
        }
    }
}

/// `f_i^{(k)} ∏ ∂_x^a ∂_u^b η`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DaggerProduct {
    pub f_index: usize,
    pub k: usize,
    pub factors: Vec<(usize, usize)>,
}

impl DaggerProduct {
    pub fn id(&self) -> String {
        let mut s = format!("f{}^({})", self.f_index, self.k);
        for (a, b) in &self.factors {
            s.push_str(&format!("*eta_x{a}u{b}"));
        }
        s
    }
}

fn enumerate_products(n: usize, orders: DaggerOrders) -> Vec<DaggerProduct> {
    let singles: Vec<(usize, usize)> = (0..=orders.ab_max)
        .flat_map(|d| (0..=d).map(move |b| (d - b, b)))
        .collect();
    let mut factor_sets: Vec<Vec<(usize, usize)>> = vec![Vec::new()];
    if orders.factors_max >= 1 {
        factor_sets.extend(singles.iter().map(|s| vec![*s]));
    }
    if orders.factors_max >= 2 {
        for i in 0..singles.len() {
            for j in i..singles.len() {
                factor_sets.push(vec![singles[i], singles[j]]);
            }
        }
    }
    let mut out = Vec::new();
    for f_index in 1..=n {
        for k in 0..=orders.k_max {
            for fs in &factor_sets {
                out.push(DaggerProduct {
                    f_index,
                    k,
                    factors: fs.clone(),
                });
            }
        }
    }
    out
}

#[derive(Debug, Clone)]
pub struct DecaySeries {
    pub product: usize,
    pub boundary: f64,
    /// `+1` when approaching from the right, `-1` from the left.
    pub side: f64,
    pub distances: Vec<f64>,
    /// `max_u |product|` at each distance.
    pub values: Vec<f64>,
    pub passed: bool,
}

pub const DECAY_THRESHOLD: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct DaggerReport {
    pub products: Vec<DaggerProduct>,
    pub series: Vec<DecaySeries>,
    pub orders: DaggerOrders,
    pub witness: Option<String>,
}

impl DaggerReport {
    pub fn passed(&self) -> bool {
        self.witness.is_none()
    }

    /// Which finite slice of the products was examined.
    pub fn slice(&self) -> String {
        format!(
            "products f_i^(k) * (up to {} eta factors), k <= {}, a + b <= {} per factor",
            self.orders.factors_max, self.orders.k_max, self.orders.ab_max
        )
    }

    /// `(product id, distance, value)` rows.
    pub fn rows(&self) -> Vec<(String, f64, f64)> {
        let mut out = Vec::new();
        for s in &self.series {
            let id = self.products[s.product].id();
            for (d, v) in s.distances.iter().zip(&s.values) {
                out.push((id.clone(), *d, *v));
            }
        }
        out
    }

    pub fn failed_products(&self) -> Vec<String> {
        let mut ids: Vec<String> = self
            .series
            .iter()
            .filter(|s| !s.passed)
            .map(|s| self.products[s.product].id())
            .collect();
        ids.dedup();
        ids
    }
}

fn decays(values: &[f64]) -> bool {
    let n = values.len();
    n >= 3
        && values[n - 3] >= values[n - 2]
        && values[n - 2] >= values[n - 1]
        && values[n - 3..].iter().all(|v| *v < DECAY_THRESHOLD)
}

/// Evaluates every product in the slice on approach grids towards each
/// boundary point, from each side lying in `S`.
pub fn check_dagger(
    glue: &GlueSpec,
    boundary_pts: &[f64],
    u_box: Interval,
    orders: DaggerOrders,
    grid: ApproachGrid,
    u_samples: usize,
) -> Result<DaggerReport> {
    if orders.k_max > 6 || orders.ab_max > 4 || orders.factors_max > 2 {
        return Err(Error::InvalidParameter(
            "condition slice limited to k <= 6, a + b <= 4 and at most 2 eta factors".into(),
        ));
    }
    if grid.m_min > grid.m_max || !u_box.is_bounded() || u_samples == 0 {
        return Err(Error::InvalidParameter(
            "empty approach grid or u-box".into(),
        ));
    }
    let products = enumerate_products(glue.n(), orders);
    let us = u_box.linspace(u_samples);

    let mut tasks = Vec::new();
    for &c in boundary_pts {
        for side in [-1.0, 1.0] {
            let probe = c + side * 2f64.powi(-(grid.m_max as i32));
            let Some(part) = glue.smooth_set.component_of(probe) else {
                continue;
            };
            let xs: Vec<f64> = (grid.m_min..=grid.m_max)
                .map(|m| 2f64.powi(-(m as i32)))
                .filter(|d| 2.0 * d <= part.width() && part.contains(c + side * d))
                .collect();
            tasks.push((c, side, xs));
        }
    }

    let series: Vec<Vec<DecaySeries>> = tasks
        .par_iter()
        .map(|(c, side, ds)| -> Result<Vec<DecaySeries>> {
            // values[product][distance]
            let mut values = vec![vec![0.0_f64; ds.len()]; products.len()];
            for (di, d) in ds.iter().enumerate() {
                let x = c + side * d;
                let fk: Vec<Vec<f64>> = (1..=glue.n())
                    .map(|i| {
                        (0..=orders.k_max)
                            .map(|k| glue.f[i - 1].deriv(k, x))
                            .collect()
                    })
                    .collect();
                for &u in &us {
                    let eta = glue.eta.partials(x, u, orders.ab_max);
                    for (pi, p) in products.iter().enumerate() {
                        let mut v = fk[p.f_index - 1][p.k];
                        for (a, b) in &p.factors {
                            v *= eta.get(*a, *b);
                        }
                        if v.is_nan() {
                            return Err(Error::InvalidParameter(format!(
                                "{} is not available at x = {x}",
                                p.id()
                            )));
                        }
                        values[pi][di] = values[pi][di].max(v.abs());
                    }
                }
            }
            Ok(values
                .into_iter()
                .enumerate()
                .map(|(pi, vals)| DecaySeries {
                    product: pi,
                    boundary: *c,
                    side: *side,
                    distances: ds.clone(),
                    passed: decays(&vals),
                    values: vals,
                })
                .collect())
        })
        .collect::<Result<_>>()?;
    let series: Vec<DecaySeries> = series.into_iter().flatten().collect();
    let witness = series.iter().find(|s| !s.passed).map(|s| {
        let n = s.values.len();
        let tail: Vec<String> = s.values[n.saturating_sub(3)..]
            .iter()
            .map(|v| format!("{v:.3e}"))
            .collect();
        format!(
            "{} approaching {} from the {}: last values [{}]",
            products[s.product].id(),
            s.boundary,
            if s.side > 0.0 { "right" } else { "left" },
            tail.join(", ")
        )
    });
    Ok(DaggerReport {
        products,
        series,
        orders,
        witness,
    })
}

const PROBE_STEPS: [f64; 11] = [
    1e-2,
    3.162_277_660_168_379_5e-3,
    1e-3,
    3.162_277_660_168_379_5e-4,
    1e-4,
    3.162_277_660_168_379_5e-5,
    1e-5,
    3.162_277_660_168_379_5e-6,
    1e-6,
    3.162_277_660_168_379_5e-7,
    1e-7,
];
const PROBE_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct ProbeOrder {
    pub component: (usize, usize),
    pub order: usize,
    /// One-sided estimates at the smallest usable step.
    pub left: f64,
    pub right: f64,
    /// Change between the two smallest usable steps, worst side.
    pub cauchy: f64,
    pub tol: f64,
    pub passed: bool,
}

#[derive(Debug, Clone)]
pub struct ProbeReport {
    pub boundary: f64,
    pub max_order: usize,
    pub orders: Vec<ProbeOrder>,
}

impl ProbeReport {
    pub fn passed(&self) -> bool {
        self.orders.iter().all(|o| o.passed)
    }

    /// Lowest derivative order with a failing component.
    pub fn failed_order(&self) -> Option<usize> {
        self.orders
            .iter()
            .filter(|o| !o.passed)
            .map(|o| o.order)
            .min()
    }
}

struct OneSided {
    value: f64,
    cauchy: f64,
    floor: f64,
}

fn one_sided(
    f: &dyn Fn(f64) -> f64,
    c: f64,
    side: f64,
    order: usize,
    room: f64,
) -> Option<OneSided> {
    let mut estimates: Vec<(f64, f64)> = Vec::new();
    let nodes_count = order + 4;
    for &h in &PROBE_STEPS {
        if nodes_count as f64 * h > 0.5 * room {
            continue;
        }
        let offsets: Vec<f64> = (1..=nodes_count).map(|j| side * j as f64 * h).collect();
        let w = fd_weights(0.0, &offsets, order);
        let vals: Vec<f64> = offsets.iter().map(|o| f(c + o)).collect();
        let est: f64 = w.iter().zip(&vals).map(|(a, b)| a * b).sum();
        let scale = vals.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let floor = 4.0 * f64::EPSILON * w.iter().map(|v| v.abs()).sum::<f64>() * scale;
        if floor <= PROBE_FLOOR {
            estimates.push((est, floor));
        }
    }
    let n = estimates.len();
    if n < 2 {
        return None;
    }
    Some(OneSided {
        value: estimates[n - 1].0,
        cauchy: (estimates[n - 1].0 - estimates[n - 2].0).abs(),
        floor: estimates[n - 1].1.max(estimates[n - 2].1),
    })
}

/// Leaf points at which the probe evaluates the modification tensor.
fn probe_points(n: usize) -> Vec<(f64, Vec<f64>)> {
    vec![
        (0.8, (0..n).map(|j| 0.7 - 0.3 * j as f64).collect()),
        (-0.6, (0..n).map(|j| -0.5 + 0.4 * j as f64).collect()),
    ]
}

/// One-sided finite-difference derivatives of the modification tensor from
/// both sides of `boundary_pt`, orders `0..=max_order`.
pub fn smoothness_probe(
    glue: &GlueSpec,
    boundary_pt: f64,
    max_order: usize,
) -> Result<ProbeReport> {
    if max_order > 4 {
        return Err(Error::InvalidParameter("probe orders limited to 4".into()));
    }
    let others: Vec<f64> = glue
        .smooth_set
        .boundary_points()
        .into_iter()
        .filter(|c| (c - boundary_pt).abs() > 1e-12)
        .collect();
    let room = |side: f64| {
        others
            .iter()
            .filter(|c| (*c - boundary_pt) * side > 0.0)
            .map(|c| (c - boundary_pt).abs())
            .fold(1.0_f64, f64::min)
    };
    let (room_l, room_r) = (room(-1.0), room(1.0));
    let dim = glue.n() + 2;
    let mut orders = Vec::new();
    for (u, v) in probe_points(glue.n()) {
        for comp in std::iter::once((0, 0)).chain((1..dim).map(|j| (0, j))) {
            let f = |x: f64| modification_at(glue, &Point::new(x, u, v.clone()))[comp];
            for order in 0..=max_order {
                let l = one_sided(&f, boundary_pt, -1.0, order, room_l);
                let r = one_sided(&f, boundary_pt, 1.0, order, room_r);
                let entry = match (l, r) {
                    (Some(l), Some(r)) => {
                        let scale = l.value.abs().max(r.value.abs());
                        let tol = PROBE_FLOOR * (1.0 + scale) + 10.0 * l.floor.max(r.floor);
                        ProbeOrder {
                            component: comp,
                            order,
                            left: l.value,
                            right: r.value,
                            cauchy: l.cauchy.max(r.cauchy),
                            tol,
                            passed: l.cauchy <= tol
                                && r.cauchy <= tol
                                && (l.value - r.value).abs() <= tol,
                        }
                    }
                    _ => ProbeOrder {
                        component: comp,
                        order,
                        left: f64::NAN,
                        right: f64::NAN,
                        cauchy: f64::NAN,
                        tol: f64::NAN,
                        passed: false,
                    },
                };
                orders.push(entry);
            }
        }
    }
    Ok(ProbeReport {
        boundary: boundary_pt,
        max_order,
        orders,
    })
}

/// An interval on which `f_i` vanishes identically.
#[derive(Debug, Clone, PartialEq)]
pub struct ZeroStrip {
    pub f_index: usize,
    pub interval: Interval,
    /// The strip is a gap between components of `S`.
    pub in_complement: bool,
}

/// Coordinate-index blocks of the local product splitting over a strip;
/// the first block contains `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct StripSplit {
    pub interval: Interval,
    pub blocks: Vec<Vec<usize>>,
}

#[derive(Debug, Clone)]
pub struct IrreducibilityReport {
    pub strips: Vec<ZeroStrip>,
    pub splits: Vec<StripSplit>,
}

impl IrreducibilityReport {
    pub fn reducible_on_strips(&self) -> bool {
        !self.strips.is_empty()
    }
}

fn blocks_for(n: usize, vanishing: &[usize]) -> Vec<Vec<usize>> {
    // f_i = 0 decouples v_{i-1} (index i) from v_i (index i + 1)
    let mut blocks = vec![vec![0, 1]];
    for i in 1..=n {
        if vanishing.contains(&i) {
            blocks.push(vec![i + 1]);
        } else {
            blocks.last_mut().unwrap().push(i + 1);
        }
    }
    blocks
}

/// Looks for open sets in `f_i^{-1}(0)` by sampling each component of `S`
/// clipped to `[-window, window]`; runs of exact zeros at least 1% of the
/// component wide count as strips. Bounded gaps of the complement of `S`
/// are strips for every `f_i`.
pub fn irreducibility_proxy(
    glue: &GlueSpec,
    window: f64,
    samples_per_part: usize,
) -> IrreducibilityReport {
    let n = glue.n();
    let mut strips = Vec::new();
    for part in glue.smooth_set.parts() {
        let w = part.clipped(window);
        if !(w.width() > 0.0) {
            continue;
        }
        let pad = 1e-9 * w.width();
        let xs = Interval {
            lo: w.lo + pad,
            hi: w.hi - pad,
        }
        .linspace(samples_per_part.max(3));
        for i in 1..=n {
            let mut run: Option<(f64, f64)> = None;
            let flush = |run: &mut Option<(f64, f64)>, strips: &mut Vec<ZeroStrip>| {
                if let Some((a, b)) = run.take() {
                    if b - a >= 0.01 * w.width() {
                        strips.push(ZeroStrip {
                            f_index: i,
                            interval: Interval { lo: a, hi: b },
                            in_complement: false,
                        });
                    }
                }
            };
            for &x in &xs {
                if glue.f_masked(i, 0, x) == 0.0 {
                    run = Some(run.map_or((x, x), |(a, _)| (a, x)));
                } else {
                    flush(&mut run, &mut strips);
                }
            }
            flush(&mut run, &mut strips);
        }
    }
    let parts = glue.smooth_set.parts();
    for pair in parts.windows(2) {
        let gap = Interval {
            lo: pair[0].hi,
            hi: pair[1].lo,
        };
        if gap.width() > 0.0 {
            for i in 1..=n {
                strips.push(ZeroStrip {
                    f_index: i,
                    interval: gap,
                    in_complement: true,
                });
            }
        }
    }
    let mut intervals: Vec<Interval> = Vec::new();
    for s in &strips {
        if !intervals.contains(&s.interval) {
            intervals.push(s.interval);
        }
    }
    intervals.sort_by(|a, b| a.lo.total_cmp(&b.lo));
    let splits = intervals
        .into_iter()
        .map(|iv| {
            let vanishing: Vec<usize> = strips
                .iter()
                .filter(|s| s.interval.lo <= iv.lo && s.interval.hi >= iv.hi)
                .map(|s| s.f_index)
                .collect();
            StripSplit {
                interval: iv,
                blocks: blocks_for(n, &vanishing),
            }
        })
        .collect();
    IrreducibilityReport { strips, splits }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{builtin_flat_bump, constant, expr_1d, Polynomial, Restricted};

    fn unit() -> IntervalSet {
        IntervalSet::new(vec![Interval { lo: 0.0, hi: 1.0 }]).unwrap()
    }

    fn bump_glue() -> GlueSpec {
        GlueSpec::with_curvature_homogeneous_eta(
            unit(),
            vec![builtin_flat_bump(0.5, 0.5, 1.0).unwrap()],
            expr_1d("0.5*sin(x)").unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn inside_matches_family_bit_for_bit() {
        let g = bump_glue();
        let spec = g.component_spec(0.3).unwrap().unwrap();
        let p = Point::new(0.3, 0.4, vec![-1.2]);
        let a = assemble_glued_metric(&g, &p).unwrap();
        let b = metric_at(&spec, &p).unwrap();
        assert_eq!(a.g, b.g);
        assert_eq!(a.g_inv, b.g_inv);
    }

    #[test]
    fn outside_is_product() {
        let g = bump_glue();
        let p = Point::new(1.7, 0.4, vec![-1.2]);
        let m = assemble_glued_metric(&g, &p).unwrap();
        let eta = g.eta().value(1.7, 0.4);
        let mut want = DMatrix::identity(3, 3);
        want[(0, 0)] = eta * eta;
        assert_eq!(m.g, want);
        assert_eq!(modification_at(&g, &p), DMatrix::zeros(3, 3));
    }

    #[test]
    fn boundary_values_must_vanish() {
        let err =
            GlueSpec::with_curvature_homogeneous_eta(unit(), vec![constant(1.0)], constant(0.0));
        assert!(matches!(err, Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn product_enumeration_counts() {
        let p = enumerate_products(2, DaggerOrders::default());
        assert_eq!(p.len(), 2 * 7 * (1 + 15 + 120));
        assert_eq!(p[0].id(), "f1^(0)");
    }

    #[test]
    fn zero_f_passes_everything() {
        let g =
            GlueSpec::with_curvature_homogeneous_eta(unit(), vec![constant(0.0)], constant(0.3))
                .unwrap();
        let r = check_dagger(
            &g,
            &[0.0, 1.0],
            Interval { lo: -1.0, hi: 1.0 },
            DaggerOrders::default(),
            ApproachGrid::default(),
            3,
        )
        .unwrap();
        assert!(r.passed());
        assert!(r.series.iter().all(|s| s.values.iter().all(|v| *v == 0.0)));
        assert!(smoothness_probe(&g, 0.0, 4).unwrap().passed());
    }

    #[test]
    fn polynomial_vanishing_to_second_order_fails() {
        let f: ScalarField1D = Arc::new(Restricted::new(
            Arc::new(Polynomial::new(vec![0.0, 0.0, 1.0, -2.0, 1.0])),
            Interval { lo: 0.0, hi: 1.0 },
        ));
        let g = GlueSpec::with_curvature_homogeneous_eta(unit(), vec![f], constant(0.2)).unwrap();
        let p = smoothness_probe(&g, 0.0, 4).unwrap();
        assert_eq!(p.failed_order(), Some(2));
    }

    #[test]
    fn strips_and_splits() {
        let set = IntervalSet::new(vec![
            Interval {
                lo: f64::NEG_INFINITY,
                hi: 0.0,
            },
            Interval { lo: 0.0, hi: 1.0 },
            Interval {
                lo: 2.0,
                hi: f64::INFINITY,
            },
        ])
        .unwrap();
        let g = GlueSpec::with_curvature_homogeneous_eta(
            set,
            vec![builtin_flat_bump(0.5, 0.5, 1.0).unwrap(), constant(0.0)],
            constant(0.0),
        )
        .unwrap();
        let r = irreducibility_proxy(&g, 5.0, 2001);
        assert!(r.reducible_on_strips());
        assert!(r
            .strips
            .iter()
            .any(|s| s.in_complement && s.interval == Interval { lo: 1.0, hi: 2.0 }));
        assert!(r.strips.iter().any(|s| s.f_index == 2 && !s.in_complement));
        let inside = r
            .splits
            .iter()
            .find(|s| s.interval.lo > 0.0 && s.interval.hi <= 1.0)
            .unwrap();
        assert_eq!(inside.blocks, vec![vec![0, 1, 2], vec![3]]);
        assert_eq!(
            blocks_for(3, &[1, 3]),
            vec![vec![0, 1], vec![2, 3], vec![4]]
        );
    }
}
