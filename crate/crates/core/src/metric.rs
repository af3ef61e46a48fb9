//! The metric family
//!
//! ```text
//! g = η(x,u)² dx² + Σ_{j=0..n} (dv_j + b_j dx)²,   b_j = v_{j-1} f_j(x) - v_{j+1} f_{j+1}(x)
//! ```
//!
//! with `v_0 = u`, `v_{-1} = v_{n+1} = 0` and `f_0 = f_{n+1} = 0`.
//! Coordinates are ordered `(x, u, v_1, …, v_n)`; index `1 + j` is `v_j`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::fields::{ScalarField1D, ScalarField2D};
use crate::interval::Interval;

pub type Tangent = DVector<f64>;

#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    pub x: f64,
    pub u: f64,
    pub v: Vec<f64>,
}

impl Point {
    pub fn new(x: f64, u: f64, v: Vec<f64>) -> Self {
        Self { x, u, v }
    }

    /// `(x, 0, 0, …, 0)` on the base curve.
    pub fn on_base(x: f64, n: usize) -> Self {
        Self::new(x, 0.0, vec![0.0; n])
    }

    pub fn dim(&self) -> usize {
        self.v.len() + 2
    }

    pub fn coords(&self) -> Vec<f64> {
        let mut c = Vec::with_capacity(self.dim());
        c.push(self.x);
        c.push(self.u);
        c.extend_from_slice(&self.v);
        c
    }

    pub fn from_coords(q: &[f64]) -> Self {
        Self::new(q[0], q[1], q[2..].to_vec())
    }
}

/// `g`, `g⁻¹` and the coordinate partials `∂_m g` at one point.
#[derive(Debug, Clone)]
pub struct MetricJet {
    pub g: DMatrix<f64>,
    pub g_inv: DMatrix<f64>,
    pub dg: Vec<DMatrix<f64>>,
}

/// A metric in global coordinates with analytic first derivatives.
pub trait CoordinateMetric: Send + Sync {
    fn dim(&self) -> usize;
    fn x_domain(&self) -> Interval;
    fn metric_jet(&self, q: &[f64]) -> Result<MetricJet>;
}

/// One member of the family: `n`, `f_1..f_n`, `η` and the `x`-domain.
#[derive(Debug, Clone)]
pub struct ModelSpec {
    f: Vec<ScalarField1D>,
    eta: ScalarField2D,
    x_domain: Interval,
}

#[derive(Debug, Clone)]
pub struct MetricData {
    pub g: DMatrix<f64>,
    pub g_inv: DMatrix<f64>,
    /// `b_0..b_n`; `b_j = g(∂x, ∂v_j)`.
    pub b: Vec<f64>,
    pub eta: f64,
}

const NORMALIZATION_TOL: f64 = 1e-12;

impl ModelSpec {
    /// Validates `n >= 1` and `η(x, 0) = 1` on 65 sample abscissae.
    pub fn new(f: Vec<ScalarField1D>, eta: ScalarField2D, x_domain: Interval) -> Result<Self> {
        if f.is_empty() {
            return Err(Error::InvalidParameter(
                "the nullity dimension n must be at least 1".into(),
            ));
        }
        let window = x_domain.clipped(10.0);
        let pad = 1e-3 * window.width();
        let probe = Interval {
            lo: window.lo + pad,
            hi: window.hi - pad,
        };
        for x in probe.linspace(65) {
            let value = eta.value(x, 0.0);
            if (value - 1.0).abs() > NORMALIZATION_TOL {
                return Err(Error::EtaNormalization { x, value });
            }
        }
        Ok(Self { f, eta, x_domain })
    }

    /// Skips the normalization check; the caller validates `η(x, 0) = 1`
    /// where it matters.
    pub(crate) fn unchecked(f: Vec<ScalarField1D>, eta: ScalarField2D, x_domain: Interval) -> Self {
        Self { f, eta, x_domain }
    }

    pub fn n(&self) -> usize {
        self.f.len()
    }

    pub fn f(&self) -> &[ScalarField1D] {
        &self.f
    }

    pub fn eta(&self) -> &ScalarField2D {
        &self.eta
    }

    pub fn domain(&self) -> Interval {
        self.x_domain
    }

    /// `f_j(x)` with the conventions `f_0 = f_{n+1} = 0`.
    pub fn f_at(&self, j: usize, k: usize, x: f64) -> f64 {
        if j == 0 || j > self.n() {
            0.0
        } else {
            self.f[j - 1].deriv(k, x)
        }
    }

    /// Checks `η > 0` on a `count × count` grid of the clipped domain times `u_range`.
    pub fn check_positive(&self, u_range: Interval, count: usize) -> Result<()> {
        let window = self.x_domain.clipped(10.0);
        let pad = 1e-3 * window.width();
        let xs = Interval {
            lo: window.lo + pad,
            hi: window.hi - pad,
        }
        .linspace(count);
        for &x in &xs {
            for u in u_range.linspace(count) {
                if !(self.eta.value(x, u) > 0.0) {
                    return Err(Error::NonPositiveEta { x, u });
                }
            }
        }
        Ok(())
    }

    fn check_point(&self, p: &Point) -> Result<()> {
        if p.v.len() != self.n() {
            return Err(Error::DimensionMismatch {
                expected: self.n() + 2,
                got: p.dim(),
            });
        }
        if !self.x_domain.contains(p.x) {
            return Err(Error::OutsideDomain {
                x: p.x,
                lo: self.x_domain.lo,
                hi: self.x_domain.hi,
            });
        }
        Ok(())
    }

    fn eta_checked(&self, x: f64, u: f64) -> Result<f64> {
        let eta = self.eta.value(x, u);
        if !(eta > 0.0) || !eta.is_finite() {
            return Err(Error::DegenerateMetric { x, u, eta });
        }
        Ok(eta)
    }
}

/// `v_j` with `v_0 = u` and zero outside `0..=n`.
pub(crate) fn v_at(p: &Point, j: i64) -> f64 {
    let n = p.v.len() as i64;
    match j {
        0 => p.u,
        _ if j >= 1 && j <= n => p.v[(j - 1) as usize],
        _ => 0.0,
    }
}

/// `b_j = v_{j-1} f_j - v_{j+1} f_{j+1}` for `j = 0..n`, given `f_1..f_n`.
pub fn b_coefficients(f_values: &[f64], p: &Point) -> Vec<f64> {
    let n = f_values.len();
    let f = |j: usize| {
        if j == 0 || j > n {
            0.0
        } else {
            f_values[j - 1]
        }
    };
    (0..=n)
        .map(|j| v_at(p, j as i64 - 1) * f(j) - v_at(p, j as i64 + 1) * f(j + 1))
        .collect()
}

/// Assembles `g` from `η` and `b`; shared with the gluing constructor.
pub fn assemble(eta: f64, b: &[f64]) -> DMatrix<f64> {
    let dim = b.len() + 1;
    let mut g = DMatrix::identity(dim, dim);
    g[(0, 0)] = eta * eta + b.iter().map(|v| v * v).sum::<f64>();
    for (j, bj) in b.iter().enumerate() {
        g[(0, 1 + j)] = *bj;
        g[(1 + j, 0)] = *bj;
    }
    g
}

/// Closed-form inverse of the bordered identity:
/// `g^{xx} = 1/η²`, `g^{x v_j} = -b_j/η²`, `g^{v_i v_j} = (η² δ_ij + b_i b_j)/η²`.
pub fn closed_form_inverse(eta: f64, b: &[f64]) -> DMatrix<f64> {
    let dim = b.len() + 1;
    let e2 = eta * eta;
    let mut inv = DMatrix::zeros(dim, dim);
    inv[(0, 0)] = 1.0 / e2;
    for i in 0..b.len() {
        inv[(0, 1 + i)] = -b[i] / e2;
        inv[(1 + i, 0)] = -b[i] / e2;
        for j in 0..b.len() {
            let delta = if i == j { e2 } else { 0.0 };
            inv[(1 + i, 1 + j)] = (delta + b[i] * b[j]) / e2;
        }
    }
    inv
}

pub fn metric_at(spec: &ModelSpec, p: &Point) -> Result<MetricData> {
    spec.check_point(p)?;
    let eta = spec.eta_checked(p.x, p.u)?;
    let fv: Vec<f64> = (1..=spec.n()).map(|j| spec.f_at(j, 0, p.x)).collect();
    let b = b_coefficients(&fv, p);
    Ok(MetricData {
        g: assemble(eta, &b),
        g_inv: closed_form_inverse(eta, &b),
        b,
        eta,
    })
}

/// `{e, ∂u, ∂v_1, …, ∂v_n}` with `e = (1/η)(∂x - Σ_j b_j ∂v_j)`.
pub fn orthonormal_frame(spec: &ModelSpec, p: &Point) -> Result<Vec<Tangent>> {
    let m = metric_at(spec, p)?;
    Ok(frame_from(&m))
}

pub(crate) fn frame_from(m: &MetricData) -> Vec<Tangent> {
    let dim = m.b.len() + 1;
    let mut e = Tangent::zeros(dim);
    e[0] = 1.0 / m.eta;
    for (j, bj) in m.b.iter().enumerate() {
        e[1 + j] = -bj / m.eta;
    }
    let mut frame = vec![e];
    for i in 1..dim {
        let mut t = Tangent::zeros(dim);
        t[i] = 1.0;
        frame.push(t);
    }
    frame
}

pub fn inner(g: &DMatrix<f64>, a: &Tangent, b: &Tangent) -> f64 {
    (a.transpose() * g * b)[(0, 0)]
}

/// `max |G - I|` for the Gram matrix of `frame`.
pub fn gram_deviation(g: &DMatrix<f64>, frame: &[Tangent]) -> f64 {
    let mut worst: f64 = 0.0;
    for (i, a) in frame.iter().enumerate() {
        for (j, b) in frame.iter().enumerate() {
            let want = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((inner(g, a, b) - want).abs());
        }
    }
    worst
}

pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
}

/// True when every leading principal minor is positive.
pub fn leading_minors_positive(g: &DMatrix<f64>) -> bool {
    (1..=g.nrows()).all(|k| g.view((0, 0), (k, k)).into_owned().determinant() > 0.0)
}

impl CoordinateMetric for ModelSpec {
    fn dim(&self) -> usize {
        self.n() + 2
    }

    fn x_domain(&self) -> Interval {
        self.x_domain
    }

    fn metric_jet(&self, q: &[f64]) -> Result<MetricJet> {
        if q.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: q.len(),
            });
        }
        let p = Point::from_coords(q);
        let m = metric_at(self, &p)?;
        let n = self.n();
        let dim = n + 2;
        let eta_p = self.eta.partials(p.x, p.u, 1);
        let (eta, eta_x, eta_u) = (eta_p.get(0, 0), eta_p.get(1, 0), eta_p.get(0, 1));
        let f = |j: usize| self.f_at(j, 0, p.x);
        let df = |j: usize| self.f_at(j, 1, p.x);

        // db[m][j] = ∂_m b_j
        let mut db = vec![vec![0.0; n + 1]; dim];
        for j in 0..=n {
            let jj = j as i64;
            db[0][j] = v_at(&p, jj - 1) * df(j) - v_at(&p, jj + 1) * df(j + 1);
            if j >= 1 {
                db[j][j] += f(j); // ∂_{v_{j-1}} lives at index 1 + (j - 1)
            }
            if j < n {
                db[j + 2][j] -= f(j + 1); // ∂_{v_{j+1}} lives at index j + 2
            }
        }
        let mut dg = Vec::with_capacity(dim);
        for (mi, dbm) in db.iter().enumerate() {
            let mut d = DMatrix::zeros(dim, dim);
            let deta2 = match mi {
                0 => 2.0 * eta * eta_x,
                1 => 2.0 * eta * eta_u,
                _ => 0.0,
            };
            d[(0, 0)] = deta2 + 2.0 * m.b.iter().zip(dbm).map(|(b, d)| b * d).sum::<f64>();
            for j in 0..=n {
                d[(0, 1 + j)] = dbm[j];
                d[(1 + j, 0)] = dbm[j];
            }
            dg.push(d);
        }
        Ok(MetricJet {
            g: m.g,
            g_inv: m.g_inv,
            dg,
        })
    }
}

/// A metric outside the family: `g_{v_1 v_1}` of a [`ModelSpec`] is replaced
/// by `1 + ε (x² + u²)`. Used as a negative control for nullity checks.
#[derive(Debug, Clone)]
pub struct PerturbedModel {
    pub base: ModelSpec,
    pub epsilon: f64,
}

impl CoordinateMetric for PerturbedModel {
    fn dim(&self) -> usize {
        self.base.dim()
    }

    fn x_domain(&self) -> Interval {
        self.base.domain()
    }

    fn metric_jet(&self, q: &[f64]) -> Result<MetricJet> {
        let mut jet = self.base.metric_jet(q)?;
        let (x, u) = (q[0], q[1]);
        jet.g[(2, 2)] += self.epsilon * (x * x + u * u);
        jet.dg[0][(2, 2)] += 2.0 * self.epsilon * x;
        jet.dg[1][(2, 2)] += 2.0 * self.epsilon * u;
        jet.g_inv = jet
            .g
            .clone()
            .lu()
            .try_inverse()
            .ok_or(Error::DegenerateMetric {
                x,
                u,
                eta: f64::NAN,
            })?;
        Ok(jet)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{builtin_ch_eta, constant, constant_2d, expr_1d};

    fn flat(n: usize) -> ModelSpec {
        ModelSpec::new(
            vec![constant(0.0); n],
            constant_2d(1.0),
            Interval::real_line(),
        )
        .unwrap()
    }

    #[test]
    fn flat_spec_is_euclidean() {
        let s = flat(2);
        let m = metric_at(&s, &Point::new(0.3, -1.0, vec![2.0, 5.0])).unwrap();
        assert_eq!(m.g, DMatrix::identity(4, 4));
        assert_eq!(m.g_inv, DMatrix::identity(4, 4));
    }

    #[test]
    fn worked_example_n2() {
        let s = ModelSpec::new(
            vec![constant(1.0), constant(2.0)],
            constant_2d(1.0),
            Interval::real_line(),
        )
        .unwrap();
        let p = Point::new(0.0, 1.0, vec![3.0, 5.0]);
        let m = metric_at(&s, &p).unwrap();
        assert_eq!(m.b, vec![-3.0, -9.0, 6.0]);
        assert_eq!(m.g[(0, 0)], 127.0);
        let lu = m.g.clone().lu().try_inverse().unwrap();
        assert!(max_abs(&(lu - &m.g_inv)) < 1e-10);
        assert!(max_abs(&(&m.g * &m.g_inv - DMatrix::identity(4, 4))) < 1e-10);
        let frame = orthonormal_frame(&s, &p).unwrap();
        assert!(gram_deviation(&m.g, &frame) < 1e-10);
        assert!(leading_minors_positive(&m.g));
    }

    #[test]
    fn base_curve_metric_is_identity() {
        let s = ModelSpec::new(
            vec![expr_1d("sin(x)+2").unwrap()],
            builtin_ch_eta(constant(0.7)).unwrap(),
            Interval::real_line(),
        )
        .unwrap();
        let m = metric_at(&s, &Point::on_base(1.3, 1)).unwrap();
        assert!(max_abs(&(m.g - DMatrix::identity(3, 3))) < 1e-15);
        let e = &orthonormal_frame(&s, &Point::on_base(1.3, 1)).unwrap()[0];
        assert_eq!(e[0], 1.0);
    }

    #[test]
    fn g_xu_is_minus_v1_f1() {
        let s = ModelSpec::new(
            vec![expr_1d("sin(x)+2").unwrap(), constant(-0.5)],
            builtin_ch_eta(constant(0.2)).unwrap(),
            Interval::real_line(),
        )
        .unwrap();
        let p = Point::new(0.4, 0.9, vec![1.5, -2.0]);
        let m = metric_at(&s, &p).unwrap();
        assert_eq!(m.g[(0, 1)], -1.5 * (0.4_f64.sin() + 2.0));
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(ModelSpec::new(vec![], constant_2d(1.0), Interval::real_line()).is_err());
        assert!(matches!(
            ModelSpec::new(vec![constant(1.0)], constant_2d(2.0), Interval::real_line()),
            Err(Error::EtaNormalization { .. })
        ));
        let s = ModelSpec::new(
            vec![constant(1.0)],
            builtin_ch_eta(constant(-1.5)).unwrap(),
            Interval::new(0.0, 1.0).unwrap(),
        )
        .unwrap();
        assert!(matches!(
            metric_at(&s, &Point::new(0.5, 2.0, vec![0.0])),
            Err(Error::DegenerateMetric { .. })
        ));
        assert!(matches!(
            metric_at(&s, &Point::new(1.5, 0.0, vec![0.0])),
            Err(Error::OutsideDomain { .. })
        ));
        assert!(s
            .check_positive(Interval::new(-1.0, 1.0).unwrap(), 9)
            .is_err());
    }

    #[test]
    fn analytic_metric_partials_match_fd() {
        let s = ModelSpec::new(
            vec![expr_1d("sin(x)+2").unwrap(), expr_1d("x^2 - 1").unwrap()],
            builtin_ch_eta(expr_1d("0.3*cos(x)").unwrap()).unwrap(),
            Interval::real_line(),
        )
        .unwrap();
        let q = [0.3, 0.7, -1.2, 0.8];
        let jet = s.metric_jet(&q).unwrap();
        let h = 1e-6;
        for m in 0..4 {
            let mut qp = q;
            let mut qm = q;
            qp[m] += h;
            qm[m] -= h;
            let fd = (s.metric_jet(&qp).unwrap().g - s.metric_jet(&qm).unwrap().g) / (2.0 * h);
            assert!(max_abs(&(fd - &jet.dg[m])) < 1e-7, "coordinate {m}");
        }
    }
}
