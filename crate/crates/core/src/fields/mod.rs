//! Scalar fields with analytic derivatives.
//!
//! One-variable fields carry `f_i(x)`, `k_γ(x)` and turning angles `H(s)`;
//! two-variable fields carry `η(x, u)` and scalar curvature `Scal(x, u)`.

pub mod check;
pub mod expr;
pub mod jet;
pub mod ode;

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::interval::Interval;

use expr::{Expr, ExprError};

pub use ode::{eta_from_scal, EtaFromScal, EtaSolve};

pub const DEFAULT_ORDER: usize = 4;
const EXPR_ORDER: usize = 8;
const BUMP_ORDER: usize = 8;

pub trait Field1D: Send + Sync + fmt::Debug {
    /// `k`-th derivative; NaN beyond `max_order`.
    fn deriv(&self, k: usize, x: f64) -> f64;

    fn max_order(&self) -> usize;

    fn value(&self, x: f64) -> f64 {
        self.deriv(0, x)
    }

    /// Interval outside which the field vanishes identically.
    fn support(&self) -> Option<Interval> {
        None
    }

    fn describe(&self) -> String;
}

/// All partials `∂^{a+b}/∂x^a ∂u^b` with `a + b <= order` at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct Partials {
    order: usize,
    data: Vec<f64>,
}

impl Partials {
    pub fn from_fn(order: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity((order + 1) * (order + 2) / 2);
        for d in 0..=order {
            for b in 0..=d {
                data.push(f(d - b, b));
            }
        }
        Self { order, data }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn get(&self, a: usize, b: usize) -> f64 {
        let d = a + b;
        if d > self.order {
            return f64::NAN;
        }
        self.data[d * (d + 1) / 2 + b]
    }
}

pub trait Field2D: Send + Sync + fmt::Debug {
    /// `∂^{a+b} F / ∂x^a ∂u^b`; NaN when `a + b > max_order`.
    fn partial(&self, a: usize, b: usize, x: f64, u: f64) -> f64;

    fn max_order(&self) -> usize;

    fn value(&self, x: f64, u: f64) -> f64 {
        self.partial(0, 0, x, u)
    }

    fn partials(&self, x: f64, u: f64, order: usize) -> Partials {
        Partials::from_fn(order, |a, b| self.partial(a, b, x, u))
    }

    fn describe(&self) -> String;
}

pub type ScalarField1D = Arc<dyn Field1D>;
pub type ScalarField2D = Arc<dyn Field2D>;

#[derive(Debug, Clone)]
pub struct Constant(pub f64);

impl Field1D for Constant {
    fn deriv(&self, k: usize, _x: f64) -> f64 {
        if k == 0 {
            self.0
        } else {
            0.0
        }
    }
    fn max_order(&self) -> usize {
        usize::MAX / 2
    }
    fn describe(&self) -> String {
        format!("{}", self.0)
    }
}

impl Field2D for Constant {
    fn partial(&self, a: usize, b: usize, _x: f64, _u: f64) -> f64 {
        if a + b == 0 {
            self.0
        } else {
            0.0
        }
    }
    fn max_order(&self) -> usize {
        usize::MAX / 2
    }
    fn describe(&self) -> String {
        format!("{}", self.0)
    }
}

/// `Σ c_k x^k`, coefficients in ascending order.
#[derive(Debug, Clone)]
pub struct Polynomial {
    coeffs: Vec<f64>,
}

impl Polynomial {
    pub fn new(coeffs: Vec<f64>) -> Self {
        Self { coeffs }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }
}

impl Field1D for Polynomial {
    fn deriv(&self, k: usize, x: f64) -> f64 {
        // Horner on the k-th derivative's coefficients
        let mut acc = 0.0;
        for (i, c) in self.coeffs.iter().enumerate().skip(k).rev() {
            let falling: f64 = ((i - k + 1)..=i).map(|m| m as f64).product();
            acc = acc * x + c * falling;
        }
        acc
    }
    fn max_order(&self) -> usize {
        usize::MAX / 2
    }
    fn describe(&self) -> String {
        let terms: Vec<String> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| **c != 0.0)
            .map(|(i, c)| match i {
                0 => format!("{c}"),
                1 => format!("{c}*x"),
                _ => format!("{c}*x^{i}"),
            })
            .collect();
        if terms.is_empty() {
            "0".into()
        } else {
            terms.join(" + ")
        }
    }
}

/// `amplitude * sin(frequency * x + phase) + offset`.
#[derive(Debug, Clone)]
pub struct Sine {
    pub amplitude: f64,
    pub frequency: f64,
    pub phase: f64,
    pub offset: f64,
}

impl Field1D for Sine {
    fn deriv(&self, k: usize, x: f64) -> f64 {
        let arg = self.frequency * x + self.phase + k as f64 * std::f64::consts::FRAC_PI_2;
        let v = self.amplitude * self.frequency.powi(k as i32) * arg.sin();
        if k == 0 {
            v + self.offset
        } else {
            v
        }
    }
    fn max_order(&self) -> usize {
        usize::MAX / 2
    }
    fn describe(&self) -> String {
        format!(
            "{}*sin({}*x + {}) + {}",
            self.amplitude, self.frequency, self.phase, self.offset
        )
    }
}

/// `c * exp(-1/(1 - t^2))` with `t = (x - center)/radius` on `|t| < 1`, zero outside.
#[derive(Debug, Clone)]
pub struct FlatBump {
    center: f64,
    radius: f64,
    amplitude: f64,
    // P_k as ascending coefficient lists in t
    prefactors: Vec<Vec<f64>>,
}

impl FlatBump {
    pub fn new(center: f64, radius: f64, amplitude: f64) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "flat bump radius must be positive, got {radius}"
            )));
        }
        // P_0 = 1, P_{k+1} = P_k' w^2 + (4k t w - 2t) P_k with w = 1 - t^2
        let w = [1.0, 0.0, -1.0];
        let mut prefactors = vec![vec![1.0]];
        for k in 0..BUMP_ORDER {
            let p = &prefactors[k];
            let dp: Vec<f64> = p
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| i as f64 * c)
                .collect();
            let w2 = poly_mul(&w, &w);
            let mut next = poly_mul(&dp, &w2);
            let twt = poly_mul(&[0.0, 4.0 * k as f64], &w);
            let factor = poly_add(&twt, &[0.0, -2.0]);
            next = poly_add(&next, &poly_mul(&factor, p));
            prefactors.push(next);
        }
        Ok(Self {
            center,
            radius,
            amplitude,
            prefactors,
        })
    }

    pub fn interval(&self) -> Interval {
        Interval {
            lo: self.center - self.radius,
            hi: self.center + self.radius,
        }
    }
}

fn poly_mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn poly_add(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len().max(b.len())];
    for (i, x) in a.iter().enumerate() {
        out[i] += x;
    }
    for (i, y) in b.iter().enumerate() {
        out[i] += y;
    }
    out
}

fn poly_eval(p: &[f64], t: f64) -> f64 {
    p.iter().rev().fold(0.0, |acc, c| acc * t + c)
}

impl Field1D for FlatBump {
    fn deriv(&self, k: usize, x: f64) -> f64 {
        if k > BUMP_ORDER {
            return f64::NAN;
        }
        let t = (x - self.center) / self.radius;
        let w = 1.0 - t * t;
        if w <= 0.0 {
            return 0.0;
        }
        let log_mag = -1.0 / w - 2.0 * k as f64 * w.ln();
        self.amplitude
            * self.radius.powi(-(k as i32))
            * poly_eval(&self.prefactors[k], t)
            * log_mag.exp()
    }
    fn max_order(&self) -> usize {
        BUMP_ORDER
    }
    fn support(&self) -> Option<Interval> {
        Some(self.interval())
    }
    fn describe(&self) -> String {
        format!(
            "flat_bump(center={}, radius={}, amplitude={})",
            self.center, self.radius, self.amplitude
        )
    }
}

#[derive(Debug, Clone)]
pub struct Sum {
    parts: Vec<ScalarField1D>,
}

impl Sum {
    pub fn new(parts: Vec<ScalarField1D>) -> Self {
        Self { parts }
    }
}

impl Field1D for Sum {
    fn deriv(&self, k: usize, x: f64) -> f64 {
        self.parts.iter().map(|p| p.deriv(k, x)).sum()
    }
    fn max_order(&self) -> usize {
        self.parts
            .iter()
            .map(|p| p.max_order())
            .min()
            .unwrap_or(usize::MAX / 2)
    }
    fn support(&self) -> Option<Interval> {
        let mut hull: Option<Interval> = None;
        for p in &self.parts {
            let s = p.support()?;
            hull = Some(match hull {
                None => s,
                Some(h) => Interval {
                    lo: h.lo.min(s.lo),
                    hi: h.hi.max(s.hi),
                },
            });
        }
        hull
    }
    fn describe(&self) -> String {
        let parts: Vec<String> = self.parts.iter().map(|p| p.describe()).collect();
        parts.join(" + ")
    }
}

/// `inner` on the open interval, identically 0 outside it.
#[derive(Debug, Clone)]
pub struct Restricted {
    inner: ScalarField1D,
    interval: Interval,
}

impl Restricted {
    pub fn new(inner: ScalarField1D, interval: Interval) -> Self {
        Self { inner, interval }
    }
}

impl Field1D for Restricted {
    fn deriv(&self, k: usize, x: f64) -> f64 {
        if self.interval.contains(x) {
            self.inner.deriv(k, x)
        } else {
            0.0
        }
    }
    fn max_order(&self) -> usize {
        self.inner.max_order()
    }
    fn support(&self) -> Option<Interval> {
        Some(self.interval)
    }
    fn describe(&self) -> String {
        format!(
            "({}) on ({}, {})",
            self.inner.describe(),
            self.interval.lo,
            self.interval.hi
        )
    }
}

/// The `shift`-th derivative of another field.
#[derive(Debug, Clone)]
pub struct Derivative {
    inner: ScalarField1D,
    shift: usize,
}

impl Derivative {
    pub fn new(inner: ScalarField1D, shift: usize) -> Self {
        Self { inner, shift }
    }
}

impl Field1D for Derivative {
    fn deriv(&self, k: usize, x: f64) -> f64 {
        self.inner.deriv(k + self.shift, x)
    }
    fn max_order(&self) -> usize {
        self.inner.max_order().saturating_sub(self.shift)
    }
    fn support(&self) -> Option<Interval> {
        self.inner.support()
    }
    fn describe(&self) -> String {
        format!(
            "d^{}/dx^{} [{}]",
            self.shift,
            self.shift,
            self.inner.describe()
        )
    }
}

/// Continuous piecewise-linear function through `(knots[i], values[i])`,
/// constant beyond the end knots. Lipschitz but not smooth at the knots.
#[derive(Debug, Clone)]
pub struct PiecewiseLinear {
    knots: Vec<f64>,
    values: Vec<f64>,
}

impl PiecewiseLinear {
    pub fn new(knots: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if knots.len() < 2 || knots.len() != values.len() {
            return Err(Error::InvalidParameter(
                "piecewise-linear field needs matching knots and values (>= 2)".into(),
            ));
        }
        if knots.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParameter(
                "piecewise-linear knots must increase strictly".into(),
            ));
        }
        Ok(Self { knots, values })
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    fn segment(&self, x: f64) -> Option<usize> {
        if x <= self.knots[0] || x >= *self.knots.last().unwrap() {
            return None;
        }
        let i = self.knots.partition_point(|k| *k <= x);
        Some(i - 1)
    }
}

impl Field1D for PiecewiseLinear {
    fn deriv(&self, k: usize, x: f64) -> f64 {
        match (k, self.segment(x)) {
            (0, None) => {
                if x <= self.knots[0] {
                    self.values[0]
                } else {
                    *self.values.last().unwrap()
                }
            }
            (0, Some(i)) => {
                let t = (x - self.knots[i]) / (self.knots[i + 1] - self.knots[i]);
                self.values[i] + t * (self.values[i + 1] - self.values[i])
            }
            (1, Some(i)) => {
                (self.values[i + 1] - self.values[i]) / (self.knots[i + 1] - self.knots[i])
            }
            _ => 0.0,
        }
    }
    fn max_order(&self) -> usize {
        DEFAULT_ORDER
    }
    fn describe(&self) -> String {
        format!("piecewise_linear({} knots)", self.knots.len())
    }
}

/// Cubic Hermite interpolant of samples with slopes from finite differences.
/// Used for quantities only known on a grid.
#[derive(Debug, Clone)]
pub struct SampledField1D {
    xs: Vec<f64>,
    ys: Vec<f64>,
    slopes: Vec<f64>,
}

impl SampledField1D {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        if xs.len() < 3 || xs.len() != ys.len() || xs.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParameter(
                "sampled field needs >= 3 strictly increasing nodes".into(),
            ));
        }
        let n = xs.len();
        let slopes = (0..n)
            .map(|i| {
                let (lo, hi) = match i {
                    0 => (0, 2),
                    _ if i == n - 1 => (n - 3, n - 1),
                    _ => (i - 1, i + 1),
                };
                let w = crate::numeric::fd_weights(xs[i], &xs[lo..=hi], 1);
                w.iter().zip(&ys[lo..=hi]).map(|(a, b)| a * b).sum()
            })
            .collect();
        Ok(Self { xs, ys, slopes })
    }
}

impl Field1D for SampledField1D {
    fn deriv(&self, k: usize, x: f64) -> f64 {
        if k > 3 {
            return 0.0;
        }
        let n = self.xs.len();
        let i = self.xs.partition_point(|v| *v <= x).clamp(1, n - 1) - 1;
        let h = self.xs[i + 1] - self.xs[i];
        let t = (x - self.xs[i]) / h;
        let (y0, y1) = (self.ys[i], self.ys[i + 1]);
        let (m0, m1) = (self.slopes[i] * h, self.slopes[i + 1] * h);
        // Hermite basis in t and its derivatives
        let (h00, h10, h01, h11) = match k {
            0 => (
                2.0 * t.powi(3) - 3.0 * t * t + 1.0,
                t.powi(3) - 2.0 * t * t + t,
                -2.0 * t.powi(3) + 3.0 * t * t,
                t.powi(3) - t * t,
            ),
            1 => (
                6.0 * t * t - 6.0 * t,
                3.0 * t * t - 4.0 * t + 1.0,
                -6.0 * t * t + 6.0 * t,
                3.0 * t * t - 2.0 * t,
            ),
            2 => (
                12.0 * t - 6.0,
                6.0 * t - 4.0,
                -12.0 * t + 6.0,
                6.0 * t - 2.0,
            ),
            _ => (12.0, 6.0, -12.0, 6.0),
        };
        (h00 * y0 + h10 * m0 + h01 * y1 + h11 * m1) / h.powi(k as i32)
    }
    fn max_order(&self) -> usize {
        DEFAULT_ORDER
    }
    fn describe(&self) -> String {
        format!("sampled({} nodes)", self.xs.len())
    }
}

/// One-variable field parsed from an expression in `x` (or `s`).
#[derive(Debug, Clone)]
pub struct ExprField1D {
    source: String,
    expr: Expr,
    order: usize,
}

impl ExprField1D {
    pub fn parse(source: &str) -> std::result::Result<Self, ExprError> {
        let expr = Expr::parse(source)?;
        if expr.uses_u() {
            return Err(ExprError::UsesU(source.to_string()));
        }
        Ok(Self {
            source: source.to_string(),
            expr,
            order: EXPR_ORDER,
        })
    }
}

impl Field1D for ExprField1D {
    fn deriv(&self, k: usize, x: f64) -> f64 {
        if k > self.order {
            return f64::NAN;
        }
        if k == 0 {
            return self.expr.eval(x, 0.0);
        }
        self.expr.jet(x, 0.0, k).partial(k, 0)
    }
    fn max_order(&self) -> usize {
        self.order
    }
    fn describe(&self) -> String {
        self.source.clone()
    }
}

/// Two-variable field parsed from an expression in `x` and `u`.
#[derive(Debug, Clone)]
pub struct ExprField2D {
    source: String,
    expr: Expr,
    order: usize,
}

impl ExprField2D {
    pub fn parse(source: &str) -> std::result::Result<Self, ExprError> {
        Ok(Self {
            source: source.to_string(),
            expr: Expr::parse(source)?,
            order: EXPR_ORDER,
        })
    }
}

impl Field2D for ExprField2D {
    fn partial(&self, a: usize, b: usize, x: f64, u: f64) -> f64 {
        if a + b > self.order {
            return f64::NAN;
        }
        if a + b == 0 {
            return self.expr.eval(x, u);
        }
        self.expr.jet(x, u, a + b).partial(a, b)
    }
    fn max_order(&self) -> usize {
        self.order
    }
    fn partials(&self, x: f64, u: f64, order: usize) -> Partials {
        let order = order.min(self.order);
        let j = self.expr.jet(x, u, order);
        Partials::from_fn(order, |a, b| j.partial(a, b))
    }
    fn describe(&self) -> String {
        self.source.clone()
    }
}

/// `η(x, u) = cosh u + k(x) sinh u`, the general solution of `η_uu = η`
/// with `η(x, 0) = 1` and `η_u(x, 0) = k(x)`.
#[derive(Debug, Clone)]
pub struct ChEta {
    k: ScalarField1D,
}

impl ChEta {
    pub fn k_gamma(&self) -> &ScalarField1D {
        &self.k
    }
}

impl Field2D for ChEta {
    fn partial(&self, a: usize, b: usize, x: f64, u: f64) -> f64 {
        if a > self.k.max_order() {
            return f64::NAN;
        }
        let (ch, sh) = (u.cosh(), u.sinh());
        let (dch, dsh) = if b.is_multiple_of(2) {
            (ch, sh)
        } else {
            (sh, ch)
        };
        let base = if a == 0 { dch } else { 0.0 };
        base + self.k.deriv(a, x) * dsh
    }
    fn max_order(&self) -> usize {
        self.k.max_order()
    }
    fn describe(&self) -> String {
        format!("cosh(u) + ({}) * sinh(u)", self.k.describe())
    }
}

pub fn builtin_flat_bump(center: f64, radius: f64, amplitude: f64) -> Result<ScalarField1D> {
    Ok(Arc::new(FlatBump::new(center, radius, amplitude)?))
}

pub fn builtin_ch_eta(k_gamma: ScalarField1D) -> Result<ScalarField2D> {
    if k_gamma.max_order() < DEFAULT_ORDER {
        return Err(Error::InvalidParameter(format!(
            "k_gamma exposes derivatives only to order {}",
            k_gamma.max_order()
        )));
    }
    Ok(Arc::new(ChEta { k: k_gamma }))
}

pub fn constant(c: f64) -> ScalarField1D {
    Arc::new(Constant(c))
}

pub fn constant_2d(c: f64) -> ScalarField2D {
    Arc::new(Constant(c))
}

pub fn expr_1d(source: &str) -> Result<ScalarField1D> {
    Ok(Arc::new(ExprField1D::parse(source)?))
}

pub fn expr_2d(source: &str) -> Result<ScalarField2D> {
    Ok(Arc::new(ExprField2D::parse(source)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_bump_examples() {
        let b = builtin_flat_bump(0.5, 0.25, 2.0).unwrap();
        assert_eq!(b.value(0.25), 0.0);
        assert_eq!(b.value(0.75), 0.0);
        assert!((b.value(0.5) - 2.0 * (-1.0_f64).exp()).abs() < 1e-15);
        assert!(b.deriv(1, 0.5).abs() < 1e-15);
        assert!(builtin_flat_bump(0.0, 0.0, 1.0).is_err());
        assert!(builtin_flat_bump(0.0, -1.0, 1.0).is_err());
    }

    #[test]
    fn flat_bump_second_derivative_at_center() {
        // exp(-1/(1-t^2)) = e^{-1} (1 - t^2 + O(t^4)) so f'' = -2 e^{-1}/r^2
        let b = FlatBump::new(0.0, 2.0, 1.0).unwrap();
        let want = -2.0 * (-1.0_f64).exp() / 4.0;
        assert!((b.deriv(2, 0.0) - want).abs() < 1e-14);
    }

    #[test]
    fn flat_bump_decays_near_boundary() {
        let b = FlatBump::new(0.0, 1.0, 1.0).unwrap();
        for k in 0..=6 {
            for m in 0..20 {
                let d = 1e-3 * (m as f64 + 0.5) / 20.0;
                assert!(b.deriv(k, 1.0 - d).abs() < 1e-12, "k={k} d={d}");
                assert!(b.deriv(k, -1.0 + d).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn ch_eta_examples() {
        let eta = builtin_ch_eta(constant(0.0)).unwrap();
        assert_eq!(eta.value(0.0, 0.0), 1.0);
        assert_eq!(eta.partial(0, 1, 0.0, 0.0), 0.0);
        assert_eq!(eta.partial(0, 2, 0.0, 0.0), 1.0);
        let eta = builtin_ch_eta(constant(0.5)).unwrap();
        let want = 1.0_f64.cosh() + 0.5 * 1.0_f64.sinh();
        assert!((eta.value(0.0, 1.0) - want).abs() < 1e-15);
    }

    #[test]
    fn ch_eta_has_scal_minus_two() {
        let eta = builtin_ch_eta(expr_1d("0.3*sin(x)").unwrap()).unwrap();
        for &(x, u) in &[(0.0, 0.0), (1.0, 2.0), (-3.0, -1.5)] {
            let scal = -2.0 * eta.partial(0, 2, x, u) / eta.value(x, u);
            assert!((scal + 2.0).abs() < 1e-14);
        }
    }

    #[test]
    fn polynomial_derivatives() {
        let p = Polynomial::new(vec![1.0, -2.0, 0.0, 3.0]);
        assert_eq!(p.deriv(0, 2.0), 1.0 - 4.0 + 24.0);
        assert_eq!(p.deriv(1, 2.0), -2.0 + 36.0);
        assert_eq!(p.deriv(2, 2.0), 36.0);
        assert_eq!(p.deriv(3, 2.0), 18.0);
        assert_eq!(p.deriv(4, 2.0), 0.0);
    }

    #[test]
    fn expression_fields() {
        let f = expr_1d("sin(x) + 2").unwrap();
        assert!((f.deriv(1, 0.3) - 0.3_f64.cos()).abs() < 1e-15);
        assert!((f.deriv(3, 0.3) + 0.3_f64.cos()).abs() < 1e-14);
        assert!(expr_1d("x*u").is_err());
        let e = expr_2d("exp(-(x^2+1)*u)").unwrap();
        let (x, u) = (0.5, 0.2);
        let q = x * x + 1.0;
        assert!((e.partial(0, 2, x, u) - q * q * (-q * u).exp()).abs() < 1e-14);
        let p = e.partials(x, u, 3);
        assert!((p.get(1, 0) + 2.0 * x * u * (-q * u).exp()).abs() < 1e-14);
    }

    #[test]
    fn sampled_field_reproduces_cubic() {
        let xs: Vec<f64> = (0..21).map(|i| i as f64 * 0.1).collect();
        let ys: Vec<f64> = xs.iter().map(|x| x * x).collect();
        let s = SampledField1D::new(xs, ys).unwrap();
        assert!((s.value(0.55) - 0.3025).abs() < 1e-12);
        assert!((s.deriv(1, 0.55) - 1.1).abs() < 1e-10);
    }

    #[test]
    fn piecewise_linear_is_lipschitz() {
        let p = PiecewiseLinear::new(vec![0.0, 1.0, 2.0], vec![0.0, 1.0, 1.0]).unwrap();
        assert_eq!(p.value(0.5), 0.5);
        assert_eq!(p.deriv(1, 0.5), 1.0);
        assert_eq!(p.deriv(1, 1.5), 0.0);
        assert_eq!(p.value(5.0), 1.0);
    }
}
