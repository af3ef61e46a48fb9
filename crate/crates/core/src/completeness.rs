//! Completeness machinery: the rotation ODE `S' = S A` that turns the
//! family into a warped product, and sufficient-condition certificates.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::curvature::scal_closed_form;
use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::metric::{metric_at, ModelSpec, Point};
use crate::numeric::golden_section;

const PROJECT_EVERY: usize = 100;

/// Skew tridiagonal `A(x)` with `A[i+1][i] = f_{i+1}`, `A[i][i+1] = -f_{i+1}`,
/// so that `(A V)_j = b_j` for `V = (u, v_1, …, v_n)`.
pub fn rotation_generator(spec: &ModelSpec, x: f64) -> DMatrix<f64> {
    let n = spec.n();
    let mut a = DMatrix::zeros(n + 1, n + 1);
    for i in 0..n {
        let f = spec.f_at(i + 1, 0, x);
        a[(i + 1, i)] = f;
        a[(i, i + 1)] = -f;
    }
    a
}

#[derive(Debug, Clone)]
pub struct RotationPath {
    pub xs: Vec<f64>,
    pub s: Vec<DMatrix<f64>>,
    pub step: f64,
    /// Largest `‖SᵀS - I‖_max` seen right before a projection (or at the end).
    pub max_drift: f64,
    /// `max_drift` divided by the `x`-length between projections.
    pub drift_per_unit: f64,
}

impl RotationPath {
    pub fn orthogonality_error(&self) -> f64 {
        self.s
            .iter()
            .map(|s| {
                let d = s.nrows();
                (s.transpose() * s - DMatrix::<f64>::identity(d, d)).amax()
            })
            .fold(0.0, f64::max)
    }

    pub fn min_determinant(&self) -> f64 {
        self.s
            .iter()
            .map(|s| s.clone().determinant())
            .fold(f64::INFINITY, f64::min)
    }

    pub fn index_of(&self, x: f64) -> Option<usize> {
        let t = (x - self.xs[0]) / self.step;
        let i = t.round();
        (i >= 0.0 && (i as usize) < self.xs.len() && (t - i).abs() < 1e-6).then_some(i as usize)
    }

    /// `S'(x_i)` by a five-point stencil on grid nodes.
    pub fn derivative_at(&self, i: usize) -> Option<DMatrix<f64>> {
        if i < 2 || i + 2 >= self.s.len() {
            return None;
        }
        let h = self.step;
        Some(
            (&self.s[i - 2] - &self.s[i - 1] * 8.0 + &self.s[i + 1] * 8.0 - &self.s[i + 2])
                / (12.0 * h),
        )
    }
}

fn polar(s: &DMatrix<f64>) -> DMatrix<f64> {
    let svd = s.clone().svd(true, true);
    svd.u.unwrap() * svd.v_t.unwrap()
}

fn rk4_matrix(spec: &ModelSpec, x: f64, s: &DMatrix<f64>, h: f64) -> DMatrix<f64> {
    let f = |x: f64, s: &DMatrix<f64>| s * rotation_generator(spec, x);
    let k1 = f(x, s);
    let k2 = f(x + 0.5 * h, &(s + &k1 * (0.5 * h)));
    let k3 = f(x + 0.5 * h, &(s + &k2 * (0.5 * h)));
    let k4 = f(x + h, &(s + &k3 * h));
    s + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0)
}

/// Largest `|h| ‖A‖_∞` allowed in a single RK4 stage.
const MAX_ROTATION_STAGE: f64 = 0.02;

/// One grid step, split into equal RK4 substeps when `|h| ‖A(x)‖_∞` is large.
fn rotation_step(spec: &ModelSpec, x: f64, s: &DMatrix<f64>, h: f64) -> DMatrix<f64> {
    let rate = [x, x + 0.5 * h, x + h]
        .iter()
        .map(|&t| rotation_generator(spec, t).abs().row_sum().max())
        .fold(0.0, f64::max);
    let sub = ((h.abs() * rate / MAX_ROTATION_STAGE).ceil() as usize).max(1);
    let dh = h / sub as f64;
    let mut out = s.clone();
    for k in 0..sub {
        out = rk4_matrix(spec, x + k as f64 * dh, &out, dh);
    }
    out
}

/// Integrates `S' = S A` with `S(0) = I` (or `S(lo) = I` when `0` is not in
/// the range) on a uniform grid, projecting onto `SO(n+1)` every 100 steps.
pub fn solve_rotation(spec: &ModelSpec, x_range: Interval, step: f64) -> Result<RotationPath> {
    if !(step > 0.0) || !x_range.is_bounded() {
        return Err(Error::InvalidParameter(
            "solve_rotation needs step > 0 and a bounded range".into(),
        ));
    }
    let anchor = if x_range.contains_closed(0.0) {
        0.0
    } else {
        x_range.lo
    };
    let dim = spec.n() + 1;
    let up = ((x_range.hi - anchor) / step).round() as usize;
    let down = ((anchor - x_range.lo) / step).round() as usize;
    let mut max_drift: f64 = 0.0;
    let mut march = |count: usize, dir: f64| {
        let mut s = DMatrix::identity(dim, dim);
        let mut out = Vec::with_capacity(count);
        for k in 0..count {
            let x = anchor + dir * k as f64 * step;
            s = rotation_step(spec, x, &s, dir * step);
            if (k + 1) % PROJECT_EVERY == 0 || k + 1 == count {
                let drift = (s.transpose() * &s - DMatrix::<f64>::identity(dim, dim)).amax();
                max_drift = max_drift.max(drift);
                if (k + 1) % PROJECT_EVERY == 0 {
                    s = polar(&s);
                }
            }
            out.push(s.clone());
        }
        out
    };
    let forward = march(up, 1.0);
    let mut backward = march(down, -1.0);
    backward.reverse();
    let mut s = backward;
    s.push(DMatrix::identity(dim, dim));
    s.extend(forward);
    let xs = (0..s.len())
        .map(|i| anchor + (i as f64 - down as f64) * step)
        .collect();
    let span = (PROJECT_EVERY as f64 * step).min(x_range.width());
    Ok(RotationPath {
        xs,
        s,
        step,
        max_drift,
        drift_per_unit: max_drift / span,
    })
}

/// Largest relative discrepancy between `g(X, Y)` from `metric_at` and the warped form
/// `η² X^x Y^x + ⟨S(A V X^x + X^V), S(A V Y^x + Y^V)⟩` at `samples` random
/// grid points, tangents and leaf coordinates, with `dθ = S (A V dx + dV)`;
/// the scale is `1 + |η² X^x Y^x| + |dθ(X)| |dθ(Y)|`.
pub fn warped_metric_check(
    spec: &ModelSpec,
    path: &RotationPath,
    samples: usize,
    seed: u64,
) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dim = spec.n() + 2;
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let i = rng.random_range(0..path.s.len());
        let x = path.xs[i];
        let s = &path.s[i];
        let ds = s * rotation_generator(spec, x);
        let v = DVector::from_fn(dim - 1, |_, _| rng.random_range(-2.0..2.0));
        let p = Point::new(x, v[0], v.as_slice()[1..].to_vec());
        let m = metric_at(spec, &p)?;
        let eta = m.eta;
        let tx = DVector::from_fn(dim, |_, _| rng.random_range(-1.0..1.0));
        let ty = DVector::from_fn(dim, |_, _| rng.random_range(-1.0..1.0));
        let push = |t: &DVector<f64>| -> DVector<f64> {
            let dv = DVector::from_column_slice(&t.as_slice()[1..]);
            &ds * &v * t[0] + s * dv
        };
        let (px, py) = (push(&tx), push(&ty));
        let warped = eta * eta * tx[0] * ty[0] + px.dot(&py);
        let direct = (tx.transpose() * &m.g * &ty)[(0, 0)];
        let scale = 1.0 + (eta * eta * tx[0] * ty[0]).abs() + px.norm() * py.norm();
        worst = worst.max((warped - direct).abs() / scale);
    }
    Ok(worst)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    CompleteByProp1,
    CompleteByProp2,
    CompleteByCor,
    Inconclusive,
    IncompleteDomain,
}

impl Verdict {
    pub fn name(self) -> &'static str {
        match self {
            Verdict::CompleteByProp1 => "CompleteByProp1",
            Verdict::CompleteByProp2 => "CompleteByProp2",
            Verdict::CompleteByCor => "CompleteByCor",
            Verdict::Inconclusive => "Inconclusive",
            Verdict::IncompleteDomain => "IncompleteDomain",
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct CertificateGrid {
    /// Half-width of the `x`-window used on unbounded domains.
    pub x_window: f64,
    pub x_count: usize,
    pub u_range: Interval,
    pub u_count: usize,
    /// Known bound `|k_γ| <= Λ`; inferred from the grid when `None`.
    pub lambda: Option<f64>,
}

impl Default for CertificateGrid {
    fn default() -> Self {
        Self {
            x_window: 10.0,
            x_count: 201,
            u_range: Interval { lo: -3.0, hi: 3.0 },
            u_count: 61,
            lambda: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Certificate {
    pub verdict: Verdict,
    /// Grid point maximizing `|k_γ(x)| / √(|Scal(x,u)|/2)`.
    pub binding_point: (f64, f64),
    pub max_ratio: f64,
    /// `1 - max_ratio`, when positive.
    pub epsilon: Option<f64>,
    /// `√(1 - c²)` at the binding point, `c = max_ratio` (when `< 1`).
    pub jacobi_lower_bound: Option<f64>,
    /// `√(1 - ε²)` and `√(ε(2 - ε))` for the achieved `ε`.
    pub stated_constant: Option<f64>,
    pub sharp_constant: Option<f64>,
    pub max_scal: f64,
    pub max_abs_k: f64,
    /// `Λ` used for the bounded-`k_γ` test; `None` when `k_γ` looks unbounded.
    pub lambda: Option<f64>,
    pub witness: Option<String>,
}

/// `min_t cosh(λt) + c sinh(λt) = √(1 - c²)` for `|c| < 1`.
pub fn jacobi_lower_bound(c: f64) -> f64 {
    (1.0 - c * c).sqrt()
}

/// Numerical minimum of `cosh(λt) + c sinh(λt)` over `t ∈ [-50, 50]`.
pub fn jacobi_minimum_numeric(c: f64, lambda: f64) -> f64 {
    let f = |t: f64| (lambda * t).cosh() + c * (lambda * t).sinh();
    let grid: Vec<f64> = (0..=2000).map(|i| -50.0 + 0.05 * i as f64).collect();
    let best = grid
        .iter()
        .copied()
        .min_by(|a, b| f(*a).total_cmp(&f(*b)))
        .unwrap();
    golden_section(f, (best - 0.05).max(-50.0), (best + 0.05).min(50.0), 1e-12).1
}

pub fn completeness_certificate(spec: &ModelSpec, grid: &CertificateGrid) -> Result<Certificate> {
    let dom = spec.domain();
    let window = dom.clipped(grid.x_window);
    let pad = 1e-6 * window.width();
    let xs = Interval {
        lo: window.lo + pad,
        hi: window.hi - pad,
    }
    .linspace(grid.x_count);
    let us = grid.u_range.linspace(grid.u_count);

    let mut max_scal = f64::NEG_INFINITY;
    let mut max_ratio: f64 = 0.0;
    let mut binding = (xs[0], us[0]);
    let mut max_abs_k: f64 = 0.0;
    let mut inner_abs_k: f64 = 0.0;
    let half = 0.5 * grid.x_window;
    for &x in &xs {
        let k = spec.eta().partial(0, 1, x, 0.0);
        max_abs_k = max_abs_k.max(k.abs());
        if x.abs() <= half {
            inner_abs_k = inner_abs_k.max(k.abs());
        }
        for &u in &us {
            let scal = scal_closed_form(spec, x, u);
            if !(scal < 0.0) {
                return Err(Error::PositiveScal { x, u, scal });
            }
            max_scal = max_scal.max(scal);
            let ratio = k.abs() / (0.5 * scal.abs()).sqrt();
            if ratio > max_ratio {
                max_ratio = ratio;
                binding = (x, u);
            }
        }
    }

    let lambda = grid.lambda.or_else(|| {
        // a bounded k_γ should not keep growing as the window doubles
        let unbounded = dom.is_real_line() && max_abs_k > 1.5 * inner_abs_k.max(1e-300);
        (!unbounded).then_some(max_abs_k)
    });

    let epsilon = (max_ratio < 1.0 - 1e-9).then_some(1.0 - max_ratio);
    let jacobi = (max_ratio < 1.0).then(|| jacobi_lower_bound(max_ratio));
    let stated = epsilon.map(|e| (1.0 - e * e).sqrt());
    let sharp = epsilon.map(|e| (e * (2.0 - e)).sqrt());

    let tol = 1e-9;
    let (verdict, witness) = if !dom.is_real_line() {
        (
            Verdict::IncompleteDomain,
            Some(format!("x-domain ({}, {}) is not all of R", dom.lo, dom.hi)),
        )
    } else if max_scal <= -2.0 + tol && max_abs_k <= 1.0 + tol {
        (Verdict::CompleteByCor, None)
    } else if max_ratio <= 1.0 + tol && lambda.is_some_and(|l| max_abs_k <= l + tol) {
        (Verdict::CompleteByProp1, None)
    } else if epsilon.is_some() {
        (Verdict::CompleteByProp2, None)
    } else {
        let (x, u) = binding;
        let k = spec.eta().partial(0, 1, x, 0.0);
        let mut reasons = Vec::new();
        if max_abs_k > 1.0 + tol {
            reasons.push(format!("|k_gamma| = {:.6} > 1", max_abs_k));
        }
        if max_scal > -2.0 + tol {
            reasons.push(format!("max Scal = {:.6} > -2", max_scal));
        }
        reasons.push(format!(
            "ratio |k_gamma|/sqrt(|Scal|/2) = {:.6} >= 1",
            max_ratio
        ));
        if lambda.is_none() {
            reasons.push("k_gamma grows with the window".into());
        }
        (
            Verdict::Inconclusive,
            Some(format!(
                "at (x, u) = ({x:.6}, {u:.6}), k_gamma = {k:.6}: {}",
                reasons.join("; ")
            )),
        )
    };
    Ok(Certificate {
        verdict,
        binding_point: binding,
        max_ratio,
        epsilon,
        jacobi_lower_bound: jacobi,
        stated_constant: stated,
        sharp_constant: sharp,
        max_scal,
        max_abs_k,
        lambda,
        witness,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{builtin_ch_eta, constant, constant_2d, expr_2d};

    fn expm(a: &DMatrix<f64>) -> DMatrix<f64> {
        // scaling and squaring with a 20-term Taylor series
        let norm = a.amax() * a.nrows() as f64;
        let k = norm.log2().ceil().max(0.0) as i32 + 1;
        let b = a / 2f64.powi(k);
        let d = a.nrows();
        let mut term = DMatrix::<f64>::identity(d, d);
        let mut sum = term.clone();
        for j in 1..20 {
            term = &term * &b / j as f64;
            sum += &term;
        }
        for _ in 0..k {
            sum = &sum * &sum;
        }
        sum
    }

    #[test]
    fn flat_rotation_is_identity() {
        let s =
            ModelSpec::new(vec![constant(0.0)], constant_2d(1.0), Interval::real_line()).unwrap();
        let path = solve_rotation(&s, Interval::new(0.0, 2.0).unwrap(), 0.01).unwrap();
        assert!(path.s.iter().all(|m| *m == DMatrix::identity(2, 2)));
        assert!(warped_metric_check(&s, &path, 20, 1).unwrap() < 1e-14);
    }

    #[test]
    fn constant_f_gives_rotation() {
        let s =
            ModelSpec::new(vec![constant(1.0)], constant_2d(1.0), Interval::real_line()).unwrap();
        let pi = std::f64::consts::PI;
        let path = solve_rotation(&s, Interval::new(0.0, pi).unwrap(), pi / 3000.0).unwrap();
        let end = path.s.last().unwrap();
        let want = expm(&(rotation_generator(&s, 0.0) * pi));
        assert!((end - &want).amax() < 1e-8);
        assert!((end[(0, 0)] + 1.0).abs() < 1e-8);
    }

    #[test]
    fn two_generators_match_matrix_exponential() {
        let s = ModelSpec::new(
            vec![constant(1.0), constant(2.0)],
            constant_2d(1.0),
            Interval::real_line(),
        )
        .unwrap();
        let path = solve_rotation(&s, Interval::new(-1.0, 1.0).unwrap(), 1e-3).unwrap();
        let a = rotation_generator(&s, 0.0);
        let i = path.index_of(1.0).unwrap();
        assert!((&path.s[i] - expm(&a)).amax() < 1e-7);
        let i = path.index_of(-1.0).unwrap();
        assert!((&path.s[i] - expm(&(-a))).amax() < 1e-7);
        assert!(path.orthogonality_error() < 1e-8);
        assert!(path.min_determinant() > 0.0);
    }

    #[test]
    fn fast_rotation_is_substepped() {
        let s = ModelSpec::new(
            vec![constant(30.0), constant(45.0)],
            constant_2d(1.0),
            Interval::real_line(),
        )
        .unwrap();
        let path = solve_rotation(&s, Interval::new(0.0, 2.0).unwrap(), 1e-3).unwrap();
        assert!(path.orthogonality_error() < 1e-8);
        let a = rotation_generator(&s, 0.0);
        let i = path.index_of(0.5).unwrap();
        assert!((&path.s[i] - expm(&(a * 0.5))).amax() < 1e-7);
    }

    #[test]
    fn warped_metric_tangent_u_has_unit_norm() {
        let s = crate::library::curvature_homogeneous();
        let path = solve_rotation(&s, Interval::new(0.0, 1.0).unwrap(), 1e-3).unwrap();
        let i = path.index_of(0.5).unwrap();
        let du = &path.s[i] * DVector::from_column_slice(&[1.0, 0.0, 0.0]);
        assert!((du.norm() - 1.0).abs() < 1e-12);
        let m = metric_at(&s, &Point::new(0.5, 0.0, vec![0.0, 0.0])).unwrap();
        assert_eq!(m.g[(1, 1)], 1.0);
    }

    #[test]
    fn certificate_examples() {
        let cor = |k: f64| {
            let s = ModelSpec::new(
                vec![constant(1.0)],
                builtin_ch_eta(constant(k)).unwrap(),
                Interval::real_line(),
            )
            .unwrap();
            completeness_certificate(&s, &CertificateGrid::default()).unwrap()
        };
        assert_eq!(cor(0.5).verdict, Verdict::CompleteByCor);
        assert_eq!(cor(1.0).verdict, Verdict::CompleteByCor);
        let c = cor(1.5);
        assert_eq!(c.verdict, Verdict::Inconclusive);
        assert!(c.witness.unwrap().contains("> 1"));

        let s = ModelSpec::new(
            vec![constant(1.0)],
            expr_2d("exp(-(x^2+1)*u)").unwrap(),
            Interval::real_line(),
        )
        .unwrap();
        let c = completeness_certificate(&s, &CertificateGrid::default()).unwrap();
        assert_eq!(c.verdict, Verdict::Inconclusive);
        assert!(c.lambda.is_none());

        let s = ModelSpec::new(
            vec![constant(1.0)],
            builtin_ch_eta(constant(0.5)).unwrap(),
            Interval::new(0.0, 1.0).unwrap(),
        )
        .unwrap();
        let c = completeness_certificate(&s, &CertificateGrid::default()).unwrap();
        assert_eq!(c.verdict, Verdict::IncompleteDomain);
    }

    #[test]
    fn positive_scal_is_rejected() {
        let s = ModelSpec::new(
            vec![constant(1.0)],
            expr_2d("cos(u)").unwrap(),
            Interval::real_line(),
        )
        .unwrap();
        let g = CertificateGrid {
            u_range: Interval::new(-1.0, 1.0).unwrap(),
            ..CertificateGrid::default()
        };
        assert!(matches!(
            completeness_certificate(&s, &g),
            Err(Error::PositiveScal { .. })
        ));
    }

    #[test]
    fn jacobi_minimum() {
        for c in [-0.9, -0.3, 0.0, 0.5, 0.99] {
            assert!((jacobi_minimum_numeric(c, 1.3) - jacobi_lower_bound(c)).abs() < 1e-6);
        }
    }
}
