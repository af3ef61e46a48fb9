//! Riemann tensor, scalar curvature, nullity and Frenet data.
//!
//! Convention: `R(∂_i, ∂_j)∂_k = R^l_{ijk} ∂_l` with
//! `R^l_{ijk} = ∂_iΓ^l_{jk} - ∂_jΓ^l_{ik} + Γ^m_{jk}Γ^l_{im} - Γ^m_{ik}Γ^l_{jm}`
//! and `R(X, Y, Z, W) = g(R(X, Y)Z, W)`, so `sec(X, Y) = R(X, Y, Y, X)/|X ∧ Y|²`.

use nalgebra::{DMatrix, DVector, Matrix2};

use crate::connection::{christoffel_at, christoffel_general, ChristoffelArray};
use crate::error::{Error, Result};
use crate::metric::{frame_from, inner, metric_at, CoordinateMetric, ModelSpec, Point, Tangent};

pub const RIEMANN_FD_STEP: f64 = 1e-5;

#[derive(Debug, Clone)]
pub struct RiemannTensor {
    dim: usize,
    data: Vec<f64>,
    g: DMatrix<f64>,
}

impl RiemannTensor {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `R^l_{ijk}`.
    pub fn get(&self, l: usize, i: usize, j: usize, k: usize) -> f64 {
        let d = self.dim;
        self.data[((l * d + i) * d + j) * d + k]
    }

    /// `R_{ijkw} = R(∂_i, ∂_j, ∂_k, ∂_w)`.
    pub fn lowered(&self, i: usize, j: usize, k: usize, w: usize) -> f64 {
        (0..self.dim)
            .map(|l| self.g[(l, w)] * self.get(l, i, j, k))
            .sum()
    }

    /// `R(X, Y, Z, W)` for coordinate-component vectors.
    pub fn apply(&self, x: &Tangent, y: &Tangent, z: &Tangent, w: &Tangent) -> f64 {
        let d = self.dim;
        let mut rz = DVector::zeros(d); // R(X, Y)Z
        for l in 0..d {
            let mut acc = 0.0;
            for i in 0..d {
                if x[i] == 0.0 {
                    continue;
                }
                for j in 0..d {
                    if y[j] == 0.0 {
                        continue;
                    }
                    for k in 0..d {
                        acc += self.get(l, i, j, k) * x[i] * y[j] * z[k];
                    }
                }
            }
            rz[l] = acc;
        }
        inner(&self.g, &rz, w)
    }

    /// `Ric_{jk} = R^i_{ijk}`.
    pub fn ricci(&self) -> DMatrix<f64> {
        let d = self.dim;
        DMatrix::from_fn(d, d, |j, k| (0..d).map(|i| self.get(i, i, j, k)).sum())
    }

    pub fn scalar(&self, g_inv: &DMatrix<f64>) -> f64 {
        let ric = self.ricci();
        g_inv.component_mul(&ric).sum()
    }

    pub fn max_abs_lowered(&self) -> f64 {
        let d = self.dim;
        let mut worst: f64 = 0.0;
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    for w in 0..d {
                        worst = worst.max(self.lowered(i, j, k, w).abs());
                    }
                }
            }
        }
        worst
    }

    /// `max |R^l_{ijk} + R^l_{jik}|`.
    pub fn antisymmetry_residual(&self) -> f64 {
        self.fold_indices(|l, i, j, k| self.get(l, i, j, k) + self.get(l, j, i, k))
    }

    /// `max |R^l_{ijk} + R^l_{jki} + R^l_{kij}|`.
    pub fn bianchi_residual(&self) -> f64 {
        self.fold_indices(|l, i, j, k| {
            self.get(l, i, j, k) + self.get(l, j, k, i) + self.get(l, k, i, j)
        })
    }

    fn fold_indices(&self, f: impl Fn(usize, usize, usize, usize) -> f64) -> f64 {
        let d = self.dim;
        let mut worst: f64 = 0.0;
        for l in 0..d {
            for i in 0..d {
                for j in 0..d {
                    for k in 0..d {
                        worst = worst.max(f(l, i, j, k).abs());
                    }
                }
            }
        }
        worst
    }
}

/// Riemann tensor with `∂Γ` from central differences of analytic
/// Christoffel symbols.
pub fn riemann_tensor(metric: &dyn CoordinateMetric, q: &[f64]) -> Result<RiemannTensor> {
    riemann_tensor_with_step(metric, q, RIEMANN_FD_STEP)
}

pub fn riemann_tensor_with_step(
    metric: &dyn CoordinateMetric,
    q: &[f64],
    h: f64,
) -> Result<RiemannTensor> {
    let dom = metric.x_domain();
    let margin = dom.distance_to_boundary(q[0]);
    if margin <= h {
        return Err(Error::NearBoundary { x: q[0], margin });
    }
    let jet = metric.metric_jet(q)?;
    let gamma = crate::connection::christoffel_from_jet(&jet);
    let d = metric.dim();
    let mut dgamma: Vec<ChristoffelArray> = Vec::with_capacity(d);
    for m in 0..d {
        let mut qp = q.to_vec();
        let mut qm = q.to_vec();
        qp[m] += h;
        qm[m] -= h;
        let gp = christoffel_general(metric, &qp)?;
        let gm = christoffel_general(metric, &qm)?;
        let mut diff = ChristoffelArray::zeros(d);
        for k in 0..d {
            for i in 0..d {
                for j in 0..d {
                    diff.set(k, i, j, (gp.get(k, i, j) - gm.get(k, i, j)) / (2.0 * h));
                }
            }
        }
        dgamma.push(diff);
    }
    let mut data = vec![0.0; d * d * d * d];
    for l in 0..d {
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    let mut r = dgamma[i].get(l, j, k) - dgamma[j].get(l, i, k);
                    for m in 0..d {
                        r += gamma.get(m, j, k) * gamma.get(l, i, m)
                            - gamma.get(m, i, k) * gamma.get(l, j, m);
                    }
                    data[((l * d + i) * d + j) * d + k] = r;
                }
            }
        }
    }
    Ok(RiemannTensor {
        dim: d,
        data,
        g: jet.g,
    })
}

#[derive(Debug, Clone)]
pub struct RiemannAtPoint {
    pub tensor: RiemannTensor,
    /// `Scal` from `g^{jk} R^i_{ijk}`.
    pub scal_contraction: f64,
    /// `Scal = -2 η_uu/η`; authoritative.
    pub scal: f64,
    /// `R(e_1, e_2, e_2, e_1)` with `e_1 = ∂u`, `e_2 = e`, by contraction.
    pub sec_e1e2: f64,
}

pub fn scal_closed_form(spec: &ModelSpec, x: f64, u: f64) -> f64 {
    -2.0 * spec.eta().partial(0, 2, x, u) / spec.eta().value(x, u)
}

pub fn riemann_at(spec: &ModelSpec, p: &Point) -> Result<RiemannAtPoint> {
    let m = metric_at(spec, p)?;
    let tensor = riemann_tensor(spec, &p.coords())?;
    let frame = frame_from(&m);
    let e2 = &frame[0];
    let e1 = &frame[1];
    let sec_e1e2 = tensor.apply(e1, e2, e2, e1);
    Ok(RiemannAtPoint {
        scal_contraction: tensor.scalar(&m.g_inv),
        scal: scal_closed_form(spec, p.x, p.u),
        sec_e1e2,
        tensor,
    })
}

/// Largest `|R_{ijkw}|` with some index in `v_1..v_n`, divided by the
/// largest `|R_{ijkw}|` (0 for a flat metric).
pub fn nullity_residual_general(metric: &dyn CoordinateMetric, q: &[f64]) -> Result<f64> {
    let r = riemann_tensor(metric, q)?;
    let d = r.dim();
    let mut all: f64 = 0.0;
    let mut null: f64 = 0.0;
    for i in 0..d {
        for j in 0..d {
            for k in 0..d {
                for w in 0..d {
                    let v = r.lowered(i, j, k, w).abs();
                    all = all.max(v);
                    if i >= 2 || j >= 2 || k >= 2 || w >= 2 {
                        null = null.max(v);
                    }
                }
            }
        }
    }
    Ok(if all == 0.0 { 0.0 } else { null / all })
}

pub fn nullity_residual(spec: &ModelSpec, p: &Point) -> Result<f64> {
    metric_at(spec, p)?;
    nullity_residual_general(spec, &p.coords())
}

/// `(R^x_{xuu}, R^u_{xuu}, R^{v_i}_{xuu})` in closed form:
/// `-η_uu/η`, `g_{xu} η_uu/η`, `g_{xv_i} η_uu/η`.
pub fn riemann_oracle_xuu(spec: &ModelSpec, p: &Point) -> Result<DVector<f64>> {
    let m = metric_at(spec, p)?;
    let ratio = spec.eta().partial(0, 2, p.x, p.u) / m.eta;
    Ok(DVector::from_fn(spec.n() + 2, |k, _| match k {
        0 => -ratio,
        _ => m.b[k - 1] * ratio,
    }))
}

#[derive(Debug, Clone)]
pub struct FrenetData {
    pub a: Vec<f64>,
    pub beta: f64,
    /// `C_{T_1}` in the basis `(e_1, e_2)`: `[[0, a_1], [0, 0]]`.
    pub splitting_matrix: Matrix2<f64>,
    /// False where `f_1(x) = 0`: the splitting basis is then undefined.
    pub splitting_defined: bool,
    /// `∇_{e_2}` in the basis `(e_2, e_1, T_1, …, T_n)`; column `b` holds
    /// the components of `∇_{e_2}` applied to the `b`-th basis vector.
    pub frenet_derivative: DMatrix<f64>,
    /// `max |∇_e ∂v_i - (-(f_i/η) ∂v_{i-1} + (f_{i+1}/η) ∂v_{i+1})|` via Christoffels.
    pub covariant_residual: f64,
}

pub fn frenet_at(spec: &ModelSpec, p: &Point) -> Result<FrenetData> {
    let m = metric_at(spec, p)?;
    let n = spec.n();
    let eta = m.eta;
    let eta_u = spec.eta().partial(0, 1, p.x, p.u);
    let f: Vec<f64> = (1..=n).map(|j| spec.f_at(j, 0, p.x)).collect();
    let a: Vec<f64> = f.iter().map(|fi| fi / eta).collect();
    let beta = -eta_u / eta;
    let splitting_defined = f[0] != 0.0;
    let a1 = if splitting_defined { a[0] } else { 0.0 };
    let splitting_matrix = Matrix2::new(0.0, a1, 0.0, 0.0);

    let dim = n + 2;
    let mut frenet = DMatrix::zeros(dim, dim);
    frenet[(1, 0)] = beta;
    frenet[(0, 1)] = -beta;
    for (i, ai) in a.iter().enumerate() {
        frenet[(i + 2, i + 1)] = *ai;
        frenet[(i + 1, i + 2)] = -ai;
    }

    let gamma = christoffel_at(spec, p)?;
    let e = &frame_from(&m)[0];
    let mut covariant_residual: f64 = 0.0;
    for i in 1..=n {
        let mut dv = vec![0.0; dim];
        dv[1 + i] = 1.0;
        let got = gamma.contract(e.as_slice(), &dv);
        let mut want = vec![0.0; dim];
        want[i] -= f[i - 1] / eta; // ∂v_{i-1}; index 1 is ∂u
        if i < n {
            want[i + 2] += f[i] / eta;
        }
        for k in 0..dim {
            covariant_residual = covariant_residual.max((got[k] - want[k]).abs());
        }
    }
    Ok(FrenetData {
        a,
        beta,
        splitting_matrix,
        splitting_defined,
        frenet_derivative: frenet,
        covariant_residual,
    })
}

/// `⟨∇_{e_2} E_b, E_a⟩` for the frame `E = (e_2, e_1, ∂v_1, …)` from Christoffel
/// symbols, for columns `b >= 1` (coordinate fields). Column 0 is left zero.
pub fn frenet_matrix_from_connection(spec: &ModelSpec, p: &Point) -> Result<DMatrix<f64>> {
    let m = metric_at(spec, p)?;
    let gamma = christoffel_at(spec, p)?;
    let frame = frame_from(&m);
    let dim = frame.len();
    let mut out = DMatrix::zeros(dim, dim);
    for b in 1..dim {
        let nabla = DVector::from_vec(gamma.contract(frame[0].as_slice(), frame[b].as_slice()));
        for a in 0..dim {
            out[(a, b)] = inner(&m.g, &nabla, &frame[a]);
        }
    }
    Ok(out)
}

/// Residuals of `e_1(a_1) = a_1 β` and `e_1(β) = β² + Scal/2`.
pub fn initial_curvature_identities(spec: &ModelSpec, p: &Point) -> Result<(f64, f64)> {
    metric_at(spec, p)?;
    let d = spec.eta().partials(p.x, p.u, 2);
    let (eta, eu, euu) = (d.get(0, 0), d.get(0, 1), d.get(0, 2));
    let f1 = spec.f_at(1, 0, p.x);
    let a1 = f1 / eta;
    let beta = -eu / eta;
    let scal = -2.0 * euu / eta;
    let e1_a1 = -f1 * eu / (eta * eta);
    let e1_beta = -euu / eta + eu * eu / (eta * eta);
    Ok((
        (e1_a1 - a1 * beta).abs(),
        (e1_beta - beta * beta - scal / 2.0).abs(),
    ))
}

/// `|(1/a_1)'' + (1/a_1) sec(e_1, e_2)|` along `u`, divided by
/// `max(1, |1/a_1| max(1, |sec|))`; the second derivative comes from
/// Richardson-extrapolated central differences.
/// `None` where `f_1(x) = 0`.
pub fn one_over_a1_residual(spec: &ModelSpec, p: &Point) -> Result<Option<f64>> {
    metric_at(spec, p)?;
    let f1 = spec.f_at(1, 0, p.x);
    if f1 == 0.0 {
        return Ok(None);
    }
    let inv_a1 = |u: f64| spec.eta().value(p.x, u) / f1;
    let d2 = |h: f64| (inv_a1(p.u + h) - 2.0 * inv_a1(p.u) + inv_a1(p.u - h)) / (h * h);
    let h = 1e-3;
    let second = (4.0 * d2(h / 2.0) - d2(h)) / 3.0;
    let sec = scal_closed_form(spec, p.x, p.u) / 2.0;
    let scale = (inv_a1(p.u).abs() * sec.abs().max(1.0)).max(1.0);
    Ok(Some((second + inv_a1(p.u) * sec).abs() / scale))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlaneSec {
    /// `(a_{e1} b_{e2} - a_{e2} b_{e1})² / (1 - ⟨a,b⟩²) · sec(e_1, e_2)`.
    pub formula: f64,
    /// `R(v, w, w, v) / (1 - ⟨a,b⟩²)` by tensor contraction.
    pub contraction: f64,
}

/// Sectional curvature of the plane spanned by `a` and `b`, given as
/// coefficients in the orthonormal basis `(T_1, …, T_n, e_1, e_2)`.
pub fn plane_sec(spec: &ModelSpec, p: &Point, a: &[f64], b: &[f64]) -> Result<PlaneSec> {
    let n = spec.n();
    if a.len() != n + 2 || b.len() != n + 2 {
        return Err(Error::DimensionMismatch {
            expected: n + 2,
            got: a.len().min(b.len()),
        });
    }
    for c in [a, b] {
        let norm = c.iter().map(|v| v * v).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-9 {
            return Err(Error::NotUnit { norm });
        }
    }
    let ab: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let gram = 1.0 - ab * ab;
    if gram < 1e-12 {
        return Err(Error::ParallelVectors { gram });
    }
    let r = riemann_at(spec, p)?;
    let cross = a[n] * b[n + 1] - a[n + 1] * b[n];
    let formula = cross * cross / gram * r.scal / 2.0;

    let m = metric_at(spec, p)?;
    let frame = frame_from(&m);
    // basis order (T_1..T_n, e_1, e_2) -> frame order (e, ∂u, ∂v_1..)
    let to_coords = |c: &[f64]| {
        let mut v = Tangent::zeros(n + 2);
        for i in 0..n {
            v += &frame[2 + i] * c[i];
        }
        v += &frame[1] * c[n];
        v += &frame[0] * c[n + 1];
        v
    };
    let (va, vb) = (to_coords(a), to_coords(b));
    let contraction = r.tensor.apply(&va, &vb, &vb, &va) / gram;
    Ok(PlaneSec {
        formula,
        contraction,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{builtin_ch_eta, constant, constant_2d, expr_1d, expr_2d};
    use crate::interval::Interval;
    use crate::metric::PerturbedModel;

    fn spec_sin() -> ModelSpec {
        ModelSpec::new(
            vec![expr_1d("sin(x)+2").unwrap(), constant(1.0)],
            expr_2d("cosh(u)").unwrap(),
            Interval::real_line(),
        )
        .unwrap()
    }

    fn generic() -> ModelSpec {
        ModelSpec::new(
            vec![
                expr_1d("sin(x)+2").unwrap(),
                expr_1d("0.5*x^2 - 1").unwrap(),
            ],
            expr_2d("exp(0.3*cos(x)*u + 0.2*u^2)").unwrap(),
            Interval::real_line(),
        )
        .unwrap()
    }

    #[test]
    fn flat_curvature_vanishes() {
        let s =
            ModelSpec::new(vec![constant(0.0)], constant_2d(1.0), Interval::real_line()).unwrap();
        let p = Point::new(0.2, 0.3, vec![0.4]);
        let r = riemann_at(&s, &p).unwrap();
        assert_eq!(r.tensor.max_abs_lowered(), 0.0);
        assert_eq!(nullity_residual(&s, &p).unwrap(), 0.0);
        assert_eq!(riemann_oracle_xuu(&s, &p).unwrap().amax(), 0.0);
    }

    #[test]
    fn curvature_homogeneous_scal() {
        let s = ModelSpec::new(
            vec![expr_1d("sin(x)+2").unwrap()],
            builtin_ch_eta(constant(0.5)).unwrap(),
            Interval::real_line(),
        )
        .unwrap();
        let p = Point::new(0.3, 0.6, vec![-0.8]);
        let r = riemann_at(&s, &p).unwrap();
        assert!((r.scal + 2.0).abs() < 1e-14);
        assert!((r.scal_contraction + 2.0).abs() < 1e-6);
        assert!((r.scal - 2.0 * r.sec_e1e2).abs() < 1e-6);
    }

    #[test]
    fn symmetries_and_xuxu_component() {
        let s = generic();
        let p = Point::new(0.3, 0.5, vec![-0.4, 1.2]);
        let r = riemann_at(&s, &p).unwrap();
        assert!(r.tensor.antisymmetry_residual() < 1e-12);
        assert!(r.tensor.bianchi_residual() < 1e-6);
        let d = s.eta().partials(p.x, p.u, 2);
        let want = -d.get(0, 0) * d.get(0, 2);
        assert!((r.tensor.lowered(0, 1, 1, 0) - want).abs() < 1e-6);
        let oracle = riemann_oracle_xuu(&s, &p).unwrap();
        for l in 0..4 {
            assert!(
                (r.tensor.get(l, 0, 1, 1) - oracle[l]).abs() < 1e-6,
                "l = {l}"
            );
        }
    }

    #[test]
    fn oracle_xuu_example() {
        let s = ModelSpec::new(
            vec![constant(1.0)],
            expr_2d("cosh(u)").unwrap(),
            Interval::real_line(),
        )
        .unwrap();
        let o = riemann_oracle_xuu(&s, &Point::new(0.0, 1.0, vec![2.0])).unwrap();
        assert!((o[0] + 1.0).abs() < 1e-15);
        assert!((o[1] + 2.0).abs() < 1e-15);
    }

    #[test]
    fn nullity_and_negative_control() {
        let s = spec_sin();
        let p = Point::new(0.7, 0.4, vec![0.3, -0.6]);
        assert!(nullity_residual(&s, &p).unwrap() < 1e-6);
        let bad = PerturbedModel {
            base: s,
            epsilon: 0.1,
        };
        assert!(nullity_residual_general(&bad, &p.coords()).unwrap() > 1e-3);
    }

    #[test]
    fn near_boundary_is_reported() {
        let s = ModelSpec::new(
            vec![constant(1.0)],
            constant_2d(1.0),
            Interval::new(0.0, 1.0).unwrap(),
        )
        .unwrap();
        assert!(matches!(
            riemann_at(&s, &Point::new(1e-6, 0.0, vec![0.0])),
            Err(Error::NearBoundary { .. })
        ));
    }

    #[test]
    fn frenet_example() {
        let s = ModelSpec::new(
            vec![constant(1.0), constant(2.0)],
            expr_2d("cosh(u)").unwrap(),
            Interval::real_line(),
        )
        .unwrap();
        let p = Point::new(0.0, 1.0, vec![0.5, -0.25]);
        let fr = frenet_at(&s, &p).unwrap();
        let c = 1.0_f64.cosh();
        assert!((fr.a[0] - 1.0 / c).abs() < 1e-15 && (fr.a[1] - 2.0 / c).abs() < 1e-15);
        assert!((fr.beta + 1.0_f64.tanh()).abs() < 1e-15);
        assert!(fr.covariant_residual < 1e-9);
        assert_eq!(fr.splitting_matrix * fr.splitting_matrix, Matrix2::zeros());
        let t = &fr.frenet_derivative + fr.frenet_derivative.transpose();
        assert_eq!(t.amax(), 0.0);
    }

    #[test]
    fn frenet_matrix_matches_connection() {
        let s = generic();
        let p = Point::new(0.3, 0.5, vec![-0.4, 1.2]);
        let fr = frenet_at(&s, &p).unwrap();
        let c = frenet_matrix_from_connection(&s, &p).unwrap();
        for a in 0..4 {
            for b in 1..4 {
                assert!(
                    (fr.frenet_derivative[(a, b)] - c[(a, b)]).abs() < 1e-10,
                    "({a},{b})"
                );
            }
        }
    }

    #[test]
    fn beta_at_base_is_minus_k() {
        let s = ModelSpec::new(
            vec![constant(1.0)],
            builtin_ch_eta(constant(0.35)).unwrap(),
            Interval::real_line(),
        )
        .unwrap();
        let fr = frenet_at(&s, &Point::on_base(0.0, 1)).unwrap();
        assert!((fr.beta + 0.35).abs() < 1e-15);
        assert_eq!(fr.a[0], 1.0);
    }

    #[test]
    fn plane_sec_examples() {
        let s = generic();
        let p = Point::new(0.3, 0.5, vec![-0.4, 1.2]);
        let r = riemann_at(&s, &p).unwrap();
        let e1e2 = plane_sec(&s, &p, &[0.0, 0.0, 1.0, 0.0], &[0.0, 0.0, 0.0, 1.0]).unwrap();
        assert!((e1e2.formula - r.scal / 2.0).abs() < 1e-14);
        assert!((e1e2.contraction - e1e2.formula).abs() < 1e-6);
        let t1e1 = plane_sec(&s, &p, &[1.0, 0.0, 0.0, 0.0], &[0.0, 0.0, 1.0, 0.0]).unwrap();
        assert_eq!(t1e1.formula, 0.0);
        assert!(t1e1.contraction.abs() < 1e-10);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let mixed = plane_sec(&s, &p, &[h, 0.0, h, 0.0], &[0.0, 0.0, 0.0, 1.0]).unwrap();
        assert!((mixed.formula - r.scal / 4.0).abs() < 1e-14);
        assert!((mixed.contraction - mixed.formula).abs() < 1e-6);
        assert!(matches!(
            plane_sec(&s, &p, &[1.0, 0.0, 0.0, 0.0], &[1.0, 0.0, 0.0, 0.0]),
            Err(Error::ParallelVectors { .. })
        ));
        assert!(matches!(
            plane_sec(&s, &p, &[2.0, 0.0, 0.0, 0.0], &[0.0, 1.0, 0.0, 0.0]),
            Err(Error::NotUnit { .. })
        ));
    }

    #[test]
    fn frenet_identities_along_u() {
        let s = generic();
        let p = Point::new(0.3, 0.5, vec![-0.4, 1.2]);
        let (r1, r2) = initial_curvature_identities(&s, &p).unwrap();
        assert!(r1 < 1e-10 && r2 < 1e-10);
        assert!(one_over_a1_residual(&s, &p).unwrap().unwrap() < 1e-8);
    }
}
