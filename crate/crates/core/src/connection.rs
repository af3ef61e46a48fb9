//! Levi-Civita connection in coordinates.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::metric::{metric_at, CoordinateMetric, MetricJet, ModelSpec, Point};

/// `Γ^k_{ij}`, symmetric in `(i, j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChristoffelArray {
    dim: usize,
    data: Vec<f64>,
}

impl ChristoffelArray {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![0.0; dim * dim * dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, k: usize, i: usize, j: usize) -> f64 {
        self.data[(k * self.dim + i) * self.dim + j]
    }

    pub(crate) fn set(&mut self, k: usize, i: usize, j: usize, v: f64) {
        let d = self.dim;
        self.data[(k * d + i) * d + j] = v;
    }

    /// `(Γ^0_{ij}, …, Γ^{dim-1}_{ij})`.
    pub fn column(&self, i: usize, j: usize) -> DVector<f64> {
        DVector::from_fn(self.dim, |k, _| self.get(k, i, j))
    }

    /// `Γ^k_{ij} a^i b^j` for each `k`.
    pub fn contract(&self, a: &[f64], b: &[f64]) -> Vec<f64> {
        let d = self.dim;
        (0..d)
            .map(|k| {
                let mut acc = 0.0;
                for i in 0..d {
                    if a[i] == 0.0 {
                        continue;
                    }
                    for j in 0..d {
                        acc += self.get(k, i, j) * a[i] * b[j];
                    }
                }
                acc
            })
            .collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn max_asymmetry(&self) -> f64 {
        let d = self.dim;
        let mut worst: f64 = 0.0;
        for k in 0..d {
            for i in 0..d {
                for j in 0..d {
                    worst = worst.max((self.get(k, i, j) - self.get(k, j, i)).abs());
                }
            }
        }
        worst
    }
}

/// `Γ^k_{ij} = ½ g^{kl} (∂_i g_{jl} + ∂_j g_{il} - ∂_l g_{ij})`.
pub fn christoffel_from_jet(jet: &MetricJet) -> ChristoffelArray {
    let d = jet.g.nrows();
    let mut lower = vec![0.0; d * d * d]; // Γ_{l;ij}
    for l in 0..d {
        for i in 0..d {
            for j in i..d {
                let v = 0.5 * (jet.dg[i][(j, l)] + jet.dg[j][(i, l)] - jet.dg[l][(i, j)]);
                lower[(l * d + i) * d + j] = v;
                lower[(l * d + j) * d + i] = v;
            }
        }
    }
    let mut out = ChristoffelArray::zeros(d);
    for k in 0..d {
        for i in 0..d {
            for j in i..d {
                let v: f64 = (0..d)
                    .map(|l| jet.g_inv[(k, l)] * lower[(l * d + i) * d + j])
                    .sum();
                out.set(k, i, j, v);
                out.set(k, j, i, v);
            }
        }
    }
    out
}

pub fn christoffel_general(metric: &dyn CoordinateMetric, q: &[f64]) -> Result<ChristoffelArray> {
    Ok(christoffel_from_jet(&metric.metric_jet(q)?))
}

pub fn christoffel_at(spec: &ModelSpec, p: &Point) -> Result<ChristoffelArray> {
    christoffel_general(spec, &p.coords())
}

/// `max |∂_m g_ij - Γ^k_{mi} g_kj - Γ^k_{mj} g_ki|` with `∂_m g` from central
/// differences of step `h`.
pub fn compatibility_residual(metric: &dyn CoordinateMetric, q: &[f64], h: f64) -> Result<f64> {
    let jet = metric.metric_jet(q)?;
    let gamma = christoffel_from_jet(&jet);
    let d = metric.dim();
    let mut worst: f64 = 0.0;
    for m in 0..d {
        let mut qp = q.to_vec();
        let mut qm = q.to_vec();
        qp[m] += h;
        qm[m] -= h;
        let dg = (metric.metric_jet(&qp)?.g - metric.metric_jet(&qm)?.g) / (2.0 * h);
        for i in 0..d {
            for j in 0..d {
                let mut rhs = 0.0;
                for k in 0..d {
                    rhs += gamma.get(k, m, i) * jet.g[(k, j)] + gamma.get(k, m, j) * jet.g[(k, i)];
                }
                worst = worst.max((dg[(i, j)] - rhs).abs());
            }
        }
    }
    Ok(worst)
}

/// `Γ^•_{xu} = g^{•x}(η η_u + f_1 g_{xv_1}) + g^{•v_1} f_1`.
pub fn christoffel_oracle_xu(spec: &ModelSpec, p: &Point) -> Result<DVector<f64>> {
    let m = metric_at(spec, p)?;
    let eta_u = spec.eta().partial(0, 1, p.x, p.u);
    let f1 = spec.f_at(1, 0, p.x);
    let b1 = m.b[1];
    Ok(DVector::from_fn(spec.n() + 2, |k, _| {
        m.g_inv[(k, 0)] * (m.eta * eta_u + f1 * b1) + m.g_inv[(k, 2)] * f1
    }))
}

/// `Γ^•_{x v_i} = g^{•x}(-f_i g_{xv_{i-1}} + f_{i+1} g_{xv_{i+1}}) - g^{•v_{i-1}} f_i + g^{•v_{i+1}} f_{i+1}`.
pub fn christoffel_oracle_xvi(spec: &ModelSpec, p: &Point, i: usize) -> Result<DVector<f64>> {
    let n = spec.n();
    if i == 0 || i > n {
        return Err(Error::IndexOutOfRange { index: i, n });
    }
    let m = metric_at(spec, p)?;
    let fi = spec.f_at(i, 0, p.x);
    let fi1 = spec.f_at(i + 1, 0, p.x);
    let b_next = if i < n { m.b[i + 1] } else { 0.0 };
    let coeff_x = -fi * m.b[i - 1] + fi1 * b_next;
    Ok(DVector::from_fn(n + 2, |k, _| {
        // v_{i-1} at index i, v_{i+1} at index i + 2
        let next = if i < n { m.g_inv[(k, i + 2)] } else { 0.0 };
        m.g_inv[(k, 0)] * coeff_x - m.g_inv[(k, i)] * fi + next * fi1
    }))
}
