//! `η` from a prescribed scalar curvature by solving `η_uu = -½ η Scal`
//! along each `x`-column with `η(x, 0) = 1`, `η_u(x, 0) = k_γ(x)`.

use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::numeric::fd_weights;

use super::{Field2D, ScalarField1D, ScalarField2D};

/// Grid parameters for [`eta_from_scal`].
#[derive(Debug, Clone, Copy)]
pub struct EtaSolve {
    /// Finite `x`-range covered by the stored columns.
    pub x_range: Interval,
    pub x_nodes: usize,
    /// Finite `u`-range; must contain 0.
    pub u_range: Interval,
    pub step: f64,
}

#[derive(Debug, Clone)]
struct Column {
    x: f64,
    // nodes u = lo_index*step .. hi_index*step
    first: i64,
    eta: Vec<f64>,
    eta_u: Vec<f64>,
}

impl Column {
    fn node(&self, i: i64) -> Option<(f64, f64)> {
        let j = i - self.first;
        if j < 0 || j as usize >= self.eta.len() {
            return None;
        }
        Some((self.eta[j as usize], self.eta_u[j as usize]))
    }
}

/// Numerical `η` built column by column.
#[derive(Debug, Clone)]
pub struct EtaFromScal {
    scal: ScalarField2D,
    k_gamma: ScalarField1D,
    grid: EtaSolve,
    columns: Vec<Column>,
    x_spacing: f64,
}

fn rk4(scal: &dyn Field2D, x: f64, u: f64, y: (f64, f64), h: f64) -> (f64, f64) {
    let f = |u: f64, e: f64, eu: f64| (eu, -0.5 * e * scal.value(x, u));
    let k1 = f(u, y.0, y.1);
    let k2 = f(u + 0.5 * h, y.0 + 0.5 * h * k1.0, y.1 + 0.5 * h * k1.1);
    let k3 = f(u + 0.5 * h, y.0 + 0.5 * h * k2.0, y.1 + 0.5 * h * k2.1);
    let k4 = f(u + h, y.0 + h * k3.0, y.1 + h * k3.1);
    (
        y.0 + h / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0),
        y.1 + h / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1),
    )
}

/// Solves the column ODE on the `u`-range, returning the stored nodes or
/// the first crossing of zero.
fn solve_column(
    scal: &dyn Field2D,
    x: f64,
    k: f64,
    u_range: Interval,
    step: f64,
) -> Result<Column> {
    let lo_steps = (-u_range.lo / step).ceil() as i64;
    let hi_steps = (u_range.hi / step).ceil() as i64;
    let mut forward = vec![(1.0, k)];
    for dir in [1.0, -1.0] {
        let steps = if dir > 0.0 { hi_steps } else { lo_steps };
        let mut y = (1.0, k);
        let mut out = Vec::with_capacity(steps as usize);
        for i in 0..steps {
            let u = dir * i as f64 * step;
            let next = rk4(scal, x, u, y, dir * step);
            if next.0 <= 0.0 {
                let frac = y.0 / (y.0 - next.0);
                return Err(Error::NonPositiveEta {
                    x,
                    u: u + dir * frac * step,
                });
            }
            out.push(next);
            y = next;
        }
        if dir > 0.0 {
            forward.extend(out);
        } else {
            out.reverse();
            out.extend(forward.iter().copied());
            forward = out;
        }
    }
    Ok(Column {
        x,
        first: -lo_steps,
        eta: forward.iter().map(|p| p.0).collect(),
        eta_u: forward.iter().map(|p| p.1).collect(),
    })
}

pub fn eta_from_scal(
    scal: ScalarField2D,
    k_gamma: ScalarField1D,
    grid: EtaSolve,
) -> Result<EtaFromScal> {
    if !(grid.step > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "step must be positive, got {}",
            grid.step
        )));
    }
    if !grid.x_range.is_bounded()
        || !grid.u_range.is_bounded()
        || !grid.u_range.contains_closed(0.0)
    {
        return Err(Error::InvalidParameter(
            "eta_from_scal needs a bounded x-range and a bounded u-range containing 0".into(),
        ));
    }
    if grid.x_nodes < 5 {
        return Err(Error::InvalidParameter("need at least 5 x-columns".into()));
    }
    let xs = grid.x_range.linspace(grid.x_nodes);
    let columns = xs
        .iter()
        .map(|&x| solve_column(scal.as_ref(), x, k_gamma.value(x), grid.u_range, grid.step))
        .collect::<Result<Vec<_>>>()?;
    Ok(EtaFromScal {
        x_spacing: xs[1] - xs[0],
        scal,
        k_gamma,
        grid,
        columns,
    })
}

impl EtaFromScal {
    pub fn grid(&self) -> &EtaSolve {
        &self.grid
    }

    pub fn column_xs(&self) -> Vec<f64> {
        self.columns.iter().map(|c| c.x).collect()
    }

    /// `max |η_uu + ½ η Scal|` over interior stored nodes, with `η_uu`
    /// from a five-point stencil on the stored values.
    pub fn residual(&self) -> f64 {
        let h = self.grid.step;
        let w = [-1.0 / 12.0, 4.0 / 3.0, -2.5, 4.0 / 3.0, -1.0 / 12.0];
        let mut worst: f64 = 0.0;
        for c in &self.columns {
            for j in 2..c.eta.len().saturating_sub(2) {
                let d2: f64 = (0..5).map(|m| w[m] * c.eta[j + m - 2]).sum::<f64>() / (h * h);
                let u = (c.first + j as i64) as f64 * h;
                let r = (d2 + 0.5 * c.eta[j] * self.scal.value(c.x, u)).abs();
                worst = worst.max(r);
            }
        }
        worst
    }

    fn column_index(&self, x: f64) -> Option<usize> {
        let t = (x - self.grid.x_range.lo) / self.x_spacing;
        let i = t.round();
        if i >= 0.0 && (i as usize) < self.columns.len() && (t - i).abs() < 1e-9 {
            Some(i as usize)
        } else {
            None
        }
    }

    /// `(η, η_u)` at `(x, u)`.
    fn state(&self, x: f64, u: f64) -> (f64, f64) {
        let h = self.grid.step;
        if let Some(ci) = self.column_index(x) {
            let c = &self.columns[ci];
            let i = (u / h).round() as i64;
            if let Some(y) = c.node(i) {
                let u0 = i as f64 * h;
                if u == u0 {
                    return y;
                }
                return rk4(self.scal.as_ref(), c.x, u0, y, u - u0);
            }
        }
        // integrate from u = 0 with steps no larger than the grid step
        let n = (u.abs() / h).ceil().max(1.0) as usize;
        let dh = u / n as f64;
        let mut y = (1.0, self.k_gamma.value(x));
        for i in 0..n {
            y = rk4(self.scal.as_ref(), x, i as f64 * dh, y, dh);
        }
        y
    }

    /// u-derivatives at fixed `x` from the ODE and its Leibniz expansion.
    fn u_derivs(&self, x: f64, u: f64, order: usize) -> Vec<f64> {
        let (e, eu) = self.state(x, u);
        let mut d = vec![e, eu];
        let s: Vec<f64> = (0..=order.saturating_sub(2))
            .map(|j| self.scal.partial(0, j, x, u))
            .collect();
        for b in 2..=order {
            let m = b - 2;
            let mut acc = 0.0;
            let mut binom = 1.0;
            for j in 0..=m {
                acc += binom * d[j] * s[m - j];
                binom = binom * (m - j) as f64 / (j + 1) as f64;
            }
            d.push(-0.5 * acc);
        }
        d.truncate(order + 1);
        d
    }
}

impl Field2D for EtaFromScal {
    fn partial(&self, a: usize, b: usize, x: f64, u: f64) -> f64 {
        if a + b > self.max_order() {
            return f64::NAN;
        }
        if a == 0 {
            return self.u_derivs(x, u, b)[b];
        }
        // central differences across columns
        let half = a.div_ceil(2) + 1;
        let h = self.x_spacing;
        let nodes: Vec<f64> = (-(half as i64)..=half as i64)
            .map(|i| x + i as f64 * h)
            .collect();
        let w = fd_weights(x, &nodes, a);
        nodes
            .iter()
            .zip(&w)
            .map(|(t, c)| c * self.u_derivs(*t, u, b)[b])
            .sum()
    }

    fn max_order(&self) -> usize {
        4.min(self.scal.max_order() + 2)
    }

    fn describe(&self) -> String {
        format!(
            "eta_from_scal(Scal = {}, k_gamma = {})",
            self.scal.describe(),
            self.k_gamma.describe()
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{constant, constant_2d, expr_1d, expr_2d};
    use std::sync::Arc;

    fn grid(step: f64) -> EtaSolve {
        EtaSolve {
            x_range: Interval::new(-1.0, 1.0).unwrap(),
            x_nodes: 9,
            u_range: Interval::new(-2.0, 2.0).unwrap(),
            step,
        }
    }

    #[test]
    fn recovers_cosh_and_exp() {
        let e = eta_from_scal(constant_2d(-2.0), constant(0.0), grid(1e-3)).unwrap();
        assert!((e.value(0.25, 1.0) - 1.0_f64.cosh()).abs() < 1e-8);
        assert!((e.value(0.1234, 1.0) - 1.0_f64.cosh()).abs() < 1e-8);
        let e = eta_from_scal(constant_2d(-2.0), constant(1.0), grid(1e-3)).unwrap();
        assert!((e.value(0.0, 1.5) - 1.5_f64.exp()).abs() < 1e-8);
        assert!((e.partial(0, 3, 0.0, -0.5) - (-0.5_f64).exp()).abs() < 1e-8);
    }

    #[test]
    fn reports_first_zero_crossing() {
        match eta_from_scal(constant_2d(-2.0), constant(-1.5), grid(1e-3)) {
            Err(Error::NonPositiveEta { u, .. }) => {
                assert!((u - (2.0_f64 / 3.0).atanh()).abs() < 1e-4, "u = {u}");
            }
            other => panic!("expected NonPositiveEta, got {other:?}"),
        }
    }

    #[test]
    fn residual_small_for_variable_scal() {
        let scal = expr_2d("-2 - 0.5*sin(x)^2*exp(-u^2)").unwrap();
        let k = expr_1d("0.3*cos(x)").unwrap();
        let e = eta_from_scal(scal, k, grid(1e-3)).unwrap();
        assert!(e.residual() < 1e-6, "residual {}", e.residual());
    }

    #[test]
    fn x_partials_track_closed_form() {
        // k(x) = 0.5 sin x, Scal = -2: η = cosh u + 0.5 sin x sinh u
        let k: ScalarField1D = Arc::new(crate::fields::Sine {
            amplitude: 0.5,
            frequency: 1.0,
            phase: 0.0,
            offset: 0.0,
        });
        let g = EtaSolve {
            x_nodes: 201,
            ..grid(1e-3)
        };
        let e = eta_from_scal(constant_2d(-2.0), k, g).unwrap();
        let (x, u) = (0.3_f64, 0.8_f64);
        let want = 0.5 * x.cos() * u.sinh();
        assert!((e.partial(1, 0, x, u) - want).abs() < 1e-6);
        let want = -0.5 * x.sin() * u.cosh();
        assert!((e.partial(2, 1, x, u) - want).abs() < 1e-4);
    }
}
