//! Small numerical kernels shared by the geometry modules.

/// One classical RK4 step for `y' = f(t, y)`.
pub fn rk4_step<F>(f: &F, t: f64, y: &[f64], h: f64) -> Vec<f64>
where
    F: Fn(f64, &[f64]) -> Vec<f64>,
{
    let k1 = f(t, y);
    let y2: Vec<f64> = y.iter().zip(&k1).map(|(a, k)| a + 0.5 * h * k).collect();
    let k2 = f(t + 0.5 * h, &y2);
    let y3: Vec<f64> = y.iter().zip(&k2).map(|(a, k)| a + 0.5 * h * k).collect();
    let k3 = f(t + 0.5 * h, &y3);
    let y4: Vec<f64> = y.iter().zip(&k3).map(|(a, k)| a + h * k).collect();
    let k4 = f(t + h, &y4);
    y.iter()
        .enumerate()
        .map(|(i, a)| a + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect()
}

/// Finite-difference weights for the `order`-th derivative at `x0` from
/// samples at `nodes` (Fornberg's algorithm).
pub fn fd_weights(x0: f64, nodes: &[f64], order: usize) -> Vec<f64> {
    let n = nodes.len();
    assert!(n > order, "need more nodes than the derivative order");
    let mut c = vec![vec![0.0; order + 1]; n];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = nodes[0] - x0;
    for i in 1..n {
        let mn = i.min(order);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = nodes[i] - x0;
        for j in 0..i {
            let c3 = nodes[i] - nodes[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.into_iter().map(|row| row[order]).collect()
}

/// Central-difference derivative of order `order` with `2*half+1` points.
pub fn central_derivative<F: Fn(f64) -> f64>(
    f: F,
    x: f64,
    h: f64,
    order: usize,
    half: usize,
) -> f64 {
    let nodes: Vec<f64> = (-(half as i64)..=half as i64)
        .map(|i| x + i as f64 * h)
        .collect();
    let w = fd_weights(x, &nodes, order);
    nodes.iter().zip(&w).map(|(t, c)| c * f(*t)).sum()
}

/// Composite Simpson rule on an even number of uniform panels.
pub fn simpson<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, panels: usize) -> f64 {
    let m = if panels % 2 == 1 {
        panels + 1
    } else {
        panels.max(2)
    };
    let h = (b - a) / m as f64;
    let mut acc = f(a) + f(b);
    for i in 1..m {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + i as f64 * h);
    }
    acc * h / 3.0
}

/// Golden-section minimization on `[a, b]`; returns `(t_min, f(t_min))`.
pub fn golden_section<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let r = 0.5 * (5.0_f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    let t = 0.5 * (a + b);
    (t, f(t))
}
