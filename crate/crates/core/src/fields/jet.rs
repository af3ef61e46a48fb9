//! Truncated bivariate Taylor series ("jets") used for forward-mode
//! differentiation of expression fields.
//!
//! A jet of order `N` around `(x0, u0)` stores the coefficients `c[a][b]` of
//! `dx^a du^b` for `a + b <= N`. The partial derivative
//! `d^{a+b} f / dx^a du^b` is `a! b! c[a][b]`.

use std::ops::{Add, Mul, Neg, Sub};

#[derive(Debug, Clone, PartialEq)]
pub struct Jet {
    order: usize,
    coeffs: Vec<f64>,
}

fn index(order: usize, a: usize, b: usize) -> usize {
    // rows by total degree d = a + b, then by b inside the row
    let d = a + b;
    debug_assert!(d <= order);
    d * (d + 1) / 2 + b
}

fn len_for(order: usize) -> usize {
    (order + 1) * (order + 2) / 2
}

fn factorial(k: usize) -> f64 {
    (1..=k).fold(1.0, |acc, i| acc * i as f64)
}

impl Jet {
    pub fn constant(order: usize, value: f64) -> Self {
        let mut coeffs = vec![0.0; len_for(order)];
        coeffs[0] = value;
        Self { order, coeffs }
    }

    /// The independent variable `x` expanded around `x0`.
    pub fn var_x(order: usize, x0: f64) -> Self {
        let mut j = Self::constant(order, x0);
        if order >= 1 {
            j.coeffs[index(order, 1, 0)] = 1.0;
        }
        j
    }

    /// The independent variable `u` expanded around `u0`.
    pub fn var_u(order: usize, u0: f64) -> Self {
        let mut j = Self::constant(order, u0);
        if order >= 1 {
            j.coeffs[index(order, 0, 1)] = 1.0;
        }
        j
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn value(&self) -> f64 {
        self.coeffs[0]
    }

    pub fn coeff(&self, a: usize, b: usize) -> f64 {
        if a + b > self.order {
            return 0.0;
        }
        self.coeffs[index(self.order, a, b)]
    }

    /// `d^{a+b} f / dx^a du^b` at the expansion point.
    pub fn partial(&self, a: usize, b: usize) -> f64 {
        self.coeff(a, b) * factorial(a) * factorial(b)
    }

    /// True when every non-constant coefficient is zero.
    pub fn is_constant(&self) -> bool {
        self.coeffs[1..].iter().all(|c| *c == 0.0)
    }

    fn zeros_like(&self) -> Self {
        Self {
            order: self.order,
            coeffs: vec![0.0; self.coeffs.len()],
        }
    }

    pub fn scale(&self, k: f64) -> Self {
        Self {
            order: self.order,
            coeffs: self.coeffs.iter().map(|c| c * k).collect(),
        }
    }

    /// `f(self)` given the derivatives `f^{(k)}(s0)` for `k = 0..=order`,
    /// where `s0` is the constant term of `self`.
    pub fn compose(&self, derivs: &[f64]) -> Self {
        let n = self.order;
        debug_assert!(derivs.len() > n);
        let mut delta = self.clone();
        delta.coeffs[0] = 0.0;
        let mut out = Self::constant(n, derivs[0]);
        let mut power = Self::constant(n, 1.0);
        let mut fact = 1.0;
        for (k, d) in derivs.iter().enumerate().take(n + 1).skip(1) {
            power = &power * &delta;
            fact *= k as f64;
            let w = d / fact;
            if w != 0.0 {
                for (o, p) in out.coeffs.iter_mut().zip(&power.coeffs) {
                    *o += w * p;
                }
            }
        }
        out
    }

    pub fn exp(&self) -> Self {
        let e = self.value().exp();
        self.compose(&vec![e; self.order + 1])
    }

    pub fn ln(&self) -> Self {
        let s = self.value();
        let mut d = Vec::with_capacity(self.order + 1);
        d.push(s.ln());
        for k in 1..=self.order {
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            d.push(sign * factorial(k - 1) / s.powi(k as i32));
        }
        self.compose(&d)
    }

    pub fn sin(&self) -> Self {
        let (s, c) = self.value().sin_cos();
        let cycle = [s, c, -s, -c];
        self.compose(&(0..=self.order).map(|k| cycle[k % 4]).collect::<Vec<_>>())
    }

    pub fn cos(&self) -> Self {
        let (s, c) = self.value().sin_cos();
        let cycle = [c, -s, -c, s];
        self.compose(&(0..=self.order).map(|k| cycle[k % 4]).collect::<Vec<_>>())
    }

    pub fn sinh(&self) -> Self {
        let v = self.value();
        let cycle = [v.sinh(), v.cosh()];
        self.compose(&(0..=self.order).map(|k| cycle[k % 2]).collect::<Vec<_>>())
    }

    pub fn cosh(&self) -> Self {
        let v = self.value();
        let cycle = [v.cosh(), v.sinh()];
        self.compose(&(0..=self.order).map(|k| cycle[k % 2]).collect::<Vec<_>>())
    }

    /// `self^p` for a real constant exponent.
    pub fn powf(&self, p: f64) -> Self {
        let s = self.value();
        let mut d = Vec::with_capacity(self.order + 1);
        let mut falling = 1.0;
        for k in 0..=self.order {
            d.push(falling * s.powf(p - k as f64));
            falling *= p - k as f64;
        }
        self.compose(&d)
    }

    /// `self^k` by repeated squaring; exact for negative bases.
    pub fn powi(&self, k: i64) -> Self {
        if k < 0 {
            return self.powi(-k).recip();
        }
        let mut base = self.clone();
        let mut acc = Self::constant(self.order, 1.0);
        let mut e = k as u64;
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    pub fn sqrt(&self) -> Self {
        self.powf(0.5)
    }

    pub fn recip(&self) -> Self {
        let s = self.value();
        let d: Vec<f64> = (0..=self.order)
            .map(|k| {
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                sign * factorial(k) / s.powi(k as i32 + 1)
            })
            .collect();
        self.compose(&d)
    }

    /// `|self|`, smooth away from a zero constant term.
    pub fn abs(&self) -> Self {
        if self.value() < 0.0 {
            -self
        } else {
            self.clone()
        }
    }

    pub fn pow(&self, exponent: &Jet) -> Self {
        if exponent.is_constant() {
            let p = exponent.value();
            if p.fract() == 0.0 && p.abs() < 64.0 {
                return self.powi(p as i64);
            }
            return self.powf(p);
        }
        (&self.ln() * exponent).exp()
    }

    pub fn div(&self, other: &Jet) -> Self {
        self * &other.recip()
    }
}

impl Add for &Jet {
    type Output = Jet;
    fn add(self, rhs: &Jet) -> Jet {
        let mut out = self.clone();
        for (o, r) in out.coeffs.iter_mut().zip(&rhs.coeffs) {
            *o += r;
        }
        out
    }
}

impl Sub for &Jet {
    type Output = Jet;
    fn sub(self, rhs: &Jet) -> Jet {
        let mut out = self.clone();
        for (o, r) in out.coeffs.iter_mut().zip(&rhs.coeffs) {
            *o -= r;
        }
        out
    }
}

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Mul for &Jet {
    type Output = Jet;
    fn mul(self, rhs: &Jet) -> Jet {
        let n = self.order;
        let mut out = self.zeros_like();
        for d1 in 0..=n {
            for b1 in 0..=d1 {
                let p = self.coeffs[index(n, d1 - b1, b1)];
                if p == 0.0 {
                    continue;
                }
                for d2 in 0..=(n - d1) {
                    for b2 in 0..=d2 {
                        let q = rhs.coeffs[index(n, d2 - b2, b2)];
                        out.coeffs[index(n, d1 - b1 + d2 - b2, b1 + b2)] += p * q;
                    }
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_rule_on_xu() {
        let x = Jet::var_x(3, 2.0);
        let u = Jet::var_u(3, -1.0);
        let f = &(&x * &x) * &u; // x^2 u
        assert_eq!(f.value(), -4.0);
        assert_eq!(f.partial(1, 0), -4.0);
        assert_eq!(f.partial(0, 1), 4.0);
        assert_eq!(f.partial(2, 1), 2.0);
        assert_eq!(f.partial(1, 1), 4.0);
        assert_eq!(f.partial(0, 2), 0.0);
    }

    #[test]
    fn exp_of_sum_matches_closed_form() {
        let x = Jet::var_x(4, 0.3);
        let u = Jet::var_u(4, 0.7);
        let f = (&x + &u).exp();
        let e = 1.0_f64.exp();
        for a in 0..=4 {
            for b in 0..=(4 - a) {
                assert!((f.partial(a, b) - e).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn recip_and_ln() {
        let x = Jet::var_x(4, 2.0);
        let r = x.recip();
        // d^k/dx^k 1/x = (-1)^k k! / x^{k+1}
        assert!((r.partial(3, 0) + 6.0 / 16.0).abs() < 1e-14);
        let l = x.ln();
        assert!((l.partial(2, 0) + 0.25).abs() < 1e-14);
    }

    #[test]
    fn integer_power_of_negative_base() {
        let x = Jet::var_x(3, -2.0);
        let c = Jet::constant(3, 3.0);
        let f = x.pow(&c);
        assert_eq!(f.value(), -8.0);
        assert_eq!(f.partial(1, 0), 12.0);
        assert_eq!(f.partial(2, 0), -12.0);
        assert_eq!(f.partial(3, 0), 6.0);
    }
}
