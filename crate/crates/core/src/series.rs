//! Truncated power series in one variable with `f64` coefficients.
//!
//! Used to expand the billiard map in the outgoing angle at a fixed boundary
//! point: every operation keeps the coefficients of `x^0 .. x^order`.

use std::ops::{Add, Mul, Neg, Sub};

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    c: Vec<f64>,
}

impl Series {
    pub fn zero(order: usize) -> Self {
        Series { c: vec![0.0; order + 1] }
    }

    pub fn constant(order: usize, v: f64) -> Self {
        let mut s = Series::zero(order);
        s.c[0] = v;
        s
    }

    /// The series `x`.
    pub fn var(order: usize) -> Self {
        let mut s = Series::zero(order);
        if order >= 1 {
            s.c[1] = 1.0;
        }
        s
    }

    /// Builds from coefficients, truncating or zero-padding to `order`.
    pub fn from_coeffs(order: usize, coeffs: &[f64]) -> Self {
        let mut s = Series::zero(order);
        for (d, v) in s.c.iter_mut().zip(coeffs) {
            *d = *v;
        }
        s
    }

    pub fn order(&self) -> usize {
        self.c.len() - 1
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.c
    }

    pub fn coeff(&self, k: usize) -> f64 {
        self.c.get(k).copied().unwrap_or(0.0)
    }

    pub fn set_coeff(&mut self, k: usize, v: f64) {
        self.c[k] = v;
    }

    pub fn scale(&self, k: f64) -> Series {
        Series { c: self.c.iter().map(|v| v * k).collect() }
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.c.iter().rev().fold(0.0, |acc, &v| acc * x + v)
    }

    /// `self / x`, dropping the (required zero) constant term; the top
    /// coefficient becomes unknown and is set to zero.
    pub fn shift_down(&self) -> Series {
        let n = self.order();
        let mut out = Series::zero(n);
        out.c[..n].copy_from_slice(&self.c[1..]);
        out
    }

    /// `x^k * self`, truncated.
    pub fn shift_up(&self, k: usize) -> Series {
        let n = self.order();
        let mut out = Series::zero(n);
        for i in 0..=n {
            if i + k <= n {
                out.c[i + k] = self.c[i];
            }
        }
        out
    }

    pub fn powi(&self, p: usize) -> Series {
        let mut out = Series::constant(self.order(), 1.0);
        for _ in 0..p {
            out = &out * self;
        }
        out
    }

    /// Multiplicative inverse; requires a nonzero constant term.
    pub fn recip(&self) -> Series {
        let n = self.order();
        let a0 = self.c[0];
        assert!(a0 != 0.0, "series reciprocal of a zero constant term");
        let mut b = vec![0.0; n + 1];
        b[0] = 1.0 / a0;
        for k in 1..=n {
            let mut s = 0.0;
            for j in 1..=k {
                s += self.c[j] * b[k - j];
            }
            b[k] = -s / a0;
        }
        Series { c: b }
    }

    pub fn div(&self, other: &Series) -> Series {
        self * &other.recip()
    }

    /// `self(inner(x))`; `inner` must have zero constant term.
    pub fn compose(&self, inner: &Series) -> Series {
        assert!(inner.c[0] == 0.0, "composition needs an inner series without constant term");
        let n = self.order().max(inner.order());
        let inner = Series::from_coeffs(n, &inner.c);
        let mut out = Series::zero(n);
        for &a in self.c.iter().rev() {
            out = &out * &inner;
            out.c[0] += a;
        }
        out
    }

    /// Compositional inverse `g` with `self(g(x)) = x`; requires
    /// `c0 = 0`, `c1 != 0`.
    pub fn reversion(&self) -> Series {
        let n = self.order();
        let a1 = self.c[1];
        assert!(self.c[0] == 0.0 && a1 != 0.0, "series is not invertible");
        let mut g = Series::zero(n);
        g.c[1] = 1.0 / a1;
        for k in 2..=n {
            let comp = self.compose(&g);
            g.c[k] -= comp.c[k] / a1;
        }
        g
    }

    /// `atan(self)` for a series with zero constant term.
    pub fn atan(&self) -> Series {
        let n = self.order();
        let mut outer = Series::zero(n);
        for j in 0..=n / 2 {
            let p = 2 * j + 1;
            if p <= n {
                outer.c[p] = if j % 2 == 0 { 1.0 } else { -1.0 } / p as f64;
            }
        }
        outer.compose(self)
    }

    /// Taylor expansion `f(s + delta) = sum_n f^(n)(s) delta^n / n!` given the
    /// derivatives `derivs[n] = f^(n)(s)`; `delta` must have zero constant term.
    pub fn taylor_shift(derivs: &[f64], delta: &Series) -> Series {
        let mut coeffs = Vec::with_capacity(derivs.len());
        let mut fact = 1.0;
        for (n, d) in derivs.iter().enumerate() {
            if n > 0 {
                fact *= n as f64;
            }
            coeffs.push(d / fact);
        }
        Series::from_coeffs(delta.order().max(derivs.len().saturating_sub(1)), &coeffs)
            .compose(delta)
    }
}

impl Add for &Series {
    type Output = Series;
    fn add(self, o: &Series) -> Series {
        let n = self.order().max(o.order());
        Series { c: (0..=n).map(|k| self.coeff(k) + o.coeff(k)).collect() }
    }
}

impl Sub for &Series {
    type Output = Series;
    fn sub(self, o: &Series) -> Series {
        let n = self.order().max(o.order());
        Series { c: (0..=n).map(|k| self.coeff(k) - o.coeff(k)).collect() }
    }
}

impl Neg for &Series {
    type Output = Series;
    fn neg(self) -> Series {
        self.scale(-1.0)
    }
}

impl Mul for &Series {
    type Output = Series;
    fn mul(self, o: &Series) -> Series {
        let n = self.order().max(o.order());
        let mut c = vec![0.0; n + 1];
        for (i, &a) in self.c.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            for (j, &b) in o.c.iter().enumerate() {
                if i + j > n {
                    break;
                }
                c[i + j] += a * b;
            }
        }
        Series { c }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &Series, b: &[f64], tol: f64) -> bool {
        a.coeffs().iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn reciprocal_of_geometric() {
        // 1/(1-x) = 1 + x + x^2 + ...
        let s = Series::from_coeffs(6, &[1.0, -1.0]);
        assert!(close(&s.recip(), &[1.0; 7], 1e-15));
    }

    #[test]
    fn reversion_of_sine_is_arcsine() {
        let n = 9;
        let mut sin = Series::zero(n);
        let mut f = 1.0;
        for k in 1..=n {
            f *= k as f64;
            if k % 2 == 1 {
                sin.c[k] = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 } / f;
            }
        }
        let asin = sin.reversion();
        let expect = [0.0, 1.0, 0.0, 1.0 / 6.0, 0.0, 3.0 / 40.0, 0.0, 15.0 / 336.0, 0.0, 105.0 / 3456.0];
        assert!(close(&asin, &expect, 1e-14));
    }

    #[test]
    fn atan_and_taylor_shift() {
        let x = Series::var(7);
        let a = x.atan();
        assert!(close(&a, &[0.0, 1.0, 0.0, -1.0 / 3.0, 0.0, 0.2, 0.0, -1.0 / 7.0], 1e-15));
        // exp(s + delta) with delta = x: derivatives all equal e^s
        let d = vec![2.0; 8];
        let t = Series::taylor_shift(&d, &x);
        let mut f = 1.0;
        for k in 0..8 {
            if k > 0 {
                f *= k as f64;
            }
            assert!((t.coeff(k) - 2.0 / f).abs() < 1e-15);
        }
    }
}
