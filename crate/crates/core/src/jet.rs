//! Third-order forward-mode jets.
//!
//! A [`Jet`] carries a value together with its first three derivatives with
//! respect to a single real variable. Arithmetic on jets propagates the
//! derivatives exactly (Leibniz rule for products, Faà di Bruno for
//! compositions), which is all the flux formula needs: it only ever asks for
//! `f`, `f'`, `f''` and `f'''`.

use std::ops::{Add, Div, Mul, Neg, Sub};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    pub v: f64,
    pub d1: f64,
    pub d2: f64,
    pub d3: f64,
}

impl Jet {
    pub const fn new(v: f64, d1: f64, d2: f64, d3: f64) -> Self {
        Jet { v, d1, d2, d3 }
    }

    /// The independent variable evaluated at `x`.
    pub const fn var(x: f64) -> Self {
        Jet::new(x, 1.0, 0.0, 0.0)
    }

    pub const fn constant(c: f64) -> Self {
        Jet::new(c, 0.0, 0.0, 0.0)
    }

    /// Compose an outer scalar function, given its value and first three
    /// derivatives at `self.v`, with this jet.
    pub fn chain(self, p0: f64, p1: f64, p2: f64, p3: f64) -> Self {
        let (g1, g2, g3) = (self.d1, self.d2, self.d3);
        Jet {
            v: p0,
            d1: p1 * g1,
            d2: p2 * g1 * g1 + p1 * g2,
            d3: p3 * g1 * g1 * g1 + 3.0 * p2 * g1 * g2 + p1 * g3,
        }
    }

    pub fn exp(self) -> Self {
        let e = self.v.exp();
        self.chain(e, e, e, e)
    }

    pub fn ln(self) -> Self {
        let r = 1.0 / self.v;
        self.chain(self.v.ln(), r, -r * r, 2.0 * r * r * r)
    }

    pub fn sinh(self) -> Self {
        let (s, c) = (self.v.sinh(), self.v.cosh());
        self.chain(s, c, s, c)
    }

    pub fn cosh(self) -> Self {
        let (s, c) = (self.v.sinh(), self.v.cosh());
        self.chain(c, s, c, s)
    }

    pub fn tanh(self) -> Self {
        let t = self.v.tanh();
        let sech2 = 1.0 - t * t;
        self.chain(t, sech2, -2.0 * t * sech2, sech2 * (6.0 * t * t - 2.0))
    }

    pub fn sin(self) -> Self {
        let (s, c) = self.v.sin_cos();
        self.chain(s, c, -s, -c)
    }

    pub fn cos(self) -> Self {
        let (s, c) = self.v.sin_cos();
        self.chain(c, -s, -c, s)
    }

    pub fn atan(self) -> Self {
        let x = self.v;
        let q = 1.0 / (1.0 + x * x);
        self.chain(
            x.atan(),
            q,
            -2.0 * x * q * q,
            (6.0 * x * x - 2.0) * q * q * q,
        )
    }

    pub fn sqrt(self) -> Self {
        let s = self.v.sqrt();
        self.chain(
            s,
            0.5 / s,
            -0.25 / (s * self.v),
            0.375 / (s * self.v * self.v),
        )
    }

    pub fn recip(self) -> Self {
        let r = 1.0 / self.v;
        self.chain(r, -r * r, 2.0 * r * r * r, -6.0 * r * r * r * r)
    }

    pub fn powi(self, n: i32) -> Self {
        let x = self.v;
        let nf = n as f64;
        self.chain(
            x.powi(n),
            nf * x.powi(n - 1),
            nf * (nf - 1.0) * x.powi(n - 2),
            nf * (nf - 1.0) * (nf - 2.0) * x.powi(n - 3),
        )
    }

    pub fn scale(self, k: f64) -> Self {
        Jet::new(k * self.v, k * self.d1, k * self.d2, k * self.d3)
    }

    /// Schwarzian derivative `f'''/f' - 3/2 (f''/f')^2` of the jet.
    pub fn schwarzian(&self) -> f64 {
        let r = self.d2 / self.d1;
        self.d3 / self.d1 - 1.5 * r * r
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, o: Jet) -> Jet {
        Jet::new(self.v + o.v, self.d1 + o.d1, self.d2 + o.d2, self.d3 + o.d3)
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, o: Jet) -> Jet {
        Jet::new(self.v - o.v, self.d1 - o.d1, self.d2 - o.d2, self.d3 - o.d3)
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, o: Jet) -> Jet {
        Jet {
            v: self.v * o.v,
            d1: self.d1 * o.v + self.v * o.d1,
            d2: self.d2 * o.v + 2.0 * self.d1 * o.d1 + self.v * o.d2,
            d3: self.d3 * o.v + 3.0 * self.d2 * o.d1 + 3.0 * self.d1 * o.d2 + self.v * o.d3,
        }
    }
}

#[allow(clippy::suspicious_arithmetic_impl)]
impl Div for Jet {
    type Output = Jet;
    fn div(self, o: Jet) -> Jet {
        self * o.recip()
    }
}

impl Add<f64> for Jet {
    type Output = Jet;
    fn add(self, c: f64) -> Jet {
        Jet { v: self.v + c, ..self }
    }
}

impl Sub<f64> for Jet {
    type Output = Jet;
    fn sub(self, c: f64) -> Jet {
        Jet { v: self.v - c, ..self }
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(self, c: f64) -> Jet {
        self.scale(c)
    }
}

impl Mul<Jet> for f64 {
    type Output = Jet;
    fn mul(self, j: Jet) -> Jet {
        j.scale(self)
    }
}

impl Add<Jet> for f64 {
    type Output = Jet;
    fn add(self, j: Jet) -> Jet {
        j + self
    }
}

impl Sub<Jet> for f64 {
    type Output = Jet;
    fn sub(self, j: Jet) -> Jet {
        -j + self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-12 * (1.0 + b.abs())
    }

    #[test]
    fn exp_derivatives_are_all_exp() {
        let j = Jet::var(0.7).exp();
        let e = 0.7f64.exp();
        assert!(close(j.v, e) && close(j.d1, e) && close(j.d2, e) && close(j.d3, e));
    }

    #[test]
    fn product_rule_on_polynomial() {
        // x^2 * x = x^3 -> 3x^2, 6x, 6
        let x = Jet::var(1.5);
        let p = x * x * x;
        assert!(close(p.v, 3.375));
        assert!(close(p.d1, 3.0 * 2.25));
        assert!(close(p.d2, 9.0));
        assert!(close(p.d3, 6.0));
        let q = x.powi(3);
        assert!(close(q.d3, 6.0) && close(q.d2, 9.0));
    }

    #[test]
    fn composition_matches_hand_derivatives() {
        // exp(x^2): d1 = 2x e, d2 = (2 + 4x^2) e, d3 = (12x + 8x^3) e
        let x = 0.3;
        let j = (Jet::var(x) * Jet::var(x)).exp();
        let e = (x * x).exp();
        assert!(close(j.d1, 2.0 * x * e));
        assert!(close(j.d2, (2.0 + 4.0 * x * x) * e));
        assert!(close(j.d3, (12.0 * x + 8.0 * x * x * x) * e));
    }

    #[test]
    fn tanh_third_derivative() {
        // d3 tanh = -2 sech^2 (1 - 3 tanh^2)... compare against sinh/cosh route
        let x = Jet::var(0.4);
        let a = x.tanh();
        let b = x.sinh() / x.cosh();
        assert!(close(a.d1, b.d1) && close(a.d2, b.d2) && close(a.d3, b.d3));
    }

    #[test]
    fn moebius_schwarzian_vanishes() {
        let x = Jet::var(0.8);
        let f = (2.0 * x + 1.0) / (x + 3.0);
        assert!(f.schwarzian().abs() < 1e-14);
    }

    #[test]
    fn sqrt_and_atan() {
        let x = Jet::var(2.0);
        let s = x.sqrt() * x.sqrt();
        assert!(close(s.v, 2.0) && close(s.d1, 1.0) && s.d2.abs() < 1e-14 && s.d3.abs() < 1e-14);
        let t = x.atan();
        // d3 atan = (6x^2 - 2)/(1+x^2)^3 = 22/125
        assert!(close(t.d3, 22.0 / 125.0));
    }
}
