//! Second-order forward-mode jets over (t, q₁, q₂, q₃).
//!
//! A jet carries a value, gradient and Hessian. Differentiating a jet shifts
//! everything down one order, so `order` records how many more derivatives
//! are still exact.

use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use num_complex::Complex64 as C;

pub const NVARS: usize = 4;

const ZERO: C = C::new(0.0, 0.0);

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet {
    pub v: C,
    pub g: [C; NVARS],
    pub h: [[C; NVARS]; NVARS],
    /// Number of exact derivative orders carried (0, 1 or 2).
    pub order: u8,
}

impl Jet {
    pub fn constant(v: C) -> Self {
        Self { v, g: [ZERO; NVARS], h: [[ZERO; NVARS]; NVARS], order: 2 }
    }

    pub fn real(v: f64) -> Self {
        Self::constant(C::new(v, 0.0))
    }

    /// The coordinate function x_i evaluated at `x`.
    pub fn variable(i: usize, x: f64) -> Self {
        let mut j = Self::real(x);
        j.g[i] = C::new(1.0, 0.0);
        j
    }

    /// Coordinate jets at a point.
    pub fn coords(point: [f64; NVARS]) -> [Jet; NVARS] {
        [0, 1, 2, 3].map(|i| Jet::variable(i, point[i]))
    }

    /// ∂/∂x_i, one order lower.
    pub fn d(&self, i: usize) -> Self {
        assert!(self.order > 0, "derivative of an order-0 jet");
        Self { v: self.g[i], g: self.h[i], h: [[ZERO; NVARS]; NVARS], order: self.order - 1 }
    }

    /// f∘self given f, f′, f″ at the value.
    fn chain(&self, f0: C, f1: C, f2: C) -> Self {
        let mut out = Self { v: f0, g: [ZERO; NVARS], h: [[ZERO; NVARS]; NVARS], order: self.order };
        for i in 0..NVARS {
            out.g[i] = f1 * self.g[i];
            for j in 0..NVARS {
                out.h[i][j] = f1 * self.h[i][j] + f2 * self.g[i] * self.g[j];
            }
        }
        out
    }

    pub fn exp(&self) -> Self {
        let e = self.v.exp();
        self.chain(e, e, e)
    }

    pub fn sin(&self) -> Self {
        let (s, c) = (self.v.sin(), self.v.cos());
        self.chain(s, c, -s)
    }

    pub fn cos(&self) -> Self {
        let (s, c) = (self.v.sin(), self.v.cos());
        self.chain(c, -s, -c)
    }

    pub fn recip(&self) -> Self {
        let r = self.v.inv();
        self.chain(r, -r * r, 2.0 * r * r * r)
    }

    pub fn powi(&self, n: i32) -> Self {
        let nf = n as f64;
        // skip vanishing coefficients so x⁰, x¹ stay finite at x = 0
        let p = |k: i32, coef: f64| if coef == 0.0 { ZERO } else { coef * self.v.powi(n - k) };
        self.chain(p(0, 1.0), p(1, nf), p(2, nf * (nf - 1.0)))
    }

    pub fn scale(&self, s: C) -> Self {
        let mut out = *self;
        out.v *= s;
        for i in 0..NVARS {
            out.g[i] *= s;
            for j in 0..NVARS {
                out.h[i][j] *= s;
            }
        }
        out
    }

    pub fn is_finite(&self) -> bool {
        let ok = |z: &C| z.re.is_finite() && z.im.is_finite();
        ok(&self.v) && self.g.iter().all(ok) && self.h.iter().flatten().all(ok)
    }

    /// Largest second derivative modulus (0 when not carried).
    pub fn max_second(&self) -> f64 {
        if self.order < 2 {
            return 0.0;
        }
        self.h.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, o: Jet) -> Jet {
        let mut out = self;
        out.v += o.v;
        for i in 0..NVARS {
            out.g[i] += o.g[i];
            for j in 0..NVARS {
                out.h[i][j] += o.h[i][j];
            }
        }
        out.order = self.order.min(o.order);
        out
    }
}

impl AddAssign for Jet {
    fn add_assign(&mut self, o: Jet) {
        *self = *self + o;
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(C::new(-1.0, 0.0))
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, o: Jet) -> Jet {
        self + (-o)
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, o: Jet) -> Jet {
        let mut out = Jet::constant(self.v * o.v);
        for i in 0..NVARS {
            out.g[i] = self.g[i] * o.v + self.v * o.g[i];
            for j in 0..NVARS {
                out.h[i][j] = self.h[i][j] * o.v
                    + self.g[i] * o.g[j]
                    + self.g[j] * o.g[i]
                    + self.v * o.h[i][j];
            }
        }
        out.order = self.order.min(o.order);
        out
    }
}

impl Mul<C> for Jet {
    type Output = Jet;
    fn mul(self, s: C) -> Jet {
        self.scale(s)
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(self, s: f64) -> Jet {
        self.scale(C::new(s, 0.0))
    }
}

impl Add<f64> for Jet {
    type Output = Jet;
    fn add(self, s: f64) -> Jet {
        let mut out = self;
        out.v += s;
        out
    }
}

impl Add<C> for Jet {
    type Output = Jet;
    fn add(self, s: C) -> Jet {
        let mut out = self;
        out.v += s;
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_rule_and_chain() {
        let [t, x, y, _] = Jet::coords([0.3, 1.1, -0.4, 2.0]);
        // f = sin(x y) e^t
        let f = (x * y).sin() * t.exp();
        let (xv, yv, tv) = (1.1f64, -0.4f64, 0.3f64);
        let c = (xv * yv).cos() * tv.exp();
        let s = (xv * yv).sin() * tv.exp();
        assert!((f.v.re - s).abs() < 1e-15);
        assert!((f.g[1].re - yv * c).abs() < 1e-15);
        assert!((f.h[1][2].re - (c - xv * yv * s)).abs() < 1e-15);
        assert!((f.h[1][1].re + yv * yv * s).abs() < 1e-15);
        assert!((f.h[0][1].re - yv * c).abs() < 1e-15);
        assert_eq!(f.d(1).d(2).v, f.h[1][2]);
        assert_eq!(f.d(1).order, 1);
    }

    #[test]
    fn recip_and_powers() {
        let [_, x, _, _] = Jet::coords([0.0, 1.5, 0.0, 0.0]);
        let r = x.recip();
        assert!((r.g[1].re + 1.0 / 2.25).abs() < 1e-15);
        assert!((r.h[1][1].re - 2.0 / 3.375).abs() < 1e-15);
        let p = x.powi(3);
        assert!((p.h[1][1].re - 9.0).abs() < 1e-14);
        let p0 = x.powi(0);
        assert_eq!(p0.v.re, 1.0);
        assert_eq!(p0.g[1].re, 0.0);
    }

    #[test]
    #[should_panic]
    fn too_many_derivatives() {
        let x = Jet::variable(1, 0.5);
        let _ = x.d(1).d(1).d(1);
    }
}
