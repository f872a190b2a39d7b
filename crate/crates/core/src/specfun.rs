//! Gauss hypergeometric function and the two Bessel functions needed by the
//! kernels, all with complex parameters.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Parameters `(a, b, c)` of F(a, b; c; z).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Hyp2F1Params {
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
}

impl Hyp2F1Params {
    pub fn new(a: Complex64, b: Complex64, c: Complex64) -> Self {
        Self { a, b, c }
    }

    /// The kernel family a = b = 1/2 − M/H, c = 1.
    pub fn kernel(mu: Complex64) -> Self {
        let a = Complex64::new(0.5, 0.0) - mu;
        Self { a, b: a, c: Complex64::new(1.0, 0.0) }
    }

    /// Parameters of the z-derivative series, (a+1, b+1; c+1).
    pub fn shifted(&self) -> Self {
        let one = Complex64::new(1.0, 0.0);
        Self { a: self.a + one, b: self.b + one, c: self.c + one }
    }
}

/// Series termination contract.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesControl {
    /// A term counts as negligible below `rel_tol · |partial sum|`.
    pub rel_tol: f64,
    /// Number of consecutive negligible terms that ends the sum.
    pub quiet_terms: usize,
    pub max_terms: usize,
    /// |z| at or below which the direct series is used.
    pub direct_radius: f64,
}

impl Default for SeriesControl {
    fn default() -> Self {
        Self { rel_tol: 1e-16, quiet_terms: 3, max_terms: 20_000, direct_radius: 0.5 }
    }
}

fn nonpositive_integer(x: Complex64) -> bool {
    x.im == 0.0 && x.re <= 0.0 && x.re == x.re.round()
}

fn near_integer(x: Complex64, tol: f64) -> bool {
    x.im.abs() < tol && (x.re - x.re.round()).abs() < tol
}

/// Sum a hypergeometric-type series whose term ratio is `ratio(k)`.
fn sum_series(ctl: &SeriesControl, mut ratio: impl FnMut(usize) -> Complex64) -> Result<Complex64> {
    let mut term = Complex64::new(1.0, 0.0);
    let mut sum = term;
    let mut quiet = 0;
    for k in 0..ctl.max_terms {
        term *= ratio(k);
        sum += term;
        if term.norm() <= ctl.rel_tol * sum.norm().max(f64::MIN_POSITIVE) {
            quiet += 1;
            if quiet >= ctl.quiet_terms {
                return Ok(sum);
            }
        } else {
            quiet = 0;
        }
    }
    Err(Error::SeriesBudgetExceeded { terms: ctl.max_terms })
}

fn check_params(p: &Hyp2F1Params, z: Complex64) -> Result<()> {
    if nonpositive_integer(p.c) {
        return Err(Error::ParameterPole { c: p.c.re });
    }
    let excess = p.c - p.a - p.b;
    let terminating = nonpositive_integer(p.a) || nonpositive_integer(p.b);
    if !terminating {
        let r = z.norm();
        if r > 1.0 || (r == 1.0 && (z != Complex64::new(1.0, 0.0) || excess.re <= 0.0)) {
            return Err(Error::DivergentSeries { z: z.re, excess: excess.re });
        }
    }
    Ok(())
}

/// Direct Gauss series Σ (a)ₖ(b)ₖ/((c)ₖ k!) zᵏ.
pub fn hyp2f1_series(p: &Hyp2F1Params, z: Complex64, ctl: &SeriesControl) -> Result<Complex64> {
    check_params(p, z)?;
    sum_series(ctl, |k| {
        let k = k as f64;
        (p.a + k) * (p.b + k) / ((p.c + k) * (k + 1.0)) * z
    })
}

/// Evaluation through the z → 1 − z connection formula. Requires c − a − b
/// away from the integers and a, b not nonpositive integers.
pub fn hyp2f1_transformed(p: &Hyp2F1Params, z: Complex64, ctl: &SeriesControl) -> Result<Complex64> {
    check_params(p, z)?;
    let one = Complex64::new(1.0, 0.0);
    let s = p.c - p.a - p.b;
    if near_integer(s, 1e-8) || nonpositive_integer(p.a) || nonpositive_integer(p.b) {
        return Err(Error::InvalidParameter(
            "connection formula needs non-integer c-a-b and non-terminating a, b".into(),
        ));
    }
    let w = one - z;
    let f1 = hyp2f1_series(&Hyp2F1Params::new(p.a, p.b, one - s), w, ctl)?;
    let f2 = hyp2f1_series(&Hyp2F1Params::new(p.c - p.a, p.c - p.b, one + s), w, ctl)?;
    let g1 = ln_gamma(p.c) + ln_gamma(s) - ln_gamma(p.c - p.a) - ln_gamma(p.c - p.b);
    let g2 = ln_gamma(p.c) + ln_gamma(-s) - ln_gamma(p.a) - ln_gamma(p.b);
    let w_pow = if w == Complex64::new(0.0, 0.0) {
        Complex64::new(0.0, 0.0)
    } else {
        (s * w.ln()).exp()
    };
    Ok(g1.exp() * f1 + (g2.exp() * w_pow) * f2)
}

/// F(a, b; c; z) for |z| < 1, or z = 1 with Re(c − a − b) > 0.
pub fn hyp2f1(p: &Hyp2F1Params, z: Complex64) -> Result<Complex64> {
    hyp2f1_with(p, z, &SeriesControl::default())
}

pub fn hyp2f1_with(p: &Hyp2F1Params, z: Complex64, ctl: &SeriesControl) -> Result<Complex64> {
    check_params(p, z)?;
    if z.norm() <= ctl.direct_radius || nonpositive_integer(p.a) || nonpositive_integer(p.b) {
        return hyp2f1_series(p, z, ctl);
    }
    if z == Complex64::new(1.0, 0.0) {
        // Gauss summation.
        let s = p.c - p.a - p.b;
        return Ok((ln_gamma(p.c) + ln_gamma(s) - ln_gamma(p.c - p.a) - ln_gamma(p.c - p.b)).exp());
    }
    match hyp2f1_transformed(p, z, ctl) {
        Err(Error::InvalidParameter(_)) => hyp2f1_series(p, z, ctl),
        other => other,
    }
}

/// dF/dz = (ab/c) F(a+1, b+1; c+1; z).
pub fn hyp2f1_dz(p: &Hyp2F1Params, z: Complex64) -> Result<Complex64> {
    hyp2f1_dz_with(p, z, &SeriesControl::default())
}

pub fn hyp2f1_dz_with(p: &Hyp2F1Params, z: Complex64, ctl: &SeriesControl) -> Result<Complex64> {
    check_params(p, z)?;
    let coef = p.a * p.b / p.c;
    if coef == Complex64::new(0.0, 0.0) {
        return Ok(coef);
    }
    Ok(coef * hyp2f1_with(&p.shifted(), z, ctl)?)
}

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Principal-ish log Γ(z) for complex z (Lanczos with reflection). Poles give
/// +∞ real part so that exp(−lnΓ) = 0 there.
pub fn ln_gamma(z: Complex64) -> Complex64 {
    use std::f64::consts::PI;
    if nonpositive_integer(z) {
        return Complex64::new(f64::INFINITY, 0.0);
    }
    if z.re < 0.5 {
        // Γ(z)Γ(1−z) = π / sin(πz)
        let s = (Complex64::new(PI, 0.0) * z).sin();
        return Complex64::new(PI.ln(), 0.0) - s.ln() - ln_gamma(Complex64::new(1.0, 0.0) - z);
    }
    let z = z - 1.0;
    let mut x = Complex64::new(LANCZOS[0], 0.0);
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        x += *c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    0.5 * (2.0 * PI).ln() + (z + 0.5) * t.ln() - t + x.ln()
}

pub fn gamma(z: Complex64) -> Complex64 {
    ln_gamma(z).exp()
}

/// Σ sᵏ/(k!)², so that I₀(w) is this series at s = w²/4.
pub fn i0_series(s: Complex64) -> Complex64 {
    sum_series(&SeriesControl::default(), |k| {
        let k1 = (k + 1) as f64;
        s / (k1 * k1)
    })
    .expect("entire series converges")
}

/// Σ sᵏ/(k!(k+1)!), so that J₁(w) = (w/2)·(this series at −w²/4).
pub fn i1_series(s: Complex64) -> Complex64 {
    sum_series(&SeriesControl::default(), |k| {
        let k1 = (k + 1) as f64;
        s / (k1 * (k1 + 1.0))
    })
    .expect("entire series converges")
}

/// Modified Bessel function I₀ by its entire power series.
pub fn bessel_i0(w: Complex64) -> Complex64 {
    i0_series(w * w / 4.0)
}

/// Bessel function J₁ by its entire power series.
pub fn bessel_j1(w: Complex64) -> Complex64 {
    w / 2.0 * i1_series(-w * w / 4.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn z_zero_is_one() {
        let p = Hyp2F1Params::new(c(0.3, 1.0), c(-2.5, 0.1), c(1.7, 0.0));
        assert_eq!(hyp2f1(&p, c(0.0, 0.0)).unwrap(), c(1.0, 0.0));
    }

    #[test]
    fn massless_kernel_parameters_truncate() {
        let p = Hyp2F1Params::kernel(c(0.5, 0.0));
        for z in [0.1, 0.5, 0.9] {
            assert_eq!(hyp2f1(&p, c(z, 0.0)).unwrap(), c(1.0, 0.0));
            assert_eq!(hyp2f1_dz(&p, c(z, 0.0)).unwrap(), c(0.0, 0.0));
        }
    }

    #[test]
    fn closed_forms() {
        // F(1,1;2;z) = −ln(1−z)/z
        let p = Hyp2F1Params::new(c(1.0, 0.0), c(1.0, 0.0), c(2.0, 0.0));
        for z in [0.2, 0.45, 0.7, 0.95] {
            let v = hyp2f1(&p, c(z, 0.0)).unwrap();
            let exact = -(1.0 - z).ln() / z;
            assert!((v.re - exact).abs() < 1e-12 * exact, "z={z}: {v} vs {exact}");
        }
        // F(1/2,1/2;3/2;z²) = asin(z)/z
        let p = Hyp2F1Params::new(c(0.5, 0.0), c(0.5, 0.0), c(1.5, 0.0));
        for x in [0.3f64, 0.8, 0.95] {
            let v = hyp2f1(&p, c(x * x, 0.0)).unwrap();
            assert!((v.re - x.asin() / x).abs() < 1e-12);
        }
    }

    #[test]
    fn gauss_summation_at_one() {
        // F(a,b;c;1) = Γ(c)Γ(c−a−b)/(Γ(c−a)Γ(c−b)); for a=b=1/2,c=2: 4/π
        let p = Hyp2F1Params::new(c(0.5, 0.0), c(0.5, 0.0), c(2.0, 0.0));
        let v = hyp2f1(&p, c(1.0, 0.0)).unwrap();
        assert!((v.re - 4.0 / std::f64::consts::PI).abs() < 1e-12);
    }

    #[test]
    fn errors() {
        let p = Hyp2F1Params::new(c(0.5, 0.0), c(0.5, 0.0), c(1.0, 0.0));
        assert!(matches!(hyp2f1(&p, c(1.0, 0.0)), Err(Error::DivergentSeries { .. })));
        let p = Hyp2F1Params::new(c(0.5, 0.0), c(0.5, 0.0), c(-2.0, 0.0));
        assert!(matches!(hyp2f1(&p, c(0.1, 0.0)), Err(Error::ParameterPole { .. })));
        let p = Hyp2F1Params::new(c(0.5, 0.0), c(0.5, 0.0), c(1.0, 0.0));
        assert!(matches!(hyp2f1(&p, c(1.2, 0.0)), Err(Error::DivergentSeries { .. })));
    }

    #[test]
    fn gamma_values() {
        assert!((gamma(c(5.0, 0.0)).re - 24.0).abs() < 1e-12);
        assert!((gamma(c(0.5, 0.0)).re - std::f64::consts::PI.sqrt()).abs() < 1e-13);
        assert!((gamma(c(-0.5, 0.0)).re + 2.0 * std::f64::consts::PI.sqrt()).abs() < 1e-12);
        // |Γ(i)|² = π / sinh π
        let g = gamma(c(0.0, 1.0));
        let pi = std::f64::consts::PI;
        assert!((g.norm_sqr() - pi / pi.sinh()).abs() < 1e-13);
        assert_eq!((-ln_gamma(c(-3.0, 0.0))).exp(), c(0.0, 0.0));
    }

    #[test]
    fn bessel_basics() {
        assert_eq!(bessel_i0(c(0.0, 0.0)), c(1.0, 0.0));
        assert_eq!(bessel_j1(c(0.0, 0.0)), c(0.0, 0.0));
        let w = c(0.7, -1.3);
        assert!((bessel_j1(-w) + bessel_j1(w)).norm() < 1e-16);
    }
}
