//! Adaptive Gauss–Kronrod (10/21) quadrature for vector-valued integrands and
//! a few fixed rules.

use std::collections::BinaryHeap;
use std::cmp::Ordering;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::clifford::Spinor;
use crate::error::{Error, Result};

/// Anything that can be integrated: a vector space over ℝ with a norm.
pub trait QuadValue: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> {
    fn zero() -> Self;
    fn norm(&self) -> f64;
}

impl QuadValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn norm(&self) -> f64 {
        self.abs()
    }
}

impl QuadValue for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn norm(&self) -> f64 {
        Complex64::norm(*self)
    }
}

impl QuadValue for Spinor {
    fn zero() -> Self {
        Spinor::ZERO
    }
    fn norm(&self) -> f64 {
        self.max_abs()
    }
}

/// Fixed-size complex vector, for integrating several related quantities in
/// one pass.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CVec<const N: usize>(pub [Complex64; N]);

impl<const N: usize> Add for CVec<N> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        CVec(std::array::from_fn(|i| self.0[i] + rhs.0[i]))
    }
}

impl<const N: usize> Sub for CVec<N> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        CVec(std::array::from_fn(|i| self.0[i] - rhs.0[i]))
    }
}

impl<const N: usize> Mul<f64> for CVec<N> {
    type Output = Self;
    fn mul(self, s: f64) -> Self {
        CVec(self.0.map(|c| c * s))
    }
}

impl<const N: usize> Mul<Complex64> for CVec<N> {
    type Output = Self;
    fn mul(self, s: Complex64) -> Self {
        CVec(self.0.map(|c| c * s))
    }
}

impl<const N: usize> QuadValue for CVec<N> {
    fn zero() -> Self {
        CVec([Complex64::new(0.0, 0.0); N])
    }
    fn norm(&self) -> f64 {
        self.0.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }
}

/// Accuracy contract for the adaptive rule.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QuadratureSpec {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
    /// Relative inset from a moving endpoint; the last sliver is closed with a
    /// two-point Gauss rule that never touches the endpoint itself.
    pub boundary_offset: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self { abs_tol: 1e-13, rel_tol: 1e-11, max_subdivisions: 400, boundary_offset: 1e-8 }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0 && self.rel_tol > 0.0 && self.max_subdivisions >= 1) {
            return Err(Error::InvalidParameter(
                "quadrature tolerances must be positive and max_subdivisions >= 1".into(),
            ));
        }
        if !(0.0..1.0).contains(&self.boundary_offset) {
            return Err(Error::InvalidParameter("boundary_offset must lie in [0, 1)".into()));
        }
        Ok(())
    }
}

const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

/// One G10/K21 panel: (Kronrod estimate, |K − G|).
fn qk21<T: QuadValue>(f: &mut impl FnMut(f64) -> Result<T>, a: f64, b: f64) -> Result<(T, f64)> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center)?;
    let mut kron = fc * WGK[10];
    let mut gauss = T::zero();
    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = f(center - dx)?;
        let f2 = f(center + dx)?;
        let s = f1 + f2;
        kron = kron + s * WGK[j];
        if j % 2 == 1 {
            gauss = gauss + s * WG[j / 2];
        }
    }
    let kron = kron * half;
    let gauss = gauss * half;
    Ok((kron, (kron - gauss).norm()))
}

struct Panel<T> {
    a: f64,
    b: f64,
    value: T,
    err: f64,
}

impl<T> PartialEq for Panel<T> {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl<T> Eq for Panel<T> {}
impl<T> PartialOrd for Panel<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<T> Ord for Panel<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err)
    }
}

/// Integral and error estimate.
#[derive(Clone, Copy, Debug)]
pub struct Estimate<T> {
    pub value: T,
    pub error: f64,
    pub panels: usize,
}

/// Adaptive integration of `f` over [a, b], bisecting the panel with the
/// largest error until the total estimate meets the spec.
pub fn integrate_estimate<T: QuadValue>(
    mut f: impl FnMut(f64) -> Result<T>,
    a: f64,
    b: f64,
    spec: &QuadratureSpec,
) -> Result<Estimate<T>> {
    if a == b {
        return Ok(Estimate { value: T::zero(), error: 0.0, panels: 0 });
    }
    let (value, err) = qk21(&mut f, a, b)?;
    let mut heap = BinaryHeap::new();
    heap.push(Panel { a, b, value, err });
    let mut total = value;
    let mut total_err = err;
    let mut panels = 1;
    loop {
        let tol = spec.abs_tol.max(spec.rel_tol * total.norm());
        if total_err <= tol {
            break;
        }
        if panels >= spec.max_subdivisions {
            return Err(Error::QuadratureBudgetExceeded {
                subdivisions: panels,
                estimate: total_err,
            });
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // interval cannot be split further in floating point
            return Err(Error::QuadratureBudgetExceeded { subdivisions: panels, estimate: total_err });
        }
        let (v1, e1) = qk21(&mut f, worst.a, mid)?;
        let (v2, e2) = qk21(&mut f, mid, worst.b)?;
        total = total - worst.value + v1 + v2;
        total_err += e1 + e2 - worst.err;
        heap.push(Panel { a: worst.a, b: mid, value: v1, err: e1 });
        heap.push(Panel { a: mid, b: worst.b, value: v2, err: e2 });
        panels += 1;
    }
    // re-sum to shed drift from the running update
    let mut value = T::zero();
    let mut error = 0.0;
    for p in heap.iter() {
        value = value + p.value;
        error += p.err;
    }
    Ok(Estimate { value, error, panels })
}

pub fn integrate<T: QuadValue>(
    f: impl FnMut(f64) -> Result<T>,
    a: f64,
    b: f64,
    spec: &QuadratureSpec,
) -> Result<T> {
    integrate_estimate(f, a, b, spec).map(|e| e.value)
}

/// ∫₀ᴸ f, for integrands evaluated up to a moving cone edge at L. The bulk
/// [0, L(1−δ)] is adaptive; the sliver [L(1−δ), L] uses two interior Gauss
/// nodes.
pub fn integrate_to_edge<T: QuadValue>(
    mut f: impl FnMut(f64) -> Result<T>,
    length: f64,
    spec: &QuadratureSpec,
) -> Result<T> {
    if length <= 0.0 {
        return Ok(T::zero());
    }
    let cut = length * (1.0 - spec.boundary_offset);
    let bulk = integrate(&mut f, 0.0, cut, spec)?;
    if cut >= length {
        return Ok(bulk);
    }
    let (c, h) = (0.5 * (cut + length), 0.5 * (length - cut));
    let g = 1.0 / 3f64.sqrt();
    let tail = (f(c - h * g)? + f(c + h * g)?) * h;
    Ok(bulk + tail)
}

/// Gauss–Legendre nodes and weights on [−1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let k = k as f64;
                let p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            let p = if n == 0 { 1.0 } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (z * p - pm) / (z * z - 1.0);
            let dz = p / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
    (x, w)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_exact() {
        let spec = QuadratureSpec::default();
        let v = integrate(|x: f64| Ok(x.powi(7) - 3.0 * x * x), -1.0, 2.0, &spec).unwrap();
        let exact = (256.0 - 1.0) / 8.0 - (8.0 + 1.0);
        assert!((v - exact).abs() < 1e-13);
    }

    #[test]
    fn oscillatory_complex() {
        let spec = QuadratureSpec::default();
        let k = 13.0;
        let v = integrate(|x: f64| Ok(Complex64::new(0.0, k * x).exp()), 0.0, 2.0, &spec).unwrap();
        let exact = (Complex64::new(0.0, 2.0 * k).exp() - 1.0) / Complex64::new(0.0, k);
        assert!((v - exact).norm() < 1e-12);
    }

    #[test]
    fn sqrt_singularity_converges() {
        let spec = QuadratureSpec::default();
        let v = integrate(|x: f64| Ok(x.sqrt()), 0.0, 1.0, &spec).unwrap();
        assert!((v - 2.0 / 3.0).abs() < 1e-11);
    }

    #[test]
    fn budget_is_reported() {
        let spec = QuadratureSpec { max_subdivisions: 2, ..Default::default() };
        let r = integrate(|x: f64| Ok((50.0 * x).sin() / x.max(1e-300).sqrt()), 0.0, 10.0, &spec);
        assert!(matches!(r, Err(Error::QuadratureBudgetExceeded { .. })));
    }

    #[test]
    fn edge_rule_matches_plain_rule() {
        let spec = QuadratureSpec::default();
        let f = |x: f64| Ok(Complex64::new(x.cos(), x * x));
        let a = integrate_to_edge(f, 1.3, &spec).unwrap();
        let b = integrate(f, 0.0, 1.3, &spec).unwrap();
        assert!((a - b).norm() < 1e-14);
        assert_eq!(integrate_to_edge(f, 0.0, &spec).unwrap(), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn legendre_rule() {
        let (x, w) = gauss_legendre(12);
        let s: f64 = w.iter().sum();
        assert!((s - 2.0).abs() < 1e-14);
        let m: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(22)).sum();
        assert!((m - 2.0 / 23.0).abs() < 1e-14);
    }
}
