//! Hypergeometric kernels E, K0, K1 of the de Sitter integral transform, their
//! time derivatives, and the Bessel kernels of the flat (H = 0) limit.
//!
//! E(r, t; 0, t0; M) is evaluated in log form so that M/H in the thousands
//! (H → 0 studies) does not overflow the prefactor.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::specfun::{hyp2f1, hyp2f1_dz, i0_series, i1_series, Hyp2F1Params};

/// Relative slack for points that sit on the cone up to rounding.
const CONE_SLACK: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelParams {
    pub h: f64,
    pub m: Complex64,
    pub t0: f64,
}

impl KernelParams {
    pub fn new(h: f64, m: Complex64, t0: f64) -> Self {
        Self { h, m, t0 }
    }

    pub fn with_t0(self, t0: f64) -> Self {
        Self { t0, ..self }
    }

    fn mu(&self) -> Complex64 {
        self.m / self.h
    }

    fn check(&self) -> Result<()> {
        if self.h > 0.0 && self.h.is_finite() {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("H must be positive, got {}", self.h)))
        }
    }
}

/// Cone geometry of a point (r, t) relative to the source time t0.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConeCoords {
    pub r: f64,
    pub t: f64,
    /// (e^{−Ht0} + e^{−Ht})² − (Hr)²
    pub base: f64,
    /// (e^{−Ht} − e^{−Ht0})² − (Hr)², clamped at 0 on the cone
    pub numer: f64,
    pub z: f64,
}

impl ConeCoords {
    pub fn new(h: f64, t0: f64, r: f64, t: f64) -> Result<Self> {
        let et = (-h * t).exp();
        let eb = (-h * t0).exp();
        let hr = h * r.abs();
        let sum = et + eb;
        // |e^{−Ht} − e^{−Ht0}| without cancellation
        let diff = (-h * t.min(t0)).exp() * -(-h * (t - t0).abs()).exp_m1();
        let base = (sum - hr) * (sum + hr);
        let mut numer = (diff - hr) * (diff + hr);
        if base <= 0.0 {
            return Err(Error::OutsideCone { r, t });
        }
        if numer < 0.0 {
            if hr - diff <= CONE_SLACK * sum {
                numer = 0.0;
            } else {
                return Err(Error::OutsideCone { r, t });
            }
        }
        let z = numer / base;
        if !(0.0..=1.0).contains(&z) {
            return Err(Error::OutsideCone { r, t });
        }
        Ok(Self { r, t, base, numer, z })
    }
}

/// Distance function φ(t) = (1 − e^{−Ht})/H.
pub fn phi(h: f64, t: f64) -> f64 {
    -(-h * t).exp_m1() / h
}

/// φ′(t) = e^{−Ht}.
pub fn phi_dot(h: f64, t: f64) -> f64 {
    (-h * t).exp()
}

/// (H/2 + im, H/2 − im).
pub fn split_masses(h: f64, m: Complex64) -> (Complex64, Complex64) {
    let i = Complex64::i();
    let half = Complex64::new(h / 2.0, 0.0);
    (half + i * m, half - i * m)
}

/// Log of the E prefactor 4^{−μ} e^{M(t0+t)} base^{μ−1/2}.
fn log_prefactor(p: &KernelParams, c: &ConeCoords) -> Complex64 {
    let mu = p.mu();
    p.m * (p.t0 + c.t) + (mu - 0.5) * c.base.ln() - mu * 4f64.ln()
}

/// E(r, t; 0, t0; M).
pub fn kernel_e(p: &KernelParams, r: f64, t: f64) -> Result<Complex64> {
    p.check()?;
    let c = ConeCoords::new(p.h, p.t0, r, t)?;
    let f = hyp2f1(&Hyp2F1Params::kernel(p.mu()), c.z.into())?;
    Ok(log_prefactor(p, &c).exp() * f)
}

/// E and ∂E/∂t together (they share the expensive pieces).
pub fn kernel_e_with_dt(p: &KernelParams, r: f64, t: f64) -> Result<(Complex64, Complex64)> {
    p.check()?;
    let h = p.h;
    let c = ConeCoords::new(h, p.t0, r, t)?;
    let hp = Hyp2F1Params::kernel(p.mu());
    let z = Complex64::from(c.z);
    let f = hyp2f1(&hp, z)?;
    let df = hyp2f1_dz(&hp, z)?;
    let pre = log_prefactor(p, &c).exp();
    let e = pre * f;

    let et = (-h * t).exp();
    let eb = (-h * p.t0).exp();
    let base_t = -2.0 * h * et * (eb + et);
    let numer_t = -2.0 * h * et * (et - eb);
    let z_t = (numer_t * c.base - c.numer * base_t) / (c.base * c.base);
    let de = e * (p.m + (p.mu() - 0.5) * base_t / c.base) + pre * df * z_t;
    Ok((e, de))
}

/// ∂E/∂t.
pub fn kernel_e_dt(p: &KernelParams, r: f64, t: f64) -> Result<Complex64> {
    kernel_e_with_dt(p, r, t).map(|(_, d)| d)
}

/// K₁(r, t; M) = E(r, t; 0, 0; M). `p.t0` is ignored.
pub fn kernel_k1(p: &KernelParams, r: f64, t: f64) -> Result<Complex64> {
    kernel_e(&p.with_t0(0.0), r, t)
}

/// K₀(r, t; M) = −∂_b E(r, t; 0, b; M) at b = 0, in closed form. `p.t0` is
/// ignored.
pub fn kernel_k0(p: &KernelParams, r: f64, t: f64) -> Result<Complex64> {
    p.check()?;
    let (h, m) = (p.h, p.m);
    let mu = p.mu();
    let c = ConeCoords::new(h, 0.0, r, t)?;
    let z = Complex64::from(c.z);
    let a = Complex64::new(0.5, 0.0) - mu;
    let f0 = hyp2f1(&Hyp2F1Params::new(a, a, 1.0.into()), z)?;
    let f1 = hyp2f1(&Hyp2F1Params::new(a + 1.0, a + 1.0, 2.0.into()), z)?;

    let e1 = (h * t).exp();
    let e2 = (2.0 * h * t).exp();
    let hr2 = (h * r) * (h * r);
    let pre = -(m * t - 4.0 * h * t + (mu - 2.5) * c.base.ln() - mu * 4f64.ln()).exp();
    let bracket = -e2 * hr2 * m + h * (e2 + e1) - m * (2.0 * h * t).exp_m1();
    let t1 = e2 * c.base * bracket * f0;
    let hm = Complex64::from(h) - 2.0 * m;
    let t2 = hm * hm / h * (3.0 * h * t).exp() * ((-2.0 * h * t).exp_m1() - hr2) * f1;
    Ok(pre * (t1 + t2))
}

fn mink_q(t: f64, r: f64) -> Result<f64> {
    let q = (t - r) * (t + r);
    if r < 0.0 || t < 0.0 {
        return Err(Error::OutsideCone { r, t });
    }
    if q < 0.0 {
        if r - t <= CONE_SLACK * t.abs().max(1.0) {
            return Ok(0.0);
        }
        return Err(Error::OutsideCone { r, t });
    }
    Ok(q)
}

/// I₀(M√((t−b)² − r²)).
pub fn kernel_mink_i0(m: Complex64, t: f64, b: f64, r: f64) -> Result<Complex64> {
    let q = mink_q(t - b, r)?;
    Ok(i0_series(m * m * q / 4.0))
}

/// ∂/∂t of [`kernel_mink_i0`], which equals −[`kernel_mink_k0`] at t − b.
pub fn kernel_mink_i0_dt(m: Complex64, t: f64, b: f64, r: f64) -> Result<Complex64> {
    kernel_mink_k0(m, t - b, r).map(|v| -v)
}

/// iMt/√(t² − r²) · J₁(iM√(t² − r²)), summed as −(M²t/2) Σ sᵏ/(k!(k+1)!) with
/// s = M²(t² − r²)/4 so that the cone edge is regular.
pub fn kernel_mink_k0(m: Complex64, t: f64, r: f64) -> Result<Complex64> {
    let q = mink_q(t, r)?;
    let m2 = m * m;
    Ok(-(m2 * t / 2.0) * i1_series(m2 * q / 4.0))
}

/// |2E(r, t; 0, b; M) − I₀(M√((t−b)² − r²))|, the gap between the de Sitter
/// kernel and its flat counterpart.
pub fn limit_check_e_to_i0(h: f64, m: Complex64, t: f64, b: f64, r: f64) -> Result<f64> {
    let e = kernel_e(&KernelParams::new(h, m, b), r, t)?;
    let i0 = kernel_mink_i0(m, t, b, r)?;
    Ok((2.0 * e - i0).norm())
}
