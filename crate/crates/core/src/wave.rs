//! Solutions of the flat wave equation v_ss = Δv with v(·,0) = φ, v_s(·,0) = 0:
//! the inner layer consumed by every transform.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{gauss_legendre, QuadValue};

/// Plane-wave datum e^{iξ·x}.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FourierMode {
    pub xi: Vec<f64>,
}

impl FourierMode {
    pub fn new(xi: Vec<f64>) -> Self {
        Self { xi }
    }

    pub fn norm(&self) -> f64 {
        self.xi.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn dim(&self) -> usize {
        self.xi.len()
    }
}

/// How a wave solution was produced.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum WaveKind {
    ModeExact,
    Dalembert1d,
    Kirchhoff3d,
}

/// Mode amplitude cos(s|ξ|) of the solution with datum e^{iξ·x}.
pub fn mode_wave(xi_norm: f64, s: f64) -> f64 {
    (s * xi_norm).cos()
}

/// ∫₀ˢ cos(r|ξ|) dr = sin(s|ξ|)/|ξ|, continuous at |ξ| = 0.
pub fn mode_wave_integral(xi_norm: f64, s: f64) -> f64 {
    let x = s * xi_norm;
    if x.abs() < 1e-4 {
        let x2 = x * x;
        s * (1.0 - x2 / 6.0 * (1.0 - x2 / 20.0))
    } else {
        x.sin() / xi_norm
    }
}

/// (φ(x+s) + φ(x−s))/2.
pub fn dalembert_1d<T: QuadValue>(phi: impl Fn(f64) -> T, x: f64, s: f64) -> T {
    (phi(x + s) + phi(x - s)) * 0.5
}

/// Quadrature rule for means over the unit sphere.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum SphereRule {
    /// Octahedrally symmetric 26-point rule, exact through degree 7.
    Lebedev26,
    /// Gauss–Legendre in cos θ times the trapezoid rule in azimuth.
    Product { n_theta: usize, n_phi: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SphereSpec {
    pub rule: SphereRule,
    /// Step of the central difference in s.
    pub step: f64,
}

impl Default for SphereSpec {
    fn default() -> Self {
        Self { rule: SphereRule::Product { n_theta: 24, n_phi: 48 }, step: 1e-3 }
    }
}

impl SphereRule {
    /// Unit directions and weights summing to one.
    pub fn nodes(&self) -> Result<Vec<([f64; 3], f64)>> {
        match *self {
            SphereRule::Lebedev26 => Ok(lebedev26()),
            SphereRule::Product { n_theta, n_phi } => {
                if n_theta == 0 || n_phi == 0 {
                    return Err(Error::InvalidParameter("empty sphere rule".into()));
                }
                let (x, w) = gauss_legendre(n_theta);
                let mut out = Vec::with_capacity(n_theta * n_phi);
                for (ct, wt) in x.iter().zip(&w) {
                    let st = (1.0 - ct * ct).sqrt();
                    for j in 0..n_phi {
                        let ph = 2.0 * std::f64::consts::PI * (j as f64 + 0.5) / n_phi as f64;
                        out.push(([st * ph.cos(), st * ph.sin(), *ct], wt / (2.0 * n_phi as f64)));
                    }
                }
                Ok(out)
            }
        }
    }
}

fn lebedev26() -> Vec<([f64; 3], f64)> {
    let mut out = Vec::with_capacity(26);
    for axis in 0..3 {
        for sgn in [1.0, -1.0] {
            let mut v = [0.0; 3];
            v[axis] = sgn;
            out.push((v, 1.0 / 21.0));
        }
    }
    let a = std::f64::consts::FRAC_1_SQRT_2;
    for (i, j) in [(0, 1), (0, 2), (1, 2)] {
        for si in [a, -a] {
            for sj in [a, -a] {
                let mut v = [0.0; 3];
                v[i] = si;
                v[j] = sj;
                out.push((v, 4.0 / 105.0));
            }
        }
    }
    let b = 1.0 / 3f64.sqrt();
    for sx in [b, -b] {
        for sy in [b, -b] {
            for sz in [b, -b] {
                out.push(([sx, sy, sz], 9.0 / 280.0));
            }
        }
    }
    out
}

/// Mean of φ over the sphere of radius s about x.
pub fn spherical_mean<T: QuadValue>(
    phi: &impl Fn([f64; 3]) -> T,
    x: [f64; 3],
    s: f64,
    nodes: &[([f64; 3], f64)],
) -> T {
    nodes.iter().fold(T::zero(), |acc, (n, w)| {
        acc + phi([x[0] + s * n[0], x[1] + s * n[1], x[2] + s * n[2]]) * *w
    })
}

/// Kirchhoff's formula ∂_s[s · mean_s φ](x) for the 3D wave equation with
/// zero initial velocity.
pub fn kirchhoff_3d<T: QuadValue>(
    phi: impl Fn([f64; 3]) -> T,
    x: [f64; 3],
    s: f64,
    spec: &SphereSpec,
) -> Result<T> {
    if s < 0.0 {
        return Err(Error::InvalidParameter(format!("wave time must be nonnegative, got {s}")));
    }
    let nodes = spec.rule.nodes()?;
    let h = spec.step;
    // s·mean is odd in s, so the stencil may straddle s = 0
    let g = |u: f64| spherical_mean(&phi, x, u, &nodes) * u;
    Ok((g(s - 2.0 * h) - g(s + 2.0 * h) + (g(s + h) - g(s - h)) * 8.0) * (1.0 / (12.0 * h)))
}

/// Plane wave e^{iξ·y} as a function on ℝ³.
pub fn plane_wave(xi: [f64; 3]) -> impl Fn([f64; 3]) -> Complex64 {
    move |y| Complex64::new(0.0, xi[0] * y[0] + xi[1] * y[1] + xi[2] * y[2]).exp()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mode_values() {
        assert_eq!(mode_wave(3.0, 0.0), 1.0);
        assert_eq!(mode_wave(0.0, 7.0), 1.0);
        assert!((mode_wave(std::f64::consts::PI, 1.0) + 1.0).abs() < 1e-15);
        assert_eq!(mode_wave_integral(0.0, 1.5), 1.5);
        assert!((mode_wave_integral(2.0, 0.7) - (1.4f64).sin() / 2.0).abs() < 1e-16);
        assert!((mode_wave_integral(1e-6, 0.7) - 0.7).abs() < 1e-12);
    }

    #[test]
    fn dalembert_values() {
        assert_eq!(dalembert_1d(|x: f64| x.sin(), 0.4, 0.0), 0.4f64.sin());
        assert_eq!(dalembert_1d(|_x: f64| 2.5, 0.4, 3.0), 2.5);
        assert_eq!(dalembert_1d(|x: f64| x * x, 1.0, 2.0), 5.0);
    }

    #[test]
    fn lebedev_weights_and_moments() {
        let n = lebedev26();
        assert_eq!(n.len(), 26);
        let w: f64 = n.iter().map(|p| p.1).sum();
        assert!((w - 1.0).abs() < 1e-15);
        // mean of z² is 1/3, of x²y²z² is 1/105
        let z2: f64 = n.iter().map(|(v, w)| w * v[2] * v[2]).sum();
        assert!((z2 - 1.0 / 3.0).abs() < 1e-15);
        let x4: f64 = n.iter().map(|(v, w)| w * v[0].powi(4)).sum();
        assert!((x4 - 0.2).abs() < 1e-15);
    }

    #[test]
    fn kirchhoff_constant_and_quadratic() {
        let spec = SphereSpec::default();
        let v = kirchhoff_3d(|_y| 2.0, [0.1, 0.2, 0.3], 1.2, &spec).unwrap();
        assert!((v - 2.0).abs() < 1e-12);
        // v = |x|² + 3s²
        let x = [0.5, -1.0, 0.25];
        for s in [0.0, 0.4, 1.7] {
            let v = kirchhoff_3d(|y: [f64; 3]| y[0] * y[0] + y[1] * y[1] + y[2] * y[2], x, s, &spec)
                .unwrap();
            let exact = x.iter().map(|a| a * a).sum::<f64>() + 3.0 * s * s;
            assert!((v - exact).abs() < 1e-10, "s={s}: {v} vs {exact}");
        }
    }
}
