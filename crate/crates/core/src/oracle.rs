//! Ground truth for the transform solvers: the mode-reduced Klein-Gordon and
//! Dirac equations integrated directly with an embedded Runge–Kutta pair, and
//! finite-difference residuals of the Dirac mode equation.
//!
//! Nothing here touches the kernels or special functions.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::clifford::{gammas, Matrix4C, Spinor};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OdeSpec {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_steps: usize,
    /// Order of the propagating solution (the Dormand–Prince pair is fifth
    /// order).
    pub order: usize,
}

impl Default for OdeSpec {
    fn default() -> Self {
        Self { rel_tol: 1e-12, abs_tol: 1e-14, max_steps: 200_000, order: 5 }
    }
}

impl OdeSpec {
    pub fn validate(&self) -> Result<()> {
        if self.rel_tol > 0.0 && self.abs_tol > 0.0 && self.order >= 4 && self.max_steps > 0 {
            Ok(())
        } else {
            Err(Error::InvalidParameter("ODE tolerances must be positive, order >= 4".into()))
        }
    }
}

// Dormand–Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// One Dormand–Prince step; returns the fifth-order update and the embedded
/// error vector.
fn dp_step(
    rhs: &mut impl FnMut(f64, &[f64], &mut [f64]),
    t: f64,
    y: &[f64],
    h: f64,
) -> (Vec<f64>, Vec<f64>) {
    let n = y.len();
    let mut k = vec![vec![0.0; n]; 7];
    let mut tmp = vec![0.0; n];
    for s in 0..7 {
        for i in 0..n {
            let mut acc = y[i];
            for (j, kj) in k.iter().enumerate().take(s) {
                acc += h * A[s][j] * kj[i];
            }
            tmp[i] = acc;
        }
        rhs(t + C[s] * h, &tmp, &mut k[s]);
    }
    let mut y5 = vec![0.0; n];
    let mut err = vec![0.0; n];
    for i in 0..n {
        let mut s5 = 0.0;
        let mut s4 = 0.0;
        for s in 0..7 {
            s5 += B5[s] * k[s][i];
            s4 += B4[s] * k[s][i];
        }
        y5[i] = y[i] + h * s5;
        err[i] = h * (s5 - s4);
    }
    (y5, err)
}

/// Adaptive integration of y′ = rhs(t, y) from t0 to t1 (either direction).
pub fn integrate_adaptive(
    mut rhs: impl FnMut(f64, &[f64], &mut [f64]),
    y0: &[f64],
    t0: f64,
    t1: f64,
    spec: &OdeSpec,
) -> Result<Vec<f64>> {
    spec.validate()?;
    let mut y = y0.to_vec();
    if t1 == t0 {
        return Ok(y);
    }
    let dir = (t1 - t0).signum();
    let span = (t1 - t0).abs();
    let mut t = t0;
    let mut h = dir * span.min(0.01);
    let mut steps = 0;
    while (t1 - t) * dir > 0.0 {
        if steps >= spec.max_steps {
            return Err(Error::StepBudgetExceeded { steps, t });
        }
        steps += 1;
        if (t + h - t1) * dir > 0.0 {
            h = t1 - t;
        }
        let (y5, err) = dp_step(&mut rhs, t, &y, h);
        let mut e = 0.0f64;
        for i in 0..y.len() {
            let sc = spec.abs_tol + spec.rel_tol * y[i].abs().max(y5[i].abs());
            e = e.max((err[i] / sc).abs());
        }
        if e <= 1.0 {
            t += h;
            y = y5;
        }
        let factor = if e == 0.0 { 5.0 } else { (0.9 * e.powf(-0.2)).clamp(0.2, 5.0) };
        h *= factor;
        if h.abs() < 1e-14 * span {
            return Err(Error::StepBudgetExceeded { steps, t });
        }
    }
    Ok(y)
}

/// Fixed-step Dormand–Prince, for order verification.
pub fn integrate_fixed(
    mut rhs: impl FnMut(f64, &[f64], &mut [f64]),
    y0: &[f64],
    t0: f64,
    t1: f64,
    steps: usize,
) -> Vec<f64> {
    let h = (t1 - t0) / steps as f64;
    let mut y = y0.to_vec();
    for i in 0..steps {
        y = dp_step(&mut rhs, t0 + i as f64 * h, &y, h).0;
    }
    y
}

/// Scalar right-hand side of u″ + e^{−2Hs}|ξ|²u − M²u = f(s), as a real
/// system in (Re u, Im u, Re u′, Im u′).
fn kg_rhs<'a>(
    h: f64,
    m: Complex64,
    xi_norm: f64,
    source: &'a dyn Fn(f64) -> Complex64,
) -> impl FnMut(f64, &[f64], &mut [f64]) + 'a {
    let m2 = m * m;
    let k2 = xi_norm * xi_norm;
    move |s, y, dy| {
        let u = Complex64::new(y[0], y[1]);
        let acc = source(s) - (-2.0 * h * s).exp() * k2 * u + m2 * u;
        dy[0] = y[2];
        dy[1] = y[3];
        dy[2] = acc.re;
        dy[3] = acc.im;
    }
}

/// u(t) for the mode KG equation with u(0) = u0, u′(0) = u1.
#[allow(clippy::too_many_arguments)]
pub fn kg_mode_oracle(
    h: f64,
    m: Complex64,
    xi_norm: f64,
    u0: Complex64,
    u1: Complex64,
    source: &dyn Fn(f64) -> Complex64,
    t: f64,
    spec: &OdeSpec,
) -> Result<Complex64> {
    kg_mode_oracle_from(h, m, xi_norm, 0.0, u0, u1, source, t, spec).map(|(u, _)| u)
}

/// (u(t), u′(t)) with data prescribed at `t_start`.
#[allow(clippy::too_many_arguments)]
pub fn kg_mode_oracle_from(
    h: f64,
    m: Complex64,
    xi_norm: f64,
    t_start: f64,
    u0: Complex64,
    u1: Complex64,
    source: &dyn Fn(f64) -> Complex64,
    t: f64,
    spec: &OdeSpec,
) -> Result<(Complex64, Complex64)> {
    let y = integrate_adaptive(
        kg_rhs(h, m, xi_norm, source),
        &[u0.re, u0.im, u1.re, u1.im],
        t_start,
        t,
        spec,
    )?;
    Ok((Complex64::new(y[0], y[1]), Complex64::new(y[2], y[3])))
}

/// Σ γᵏ (iξₖ).
pub fn spatial_symbol(g: &[Matrix4C; 4], xi: [f64; 3]) -> Matrix4C {
    let i = Complex64::i();
    (1..4).fold(Matrix4C::zero(), |acc, k| acc + g[k].scale(i * xi[k - 1]))
}

/// Ψ′ solved from iγ⁰Ψ′ + ie^{−Hs}γᵏ(iξₖ)Ψ + i(3H/2)γ⁰Ψ − mΨ = F(s), using
/// (iγ⁰)⁻¹ = −iγ⁰.
fn dirac_derivative(
    g: &[Matrix4C; 4],
    sym: &Matrix4C,
    h: f64,
    m: Complex64,
    s: f64,
    psi: &Spinor,
    f: &Spinor,
) -> Spinor {
    let i = Complex64::i();
    let rest = *f - sym.apply(psi) * (i * (-h * s).exp()) - g[0].apply(psi) * (i * 1.5 * h) + *psi * m;
    g[0].apply(&rest) * (-i)
}

fn spinor_to_real(p: &Spinor) -> [f64; 8] {
    std::array::from_fn(|j| if j < 4 { p.0[j].re } else { p.0[j - 4].im })
}

fn real_to_spinor(y: &[f64]) -> Spinor {
    Spinor(std::array::from_fn(|j| Complex64::new(y[j], y[j + 4])))
}

/// Ψ(t) for the mode Dirac equation with Ψ(0) = Ψ0.
#[allow(clippy::too_many_arguments)]
pub fn dirac_mode_oracle(
    h: f64,
    m: Complex64,
    xi: [f64; 3],
    psi0: Spinor,
    source: &dyn Fn(f64) -> Spinor,
    t: f64,
    spec: &OdeSpec,
) -> Result<Spinor> {
    dirac_mode_oracle_from(h, m, xi, 0.0, psi0, source, t, spec)
}

/// Ψ(t) with Ψ(t_start) = Ψ0.
#[allow(clippy::too_many_arguments)]
pub fn dirac_mode_oracle_from(
    h: f64,
    m: Complex64,
    xi: [f64; 3],
    t_start: f64,
    psi0: Spinor,
    source: &dyn Fn(f64) -> Spinor,
    t: f64,
    spec: &OdeSpec,
) -> Result<Spinor> {
    let g = gammas();
    let sym = spatial_symbol(&g, xi);
    let rhs = |s: f64, y: &[f64], dy: &mut [f64]| {
        let d = dirac_derivative(&g, &sym, h, m, s, &real_to_spinor(y), &source(s));
        dy.copy_from_slice(&spinor_to_real(&d));
    };
    let y = integrate_adaptive(rhs, &spinor_to_real(&psi0), t_start, t, spec)?;
    Ok(real_to_spinor(&y))
}

/// Ψ at every time of `ts` (ascending, starting at or after 0).
#[allow(clippy::too_many_arguments)]
pub fn dirac_mode_oracle_grid(
    h: f64,
    m: Complex64,
    xi: [f64; 3],
    psi0: Spinor,
    source: &dyn Fn(f64) -> Spinor,
    ts: &[f64],
    spec: &OdeSpec,
) -> Result<Vec<Spinor>> {
    let mut out = Vec::with_capacity(ts.len());
    let (mut t_prev, mut psi) = (0.0, psi0);
    for &t in ts {
        psi = dirac_mode_oracle_from(h, m, xi, t_prev, psi, source, t, spec)?;
        out.push(psi);
        t_prev = t;
    }
    Ok(out)
}

/// exp(A) by scaling and squaring with a Taylor core.
pub fn expm(a: &Matrix4C) -> Matrix4C {
    let norm = a.max_abs() * 4.0;
    let squarings = if norm > 0.5 { (norm / 0.5).log2().ceil() as u32 } else { 0 };
    let b = a.scale(Complex64::from(0.5f64.powi(squarings as i32)));
    let mut term = Matrix4C::identity();
    let mut sum = Matrix4C::identity();
    for k in 1..=20 {
        term = (term * b).scale(Complex64::from(1.0 / k as f64));
        sum = sum + term;
    }
    for _ in 0..squarings {
        sum = sum * sum;
    }
    sum
}

/// Generator of the H = 0, F = 0 mode Dirac equation: Ψ′ = GΨ.
pub fn minkowski_dirac_generator(m: Complex64, xi: [f64; 3]) -> Matrix4C {
    let g = gammas();
    let sym = spatial_symbol(&g, xi);
    let i = Complex64::i();
    let inner = sym.scale(-i) + Matrix4C::identity().scale(m);
    (g[0] * inner).scale(-i)
}

/// max over interior samples of |iγ⁰Ψ′ + ie^{−Ht}γᵏ(iξₖ)Ψ + i(3H/2)γ⁰Ψ − mΨ − F|
/// with Ψ′ from fourth-order central differences on a uniform grid starting
/// at `t_first` with spacing `dt`.
#[allow(clippy::too_many_arguments)]
pub fn residual_dirac_mode(
    samples: &[Spinor],
    t_first: f64,
    dt: f64,
    h: f64,
    m: Complex64,
    xi: [f64; 3],
    source: &dyn Fn(f64) -> Spinor,
) -> Result<f64> {
    if samples.len() < 5 {
        return Err(Error::GridTooCoarse { needed: 5, got: samples.len() });
    }
    let g = gammas();
    let sym = spatial_symbol(&g, xi);
    let i = Complex64::i();
    let mut worst = 0.0f64;
    for n in 2..samples.len() - 2 {
        let t = t_first + n as f64 * dt;
        let d = (samples[n - 2] - samples[n + 2] + (samples[n + 1] - samples[n - 1]) * 8.0)
            * (1.0 / (12.0 * dt));
        let p = samples[n];
        let lhs = g[0].apply(&d) * i + sym.apply(&p) * (i * (-h * t).exp()) + g[0].apply(&p) * (i * 1.5 * h)
            - p * m;
        worst = worst.max((lhs - source(t)).max_abs());
    }
    Ok(worst)
}
