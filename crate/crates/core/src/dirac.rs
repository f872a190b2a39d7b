//! Dirac Cauchy problem per Fourier mode in de Sitter spacetime,
//!
//!   iγ⁰Ψ′ + ie^{−Ht}γᵏ(iξₖ)Ψ + i(3H/2)γ⁰Ψ − mΨ = F,  Ψ(0) = Φ,
//!
//! assembled from Klein-Gordon transforms of the two diagonal blocks
//! (masses M₊ = H/2 + im on components 0, 1 and M₋ = H/2 − im on 2, 3) and an
//! outer first-order operator. Also the massless fast path, the flat (H = 0)
//! solver and the one-dimensional fundamental-solution actions.

use std::cell::Cell;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::clifford::{gammas, Matrix4C, Spinor};
use crate::error::{Error, Result};
use crate::kernels::{kernel_mink_i0, kernel_mink_i0_dt, phi, phi_dot, split_masses, KernelParams};
use crate::kg::{kg_fundsol_action_1d, kg_fundsol_action_1d_with_dt, source_response_counted, Propagator};
use crate::quadrature::{integrate, CVec, QuadratureSpec};
use crate::wave::{mode_wave, mode_wave_integral};

pub type SpinorSource = Arc<dyn Fn(f64) -> Spinor + Send + Sync>;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
/// Diagonal of γ⁰.
const G0_DIAG: [f64; 4] = [1.0, 1.0, -1.0, -1.0];

#[derive(Clone)]
pub struct DiracModeProblem {
    pub h: f64,
    pub m: Complex64,
    pub xi: [f64; 3],
    pub phi: Spinor,
    pub source: Option<SpinorSource>,
    /// Components of the source that may be nonzero; the others are skipped.
    pub source_components: [bool; 4],
    pub horizon: f64,
}

impl fmt::Debug for DiracModeProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DiracModeProblem")
            .field("h", &self.h)
            .field("m", &self.m)
            .field("xi", &self.xi)
            .field("phi", &self.phi)
            .field("source", &self.source.as_ref().map(|_| "<fn>"))
            .field("source_components", &self.source_components)
            .field("horizon", &self.horizon)
            .finish()
    }
}

impl DiracModeProblem {
    pub fn new(h: f64, m: Complex64, xi: [f64; 3], phi: Spinor) -> Self {
        Self {
            h,
            m,
            xi,
            phi,
            source: None,
            source_components: [false; 4],
            horizon: f64::INFINITY,
        }
    }

    pub fn with_source(mut self, f: impl Fn(f64) -> Spinor + Send + Sync + 'static) -> Self {
        self.source = Some(Arc::new(f));
        self.source_components = [true; 4];
        self
    }

    /// Declare which source components can be nonzero.
    pub fn with_source_components(mut self, active: [bool; 4]) -> Self {
        self.source_components = active;
        self
    }

    pub fn with_horizon(mut self, horizon: f64) -> Self {
        self.horizon = horizon;
        self
    }

    pub fn xi_norm(&self) -> f64 {
        self.xi.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// Source value, or zero without a source.
    pub fn source_at(&self, t: f64) -> Spinor {
        self.source.as_ref().map_or(Spinor::ZERO, |f| f(t))
    }

    fn check_time(&self, t: f64) -> Result<()> {
        if !(0.0..=self.horizon).contains(&t) {
            return Err(Error::Precondition(format!("t = {t} outside [0, {}]", self.horizon)));
        }
        Ok(())
    }

    fn block_needs(&self, block: usize) -> (bool, bool) {
        let comps = [2 * block, 2 * block + 1];
        let data = comps.iter().any(|&j| self.phi[j] != ZERO);
        let src = self.source.is_some() && comps.iter().any(|&j| self.source_components[j]);
        (data, src)
    }
}

/// Kernel evaluations spent on each diagonal block during one solve.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct KernelCounters {
    pub plus: usize,
    pub minus: usize,
}

/// The intermediate KG field X (called Y here) and its time derivative.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BlockField {
    pub y: Spinor,
    pub dy: Spinor,
}

/// −e^{−Ht}(iγ⁰Y′ + ie^{−Ht}γᵏ(iξₖ)Y − i(H/2)γ⁰Y + mY).
fn outer_operator(g: &[Matrix4C; 4], h: f64, m: Complex64, xi: [f64; 3], t: f64, f: &BlockField) -> Spinor {
    let i = Complex64::i();
    let sym = crate::oracle::spatial_symbol(g, xi);
    let damp = (-h * t).exp();
    let inner = g[0].apply(&f.dy) * i + sym.apply(&f.y) * (i * damp) - g[0].apply(&f.y) * (i * h / 2.0)
        + f.y * m;
    inner * (-damp)
}

/// Y and Y′ for the de Sitter transform, with per-block kernel counts.
pub fn dirac_block_field(
    p: &DiracModeProblem,
    t: f64,
    q: &QuadratureSpec,
) -> Result<(BlockField, KernelCounters)> {
    let h = p.h;
    let k = p.xi_norm();
    let (mp, mm) = split_masses(h, p.m);
    let mut y = Spinor::ZERO;
    let mut dy = Spinor::ZERO;
    let counts = [Cell::new(0), Cell::new(0)];
    for (block, mass) in [mp, mm].into_iter().enumerate() {
        let (need_data, need_src) = p.block_needs(block);
        let comps = [2 * block, 2 * block + 1];
        let counter = &counts[block];
        if need_data && t > 0.0 {
            let (r, dr) = source_response_counted(h, mass, k, 0.0, t, q, counter)?;
            for j in comps {
                let c = Complex64::i() * G0_DIAG[j] * p.phi[j];
                y[j] += c * r;
                dy[j] += c * dr;
            }
        }
        if need_src && t > 0.0 {
            let f = p.source.as_ref().expect("checked by block_needs");
            let v = integrate(
                |b| {
                    let fb = f(b);
                    let w = (h * b).exp();
                    let (r, dr) = source_response_counted(h, mass, k, b, t, q, counter)?;
                    let (f0, f1) = (fb[comps[0]] * w, fb[comps[1]] * w);
                    Ok(CVec([f0 * r, f1 * r, f0 * dr, f1 * dr]))
                },
                0.0,
                t,
                q,
            )?;
            y[comps[0]] += v.0[0];
            y[comps[1]] += v.0[1];
            dy[comps[0]] += v.0[2];
            dy[comps[1]] += v.0[3];
        }
    }
    let counters = KernelCounters { plus: counts[0].get(), minus: counts[1].get() };
    Ok((BlockField { y, dy }, counters))
}

/// Ψ(t) with the kernel-evaluation counts of the two blocks.
pub fn dirac_solve_mode_counted(
    p: &DiracModeProblem,
    t: f64,
    q: &QuadratureSpec,
) -> Result<(Spinor, KernelCounters)> {
    q.validate()?;
    p.check_time(t)?;
    if p.h <= 0.0 {
        return Err(Error::Precondition("de Sitter path needs H > 0; use the flat solver".into()));
    }
    if t == 0.0 {
        return Ok((p.phi, KernelCounters::default()));
    }
    let (field, counters) = dirac_block_field(p, t, q)?;
    Ok((outer_operator(&gammas(), p.h, p.m, p.xi, t, &field), counters))
}

/// Ψ(t) for the de Sitter mode problem.
pub fn dirac_solve_mode(p: &DiracModeProblem, t: f64, q: &QuadratureSpec) -> Result<Spinor> {
    dirac_solve_mode_counted(p, t, q).map(|(v, _)| v)
}

/// Closed-form inner integrals for m = 0, where both block kernels reduce to
/// (1/2)e^{H(t+b)/2}.
pub fn dirac_solve_mode_massless(p: &DiracModeProblem, t: f64, q: &QuadratureSpec) -> Result<Spinor> {
    q.validate()?;
    p.check_time(t)?;
    if p.m != ZERO {
        return Err(Error::Precondition("massless path needs m = 0".into()));
    }
    if p.h <= 0.0 {
        return Err(Error::Precondition("de Sitter path needs H > 0".into()));
    }
    if t == 0.0 {
        return Ok(p.phi);
    }
    let (h, k) = (p.h, p.xi_norm());
    let g = gammas();
    let i = Complex64::i();
    let grow = (h * t / 2.0).exp();
    let pt = phi(h, t);
    let dphi = phi_dot(h, t);
    let ig0phi = g[0].apply(&p.phi) * i;
    let mut core = ig0phi * mode_wave_integral(k, pt);
    let mut dcore = ig0phi * (dphi * mode_wave(k, pt));
    if let Some(f) = &p.source {
        let v = integrate(
            |b| {
                let len = pt - phi(h, b);
                let w = (1.5 * h * b).exp();
                let fb = f(b) * w;
                let a = fb * mode_wave_integral(k, len);
                let da = fb * (dphi * mode_wave(k, len));
                Ok(CVec([a[0], a[1], a[2], a[3], da[0], da[1], da[2], da[3]]))
            },
            0.0,
            t,
            q,
        )?;
        core += Spinor(std::array::from_fn(|j| v.0[j]));
        dcore += Spinor(std::array::from_fn(|j| v.0[j + 4]));
    }
    let y = core * grow;
    let dy = y * (h / 2.0) + dcore * grow;
    Ok(outer_operator(&g, h, ZERO, p.xi, t, &BlockField { y, dy }))
}

/// Ψ(t) for H = 0 via the Bessel kernels with block masses ±im.
pub fn dirac_solve_mode_minkowski(p: &DiracModeProblem, t: f64, q: &QuadratureSpec) -> Result<Spinor> {
    q.validate()?;
    p.check_time(t)?;
    if p.h != 0.0 {
        return Err(Error::Precondition("flat solver needs H = 0".into()));
    }
    if t == 0.0 {
        return Ok(p.phi);
    }
    let k = p.xi_norm();
    let i = Complex64::i();
    let masses = [i * p.m, -i * p.m];
    let mut y = Spinor::ZERO;
    let mut dy = Spinor::ZERO;
    // (∫₀^{s} I₀ cos, d/ds of the same with the kernel's own time shift)
    let response = |mass: Complex64, b: f64| -> Result<(Complex64, Complex64)> {
        let s = t - b;
        let v = integrate(
            |r| {
                let w = mode_wave(k, r);
                Ok(CVec([kernel_mink_i0(mass, t, b, r)? * w, kernel_mink_i0_dt(mass, t, b, r)? * w]))
            },
            0.0,
            s,
            q,
        )?;
        // I₀ is 1 on the cone edge
        Ok((v.0[0], v.0[1] + mode_wave(k, s)))
    };
    for (block, mass) in masses.into_iter().enumerate() {
        let (need_data, need_src) = p.block_needs(block);
        let comps = [2 * block, 2 * block + 1];
        if need_data {
            let (r, dr) = response(mass, 0.0)?;
            for j in comps {
                let c = i * G0_DIAG[j] * p.phi[j];
                y[j] += c * r;
                dy[j] += c * dr;
            }
        }
        if need_src {
            let f = p.source.as_ref().expect("checked by block_needs");
            let v = integrate(
                |b| {
                    let fb = f(b);
                    let (r, dr) = response(mass, b)?;
                    let (f0, f1) = (fb[comps[0]], fb[comps[1]]);
                    Ok(CVec([f0 * r, f1 * r, f0 * dr, f1 * dr]))
                },
                0.0,
                t,
                q,
            )?;
            y[comps[0]] += v.0[0];
            y[comps[1]] += v.0[1];
            dy[comps[0]] += v.0[2];
            dy[comps[1]] += v.0[3];
        }
    }
    let g = gammas();
    let sym = crate::oracle::spatial_symbol(&g, p.xi);
    let inner = g[0].apply(&dy) * i + sym.apply(&y) * i + y * p.m;
    Ok(-inner)
}

/// Spinor-valued test function on the line with a closed-form derivative.
pub trait SpinorTestFn {
    fn value(&self, x: f64) -> Spinor;
    fn derivative(&self, x: f64) -> Spinor;
}

/// amplitude · exp(−(x−c)²/(2w²) + ikx).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussianPacket {
    pub amplitude: Spinor,
    pub center: f64,
    pub width: f64,
    pub wavenumber: f64,
}

impl GaussianPacket {
    fn envelope(&self, x: f64) -> Complex64 {
        let u = (x - self.center) / self.width;
        Complex64::new(-0.5 * u * u, self.wavenumber * x).exp()
    }
}

impl SpinorTestFn for GaussianPacket {
    fn value(&self, x: f64) -> Spinor {
        self.amplitude * self.envelope(x)
    }
    fn derivative(&self, x: f64) -> Spinor {
        let d = Complex64::new(-(x - self.center) / (self.width * self.width), self.wavenumber);
        self.amplitude * (self.envelope(x) * d)
    }
}

/// amplitude · exp(−1/(1 − u²)) for |u| < 1, u = (x − c)/w; zero elsewhere.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bump {
    pub amplitude: Spinor,
    pub center: f64,
    pub half_width: f64,
}

impl Bump {
    pub fn support(&self) -> (f64, f64) {
        (self.center - self.half_width, self.center + self.half_width)
    }
}

impl SpinorTestFn for Bump {
    fn value(&self, x: f64) -> Spinor {
        let u = (x - self.center) / self.half_width;
        if u.abs() >= 1.0 {
            return Spinor::ZERO;
        }
        self.amplitude * (-1.0 / (1.0 - u * u)).exp()
    }
    fn derivative(&self, x: f64) -> Spinor {
        let u = (x - self.center) / self.half_width;
        if u.abs() >= 1.0 {
            return Spinor::ZERO;
        }
        let s = 1.0 - u * u;
        self.amplitude * ((-1.0 / s).exp() * (-2.0 * u / (s * s)) / self.half_width)
    }
}

/// amplitude · e^{ikx}; not compactly supported but the n = 1 actions only
/// sample it on a bounded interval.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlaneWave1d {
    pub amplitude: Spinor,
    pub wavenumber: f64,
}

impl SpinorTestFn for PlaneWave1d {
    fn value(&self, x: f64) -> Spinor {
        self.amplitude * Complex64::new(0.0, self.wavenumber * x).exp()
    }
    fn derivative(&self, x: f64) -> Spinor {
        self.value(x) * Complex64::new(0.0, self.wavenumber)
    }
}

/// ⟨𝓔(·, t; x0, t0; m), ψ⟩ for the retarded or advanced Dirac fundamental
/// solution in one space dimension (only γ¹ among the spatial matrices).
#[allow(clippy::too_many_arguments)]
pub fn dirac_fundsol_action_1d(
    h: f64,
    m: Complex64,
    kind: Propagator,
    t: f64,
    t0: f64,
    x0: f64,
    testfn: &dyn SpinorTestFn,
    q: &QuadratureSpec,
) -> Result<Spinor> {
    if t == t0 {
        return Err(Error::DegenerateInterval { t });
    }
    if !kind.active(t, t0) {
        return Ok(Spinor::ZERO);
    }
    let (mp, mm) = split_masses(h, m);
    let weight = (h * t0).exp();
    let mut a = Spinor::ZERO;
    let mut da = Spinor::ZERO;
    let mut b = Spinor::ZERO;
    for j in 0..4 {
        let mass = if j < 2 { mp } else { mm };
        let kp = KernelParams::new(h, mass, t0);
        let val = |x: f64| testfn.value(x)[j];
        let der = |x: f64| testfn.derivative(x)[j];
        let (v, dv) = kg_fundsol_action_1d_with_dt(&kp, kind, t, &val, x0, q)?;
        a[j] = v * weight;
        da[j] = dv * weight;
        b[j] = kg_fundsol_action_1d(&kp, kind, t, &der, x0, q)? * weight;
    }
    let g = gammas();
    let i = Complex64::i();
    let damp = (-h * t).exp();
    // ∂₁ moves onto the test function as −d/dx
    let inner = g[0].apply(&da) * i - g[1].apply(&b) * (i * damp) - g[0].apply(&a) * (i * h / 2.0) + a * m;
    Ok(inner * (-damp))
}
