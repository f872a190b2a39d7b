//! Klein-Gordon Cauchy problem u″ + e^{−2Ht}|ξ|²u − M²u = f per Fourier mode,
//! solved through the hypergeometric integral transform, and its flat
//! (H = 0) Bessel-kernel counterpart.

use std::cell::Cell;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::kernels::{
    kernel_e, kernel_e_with_dt, kernel_k0, kernel_k1, kernel_mink_i0, kernel_mink_k0, phi, phi_dot,
    KernelParams,
};
use crate::quadrature::{integrate, integrate_to_edge, CVec, QuadratureSpec};
use crate::wave::{mode_wave, FourierMode};

/// Time profile of a scalar source amplitude.
pub type ScalarSource = Arc<dyn Fn(f64) -> Complex64 + Send + Sync>;

#[derive(Clone)]
pub struct KGProblem {
    pub h: f64,
    pub m: Complex64,
    pub mode: FourierMode,
    pub phi0: Complex64,
    pub phi1: Complex64,
    pub source: Option<ScalarSource>,
    pub horizon: f64,
}

impl fmt::Debug for KGProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("KGProblem")
            .field("h", &self.h)
            .field("m", &self.m)
            .field("mode", &self.mode)
            .field("phi0", &self.phi0)
            .field("phi1", &self.phi1)
            .field("source", &self.source.as_ref().map(|_| "<fn>"))
            .field("horizon", &self.horizon)
            .finish()
    }
}

impl KGProblem {
    pub fn new(h: f64, m: Complex64, xi: Vec<f64>) -> Self {
        Self {
            h,
            m,
            mode: FourierMode::new(xi),
            phi0: Complex64::new(0.0, 0.0),
            phi1: Complex64::new(0.0, 0.0),
            source: None,
            horizon: f64::INFINITY,
        }
    }

    pub fn with_data(mut self, phi0: Complex64, phi1: Complex64) -> Self {
        self.phi0 = phi0;
        self.phi1 = phi1;
        self
    }

    pub fn with_source(mut self, f: impl Fn(f64) -> Complex64 + Send + Sync + 'static) -> Self {
        self.source = Some(Arc::new(f));
        self
    }

    pub fn with_horizon(mut self, horizon: f64) -> Self {
        self.horizon = horizon;
        self
    }

    fn check_time(&self, t: f64) -> Result<()> {
        if !(0.0..=self.horizon).contains(&t) {
            return Err(Error::Precondition(format!("t = {t} outside [0, {}]", self.horizon)));
        }
        Ok(())
    }
}

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// 2∫₀^{φ(t)−φ(b)} E(r, t; 0, b; M) cos(r|ξ|) dr.
pub fn source_response(
    h: f64,
    m: Complex64,
    xi_norm: f64,
    b: f64,
    t: f64,
    q: &QuadratureSpec,
) -> Result<Complex64> {
    let p = KernelParams::new(h, m, b);
    let len = phi(h, t) - phi(h, b);
    let v = integrate_to_edge(|r| Ok(kernel_e(&p, r, t)? * mode_wave(xi_norm, r)), len, q)?;
    Ok(v * 2.0)
}

/// Source response together with its t-derivative, including the moving
/// edge term φ′(t)·E(edge)·cos(|ξ|·edge).
pub fn source_response_with_dt(
    h: f64,
    m: Complex64,
    xi_norm: f64,
    b: f64,
    t: f64,
    q: &QuadratureSpec,
) -> Result<(Complex64, Complex64)> {
    source_response_counted(h, m, xi_norm, b, t, q, &Cell::new(0))
}

/// As [`source_response_with_dt`], adding the number of kernel evaluations
/// to `counter`.
pub(crate) fn source_response_counted(
    h: f64,
    m: Complex64,
    xi_norm: f64,
    b: f64,
    t: f64,
    q: &QuadratureSpec,
    counter: &Cell<usize>,
) -> Result<(Complex64, Complex64)> {
    let p = KernelParams::new(h, m, b);
    let len = phi(h, t) - phi(h, b);
    if len <= 0.0 {
        return Ok((ZERO, ZERO));
    }
    let v = integrate_to_edge(
        |r| {
            counter.set(counter.get() + 1);
            let (e, de) = kernel_e_with_dt(&p, r, t)?;
            let w = mode_wave(xi_norm, r);
            Ok(CVec([e * w, de * w]))
        },
        len,
        q,
    )?;
    // E equals e^{H(t+b)/2}/2 on the edge
    let edge = phi_dot(h, t) * (h * (t + b) / 2.0).exp() / 2.0 * mode_wave(xi_norm, len);
    Ok((v.0[0] * 2.0, (v.0[1] + edge) * 2.0))
}

/// 2∫₀ᵗ f(b)·[source response at b] db.
fn source_term(
    h: f64,
    m: Complex64,
    xi_norm: f64,
    f: &ScalarSource,
    t: f64,
    q: &QuadratureSpec,
) -> Result<Complex64> {
    integrate(|b| Ok(f(b) * source_response(h, m, xi_norm, b, t, q)?), 0.0, t, q)
}

/// u(t) for the mode problem via the de Sitter transform.
pub fn kg_solve_mode(p: &KGProblem, t: f64, q: &QuadratureSpec) -> Result<Complex64> {
    q.validate()?;
    p.check_time(t)?;
    if p.h <= 0.0 {
        return Err(Error::Precondition("de Sitter path needs H > 0; use the flat solver".into()));
    }
    let (h, k) = (p.h, p.mode.norm());
    let kp = KernelParams::new(h, p.m, 0.0);
    let len = phi(h, t);
    let mut u = p.phi0 * (h * t / 2.0).exp() * mode_wave(k, len);
    if len > 0.0 {
        if p.phi0 != ZERO {
            let i = integrate_to_edge(|s| Ok(kernel_k0(&kp, s, t)? * mode_wave(k, s)), len, q)?;
            u += p.phi0 * i * 2.0;
        }
        if p.phi1 != ZERO {
            let i = integrate_to_edge(|s| Ok(kernel_k1(&kp, s, t)? * mode_wave(k, s)), len, q)?;
            u += p.phi1 * i * 2.0;
        }
        if let Some(f) = &p.source {
            u += source_term(h, p.m, k, f, t, q)?;
        }
    }
    Ok(u)
}

/// u(t) for the H = 0 problem u″ + |ξ|²u − M²u = f via the I₀ / J₁ kernels.
pub fn kg_solve_mode_minkowski(p: &KGProblem, t: f64, q: &QuadratureSpec) -> Result<Complex64> {
    q.validate()?;
    p.check_time(t)?;
    let (m, k) = (p.m, p.mode.norm());
    let mut u = p.phi0 * mode_wave(k, t);
    if t > 0.0 {
        if p.phi0 != ZERO {
            let i = integrate(|r| Ok(kernel_mink_k0(m, t, r)? * mode_wave(k, r)), 0.0, t, q)?;
            u -= p.phi0 * i;
        }
        if p.phi1 != ZERO {
            let i = integrate(|r| Ok(kernel_mink_i0(m, t, 0.0, r)? * mode_wave(k, r)), 0.0, t, q)?;
            u += p.phi1 * i;
        }
        if let Some(f) = &p.source {
            let inner = |b: f64| {
                integrate(|r| Ok(kernel_mink_i0(m, t, b, r)? * mode_wave(k, r)), 0.0, t - b, q)
            };
            u += integrate(|b| Ok(f(b) * inner(b)?), 0.0, t, q)?;
        }
    }
    Ok(u)
}

/// Four decoupled components with masses (M₊, M₊, M₋, M₋).
pub fn kg_solve_diagonal(problems: &[KGProblem; 4], t: f64, q: &QuadratureSpec) -> Result<[Complex64; 4]> {
    let h = problems[0].h;
    if problems.iter().any(|p| p.h != h || p.mode != problems[0].mode) {
        return Err(Error::Precondition("diagonal components must share H and the mode".into()));
    }
    let mut out = [ZERO; 4];
    for (o, p) in out.iter_mut().zip(problems) {
        let idle = p.phi0 == ZERO && p.phi1 == ZERO && p.source.is_none();
        *o = if idle { ZERO } else { kg_solve_mode(p, t, q)? };
    }
    Ok(out)
}

/// Retarded or advanced fundamental solution.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Propagator {
    Retarded,
    Advanced,
}

impl Propagator {
    /// Whether (t, t0) lies on this propagator's side of the source time.
    pub fn active(self, t: f64, t0: f64) -> bool {
        match self {
            Propagator::Retarded => t > t0,
            Propagator::Advanced => t < t0,
        }
    }
}

/// ⟨E_KG(·, t; x0, t0; M), ψ⟩ in one space dimension, t0 = `p.t0`:
/// ∫₀^{|φ(t)−φ(t0)|} E(r, t; 0, t0; M)(ψ(x0+r) + ψ(x0−r)) dr.
pub fn kg_fundsol_action_1d(
    p: &KernelParams,
    kind: Propagator,
    t: f64,
    testfn: &dyn Fn(f64) -> Complex64,
    x0: f64,
    q: &QuadratureSpec,
) -> Result<Complex64> {
    kg_fundsol_action_1d_with_dt(p, kind, t, testfn, x0, q).map(|(v, _)| v)
}

/// The action and its t-derivative.
pub fn kg_fundsol_action_1d_with_dt(
    p: &KernelParams,
    kind: Propagator,
    t: f64,
    testfn: &dyn Fn(f64) -> Complex64,
    x0: f64,
    q: &QuadratureSpec,
) -> Result<(Complex64, Complex64)> {
    if t == p.t0 {
        return Err(Error::DegenerateInterval { t });
    }
    if !kind.active(t, p.t0) {
        return Ok((ZERO, ZERO));
    }
    let h = p.h;
    let len = (phi(h, t) - phi(h, p.t0)).abs();
    let pair = |r: f64| testfn(x0 + r) + testfn(x0 - r);
    let v = integrate_to_edge(
        |r| {
            let (e, de) = kernel_e_with_dt(p, r, t)?;
            let w = pair(r);
            Ok(CVec([e * w, de * w]))
        },
        len,
        q,
    )?;
    let sign = (t - p.t0).signum();
    let edge = sign * phi_dot(h, t) * (h * (t + p.t0) / 2.0).exp() / 2.0 * pair(len);
    Ok((v.0[0], v.0[1] + edge))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{kg_mode_oracle, kg_mode_oracle_from, OdeSpec};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn zero_src(_: f64) -> Complex64 {
        ZERO
    }

    #[test]
    fn initial_value_is_exact() {
        let p = KGProblem::new(1.0, c(0.5, 1.0), vec![1.0, 0.0, 0.0]).with_data(c(0.3, -0.2), c(1.0, 0.0));
        assert_eq!(kg_solve_mode(&p, 0.0, &QuadratureSpec::default()).unwrap(), c(0.3, -0.2));
    }

    #[test]
    fn massless_velocity_closed_form() {
        let h = 0.8;
        let p = KGProblem::new(h, c(h / 2.0, 0.0), vec![0.0; 3]).with_data(ZERO, c(1.0, 0.0));
        let t = 0.9;
        let u = kg_solve_mode(&p, t, &QuadratureSpec::default()).unwrap();
        let exact = (h * t / 2.0).exp() * phi(h, t);
        assert!((u - c(exact, 0.0)).norm() < 1e-13);
    }

    #[test]
    fn matches_oracle_with_initial_value() {
        let (h, m) = (1.0, c(0.5, 1.0));
        let p = KGProblem::new(h, m, vec![1.0, 0.0, 0.0]).with_data(c(1.0, 0.0), ZERO);
        for t in [0.25, 0.5, 1.0] {
            let u = kg_solve_mode(&p, t, &QuadratureSpec::default()).unwrap();
            let o = kg_mode_oracle(h, m, 1.0, c(1.0, 0.0), ZERO, &zero_src, t, &OdeSpec::default()).unwrap();
            assert!((u - o).norm() <= 1e-6 * o.norm(), "t={t}: {u} vs {o}");
        }
    }

    #[test]
    fn source_term_matches_oracle() {
        let (h, m) = (1.0, c(2.0, 0.0));
        let p = KGProblem::new(h, m, vec![0.0, 1.0, 0.0]).with_source(|b| c(b.cos(), 0.3 * b));
        let t = 0.8;
        let u = kg_solve_mode(&p, t, &QuadratureSpec::default()).unwrap();
        let src = |b: f64| c(b.cos(), 0.3 * b);
        let o = kg_mode_oracle(h, m, 1.0, ZERO, ZERO, &src, t, &OdeSpec::default()).unwrap();
        assert!((u - o).norm() <= 1e-6 * o.norm(), "{u} vs {o}");
    }

    #[test]
    fn minkowski_massless_closed_form() {
        let k = 1.7;
        let p = KGProblem::new(0.0, ZERO, vec![k, 0.0, 0.0]).with_data(c(0.4, 0.0), c(1.0, 0.5));
        let t = 1.1;
        let u = kg_solve_mode_minkowski(&p, t, &QuadratureSpec::default()).unwrap();
        let exact = c(0.4, 0.0) * (t * k).cos() + c(1.0, 0.5) * (t * k).sin() / k;
        assert!((u - exact).norm() < 1e-13);
        assert_eq!(kg_solve_mode_minkowski(&p, 0.0, &QuadratureSpec::default()).unwrap(), c(0.4, 0.0));
    }

    #[test]
    fn minkowski_massive_against_closed_form() {
        // u″ + (|ξ|² − M²)u = 0 with M = 1, |ξ| = 2
        let p = KGProblem::new(0.0, c(1.0, 0.0), vec![2.0, 0.0, 0.0]).with_data(c(1.0, 0.0), ZERO);
        for t in [0.3, 1.0, 2.0] {
            let u = kg_solve_mode_minkowski(&p, t, &QuadratureSpec::default()).unwrap();
            let exact = (t * 3f64.sqrt()).cos();
            assert!((u - c(exact, 0.0)).norm() < 1e-6 * exact.abs().max(1e-3), "t={t}: {u}");
        }
    }

    #[test]
    fn conjugate_masses_give_conjugate_components() {
        let (mp, mm) = crate::kernels::split_masses(1.0, c(1.0, 0.0));
        let base = |m| KGProblem::new(1.0, m, vec![1.0, 0.0, 0.0]).with_data(c(1.0, 0.0), c(0.5, 0.0));
        let probs = [base(mp), KGProblem::new(1.0, mp, vec![1.0, 0.0, 0.0]), base(mm), KGProblem::new(1.0, mm, vec![1.0, 0.0, 0.0])];
        let v = kg_solve_diagonal(&probs, 0.7, &QuadratureSpec::default()).unwrap();
        assert!((v[0] - v[2].conj()).norm() < 1e-10);
        assert_eq!(v[1], ZERO);
        assert_eq!(v[3], ZERO);
    }

    #[test]
    fn fundsol_massless_constant_test_function() {
        let h = 1.0;
        let p = KernelParams::new(h, c(0.5, 0.0), 0.2);
        let q = QuadratureSpec::default();
        let one = |_x: f64| c(1.0, 0.0);
        let t = 0.9;
        let v = kg_fundsol_action_1d(&p, Propagator::Retarded, t, &one, 0.0, &q).unwrap();
        let exact = (h / 2.0 * (t + 0.2)).exp() * (phi(h, t) - phi(h, 0.2));
        assert!((v - c(exact, 0.0)).norm() < 1e-13);
        assert!(matches!(
            kg_fundsol_action_1d(&p, Propagator::Retarded, 0.2, &one, 0.0, &q),
            Err(Error::DegenerateInterval { .. })
        ));
        assert_eq!(kg_fundsol_action_1d(&p, Propagator::Retarded, 0.1, &one, 0.0, &q).unwrap(), ZERO);
    }

    #[test]
    fn fundsol_plane_wave_solves_mode_equation() {
        // pairing with e^{iξx} gives a mode solution with zero value and unit
        // velocity jump (times e^{iξx0}) at t0
        let (h, m, xi, x0, t0) = (1.0, c(0.5, 1.0), 2.0, 0.3, 0.25);
        let p = KernelParams::new(h, m, t0);
        let q = QuadratureSpec::default();
        let wave = move |x: f64| Complex64::new(0.0, xi * x).exp();
        let amp = wave(x0);
        for t in [0.5, 1.0] {
            let v = kg_fundsol_action_1d(&p, Propagator::Retarded, t, &wave, x0, &q).unwrap();
            let (o, _) =
                kg_mode_oracle_from(h, m, xi, t0, ZERO, amp, &zero_src, t, &OdeSpec::default()).unwrap();
            assert!((v - o).norm() < 1e-8, "t={t}: {v} vs {o}");
        }
        // advanced: zero value, velocity jump −1 when approached from below
        let (v, dv) = kg_fundsol_action_1d_with_dt(&p, Propagator::Advanced, t0 - 1e-7, &wave, x0, &q).unwrap();
        assert!(v.norm() < 1e-6);
        assert!((dv + amp).norm() < 1e-6, "{dv}");
        let v = kg_fundsol_action_1d(&p, Propagator::Advanced, 0.0, &wave, x0, &q).unwrap();
        let (o, _) = kg_mode_oracle_from(h, m, xi, t0, ZERO, -amp, &zero_src, 0.0, &OdeSpec::default()).unwrap();
        assert!((v - o).norm() < 1e-8, "{v} vs {o}");
    }
}
