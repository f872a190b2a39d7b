//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_complex::Complex64 as C;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use desitter::clifford::{clifford_defect, standard_basis, Spinor};
use desitter::dirac::{
    dirac_fundsol_action_1d, dirac_solve_mode, dirac_solve_mode_massless, Bump, DiracModeProblem,
};
use desitter::factor::{run_factor_suite, FactorSuiteConfig};
use desitter::kernels::{kernel_e, kernel_k0, limit_check_e_to_i0, phi, KernelParams};
use desitter::kg::{kg_solve_mode, kg_solve_mode_minkowski, KGProblem, Propagator};
use desitter::oracle::{dirac_mode_oracle, kg_mode_oracle, residual_dirac_mode, OdeSpec};
use desitter::quadrature::QuadratureSpec;
use desitter::Result;

// Tolerances.
const K0_FD_STEP: f64 = 1e-5;
const K0_FD_TOL: f64 = 1e-5;
const MASSLESS_TOL: f64 = 1e-12;
const KG_REL_TOL: f64 = 1e-6;
const DIRAC_REL_TOL: f64 = 1e-5;
const INITIAL_TOL: f64 = 1e-8;
const MASSLESS_PATH_TOL: f64 = 1e-8;
const HALVING_RATIO: (f64, f64) = (1.7, 2.3);
const BRIDGE_H: f64 = 1e-3;
const BRIDGE_REL_TOL: f64 = 5e-3;
const FACTOR_TOL: f64 = 1e-8;
const SUPPORT_TOL: f64 = 1e-8;
const RESIDUAL_TOL: f64 = 1e-4;
/// Observed order of the residual decay must lie in [3.5, 4.5].
const RESIDUAL_ORDER: (f64, f64) = (3.5, 4.5);

const SEED: u64 = 0x5eed_d51c;

fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn no_source(_: f64) -> C {
    c(0.0, 0.0)
}

fn no_spinor_source(_: f64) -> Spinor {
    Spinor::ZERO
}

fn scalar_source(b: f64) -> C {
    c((2.0 * b).cos(), 0.5 * b) * (-0.5 * b).exp()
}

fn spinor_source(b: f64) -> Spinor {
    Spinor::new(c(b.cos(), 0.0), c(0.0, 0.3 * b), c(0.2, -0.1 * b * b), c(-0.4 * b.sin(), 0.1))
}

fn rel_scalar(v: C, o: C) -> f64 {
    (v - o).norm() / o.norm()
}

fn rel_spinor(v: &Spinor, o: &Spinor) -> f64 {
    (*v - *o).max_abs() / o.max_abs()
}

/// Direction (1, 2, 2)/3 scaled to |ξ|.
fn xi_vec(norm: f64) -> [f64; 3] {
    [norm / 3.0, 2.0 * norm / 3.0, 2.0 * norm / 3.0]
}

fn random_spinor(rng: &mut impl Rng) -> Spinor {
    Spinor(std::array::from_fn(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))))
}

// 1 -------------------------------------------------------------------------

fn clifford_exactness() -> Result<Outcome> {
    let defect = clifford_defect(&standard_basis());
    Ok(outcome(defect == 0, format!("max integer defect over 16 pairs = {defect}")))
}

// 2 -------------------------------------------------------------------------

fn kernel_self_consistency() -> Result<Outcome> {
    let h = 1.0;
    let mut worst = 0.0f64;
    for m in [c(0.5, 0.0), c(0.5, 1.0), c(0.5, -1.0), c(2.0, 0.0)] {
        for t in [0.2, 0.4, 0.6, 0.8, 1.0] {
            for frac in [0.1, 0.3, 0.5, 0.7, 0.9] {
                let r = frac * phi(h, t);
                let k0 = kernel_k0(&KernelParams::new(h, m, 0.0), r, t)?;
                let ep = kernel_e(&KernelParams::new(h, m, K0_FD_STEP), r, t)?;
                let em = kernel_e(&KernelParams::new(h, m, -K0_FD_STEP), r, t)?;
                let fd = -(ep - em) / (2.0 * K0_FD_STEP);
                worst = worst.max((k0 - fd).norm());
            }
        }
    }
    Ok(outcome(worst <= K0_FD_TOL, format!("max |K0 + dE/db| = {worst:.3e} (tol {K0_FD_TOL:e})")))
}

// 3 -------------------------------------------------------------------------

fn massless_collapse() -> Result<Outcome> {
    let mut worst = 0.0f64;
    let mut n = 0;
    for h in [0.5, 1.0, 2.0] {
        let m = c(h / 2.0, 0.0);
        for t0 in [0.0, 0.3] {
            for dt in [0.1, 0.5, 1.0, 2.0] {
                let t = t0 + dt;
                let edge = phi(h, t) - phi(h, t0);
                for k in 0..=6 {
                    let r = edge * k as f64 / 6.0;
                    let e = kernel_e(&KernelParams::new(h, m, t0), r, t)?;
                    let target = 0.5 * (h / 2.0 * (t0 + t)).exp();
                    worst = worst.max((e - target).norm());
                    n += 1;
                }
            }
        }
    }
    Ok(outcome(worst <= MASSLESS_TOL, format!("max |E − e^{{H(t0+t)/2}}/2| = {worst:.3e} over {n} cells")))
}

// 4 and 8 -------------------------------------------------------------------

#[derive(Clone, Copy)]
enum KgCase {
    Data(C, C),
    Source,
}

fn kg_problem(h: f64, m: C, k: f64, case: KgCase) -> KGProblem {
    let p = KGProblem::new(h, m, xi_vec(k).to_vec());
    match case {
        KgCase::Data(u0, u1) => p.with_data(u0, u1),
        KgCase::Source => p.with_source(scalar_source),
    }
}

const KG_CASES: [KgCase; 3] =
    [KgCase::Data(C::new(1.0, 0.0), C::new(0.0, 0.0)), KgCase::Data(C::new(0.0, 0.0), C::new(1.0, 0.0)), KgCase::Source];

fn kg_oracle_agreement() -> Result<Outcome> {
    let q = QuadratureSpec::default();
    let ode = OdeSpec::default();
    let mut worst = 0.0f64;
    let mut n = 0;
    for h in [0.5, 1.0] {
        for m in [c(h / 2.0, 0.0), c(h / 2.0, 1.0), c(h / 2.0, -1.0), c(2.0 * h, 0.0)] {
            for k in [0.0, 1.0, 4.0] {
                for case in KG_CASES {
                    let p = kg_problem(h, m, k, case);
                    let (u0, u1, src): (C, C, &dyn Fn(f64) -> C) = match case {
                        KgCase::Data(a, b) => (a, b, &no_source),
                        KgCase::Source => (c(0.0, 0.0), c(0.0, 0.0), &scalar_source),
                    };
                    for t in [0.25, 0.5, 1.0] {
                        let v = kg_solve_mode(&p, t, &q)?;
                        let o = kg_mode_oracle(h, m, k, u0, u1, src, t, &ode)?;
                        worst = worst.max(rel_scalar(v, o));
                        n += 1;
                    }
                }
            }
        }
    }
    Ok(outcome(worst <= KG_REL_TOL, format!("max rel err = {worst:.3e} over {n} solves (tol {KG_REL_TOL:e})")))
}

fn minkowski_bridge() -> Result<Outcome> {
    // kernel gap halves with H
    let mut ratios = Vec::new();
    let masses = [0.25, 0.5, 1.0, 2.0];
    for i in 0..10 {
        let m = c(masses[i % 4], 0.0);
        let t = 0.3 + 0.15 * i as f64;
        let b = if i % 2 == 0 { 0.0 } else { 0.1 };
        let r = (0.15 + 0.07 * i as f64) * (phi(1e-2, t) - phi(1e-2, b));
        let coarse = limit_check_e_to_i0(1e-2, m, t, b, r)?;
        let fine = limit_check_e_to_i0(5e-3, m, t, b, r)?;
        ratios.push(coarse / fine);
    }
    let (rlo, rhi) = ratios.iter().fold((f64::MAX, f64::MIN), |(a, b), &r| (a.min(r), b.max(r)));
    let ratios_ok = rlo >= HALVING_RATIO.0 && rhi <= HALVING_RATIO.1;

    // solver bridge on the real masses of the oracle grid: H/2 and 2H for H ∈ {0.5, 1}
    let q = QuadratureSpec::default();
    let mut worst = 0.0f64;
    for m in masses {
        for k in [0.0, 1.0, 4.0] {
            for case in KG_CASES {
                let ds = kg_problem(BRIDGE_H, c(m, 0.0), k, case);
                let flat = kg_problem(0.0, c(m, 0.0), k, case);
                for t in [0.25, 0.5, 1.0] {
                    let a = kg_solve_mode(&ds, t, &q)?;
                    let b = kg_solve_mode_minkowski(&flat, t, &q)?;
                    worst = worst.max(rel_scalar(a, b));
                }
            }
        }
    }
    let pass = ratios_ok && worst <= BRIDGE_REL_TOL;
    Ok(outcome(
        pass,
        format!(
            "|2E − I0| halving ratios in [{rlo:.3}, {rhi:.3}] (need {HALVING_RATIO:?}); \
             H = {BRIDGE_H:e} vs flat max rel diff = {worst:.3e} (tol {BRIDGE_REL_TOL:e})"
        ),
    ))
}

// 5, 6, 7 -------------------------------------------------------------------

fn dirac_oracle_agreement() -> Result<Outcome> {
    let q = QuadratureSpec::default();
    let ode = OdeSpec::default();
    let spinors = [
        Spinor::basis(0),
        Spinor::basis(1),
        Spinor::basis(2),
        Spinor::basis(3),
        Spinor::new(c(0.3, 0.1), c(0.0, 1.0), c(0.2, -0.4), c(-1.0, 0.0)),
    ];
    let mut worst = 0.0f64;
    let mut n = 0;
    for h in [0.5, 1.0] {
        for m in [0.0, 1.0, 2.0] {
            for k in [0.0, 1.0, 4.0] {
                let xi = xi_vec(k);
                for phi0 in spinors {
                    let p = DiracModeProblem::new(h, c(m, 0.0), xi, phi0);
                    for t in [0.25, 0.5, 1.0] {
                        let v = dirac_solve_mode(&p, t, &q)?;
                        let o = dirac_mode_oracle(h, c(m, 0.0), xi, phi0, &no_spinor_source, t, &ode)?;
                        worst = worst.max(rel_spinor(&v, &o));
                        n += 1;
                    }
                }
            }
        }
    }
    Ok(outcome(worst <= DIRAC_REL_TOL, format!("max rel err = {worst:.3e} over {n} solves (tol {DIRAC_REL_TOL:e})")))
}

fn initial_condition() -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let q = QuadratureSpec::default();
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let h = rng.gen_range(0.2..2.0);
        let m = c(rng.gen_range(0.0..3.0), 0.0);
        let xi = std::array::from_fn(|_| rng.gen_range(-3.0..3.0));
        let phi0 = random_spinor(&mut rng);
        let p = DiracModeProblem::new(h, m, xi, phi0).with_source(spinor_source);
        let v = dirac_solve_mode(&p, 0.0, &q)?;
        worst = worst.max((v - phi0).max_abs());
    }
    Ok(outcome(worst <= INITIAL_TOL, format!("max |Ψ(0) − Φ| = {worst:.3e} over 20 problems")))
}

fn massless_fast_path() -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 1);
    let q = QuadratureSpec::default();
    let mut worst = 0.0f64;
    for i in 0..10 {
        let h = rng.gen_range(0.2..2.0);
        let xi = std::array::from_fn(|_| rng.gen_range(-3.0..3.0));
        let phi0 = random_spinor(&mut rng);
        let t = rng.gen_range(0.1..1.5);
        let mut p = DiracModeProblem::new(h, c(0.0, 0.0), xi, phi0);
        if i % 2 == 1 {
            p = p.with_source(spinor_source);
        }
        let a = dirac_solve_mode_massless(&p, t, &q)?;
        let b = dirac_solve_mode(&p, t, &q)?;
        worst = worst.max((a - b).max_abs());
    }
    Ok(outcome(worst <= MASSLESS_PATH_TOL, format!("max componentwise diff = {worst:.3e} over 10 problems")))
}

// 9 -------------------------------------------------------------------------

fn factorization_suite() -> Result<Outcome> {
    let cfg = FactorSuiteConfig { seed: SEED, functions: 20, points: 10, threshold: FACTOR_TOL };
    let report = run_factor_suite(&cfg)?;
    let gating: Vec<_> = report.iter().filter(|s| !s.informational).collect();
    let pass = gating.iter().all(|s| s.pass);
    let worst = gating.iter().map(|s| s.max_residual).fold(0.0, f64::max);
    let failed: Vec<_> = gating.iter().filter(|s| !s.pass).map(|s| s.name.as_str()).collect();
    let evals: usize = gating.iter().map(|s| s.evaluations).sum();
    Ok(outcome(
        pass,
        format!(
            "{} identities, {evals} evaluations, max normalized residual = {worst:.3e}{}",
            gating.len(),
            if failed.is_empty() { String::new() } else { format!("; failing: {failed:?}") }
        ),
    ))
}

// 10 ------------------------------------------------------------------------

fn fundsol_support() -> Result<Outcome> {
    let q = QuadratureSpec::default();
    let amp = Spinor::new(c(1.0, 0.0), c(0.0, 0.5), c(-0.3, 0.2), c(0.7, -0.7));
    let mut worst = 0.0f64;
    let mut zero_ok = true;
    for h in [0.5, 1.0] {
        for m in [0.0, 1.0, 2.0] {
            let m = c(m, 0.0);
            let (t0, x0) = (0.4, 0.3);
            for t in [0.9, 1.6] {
                let reach = phi(h, t) - phi(h, t0);
                for side in [1.0, -1.0] {
                    let bump = Bump { amplitude: amp, center: x0 + side * (reach + 0.35), half_width: 0.3 };
                    let v = dirac_fundsol_action_1d(h, m, Propagator::Retarded, t, t0, x0, &bump, &q)?;
                    worst = worst.max(v.max_abs());
                    // advanced solution with the two times swapped has the same reach
                    let v = dirac_fundsol_action_1d(h, m, Propagator::Advanced, t0, t, x0, &bump, &q)?;
                    worst = worst.max(v.max_abs());
                }
                let inside = Bump { amplitude: amp, center: x0, half_width: 0.5 };
                let v = dirac_fundsol_action_1d(h, m, Propagator::Retarded, t0 - 0.3, t0, x0, &inside, &q)?;
                zero_ok &= v == Spinor::ZERO;
                let v = dirac_fundsol_action_1d(h, m, Propagator::Advanced, t, t0, x0, &inside, &q)?;
                zero_ok &= v == Spinor::ZERO;
            }
        }
    }
    Ok(outcome(
        worst <= SUPPORT_TOL && zero_ok,
        format!("max |action| off the cones = {worst:.3e}; inactive side exactly zero: {zero_ok}"),
    ))
}

// 11 ------------------------------------------------------------------------

fn equation_residual() -> Result<Outcome> {
    let q = QuadratureSpec::default();
    let (h, m, xi) = (1.0, c(1.0, 0.0), [0.6, -0.8, 0.5]);
    let phi0 = Spinor::new(c(0.3, 0.1), c(0.0, 1.0), c(0.2, -0.4), c(-1.0, 0.0));
    let p = DiracModeProblem::new(h, m, xi, phi0).with_source(spinor_source);
    let (t_first, t_last) = (0.2, 1.0);
    let run = |dt: f64| -> Result<(f64, f64)> {
        let n = ((t_last - t_first) / dt).round() as usize;
        let samples: Vec<Spinor> =
            (0..=n).map(|j| dirac_solve_mode(&p, t_first + j as f64 * dt, &q)).collect::<Result<_>>()?;
        let scale = samples.iter().map(|s| s.max_abs()).fold(0.0, f64::max);
        let r = residual_dirac_mode(&samples, t_first, dt, h, m, xi, &spinor_source)?;
        Ok((r, scale))
    };
    let (coarse, scale) = run(0.04)?;
    let (fine, _) = run(0.02)?;
    let order = (coarse / fine).log2();
    let pass = fine <= RESIDUAL_TOL * scale
        && coarse <= RESIDUAL_TOL * scale
        && (RESIDUAL_ORDER.0..=RESIDUAL_ORDER.1).contains(&order);
    Ok(outcome(
        pass,
        format!(
            "residual {coarse:.3e} (dt 0.04), {fine:.3e} (dt 0.02), max|Ψ| = {scale:.3}, ratio {:.2}, order {order:.2}",
            coarse / fine
        ),
    ))
}

fn main() -> ExitCode {
    type Criterion = (u32, &'static str, Duration, fn() -> Result<Outcome>);
    let criteria: [Criterion; 11] = [
        (1, "clifford exactness", Duration::from_secs(1), clifford_exactness),
        (2, "kernel self-consistency", Duration::from_secs(10), kernel_self_consistency),
        (3, "massless collapse", Duration::from_secs(1), massless_collapse),
        (4, "KG oracle agreement", Duration::from_secs(120), kg_oracle_agreement),
        (5, "Dirac oracle agreement", Duration::from_secs(300), dirac_oracle_agreement),
        (6, "initial-condition exactness", Duration::from_secs(60), initial_condition),
        (7, "massless fast path", Duration::from_secs(60), massless_fast_path),
        (8, "Minkowski limit bridge", Duration::from_secs(300), minkowski_bridge),
        (9, "factorization suite", Duration::from_secs(60), factorization_suite),
        (10, "fundamental-solution support", Duration::from_secs(60), fundsol_support),
        (11, "equation residual", Duration::from_secs(300), equation_residual),
    ];
    let mut all = true;
    for (id, name, budget, run) in criteria {
        let start = Instant::now();
        let result = run();
        let elapsed = start.elapsed();
        let (pass, detail) = match result {
            Ok(o) => (o.pass && elapsed <= budget, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        all &= pass;
        println!(
            "{} criterion {id:>2} {name}: {detail} [{:.2}s, budget {}s]",
            if pass { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            budget.as_secs()
        );
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
