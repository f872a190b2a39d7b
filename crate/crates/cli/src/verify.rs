//! The invariant suite behind `desitter verify`.

use num_complex::Complex64 as C;
use serde::Serialize;
use serde_json::json;

use desitter::clifford::{clifford_defect, standard_basis, GammaBasis, GaussInt};
use desitter::factor::{run_factor_suite, FactorSuiteConfig};
use desitter::kernels::{kernel_e, kernel_k0, limit_check_e_to_i0, phi, KernelParams};
use desitter::kg::{kg_solve_mode, kg_solve_mode_minkowski, KGProblem};

use crate::commands::{par_map, Outcome};
use crate::config::RunConfig;
use crate::error::CliError;
use crate::table::{Cell, Table};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub max_residual: f64,
    pub threshold: f64,
    pub pass: bool,
    /// Reported alongside the suite but does not decide the exit code.
    pub informational: bool,
}

impl Check {
    fn gating(name: &str, max_residual: f64, threshold: f64) -> Self {
        Self { name: name.into(), max_residual, threshold, pass: max_residual <= threshold, informational: false }
    }
}

/// Flips one entry of γ², breaking its anticommutation relations.
pub fn corrupt(basis: &mut GammaBasis) {
    basis.gamma[2].entries[0][3] = GaussInt::new(0, 2);
}

fn clifford_check(basis: &GammaBasis) -> Check {
    Check::gating("clifford_anticommutators", clifford_defect(basis) as f64, 0.0)
}

// −∂_b E at b = 0 by central differences against the closed form K₀.
fn k0_check(cfg: &RunConfig) -> desitter::Result<Check> {
    let v = &cfg.verify;
    let h = 1.0;
    let step = v.k0_step;
    let mut cells = Vec::new();
    for m in [C::new(0.5, 0.0), C::new(0.5, 1.0), C::new(0.5, -1.0), C::new(2.0, 0.0)] {
        for t in [0.2, 0.4, 0.6, 0.8, 1.0] {
            for frac in [0.1, 0.3, 0.5, 0.7, 0.9] {
                cells.push((m, t, frac * phi(h, t)));
            }
        }
    }
    let gaps = par_map(&cells, |&(m, t, r)| -> desitter::Result<f64> {
        let k0 = kernel_k0(&KernelParams::new(h, m, 0.0), r, t)?;
        let ep = kernel_e(&KernelParams::new(h, m, step), r, t)?;
        let em = kernel_e(&KernelParams::new(h, m, -step), r, t)?;
        Ok((k0 + (ep - em) / (2.0 * step)).norm())
    });
    let worst = gaps.into_iter().try_fold(0.0f64, |w, g| g.map(|g| w.max(g)))?;
    Ok(Check::gating("k0_vs_time_derivative", worst, v.k0_threshold))
}

fn massless_check(cfg: &RunConfig) -> desitter::Result<Check> {
    let mut worst = 0.0f64;
    for h in [0.5, 1.0, 2.0] {
        let m = C::new(h / 2.0, 0.0);
        for t0 in [0.0, 0.3] {
            for dt in [0.1, 0.5, 1.0, 2.0] {
                let t = t0 + dt;
                let edge = phi(h, t) - phi(h, t0);
                for k in 0..=6 {
                    let r = edge * k as f64 / 6.0;
                    let e = kernel_e(&KernelParams::new(h, m, t0), r, t)?;
                    worst = worst.max((e - 0.5 * (h / 2.0 * (t0 + t)).exp()).norm());
                }
            }
        }
    }
    Ok(Check::gating("massless_collapse", worst, cfg.verify.massless_threshold))
}

/// |2E − I₀| should halve with H. The residual is the largest distance of
/// the halving ratio from the centre of the accepted window.
fn halving_check(cfg: &RunConfig) -> desitter::Result<Check> {
    let [lo, hi] = cfg.verify.halving_window;
    let masses = [0.25, 0.5, 1.0, 2.0];
    let mut worst = 0.0f64;
    for i in 0..10 {
        let m = C::new(masses[i % 4], 0.0);
        let t = 0.3 + 0.15 * i as f64;
        let b = if i % 2 == 0 { 0.0 } else { 0.1 };
        let r = (0.15 + 0.07 * i as f64) * (phi(1e-2, t) - phi(1e-2, b));
        let ratio = limit_check_e_to_i0(1e-2, m, t, b, r)? / limit_check_e_to_i0(5e-3, m, t, b, r)?;
        worst = worst.max((ratio - 0.5 * (lo + hi)).abs());
    }
    Ok(Check::gating("h0_kernel_halving", worst, 0.5 * (hi - lo)))
}

/// Small-H mode solver against the flat one. The gap is dominated by the
/// O(H|ξ|t²) phase drift of the expanding background, so it is reported
/// without gating.
fn bridge_check(cfg: &RunConfig) -> desitter::Result<Check> {
    let v = &cfg.verify;
    let q = cfg.quadrature;
    let source = |b: f64| C::new((2.0 * b).cos(), 0.5 * b) * (-0.5 * b).exp();
    let mut cases = Vec::new();
    for m in [0.25, 0.5, 1.0, 2.0] {
        for k in [0.0, 1.0, 4.0] {
            for case in 0..3 {
                cases.push((m, k, case));
            }
        }
    }
    let gaps = par_map(&cases, |&(m, k, case)| -> desitter::Result<f64> {
        let xi = vec![k / 3.0, 2.0 * k / 3.0, 2.0 * k / 3.0];
        let build = |h: f64| {
            let p = KGProblem::new(h, C::new(m, 0.0), xi.clone());
            match case {
                0 => p.with_data(C::new(1.0, 0.0), C::new(0.0, 0.0)),
                1 => p.with_data(C::new(0.0, 0.0), C::new(1.0, 0.0)),
                _ => p.with_source(source),
            }
        };
        let (ds, flat) = (build(v.bridge_h), build(0.0));
        let mut worst = 0.0f64;
        for t in [0.25, 0.5, 1.0] {
            let a = kg_solve_mode(&ds, t, &q)?;
            let b = kg_solve_mode_minkowski(&flat, t, &q)?;
            worst = worst.max((a - b).norm() / b.norm());
        }
        Ok(worst)
    });
    let worst = gaps.into_iter().try_fold(0.0f64, |w, g| g.map(|g| w.max(g)))?;
    let mut check = Check::gating("h0_solver_bridge", worst, v.bridge_threshold);
    check.informational = true;
    Ok(check)
}

pub fn run_checks(cfg: &RunConfig, corrupt_gamma: bool) -> Result<Vec<Check>, CliError> {
    let mut basis = standard_basis();
    if corrupt_gamma {
        corrupt(&mut basis);
    }
    let mut checks = vec![clifford_check(&basis), k0_check(cfg)?, massless_check(cfg)?];
    let suite = FactorSuiteConfig {
        seed: cfg.seed,
        functions: cfg.verify.functions,
        points: cfg.verify.points,
        threshold: cfg.verify.factor_threshold,
    };
    for s in run_factor_suite(&suite)? {
        checks.push(Check {
            name: s.name,
            max_residual: s.max_residual,
            threshold: s.threshold,
            pass: s.pass,
            informational: s.informational,
        });
    }
    checks.push(halving_check(cfg)?);
    checks.push(bridge_check(cfg)?);
    Ok(checks)
}

pub fn verify(cfg: &RunConfig, hash: String, corrupt_gamma: bool) -> Result<Outcome, CliError> {
    let checks = run_checks(cfg, corrupt_gamma)?;
    let failed: Vec<&str> =
        checks.iter().filter(|c| !c.informational && !c.pass).map(|c| c.name.as_str()).collect();
    let mut table = Table::new(
        "verify",
        "residuals are dimensionless",
        hash,
        &["check", "max_residual", "threshold", "pass", "informational"],
    );
    for c in &checks {
        table.push(vec![
            Cell::Text(c.name.clone()),
            c.max_residual.into(),
            c.threshold.into(),
            c.pass.into(),
            c.informational.into(),
        ]);
    }
    table.extra.push(("seed", json!(cfg.seed)));
    table.extra.push(("pass", json!(failed.is_empty())));
    table.extra.push(("checks", serde_json::to_value(&checks).expect("checks serialize")));
    let failure = if failed.is_empty() { None } else { Some(CliError::Verify(format!("failing checks: {failed:?}"))) };
    Ok(Outcome { table, failure })
}
