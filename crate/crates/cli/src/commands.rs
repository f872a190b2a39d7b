//! Table-producing subcommands.

use num_complex::Complex64 as C;

use desitter::clifford::Spinor;
use desitter::dirac::{dirac_fundsol_action_1d, dirac_solve_mode, dirac_solve_mode_minkowski, DiracModeProblem};
use desitter::kernels::{kernel_e, kernel_k0, kernel_k1, limit_check_e_to_i0, phi, KernelParams};
use desitter::kg::{kg_fundsol_action_1d, kg_solve_mode, kg_solve_mode_minkowski, KGProblem};
use desitter::oracle::{dirac_mode_oracle, kg_mode_oracle};
use desitter::Error;

use crate::config::{Equation, RunConfig, ScalarSourceKind, SpinorSourceKind};
use crate::error::CliError;
use crate::table::{Cell, Table};

pub const KG_GATE: f64 = 1e-6;
pub const DIRAC_GATE: f64 = 1e-5;

const UNITS: &str = "t, t0, b, r, x0 in units of time (c = 1); H, m, xi in inverse time";

/// A written table plus the failure, if any, that sets the exit code.
pub struct Outcome {
    pub table: Table,
    pub failure: Option<CliError>,
}

impl Outcome {
    fn ok(table: Table) -> Self {
        Self { table, failure: None }
    }
}

/// Order-preserving map over scoped worker threads.
pub fn par_map<T: Sync, R: Send>(items: &[T], f: impl Fn(&T) -> R + Sync) -> Vec<R> {
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get()).min(items.len()).max(1);
    let chunk = items.len().div_ceil(workers).max(1);
    let f = &f;
    std::thread::scope(|s| {
        let handles: Vec<_> =
            items.chunks(chunk).map(|c| s.spawn(move || c.iter().map(f).collect::<Vec<R>>())).collect();
        handles.into_iter().flat_map(|h| h.join().expect("worker thread panicked")).collect()
    })
}

fn re_im(z: C) -> [Cell; 2] {
    [z.re.into(), z.im.into()]
}

// Outside-cone points are data, not failures.
fn on_cone(v: desitter::Result<C>) -> desitter::Result<Option<C>> {
    match v {
        Ok(z) => Ok(Some(z)),
        Err(Error::OutsideCone { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

pub fn kernel(cfg: &RunConfig, hash: String) -> Result<Outcome, CliError> {
    let k = &cfg.kernel;
    let p = KernelParams::new(k.h, k.m, k.t0);
    let cells: Vec<(f64, f64)> =
        k.t.values().into_iter().flat_map(|t| k.r.values().into_iter().map(move |r| (r, t))).collect();
    let values = par_map(&cells, |&(r, t)| -> desitter::Result<Option<[C; 3]>> {
        let e = on_cone(kernel_e(&p, r, t))?;
        let k0 = on_cone(kernel_k0(&p, r, t))?;
        let k1 = on_cone(kernel_k1(&p, r, t))?;
        Ok(match (e, k0, k1) {
            (Some(e), Some(k0), Some(k1)) => Some([e, k0, k1]),
            _ => None,
        })
    });
    let mut table = Table::new(
        "kernel",
        UNITS,
        hash,
        &["r", "t", "re_e", "im_e", "re_k0", "im_k0", "re_k1", "im_k1", "outside_cone"],
    );
    for (&(r, t), v) in cells.iter().zip(values) {
        let mut row = vec![r.into(), t.into()];
        match v? {
            Some(vals) => {
                for z in vals {
                    row.extend(re_im(z));
                }
                row.push(Cell::Int(0));
            }
            None => {
                row.extend(std::iter::repeat_n(Cell::Empty, 6));
                row.push(Cell::Int(1));
            }
        }
        table.push(row);
    }
    Ok(Outcome::ok(table))
}

const SOLVE_COLUMNS: [&str; 8] = ["t", "comp", "re_val", "im_val", "re_oracle", "im_oracle", "abs_err", "rel_err"];

fn ratio(num: f64, den: f64) -> f64 {
    if num == 0.0 {
        0.0
    } else {
        num / den
    }
}

fn gate_outcome(table: Table, worst: f64, gate: f64) -> Outcome {
    // NaN compares false, so it fails the gate as well
    let failure = if worst <= gate {
        None
    } else {
        Some(CliError::Gate(format!("max rel_err {worst:e} exceeds gate {gate:e}")))
    };
    Outcome { table, failure }
}

pub fn kg_solve(cfg: &RunConfig, hash: String) -> Result<Outcome, CliError> {
    let k = &cfg.kg;
    let source = k.source;
    let mut p = KGProblem::new(k.h, k.m, k.xi.clone()).with_data(k.phi0, k.phi1);
    if source != ScalarSourceKind::None {
        p = p.with_source(move |b| source.eval(b));
    }
    let xi_norm = p.mode.norm();
    let (q, ode) = (cfg.quadrature, cfg.ode);
    let results = par_map(&k.times, |&t| -> desitter::Result<(C, C)> {
        let v = if k.h > 0.0 { kg_solve_mode(&p, t, &q)? } else { kg_solve_mode_minkowski(&p, t, &q)? };
        let o = kg_mode_oracle(k.h, k.m, xi_norm, k.phi0, k.phi1, &|b| source.eval(b), t, &ode)?;
        Ok((v, o))
    });
    let gate = cfg.gate.unwrap_or(KG_GATE);
    let mut table = Table::new("kg-solve", UNITS, hash, &SOLVE_COLUMNS);
    let mut worst = 0.0f64;
    for (&t, r) in k.times.iter().zip(results) {
        let (v, o) = r?;
        let abs = (v - o).norm();
        let rel = ratio(abs, o.norm());
        worst = if rel.is_nan() { f64::NAN } else { worst.max(rel) };
        let mut row = vec![t.into(), 0usize.into()];
        row.extend(re_im(v));
        row.extend(re_im(o));
        row.extend([abs.into(), rel.into()]);
        table.push(row);
    }
    Ok(gate_outcome(table, worst, gate))
}

pub fn dirac_solve(cfg: &RunConfig, hash: String) -> Result<Outcome, CliError> {
    let d = &cfg.dirac;
    let source = d.source;
    let mut p = DiracModeProblem::new(d.h, d.m, d.xi, d.phi);
    if source != SpinorSourceKind::None {
        p = p.with_source(move |b| source.eval(b));
    }
    let (q, ode) = (cfg.quadrature, cfg.ode);
    let results = par_map(&d.times, |&t| -> desitter::Result<(Spinor, Spinor)> {
        let v = if d.h > 0.0 { dirac_solve_mode(&p, t, &q)? } else { dirac_solve_mode_minkowski(&p, t, &q)? };
        let o = dirac_mode_oracle(d.h, d.m, d.xi, d.phi, &|b| source.eval(b), t, &ode)?;
        Ok((v, o))
    });
    let gate = cfg.gate.unwrap_or(DIRAC_GATE);
    let mut table = Table::new("dirac-solve", UNITS, hash, &SOLVE_COLUMNS);
    let mut worst = 0.0f64;
    for (&t, r) in d.times.iter().zip(results) {
        let (v, o) = r?;
        // errors relative to the largest oracle component at this time
        let scale = o.max_abs();
        for comp in 0..4 {
            let abs = (v[comp] - o[comp]).norm();
            let rel = ratio(abs, scale);
            worst = if rel.is_nan() { f64::NAN } else { worst.max(rel) };
            let mut row = vec![t.into(), comp.into()];
            row.extend(re_im(v[comp]));
            row.extend(re_im(o[comp]));
            row.extend([abs.into(), rel.into()]);
            table.push(row);
        }
    }
    Ok(gate_outcome(table, worst, gate))
}

pub fn fundsol(cfg: &RunConfig, hash: String) -> Result<Outcome, CliError> {
    let f = &cfg.fundsol;
    let q = cfg.quadrature;
    let results = par_map(&f.times, |&t| -> desitter::Result<Spinor> {
        let test = f.test.as_dyn();
        match f.equation {
            Equation::Dirac => dirac_fundsol_action_1d(f.h, f.m, f.propagator, t, f.t0, f.x0, test, &q),
            Equation::Kg => {
                let p = KernelParams::new(f.h, f.m, f.t0);
                let mut out = Spinor::ZERO;
                for j in 0..4 {
                    out[j] = kg_fundsol_action_1d(&p, f.propagator, t, &|x| test.value(x)[j], f.x0, &q)?;
                }
                Ok(out)
            }
        }
    });
    let mut table = Table::new("fundsol", UNITS, hash, &["t", "comp", "re_val", "im_val"]);
    for (&t, r) in f.times.iter().zip(results) {
        let v = r?;
        for comp in 0..4 {
            let mut row = vec![t.into(), comp.into()];
            row.extend(re_im(v[comp]));
            table.push(row);
        }
    }
    Ok(Outcome::ok(table))
}

pub fn limit_h0(cfg: &RunConfig, hash: String) -> Result<Outcome, CliError> {
    let l = &cfg.limit;
    let h_max = l.h.iter().copied().fold(0.0, f64::max);
    let cases: Vec<(C, f64)> = l.masses.iter().flat_map(|&m| l.times.iter().map(move |&t| (m, t))).collect();
    let results = par_map(&cases, |&(m, t)| -> desitter::Result<(f64, Vec<f64>)> {
        let r = l.r_fraction * (phi(h_max, t) - phi(h_max, l.b));
        let gaps = l.h.iter().map(|&h| limit_check_e_to_i0(h, m, t, l.b, r)).collect::<desitter::Result<_>>()?;
        Ok((r, gaps))
    });
    let mut table =
        Table::new("limit-h0", UNITS, hash, &["re_m", "im_m", "t", "b", "r", "h", "gap", "ratio_to_previous"]);
    for (&(m, t), res) in cases.iter().zip(results) {
        let (r, gaps) = res?;
        for (i, (&h, &gap)) in l.h.iter().zip(&gaps).enumerate() {
            let mut row = vec![m.re.into(), m.im.into(), t.into(), l.b.into(), r.into(), h.into(), gap.into()];
            row.push(if i == 0 { Cell::Empty } else { (gaps[i - 1] / gap).into() });
            table.push(row);
        }
    }
    Ok(Outcome::ok(table))
}
