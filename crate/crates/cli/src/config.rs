//! Run configuration: defaults, TOML file, then command-line overrides.

use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64 as C;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use desitter::clifford::Spinor;
use desitter::dirac::{Bump, GaussianPacket, PlaneWave1d, SpinorTestFn};
use desitter::kg::Propagator;
use desitter::oracle::OdeSpec;
use desitter::quadrature::QuadratureSpec;

use crate::error::CliError;

pub const DEFAULT_SEED: u64 = 0x5eed_d51c;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// Evenly spaced samples `start, …, stop`; a single sample sits at `start`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl Grid {
    pub fn new(start: f64, stop: f64, count: usize) -> Self {
        Self { start, stop, count }
    }

    pub fn values(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.start];
        }
        let step = (self.stop - self.start) / (self.count - 1) as f64;
        (0..self.count).map(|i| self.start + step * i as f64).collect()
    }

    fn check(&self, what: &str) -> Result<(), CliError> {
        if self.count == 0 || !self.start.is_finite() || !self.stop.is_finite() {
            return Err(CliError::config(format!("{what}: grid needs finite bounds and count >= 1")));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KernelConfig {
    pub h: f64,
    /// Complex mass as [re, im].
    pub m: C,
    pub t0: f64,
    pub r: Grid,
    pub t: Grid,
}

impl Default for KernelConfig {
    fn default() -> Self {
        Self { h: 1.0, m: C::new(1.0, 0.0), t0: 0.0, r: Grid::new(0.0, 1.0, 11), t: Grid::new(0.1, 1.0, 10) }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScalarSourceKind {
    None,
    /// (cos 2b + ib/2)e^{−b/2}
    Decaying,
}

impl ScalarSourceKind {
    pub fn eval(self, b: f64) -> C {
        match self {
            ScalarSourceKind::None => C::new(0.0, 0.0),
            ScalarSourceKind::Decaying => C::new((2.0 * b).cos(), 0.5 * b) * (-0.5 * b).exp(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KgConfig {
    pub h: f64,
    pub m: C,
    pub xi: Vec<f64>,
    pub phi0: C,
    pub phi1: C,
    pub source: ScalarSourceKind,
    pub times: Vec<f64>,
}

impl Default for KgConfig {
    fn default() -> Self {
        Self {
            h: 1.0,
            m: C::new(0.5, 1.0),
            xi: vec![1.0 / 3.0, 2.0 / 3.0, 2.0 / 3.0],
            phi0: C::new(1.0, 0.0),
            phi1: C::new(0.0, 1.0),
            source: ScalarSourceKind::Decaying,
            times: vec![0.25, 0.5, 1.0],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpinorSourceKind {
    None,
    /// (cos b, 0.3ib, 0.2 − 0.1ib², −0.4 sin b + 0.1i)
    Mixed,
}

impl SpinorSourceKind {
    pub fn eval(self, b: f64) -> Spinor {
        match self {
            SpinorSourceKind::None => Spinor::ZERO,
            SpinorSourceKind::Mixed => Spinor::new(
                C::new(b.cos(), 0.0),
                C::new(0.0, 0.3 * b),
                C::new(0.2, -0.1 * b * b),
                C::new(-0.4 * b.sin(), 0.1),
            ),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DiracConfig {
    pub h: f64,
    pub m: C,
    pub xi: [f64; 3],
    pub phi: Spinor,
    pub source: SpinorSourceKind,
    pub times: Vec<f64>,
}

impl Default for DiracConfig {
    fn default() -> Self {
        Self {
            h: 1.0,
            m: C::new(1.0, 0.0),
            xi: [0.6, -0.8, 0.5],
            phi: Spinor::new(C::new(0.3, 0.1), C::new(0.0, 1.0), C::new(0.2, -0.4), C::new(-1.0, 0.0)),
            source: SpinorSourceKind::None,
            times: vec![0.25, 0.5, 1.0],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Equation {
    Dirac,
    Kg,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TestFunction {
    Bump(Bump),
    Gaussian(GaussianPacket),
    PlaneWave(PlaneWave1d),
}

impl TestFunction {
    pub fn as_dyn(&self) -> &dyn SpinorTestFn {
        match self {
            TestFunction::Bump(b) => b,
            TestFunction::Gaussian(g) => g,
            TestFunction::PlaneWave(p) => p,
        }
    }

    fn check(&self) -> Result<(), CliError> {
        let ok = match self {
            TestFunction::Bump(b) => b.half_width > 0.0,
            TestFunction::Gaussian(g) => g.width > 0.0,
            TestFunction::PlaneWave(_) => true,
        };
        if ok {
            Ok(())
        } else {
            Err(CliError::config("fundsol.test: widths must be positive"))
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FundsolConfig {
    pub equation: Equation,
    pub h: f64,
    pub m: C,
    pub propagator: Propagator,
    pub t0: f64,
    pub x0: f64,
    pub times: Vec<f64>,
    pub test: TestFunction,
}

impl Default for FundsolConfig {
    fn default() -> Self {
        Self {
            equation: Equation::Dirac,
            h: 1.0,
            m: C::new(1.0, 0.0),
            propagator: Propagator::Retarded,
            t0: 0.4,
            x0: 0.3,
            times: vec![0.6, 0.9, 1.2, 1.6],
            test: TestFunction::Bump(Bump {
                amplitude: Spinor::new(C::new(1.0, 0.0), C::new(0.0, 0.5), C::new(-0.3, 0.2), C::new(0.7, -0.7)),
                center: 0.5,
                half_width: 0.4,
            }),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LimitConfig {
    pub masses: Vec<C>,
    /// Decreasing sequence of curvature values.
    pub h: Vec<f64>,
    pub times: Vec<f64>,
    pub b: f64,
    /// Radius as a fraction of the cone reach at the largest H.
    pub r_fraction: f64,
}

impl Default for LimitConfig {
    fn default() -> Self {
        Self {
            masses: [0.25, 0.5, 1.0, 2.0].map(|m| C::new(m, 0.0)).to_vec(),
            h: vec![1e-2, 5e-3, 2.5e-3, 1.25e-3],
            times: vec![0.5, 1.0, 1.5],
            b: 0.0,
            r_fraction: 0.5,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyConfig {
    pub functions: usize,
    pub points: usize,
    pub factor_threshold: f64,
    pub k0_step: f64,
    pub k0_threshold: f64,
    pub massless_threshold: f64,
    /// Accepted window for |2E − I₀| at H over the same gap at H/2.
    pub halving_window: [f64; 2],
    pub bridge_h: f64,
    pub bridge_threshold: f64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            functions: 20,
            points: 10,
            factor_threshold: 1e-8,
            k0_step: 1e-5,
            k0_threshold: 1e-5,
            massless_threshold: 1e-12,
            halving_window: [1.7, 2.3],
            bridge_h: 1e-3,
            bridge_threshold: 5e-3,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub format: Option<Format>,
    pub out: Option<PathBuf>,
    pub gate: Option<f64>,
    pub quadrature: QuadratureSpec,
    pub ode: OdeSpec,
    pub kernel: KernelConfig,
    pub kg: KgConfig,
    pub dirac: DiracConfig,
    pub fundsol: FundsolConfig,
    pub limit: LimitConfig,
    pub verify: VerifyConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: DEFAULT_SEED,
            format: None,
            out: None,
            gate: None,
            quadrature: QuadratureSpec::default(),
            ode: OdeSpec::default(),
            kernel: KernelConfig::default(),
            kg: KgConfig::default(),
            dirac: DiracConfig::default(),
            fundsol: FundsolConfig::default(),
            limit: LimitConfig::default(),
            verify: VerifyConfig::default(),
        }
    }
}

/// Values given on the command line; each one wins over the file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub format: Option<Format>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub gate: Option<f64>,
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::config(format!("{}: {e}", path.display())))
    }

    pub fn load(path: Option<&Path>, overrides: &Overrides) -> Result<Self, CliError> {
        let mut cfg = match path {
            Some(p) => Self::from_file(p)?,
            None => Self::default(),
        };
        if let Some(f) = overrides.format {
            cfg.format = Some(f);
        }
        if let Some(o) = &overrides.out {
            cfg.out = Some(o.clone());
        }
        if let Some(s) = overrides.seed {
            cfg.seed = s;
        }
        if let Some(g) = overrides.gate {
            cfg.gate = Some(g);
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.quadrature.validate().map_err(|e| CliError::config(format!("quadrature: {e}")))?;
        self.ode.validate().map_err(|e| CliError::config(format!("ode: {e}")))?;
        if let Some(g) = self.gate {
            if !(g > 0.0 && g.is_finite()) {
                return Err(CliError::config("gate must be positive and finite"));
            }
        }
        let k = &self.kernel;
        check_h(k.h, "kernel.h", false)?;
        k.r.check("kernel.r")?;
        k.t.check("kernel.t")?;
        if k.r.start < 0.0 || k.r.stop < 0.0 {
            return Err(CliError::config("kernel.r: radii must be nonnegative"));
        }
        check_h(self.kg.h, "kg.h", true)?;
        check_times(&self.kg.times, "kg.times")?;
        check_h(self.dirac.h, "dirac.h", true)?;
        check_times(&self.dirac.times, "dirac.times")?;
        check_h(self.fundsol.h, "fundsol.h", false)?;
        self.fundsol.test.check()?;
        if self.fundsol.times.iter().any(|&t| !t.is_finite() || t == self.fundsol.t0) {
            return Err(CliError::config("fundsol.times must be finite and differ from t0"));
        }
        let l = &self.limit;
        if l.h.is_empty() || l.h.iter().any(|&h| !(h > 0.0)) || l.masses.is_empty() {
            return Err(CliError::config("limit: need positive h values and at least one mass"));
        }
        if l.times.iter().any(|&t| !(t > l.b)) || !(0.0..=1.0).contains(&l.r_fraction) {
            return Err(CliError::config("limit: times must exceed b and r_fraction lie in [0, 1]"));
        }
        let v = &self.verify;
        if v.functions == 0 || v.points == 0 || !(v.k0_step > 0.0) || !(v.bridge_h > 0.0) {
            return Err(CliError::config("verify: counts and steps must be positive"));
        }
        Ok(())
    }

    /// SHA-256 of the effective configuration with the output path left out,
    /// so reruns into different files carry the same hash.
    pub fn hash(&self, command: &str) -> String {
        let mut view = self.clone();
        view.out = None;
        let json = serde_json::to_string(&view).expect("config serializes");
        let mut hasher = Sha256::new();
        hasher.update(command.as_bytes());
        hasher.update([0u8]);
        hasher.update(json.as_bytes());
        hasher.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }
}

fn check_h(h: f64, what: &str, allow_zero: bool) -> Result<(), CliError> {
    let ok = h.is_finite() && (h > 0.0 || (allow_zero && h == 0.0));
    if ok {
        Ok(())
    } else {
        Err(CliError::config(format!("{what} must be {}", if allow_zero { "nonnegative" } else { "positive" })))
    }
}

fn check_times(ts: &[f64], what: &str) -> Result<(), CliError> {
    if ts.is_empty() || ts.iter().any(|&t| !(t >= 0.0 && t.is_finite())) {
        return Err(CliError::config(format!("{what}: need at least one finite time >= 0")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_values_and_flags_merge() {
        let cfg: RunConfig = toml::from_str("seed = 7\ngate = 1e-3\n[kernel]\nh = 2\nm = [1, 0.5]\n").unwrap();
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.kernel.h, 2.0);
        assert_eq!(cfg.kernel.m, C::new(1.0, 0.5));
        assert_eq!(cfg.kernel.t, KernelConfig::default().t);

        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        fs::write(&path, "seed = 7\ngate = 1e-3\n").unwrap();
        let o = Overrides { seed: Some(9), ..Default::default() };
        let merged = RunConfig::load(Some(&path), &o).unwrap();
        assert_eq!(merged.seed, 9);
        assert_eq!(merged.gate, Some(1e-3));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(toml::from_str::<RunConfig>("[kernel]\nhh = 1\n").is_err());
    }

    #[test]
    fn test_function_tags() {
        let cfg: RunConfig = toml::from_str(
            "[fundsol.test]\nkind = \"gaussian\"\namplitude = [[1,0],[0,0],[0,0],[0,0]]\ncenter = 0\nwidth = 0.2\nwavenumber = 3\n",
        )
        .unwrap();
        assert!(matches!(cfg.fundsol.test, TestFunction::Gaussian(g) if g.wavenumber == 3.0));
    }

    #[test]
    fn hash_ignores_output_path() {
        let a = RunConfig::default();
        let b = RunConfig { out: Some("x.csv".into()), ..RunConfig::default() };
        assert_eq!(a.hash("kernel"), b.hash("kernel"));
        assert_ne!(a.hash("kernel"), a.hash("verify"));
        let c = RunConfig { seed: 1, ..RunConfig::default() };
        assert_ne!(a.hash("kernel"), c.hash("kernel"));
    }

    #[test]
    fn grids() {
        assert_eq!(Grid::new(0.0, 1.0, 3).values(), vec![0.0, 0.5, 1.0]);
        assert_eq!(Grid::new(0.2, 1.0, 1).values(), vec![0.2]);
    }
}
