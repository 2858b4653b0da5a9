use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::ValueEnum;
use dnls_ist::direct::DirectConfig;
use dnls_ist::evolution::PipelineConfig;
use dnls_ist::inverse::InverseConfig;
use dnls_ist::{Potential, SpatialGrid};
use serde::Serialize;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    /// 0.3 exp(-x^2) on L = 16, N = 1024
    GaussianSmall,
    /// 0.6 exp(-x^2) on L = 16, N = 1024
    GaussianMedium,
    /// q = 0 on L = 16, N = 1024
    Zero,
}

impl Preset {
    pub fn amplitude(self) -> f64 {
        match self {
            Preset::GaussianSmall => 0.3,
            Preset::GaussianMedium => 0.6,
            Preset::Zero => 0.0,
        }
    }
}

/// `L:N` for a spatial grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridSpec {
    #[serde(rename = "L")]
    pub half_width: f64,
    #[serde(rename = "N")]
    pub count: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            half_width: 16.0,
            count: 1024,
        }
    }
}

impl FromStr for GridSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (l, n) = s.split_once(':').ok_or("expected L:N")?;
        let half_width: f64 = l.parse().map_err(|e| format!("L: {e}"))?;
        let count: usize = n.parse().map_err(|e| format!("N: {e}"))?;
        SpatialGrid::new(half_width, count).map_err(|e| e.to_string())?;
        Ok(Self { half_width, count })
    }
}

/// `lo:hi:n`, inclusive of both ends.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Samples {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl Samples {
    pub fn points(&self) -> Vec<f64> {
        if self.n == 1 {
            return vec![self.lo];
        }
        let h = (self.hi - self.lo) / (self.n - 1) as f64;
        (0..self.n).map(|k| self.lo + h * k as f64).collect()
    }
}

impl FromStr for Samples {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let [lo, hi, n] = parts[..] else {
            return Err("expected lo:hi:n".into());
        };
        let lo: f64 = lo.parse().map_err(|e| format!("lo: {e}"))?;
        let hi: f64 = hi.parse().map_err(|e| format!("hi: {e}"))?;
        let n: usize = n.parse().map_err(|e| format!("n: {e}"))?;
        if n == 0 || !lo.is_finite() || !hi.is_finite() || hi < lo {
            return Err("need finite lo <= hi and n >= 1".into());
        }
        Ok(Self { lo, hi, n })
    }
}

/// A single `key=value` tolerance override.
#[derive(Debug, Clone, PartialEq)]
pub struct TolOverride(pub String, pub f64);

pub const TOL_KEYS: [&str; 5] = ["ode", "krylov", "det", "roundtrip", "truncation"];

impl FromStr for TolOverride {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (k, v) = s.split_once('=').ok_or("expected key=value")?;
        if !TOL_KEYS.contains(&k) {
            return Err(format!("unknown tolerance {k:?}; known: {}", TOL_KEYS.join(", ")));
        }
        let v: f64 = v.parse().map_err(|e| format!("{k}: {e}"))?;
        if !(v > 0.0 && v.is_finite()) {
            return Err(format!("{k} must be positive"));
        }
        Ok(Self(k.into(), v))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Tolerances {
    pub ode: f64,
    pub krylov: f64,
    pub det: f64,
    pub roundtrip: f64,
    pub truncation: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        let d = DirectConfig::default();
        Self {
            ode: d.jost.tol,
            krylov: InverseConfig::default().tol,
            det: 1e-6,
            roundtrip: 1e-3,
            truncation: d.truncation_tol,
        }
    }
}

impl Tolerances {
    pub fn with_overrides(overrides: &[TolOverride]) -> Self {
        let mut t = Self::default();
        for TolOverride(k, v) in overrides {
            let slot = match k.as_str() {
                "ode" => &mut t.ode,
                "krylov" => &mut t.krylov,
                "det" => &mut t.det,
                "roundtrip" => &mut t.roundtrip,
                _ => &mut t.truncation,
            };
            *slot = *v;
        }
        t
    }

    pub fn as_map(&self) -> BTreeMap<String, f64> {
        BTreeMap::from([
            ("ode".into(), self.ode),
            ("krylov".into(), self.krylov),
            ("det".into(), self.det),
            ("roundtrip".into(), self.roundtrip),
            ("truncation".into(), self.truncation),
        ])
    }

    pub fn pipeline(&self) -> PipelineConfig {
        let mut p = PipelineConfig::default();
        p.direct.jost.tol = self.ode;
        p.direct.truncation_tol = self.truncation;
        p.inverse.tol = self.krylov;
        p
    }
}

/// Everything a run depends on besides its input file.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub grid: GridSpec,
    pub tolerances: Tolerances,
    pub preset: Option<Preset>,
    pub input: Option<PathBuf>,
    pub output: PathBuf,
    pub threads: Option<usize>,
}

impl RunConfig {
    /// The initial potential: from `--input` if given, otherwise the preset
    /// (default `gaussian-small`) on the configured grid.
    pub fn potential(&self) -> Result<Potential, CliError> {
        if let Some(path) = &self.input {
            return Ok(dnls_ist::io::read_potential(path)?);
        }
        let grid = SpatialGrid::new(self.grid.half_width, self.grid.count)?;
        let preset = self.preset.unwrap_or(Preset::GaussianSmall);
        Ok(Potential::gaussian(grid, preset.amplitude()))
    }

    pub fn input_path(&self) -> Result<&Path, CliError> {
        self.input
            .as_deref()
            .ok_or_else(|| CliError::Usage("this command needs --input".into()))
    }

    pub fn out(&self, name: &str) -> PathBuf {
        self.output.join(name)
    }
}
