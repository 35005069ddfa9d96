//! Experiment description files.
//!
//! TOML is the native format; a file ending in `.json` is read as JSON with
//! the same schema. A minimal TOML config:
//!
//! ```toml
//! kind = "evolve"
//! k0 = 1.0
//! geometry = { a = 4.0, b = 2.0 }
//!
//! [[atoms]]
//! x = 2.0
//! y = 1.0
//! z = 0.0
//!
//! [[initial_state]]
//! atom = 0
//! m_j = -1
//! re = 1.0
//!
//! [time]
//! t_max = 10.0
//! steps = 2001
//! ```

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::dynamics::{uniform_grid, InitialState};
use crate::error::{Result, WgqedError};
use crate::geometry::{AtomConfig, WaveguideGeometry};
use crate::green::{AtomPair, TruncationPolicy};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Evolve,
    SweepDz,
    SweepPosition,
    ModesReport,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Excitation {
    pub atom: usize,
    pub m_j: i32,
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeGrid {
    pub t_max: f64,
    /// Number of samples including `t = 0`.
    pub steps: usize,
}

impl Default for TimeGrid {
    fn default() -> Self {
        Self {
            t_max: 10.0,
            steps: 2001,
        }
    }
}

impl TimeGrid {
    pub fn times(&self) -> Result<Vec<f64>> {
        uniform_grid(self.t_max, self.steps)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVariable {
    Dz,
    X,
    Y,
}

impl SweepVariable {
    pub fn label(&self) -> &'static str {
        match self {
            SweepVariable::Dz => "dz",
            SweepVariable::X => "x",
            SweepVariable::Y => "y",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub variable: SweepVariable,
    /// Atom whose coordinate is varied; `dz` is measured from atom 0.
    pub atom: usize,
    pub start: f64,
    pub stop: f64,
    pub steps: usize,
}

impl SweepSpec {
    pub fn values(&self) -> Vec<f64> {
        if self.steps == 1 {
            return vec![self.start];
        }
        let h = (self.stop - self.start) / (self.steps - 1) as f64;
        (0..self.steps).map(|k| self.start + h * k as f64).collect()
    }
}

fn default_k0() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    #[serde(default = "default_k0")]
    pub k0: f64,
    pub geometry: WaveguideGeometry,
    pub atoms: Vec<AtomConfig>,
    /// Empty means full population in `m_J = -1` of atom 0.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub initial_state: Vec<Excitation>,
    #[serde(default)]
    pub time: TimeGrid,
    #[serde(default)]
    pub truncation: TruncationPolicy,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSpec>,
}

impl ExperimentConfig {
    pub fn evolve(geometry: WaveguideGeometry, atoms: Vec<AtomConfig>) -> Self {
        Self {
            kind: ExperimentKind::Evolve,
            k0: 1.0,
            geometry,
            atoms,
            initial_state: Vec::new(),
            time: TimeGrid::default(),
            truncation: TruncationPolicy::default(),
            sweep: None,
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| WgqedError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let cfg: Self =
            serde_json::from_str(text).map_err(|e| WgqedError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let is_json = path
            .extension()
            .is_some_and(|e| e.eq_ignore_ascii_case("json"));
        if is_json {
            Self::from_json_str(&text)
        } else {
            Self::from_toml_str(&text)
        }
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| WgqedError::Config(e.to_string()))
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    /// SHA-256 of the compact JSON form, hex encoded.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.to_json_string().as_bytes()))
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.k0.is_finite() && self.k0 > 0.0) {
            return Err(WgqedError::Config(format!(
                "k0 must be positive, got {}",
                self.k0
            )));
        }
        if self.atoms.is_empty() {
            return Err(WgqedError::Config("at least one atom is required".into()));
        }
        self.truncation.validate()?;
        self.validate_atoms(&self.atoms)?;
        self.time.times()?;
        self.initial_state()?;
        match (self.kind, &self.sweep) {
            (ExperimentKind::SweepDz | ExperimentKind::SweepPosition, None) => {
                return Err(WgqedError::Config(format!(
                    "kind {:?} needs a [sweep] section",
                    self.kind
                )));
            }
            (_, Some(sweep)) => self.validate_sweep(sweep)?,
            _ => {}
        }
        Ok(())
    }

    fn validate_sweep(&self, sweep: &SweepSpec) -> Result<()> {
        if sweep.steps == 0 || !(sweep.start.is_finite() && sweep.stop.is_finite()) {
            return Err(WgqedError::Config(
                "sweep needs finite bounds and at least one step".into(),
            ));
        }
        if sweep.steps > 1 && sweep.start == sweep.stop {
            return Err(WgqedError::Config("sweep range is empty".into()));
        }
        if sweep.atom >= self.atoms.len() {
            return Err(WgqedError::Config(format!(
                "sweep atom {} does not exist",
                sweep.atom
            )));
        }
        let expected = match self.kind {
            ExperimentKind::SweepDz => Some(SweepVariable::Dz),
            ExperimentKind::SweepPosition if sweep.variable == SweepVariable::Dz => {
                return Err(WgqedError::Config(
                    "sweep_position varies x or y; use sweep_dz for dz".into(),
                ));
            }
            _ => None,
        };
        if let Some(v) = expected {
            if sweep.variable != v {
                return Err(WgqedError::Config("sweep_dz must vary dz".into()));
            }
            if sweep.atom == 0 {
                return Err(WgqedError::Config(
                    "dz is measured from atom 0; sweep another atom".into(),
                ));
            }
        }
        // Each sweep point must itself be a valid placement.
        for v in sweep.values() {
            self.validate_atoms(&self.atoms_at(sweep, v))?;
        }
        Ok(())
    }

    fn validate_atoms(&self, atoms: &[AtomConfig]) -> Result<()> {
        for (id, atom) in atoms.iter().enumerate() {
            atom.validate(id, &self.geometry)?;
        }
        for i in 0..atoms.len() {
            for j in i + 1..atoms.len() {
                AtomPair::new(j, &atoms[j], i, &atoms[i], &self.truncation)?;
            }
        }
        Ok(())
    }

    /// Atom list with the swept coordinate set to `value`.
    pub fn atoms_at(&self, sweep: &SweepSpec, value: f64) -> Vec<AtomConfig> {
        let mut atoms = self.atoms.clone();
        let base_z = atoms[0].z;
        let target = &mut atoms[sweep.atom];
        match sweep.variable {
            SweepVariable::Dz => target.z = base_z + value,
            SweepVariable::X => target.x = value,
            SweepVariable::Y => target.y = value,
        }
        atoms
    }

    pub fn initial_state(&self) -> Result<InitialState> {
        let n = self.atoms.len();
        if self.initial_state.is_empty() {
            return InitialState::sublevel(n, 0, -1);
        }
        let parts: Vec<(usize, i32, Complex64)> = self
            .initial_state
            .iter()
            .map(|e| (e.atom, e.m_j, Complex64::new(e.re, e.im)))
            .collect();
        InitialState::from_components(n, &parts)
    }
}
