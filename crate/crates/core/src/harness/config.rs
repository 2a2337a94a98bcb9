use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::error::Error;
use crate::fields::{FieldConfig, FieldKind, Vec3};
use crate::quantum::{GridGeometry, PropagationOptions, StepperKind};

/// Environment variable that replaces `output.dir`.
pub const OUTPUT_DIR_ENV: &str = "SPINPHASE_OUTPUT_DIR";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    HomogeneousL,
    OscillatorDensities,
    SpinGradient,
    PropertySuite,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    #[serde(default)]
    pub fields: FieldsSection,
    #[serde(default)]
    pub phase_space: PhaseSpaceSection,
    #[serde(default)]
    pub analytic: AnalyticSection,
    #[serde(default)]
    pub classical: ClassicalSection,
    #[serde(default)]
    pub quantum: QuantumSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FieldsSection {
    pub kind: FieldKind,
    pub h0: f64,
    pub epsilon: f64,
    pub omega0: f64,
    pub charge_sign: f64,
}

impl Default for FieldsSection {
    fn default() -> Self {
        Self {
            kind: FieldKind::QuadrupoleB,
            h0: 0.0,
            epsilon: 0.01,
            omega0: 0.0,
            charge_sign: 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PhaseSpaceSection {
    /// Width of the initial Gaussian.
    pub d: f64,
    /// Polar and azimuthal angle of the initial spin.
    pub alpha: f64,
    pub beta: f64,
}

impl Default for PhaseSpaceSection {
    fn default() -> Self {
        Self {
            d: 10.0,
            alpha: 0.0,
            beta: 0.0,
        }
    }
}

impl PhaseSpaceSection {
    /// ½(sin α cos β, sin α sin β, cos α).
    pub fn spin0(&self) -> Vec3 {
        let (a, b) = (self.alpha, self.beta);
        Vec3::new(a.sin() * b.cos(), a.sin() * b.sin(), a.cos()) * 0.5
    }
}

/// Physical constants for the closed-form angular momentum.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnalyticSection {
    pub e: f64,
    pub m: f64,
    pub c: f64,
    pub hbar: f64,
}

impl Default for AnalyticSection {
    fn default() -> Self {
        Self {
            e: 1.0,
            m: 1.0,
            c: 1.0,
            hbar: 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ClassicalSection {
    pub n_trajectories: usize,
    pub seed: u64,
    pub dt: f64,
    pub spin_force_factor: f64,
    /// Histogram bins over [quantum.z_min, quantum.z_max].
    pub z_bins: usize,
    /// Planar radial histogram, oscillator experiment only.
    pub radial_bins: usize,
    pub radial_max: f64,
}

impl Default for ClassicalSection {
    fn default() -> Self {
        Self {
            n_trajectories: 100_000,
            seed: 1,
            dt: 0.01,
            spin_force_factor: crate::classical::EHRENFEST_SPIN_FORCE,
            z_bins: 300,
            radial_bins: 40,
            radial_max: 40.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QuantumSection {
    pub enabled: bool,
    pub n_r: usize,
    pub n_z: usize,
    pub r_max: f64,
    pub z_min: f64,
    pub z_max: f64,
    pub dt: f64,
    pub stepper: StepperKind,
    pub norm_tolerance: f64,
    pub boundary_threshold: f64,
}

impl Default for QuantumSection {
    fn default() -> Self {
        let g = GridGeometry::default();
        let p = PropagationOptions::default();
        Self {
            enabled: true,
            n_r: g.n_r,
            n_z: g.n_z,
            r_max: g.r_max,
            z_min: g.z_min,
            z_max: g.z_max,
            dt: p.dt,
            stepper: p.stepper,
            norm_tolerance: p.norm_tolerance,
            boundary_threshold: p.boundary_threshold,
        }
    }
}

impl QuantumSection {
    pub fn geometry(&self) -> GridGeometry {
        GridGeometry {
            n_r: self.n_r,
            n_z: self.n_z,
            r_max: self.r_max,
            z_min: self.z_min,
            z_max: self.z_max,
        }
    }

    pub fn options(&self) -> PropagationOptions {
        PropagationOptions {
            dt: self.dt,
            stepper: self.stepper,
            norm_tolerance: self.norm_tolerance,
            boundary_threshold: self.boundary_threshold,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub dir: PathBuf,
    /// Explicit output times; when empty, 0, t_step, …, t_end.
    pub times: Vec<f64>,
    pub t_end: f64,
    pub t_step: f64,
    /// Relative s_z deviation that ends the agreement horizon.
    pub threshold: f64,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("out"),
            times: Vec::new(),
            t_end: 40.0,
            t_step: 1.0,
            threshold: 0.05,
        }
    }
}

impl OutputSection {
    pub fn time_grid(&self) -> Vec<f64> {
        if !self.times.is_empty() {
            return self.times.clone();
        }
        let n = (self.t_end / self.t_step + 1e-9).floor() as usize;
        (0..=n).map(|i| i as f64 * self.t_step).collect()
    }
}

fn bad(key: &str, reason: impl std::fmt::Display) -> HarnessError {
    HarnessError::Config(format!("`{key}`: {reason}"))
}

fn positive(key: &str, v: f64) -> Result<(), HarnessError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(bad(key, format!("must be positive and finite (got {v})")))
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, HarnessError> {
        let cfg: Self = toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Read a config file. `SPINPHASE_OUTPUT_DIR`, when set, replaces
    /// `output.dir`.
    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = Self::from_toml(&text)?;
        if let Some(dir) = std::env::var_os(OUTPUT_DIR_ENV) {
            cfg.output.dir = PathBuf::from(dir);
        }
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always representable")
    }

    pub fn field(&self) -> Result<FieldConfig, HarnessError> {
        let f = &self.fields;
        FieldConfig::new(f.kind, f.h0, f.epsilon, f.omega0, f.charge_sign).map_err(|e| match e {
            Error::InvalidParameter { name, reason } => bad(&format!("fields.{name}"), reason),
            other => HarnessError::Config(other.to_string()),
        })
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        self.field()?;
        positive("phase_space.d", self.phase_space.d)?;
        for (k, v) in [("phase_space.alpha", self.phase_space.alpha), ("phase_space.beta", self.phase_space.beta)] {
            if !v.is_finite() {
                return Err(bad(k, "must be finite"));
            }
        }
        let a = &self.analytic;
        for (k, v) in [("analytic.e", a.e), ("analytic.m", a.m), ("analytic.c", a.c), ("analytic.hbar", a.hbar)] {
            positive(k, v)?;
        }
        let c = &self.classical;
        if c.n_trajectories == 0 {
            return Err(bad("classical.n_trajectories", "must be at least 1"));
        }
        positive("classical.dt", c.dt)?;
        if !c.spin_force_factor.is_finite() {
            return Err(bad("classical.spin_force_factor", "must be finite"));
        }
        if c.z_bins == 0 {
            return Err(bad("classical.z_bins", "must be at least 1"));
        }
        if c.radial_bins == 0 {
            return Err(bad("classical.radial_bins", "must be at least 1"));
        }
        positive("classical.radial_max", c.radial_max)?;
        let q = &self.quantum;
        if q.n_r < 8 {
            return Err(bad("quantum.n_r", "must be at least 8"));
        }
        if q.n_z < 8 {
            return Err(bad("quantum.n_z", "must be at least 8"));
        }
        positive("quantum.r_max", q.r_max)?;
        if !(q.z_min.is_finite() && q.z_max.is_finite() && q.z_max > q.z_min) {
            return Err(bad("quantum.z_max", "must be finite and exceed quantum.z_min"));
        }
        positive("quantum.dt", q.dt)?;
        positive("quantum.norm_tolerance", q.norm_tolerance)?;
        positive("quantum.boundary_threshold", q.boundary_threshold)?;
        let o = &self.output;
        positive("output.threshold", o.threshold)?;
        if o.times.is_empty() {
            positive("output.t_step", o.t_step)?;
            if !(o.t_end.is_finite() && o.t_end >= 0.0) {
                return Err(bad("output.t_end", "must be finite and non-negative"));
            }
        } else if o.times.iter().any(|t| !t.is_finite() || *t < 0.0) || o.times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(bad("output.times", "must be non-negative and strictly increasing"));
        }
        match self.experiment {
            Experiment::HomogeneousL if !matches!(self.fields.kind, FieldKind::HomogeneousB) => {
                Err(bad("fields.kind", "homogeneous_l needs kind = \"homogeneous_b\""))
            }
            Experiment::HomogeneousL if self.fields.h0 == 0.0 => Err(bad("fields.h0", "must be non-zero")),
            Experiment::OscillatorDensities if self.fields.kind != FieldKind::HarmonicPlusB => {
                Err(bad("fields.kind", "oscillator_densities needs kind = \"harmonic_plus_b\""))
            }
            Experiment::OscillatorDensities => {
                let ground = 1.0 / self.fields.omega0.sqrt();
                if ((self.phase_space.d - ground) / ground).abs() > 1e-9 {
                    Err(bad(
                        "phase_space.d",
                        format!("must equal 1/sqrt(fields.omega0) = {ground} for the trap ground state"),
                    ))
                } else {
                    Ok(())
                }
            }
            Experiment::SpinGradient if self.fields.kind != FieldKind::QuadrupoleB => {
                Err(bad("fields.kind", "spin_gradient needs kind = \"quadrupole_b\""))
            }
            Experiment::SpinGradient if self.phase_space.alpha != 0.0 && q.enabled => Err(bad(
                "phase_space.alpha",
                "the cylindrical solver supports only alpha = 0 (set quantum.enabled = false for classical-only runs)",
            )),
            _ => Ok(()),
        }
    }
}
