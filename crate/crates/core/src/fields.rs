//! Electromagnetic field families, their potentials and gauges.
//!
//! Every family is a closed-form field with an exact analytic gradient. The
//! returned `A` and `H` are field *shapes*; the strength with which they act
//! on the charge is [`FieldConfig::coupling`]. For the quadrupole family the
//! gradient strength is absorbed into `epsilon`, so `H = (-x, -y, 2z)`.

use std::fmt;
use std::sync::Arc;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{require_positive, Error, Result};

pub type Vec3 = Vector3<f64>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldKind {
    Free,
    HomogeneousB,
    HarmonicPlusB,
    QuadrupoleB,
}

/// Scalar potential, vector potential and magnetic field at a point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Potentials {
    pub phi: f64,
    pub a: Vec3,
    pub h: Vec3,
}

/// A gauge function Θ(r). Only functions that can report their gradient
/// are accepted by [`FieldConfig::gauge_transform`].
pub trait GaugeFunction: Send + Sync {
    fn value(&self, r: &Vec3) -> f64;

    fn gradient(&self, r: &Vec3) -> Option<Vec3>;
}

/// Θ = c.
#[derive(Clone, Copy, Debug)]
pub struct ConstantGauge(pub f64);

impl GaugeFunction for ConstantGauge {
    fn value(&self, _r: &Vec3) -> f64 {
        self.0
    }

    fn gradient(&self, _r: &Vec3) -> Option<Vec3> {
        Some(Vec3::zeros())
    }
}

/// Θ = k·r.
#[derive(Clone, Copy, Debug)]
pub struct LinearGauge(pub Vec3);

impl GaugeFunction for LinearGauge {
    fn value(&self, r: &Vec3) -> f64 {
        self.0.dot(r)
    }

    fn gradient(&self, _r: &Vec3) -> Option<Vec3> {
        Some(self.0)
    }
}

/// Θ = c·x·y. With c = h0/2 this maps the symmetric gauge of a homogeneous
/// field onto the Landau gauge A = (0, h0 x, 0).
#[derive(Clone, Copy, Debug)]
pub struct BilinearGauge(pub f64);

impl GaugeFunction for BilinearGauge {
    fn value(&self, r: &Vec3) -> f64 {
        self.0 * r.x * r.y
    }

    fn gradient(&self, r: &Vec3) -> Option<Vec3> {
        Some(Vec3::new(self.0 * r.y, self.0 * r.x, 0.0))
    }
}

/// A gauge known only through its values. It is rejected by
/// [`FieldConfig::gauge_transform`].
pub struct SampledGauge<F>(pub F);

impl<F: Fn(&Vec3) -> f64 + Send + Sync> GaugeFunction for SampledGauge<F> {
    fn value(&self, r: &Vec3) -> f64 {
        (self.0)(r)
    }

    fn gradient(&self, _r: &Vec3) -> Option<Vec3> {
        None
    }
}

/// Simulation units: ħ = m = c = 1.
///
/// The simulations take the dimensionless couplings directly. The helpers
/// convert physical inputs into them (κ = mc/ħ is the inverse Compton
/// length used to rescale lengths and times).
#[derive(Clone, Copy, Debug)]
pub struct ScalingConvention;

impl ScalingConvention {
    pub const HBAR: f64 = 1.0;
    pub const MASS: f64 = 1.0;
    pub const LIGHT_SPEED: f64 = 1.0;

    pub fn kappa(mass: f64, c: f64, hbar: f64) -> f64 {
        mass * c / hbar
    }

    /// ε = e ħ² h1 / (m³ c⁴).
    pub fn gradient_coupling(e: f64, hbar: f64, h1: f64, mass: f64, c: f64) -> f64 {
        e * hbar * hbar * h1 / (mass.powi(3) * c.powi(4))
    }

    /// ω = e H0 ħ / (m² c³).
    pub fn cyclotron(e: f64, h0: f64, hbar: f64, mass: f64, c: f64) -> f64 {
        e * h0 * hbar / (mass * mass * c.powi(3))
    }

    /// ω0 ħ / (m c²).
    pub fn oscillator(omega0: f64, hbar: f64, mass: f64, c: f64) -> f64 {
        omega0 * hbar / (mass * c * c)
    }
}

#[derive(Clone)]
pub struct FieldConfig {
    pub kind: FieldKind,
    pub h0: f64,
    pub epsilon: f64,
    pub omega0: f64,
    pub charge_sign: f64,
    gauges: Vec<Arc<dyn GaugeFunction>>,
}

impl fmt::Debug for FieldConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FieldConfig")
            .field("kind", &self.kind)
            .field("h0", &self.h0)
            .field("epsilon", &self.epsilon)
            .field("omega0", &self.omega0)
            .field("charge_sign", &self.charge_sign)
            .field("gauge_terms", &self.gauges.len())
            .finish()
    }
}

impl FieldConfig {
    pub fn new(kind: FieldKind, h0: f64, epsilon: f64, omega0: f64, charge_sign: f64) -> Result<Self> {
        for (name, v) in [("h0", h0), ("epsilon", epsilon), ("omega0", omega0)] {
            if !v.is_finite() {
                return Err(crate::error::invalid(name, format!("must be finite (got {v})")));
            }
        }
        if charge_sign != 1.0 && charge_sign != -1.0 {
            return Err(crate::error::invalid(
                "charge_sign",
                format!("must be +1 or -1 (got {charge_sign})"),
            ));
        }
        if kind == FieldKind::HarmonicPlusB {
            require_positive("omega0", omega0)?;
        }
        Ok(Self {
            kind,
            h0,
            epsilon,
            omega0,
            charge_sign,
            gauges: Vec::new(),
        })
    }

    pub fn free() -> Self {
        Self::new(FieldKind::Free, 0.0, 0.0, 0.0, 1.0).expect("valid")
    }

    pub fn homogeneous(h0: f64) -> Self {
        Self::new(FieldKind::HomogeneousB, h0, 0.0, 0.0, 1.0).expect("valid")
    }

    pub fn quadrupole(epsilon: f64) -> Self {
        Self::new(FieldKind::QuadrupoleB, 0.0, epsilon, 0.0, 1.0).expect("valid")
    }

    pub fn harmonic_plus_b(omega0: f64, h0: f64) -> Result<Self> {
        Self::new(FieldKind::HarmonicPlusB, h0, 0.0, omega0, 1.0)
    }

    /// The oscillator example in terms of q = ω/ω0 and d = 1/√ω0.
    pub fn oscillator_example(q: f64, d: f64) -> Result<Self> {
        require_positive("d", d)?;
        let omega0 = 1.0 / (d * d);
        Self::harmonic_plus_b(omega0, q * omega0)
    }

    pub fn with_charge_sign(mut self, sign: f64) -> Self {
        self.charge_sign = sign;
        self
    }

    /// Factor multiplying `v × H`, the spin terms and `A` in the momentum
    /// shift: the charge sign, times ε for the quadrupole family.
    pub fn coupling(&self) -> f64 {
        match self.kind {
            FieldKind::QuadrupoleB => self.charge_sign * self.epsilon,
            _ => self.charge_sign,
        }
    }

    pub fn has_gauge_terms(&self) -> bool {
        !self.gauges.is_empty()
    }

    pub fn scalar_potential(&self, r: &Vec3) -> f64 {
        match self.kind {
            FieldKind::HarmonicPlusB => 0.5 * self.omega0 * self.omega0 * r.norm_squared(),
            _ => 0.0,
        }
    }

    pub fn potential_gradient(&self, r: &Vec3) -> Vec3 {
        match self.kind {
            FieldKind::HarmonicPlusB => r * (self.omega0 * self.omega0),
            _ => Vec3::zeros(),
        }
    }

    /// Vector potential of the field family itself, without gauge terms.
    pub fn base_vector_potential(&self, r: &Vec3) -> Vec3 {
        match self.kind {
            FieldKind::Free => Vec3::zeros(),
            FieldKind::HomogeneousB | FieldKind::HarmonicPlusB => {
                Vec3::new(-r.y, r.x, 0.0) * (0.5 * self.h0)
            }
            FieldKind::QuadrupoleB => Vec3::new(-r.y, r.x, 0.0) * r.z,
        }
    }

    pub fn vector_potential(&self, r: &Vec3) -> Vec3 {
        let mut a = self.base_vector_potential(r);
        for g in &self.gauges {
            // gradient availability is checked when the gauge is attached
            a += g.gradient(r).unwrap_or_else(Vec3::zeros);
        }
        a
    }

    pub fn magnetic_field(&self, r: &Vec3) -> Vec3 {
        match self.kind {
            FieldKind::Free => Vec3::zeros(),
            FieldKind::HomogeneousB | FieldKind::HarmonicPlusB => Vec3::new(0.0, 0.0, self.h0),
            FieldKind::QuadrupoleB => Vec3::new(-r.x, -r.y, 2.0 * r.z),
        }
    }

    pub fn evaluate_potentials(&self, r: &Vec3) -> Potentials {
        Potentials {
            phi: self.scalar_potential(r),
            a: self.vector_potential(r),
            h: self.magnetic_field(r),
        }
    }

    /// ∇_H (s·H): the gradient acts on the field only, `s` is held fixed.
    pub fn spin_gradient_force(&self, s: &Vec3, _r: &Vec3) -> Vec3 {
        match self.kind {
            FieldKind::QuadrupoleB => Vec3::new(-s.x, -s.y, 2.0 * s.z),
            _ => Vec3::zeros(),
        }
    }

    /// Replace `A` by `A + ∇Θ`. The magnetic field is untouched; the
    /// wavefunction picks up the phase returned by [`Self::gauge_phase`] and
    /// canonical momenta shift by [`Self::compensating_momentum_shift`].
    pub fn gauge_transform(&self, theta: Arc<dyn GaugeFunction>) -> Result<Self> {
        let probes = [
            Vec3::zeros(),
            Vec3::new(1.0, -0.5, 0.25),
            Vec3::new(-2.0, 3.0, -1.0),
        ];
        if probes.iter().any(|p| theta.gradient(p).is_none()) {
            return Err(Error::GaugeWithoutGradient);
        }
        let mut out = self.clone();
        out.gauges.push(theta);
        Ok(out)
    }

    /// Phase φ(r) such that F → F·e^{iφ} under the attached gauge terms.
    pub fn gauge_phase(&self, r: &Vec3) -> f64 {
        let k = self.coupling();
        self.gauges.iter().map(|g| k * g.value(r)).sum()
    }

    /// Shift P → P + δP of the canonical momentum induced by the gauge terms.
    pub fn compensating_momentum_shift(&self, r: &Vec3) -> Vec3 {
        let k = self.coupling();
        let mut shift = Vec3::zeros();
        for g in &self.gauges {
            shift += g.gradient(r).unwrap_or_else(Vec3::zeros) * k;
        }
        shift
    }

    /// Momentum shift applied at field turn-on: the kinetic momentum right
    /// after turn-on is `p_before - turn_on_shift(r)`. Gauge terms cancel
    /// against the phase they imprint on the initial state, so only the base
    /// potential enters.
    pub fn turn_on_shift(&self, r: &Vec3) -> Vec3 {
        self.base_vector_potential(r) * self.coupling()
    }
}
