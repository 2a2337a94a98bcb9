use std::f64::consts::PI;

use rand_distr::{Distribution, Gamma, StandardNormal};

use super::{PhaseDensity, SampleRng};
use crate::error::{require_positive, Error, Result};
use crate::fields::Vec3;

/// Gaussian phase-space density
/// ρ₀(r, p) = (a³b³π³)⁻¹ exp(−|r−r_c|²/a² − |p−p_c|²/b²).
///
/// Per axis Δx = a/√2 and Δp = b/√2, so the uncertainty bound Δx·Δp ≥ ħ/2
/// is a·b ≥ 1 in simulation units. The pure state of width d has a = d,
/// b = 1/d.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GaussianPhaseState {
    pub a: f64,
    pub b: f64,
    pub center_r: Vec3,
    pub center_p: Vec3,
}

impl GaussianPhaseState {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        require_positive("a", a)?;
        require_positive("b", b)?;
        // allow rounding in a·(1/a)
        if a * b < 1.0 - 1e-12 {
            return Err(Error::Inadmissible { product: a * b });
        }
        Ok(Self {
            a,
            b,
            center_r: Vec3::zeros(),
            center_p: Vec3::zeros(),
        })
    }

    /// The minimum-uncertainty state |f(r)|²|g(p)|² of a Gaussian
    /// wavefunction with |f|² ∝ exp(−r²/d²).
    pub fn pure(d: f64) -> Result<Self> {
        require_positive("d", d)?;
        Self::new(d, 1.0 / d)
    }

    pub fn centered_at(mut self, r: Vec3, p: Vec3) -> Self {
        self.center_r = r;
        self.center_p = p;
        self
    }

    pub fn is_centered(&self) -> bool {
        self.center_r == Vec3::zeros() && self.center_p == Vec3::zeros()
    }

    pub fn normalization(&self) -> f64 {
        1.0 / ((self.a * self.b).powi(3) * PI.powi(3))
    }

    pub fn uncertainty_product(&self) -> f64 {
        self.a * self.b / 2.0
    }

    pub fn density(&self, r: &Vec3, p: &Vec3) -> f64 {
        let dr = r - self.center_r;
        let dp = p - self.center_p;
        self.normalization()
            * (-dr.norm_squared() / (self.a * self.a) - dp.norm_squared() / (self.b * self.b)).exp()
    }

    fn draw_plain(&self, rng: &mut SampleRng) -> (Vec3, Vec3) {
        let sr = self.a / 2f64.sqrt();
        let sp = self.b / 2f64.sqrt();
        let mut g = || -> f64 { StandardNormal.sample(rng) };
        let r = Vec3::new(g(), g(), g()) * sr + self.center_r;
        let p = Vec3::new(g(), g(), g()) * sp + self.center_p;
        (r, p)
    }
}

impl PhaseDensity for GaussianPhaseState {
    fn value(&self, r: &Vec3, p: &Vec3) -> f64 {
        self.density(r, p)
    }

    fn draw(&self, rng: &mut SampleRng) -> (Vec3, Vec3, f64) {
        let (r, p) = self.draw_plain(rng);
        (r, p, 1.0)
    }

    fn abs_mass_bound(&self) -> f64 {
        1.0
    }
}

/// ⟨(r×p)²⟩ over a centered Gaussian state: (3/2)a²b².
pub fn l2_moment(state: &GaussianPhaseState) -> Result<f64> {
    if !state.is_centered() {
        return Err(Error::NotCentered);
    }
    Ok(1.5 * state.a * state.a * state.b * state.b)
}

/// ∫ r×p ρ₀ restricted to one sense of rotation about ẑ: momentum
/// components taken relative to r̂ with p_φ > 0. Equals (ab/4) ẑ.
pub fn half_space_angular_momentum(state: &GaussianPhaseState) -> Result<Vec3> {
    if !state.is_centered() {
        return Err(Error::NotCentered);
    }
    Ok(Vec3::new(0.0, 0.0, state.a * state.b / 4.0))
}

/// ρ = ρ₀ + ½(∇_r × ∇_p)·(s ρ₀).
///
/// For a Gaussian base the correction is ρ₀·(2/(a²b²)) s·(r×p), which gives
/// ⟨r×p⟩ = s, leaves ⟨(r×p)²⟩ unchanged and integrates to zero. The density
/// is negative where s·(r×p) < −a²b²/2.
#[derive(Clone, Copy, Debug)]
pub struct SpinAugmentedDensity {
    pub base: GaussianPhaseState,
    pub spin: Vec3,
}

impl SpinAugmentedDensity {
    pub fn new(base: GaussianPhaseState, spin: Vec3) -> Self {
        Self { base, spin }
    }

    fn coefficient(&self) -> f64 {
        2.0 / (self.base.a * self.base.a * self.base.b * self.base.b)
    }

    fn factor(&self, r: &Vec3, p: &Vec3) -> f64 {
        let l = (r - self.base.center_r).cross(&(p - self.base.center_p));
        1.0 + self.coefficient() * self.spin.dot(&l)
    }

    /// Mixture weight of the |r||p| envelope component relative to ρ₀.
    fn envelope_weight(&self) -> f64 {
        8.0 * self.spin.norm() / (PI * self.base.a * self.base.b)
    }

    /// Draw r with density ∝ |r| ρ₀(r): r²/a² ~ Gamma(2, 1), isotropic.
    fn draw_weighted_radius(width: f64, rng: &mut SampleRng) -> Vec3 {
        let u: f64 = Gamma::new(2.0, 1.0).expect("valid gamma").sample(rng);
        let mut dir = Vec3::new(
            StandardNormal.sample(rng),
            StandardNormal.sample(rng),
            StandardNormal.sample(rng),
        );
        while dir.norm_squared() == 0.0 {
            dir = Vec3::new(
                StandardNormal.sample(rng),
                StandardNormal.sample(rng),
                StandardNormal.sample(rng),
            );
        }
        dir.normalize() * (width * u.sqrt())
    }
}

impl PhaseDensity for SpinAugmentedDensity {
    fn value(&self, r: &Vec3, p: &Vec3) -> f64 {
        self.base.density(r, p) * self.factor(r, p)
    }

    /// Rejection from the envelope ρ₀(1 + c|s||r||p|) ≥ |ρ|, sampled as a
    /// two-component mixture.
    fn draw(&self, rng: &mut SampleRng) -> (Vec3, Vec3, f64) {
        use rand::Rng;
        let c = self.coefficient() * self.spin.norm();
        let w = self.envelope_weight();
        loop {
            let (r, p) = if rng.gen::<f64>() * (1.0 + w) < 1.0 {
                self.base.draw_plain(rng)
            } else {
                (
                    Self::draw_weighted_radius(self.base.a, rng) + self.base.center_r,
                    Self::draw_weighted_radius(self.base.b, rng) + self.base.center_p,
                )
            };
            let dr = r - self.base.center_r;
            let dp = p - self.base.center_p;
            let f = self.factor(&r, &p);
            let envelope = 1.0 + c * dr.norm() * dp.norm();
            if rng.gen::<f64>() * envelope < f.abs() {
                return (r, p, f.signum());
            }
        }
    }

    fn abs_mass_bound(&self) -> f64 {
        1.0 + self.envelope_weight()
    }

    fn spin_function(&self) -> Vec3 {
        self.spin
    }
}
