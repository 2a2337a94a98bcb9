//! Phase-space densities, their moments, Wigner transforms, spin currents
//! and signed sampling of initial conditions.

mod current;
mod gaussian;
mod wigner;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

pub use current::{spin_current, SpinCurrent};
pub use gaussian::{half_space_angular_momentum, l2_moment, GaussianPhaseState, SpinAugmentedDensity};
pub use wigner::{
    FnWavefunction, GaussianWavefunction, Wavefunction, WignerOutput, WignerTransform,
};

use crate::error::{Error, Result};
use crate::fields::{FieldConfig, Vec3};

pub type SampleRng = ChaCha8Rng;

/// A phase-space density that can be evaluated and sampled from |ρ|.
pub trait PhaseDensity: Send + Sync {
    fn value(&self, r: &Vec3, p: &Vec3) -> f64;

    /// One draw from |ρ|/∫|ρ| together with Sign[ρ] at the drawn point.
    fn draw(&self, rng: &mut SampleRng) -> (Vec3, Vec3, f64);

    /// Upper bound on ∫|ρ|; must be finite for sampling.
    fn abs_mass_bound(&self) -> f64;

    /// Spin function carried by the density, zero unless it was augmented.
    fn spin_function(&self) -> Vec3 {
        Vec3::zeros()
    }
}

/// The density immediately after a static field is switched on:
/// ρ(r, p) = ρ_in(r, p + eA(r)/c), p being the kinetic momentum.
pub struct FieldShiftedDensity<D> {
    pub inner: D,
    pub field: FieldConfig,
}

impl<D: PhaseDensity> PhaseDensity for FieldShiftedDensity<D> {
    fn value(&self, r: &Vec3, p: &Vec3) -> f64 {
        self.inner.value(r, &(p + self.field.turn_on_shift(r)))
    }

    fn draw(&self, rng: &mut SampleRng) -> (Vec3, Vec3, f64) {
        let (r, p, sign) = self.inner.draw(rng);
        (r, p - self.field.turn_on_shift(&r), sign)
    }

    fn abs_mass_bound(&self) -> f64 {
        self.inner.abs_mass_bound()
    }

    fn spin_function(&self) -> Vec3 {
        self.inner.spin_function()
    }
}

/// Wrap `state` so that it is evaluated with the turn-on momentum shift of
/// `field`. For a free field this is the identity.
pub fn shift_momentum_for_field<D: PhaseDensity>(state: D, field: &FieldConfig) -> FieldShiftedDensity<D> {
    FieldShiftedDensity {
        inner: state,
        field: field.clone(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SignedSample {
    pub r0: Vec3,
    pub p0: Vec3,
    pub weight_sign: f64,
    pub spin0: Vec3,
}

/// The sample with the given index. Every index owns its own ChaCha stream,
/// so the result does not depend on how indices are distributed over
/// threads.
pub fn draw_sample(density: &dyn PhaseDensity, spin0: Vec3, seed: u64, index: u64) -> SignedSample {
    let mut rng = SampleRng::seed_from_u64(seed);
    rng.set_stream(index);
    let (r0, p0, weight_sign) = density.draw(&mut rng);
    SignedSample {
        r0,
        p0,
        weight_sign,
        spin0,
    }
}

pub fn sample_initial(density: &dyn PhaseDensity, spin0: Vec3, n: usize, seed: u64) -> Result<Vec<SignedSample>> {
    if n == 0 {
        return Err(crate::error::invalid("n", "at least one sample is required"));
    }
    let mass = density.abs_mass_bound();
    if !mass.is_finite() || mass <= 0.0 {
        return Err(Error::NonIntegrable);
    }
    Ok((0..n as u64)
        .into_par_iter()
        .map(|i| draw_sample(density, spin0, seed, i))
        .collect())
}

#[cfg(test)]
mod tests;
