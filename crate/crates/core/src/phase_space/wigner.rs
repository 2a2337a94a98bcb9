use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::fields::Vec3;
use crate::quadrature::GaussHermite;
use crate::spinor::C64;

const NORM_TOLERANCE: f64 = 1e-6;

/// Scalar wavefunction with a Gaussian-like envelope: |f(r)|² decays at
/// least like exp(−|r − center|²/width²).
pub trait Wavefunction: Sync {
    fn value(&self, r: &Vec3) -> C64;
    fn center(&self) -> Vec3;
    fn width(&self) -> f64;
}

/// f(r) = (πd²)^{-3/4} exp(−|r−r_s|²/(2d²) + i p_s·r).
#[derive(Clone, Copy, Debug)]
pub struct GaussianWavefunction {
    pub d: f64,
    pub center: Vec3,
    pub momentum: Vec3,
}

impl GaussianWavefunction {
    pub fn new(d: f64) -> Self {
        Self {
            d,
            center: Vec3::zeros(),
            momentum: Vec3::zeros(),
        }
    }

    pub fn shifted(mut self, center: Vec3) -> Self {
        self.center = center;
        self
    }

    pub fn boosted(mut self, momentum: Vec3) -> Self {
        self.momentum = momentum;
        self
    }
}

impl Wavefunction for GaussianWavefunction {
    fn value(&self, r: &Vec3) -> C64 {
        let dr = r - self.center;
        let amp = (PI * self.d * self.d).powf(-0.75) * (-dr.norm_squared() / (2.0 * self.d * self.d)).exp();
        C64::from_polar(amp, self.momentum.dot(r))
    }

    fn center(&self) -> Vec3 {
        self.center
    }

    fn width(&self) -> f64 {
        self.d
    }
}

/// Adapter for closures, with an explicit envelope.
pub struct FnWavefunction<F> {
    pub f: F,
    pub center: Vec3,
    pub width: f64,
}

impl<F: Fn(&Vec3) -> C64 + Sync> Wavefunction for FnWavefunction<F> {
    fn value(&self, r: &Vec3) -> C64 {
        (self.f)(r)
    }

    fn center(&self) -> Vec3 {
        self.center
    }

    fn width(&self) -> f64 {
        self.width
    }
}

#[derive(Clone, Debug)]
pub struct WignerOutput {
    pub values: Vec<f64>,
    /// Largest |Im ρ| seen on the grid.
    pub max_imaginary: f64,
}

/// ρ(r, p) = π⁻³ ∫ d³q e^{2ip·q} f*(r+q) f(r−q), by tensor Gauss–Hermite
/// quadrature in q.
#[derive(Clone, Debug)]
pub struct WignerTransform {
    rule: GaussHermite,
}

impl Default for WignerTransform {
    fn default() -> Self {
        Self::new(40)
    }
}

impl WignerTransform {
    pub fn new(order: usize) -> Self {
        Self {
            rule: GaussHermite::new(order),
        }
    }

    pub fn norm(&self, f: &dyn Wavefunction) -> f64 {
        let c = f.center();
        let w = f.width();
        let gh = &self.rule;
        let mut acc = 0.0;
        for (x, wx) in gh.nodes.iter().zip(&gh.envelope_weights) {
            for (y, wy) in gh.nodes.iter().zip(&gh.envelope_weights) {
                for (z, wz) in gh.nodes.iter().zip(&gh.envelope_weights) {
                    let r = c + Vec3::new(*x, *y, *z) * w;
                    acc += wx * wy * wz * f.value(&r).norm_sqr();
                }
            }
        }
        acc * w.powi(3)
    }

    pub fn check_normalized(&self, f: &dyn Wavefunction) -> Result<()> {
        let norm = self.norm(f);
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::NotNormalized { norm });
        }
        Ok(())
    }

    /// Complex value of the defining integral at one phase-space point.
    fn point(&self, f: &dyn Wavefunction, r: &Vec3, p: &Vec3) -> C64 {
        let gh = &self.rule;
        let w = f.width();
        let mut acc = C64::new(0.0, 0.0);
        for (x, wx) in gh.nodes.iter().zip(&gh.envelope_weights) {
            for (y, wy) in gh.nodes.iter().zip(&gh.envelope_weights) {
                for (z, wz) in gh.nodes.iter().zip(&gh.envelope_weights) {
                    let q = Vec3::new(*x, *y, *z) * w;
                    let phase = C64::from_polar(1.0, 2.0 * p.dot(&q));
                    acc += phase * f.value(&(r + q)).conj() * f.value(&(r - q)) * (wx * wy * wz);
                }
            }
        }
        acc * (w.powi(3) / PI.powi(3))
    }

    pub fn transform(&self, f: &dyn Wavefunction, points: &[(Vec3, Vec3)]) -> Result<WignerOutput> {
        use rayon::prelude::*;
        self.check_normalized(f)?;
        let raw: Vec<C64> = points.par_iter().map(|(r, p)| self.point(f, r, p)).collect();
        Ok(WignerOutput {
            max_imaginary: raw.iter().fold(0.0, |m, z| m.max(z.im.abs())),
            values: raw.into_iter().map(|z| z.re).collect(),
        })
    }

    /// One-dimensional version ρ(x, p) = π⁻¹ ∫ dq e^{2ipq} f*(x+q) f(x−q)
    /// for a wavefunction whose envelope has the given center and width.
    pub fn transform_1d<F: Fn(f64) -> C64 + Sync>(
        &self,
        f: F,
        center: f64,
        width: f64,
        points: &[(f64, f64)],
    ) -> Result<WignerOutput> {
        let norm = self.rule.integrate(center, width, |x| f(x).norm_sqr());
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::NotNormalized { norm });
        }
        let gh = &self.rule;
        let raw: Vec<C64> = points
            .iter()
            .map(|&(x, p)| {
                let mut acc = C64::new(0.0, 0.0);
                for (q, wq) in gh.nodes.iter().zip(&gh.envelope_weights) {
                    let q = q * width;
                    acc += C64::from_polar(*wq, 2.0 * p * q) * f(x + q).conj() * f(x - q);
                }
                acc * (width / PI)
            })
            .collect();
        Ok(WignerOutput {
            max_imaginary: raw.iter().fold(0.0, |m, z| m.max(z.im.abs())),
            values: raw.into_iter().map(|z| z.re).collect(),
        })
    }
}
