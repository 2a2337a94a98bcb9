use crate::fields::Vec3;
use crate::spinor::{partial, sigma_dot_grad, SpinorField};

/// Probability current of a two-component wavefunction with spin parameter
/// `s_param`:
/// j = Im[F†σ(σ·∇)F] − ((1 − s)/2) ∇×(F†σF), evaluated by finite
/// differences with step `h`.
pub struct SpinCurrent<F> {
    pub field: F,
    pub s_param: f64,
    pub h: f64,
}

pub fn spin_current<F: SpinorField>(field: F, s_param: f64) -> SpinCurrent<F> {
    SpinCurrent {
        field,
        s_param,
        h: 1e-3,
    }
}

impl<F: SpinorField> SpinCurrent<F> {
    pub fn with_step(mut self, h: f64) -> Self {
        self.h = h;
        self
    }

    /// Im[F†σ(σ·∇)F].
    pub fn pauli_term(&self, r: &Vec3) -> Vec3 {
        let f = |x: &Vec3| self.field.value(x);
        let fr = f(r);
        let g = sigma_dot_grad(&f, r, self.h);
        let comp = |axis: usize| -> f64 { fr.inner(&g.sigma(axis)).im };
        Vec3::new(comp(0), comp(1), comp(2))
    }

    /// ∇×(F†σF).
    pub fn spin_density_curl(&self, r: &Vec3) -> Vec3 {
        let m = |x: &Vec3| self.field.value(x).sigma_expectation();
        let d = |axis: usize| partial(m, r, axis, self.h);
        let (dx, dy, dz) = (d(0), d(1), d(2));
        Vec3::new(dy.z - dz.y, dz.x - dx.z, dx.y - dy.x)
    }

    pub fn value(&self, r: &Vec3) -> Vec3 {
        self.pauli_term(r) - self.spin_density_curl(r) * ((1.0 - self.s_param) / 2.0)
    }

    /// ∇·j by central differences of `value`.
    pub fn divergence(&self, r: &Vec3) -> f64 {
        (0..3).map(|axis| partial(|x: &Vec3| self.value(x), r, axis, self.h)[axis]).sum()
    }
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;
    use crate::spinor::Spinor;
    use crate::quadrature::GaussHermite;
    use crate::spinor::{laplacian, sigma_dot_grad_squared, C64};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn density(s: &Spinor) -> f64 {
        s.norm_sqr()
    }

    fn gaussian_up(d: f64) -> impl Fn(&Vec3) -> Spinor + Sync + Copy {
        move |r: &Vec3| {
            let f = (PI * d * d).powf(-0.75) * (-r.norm_squared() / (2.0 * d * d)).exp();
            Spinor::new(C64::new(f, 0.0), C64::new(0.0, 0.0))
        }
    }

    /// Free spreading Gaussian in ħ = m = 1, spin part fixed.
    fn free_gaussian(t: f64, r: &Vec3, d: f64, spin: Spinor) -> Spinor {
        let z = C64::new(1.0, t / (d * d));
        let f = (PI * d * d).powf(-0.75) * z.powf(-1.5) * (-r.norm_squared() / (2.0 * d * d) / z).exp();
        spin * f
    }

    fn s_z(s_param: f64) -> f64 {
        let d = 1.1;
        let cur = spin_current(gaussian_up(d), s_param).with_step(1e-3);
        let gh = GaussHermite::new(14);
        let mut acc = 0.0;
        for (x, wx) in gh.nodes.iter().zip(&gh.envelope_weights) {
            for (y, wy) in gh.nodes.iter().zip(&gh.envelope_weights) {
                for (z, wz) in gh.nodes.iter().zip(&gh.envelope_weights) {
                    let r = Vec3::new(*x, *y, *z) * d;
                    acc += wx * wy * wz * r.cross(&cur.value(&r)).z;
                }
            }
        }
        acc * d.powi(3)
    }

    #[test]
    fn spin_half_and_spin_one() {
        assert!((s_z(0.5) - 0.5).abs() < 1e-6, "{}", s_z(0.5));
        assert!((s_z(1.0) - 1.0).abs() < 1e-6, "{}", s_z(1.0));
    }

    #[test]
    fn real_spin_up_current_is_a_curl() {
        // Im[F†σ(σ·∇)F] = ½∇×(f²ẑ) for real f
        let d = 0.9;
        let f = gaussian_up(d);
        let cur = spin_current(f, 0.5);
        let r = Vec3::new(0.3, -0.5, 0.2);
        let g = |x: &Vec3| f(x).norm_sqr();
        let curl = Vec3::new(partial(g, &r, 1, 1e-3), -partial(g, &r, 0, 1e-3), 0.0);
        assert!((cur.pauli_term(&r) - curl * 0.5).norm() < 1e-9);
        assert!((cur.value(&r) - curl * 0.25).norm() < 1e-9);
    }

    #[test]
    fn plane_wave_current_is_divergence_free() {
        let k = Vec3::new(0.7, -0.2, 0.4);
        let spin = Spinor::from_angles(0.6, 1.1);
        let f = move |r: &Vec3| spin * C64::from_polar(1.0, k.dot(r));
        for s in [0.5, 1.0, 0.0] {
            let cur = spin_current(f, s);
            let r = Vec3::new(1.0, 2.0, -0.5);
            assert!(cur.divergence(&r).abs() < 1e-8);
            assert!((cur.value(&r) - k).norm() < 1e-8);
        }
    }

    #[test]
    fn continuity_on_free_gaussian() {
        let d = 1.0;
        let spin = Spinor::from_angles(0.9, -0.4);
        let t = 0.6;
        let dt = 1e-4;
        for s in [0.5, 1.0] {
            let cur = spin_current(move |r: &Vec3| free_gaussian(t, r, d, spin), s).with_step(1e-3);
            for r in [Vec3::new(0.4, -0.3, 0.6), Vec3::new(-0.8, 0.1, 0.2)] {
                let drho = (density(&free_gaussian(t + dt, &r, d, spin))
                    - density(&free_gaussian(t - dt, &r, d, spin)))
                    / (2.0 * dt);
                let residual = drho + cur.divergence(&r);
                assert!(residual.abs() < 1e-6, "s={s} residual={residual}");
            }
        }
    }

    #[test]
    fn sigma_grad_squared_is_laplacian() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let c: [f64; 12] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
            let f = move |r: &Vec3| {
                let env = (-0.3 * r.norm_squared()).exp();
                Spinor::new(
                    C64::new((c[0] * r.x + c[1] * r.y).sin() + c[2] * r.z, c[3] * r.x * r.y) * env,
                    C64::new((c[4] * r.z).cos() * c[5], c[6] * r.x + c[7] * r.y * r.z) * env,
                ) + Spinor::new(C64::new(c[8], c[9]), C64::new(c[10], c[11])) * env
            };
            let r = Vec3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            let a = sigma_dot_grad_squared(&f, &r, 1e-2);
            let b = laplacian(f, &r, 1e-2);
            let scale = b.max_abs().max(1e-3);
            assert!((a - b).max_abs() / scale < 1e-5);
        }
    }
}
