use std::f64::consts::PI;

use proptest::prelude::*;

use super::*;
use crate::quadrature::GaussHermite;

/// Σ over a 6-D Gauss–Hermite tensor grid adapted to `state`.
fn integrate6<F: Fn(&Vec3, &Vec3) -> f64>(state: &GaussianPhaseState, order: usize, g: F) -> f64 {
    let gh = GaussHermite::new(order);
    let n = gh.order();
    let (a, b) = (state.a, state.b);
    let mut acc = 0.0;
    for i in 0..n.pow(6) {
        let idx: [usize; 6] = std::array::from_fn(|k| (i / n.pow(k as u32)) % n);
        let w: f64 = idx.iter().map(|&j| gh.envelope_weights[j]).product();
        let r = state.center_r + Vec3::new(gh.nodes[idx[0]], gh.nodes[idx[1]], gh.nodes[idx[2]]) * a;
        let p = state.center_p + Vec3::new(gh.nodes[idx[3]], gh.nodes[idx[4]], gh.nodes[idx[5]]) * b;
        acc += w * g(&r, &p);
    }
    acc * (a * b).powi(3)
}

#[test]
fn gaussian_density_is_normalized() {
    for (a, b) in [(1.0, 1.0), (2.0, 3.0), (0.5, 2.5)] {
        let s = GaussianPhaseState::new(a, b).unwrap();
        let total = integrate6(&s, 6, |r, p| s.density(r, p));
        assert!((total - 1.0).abs() < 1e-6);
    }
}

#[test]
fn uncertainty_admissibility() {
    assert!(GaussianPhaseState::new(1.0, 1.0).is_ok());
    assert!(GaussianPhaseState::pure(3.7).is_ok());
    assert!(matches!(
        GaussianPhaseState::new(0.5, 1.0),
        Err(Error::Inadmissible { .. })
    ));
    assert!(GaussianPhaseState::new(-1.0, 2.0).is_err());
    let s = GaussianPhaseState::new(2.0, 3.0).unwrap();
    assert_eq!(s.uncertainty_product(), 3.0);
}

#[test]
fn l2_moment_values() {
    assert_eq!(l2_moment(&GaussianPhaseState::new(1.0, 1.0).unwrap()).unwrap(), 1.5);
    for d in [0.3, 1.0, 7.0] {
        let v = l2_moment(&GaussianPhaseState::pure(d).unwrap()).unwrap();
        assert!((v - 1.5).abs() < 1e-12);
    }
    let s = GaussianPhaseState::new(2.0, 3.0).unwrap();
    assert!((l2_moment(&s).unwrap() - 54.0).abs() < 1e-12);
    let off = s.centered_at(Vec3::x(), Vec3::zeros());
    assert!(matches!(l2_moment(&off), Err(Error::NotCentered)));
    assert!(matches!(half_space_angular_momentum(&off), Err(Error::NotCentered)));
}

#[test]
fn l2_moment_matches_monte_carlo() {
    let s = GaussianPhaseState::new(2.0, 3.0).unwrap();
    let n = 1_000_000;
    let samples = sample_initial(&s, Vec3::zeros(), n, 5).unwrap();
    let vals: Vec<f64> = samples.iter().map(|x| x.r0.cross(&x.p0).norm_squared()).collect();
    let mean = vals.iter().sum::<f64>() / n as f64;
    let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let se = (var / n as f64).sqrt();
    assert!((mean - 54.0).abs() < 3.0 * se, "mean={mean} se={se}");
    assert!((mean - 54.0).abs() / 54.0 < 0.005);
}

#[test]
fn half_space_moment_matches_monte_carlo() {
    for (a, b) in [(1.0, 1.0), (2.0, 0.5)] {
        let s = GaussianPhaseState::new(a, b).unwrap();
        assert_eq!(half_space_angular_momentum(&s).unwrap(), Vec3::new(0.0, 0.0, a * b / 4.0));
        let n = 1_000_000;
        let samples = sample_initial(&s, Vec3::zeros(), n, 9).unwrap();
        // p_φ relative to the position's azimuth; L_z = r sinθ p_φ
        let vals: Vec<Vec3> = samples
            .iter()
            .map(|x| {
                let phi_hat = Vec3::new(-x.r0.y, x.r0.x, 0.0);
                if x.p0.dot(&phi_hat) > 0.0 {
                    x.r0.cross(&x.p0)
                } else {
                    Vec3::zeros()
                }
            })
            .collect();
        let mean = vals.iter().sum::<Vec3>() / n as f64;
        for k in 0..3 {
            let var = vals.iter().map(|v| (v[k] - mean[k]).powi(2)).sum::<f64>() / (n - 1) as f64;
            let se = (var / n as f64).sqrt();
            let expected = if k == 2 { a * b / 4.0 } else { 0.0 };
            assert!((mean[k] - expected).abs() < 3.0 * se, "k={k} mean={} se={se}", mean[k]);
        }
        // over the full space the same integrand averages to zero
        let full = samples.iter().map(|x| x.r0.cross(&x.p0)).sum::<Vec3>() / n as f64;
        assert!(full.norm() < 5.0 * a * b / (n as f64).sqrt());
    }
}

#[test]
fn augmentation_sets_mean_angular_momentum_to_spin() {
    let base = GaussianPhaseState::new(1.3, 0.9).unwrap();
    let spin = Vec3::new(0.2, -0.3, 0.5).normalize() * 0.5;
    let aug = SpinAugmentedDensity::new(base, spin);
    let total = integrate6(&base, 4, |r, p| aug.value(r, p));
    assert!((total - 1.0).abs() < 1e-10);
    for k in 0..3 {
        let lk = integrate6(&base, 4, |r, p| aug.value(r, p) * r.cross(p)[k]);
        assert!((lk - spin[k]).abs() < 1e-4);
    }
    let l2 = integrate6(&base, 4, |r, p| aug.value(r, p) * r.cross(p).norm_squared());
    assert!((l2 - l2_moment(&base).unwrap()).abs() < 1e-8);
}

#[test]
fn augmented_density_is_negative_somewhere() {
    let base = GaussianPhaseState::pure(1.0).unwrap();
    let aug = SpinAugmentedDensity::new(base, Vec3::new(0.0, 0.0, 0.5));
    // s·(r×p) = −2 here, below the −a²b²/2 threshold
    assert!(aug.value(&Vec3::new(2.0, 0.0, 0.0), &Vec3::new(0.0, -2.0, 0.0)) < 0.0);
    assert!(aug.abs_mass_bound() > 1.0);
    assert_eq!(aug.spin_function(), Vec3::new(0.0, 0.0, 0.5));
}

#[test]
fn signed_sampling_reproduces_augmented_moments() {
    let base = GaussianPhaseState::pure(1.0).unwrap();
    let spin = Vec3::new(0.0, 0.0, 0.5);
    let aug = SpinAugmentedDensity::new(base, spin);
    let n = 400_000;
    let samples = sample_initial(&aug, spin, n, 21).unwrap();
    assert!(samples.iter().any(|s| s.weight_sign < 0.0));
    let wsum: f64 = samples.iter().map(|s| s.weight_sign).sum();
    let lz: f64 = samples.iter().map(|s| s.weight_sign * s.r0.cross(&s.p0).z).sum::<f64>() / wsum;
    // signed estimator of ⟨L_z⟩; the standard error here is about 0.005
    assert!((lz - 0.5).abs() < 0.03, "lz={lz}");
    // ∫|ρ| = Σ|w| / Σw estimate stays below the envelope bound
    assert!(n as f64 / wsum < aug.abs_mass_bound());
}

#[test]
fn sampling_moments_and_signs() {
    let s = GaussianPhaseState::new(1.5, 1.0).unwrap();
    let n = 100_000;
    let samples = sample_initial(&s, Vec3::zeros(), n, 1).unwrap();
    assert!(samples.iter().all(|x| x.weight_sign == 1.0));
    let mean = samples.iter().map(|x| x.r0).sum::<Vec3>() / n as f64;
    let sigma = 1.5 / 2f64.sqrt();
    assert!(mean.amax() < 4.0 * sigma / (n as f64).sqrt());
    let var_x = samples.iter().map(|x| (x.r0.x - mean.x).powi(2)).sum::<f64>() / (n - 1) as f64;
    assert!((var_x / (1.5 * 1.5 / 2.0) - 1.0).abs() < 0.02);
}

#[test]
fn sampling_is_deterministic_and_thread_independent() {
    let s = GaussianPhaseState::pure(2.0).unwrap();
    let a = sample_initial(&s, Vec3::z(), 1000, 77).unwrap();
    let b = sample_initial(&s, Vec3::z(), 1000, 77).unwrap();
    assert_eq!(a, b);
    let pool = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
    let c = pool.install(|| sample_initial(&s, Vec3::z(), 1000, 77).unwrap());
    assert_eq!(a, c);
    let d = sample_initial(&s, Vec3::z(), 1000, 78).unwrap();
    assert_ne!(a, d);
    assert!(sample_initial(&s, Vec3::z(), 0, 1).is_err());
}

struct Unbounded;
impl PhaseDensity for Unbounded {
    fn value(&self, _: &Vec3, _: &Vec3) -> f64 {
        1.0
    }
    fn draw(&self, _: &mut SampleRng) -> (Vec3, Vec3, f64) {
        (Vec3::zeros(), Vec3::zeros(), 1.0)
    }
    fn abs_mass_bound(&self) -> f64 {
        f64::INFINITY
    }
}

#[test]
fn non_integrable_density_is_rejected() {
    assert!(matches!(
        sample_initial(&Unbounded, Vec3::zeros(), 10, 0),
        Err(Error::NonIntegrable)
    ));
}

#[test]
fn free_field_shift_is_identity() {
    let s = GaussianPhaseState::pure(1.0).unwrap();
    let shifted = shift_momentum_for_field(s, &FieldConfig::free());
    let r = Vec3::new(0.2, 0.3, -0.1);
    let p = Vec3::new(-0.4, 0.1, 0.6);
    assert_eq!(shifted.value(&r, &p), s.value(&r, &p));
}

#[test]
fn homogeneous_turn_on_gives_negative_lz() {
    // ⟨L_z⟩ = −(h0/2)⟨x² + y²⟩ = −h0 d²/2
    let d = 1.4;
    let h0 = 0.8;
    let s = GaussianPhaseState::pure(d).unwrap();
    let shifted = shift_momentum_for_field(s, &FieldConfig::homogeneous(h0));
    let n = 200_000;
    let samples = sample_initial(&shifted, Vec3::zeros(), n, 3).unwrap();
    let mc = samples.iter().map(|x| x.r0.cross(&x.p0).z).sum::<f64>() / n as f64;
    let expected = -h0 * d * d / 2.0;
    assert!((mc - expected).abs() < 0.02, "mc={mc}");
}

#[test]
fn quadrupole_turn_on_density_form() {
    let d = 1.2;
    let eps = 0.3;
    let cfg = FieldConfig::quadrupole(eps);
    let shifted = shift_momentum_for_field(GaussianPhaseState::pure(d).unwrap(), &cfg);
    let r = Vec3::new(0.4, -0.2, 0.7);
    let p = Vec3::new(0.1, 0.5, -0.3);
    let a = Vec3::new(-r.y, r.x, 0.0) * r.z;
    let expected = (-r.norm_squared() / (d * d) - d * d * (p + a * eps).norm_squared()).exp() / PI.powi(3);
    assert!((shifted.value(&r, &p) - expected).abs() < 1e-15);
}

proptest! {
    #[test]
    fn l2_moment_scales_with_widths(a in 0.2f64..5.0, k in 1.0f64..4.0) {
        let b = k / a;
        let s = GaussianPhaseState::new(a, b).unwrap();
        prop_assert!((l2_moment(&s).unwrap() - 1.5 * k * k).abs() < 1e-9 * k * k);
        prop_assert!(s.uncertainty_product() >= 0.5 - 1e-12);
    }

    #[test]
    fn augmented_value_is_linear_in_spin(
        sx in -0.5f64..0.5, sz in -0.5f64..0.5,
        rx in -2.0f64..2.0, py in -2.0f64..2.0,
    ) {
        let base = GaussianPhaseState::pure(1.0).unwrap();
        let r = Vec3::new(rx, 0.3, -0.2);
        let p = Vec3::new(0.1, py, 0.4);
        let s1 = Vec3::new(sx, 0.0, 0.0);
        let s2 = Vec3::new(0.0, 0.0, sz);
        let v = |s: Vec3| SpinAugmentedDensity::new(base, s).value(&r, &p) - base.density(&r, &p);
        prop_assert!((v(s1 + s2) - v(s1) - v(s2)).abs() < 1e-14);
    }
}
