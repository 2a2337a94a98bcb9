use std::f64::consts::PI;
use std::sync::Arc;

use proptest::prelude::*;

use super::*;
use crate::analytic::HomogeneousFieldSolution;
use crate::fields::{BilinearGauge, FieldConfig, LinearGauge, Vec3};
use crate::phase_space::GaussianWavefunction;
use crate::error::Error;
use crate::spinor::{Spinor, SpinorEvolution, C64};

fn small_geometry() -> GridGeometry {
    GridGeometry {
        n_r: 10,
        n_z: 12,
        r_max: 10.0,
        z_min: -5.0,
        z_max: 6.0,
    }
}

fn dense<O: SplitOperator>(op: &O) -> Vec<Vec<C64>> {
    let n = op.len();
    let mut cols = Vec::with_capacity(n);
    let mut e = vec![C64::new(0.0, 0.0); n];
    for c in 0..n {
        e[c] = C64::new(1.0, 0.0);
        let mut out = vec![C64::new(0.0, 0.0); n];
        op.apply(&e, &mut out);
        cols.push(out);
        e[c] = C64::new(0.0, 0.0);
    }
    cols
}

#[test]
fn cylinder_operator_is_hermitian_on_interior_rows() {
    let g = small_geometry();
    let op = PauliOperator::new(g, 0.3).unwrap();
    let m = dense(&op);
    let n = g.nodes();
    let interior = |row: usize| {
        let i = row % n;
        !g.is_pinned(i / g.n_z, i % g.n_z)
    };
    let mut worst = 0.0f64;
    for a in (0..2 * n).filter(|&a| interior(a)) {
        for b in (0..2 * n).filter(|&b| interior(b)) {
            worst = worst.max((m[b][a] - m[a][b].conj()).norm());
        }
    }
    assert!(worst < 1e-12, "{worst}");
}

#[test]
fn expectation_of_operator_is_real() {
    let g = GridGeometry::default();
    let op = PauliOperator::new(g, 0.01).unwrap();
    let mut grid = initialize_spinor(g, 10.0, 0.0, 0.7).unwrap();
    // put some weight into the lower component with a different phase
    let n = g.nodes();
    for i in 0..n {
        grid.values[n + i] = grid.values[i] * C64::from_polar(0.5, 1.3 + 1e-3 * i as f64);
    }
    let e = op.expectation(&grid.values, &grid.values);
    assert!(e.im.abs() < 1e-10 * e.re.abs().max(1.0), "{e}");
}

#[test]
fn field_off_has_no_spin_coupling() {
    let g = small_geometry();
    let op = PauliOperator::new(g, 0.0).unwrap();
    let grid = initialize_spinor(g, 2.0, 0.0, 0.0).unwrap();
    let mut out = vec![C64::new(0.0, 0.0); op.len()];
    op.apply(&grid.values, &mut out);
    assert!(out[g.nodes()..].iter().all(|z| z.norm() == 0.0));
    for j in 0..g.n_r - 1 {
        let i = g.index(j, 5);
        assert_eq!(op.diagonal()[i], 0.0);
        let r = g.r(j);
        assert!((op.diagonal()[g.nodes() + i] - 0.5 / (r * r)).abs() < 1e-14);
    }
}

/// The stencil must reproduce −½√r ∇²f for f in each azimuthal sector.
#[test]
fn radial_stencil_matches_cylindrical_laplacian() {
    let g = GridGeometry {
        n_r: 400,
        n_z: 400,
        r_max: 20.0,
        z_min: -10.0,
        z_max: 10.0,
    };
    let op = PauliOperator::new(g, 0.0).unwrap();
    let s2: f64 = 4.0;
    let n = g.nodes();
    let mut psi = vec![C64::new(0.0, 0.0); 2 * n];
    for j in 0..g.n_r {
        for k in 0..g.n_z {
            if g.is_pinned(j, k) {
                continue;
            }
            let (r, z) = (g.r(j), g.z(k));
            let e = (-(r * r + z * z) / (2.0 * s2)).exp();
            psi[g.index(j, k)] = C64::new(r.sqrt() * e, 0.0);
            psi[n + g.index(j, k)] = C64::new(r.sqrt() * r * e, 0.0);
        }
    }
    let mut out = vec![C64::new(0.0, 0.0); 2 * n];
    op.apply(&psi, &mut out);
    let mut worst = 0.0f64;
    for j in 0..g.n_r / 2 {
        for k in g.n_z / 4..3 * g.n_z / 4 {
            let (r, z) = (g.r(j), g.z(k));
            let e = (-(r * r + z * z) / (2.0 * s2)).exp();
            let zpart = z * z / (s2 * s2) - 1.0 / s2;
            // m = 0: f'' + f'/r; m = 1: g'' + g'/r − g/r² with g = r e
            let up = -0.5 * r.sqrt() * ((r * r / (s2 * s2) - 2.0 / s2) + zpart) * e;
            let down = -0.5 * r.sqrt() * ((r * r * r / (s2 * s2) - 4.0 * r / s2) + r * zpart) * e;
            worst = worst
                .max((out[g.index(j, k)].re - up).abs())
                .max((out[n + g.index(j, k)].re - down).abs());
        }
    }
    assert!(worst < 2e-3, "{worst}");
}

#[test]
fn initial_state_matches_gaussian_moments() {
    let grid = initialize_spinor(GridGeometry::default(), 10.0, 0.0, 0.3).unwrap();
    assert!((grid.norm() - 1.0).abs() < 1e-6);
    let s = grid.spin();
    assert_eq!((s.x, s.y), (0.0, 0.0));
    assert!((s.z - 0.5).abs() < 1e-12);
    let r2 = grid.r2_moment();
    // the radial midpoint rule is second order at r = 0
    assert!((r2 - 150.0).abs() / 150.0 < 5e-3, "{r2}");
    let total: f64 = grid.pz().iter().sum::<f64>() * grid.geometry.dz();
    assert!((total - grid.norm()).abs() < 1e-12);
    assert!(matches!(
        initialize_spinor(GridGeometry::default(), 10.0, 0.4, 0.0),
        Err(Error::Unsupported(_))
    ));
    assert!(initialize_spinor(GridGeometry::default(), -1.0, 0.0, 0.0).is_err());
}

#[test]
fn spin_down_state_has_negative_spin() {
    let mut grid = initialize_spinor(small_geometry(), 2.0, 0.0, 0.0).unwrap();
    let n = grid.geometry.nodes();
    let (up, down) = grid.values.split_at_mut(n);
    up.swap_with_slice(down);
    assert!((grid.spin().z + 0.5).abs() < 1e-12);
}

#[test]
fn geometry_validation() {
    let mut g = GridGeometry::default();
    g.n_r = 4;
    assert!(PauliOperator::new(g, 0.01).is_err());
    let mut g = GridGeometry::default();
    g.z_max = g.z_min;
    assert!(g.validate().is_err());
}

#[test]
fn free_packet_spreads_as_predicted() {
    let d = 10.0;
    let g = GridGeometry::default();
    let op = PauliOperator::new(g, 0.0).unwrap();
    let grid = initialize_spinor(g, d, 0.0, 0.0).unwrap();
    let opts = PropagationOptions {
        dt: 0.2,
        ..Default::default()
    };
    let times: Vec<f64> = (1..=4).map(|i| 25.0 * i as f64).collect();
    let run = propagate(grid, &op, &times, &opts).unwrap();
    assert!(run.halted.is_none());
    for snap in &run.snapshots {
        let t = snap.t;
        assert!((snap.observables.norm - 1.0).abs() < 1e-6 * t);
        assert!((snap.observables.spin.z - 0.5).abs() < 1e-10);
    }
    let (_, var) = run.last.z_moments();
    let expected = d * d / 2.0 * (1.0 + (100.0f64 / (d * d)).powi(2));
    assert!((var - expected).abs() / expected < 0.01, "{var} vs {expected}");
}

#[test]
fn forward_then_backward_recovers_state() {
    let g = GridGeometry {
        n_r: 40,
        n_z: 80,
        r_max: 60.0,
        z_min: -40.0,
        z_max: 60.0,
    };
    let op = PauliOperator::new(g, 0.01).unwrap();
    let start = initialize_spinor(g, 10.0, 0.0, 0.0).unwrap();
    for kind in [StepperKind::Lawson, StepperKind::Rk4] {
        let h = 0.2 * stability_bound(&op, kind).min(0.05);
        let mut psi = start.values.clone();
        let mut fwd = Stepper::new(&op, kind, h);
        for _ in 0..100 {
            fwd.step(&op, &mut psi);
        }
        let mut back = Stepper::new(&op, kind, -h);
        for _ in 0..100 {
            back.step(&op, &mut psi);
        }
        let err = psi.iter().zip(&start.values).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err < 1e-8, "{kind:?} {err}");
    }
}

#[test]
fn rk4_on_full_operator_is_limited_by_the_trap_term() {
    let g = GridGeometry::default();
    let op = PauliOperator::new(g, 0.01).unwrap();
    let grid = initialize_spinor(g, 10.0, 0.0, 0.0).unwrap();
    let opts = PropagationOptions {
        dt: 0.05,
        stepper: StepperKind::Rk4,
        ..Default::default()
    };
    assert!(matches!(
        propagate(grid, &op, &[1.0], &opts),
        Err(Error::UnstableStep { .. })
    ));
}

#[test]
fn boundary_contact_halts_propagation() {
    let g = GridGeometry {
        n_r: 20,
        n_z: 40,
        r_max: 20.0,
        z_min: -20.0,
        z_max: 20.0,
    };
    let op = PauliOperator::new(g, 0.0).unwrap();
    let grid = initialize_spinor(g, 2.0, 0.0, 0.0).unwrap();
    let times: Vec<f64> = (1..=40).map(|i| i as f64).collect();
    let run = propagate(grid, &op, &times, &PropagationOptions::default()).unwrap();
    let halt = run.halted.expect("packet reaches the wall");
    assert!(matches!(halt.reason, HaltReason::Boundary { .. }));
    assert_eq!(run.snapshots.last().map(|s| s.t), Some(halt.last_valid));
    assert!(halt.at > halt.last_valid);
}

#[test]
fn propagate_rejects_bad_times() {
    let g = small_geometry();
    let op = PauliOperator::new(g, 0.0).unwrap();
    let grid = initialize_spinor(g, 2.0, 0.0, 0.0).unwrap();
    assert!(propagate(grid.clone(), &op, &[2.0, 1.0], &PropagationOptions::default()).is_err());
    let other = PauliOperator::new(GridGeometry::default(), 0.0).unwrap();
    assert!(propagate(grid, &other, &[1.0], &PropagationOptions::default()).is_err());
}

fn gaussian_spinor(center: Vec3, d: f64, spin: Spinor) -> impl Fn(&Vec3) -> Spinor {
    move |r: &Vec3| spin * (-(r - center).norm_squared() / (2.0 * d * d)).exp()
}

fn run_cartesian(op: &CartesianPauli, psi: &mut [C64], t: f64, dt: f64) {
    let steps = (t / dt).ceil() as usize;
    let mut s = Stepper::new(op, StepperKind::Lawson, t / steps as f64);
    for _ in 0..steps {
        s.step(op, psi);
    }
}

#[test]
fn cartesian_operator_is_hermitian() {
    let grid = CartesianGrid::new([6, 5, 7], [-2.0, -1.5, -2.5], [2.0, 2.5, 1.0]).unwrap();
    let cfg = FieldConfig::quadrupole(0.4)
        .gauge_transform(Arc::new(LinearGauge(Vec3::new(0.3, -0.2, 0.5))))
        .unwrap();
    let op = CartesianPauli::new(grid, cfg);
    let m = dense(&op);
    let nodes = grid.nodes();
    let interior: Vec<usize> = (0..2 * nodes).filter(|&a| grid.depth(a % nodes) > 0).collect();
    let mut worst = 0.0f64;
    for &a in &interior {
        for &b in &interior {
            worst = worst.max((m[b][a] - m[a][b].conj()).norm());
        }
    }
    assert!(worst < 1e-12);
}

#[test]
fn homogeneous_field_spin_is_gauge_invariant() {
    let h0 = 0.5;
    let grid = CartesianGrid::planar(41, 8.0).unwrap();
    let symmetric = CartesianPauli::new(grid, FieldConfig::homogeneous(h0));
    let landau_cfg = FieldConfig::homogeneous(h0)
        .gauge_transform(Arc::new(BilinearGauge(h0 / 2.0)))
        .unwrap();
    // A + ∇(h0 xy/2) = (0, h0 x, 0)
    let probe = Vec3::new(1.3, -0.7, 0.0);
    assert!((landau_cfg.vector_potential(&probe) - Vec3::new(0.0, h0 * probe.x, 0.0)).norm() < 1e-14);
    let landau = CartesianPauli::new(grid, landau_cfg);
    let f = gaussian_spinor(Vec3::new(1.0, -0.5, 0.0), 1.5, Spinor::from_angles(PI / 2.0, 0.0));
    let mut a = symmetric.sample(&f);
    let mut b = landau.sample(&f);
    for _ in 0..5 {
        run_cartesian(&symmetric, &mut a, 1.0, 0.02);
        run_cartesian(&landau, &mut b, 1.0, 0.02);
        let (sa, sb) = (symmetric.spin(&a), landau.spin(&b));
        assert!((sa - sb).norm() < 1e-10, "{sa:?} {sb:?}");
        let dev = symmetric
            .density(&a)
            .iter()
            .zip(landau.density(&b))
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max);
        assert!(dev < 1e-10);
    }
}

#[test]
fn quadrupole_spin_is_unchanged_by_a_linear_gauge() {
    let grid = CartesianGrid::new([13, 13, 13], [-4.0; 3], [4.0; 3]).unwrap();
    let cfg = FieldConfig::quadrupole(0.2);
    let base = CartesianPauli::new(grid, cfg.clone());
    let shifted = CartesianPauli::new(grid, cfg.gauge_transform(Arc::new(LinearGauge(Vec3::x()))).unwrap());
    let f = gaussian_spinor(Vec3::new(0.5, 0.0, 0.3), 1.2, Spinor::spin_up());
    let mut a = base.sample(&f);
    let mut b = shifted.sample(&f);
    run_cartesian(&base, &mut a, 2.0, 0.02);
    run_cartesian(&shifted, &mut b, 2.0, 0.02);
    assert!((base.spin(&a) - shifted.spin(&b)).norm() < 1e-10);
}

#[test]
fn uniform_field_keeps_spin_length_and_precesses() {
    let h0 = 0.8;
    let grid = CartesianGrid::planar(41, 8.0).unwrap();
    let op = CartesianPauli::new(grid, FieldConfig::homogeneous(h0));
    let f = gaussian_spinor(Vec3::new(0.5, 0.0, 0.0), 1.5, Spinor::from_angles(PI / 2.0, 0.0));
    let mut psi = op.sample(&f);
    let n0 = op.norm(&psi);
    for step in 1..=4 {
        run_cartesian(&op, &mut psi, 0.5, 0.02);
        let t = 0.5 * step as f64;
        let s = op.spin(&psi) / n0;
        assert!((s.norm() - 0.5).abs() < 1e-4, "{} {}", s.norm(), op.norm(&psi) / n0);
        // ṡ = k s × H with s(0) = x̂/2
        let expected = Vec3::new(0.5 * (h0 * t).cos(), -0.5 * (h0 * t).sin(), 0.0);
        assert!((s - expected).norm() < 1e-4, "{s:?} {expected:?}");
    }
}

#[test]
fn grid_residual_is_spatial_truncation() {
    let h0 = 0.5;
    let f = gaussian_spinor(Vec3::new(0.5, 0.2, 0.0), 1.5, Spinor::from_angles(1.0, 0.4));
    let residual = |n: usize| {
        let op = CartesianPauli::new(CartesianGrid::planar(n, 8.0).unwrap(), FieldConfig::homogeneous(h0));
        let mut psi = op.sample(&f);
        run_cartesian(&op, &mut psi, 1.0, 0.02);
        op.first_order_residual(&psi)
    };
    let coarse = residual(41);
    let fine = residual(81);
    // second-order stencils on both sides
    assert!(coarse / fine > 3.0, "{coarse} {fine}");
    assert!(fine < 1e-2);
}

struct PlaneWave {
    p: Vec3,
}

impl SpinorEvolution for PlaneWave {
    fn value(&self, t: f64, r: &Vec3) -> Spinor {
        Spinor::from_angles(0.7, 0.2).scale(C64::from_polar(1.0, self.p.dot(r) - 0.5 * self.p.norm_squared() * t))
    }
}

struct Static<F>(F);

impl<F: Fn(&Vec3) -> Spinor + Sync> SpinorEvolution for Static<F> {
    fn value(&self, _: f64, r: &Vec3) -> Spinor {
        (self.0)(r)
    }
}

fn probe_points() -> Vec<Vec3> {
    vec![
        Vec3::zeros(),
        Vec3::new(0.3, -0.4, 0.2),
        Vec3::new(-0.8, 0.1, 0.5),
        Vec3::new(0.5, 0.9, -0.6),
    ]
}

#[test]
fn plane_wave_satisfies_first_order_equations() {
    let pw = PlaneWave {
        p: Vec3::new(0.4, -0.3, 0.7),
    };
    let r = first_order_residual(&pw, &FieldConfig::free(), 0.8, &probe_points(), 1e-3).unwrap();
    assert!(r < 1e-8, "{r}");
}

#[test]
fn lowest_landau_level_is_a_static_solution() {
    // spin-up LLL: kinetic h0/2 cancels the Zeeman −h0/2
    let h0 = 0.9;
    let f = Static(move |r: &Vec3| Spinor::spin_up() * (-h0 * (r.x * r.x + r.y * r.y) / 4.0).exp());
    let r = first_order_residual(&f, &FieldConfig::homogeneous(h0), 0.0, &probe_points(), 1e-3).unwrap();
    assert!(r < 1e-8, "{r}");
    let down = Static(move |r: &Vec3| Spinor::new(C64::new(0.0, 0.0), C64::new(1.0, 0.0)) * (-h0 * (r.x * r.x + r.y * r.y) / 4.0).exp());
    let r = first_order_residual(&down, &FieldConfig::homogeneous(h0), 0.0, &probe_points(), 1e-3).unwrap();
    assert!(r > 0.5, "{r}");
}

#[test]
fn non_solution_has_order_one_residual() {
    let f = Static(|r: &Vec3| Spinor::from_angles(0.3, 1.0) * (-r.norm_squared()).exp());
    let r = first_order_residual(&f, &FieldConfig::free(), 0.0, &probe_points(), 1e-3).unwrap();
    assert!(r > 0.5, "{r}");
}

#[test]
fn angular_momentum_from_current_matches_oracles() {
    let real = GaussianWavefunction::new(1.0);
    let l = angular_momentum_from_current(&real, &FieldConfig::homogeneous(1.0), 16).unwrap();
    assert!((l - Vec3::new(0.0, 0.0, -0.5)).norm() < 1e-8, "{l:?}");

    let moving = GaussianWavefunction::new(2.0).boosted(Vec3::new(0.0, 0.0, 1.5));
    let l = angular_momentum_from_current(&moving, &FieldConfig::free(), 16).unwrap();
    assert!(l.norm() < 1e-8);

    for (h0, d) in [(0.7, 2.0), (2.5, 0.6)] {
        let f = GaussianWavefunction::new(d);
        let l = angular_momentum_from_current(&f, &FieldConfig::homogeneous(h0), 16).unwrap();
        let oracle = HomogeneousFieldSolution::scaled(h0, d).unwrap().quantum_l(0.0).unwrap();
        assert!((l - oracle).norm() < 1e-8 * oracle.norm(), "{l:?} {oracle:?}");
    }
    assert!(angular_momentum_from_current(&real, &FieldConfig::quadrupole(0.1), 16).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn cylinder_expectation_is_real_for_random_states(seed in 0u64..1000, eps in -0.5f64..0.5) {
        use rand::{Rng, SeedableRng};
        let g = small_geometry();
        let op = PauliOperator::new(g, eps).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut psi: Vec<C64> = (0..op.len()).map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        for j in 0..g.n_r {
            for k in 0..g.n_z {
                if g.is_pinned(j, k) {
                    psi[g.index(j, k)] = C64::new(0.0, 0.0);
                    psi[g.nodes() + g.index(j, k)] = C64::new(0.0, 0.0);
                }
            }
        }
        let e = op.expectation(&psi, &psi);
        prop_assert!(e.im.abs() < 1e-10 * e.norm().max(1.0));
    }
}
