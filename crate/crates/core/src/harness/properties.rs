//! The property suite: the invariants of every module, evaluated at desk
//! scale and reported as (module, invariant, measured, bound, pass).

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::compare::compare_vectors;
use super::series::VectorSeries;
use crate::analytic::{uniform_field_spin_precession, HomogeneousFieldSolution, OscillatorFieldSolution};
use crate::classical::{
    advance, energy, integrate_trajectory, run_ensemble, separation_probe, time_reversed, EnsembleConfig,
    PhasePoint, TrajectoryOptions,
};
use crate::error::Result;
use crate::fields::{BilinearGauge, FieldConfig, Vec3};
use crate::phase_space::{
    l2_moment, sample_initial, shift_momentum_for_field, GaussianPhaseState, SignedSample, WignerTransform,
};
use crate::quadrature::GaussHermite;
use crate::quantum::{
    initialize_spinor, propagate, stability_bound, CartesianGrid, CartesianPauli, GridGeometry, PauliOperator,
    PropagationOptions, SplitOperator, Stepper, StepperKind,
};
use crate::spinor::{laplacian, sigma_dot_grad_squared, Spinor, C64};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SuiteOptions {
    /// Seed of every random draw in the suite.
    pub seed: u64,
    /// Multiplies the classical trajectory time steps. Values well above 1
    /// serve as a negative control.
    pub dt_scale: f64,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        Self { seed: 1, dt_scale: 1.0 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PropertyResult {
    pub module: &'static str,
    pub invariant: &'static str,
    pub measured: f64,
    pub bound: f64,
    pub pass: bool,
    /// Informational checks are reported but do not fail the suite.
    pub gating: bool,
}

#[derive(Clone, Debug, Default)]
pub struct SuiteReport {
    pub results: Vec<PropertyResult>,
}

impl SuiteReport {
    pub fn failures(&self) -> Vec<&PropertyResult> {
        self.results.iter().filter(|r| r.gating && !r.pass).collect()
    }

    pub fn passed(&self) -> bool {
        self.failures().is_empty()
    }

    pub fn get(&self, invariant: &str) -> Option<&PropertyResult> {
        self.results.iter().find(|r| r.invariant == invariant)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("module,invariant,measured,bound,pass,gating\n");
        for r in &self.results {
            let _ = writeln!(out, "{},{},{:e},{:e},{},{}", r.module, r.invariant, r.measured, r.bound, r.pass, r.gating);
        }
        out
    }
}

struct Suite {
    opts: SuiteOptions,
    report: SuiteReport,
}

impl Suite {
    /// A check passes when `measured ≤ bound`; a check that could not be
    /// evaluated (`None`) is recorded as NaN and fails.
    fn upper(&mut self, module: &'static str, invariant: &'static str, bound: f64, measured: Option<f64>) {
        let measured = measured.unwrap_or(f64::NAN);
        self.report.results.push(PropertyResult {
            module,
            invariant,
            measured,
            bound,
            pass: measured <= bound,
            gating: true,
        });
    }

    fn dt(&self, base: f64) -> f64 {
        base * self.opts.dt_scale
    }
}

/// Run every check. Takes about ten seconds on one core, optimized.
pub fn property_suite(opts: &SuiteOptions) -> SuiteReport {
    let mut s = Suite {
        opts: *opts,
        report: SuiteReport::default(),
    };
    fields_checks(&mut s);
    phase_space_checks(&mut s);
    analytic_checks(&mut s);
    classical_checks(&mut s);
    quantum_checks(&mut s);
    harness_checks(&mut s);
    s.report
}

fn fields_checks(s: &mut Suite) {
    let mut rng = ChaCha8Rng::seed_from_u64(s.opts.seed);
    let c: Vec<C64> = (0..8).map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
    // smooth spinor with components mixing all three coordinates
    let f = move |r: &Vec3| {
        let g = (-0.5 * r.norm_squared()).exp();
        Spinor::new(
            (c[0] + c[1] * r.x + c[2] * r.y * r.z + c[3] * r.z * r.z) * g,
            (c[4] + c[5] * r.y + c[6] * r.x * r.z + c[7] * r.x * r.x) * g,
        )
    };
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let r = Vec3::from_fn(|_, _| rng.gen_range(-1.5..1.5));
        let lhs = sigma_dot_grad_squared(&f, &r, 1e-3);
        let rhs = laplacian(&f, &r, 1e-3);
        worst = worst.max((lhs - rhs).max_abs() / rhs.max_abs().max(1e-3));
    }
    s.upper("fields", "sigma_dot_grad_squared_is_laplacian", 1e-6, Some(worst));
}

fn phase_space_checks(s: &mut Suite) {
    s.upper("phase_space", "wigner_marginals_of_cat_state", 1e-6, cat_marginals().ok());

    // ⟨|r×p|²⟩ by direct sampling, within three standard errors
    let measured = (|| -> Result<f64> {
        let state = GaussianPhaseState::new(2.0, 3.0)?;
        let exact = l2_moment(&state)?;
        let n = 200_000;
        let samples = sample_initial(&state, Vec3::zeros(), n, s.opts.seed)?;
        let vals: Vec<f64> = samples.iter().map(|x| x.r0.cross(&x.p0).norm_squared()).collect();
        let mean = vals.iter().sum::<f64>() / n as f64;
        let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        Ok((mean - exact).abs() / (var / n as f64).sqrt())
    })();
    s.upper("phase_space", "l2_moment_sampling_sigmas", 3.0, measured.ok());
}

/// Largest deviation of the two marginals of the 1-D cat-state Wigner
/// function from |ψ(x)|² and |ψ̃(p)|².
fn cat_marginals() -> Result<f64> {
    let x0: f64 = 2.0;
    let norm2 = 2.0 * PI.sqrt() * (1.0 + (-x0 * x0).exp());
    let g = |x: f64| (-x * x / 2.0).exp();
    let cat = move |x: f64| C64::new((g(x - x0) + g(x + x0)) / norm2.sqrt(), 0.0);
    let position = |x: f64| cat(x).norm_sqr();
    let momentum = |p: f64| 4.0 * (p * x0).cos().powi(2) * (-p * p).exp() / norm2;
    let wt = WignerTransform::new(60);
    // the p rule stays coarse: the inner q rule must resolve e^{2ipq} at
    // its outermost node
    let gp = GaussHermite::new(20);
    let gh = GaussHermite::new(60);
    let mut worst = 0.0f64;
    for v in [0.0, 0.7, 1.9, 2.6] {
        let over_p: Vec<(f64, f64)> = gp.nodes.iter().map(|p| (v, *p)).collect();
        let w = wt.transform_1d(cat, 0.0, 1.0, &over_p)?;
        let m: f64 = w.values.iter().zip(&gp.envelope_weights).map(|(a, b)| a * b).sum();
        worst = worst.max((m - position(v)).abs());
        let over_x: Vec<(f64, f64)> = gh.nodes.iter().map(|x| (*x * 2.0, v)).collect();
        let w = wt.transform_1d(cat, 0.0, 1.0, &over_x)?;
        let m: f64 = w.values.iter().zip(&gh.envelope_weights).map(|(a, b)| a * b * 2.0).sum();
        worst = worst.max((m - momentum(v)).abs());
    }
    Ok(worst)
}

fn analytic_checks(s: &mut Suite) {
    let mut rng = ChaCha8Rng::seed_from_u64(s.opts.seed ^ 0xa11);
    let measured = (|| -> Result<f64> {
        let mut worst = 0.0f64;
        for _ in 0..50 {
            let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            let sol = HomogeneousFieldSolution::new(
                sign * rng.gen_range(0.2..3.0),
                rng.gen_range(0.2..3.0),
                rng.gen_range(0.5..3.0),
                rng.gen_range(0.2..2.0),
                rng.gen_range(0.1..3.0) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 },
                rng.gen_range(0.3..5.0),
            )?;
            let t = rng.gen_range(0.0..20.0);
            let (c, q) = (sol.classical_l(t), sol.quantum_l(t)?);
            worst = worst.max((c - q).norm() / q.norm());
        }
        Ok(worst)
    })();
    s.upper("analytic", "classical_l_equals_quantum_l", 1e-10, measured.ok());

    let measured = (|| -> Result<f64> {
        let mut worst = 0.0f64;
        for (q, d) in [(2.0, 10.0), (0.5, 1.0), (3.0, 0.7)] {
            let got = OscillatorFieldSolution::new(q, d)?.densities(0.0).q_coeff;
            let want = 4.0 * d * d / (4.0 + q * q);
            worst = worst.max((got - want).abs() / want);
        }
        Ok(worst)
    })();
    s.upper("analytic", "momentum_exponent_at_t0", 1e-12, measured.ok());
}

fn quadrupole_samples(n: usize, seed: u64) -> Result<(FieldConfig, Vec<SignedSample>)> {
    let cfg = FieldConfig::quadrupole(0.01);
    let density = shift_momentum_for_field(GaussianPhaseState::pure(10.0)?, &cfg);
    let samples = sample_initial(&density, Vec3::new(0.0, 0.0, 0.5), n, seed)?;
    Ok((cfg, samples))
}

fn classical_checks(s: &mut Suite) {
    let seed = s.opts.seed;
    let dt = s.dt(1e-3);
    let conservation = quadrupole_samples(4, seed).and_then(|(cfg, samples)| {
        let opts = TrajectoryOptions {
            dt,
            record_every: ((1.0 / dt).round() as usize).max(1),
            ..TrajectoryOptions::default()
        };
        let f = opts.spin_force_factor;
        let (mut modulus, mut drift) = (0.0f64, 0.0f64);
        for sample in &samples {
            let tr = integrate_trajectory(&cfg, sample, 50.0, &opts)?;
            if tr.divergent_at.is_some() {
                return Ok((f64::INFINITY, f64::INFINITY));
            }
            let e0 = energy(&cfg, f, &tr.point(0));
            for i in 0..tr.len() {
                modulus = modulus.max((tr.s[i].norm() - 0.5).abs());
                drift = drift.max(((energy(&cfg, f, &tr.point(i)) - e0) / e0).abs());
            }
        }
        Ok((modulus, drift))
    });
    let (modulus, drift) = (conservation.as_ref().ok().map(|v| v.0), conservation.as_ref().ok().map(|v| v.1));
    s.upper("classical_sim", "spin_modulus_per_trajectory", 1e-6, modulus);
    s.upper("classical_sim", "energy_per_trajectory", 1e-6, drift);

    let reversal = quadrupole_samples(3, seed.wrapping_add(7)).map(|(cfg, samples)| {
        let opts = TrajectoryOptions::with_dt(dt);
        let mut worst = 0.0f64;
        for sample in &samples {
            let start = PhasePoint::from_sample(sample);
            let Some(fwd) = advance(&cfg, &opts, &start, 20.0) else {
                return f64::INFINITY;
            };
            let (rev_cfg, rev) = time_reversed(&cfg, &fwd);
            let Some(back) = advance(&rev_cfg, &opts, &rev, 20.0) else {
                return f64::INFINITY;
            };
            let (_, home) = time_reversed(&rev_cfg, &back);
            worst = worst.max((home.r - start.r).norm()).max((home.v - start.v).norm()).max((home.s - start.s).norm());
        }
        worst
    });
    s.upper("classical_sim", "time_reversal", 1e-6, reversal.ok());

    // uniform field against the closed forms at t = 10
    let closed = (|| -> Result<f64> {
        let h0 = 0.8;
        let cfg = FieldConfig::homogeneous(h0);
        let sol = HomogeneousFieldSolution::scaled(h0, 1.0)?;
        let (r0, p0, s0) = (Vec3::new(0.3, -0.2, 0.1), Vec3::new(0.7, 0.4, -0.5), Vec3::new(0.3, 0.0, 0.4));
        // the closed form is written in the kinetic momentum
        let x = PhasePoint { r: r0, v: p0, s: s0 };
        let end = advance(&cfg, &TrajectoryOptions::with_dt(dt), &x, 10.0).ok_or(crate::Error::NonIntegrable)?;
        let (r, p) = sol.trajectory(&r0, &p0, 10.0);
        let s = uniform_field_spin_precession(&s0, h0, 10.0);
        Ok((end.r - r).norm().max((end.v - p).norm()).max((end.s - s).norm()))
    })();
    s.upper("classical_sim", "uniform_field_closed_forms", 1e-8, closed.ok());

    // bitwise equality with one and two worker threads
    let threads = (|| -> Result<f64> {
        let cfg = FieldConfig::quadrupole(0.01);
        let density = shift_momentum_for_field(GaussianPhaseState::pure(10.0)?, &cfg);
        let mut ens = EnsembleConfig::new(600, seed, vec![0.0, 2.0, 4.0]);
        ens.options.dt = s.dt(0.05);
        let spin0 = Vec3::new(0.0, 0.0, 0.5);
        let run = |n: usize| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| crate::Error::Unsupported(e.to_string()))?
                .install(|| run_ensemble(&cfg, &density, spin0, &ens))
        };
        let (a, b) = (run(1)?, run(2)?);
        let same = a.spin == b.spin && a.spin_stderr == b.spin_stderr && a.pz == b.pz;
        Ok(if same { 0.0 } else { 1.0 })
    })();
    s.upper("classical_sim", "thread_count_determinism", 0.0, threads.ok());

    // transverse spin vanishes by axial symmetry
    let transverse = (|| -> Result<f64> {
        let cfg = FieldConfig::quadrupole(0.01);
        let density = shift_momentum_for_field(GaussianPhaseState::pure(10.0)?, &cfg);
        let mut ens = EnsembleConfig::new(4000, seed, vec![10.0]);
        ens.options.dt = s.dt(0.05);
        ens.z_bins = None;
        let obs = run_ensemble(&cfg, &density, Vec3::new(0.0, 0.0, 0.5), &ens)?;
        let sigmas = |m: f64, e: f64| if m == 0.0 { 0.0 } else { m.abs() / e };
        Ok(sigmas(obs.spin[0].x, obs.spin_stderr[0].x).max(sigmas(obs.spin[0].y, obs.spin_stderr[0].y)))
    })();
    s.upper("classical_sim", "transverse_spin_sigmas", 3.0, transverse.ok());

    // nearby trajectories: reported, not gating
    let probe = quadrupole_samples(100, seed).map(|(cfg, samples)| {
        separation_probe(&cfg, &samples, 1e-8, 30.0, &TrajectoryOptions::with_dt(s.dt(0.01)))
    });
    let measured = probe.unwrap_or(f64::NAN);
    s.report.results.push(PropertyResult {
        module: "classical_sim",
        invariant: "separation_from_1e-8_by_t30",
        measured,
        bound: 1e-2,
        // the probe asks for separation to exceed the bound
        pass: measured > 1e-2,
        gating: false,
    });
}

fn quantum_checks(s: &mut Suite) {
    // ⟨a|Ob⟩ = ⟨Oa|b⟩ for random states vanishing on pinned rows
    let hermitian = (|| -> Result<f64> {
        let g = GridGeometry {
            n_r: 16,
            n_z: 20,
            r_max: 16.0,
            z_min: -8.0,
            z_max: 10.0,
        };
        let op = PauliOperator::new(g, 0.3)?;
        let mut rng = ChaCha8Rng::seed_from_u64(s.opts.seed ^ 0x4e);
        let n = g.nodes();
        let mut random = || -> Vec<C64> {
            (0..2 * n)
                .map(|i| {
                    let node = i % n;
                    if g.is_pinned(node / g.n_z, node % g.n_z) {
                        C64::new(0.0, 0.0)
                    } else {
                        C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
                    }
                })
                .collect()
        };
        let (a, b) = (random(), random());
        let dot = |x: &[C64], y: &[C64]| x.iter().zip(y).map(|(p, q)| p.conj() * q).sum::<C64>();
        let mut oa = vec![C64::new(0.0, 0.0); 2 * n];
        let mut ob = oa.clone();
        op.apply(&a, &mut oa);
        op.apply(&b, &mut ob);
        let scale = dot(&oa, &oa).re.sqrt() * dot(&b, &b).re.sqrt();
        Ok((dot(&a, &ob) - dot(&oa, &b)).norm() / scale)
    })();
    s.upper("quantum_sim", "operator_hermiticity", 1e-12, hermitian.ok());

    // desk-grid quadrupole run: norm, validity window, s_z(10)
    let desk = (|| -> Result<_> {
        let g = GridGeometry::default();
        let op = PauliOperator::new(g, 0.01)?;
        let times: Vec<f64> = (1..=20).map(f64::from).collect();
        let run = propagate(initialize_spinor(g, 10.0, 0.0, 0.0)?, &op, &times, &PropagationOptions::default())?;
        let norm_rate = run
            .snapshots
            .iter()
            .map(|sn| (sn.observables.norm - 1.0).abs() / sn.t)
            .fold(0.0, f64::max);
        let boundary = run.snapshots.iter().map(|sn| sn.boundary_amplitude).fold(0.0, f64::max);
        let sz10 = run.snapshots.iter().find(|sn| sn.t == 10.0).map(|sn| sn.observables.spin.z);
        let complete = run.halted.is_none() && run.snapshots.len() == times.len();
        Ok((if complete { norm_rate } else { f64::INFINITY }, boundary, sz10))
    })();
    let (norm_rate, boundary, sz10) = match desk {
        Ok((a, b, c)) => (Some(a), Some(b), c),
        Err(_) => (None, None, None),
    };
    s.upper("quantum_sim", "norm_drift_per_unit_time", 1e-6, norm_rate);
    s.upper(
        "quantum_sim",
        "boundary_amplitude_in_window",
        PropagationOptions::default().boundary_threshold,
        boundary,
    );

    // halving both spacings
    let convergence = (|| -> Result<f64> {
        let coarse = sz10.ok_or(crate::Error::NonIntegrable)?;
        let base = GridGeometry::default();
        let g = GridGeometry {
            n_r: 2 * base.n_r,
            n_z: 2 * base.n_z,
            ..base
        };
        let op = PauliOperator::new(g, 0.01)?;
        let dt = (0.9 * stability_bound(&op, StepperKind::Lawson)).min(0.05);
        let opts = PropagationOptions {
            dt,
            ..Default::default()
        };
        let run = propagate(initialize_spinor(g, 10.0, 0.0, 0.0)?, &op, &[10.0], &opts)?;
        let fine = run.snapshots.first().map(|sn| sn.observables.spin.z).ok_or(crate::Error::NonIntegrable)?;
        Ok((fine - coarse).abs())
    })();
    s.upper("quantum_sim", "grid_convergence_sz10", 1e-3, convergence.ok());

    let reversible = (|| -> Result<f64> {
        let g = GridGeometry {
            n_r: 40,
            n_z: 80,
            r_max: 60.0,
            z_min: -40.0,
            z_max: 60.0,
        };
        let op = PauliOperator::new(g, 0.01)?;
        let start = initialize_spinor(g, 10.0, 0.0, 0.0)?;
        let h = 0.2 * stability_bound(&op, StepperKind::Lawson).min(0.05);
        let mut psi = start.values.clone();
        let mut fwd = Stepper::new(&op, StepperKind::Lawson, h);
        (0..100).for_each(|_| fwd.step(&op, &mut psi));
        let mut back = Stepper::new(&op, StepperKind::Lawson, -h);
        (0..100).for_each(|_| back.step(&op, &mut psi));
        Ok(psi.iter().zip(&start.values).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max))
    })();
    s.upper("quantum_sim", "forward_backward_recovery", 1e-8, reversible.ok());

    // homogeneous field in two gauges, and |s| = ½ in a uniform field
    let uniform = uniform_field_runs().ok();
    let (gauge, modulus) = (uniform.map(|v| v.0), uniform.map(|v| v.1));
    s.upper("quantum_sim", "gauge_invariance_of_spin", 1e-10, gauge);
    s.upper("quantum_sim", "uniform_field_spin_modulus", 1e-4, modulus);
}

/// Spin in the symmetric and the Landau gauge of a uniform field: largest
/// difference between the two, and largest ||s| − ½| of the first.
fn uniform_field_runs() -> Result<(f64, f64)> {
    let h0 = 0.5;
    let grid = CartesianGrid::planar(41, 8.0)?;
    let symmetric = CartesianPauli::new(grid, FieldConfig::homogeneous(h0));
    let landau = CartesianPauli::new(grid, FieldConfig::homogeneous(h0).gauge_transform(Arc::new(BilinearGauge(h0 / 2.0)))?);
    let spin = Spinor::from_angles(PI / 2.0, 0.0);
    let f = move |r: &Vec3| spin * (-(r - Vec3::new(1.0, -0.5, 0.0)).norm_squared() / 4.5).exp();
    let mut a = symmetric.sample(f);
    let mut b = landau.sample(f);
    let n0 = symmetric.norm(&a);
    let h = 0.02;
    let mut sa_step = Stepper::new(&symmetric, StepperKind::Lawson, h);
    let mut sb_step = Stepper::new(&landau, StepperKind::Lawson, h);
    let (mut gauge, mut modulus) = (0.0f64, 0.0f64);
    for i in 1..=200 {
        sa_step.step(&symmetric, &mut a);
        sb_step.step(&landau, &mut b);
        if i % 50 == 0 {
            let (sa, sb) = (symmetric.spin(&a), landau.spin(&b));
            gauge = gauge.max((sa - sb).norm());
            modulus = modulus.max((sa.norm() / n0 - 0.5).abs());
        }
    }
    Ok((gauge, modulus))
}

fn harness_checks(s: &mut Suite) {
    let mut rng = ChaCha8Rng::seed_from_u64(s.opts.seed ^ 0x4a);
    let t: Vec<f64> = (0..40).map(f64::from).collect();
    let b: Vec<Vec3> = t.iter().map(|x| Vec3::new(0.0, 0.0, 0.5 - 0.01 * x)).collect();
    let a: Vec<Vec3> = b.iter().map(|v| v + Vec3::new(0.0, 0.0, rng.gen_range(-0.05..0.05))).collect();
    let series = |v: Vec<Vec3>| VectorSeries {
        symbol: "s".into(),
        t: t.clone(),
        v,
        stderr: None,
    };
    let (a, b) = (series(a), series(b));
    let mut violations = 0.0;
    let mut last = 0.0;
    for k in 1..=100 {
        let h = compare_vectors(&a, &b, 0.01 * k as f64).map_or(f64::NAN, |r| r.horizon.unwrap_or(f64::INFINITY));
        if !(h >= last) {
            violations += 1.0;
        }
        last = h;
    }
    s.upper("harness", "horizon_monotone_in_threshold", 0.0, Some(violations));
}
