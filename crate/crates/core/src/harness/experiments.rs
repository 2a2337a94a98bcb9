use std::path::Path;

use super::compare::{compare_densities, compare_vectors};
use super::config::{Experiment, ExperimentConfig};
use super::properties::{property_suite, SuiteOptions};
use super::series::{DensitySeries, Series, VectorSeries};
use super::{io_error, HarnessError, RunOutput, RunSummary};
use crate::analytic::{HomogeneousFieldSolution, OscillatorFieldSolution};
use crate::classical::{density_vs_analytic, run_ensemble, EnsembleConfig, EnsembleObservables, RadialBins, ZBins};
use crate::fields::Vec3;
use crate::phase_space::{shift_momentum_for_field, GaussianPhaseState, GaussianWavefunction};
use crate::quantum::{angular_momentum_from_current, initialize_spinor, propagate, PauliOperator, Snapshot};

/// Row-wise agreement required between the two angular-momentum routes.
const L_TOLERANCE: f64 = 1e-10;
/// Gauss–Hermite order of the current-based angular momentum.
const CURRENT_ORDER: usize = 24;

struct Writer<'a> {
    dir: &'a Path,
    summary: RunSummary,
}

impl Writer<'_> {
    fn series(&mut self, name: &str, s: Series) -> Result<(), HarnessError> {
        let path = self.dir.join(name);
        s.write(&path)?;
        self.summary.files.push(path);
        Ok(())
    }

    fn text(&mut self, name: &str, body: String) -> Result<(), HarnessError> {
        let path = self.dir.join(name);
        std::fs::write(&path, body).map_err(|e| io_error(&path, e))?;
        self.summary.files.push(path);
        Ok(())
    }

    fn line(&mut self, l: String) {
        self.summary.lines.push(l);
    }
}

/// Run the configured experiment and write its CSVs into `output.dir`
/// (which must exist). Files written before a failure are kept and listed.
pub fn run_experiment(cfg: &ExperimentConfig) -> RunOutput {
    let mut w = Writer {
        dir: &cfg.output.dir,
        summary: RunSummary::default(),
    };
    let result = cfg.validate().and_then(|()| match cfg.experiment {
        Experiment::HomogeneousL => homogeneous_l(cfg, &mut w),
        Experiment::OscillatorDensities => oscillator_densities(cfg, &mut w),
        Experiment::SpinGradient => spin_gradient(cfg, &mut w),
        Experiment::PropertySuite => suite(cfg, &mut w),
    });
    RunOutput {
        summary: w.summary,
        result,
    }
}

fn vector(symbol: &str, t: Vec<f64>, v: Vec<Vec3>, stderr: Option<Vec<Vec3>>) -> Series {
    Series::Vector(VectorSeries {
        symbol: symbol.into(),
        t,
        v,
        stderr,
    })
}

fn homogeneous_l(cfg: &ExperimentConfig, w: &mut Writer) -> Result<(), HarnessError> {
    let a = &cfg.analytic;
    let sol = HomogeneousFieldSolution::new(
        a.e * cfg.fields.charge_sign,
        a.m,
        a.c,
        a.hbar,
        cfg.fields.h0,
        cfg.phase_space.d,
    )?;
    let times = cfg.output.time_grid();
    let classical: Vec<Vec3> = times.iter().map(|t| sol.classical_l(*t)).collect();
    let quantum = times.iter().map(|t| sol.quantum_l(*t)).collect::<crate::Result<Vec<_>>>()?;
    let worst = classical
        .iter()
        .zip(&quantum)
        .map(|(c, q)| (c - q).norm() / q.norm().max(1.0))
        .fold(0.0, f64::max);
    w.series("L_classical.csv", vector("L", times.clone(), classical, None))?;
    w.series("L_quantum.csv", vector("L", times, quantum.clone(), None))?;
    w.line(format!("max_relative_deviation = {worst:e}"));

    // current-based route, available in scaled units only
    if [a.e, a.m, a.c, a.hbar].iter().all(|x| *x == 1.0) {
        let field = cfg.field()?;
        let f = GaussianWavefunction::new(cfg.phase_space.d);
        let l = angular_momentum_from_current(&f, &field, CURRENT_ORDER)?;
        let q0 = quantum[0];
        w.line(format!("L_current(0) = {} (quantum_L(0) = {})", l.z, q0.z));
    }
    if worst >= L_TOLERANCE {
        return Err(HarnessError::Physics(format!(
            "classical and quantum angular momentum differ by {worst:e} (limit {L_TOLERANCE:e})"
        )));
    }
    Ok(())
}

fn ensemble_config(cfg: &ExperimentConfig, times: Vec<f64>) -> EnsembleConfig {
    let c = &cfg.classical;
    let mut ens = EnsembleConfig::new(c.n_trajectories, c.seed, times);
    ens.options.dt = c.dt;
    ens.options.spin_force_factor = c.spin_force_factor;
    ens.z_bins = None;
    ens
}

fn oscillator_densities(cfg: &ExperimentConfig, w: &mut Writer) -> Result<(), HarnessError> {
    let field = cfg.field()?;
    let q = cfg.fields.h0 / cfg.fields.omega0;
    let d = cfg.phase_space.d;
    let sol = OscillatorFieldSolution::new(q, d)?;
    let times = cfg.output.time_grid();
    let mut ens = ensemble_config(cfg, times.clone());
    let bins = RadialBins {
        max: cfg.classical.radial_max,
        count: cfg.classical.radial_bins,
    };
    ens.radial_bins = Some(bins);
    let density = shift_momentum_for_field(GaussianPhaseState::pure(d)?, &field);
    let obs = run_ensemble(&field, &density, cfg.phase_space.spin0(), &ens)?;

    let mut table = String::from("t,fitted_width,width_stderr,analytic_width,relative_error,delta_r\n");
    let centers: Vec<f64> = (0..bins.count)
        .map(|b| {
            let (lo, hi) = bins.edges(b);
            0.5 * (lo + hi)
        })
        .collect();
    let mut analytic = Vec::with_capacity(times.len());
    let mut worst = 0.0f64;
    for (k, t) in times.iter().enumerate() {
        let cmp = density_vs_analytic(&obs, &sol, k)?;
        let stderr = obs.planar_r2_stderr[k] / (2.0 * cmp.fitted_width);
        table.push_str(&format!(
            "{t},{},{stderr},{},{},{}\n",
            cmp.fitted_width,
            cmp.analytic_width,
            cmp.width_relative_error,
            sol.delta_r(*t)
        ));
        worst = worst.max(cmp.width_relative_error);
        let den = sol.densities(*t);
        analytic.push(centers.iter().map(|r| den.position_density(*r)).collect());
    }
    w.text("widths.csv", table)?;
    let radial = |density: Vec<Vec<f64>>| {
        Series::Density(DensitySeries {
            axis: "r".into(),
            t: times.clone(),
            x: vec![centers.clone(); times.len()],
            density,
        })
    };
    w.series("p_classical.csv", radial(obs.radial_density.clone()))?;
    w.series("p_analytic.csv", radial(analytic))?;
    w.series("spin_classical.csv", vector("s", times.clone(), obs.spin.clone(), Some(obs.spin_stderr.clone())))?;
    let q_coeff = sol.densities(0.0).q_coeff;
    w.line(format!("max_width_relative_error = {worst}"));
    w.line(format!("q_coefficient(0) = {q_coeff} (4d^2/(4+q^2) = {})", 4.0 * d * d / (4.0 + q * q)));
    Ok(())
}

fn spin_density_series(times: &[f64], bins: &ZBins, obs: &EnsembleObservables) -> Series {
    Series::Density(DensitySeries {
        axis: "z".into(),
        t: times.to_vec(),
        x: vec![bins.centers(); times.len()],
        density: obs.pz.clone(),
    })
}

fn quantum_series(snaps: &[Snapshot], z: &[f64]) -> (Series, Series) {
    let t: Vec<f64> = snaps.iter().map(|s| s.t).collect();
    let spin = vector("s", t.clone(), snaps.iter().map(|s| s.observables.spin).collect(), None);
    let pz = Series::Density(DensitySeries {
        axis: "z".into(),
        t,
        x: vec![z.to_vec(); snaps.len()],
        density: snaps
            .iter()
            .map(|s| s.observables.pz.iter().map(|p| p / s.observables.norm).collect())
            .collect(),
    });
    (spin, pz)
}

fn spin_gradient(cfg: &ExperimentConfig, w: &mut Writer) -> Result<(), HarnessError> {
    let field = cfg.field()?;
    let times = cfg.output.time_grid();
    let spin0 = cfg.phase_space.spin0();
    let q = &cfg.quantum;
    let bins = ZBins {
        min: q.z_min,
        max: q.z_max,
        count: cfg.classical.z_bins,
    };
    let mut ens = ensemble_config(cfg, times.clone());
    ens.z_bins = Some(bins);
    let density = shift_momentum_for_field(GaussianPhaseState::pure(cfg.phase_space.d)?, &field);
    let obs = run_ensemble(&field, &density, spin0, &ens)?;
    let spin_cl = vector("s", times.clone(), obs.spin.clone(), Some(obs.spin_stderr.clone()));
    let pz_cl = spin_density_series(&times, &bins, &obs);
    w.series("spin_classical.csv", spin_cl.clone())?;
    w.series("pz_classical.csv", pz_cl.clone())?;
    w.line(format!("classical trajectories used = {}, divergent = {}", obs.used, obs.divergent));
    if !q.enabled {
        return Ok(());
    }

    let geometry = q.geometry();
    let op = PauliOperator::new(geometry, field.coupling())?;
    let grid = initialize_spinor(geometry, cfg.phase_space.d, cfg.phase_space.alpha, cfg.phase_space.beta)?;
    let run = propagate(grid, &op, &times, &q.options()).map_err(|e| match e {
        crate::Error::UnstableStep { dt, bound } => HarnessError::Config(format!(
            "`quantum.dt`: {dt} exceeds the stability bound {bound} of this grid"
        )),
        other => other.into(),
    })?;
    let (spin_qm, pz_qm) = quantum_series(&run.snapshots, &geometry.z_nodes());
    w.series("spin_quantum.csv", spin_qm.clone())?;
    w.series("pz_quantum.csv", pz_qm.clone())?;

    if !run.snapshots.is_empty() {
        let (Series::Vector(a), Series::Vector(b)) = (&spin_cl, &spin_qm) else {
            unreachable!("built as vector series")
        };
        let mut report = compare_vectors(a, b, cfg.output.threshold)?;
        if let (Series::Density(a), Series::Density(b)) = (&pz_cl, &pz_qm) {
            report.density = Some(compare_densities(a, b)?);
        }
        w.line(format!("agreement horizon = {}", report.horizon_text()));
        w.text("comparison.txt", report.to_string())?;
    }
    if let Some(h) = run.halted {
        return Err(HarnessError::Physics(format!(
            "quantum propagation halted at t = {} ({:?}); last valid time {}",
            h.at, h.reason, h.last_valid
        )));
    }
    Ok(())
}

fn suite(cfg: &ExperimentConfig, w: &mut Writer) -> Result<(), HarnessError> {
    let report = property_suite(&SuiteOptions {
        seed: cfg.classical.seed,
        ..SuiteOptions::default()
    });
    w.text("properties.csv", report.to_csv())?;
    let failures = report.failures();
    w.line(format!("{} checks, {} gating failures", report.results.len(), failures.len()));
    if failures.is_empty() {
        Ok(())
    } else {
        Err(HarnessError::Physics(format!(
            "property checks failed: {}",
            failures.iter().map(|r| format!("{}/{}", r.module, r.invariant)).collect::<Vec<_>>().join(", ")
        )))
    }
}
