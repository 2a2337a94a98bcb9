//! Classical trajectories carrying a spin function, and signed Monte Carlo
//! ensembles built from them.
//!
//! Equations of motion in scaled units, with k the field coupling:
//!
//! ```text
//! r'' = k [ r' × H + f ∇_H(s·H) ] − ∇Φ
//! s'  = k s × H
//! ```
//!
//! `f` is the spin-force factor of [`TrajectoryOptions`]. With the Zeeman
//! energy −k s·H, f = 1 is the force that conserves L_z + s_z in an axially
//! symmetric field and matches the quantum Ehrenfest relation; the Liouville
//! form with f = ½ is kept as an option.

mod ensemble;

pub use ensemble::{
    density_vs_analytic, run_ensemble, DensityComparison, EnsembleConfig, EnsembleObservables, RadialBins,
    ZBins,
};

use crate::error::{invalid, require_positive, Result};
use crate::fields::{FieldConfig, Vec3};
use crate::phase_space::SignedSample;

/// Force factor of the Liouville form of the spin equations.
pub const LIOUVILLE_SPIN_FORCE: f64 = 0.5;

/// Force factor consistent with the Zeeman term of the Pauli equation.
pub const EHRENFEST_SPIN_FORCE: f64 = 1.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrajectoryOptions {
    pub dt: f64,
    /// Multiplies k ∇_H(s·H) in the force.
    pub spin_force_factor: f64,
    /// Store every n-th step in a recorded trajectory.
    pub record_every: usize,
}

impl Default for TrajectoryOptions {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            spin_force_factor: EHRENFEST_SPIN_FORCE,
            record_every: 1,
        }
    }
}

impl TrajectoryOptions {
    pub fn with_dt(dt: f64) -> Self {
        Self { dt, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        require_positive("dt", self.dt)?;
        if !self.spin_force_factor.is_finite() {
            return Err(invalid("spin_force_factor", "must be finite"));
        }
        if self.record_every == 0 {
            return Err(invalid("record_every", "must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhasePoint {
    pub r: Vec3,
    pub v: Vec3,
    pub s: Vec3,
}

impl PhasePoint {
    pub fn from_sample(sample: &SignedSample) -> Self {
        Self {
            r: sample.r0,
            v: sample.p0,
            s: sample.spin0,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.r.iter().chain(self.v.iter()).chain(self.s.iter()).all(|x| x.is_finite())
    }

    fn axpy(&self, h: f64, d: &PhasePoint) -> PhasePoint {
        PhasePoint {
            r: self.r + d.r * h,
            v: self.v + d.v * h,
            s: self.s + d.s * h,
        }
    }
}

/// Time derivative of (r, v, s).
pub fn derivative(cfg: &FieldConfig, f: f64, x: &PhasePoint) -> PhasePoint {
    let k = cfg.coupling();
    let h = cfg.magnetic_field(&x.r);
    let spin_force = cfg.spin_gradient_force(&x.s, &x.r);
    PhasePoint {
        r: x.v,
        v: (x.v.cross(&h) + spin_force * f) * k - cfg.potential_gradient(&x.r),
        s: x.s.cross(&h) * k,
    }
}

/// One classical RK4 step.
pub fn rk4_step(cfg: &FieldConfig, f: f64, x: &PhasePoint, h: f64) -> PhasePoint {
    let k1 = derivative(cfg, f, x);
    let k2 = derivative(cfg, f, &x.axpy(h / 2.0, &k1));
    let k3 = derivative(cfg, f, &x.axpy(h / 2.0, &k2));
    let k4 = derivative(cfg, f, &x.axpy(h, &k3));
    PhasePoint {
        r: x.r + (k1.r + (k2.r + k3.r) * 2.0 + k4.r) * (h / 6.0),
        v: x.v + (k1.v + (k2.v + k3.v) * 2.0 + k4.v) * (h / 6.0),
        s: x.s + (k1.s + (k2.s + k3.s) * 2.0 + k4.s) * (h / 6.0),
    }
}

/// Advance by `span` using ceil(span/dt) equal steps. Returns `None` as soon
/// as the state stops being finite.
pub fn advance(cfg: &FieldConfig, opts: &TrajectoryOptions, x: &PhasePoint, span: f64) -> Option<PhasePoint> {
    if span == 0.0 {
        return Some(*x);
    }
    let steps = (span.abs() / opts.dt).ceil().max(1.0) as usize;
    let h = span / steps as f64;
    let mut y = *x;
    for _ in 0..steps {
        y = rk4_step(cfg, opts.spin_force_factor, &y, h);
        if !y.is_finite() {
            return None;
        }
    }
    Some(y)
}

/// Conserved energy ½v² + Φ − k f s·H.
pub fn energy(cfg: &FieldConfig, f: f64, x: &PhasePoint) -> f64 {
    0.5 * x.v.norm_squared() + cfg.scalar_potential(&x.r) - cfg.coupling() * f * x.s.dot(&cfg.magnetic_field(&x.r))
}

/// Time-reversed partner of a state: v → −v and s → −s. The magnetic force
/// is odd under reversal, so the partner evolves with the opposite charge.
pub fn time_reversed(cfg: &FieldConfig, x: &PhasePoint) -> (FieldConfig, PhasePoint) {
    (
        cfg.clone().with_charge_sign(-cfg.charge_sign),
        PhasePoint {
            r: x.r,
            v: -x.v,
            s: -x.s,
        },
    )
}

/// Largest position separation reached before `t_end` by pairs started
/// `delta` apart along x, over the given samples.
pub fn separation_probe(
    cfg: &FieldConfig,
    samples: &[SignedSample],
    delta: f64,
    t_end: f64,
    opts: &TrajectoryOptions,
) -> f64 {
    let chunks = (t_end.ceil() as usize).max(1);
    let span = t_end / chunks as f64;
    let mut worst = 0.0f64;
    for s in samples {
        let mut a = PhasePoint::from_sample(s);
        let mut b = a;
        b.r.x += delta;
        for _ in 0..chunks {
            match (advance(cfg, opts, &a, span), advance(cfg, opts, &b, span)) {
                (Some(x), Some(y)) => {
                    a = x;
                    b = y;
                    worst = worst.max((a.r - b.r).norm());
                }
                _ => return f64::INFINITY,
            }
        }
    }
    worst
}

#[derive(Clone, Debug, Default)]
pub struct SpinTrajectory {
    pub times: Vec<f64>,
    pub r: Vec<Vec3>,
    pub v: Vec<Vec3>,
    pub s: Vec<Vec3>,
    pub weight_sign: f64,
    /// Time of the first non-finite state, if any.
    pub divergent_at: Option<f64>,
}

impl SpinTrajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn point(&self, i: usize) -> PhasePoint {
        PhasePoint {
            r: self.r[i],
            v: self.v[i],
            s: self.s[i],
        }
    }

    pub fn last(&self) -> Option<PhasePoint> {
        (!self.is_empty()).then(|| self.point(self.len() - 1))
    }

    fn push(&mut self, t: f64, x: &PhasePoint) {
        self.times.push(t);
        self.r.push(x.r);
        self.v.push(x.v);
        self.s.push(x.s);
    }
}

/// Integrate one sample from t = 0 to `t_end` with fixed steps. The spin
/// function is never renormalized.
pub fn integrate_trajectory(
    cfg: &FieldConfig,
    sample: &SignedSample,
    t_end: f64,
    opts: &TrajectoryOptions,
) -> Result<SpinTrajectory> {
    opts.validate()?;
    if !(t_end >= 0.0 && t_end.is_finite()) {
        return Err(invalid("t_end", format!("must be finite and non-negative (got {t_end})")));
    }
    let steps = (t_end / opts.dt).ceil() as usize;
    let h = if steps == 0 { 0.0 } else { t_end / steps as f64 };
    let mut out = SpinTrajectory {
        weight_sign: sample.weight_sign,
        ..Default::default()
    };
    let mut x = PhasePoint::from_sample(sample);
    out.push(0.0, &x);
    for i in 1..=steps {
        x = rk4_step(cfg, opts.spin_force_factor, &x, h);
        let t = i as f64 * h;
        if !x.is_finite() {
            out.divergent_at = Some(t);
            break;
        }
        if i % opts.record_every == 0 || i == steps {
            out.push(t, &x);
        }
    }
    Ok(out)
}
