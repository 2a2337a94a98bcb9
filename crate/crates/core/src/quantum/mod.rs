//! Finite-difference Pauli solvers.
//!
//! [`cylinder`] holds the axially symmetric solver for the quadrupole
//! experiment, written for G = √r F in the n = 0 azimuthal sector.
//! [`cartesian`] is a small Cartesian solver with lattice gauge links, used
//! for gauge checks and the first-order residual. Both are stepped by
//! [`Stepper`].

pub mod cartesian;
pub mod cylinder;
pub mod residual;
pub mod stepper;

pub use cartesian::{CartesianGrid, CartesianPauli};
pub use cylinder::{initialize_spinor, GridGeometry, PauliOperator, QuantumObservables, SpinorGrid};
pub use residual::{angular_momentum_from_current, first_order_residual};
pub use stepper::{spectral_radius, stability_bound, SplitOperator, Stepper, StepperKind};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, require_positive, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PropagationOptions {
    pub dt: f64,
    pub stepper: StepperKind,
    /// Halt once |N(t) − N(0)| exceeds this.
    pub norm_tolerance: f64,
    /// Halt once the amplitude next to the pinned rows exceeds this
    /// fraction of the peak amplitude.
    pub boundary_threshold: f64,
}

impl Default for PropagationOptions {
    fn default() -> Self {
        Self {
            dt: 0.05,
            stepper: StepperKind::Lawson,
            norm_tolerance: 1e-4,
            boundary_threshold: 1e-3,
        }
    }
}

impl PropagationOptions {
    pub fn validate(&self) -> Result<()> {
        require_positive("dt", self.dt)?;
        require_positive("norm_tolerance", self.norm_tolerance)?;
        require_positive("boundary_threshold", self.boundary_threshold)?;
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    pub t: f64,
    pub observables: QuantumObservables,
    pub boundary_amplitude: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum HaltReason {
    NormDrift { drift: f64 },
    Boundary { amplitude: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Halt {
    /// Last output time at which the state was still valid.
    pub last_valid: f64,
    pub at: f64,
    pub reason: HaltReason,
}

#[derive(Clone, Debug)]
pub struct Propagation {
    pub snapshots: Vec<Snapshot>,
    pub last: SpinorGrid,
    pub halted: Option<Halt>,
}

/// Step `grid` through the increasing output times, recording observables
/// at each. The state is checked at every output time and at least once per
/// unit of time; a failed check stops the run and is reported in `halted`.
pub fn propagate(
    grid: SpinorGrid,
    op: &PauliOperator,
    times: &[f64],
    opts: &PropagationOptions,
) -> Result<Propagation> {
    opts.validate()?;
    if grid.geometry != op.geometry {
        return Err(invalid("grid", "geometry differs from the operator's"));
    }
    if times.iter().any(|t| !t.is_finite()) || times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(invalid("times", "output times must be finite and strictly increasing"));
    }
    if times.first().is_some_and(|&t| t < grid.t) {
        return Err(invalid("times", "output times must not precede the grid time"));
    }
    let bound = stability_bound(op, opts.stepper);
    if opts.dt > bound {
        return Err(Error::UnstableStep { dt: opts.dt, bound });
    }

    let mut grid = grid;
    let n0 = grid.norm();
    let mut snapshots = Vec::with_capacity(times.len());
    let mut last_valid = grid.t;
    let check = |g: &SpinorGrid| -> (f64, Option<HaltReason>) {
        let b = g.boundary_amplitude();
        let drift = (g.norm() - n0).abs();
        let reason = if !(drift <= opts.norm_tolerance) {
            Some(HaltReason::NormDrift { drift })
        } else if b > opts.boundary_threshold {
            Some(HaltReason::Boundary { amplitude: b })
        } else {
            None
        };
        (b, reason)
    };

    for &target in times {
        let span = target - grid.t;
        if span > 0.0 {
            // equal steps no longer than dt, with a validity check every unit
            let steps = (span / opts.dt).ceil() as usize;
            let h = span / steps as f64;
            let mut stepper = Stepper::new(op, opts.stepper, h);
            let per_check = ((1.0 / h).floor() as usize).max(1);
            let t0 = grid.t;
            for i in 1..=steps {
                stepper.step(op, &mut grid.values);
                grid.t = t0 + i as f64 * h;
                if i % per_check == 0 && i != steps {
                    if let (_, Some(reason)) = check(&grid) {
                        return Ok(halt(snapshots, grid, last_valid, reason));
                    }
                }
            }
            grid.t = target;
        }
        let (b, reason) = check(&grid);
        if let Some(reason) = reason {
            return Ok(halt(snapshots, grid, last_valid, reason));
        }
        last_valid = target;
        snapshots.push(Snapshot {
            t: target,
            observables: grid.observables(),
            boundary_amplitude: b,
        });
    }
    Ok(Propagation {
        snapshots,
        last: grid,
        halted: None,
    })
}

fn halt(snapshots: Vec<Snapshot>, grid: SpinorGrid, last_valid: f64, reason: HaltReason) -> Propagation {
    let at = grid.t;
    Propagation {
        snapshots,
        last: grid,
        halted: Some(Halt {
            last_valid,
            at,
            reason,
        }),
    }
}

#[cfg(test)]
mod tests;
