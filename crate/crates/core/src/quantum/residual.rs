use crate::error::{invalid, require_positive, Result};
use crate::fields::{FieldConfig, FieldKind, Vec3};
use crate::phase_space::Wavefunction;
use crate::quadrature::GaussHermite;
use crate::spinor::{partial, Spinor, SpinorEvolution, C64, I};

/// (σ·Π)F at r with Π = ∇ − ikA, fourth-order differences of step h.
fn sigma_dot_pi<F: Fn(&Vec3) -> Spinor>(f: &F, cfg: &FieldConfig, r: &Vec3, h: f64) -> Spinor {
    let k = cfg.coupling();
    let a = cfg.vector_potential(r);
    let value = f(r);
    let mut acc = Spinor::ZERO;
    for axis in 0..3 {
        let d = partial(f, r, axis, h) - value.scale(I * (k * a[axis]));
        acc += d.sigma(axis);
    }
    acc
}

/// Max over `points` of |∂tF + σ·ΠG + iΦF| at time t, with
/// G = (1/2i)σ·ΠF. Zero for solutions of the Pauli equation, up to the
/// difference error of step `h` in space and time.
pub fn first_order_residual(
    f: &dyn SpinorEvolution,
    cfg: &FieldConfig,
    t: f64,
    points: &[Vec3],
    h: f64,
) -> Result<f64> {
    require_positive("h", h)?;
    if !t.is_finite() {
        return Err(invalid("t", "must be finite"));
    }
    let at_t = |r: &Vec3| f.value(t, r);
    let g = |r: &Vec3| sigma_dot_pi(&at_t, cfg, r, h).scale(C64::new(0.0, -0.5));
    let mut worst = 0.0f64;
    for r in points {
        let dt = (f.value(t + h, r) * 8.0 - f.value(t - h, r) * 8.0 - f.value(t + 2.0 * h, r)
            + f.value(t - 2.0 * h, r))
            * (1.0 / (12.0 * h));
        let rhs = -sigma_dot_pi(&g, cfg, r, h) - at_t(r).scale(I * cfg.scalar_potential(r));
        worst = worst.max((dt - rhs).max_abs());
    }
    Ok(worst)
}

/// L = ∫ r × j d³r with j = Im(f*∇f) − kA|f|², by a Gauss–Hermite product
/// rule centred on the wavefunction. Only fields with a uniform H (or none)
/// are accepted.
pub fn angular_momentum_from_current(f: &dyn Wavefunction, cfg: &FieldConfig, order: usize) -> Result<Vec3> {
    if cfg.kind == FieldKind::QuadrupoleB {
        return Err(invalid("kind", "angular momentum from the current needs a homogeneous field"));
    }
    if order < 2 {
        return Err(invalid("order", "need at least 2 nodes per axis"));
    }
    let rule = GaussHermite::new(order);
    let c = f.center();
    let w = f.width();
    let h = 1e-4 * w;
    let k = cfg.coupling();
    let value = |r: &Vec3| f.value(r);
    let mut total = Vec3::zeros();
    for (x, wx) in rule.nodes.iter().zip(&rule.envelope_weights) {
        for (y, wy) in rule.nodes.iter().zip(&rule.envelope_weights) {
            for (z, wz) in rule.nodes.iter().zip(&rule.envelope_weights) {
                let r = c + Vec3::new(*x, *y, *z) * w;
                let fv = f.value(&r);
                let grad = Vec3::from_fn(|a, _| (fv.conj() * partial(value, &r, a, h)).im);
                let j = grad - cfg.vector_potential(&r) * (k * fv.norm_sqr());
                total += r.cross(&j) * (wx * wy * wz);
            }
        }
    }
    Ok(total * w.powi(3))
}
