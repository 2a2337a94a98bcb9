//! Closed-form reference solutions. Nothing here integrates; every value is
//! a direct formula evaluation so it can act as an oracle for the
//! simulators.

use std::f64::consts::PI;

use crate::error::{invalid, require_positive, Result};
use crate::fields::Vec3;

/// Below this |ωt| the 1/h0 factors are replaced by their series.
const SERIES_THRESHOLD: f64 = 1e-6;

/// A charge in a uniform field h0 ẑ switched on at t = 0, in unscaled
/// units, starting from the Gaussian ρ₀ = (ħπ)⁻³ exp(−r²/d² − p²d²/ħ²).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HomogeneousFieldSolution {
    pub e: f64,
    pub m: f64,
    pub c: f64,
    pub hbar: f64,
    pub h0: f64,
    pub d: f64,
}

impl HomogeneousFieldSolution {
    pub fn new(e: f64, m: f64, c: f64, hbar: f64, h0: f64, d: f64) -> Result<Self> {
        if !e.is_finite() || e == 0.0 {
            return Err(invalid("e", format!("must be finite and nonzero (got {e})")));
        }
        require_positive("m", m)?;
        require_positive("c", c)?;
        require_positive("hbar", hbar)?;
        require_positive("d", d)?;
        if !h0.is_finite() {
            return Err(invalid("h0", format!("must be finite (got {h0})")));
        }
        Ok(Self { e, m, c, hbar, h0, d })
    }

    /// All constants one.
    pub fn scaled(h0: f64, d: f64) -> Result<Self> {
        Self::new(1.0, 1.0, 1.0, 1.0, h0, d)
    }

    pub fn cyclotron_frequency(&self) -> f64 {
        self.e * self.h0 / (self.m * self.c)
    }

    /// (r, P) at time t from (r0, P0). Falls back to free motion when
    /// h0 = 0.
    pub fn trajectory(&self, r0: &Vec3, p0: &Vec3, t: f64) -> (Vec3, Vec3) {
        let w = self.cyclotron_frequency();
        let pz = Vec3::new(0.0, 0.0, p0.z);
        let pt = p0 - pz;
        let (s, cs) = (w * t).sin_cos();
        // c P/(e h0) · sin ωt = (P/m) · sin(ωt)/ω, written so h0 → 0 is smooth
        let (sin_term, one_minus_cos) = if (w * t).abs() < SERIES_THRESHOLD {
            let x2 = (w * t).powi(2);
            (t * (1.0 - x2 / 6.0) / self.m, w * t * t / 2.0 * (1.0 - x2 / 12.0) / self.m)
        } else {
            (s / (self.m * w), 2.0 * (w * t / 2.0).sin().powi(2) / (self.m * w))
        };
        let r = r0 + pt * sin_term + pt.cross(&Vec3::z()) * one_minus_cos + pz * (t / self.m);
        let p = pt * cs + pt.cross(&Vec3::z()) * s + pz;
        (r, p)
    }

    /// ⟨x² + y²⟩ and ⟨P_x² + P_y²⟩ of the initial Gaussian.
    fn moments(&self) -> (f64, f64) {
        (self.d * self.d, self.hbar * self.hbar / (self.d * self.d))
    }

    /// Angular momentum from the evolved phase-space density.
    pub fn classical_l(&self, t: f64) -> Vec3 {
        let (r2, p2) = self.moments();
        let x = self.cyclotron_frequency() * t;
        let first = -self.e * self.h0 / (4.0 * self.c) * (1.0 + x.cos()) * r2;
        // (c/(e h0))(1 − cos ωt); series keeps the h0 → 0 limit finite
        let k = if x.abs() < SERIES_THRESHOLD {
            self.e * self.h0 * t * t / (2.0 * self.m * self.m * self.c) * (1.0 - x * x / 12.0)
        } else {
            self.c / (self.e * self.h0) * 2.0 * (x / 2.0).sin().powi(2)
        };
        Vec3::new(0.0, 0.0, first - k * p2)
    }

    /// Angular momentum from the Schrödinger current.
    pub fn quantum_l(&self, t: f64) -> Result<Vec3> {
        if self.h0 == 0.0 {
            return Err(invalid("h0", "quantum formula is singular at h0 = 0 (the limit is 0)"));
        }
        let (e, c, hb, h0, d) = (self.e, self.c, self.hbar, self.h0, self.d);
        let x = self.cyclotron_frequency() * t;
        let a = 4.0 * hb * hb * c * c;
        let b = e * e * h0 * h0 * d.powi(4);
        let lz = if x.abs() < SERIES_THRESHOLD {
            // a + b + cos x (b − a) = 2b + (a − b) x²/2 + O(x⁴)
            -(2.0 * b + (a - b) * x * x / 2.0) / (4.0 * c * e * h0 * d * d)
        } else {
            -(a + b + x.cos() * (b - a)) / (4.0 * c * e * h0 * d * d)
        };
        Ok(Vec3::new(0.0, 0.0, lz))
    }
}

/// Harmonic trap ω0 plus uniform field ω, in scaled units, starting from
/// the trap ground state. q = ω/ω0 and d = 1/√ω0.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OscillatorFieldSolution {
    pub q: f64,
    pub d: f64,
}

/// Planar Gaussian densities P(r) = p_norm·exp(−p_coeff r²) and
/// Q(p) = q_norm·exp(−q_coeff p²), p the kinetic momentum.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OscillatorDensities {
    pub p_norm: f64,
    pub p_coeff: f64,
    pub q_norm: f64,
    pub q_coeff: f64,
}

impl OscillatorDensities {
    pub fn position_density(&self, r: f64) -> f64 {
        self.p_norm * (-self.p_coeff * r * r).exp()
    }

    pub fn momentum_density(&self, p: f64) -> f64 {
        self.q_norm * (-self.q_coeff * p * p).exp()
    }

    /// ⟨x² + y²⟩ under P.
    pub fn position_second_moment(&self) -> f64 {
        1.0 / self.p_coeff
    }

    /// ⟨p_x² + p_y²⟩ under Q.
    pub fn momentum_second_moment(&self) -> f64 {
        1.0 / self.q_coeff
    }
}

impl OscillatorFieldSolution {
    pub fn new(q: f64, d: f64) -> Result<Self> {
        if !q.is_finite() {
            return Err(invalid("q", format!("must be finite (got {q})")));
        }
        require_positive("d", d)?;
        Ok(Self { q, d })
    }

    pub fn omega0(&self) -> f64 {
        1.0 / (self.d * self.d)
    }

    pub fn omega(&self) -> f64 {
        self.q * self.omega0()
    }

    fn beat_frequency(&self) -> f64 {
        ((4.0 + self.q * self.q) / self.d.powi(4)).sqrt()
    }

    /// Period of Δ_r and Δ_p.
    pub fn period(&self) -> f64 {
        2.0 * PI / self.beat_frequency()
    }

    pub fn delta_r(&self, t: f64) -> f64 {
        let q2 = self.q * self.q;
        8.0 + q2 + q2 * (t * self.beat_frequency()).cos()
    }

    pub fn delta_p(&self, t: f64) -> f64 {
        let q2 = self.q * self.q;
        16.0 + 10.0 * q2 + q2 * q2 - 2.0 * q2 * (t * self.beat_frequency()).cos()
    }

    pub fn densities(&self, t: f64) -> OscillatorDensities {
        let q2 = self.q * self.q;
        let d2 = self.d * self.d;
        let dr = self.delta_r(t);
        let dp = self.delta_p(t);
        OscillatorDensities {
            p_norm: 2.0 / (PI * d2) * (4.0 + q2) / dr,
            p_coeff: 2.0 * (4.0 + q2) / (d2 * dr),
            q_norm: 4.0 * d2 / PI * (4.0 + q2) / dp,
            q_coeff: 4.0 * d2 * (4.0 + q2) / dp,
        }
    }

    /// Planar trajectory of r̈ = ω ṙ×ẑ − ω0² r.
    pub fn trajectory(&self, r0: [f64; 2], v0: [f64; 2], t: f64) -> [f64; 2] {
        let w = self.omega();
        let big = (w * w + 4.0 * self.omega0().powi(2)).sqrt();
        let (sw, cw) = (t * w / 2.0).sin_cos();
        let (sb, cb) = (t * big / 2.0).sin_cos();
        let zx = |v: [f64; 2]| [-v[1], v[0]];
        let a = cw * cb + w / big * sw * sb;
        // rotation terms carry the sign that solves the equation as stated
        let b = w / big * cw * sb - sw * cb;
        let c = 2.0 / big * cw * sb;
        let e = -2.0 / big * sw * sb;
        let (zr, zv) = (zx(r0), zx(v0));
        [0, 1].map(|k| r0[k] * a + zr[k] * b + v0[k] * c + zv[k] * e)
    }
}

/// Solution of ds/dt = ω s×ẑ: rotation of s0 about ẑ by −ωt.
pub fn uniform_field_spin_precession(s0: &Vec3, omega: f64, t: f64) -> Vec3 {
    let (s, c) = (omega * t).sin_cos();
    Vec3::new(c * s0.x + s * s0.y, -s * s0.x + c * s0.y, s0.z)
}
