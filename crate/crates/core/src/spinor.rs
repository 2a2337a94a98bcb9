//! Two-component spinors, Pauli matrices and finite-difference derivatives
//! of spinor fields.

use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::fields::Vec3;

pub type C64 = Complex64;

pub const I: C64 = C64::new(0.0, 1.0);

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Spinor {
    pub up: C64,
    pub down: C64,
}

impl Spinor {
    pub const ZERO: Spinor = Spinor {
        up: C64::new(0.0, 0.0),
        down: C64::new(0.0, 0.0),
    };

    pub fn new(up: C64, down: C64) -> Self {
        Self { up, down }
    }

    /// Spin pointing along polar angle `theta`, azimuth `phi`.
    pub fn from_angles(theta: f64, phi: f64) -> Self {
        Self {
            up: C64::from_polar((theta / 2.0).cos(), -phi / 2.0),
            down: C64::from_polar((theta / 2.0).sin(), phi / 2.0),
        }
    }

    pub fn spin_up() -> Self {
        Self::new(C64::new(1.0, 0.0), C64::new(0.0, 0.0))
    }

    pub fn sigma_x(&self) -> Self {
        Self::new(self.down, self.up)
    }

    pub fn sigma_y(&self) -> Self {
        Self::new(-I * self.down, I * self.up)
    }

    pub fn sigma_z(&self) -> Self {
        Self::new(self.up, -self.down)
    }

    pub fn sigma(&self, axis: usize) -> Self {
        match axis {
            0 => self.sigma_x(),
            1 => self.sigma_y(),
            2 => self.sigma_z(),
            _ => panic!("axis out of range"),
        }
    }

    /// F†G.
    pub fn inner(&self, other: &Spinor) -> C64 {
        self.up.conj() * other.up + self.down.conj() * other.down
    }

    pub fn norm_sqr(&self) -> f64 {
        self.up.norm_sqr() + self.down.norm_sqr()
    }

    /// F†σF as a real 3-vector.
    pub fn sigma_expectation(&self) -> Vec3 {
        let c = self.up.conj() * self.down;
        Vec3::new(2.0 * c.re, 2.0 * c.im, self.up.norm_sqr() - self.down.norm_sqr())
    }

    pub fn scale(&self, c: C64) -> Self {
        Self::new(self.up * c, self.down * c)
    }

    pub fn max_abs(&self) -> f64 {
        self.up.norm().max(self.down.norm())
    }
}

impl Add for Spinor {
    type Output = Spinor;
    fn add(self, o: Spinor) -> Spinor {
        Spinor::new(self.up + o.up, self.down + o.down)
    }
}

impl AddAssign for Spinor {
    fn add_assign(&mut self, o: Spinor) {
        self.up += o.up;
        self.down += o.down;
    }
}

impl Sub for Spinor {
    type Output = Spinor;
    fn sub(self, o: Spinor) -> Spinor {
        Spinor::new(self.up - o.up, self.down - o.down)
    }
}

impl Neg for Spinor {
    type Output = Spinor;
    fn neg(self) -> Spinor {
        Spinor::new(-self.up, -self.down)
    }
}

impl Mul<f64> for Spinor {
    type Output = Spinor;
    fn mul(self, k: f64) -> Spinor {
        Spinor::new(self.up * k, self.down * k)
    }
}

impl Mul<C64> for Spinor {
    type Output = Spinor;
    fn mul(self, k: C64) -> Spinor {
        self.scale(k)
    }
}

/// A static two-component field F(r).
pub trait SpinorField: Sync {
    fn value(&self, r: &Vec3) -> Spinor;
}

impl<F: Fn(&Vec3) -> Spinor + Sync> SpinorField for F {
    fn value(&self, r: &Vec3) -> Spinor {
        self(r)
    }
}

/// A time-dependent two-component field F(t, r).
pub trait SpinorEvolution: Sync {
    fn value(&self, t: f64, r: &Vec3) -> Spinor;
}

fn unit(axis: usize, h: f64) -> Vec3 {
    let mut e = Vec3::zeros();
    e[axis] = h;
    e
}

/// Fourth-order central first derivative along `axis`.
pub fn partial<T, F>(f: F, r: &Vec3, axis: usize, h: f64) -> T
where
    F: Fn(&Vec3) -> T,
    T: Add<Output = T> + Sub<Output = T> + Mul<f64, Output = T>,
{
    let e = unit(axis, h);
    let e2 = unit(axis, 2.0 * h);
    (f(&(r + e)) * 8.0 - f(&(r - e)) * 8.0 - f(&(r + e2)) + f(&(r - e2))) * (1.0 / (12.0 * h))
}

/// Fourth-order central Laplacian.
pub fn laplacian<F: Fn(&Vec3) -> Spinor>(f: F, r: &Vec3, h: f64) -> Spinor {
    let c = f(r);
    let mut acc = Spinor::ZERO;
    for axis in 0..3 {
        let e = unit(axis, h);
        let e2 = unit(axis, 2.0 * h);
        acc += (f(&(r + e)) * 16.0 + f(&(r - e)) * 16.0 - f(&(r + e2)) - f(&(r - e2)) - c * 30.0)
            * (1.0 / (12.0 * h * h));
    }
    acc
}

/// (σ·∇)F.
pub fn sigma_dot_grad<F: Fn(&Vec3) -> Spinor>(f: &F, r: &Vec3, h: f64) -> Spinor {
    let mut acc = Spinor::ZERO;
    for axis in 0..3 {
        acc += partial(f, r, axis, h).sigma(axis);
    }
    acc
}

/// (σ·∇)(σ·∇)F by nesting two first-derivative stencils.
pub fn sigma_dot_grad_squared<F: Fn(&Vec3) -> Spinor>(f: &F, r: &Vec3, h: f64) -> Spinor {
    let inner = |x: &Vec3| sigma_dot_grad(f, x, h);
    sigma_dot_grad(&inner, r, h)
}
