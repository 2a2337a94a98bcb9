use rayon::prelude::*;

use super::stepper::{SplitOperator, ROW_CHUNK};
use crate::error::{invalid, Result};
use crate::fields::{FieldConfig, Vec3};
use crate::spinor::{Spinor, C64, I};

/// Uniform Cartesian grid. An axis with a single node is inactive: no
/// derivative along it and unit length in the volume element, so
/// `n = [nx, ny, 1]` is a planar problem.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CartesianGrid {
    pub n: [usize; 3],
    pub lo: [f64; 3],
    pub h: [f64; 3],
}

impl CartesianGrid {
    pub fn new(n: [usize; 3], lo: [f64; 3], hi: [f64; 3]) -> Result<Self> {
        let mut h = [1.0; 3];
        for a in 0..3 {
            match n[a] {
                0 => return Err(invalid("n", "every axis needs at least one node")),
                1 => {}
                2..=4 => return Err(invalid("n", "active axes need at least 5 nodes")),
                _ => {
                    if !(lo[a].is_finite() && hi[a].is_finite() && hi[a] > lo[a]) {
                        return Err(invalid("hi", "bounds must be finite with hi > lo on active axes"));
                    }
                    h[a] = (hi[a] - lo[a]) / (n[a] - 1) as f64;
                }
            }
        }
        Ok(Self { n, lo, h })
    }

    pub fn planar(n: usize, half_width: f64) -> Result<Self> {
        Self::new([n, n, 1], [-half_width, -half_width, 0.0], [half_width, half_width, 0.0])
    }

    pub fn nodes(&self) -> usize {
        self.n.iter().product()
    }

    fn stride(&self, axis: usize) -> usize {
        match axis {
            0 => self.n[1] * self.n[2],
            1 => self.n[2],
            _ => 1,
        }
    }

    pub fn coords(&self, i: usize) -> [usize; 3] {
        [i / self.stride(0), (i / self.n[2]) % self.n[1], i % self.n[2]]
    }

    pub fn point(&self, i: usize) -> Vec3 {
        let c = self.coords(i);
        Vec3::new(
            self.lo[0] + c[0] as f64 * self.h[0],
            self.lo[1] + c[1] as f64 * self.h[1],
            self.lo[2] + c[2] as f64 * self.h[2],
        )
    }

    pub fn active(&self, axis: usize) -> bool {
        self.n[axis] > 1
    }

    /// Distance, in nodes, to the nearest pinned face along active axes.
    pub fn depth(&self, i: usize) -> usize {
        let c = self.coords(i);
        (0..3)
            .filter(|&a| self.active(a))
            .map(|a| c[a].min(self.n[a] - 1 - c[a]))
            .min()
            .unwrap_or(usize::MAX)
    }

    pub fn volume(&self) -> f64 {
        self.h.iter().product()
    }
}

/// −½(σ·Π)² + Φ with Π = ∇ − ikA, on a [`CartesianGrid`] with zero values
/// on the outer faces. The covariant derivative uses link phases
/// exp(−ik∫A·dl) (trapezoid rule), so a gauge term whose Θ is linear along
/// each link changes the discrete operator by an exact node-wise phase.
///
/// State layout: upper components, then lower components.
#[derive(Clone, Debug)]
pub struct CartesianPauli {
    pub grid: CartesianGrid,
    pub field: FieldConfig,
    diag: Vec<f64>,
    /// Link factor from node i to its +axis neighbour.
    links: [Vec<C64>; 3],
    /// −(k/2)(H_x − iH_y): coefficient of the lower component in the upper row.
    transverse: Vec<C64>,
    potential: Vec<f64>,
    laplacian_diagonal: f64,
}

impl CartesianPauli {
    pub fn new(grid: CartesianGrid, field: FieldConfig) -> Self {
        let n = grid.nodes();
        let k = field.coupling();
        let mut diag = vec![0.0; 2 * n];
        let mut transverse = vec![C64::new(0.0, 0.0); n];
        let mut potential = vec![0.0; n];
        for i in 0..n {
            let r = grid.point(i);
            let phi = field.scalar_potential(&r);
            potential[i] = phi;
            if grid.depth(i) == 0 {
                continue;
            }
            let h = field.magnetic_field(&r);
            diag[i] = phi - 0.5 * k * h.z;
            diag[n + i] = phi + 0.5 * k * h.z;
            transverse[i] = C64::new(h.x, -h.y) * (-0.5 * k);
        }
        let links = std::array::from_fn(|a| {
            if !grid.active(a) {
                return Vec::new();
            }
            let s = grid.stride(a);
            (0..n)
                .map(|i| {
                    if grid.coords(i)[a] + 1 >= grid.n[a] {
                        return C64::new(0.0, 0.0);
                    }
                    let a0 = field.vector_potential(&grid.point(i))[a];
                    let a1 = field.vector_potential(&grid.point(i + s))[a];
                    C64::from_polar(1.0, -k * grid.h[a] * 0.5 * (a0 + a1))
                })
                .collect()
        });
        Self {
            grid,
            field,
            diag,
            links,
            transverse,
            potential,
            laplacian_diagonal: (0..3)
                .filter(|&a| grid.active(a))
                .map(|a| 1.0 / (grid.h[a] * grid.h[a]))
                .sum(),
        }
    }

    /// Sample a spinor field given in the base gauge onto the grid, applying
    /// the phase e^{ikΘ} of any attached gauge terms. Faces are zeroed.
    pub fn sample<F: Fn(&Vec3) -> Spinor>(&self, f: F) -> Vec<C64> {
        let n = self.grid.nodes();
        let mut out = vec![C64::new(0.0, 0.0); 2 * n];
        for i in 0..n {
            if self.grid.depth(i) == 0 {
                continue;
            }
            let r = self.grid.point(i);
            let s = f(&r).scale(C64::from_polar(1.0, self.field.gauge_phase(&r)));
            out[i] = s.up;
            out[n + i] = s.down;
        }
        out
    }

    pub fn norm(&self, psi: &[C64]) -> f64 {
        psi.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.grid.volume()
    }

    /// ½∫F†σF.
    pub fn spin(&self, psi: &[C64]) -> Vec3 {
        let n = self.grid.nodes();
        let (up, down) = psi.split_at(n);
        let mut s = Vec3::zeros();
        for (u, d) in up.iter().zip(down) {
            let cross = u.conj() * d;
            s += Vec3::new(cross.re, cross.im, 0.5 * (u.norm_sqr() - d.norm_sqr()));
        }
        s * self.grid.volume()
    }

    pub fn density(&self, psi: &[C64]) -> Vec<f64> {
        let n = self.grid.nodes();
        (0..n).map(|i| psi[i].norm_sqr() + psi[n + i].norm_sqr()).collect()
    }

    fn link(&self, i: usize, axis: usize, forward: bool) -> C64 {
        if forward {
            self.links[axis][i]
        } else {
            self.links[axis][i - self.grid.stride(axis)].conj()
        }
    }

    /// Covariant central difference (Π_a ψ) at an interior node of one
    /// component slice.
    fn covariant(&self, comp: &[C64], i: usize, axis: usize) -> C64 {
        let s = self.grid.stride(axis);
        (self.link(i, axis, true) * comp[i + s] - self.link(i, axis, false) * comp[i - s]) / (2.0 * self.grid.h[axis])
    }

    /// (σ·Π)ψ at nodes of depth ≥ 1; zero elsewhere.
    fn sigma_dot_pi(&self, psi: &[C64]) -> Vec<C64> {
        let n = self.grid.nodes();
        let (up, down) = psi.split_at(n);
        let mut out = vec![C64::new(0.0, 0.0); 2 * n];
        for i in 0..n {
            if self.grid.depth(i) == 0 {
                continue;
            }
            let mut s = Spinor::ZERO;
            for a in (0..3).filter(|&a| self.grid.active(a)) {
                s += Spinor::new(self.covariant(up, i, a), self.covariant(down, i, a)).sigma(a);
            }
            out[i] = s.up;
            out[n + i] = s.down;
        }
        out
    }

    /// Max over nodes at depth ≥ 2 of |∂tF − (−σ·ΠG − iΦF)|, where ∂tF is
    /// the solver's own right-hand side −iOF and G = (1/2i)σ·ΠF. Both sides
    /// are second-order accurate, so this measures spatial truncation.
    pub fn first_order_residual(&self, psi: &[C64]) -> f64 {
        let n = self.grid.nodes();
        let mut rhs = vec![C64::new(0.0, 0.0); 2 * n];
        self.apply(psi, &mut rhs);
        let g: Vec<C64> = self.sigma_dot_pi(psi).into_iter().map(|z| z / (2.0 * I)).collect();
        let sg = self.sigma_dot_pi(&g);
        let mut worst = 0.0f64;
        for i in (0..n).filter(|&i| self.grid.depth(i) >= 2) {
            for c in 0..2 {
                let j = c * n + i;
                let first = -sg[j] - I * self.potential[i] * psi[j];
                worst = worst.max((-I * rhs[j] - first).norm());
            }
        }
        worst
    }
}

impl SplitOperator for CartesianPauli {
    fn len(&self) -> usize {
        2 * self.grid.nodes()
    }

    fn diagonal(&self) -> &[f64] {
        &self.diag
    }

    fn apply_offdiagonal(&self, x: &[C64], out: &mut [C64]) {
        let g = self.grid;
        let n = g.nodes();
        out.par_chunks_mut(ROW_CHUNK).enumerate().for_each(|(c, chunk)| {
            for (o, slot) in chunk.iter_mut().enumerate() {
                let row = c * ROW_CHUNK + o;
                let (comp, i) = if row < n { (0, row) } else { (1, row - n) };
                if g.depth(i) == 0 {
                    *slot = C64::new(0.0, 0.0);
                    continue;
                }
                let base = comp * n;
                // the Laplacian's diagonal stays here: in D it would put a
                // large frequency into the interaction picture
                let mut acc = x[base + i] * self.laplacian_diagonal;
                for a in (0..3).filter(|&a| g.active(a)) {
                    let s = g.stride(a);
                    let hop = self.link(i, a, true) * x[base + i + s] + self.link(i, a, false) * x[base + i - s];
                    acc -= hop * (0.5 / (g.h[a] * g.h[a]));
                }
                acc += if comp == 0 {
                    self.transverse[i] * x[n + i]
                } else {
                    self.transverse[i].conj() * x[i]
                };
                *slot = acc;
            }
        });
    }
}
