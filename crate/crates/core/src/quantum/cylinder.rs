use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::stepper::{SplitOperator, ROW_CHUNK};
use crate::error::{invalid, require_positive, Error, Result};
use crate::fields::Vec3;
use crate::spinor::C64;

/// Staggered radial nodes r_j = (j + ½)Δr, uniform z nodes including both
/// ends. Rows j = n_r − 1, k = 0 and k = n_z − 1 are held at zero.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridGeometry {
    pub n_r: usize,
    pub n_z: usize,
    pub r_max: f64,
    pub z_min: f64,
    pub z_max: f64,
}

/// Desk grid: Δr = 0.5, Δz ≈ 1. The radial spacing sets the accuracy of
/// s_z; r_max = 100 keeps the outgoing radial tail off the wall past t = 40.
impl Default for GridGeometry {
    fn default() -> Self {
        Self {
            n_r: 200,
            n_z: 300,
            r_max: 100.0,
            z_min: -100.0,
            z_max: 200.0,
        }
    }
}

impl GridGeometry {
    /// The grid of the published calculation.
    pub fn full() -> Self {
        Self {
            n_r: 200,
            n_z: 600,
            r_max: 200.0,
            ..Self::default()
        }
    }

    /// Half the published resolution in both directions. Δr = 2 is too
    /// coarse for s_z past t ≈ 10.
    pub fn half() -> Self {
        Self {
            n_r: 100,
            n_z: 300,
            r_max: 200.0,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_r < 8 {
            return Err(invalid("n_r", format!("must be at least 8 (got {})", self.n_r)));
        }
        if self.n_z < 8 {
            return Err(invalid("n_z", format!("must be at least 8 (got {})", self.n_z)));
        }
        require_positive("r_max", self.r_max)?;
        if !(self.z_min.is_finite() && self.z_max.is_finite() && self.z_max > self.z_min) {
            return Err(invalid("z_max", "z bounds must be finite with z_max > z_min"));
        }
        Ok(())
    }

    pub fn dr(&self) -> f64 {
        self.r_max / self.n_r as f64
    }

    pub fn dz(&self) -> f64 {
        (self.z_max - self.z_min) / (self.n_z - 1) as f64
    }

    pub fn r(&self, j: usize) -> f64 {
        (j as f64 + 0.5) * self.dr()
    }

    pub fn z(&self, k: usize) -> f64 {
        self.z_min + k as f64 * self.dz()
    }

    pub fn nodes(&self) -> usize {
        self.n_r * self.n_z
    }

    pub fn index(&self, j: usize, k: usize) -> usize {
        j * self.n_z + k
    }

    pub fn is_pinned(&self, j: usize, k: usize) -> bool {
        j == self.n_r - 1 || k == 0 || k == self.n_z - 1
    }

    /// Nodes next to a pinned row, where outgoing amplitude first shows.
    pub fn is_outer_layer(&self, j: usize, k: usize) -> bool {
        !self.is_pinned(j, k) && (j == self.n_r - 2 || k == 1 || k == self.n_z - 2)
    }

    pub fn z_nodes(&self) -> Vec<f64> {
        (0..self.n_z).map(|k| self.z(k)).collect()
    }
}

/// Upper and lower components of G = √r F on the grid, F being the n = 0
/// sector spinor (upper component independent of φ, lower ∝ e^{iφ}).
#[derive(Clone, Debug, PartialEq)]
pub struct SpinorGrid {
    pub geometry: GridGeometry,
    /// Upper components followed by lower components, node index j·n_z + k.
    pub values: Vec<C64>,
    pub t: f64,
}

impl SpinorGrid {
    pub fn zeros(geometry: GridGeometry) -> Result<Self> {
        geometry.validate()?;
        Ok(Self {
            geometry,
            values: vec![C64::new(0.0, 0.0); 2 * geometry.nodes()],
            t: 0.0,
        })
    }

    pub fn up(&self, j: usize, k: usize) -> C64 {
        self.values[self.geometry.index(j, k)]
    }

    pub fn down(&self, j: usize, k: usize) -> C64 {
        self.values[self.geometry.nodes() + self.geometry.index(j, k)]
    }

    fn cell(&self) -> f64 {
        2.0 * PI * self.geometry.dr() * self.geometry.dz()
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.cell()
    }

    /// ½∫F†σF. The azimuthal integral removes the x and y components
    /// exactly in this sector.
    pub fn spin(&self) -> Vec3 {
        let n = self.geometry.nodes();
        let (up, down) = self.values.split_at(n);
        let sz: f64 = up.iter().zip(down).map(|(u, d)| u.norm_sqr() - d.norm_sqr()).sum();
        Vec3::new(0.0, 0.0, 0.5 * sz * self.cell())
    }

    /// Radially integrated density per z node; integrates to the norm.
    pub fn pz(&self) -> Vec<f64> {
        let g = self.geometry;
        let n = g.nodes();
        (0..g.n_z)
            .map(|k| {
                (0..g.n_r)
                    .map(|j| {
                        let i = g.index(j, k);
                        self.values[i].norm_sqr() + self.values[n + i].norm_sqr()
                    })
                    .sum::<f64>()
                    * 2.0
                    * PI
                    * g.dr()
            })
            .collect()
    }

    /// ⟨z⟩ and Var(z) of the density.
    pub fn z_moments(&self) -> (f64, f64) {
        let g = self.geometry;
        let pz = self.pz();
        let total: f64 = pz.iter().sum();
        let mean = pz.iter().enumerate().map(|(k, p)| p * g.z(k)).sum::<f64>() / total;
        let var = pz.iter().enumerate().map(|(k, p)| p * (g.z(k) - mean).powi(2)).sum::<f64>() / total;
        (mean, var)
    }

    /// ⟨x² + y² + z²⟩.
    pub fn r2_moment(&self) -> f64 {
        let g = self.geometry;
        let n = g.nodes();
        let mut acc = 0.0;
        for j in 0..g.n_r {
            for k in 0..g.n_z {
                let i = g.index(j, k);
                let p = self.values[i].norm_sqr() + self.values[n + i].norm_sqr();
                acc += p * (g.r(j).powi(2) + g.z(k).powi(2));
            }
        }
        acc * self.cell() / self.norm()
    }

    /// Largest |G| on the layer next to the pinned rows, relative to the
    /// largest |G| anywhere.
    pub fn boundary_amplitude(&self) -> f64 {
        let g = self.geometry;
        let n = g.nodes();
        let mut edge = 0.0f64;
        let mut peak = 0.0f64;
        for j in 0..g.n_r {
            for k in 0..g.n_z {
                let i = g.index(j, k);
                let a = self.values[i].norm().max(self.values[n + i].norm());
                peak = peak.max(a);
                if g.is_outer_layer(j, k) {
                    edge = edge.max(a);
                }
            }
        }
        if peak == 0.0 {
            0.0
        } else {
            edge / peak
        }
    }

    pub fn observables(&self) -> QuantumObservables {
        QuantumObservables {
            spin: self.spin(),
            pz: self.pz(),
            norm: self.norm(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct QuantumObservables {
    pub spin: Vec3,
    pub pz: Vec<f64>,
    pub norm: f64,
}

/// √r f₀(ρ) cos(α/2) e^{−iβ/2} in the upper component with
/// f₀ = (d³π^{3/2})^{−½} exp(−ρ²/(2d²)), renormalized on the grid.
pub fn initialize_spinor(geometry: GridGeometry, d: f64, alpha: f64, beta: f64) -> Result<SpinorGrid> {
    require_positive("d", d)?;
    if alpha != 0.0 {
        return Err(Error::Unsupported(
            "tilted initial spin (alpha != 0) needs the second azimuthal sector; only alpha = 0 is implemented"
                .into(),
        ));
    }
    if !beta.is_finite() {
        return Err(invalid("beta", "must be finite"));
    }
    let mut grid = SpinorGrid::zeros(geometry)?;
    let g = geometry;
    let amp = (d.powi(3) * PI.powf(1.5)).powf(-0.5);
    let phase = C64::from_polar(1.0, -beta / 2.0);
    for j in 0..g.n_r {
        for k in 0..g.n_z {
            if g.is_pinned(j, k) {
                continue;
            }
            let (r, z) = (g.r(j), g.z(k));
            let f0 = amp * (-(r * r + z * z) / (2.0 * d * d)).exp();
            grid.values[g.index(j, k)] = phase * (r.sqrt() * f0);
        }
    }
    let norm = grid.norm();
    if !(norm > 0.0) {
        return Err(invalid("d", "initial state has no weight on the grid"));
    }
    let s = norm.sqrt().recip();
    grid.values.iter_mut().for_each(|v| *v *= s);
    Ok(grid)
}

/// Finite-difference form of
/// O = −½[∂r² + ∂z² + (σz − ½)/(2r²) − ε²z²r²] + (ε/2) r σx − ½εz(σz + I)
/// acting on G. The radial second derivative is the conservative
/// cylindrical stencil written for G, so the operator is real symmetric.
#[derive(Clone, Debug)]
pub struct PauliOperator {
    pub geometry: GridGeometry,
    pub epsilon: f64,
    diag: Vec<f64>,
    /// Radial coupling between j and j + 1.
    radial_off: Vec<f64>,
}

impl PauliOperator {
    pub fn new(geometry: GridGeometry, epsilon: f64) -> Result<Self> {
        geometry.validate()?;
        if !epsilon.is_finite() {
            return Err(invalid("epsilon", "must be finite"));
        }
        let g = geometry;
        let n = g.nodes();
        let hr = g.dr();
        let radial_off = (0..g.n_r - 1)
            .map(|j| {
                let rm = (j as f64 + 1.0) * hr;
                rm / (hr * hr * (g.r(j) * g.r(j + 1)).sqrt())
            })
            .collect();
        let mut diag = vec![0.0; 2 * n];
        for j in 0..g.n_r {
            for k in 0..g.n_z {
                if g.is_pinned(j, k) {
                    continue;
                }
                let (r, z) = (g.r(j), g.z(k));
                let i = g.index(j, k);
                let trap = 0.5 * epsilon * epsilon * z * z * r * r;
                // the stencil already contains +1/(4r²); the remainder of
                // the centrifugal term is 0 (upper) and 1/(2r²) (lower)
                diag[i] = trap - epsilon * z;
                diag[n + i] = trap + 0.5 / (r * r);
            }
        }
        Ok(Self {
            geometry,
            epsilon,
            diag,
            radial_off,
        })
    }

    /// ⟨a|O b⟩ on the grid's inner product (without the cell volume).
    pub fn expectation(&self, a: &[C64], b: &[C64]) -> C64 {
        let mut ob = vec![C64::new(0.0, 0.0); b.len()];
        self.apply(b, &mut ob);
        a.iter().zip(&ob).map(|(x, y)| x.conj() * y).sum()
    }
}

impl SplitOperator for PauliOperator {
    fn len(&self) -> usize {
        2 * self.geometry.nodes()
    }

    fn diagonal(&self) -> &[f64] {
        &self.diag
    }

    fn apply_offdiagonal(&self, x: &[C64], out: &mut [C64]) {
        let g = self.geometry;
        let n = g.nodes();
        let (nr, nz) = (g.n_r, g.n_z);
        let ir2 = 1.0 / (g.dr() * g.dr());
        let iz2 = 1.0 / (g.dz() * g.dz());
        let eps = self.epsilon;
        let off = &self.radial_off;
        out.par_chunks_mut(ROW_CHUNK).enumerate().for_each(|(c, chunk)| {
            for (o, slot) in chunk.iter_mut().enumerate() {
                let row = c * ROW_CHUNK + o;
                let (comp, i) = if row < n { (0, row) } else { (1, row - n) };
                let (j, k) = (i / nz, i % nz);
                if j == nr - 1 || k == 0 || k == nz - 1 {
                    *slot = C64::new(0.0, 0.0);
                    continue;
                }
                let base = comp * n;
                let v = x[base + i];
                let mut lap = v * (-2.0 * ir2 - 2.0 * iz2);
                if j > 0 {
                    lap += x[base + i - nz] * off[j - 1];
                }
                lap += x[base + i + nz] * off[j];
                lap += (x[base + i - 1] + x[base + i + 1]) * iz2;
                let other = if comp == 0 { x[n + i] } else { x[i] };
                *slot = lap * -0.5 + other * (0.5 * eps * g.r(j));
            }
        });
    }
}
