use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::spinor::{C64, I};

/// Rows per parallel work unit in operator application.
pub(crate) const ROW_CHUNK: usize = 1024;

/// A Hermitian operator split as O = D + N with D real diagonal.
pub trait SplitOperator: Sync {
    /// Number of complex unknowns.
    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn diagonal(&self) -> &[f64];

    /// out = N x.
    fn apply_offdiagonal(&self, x: &[C64], out: &mut [C64]);

    /// out = (D + N) x.
    fn apply(&self, x: &[C64], out: &mut [C64]) {
        self.apply_offdiagonal(x, out);
        let d = self.diagonal();
        out.par_chunks_mut(ROW_CHUNK).enumerate().for_each(|(c, chunk)| {
            let base = c * ROW_CHUNK;
            for (i, o) in chunk.iter_mut().enumerate() {
                *o += x[base + i] * d[base + i];
            }
        });
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepperKind {
    /// Classical RK4 on the full operator.
    Rk4,
    /// RK4 in the interaction picture of the diagonal part.
    #[default]
    Lawson,
}

/// Estimate of the spectral radius of N (Lawson) or D + N (RK4) from 20
/// power iterations.
pub fn spectral_radius<O: SplitOperator + ?Sized>(op: &O, kind: StepperKind) -> f64 {
    let n = op.len();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut v: Vec<C64> = (0..n).map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
    let mut w = vec![C64::new(0.0, 0.0); n];
    let mut rho = 0.0;
    for _ in 0..20 {
        let nv = norm(&v);
        if nv == 0.0 {
            return 0.0;
        }
        v.iter_mut().for_each(|z| *z /= nv);
        match kind {
            StepperKind::Rk4 => op.apply(&v, &mut w),
            StepperKind::Lawson => op.apply_offdiagonal(&v, &mut w),
        }
        rho = norm(&w);
        std::mem::swap(&mut v, &mut w);
    }
    rho
}

/// Largest stable step: RK4 is stable on the imaginary axis up to 2√2/ρ.
/// The power-iteration estimate is a lower bound on ρ, hence the margin.
pub fn stability_bound<O: SplitOperator + ?Sized>(op: &O, kind: StepperKind) -> f64 {
    let rho = spectral_radius(op, kind);
    if rho == 0.0 {
        f64::INFINITY
    } else {
        0.9 * 2.0 * std::f64::consts::SQRT_2 / rho
    }
}

pub(crate) fn norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Fixed-step integrator for i dψ/dt = O ψ.
pub struct Stepper {
    kind: StepperKind,
    h: f64,
    /// e^{−iDh/2}, Lawson only.
    half: Vec<C64>,
    k: [Vec<C64>; 4],
    tmp: Vec<C64>,
}

impl Stepper {
    pub fn new<O: SplitOperator + ?Sized>(op: &O, kind: StepperKind, h: f64) -> Self {
        let n = op.len();
        let half = match kind {
            StepperKind::Lawson => op.diagonal().iter().map(|d| C64::from_polar(1.0, -d * h / 2.0)).collect(),
            StepperKind::Rk4 => Vec::new(),
        };
        let z = || vec![C64::new(0.0, 0.0); n];
        Self {
            kind,
            h,
            half,
            k: [z(), z(), z(), z()],
            tmp: z(),
        }
    }

    pub fn step_size(&self) -> f64 {
        self.h
    }

    pub fn step<O: SplitOperator + ?Sized>(&mut self, op: &O, psi: &mut [C64]) {
        match self.kind {
            StepperKind::Rk4 => self.rk4(op, psi),
            StepperKind::Lawson => self.lawson(op, psi),
        }
    }

    fn rk4<O: SplitOperator + ?Sized>(&mut self, op: &O, psi: &mut [C64]) {
        let h = self.h;
        let [k1, k2, k3, k4] = &mut self.k;
        let tmp = &mut self.tmp;
        let rhs = |x: &[C64], out: &mut [C64]| {
            op.apply(x, out);
            out.par_iter_mut().for_each(|z| *z *= -I);
        };
        rhs(psi, k1);
        combine(tmp, psi, k1, h / 2.0);
        rhs(tmp, k2);
        combine(tmp, psi, k2, h / 2.0);
        rhs(tmp, k3);
        combine(tmp, psi, k3, h);
        rhs(tmp, k4);
        psi.par_iter_mut().enumerate().for_each(|(i, p)| {
            *p += (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * (h / 6.0);
        });
    }

    fn lawson<O: SplitOperator + ?Sized>(&mut self, op: &O, psi: &mut [C64]) {
        let h = self.h;
        let e = &self.half;
        let [k1, k2, k3, k4] = &mut self.k;
        let tmp = &mut self.tmp;
        let rhs = |x: &[C64], out: &mut [C64]| {
            op.apply_offdiagonal(x, out);
            out.par_iter_mut().for_each(|z| *z *= -I);
        };
        rhs(psi, k1);
        tmp.par_iter_mut().enumerate().for_each(|(i, t)| *t = e[i] * (psi[i] + k1[i] * (h / 2.0)));
        rhs(tmp, k2);
        tmp.par_iter_mut().enumerate().for_each(|(i, t)| *t = e[i] * psi[i] + k2[i] * (h / 2.0));
        rhs(tmp, k3);
        tmp.par_iter_mut().enumerate().for_each(|(i, t)| *t = e[i] * (e[i] * psi[i] + k3[i] * h));
        rhs(tmp, k4);
        psi.par_iter_mut().enumerate().for_each(|(i, p)| {
            let e1 = e[i];
            let e2 = e1 * e1;
            *p = e2 * *p + (e2 * k1[i] + e1 * (k2[i] + k3[i]) * 2.0 + k4[i]) * (h / 6.0);
        });
    }
}

fn combine(out: &mut [C64], x: &[C64], k: &[C64], a: f64) {
    out.par_iter_mut().enumerate().for_each(|(i, o)| *o = x[i] + k[i] * a);
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Tridiagonal test operator: D = diag(d), N = −½ Laplacian.
    struct Chain {
        d: Vec<f64>,
    }

    impl SplitOperator for Chain {
        fn len(&self) -> usize {
            self.d.len()
        }
        fn diagonal(&self) -> &[f64] {
            &self.d
        }
        fn apply_offdiagonal(&self, x: &[C64], out: &mut [C64]) {
            let n = x.len();
            for i in 0..n {
                let l = if i > 0 { x[i - 1] } else { C64::new(0.0, 0.0) };
                let r = if i + 1 < n { x[i + 1] } else { C64::new(0.0, 0.0) };
                out[i] = (x[i] * 2.0 - l - r) * 0.5;
            }
        }
    }

    fn dense_expm(op: &Chain, t: f64, psi: &[C64]) -> Vec<C64> {
        let n = op.len();
        let mut m = nalgebra::DMatrix::<f64>::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0 + op.d[i];
            if i + 1 < n {
                m[(i, i + 1)] = -0.5;
                m[(i + 1, i)] = -0.5;
            }
        }
        let eig = m.symmetric_eigen();
        let v = &eig.eigenvectors;
        (0..n)
            .map(|i| {
                let mut acc = C64::new(0.0, 0.0);
                for k in 0..n {
                    let mut c = C64::new(0.0, 0.0);
                    for j in 0..n {
                        c += psi[j] * v[(j, k)];
                    }
                    acc += C64::from_polar(1.0, -eig.eigenvalues[k] * t) * c * v[(i, k)];
                }
                acc
            })
            .collect()
    }

    #[test]
    fn both_steppers_converge_to_exact_propagator() {
        let n = 40;
        let op = Chain {
            d: (0..n).map(|i| 0.02 * (i as f64 - 20.0).powi(2)).collect(),
        };
        let psi0: Vec<C64> = (0..n)
            .map(|i| C64::new((-(i as f64 - 15.0).powi(2) / 8.0).exp(), 0.0))
            .collect();
        let exact = dense_expm(&op, 2.0, &psi0);
        for kind in [StepperKind::Rk4, StepperKind::Lawson] {
            let mut errs = Vec::new();
            for steps in [100, 200] {
                let mut psi = psi0.clone();
                let mut s = Stepper::new(&op, kind, 2.0 / steps as f64);
                for _ in 0..steps {
                    s.step(&op, &mut psi);
                }
                let e = psi.iter().zip(&exact).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
                errs.push(e);
            }
            // fourth order: halving h divides the error by about 16
            assert!(errs[0] / errs[1] > 12.0, "{kind:?} {errs:?}");
            assert!(errs[1] < 1e-6);
        }
    }

    #[test]
    fn lawson_is_exact_for_diagonal_operators() {
        struct Diag(Vec<f64>);
        impl SplitOperator for Diag {
            fn len(&self) -> usize {
                self.0.len()
            }
            fn diagonal(&self) -> &[f64] {
                &self.0
            }
            fn apply_offdiagonal(&self, _: &[C64], out: &mut [C64]) {
                out.iter_mut().for_each(|z| *z = C64::new(0.0, 0.0));
            }
        }
        let op = Diag(vec![1e4, -3.0, 0.0]);
        let mut psi = vec![C64::new(1.0, 0.0); 3];
        let mut s = Stepper::new(&op, StepperKind::Lawson, 0.1);
        for _ in 0..10 {
            s.step(&op, &mut psi);
        }
        for (p, d) in psi.iter().zip(&op.0) {
            assert!((p - C64::from_polar(1.0, -d * 1.0)).norm() < 1e-9);
        }
    }

    #[test]
    fn spectral_radius_of_chain() {
        let op = Chain { d: vec![0.0; 200] };
        // eigenvalues of N lie in (0, 2)
        let rho = spectral_radius(&op, StepperKind::Lawson);
        assert!(rho > 1.8 && rho <= 2.0);
        assert!(stability_bound(&op, StepperKind::Lawson) > 1.2);
    }
}
