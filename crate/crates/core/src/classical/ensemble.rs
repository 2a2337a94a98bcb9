use rayon::prelude::*;

use super::{advance, PhasePoint, TrajectoryOptions};
use crate::analytic::OscillatorFieldSolution;
use crate::error::{invalid, Error, Result};
use crate::fields::{FieldConfig, Vec3};
use crate::phase_space::{draw_sample, PhaseDensity};

/// Trajectories per reduction chunk. Fixed so the summation order never
/// depends on the worker count.
const CHUNK: usize = 256;
/// Chunks evaluated in parallel before folding into the running totals.
const BATCH: usize = 64;
/// Bins with fewer samples than this are left out of density comparisons.
const MIN_BIN_COUNT: u64 = 10;

/// Uniform histogram bins over z.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ZBins {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl Default for ZBins {
    fn default() -> Self {
        Self {
            min: -100.0,
            max: 200.0,
            count: 300,
        }
    }
}

impl ZBins {
    pub fn width(&self) -> f64 {
        (self.max - self.min) / self.count as f64
    }

    pub fn centers(&self) -> Vec<f64> {
        (0..self.count).map(|i| self.min + (i as f64 + 0.5) * self.width()).collect()
    }

    fn index(&self, z: f64) -> Option<usize> {
        if !(z >= self.min && z < self.max) {
            return None;
        }
        Some((((z - self.min) / self.width()) as usize).min(self.count - 1))
    }
}

/// Annular bins over the planar radius √(x² + y²).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RadialBins {
    pub max: f64,
    pub count: usize,
}

impl RadialBins {
    pub fn edges(&self, i: usize) -> (f64, f64) {
        let w = self.max / self.count as f64;
        (i as f64 * w, (i + 1) as f64 * w)
    }

    fn index(&self, rho: f64) -> Option<usize> {
        if !(rho >= 0.0 && rho < self.max) {
            return None;
        }
        Some(((rho / self.max * self.count as f64) as usize).min(self.count - 1))
    }
}

#[derive(Clone, Debug)]
pub struct EnsembleConfig {
    pub n: usize,
    pub seed: u64,
    /// Output times, increasing, all ≥ 0.
    pub times: Vec<f64>,
    pub options: TrajectoryOptions,
    pub z_bins: Option<ZBins>,
    pub radial_bins: Option<RadialBins>,
}

impl EnsembleConfig {
    pub fn new(n: usize, seed: u64, times: Vec<f64>) -> Self {
        Self {
            n,
            seed,
            times,
            options: TrajectoryOptions::default(),
            z_bins: Some(ZBins::default()),
            radial_bins: None,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(invalid("n_trajectories", "must be at least 1"));
        }
        if self.times.is_empty() {
            return Err(invalid("times", "at least one output time is required"));
        }
        if self.times.iter().any(|t| !t.is_finite() || *t < 0.0) {
            return Err(invalid("times", "output times must be finite and non-negative"));
        }
        if self.times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(invalid("times", "output times must be strictly increasing"));
        }
        if let Some(z) = &self.z_bins {
            if z.count == 0 || !(z.max > z.min) {
                return Err(invalid("z_bins", "need count ≥ 1 and max > min"));
            }
        }
        if let Some(r) = &self.radial_bins {
            if r.count == 0 || !(r.max > 0.0) {
                return Err(invalid("radial_bins", "need count ≥ 1 and max > 0"));
            }
        }
        self.options.validate()
    }
}

#[derive(Clone, Debug)]
pub struct EnsembleObservables {
    pub times: Vec<f64>,
    /// Σ Sign·s / Σ Sign per output time.
    pub spin: Vec<Vec3>,
    /// Delta-method standard error of `spin`.
    pub spin_stderr: Vec<Vec3>,
    pub sign_sum: f64,
    /// Trajectories that stayed finite and entered the averages.
    pub used: usize,
    pub divergent: usize,
    pub z_bins: Option<ZBins>,
    /// P(z) per output time, normalized by Σ Sign.
    pub pz: Vec<Vec<f64>>,
    /// Signed mean of x² + y² per output time.
    pub planar_r2: Vec<f64>,
    pub planar_r2_stderr: Vec<f64>,
    pub radial_bins: Option<RadialBins>,
    /// Annulus-averaged planar density per output time.
    pub radial_density: Vec<Vec<f64>>,
    pub radial_counts: Vec<Vec<u64>>,
}

#[derive(Clone, Debug)]
struct Partial {
    w: Vec<f64>,
    ws: Vec<Vec3>,
    s1: Vec<Vec3>,
    s2: Vec<Vec3>,
    wr2: Vec<f64>,
    r2: Vec<f64>,
    r4: Vec<f64>,
    z_hist: Vec<f64>,
    radial_hist: Vec<f64>,
    radial_counts: Vec<u64>,
    used: usize,
    divergent: usize,
}

impl Partial {
    fn new(nt: usize, nz: usize, nr: usize) -> Self {
        Self {
            w: vec![0.0; nt],
            ws: vec![Vec3::zeros(); nt],
            s1: vec![Vec3::zeros(); nt],
            s2: vec![Vec3::zeros(); nt],
            wr2: vec![0.0; nt],
            r2: vec![0.0; nt],
            r4: vec![0.0; nt],
            z_hist: vec![0.0; nt * nz],
            radial_hist: vec![0.0; nt * nr],
            radial_counts: vec![0; nt * nr],
            used: 0,
            divergent: 0,
        }
    }

    fn absorb(&mut self, o: &Partial) {
        fn add<T: Copy + std::ops::AddAssign>(a: &mut [T], b: &[T]) {
            a.iter_mut().zip(b).for_each(|(x, y)| *x += *y);
        }
        add(&mut self.w, &o.w);
        add(&mut self.ws, &o.ws);
        add(&mut self.s1, &o.s1);
        add(&mut self.s2, &o.s2);
        add(&mut self.wr2, &o.wr2);
        add(&mut self.r2, &o.r2);
        add(&mut self.r4, &o.r4);
        add(&mut self.z_hist, &o.z_hist);
        add(&mut self.radial_hist, &o.radial_hist);
        add(&mut self.radial_counts, &o.radial_counts);
        self.used += o.used;
        self.divergent += o.divergent;
    }
}

/// Delta-method standard error of Σ wᵢxᵢ / Σ wᵢ for wᵢ = ±1.
fn ratio_stderr(sum_w: f64, ratio: f64, sum_x: f64, sum_x2: f64, count: f64) -> f64 {
    let v = sum_x2 - 2.0 * ratio * sum_x + ratio * ratio * count;
    v.max(0.0).sqrt() / sum_w.abs()
}

/// Sample `cfg.n` initial conditions from `density`, integrate each and
/// accumulate the signed spin estimator and position histograms at the
/// configured output times. Results depend only on (density, cfg), not on
/// the number of worker threads.
pub fn run_ensemble(
    field: &FieldConfig,
    density: &dyn PhaseDensity,
    spin0: Vec3,
    cfg: &EnsembleConfig,
) -> Result<EnsembleObservables> {
    cfg.validate()?;
    let mass = density.abs_mass_bound();
    if !mass.is_finite() || mass <= 0.0 {
        return Err(Error::NonIntegrable);
    }
    let nt = cfg.times.len();
    let nz = cfg.z_bins.map_or(0, |z| z.count);
    let nr = cfg.radial_bins.map_or(0, |r| r.count);

    let run_chunk = |chunk: usize| -> Partial {
        let mut acc = Partial::new(nt, nz, nr);
        let start = chunk * CHUNK;
        let end = (start + CHUNK).min(cfg.n);
        let mut states = Vec::with_capacity(nt);
        for i in start..end {
            let sample = draw_sample(density, spin0, cfg.seed, i as u64);
            let mut x = PhasePoint::from_sample(&sample);
            let mut t_prev = 0.0;
            states.clear();
            for &t in &cfg.times {
                match advance(field, &cfg.options, &x, t - t_prev) {
                    Some(y) => x = y,
                    None => break,
                }
                t_prev = t;
                states.push(x);
            }
            if states.len() < nt {
                acc.divergent += 1;
                continue;
            }
            acc.used += 1;
            let w = sample.weight_sign;
            for (k, x) in states.iter().enumerate() {
                acc.w[k] += w;
                acc.ws[k] += x.s * w;
                acc.s1[k] += x.s;
                acc.s2[k] += x.s.component_mul(&x.s);
                let rho2 = x.r.x * x.r.x + x.r.y * x.r.y;
                acc.wr2[k] += w * rho2;
                acc.r2[k] += rho2;
                acc.r4[k] += rho2 * rho2;
                if let Some(b) = cfg.z_bins.and_then(|z| z.index(x.r.z)) {
                    acc.z_hist[k * nz + b] += w;
                }
                if let Some(b) = cfg.radial_bins.and_then(|rb| rb.index(rho2.sqrt())) {
                    acc.radial_hist[k * nr + b] += w;
                    acc.radial_counts[k * nr + b] += 1;
                }
            }
        }
        acc
    };

    let n_chunks = cfg.n.div_ceil(CHUNK);
    let mut total = Partial::new(nt, nz, nr);
    for batch_start in (0..n_chunks).step_by(BATCH) {
        let batch_end = (batch_start + BATCH).min(n_chunks);
        let partials: Vec<Partial> = (batch_start..batch_end).into_par_iter().map(run_chunk).collect();
        for p in &partials {
            total.absorb(p);
        }
    }

    if total.divergent * 100 > cfg.n {
        return Err(Error::TooManyDivergent {
            divergent: total.divergent,
            total: cfg.n,
        });
    }

    let count = total.used as f64;
    let mut spin = Vec::with_capacity(nt);
    let mut spin_stderr = Vec::with_capacity(nt);
    let mut planar_r2 = Vec::with_capacity(nt);
    let mut planar_r2_stderr = Vec::with_capacity(nt);
    let mut pz = Vec::with_capacity(nt);
    let mut radial_density = Vec::with_capacity(nt);
    let mut radial_counts = Vec::with_capacity(nt);
    for k in 0..nt {
        let sw = total.w[k];
        let s = total.ws[k] / sw;
        spin.push(s);
        spin_stderr.push(Vec3::from_fn(|c, _| {
            ratio_stderr(sw, s[c], total.s1[k][c], total.s2[k][c], count)
        }));
        let m = total.wr2[k] / sw;
        planar_r2.push(m);
        planar_r2_stderr.push(ratio_stderr(sw, m, total.r2[k], total.r4[k], count));
        if let Some(z) = cfg.z_bins {
            pz.push(total.z_hist[k * nz..(k + 1) * nz].iter().map(|h| h / (sw * z.width())).collect());
        }
        if let Some(rb) = cfg.radial_bins {
            radial_density.push(
                (0..nr)
                    .map(|b| {
                        let (a, c) = rb.edges(b);
                        total.radial_hist[k * nr + b] / (sw * std::f64::consts::PI * (c * c - a * a))
                    })
                    .collect(),
            );
            radial_counts.push(total.radial_counts[k * nr..(k + 1) * nr].to_vec());
        }
    }
    Ok(EnsembleObservables {
        times: cfg.times.clone(),
        spin,
        spin_stderr,
        sign_sum: total.w.first().copied().unwrap_or(0.0),
        used: total.used,
        divergent: total.divergent,
        z_bins: cfg.z_bins,
        pz,
        planar_r2,
        planar_r2_stderr,
        radial_bins: cfg.radial_bins,
        radial_density,
        radial_counts,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct DensityComparison {
    pub t: f64,
    /// √⟨x² + y²⟩ from the ensemble.
    pub fitted_width: f64,
    /// Width w of the closed form P ∝ exp(−r²/w²).
    pub analytic_width: f64,
    pub width_relative_error: f64,
    /// Largest |histogram − exact annulus average| over compared bins.
    pub max_deviation: f64,
    pub compared_bins: usize,
    /// Bins skipped for having fewer than ten samples.
    pub excluded_bins: usize,
}

/// Compare the ensemble's planar density at output index `k` with the
/// closed-form P(r, t) of the trapped-charge solution.
pub fn density_vs_analytic(
    obs: &EnsembleObservables,
    sol: &OscillatorFieldSolution,
    k: usize,
) -> Result<DensityComparison> {
    if k >= obs.times.len() {
        return Err(invalid("k", format!("output index {k} out of range")));
    }
    let t = obs.times[k];
    let den = sol.densities(t);
    let fitted_width = obs.planar_r2[k].max(0.0).sqrt();
    let analytic_width = den.position_second_moment().sqrt();
    let (mut max_deviation, mut compared, mut excluded) = (0.0f64, 0, 0);
    if let Some(rb) = obs.radial_bins {
        for b in 0..rb.count {
            if obs.radial_counts[k][b] < MIN_BIN_COUNT {
                excluded += 1;
                continue;
            }
            let (a, c) = rb.edges(b);
            let kk = den.p_coeff;
            let exact = den.p_norm * std::f64::consts::PI / kk * ((-kk * a * a).exp() - (-kk * c * c).exp())
                / (std::f64::consts::PI * (c * c - a * a));
            max_deviation = max_deviation.max((obs.radial_density[k][b] - exact).abs());
            compared += 1;
        }
    }
    Ok(DensityComparison {
        t,
        fitted_width,
        analytic_width,
        width_relative_error: (fitted_width - analytic_width).abs() / analytic_width,
        max_deviation,
        compared_bins: compared,
        excluded_bins: excluded,
    })
}
