use std::fmt;

use super::series::{DensitySeries, Series, VectorSeries};
use super::HarnessError;
use crate::error::Error;
use crate::fields::Vec3;

const TIME_MATCH: f64 = 1e-9;

/// Deviations of series `a` from the reference series `b`.
#[derive(Clone, Debug, PartialEq)]
pub struct ComparisonReport {
    pub threshold: f64,
    pub times: Vec<f64>,
    /// |a − b| of the full vector, per time.
    pub vector_deviation: Vec<f64>,
    /// |a_z − b_z| / |b_z|, per time.
    pub relative_z_deviation: Vec<f64>,
    /// First time with relative_z_deviation above the threshold; `None`
    /// when the series agree throughout.
    pub horizon: Option<f64>,
    pub density: Option<DensityDeviation>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DensityDeviation {
    pub times: Vec<f64>,
    pub sup: Vec<f64>,
    pub l1: Vec<f64>,
}

impl ComparisonReport {
    pub fn horizon_text(&self) -> String {
        self.horizon.map_or_else(|| "inf".to_string(), |t| t.to_string())
    }

    pub fn max_vector_deviation(&self) -> f64 {
        self.vector_deviation.iter().copied().fold(0.0, f64::max)
    }

    /// Largest relative s_z deviation over times ≤ `t_max`.
    pub fn max_relative_z_until(&self, t_max: f64) -> f64 {
        self.times
            .iter()
            .zip(&self.relative_z_deviation)
            .filter(|(t, _)| **t <= t_max + TIME_MATCH)
            .map(|(_, d)| *d)
            .fold(0.0, f64::max)
    }

    pub fn max_l1_until(&self, t_max: f64) -> Option<f64> {
        self.density.as_ref().map(|d| {
            d.times
                .iter()
                .zip(&d.l1)
                .filter(|(t, _)| **t <= t_max + TIME_MATCH)
                .map(|(_, x)| *x)
                .fold(0.0, f64::max)
        })
    }
}

impl fmt::Display for ComparisonReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "threshold = {}", self.threshold)?;
        writeln!(f, "horizon = {}", self.horizon_text())?;
        if !self.times.is_empty() {
            writeln!(f, "t,vector_deviation,relative_z_deviation")?;
            for i in 0..self.times.len() {
                writeln!(f, "{},{},{}", self.times[i], self.vector_deviation[i], self.relative_z_deviation[i])?;
            }
        }
        if let Some(d) = &self.density {
            writeln!(f, "t,density_sup,density_l1")?;
            for i in 0..d.times.len() {
                writeln!(f, "{},{},{}", d.times[i], d.sup[i], d.l1[i])?;
            }
        }
        Ok(())
    }
}

fn relative(a: f64, b: f64) -> f64 {
    let d = (a - b).abs();
    if d == 0.0 {
        0.0
    } else if b == 0.0 {
        f64::INFINITY
    } else {
        d / b.abs()
    }
}

/// Value of `b` at time t: exact match or linear interpolation between the
/// two neighbouring samples.
fn sample_at(b: &VectorSeries, t: f64) -> Option<Vec3> {
    let i = b.t.partition_point(|&x| x < t - TIME_MATCH);
    if i < b.t.len() && (b.t[i] - t).abs() <= TIME_MATCH {
        return Some(b.v[i]);
    }
    if i == 0 || i == b.t.len() {
        return None;
    }
    let (t0, t1) = (b.t[i - 1], b.t[i]);
    let w = (t - t0) / (t1 - t0);
    Some(b.v[i - 1] * (1.0 - w) + b.v[i] * w)
}

pub fn compare_vectors(a: &VectorSeries, b: &VectorSeries, threshold: f64) -> Result<ComparisonReport, HarnessError> {
    if !(threshold.is_finite() && threshold > 0.0) {
        return Err(HarnessError::Config(format!("`threshold`: must be positive (got {threshold})")));
    }
    if a.symbol != b.symbol {
        return Err(Error::SeriesMismatch(format!("columns {}_* vs {}_*", a.symbol, b.symbol)).into());
    }
    let mut report = ComparisonReport {
        threshold,
        times: Vec::new(),
        vector_deviation: Vec::new(),
        relative_z_deviation: Vec::new(),
        horizon: None,
        density: None,
    };
    for (t, va) in a.t.iter().zip(&a.v) {
        let Some(vb) = sample_at(b, *t) else { continue };
        let rel = relative(va.z, vb.z);
        if report.horizon.is_none() && rel > threshold {
            report.horizon = Some(*t);
        }
        report.times.push(*t);
        report.vector_deviation.push((va - vb).norm());
        report.relative_z_deviation.push(rel);
    }
    if report.times.is_empty() {
        return Err(Error::DisjointSeries.into());
    }
    Ok(report)
}

/// Linear interpolation of (zs, ps) at z, zero outside the table.
fn interpolate(zs: &[f64], ps: &[f64], z: f64) -> f64 {
    let i = zs.partition_point(|&x| x < z);
    if i < zs.len() && zs[i] == z {
        return ps[i];
    }
    if i == 0 || i == zs.len() {
        return 0.0;
    }
    let w = (z - zs[i - 1]) / (zs[i] - zs[i - 1]);
    ps[i - 1] * (1.0 - w) + ps[i] * w
}

/// Sup and L1 distance of `a` from `b` at common times, with `b`
/// interpolated onto `a`'s abscissae and L1 taken with `a`'s cell widths.
pub fn compare_densities(a: &DensitySeries, b: &DensitySeries) -> Result<DensityDeviation, HarnessError> {
    let mut out = DensityDeviation {
        times: Vec::new(),
        sup: Vec::new(),
        l1: Vec::new(),
    };
    for (k, t) in a.t.iter().enumerate() {
        let Some(j) = b.t.iter().position(|x| (x - t).abs() <= TIME_MATCH) else {
            continue;
        };
        let za = &a.x[k];
        if za.windows(2).any(|w| w[1] <= w[0]) || b.x[j].windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::SeriesMismatch(format!("z values at t = {t} are not increasing")).into());
        }
        let (mut sup, mut l1) = (0.0f64, 0.0);
        for (i, (z, pa)) in za.iter().zip(&a.density[k]).enumerate() {
            let d = (pa - interpolate(&b.x[j], &b.density[j], *z)).abs();
            let width = match (i.checked_sub(1).map(|p| za[p]), za.get(i + 1)) {
                (Some(lo), Some(hi)) => 0.5 * (hi - lo),
                (None, Some(hi)) => hi - z,
                (Some(lo), None) => z - lo,
                (None, None) => 1.0,
            };
            sup = sup.max(d);
            l1 += d * width;
        }
        out.times.push(*t);
        out.sup.push(sup);
        out.l1.push(l1);
    }
    if out.times.is_empty() {
        return Err(Error::DisjointSeries.into());
    }
    Ok(out)
}

/// Compare two series of the same kind. Vector series give the agreement
/// horizon; density series give sup and L1 deviations only.
pub fn compare_series(a: &Series, b: &Series, threshold: f64) -> Result<ComparisonReport, HarnessError> {
    match (a, b) {
        (Series::Vector(a), Series::Vector(b)) => compare_vectors(a, b, threshold),
        (Series::Density(a), Series::Density(b)) if a.axis == b.axis => {
            if !(threshold.is_finite() && threshold > 0.0) {
                return Err(HarnessError::Config(format!("`threshold`: must be positive (got {threshold})")));
            }
            let dev = compare_densities(a, b)?;
            Ok(ComparisonReport {
                threshold,
                times: Vec::new(),
                vector_deviation: Vec::new(),
                relative_z_deviation: Vec::new(),
                horizon: None,
                density: Some(dev),
            })
        }
        _ => Err(Error::SeriesMismatch("series have different kinds or abscissae".into()).into()),
    }
}
