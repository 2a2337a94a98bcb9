//! CSV series: vector series (`t, s_x, s_y, s_z[, stderr…]` or
//! `t, L_x, L_y, L_z`) and density series (`t, z, density`, or `t, r,
//! density` for planar radial densities).
//!
//! Values are written with Rust's shortest round-trip formatting, so a
//! written series reads back bit for bit and reruns are byte-identical.

use std::fmt::Write as _;
use std::path::Path;

use super::HarnessError;
use crate::fields::Vec3;

#[derive(Clone, Debug, PartialEq)]
pub struct VectorSeries {
    /// Column prefix, `s` or `L`.
    pub symbol: String,
    pub t: Vec<f64>,
    pub v: Vec<Vec3>,
    pub stderr: Option<Vec<Vec3>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DensitySeries {
    /// Abscissa column name, `z` or `r`.
    pub axis: String,
    pub t: Vec<f64>,
    /// Abscissa per time (usually identical rows).
    pub x: Vec<Vec<f64>>,
    pub density: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Series {
    Vector(VectorSeries),
    Density(DensitySeries),
}

impl VectorSeries {
    pub fn to_csv(&self) -> String {
        let s = &self.symbol;
        let mut out = format!("t,{s}_x,{s}_y,{s}_z");
        if self.stderr.is_some() {
            let _ = write!(out, ",stderr_{s}x,stderr_{s}y,stderr_{s}z");
        }
        out.push('\n');
        for (i, (t, v)) in self.t.iter().zip(&self.v).enumerate() {
            let _ = write!(out, "{t},{},{},{}", v.x, v.y, v.z);
            if let Some(e) = &self.stderr {
                let _ = write!(out, ",{},{},{}", e[i].x, e[i].y, e[i].z);
            }
            out.push('\n');
        }
        out
    }
}

impl DensitySeries {
    pub fn to_csv(&self) -> String {
        let mut out = format!("t,{},density\n", self.axis);
        for (k, t) in self.t.iter().enumerate() {
            for (x, p) in self.x[k].iter().zip(&self.density[k]) {
                let _ = writeln!(out, "{t},{x},{p}");
            }
        }
        out
    }
}

impl Series {
    pub fn to_csv(&self) -> String {
        match self {
            Series::Vector(v) => v.to_csv(),
            Series::Density(d) => d.to_csv(),
        }
    }

    pub fn write(&self, path: &Path) -> Result<(), HarnessError> {
        std::fs::write(path, self.to_csv()).map_err(|e| HarnessError::Io(format!("{}: {e}", path.display())))
    }

    pub fn read(path: &Path) -> Result<Self, HarnessError> {
        let text =
            std::fs::read_to_string(path).map_err(|e| HarnessError::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header: Vec<&str> = lines.next().ok_or("empty file")?.split(',').map(str::trim).collect();
        let rows: Vec<Vec<f64>> = lines
            .enumerate()
            .map(|(i, l)| {
                let row: Result<Vec<f64>, _> = l.split(',').map(|x| x.trim().parse::<f64>()).collect();
                match row {
                    Ok(r) if r.len() == header.len() => Ok(r),
                    Ok(r) => Err(format!("row {}: {} columns, header has {}", i + 2, r.len(), header.len())),
                    Err(e) => Err(format!("row {}: {e}", i + 2)),
                }
            })
            .collect::<Result<_, _>>()?;
        if header.len() == 3 && header[0] == "t" && (header[1] == "z" || header[1] == "r") && header[2] == "density" {
            let mut out = DensitySeries {
                axis: header[1].to_string(),
                t: Vec::new(),
                x: Vec::new(),
                density: Vec::new(),
            };
            for r in rows {
                if out.t.last() != Some(&r[0]) {
                    if out.t.last().is_some_and(|&t| r[0] < t) {
                        return Err("times must be non-decreasing".into());
                    }
                    out.t.push(r[0]);
                    out.x.push(Vec::new());
                    out.density.push(Vec::new());
                }
                out.x.last_mut().expect("pushed").push(r[1]);
                out.density.last_mut().expect("pushed").push(r[2]);
            }
            return Ok(Series::Density(out));
        }
        let symbol = match header.get(1).and_then(|h| h.strip_suffix("_x")) {
            Some(s) if header.len() == 4 || header.len() == 7 => s.to_string(),
            _ => return Err(format!("unrecognized header {header:?}")),
        };
        if header[0] != "t" || header[2] != format!("{symbol}_y") || header[3] != format!("{symbol}_z") {
            return Err(format!("unrecognized header {header:?}"));
        }
        let t: Vec<f64> = rows.iter().map(|r| r[0]).collect();
        if t.windows(2).any(|w| w[1] <= w[0]) {
            return Err("times must be strictly increasing".into());
        }
        Ok(Series::Vector(VectorSeries {
            symbol,
            t,
            v: rows.iter().map(|r| Vec3::new(r[1], r[2], r[3])).collect(),
            stderr: (header.len() == 7).then(|| rows.iter().map(|r| Vec3::new(r[4], r[5], r[6])).collect()),
        }))
    }
}
