//! Numerical experiments: heat equation on the positive quadrant, a
//! manufactured-solution convergence study and Newton steps for a
//! quasi-birth-death (QBD) quadratic equation.

pub mod config;
pub mod pde;
pub mod qbd;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use crate::qt::QtMatrix;
use crate::sylvester::SolveReport;

/// Where sampled data lives relative to the unknowns. Unknown `(i, j)`
/// always approximates the solution at `(i h, j h)`; with `Listing` the
/// source and boundary data for it are sampled at `((i-1) h, (j-1) h)`,
/// with `Interior` at `(i h, j h)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SampleOrigin {
    #[default]
    Listing,
    Interior,
}

impl SampleOrigin {
    /// Offset `delta` such that data index `i` is sampled at `(i - 1 + delta) h`.
    pub fn delta(self) -> usize {
        match self {
            SampleOrigin::Listing => 0,
            SampleOrigin::Interior => 1,
        }
    }
}

impl std::str::FromStr for SampleOrigin {
    type Err = crate::Error;
    fn from_str(s: &str) -> crate::Result<Self> {
        match s {
            "listing" => Ok(SampleOrigin::Listing),
            "interior" => Ok(SampleOrigin::Interior),
            other => Err(crate::Error::InvalidInput(format!("unknown sample origin '{other}'"))),
        }
    }
}

/// Value at `(x, y)` by bilinear interpolation of the grid values
/// `U[i][j] ~ u(i h, j h)`, with zero Dirichlet data on the axes.
pub fn bilinear(u: &QtMatrix, h: f64, x: f64, y: f64) -> f64 {
    let node = |i: usize, j: usize| -> f64 {
        if i == 0 || j == 0 {
            0.0
        } else {
            u.get(i, j).re
        }
    };
    let sx = x / h;
    let sy = y / h;
    let p = sx.floor().max(0.0) as usize;
    let q = sy.floor().max(0.0) as usize;
    let fx = sx - p as f64;
    let fy = sy - q as f64;
    let mut v = (1.0 - fx) * (1.0 - fy) * node(p, q);
    if fx != 0.0 {
        v += fx * (1.0 - fy) * node(p + 1, q);
    }
    if fy != 0.0 {
        v += (1.0 - fx) * fy * node(p, q + 1);
    }
    if fx != 0.0 && fy != 0.0 {
        v += fx * fy * node(p + 1, q + 1);
    }
    v
}

/// Grid file: header `# x y u`, then `grid^2` rows with `y` in the outer
/// loop, coordinates `i * range / grid`.
pub fn write_grid(path: &Path, u: &QtMatrix, h: f64, range: f64, grid: usize) -> io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "# x y u")?;
    let step = range / grid as f64;
    for iy in 0..grid {
        let y = iy as f64 * step;
        for ix in 0..grid {
            let x = ix as f64 * step;
            writeln!(w, "{:.15e} {:.15e} {:.15e}", x, y, bilinear(u, h, x, y))?;
        }
    }
    w.flush()
}

/// Residual log: one `<iter> <relative residual>` line per entry.
pub fn write_residuals(path: &Path, report: &SolveReport) -> io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    for &(k, r) in &report.residual_history {
        writeln!(w, "{} {:.15e}", k, r)?;
    }
    w.flush()
}

/// Gaussian samples `exp(-(k h)^2)`, `k = 0, 1, ...` while above `cutoff`.
pub fn gaussian_coeffs(h: f64, cutoff: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut k = 0usize;
    loop {
        let v = (-(k as f64 * h).powi(2)).exp();
        if v <= cutoff {
            break;
        }
        out.push(v);
        k += 1;
    }
    out
}
