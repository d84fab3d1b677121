use nalgebra::DMatrix;

use super::{BlockVector, NormKind, QtMatrix};
use crate::error::{Error, Result};
use crate::linalg::{resize_rows, BandedLu, CMat};
use crate::symbol::LaurentSymbol;

#[derive(Debug, Clone, Copy)]
pub struct SolveBlockOptions {
    /// Relative residual accepted per column.
    pub tol: f64,
    /// Largest finite section tried.
    pub n_cap: usize,
}

impl Default for SolveBlockOptions {
    fn default() -> Self {
        SolveBlockOptions {
            tol: 1e-13,
            n_cap: 1 << 18,
        }
    }
}

pub(crate) fn check_invertible(a: &LaurentSymbol) -> Result<()> {
    if a.is_zero() {
        return Err(Error::NotInvertible("zero symbol".into()));
    }
    let n = 1024usize.max((4 * a.len()).next_power_of_two());
    if a.min_abs_on_circle(n) <= 1e-14 * a.wiener_norm() {
        return Err(Error::NotInvertible(
            "symbol vanishes on the unit circle".into(),
        ));
    }
    match a.winding_number(n) {
        None => Err(Error::NotInvertible(
            "symbol vanishes on the unit circle".into(),
        )),
        Some(0) => Ok(()),
        Some(w) => Err(Error::NotInvertible(format!("symbol has winding number {w}"))),
    }
}

/// Solve `A x = b` by finite sections of growing size. A candidate is
/// accepted only when its exactly evaluated residual satisfies
/// `||A x_j - b_j|| <= tol ||b_j||` for every column `j`.
pub fn solve_block(a: &QtMatrix, b: &BlockVector, opts: &SolveBlockOptions) -> Result<BlockVector> {
    let sym = a.symbol();
    check_invertible(sym)?;
    if b.rows() == 0 {
        return Ok(BlockVector::zeros(b.cols()));
    }
    let e = a.correction();
    let kl = sym.lower_bandwidth();
    let ku = sym.upper_bandwidth();
    let bw = kl.max(ku);
    let bnorms = b.column_norms();
    let mut n = b.rows().max(e.rows_u()).max(e.rows_v()) + 2 * bw + 32;
    let mut stalled = 0;
    let mut best = f64::INFINITY;
    loop {
        if n > opts.n_cap {
            return Err(Error::NoConvergence(format!(
                "finite section solve exceeded n_cap = {} (best relative residual {best:.3e})",
                opts.n_cap
            )));
        }
        let lu = BandedLu::factor(n, kl, ku, |i, j| sym.coeff(j as i64 - i as i64));
        let candidate = lu.and_then(|lu| section_solve(&lu, a, b, n));
        if let Some(x) = candidate {
            let rel = relative_residuals(a, &x, b, &bnorms);
            let worst = rel.iter().copied().fold(0.0, f64::max);
            if worst <= opts.tol {
                let x = trim(a, x, b, &bnorms, opts.tol);
                debug_assert!(relative_residuals(a, x.data(), b, &bnorms)
                    .iter()
                    .all(|&r| r <= opts.tol));
                return Ok(x);
            }
            if worst > 0.5 * best {
                stalled += 1;
            } else {
                stalled = 0;
            }
            best = best.min(worst);
            if stalled >= 2 {
                return Err(Error::NoConvergence(format!(
                    "finite section residual stagnates at {best:.3e} (tol {:.3e})",
                    opts.tol
                )));
            }
        }
        n *= 2;
    }
}

fn section_solve(lu: &BandedLu, a: &QtMatrix, b: &BlockVector, n: usize) -> Option<CMat> {
    let mut y = b.section(n);
    lu.solve_in_place(&mut y);
    let e = a.correction();
    if e.is_zero() {
        return Some(y);
    }
    // Woodbury for T_n + U_n V_n*
    let mut z = resize_rows(e.u(), n);
    lu.solve_in_place(&mut z);
    let vn = resize_rows(e.v(), n);
    let k = e.rank();
    let s = DMatrix::identity(k, k) + vn.adjoint() * &z;
    let rhs = vn.adjoint() * &y;
    let w = s.lu().solve(&rhs)?;
    if w.iter().any(|v| !v.is_finite()) {
        return None;
    }
    Some(y - z * w)
}

fn relative_residuals(a: &QtMatrix, x: &CMat, b: &BlockVector, bnorms: &[f64]) -> Vec<f64> {
    let ax = a.apply_dense(x);
    let rows = ax.nrows().max(b.rows());
    let r = resize_rows(&ax, rows) - b.section(rows);
    r.column_iter()
        .zip(bnorms)
        .map(|(c, &bn)| {
            let rn = c.norm();
            if bn == 0.0 {
                if rn == 0.0 {
                    0.0
                } else {
                    f64::INFINITY
                }
            } else {
                rn / bn
            }
        })
        .collect()
}

/// Drop trailing rows whose removal provably keeps the residual within
/// `tol`, then re-verify; falls back to the untrimmed solution.
fn trim(a: &QtMatrix, x: CMat, b: &BlockVector, bnorms: &[f64], tol: f64) -> BlockVector {
    let rel = relative_residuals(a, &x, b, bnorms);
    let anorm = a.norm_estimate(NormKind::Two);
    let slack: f64 = rel
        .iter()
        .zip(bnorms)
        .map(|(r, bn)| 0.5 * (tol - r) * bn)
        .fold(f64::INFINITY, f64::min);
    if !(slack > 0.0) || anorm == 0.0 {
        return BlockVector::new(x);
    }
    let budget = slack / anorm;
    let mut keep = x.nrows();
    let mut tail = vec![0.0f64; x.ncols()];
    while keep > 0 {
        let row = x.row(keep - 1);
        let ok = row
            .iter()
            .zip(&tail)
            .all(|(v, t)| (t + v.norm_sqr()).sqrt() <= budget);
        if !ok {
            break;
        }
        for (t, v) in tail.iter_mut().zip(row.iter()) {
            *t += v.norm_sqr();
        }
        keep -= 1;
    }
    if keep == x.nrows() {
        return BlockVector::new(x);
    }
    let xt = resize_rows(&x, keep);
    let rel = relative_residuals(a, &xt, b, bnorms);
    if rel.iter().all(|&r| r <= tol) {
        BlockVector::new(xt)
    } else {
        BlockVector::new(x)
    }
}
