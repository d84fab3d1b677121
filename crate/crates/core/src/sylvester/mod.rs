//! Sylvester equations `A X + X B + C = 0` with QT coefficients.
//!
//! The solution splits as `X = T(x) + E_x`: the symbol `x = -c / (a + b)` is
//! computed by evaluation/interpolation and the correction solves
//! `A E + E B + C_hat = 0` where `C_hat` is the compact remainder of
//! `A T(x) + T(x) B + C`. The correction equation has a low-rank right-hand
//! side and is solved by factored ADI or by rational Krylov projection.

pub mod zolotarev;

use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::factored_norm2;
use crate::operator::LinearOperator;
use crate::qt::{BlockVector, Correction, NormKind, QtMatrix, SolveBlockOptions};
use crate::symbol::{ev_interp, EvInterpOptions, LaurentSymbol};

pub use zolotarev::{zolotarev_points, zolotarev_rate};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Pole {
    Finite(Complex64),
    Infinity,
}

impl Pole {
    pub fn real(x: f64) -> Self {
        Pole::Finite(Complex64::new(x, 0.0))
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Pole::Infinity)
    }

    pub fn finite(&self) -> Option<Complex64> {
        match self {
            Pole::Finite(z) => Some(*z),
            Pole::Infinity => None,
        }
    }

    /// `-conj(p)`, the pole seen by the adjoint operator on the right.
    pub fn reflect(&self) -> Self {
        match self {
            Pole::Finite(z) => Pole::Finite(-z.conj()),
            Pole::Infinity => Pole::Infinity,
        }
    }
}

impl fmt::Display for Pole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Pole::Finite(z) if z.im == 0.0 => write!(f, "{}", z.re),
            Pole::Finite(z) => write!(f, "{z}"),
            Pole::Infinity => write!(f, "inf"),
        }
    }
}

/// Shift pairs `(alpha_j, beta_j)`; iterations past the end cycle from the
/// start.
#[derive(Debug, Clone, PartialEq)]
pub struct PoleSequence {
    pairs: Vec<(Pole, Pole)>,
}

impl PoleSequence {
    pub fn new(pairs: Vec<(Pole, Pole)>) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::InvalidPoles("empty pole sequence".into()));
        }
        Ok(PoleSequence { pairs })
    }

    /// `(p_j, -p_j)` for positive magnitudes `p_j`.
    pub fn symmetric(points: &[f64]) -> Result<Self> {
        Self::new(
            points
                .iter()
                .map(|&p| (Pole::real(p), Pole::real(-p)))
                .collect(),
        )
    }

    /// Alternating `infinity` and `0` on both sides (extended Krylov).
    pub fn extended() -> Self {
        PoleSequence {
            pairs: vec![
                (Pole::Infinity, Pole::Infinity),
                (Pole::real(0.0), Pole::real(0.0)),
            ],
        }
    }

    /// Constant pair repeated.
    pub fn constant(alpha: Pole, beta: Pole) -> Self {
        PoleSequence {
            pairs: vec![(alpha, beta)],
        }
    }

    pub fn pairs(&self) -> &[(Pole, Pole)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Pair used at 0-based step `j`.
    pub fn pair(&self, j: usize) -> (Pole, Pole) {
        self.pairs[j % self.pairs.len()]
    }

    /// Only the poles 0 and infinity occur.
    pub fn is_extended(&self) -> bool {
        self.pairs.iter().all(|(a, b)| {
            [a, b]
                .iter()
                .all(|p| p.is_infinite() || p.finite() == Some(Complex64::new(0.0, 0.0)))
        })
    }

    /// Flip signs: shifts for `[-b, -a]` spectra from those for `[a, b]`.
    pub fn negated(&self) -> Self {
        let neg = |p: Pole| match p {
            Pole::Finite(z) => Pole::Finite(-z),
            Pole::Infinity => Pole::Infinity,
        };
        PoleSequence {
            pairs: self.pairs.iter().map(|&(a, b)| (neg(a), neg(b))).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Adi,
    Galerkin,
}

impl std::str::FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "adi" => Ok(Method::Adi),
            "galerkin" => Ok(Method::Galerkin),
            other => Err(Error::UnknownMethod(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SolveOptions {
    /// Target relative residual.
    pub tol: f64,
    pub max_iter: usize,
    /// Relative truncation tolerance for recompressing iterates.
    pub compression_tol: f64,
    /// Largest finite section used by shifted solves.
    pub n_cap: usize,
    pub method: Method,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            tol: 1e-12,
            max_iter: 100,
            compression_tol: 1e-14,
            n_cap: 1 << 18,
            method: Method::Galerkin,
        }
    }
}

impl SolveOptions {
    pub fn with_tol(tol: f64) -> Self {
        SolveOptions {
            tol,
            compression_tol: (tol * 1e-2).max(1e-15),
            ..Self::default()
        }
    }

    pub fn with_method(mut self, method: Method) -> Self {
        self.method = method;
        self
    }

    pub fn block_options(&self) -> SolveBlockOptions {
        SolveBlockOptions {
            tol: (self.tol * 1e-2).max(1e-13),
            n_cap: self.n_cap,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) || self.max_iter == 0 {
            return Err(Error::InvalidInput(
                "need tol > 0 and max_iter >= 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Converged,
    MaxIter,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    /// `(iteration, relative residual)` pairs.
    pub residual_history: Vec<(usize, f64)>,
    pub final_rank: usize,
    /// Degree bound of the computed Toeplitz symbol (0 for pure corrections).
    pub toeplitz_degree: usize,
    pub status: SolveStatus,
    /// Independently evaluated relative residual of the returned solution.
    pub final_residual: f64,
}

impl SolveReport {
    pub fn converged(&self) -> bool {
        self.status == SolveStatus::Converged
    }

    pub fn iterations(&self) -> usize {
        self.residual_history.last().map(|r| r.0).unwrap_or(0)
    }

    /// Running minimum of the residual history.
    pub fn best_so_far(&self) -> Vec<f64> {
        let mut best = f64::INFINITY;
        self.residual_history
            .iter()
            .map(|&(_, r)| {
                best = best.min(r);
                best
            })
            .collect()
    }
}

/// Residual `A X + X B + C` of a correction-only candidate, in factored form.
pub fn correction_residual<A, B>(a: &A, b: &B, x: &Correction, c: &Correction) -> Correction
where
    A: LinearOperator + ?Sized,
    B: LinearOperator + ?Sized,
{
    if x.is_zero() {
        return c.clone();
    }
    let ux = BlockVector::new(x.u().clone());
    let vx = BlockVector::new(x.v().clone());
    let aux = a.apply(&ux).into_data();
    let bvx = b.apply_adjoint(&vx).into_data();
    Correction::new(aux, x.v().clone())
        .concat(&Correction::new(x.u().clone(), bvx))
        .concat(c)
}

/// Compact remainder `C_hat` of `A T(x) + T(x) B + C`, i.e.
/// `E_c + E_a T(x) + T(x) E_b - H(a_-) H(x_+) - H(x_-) H(b_+)`.
pub fn correction_rhs(a: &QtMatrix, b: &QtMatrix, c: &QtMatrix, x: &LaurentSymbol, tol: f64) -> Correction {
    let tx = QtMatrix::toeplitz(x.clone());
    let t = tol * 1e-2;
    let left = a.mul(&tx, t);
    let right = tx.mul(b, t);
    c.correction()
        .concat(left.correction())
        .concat(right.correction())
        .compress(t)
}

/// Certified upper bound for `||A X + X B + C||_2`: Wiener norm of the
/// residual symbol plus the 2-norm of the residual correction.
pub fn residual_norm(a: &QtMatrix, b: &QtMatrix, c: &QtMatrix, x: &QtMatrix) -> f64 {
    let t = 1e-16;
    let r = a.mul(x, t).add(&x.mul(b, t), t).add(c, t);
    r.norm_estimate(NormKind::Two)
}

/// Monitor signature: called with the 1-based step and the current
/// iterate; returns the relative residual that drives the stopping test.
pub type Monitor<'m> = dyn FnMut(usize, &Correction) -> Result<f64> + 'm;

/// Factored ADI for `A X + X B + C = 0` with `C = U V*`:
/// `L_1 = (A - b_1)^{-1} U`, `L_k = L_{k-1} + (b_k - a_{k-1}) (A - b_k)^{-1} L_{k-1}`,
/// `R_1 = (B* + conj a_1)^{-1} V`,
/// `R_k = R_{k-1} + (conj b_{k-1} - conj a_k) (B* + conj a_k)^{-1} R_{k-1}`,
/// `X_k = X_{k-1} + (b_k - a_k) L_k R_k*`.
pub fn adi_with_monitor<A, B>(
    a: &A,
    b: &B,
    c: &Correction,
    poles: &PoleSequence,
    opts: &SolveOptions,
    monitor: &mut Monitor<'_>,
) -> Result<(Correction, SolveReport)>
where
    A: LinearOperator + ?Sized,
    B: LinearOperator + ?Sized,
{
    opts.validate()?;
    for (al, be) in poles.pairs() {
        match (al.finite(), be.finite()) {
            (Some(x), Some(y)) if x != y => {}
            _ => {
                return Err(Error::InvalidPoles(format!(
                    "ADI needs finite, distinct shifts; got ({al}, {be})"
                )))
            }
        }
    }
    let mut report = SolveReport {
        residual_history: Vec::new(),
        final_rank: 0,
        toeplitz_degree: 0,
        status: SolveStatus::MaxIter,
        final_residual: 0.0,
    };
    if c.is_zero() {
        report.residual_history.push((1, 0.0));
        report.status = SolveStatus::Converged;
        return Ok((Correction::zero(), report));
    }
    let bopts = opts.block_options();
    let mut l = BlockVector::new(c.u().clone());
    let mut r = BlockVector::new(c.v().clone());
    let mut x = Correction::zero();
    let mut prev: Option<(Complex64, Complex64)> = None;
    for k in 1..=opts.max_iter {
        let (al, be) = poles.pair(k - 1);
        let (al, be) = (al.finite().unwrap(), be.finite().unwrap());
        match prev {
            None => {
                l = a.solve_shifted(be, &l, &bopts)?;
                r = b.solve_shifted_adjoint(-al.conj(), &r, &bopts)?;
            }
            Some((pa, pb)) => {
                let dl = a.solve_shifted(be, &l, &bopts)?;
                l = axpy(&l, be - pa, &dl);
                let dr = b.solve_shifted_adjoint(-al.conj(), &r, &bopts)?;
                r = axpy(&r, pb.conj() - al.conj(), &dr);
            }
        }
        prev = Some((al, be));
        let term = Correction::new(l.data() * (be - al), r.data().clone());
        x = x.concat(&term).compress(opts.compression_tol);
        let res = monitor(k, &x)?;
        report.residual_history.push((k, res));
        if res <= opts.tol {
            report.status = SolveStatus::Converged;
            break;
        }
    }
    report.final_rank = x.rank();
    report.final_residual = report.residual_history.last().unwrap().1;
    Ok((x, report))
}

fn axpy(x: &BlockVector, s: Complex64, y: &BlockVector) -> BlockVector {
    let rows = x.rows().max(y.rows());
    BlockVector::new(x.section(rows) + y.section(rows) * s)
}

/// Factored ADI with the residual `||A X + X B + C||_2 / ||C||_2` evaluated
/// after every step.
pub fn adi_sylvester<A, B>(
    a: &A,
    b: &B,
    c: &Correction,
    poles: &PoleSequence,
    opts: &SolveOptions,
) -> Result<(Correction, SolveReport)>
where
    A: LinearOperator + ?Sized,
    B: LinearOperator + ?Sized,
{
    let cn = c.norm2();
    let mut monitor = |_k: usize, x: &Correction| -> Result<f64> {
        let r = correction_residual(a, b, x, c);
        Ok(factored_norm2(r.u(), r.v()) / cn)
    };
    adi_with_monitor(a, b, c, poles, opts, &mut monitor)
}

/// Real interval containing the spectrum of a Hermitian QT matrix: symbol
/// range on the unit circle widened by the correction norm.
pub fn hermitian_enclosure(a: &QtMatrix) -> Option<(f64, f64)> {
    if !a.is_hermitian(1e-12) {
        return None;
    }
    let n = 1024usize.max((8 * a.symbol().len()).next_power_of_two());
    let vals = a.symbol().eval_roots(n).values;
    let lo = vals.iter().map(|v| v.re).fold(f64::INFINITY, f64::min);
    let hi = vals.iter().map(|v| v.re).fold(f64::NEG_INFINITY, f64::max);
    let e = a.correction().norm2();
    Some((lo - e, hi + e))
}

/// Pole choice for [`solve_sylvester`].
#[derive(Debug, Clone)]
pub enum PoleChoice {
    /// Zolotarev shifts for definite Hermitian problems, otherwise the
    /// extended poles `{inf, 0}`.
    Auto,
    Given(PoleSequence),
}

/// Poles picked by [`PoleChoice::Auto`]. The Zolotarev count is the
/// smallest `k` with `4 (||A|| + ||B||) rho^k <= tol`.
pub fn auto_poles(a: &QtMatrix, b: &QtMatrix, tol: f64) -> PoleSequence {
    let (ea, eb) = match (hermitian_enclosure(a), hermitian_enclosure(b)) {
        (Some(x), Some(y)) => (x, y),
        _ => return PoleSequence::extended(),
    };
    let lo = ea.0.min(eb.0);
    let hi = ea.1.max(eb.1);
    let (flip, lo, hi) = if lo > 0.0 {
        (false, lo, hi)
    } else if hi < 0.0 {
        (true, -hi, -lo)
    } else {
        return PoleSequence::extended();
    };
    let hi = if hi > lo { hi } else { lo * (1.0 + 1e-12) };
    let rho = match zolotarev_rate(lo, hi) {
        Ok(r) => r,
        Err(_) => return PoleSequence::extended(),
    };
    let scale = 4.0 * (a.norm_estimate(NormKind::Two) + b.norm_estimate(NormKind::Two));
    let k = if rho <= 0.0 {
        1
    } else {
        ((tol / scale).ln() / rho.ln()).ceil().clamp(1.0, 64.0) as usize
    };
    let seq = PoleSequence::symmetric(&zolotarev_points(lo, hi, k).unwrap()).unwrap();
    if flip {
        seq.negated()
    } else {
        seq
    }
}

/// Full pipeline for `A X + X B + C = 0`.
pub fn solve_sylvester(
    a: &QtMatrix,
    b: &QtMatrix,
    c: &QtMatrix,
    opts: &SolveOptions,
    poles: &PoleChoice,
) -> Result<(QtMatrix, SolveReport)> {
    opts.validate()?;
    let ev = ev_interp(
        a.symbol(),
        b.symbol(),
        c.symbol(),
        &EvInterpOptions {
            tol: (opts.tol * 1e-3).clamp(1e-15, 1e-12),
            ..EvInterpOptions::default()
        },
    )?;
    let (_, x) = ev.symbol.truncate((opts.tol * 1e-4).max(1e-16));
    let chat = correction_rhs(a, b, c, &x, opts.tol);
    let cnorm = c.norm_estimate(NormKind::Two);
    let (corr, mut report) = if chat.is_zero() {
        let report = SolveReport {
            residual_history: vec![(0, 0.0)],
            final_rank: 0,
            toeplitz_degree: 0,
            status: SolveStatus::Converged,
            final_residual: 0.0,
        };
        (Correction::zero(), report)
    } else {
        let seq = match poles {
            PoleChoice::Given(p) => p.clone(),
            PoleChoice::Auto => auto_poles(a, b, opts.tol),
        };
        // residuals are reported relative to ||C||, split the budget with the symbol part
        let scale = cnorm.max(f64::MIN_POSITIVE);
        let inner = SolveOptions {
            tol: 0.5 * opts.tol,
            ..*opts
        };
        let mut monitor = |_k: usize, e: &Correction| -> Result<f64> {
            let r = correction_residual(a, b, e, &chat);
            Ok(factored_norm2(r.u(), r.v()) / scale)
        };
        match opts.method {
            Method::Adi => adi_with_monitor(a, b, &chat, &seq, &inner, &mut monitor)?,
            Method::Galerkin => crate::rational_krylov::galerkin_with_monitor(
                a,
                b,
                &chat,
                &seq,
                &inner,
                &mut monitor,
            )?,
        }
    };
    let xq = QtMatrix::new(x, corr);
    let fin = residual_norm(a, b, c, &xq) / cnorm.max(f64::MIN_POSITIVE);
    report.toeplitz_degree = ev.degree;
    report.final_rank = xq.correction().rank();
    report.final_residual = fin;
    report.status = if fin <= opts.tol {
        SolveStatus::Converged
    } else {
        SolveStatus::MaxIter
    };
    Ok((xq, report))
}

#[cfg(test)]
mod tests;
