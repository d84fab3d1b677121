//! Stein equations `M X N + X + C = 0` with QT coefficients.
//!
//! As for Sylvester equations the Toeplitz part of the solution has symbol
//! `x = -c / (1 + m n)` and the correction solves a Stein equation with a
//! compact right-hand side. Three solvers are provided for the correction:
//! the fixed-point iteration `E <- -C_hat - M E N`, and ADI or Galerkin
//! projection applied to the equivalent Sylvester equation obtained with the
//! Cayley transforms `A = (M + I)(I - M)^{-1}`, `B = (N + I)^{-1}(I - N)`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{factored_norm2, CONE};
use crate::operator::{CayleyLeft, CayleyRight};
use crate::qt::{solve_block, BlockVector, Correction, NormKind, QtMatrix, SolveBlockOptions};
use crate::rational_krylov::galerkin_with_monitor;
use crate::sylvester::{adi_with_monitor, Pole, PoleSequence, SolveOptions, SolveReport, SolveStatus};
use crate::symbol::{divide, EvInterpOptions, LaurentSymbol};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SteinMethod {
    FixedPoint,
    Adi,
    Galerkin,
}

impl std::str::FromStr for SteinMethod {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "fixedpoint" | "fixed-point" | "fixed_point" => Ok(SteinMethod::FixedPoint),
            "adi" => Ok(SteinMethod::Adi),
            "galerkin" => Ok(SteinMethod::Galerkin),
            other => Err(Error::UnknownMethod(other.to_string())),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SteinProblem {
    pub m: QtMatrix,
    pub n: QtMatrix,
    pub c: QtMatrix,
    /// Balancing factor `lambda`; the solvers work with `lambda M` and `N / lambda`.
    pub scale: f64,
    /// Norm used for the contraction test and balancing.
    pub norm: NormKind,
}

impl SteinProblem {
    /// Problem with the default balancing `lambda = sqrt(||N|| / ||M||)`.
    pub fn new(m: QtMatrix, n: QtMatrix, c: QtMatrix) -> Self {
        let norm = NormKind::Two;
        let scale = balance_factor(&m, &n, norm);
        SteinProblem { m, n, c, scale, norm }
    }

    pub fn unbalanced(m: QtMatrix, n: QtMatrix, c: QtMatrix) -> Self {
        SteinProblem {
            m,
            n,
            c,
            scale: 1.0,
            norm: NormKind::Two,
        }
    }

    pub fn with_norm(mut self, norm: NormKind) -> Self {
        self.norm = norm;
        self.scale = balance_factor(&self.m, &self.n, norm);
        self
    }

    /// `(lambda M, N / lambda)`.
    pub fn balanced(&self) -> (QtMatrix, QtMatrix) {
        let s = Complex64::new(self.scale, 0.0);
        (self.m.scale(s), self.n.scale(CONE / s))
    }

    /// `||M||` and `||N||` after balancing.
    pub fn balanced_norms(&self) -> (f64, f64) {
        let (m, n) = self.balanced();
        (m.norm_estimate(self.norm), n.norm_estimate(self.norm))
    }

    /// `M X N + X + C` in QT arithmetic.
    pub fn residual(&self, x: &QtMatrix) -> QtMatrix {
        let t = 1e-16;
        self.m.mul(x, t).mul(&self.n, t).add(x, t).add(&self.c, t)
    }

    /// Certified relative residual `||M X N + X + C||_2 / ||C||_2` (upper
    /// bounds on both norms).
    pub fn relative_residual(&self, x: &QtMatrix) -> f64 {
        let cn = self.c.norm_estimate(NormKind::Two);
        let r = self.residual(x).norm_estimate(NormKind::Two);
        if cn == 0.0 {
            r
        } else {
            r / cn
        }
    }
}

pub fn balance_factor(m: &QtMatrix, n: &QtMatrix, norm: NormKind) -> f64 {
    let mn = m.norm_estimate(norm);
    let nn = n.norm_estimate(norm);
    if mn > 0.0 && nn > 0.0 {
        (nn / mn).sqrt()
    } else {
        1.0
    }
}

/// Toeplitz symbol of the solution and the compact right-hand side
/// `C_hat = corr(M T(x) N + T(x) + C)` left for the correction.
pub fn split(p: &SteinProblem, tol: f64) -> Result<(LaurentSymbol, Correction)> {
    let c = p.c.symbol();
    let den = &(p.m.symbol() * p.n.symbol()) + &LaurentSymbol::constant(CONE);
    let x = if c.is_zero() {
        LaurentSymbol::zero()
    } else {
        let q = divide(
            &(-c),
            &den,
            1.0 + p.m.symbol().wiener_norm() * p.n.symbol().wiener_norm(),
            &EvInterpOptions {
                tol: (tol * 1e-3).clamp(1e-15, 1e-12),
                ..EvInterpOptions::default()
            },
        )?;
        q.symbol.truncate((tol * 1e-4).max(1e-16)).1
    };
    if x.is_zero() {
        return Ok((x, p.c.correction().clone()));
    }
    let t = tol * 1e-2;
    let tx = QtMatrix::toeplitz(x.clone());
    let mxn = p.m.mul(&tx, t).mul(&p.n, t);
    let chat = p
        .c
        .correction()
        .concat(mxn.correction())
        .compress(t);
    Ok((x, chat))
}

/// `M E N + E + C_hat` for a correction `E`, factored.
fn stein_correction_residual(m: &QtMatrix, n: &QtMatrix, e: &Correction, chat: &Correction) -> Correction {
    if e.is_zero() {
        return chat.clone();
    }
    let mu = m.matvec(&BlockVector::new(e.u().clone())).into_data();
    let nv = n.matvec_adjoint(&BlockVector::new(e.v().clone())).into_data();
    Correction::new(mu, nv).concat(e).concat(chat)
}

fn finish(
    p: &SteinProblem,
    x: LaurentSymbol,
    e: Correction,
    mut report: SolveReport,
    tol: f64,
) -> (QtMatrix, SolveReport) {
    let xq = QtMatrix::new(x, e);
    let fin = p.relative_residual(&xq);
    report.final_rank = xq.correction().rank();
    report.toeplitz_degree = xq.symbol().upper_bandwidth().max(xq.symbol().lower_bandwidth());
    report.final_residual = fin;
    if fin > tol {
        report.status = SolveStatus::MaxIter;
    }
    (xq, report)
}

/// `X_{k+1} = -C - M X_k N` on the correction, with recompression.
pub fn stein_fixed_point(p: &SteinProblem, opts: &SolveOptions) -> Result<(QtMatrix, SolveReport)> {
    stein_fixed_point_observed(p, opts, &mut |_, _| {})
}

/// [`stein_fixed_point`], handing every iterate `X_k` to `observe`.
pub fn stein_fixed_point_observed(
    p: &SteinProblem,
    opts: &SolveOptions,
    observe: &mut dyn FnMut(usize, &QtMatrix),
) -> Result<(QtMatrix, SolveReport)> {
    let (mb, nb) = p.balanced();
    let prod = mb.norm_estimate(p.norm) * nb.norm_estimate(p.norm);
    if prod >= 1.0 {
        return Err(Error::NotContractive(prod));
    }
    let (x, chat) = split(p, opts.tol)?;
    let cn = p.c.norm_estimate(NormKind::Two).max(f64::MIN_POSITIVE);
    let mut report = SolveReport {
        residual_history: Vec::new(),
        final_rank: 0,
        toeplitz_degree: 0,
        status: SolveStatus::MaxIter,
        final_residual: 0.0,
    };
    let target = 0.5 * opts.tol;
    let mut e = Correction::zero();
    for k in 1..=opts.max_iter {
        e = if e.is_zero() {
            chat.scale(-CONE)
        } else {
            let mu = mb.matvec(&BlockVector::new(e.u().clone())).into_data();
            let nv = nb.matvec_adjoint(&BlockVector::new(e.v().clone())).into_data();
            chat.concat(&Correction::new(mu, nv))
                .scale(-CONE)
                .compress(opts.compression_tol)
        };
        observe(k, &QtMatrix::new(x.clone(), e.clone()));
        let r = stein_correction_residual(&mb, &nb, &e, &chat);
        let res = factored_norm2(r.u(), r.v()) / cn;
        report.residual_history.push((k, res));
        if res <= target || chat.is_zero() {
            report.status = SolveStatus::Converged;
            return Ok(finish(p, x, e, report, opts.tol));
        }
    }
    Err(Error::MaxIter(opts.max_iter))
}

/// Cayley-transformed Sylvester equation `A X + X B + C_tilde = 0` with
/// `C_tilde = 2 (I - M)^{-1} C (I + N)^{-1}`, built explicitly in QT form.
pub fn cayley_remap(p: &SteinProblem, opts: &SolveBlockOptions) -> Result<(QtMatrix, QtMatrix, QtMatrix)> {
    let (m, n) = p.balanced();
    let t = opts.tol * 1e-2;
    let id = QtMatrix::identity();
    let i_minus_m = id.sub(&m, t);
    let i_plus_n = id.add(&n, t);
    let inv_l = i_minus_m.inverse(opts)?;
    let inv_r = i_plus_n.inverse(opts)?;
    let a = id.add(&m, t).mul(&inv_l, t);
    let b = inv_r.mul(&id.sub(&n, t), t);
    let c = inv_l.mul(&p.c, t).mul(&inv_r, t).scale(Complex64::new(2.0, 0.0));
    Ok((a, b, c))
}

/// Remapped right-hand side factors `2 (I - M)^{-1} U`, `(I + N)^{-*} V`.
fn remapped_rhs(m: &QtMatrix, n: &QtMatrix, chat: &Correction, opts: &SolveBlockOptions) -> Result<Correction> {
    let i_minus_m = m.scale(-CONE).shift(-CONE);
    let i_plus_n_adj = n.shift(-CONE).adjoint();
    let u = solve_block(&i_minus_m, &BlockVector::new(chat.u().clone()), opts)?;
    let v = solve_block(&i_plus_n_adj, &BlockVector::new(chat.v().clone()), opts)?;
    Ok(Correction::new(u.into_data() * Complex64::new(2.0, 0.0), v.into_data()))
}

fn cayley_solve(p: &SteinProblem, opts: &SolveOptions, galerkin: bool) -> Result<(QtMatrix, SolveReport)> {
    let (mb, nb) = p.balanced();
    let (x, chat) = split(p, opts.tol)?;
    let cn = p.c.norm_estimate(NormKind::Two).max(f64::MIN_POSITIVE);
    if chat.is_zero() {
        let report = SolveReport {
            residual_history: vec![(1, 0.0)],
            final_rank: 0,
            toeplitz_degree: 0,
            status: SolveStatus::Converged,
            final_residual: 0.0,
        };
        return Ok(finish(p, x, Correction::zero(), report, opts.tol));
    }
    let bopts = opts.block_options();
    let rhs = remapped_rhs(&mb, &nb, &chat, &bopts)?;
    let a = CayleyLeft::new(mb.clone(), bopts);
    let b = CayleyRight::new(nb.clone(), bopts);
    let poles = PoleSequence::constant(Pole::real(1.0), Pole::real(-1.0));
    let inner = SolveOptions {
        tol: 0.5 * opts.tol,
        ..*opts
    };
    let mut monitor = |_k: usize, e: &Correction| -> Result<f64> {
        let r = stein_correction_residual(&mb, &nb, e, &chat);
        Ok(factored_norm2(r.u(), r.v()) / cn)
    };
    let (e, report) = if galerkin {
        galerkin_with_monitor(&a, &b, &rhs, &poles, &inner, &mut monitor)?
    } else {
        adi_with_monitor(&a, &b, &rhs, &poles, &inner, &mut monitor)?
    };
    Ok(finish(p, x, e, report, opts.tol))
}

/// ADI with the constant shifts `(1, -1)` on the Cayley-transformed
/// equation, at most `opts.max_iter` steps.
pub fn stein_adi(p: &SteinProblem, opts: &SolveOptions) -> Result<(QtMatrix, SolveReport)> {
    cayley_solve(p, opts, false)
}

/// Galerkin projection on the Cayley-transformed equation with the poles
/// of [`stein_adi`].
pub fn stein_galerkin(p: &SteinProblem, opts: &SolveOptions) -> Result<(QtMatrix, SolveReport)> {
    cayley_solve(p, opts, true)
}

/// Dispatch by method name (`fixedpoint`, `adi`, `galerkin`).
pub fn solve_stein(
    m: &QtMatrix,
    n: &QtMatrix,
    c: &QtMatrix,
    method: &str,
    opts: &SolveOptions,
) -> Result<(QtMatrix, SolveReport)> {
    let method: SteinMethod = method.parse()?;
    let p = SteinProblem::new(m.clone(), n.clone(), c.clone());
    solve_stein_problem(&p, method, opts)
}

pub fn solve_stein_problem(
    p: &SteinProblem,
    method: SteinMethod,
    opts: &SolveOptions,
) -> Result<(QtMatrix, SolveReport)> {
    match method {
        SteinMethod::FixedPoint => stein_fixed_point(p, opts),
        SteinMethod::Adi => stein_adi(p, opts),
        SteinMethod::Galerkin => stein_galerkin(p, opts),
    }
}

/// Center and radius of the disc that contains the spectrum of the Cayley
/// transform of an operator with spectral radius below `rho`.
pub fn cayley_disc(rho: f64) -> (f64, f64) {
    let d = 1.0 - rho * rho;
    ((1.0 + rho * rho) / d, 2.0 * rho / d)
}
