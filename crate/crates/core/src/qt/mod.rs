//! Quasi-Toeplitz matrices `T(a) + U V*`.
//!
//! Entry convention: `T(a)[i][j] = a_{j-i}`, 1-based. Under this convention
//! `T(a) T(b) = T(ab) - H(a_-) H(b_+)` where `H(f)[i][j] = f_{i+j-1}`,
//! `a_-` collects `a_{-1}, a_{-2}, ...` and `b_+` collects `b_1, b_2, ...`.
//! For example `T(z) T(1/z) = I` and `T(1/z) T(z) = I - e1 e1^T`.

mod solve;

pub use solve::{solve_block, SolveBlockOptions};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::linalg::{factored_frobenius, factored_norm2, svd, resize_rows, singular_values, thin_qr, CMat, CONE, CZERO};
use crate::symbol::LaurentSymbol;

/// Rows below which nothing is stored are implicitly zero.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockVector {
    data: CMat,
}

impl BlockVector {
    pub fn new(data: CMat) -> Self {
        let mut rows = data.nrows();
        while rows > 0 && data.row(rows - 1).iter().all(|v| *v == CZERO) {
            rows -= 1;
        }
        if rows == data.nrows() {
            BlockVector { data }
        } else {
            BlockVector {
                data: resize_rows(&data, rows),
            }
        }
    }

    pub fn zeros(cols: usize) -> Self {
        BlockVector {
            data: CMat::zeros(0, cols),
        }
    }

    /// `e_k` (1-based) as a single column.
    pub fn unit(k: usize) -> Self {
        assert!(k >= 1);
        let mut d = CMat::zeros(k, 1);
        d[(k - 1, 0)] = CONE;
        BlockVector { data: d }
    }

    pub fn rows(&self) -> usize {
        self.data.nrows()
    }

    pub fn cols(&self) -> usize {
        self.data.ncols()
    }

    pub fn data(&self) -> &CMat {
        &self.data
    }

    pub fn into_data(self) -> CMat {
        self.data
    }

    /// Leading `rows` rows, zero padded when needed.
    pub fn section(&self, rows: usize) -> CMat {
        resize_rows(&self.data, rows)
    }

    pub fn norm(&self) -> f64 {
        self.data.norm()
    }

    pub fn column_norms(&self) -> Vec<f64> {
        self.data.column_iter().map(|c| c.norm()).collect()
    }

    pub fn sub(&self, other: &BlockVector) -> BlockVector {
        let r = self.rows().max(other.rows());
        BlockVector::new(self.section(r) - other.section(r))
    }
}

/// Compact correction `E = U V*`; `U` has `r_U` rows, `V` has `r_V` rows,
/// both with `k` columns. Entries beyond the supports are zero.
#[derive(Debug, Clone, PartialEq)]
pub struct Correction {
    u: CMat,
    v: CMat,
}

impl Correction {
    pub fn new(u: CMat, v: CMat) -> Self {
        assert_eq!(u.ncols(), v.ncols(), "factor ranks differ");
        Correction { u, v }
    }

    pub fn zero() -> Self {
        Correction {
            u: CMat::zeros(0, 0),
            v: CMat::zeros(0, 0),
        }
    }

    /// Single entry `value` at 1-based position `(i, j)`.
    pub fn entry(i: usize, j: usize, value: Complex64) -> Self {
        let mut u = CMat::zeros(i, 1);
        let mut v = CMat::zeros(j, 1);
        u[(i - 1, 0)] = value;
        v[(j - 1, 0)] = CONE;
        Correction { u, v }
    }

    /// Correction equal to the given dense leading block.
    pub fn from_dense(block: &CMat, tol: f64) -> Self {
        let k = block.ncols();
        Correction::new(block.clone(), CMat::identity(k, k)).compress(tol)
    }

    /// `H(f)` with `H[i][j] = f[i + j - 2]` (so `f[0]` plays `f_1`),
    /// factored at machine precision.
    pub fn hankel(f: &[Complex64]) -> Self {
        let d = match f.iter().rposition(|v| *v != CZERO) {
            None => return Correction::zero(),
            Some(p) => p + 1,
        };
        let h = CMat::from_fn(d, d, |i, j| if i + j < d { f[i + j] } else { CZERO });
        Correction::from_dense(&h, f64::EPSILON)
    }

    pub fn rank(&self) -> usize {
        self.u.ncols()
    }

    pub fn is_zero(&self) -> bool {
        self.rank() == 0
    }

    pub fn u(&self) -> &CMat {
        &self.u
    }

    pub fn v(&self) -> &CMat {
        &self.v
    }

    pub fn rows_u(&self) -> usize {
        self.u.nrows()
    }

    pub fn rows_v(&self) -> usize {
        self.v.nrows()
    }

    pub fn support(&self) -> usize {
        self.rows_u().max(self.rows_v())
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Correction {
            u: &self.u * s,
            v: self.v.clone(),
        }
    }

    pub fn adjoint(&self) -> Self {
        Correction {
            u: self.v.clone(),
            v: self.u.clone(),
        }
    }

    /// `[E, F]` as a single factored pair (no compression).
    pub fn concat(&self, other: &Correction) -> Self {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        let ru = self.rows_u().max(other.rows_u());
        let rv = self.rows_v().max(other.rows_v());
        let k = self.rank() + other.rank();
        let mut u = CMat::zeros(ru, k);
        let mut v = CMat::zeros(rv, k);
        u.view_mut((0, 0), (self.rows_u(), self.rank())).copy_from(&self.u);
        u.view_mut((0, self.rank()), (other.rows_u(), other.rank()))
            .copy_from(&other.u);
        v.view_mut((0, 0), (self.rows_v(), self.rank())).copy_from(&self.v);
        v.view_mut((0, self.rank()), (other.rows_v(), other.rank()))
            .copy_from(&other.v);
        Correction { u, v }
    }

    pub fn frobenius(&self) -> f64 {
        factored_frobenius(&self.u, &self.v)
    }

    pub fn norm2(&self) -> f64 {
        factored_norm2(&self.u, &self.v)
    }

    /// Max row sum of `|U V*|` over the support.
    pub fn norm_inf(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let vt = self.v.adjoint();
        let mut best: f64 = 0.0;
        let chunk = 256;
        let mut i = 0;
        while i < self.rows_u() {
            let r = chunk.min(self.rows_u() - i);
            let block = self.u.rows(i, r) * &vt;
            for row in block.row_iter() {
                best = best.max(row.iter().map(|v| v.norm()).sum());
            }
            i += r;
        }
        best
    }

    /// Entry `(i, j)`, 1-based.
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        if i == 0 || j == 0 || i > self.rows_u() || j > self.rows_v() {
            return CZERO;
        }
        self.u.row(i - 1).iter().zip(self.v.row(j - 1).iter()).map(|(a, b)| a * b.conj()).sum()
    }

    /// Leading `rows x cols` block of `E`.
    pub fn dense(&self, rows: usize, cols: usize) -> CMat {
        if self.is_zero() {
            return CMat::zeros(rows, cols);
        }
        resize_rows(&self.u, rows) * resize_rows(&self.v, cols).adjoint()
    }

    /// Rank truncation with `||E - E'||_F <= tol max(||E||_F, sum_j |u_j| |v_j|)`, via thin QR of
    /// both factors and an SVD of the small core. Trailing rows that carry
    /// less than `1e-15 ||E||_F` are trimmed.
    pub fn compress(&self, tol: f64) -> Self {
        if self.is_zero() || self.rows_u() == 0 || self.rows_v() == 0 {
            return Correction::zero();
        }
        let (qu, ru) = thin_qr(&self.u);
        let (qv, rv) = thin_qr(&self.v);
        let core = &ru * rv.adjoint();
        let (w, s, z) = svd(&core);
        let idx: Vec<usize> = (0..s.len()).collect();
        let total: f64 = s.iter().map(|x| x * x).sum();
        if total == 0.0 {
            return Correction::zero();
        }
        // relative to sum_j |u_j| |v_j| so that cancelled sums compress to zero
        let terms: f64 = (0..self.rank())
            .map(|j| self.u.column(j).norm() * self.v.column(j).norm())
            .sum();
        let reference = (terms * terms).max(total);
        let keep_tail = tol * tol * reference;
        let mut r = idx.len();
        let mut tail = 0.0;
        while r > 0 {
            let x = s[idx[r - 1]];
            if x == 0.0 || tail + x * x <= keep_tail {
                tail += x * x;
                r -= 1;
            } else {
                break;
            }
        }
        if r == 0 {
            return Correction::zero();
        }
        let mut wk = CMat::zeros(w.nrows(), r);
        let mut zk = CMat::zeros(z.nrows(), r);
        for (c, &i) in idx[..r].iter().enumerate() {
            wk.set_column(c, &(w.column(i) * Complex64::new(s[i], 0.0)));
            zk.set_column(c, &z.column(i));
        }
        let u = qu * wk;
        let v = qv * zk;
        let fro = total.sqrt();
        let smax = s[idx[0]];
        let cut = 1e-15 * fro;
        let mut ru_rows = u.nrows();
        while ru_rows > 0 && u.row(ru_rows - 1).norm() <= cut {
            ru_rows -= 1;
        }
        let mut rv_rows = v.nrows();
        while rv_rows > 0 && v.row(rv_rows - 1).norm() * smax <= cut {
            rv_rows -= 1;
        }
        Correction {
            u: resize_rows(&u, ru_rows),
            v: resize_rows(&v, rv_rows),
        }
    }
}

/// Dense `rows x cols` leading block of `H(f)`.
fn hankel_block(f: &[Complex64], rows: usize, cols: usize) -> CMat {
    CMat::from_fn(rows, cols, |i, j| f.get(i + j).copied().unwrap_or(CZERO))
}

/// Which operator norm an estimate bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormKind {
    Two,
    Inf,
}

/// `T(symbol) + correction`.
#[derive(Debug, Clone, PartialEq)]
pub struct QtMatrix {
    symbol: LaurentSymbol,
    correction: Correction,
}

impl QtMatrix {
    pub fn new(symbol: LaurentSymbol, correction: Correction) -> Self {
        QtMatrix { symbol, correction }
    }

    pub fn toeplitz(symbol: LaurentSymbol) -> Self {
        QtMatrix::new(symbol, Correction::zero())
    }

    pub fn from_correction(correction: Correction) -> Self {
        QtMatrix::new(LaurentSymbol::zero(), correction)
    }

    pub fn identity() -> Self {
        QtMatrix::scalar(CONE)
    }

    pub fn scalar(c: Complex64) -> Self {
        QtMatrix::toeplitz(LaurentSymbol::constant(c))
    }

    pub fn zero() -> Self {
        QtMatrix::toeplitz(LaurentSymbol::zero())
    }

    pub fn symbol(&self) -> &LaurentSymbol {
        &self.symbol
    }

    pub fn correction(&self) -> &Correction {
        &self.correction
    }

    pub fn is_zero(&self) -> bool {
        self.symbol.is_zero() && self.correction.is_zero()
    }

    pub fn adjoint(&self) -> Self {
        QtMatrix::new(self.symbol.adjoint(), self.correction.adjoint())
    }

    pub fn scale(&self, s: Complex64) -> Self {
        if s == CZERO {
            return QtMatrix::zero();
        }
        QtMatrix::new(self.symbol.scale(s), self.correction.scale(s))
    }

    /// `A - gamma I`.
    pub fn shift(&self, gamma: Complex64) -> Self {
        QtMatrix::new(self.symbol.add_constant(-gamma), self.correction.clone())
    }

    pub fn add(&self, other: &QtMatrix, tol: f64) -> Self {
        QtMatrix::new(
            &self.symbol + &other.symbol,
            self.correction.concat(&other.correction).compress(tol),
        )
    }

    pub fn sub(&self, other: &QtMatrix, tol: f64) -> Self {
        self.add(&other.scale(-CONE), tol)
    }

    pub fn mul(&self, other: &QtMatrix, tol: f64) -> Self {
        let a = &self.symbol;
        let b = &other.symbol;
        let ea = &self.correction;
        let eb = &other.correction;
        let mut parts = Vec::new();
        let fa = a.negative_tail();
        let fb = b.positive_tail();
        if !fa.is_empty() && !fb.is_empty() {
            // H(f) vanishes outside its leading len(f) x len(f) block, so only
            // k = min(len) inner indices meet: H(fa)[:, :k] H(fb)[:k, :]
            let k = fa.len().min(fb.len());
            let u = hankel_block(&fa, fa.len(), k);
            let v = hankel_block(&fb, k, fb.len()).adjoint();
            parts.push(Correction::new(-u, v));
        }
        if !ea.is_zero() {
            // E_a T(b) = U_a (T(b)* V_a)*
            let tv = toeplitz_apply_trunc(&b.adjoint(), ea.v(), tol);
            parts.push(Correction::new(ea.u().clone(), tv));
        }
        if !eb.is_zero() {
            let tu = toeplitz_apply_trunc(a, eb.u(), tol);
            parts.push(Correction::new(tu, eb.v().clone()));
        }
        if !ea.is_zero() && !eb.is_zero() {
            let k = ea.rows_v().max(eb.rows_u());
            let mid = resize_rows(ea.v(), k).adjoint() * resize_rows(eb.u(), k);
            parts.push(Correction::new(ea.u() * mid, eb.v().clone()));
        }
        let corr = parts
            .iter()
            .fold(Correction::zero(), |acc, p| acc.concat(p))
            .compress(tol);
        QtMatrix::new(a * b, corr)
    }

    pub fn matvec(&self, x: &BlockVector) -> BlockVector {
        BlockVector::new(self.apply_dense(x.data()))
    }

    pub fn matvec_adjoint(&self, x: &BlockVector) -> BlockVector {
        self.adjoint().matvec(x)
    }

    /// `A x` for a dense leading block `x`; the result has
    /// `max(rows(x) + lower bandwidth, r_U)` rows.
    pub fn apply_dense(&self, x: &CMat) -> CMat {
        let mut y = toeplitz_apply(&self.symbol, x);
        let e = &self.correction;
        if !e.is_zero() && x.nrows() > 0 {
            let r = e.rows_v().min(x.nrows());
            let coef = e.v().rows(0, r).adjoint() * x.rows(0, r);
            let add = e.u() * coef;
            if add.nrows() > y.nrows() {
                y = resize_rows(&y, add.nrows());
            }
            let mut top = y.rows_mut(0, add.nrows());
            top += add;
        }
        y
    }

    /// Entry `(i, j)`, 1-based.
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.symbol.coeff(j as i64 - i as i64) + self.correction.get(i, j)
    }

    /// Leading `n x n` block: `a_{j-i} + E_ij`.
    pub fn finite_section(&self, n: usize) -> CMat {
        self.section(n, n)
    }

    pub fn section(&self, rows: usize, cols: usize) -> CMat {
        let s = &self.symbol;
        let mut m = CMat::from_fn(rows, cols, |i, j| s.coeff(j as i64 - i as i64));
        if !self.correction.is_zero() {
            m += self.correction.dense(rows, cols);
        }
        m
    }

    /// Upper bound for the operator norm: `||a||_W + ||E||`.
    pub fn norm_estimate(&self, kind: NormKind) -> f64 {
        let e = match kind {
            NormKind::Two => self.correction.norm2(),
            NormKind::Inf => self.correction.norm_inf(),
        };
        self.symbol.wiener_norm() + e
    }

    /// Hermitian symbol and Hermitian correction.
    pub fn is_hermitian(&self, tol: f64) -> bool {
        if !self.symbol.is_hermitian() {
            return false;
        }
        let e = &self.correction;
        if e.is_zero() {
            return true;
        }
        let n = e.support();
        let d = e.dense(n, n);
        (&d - d.adjoint()).norm() <= tol * d.norm().max(f64::MIN_POSITIVE)
    }

    /// Solve `A x = b` (see [`solve_block`]).
    pub fn solve(&self, b: &BlockVector, opts: &SolveBlockOptions) -> crate::Result<BlockVector> {
        solve_block(self, b, opts)
    }

    /// Inverse as a QT matrix: `A^{-1} = T(1/a) + A^{-1} (I - A T(1/a))`,
    /// where the bracket is compact and its columns are obtained by
    /// `solve_block`.
    pub fn inverse(&self, opts: &SolveBlockOptions) -> crate::Result<QtMatrix> {
        use crate::symbol::{divide, EvInterpOptions};
        let a = &self.symbol;
        solve::check_invertible(a)?;
        let one = LaurentSymbol::constant(CONE);
        let q = divide(
            &one,
            a,
            a.wiener_norm(),
            &EvInterpOptions {
                tol: opts.tol.max(1e-15),
                ..EvInterpOptions::default()
            },
        )
        .map_err(|e| match e {
            crate::Error::SymbolSingular { .. } => {
                crate::Error::NotInvertible("symbol vanishes on the unit circle".into())
            }
            other => other,
        })?;
        let (_, x) = q.symbol.truncate(opts.tol.max(1e-16) * 1e-2);
        let tx = QtMatrix::toeplitz(x.clone());
        let prod = self.mul(&tx, 1e-16);
        let rem = prod.correction().scale(-CONE);
        if rem.is_zero() {
            return Ok(tx);
        }
        let p = BlockVector::new(rem.u().clone());
        let sol = solve_block(self, &p, opts)?;
        let corr = Correction::new(sol.into_data(), rem.v().clone()).compress(opts.tol * 1e-2);
        Ok(QtMatrix::new(x, corr))
    }
}

/// `T(a) x` for a dense block `x` with implicit zeros below; the result has
/// `rows(x) + lower bandwidth` rows.
pub fn toeplitz_apply(a: &LaurentSymbol, x: &CMat) -> CMat {
    let r = x.nrows();
    let kl = a.lower_bandwidth();
    let ku = a.upper_bandwidth();
    if a.is_zero() || r == 0 {
        return CMat::zeros(r, x.ncols());
    }
    let out_rows = r + kl;
    let mut y = CMat::zeros(out_rows, x.ncols());
    for c in 0..x.ncols() {
        let xc = x.column(c);
        let mut yc = y.column_mut(c);
        for i in 0..out_rows {
            let j0 = i.saturating_sub(kl);
            let j1 = (i + ku).min(r - 1);
            if j0 > j1 {
                continue;
            }
            let mut acc = CZERO;
            for j in j0..=j1 {
                acc += a.coeff(j as i64 - i as i64) * xc[j];
            }
            yc[i] = acc;
        }
    }
    y
}

fn toeplitz_apply_trunc(a: &LaurentSymbol, x: &CMat, tol: f64) -> CMat {
    if tol > 0.0 {
        toeplitz_apply(&a.truncate(tol).1, x)
    } else {
        toeplitz_apply(a, x)
    }
}

/// Numerical rank of a dense block at relative tolerance `tol`
/// (largest-singular-value scaled).
pub fn numerical_rank(m: &DMatrix<Complex64>, tol: f64) -> usize {
    let s = singular_values(m);
    match s.first() {
        None => 0,
        Some(&s0) => s.iter().filter(|&&x| x > tol * s0).count(),
    }
}
