//! Rational Arnoldi on finitely supported block vectors and Galerkin
//! projection for low-rank Sylvester equations.

use nalgebra::Schur;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{factored_norm2, resize_rows, CMat, CZERO};
use crate::operator::LinearOperator;
use crate::qt::{BlockVector, Correction, SolveBlockOptions};
use crate::sylvester::{Monitor, Pole, PoleSequence, SolveOptions, SolveReport, SolveStatus};

/// Relative norm below which a new direction counts as dependent.
pub const DEFLATION_TOL: f64 = 1e-13;

/// `x* y` with both blocks padded to a common number of rows.
fn inner(x: &CMat, y: &CMat) -> CMat {
    let r = x.nrows().max(y.nrows());
    resize_rows(x, r).adjoint() * resize_rows(y, r)
}

fn hcat(a: &CMat, b: &CMat) -> CMat {
    let rows = a.nrows().max(b.nrows());
    let mut out = CMat::zeros(rows, a.ncols() + b.ncols());
    out.view_mut((0, 0), (a.nrows(), a.ncols())).copy_from(a);
    out.view_mut((0, a.ncols()), (b.nrows(), b.ncols()))
        .copy_from(b);
    out
}

/// Orthonormalize the columns of `new` against `basis` and each other by
/// modified Gram-Schmidt, run twice. Returns the surviving columns.
pub fn orthonormalize_against(basis: &CMat, new: &CMat, tol: f64) -> CMat {
    let rows = basis.nrows().max(new.nrows());
    let basis = resize_rows(basis, rows);
    let new = resize_rows(new, rows);
    let mut kept: Vec<nalgebra::DVector<Complex64>> = Vec::new();
    for c in 0..new.ncols() {
        let mut v = new.column(c).into_owned();
        let pre = v.norm();
        if pre == 0.0 {
            continue;
        }
        for _ in 0..2 {
            for q in basis.column_iter() {
                let h = q.dotc(&v);
                v.axpy(-h, &q, Complex64::new(1.0, 0.0));
            }
            for q in &kept {
                let h = q.dotc(&v);
                v.axpy(-h, q, Complex64::new(1.0, 0.0));
            }
        }
        let post = v.norm();
        if post > tol * pre {
            kept.push(v / Complex64::new(post, 0.0));
        }
    }
    let mut out = CMat::zeros(rows, kept.len());
    for (i, v) in kept.iter().enumerate() {
        out.set_column(i, v);
    }
    out
}

/// Orthonormal basis of a rational Krylov space of `op` (or of its adjoint)
/// grown one pole at a time. Every extension continues from the newest
/// block: infinite poles multiply it by the operator, finite poles apply a
/// shifted inverse. Continuing separate polynomial and resolvent chains
/// spans the same space but loses accuracy fast when the pole types mix.
pub struct RationalArnoldi<'a, Op: LinearOperator + ?Sized> {
    op: &'a Op,
    adjoint: bool,
    basis: CMat,
    images: CMat,
    last: CMat,
    poles: Vec<Pole>,
    block_width: usize,
    opts: SolveBlockOptions,
}

impl<'a, Op: LinearOperator + ?Sized> RationalArnoldi<'a, Op> {
    /// Starts with `start` itself (first pole infinite) or with
    /// `(op - p)^{-1} start`.
    pub fn new(op: &'a Op, adjoint: bool, start: &CMat, first_pole: Pole, opts: SolveBlockOptions) -> Result<Self> {
        let mut me = RationalArnoldi {
            op,
            adjoint,
            basis: CMat::zeros(0, 0),
            images: CMat::zeros(0, 0),
            last: CMat::zeros(0, 0),
            poles: Vec::new(),
            block_width: start.ncols(),
            opts,
        };
        let first = match first_pole {
            Pole::Infinity => start.clone(),
            Pole::Finite(p) => me.solve(p, start)?,
        };
        let q = orthonormalize_against(&CMat::zeros(0, 0), &first, DEFLATION_TOL);
        if q.ncols() == 0 {
            return Err(Error::Breakdown);
        }
        me.push(q, first_pole);
        Ok(me)
    }

    fn apply(&self, x: &CMat) -> CMat {
        let v = BlockVector::new(x.clone());
        if self.adjoint {
            self.op.apply_adjoint(&v).into_data()
        } else {
            self.op.apply(&v).into_data()
        }
    }

    fn solve(&self, p: Complex64, x: &CMat) -> Result<CMat> {
        let v = BlockVector::new(x.clone());
        let r = if self.adjoint {
            self.op.solve_shifted_adjoint(p, &v, &self.opts)?
        } else {
            self.op.solve_shifted(p, &v, &self.opts)?
        };
        Ok(r.into_data())
    }

    fn push(&mut self, q: CMat, pole: Pole) {
        let img = self.apply(&q);
        self.basis = hcat(&self.basis, &q);
        self.images = hcat(&self.images, &img);
        self.last = q;
        self.poles.push(pole);
    }

    /// Adds the directions generated by `pole`; returns how many survived
    /// deflation.
    pub fn extend(&mut self, pole: Pole) -> Result<usize> {
        let w = match pole {
            Pole::Infinity => self.apply(&self.last),
            Pole::Finite(p) => self.solve(p, &self.last)?,
        };
        let q = orthonormalize_against(&self.basis, &w, DEFLATION_TOL);
        if q.ncols() == 0 {
            return Err(Error::Breakdown);
        }
        let k = q.ncols();
        if q.nrows() > self.basis.nrows() {
            self.basis = resize_rows(&self.basis, q.nrows());
        }
        self.push(q, pole);
        Ok(k)
    }

    /// Orthonormal columns (leading rows; zero below).
    pub fn basis(&self) -> &CMat {
        &self.basis
    }

    /// Operator (or adjoint) applied to every basis column.
    pub fn images(&self) -> &CMat {
        &self.images
    }

    pub fn poles_used(&self) -> &[Pole] {
        &self.poles
    }

    pub fn block_width(&self) -> usize {
        self.block_width
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    /// `||W* W - I||_F`.
    pub fn orthogonality_error(&self) -> f64 {
        let g = self.basis.adjoint() * &self.basis;
        (g - CMat::identity(self.dim(), self.dim())).norm()
    }
}

/// Solve the small dense equation `Ap Y + Y Bp + Cp = 0` by complex Schur
/// forms of both coefficients and triangular back substitution.
pub fn dense_sylvester_small(ap: &CMat, bp: &CMat, cp: &CMat) -> Result<CMat> {
    let m = ap.nrows();
    let n = bp.nrows();
    if ap.ncols() != m || bp.ncols() != n || cp.nrows() != m || cp.ncols() != n {
        return Err(Error::InvalidInput("projected dimensions do not conform".into()));
    }
    if m == 0 || n == 0 {
        return Ok(CMat::zeros(m, n));
    }
    let (q1, t1) = Schur::new(ap.clone()).unpack();
    let (q2, t2) = Schur::new(bp.clone()).unpack();
    let ct = q1.adjoint() * cp * &q2;
    let scale = ap.norm() + bp.norm();
    let mut y = CMat::zeros(m, n);
    for j in 0..n {
        let mut rhs = -ct.column(j).into_owned();
        for i in 0..j {
            let t = t2[(i, j)];
            if t != CZERO {
                rhs -= y.column(i) * t;
            }
        }
        let s = t2[(j, j)];
        for r in (0..m).rev() {
            let mut acc = rhs[r];
            for c in r + 1..m {
                acc -= t1[(r, c)] * rhs[c];
            }
            let d = t1[(r, r)] + s;
            if d.norm() <= 1e-14 * scale {
                return Err(Error::SingularProjection);
            }
            rhs[r] = acc / d;
        }
        y.set_column(j, &rhs);
    }
    let y = &q1 * y * q2.adjoint();
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::SingularProjection);
    }
    Ok(y)
}

/// `X = (W Y) Z*` as a correction.
pub fn lift_solution(w: &CMat, z: &CMat, y: &CMat) -> Correction {
    if y.iter().all(|v| *v == CZERO) {
        return Correction::zero();
    }
    Correction::new(w * y, z.clone())
}

/// Galerkin projection onto `RK(A, U, {beta_j})` and `RK(B*, V, {-conj alpha_j})`
/// with the residual evaluated from the stored operator images.
pub fn galerkin_solve<A, B>(
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
    galerkin_impl(a, b, c, poles, opts, None)
}

/// As [`galerkin_solve`] with a caller-supplied residual.
pub fn galerkin_with_monitor<A, B>(
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
    galerkin_impl(a, b, c, poles, opts, Some(monitor))
}

fn galerkin_impl<A, B>(
    a: &A,
    b: &B,
    c: &Correction,
    poles: &PoleSequence,
    opts: &SolveOptions,
    mut monitor: Option<&mut Monitor<'_>>,
) -> Result<(Correction, SolveReport)>
where
    A: LinearOperator + ?Sized,
    B: LinearOperator + ?Sized,
{
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
    let cnorm = c.norm2();
    let (al, be) = poles.pair(0);
    let mut left = RationalArnoldi::new(a, false, c.u(), be, bopts)?;
    let mut right = RationalArnoldi::new(b, true, c.v(), al.reflect(), bopts)?;
    let skip_finite = poles.is_extended();
    let mut x = Correction::zero();
    for k in 1..=opts.max_iter {
        if k > 1 {
            let (al, be) = poles.pair(k - 1);
            left.extend(be)?;
            right.extend(al.reflect())?;
        }
        let (_, be) = poles.pair(k - 1);
        let last = k == opts.max_iter;
        if skip_finite && !be.is_infinite() && !last {
            continue;
        }
        let w = left.basis();
        let z = right.basis();
        let ap = inner(w, left.images());
        let bp = inner(right.images(), z);
        let cp = inner(w, c.u()) * inner(z, c.v()).adjoint();
        let y = dense_sylvester_small(&ap, &bp, &cp)?;
        let res = match monitor.as_mut() {
            Some(m) => {
                x = lift_solution(w, z, &y).compress(opts.compression_tol);
                m(k, &x)?
            }
            None => {
                let wy = w * &y;
                let awy = left.images() * &y;
                let lf = hcat(&hcat(&awy, &wy), c.u());
                let rf = hcat(&hcat(z, right.images()), c.v());
                x = Correction::new(wy, z.clone());
                factored_norm2(&lf, &rf) / cnorm
            }
        };
        report.residual_history.push((k, res));
        if res <= opts.tol {
            report.status = SolveStatus::Converged;
            break;
        }
    }
    let x = x.compress(opts.compression_tol);
    report.final_rank = x.rank();
    report.final_residual = report.residual_history.last().map(|r| r.1).unwrap_or(f64::NAN);
    Ok((x, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c64, real};
    use crate::qt::QtMatrix;
    use crate::symbol::LaurentSymbol;
    use rand::{rngs::StdRng, Rng, SeedableRng};

    fn rand_mat(rng: &mut StdRng, r: usize, c: usize) -> CMat {
        CMat::from_fn(r, c, |_, _| c64(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
    }

    fn kron_solve(a: &CMat, b: &CMat, c: &CMat) -> CMat {
        let m = a.nrows();
        let n = b.nrows();
        let mut k = CMat::zeros(m * n, m * n);
        for j in 0..n {
            for i in 0..m {
                for l in 0..m {
                    k[(j * m + i, j * m + l)] += a[(i, l)];
                }
                for l in 0..n {
                    k[(j * m + i, l * m + i)] += b[(l, j)];
                }
            }
        }
        let rhs = -CMat::from_column_slice(m * n, 1, c.as_slice());
        let y = k.lu().solve(&rhs).unwrap();
        CMat::from_column_slice(m, n, y.as_slice())
    }

    #[test]
    fn dense_kernel_examples() {
        let y = dense_sylvester_small(
            &CMat::from_element(1, 1, real(2.0)),
            &CMat::from_element(1, 1, real(3.0)),
            &CMat::from_element(1, 1, real(10.0)),
        )
        .unwrap();
        assert!((y[(0, 0)] + real(2.0)).norm() < 1e-15);

        let a = CMat::from_diagonal(&nalgebra::DVector::from_vec(vec![real(1.0), real(2.0), real(4.0)]));
        let b = CMat::from_diagonal(&nalgebra::DVector::from_vec(vec![real(0.5), real(3.0)]));
        let c = CMat::from_fn(3, 2, |i, j| real((i + 2 * j + 1) as f64));
        let y = dense_sylvester_small(&a, &b, &c).unwrap();
        for i in 0..3 {
            for j in 0..2 {
                let want = -c[(i, j)] / (a[(i, i)] + b[(j, j)]);
                assert!((y[(i, j)] - want).norm() < 1e-14);
            }
        }

        let mut rng = StdRng::seed_from_u64(17);
        let a = rand_mat(&mut rng, 10, 10) + CMat::identity(10, 10) * real(4.0);
        let b = rand_mat(&mut rng, 10, 10) + CMat::identity(10, 10) * real(4.0);
        let c = rand_mat(&mut rng, 10, 10);
        let y = dense_sylvester_small(&a, &b, &c).unwrap();
        let yk = kron_solve(&a, &b, &c);
        assert!((&y - &yk).norm() < 1e-11 * yk.norm());
        let r = &a * &y + &y * &b + &c;
        assert!(r.norm() <= 1e-12 * ((a.norm() + b.norm()) * y.norm() + c.norm()));
    }

    #[test]
    fn dense_kernel_singular() {
        let a = CMat::from_element(1, 1, real(1.0));
        let b = CMat::from_element(1, 1, real(-1.0));
        let c = CMat::from_element(1, 1, real(1.0));
        assert_eq!(dense_sylvester_small(&a, &b, &c), Err(Error::SingularProjection));
    }

    #[test]
    fn lift_examples() {
        let w = CMat::from_fn(4, 1, |i, _| real(i as f64));
        let z = CMat::from_fn(3, 1, |i, _| real(1.0 + i as f64));
        assert!(lift_solution(&w, &z, &CMat::zeros(1, 1)).is_zero());
        let e = lift_solution(&w, &z, &CMat::from_element(1, 1, real(2.0)));
        assert_eq!(e.rank(), 1);
        assert!((e.dense(4, 3) - &w * real(2.0) * z.adjoint()).norm() < 1e-15);
    }

    #[test]
    fn arnoldi_first_block_and_stagnation() {
        let a = QtMatrix::scalar(real(2.0));
        let u = CMat::from_fn(5, 2, |i, j| real((i * (j + 1)) as f64 + 1.0));
        let opts = SolveBlockOptions::default();
        let mut rk = RationalArnoldi::new(&a, false, &u, Pole::Infinity, opts).unwrap();
        assert_eq!(rk.dim(), 2);
        let g = rk.basis().adjoint() * &u;
        // span(W) = span(U)
        let proj = rk.basis() * g;
        assert!((proj - &u).norm() < 1e-13 * u.norm());
        assert!(matches!(rk.extend(Pole::Infinity), Err(Error::Breakdown)));
        assert!(matches!(rk.extend(Pole::real(0.5)), Err(Error::Breakdown)));
    }

    #[test]
    fn galerkin_exact_for_scalars() {
        let a = QtMatrix::scalar(real(3.0));
        let b = QtMatrix::scalar(real(2.0));
        let c = Correction::new(CMat::from_fn(3, 1, |i, _| real(i as f64 + 1.0)), CMat::from_element(2, 1, real(1.0)));
        let (x, rep) = galerkin_solve(&a, &b, &c, &PoleSequence::extended(), &SolveOptions::default()).unwrap();
        assert!(rep.converged());
        assert_eq!(rep.iterations(), 1);
        assert!((x.dense(3, 2) + c.dense(3, 2) * real(0.2)).norm() < 1e-14);
    }

    #[test]
    fn galerkin_condition_holds() {
        let sym = LaurentSymbol::from_real(-1, &[-1.0, 3.0, -1.0]);
        let a = QtMatrix::toeplitz(sym.clone());
        let b = QtMatrix::toeplitz(sym.add_constant(real(0.5)));
        let c = Correction::new(CMat::from_fn(4, 1, |i, _| real(1.0 / (1 + i) as f64)), CMat::from_element(1, 1, real(1.0)));
        let opts = SolveOptions {
            max_iter: 6,
            tol: 1e-30,
            ..SolveOptions::default()
        };
        let bopts = opts.block_options();
        let poles = PoleSequence::symmetric(&[1.2, 3.0]).unwrap();
        let (x, _) = galerkin_solve(&a, &b, &c, &poles, &opts).unwrap();
        // rebuild the spaces and check W* R Z = 0
        let mut w = RationalArnoldi::new(&a, false, c.u(), Pole::real(-1.2), bopts).unwrap();
        let mut z = RationalArnoldi::new(&b, true, c.v(), Pole::real(-1.2), bopts).unwrap();
        for k in 1..6 {
            let (al, be) = poles.pair(k);
            w.extend(be).unwrap();
            z.extend(al.reflect()).unwrap();
        }
        let n = 200;
        let r = a.finite_section(n) * x.dense(n, n) + x.dense(n, n) * b.finite_section(n) + c.dense(n, n);
        let wp = resize_rows(w.basis(), n);
        let zp = resize_rows(z.basis(), n);
        let pr = wp.adjoint() * &r * zp;
        assert!(pr.norm() < 1e-10 * c.norm2(), "{}", pr.norm());
    }

    #[test]
    fn orthogonality_after_many_extensions() {
        let sym = LaurentSymbol::from_real(-2, &[0.1, -1.0, 4.0, -1.2, 0.3]);
        let a = QtMatrix::new(sym, Correction::entry(2, 1, c64(0.3, 0.2)));
        let u = CMat::from_fn(3, 2, |i, j| c64(1.0 + i as f64, j as f64));
        let mut rk = RationalArnoldi::new(&a, false, &u, Pole::Infinity, SolveBlockOptions::default()).unwrap();
        let poles = [Pole::real(0.0), Pole::Infinity, Pole::real(-1.5), Pole::Finite(c64(0.0, 2.0))];
        for k in 0..60 {
            rk.extend(poles[k % 4]).unwrap();
        }
        assert!(rk.orthogonality_error() <= 1e-12, "{}", rk.orthogonality_error());
    }
}
