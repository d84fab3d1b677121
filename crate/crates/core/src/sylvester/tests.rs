use super::*;
use crate::linalg::{c64, real, resize_rows, CMat, CONE, CZERO};
use crate::qt::{BlockVector, SolveBlockOptions};
use nalgebra::DMatrix;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

/// Dense `n x n` matrix seen as an operator on vectors supported in the
/// first `n` rows.
struct DenseOp(CMat);

impl DenseOp {
    fn fit(&self, v: &BlockVector) -> CMat {
        resize_rows(v.data(), self.0.nrows())
    }
}

impl LinearOperator for DenseOp {
    fn apply(&self, v: &BlockVector) -> BlockVector {
        BlockVector::new(&self.0 * self.fit(v))
    }
    fn apply_adjoint(&self, v: &BlockVector) -> BlockVector {
        BlockVector::new(self.0.adjoint() * self.fit(v))
    }
    fn solve_shifted(&self, s: Complex64, v: &BlockVector, _: &SolveBlockOptions) -> Result<BlockVector> {
        let n = self.0.nrows();
        let m = &self.0 - CMat::identity(n, n) * s;
        Ok(BlockVector::new(m.lu().solve(&self.fit(v)).unwrap()))
    }
    fn solve_shifted_adjoint(&self, s: Complex64, v: &BlockVector, _: &SolveBlockOptions) -> Result<BlockVector> {
        let n = self.0.nrows();
        let m = self.0.adjoint() - CMat::identity(n, n) * s;
        Ok(BlockVector::new(m.lu().solve(&self.fit(v)).unwrap()))
    }
    fn norm_bound(&self) -> f64 {
        self.0.norm()
    }
}

/// Kronecker oracle for `A X + X B + C = 0`.
fn dense_sylvester(a: &CMat, b: &CMat, c: &CMat) -> CMat {
    let n = a.nrows();
    let m = b.nrows();
    let k = CMat::identity(m, m).kronecker(a) + b.transpose().kronecker(&CMat::identity(n, n));
    let rhs = CMat::from_column_slice(n * m, 1, (-c).as_slice());
    let x = k.lu().solve(&rhs).unwrap();
    CMat::from_column_slice(n, m, x.as_slice())
}

fn col(v: &[f64]) -> CMat {
    CMat::from_iterator(v.len(), 1, v.iter().map(|&x| real(x)))
}

fn rank_one(u: &[f64], v: &[f64]) -> Correction {
    Correction::new(col(u), col(v))
}

#[test]
fn scalar_instance_exact_after_one_step() {
    let a = QtMatrix::scalar(real(2.0));
    let b = QtMatrix::scalar(real(3.0));
    let c = rank_one(&[1.0], &[0.5]);
    let poles = PoleSequence::constant(Pole::real(2.0), Pole::real(-1.0));
    let (x, rep) = adi_sylvester(&a, &b, &c, &poles, &SolveOptions::default()).unwrap();
    assert_eq!(rep.iterations(), 1);
    assert!(rep.converged());
    assert!((x.get(1, 1) - real(-0.1)).norm() < 1e-15);
}

#[test]
fn zero_rhs_gives_zero() {
    let a = QtMatrix::scalar(real(2.0));
    let poles = PoleSequence::constant(Pole::real(1.0), Pole::real(-1.0));
    let (x, rep) = adi_sylvester(&a, &a, &Correction::zero(), &poles, &SolveOptions::default()).unwrap();
    assert!(x.is_zero());
    assert_eq!(rep.residual_history, vec![(1, 0.0)]);
}

#[test]
fn adi_rejects_bad_poles() {
    let a = QtMatrix::scalar(real(2.0));
    let c = rank_one(&[1.0], &[1.0]);
    let opts = SolveOptions::default();
    let r = adi_sylvester(&a, &a, &c, &PoleSequence::extended(), &opts);
    assert!(matches!(r, Err(Error::InvalidPoles(_))));
    let same = PoleSequence::constant(Pole::real(1.0), Pole::real(1.0));
    assert!(matches!(adi_sylvester(&a, &a, &c, &same, &opts), Err(Error::InvalidPoles(_))));
}

fn random_dense(rng: &mut StdRng, n: usize) -> CMat {
    CMat::from_fn(n, n, |_, _| c64(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
}

#[test]
fn adi_error_matches_rational_function_formula() {
    // X - X_k = r_k(A) X r_k(-B)^{-1}, r_k(z) = prod (z - a_j) / (z - b_j)
    let n = 24;
    let mut rng = StdRng::seed_from_u64(7);
    let shift = |m: CMat, s: f64| m + CMat::identity(n, n) * real(s);
    let a = shift(random_dense(&mut rng, n) * real(0.1), 3.0);
    let b = shift(random_dense(&mut rng, n) * real(0.1), 2.0);
    let u = CMat::from_fn(n, 2, |_, _| real(rng.random_range(-1.0..1.0)));
    let v = CMat::from_fn(n, 2, |_, _| real(rng.random_range(-1.0..1.0)));
    let c = &u * v.adjoint();
    let x = dense_sylvester(&a, &b, &c);
    let pairs = vec![
        (Pole::real(2.5), Pole::real(-2.0)),
        (Pole::real(3.3), Pole::real(-1.7)),
        (Pole::Finite(c64(2.9, 0.2)), Pole::Finite(c64(-2.2, -0.1))),
        (Pole::real(3.0), Pole::real(-2.5)),
        (Pole::real(2.7), Pole::real(-1.9)),
    ];
    let poles = PoleSequence::new(pairs.clone()).unwrap();
    let id = CMat::identity(n, n);
    for k in 1..=5 {
        let opts = SolveOptions {
            max_iter: k,
            tol: 1e-300,
            compression_tol: 1e-16,
            ..SolveOptions::default()
        };
        let (xk, _) = adi_sylvester(&DenseOp(a.clone()), &DenseOp(b.clone()), &Correction::new(u.clone(), v.clone()), &poles, &opts)
            .unwrap();
        let mut ra = id.clone();
        let mut rb = id.clone();
        for (al, be) in pairs.iter().take(k) {
            let (al, be) = (al.finite().unwrap(), be.finite().unwrap());
            ra = (&a - &id * al) * (&a - &id * be).try_inverse().unwrap() * ra;
            rb = (-&b - &id * al) * (-&b - &id * be).try_inverse().unwrap() * rb;
        }
        let want = &ra * &x * rb.try_inverse().unwrap();
        let got = &x - xk.dense(n, n);
        // relative to the solution: the error itself decays geometrically
        let rel = (&got - &want).norm() / x.norm();
        assert!(rel < 1e-10, "k = {k}: {rel:e}");
    }
}

#[test]
fn residual_norm_homogeneous_and_upper_bound() {
    let a = QtMatrix::new(
        LaurentSymbol::from_real(-1, &[-1.0, 4.0, -1.5]),
        rank_one(&[0.3, 0.1], &[1.0]),
    );
    let b = QtMatrix::new(LaurentSymbol::from_real(-2, &[0.2, -1.0, 3.0, -0.5]), Correction::zero());
    let c = QtMatrix::new(LaurentSymbol::from_real(0, &[1.0, 0.5]), rank_one(&[1.0, -1.0, 0.5], &[0.2, 0.1]));
    let x = QtMatrix::new(LaurentSymbol::from_real(-1, &[0.1, -0.2, 0.05]), rank_one(&[0.4, 0.3], &[0.2]));
    let r1 = residual_norm(&a, &b, &c, &x);
    let r2 = residual_norm(&a, &b, &c.scale(real(2.0)), &x.scale(real(2.0)));
    assert!((r2 - 2.0 * r1).abs() <= 1e-14 * r2);
    let n = 512;
    let m = 256;
    let r = a.section(m, n) * x.section(n, m) + x.section(m, n) * b.section(n, m)
        + c.section(m, m);
    let dense = crate::linalg::singular_values(&r)[0];
    assert!(r1 >= dense, "{r1} < {dense}");
}

#[test]
fn constant_coefficients_give_pure_toeplitz() {
    let a = QtMatrix::scalar(real(3.0));
    let b = QtMatrix::scalar(real(2.0));
    let c = QtMatrix::toeplitz(LaurentSymbol::from_real(-2, &[1.0, -2.0, 0.5, 4.0]));
    let (x, rep) = solve_sylvester(&a, &b, &c, &SolveOptions::default(), &PoleChoice::Auto).unwrap();
    assert!(x.correction().is_zero());
    let want = c.symbol().scale(real(-0.2));
    assert!((x.symbol() - &want).wiener_norm() < 1e-14);
    assert!(rep.converged());
}

#[test]
fn zero_symbol_rhs_gives_low_rank_solution() {
    let a = QtMatrix::toeplitz(LaurentSymbol::from_real(-1, &[-1.0, 4.0, -1.0]));
    let c = QtMatrix::from_correction(rank_one(&[1.0, 0.5, 0.25], &[1.0, -1.0]));
    for method in [Method::Adi, Method::Galerkin] {
        let opts = SolveOptions::with_tol(1e-10).with_method(method);
        let (x, rep) = solve_sylvester(&a, &a, &c, &opts, &PoleChoice::Auto).unwrap();
        assert!(x.symbol().is_zero(), "{method:?}");
        assert!(rep.converged(), "{method:?}: {:e}", rep.final_residual);
        assert!(rep.final_residual <= 1e-10);
        assert!(x.correction().rank() < 40);
    }
}

#[test]
fn correction_rhs_constant_coefficients() {
    let a = QtMatrix::new(LaurentSymbol::constant(real(2.0)), rank_one(&[1.0], &[1.0]));
    let b = QtMatrix::scalar(real(1.0));
    let c = QtMatrix::new(LaurentSymbol::from_real(-1, &[1.0, 2.0, 1.0]), rank_one(&[0.5, 0.5], &[1.0]));
    let x = LaurentSymbol::from_real(-1, &[-1.0 / 3.0, -2.0 / 3.0, -1.0 / 3.0]);
    // E_a T(x) is the only extra term
    let got = correction_rhs(&a, &b, &c, &x, 1e-14);
    let want = c.correction().dense(4, 4) + a.correction().dense(4, 4) * QtMatrix::toeplitz(x).finite_section(4);
    assert!((got.dense(4, 4) - want).norm() < 1e-14);
}

#[test]
fn correction_rhs_rank_bound() {
    let a = QtMatrix::toeplitz(LaurentSymbol::from_real(-2, &[-0.5, -1.0, 5.0, -1.0, 0.3]));
    let b = QtMatrix::toeplitz(LaurentSymbol::from_real(-1, &[-1.0, 4.0, -2.0]));
    let c = QtMatrix::toeplitz(LaurentSymbol::from_real(-1, &[1.0, 1.0, 1.0]));
    let x = LaurentSymbol::from_real(-3, &[0.01, 0.1, -0.2, 0.3, -0.1, 0.02, 0.003]);
    let chat = correction_rhs(&a, &b, &c, &x, 1e-14);
    // a_+ has 2 terms, x_- 3, x_+ 3, b_- 1
    assert!(chat.rank() <= 2 + 3 + 3 + 1);
}

#[test]
fn banded_instance_against_dense_sections() {
    let a = QtMatrix::new(
        LaurentSymbol::from_real(-1, &[-1.0, 4.0, -1.2]),
        rank_one(&[0.5, 0.2], &[0.3, 0.1, 0.1]),
    );
    let b = QtMatrix::new(LaurentSymbol::from_real(-1, &[-0.8, 3.0, -1.0]), Correction::zero());
    let c = QtMatrix::new(LaurentSymbol::from_real(-1, &[0.5, 1.0, 0.5]), rank_one(&[1.0, 2.0], &[1.0]));
    let opts = SolveOptions::with_tol(1e-11);
    let (x, rep) = solve_sylvester(&a, &b, &c, &opts, &PoleChoice::Auto).unwrap();
    assert!(rep.converged());
    let n = 400;
    let r = a.finite_section(n) * x.finite_section(n) + x.finite_section(n) * b.finite_section(n) + c.finite_section(n);
    let lead = r.view((0, 0), (200, 200)).norm();
    assert!(lead <= 1e-9 * c.finite_section(200).norm(), "{lead:e}");
}

#[test]
fn pde_first_step_against_dense_section() {
    use crate::experiments::pde::{heat_source, step_matrix, step_poles};
    use crate::experiments::SampleOrigin;
    let (dx, dt) = (0.05, 0.05);
    let m = step_matrix(dx, dt);
    let f = heat_source(dx, SampleOrigin::Listing);
    let c = f.scale(real(-dx * dx * dt));
    for method in [Method::Galerkin, Method::Adi] {
        let opts = SolveOptions::with_tol(1e-8).with_method(method);
        let (x, rep) = solve_sylvester(&m, &m, &c, &opts, &step_poles(method)).unwrap();
        assert!(rep.converged(), "{method:?}");
        assert!(rep.final_residual <= 1e-8);
        // M is tridiagonal, so the leading k x k block needs sections of k + 1 only
        let k = 400;
        let n = k + 1;
        let ms = m.finite_section(n);
        let xs = x.finite_section(n);
        let r = &ms * &xs + &xs * &ms + c.finite_section(n);
        let lead = r.view((0, 0), (k, k)).into_owned();
        let rel = crate::linalg::singular_values(&lead)[0] / c.norm_estimate(NormKind::Two);
        assert!(rel <= 1e-8, "{method:?}: {rel:e}");
    }
}

#[test]
fn best_so_far_is_monotone() {
    let a = QtMatrix::toeplitz(LaurentSymbol::from_real(-1, &[-1.0, 2.5, -1.0]));
    let c = QtMatrix::from_correction(rank_one(&[1.0, -0.5, 0.25, 0.1], &[1.0, 1.0]));
    let opts = SolveOptions::with_tol(1e-10).with_method(Method::Adi);
    let (_, rep) = solve_sylvester(&a, &a, &c, &opts, &PoleChoice::Auto).unwrap();
    let best = rep.best_so_far();
    assert!(best.windows(2).all(|w| w[1] <= w[0]));
}

#[test]
fn auto_poles_choice() {
    let spd = QtMatrix::toeplitz(LaurentSymbol::from_real(-1, &[-1.0, 3.0, -1.0]));
    let seq = auto_poles(&spd, &spd, 1e-8);
    assert!(!seq.is_extended());
    assert!(seq.pairs().iter().all(|(a, b)| a.finite().unwrap().re > 0.0 && b.finite().unwrap().re < 0.0));
    let nsym = QtMatrix::toeplitz(LaurentSymbol::from_real(-1, &[-1.0, 3.0, -0.5]));
    assert!(auto_poles(&nsym, &nsym, 1e-8).is_extended());
    let neg = spd.scale(-CONE);
    let seq = auto_poles(&neg, &neg, 1e-8);
    assert!(seq.pairs().iter().all(|(a, _)| a.finite().unwrap().re < 0.0));
}

#[test]
fn method_parsing() {
    assert_eq!("ADI".parse::<Method>().unwrap(), Method::Adi);
    assert_eq!("galerkin".parse::<Method>().unwrap(), Method::Galerkin);
    assert!(matches!("krylov".parse::<Method>(), Err(Error::UnknownMethod(_))));
}

#[test]
fn dense_oracle_sanity() {
    let a = DMatrix::from_row_slice(2, 2, &[real(2.0), real(1.0), CZERO, real(3.0)]);
    let c = DMatrix::from_element(2, 2, CONE);
    let x = dense_sylvester(&a, &a, &c);
    assert!((&a * &x + &x * &a + &c).norm() < 1e-14);
}
