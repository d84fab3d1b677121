//! Operators acting on finitely supported block vectors. ADI and the
//! rational Krylov solver only need products and shifted solves, so they are
//! written against [`LinearOperator`] and work both for explicit QT matrices
//! and for implicitly represented Cayley transforms.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::CONE;
use crate::qt::{solve_block, BlockVector, NormKind, QtMatrix, SolveBlockOptions};

pub trait LinearOperator {
    fn apply(&self, v: &BlockVector) -> BlockVector;

    fn apply_adjoint(&self, v: &BlockVector) -> BlockVector;

    /// `(A - shift I)^{-1} v`.
    fn solve_shifted(&self, shift: Complex64, v: &BlockVector, opts: &SolveBlockOptions) -> Result<BlockVector>;

    /// `(A* - shift I)^{-1} v`.
    fn solve_shifted_adjoint(
        &self,
        shift: Complex64,
        v: &BlockVector,
        opts: &SolveBlockOptions,
    ) -> Result<BlockVector>;

    /// Upper bound on the 2-norm.
    fn norm_bound(&self) -> f64;
}

fn spectrum_error(shift: Complex64, e: Error) -> Error {
    match e {
        Error::NotInvertible(reason) => Error::PoleInsideSpectrum {
            pole: format!("{shift}"),
            reason,
        },
        other => other,
    }
}

impl LinearOperator for QtMatrix {
    fn apply(&self, v: &BlockVector) -> BlockVector {
        self.matvec(v)
    }

    fn apply_adjoint(&self, v: &BlockVector) -> BlockVector {
        self.matvec_adjoint(v)
    }

    fn solve_shifted(&self, shift: Complex64, v: &BlockVector, opts: &SolveBlockOptions) -> Result<BlockVector> {
        solve_block(&self.shift(shift), v, opts).map_err(|e| spectrum_error(shift, e))
    }

    fn solve_shifted_adjoint(
        &self,
        shift: Complex64,
        v: &BlockVector,
        opts: &SolveBlockOptions,
    ) -> Result<BlockVector> {
        solve_block(&self.adjoint().shift(shift), v, opts).map_err(|e| spectrum_error(shift, e))
    }

    fn norm_bound(&self) -> f64 {
        self.norm_estimate(NormKind::Two)
    }
}

/// `A = (M + I)(I - M)^{-1}`, kept implicit: every product or shifted solve
/// costs one QT solve.
#[derive(Debug, Clone)]
pub struct CayleyLeft {
    m: QtMatrix,
    opts: SolveBlockOptions,
}

/// `B = (N + I)^{-1}(I - N)`, kept implicit.
#[derive(Debug, Clone)]
pub struct CayleyRight {
    n: QtMatrix,
    opts: SolveBlockOptions,
}

impl CayleyLeft {
    pub fn new(m: QtMatrix, opts: SolveBlockOptions) -> Self {
        CayleyLeft { m, opts }
    }
}

impl CayleyRight {
    pub fn new(n: QtMatrix, opts: SolveBlockOptions) -> Self {
        CayleyRight { n, opts }
    }
}

/// `p M + q I` as a QT matrix.
fn affine(m: &QtMatrix, p: Complex64, q: Complex64) -> QtMatrix {
    m.scale(p).shift(-q)
}

fn expect(r: Result<BlockVector>, what: &str) -> BlockVector {
    r.unwrap_or_else(|e| panic!("{what}: {e}"))
}

impl LinearOperator for CayleyLeft {
    fn apply(&self, v: &BlockVector) -> BlockVector {
        let w = expect(
            solve_block(&affine(&self.m, -CONE, CONE), v, &self.opts),
            "I - M must be invertible",
        );
        affine(&self.m, CONE, CONE).matvec(&w)
    }

    fn apply_adjoint(&self, v: &BlockVector) -> BlockVector {
        let w = affine(&self.m, CONE, CONE).matvec_adjoint(v);
        expect(
            solve_block(&affine(&self.m, -CONE, CONE).adjoint(), &w, &self.opts),
            "I - M* must be invertible",
        )
    }

    // (A - s)^{-1} = (I - M) [(1 + s) M + (1 - s) I]^{-1}
    fn solve_shifted(&self, s: Complex64, v: &BlockVector, opts: &SolveBlockOptions) -> Result<BlockVector> {
        let k = affine(&self.m, CONE + s, CONE - s);
        let w = solve_block(&k, v, opts).map_err(|e| spectrum_error(s, e))?;
        Ok(affine(&self.m, -CONE, CONE).matvec(&w))
    }

    fn solve_shifted_adjoint(
        &self,
        s: Complex64,
        v: &BlockVector,
        opts: &SolveBlockOptions,
    ) -> Result<BlockVector> {
        let sc = s.conj();
        let w = affine(&self.m, -CONE, CONE).matvec_adjoint(v);
        let k = affine(&self.m, CONE + sc, CONE - sc).adjoint();
        solve_block(&k, &w, opts).map_err(|e| spectrum_error(s, e))
    }

    fn norm_bound(&self) -> f64 {
        let m = self.m.norm_estimate(NormKind::Two);
        if m < 1.0 {
            (1.0 + m) / (1.0 - m)
        } else {
            f64::INFINITY
        }
    }
}

impl LinearOperator for CayleyRight {
    fn apply(&self, v: &BlockVector) -> BlockVector {
        let w = affine(&self.n, -CONE, CONE).matvec(v);
        expect(
            solve_block(&affine(&self.n, CONE, CONE), &w, &self.opts),
            "I + N must be invertible",
        )
    }

    fn apply_adjoint(&self, v: &BlockVector) -> BlockVector {
        let w = expect(
            solve_block(&affine(&self.n, CONE, CONE).adjoint(), v, &self.opts),
            "I + N* must be invertible",
        );
        affine(&self.n, -CONE, CONE).matvec_adjoint(&w)
    }

    // (B - s)^{-1} = [(1 - s) I - (1 + s) N]^{-1} (N + I)
    fn solve_shifted(&self, s: Complex64, v: &BlockVector, opts: &SolveBlockOptions) -> Result<BlockVector> {
        let w = affine(&self.n, CONE, CONE).matvec(v);
        let k = affine(&self.n, -(CONE + s), CONE - s);
        solve_block(&k, &w, opts).map_err(|e| spectrum_error(s, e))
    }

    fn solve_shifted_adjoint(
        &self,
        s: Complex64,
        v: &BlockVector,
        opts: &SolveBlockOptions,
    ) -> Result<BlockVector> {
        let sc = s.conj();
        let k = affine(&self.n, -(CONE + sc), CONE - sc).adjoint();
        let w = solve_block(&k, v, opts).map_err(|e| spectrum_error(s, e))?;
        Ok(affine(&self.n, CONE, CONE).matvec_adjoint(&w))
    }

    fn norm_bound(&self) -> f64 {
        let n = self.n.norm_estimate(NormKind::Two);
        if n < 1.0 {
            (1.0 + n) / (1.0 - n)
        } else {
            f64::INFINITY
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{real, CMat};
    use crate::qt::Correction;
    use crate::symbol::LaurentSymbol;

    fn small_m() -> QtMatrix {
        QtMatrix::new(
            LaurentSymbol::from_real(-1, &[0.2, 0.3, 0.15]),
            Correction::entry(1, 2, real(0.1)),
        )
    }

    fn dense_inv(m: &CMat) -> CMat {
        m.clone().try_inverse().unwrap()
    }

    #[test]
    fn cayley_operators_match_dense_sections() {
        // dense comparison on the leading block of a large section
        let n = 400;
        let m = small_m();
        let ms = m.finite_section(n);
        let id = CMat::identity(n, n);
        let a = (&ms + &id) * dense_inv(&(&id - &ms));
        let b = dense_inv(&(&ms + &id)) * (&id - &ms);
        let opts = SolveBlockOptions {
            tol: 1e-14,
            n_cap: 1 << 14,
        };
        let left = CayleyLeft::new(m.clone(), opts);
        let right = CayleyRight::new(m.clone(), opts);
        let v = BlockVector::new(CMat::from_fn(5, 1, |i, _| real(1.0 + i as f64)));
        let vd = v.section(n);
        let s = real(-0.7);
        let checks: Vec<(BlockVector, CMat)> = vec![
            (left.apply(&v), &a * &vd),
            (left.apply_adjoint(&v), a.adjoint() * &vd),
            (left.solve_shifted(s, &v, &opts).unwrap(), dense_inv(&(&a - &id * s)) * &vd),
            (
                left.solve_shifted_adjoint(s, &v, &opts).unwrap(),
                dense_inv(&(a.adjoint() - &id * s)) * &vd,
            ),
            (right.apply(&v), &b * &vd),
            (right.apply_adjoint(&v), b.adjoint() * &vd),
            (right.solve_shifted(s, &v, &opts).unwrap(), dense_inv(&(&b - &id * s)) * &vd),
            (
                right.solve_shifted_adjoint(s, &v, &opts).unwrap(),
                dense_inv(&(b.adjoint() - &id * s)) * &vd,
            ),
        ];
        for (k, (got, want)) in checks.iter().enumerate() {
            let g = got.section(60);
            let w = want.rows(0, 60).into_owned();
            assert!((&g - &w).norm() < 1e-11 * w.norm(), "check {k}");
        }
    }

    #[test]
    fn shifted_solve_inside_spectrum_is_reported() {
        let a = QtMatrix::toeplitz(LaurentSymbol::from_real(-1, &[-1.0, 2.0, -1.0]));
        let r = a.solve_shifted(real(1.0), &BlockVector::unit(1), &SolveBlockOptions::default());
        assert!(matches!(r, Err(Error::PoleInsideSpectrum { .. })));
    }
}
