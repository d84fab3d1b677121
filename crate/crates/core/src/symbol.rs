//! Laurent symbols `a(z) = sum_j a_j z^j` with finitely many nonzero
//! coefficients, their arithmetic, and the evaluation/interpolation scheme
//! used to divide symbols on the unit circle.

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Finitely supported Laurent series. Coefficients are stored for degrees
/// `min_degree ..= min_degree + len - 1`; in canonical form the first and the
/// last stored coefficient are nonzero and the zero symbol stores nothing.
#[derive(Debug, Clone, PartialEq)]
pub struct LaurentSymbol {
    min_degree: i64,
    coeffs: Vec<Complex64>,
}

/// Values of a symbol at the `n`-th roots of unity `xi^j`, `xi = exp(2 pi i / n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitCircleSamples {
    pub n: usize,
    pub values: Vec<Complex64>,
}

impl LaurentSymbol {
    pub fn new(min_degree: i64, coeffs: Vec<Complex64>) -> Self {
        let mut s = LaurentSymbol { min_degree, coeffs };
        s.canonicalize();
        s
    }

    pub fn from_real(min_degree: i64, coeffs: &[f64]) -> Self {
        Self::new(
            min_degree,
            coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect(),
        )
    }

    pub fn zero() -> Self {
        LaurentSymbol {
            min_degree: 0,
            coeffs: Vec::new(),
        }
    }

    pub fn constant(c: Complex64) -> Self {
        Self::new(0, vec![c])
    }

    pub fn monomial(degree: i64, c: Complex64) -> Self {
        Self::new(degree, vec![c])
    }

    fn canonicalize(&mut self) {
        let first = self.coeffs.iter().position(|c| *c != ZERO);
        match first {
            None => {
                self.coeffs.clear();
                self.min_degree = 0;
            }
            Some(f) => {
                let last = self.coeffs.iter().rposition(|c| *c != ZERO).unwrap();
                self.coeffs.truncate(last + 1);
                self.coeffs.drain(..f);
                self.min_degree += f as i64;
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn min_degree(&self) -> i64 {
        self.min_degree
    }

    pub fn max_degree(&self) -> i64 {
        self.min_degree + self.coeffs.len() as i64 - 1
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeff(&self, degree: i64) -> Complex64 {
        let k = degree - self.min_degree;
        if k < 0 || k >= self.coeffs.len() as i64 {
            ZERO
        } else {
            self.coeffs[k as usize]
        }
    }

    /// Number of nonzero diagonals below the main diagonal of `T(a)`.
    pub fn lower_bandwidth(&self) -> usize {
        if self.is_zero() {
            0
        } else {
            (-self.min_degree).max(0) as usize
        }
    }

    /// Number of nonzero diagonals above the main diagonal of `T(a)`.
    pub fn upper_bandwidth(&self) -> usize {
        if self.is_zero() {
            0
        } else {
            self.max_degree().max(0) as usize
        }
    }

    /// `[a_1, a_2, ..., a_p]`: the strictly positive part as Hankel data.
    pub fn positive_tail(&self) -> Vec<Complex64> {
        (1..=self.upper_bandwidth() as i64)
            .map(|d| self.coeff(d))
            .collect()
    }

    /// `[a_{-1}, a_{-2}, ..., a_{-q}]`: the strictly negative part as Hankel data.
    pub fn negative_tail(&self) -> Vec<Complex64> {
        (1..=self.lower_bandwidth() as i64)
            .map(|d| self.coeff(-d))
            .collect()
    }

    /// Symbol of `T(a)*`: `conj(a_{-k})` at degree `k`.
    pub fn adjoint(&self) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        let coeffs = self.coeffs.iter().rev().map(|c| c.conj()).collect();
        Self::new(-self.max_degree(), coeffs)
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self::new(self.min_degree, self.coeffs.iter().map(|c| c * s).collect())
    }

    pub fn add_constant(&self, s: Complex64) -> Self {
        self + &Self::constant(s)
    }

    pub fn is_real(&self) -> bool {
        self.coeffs.iter().all(|c| c.im == 0.0)
    }

    /// True when `T(a)` is Hermitian, i.e. `a_{-k} = conj(a_k)`.
    pub fn is_hermitian(&self) -> bool {
        *self == self.adjoint()
    }

    pub fn wiener_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).sum()
    }

    /// Horner evaluation at a single point `z != 0`.
    pub fn eval(&self, z: Complex64) -> Complex64 {
        if self.is_zero() {
            return ZERO;
        }
        let mut acc = ZERO;
        for c in self.coeffs.iter().rev() {
            acc = acc * z + c;
        }
        acc * z.powi(self.min_degree as i32)
    }

    /// Values at the `n`-th roots of unity via one length-`n` FFT of the
    /// coefficients wrapped modulo `n`.
    pub fn eval_roots(&self, n: usize) -> UnitCircleSamples {
        UnitCircleSamples {
            n,
            values: self.eval_rotated(n, 0.0),
        }
    }

    /// Values at `exp(2 pi i (j + offset) / n)`, `j = 0..n`.
    pub fn eval_rotated(&self, n: usize, offset: f64) -> Vec<Complex64> {
        assert!(n >= 1, "need at least one sample");
        let mut buf = vec![ZERO; n];
        for (k, c) in self.coeffs.iter().enumerate() {
            let d = self.min_degree + k as i64;
            let phase = Complex64::from_polar(
                1.0,
                2.0 * std::f64::consts::PI * offset * d as f64 / n as f64,
            );
            buf[d.rem_euclid(n as i64) as usize] += c * phase;
        }
        FftPlanner::new().plan_fft_inverse(n).process(&mut buf);
        buf
    }

    /// Wiener norm together with the shortest symmetric truncation
    /// `sum_{|j| <= k} a_j z^j` whose discarded mass is at most half of
    /// `tol * norm`, so `||a - truncated||_W <= tol ||a||_W` holds with margin.
    pub fn truncate(&self, tol: f64) -> (f64, LaurentSymbol) {
        let norm = self.wiener_norm();
        if self.is_zero() || tol <= 0.0 {
            return (norm, self.clone());
        }
        let budget = 0.5 * tol * norm;
        let reach = self.min_degree.abs().max(self.max_degree().abs());
        // mass[k] = sum of |a_j| with |j| == k
        let mut mass = vec![0.0; reach as usize + 1];
        for (i, c) in self.coeffs.iter().enumerate() {
            let d = self.min_degree + i as i64;
            mass[d.unsigned_abs() as usize] += c.norm();
        }
        let mut k = reach as usize;
        let mut dropped = 0.0;
        while k > 0 && dropped + mass[k] <= budget {
            dropped += mass[k];
            k -= 1;
        }
        if k == 0 && dropped + mass[0] <= budget {
            return (norm, LaurentSymbol::zero());
        }
        let k = k as i64;
        let lo = self.min_degree.max(-k);
        let hi = self.max_degree().min(k);
        if lo > hi {
            return (norm, LaurentSymbol::zero());
        }
        let coeffs = (lo..=hi).map(|d| self.coeff(d)).collect();
        (norm, LaurentSymbol::new(lo, coeffs))
    }

    /// Index of `a` on the unit circle, from the accumulated argument over
    /// `n` samples. `None` when the symbol vanishes at a sample or the
    /// argument jumps by more than a quarter turn between samples (the curve
    /// passes too close to the origin to resolve).
    pub fn winding_number(&self, n: usize) -> Option<i64> {
        let vals = self.eval_roots(n).values;
        let scale = self.wiener_norm();
        if scale == 0.0 || vals.iter().any(|v| v.norm() <= 1e-14 * scale) {
            return None;
        }
        let mut total = 0.0;
        for j in 0..n {
            let a = vals[j];
            let b = vals[(j + 1) % n];
            let d = (b / a).arg();
            if d.abs() > 0.5 * std::f64::consts::PI {
                return None;
            }
            total += d;
        }
        let w = total / (2.0 * std::f64::consts::PI);
        if (w - w.round()).abs() > 1e-6 {
            return None;
        }
        Some(w.round() as i64)
    }

    pub fn min_abs_on_circle(&self, n: usize) -> f64 {
        self.eval_roots(n)
            .values
            .iter()
            .map(|v| v.norm())
            .fold(f64::INFINITY, f64::min)
    }
}

impl Add for &LaurentSymbol {
    type Output = LaurentSymbol;
    fn add(self, rhs: &LaurentSymbol) -> LaurentSymbol {
        if self.is_zero() {
            return rhs.clone();
        }
        if rhs.is_zero() {
            return self.clone();
        }
        let lo = self.min_degree.min(rhs.min_degree);
        let hi = self.max_degree().max(rhs.max_degree());
        let coeffs = (lo..=hi).map(|d| self.coeff(d) + rhs.coeff(d)).collect();
        LaurentSymbol::new(lo, coeffs)
    }
}

impl Sub for &LaurentSymbol {
    type Output = LaurentSymbol;
    fn sub(self, rhs: &LaurentSymbol) -> LaurentSymbol {
        self + &(-rhs)
    }
}

impl Neg for &LaurentSymbol {
    type Output = LaurentSymbol;
    fn neg(self) -> LaurentSymbol {
        LaurentSymbol {
            min_degree: self.min_degree,
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }
}

impl Mul for &LaurentSymbol {
    type Output = LaurentSymbol;
    fn mul(self, rhs: &LaurentSymbol) -> LaurentSymbol {
        if self.is_zero() || rhs.is_zero() {
            return LaurentSymbol::zero();
        }
        let mut out = vec![ZERO; self.len() + rhs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        LaurentSymbol::new(self.min_degree + rhs.min_degree, out)
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for LaurentSymbol {
            type Output = LaurentSymbol;
            fn $m(self, rhs: LaurentSymbol) -> LaurentSymbol {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for LaurentSymbol {
    type Output = LaurentSymbol;
    fn neg(self) -> LaurentSymbol {
        -&self
    }
}

/// Parameters of the evaluation/interpolation scheme.
#[derive(Debug, Clone, Copy)]
pub struct EvInterpOptions {
    /// Relative tail-mass threshold of the stopping test.
    pub tol: f64,
    /// Largest degree `n` tried before giving up.
    pub n_max: usize,
}

impl Default for EvInterpOptions {
    fn default() -> Self {
        EvInterpOptions {
            tol: 1e-12,
            n_max: 1 << 20,
        }
    }
}

/// Result of a symbol division.
#[derive(Debug, Clone)]
pub struct Quotient {
    pub symbol: LaurentSymbol,
    /// Final degree bound `n` (coefficients live in `-n..=n`).
    pub degree: usize,
    /// Max of `|den * q - num|` on fresh unit-circle samples.
    pub residual: f64,
}

/// `num / den` on the unit circle by sampling at roots of unity and
/// interpolating, doubling the degree until the outer half of the
/// coefficients carries relative mass below `opts.tol` (or the FFT roundoff
/// level, whichever is larger) and the residual
/// `den q - num` on a shifted grid is below `4 opts.tol ||den||_W ||q||_W`.
pub fn divide(
    num: &LaurentSymbol,
    den: &LaurentSymbol,
    singular_scale: f64,
    opts: &EvInterpOptions,
) -> Result<Quotient> {
    // the numerator must sit inside the inner half of the first window
    let reach = if num.is_zero() {
        0
    } else {
        num.min_degree().unsigned_abs().max(num.max_degree().unsigned_abs()) as usize
    };
    let mut n = (2 * reach).max(4).next_power_of_two();
    let mut planner = FftPlanner::new();
    loop {
        let len = (2 * n + 1).next_power_of_two();
        let d = den.eval_roots(len).values;
        let min_abs = d.iter().map(|v| v.norm()).fold(f64::INFINITY, f64::min);
        if !(min_abs >= 1e-12 * singular_scale) || min_abs == 0.0 {
            return Err(Error::SymbolSingular { min_abs });
        }
        let c = num.eval_roots(len).values;
        let mut buf: Vec<Complex64> = c.iter().zip(&d).map(|(c, d)| c / d).collect();
        planner.plan_fft_forward(len).process(&mut buf);
        let inv = 1.0 / len as f64;
        let ni = n as i64;
        let coeffs: Vec<Complex64> = (-ni..=ni)
            .map(|k| buf[k.rem_euclid(len as i64) as usize] * inv)
            .collect();
        let norm: f64 = coeffs.iter().map(|c| c.norm()).sum();
        let half = n.div_ceil(2) as i64;
        let tail: f64 = (-ni..=ni)
            .zip(&coeffs)
            .filter(|(k, _)| k.abs() > half)
            .map(|(_, c)| c.norm())
            .sum();
        // FFT roundoff spread over the outer band
        let noise = 8.0 * (len as f64).sqrt() * f64::EPSILON;
        if norm == 0.0 || tail < opts.tol.max(noise) * norm {
            // a lacunary quotient can leave the outer band empty too early
            // drop the roundoff floor so the support does not grow with the window
            let symbol = LaurentSymbol::new(-ni, coeffs).truncate(noise).1;
            let residual = quotient_residual(num, den, &symbol, 4 * len);
            // the accepted tail alone leaves about tol ||den||_W ||q||_W
            let bound = (4.0 * opts.tol).max(64.0 * f64::EPSILON) * den.wiener_norm() * norm;
            if residual <= bound {
                return Ok(Quotient {
                    symbol,
                    degree: n,
                    residual,
                });
            }
        }
        n *= 2;
        if n > opts.n_max {
            return Err(Error::NoConvergence(format!(
                "symbol division did not meet the tail test up to degree {}",
                opts.n_max
            )));
        }
    }
}

fn quotient_residual(
    num: &LaurentSymbol,
    den: &LaurentSymbol,
    q: &LaurentSymbol,
    samples: usize,
) -> f64 {
    let off = 0.5;
    let nv = num.eval_rotated(samples, off);
    let dv = den.eval_rotated(samples, off);
    let qv = q.eval_rotated(samples, off);
    (0..samples)
        .map(|j| (dv[j] * qv[j] - nv[j]).norm())
        .fold(0.0, f64::max)
}

/// Symbol `x = -c / (a + b)` of the Toeplitz part of the solution of
/// `A X + X B + C = 0`.
pub fn ev_interp(
    a: &LaurentSymbol,
    b: &LaurentSymbol,
    c: &LaurentSymbol,
    opts: &EvInterpOptions,
) -> Result<Quotient> {
    let den = a + b;
    let scale = a.wiener_norm() + b.wiener_norm();
    divide(&(-c), &den, scale, opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn lap() -> LaurentSymbol {
        LaurentSymbol::from_real(-1, &[1.0, -2.0, 1.0])
    }

    #[test]
    fn divide_sees_lacunary_quotients() {
        // den = 3.48 + 0.74 sin(4 theta): the quotient lives on degrees = 2 mod 4
        let den = LaurentSymbol::new(-4, {
            let mut v = vec![Complex64::new(0.0, 0.0); 9];
            v[0] = Complex64::new(0.0, 0.37);
            v[4] = c(3.48);
            v[8] = Complex64::new(0.0, -0.37);
            v
        });
        let num = LaurentSymbol::monomial(-2, c(1.0));
        let q = divide(&num, &den, den.wiener_norm(), &EvInterpOptions::default()).unwrap();
        assert!(q.symbol.coeff(6).norm() > 1e-3);
        assert!(q.residual < 1e-12);
    }

    #[test]
    fn divide_keeps_far_numerator_terms() {
        let num = LaurentSymbol::new(-5, vec![c(1.0)]);
        let q = divide(&num, &LaurentSymbol::constant(c(2.0)), 2.0, &EvInterpOptions::default()).unwrap();
        assert!((q.symbol.coeff(-5) - c(0.5)).norm() < 1e-15);
        assert!(q.residual < 1e-15);
    }

    #[test]
    fn canonical_form_trims_zeros() {
        let s = LaurentSymbol::from_real(-3, &[0.0, 0.0, 1.0, 2.0, 0.0]);
        assert_eq!(s.min_degree(), -1);
        assert_eq!(s.coeffs(), &[c(1.0), c(2.0)]);
        assert!(LaurentSymbol::from_real(5, &[0.0, 0.0]).is_zero());
    }

    #[test]
    fn arithmetic_examples() {
        let p = LaurentSymbol::from_real(0, &[1.0, 1.0]);
        let q = LaurentSymbol::from_real(-1, &[1.0, 1.0]);
        assert_eq!(&p * &q, LaurentSymbol::from_real(-1, &[1.0, 2.0, 1.0]));
        assert_eq!(&lap() + &lap(), LaurentSymbol::from_real(-1, &[2.0, -4.0, 2.0]));
        assert!(lap().scale(c(0.0)).is_zero());
        assert!((&lap() - &lap()).is_zero());
    }

    #[test]
    fn eval_roots_examples() {
        let z = LaurentSymbol::monomial(1, c(1.0));
        let v = z.eval_roots(4).values;
        let want = [c(1.0), Complex64::i(), c(-1.0), -Complex64::i()];
        for (a, b) in v.iter().zip(want.iter()) {
            assert!((a - b).norm() < 1e-15);
        }
        let v = lap().eval_roots(16).values;
        assert!(v[0].norm() < 1e-15);
        assert!((v[8] - c(-4.0)).norm() < 1e-14);

        let g: Vec<f64> = (-40..=40).map(|k: i32| (-(k as f64 * 0.1).powi(2)).exp()).collect();
        let s = LaurentSymbol::from_real(-40, &g);
        let sum: f64 = g.iter().sum();
        assert!((s.eval_roots(64).values[0].re - sum).abs() < 1e-13 * sum);
    }

    #[test]
    fn truncate_examples() {
        let (n, t) = lap().truncate(0.2);
        assert_eq!(n, 4.0);
        assert_eq!(t, lap());

        let g: Vec<f64> = (-30..=30).map(|j: i32| 2f64.powi(-j.abs())).collect();
        let s = LaurentSymbol::from_real(-30, &g);
        let (n, t) = s.truncate(1e-3);
        assert!((n - g.iter().sum::<f64>()).abs() < 1e-15);
        assert_eq!(t.min_degree(), -11);
        assert_eq!(t.max_degree(), 11);
        assert!((&s - &t).wiener_norm() <= 1e-3 * n);

        let (n, t) = LaurentSymbol::zero().truncate(1e-3);
        assert_eq!(n, 0.0);
        assert!(t.is_zero());
    }

    #[test]
    fn ev_interp_examples() {
        let half = LaurentSymbol::constant(c(0.5));
        let z = LaurentSymbol::monomial(1, c(1.0));
        let q = ev_interp(&half, &half, &z, &EvInterpOptions::default()).unwrap();
        assert_eq!(q.degree, 4);
        assert!((q.symbol.coeff(1) + c(1.0)).norm() < 1e-15);
        assert!((&q.symbol + &z).wiener_norm() < 1e-14);

        let a = LaurentSymbol::from_real(-1, &[0.25, 2.0, 0.25]);
        let one = LaurentSymbol::constant(c(1.0));
        let q = ev_interp(&a, &a, &one, &EvInterpOptions::default()).unwrap();
        // oracle: mean of -1/(4 + cos(theta)) over 4096 points
        let n = 4096;
        let x0: f64 = (0..n)
            .map(|j| {
                let t = 2.0 * std::f64::consts::PI * j as f64 / n as f64;
                -1.0 / (4.0 + t.cos())
            })
            .sum::<f64>()
            / n as f64;
        assert!((q.symbol.coeff(0).re - x0).abs() < 1e-12);
        assert!((x0 + 1.0 / 15f64.sqrt()).abs() < 1e-12);

        let mz = LaurentSymbol::monomial(1, c(-1.0));
        let zz = LaurentSymbol::monomial(1, c(1.0));
        assert!(matches!(
            ev_interp(&zz, &mz, &one, &EvInterpOptions::default()),
            Err(Error::SymbolSingular { .. })
        ));
    }

    #[test]
    fn ev_interp_no_convergence_is_reported() {
        // pole very close to the unit circle: coefficients decay like 0.999^k
        let a = LaurentSymbol::from_real(0, &[1.0, -0.999]);
        let zero = LaurentSymbol::zero();
        let one = LaurentSymbol::constant(c(1.0));
        let opts = EvInterpOptions {
            tol: 1e-12,
            n_max: 256,
        };
        assert!(matches!(
            ev_interp(&a, &zero, &one, &opts),
            Err(Error::NoConvergence(_))
        ));
    }

    #[test]
    fn winding_numbers() {
        assert_eq!(LaurentSymbol::monomial(1, c(1.0)).winding_number(1024), Some(1));
        assert_eq!(LaurentSymbol::monomial(-2, c(3.0)).winding_number(1024), Some(-2));
        assert_eq!(lap().add_constant(c(-1.0)).winding_number(1024), Some(0));
        assert_eq!(lap().winding_number(1024), None);
    }

    fn arb_symbol(max_len: usize) -> impl Strategy<Value = LaurentSymbol> {
        (
            -8i64..8,
            prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..=max_len),
        )
            .prop_map(|(m, v)| {
                LaurentSymbol::new(m, v.into_iter().map(|(r, i)| Complex64::new(r, i)).collect())
            })
    }

    proptest! {
        #[test]
        fn wiener_norm_is_submultiplicative(a in arb_symbol(16), b in arb_symbol(16)) {
            let p = (&a * &b).wiener_norm();
            prop_assert!(p <= a.wiener_norm() * b.wiener_norm() * (1.0 + 1e-14));
        }

        #[test]
        fn fft_matches_horner(a in arb_symbol(64), logn in 3u32..9) {
            let n = 1usize << logn;
            let s = a.eval_roots(n);
            prop_assert_eq!(s.values.len(), n);
            for (j, v) in s.values.iter().enumerate() {
                let z = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * j as f64 / n as f64);
                let h = a.eval(z);
                prop_assert!((v - h).norm() <= 1e-13 * a.wiener_norm().max(1.0));
            }
        }

        #[test]
        fn truncation_error_within_budget(a in arb_symbol(40), tol in 0.0f64..0.5) {
            let (n, t) = a.truncate(tol);
            prop_assert!((&a - &t).wiener_norm() <= tol * n + 1e-15);
        }

        #[test]
        fn ev_interp_residual_small(a in arb_symbol(6), c0 in arb_symbol(6)) {
            // a + a* + 4||a|| is bounded away from zero on the circle
            let shift = LaurentSymbol::constant(Complex64::new(2.0 * a.wiener_norm() + 1.0, 0.0));
            let aa = &a + &shift;
            let bb = &a.adjoint() + &shift;
            let opts = EvInterpOptions::default();
            let q = ev_interp(&aa, &bb, &c0, &opts).unwrap();
            let x = &q.symbol;
            let n = 4 * (2 * q.degree + 1).next_power_of_two();
            let av = aa.eval_rotated(n, 0.37);
            let bv = bb.eval_rotated(n, 0.37);
            let cv = c0.eval_rotated(n, 0.37);
            let xv = x.eval_rotated(n, 0.37);
            let worst = (0..n).map(|j| (av[j] * xv[j] + xv[j] * bv[j] + cv[j]).norm()).fold(0.0, f64::max);
            prop_assert!(worst <= 10.0 * opts.tol * c0.wiener_norm());
        }

        #[test]
        fn doubling_keeps_accepted_coefficients(a in arb_symbol(5)) {
            let shift = LaurentSymbol::constant(Complex64::new(a.wiener_norm() + 0.5, 0.0));
            let den = &a + &shift;
            let one = LaurentSymbol::constant(Complex64::new(1.0, 0.0));
            let opts = EvInterpOptions::default();
            let q = divide(&one, &den, den.wiener_norm(), &opts).unwrap();
            let q2 = divide(&one, &den, den.wiener_norm(), &EvInterpOptions { tol: opts.tol * 1e-2, ..opts }).unwrap();
            let d = &q.symbol - &q2.symbol;
            prop_assert!(d.wiener_norm() <= opts.tol * q2.symbol.wiener_norm() * 10.0);
        }
    }
}
