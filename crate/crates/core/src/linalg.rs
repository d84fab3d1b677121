//! Small dense helpers on top of nalgebra: factored norms, thin QR and a
//! banded LU with partial pivoting.

use nalgebra::DMatrix;
use num_complex::Complex64;

pub type CMat = DMatrix<Complex64>;

pub const CZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const CONE: Complex64 = Complex64::new(1.0, 0.0);

pub fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn real(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Copy of `m` with `rows` rows: truncated or padded with zeros.
pub fn resize_rows(m: &CMat, rows: usize) -> CMat {
    let mut out = CMat::zeros(rows, m.ncols());
    let r = rows.min(m.nrows());
    out.view_mut((0, 0), (r, m.ncols()))
        .copy_from(&m.view((0, 0), (r, m.ncols())));
    out
}

/// Thin QR: `Q` is `m x min(m, n)` with orthonormal columns.
pub fn thin_qr(m: &CMat) -> (CMat, CMat) {
    let qr = m.clone().qr();
    (qr.q(), qr.r())
}

/// Singular values in decreasing order.
pub fn singular_values(m: &CMat) -> Vec<f64> {
    if m.is_empty() {
        return Vec::new();
    }
    svd(m).1
}

/// Thin SVD `m = U diag(s) V*`, singular values in decreasing order.
/// The QR-iteration SVD of nalgebra is tried first and accepted only if
/// it reconstructs `m` and has orthonormal factors to a small multiple of
/// machine precision; on the badly scaled cores met in recompression it
/// can lose digits, and one-sided Jacobi takes over.
pub fn svd(m: &CMat) -> (CMat, Vec<f64>, CMat) {
    let (rows, cols) = m.shape();
    let k = rows.min(cols);
    if k == 0 {
        return (CMat::zeros(rows, 0), Vec::new(), CMat::zeros(cols, 0));
    }
    let f = m.clone().svd(true, true);
    if let (Some(u), Some(vt)) = (f.u, f.v_t) {
        let mut order: Vec<usize> = (0..k).collect();
        order.sort_by(|&a, &b| f.singular_values[b].partial_cmp(&f.singular_values[a]).unwrap());
        let s: Vec<f64> = order.iter().map(|&i| f.singular_values[i]).collect();
        let u = u.select_columns(&order);
        let v = vt.adjoint().select_columns(&order);
        let tol = 64.0 * (rows + cols) as f64 * f64::EPSILON;
        let scaled = CMat::from_fn(cols, k, |i, j| v[(i, j)] * s[j]);
        let back = (&u * scaled.adjoint() - m).norm();
        let ortho = |q: &CMat| (q.adjoint() * q - CMat::identity(k, k)).norm();
        let ok = s.iter().all(|x| x.is_finite())
            && back <= tol * m.norm()
            && ortho(&u) <= tol
            && ortho(&v) <= tol;
        if ok {
            return (u, s, v);
        }
    }
    jacobi_svd(m)
}

/// Thin SVD by one-sided (Hestenes) Jacobi rotations on the triangular
/// factor of a column-pivoted QR, singular values in decreasing order.
/// Columns belonging to singular values below `eps ||m||_F` are only
/// roughly orthonormal, and zero for exactly zero singular values.
pub fn jacobi_svd(m: &CMat) -> (CMat, Vec<f64>, CMat) {
    if m.nrows() < m.ncols() {
        let (u, s, v) = jacobi_svd(&m.adjoint());
        return (v, s, u);
    }
    if m.ncols() == 0 {
        return (CMat::zeros(m.nrows(), 0), Vec::new(), CMat::zeros(0, 0));
    }
    // m P = Q R; rotations on R* converge in a few sweeps
    let qr = m.clone().col_piv_qr();
    let q = qr.q();
    let r = qr.r();
    let mut perm = CMat::identity(m.ncols(), m.ncols());
    qr.p().inv_permute_rows(&mut perm);
    let (ur, s, vr) = hestenes(&r.adjoint());
    // R = vr S ur*, m = (Q vr) S (P ur)*
    (q * vr, s, perm * ur)
}

fn hestenes(m: &CMat) -> (CMat, Vec<f64>, CMat) {
    let n = m.ncols();
    let rows = m.nrows();
    let mut a = m.clone();
    let mut v = CMat::identity(n, n);
    let eps = f64::EPSILON;
    // couplings below eps^2 ||m||_F^2 cannot move any singular value above eps ||m||_2
    let floor = eps * eps * m.norm_squared();
    for _sweep in 0..80 {
        let mut rotated = false;
        let mut norms: Vec<f64> = (0..n).map(|j| a.column(j).norm_squared()).collect();
        for p in 0..n {
            for q in p + 1..n {
                let (alpha, beta) = (norms[p], norms[q]);
                let gamma = {
                    let s = a.as_slice();
                    let (cp, cq) = (&s[p * rows..(p + 1) * rows], &s[q * rows..(q + 1) * rows]);
                    cp.iter().zip(cq).map(|(x, y)| x.conj() * y).sum::<Complex64>()
                };
                let g = gamma.norm();
                if g <= eps * (alpha * beta).sqrt() || g <= floor {
                    continue;
                }
                rotated = true;
                // rotate column q so that a_p* a_q is real and positive
                let phase = gamma.conj() / g;
                let zeta = (beta - alpha) / (2.0 * g);
                let t = if zeta == 0.0 {
                    1.0
                } else {
                    zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let sn = c * t;
                rotate(a.as_mut_slice(), rows, p, q, phase, c, sn);
                rotate(v.as_mut_slice(), n, p, q, phase, c, sn);
                norms[p] = (alpha - t * g).max(0.0);
                norms[q] = beta + t * g;
            }
        }
        if !rotated {
            break;
        }
    }
    let mut order: Vec<(usize, f64)> = (0..n).map(|j| (j, a.column(j).norm())).collect();
    order.sort_by(|x, y| y.1.partial_cmp(&x.1).unwrap());
    let mut u = CMat::zeros(m.nrows(), n);
    let mut vs = CMat::zeros(n, n);
    let mut s = Vec::with_capacity(n);
    for (k, &(j, sj)) in order.iter().enumerate() {
        if sj > 0.0 {
            u.set_column(k, &(a.column(j) / Complex64::new(sj, 0.0)));
        }
        vs.set_column(k, &v.column(j));
        s.push(sj);
    }
    (u, s, vs)
}

fn rotate(s: &mut [Complex64], rows: usize, p: usize, q: usize, phase: Complex64, c: f64, sn: f64) {
    let (head, tail) = s.split_at_mut(q * rows);
    let cp = &mut head[p * rows..(p + 1) * rows];
    let cq = &mut tail[..rows];
    for (xp, xq) in cp.iter_mut().zip(cq.iter_mut()) {
        let y = *xq * phase;
        let x = *xp;
        *xp = x * c - y * sn;
        *xq = x * sn + y * c;
    }
}

/// Largest singular value of `U V*` without forming the product.
pub fn factored_norm2(u: &CMat, v: &CMat) -> f64 {
    if u.ncols() == 0 || u.nrows() == 0 || v.nrows() == 0 {
        return 0.0;
    }
    let (_, ru) = thin_qr(u);
    let (_, rv) = thin_qr(v);
    let core = &ru * rv.adjoint();
    singular_values(&core).first().copied().unwrap_or(0.0)
}

/// Frobenius norm of `U V*` from the Gram matrices of the factors.
pub fn factored_frobenius(u: &CMat, v: &CMat) -> f64 {
    if u.ncols() == 0 {
        return 0.0;
    }
    let gu = u.adjoint() * u;
    let gv = v.adjoint() * v;
    // ||U V*||_F^2 = tr(U* U V* V)
    let t: Complex64 = (gu.component_mul(&gv.transpose())).iter().sum();
    t.re.max(0.0).sqrt()
}

/// LU factorization with partial pivoting of a banded square matrix with
/// `kl` sub- and `ku` superdiagonals. Row interchanges widen the upper band
/// of `U` to `kl + ku`.
pub struct BandedLu {
    n: usize,
    kl: usize,
    width: usize,
    ab: Vec<Complex64>,
    piv: Vec<usize>,
}

impl BandedLu {
    /// `entry(i, j)` is called for `|j - i|` inside the band only.
    pub fn factor(
        n: usize,
        kl: usize,
        ku: usize,
        entry: impl Fn(usize, usize) -> Complex64,
    ) -> Option<Self> {
        let width = 2 * kl + ku + 1;
        let mut ab = vec![CZERO; n * width];
        for i in 0..n {
            let j0 = i.saturating_sub(kl);
            let j1 = (i + ku).min(n - 1);
            for j in j0..=j1 {
                ab[i * width + (j + kl - i)] = entry(i, j);
            }
        }
        let idx = |i: usize, j: usize| i * width + (j + kl - i);
        let mut piv = vec![0; n];
        for k in 0..n {
            let last = (k + kl).min(n - 1);
            let mut p = k;
            let mut best = ab[idx(k, k)].norm();
            for i in k + 1..=last {
                let v = ab[idx(i, k)].norm();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best == 0.0 || !best.is_finite() {
                return None;
            }
            piv[k] = p;
            let jend = (k + kl + ku).min(n - 1);
            if p != k {
                for j in k..=jend {
                    ab.swap(idx(k, j), idx(p, j));
                }
            }
            let d = ab[idx(k, k)];
            for i in k + 1..=last {
                let l = ab[idx(i, k)] / d;
                ab[idx(i, k)] = l;
                if l != CZERO {
                    for j in k + 1..=jend {
                        let t = ab[idx(k, j)];
                        ab[idx(i, j)] -= l * t;
                    }
                }
            }
        }
        Some(BandedLu {
            n,
            kl,
            width,
            ab,
            piv,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Solves in place for every column of `b` (`n` rows).
    pub fn solve_in_place(&self, b: &mut CMat) {
        let n = self.n;
        let kl = self.kl;
        let w = self.width;
        let at = |i: usize, j: usize| self.ab[i * w + (j + kl - i)];
        for c in 0..b.ncols() {
            let mut col = b.column_mut(c);
            for k in 0..n {
                let p = self.piv[k];
                if p != k {
                    col.swap_rows(k, p);
                }
                let bk = col[k];
                if bk != CZERO {
                    for i in k + 1..=(k + kl).min(n - 1) {
                        col[i] -= at(i, k) * bk;
                    }
                }
            }
            let ubw = w - kl - 1;
            for k in (0..n).rev() {
                let mut s = col[k];
                for j in k + 1..=(k + ubw).min(n - 1) {
                    s -= at(k, j) * col[j];
                }
                col[k] = s / at(k, k);
            }
        }
    }
}
