//! Zolotarev-optimal ADI shifts for spectra in `[a, b]` and `[-b, -a]`.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Asymptotic per-step ADI rate `exp(-pi^2 / log(4 b / a))`.
pub fn zolotarev_rate(a: f64, b: f64) -> Result<f64> {
    check(a, b)?;
    Ok((-PI * PI / (4.0 * b / a).ln()).exp())
}

fn check(a: f64, b: f64) -> Result<()> {
    if !(a > 0.0) || !(b > a) || !b.is_finite() {
        return Err(Error::InvalidInterval { a, b });
    }
    Ok(())
}

fn agm(mut x: f64, mut y: f64) -> f64 {
    for _ in 0..64 {
        let nx = 0.5 * (x + y);
        let ny = (x * y).sqrt();
        x = nx;
        y = ny;
        if (x - y).abs() <= 1e-16 * x {
            break;
        }
    }
    0.5 * (x + y)
}

/// Complete elliptic integral of the first kind, given the complementary
/// modulus `k' = sqrt(1 - k^2)`.
pub fn ellip_k_from_complement(kp: f64) -> f64 {
    PI / (2.0 * agm(1.0, kp))
}

/// Jacobi `dn(u | k)` with modulus `k`, complementary modulus `kp`,
/// by the descending Landen (AGM) recurrence.
pub fn jacobi_dn(u: f64, k: f64, kp: f64) -> f64 {
    if k == 0.0 {
        return 1.0;
    }
    let mut a = vec![1.0];
    let mut c = vec![k];
    let mut b = kp;
    while c.last().unwrap().abs() > 1e-16 && a.len() < 64 {
        let an = *a.last().unwrap();
        let next_a = 0.5 * (an + b);
        let next_c = 0.5 * (an - b);
        b = (an * b).sqrt();
        a.push(next_a);
        c.push(next_c);
    }
    let n = a.len() - 1;
    let mut phi = (1u64 << n) as f64 * a[n] * u;
    for i in (1..=n).rev() {
        phi = 0.5 * (phi + (c[i] / a[i] * phi.sin()).asin());
    }
    // phi = am(u)
    let sn = phi.sin();
    (1.0 - k * k * sn * sn).max(0.0).sqrt()
}

/// Shift magnitudes `p_j = b dn((2j-1) K / (2m), k)`, `k = sqrt(1 - (a/b)^2)`,
/// in decreasing order.
pub fn zolotarev_points(a: f64, b: f64, m: usize) -> Result<Vec<f64>> {
    check(a, b)?;
    if m == 0 {
        return Err(Error::InvalidPoles("need at least one shift".into()));
    }
    let kp = a / b;
    let k = (1.0 - kp * kp).sqrt();
    let kk = ellip_k_from_complement(kp);
    Ok((1..=m)
        .map(|j| {
            let u = (2 * j - 1) as f64 * kk / (2 * m) as f64;
            (b * jacobi_dn(u, k, kp)).clamp(a, b)
        })
        .collect())
}

/// Logarithmically spaced shifts in `[a, b]`; a simpler fallback.
pub fn log_spaced_points(a: f64, b: f64, m: usize) -> Result<Vec<f64>> {
    check(a, b)?;
    Ok((0..m)
        .map(|j| {
            let t = (j as f64 + 0.5) / m as f64;
            a * (b / a).powf(t)
        })
        .collect())
}
