//! Newton iteration for the minimal solution of
//! `A_{-1} + A_0 X + A_1 X^2 = X` with QT coefficients.
//!
//! The Newton correction `H` solves
//! `(A_0 + A_1 X_k - I) H + A_1 H X_k = -F(X_k)`, which after
//! multiplication by `K^{-1} = (A_0 + A_1 X_k - I)^{-1}` is the Stein
//! equation `M H N + H + C = 0` with `M = K^{-1} A_1`, `N = X_k`,
//! `C = K^{-1} F(X_k)`.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use super::config::Config;
use crate::error::{Error, Result};
use crate::linalg::{real, CMat};
use crate::qt::{Correction, NormKind, QtMatrix};
use crate::stein::{solve_stein_problem, SteinMethod, SteinProblem};
use crate::symbol::LaurentSymbol;
use crate::sylvester::{SolveOptions, SolveReport};

/// One QT coefficient: Laurent coefficients from `min_degree` plus sparse
/// correction entries `(i, j, value)`, 1-based.
#[derive(Debug, Clone, PartialEq)]
pub struct QbdCoefficient {
    pub min_degree: i64,
    pub coeffs: Vec<f64>,
    pub correction: Vec<(usize, usize, f64)>,
}

impl QbdCoefficient {
    pub fn to_qt(&self) -> QtMatrix {
        let sym = LaurentSymbol::from_real(self.min_degree, &self.coeffs);
        let rows = self.correction.iter().map(|e| e.0).max().unwrap_or(0);
        let cols = self.correction.iter().map(|e| e.1).max().unwrap_or(0);
        let mut block = CMat::zeros(rows, cols);
        for &(i, j, v) in &self.correction {
            block[(i - 1, j - 1)] += real(v);
        }
        QtMatrix::new(sym, Correction::from_dense(&block, 0.0))
    }

    fn symbol_sum(&self) -> f64 {
        self.coeffs.iter().sum()
    }

    fn from_config(cfg: &Config, prefix: &str) -> Result<Self> {
        let min_degree = cfg.require(&format!("{prefix}.min_degree"))?;
        let coeffs = cfg
            .list::<f64>(&format!("{prefix}.coeffs"))?
            .ok_or_else(|| Error::InvalidInput(format!("missing key '{prefix}.coeffs'")))?;
        let correction = match cfg.raw(&format!("{prefix}.correction")) {
            None | Some("") => Vec::new(),
            Some(s) => s
                .split(',')
                .map(|item| parse_entry(item.trim()))
                .collect::<Result<Vec<_>>>()?,
        };
        Ok(QbdCoefficient {
            min_degree,
            coeffs,
            correction,
        })
    }
}

fn parse_entry(s: &str) -> Result<(usize, usize, f64)> {
    let bad = || Error::InvalidInput(format!("correction entry '{s}' is not 'i:j:value'"));
    let parts: Vec<&str> = s.split(':').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(bad());
    }
    let i: usize = parts[0].parse().map_err(|_| bad())?;
    let j: usize = parts[1].parse().map_err(|_| bad())?;
    let v: f64 = parts[2].parse().map_err(|_| bad())?;
    if i == 0 || j == 0 {
        return Err(Error::InvalidInput(format!("correction entry '{s}': indices are 1-based")));
    }
    Ok((i, j, v))
}

#[derive(Debug, Clone)]
pub struct QbdConfig {
    pub a_minus: QbdCoefficient,
    pub a_zero: QbdCoefficient,
    pub a_plus: QbdCoefficient,
    pub newton_steps: usize,
    pub method: SteinMethod,
    pub tol: f64,
    pub max_iter: usize,
}

impl QbdConfig {
    /// Nearest-neighbour random walk in both level and phase, reflected at
    /// the first phase.
    pub fn synthetic() -> Self {
        let coef = |c: [f64; 3], corr: f64| QbdCoefficient {
            min_degree: -1,
            coeffs: c.to_vec(),
            correction: vec![(1, 1, corr)],
        };
        QbdConfig {
            a_minus: coef([0.1, 0.2, 0.1], 0.1),
            a_zero: coef([0.1, 0.15, 0.1], 0.1),
            a_plus: coef([0.05, 0.15, 0.05], 0.05),
            newton_steps: 2,
            method: SteinMethod::FixedPoint,
            tol: 1e-10,
            max_iter: 200,
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let cfg = Config::parse(text)?;
        let method = match cfg.raw("method") {
            None => SteinMethod::FixedPoint,
            Some(m) => m.parse()?,
        };
        let out = QbdConfig {
            a_minus: QbdCoefficient::from_config(&cfg, "a_minus")?,
            a_zero: QbdCoefficient::from_config(&cfg, "a_zero")?,
            a_plus: QbdCoefficient::from_config(&cfg, "a_plus")?,
            newton_steps: cfg.get("newton_steps")?.unwrap_or(2),
            method,
            tol: cfg.get("tol")?.unwrap_or(1e-10),
            max_iter: cfg.get("max_iter")?.unwrap_or(200),
        };
        out.validate()?;
        Ok(out)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Nonnegative coefficients and `a_{-1}(1) + a_0(1) + a_1(1) = 1`.
    pub fn validate(&self) -> Result<()> {
        for (name, c) in [("a_minus", &self.a_minus), ("a_zero", &self.a_zero), ("a_plus", &self.a_plus)] {
            if c.coeffs.iter().any(|&v| v < 0.0 || !v.is_finite()) {
                return Err(Error::InvalidInput(format!("{name}: coefficients must be nonnegative")));
            }
            for &(i, j, v) in &c.correction {
                let sym = LaurentSymbol::from_real(c.min_degree, &c.coeffs);
                let entry = sym.coeff(j as i64 - i as i64).re + v;
                if entry < 0.0 {
                    return Err(Error::InvalidInput(format!(
                        "{name}: entry ({i}, {j}) is negative"
                    )));
                }
            }
        }
        let s = self.a_minus.symbol_sum() + self.a_zero.symbol_sum() + self.a_plus.symbol_sum();
        if (s - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidInput(format!(
                "symbol row sum at z = 1 is {s}, expected 1"
            )));
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidInput("tol must be positive".into()));
        }
        Ok(())
    }

    pub fn matrices(&self) -> (QtMatrix, QtMatrix, QtMatrix) {
        (self.a_minus.to_qt(), self.a_zero.to_qt(), self.a_plus.to_qt())
    }
}

/// `F(X) = A_{-1} + A_0 X + A_1 X^2 - X`.
pub fn qbd_residual(a_m: &QtMatrix, a_0: &QtMatrix, a_p: &QtMatrix, x: &QtMatrix, tol: f64) -> QtMatrix {
    let x2 = x.mul(x, tol);
    a_m.add(&a_0.mul(x, tol), tol)
        .add(&a_p.mul(&x2, tol), tol)
        .sub(x, tol)
}

#[derive(Debug, Clone)]
pub struct NewtonStep {
    /// Iterate index `k` of `X_k` (the first is `X_1`).
    pub index: usize,
    /// `||F(X_k)||_inf` estimate.
    pub residual: f64,
    /// Stein solve that produced `X_k`, absent for `X_1`.
    pub report: Option<SolveReport>,
}

#[derive(Debug, Clone)]
pub struct QbdRun {
    pub solution: QtMatrix,
    pub steps: Vec<NewtonStep>,
    pub files: Vec<PathBuf>,
}

/// `X_1 = (I - A_0)^{-1} A_{-1}`, then `newton_steps` Newton iterations.
/// Writes `qbd_newton<k>.dat` with the Stein residual history of the
/// solve producing `X_{k+1}` when `out_dir` is given.
pub fn run_qbd(cfg: &QbdConfig, out_dir: Option<&Path>) -> Result<QbdRun> {
    cfg.validate()?;
    let (a_m, a_0, a_p) = cfg.matrices();
    let opts = SolveOptions {
        tol: cfg.tol,
        max_iter: cfg.max_iter,
        ..SolveOptions::default()
    };
    let t = opts.compression_tol;
    let bopts = opts.block_options();
    let id = QtMatrix::identity();
    let inv = id
        .sub(&a_0, t)
        .inverse(&bopts)
        .map_err(|e| Error::NotInvertible(format!("I - A_0: {e}")))?;
    let mut x = inv.mul(&a_m, t);
    let mut steps = vec![NewtonStep {
        index: 1,
        residual: qbd_residual(&a_m, &a_0, &a_p, &x, t).norm_estimate(NormKind::Inf),
        report: None,
    }];
    let mut files = Vec::new();
    if let Some(dir) = out_dir {
        fs::create_dir_all(dir).map_err(|e| Error::InvalidInput(format!("{}: {e}", dir.display())))?;
    }
    for k in 1..=cfg.newton_steps {
        let f = qbd_residual(&a_m, &a_0, &a_p, &x, t);
        let kmat = a_0.add(&a_p.mul(&x, t), t).sub(&id, t);
        let kinv = kmat
            .inverse(&bopts)
            .map_err(|e| Error::NotInvertible(format!("Newton step {k}: A_0 + A_1 X_{k} - I: {e}")))?;
        let m = kinv.mul(&a_p, t);
        let c = kinv.mul(&f, t);
        let problem = SteinProblem::new(m, x.clone(), c).with_norm(NormKind::Inf);
        let (h, report) = solve_stein_problem(&problem, cfg.method, &opts)
            .map_err(|e| Error::NoConvergence(format!("Newton step {k}: {e}")))?;
        if let Some(dir) = out_dir {
            let path = dir.join(format!("qbd_newton{k}.dat"));
            write_history(&path, &report)?;
            files.push(path);
        }
        x = x.add(&h, t);
        steps.push(NewtonStep {
            index: k + 1,
            residual: qbd_residual(&a_m, &a_0, &a_p, &x, t).norm_estimate(NormKind::Inf),
            report: Some(report),
        });
    }
    Ok(QbdRun {
        solution: x,
        steps,
        files,
    })
}

fn write_history(path: &Path, report: &SolveReport) -> Result<()> {
    let io = |e: std::io::Error| Error::InvalidInput(format!("{}: {e}", path.display()));
    let mut w = BufWriter::new(File::create(path).map_err(io)?);
    for &(k, r) in &report.residual_history {
        writeln!(w, "{} {:.15e}", k, r).map_err(io)?;
    }
    w.flush().map_err(io)
}

/// Dense Newton on the `n x n` sections, used as a reference.
pub fn dense_newton(cfg: &QbdConfig, n: usize, newton_steps: usize) -> Vec<CMat> {
    let (a_m, a_0, a_p) = cfg.matrices();
    let (am, a0, ap) = (a_m.finite_section(n), a_0.finite_section(n), a_p.finite_section(n));
    let id = CMat::identity(n, n);
    let mut x = (&id - &a0).lu().solve(&am).expect("I - A_0 singular");
    let mut out = vec![x.clone()];
    for _ in 0..newton_steps {
        let f = &am + &a0 * &x + &ap * &x * &x - &x;
        let k = &a0 + &ap * &x - &id;
        // (K + A_1 (.) X) H = -F, solved by vectorisation
        let kron = id.kronecker(&k) + x.transpose().kronecker(&ap);
        let rhs = CMat::from_column_slice(n * n, 1, (-&f).as_slice());
        let h = kron.lu().solve(&rhs).expect("singular Newton system");
        x += CMat::from_column_slice(n, n, h.as_slice());
        out.push(x.clone());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_round_trip() {
        let text = "\
# synthetic random walk
a_minus.min_degree = -1
a_minus.coeffs = 0.1, 0.2, 0.1
a_minus.correction = 1:1:0.1
a_zero.min_degree = -1
a_zero.coeffs = 0.1, 0.15, 0.1
a_zero.correction = 1:1:0.1
a_plus.min_degree = -1
a_plus.coeffs = 0.05, 0.15, 0.05
a_plus.correction = 1:1:0.05
newton_steps = 2
method = fixedpoint
tol = 1e-10
";
        let cfg = QbdConfig::parse(text).unwrap();
        let syn = QbdConfig::synthetic();
        assert_eq!(cfg.a_minus, syn.a_minus);
        assert_eq!(cfg.a_zero, syn.a_zero);
        assert_eq!(cfg.a_plus, syn.a_plus);
        assert_eq!(cfg.newton_steps, 2);
        assert_eq!(cfg.method, SteinMethod::FixedPoint);
    }

    #[test]
    fn stochasticity_and_sign_checks() {
        let mut c = QbdConfig::synthetic();
        c.a_plus.coeffs[1] = 0.2;
        assert!(c.validate().is_err());
        let mut c = QbdConfig::synthetic();
        c.a_zero.correction = vec![(1, 1, -0.5)];
        assert!(c.validate().is_err());
        assert!(QbdConfig::parse("a_minus.min_degree = 0").is_err());
        assert!(parse_entry("1:2").is_err());
        assert!(parse_entry("0:1:0.5").is_err());
    }

    #[test]
    fn first_iterate_matches_direct_solve() {
        let cfg = QbdConfig {
            newton_steps: 0,
            ..QbdConfig::synthetic()
        };
        let run = run_qbd(&cfg, None).unwrap();
        let dense = dense_newton(&cfg, 400, 0);
        let got = run.solution.finite_section(40);
        let want = dense[0].view((0, 0), (40, 40));
        assert!((got - want).norm() < 1e-10);
    }

    #[test]
    fn linear_case_is_solved_by_first_iterate() {
        let cfg = QbdConfig {
            a_minus: QbdCoefficient {
                min_degree: -1,
                coeffs: vec![0.2, 0.2, 0.2],
                correction: vec![(1, 1, 0.2)],
            },
            a_zero: QbdCoefficient {
                min_degree: -1,
                coeffs: vec![0.1, 0.2, 0.1],
                correction: vec![(1, 1, 0.1)],
            },
            a_plus: QbdCoefficient {
                min_degree: 0,
                coeffs: vec![0.0],
                correction: vec![],
            },
            newton_steps: 1,
            ..QbdConfig::synthetic()
        };
        let run = run_qbd(&cfg, None).unwrap();
        let (a_m, a_0, a_p) = cfg.matrices();
        let f = qbd_residual(&a_m, &a_0, &a_p, &run.solution, 1e-15);
        assert!(run.steps[0].residual <= cfg.tol, "{:e}", run.steps[0].residual);
        assert!(run.steps[1].residual <= cfg.tol);
        assert!(f.norm_estimate(NormKind::Inf) <= cfg.tol);
    }
}
