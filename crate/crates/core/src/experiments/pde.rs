//! Implicit Euler for `u_t = u_xx + u_yy + f` on the positive quadrant with
//! Dirichlet data on the axes. With the 5-point Laplacian `T(1/z - 2 + z)`
//! every step is the Sylvester equation
//! `M U + U M = dx^2 U_prev + dx^2 dt F + dt B`,
//! `M = dx^2/2 I - dt T(1/z - 2 + z)`, where `B` holds boundary values.

use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;

use super::{gaussian_coeffs, write_grid, write_residuals, SampleOrigin};
use crate::error::{Error, Result};
use crate::linalg::{real, CMat, CONE};
use crate::qt::{Correction, QtMatrix};
use crate::symbol::LaurentSymbol;
use crate::sylvester::{solve_sylvester, Method, PoleChoice, PoleSequence, SolveOptions, SolveReport};

/// `M = dx^2/2 I - dt T(1/z - 2 + z)`; its spectrum lies in
/// `[dx^2/2, dx^2/2 + 4 dt]`.
pub fn step_matrix(dx: f64, dt: f64) -> QtMatrix {
    QtMatrix::toeplitz(LaurentSymbol::from_real(
        -1,
        &[-dt, 0.5 * dx * dx + 2.0 * dt, -dt],
    ))
}

pub fn step_spectrum(dx: f64, dt: f64) -> (f64, f64) {
    (0.5 * dx * dx, 0.5 * dx * dx + 4.0 * dt)
}

fn symmetric_toeplitz(c: &[f64]) -> LaurentSymbol {
    let n = c.len() as i64;
    if n == 0 {
        return LaurentSymbol::zero();
    }
    let coeffs: Vec<f64> = (-(n - 1)..n).map(|k| c[k.unsigned_abs() as usize]).collect();
    LaurentSymbol::from_real(-(n - 1), &coeffs)
}

/// Source of the heat experiment: `0.1 T(g) + H(g)` with Gaussian samples
/// `g_k = exp(-(k dx)^2)`; the Hankel entry `(i, j)` is
/// `exp(-((i + j - 2 + 2 delta) dx)^2)`.
pub fn heat_source(dx: f64, origin: SampleOrigin) -> QtMatrix {
    let cutoff = f64::EPSILON.sqrt();
    let g = gaussian_coeffs(dx, cutoff);
    let sym = symmetric_toeplitz(&g).scale(real(0.1));
    let shift = 2 * origin.delta();
    let hank: Vec<Complex64> = g.iter().skip(shift).map(|&v| real(v)).collect();
    QtMatrix::new(sym, Correction::hankel(&hank))
}

#[derive(Debug, Clone)]
pub struct PdeConfig {
    pub dx: f64,
    pub dt: f64,
    pub timesteps: usize,
    pub plot_range: f64,
    pub plot_grid: usize,
    pub tol: f64,
    pub method: Method,
    pub out_dir: PathBuf,
    pub origin: SampleOrigin,
}

impl Default for PdeConfig {
    fn default() -> Self {
        PdeConfig {
            dx: 0.05,
            dt: 0.05,
            timesteps: 20,
            plot_range: 4.0,
            plot_grid: 80,
            tol: 1e-8,
            method: Method::Galerkin,
            out_dir: PathBuf::from("."),
            origin: SampleOrigin::Listing,
        }
    }
}

impl PdeConfig {
    fn validate(&self) -> Result<()> {
        if !(self.dx > 0.0 && self.dt > 0.0 && self.tol > 0.0 && self.plot_range > 0.0) || self.plot_grid == 0 {
            return Err(Error::InvalidInput(
                "dx, dt, tol and plot range must be positive, plot grid nonzero".into(),
            ));
        }
        Ok(())
    }
}

/// Pole choice per method: extended poles `{inf, 0}` for Galerkin,
/// Zolotarev shifts for ADI.
pub fn step_poles(method: Method) -> PoleChoice {
    match method {
        Method::Galerkin => PoleChoice::Given(PoleSequence::extended()),
        Method::Adi => PoleChoice::Auto,
    }
}

#[derive(Debug, Clone)]
pub struct PdeRun {
    pub solution: QtMatrix,
    pub reports: Vec<SolveReport>,
    pub files: Vec<PathBuf>,
}

/// Runs the heat experiment, writing `pde_t<k>.dat` for `k = 0..=timesteps`
/// and `residual_step<k>.dat` for every step.
pub fn run_pde(cfg: &PdeConfig) -> Result<PdeRun> {
    cfg.validate()?;
    fs::create_dir_all(&cfg.out_dir).map_err(io_err(&cfg.out_dir))?;
    let m = step_matrix(cfg.dx, cfg.dt);
    let f = heat_source(cfg.dx, cfg.origin);
    let opts = SolveOptions::with_tol(cfg.tol).with_method(cfg.method);
    let poles = step_poles(cfg.method);
    let h2 = cfg.dx * cfg.dx;
    let mut u = QtMatrix::zero();
    let mut files = Vec::new();
    let mut reports = Vec::new();
    let grid_file = |k: usize| cfg.out_dir.join(format!("pde_t{k}.dat"));
    let p0 = grid_file(0);
    write_grid(&p0, &u, cfg.dx, cfg.plot_range, cfg.plot_grid).map_err(io_err(&p0))?;
    files.push(p0);
    for k in 1..=cfg.timesteps {
        let rhs = u
            .scale(real(h2))
            .add(&f.scale(real(h2 * cfg.dt)), opts.compression_tol);
        let c = rhs.scale(-CONE);
        let (x, rep) = solve_sylvester(&m, &m, &c, &opts, &poles)
            .map_err(|e| Error::NoConvergence(format!("time step {k}: {e}")))?;
        if !rep.converged() {
            return Err(Error::NoConvergence(format!(
                "time step {k}: relative residual {:.3e} above tol {:.3e}",
                rep.final_residual, cfg.tol
            )));
        }
        let rp = cfg.out_dir.join(format!("residual_step{k}.dat"));
        write_residuals(&rp, &rep).map_err(io_err(&rp))?;
        files.push(rp);
        let gp = grid_file(k);
        write_grid(&gp, &x, cfg.dx, cfg.plot_range, cfg.plot_grid).map_err(io_err(&gp))?;
        files.push(gp);
        u = x;
        reports.push(rep);
    }
    Ok(PdeRun {
        solution: u,
        reports,
        files,
    })
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> Error + '_ {
    move |e| Error::InvalidInput(format!("{}: {e}", path.display()))
}

/// Exact solution `u = (1 - e^{-t}) (exp(-(x-y)^2) + exp(-x-y))` of the
/// manufactured problem.
pub fn manufactured_exact(x: f64, y: f64, t: f64) -> f64 {
    (1.0 - (-t).exp()) * ((-(x - y).powi(2)).exp() + (-x - y).exp())
}

/// Source of the manufactured problem,
/// `f = e^{-x-y} (3 e^{-t} - 2) + e^{-(x-y)^2} (e^{-t} + 4 (1 - e^{-t}) (1 - 2 (x-y)^2))`.
pub fn manufactured_source(x: f64, y: f64, t: f64) -> f64 {
    let et = (-t).exp();
    let d = x - y;
    (-x - y).exp() * (3.0 * et - 2.0) + (-d * d).exp() * (et + 4.0 * (1.0 - et) * (1.0 - 2.0 * d * d))
}

/// `exp(-s_i)` at `s_i = (i - 1 + delta) h` until below `cutoff`.
fn exp_samples(h: f64, delta: usize, cutoff: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut i = 0usize;
    loop {
        let s = (i + delta) as f64 * h;
        let v = (-s).exp();
        if v <= cutoff {
            break;
        }
        out.push(v);
        i += 1;
    }
    out
}

fn column(v: &[f64]) -> CMat {
    CMat::from_iterator(v.len(), 1, v.iter().map(|&x| real(x)))
}

/// Source of the manufactured problem at time `t` as a QT matrix: the
/// Toeplitz part depends on `x - y`, the rank-one part on `x + y`.
pub fn manufactured_source_qt(h: f64, t: f64, origin: SampleOrigin) -> QtMatrix {
    let et = (-t).exp();
    let cutoff = f64::EPSILON;
    let g: Vec<f64> = gaussian_coeffs(h, cutoff)
        .iter()
        .enumerate()
        .map(|(k, &e)| {
            let d2 = (k as f64 * h).powi(2);
            e * (et + 4.0 * (1.0 - et) * (1.0 - 2.0 * d2))
        })
        .collect();
    let w = exp_samples(h, origin.delta(), cutoff);
    let wc = column(&w);
    let corr = Correction::new(wc.clone() * real(3.0 * et - 2.0), wc);
    QtMatrix::new(symmetric_toeplitz(&g), corr)
}

/// Boundary contribution `e1 b^T + b e1^T`, `b_j = u(0, s_j, t)`.
pub fn manufactured_boundary(h: f64, t: f64, origin: SampleOrigin) -> Correction {
    let cutoff = f64::EPSILON;
    let delta = origin.delta();
    let mut b = Vec::new();
    let mut j = 0usize;
    loop {
        let s = (j + delta) as f64 * h;
        let v = manufactured_exact(0.0, s, t);
        if v.abs() <= cutoff * (1.0 - (-t).exp()).max(cutoff) && j > 0 {
            break;
        }
        b.push(v);
        j += 1;
    }
    let bc = column(&b);
    let mut e1 = CMat::zeros(1, 1);
    e1[(0, 0)] = CONE;
    Correction::new(e1.clone(), bc.clone()).concat(&Correction::new(bc, e1))
}

/// Sup-norm distance between the computed solution and the exact solution
/// at `(i h, j h, t)`, `i, j >= 1`.
pub fn manufactured_error(u: &QtMatrix, h: f64, t: f64) -> f64 {
    let s = 1.0 - (-t).exp();
    let g: Vec<f64> = gaussian_coeffs(h, f64::MIN_POSITIVE).iter().map(|v| v * s).collect();
    let exact_sym = symmetric_toeplitz(&g);
    let w = exp_samples(h, 1, f64::MIN_POSITIVE);
    let wc = column(&w);
    let exact = QtMatrix::new(exact_sym, Correction::new(wc.clone() * real(s), wc));
    let diff_sym = u.symbol() - exact.symbol();
    let sym_max = diff_sym.coeffs().iter().map(|c| c.norm()).fold(0.0, f64::max);
    let n = u
        .correction()
        .support()
        .max(exact.correction().support())
        .max(diff_sym.lower_bandwidth() + diff_sym.upper_bandwidth())
        + 2;
    let d = u.finite_section(n) - exact.finite_section(n);
    let win_max = d.iter().map(|c| c.norm()).fold(0.0, f64::max);
    sym_max.max(win_max)
}

/// Runs the manufactured problem with `dx = dt = h` up to `t_final` and
/// returns the sup-norm error at `t_final`.
pub fn manufactured_run(h: f64, t_final: f64, origin: SampleOrigin, opts: &SolveOptions) -> Result<f64> {
    let steps_f = t_final / h;
    let steps = steps_f.round() as usize;
    if steps == 0 || (steps_f - steps as f64).abs() > 1e-9 * steps_f.max(1.0) {
        return Err(Error::InvalidInput(format!(
            "step {h} does not divide t_final = {t_final}"
        )));
    }
    let m = step_matrix(h, h);
    let poles = step_poles(opts.method);
    let mut u = QtMatrix::zero();
    let tol = opts.compression_tol;
    for k in 1..=steps {
        let t = k as f64 * h;
        let f = manufactured_source_qt(h, t, origin);
        let b = QtMatrix::from_correction(manufactured_boundary(h, t, origin));
        let rhs = u
            .scale(real(h * h))
            .add(&f.scale(real(h * h * h)), tol)
            .add(&b.scale(real(h)), tol);
        let (x, rep) = solve_sylvester(&m, &m, &rhs.scale(-CONE), opts, &poles)
            .map_err(|e| Error::NoConvergence(format!("h = {h}, step {k}: {e}")))?;
        if !rep.converged() {
            return Err(Error::NoConvergence(format!(
                "h = {h}, step {k}: relative residual {:.3e}",
                rep.final_residual
            )));
        }
        u = x;
    }
    Ok(manufactured_error(&u, h, t_final))
}

/// `(h, error)` rows of the convergence table.
pub fn pde_convergence(steps: &[f64], t_final: f64, origin: SampleOrigin) -> Result<Vec<(f64, f64)>> {
    let opts = SolveOptions::with_tol(1e-12);
    steps
        .iter()
        .map(|&h| manufactured_run(h, t_final, origin, &opts).map(|e| (h, e)))
        .collect()
}
