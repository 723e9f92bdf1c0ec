//! Verification experiments: each case pits a measured left-hand side
//! against the certificate the bound calculus predicts for it.
//!
//! Cases fan out over a worker pool. Every case draws from its own stream
//! keyed by `(seed, case index)` and results are gathered in case order,
//! so a report is a pure function of its inputs and the seed.

use curvlab_core::bounds::{def_t2_ld, def_t2_ps, poincare_bound, rte_ld, rte_ps, wmix_bound_ld, WindowBound};
use curvlab_core::divergences::{kl_gaussian, kl_grid, tv_gaussian_1d, tv_grid};
use curvlab_core::kernels::{
    gaussian_pushforward, grid_pushforward, grid_pushforward_point, BackwardGrid, KernelKind, KernelSpec,
    BACKWARD_GRID_NODES,
};
use curvlab_core::model::{EmpiricalMeasure, GaussianMeasure, Grid, GridDensity, PotentialSpec};
use curvlab_core::rng::{stream, StreamKey};
use curvlab_core::transport::{grid_wp_1d, w2_assignment, w2_gaussian, wp_empirical_1d, MAX_ASSIGNMENT};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute slack for closed-form comparisons (rounding only).
pub const EXACT_TOLERANCE: f64 = 1e-9;
/// Absolute slack for quadrature comparisons.
pub const GRID_TOLERANCE: f64 = 1e-4;
/// Monte-Carlo checks pass when `lhs ≤ rhs + SIGMAS · std_error`.
pub const SIGMAS: f64 = 3.0;
/// Environment variable capping the worker count.
pub const THREADS_ENV: &str = "CURVLAB_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckPath {
    Exact,
    Grid,
    MonteCarlo,
}

impl CheckPath {
    /// Additive slack on top of `SIGMAS · std_error`. Monte-Carlo cases keep
    /// the rounding slack because common random numbers make additive-noise
    /// kernels exact up to rounding.
    pub fn tolerance(self) -> f64 {
        match self {
            CheckPath::Exact | CheckPath::MonteCarlo => EXACT_TOLERANCE,
            CheckPath::Grid => GRID_TOLERANCE,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseRecord {
    pub case: usize,
    pub inputs: String,
    pub lhs: f64,
    pub rhs: f64,
    pub std_error: Option<f64>,
    pub margin: f64,
    pub pass: bool,
}

impl CaseRecord {
    pub fn new(case: usize, inputs: String, lhs: f64, rhs: f64, std_error: Option<f64>, path: CheckPath) -> Self {
        let slack = path.tolerance() + SIGMAS * std_error.unwrap_or(0.0);
        Self { case, inputs, lhs, rhs, std_error, margin: rhs - lhs, pass: lhs <= rhs + slack }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub experiment: String,
    pub path: CheckPath,
    pub records: Vec<CaseRecord>,
    pub passed: usize,
    pub failed: usize,
}

impl VerificationReport {
    pub fn new(experiment: impl Into<String>, path: CheckPath, records: Vec<CaseRecord>) -> Self {
        let passed = records.iter().filter(|r| r.pass).count();
        let failed = records.len() - passed;
        Self { experiment: experiment.into(), path, records, passed, failed }
    }

    pub fn all_passed(&self) -> bool {
        self.failed == 0
    }

    /// Smallest `margin + slack` over all cases; negative means a failure.
    pub fn worst_slack(&self) -> f64 {
        self.records
            .iter()
            .map(|r| r.margin + self.path.tolerance() + SIGMAS * r.std_error.unwrap_or(0.0))
            .fold(f64::INFINITY, f64::min)
    }
}

/// Fixed-size worker pool. Results never depend on its size.
pub struct Workers {
    pool: rayon::ThreadPool,
}

impl Workers {
    pub fn new(threads: usize) -> Result<Self> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads.max(1))
            .build()
            .map_err(|e| Error::Pool(e.to_string()))?;
        Ok(Self { pool })
    }

    /// Size from `CURVLAB_THREADS`, else the machine's parallelism.
    pub fn from_env() -> Result<Self> {
        let threads = match std::env::var(THREADS_ENV) {
            Ok(v) => v
                .trim()
                .parse::<usize>()
                .ok()
                .filter(|&n| n > 0)
                .ok_or_else(|| Error::Config(format!("{THREADS_ENV} must be a positive integer, got {v:?}")))?,
            Err(_) => std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1),
        };
        Self::new(threads)
    }

    pub fn threads(&self) -> usize {
        self.pool.current_num_threads()
    }

    /// `f(0), …, f(n − 1)` evaluated in parallel, returned in index order.
    pub fn map<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        use rayon::prelude::*;
        self.pool.install(|| (0..n).into_par_iter().map(&f).collect())
    }

    pub fn try_map<T, F>(&self, n: usize, f: F) -> Result<Vec<T>>
    where
        T: Send,
        F: Fn(usize) -> Result<T> + Sync + Send,
    {
        self.map(n, f).into_iter().collect()
    }
}

fn distance(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
}

/// Gaussian image of `δ_x` when the kernel is affine-Gaussian.
fn dirac_image(kernel: &KernelSpec, x: &[f64]) -> Option<GaussianMeasure> {
    gaussian_pushforward(kernel, &GaussianMeasure::point_mass(x.to_vec()).ok()?).ok()
}

/// `W_p(δ_x P, δ_y P) ≤ K|x − y| + M` for each pair.
///
/// Affine-Gaussian kernels take the exact path: both images are Gaussians
/// with the same covariance, so every `W_p` equals the mean gap. Otherwise
/// each side gets `samples` one-step draws, the `j`-th draw of both sides
/// sharing stream `j` (common random numbers). 1D uses the sorted coupling;
/// in higher dimension the first `MAX_ASSIGNMENT` draws are matched exactly
/// (`p = 2` only, no standard error).
pub fn verify_curvature(
    kernel: &KernelSpec,
    pairs: &[(Vec<f64>, Vec<f64>)],
    samples: usize,
    p: f64,
    seed: u64,
    workers: &Workers,
) -> Result<VerificationReport> {
    if pairs.is_empty() {
        return Err(Error::Config("curvature check needs at least one pair".into()));
    }
    let cert = kernel.curvature_cert(p)?;
    let exact = dirac_image(kernel, &pairs[0].0).is_some();
    let experiment = format!("curvature_{:?}", kernel.kind()).to_lowercase();
    let records = workers.try_map(pairs.len(), |case| {
        let (x, y) = &pairs[case];
        let rhs = cert.bound(distance(x, y));
        let inputs = format!("h={} p={} x={:?} y={:?}", kernel.step(), p, x, y);
        if exact {
            let (gx, gy) = (dirac_image(kernel, x).unwrap(), dirac_image(kernel, y).unwrap());
            if gx.var() != gy.var() && p != 2.0 {
                return Err(Error::Config("exact curvature path needs equal covariances or p = 2".into()));
            }
            let lhs = w2_gaussian(&gx, &gy)?.value;
            return Ok(CaseRecord::new(case, inputs, lhs, rhs, None, CheckPath::Exact));
        }
        let key = StreamKey::new(seed, case as u64);
        let draw = |start: &[f64]| -> Result<EmpiricalMeasure> {
            let mut pts = Vec::with_capacity(samples * start.len());
            for j in 0..samples {
                let mut rng = key.particle(j as u64);
                pts.extend(kernel.step_sample(start, &mut rng)?);
            }
            Ok(EmpiricalMeasure::new(start.len(), pts)?)
        };
        let (xs, ys) = (draw(x)?, draw(y)?);
        let w = if x.len() == 1 {
            wp_empirical_1d(&xs, &ys, p)?
        } else {
            if p != 2.0 {
                return Err(Error::Config("Monte-Carlo curvature in d > 1 supports p = 2 only".into()));
            }
            let n = samples.min(MAX_ASSIGNMENT);
            w2_assignment(&xs.subsample(n)?, &ys.subsample(n)?)?
        };
        Ok(CaseRecord::new(case, inputs, w.value, rhs, w.std_error, CheckPath::MonteCarlo))
    })?;
    Ok(VerificationReport::new(experiment, if exact { CheckPath::Exact } else { CheckPath::MonteCarlo }, records))
}

/// `W_∞` between two backward-step laws against
/// `(2L + |y₁ − y₂|/h)/(α + 1/h)`.
///
/// Without perturbation both laws are Gaussians with equal variance and the
/// distance is the mean gap. Otherwise both are sampled from their grid
/// inverse CDFs with shared uniforms and compared by the sorted coupling.
pub fn verify_backward_winfty(
    potential: &PotentialSpec,
    h: f64,
    pairs: &[(f64, f64)],
    samples: usize,
    seed: u64,
    workers: &Workers,
) -> Result<VerificationReport> {
    if potential.dim() != 1 {
        return Err(Error::Config("backward W_inf check is 1D only".into()));
    }
    if pairs.is_empty() {
        return Err(Error::Config("backward W_inf check needs at least one pair".into()));
    }
    let (alpha, l) = (potential.alpha(), potential.lipschitz());
    let exact = potential.is_unperturbed();
    let records = workers.try_map(pairs.len(), |case| {
        let (y1, y2) = pairs[case];
        let rhs = (2.0 * l + (y1 - y2).abs() / h) / (alpha + 1.0 / h);
        let inputs = format!("h={h} y1={y1} y2={y2}");
        if exact {
            let lhs = (y1 - y2).abs() / (1.0 + potential.curvature()[0] * h);
            return Ok(CaseRecord::new(case, inputs, lhs, rhs, None, CheckPath::Exact));
        }
        let g1 = BackwardGrid::new(potential, y1, h, BACKWARD_GRID_NODES)?;
        let g2 = BackwardGrid::new(potential, y2, h, BACKWARD_GRID_NODES)?;
        let mut rng = stream(seed, case as u64, 0);
        let us: Vec<f64> = (0..samples).map(|_| rng.random::<f64>()).collect();
        let xs = EmpiricalMeasure::from_1d(us.iter().map(|&u| g1.quantile(u)).collect())?;
        let ys = EmpiricalMeasure::from_1d(us.iter().map(|&u| g2.quantile(u)).collect())?;
        let w = wp_empirical_1d(&xs, &ys, f64::INFINITY)?;
        Ok(CaseRecord::new(case, inputs, w.value, rhs, w.std_error, CheckPath::MonteCarlo))
    })?;
    Ok(VerificationReport::new(
        "backward_winfty",
        if exact { CheckPath::Exact } else { CheckPath::MonteCarlo },
        records,
    ))
}

/// Defective Talagrand scenarios.
#[derive(Debug, Clone)]
pub enum T2Scenario {
    /// Langevin dynamics, simulated by the exact OU semigroup (quadratic
    /// `V`, `H = 0`) from a Gaussian start in `T_2(J, S)`.
    Langevin { potential: PotentialSpec, t: f64, init: GaussianMeasure, j: f64, s: f64, tests: usize },
    /// Proximal Sampler on a grid, `N` steps of size `h`, from a Gaussian
    /// start (point masses allowed) in `T_2(J, S)`.
    Proximal { potential: PotentialSpec, h: f64, n: u64, init: GaussianMeasure, j: f64, s: f64, grid: Grid, tests: usize },
}

/// Draws a Gaussian around `(mean, var)`: mean shifted by up to three
/// standard deviations, variance scaled by up to `e^{±spread}`.
fn nearby_gaussian<R: Rng>(rng: &mut R, mean: &[f64], var: &[f64], spread: f64) -> Result<GaussianMeasure> {
    let mut m = Vec::with_capacity(mean.len());
    let mut v = Vec::with_capacity(mean.len());
    for (&mi, &vi) in mean.iter().zip(var) {
        let scale = vi.max(1e-12);
        m.push(mi + (rng.random::<f64>() * 6.0 - 3.0) * scale.sqrt());
        v.push(scale * (spread * (2.0 * rng.random::<f64>() - 1.0)).exp());
    }
    Ok(GaussianMeasure::new(m, v)?)
}

/// Evolves `δ_x` through `n ≥ 1` kernel steps on `grid`.
pub fn grid_evolve_point(kernel: &KernelSpec, x: f64, n: u64, grid: &Grid) -> Result<GridDensity> {
    let mut rho = grid_pushforward_point(kernel, x, grid)?;
    for _ in 1..n {
        rho = grid_pushforward(kernel, &rho)?;
    }
    Ok(rho)
}

/// Evolves a grid density through `n` kernel steps.
pub fn grid_evolve(kernel: &KernelSpec, rho: &GridDensity, n: u64) -> Result<GridDensity> {
    let mut rho = rho.clone();
    for _ in 0..n {
        rho = grid_pushforward(kernel, &rho)?;
    }
    Ok(rho)
}

/// `W₂(ν, μ) ≤ sqrt(2A·KL(ν‖μ)) + B` for the evolved law `μ` and a family
/// of test measures `ν`; case 0 is always `ν = μ`.
pub fn verify_def_t2(scenario: &T2Scenario, seed: u64, workers: &Workers) -> Result<VerificationReport> {
    match scenario {
        T2Scenario::Langevin { potential, t, init, j, s, tests } => {
            let kernel = KernelSpec::ou_exact(*t, potential.clone())?;
            let law = gaussian_pushforward(&kernel, init)?;
            let cert = def_t2_ld(potential.alpha(), potential.lipschitz(), *t, *j, *s)?;
            let records = workers.try_map(tests + 1, |case| {
                let nu = if case == 0 {
                    law.clone()
                } else {
                    nearby_gaussian(&mut stream(seed, case as u64, 0), law.mean(), law.var(), 1.5)?
                };
                let lhs = w2_gaussian(&nu, &law)?.value;
                let rhs = cert.rhs(kl_gaussian(&nu, &law)?.value).to_f64();
                let inputs = format!("T={t} nu_mean={:?} nu_var={:?} A={} B={}", nu.mean(), nu.var(), cert.a(), cert.b());
                Ok(CaseRecord::new(case, inputs, lhs, rhs, None, CheckPath::Exact))
            })?;
            Ok(VerificationReport::new("def_t2_langevin", CheckPath::Exact, records))
        }
        T2Scenario::Proximal { potential, h, n, init, j, s, grid, tests } => {
            let kernel = KernelSpec::ps(*h, potential.clone())?;
            let law = grid_evolve_gaussian(&kernel, init, *n, grid)?;
            let cert = def_t2_ps(potential.alpha(), potential.lipschitz(), *h, *n, *j, *s)?;
            let (m, v) = (law.mean(), law.variance());
            let records = workers.try_map(tests + 1, |case| {
                let nu = if case == 0 {
                    law.clone()
                } else {
                    let g = nearby_gaussian(&mut stream(seed, case as u64, 0), &[m], &[v], 1.0)?;
                    GridDensity::from_gaussian(*grid, g.mean()[0], g.var()[0])?
                };
                let lhs = grid_wp_1d(&nu, &law, 2.0)?.value;
                let rhs = cert.rhs(kl_grid(&nu, &law)?.value).to_f64();
                let inputs = format!("h={h} N={n} nu_mean={} nu_var={} A={} B={}", nu.mean(), nu.variance(), cert.a(), cert.b());
                Ok(CaseRecord::new(case, inputs, lhs, rhs, None, CheckPath::Grid))
            })?;
            Ok(VerificationReport::new("def_t2_proximal", CheckPath::Grid, records))
        }
    }
}

/// Reverse transport-entropy scenarios over pairs of initial Gaussians
/// (point masses allowed).
#[derive(Debug, Clone)]
pub enum RteScenario {
    /// Langevin dynamics via the exact OU semigroup (quadratic `V`, `H = 0`;
    /// `α = 0` is the heat flow).
    Langevin { potential: PotentialSpec, t: f64, pairs: Vec<(GaussianMeasure, GaussianMeasure)> },
    /// Proximal Sampler on a grid, `N` steps of size `h`.
    Proximal { potential: PotentialSpec, h: f64, n: u64, grid: Grid, pairs: Vec<(GaussianMeasure, GaussianMeasure)> },
}

fn grid_evolve_gaussian(kernel: &KernelSpec, g: &GaussianMeasure, n: u64, grid: &Grid) -> Result<GridDensity> {
    if g.is_degenerate() {
        grid_evolve_point(kernel, g.mean()[0], n, grid)
    } else {
        grid_evolve(kernel, &GridDensity::from_gaussian(*grid, g.mean()[0], g.var()[0])?, n)
    }
}

/// `KL(μP‖νP)` against the reverse transport-entropy bound in `W₂(μ, ν)`.
pub fn verify_rte(scenario: &RteScenario, workers: &Workers) -> Result<VerificationReport> {
    match scenario {
        RteScenario::Langevin { potential, t, pairs } => {
            let kernel = KernelSpec::ou_exact(*t, potential.clone())?;
            let records = workers.try_map(pairs.len(), |case| {
                let (mu, nu) = &pairs[case];
                let w2 = w2_gaussian(mu, nu)?.value;
                let (a, b) = (gaussian_pushforward(&kernel, mu)?, gaussian_pushforward(&kernel, nu)?);
                let lhs = kl_gaussian(&a, &b)?.value.to_f64();
                let rhs = rte_ld(potential.alpha(), potential.lipschitz(), *t, w2)?;
                let inputs = format!("T={t} mu={:?}/{:?} nu={:?}/{:?}", mu.mean(), mu.var(), nu.mean(), nu.var());
                Ok(CaseRecord::new(case, inputs, lhs, rhs, None, CheckPath::Exact))
            })?;
            Ok(VerificationReport::new("rte_langevin", CheckPath::Exact, records))
        }
        RteScenario::Proximal { potential, h, n, grid, pairs } => {
            let kernel = KernelSpec::ps(*h, potential.clone())?;
            let records = workers.try_map(pairs.len(), |case| {
                let (mu, nu) = &pairs[case];
                let w2 = w2_gaussian(mu, nu)?.value;
                let a = grid_evolve_gaussian(&kernel, mu, *n, grid)?;
                let b = grid_evolve_gaussian(&kernel, nu, *n, grid)?;
                let lhs = kl_grid(&a, &b)?.value.to_f64();
                let rhs = rte_ps(potential.alpha(), potential.lipschitz(), *h, *n, w2)?;
                let inputs = format!("h={h} N={n} mu={:?}/{:?} nu={:?}/{:?}", mu.mean(), mu.var(), nu.mean(), nu.var());
                Ok(CaseRecord::new(case, inputs, lhs, rhs, None, CheckPath::Grid))
            })?;
            Ok(VerificationReport::new("rte_proximal", CheckPath::Grid, records))
        }
    }
}

/// TV distance between a candidate density and its one-step image.
pub fn stationarity_check(kernel: &KernelSpec, candidate: &GridDensity) -> Result<f64> {
    let image = grid_pushforward(kernel, candidate)?;
    Ok(tv_grid(candidate, &image)?.value.to_f64())
}

/// Largest stationarity defect accepted for a mixing target.
pub const STATIONARITY_LIMIT: f64 = 1e-3;

/// Grid fixed point of `kernel`, iterating from `start` until successive
/// iterates are within `tol` in TV.
pub fn grid_fixed_point(kernel: &KernelSpec, start: &GridDensity, tol: f64, max_iter: usize) -> Result<GridDensity> {
    let mut rho = start.clone();
    for _ in 0..max_iter {
        let next = grid_pushforward(kernel, &rho)?;
        let gap = tv_grid(&rho, &next)?.value.to_f64();
        rho = next;
        if gap <= tol {
            return Ok(rho);
        }
    }
    Err(Error::Config(format!("grid fixed point not reached to {tol:e} within {max_iter} iterations")))
}

#[derive(Debug, Clone)]
pub enum MixingStart {
    Point(f64),
    Density(GridDensity),
    Gaussian(GaussianMeasure),
}

#[derive(Debug, Clone)]
pub enum MixingTarget {
    Density(GridDensity),
    Gaussian(GaussianMeasure),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixingCurve {
    /// Step index, or elapsed time for continuous-time kernels.
    pub times: Vec<f64>,
    pub tv: Vec<f64>,
    pub continuous: bool,
    pub eps: Vec<f64>,
    pub t_mix: Vec<Option<f64>>,
    pub w_mix: Vec<Option<f64>>,
    /// TV moved by one kernel application to the target.
    pub stationarity_defect: f64,
    /// Whether `tv ≤ min(eps)` was reached within the horizon.
    pub reached: bool,
}

/// First time the curve drops to `eps`. Continuous-time curves are
/// interpolated linearly between recorded times.
pub fn first_crossing(times: &[f64], tv: &[f64], eps: f64, continuous: bool) -> Option<f64> {
    let k = tv.iter().position(|&v| v <= eps)?;
    if k == 0 || !continuous {
        return Some(times[k]);
    }
    let (t0, t1, v0, v1) = (times[k - 1], times[k], tv[k - 1], tv[k]);
    Some(t0 + (t1 - t0) * (v0 - eps) / (v0 - v1))
}

impl MixingCurve {
    fn from_tv(times: Vec<f64>, tv: Vec<f64>, continuous: bool, eps: &[f64], defect: f64) -> Self {
        let t_mix: Vec<Option<f64>> = eps.iter().map(|&e| first_crossing(&times, &tv, e, continuous)).collect();
        let w_mix = eps
            .iter()
            .zip(&t_mix)
            .map(|(&e, &t)| Some(t? - first_crossing(&times, &tv, 1.0 - e, continuous)?))
            .collect();
        let floor = eps.iter().copied().fold(f64::INFINITY, f64::min);
        let reached = tv.iter().any(|&v| v <= floor);
        Self { times, tv, continuous, eps: eps.to_vec(), t_mix, w_mix, stationarity_defect: defect, reached }
    }
}

/// TV-to-target curve over `max_steps` kernel applications.
///
/// A Gaussian start and target under an affine-Gaussian 1D kernel are
/// evolved exactly and compared in closed form. Everything else runs on the
/// target's grid (a Gaussian target is discretised on the start's grid).
/// The target must be stationary to within [`STATIONARITY_LIMIT`].
pub fn mixing_curve(
    kernel: &KernelSpec,
    start: &MixingStart,
    target: &MixingTarget,
    max_steps: usize,
    eps: &[f64],
) -> Result<MixingCurve> {
    if kernel.dim() != 1 {
        return Err(Error::Config("mixing curves are 1D only".into()));
    }
    let continuous = kernel.kind() == KernelKind::OuExact;
    let clock = |k: usize| if continuous { k as f64 * kernel.step() } else { k as f64 };
    let times: Vec<f64> = (0..=max_steps).map(clock).collect();

    if let (MixingStart::Gaussian(g), MixingTarget::Gaussian(pi)) = (start, target) {
        let moved = gaussian_pushforward(kernel, pi)?;
        let defect = tv_gaussian_1d(&moved, pi)?.value.to_f64();
        check_stationary(defect)?;
        let mut law = g.clone();
        let mut tv = Vec::with_capacity(max_steps + 1);
        tv.push(tv_gaussian_1d(&law, pi)?.value.to_f64());
        for _ in 0..max_steps {
            law = gaussian_pushforward(kernel, &law)?;
            tv.push(tv_gaussian_1d(&law, pi)?.value.to_f64());
        }
        return Ok(MixingCurve::from_tv(times, tv, continuous, eps, defect));
    }

    let target = match (target, start) {
        (MixingTarget::Density(d), _) => d.clone(),
        (MixingTarget::Gaussian(pi), MixingStart::Density(d)) => {
            GridDensity::from_gaussian(*d.grid(), pi.mean()[0], pi.var()[0])?
        }
        (MixingTarget::Gaussian(_), _) => {
            return Err(Error::Config("grid mixing run needs a grid from the start or the target".into()))
        }
    };
    let grid = *target.grid();
    let defect = stationarity_check(kernel, &target)?;
    check_stationary(defect)?;
    let mut tv = Vec::with_capacity(max_steps + 1);
    let mut rho = match start {
        MixingStart::Point(x) => {
            tv.push(1.0);
            if max_steps == 0 {
                return Ok(MixingCurve::from_tv(times, tv, continuous, eps, defect));
            }
            let first = grid_pushforward_point(kernel, *x, &grid)?;
            tv.push(tv_grid(&first, &target)?.value.to_f64());
            first
        }
        MixingStart::Density(d) => {
            tv.push(tv_grid(d, &target)?.value.to_f64());
            d.clone()
        }
        MixingStart::Gaussian(g) if !g.is_degenerate() => {
            let d = GridDensity::from_gaussian(grid, g.mean()[0], g.var()[0])?;
            tv.push(tv_grid(&d, &target)?.value.to_f64());
            d
        }
        MixingStart::Gaussian(g) => {
            return mixing_curve(kernel, &MixingStart::Point(g.mean()[0]), &MixingTarget::Density(target), max_steps, eps)
        }
    };
    while tv.len() <= max_steps {
        rho = grid_pushforward(kernel, &rho)?;
        tv.push(tv_grid(&rho, &target)?.value.to_f64());
    }
    Ok(MixingCurve::from_tv(times, tv, continuous, eps, defect))
}

fn check_stationary(defect: f64) -> Result<()> {
    if defect <= STATIONARITY_LIMIT {
        Ok(())
    } else {
        Err(Error::Config(format!("target is not stationary: one step moves it by tv {defect:e}")))
    }
}

/// Measured window against the Langevin window expression, for a start in
/// `T_2(J, S)`. `time_unit` converts curve times to continuous time (the
/// step size for a discrete chain, 1 otherwise). `None` entries mean the
/// curve never crossed both levels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowComparison {
    pub eps: f64,
    pub t_mix: Option<f64>,
    pub w_mix: Option<f64>,
    pub bound: Option<WindowBound>,
    /// `time_unit · w_mix / bound.value`; report-only, the bound hides
    /// `ε`-constants.
    pub ratio: Option<f64>,
}

pub fn compare_window_ld(
    curve: &MixingCurve,
    alpha: f64,
    l: f64,
    j: f64,
    s: f64,
    time_unit: f64,
) -> Result<Vec<WindowComparison>> {
    let cp = poincare_bound(alpha, l)?;
    curve
        .eps
        .iter()
        .zip(curve.t_mix.iter().zip(&curve.w_mix))
        .map(|(&eps, (&t_mix, &w_mix))| {
            let t0 = first_crossing(&curve.times, &curve.tv, 1.0 - eps, curve.continuous);
            let bound = t0.map(|t0| wmix_bound_ld(alpha, l, cp, t0 * time_unit, j, s)).transpose()?;
            let ratio = w_mix.zip(bound).map(|(w, b)| time_unit * w / b.value);
            Ok(WindowComparison { eps, t_mix, w_mix, bound, ratio })
        })
        .collect()
}
