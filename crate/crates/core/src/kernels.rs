//! One-step Markov kernels in three forms: samplers, exact Gaussian
//! pushforwards and 1D grid pushforwards.
//!
//! | kind          | one step from `x`                                 |
//! |---------------|---------------------------------------------------|
//! | `GradStep`    | `x − h∇U(x)`                                      |
//! | `Gaussian`    | `x + N(0, hI)`                                    |
//! | `Lmc`         | gradient step, then `N(0, 2hI)` noise             |
//! | `PsForward`   | `x + N(0, hI)`                                    |
//! | `PsBackward`  | draw from `∝ exp(−U(z) − |z − x|²/(2h))`          |
//! | `Ps`          | forward then backward                             |
//! | `OuExact`     | exact Ornstein–Uhlenbeck transition over time `T` |
//!
//! The backward step has two samplers. In 1D the default inverts the CDF of
//! the conditional on a 4096-node grid spanning twelve envelope standard
//! deviations. The rejection sampler works in any dimension: it proposes
//! from the Gaussian envelope obtained by dropping `H` and accepts with
//! probability `exp(−(H(z) − c))`, where `c` lower-bounds `H` on a ball of
//! radius `10·sqrt(h/(1 + αh))` around the envelope mean; proposals outside
//! the ball are rejected.

#[allow(unused_imports)]
use num_traits::Float;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::bounds::{curvature_lmc, curvature_ps, CurvatureCert};
use crate::error::{check_dim, precondition, Error, Result};
use crate::grid::{backward_stage, deposit_stage, gaussian_stage, Staged};
use crate::model::{EmpiricalMeasure, GaussianMeasure, Grid, GridDensity, PotentialSpec};
use crate::rng::StreamKey;
use crate::special::normal_interval;

pub const BACKWARD_GRID_NODES: usize = 4096;
pub const REJECTION_MAX_TRIES: u64 = 1_000_000;
/// Largest boundary mass loss tolerated by a grid pushforward.
pub const MAX_GRID_LEAK: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum KernelKind {
    GradStep,
    Gaussian,
    Lmc,
    PsForward,
    PsBackward,
    Ps,
    OuExact,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum BackwardMethod {
    GridInverseCdf,
    Rejection,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KernelSpec {
    kind: KernelKind,
    step: f64,
    dim: usize,
    potential: Option<PotentialSpec>,
    backward: BackwardMethod,
}

fn check_step(h: f64) -> Result<()> {
    if h.is_finite() && h > 0.0 {
        Ok(())
    } else {
        Err(precondition("h must be finite and > 0"))
    }
}

impl KernelSpec {
    fn with_potential(kind: KernelKind, step: f64, potential: PotentialSpec) -> Self {
        let dim = potential.dim();
        let backward = if dim == 1 { BackwardMethod::GridInverseCdf } else { BackwardMethod::Rejection };
        Self { kind, step, dim, potential: Some(potential), backward }
    }

    fn potential_free(kind: KernelKind, h: f64, dim: usize) -> Result<Self> {
        check_step(h)?;
        if dim == 0 {
            return Err(precondition("dimension must be positive"));
        }
        Ok(Self { kind, step: h, dim, potential: None, backward: BackwardMethod::Rejection })
    }

    pub fn grad_step(h: f64, potential: PotentialSpec) -> Result<Self> {
        check_step(h)?;
        Ok(Self::with_potential(KernelKind::GradStep, h, potential))
    }

    pub fn gaussian(h: f64, dim: usize) -> Result<Self> {
        Self::potential_free(KernelKind::Gaussian, h, dim)
    }

    /// Requires `h ≤ 1/β`.
    pub fn lmc(h: f64, potential: PotentialSpec) -> Result<Self> {
        check_step(h)?;
        if h * potential.beta() > 1.0 {
            return Err(precondition("h > 1/beta"));
        }
        Ok(Self::with_potential(KernelKind::Lmc, h, potential))
    }

    pub fn ps_forward(h: f64, dim: usize) -> Result<Self> {
        Self::potential_free(KernelKind::PsForward, h, dim)
    }

    pub fn ps_backward(h: f64, potential: PotentialSpec) -> Result<Self> {
        check_step(h)?;
        Ok(Self::with_potential(KernelKind::PsBackward, h, potential))
    }

    pub fn ps(h: f64, potential: PotentialSpec) -> Result<Self> {
        check_step(h)?;
        Ok(Self::with_potential(KernelKind::Ps, h, potential))
    }

    /// Exact OU semigroup at time `t` for a quadratic `V` with `H = 0`.
    /// `t = ∞` is accepted when every curvature is positive.
    pub fn ou_exact(t: f64, potential: PotentialSpec) -> Result<Self> {
        if !(t > 0.0) {
            return Err(precondition("T must be > 0"));
        }
        if !potential.is_unperturbed() {
            return Err(precondition("ou_exact requires H = 0"));
        }
        if t.is_infinite() && potential.curvature().contains(&0.0) {
            return Err(precondition("T = inf requires alpha > 0"));
        }
        Ok(Self::with_potential(KernelKind::OuExact, t, potential))
    }

    pub fn with_backward(mut self, method: BackwardMethod) -> Result<Self> {
        if method == BackwardMethod::GridInverseCdf && self.dim != 1 {
            return Err(Error::Unsupported("grid inverse-CDF backward sampler is 1D only".into()));
        }
        self.backward = method;
        Ok(self)
    }

    pub fn kind(&self) -> KernelKind {
        self.kind
    }
    /// Step size `h`, or time `T` for the OU kernel.
    pub fn step(&self) -> f64 {
        self.step
    }
    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn potential(&self) -> Option<&PotentialSpec> {
        self.potential.as_ref()
    }
    pub fn backward(&self) -> BackwardMethod {
        self.backward
    }

    fn pot(&self) -> &PotentialSpec {
        self.potential.as_ref().expect("kernel kind carries a potential")
    }

    /// Curvature certificate matching this kernel.
    pub fn curvature_cert(&self, p: f64) -> Result<CurvatureCert> {
        let h = self.step;
        match self.kind {
            KernelKind::Lmc => {
                let u = self.pot();
                curvature_lmc(u.alpha(), u.beta(), u.lipschitz(), h, p)
            }
            KernelKind::Ps => {
                let u = self.pot();
                curvature_ps(u.alpha(), u.lipschitz(), h, p)
            }
            KernelKind::Gaussian | KernelKind::PsForward => CurvatureCert::new(p, 1.0, 0.0),
            KernelKind::OuExact => CurvatureCert::new(p, (-self.pot().alpha() * h).exp(), 0.0),
            KernelKind::PsBackward => {
                let u = self.pot();
                let q = 1.0 + u.alpha() * h;
                CurvatureCert::new(p, 1.0 / q, 2.0 * u.lipschitz() * h / q)
            }
            KernelKind::GradStep => Err(Error::Unsupported("no curvature certificate for grad_step".into())),
        }
    }

    /// One draw from `δ_x P`.
    pub fn step_sample<R: Rng + ?Sized>(&self, x: &[f64], rng: &mut R) -> Result<Vec<f64>> {
        let mut out = x.to_vec();
        self.step_in_place(&mut out, rng)?;
        Ok(out)
    }

    /// Replaces `x` by one draw from `δ_x P`.
    pub fn step_in_place<R: Rng + ?Sized>(&self, x: &mut [f64], rng: &mut R) -> Result<()> {
        check_dim(self.dim, x.len())?;
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        let h = self.step;
        match self.kind {
            KernelKind::GradStep => self.gradient_step(x)?,
            KernelKind::Gaussian | KernelKind::PsForward => add_noise(x, h, rng),
            KernelKind::Lmc => {
                self.gradient_step(x)?;
                add_noise(x, 2.0 * h, rng);
            }
            KernelKind::OuExact => {
                let u = self.pot();
                for ((xi, &c), &a) in x.iter_mut().zip(u.center()).zip(u.curvature()) {
                    let (decay, var) = ou_coefficients(a, h);
                    let z: f64 = rng.sample(StandardNormal);
                    *xi = c + decay * (*xi - c) + var.sqrt() * z;
                }
            }
            KernelKind::PsBackward => self.backward_step(x, rng)?,
            KernelKind::Ps => {
                add_noise(x, h, rng);
                self.backward_step(x, rng)?;
            }
        }
        Ok(())
    }

    fn gradient_step(&self, x: &mut [f64]) -> Result<()> {
        let u = self.pot();
        let h = self.step;
        if self.dim == 1 {
            x[0] -= h * u.value_grad_1d(x[0]).1;
        } else {
            let g = u.gradient(x)?;
            x.iter_mut().zip(&g).for_each(|(xi, gi)| *xi -= h * gi);
        }
        Ok(())
    }

    fn backward_step<R: Rng + ?Sized>(&self, x: &mut [f64], rng: &mut R) -> Result<()> {
        match self.backward {
            BackwardMethod::GridInverseCdf => {
                let grid = BackwardGrid::new(self.pot(), x[0], self.step, BACKWARD_GRID_NODES)?;
                x[0] = grid.sample(rng);
                Ok(())
            }
            BackwardMethod::Rejection => rejection_backward(self.pot(), self.step, x, rng),
        }
    }
}

/// `(e^{−aT}, (1 − e^{−2aT})/a)`, the variance being `2T` when `a = 0`.
fn ou_coefficients(a: f64, t: f64) -> (f64, f64) {
    if a == 0.0 {
        (1.0, 2.0 * t)
    } else {
        ((-a * t).exp(), -(-2.0 * a * t).exp_m1() / a)
    }
}

fn add_noise<R: Rng + ?Sized>(x: &mut [f64], var: f64, rng: &mut R) {
    let s = var.sqrt();
    for xi in x.iter_mut() {
        let z: f64 = rng.sample(StandardNormal);
        *xi += s * z;
    }
}

fn rejection_backward<R: Rng + ?Sized>(u: &PotentialSpec, h: f64, x: &mut [f64], rng: &mut R) -> Result<()> {
    let env = u.backward_envelope(x, h)?;
    let radius = 10.0 * (h / (1.0 + u.alpha() * h)).sqrt();
    let floor = u.h_inf_on_ball(env.mean(), radius);
    let sds: Vec<f64> = env.var().iter().map(|v| v.sqrt()).collect();
    for _ in 0..REJECTION_MAX_TRIES {
        let mut r2 = 0.0;
        for ((xi, &m), &s) in x.iter_mut().zip(env.mean()).zip(&sds) {
            let z: f64 = rng.sample(StandardNormal);
            *xi = m + s * z;
            r2 += s * s * z * z;
        }
        if r2 > radius * radius {
            continue;
        }
        let accept = (floor - u.h_value(x)).exp();
        if rng.random::<f64>() < accept {
            return Ok(());
        }
    }
    Err(Error::RejectionExhausted { tries: REJECTION_MAX_TRIES })
}

/// CDF of the 1D backward conditional `∝ exp(−U(z) − (z − y)²/(2h))`,
/// tabulated on a uniform grid over the envelope mean `± (12 sd + Lh/(1+αh))`.
/// The CDF is linear between nodes.
#[derive(Debug, Clone)]
pub struct BackwardGrid {
    lo: f64,
    dx: f64,
    cdf: Vec<f64>,
}

impl BackwardGrid {
    pub fn new(u: &PotentialSpec, y: f64, h: f64, nodes: usize) -> Result<Self> {
        check_dim(1, u.dim())?;
        check_step(h)?;
        let env = u.backward_envelope(&[y], h)?;
        let (m, var) = (env.mean()[0], env.var()[0]);
        let half = 12.0 * var.sqrt() + u.grad_h_sup_norm() * h / (1.0 + u.curvature()[0] * h);
        let grid = Grid::new(m - half, m + half, nodes)?;
        let logs: Vec<f64> = grid
            .nodes()
            .map(|z| -u.h_value(core::slice::from_ref(&z)) - 0.5 * (z - m) * (z - m) / var)
            .collect();
        let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let density = GridDensity::new(grid, logs.iter().map(|l| (l - top).exp()).collect())?;
        let mut cdf = density.cdf_nodes();
        let total = *cdf.last().unwrap();
        cdf.iter_mut().for_each(|c| *c /= total);
        Ok(Self { lo: grid.lo(), dx: grid.spacing(), cdf })
    }

    pub fn quantile(&self, u: f64) -> f64 {
        let last = self.cdf.len() - 2;
        let i = self.cdf.partition_point(|&c| c <= u).saturating_sub(1).min(last);
        let (a, b) = (self.cdf[i], self.cdf[i + 1]);
        let frac = if b > a { ((u - a) / (b - a)).clamp(0.0, 1.0) } else { 0.0 };
        self.lo + (i as f64 + frac) * self.dx
    }

    pub fn cdf(&self, x: f64) -> f64 {
        let pos = (x - self.lo) / self.dx;
        if pos <= 0.0 {
            return 0.0;
        }
        let last = (self.cdf.len() - 1) as f64;
        if pos >= last {
            return 1.0;
        }
        let i = pos.floor() as usize;
        let f = pos - i as f64;
        self.cdf[i] + f * (self.cdf[i + 1] - self.cdf[i])
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.quantile(rng.random::<f64>())
    }
}

/// Initial law of a chain.
#[derive(Debug, Clone, PartialEq)]
pub enum ChainInit {
    Empirical(EmpiricalMeasure),
    /// `particles` independent draws from `law` (a point mass is allowed).
    Gaussian { law: GaussianMeasure, particles: usize },
}

impl ChainInit {
    pub fn len(&self) -> usize {
        match self {
            ChainInit::Empirical(e) => e.len(),
            ChainInit::Gaussian { particles, .. } => *particles,
        }
    }
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
    pub fn dim(&self) -> usize {
        match self {
            ChainInit::Empirical(e) => e.dim(),
            ChainInit::Gaussian { law, .. } => law.dim(),
        }
    }

    /// Starting point of particle `index`; Gaussian draws consume `rng`.
    pub fn particle<R: Rng + ?Sized>(&self, index: usize, rng: &mut R) -> Vec<f64> {
        match self {
            ChainInit::Empirical(e) => e.point(index).to_vec(),
            ChainInit::Gaussian { law, .. } => law
                .mean()
                .iter()
                .zip(law.var())
                .map(|(&m, &v)| {
                    let z: f64 = rng.sample(StandardNormal);
                    m + v.sqrt() * z
                })
                .collect(),
        }
    }
}

/// Final position of particle `index` after `n_steps`. The particle owns the
/// stream `key.particle(index)`, so the result does not depend on how
/// particles are scheduled.
pub fn simulate_particle(
    kernel: &KernelSpec,
    init: &ChainInit,
    index: usize,
    n_steps: usize,
    key: StreamKey,
) -> Result<Vec<f64>> {
    let mut rng = key.particle(index as u64);
    let mut x = init.particle(index, &mut rng);
    for _ in 0..n_steps {
        kernel.step_in_place(&mut x, &mut rng)?;
    }
    Ok(x)
}

/// Runs every particle independently for `n_steps`, in index order.
pub fn run_chain(kernel: &KernelSpec, init: &ChainInit, n_steps: usize, key: StreamKey) -> Result<EmpiricalMeasure> {
    check_dim(kernel.dim(), init.dim())?;
    if init.is_empty() {
        return Err(Error::Empty);
    }
    if let (ChainInit::Empirical(e), 0) = (init, n_steps) {
        return Ok(e.clone());
    }
    let mut points = Vec::with_capacity(init.len() * init.dim());
    for i in 0..init.len() {
        points.extend(simulate_particle(kernel, init, i, n_steps, key)?);
    }
    EmpiricalMeasure::new(init.dim(), points)
}

fn require_affine(kernel: &KernelSpec) -> Result<&PotentialSpec> {
    let u = kernel.pot();
    if u.is_unperturbed() {
        Ok(u)
    } else {
        Err(Error::Unsupported(format!("{:?} is affine-Gaussian only when H = 0", kernel.kind)))
    }
}

/// Exact image of a diagonal Gaussian under an affine-Gaussian kernel.
/// Point masses (zero variance) are valid inputs.
pub fn gaussian_pushforward(kernel: &KernelSpec, g: &GaussianMeasure) -> Result<GaussianMeasure> {
    check_dim(kernel.dim(), g.dim())?;
    let h = kernel.step;
    let (mut mean, mut var) = (g.mean().to_vec(), g.var().to_vec());
    match kernel.kind {
        KernelKind::Gaussian | KernelKind::PsForward => var.iter_mut().for_each(|v| *v += h),
        kind => {
            let u = require_affine(kernel)?;
            for i in 0..mean.len() {
                let (a, c) = (u.curvature()[i], u.center()[i]);
                let (m, v) = (mean[i], var[i]);
                (mean[i], var[i]) = match kind {
                    KernelKind::GradStep | KernelKind::Lmc => {
                        let k = 1.0 - a * h;
                        let noise = if kind == KernelKind::Lmc { 2.0 * h } else { 0.0 };
                        (c + k * (m - c), k * k * v + noise)
                    }
                    KernelKind::OuExact => {
                        let (decay, ov) = ou_coefficients(a, h);
                        (c + decay * (m - c), decay * decay * v + ov)
                    }
                    KernelKind::PsBackward | KernelKind::Ps => {
                        let v = if kind == KernelKind::Ps { v + h } else { v };
                        let q = 1.0 + a * h;
                        ((a * h * c + m) / q, v / (q * q) + h / q)
                    }
                    KernelKind::Gaussian | KernelKind::PsForward => unreachable!(),
                };
            }
        }
    }
    Ok(GaussianMeasure::from_parts(mean, var))
}

fn staged(kernel: &KernelSpec, grid: &Grid, values: &[f64]) -> Result<Staged> {
    let h = kernel.step;
    Ok(match kernel.kind {
        KernelKind::Gaussian | KernelKind::PsForward => gaussian_stage(grid, values, |x| x, h),
        KernelKind::GradStep => {
            let u = kernel.pot();
            deposit_stage(grid, values, |x| x - h * u.value_grad_1d(x).1)
        }
        KernelKind::Lmc => {
            let u = kernel.pot();
            gaussian_stage(grid, values, |x| x - h * u.value_grad_1d(x).1, 2.0 * h)
        }
        KernelKind::OuExact => {
            let u = kernel.pot();
            let (a, c) = (u.curvature()[0], u.center()[0]);
            let (decay, var) = ou_coefficients(a, h);
            gaussian_stage(grid, values, |x| c + decay * (x - c), var)
        }
        KernelKind::PsBackward => backward_stage(grid, values, kernel.pot(), h),
        KernelKind::Ps => {
            let fwd = gaussian_stage(grid, values, |x| x, h);
            let bwd = backward_stage(grid, &fwd.values, kernel.pot(), h);
            Staged { values: bwd.values, leak: fwd.leak + bwd.leak }
        }
    })
}

fn finish(grid: Grid, s: Staged) -> Result<GridDensity> {
    if !(s.leak <= MAX_GRID_LEAK) {
        return Err(Error::GridTooSmall { leak: s.leak, limit: MAX_GRID_LEAK });
    }
    GridDensity::new(grid, s.values)
}

/// One kernel application to a 1D grid density, on the same grid. Fails when
/// more than [`MAX_GRID_LEAK`] of the mass leaves the grid.
pub fn grid_pushforward(kernel: &KernelSpec, rho: &GridDensity) -> Result<GridDensity> {
    if kernel.dim() != 1 {
        return Err(Error::Unsupported("grid pushforward is 1D only".into()));
    }
    let grid = *rho.grid();
    finish(grid, staged(kernel, &grid, rho.values())?)
}

/// Law of `δ_x P` on `grid`. The first stage is evaluated in closed form,
/// so a point-mass start never has to be represented on the grid.
pub fn grid_pushforward_point(kernel: &KernelSpec, x: f64, grid: &Grid) -> Result<GridDensity> {
    if kernel.dim() != 1 {
        return Err(Error::Unsupported("grid pushforward is 1D only".into()));
    }
    if !x.is_finite() {
        return Err(Error::NonFinite);
    }
    let h = kernel.step;
    let gaussian = |m: f64, v: f64| -> Staged {
        let s = v.sqrt();
        let inside = normal_interval((grid.lo() - m) / s, (grid.hi() - m) / s);
        Staged {
            values: grid.nodes().map(|z| crate::special::normal_pdf(z, m, v)).collect(),
            leak: 1.0 - inside,
        }
    };
    let staged = match kernel.kind {
        KernelKind::Gaussian | KernelKind::PsForward => gaussian(x, h),
        KernelKind::Lmc => gaussian(x - h * kernel.pot().value_grad_1d(x).1, 2.0 * h),
        KernelKind::OuExact => {
            let u = kernel.pot();
            let (a, c) = (u.curvature()[0], u.center()[0]);
            let (decay, var) = ou_coefficients(a, h);
            gaussian(c + decay * (x - c), var)
        }
        KernelKind::Ps => {
            let fwd = gaussian(x, h);
            let bwd = backward_stage(grid, &fwd.values, kernel.pot(), h);
            Staged { values: bwd.values, leak: fwd.leak + bwd.leak }
        }
        KernelKind::PsBackward => {
            let mut values = vec![0.0; grid.len()];
            let k = ((x - grid.lo()) / grid.spacing()).round();
            if !(k >= 0.0 && k < grid.len() as f64) {
                return Err(precondition("start point lies outside the grid"));
            }
            // unit mass at the nearest node, then one backward stage
            values[k as usize] = 1.0 / grid.weight(k as usize);
            backward_stage(grid, &values, kernel.pot(), h)
        }
        KernelKind::GradStep => {
            return Err(Error::Unsupported("grad_step maps a point mass to a point mass".into()))
        }
    };
    finish(*grid, staged)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Confining, Perturbation};
    use crate::rng::stream;
    use approx::assert_relative_eq;

    fn quad(alpha: f64, pert: Perturbation) -> PotentialSpec {
        PotentialSpec::isotropic(1, alpha, pert).unwrap()
    }

    #[test]
    fn grad_step_examples() {
        let flat = PotentialSpec::new(
            1,
            0.0,
            0.0,
            0.0,
            Confining::Quadratic { center: vec![0.0], curvature: vec![0.0] },
            Perturbation::Zero,
        )
        .unwrap();
        let mut rng = stream(1, 0, 0);
        let k = KernelSpec::grad_step(0.3, flat).unwrap();
        assert_eq!(k.step_sample(&[1.7], &mut rng).unwrap(), vec![1.7]);
        let k = KernelSpec::grad_step(0.1, quad(1.0, Perturbation::Zero)).unwrap();
        assert_relative_eq!(k.step_sample(&[1.0], &mut rng).unwrap()[0], 0.9, max_relative = 1e-15);
    }

    #[test]
    fn lmc_rejects_large_steps() {
        let err = KernelSpec::lmc(2.0, quad(1.0, Perturbation::Zero)).unwrap_err();
        assert_eq!(err, Error::Precondition("h > 1/beta".into()));
    }

    #[test]
    fn gaussian_pushforward_examples() {
        let g = GaussianMeasure::univariate(0.0, 1.0).unwrap();
        let k = KernelSpec::gaussian(1.0, 1).unwrap();
        assert_eq!(gaussian_pushforward(&k, &g).unwrap(), GaussianMeasure::univariate(0.0, 2.0).unwrap());
        let lmc = KernelSpec::lmc(0.1, quad(1.0, Perturbation::Zero)).unwrap();
        let out = gaussian_pushforward(&lmc, &GaussianMeasure::point_mass(vec![2.0]).unwrap()).unwrap();
        assert_relative_eq!(out.mean()[0], 1.8, max_relative = 1e-15);
        assert_relative_eq!(out.var()[0], 0.2, max_relative = 1e-15);
        let ou = KernelSpec::ou_exact(f64::INFINITY, quad(1.0, Perturbation::Zero)).unwrap();
        let out = gaussian_pushforward(&ou, &GaussianMeasure::univariate(5.0, 3.0).unwrap()).unwrap();
        assert_eq!((out.mean()[0], out.var()[0]), (0.0, 1.0));
        let wavy = KernelSpec::lmc(0.1, quad(1.0, Perturbation::Sinusoid { amplitude: 0.5, frequency: 1.0 })).unwrap();
        assert!(matches!(gaussian_pushforward(&wavy, &g), Err(Error::Unsupported(_))));
    }

    #[test]
    fn backward_grid_inverts_its_cdf() {
        let u = quad(1.0, Perturbation::Sinusoid { amplitude: 0.5, frequency: 1.0 });
        let g = BackwardGrid::new(&u, 0.7, 0.5, BACKWARD_GRID_NODES).unwrap();
        for &p in &[1e-9, 0.01, 0.3, 0.5, 0.77, 0.999] {
            assert!((g.cdf(g.quantile(p)) - p).abs() < 1e-12);
        }
    }

    #[test]
    fn rejection_and_grid_backward_agree_on_moments() {
        let u = quad(1.0, Perturbation::Sinusoid { amplitude: 0.5, frequency: 1.0 });
        let grid_k = KernelSpec::ps_backward(0.5, u.clone()).unwrap();
        let rej_k = grid_k.clone().with_backward(BackwardMethod::Rejection).unwrap();
        let n = 20_000;
        let bg = BackwardGrid::new(&u, 0.4, 0.5, BACKWARD_GRID_NODES).unwrap();
        let (mut m_ref, mut m2_ref) = (0.0, 0.0);
        for i in 0..BACKWARD_GRID_NODES * 4 {
            let z = bg.quantile((i as f64 + 0.5) / (BACKWARD_GRID_NODES * 4) as f64);
            m_ref += z;
            m2_ref += z * z;
        }
        m_ref /= (BACKWARD_GRID_NODES * 4) as f64;
        let var_ref = m2_ref / (BACKWARD_GRID_NODES * 4) as f64 - m_ref * m_ref;
        let mut rng = stream(11, 0, 0);
        let draws: Vec<f64> = (0..n).map(|_| rej_k.step_sample(&[0.4], &mut rng).unwrap()[0]).collect();
        let mean = draws.iter().sum::<f64>() / n as f64;
        let se = (var_ref / n as f64).sqrt();
        assert!((mean - m_ref).abs() < 4.0 * se, "{mean} vs {m_ref}");
    }

    #[test]
    fn grid_gaussian_matches_exact() {
        let grid = Grid::new(-14.0, 14.0, 8192).unwrap();
        let rho = GridDensity::from_gaussian(grid, 0.0, 1.0).unwrap();
        let k = KernelSpec::gaussian(0.5, 1).unwrap();
        let out = grid_pushforward(&k, &rho).unwrap();
        let exact = GridDensity::from_gaussian(grid, 0.0, 1.5).unwrap();
        assert!(out.sup_distance(&exact).unwrap() <= 1e-6);
    }

    #[test]
    fn grid_leak_is_reported() {
        let grid = Grid::new(-3.0, 3.0, 601).unwrap();
        let rho = GridDensity::from_gaussian(grid, 0.0, 1.0).unwrap();
        let k = KernelSpec::gaussian(4.0, 1).unwrap();
        assert!(matches!(grid_pushforward(&k, &rho), Err(Error::GridTooSmall { .. })));
    }

    #[test]
    fn chain_with_zero_steps_returns_init() {
        let init = ChainInit::Empirical(EmpiricalMeasure::from_1d(vec![0.5, -1.0, 2.0]).unwrap());
        let k = KernelSpec::gaussian(1.0, 1).unwrap();
        let out = run_chain(&k, &init, 0, StreamKey::new(3, 0)).unwrap();
        assert_eq!(out.raw(), &[0.5, -1.0, 2.0]);
    }
}
