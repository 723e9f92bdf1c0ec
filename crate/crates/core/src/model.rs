//! Potentials `U = V + H` and the measure representations shared by every
//! other module.
//!
//! `V` is a diagonal quadratic with curvatures in `[alpha, beta]`; `H` is a
//! perturbation with bounded gradient, `sup |∇H| ≤ L`. Measures come in three
//! interchangeable forms: exact diagonal Gaussians, normalised densities on a
//! uniform 1D grid, and equal-weight samples.

#[allow(unused_imports)]
use num_traits::Float;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{check_dim, precondition, Error, Result};
use crate::special::normal_pdf;

/// Strongly convex part `V(x) = ½ Σ aᵢ (xᵢ − cᵢ)²`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Confining {
    Quadratic { center: Vec<f64>, curvature: Vec<f64> },
}

/// Perturbation `H` with `sup |∇H| ≤ L`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Perturbation {
    Zero,
    /// `H(x) = a · Σᵢ sin(ω xᵢ) / √d`, so `|∇H| ≤ a·ω`.
    Sinusoid { amplitude: f64, frequency: f64 },
    /// `H(x) = s · sqrt(1 + |x|²)`, so `|∇H| ≤ s`.
    SmoothedNorm { scale: f64 },
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PotentialSpec {
    dim: usize,
    alpha: f64,
    beta: f64,
    lipschitz: f64,
    confining: Confining,
    perturbation: Perturbation,
}

impl PotentialSpec {
    /// Validates every structural invariant. `beta = 0` is accepted for a
    /// flat `V` and imposes no step-size restriction.
    pub fn new(
        dim: usize,
        alpha: f64,
        beta: f64,
        lipschitz: f64,
        confining: Confining,
        perturbation: Perturbation,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(precondition("dimension must be positive"));
        }
        for (name, v) in [("alpha", alpha), ("beta", beta), ("L", lipschitz)] {
            if !v.is_finite() || v < 0.0 {
                return Err(precondition(format!("{name} must be finite and >= 0")));
            }
        }
        if alpha > beta {
            return Err(precondition("alpha > beta"));
        }
        let Confining::Quadratic { center, curvature } = &confining;
        check_dim(dim, center.len())?;
        check_dim(dim, curvature.len())?;
        if center.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite);
        }
        if curvature.iter().any(|&a| !(a >= alpha && a <= beta)) {
            return Err(precondition("quadratic curvature outside [alpha, beta]"));
        }
        match perturbation {
            Perturbation::Zero => {}
            Perturbation::Sinusoid { amplitude, frequency } => {
                if !amplitude.is_finite() || !frequency.is_finite() {
                    return Err(Error::NonFinite);
                }
                if (amplitude * frequency).abs() > lipschitz {
                    return Err(precondition("sinusoid a*omega > L"));
                }
            }
            Perturbation::SmoothedNorm { scale } => {
                if !(scale >= 0.0) || !scale.is_finite() {
                    return Err(precondition("smoothed_norm scale must be >= 0"));
                }
                if scale > lipschitz {
                    return Err(precondition("smoothed_norm scale > L"));
                }
            }
        }
        Ok(Self { dim, alpha, beta, lipschitz, confining, perturbation })
    }

    /// `V = (alpha/2)|x|²`, `beta = alpha`, `L = sup|∇H|`.
    pub fn isotropic(dim: usize, alpha: f64, perturbation: Perturbation) -> Result<Self> {
        let lipschitz = match perturbation {
            Perturbation::Zero => 0.0,
            Perturbation::Sinusoid { amplitude, frequency } => (amplitude * frequency).abs(),
            Perturbation::SmoothedNorm { scale } => scale,
        };
        Self::new(
            dim,
            alpha,
            alpha,
            lipschitz,
            Confining::Quadratic { center: vec![0.0; dim], curvature: vec![alpha; dim] },
            perturbation,
        )
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn beta(&self) -> f64 {
        self.beta
    }
    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }
    pub fn confining(&self) -> &Confining {
        &self.confining
    }
    pub fn perturbation(&self) -> Perturbation {
        self.perturbation
    }

    pub fn center(&self) -> &[f64] {
        let Confining::Quadratic { center, .. } = &self.confining;
        center
    }

    pub fn curvature(&self) -> &[f64] {
        let Confining::Quadratic { curvature, .. } = &self.confining;
        curvature
    }

    /// True when `H = 0`, i.e. the target is Gaussian and every kernel is
    /// affine-Gaussian.
    pub fn is_unperturbed(&self) -> bool {
        match self.perturbation {
            Perturbation::Zero => true,
            Perturbation::Sinusoid { amplitude, frequency } => amplitude == 0.0 || frequency == 0.0,
            Perturbation::SmoothedNorm { scale } => scale == 0.0,
        }
    }

    pub fn value(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.dim, x.len())?;
        Ok(self.v_value(x) + self.h_value(x))
    }

    pub fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.dim];
        self.gradient_into(x, &mut out)?;
        Ok(out)
    }

    pub fn gradient_into(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        check_dim(self.dim, x.len())?;
        check_dim(self.dim, out.len())?;
        for ((o, (&xi, &ci)), &ai) in out.iter_mut().zip(x.iter().zip(self.center())).zip(self.curvature()) {
            *o = ai * (xi - ci);
        }
        self.add_h_gradient(x, out);
        Ok(())
    }

    /// Analytic bound on `sup |∇H|`.
    pub fn grad_h_sup_norm(&self) -> f64 {
        match self.perturbation {
            Perturbation::Zero => 0.0,
            Perturbation::Sinusoid { amplitude, frequency } => (amplitude * frequency).abs(),
            Perturbation::SmoothedNorm { scale } => scale,
        }
    }

    pub(crate) fn v_value(&self, x: &[f64]) -> f64 {
        x.iter()
            .zip(self.center())
            .zip(self.curvature())
            .map(|((&xi, &ci), &ai)| 0.5 * ai * (xi - ci) * (xi - ci))
            .sum()
    }

    pub(crate) fn h_value(&self, x: &[f64]) -> f64 {
        match self.perturbation {
            Perturbation::Zero => 0.0,
            Perturbation::Sinusoid { amplitude, frequency } => {
                let s: f64 = x.iter().map(|&xi| (frequency * xi).sin()).sum();
                amplitude * s / (self.dim as f64).sqrt()
            }
            Perturbation::SmoothedNorm { scale } => {
                let r2: f64 = x.iter().map(|v| v * v).sum();
                scale * (1.0 + r2).sqrt()
            }
        }
    }

    fn add_h_gradient(&self, x: &[f64], out: &mut [f64]) {
        match self.perturbation {
            Perturbation::Zero => {}
            Perturbation::Sinusoid { amplitude, frequency } => {
                let c = amplitude * frequency / (self.dim as f64).sqrt();
                for (o, &xi) in out.iter_mut().zip(x) {
                    *o += c * (frequency * xi).cos();
                }
            }
            Perturbation::SmoothedNorm { scale } => {
                let r2: f64 = x.iter().map(|v| v * v).sum();
                let c = scale / (1.0 + r2).sqrt();
                for (o, &xi) in out.iter_mut().zip(x) {
                    *o += c * xi;
                }
            }
        }
    }

    /// Scalar fast path for `d = 1`: `(U(x), U'(x))`.
    pub(crate) fn value_grad_1d(&self, x: f64) -> (f64, f64) {
        let a = self.curvature()[0];
        let c = self.center()[0];
        let (mut u, mut g) = (0.5 * a * (x - c) * (x - c), a * (x - c));
        match self.perturbation {
            Perturbation::Zero => {}
            Perturbation::Sinusoid { amplitude, frequency } => {
                let (s, co) = (frequency * x).sin_cos();
                u += amplitude * s;
                g += amplitude * frequency * co;
            }
            Perturbation::SmoothedNorm { scale } => {
                let r = (1.0 + x * x).sqrt();
                u += scale * r;
                g += scale * x / r;
            }
        }
        (u, g)
    }

    /// Lower bound on `inf H` over the ball `B(center, radius)`; exact for
    /// the zero and smoothed-norm perturbations.
    pub(crate) fn h_inf_on_ball(&self, center: &[f64], radius: f64) -> f64 {
        match self.perturbation {
            Perturbation::Zero => 0.0,
            Perturbation::Sinusoid { amplitude, .. } => {
                let global = -amplitude.abs() * (self.dim as f64).sqrt();
                let lip = self.h_value(center) - self.grad_h_sup_norm() * radius;
                global.max(lip)
            }
            Perturbation::SmoothedNorm { scale } => {
                let r: f64 = center.iter().map(|v| v * v).sum::<f64>().sqrt();
                let near = (r - radius).max(0.0);
                scale * (1.0 + near * near).sqrt()
            }
        }
    }

    /// Gaussian obtained from `exp(−V(z) − |z − y|²/(2h))`, i.e. the
    /// backward-step conditional with `H` dropped.
    pub fn backward_envelope(&self, y: &[f64], h: f64) -> Result<GaussianMeasure> {
        check_dim(self.dim, y.len())?;
        let (mean, var) = y
            .iter()
            .zip(self.center())
            .zip(self.curvature())
            .map(|((&yi, &ci), &ai)| {
                let q = 1.0 + ai * h;
                ((ai * h * ci + yi) / q, h / q)
            })
            .unzip();
        Ok(GaussianMeasure { mean, var })
    }
}

/// Diagonal Gaussian `N(mean, diag(var))`.
///
/// Variances are strictly positive except for point masses built through
/// [`GaussianMeasure::point_mass`].
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GaussianMeasure {
    mean: Vec<f64>,
    var: Vec<f64>,
}

impl GaussianMeasure {
    pub fn new(mean: Vec<f64>, var: Vec<f64>) -> Result<Self> {
        check_dim(mean.len(), var.len())?;
        if mean.is_empty() {
            return Err(Error::Empty);
        }
        if mean.iter().chain(&var).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        if var.iter().any(|&v| v <= 0.0) {
            return Err(precondition("variance entries must be > 0"));
        }
        Ok(Self { mean, var })
    }

    pub fn isotropic(mean: Vec<f64>, var: f64) -> Result<Self> {
        let d = mean.len();
        Self::new(mean, vec![var; d])
    }

    pub fn univariate(mean: f64, var: f64) -> Result<Self> {
        Self::new(vec![mean], vec![var])
    }

    /// Degenerate Gaussian `δ_x` (all variances zero).
    pub fn point_mass(x: Vec<f64>) -> Result<Self> {
        if x.is_empty() {
            return Err(Error::Empty);
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        let d = x.len();
        Ok(Self { mean: x, var: vec![0.0; d] })
    }

    /// Construction path for pushforwards, where variances are already
    /// known to be valid (possibly zero).
    pub(crate) fn from_parts(mean: Vec<f64>, var: Vec<f64>) -> Self {
        Self { mean, var }
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }
    pub fn mean(&self) -> &[f64] {
        &self.mean
    }
    pub fn var(&self) -> &[f64] {
        &self.var
    }
    pub fn is_degenerate(&self) -> bool {
        self.var.contains(&0.0)
    }

    /// Density of a univariate Gaussian at `x`.
    pub fn density_1d(&self, x: f64) -> Result<f64> {
        check_dim(1, self.dim())?;
        if self.var[0] == 0.0 {
            return Err(precondition("point mass has no density"));
        }
        Ok(normal_pdf(x, self.mean[0], self.var[0]))
    }
}

/// Uniform grid on `[lo, hi]` with `n` nodes (endpoints included).
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Grid {
    lo: f64,
    hi: f64,
    n: usize,
}

impl Grid {
    pub fn new(lo: f64, hi: f64, n: usize) -> Result<Self> {
        if !lo.is_finite() || !hi.is_finite() {
            return Err(Error::NonFinite);
        }
        if !(lo < hi) {
            return Err(precondition("grid needs lo < hi"));
        }
        if n < 3 {
            return Err(precondition("grid needs at least 3 nodes"));
        }
        Ok(Self { lo, hi, n })
    }

    /// Grid spanning `mean ± width·sd` of every listed `(mean, var)` pair.
    pub fn covering(envelopes: &[(f64, f64)], width: f64, n: usize) -> Result<Self> {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for &(m, v) in envelopes {
            let s = v.sqrt();
            lo = lo.min(m - width * s);
            hi = hi.max(m + width * s);
        }
        if envelopes.is_empty() {
            return Err(Error::Empty);
        }
        Self::new(lo, hi, n)
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }
    pub fn hi(&self) -> f64 {
        self.hi
    }
    pub fn len(&self) -> usize {
        self.n
    }
    pub fn is_empty(&self) -> bool {
        self.n == 0
    }
    pub fn spacing(&self) -> f64 {
        (self.hi - self.lo) / (self.n - 1) as f64
    }
    pub fn node(&self, i: usize) -> f64 {
        // endpoint-exact
        if i + 1 == self.n {
            self.hi
        } else {
            self.lo + i as f64 * self.spacing()
        }
    }
    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(move |i| self.node(i))
    }
    /// Trapezoid quadrature weight of node `i`.
    pub fn weight(&self, i: usize) -> f64 {
        let dx = self.spacing();
        if i == 0 || i + 1 == self.n {
            0.5 * dx
        } else {
            dx
        }
    }
    pub fn trapezoid(&self, values: &[f64]) -> f64 {
        let inner: f64 = values[1..values.len() - 1].iter().sum();
        self.spacing() * (inner + 0.5 * (values[0] + values[values.len() - 1]))
    }
}

/// Nonnegative density sampled on a uniform 1D grid, normalised to unit
/// trapezoid mass.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GridDensity {
    grid: Grid,
    values: Vec<f64>,
}

impl GridDensity {
    /// Normalises `values`; fails on negative, non-finite or zero-mass input.
    pub fn new(grid: Grid, mut values: Vec<f64>) -> Result<Self> {
        check_dim(grid.len(), values.len())?;
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        if values.iter().any(|&v| v < 0.0) {
            return Err(precondition("density values must be >= 0"));
        }
        let mass = grid.trapezoid(&values);
        if !(mass > 0.0) {
            return Err(precondition("density has zero mass"));
        }
        values.iter_mut().for_each(|v| *v /= mass);
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(grid, grid.nodes().map(f).collect())
    }

    pub fn from_gaussian(grid: Grid, mean: f64, var: f64) -> Result<Self> {
        if !(var > 0.0) {
            return Err(precondition("variance entries must be > 0"));
        }
        Self::from_fn(grid, |x| normal_pdf(x, mean, var))
    }

    /// `exp(−U)` on the grid (1D potentials only).
    pub fn gibbs(grid: Grid, potential: &PotentialSpec) -> Result<Self> {
        check_dim(1, potential.dim())?;
        let us: Vec<f64> = grid.nodes().map(|x| potential.value_grad_1d(x).0).collect();
        let umin = us.iter().copied().fold(f64::INFINITY, f64::min);
        Self::new(grid, us.iter().map(|u| (umin - u).exp()).collect())
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn mass(&self) -> f64 {
        self.grid.trapezoid(&self.values)
    }

    pub fn mean(&self) -> f64 {
        let xs: Vec<f64> = self.grid.nodes().zip(&self.values).map(|(x, v)| x * v).collect();
        self.grid.trapezoid(&xs)
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        let xs: Vec<f64> =
            self.grid.nodes().zip(&self.values).map(|(x, v)| (x - m) * (x - m) * v).collect();
        self.grid.trapezoid(&xs)
    }

    /// Cumulative trapezoid mass at each node; the grid CDF is the linear
    /// interpolation of these values.
    pub fn cdf_nodes(&self) -> Vec<f64> {
        let dx = self.grid.spacing();
        let mut out = Vec::with_capacity(self.values.len());
        let mut acc = 0.0;
        out.push(0.0);
        for w in self.values.windows(2) {
            acc += 0.5 * dx * (w[0] + w[1]);
            out.push(acc);
        }
        out
    }

    pub fn ensure_same_grid(&self, other: &GridDensity) -> Result<()> {
        if self.grid == other.grid {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!("{:?} vs {:?}", self.grid, other.grid)))
        }
    }

    pub fn sup_distance(&self, other: &GridDensity) -> Result<f64> {
        self.ensure_same_grid(other)?;
        Ok(self.values.iter().zip(&other.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
    }
}

/// Equal-weight point cloud in ℝ^d, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalMeasure {
    dim: usize,
    points: Vec<f64>,
}

impl EmpiricalMeasure {
    pub fn new(dim: usize, points: Vec<f64>) -> Result<Self> {
        if dim == 0 || points.is_empty() {
            return Err(Error::Empty);
        }
        if !points.len().is_multiple_of(dim) {
            return Err(Error::DimensionMismatch { expected: dim, got: points.len() % dim });
        }
        if points.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { dim, points })
    }

    pub fn from_1d(points: Vec<f64>) -> Result<Self> {
        Self::new(1, points)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn len(&self) -> usize {
        self.points.len() / self.dim
    }
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }
    pub fn points(&self) -> impl Iterator<Item = &[f64]> {
        self.points.chunks_exact(self.dim)
    }
    pub fn raw(&self) -> &[f64] {
        &self.points
    }

    pub fn mean(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.dim];
        for p in self.points() {
            m.iter_mut().zip(p).for_each(|(a, b)| *a += b);
        }
        let n = self.len() as f64;
        m.iter_mut().for_each(|a| *a /= n);
        m
    }

    /// Per-coordinate unbiased sample variance.
    pub fn variance(&self) -> Vec<f64> {
        let m = self.mean();
        let mut v = vec![0.0; self.dim];
        for p in self.points() {
            for ((acc, x), mu) in v.iter_mut().zip(p).zip(&m) {
                *acc += (x - mu) * (x - mu);
            }
        }
        let n = self.len() as f64;
        v.iter_mut().for_each(|a| *a /= (n - 1.0).max(1.0));
        v
    }

    /// Deterministic equal-stride subsample of size `n`.
    pub fn subsample(&self, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Empty);
        }
        if n >= self.len() {
            return Ok(self.clone());
        }
        let total = self.len();
        let mut pts = Vec::with_capacity(n * self.dim);
        for k in 0..n {
            pts.extend_from_slice(self.point(k * total / n));
        }
        Self::new(self.dim, pts)
    }
}
