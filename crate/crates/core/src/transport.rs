//! Wasserstein distances on ℝ^d with the Euclidean metric.
//!
//! Orders are plain `f64` values `p ≥ 1`, with `f64::INFINITY` standing
//! for `W_∞`.

#[allow(unused_imports)]
use num_traits::Float;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{check_dim, precondition, Error, Result};
use crate::model::{EmpiricalMeasure, GaussianMeasure, GridDensity};

/// Number of interleaved folds used for Monte-Carlo standard errors.
pub const FOLDS: usize = 20;
/// Largest support size accepted by [`w2_assignment`].
pub const MAX_ASSIGNMENT: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum WassersteinMethod {
    GaussianClosedForm,
    Sorted1d,
    Assignment,
    SupSorted1d,
    GridQuantile,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct WassersteinResult {
    pub p: f64,
    pub value: f64,
    pub method: WassersteinMethod,
    pub std_error: Option<f64>,
}

fn check_order(p: f64) -> Result<()> {
    if p >= 1.0 {
        Ok(())
    } else {
        Err(precondition("order p must be >= 1"))
    }
}

/// `W_2` between diagonal Gaussians: `sqrt(|m1 − m2|² + Σ (σ1 − σ2)²)`.
pub fn w2_gaussian(g1: &GaussianMeasure, g2: &GaussianMeasure) -> Result<WassersteinResult> {
    check_dim(g1.dim(), g2.dim())?;
    let sq: f64 = (0..g1.dim())
        .map(|i| {
            let dm = g1.mean()[i] - g2.mean()[i];
            let ds = g1.var()[i].sqrt() - g2.var()[i].sqrt();
            dm * dm + ds * ds
        })
        .sum();
    Ok(WassersteinResult { p: 2.0, value: sq.sqrt(), method: WassersteinMethod::GaussianClosedForm, std_error: None })
}

fn sorted(xs: &[f64]) -> Vec<f64> {
    let mut v = xs.to_vec();
    v.sort_unstable_by(f64::total_cmp);
    v
}

fn sorted_cost(xs: &[f64], ys: &[f64], p: f64) -> f64 {
    let (xs, ys) = (sorted(xs), sorted(ys));
    let diffs = xs.iter().zip(&ys).map(|(a, b)| (a - b).abs());
    if p.is_infinite() {
        diffs.fold(0.0, f64::max)
    } else {
        let mean = diffs.map(|d| d.powf(p)).sum::<f64>() / xs.len() as f64;
        mean.powf(1.0 / p)
    }
}

fn equalise(xs: &EmpiricalMeasure, ys: &EmpiricalMeasure) -> Result<(EmpiricalMeasure, EmpiricalMeasure)> {
    let n = xs.len().min(ys.len());
    Ok((xs.subsample(n)?, ys.subsample(n)?))
}

/// `W_p` between 1D samples through the monotone coupling. Unequal counts
/// are matched by equal-stride subsampling of the larger sample. The
/// standard error comes from the spread of the estimate over
/// [`FOLDS`] interleaved folds (index mod `FOLDS`), when each fold holds at
/// least two points.
pub fn wp_empirical_1d(xs: &EmpiricalMeasure, ys: &EmpiricalMeasure, p: f64) -> Result<WassersteinResult> {
    check_order(p)?;
    check_dim(1, xs.dim())?;
    check_dim(1, ys.dim())?;
    if xs.is_empty() || ys.is_empty() {
        return Err(Error::Empty);
    }
    let (xs, ys) = equalise(xs, ys)?;
    let (xr, yr) = (xs.raw(), ys.raw());
    let value = sorted_cost(xr, yr, p);
    let n = xr.len();
    let std_error = (n >= 2 * FOLDS).then(|| {
        let folds: Vec<f64> = (0..FOLDS)
            .map(|f| {
                let fx: Vec<f64> = xr.iter().skip(f).step_by(FOLDS).copied().collect();
                let fy: Vec<f64> = yr.iter().skip(f).step_by(FOLDS).copied().collect();
                sorted_cost(&fx, &fy, p)
            })
            .collect();
        let mean = folds.iter().sum::<f64>() / FOLDS as f64;
        let var = folds.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (FOLDS - 1) as f64;
        (var / FOLDS as f64).sqrt()
    });
    let method = if p.is_infinite() { WassersteinMethod::SupSorted1d } else { WassersteinMethod::Sorted1d };
    Ok(WassersteinResult { p, value, method, std_error })
}

/// Exact `W_2` between two equal-size point clouds in any dimension via a
/// minimum-cost assignment with squared Euclidean cost.
pub fn w2_assignment(xs: &EmpiricalMeasure, ys: &EmpiricalMeasure) -> Result<WassersteinResult> {
    check_dim(xs.dim(), ys.dim())?;
    check_dim(xs.len(), ys.len())?;
    let n = xs.len();
    if n == 0 {
        return Err(Error::Empty);
    }
    if n > MAX_ASSIGNMENT {
        return Err(precondition("assignment size must be <= 1024"));
    }
    let cost: Vec<f64> = (0..n)
        .flat_map(|i| {
            let xi = xs.point(i);
            (0..n).map(move |j| xi.iter().zip(ys.point(j)).map(|(a, b)| (a - b) * (a - b)).sum::<f64>())
        })
        .collect();
    let assignment = hungarian(n, &cost);
    let total: f64 = assignment.iter().enumerate().map(|(i, &j)| cost[i * n + j]).sum();
    Ok(WassersteinResult {
        p: 2.0,
        value: (total / n as f64).max(0.0).sqrt(),
        method: WassersteinMethod::Assignment,
        std_error: None,
    })
}

/// Minimum-cost perfect matching on a dense `n × n` row-major cost matrix
/// (shortest augmenting paths with potentials, `O(n³)`). Returns the
/// column assigned to each row. Ties go to the lowest column index.
pub fn hungarian(n: usize, cost: &[f64]) -> Vec<usize> {
    // 1-based arrays; index 0 is the virtual source column
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut owner = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for row in 1..=n {
        owner[0] = row;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = owner[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = cost[(i0 - 1) * n + (j - 1)] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[owner[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if owner[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            owner[j0] = owner[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut out = vec![0; n];
    for j in 1..=n {
        out[owner[j] - 1] = j - 1;
    }
    out
}

fn normalised_cdf(r: &GridDensity) -> Vec<f64> {
    let mut cdf = r.cdf_nodes();
    let total = *cdf.last().unwrap();
    cdf.iter_mut().for_each(|c| *c /= total);
    cdf
}

/// `W_1 = ∫|F1 − F2|` with both CDFs linear between nodes; the integral of
/// the piecewise-linear absolute difference is exact.
pub fn grid_w1_1d(r1: &GridDensity, r2: &GridDensity) -> Result<WassersteinResult> {
    r1.ensure_same_grid(r2)?;
    let (f1, f2) = (normalised_cdf(r1), normalised_cdf(r2));
    let dx = r1.grid().spacing();
    let d: Vec<f64> = f1.iter().zip(&f2).map(|(a, b)| a - b).collect();
    let value: f64 = d
        .windows(2)
        .map(|w| {
            let (a, b) = (w[0], w[1]);
            if a * b >= 0.0 {
                0.5 * dx * (a.abs() + b.abs())
            } else {
                0.5 * dx * (a * a + b * b) / (a.abs() + b.abs())
            }
        })
        .sum();
    Ok(WassersteinResult { p: 1.0, value, method: WassersteinMethod::GridQuantile, std_error: None })
}

/// Quantile of a piecewise-linear CDF inside the last cell starting at or
/// below `start`, evaluated (by linear extension within that cell) at `u`.
fn cell_quantile(cdf: &[f64], lo: f64, dx: f64, start: f64) -> impl Fn(f64) -> f64 + '_ {
    let i = cdf.partition_point(|&c| c <= start).saturating_sub(1).min(cdf.len() - 2);
    move |u| {
        let (a, b) = (cdf[i], cdf[i + 1]);
        lo + (i as f64 + (u - a) / (b - a)) * dx
    }
}

/// `∫ |d|^p` over a segment of length `len` where `d` moves linearly from
/// `a` to `b`.
fn linear_power_integral(a: f64, b: f64, len: f64, p: f64) -> f64 {
    if a * b < 0.0 {
        let root = len * a.abs() / (a.abs() + b.abs());
        return linear_power_integral(a, 0.0, root, p) + linear_power_integral(0.0, b, len - root, p);
    }
    let (a, b) = (a.abs(), b.abs());
    if (a - b).abs() <= 1e-12 * a.max(b) {
        return len * (0.5 * (a + b)).powf(p);
    }
    len * (b.powf(p + 1.0) - a.powf(p + 1.0)) / ((p + 1.0) * (b - a))
}

/// `W_p` between grid densities through their quantile functions. Both CDFs
/// are linear between nodes, so the quantile difference is linear between
/// merged CDF breakpoints and every piece integrates exactly.
pub fn grid_wp_1d(r1: &GridDensity, r2: &GridDensity, p: f64) -> Result<WassersteinResult> {
    check_order(p)?;
    r1.ensure_same_grid(r2)?;
    let (f1, f2) = (normalised_cdf(r1), normalised_cdf(r2));
    let (lo, dx) = (r1.grid().lo(), r1.grid().spacing());
    let mut breaks: Vec<f64> = f1.iter().chain(&f2).copied().collect();
    breaks.sort_unstable_by(f64::total_cmp);
    breaks.dedup();
    let mut acc = 0.0;
    for w in breaks.windows(2) {
        let (ua, ub) = (w[0], w[1]);
        if !(ub > ua) {
            continue;
        }
        let q1 = cell_quantile(&f1, lo, dx, ua);
        let q2 = cell_quantile(&f2, lo, dx, ua);
        let (da, db) = (q1(ua) - q2(ua), q1(ub) - q2(ub));
        if p.is_infinite() {
            acc = acc.max(da.abs()).max(db.abs());
        } else {
            acc += linear_power_integral(da, db, ub - ua, p);
        }
    }
    let value = if p.is_infinite() { acc } else { acc.powf(1.0 / p) };
    Ok(WassersteinResult { p, value, method: WassersteinMethod::GridQuantile, std_error: None })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Grid;
    use approx::assert_relative_eq;

    fn cloud(v: &[f64]) -> EmpiricalMeasure {
        EmpiricalMeasure::from_1d(v.to_vec()).unwrap()
    }

    #[test]
    fn gaussian_examples() {
        let a = GaussianMeasure::univariate(0.0, 1.0).unwrap();
        let b = GaussianMeasure::univariate(3.0, 1.0).unwrap();
        let c = GaussianMeasure::univariate(0.0, 4.0).unwrap();
        assert_eq!(w2_gaussian(&a, &b).unwrap().value, 3.0);
        assert_eq!(w2_gaussian(&a, &c).unwrap().value, 1.0);
        assert_eq!(w2_gaussian(&c, &c).unwrap().value, 0.0);
    }

    #[test]
    fn sorted_examples() {
        assert_eq!(wp_empirical_1d(&cloud(&[0.0, 1.0]), &cloud(&[0.0, 1.0]), 2.0).unwrap().value, 0.0);
        for p in [1.0, 2.0, 3.5, f64::INFINITY] {
            let r = wp_empirical_1d(&cloud(&[0.0, 2.0]), &cloud(&[1.0, 3.0]), p).unwrap();
            assert_relative_eq!(r.value, 1.0, max_relative = 1e-15);
        }
        let r = wp_empirical_1d(&cloud(&[0.0, 2.0]), &cloud(&[3.0, 1.0]), f64::INFINITY).unwrap();
        assert_eq!(r.value, 1.0);
        assert_eq!(r.method, WassersteinMethod::SupSorted1d);
        assert!(r.std_error.is_none());
    }

    #[test]
    fn assignment_examples() {
        let a = EmpiricalMeasure::new(2, vec![0.0, 0.0, 1.0, 0.0]).unwrap();
        let b = EmpiricalMeasure::new(2, vec![1.0, 0.0, 0.0, 0.0]).unwrap();
        assert_eq!(w2_assignment(&a, &b).unwrap().value, 0.0);
        assert_eq!(w2_assignment(&a, &a).unwrap().value, 0.0);
        let xs = cloud(&[0.3, -1.2, 4.0, 2.2, 0.0]);
        let ys = cloud(&[1.1, 0.7, -3.0, 2.5, 9.0]);
        let exact = w2_assignment(&xs, &ys).unwrap().value;
        let sorted = wp_empirical_1d(&xs, &ys, 2.0).unwrap().value;
        assert_relative_eq!(exact, sorted, max_relative = 1e-12);
    }

    #[test]
    fn grid_examples() {
        let grid = Grid::new(-13.0, 14.0, 8192).unwrap();
        let a = GridDensity::from_gaussian(grid, 0.0, 1.0).unwrap();
        let b = GridDensity::from_gaussian(grid, 1.0, 1.0).unwrap();
        assert_eq!(grid_w1_1d(&a, &a).unwrap().value, 0.0);
        let ab = grid_w1_1d(&a, &b).unwrap().value;
        assert!((ab - 1.0).abs() < 1e-4);
        assert_eq!(ab, grid_w1_1d(&b, &a).unwrap().value);
        for p in [1.0, 2.0, f64::INFINITY] {
            let v = grid_wp_1d(&a, &b, p).unwrap().value;
            assert!((v - 1.0).abs() < 1e-3, "p={p}: {v}");
        }
        assert_relative_eq!(grid_wp_1d(&a, &b, 1.0).unwrap().value, ab, max_relative = 1e-9);
    }

    #[test]
    fn grid_w2_matches_gaussian_scale_change() {
        let grid = Grid::new(-25.0, 25.0, 8192).unwrap();
        let a = GridDensity::from_gaussian(grid, 0.0, 1.0).unwrap();
        let c = GridDensity::from_gaussian(grid, 0.5, 4.0).unwrap();
        let expect = (0.25f64 + 1.0).sqrt();
        assert!((grid_wp_1d(&a, &c, 2.0).unwrap().value - expect).abs() < 1e-4);
    }
}
