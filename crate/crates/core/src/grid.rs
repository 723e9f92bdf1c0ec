//! Deterministic 1D law evolution on a fixed uniform grid.
//!
//! A stage maps nodal density values to nodal density values by trapezoid
//! quadrature of `∫ q(z | x) ρ(x) dx`. Gaussian columns are generated by a
//! multiplicative recurrence (no `exp` per entry), truncated at twelve
//! standard deviations and scaled so each column carries exactly the
//! analytic mass it keeps inside the grid. Mass that falls outside is
//! reported as leak.

#[allow(unused_imports)]
use num_traits::Float;
use alloc::vec;
use alloc::vec::Vec;

use crate::model::{Grid, PotentialSpec};
use crate::special::normal_interval;

const WIDTH: f64 = 12.0;

/// Nodal values plus the mass lost across the grid boundary.
pub(crate) struct Staged {
    pub values: Vec<f64>,
    pub leak: f64,
}

/// Unnormalised Gaussian profile `exp(−(x_i − c)²/(2v))` on nodes `lo..=hi`
/// (indices), written into `out[lo..=hi]`.
fn gaussian_profile(grid: &Grid, c: f64, var: f64, k: usize, lo: usize, hi: usize, out: &mut [f64]) {
    let dx = grid.spacing();
    let x0 = grid.lo();
    let q = (-dx * dx / var).exp();
    let xk = x0 + k as f64 * dx - c;
    out[k] = (-0.5 * xk * xk / var).exp();
    let mut g = out[k];
    let mut r = (-xk * dx / var - 0.5 * dx * dx / var).exp();
    for slot in out.iter_mut().take(hi + 1).skip(k + 1) {
        g *= r;
        r *= q;
        *slot = g;
    }
    let mut g = out[k];
    let mut r = (xk * dx / var - 0.5 * dx * dx / var).exp();
    for i in (lo..k).rev() {
        g *= r;
        r *= q;
        out[i] = g;
    }
}

/// Index window `[k − half, k + half] ∩ grid` around the node nearest `c`,
/// or `None` when the window misses the grid.
fn window(grid: &Grid, c: f64, half: f64) -> Option<(usize, usize, usize)> {
    let n = grid.len() as f64;
    let dx = grid.spacing();
    let pos = (c - grid.lo()) / dx;
    let a = (pos - half).ceil().max(0.0);
    let b = (pos + half).floor().min(n - 1.0);
    if !(a <= b) {
        return None;
    }
    let k = pos.round().clamp(a, b);
    Some((k as usize, a as usize, b as usize))
}

/// Gaussian transition `q(·|x) = N(center(x), var)`.
pub(crate) fn gaussian_stage(grid: &Grid, values: &[f64], center: impl Fn(f64) -> f64, var: f64) -> Staged {
    let dx = grid.spacing();
    let s = var.sqrt();
    if WIDTH * s < dx {
        return deposit_stage(grid, values, center);
    }
    let n = grid.len();
    let mut out = vec![0.0; n];
    let mut col = vec![0.0; n];
    let mut leak = 0.0;
    for (j, &v) in values.iter().enumerate() {
        let mass = grid.weight(j) * v;
        if mass == 0.0 {
            continue;
        }
        let c = center(grid.node(j));
        let inside = normal_interval((grid.lo() - c) / s, (grid.hi() - c) / s);
        leak += mass * (1.0 - inside);
        let Some((k, a, b)) = window(grid, c, WIDTH * s / dx) else {
            continue;
        };
        gaussian_profile(grid, c, var, k, a, b, &mut col);
        let total: f64 = (a..=b).map(|i| grid.weight(i) * col[i]).sum();
        if total > 0.0 {
            let scale = mass * inside / total;
            for i in a..=b {
                out[i] += scale * col[i];
            }
        }
    }
    Staged { values: out, leak }
}

/// Deterministic map `x ↦ map(x)`, with each node's mass split linearly
/// between the two nodes bracketing its image.
pub(crate) fn deposit_stage(grid: &Grid, values: &[f64], map: impl Fn(f64) -> f64) -> Staged {
    let n = grid.len();
    let dx = grid.spacing();
    let mut out = vec![0.0; n];
    let mut leak = 0.0;
    for (j, &v) in values.iter().enumerate() {
        let mass = grid.weight(j) * v;
        if mass == 0.0 {
            continue;
        }
        let mut pos = (map(grid.node(j)) - grid.lo()) / dx;
        if (pos - pos.round()).abs() < 1e-9 {
            pos = pos.round();
        }
        if !(pos >= 0.0 && pos <= (n - 1) as f64) {
            leak += mass;
            continue;
        }
        let i = (pos.floor() as usize).min(n - 2);
        let f = pos - i as f64;
        out[i] += mass * (1.0 - f) / grid.weight(i);
        out[i + 1] += mass * f / grid.weight(i + 1);
    }
    Staged { values: out, leak }
}

/// Backward step of the Proximal Sampler: `q(z|y) ∝ exp(−U(z) − (z − y)²/(2h))`,
/// normalised numerically per source node.
///
/// The conditional is the Gaussian envelope (`H` dropped) tilted by
/// `exp(−H)`, and lies within `W_∞` distance `Lh/(1 + αh)` of that
/// envelope. Envelope mass outside the grid shrunk by this shift therefore
/// bounds the true leak.
pub(crate) fn backward_stage(grid: &Grid, values: &[f64], potential: &PotentialSpec, h: f64) -> Staged {
    let a = potential.curvature()[0];
    let c = potential.center()[0];
    let q = 1.0 + a * h;
    let var = h / q;
    let s = var.sqrt();
    let shift = potential.grad_h_sup_norm() * h / q;
    let dx = grid.spacing();
    let hs: Vec<f64> = grid.nodes().map(|x| potential.h_value(core::slice::from_ref(&x))).collect();
    let hmin = hs.iter().copied().fold(f64::INFINITY, f64::min);
    let tilt: Vec<f64> = hs.iter().map(|v| (hmin - v).exp()).collect();
    let n = grid.len();
    let mut out = vec![0.0; n];
    let mut col = vec![0.0; n];
    let mut leak = 0.0;
    for (j, &v) in values.iter().enumerate() {
        let mass = grid.weight(j) * v;
        if mass == 0.0 {
            continue;
        }
        let m = (a * h * c + grid.node(j)) / q;
        let (inner_lo, inner_hi) = (grid.lo() + shift, grid.hi() - shift);
        let inside = if inner_lo < inner_hi { normal_interval((inner_lo - m) / s, (inner_hi - m) / s) } else { 0.0 };
        leak += mass * (1.0 - inside);
        let Some((k, lo, hi)) = window(grid, m, (WIDTH * s + shift) / dx) else {
            continue;
        };
        gaussian_profile(grid, m, var, k, lo, hi, &mut col);
        let total: f64 = (lo..=hi).map(|i| grid.weight(i) * col[i] * tilt[i]).sum();
        if total > 0.0 {
            let scale = mass * inside / total;
            for i in lo..=hi {
                out[i] += scale * col[i] * tilt[i];
            }
        }
    }
    Staged { values: out, leak }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::normal_pdf;

    #[test]
    fn recurrence_matches_direct_evaluation() {
        let grid = Grid::new(-5.0, 7.0, 1201).unwrap();
        let mut col = vec![0.0; grid.len()];
        let (c, var) = (0.4137, 0.3);
        let (k, a, b) = window(&grid, c, 12.0 * var.sqrt() / grid.spacing()).unwrap();
        gaussian_profile(&grid, c, var, k, a, b, &mut col);
        for (i, got) in col.iter().enumerate().take(b + 1).skip(a) {
            let x = grid.lo() + i as f64 * grid.spacing();
            let direct = (-0.5 * (x - c) * (x - c) / var).exp();
            assert!((got - direct).abs() <= 1e-10 * direct + 1e-25, "node {i}");
        }
    }

    #[test]
    fn identity_deposit_is_exact() {
        let grid = Grid::new(-3.0, 3.0, 601).unwrap();
        let vals: Vec<f64> = grid.nodes().map(|x| normal_pdf(x, 0.2, 0.5)).collect();
        let out = deposit_stage(&grid, &vals, |x| x);
        for (a, b) in out.values.iter().zip(&vals) {
            assert!((a - b).abs() <= 1e-14 * b);
        }
        assert_eq!(out.leak, 0.0);
    }
}
