//! Certificates and closed-form bounds for kernels with defective curvature.
//!
//! Three certificate types carry the hypotheses:
//!
//! * [`CurvatureCert`] `(p, K, M)`: `W_p(δ_x P, δ_y P) ≤ K|x − y| + M`.
//! * [`DefTpCert`] `(p, A, B)`: `W_p(ν, μ) ≤ sqrt(2A·KL(ν‖μ)) + B` for all `ν`.
//! * [`RteCert`] `C`: `KL(δ_x P‖δ_y P) ≤ C|x − y|²`.
//!
//! The functions here transform certificates (one step, `N` steps, Langevin
//! and Proximal Sampler specialisations) and evaluate the resulting bounds.
//! The reverse transport-entropy bounds rest on a shift-schedule
//! minimisation, solved in closed form by [`shift_opt_closed`] and
//! independently by dynamic programming in [`shift_opt_dp`].
//!
//! Mixing-window expressions ([`wmix_bound_ld`], [`wmix_bound_ps`]) hold
//! only up to a multiplicative constant depending on the precision `ε`;
//! they are returned with constant one and flagged accordingly.

#[allow(unused_imports)]
use num_traits::Float;
use alloc::vec;
use alloc::vec::Vec;
use core::mem;

use crate::error::{precondition, Result};
use crate::Extended;

/// `q^n` for integer `n`.
pub(crate) fn pow_n(q: f64, n: u64) -> f64 {
    if n <= i32::MAX as u64 {
        q.powi(n as i32)
    } else {
        q.powf(n as f64)
    }
}

/// `Σ_{i<n} q^i = (1 − qⁿ)/(1 − q)`, equal to `n` at `q = 1` and accurate
/// for `q` close to one.
pub(crate) fn geom_sum(q: f64, n: u64) -> f64 {
    if n == 0 {
        0.0
    } else if q == 1.0 {
        n as f64
    } else if q == 0.0 {
        1.0
    } else if q > 0.5 && q < 1.5 {
        -(n as f64 * (q - 1.0).ln_1p()).exp_m1() / (1.0 - q)
    } else {
        (1.0 - pow_n(q, n)) / (1.0 - q)
    }
}

fn nonneg(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(precondition(alloc::format!("{name} must be finite and >= 0")))
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(precondition(alloc::format!("{name} must be finite and > 0")))
    }
}

/// Defective curvature certificate: `W_p(δ_x P, δ_y P) ≤ K·|x − y| + M`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CurvatureCert {
    p: f64,
    k: f64,
    m: f64,
}

impl CurvatureCert {
    /// `p` may be `+∞`.
    pub fn new(p: f64, k: f64, m: f64) -> Result<Self> {
        if !(p >= 1.0) {
            return Err(precondition("order p must be >= 1"));
        }
        if !(0.0..=1.0).contains(&k) {
            return Err(precondition("K must lie in [0, 1]"));
        }
        nonneg("M", m)?;
        Ok(Self { p, k, m })
    }

    pub fn p(&self) -> f64 {
        self.p
    }
    pub fn k(&self) -> f64 {
        self.k
    }
    pub fn m(&self) -> f64 {
        self.m
    }

    /// Right-hand side `K·dist + M`.
    pub fn bound(&self, dist: f64) -> f64 {
        self.k * dist + self.m
    }

    /// Certificate for `P^N`: `(K^N, M·(1 − K^N)/(1 − K))`.
    pub fn iterate(&self, n: u64) -> Self {
        Self { p: self.p, k: pow_n(self.k, n), m: self.m * geom_sum(self.k, n) }
    }
}

/// Langevin Monte Carlo with step `h ≤ 1/β`: `K = 1 − αh`, `M = 2Lh`.
pub fn curvature_lmc(alpha: f64, beta: f64, l: f64, h: f64, p: f64) -> Result<CurvatureCert> {
    nonneg("alpha", alpha)?;
    nonneg("beta", beta)?;
    nonneg("L", l)?;
    positive("h", h)?;
    if alpha > beta {
        return Err(precondition("alpha > beta"));
    }
    if h * beta > 1.0 {
        return Err(precondition("h > 1/beta"));
    }
    CurvatureCert::new(p, 1.0 - alpha * h, 2.0 * l * h)
}

/// Proximal Sampler: `K = 1/(αh + 1)`, `M = 2Lh/(αh + 1)`.
pub fn curvature_ps(alpha: f64, l: f64, h: f64, p: f64) -> Result<CurvatureCert> {
    nonneg("alpha", alpha)?;
    nonneg("L", l)?;
    positive("h", h)?;
    let q = alpha * h + 1.0;
    CurvatureCert::new(p, 1.0 / q, 2.0 * l * h / q)
}

pub fn curvature_iterate(cert: &CurvatureCert, n: u64) -> CurvatureCert {
    cert.iterate(n)
}

/// Defective transport-entropy certificate:
/// `W_p(ν, μ) ≤ sqrt(2A·KL(ν‖μ)) + B` for every `ν`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DefTpCert {
    p: f64,
    a: f64,
    b: f64,
}

impl DefTpCert {
    pub fn new(p: f64, a: f64, b: f64) -> Result<Self> {
        if !(1.0..=2.0).contains(&p) {
            return Err(precondition("order p must lie in [1, 2]"));
        }
        nonneg("A", a)?;
        nonneg("B", b)?;
        Ok(Self { p, a, b })
    }

    /// Quadratic-cost certificate `T_2(A)` with defect `B`.
    pub fn t2(a: f64, b: f64) -> Result<Self> {
        Self::new(2.0, a, b)
    }

    pub fn p(&self) -> f64 {
        self.p
    }
    pub fn a(&self) -> f64 {
        self.a
    }
    pub fn b(&self) -> f64 {
        self.b
    }

    /// `sqrt(2A·kl) + B`, infinite when `kl` is.
    pub fn rhs(&self, kl: Extended) -> Extended {
        match kl {
            Extended::Finite(v) => Extended::Finite((2.0 * self.a * v.max(0.0)).sqrt() + self.b),
            Extended::Infinite if self.a == 0.0 => Extended::Finite(self.b),
            Extended::Infinite => Extended::Infinite,
        }
    }
}

fn same_order(a: f64, b: f64) -> Result<()> {
    if a == b {
        Ok(())
    } else {
        Err(precondition("certificates must share the same order p"))
    }
}

/// One kernel application: `μ₀ ∈ T_p(J,S)` gives `μ₀P ∈ T_p(A + K²J, KS + B + M)`.
pub fn def_tp_one_step(init: &DefTpCert, step: &DefTpCert, curv: &CurvatureCert) -> Result<DefTpCert> {
    same_order(init.p, step.p)?;
    same_order(init.p, curv.p)?;
    let k = curv.k;
    DefTpCert::new(init.p, step.a + k * k * init.a, k * init.b + step.b + curv.m)
}

/// `N` kernel applications in closed form.
pub fn def_tp_iterate(init: &DefTpCert, step: &DefTpCert, curv: &CurvatureCert, n: u64) -> Result<DefTpCert> {
    same_order(init.p, step.p)?;
    same_order(init.p, curv.p)?;
    if n == 0 {
        return Err(precondition("N >= 1"));
    }
    let k = curv.k;
    let k2 = k * k;
    DefTpCert::new(
        init.p,
        pow_n(k2, n) * init.a + step.a * geom_sum(k2, n),
        pow_n(k, n) * init.b + (step.b + curv.m) * geom_sum(k, n),
    )
}

/// A measure within `W_∞` distance `w_inf` of a `T_p(C, M)` measure
/// satisfies `T_p(C, M + 2·w_inf)`.
pub fn def_tp_winfty_shift(cert: &DefTpCert, w_inf: f64) -> Result<DefTpCert> {
    nonneg("w_inf", w_inf)?;
    DefTpCert::new(cert.p, cert.a, cert.b + 2.0 * w_inf)
}

/// Langevin dynamics at time `T` from `μ₀ ∈ T_2(J, S)`.
pub fn def_t2_ld(alpha: f64, l: f64, t: f64, j: f64, s: f64) -> Result<DefTpCert> {
    nonneg("alpha", alpha)?;
    nonneg("L", l)?;
    nonneg("J", j)?;
    nonneg("S", s)?;
    if !(t > 0.0) {
        return Err(precondition("T must be > 0"));
    }
    if alpha == 0.0 {
        if !t.is_finite() {
            return Err(precondition("T must be finite when alpha = 0"));
        }
        return DefTpCert::t2(j + 2.0 * t, s + 2.0 * l * t);
    }
    let decay = (-alpha * t).exp();
    let one_minus = -(-alpha * t).exp_m1();
    let one_minus2 = -(-2.0 * alpha * t).exp_m1();
    DefTpCert::t2(decay * decay * j + one_minus2 / alpha, decay * s + 2.0 * l * one_minus / alpha)
}

/// Proximal Sampler after `N ≥ 1` steps from `μ₀ ∈ T_2(J, S)`.
pub fn def_t2_ps(alpha: f64, l: f64, h: f64, n: u64, j: f64, s: f64) -> Result<DefTpCert> {
    nonneg("alpha", alpha)?;
    nonneg("L", l)?;
    positive("h", h)?;
    nonneg("J", j)?;
    nonneg("S", s)?;
    if n == 0 {
        return Err(precondition("N >= 1"));
    }
    let nf = n as f64;
    if alpha == 0.0 {
        return DefTpCert::t2(j + 2.0 * nf * h, s + 6.0 * nf * l * h);
    }
    // (1 + αh)^{-N} via log1p keeps precision for small αh
    let inv_n = (-nf * (alpha * h).ln_1p()).exp();
    let inv_2n = inv_n * inv_n;
    DefTpCert::t2(j * inv_2n + (1.0 - inv_2n) / alpha, s * inv_n + 6.0 * l / alpha * (1.0 - inv_n))
}

/// One-step reverse transport-entropy constant:
/// `KL(δ_x P‖δ_y P) ≤ C|x − y|²`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RteCert {
    c: f64,
}

impl RteCert {
    pub fn new(c: f64) -> Result<Self> {
        nonneg("C", c)?;
        Ok(Self { c })
    }
    pub fn c(&self) -> f64 {
        self.c
    }
}

/// Shift parameters `η_0 … η_{N−1}` (with `η_{N−1} = 1`) and the objective
/// value they achieve.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ShiftSchedule {
    pub etas: Vec<f64>,
    pub value: f64,
}

/// Closed-form minimum of `Σ ηₙ² Aₙ²` over shift schedules, where
/// `A₀ = A` and `A_{n+1} = K(1 − ηₙ)Aₙ + M`.
pub fn shift_value(n: u64, k: f64, m: f64, a: f64) -> f64 {
    if n == 1 {
        return a * a;
    }
    let nf = n as f64;
    if k == 1.0 {
        return if a >= m {
            let t = a + (nf - 1.0) * m;
            t * t / nf
        } else {
            a * a + (nf - 1.0) * m * m
        };
    }
    let kn1 = pow_n(k, n - 1);
    let g = geom_sum(k, n - 1);
    if a >= shift_threshold(n, k, m) {
        let t = kn1 * a + m * g;
        t * t / geom_sum(k * k, n)
    } else {
        a * a + m * m * g * g / geom_sum(k * k, n - 1)
    }
}

/// Regime boundary `M·K^{N−1}(1 + K)/(1 + K^{N−1})` (for `K = 1` it is `M`).
pub fn shift_threshold(n: u64, k: f64, m: f64) -> f64 {
    let kn1 = pow_n(k, n - 1);
    m * kn1 * (1.0 + k) / (1.0 + kn1)
}

/// Optimal first shift with `n` steps remaining from level `a`.
fn first_shift(n: u64, k: f64, m: f64, a: f64) -> f64 {
    if n == 1 || a == 0.0 {
        return 1.0;
    }
    let eta = if k == 1.0 {
        if a >= m {
            (a + (n as f64 - 1.0) * m) / (n as f64 * a)
        } else {
            1.0
        }
    } else if a >= shift_threshold(n, k, m) {
        let kn1 = pow_n(k, n - 1);
        kn1 * (kn1 * a + m * geom_sum(k, n - 1)) / (a * geom_sum(k * k, n))
    } else {
        1.0
    };
    eta.clamp(0.0, 1.0)
}

/// Closed-form solution of the shift problem for `0 < K ≤ 1`, with the
/// minimising schedule rebuilt by applying the optimal first shift step by
/// step.
pub fn shift_opt_closed(n: u64, k: f64, m: f64, a: f64) -> Result<ShiftSchedule> {
    if n == 0 {
        return Err(precondition("N >= 1"));
    }
    if !(k > 0.0 && k <= 1.0) {
        return Err(precondition("K must lie in (0, 1]"));
    }
    nonneg("M", m)?;
    nonneg("A", a)?;
    let mut etas = Vec::with_capacity(n as usize);
    let mut level = a;
    for step in 0..n {
        let eta = first_shift(n - step, k, m, level);
        etas.push(eta);
        level = k * (1.0 - eta) * level + m;
    }
    Ok(ShiftSchedule { etas, value: shift_value(n, k, m, a) })
}

/// Shift objective evaluated term by term from its explicit expansion
/// `Σₙ ηₙ² (A Kⁿ Π_{k<n}(1 − η_k) + M Σ_{k=1}^{n} K^{n−k} Π_{j=k}^{n−1}(1 − η_j))²`.
pub fn shift_objective(a: f64, k: f64, m: f64, etas: &[f64]) -> f64 {
    let keep = |from: usize, to: usize| -> f64 { etas[from..to].iter().map(|e| 1.0 - e).product() };
    let mut total = 0.0;
    for (n, &eta) in etas.iter().enumerate() {
        let lead = a * pow_n(k, n as u64) * keep(0, n);
        let defect: f64 = (1..=n).map(|j| pow_n(k, (n - j) as u64) * keep(j, n)).sum::<f64>() * m;
        let level = lead + defect;
        total += eta * eta * level * level;
    }
    total
}

pub const DP_A_GRID: usize = 2001;
pub const DP_ETA_GRID: usize = 1001;

/// Value iteration for the shift problem: `S(1, x) = x²` and
/// `S(r, x) = min_η η²x² + S(r − 1, K(1 − η)x + M)` on a level grid with
/// linear interpolation and an exhaustive `η` grid.
///
/// The level grid has a node at zero followed by geometrically spaced
/// nodes up to `A + N·M/K`, so interpolation error stays relative even
/// where `S` is quadratic near the origin.
pub fn shift_opt_dp(n: u64, k: f64, m: f64, a: f64, a_grid_size: usize, eta_grid_size: usize) -> Result<f64> {
    if n == 0 {
        return Err(precondition("N >= 1"));
    }
    if a_grid_size < 101 || eta_grid_size < 101 {
        return Err(precondition("grid sizes must be >= 101"));
    }
    if !(0.0..=1.0).contains(&k) {
        return Err(precondition("K must lie in [0, 1]"));
    }
    nonneg("M", m)?;
    nonneg("A", a)?;
    if n == 1 {
        return Ok(a * a);
    }
    let nf = n as f64;
    let a_max = if k > 0.0 { a + nf * m / k } else { a + nf * m };
    if a_max == 0.0 {
        return Ok(0.0);
    }
    let floor = if k > 0.0 { (pow_n(k, n - 1) * 1e-3).clamp(1e-200, 1e-6) } else { 1e-6 };
    let nodes = level_nodes(a_max, floor, a_grid_size);
    let etas: Vec<f64> = (0..eta_grid_size).map(|i| i as f64 / (eta_grid_size - 1) as f64).collect();

    let mut table: Vec<f64> = nodes.iter().map(|x| x * x).collect();
    let mut next = vec![0.0; nodes.len()];
    for _ in 2..n {
        for (slot, &x) in next.iter_mut().zip(&nodes) {
            *slot = stage_min(x, k, m, &etas, &nodes, &table);
        }
        mem::swap(&mut table, &mut next);
    }
    Ok(stage_min(a, k, m, &etas, &nodes, &table))
}

fn level_nodes(a_max: f64, floor: f64, size: usize) -> Vec<f64> {
    let geo = size - 1;
    let lo = a_max * floor;
    let ratio = (a_max / lo).ln() / (geo - 1) as f64;
    let mut nodes = Vec::with_capacity(size);
    nodes.push(0.0);
    nodes.extend((0..geo - 1).map(|i| lo * (ratio * i as f64).exp()));
    nodes.push(a_max);
    nodes
}

fn stage_min(x: f64, k: f64, m: f64, etas: &[f64], nodes: &[f64], table: &[f64]) -> f64 {
    let last = nodes.len() - 2;
    let locate = |y: f64| nodes.partition_point(|&v| v <= y).saturating_sub(1).min(last);
    // y decreases as η grows, so the bracket only ever moves left
    let mut j = locate(k * x + m);
    let mut best = f64::INFINITY;
    for &eta in etas {
        let y = k * (1.0 - eta) * x + m;
        while j > 0 && nodes[j] > y {
            j -= 1;
        }
        let t = (y - nodes[j]) / (nodes[j + 1] - nodes[j]);
        let v = eta * eta * x * x + table[j] + t * (table[j + 1] - table[j]);
        if v < best {
            best = v;
        }
    }
    best
}

/// Reverse transport-entropy bound after `N` steps: the exact two-regime
/// value `C·S(N, W₂)` and its simplified `2C` majorant.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RteBound {
    pub value: f64,
    pub majorant: f64,
}

pub fn rte_discrete(rte: &RteCert, curv: &CurvatureCert, n: u64, w2: f64) -> Result<RteBound> {
    if n == 0 {
        return Err(precondition("N >= 1"));
    }
    if curv.p != 2.0 {
        return Err(precondition("curvature certificate must have p = 2"));
    }
    nonneg("w2", w2)?;
    let (c, k, m) = (rte.c, curv.k, curv.m);
    let s = if k > 0.0 {
        shift_value(n, k, m, w2)
    } else if n == 1 {
        w2 * w2
    } else {
        // K = 0: every shifted level is reset to M after one step
        m * m
    };
    let majorant_core = if k == 1.0 {
        let t = w2 + (n as f64 - 1.0) * m;
        t * t / n as f64
    } else {
        let t = pow_n(k, n - 1) * w2 + m * geom_sum(k, n - 1);
        t * t / geom_sum(k * k, n)
    };
    Ok(RteBound { value: c * s, majorant: 2.0 * c * majorant_core })
}

/// Langevin dynamics: `KL(μP_T‖νP_T)` bound in terms of `W₂(μ, ν)`.
pub fn rte_ld(alpha: f64, l: f64, t: f64, w2: f64) -> Result<f64> {
    nonneg("alpha", alpha)?;
    nonneg("L", l)?;
    positive("T", t)?;
    nonneg("w2", w2)?;
    if alpha == 0.0 {
        let v = w2 + 2.0 * l * t;
        return Ok(v * v / (4.0 * t));
    }
    let decay = (-alpha * t).exp();
    let one_minus = -(-alpha * t).exp_m1();
    let one_minus2 = -(-2.0 * alpha * t).exp_m1();
    let v = decay * w2 + 2.0 * l / alpha * one_minus;
    Ok(alpha / (2.0 * one_minus2) * v * v)
}

/// Proximal Sampler: `KL(μP^N‖νP^N)` bound in terms of `W₂(μ, ν)`.
pub fn rte_ps(alpha: f64, l: f64, h: f64, n: u64, w2: f64) -> Result<f64> {
    nonneg("alpha", alpha)?;
    nonneg("L", l)?;
    positive("h", h)?;
    nonneg("w2", w2)?;
    if n == 0 {
        return Err(precondition("N >= 1"));
    }
    let nf = n as f64;
    if alpha == 0.0 {
        let v = w2 + 2.0 * l * nf * h;
        return Ok(v * v / (2.0 * nf * h));
    }
    let lq = (alpha * h).ln_1p();
    let grow_2n = (2.0 * nf * lq).exp_m1();
    let grow_n1 = ((nf - 1.0) * lq).exp_m1();
    let v = w2 + 2.0 * l / alpha * grow_n1;
    Ok(alpha * (2.0 + alpha * h) / grow_2n * v * v)
}

/// W–TV transport inequality:
/// `W_p ≤ (√C₁ + √C₂)·sqrt(2 log(1/(1 − tv))) + M₁ + M₂`.
pub fn wtv_bound(c1: &DefTpCert, c2: &DefTpCert, tv: f64) -> Result<Extended> {
    same_order(c1.p, c2.p)?;
    if !(0.0..=1.0).contains(&tv) {
        return Err(precondition("tv must lie in [0, 1]"));
    }
    let defect = c1.b + c2.b;
    let scale = c1.a.sqrt() + c2.a.sqrt();
    if scale == 0.0 {
        return Ok(Extended::Finite(defect));
    }
    if tv == 1.0 {
        return Ok(Extended::Infinite);
    }
    let log_term = -(-tv).ln_1p();
    Ok(Extended::Finite(scale * (2.0 * log_term).sqrt() + defect))
}

/// Poincaré constant of a log-Lipschitz perturbation of an
/// `α`-log-concave measure: `(1/α)·exp(L²/α + 4L/√α)`.
pub fn poincare_bound(alpha: f64, l: f64) -> Result<f64> {
    positive("alpha", alpha)?;
    nonneg("L", l)?;
    Ok((l * l / alpha + 4.0 * l / alpha.sqrt()).exp() / alpha)
}

/// Mixing-window expression, valid up to an `ε`-dependent constant.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct WindowBound {
    /// Expression in terms of the supplied Poincaré constant.
    pub value: f64,
    /// Same bound with the Poincaré constant replaced by [`poincare_bound`].
    pub poincare_free: f64,
    pub up_to_constant: bool,
}

/// Langevin dynamics from `μ₀ ∈ T_2(J, S)`, with `t0 = t_mix(1 − ε)`.
pub fn wmix_bound_ld(alpha: f64, l: f64, cp: f64, t0: f64, j: f64, s: f64) -> Result<WindowBound> {
    positive("alpha", alpha)?;
    nonneg("L", l)?;
    nonneg("cp", cp)?;
    nonneg("t0", t0)?;
    nonneg("J", j)?;
    nonneg("S", s)?;
    let init = (-alpha * t0).exp() * (j.sqrt() + s);
    let value = cp * (l * l / alpha + 1.0) + cp.sqrt() * (init + 1.0 / alpha.sqrt() + l / alpha);
    let sa = alpha.sqrt();
    let poincare_free = (l * l / alpha + 4.0 * l / sa).exp() / alpha
        * (1.0 + l * l / alpha + l / sa + init * sa);
    Ok(WindowBound { value, poincare_free, up_to_constant: true })
}

/// Proximal Sampler from `μ₀ ∈ T_2(1/α, 6L/α)`, using `ĉ = 1 + cp/h`.
pub fn wmix_bound_ps(alpha: f64, l: f64, h: f64, cp: f64) -> Result<WindowBound> {
    positive("alpha", alpha)?;
    nonneg("L", l)?;
    positive("h", h)?;
    nonneg("cp", cp)?;
    let expr = |cp: f64| {
        let c_hat = 1.0 + cp / h;
        let q = 1.0 + alpha * h;
        c_hat * (1.0 + l * l * q / alpha) + (c_hat * q / h * (1.0 / alpha + l * l / (alpha * alpha))).sqrt()
    };
    Ok(WindowBound {
        value: expr(cp),
        poincare_free: expr(poincare_bound(alpha, l)?),
        up_to_constant: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    const TOL: f64 = 1e-12;

    #[test]
    fn curvature_lmc_examples() {
        let c = curvature_lmc(0.0, 1.0, 0.0, 0.5, 2.0).unwrap();
        assert_eq!((c.k(), c.m()), (1.0, 0.0));
        let c = curvature_lmc(1.0, 1.0, 0.5, 0.1, 2.0).unwrap();
        assert_relative_eq!(c.k(), 0.9, max_relative = TOL);
        assert_relative_eq!(c.m(), 0.1, max_relative = TOL);
        let c = curvature_lmc(1.0, 1.0, 0.0, 1.0, 2.0).unwrap();
        assert_eq!((c.k(), c.m()), (0.0, 0.0));
        let err = curvature_lmc(1.0, 1.0, 0.0, 2.0, 2.0).unwrap_err();
        assert_eq!(err, crate::Error::Precondition("h > 1/beta".into()));
    }

    #[test]
    fn curvature_ps_examples() {
        let c = curvature_ps(0.0, 0.3, 0.5, 2.0).unwrap();
        assert_eq!(c.k(), 1.0);
        assert_relative_eq!(c.m(), 0.3, max_relative = TOL);
        let c = curvature_ps(1.0, 0.5, 1.0, 2.0).unwrap();
        assert_eq!((c.k(), c.m()), (0.5, 0.5));
        let c = curvature_ps(1e12, 0.0, 1.0, 2.0).unwrap();
        assert!(c.k() < 1e-11 && c.m() == 0.0);
    }

    #[test]
    fn curvature_iterate_examples() {
        let c = CurvatureCert::new(2.0, 0.5, 0.1).unwrap();
        assert_eq!(c.iterate(0), CurvatureCert::new(2.0, 1.0, 0.0).unwrap());
        let two = c.iterate(2);
        assert_relative_eq!(two.k(), 0.25, max_relative = TOL);
        assert_relative_eq!(two.m(), 0.15, max_relative = TOL);
        let flat = CurvatureCert::new(2.0, 1.0, 0.1).unwrap().iterate(5);
        assert_eq!(flat.k(), 1.0);
        assert_relative_eq!(flat.m(), 0.5, max_relative = TOL);
    }

    #[test]
    fn def_tp_one_step_examples() {
        let step = DefTpCert::t2(0.5, 0.2).unwrap();
        let curv = CurvatureCert::new(2.0, 0.7, 0.1).unwrap();
        let dirac = DefTpCert::t2(0.0, 0.0).unwrap();
        let out = def_tp_one_step(&dirac, &step, &curv).unwrap();
        assert_relative_eq!(out.a(), 0.5);
        assert_relative_eq!(out.b(), 0.3, max_relative = TOL);

        let init = DefTpCert::t2(1.0, 0.0).unwrap();
        let step = DefTpCert::t2(0.5, 0.0).unwrap();
        let curv = CurvatureCert::new(2.0, 0.5, 0.1).unwrap();
        let out = def_tp_one_step(&init, &step, &curv).unwrap();
        assert_relative_eq!(out.a(), 0.75, max_relative = TOL);
        assert_relative_eq!(out.b(), 0.1, max_relative = TOL);

        let forget = CurvatureCert::new(2.0, 0.0, 0.1).unwrap();
        let out = def_tp_one_step(&DefTpCert::t2(3.0, 4.0).unwrap(), &step, &forget).unwrap();
        assert_eq!((out.a(), out.b()), (0.5, 0.1));

        let p1 = DefTpCert::new(1.0, 1.0, 0.0).unwrap();
        assert!(def_tp_one_step(&p1, &step, &curv).is_err());
    }

    #[test]
    fn def_tp_iterate_examples() {
        let init = DefTpCert::t2(1.0, 0.0).unwrap();
        let step = DefTpCert::t2(0.5, 0.0).unwrap();
        let curv = CurvatureCert::new(2.0, 0.5, 0.1).unwrap();
        assert_eq!(
            def_tp_iterate(&init, &step, &curv, 1).unwrap(),
            def_tp_one_step(&init, &step, &curv).unwrap()
        );
        let two = def_tp_iterate(&init, &step, &curv, 2).unwrap();
        assert_relative_eq!(two.a(), 0.6875, max_relative = TOL);
        assert_relative_eq!(two.b(), 0.15, max_relative = TOL);

        let flat = CurvatureCert::new(2.0, 1.0, 0.1).unwrap();
        let init = DefTpCert::t2(1.0, 0.2).unwrap();
        let step = DefTpCert::t2(0.5, 0.05).unwrap();
        let out = def_tp_iterate(&init, &step, &flat, 4).unwrap();
        assert_relative_eq!(out.a(), 1.0 + 4.0 * 0.5, max_relative = TOL);
        assert_relative_eq!(out.b(), 0.2 + 4.0 * 0.15, max_relative = TOL);
    }

    #[test]
    fn winfty_shift_examples() {
        let c = DefTpCert::t2(1.0, 0.0).unwrap();
        assert_eq!(def_tp_winfty_shift(&c, 0.0).unwrap(), c);
        assert_eq!(def_tp_winfty_shift(&c, 0.5).unwrap(), DefTpCert::t2(1.0, 1.0).unwrap());
        // stationary measure of an α-log-concave V perturbed by H: (1/α, 2L/α)
        let (alpha, l) = (2.0, 0.3);
        let pi = def_tp_winfty_shift(&DefTpCert::t2(1.0 / alpha, 0.0).unwrap(), l / alpha).unwrap();
        assert_relative_eq!(pi.a(), 0.5);
        assert_relative_eq!(pi.b(), 0.3, max_relative = TOL);
    }

    #[test]
    fn def_t2_ld_examples() {
        let out = def_t2_ld(1.0, 0.0, 800.0, 5.0, 3.0).unwrap();
        assert_relative_eq!(out.a(), 1.0, max_relative = TOL);
        assert!(out.b() < 1e-300);
        let out = def_t2_ld(0.0, 1.0, 2.0, 0.0, 0.0).unwrap();
        assert_eq!((out.a(), out.b()), (4.0, 4.0));
        let out = def_t2_ld(1.0, 0.7, 1e-14, 0.3, 0.2).unwrap();
        assert_relative_eq!(out.a(), 0.3, max_relative = 1e-12);
        assert_relative_eq!(out.b(), 0.2, max_relative = 1e-12);
    }

    #[test]
    fn def_t2_ps_examples() {
        let out = def_t2_ps(0.0, 0.5, 0.25, 3, 0.0, 0.0).unwrap();
        assert_relative_eq!(out.a(), 1.5, max_relative = TOL);
        assert_relative_eq!(out.b(), 6.0 * 3.0 * 0.5 * 0.25, max_relative = TOL);
        let out = def_t2_ps(1.0, 0.5, 1.0, 1, 0.0, 0.0).unwrap();
        assert_relative_eq!(out.a(), 0.75, max_relative = TOL);
        assert_relative_eq!(out.b(), 1.5, max_relative = TOL);
        let out = def_t2_ps(2.0, 0.5, 1.0, 2000, 7.0, 9.0).unwrap();
        assert_relative_eq!(out.a(), 0.5, max_relative = TOL);
        assert_relative_eq!(out.b(), 1.5, max_relative = TOL);
    }

    #[test]
    fn def_t2_ps_is_the_iterated_one_step_certificate() {
        // forward Gaussian step ∈ T2(h, 0); backward step adds the W∞ shift;
        // composing gives the one-step PS certificate, then iterate.
        for &(alpha, l, h) in &[(1.0, 0.5, 1.0), (0.3, 0.2, 0.7), (2.0, 1.0, 0.05)] {
            let q: f64 = 1.0 + alpha * h;
            let fwd = DefTpCert::t2(h, 0.0).unwrap();
            let bwd = def_tp_winfty_shift(&DefTpCert::t2(h / q, 0.0).unwrap(), l * h / q).unwrap();
            let back_curv = CurvatureCert::new(2.0, 1.0 / q, 2.0 * l * h / q).unwrap();
            let one = def_tp_one_step(&fwd, &bwd, &back_curv).unwrap();
            assert_relative_eq!(one.a(), h * (2.0 + alpha * h) / (q * q), max_relative = TOL);
            assert_relative_eq!(one.b(), 4.0 * l * h / q, max_relative = TOL);
            let curv = curvature_ps(alpha, l, h, 2.0).unwrap();
            let init = DefTpCert::t2(0.4, 0.1).unwrap();
            for n in [1u64, 2, 5, 17] {
                let it = def_tp_iterate(&init, &one, &curv, n).unwrap();
                let closed = def_t2_ps(alpha, l, h, n, 0.4, 0.1).unwrap();
                assert_relative_eq!(it.a(), closed.a(), max_relative = 1e-12);
                assert_relative_eq!(it.b(), closed.b(), max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn shift_closed_examples() {
        let s = shift_opt_closed(1, 0.5, 0.3, 1.7).unwrap();
        assert_eq!(s.etas, vec![1.0]);
        assert_relative_eq!(s.value, 1.7 * 1.7, max_relative = TOL);
        let s = shift_opt_closed(4, 1.0, 0.0, 1.0).unwrap();
        assert_relative_eq!(s.value, 0.25, max_relative = TOL);
        let s = shift_opt_closed(3, 0.5, 0.1, 1.0).unwrap();
        assert_relative_eq!(s.value, 0.121_904_761_904_761_9, max_relative = 1e-12);
        assert!(shift_opt_closed(3, 0.0, 0.1, 1.0).is_err());
    }

    #[test]
    fn shift_schedule_reproduces_value() {
        for &(n, k, m, a) in &[(3u64, 0.5, 0.1, 1.0), (6, 1.0, 0.1, 0.05), (5, 0.9, 1.0, 10.0), (2, 0.25, 1.0, 0.0)] {
            let s = shift_opt_closed(n, k, m, a).unwrap();
            assert_eq!(*s.etas.last().unwrap(), 1.0);
            assert_relative_eq!(shift_objective(a, k, m, &s.etas), s.value, max_relative = 1e-12);
        }
    }

    #[test]
    fn shift_regimes_meet_at_threshold() {
        for &k in &[0.25, 0.5, 0.9, 1.0] {
            for n in 2..9u64 {
                let m = 0.37;
                let thr = shift_threshold(n, k, m);
                let hi = shift_value(n, k, m, thr);
                let below = thr * (1.0 - 1e-15);
                let lo = shift_value(n, k, m, below);
                assert_relative_eq!(hi, lo, max_relative = 1e-9);
            }
        }
    }

    #[test]
    fn dp_spot_values() {
        assert_eq!(shift_opt_dp(1, 0.5, 0.2, 1.3, 101, 101).unwrap(), 1.3 * 1.3);
        let dp = shift_opt_dp(3, 0.5, 0.1, 1.0, DP_A_GRID, DP_ETA_GRID).unwrap();
        assert_relative_eq!(dp, 0.121_904_761_904_761_9, max_relative = 1e-3);
        assert!(shift_opt_dp(3, 0.5, 0.1, 1.0, 100, 101).is_err());
    }

    #[test]
    fn dp_eta_refinement_never_increases() {
        for &(n, k, m, a) in &[(4u64, 0.5, 0.1, 1.0), (5, 1.0, 0.1, 0.03), (3, 0.9, 1.0, 10.0)] {
            let coarse = shift_opt_dp(n, k, m, a, 301, 201).unwrap();
            let fine = shift_opt_dp(n, k, m, a, 301, 401).unwrap();
            assert!(fine <= coarse, "{fine} > {coarse}");
        }
    }

    #[test]
    fn zero_curvature_factor_matches_dp() {
        let curv = CurvatureCert::new(2.0, 0.0, 0.3).unwrap();
        let rte = RteCert::new(2.0).unwrap();
        for n in 1..6u64 {
            let exact = rte_discrete(&rte, &curv, n, 0.8).unwrap();
            let dp = shift_opt_dp(n, 0.0, 0.3, 0.8, DP_A_GRID, DP_ETA_GRID).unwrap();
            assert_relative_eq!(exact.value, 2.0 * dp, max_relative = 1e-4);
            assert!(exact.value <= exact.majorant);
        }
    }

    #[test]
    fn rte_discrete_examples() {
        let rte = RteCert::new(1.0).unwrap();
        let flat = CurvatureCert::new(2.0, 1.0, 0.0).unwrap();
        let b = rte_discrete(&rte, &flat, 4, 2.0).unwrap();
        assert_relative_eq!(b.value, 1.0, max_relative = TOL);
        let defect = CurvatureCert::new(2.0, 1.0, 0.1).unwrap();
        let b = rte_discrete(&rte, &defect, 2, 0.05).unwrap();
        assert_relative_eq!(b.value, 0.0125, max_relative = TOL);
        let b = rte_discrete(&rte, &flat, 3, 0.0).unwrap();
        assert_eq!(b.value, 0.0);
        let p1 = CurvatureCert::new(1.0, 1.0, 0.0).unwrap();
        assert!(rte_discrete(&rte, &p1, 3, 1.0).is_err());
    }

    #[test]
    fn rte_ld_examples() {
        assert_relative_eq!(rte_ld(0.0, 0.0, 0.25, 1.0).unwrap(), 1.0, max_relative = TOL);
        let (alpha, t, w) = (1.3, 0.7, 0.9);
        let coeff = alpha * (-2.0 * alpha * t).exp() / (2.0 * (1.0 - (-2.0 * alpha * t).exp()));
        assert_relative_eq!(rte_ld(alpha, 0.0, t, w).unwrap(), coeff * w * w, max_relative = 1e-12);
        assert_eq!(rte_ld(1.0, 0.0, 2.0, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn rte_ps_examples() {
        assert_relative_eq!(rte_ps(0.0, 0.0, 0.5, 1, 1.0).unwrap(), 1.0, max_relative = TOL);
        let (alpha, h, w) = (0.8, 0.3, 1.7);
        let expect = alpha * (2.0 + alpha * h) / ((1.0 + alpha * h).powi(2) - 1.0) * w * w;
        assert_relative_eq!(rte_ps(alpha, 0.0, h, 1, w).unwrap(), expect, max_relative = 1e-12);
        assert_eq!(rte_ps(1.0, 0.0, 1.0, 4, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn wtv_examples() {
        let zero = DefTpCert::t2(0.0, 0.2).unwrap();
        let other = DefTpCert::t2(0.0, 0.3).unwrap();
        for tv in [0.0, 0.3, 0.999] {
            assert_eq!(wtv_bound(&zero, &other, tv).unwrap(), Extended::Finite(0.5));
        }
        let unit = DefTpCert::t2(1.0, 0.0).unwrap();
        let v = wtv_bound(&unit, &unit, 1.0 - (-1.0f64).exp()).unwrap().finite().unwrap();
        assert_relative_eq!(v, 2.0 * 2.0f64.sqrt(), max_relative = 1e-12);
        let c = DefTpCert::t2(1.0, 0.4).unwrap();
        assert_eq!(wtv_bound(&c, &c, 0.0).unwrap(), Extended::Finite(0.8));
        assert_eq!(wtv_bound(&unit, &unit, 1.0).unwrap(), Extended::Infinite);
    }

    #[test]
    fn poincare_examples() {
        assert_eq!(poincare_bound(1.0, 0.0).unwrap(), 1.0);
        assert_relative_eq!(poincare_bound(1.0, 1.0).unwrap(), 148.413_159_102_576_6, max_relative = 1e-12);
        let mut prev = 0.0;
        for i in 0..20 {
            let v = poincare_bound(0.7, i as f64 * 0.1).unwrap();
            assert!(v >= prev);
            prev = v;
        }
        assert!(poincare_bound(0.0, 1.0).is_err());
    }

    #[test]
    fn wmix_examples() {
        let b = wmix_bound_ld(1.0, 0.0, 1.0, 0.0, 0.0, 0.0).unwrap();
        assert_relative_eq!(b.value, 2.0, max_relative = TOL);
        assert!(b.up_to_constant);
        let (alpha, cp) = (2.5, 0.7);
        let b = wmix_bound_ld(alpha, 0.0, cp, 1e3, 4.0, 1.0).unwrap();
        assert_relative_eq!(b.value, cp + (cp / alpha).sqrt(), max_relative = 1e-12);
        let mut prev = f64::INFINITY;
        for t0 in 0..10 {
            let v = wmix_bound_ld(1.0, 0.5, 2.0, t0 as f64, 3.0, 1.0).unwrap();
            assert!(v.value <= prev && v.poincare_free.is_finite());
            prev = v.value;
        }
        let b = wmix_bound_ps(1.0, 0.0, 1.0, 1.0).unwrap();
        assert_relative_eq!(b.value, 4.0, max_relative = TOL);
        let mut prev = 0.0;
        for i in 0..10 {
            let v = wmix_bound_ps(1.0, i as f64 * 0.2, 0.5, 1.5).unwrap().value;
            assert!(v > prev);
            prev = v;
        }
    }

    #[test]
    fn geom_sum_is_stable_near_one() {
        assert_eq!(geom_sum(1.0, 7), 7.0);
        assert_eq!(geom_sum(0.0, 7), 1.0);
        assert_relative_eq!(geom_sum(0.5, 3), 1.75, max_relative = TOL);
        let q = 1.0 - 1e-9;
        assert_relative_eq!(geom_sum(q, 1000), 1000.0 - 1e-9 * 499_500.0, max_relative = 1e-12);
    }
}
