//! Relative entropy and total variation, in closed form for Gaussians and
//! by trapezoid quadrature on a common grid.

#[allow(unused_imports)]
use num_traits::Float;
use core::f64::consts::SQRT_2;

use crate::error::{check_dim, precondition, Result};
use crate::model::{GaussianMeasure, GridDensity};
use crate::special::normal_interval;
use crate::Extended;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum DivergenceKind {
    Kl,
    Tv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum DivergenceMethod {
    GaussianClosedForm,
    GridQuadrature,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DivergenceResult {
    pub kind: DivergenceKind,
    pub value: Extended,
    pub method: DivergenceMethod,
}

impl DivergenceResult {
    fn kl(value: Extended, method: DivergenceMethod) -> Self {
        Self { kind: DivergenceKind::Kl, value, method }
    }
    fn tv(value: f64, method: DivergenceMethod) -> Self {
        Self { kind: DivergenceKind::Tv, value: Extended::Finite(value.clamp(0.0, 1.0)), method }
    }
}

/// `KL(g1‖g2)` summed over coordinates. Point masses give `+∞` unless the
/// two coordinates coincide.
pub fn kl_gaussian(g1: &GaussianMeasure, g2: &GaussianMeasure) -> Result<DivergenceResult> {
    check_dim(g1.dim(), g2.dim())?;
    let mut total = 0.0;
    for i in 0..g1.dim() {
        let (m1, v1) = (g1.mean()[i], g1.var()[i]);
        let (m2, v2) = (g2.mean()[i], g2.var()[i]);
        if v2 == 0.0 || v1 == 0.0 {
            if v1 == v2 && m1 == m2 {
                continue;
            }
            return Ok(DivergenceResult::kl(Extended::Infinite, DivergenceMethod::GaussianClosedForm));
        }
        let dm = m1 - m2;
        let r = v1 / v2;
        total += 0.5 * (r - 1.0 - r.ln()) + 0.5 * dm * dm / v2;
    }
    Ok(DivergenceResult::kl(Extended::Finite(total.max(0.0)), DivergenceMethod::GaussianClosedForm))
}

/// Trapezoid quadrature of `r1·log(r1/r2)` with `0·log 0 = 0`; `+∞` when
/// `r1 > 0` at a node where `r2 = 0`.
pub fn kl_grid(r1: &GridDensity, r2: &GridDensity) -> Result<DivergenceResult> {
    r1.ensure_same_grid(r2)?;
    let mut integrand = alloc::vec::Vec::with_capacity(r1.values().len());
    for (&a, &b) in r1.values().iter().zip(r2.values()) {
        if a == 0.0 {
            integrand.push(0.0);
        } else if b == 0.0 {
            return Ok(DivergenceResult::kl(Extended::Infinite, DivergenceMethod::GridQuadrature));
        } else {
            integrand.push(a * (a / b).ln());
        }
    }
    let v = r1.grid().trapezoid(&integrand);
    Ok(DivergenceResult::kl(Extended::Finite(v.max(0.0)), DivergenceMethod::GridQuadrature))
}

/// Half the trapezoid L1 distance between the two densities.
pub fn tv_grid(r1: &GridDensity, r2: &GridDensity) -> Result<DivergenceResult> {
    r1.ensure_same_grid(r2)?;
    let diff: alloc::vec::Vec<f64> =
        r1.values().iter().zip(r2.values()).map(|(a, b)| (a - b).abs()).collect();
    Ok(DivergenceResult::tv(0.5 * r1.grid().trapezoid(&diff), DivergenceMethod::GridQuadrature))
}

/// `2Φ(|m1 − m2|/(2σ)) − 1`, evaluated as `erf(|m1 − m2|/(2√2 σ))`.
pub fn tv_gaussian_equal_var_1d(m1: f64, m2: f64, sigma: f64) -> Result<DivergenceResult> {
    if !(sigma > 0.0) {
        return Err(precondition("sigma must be > 0"));
    }
    let z = (m1 - m2).abs() / (2.0 * sigma);
    Ok(DivergenceResult::tv(libm::erf(z / SQRT_2), DivergenceMethod::GaussianClosedForm))
}

/// TV between two univariate Gaussians, possibly with different variances.
/// The set where the narrower density dominates is an interval bounded by
/// the two density crossings.
pub fn tv_gaussian_1d(g1: &GaussianMeasure, g2: &GaussianMeasure) -> Result<DivergenceResult> {
    check_dim(1, g1.dim())?;
    check_dim(1, g2.dim())?;
    let (m1, v1, m2, v2) = (g1.mean()[0], g1.var()[0], g2.mean()[0], g2.var()[0]);
    if v1 == 0.0 || v2 == 0.0 {
        let same = v1 == v2 && m1 == m2;
        return Ok(DivergenceResult::tv(if same { 0.0 } else { 1.0 }, DivergenceMethod::GaussianClosedForm));
    }
    if v1 == v2 {
        return tv_gaussian_equal_var_1d(m1, m2, v1.sqrt());
    }
    // narrow (n) vs wide (w)
    let ((mn, vn), (mw, vw)) = if v1 < v2 { ((m1, v1), (m2, v2)) } else { ((m2, v2), (m1, v1)) };
    // log p_n − log p_w = a x² + b x + c with a < 0
    let a = 0.5 / vw - 0.5 / vn;
    let b = mn / vn - mw / vw;
    let c = 0.5 * mw * mw / vw - 0.5 * mn * mn / vn + 0.5 * (vw / vn).ln();
    let disc = (b * b - 4.0 * a * c).max(0.0).sqrt();
    let q = -0.5 * (b + b.signum() * disc);
    let (r1, r2) = if q == 0.0 {
        let r = (-c / a).max(0.0).sqrt();
        (-r, r)
    } else {
        let (x1, x2) = (q / a, c / q);
        (x1.min(x2), x1.max(x2))
    };
    let (sn, sw) = (vn.sqrt(), vw.sqrt());
    let pn = normal_interval((r1 - mn) / sn, (r2 - mn) / sn);
    let pw = normal_interval((r1 - mw) / sw, (r2 - mw) / sw);
    Ok(DivergenceResult::tv(pn - pw, DivergenceMethod::GaussianClosedForm))
}
