//! The acceptance suite: one check per numbered criterion, shared by the
//! `selftest` subcommand and the integration tests.

use std::time::Instant;

use curvlab_core::bounds::*;
use curvlab_core::divergences::{tv_gaussian_1d, tv_gaussian_equal_var_1d, tv_grid};
use curvlab_core::kernels::{gaussian_pushforward, grid_pushforward, BackwardMethod, KernelSpec};
use curvlab_core::model::{GaussianMeasure, Grid, GridDensity, Perturbation, PotentialSpec};
use curvlab_core::rng::stream;
use curvlab_core::transport::w2_gaussian;
use rand::Rng;
use serde::Serialize;

use crate::error::Result;
use crate::harness::*;
use crate::report::{csv_bytes, Artifact};

pub const DEFAULT_SEED: u64 = 20240611;

#[derive(Debug, Clone, Serialize)]
pub struct Criterion {
    pub id: u8,
    pub title: &'static str,
    pub pass: bool,
    pub detail: String,
    /// Wall-clock seconds; kept out of emitted artifacts.
    #[serde(skip)]
    pub seconds: f64,
    /// Wall-clock budget, when the criterion has one.
    pub budget: Option<f64>,
}

impl Criterion {
    pub fn line(&self) -> String {
        format!(
            "[{}] criterion {:>2} {}: {} ({:.2} s{})",
            if self.pass { "PASS" } else { "FAIL" },
            self.id,
            self.title,
            self.detail,
            self.seconds,
            self.budget.map(|b| format!(" / {b} s budget")).unwrap_or_default()
        )
    }
}

#[derive(Debug, Default)]
pub struct Outcome {
    pub pass: bool,
    pub detail: String,
    pub reports: Vec<VerificationReport>,
    pub artifacts: Vec<Artifact>,
}

impl Outcome {
    fn new(pass: bool, detail: String) -> Self {
        Self { pass, detail, ..Self::default() }
    }
}

fn timed(id: u8, title: &'static str, budget: Option<f64>, f: impl FnOnce() -> Result<Outcome>) -> (Criterion, Outcome) {
    let start = Instant::now();
    let outcome = f().unwrap_or_else(|e| Outcome::new(false, format!("error: {e}")));
    let seconds = start.elapsed().as_secs_f64();
    let within = budget.is_none_or(|b| seconds < b);
    let detail = if within { outcome.detail.clone() } else { format!("{} [over budget]", outcome.detail) };
    (Criterion { id, title, pass: outcome.pass && within, detail, seconds, budget }, outcome)
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-12)
}

fn summarize(reports: &[VerificationReport]) -> (bool, String) {
    let cases: usize = reports.iter().map(|r| r.records.len()).sum();
    let failed: usize = reports.iter().map(|r| r.failed).sum();
    let slack = reports.iter().map(|r| r.worst_slack()).fold(f64::INFINITY, f64::min);
    (failed == 0, format!("{} of {cases} cases pass, worst slack {slack:.3e}", cases - failed))
}

pub const SWEEP_N: std::ops::RangeInclusive<u64> = 1..=8;
pub const SWEEP_K: [f64; 4] = [0.25, 0.5, 0.9, 1.0];
pub const SWEEP_M: [f64; 3] = [0.0, 0.1, 1.0];
pub const SWEEP_A: [f64; 4] = [0.0, 0.03, 1.0, 10.0];

fn sweep() -> impl Iterator<Item = (u64, f64, f64, f64)> {
    SWEEP_N.flat_map(|n| {
        SWEEP_K.into_iter().flat_map(move |k| {
            SWEEP_M.into_iter().flat_map(move |m| SWEEP_A.into_iter().map(move |a| (n, k, m, a)))
        })
    })
}

/// Closed-form shift optimum against the dynamic-programming oracle.
pub fn shift_oracle(workers: &Workers) -> Result<Outcome> {
    let points: Vec<_> = sweep().collect();
    let gaps = workers.try_map(points.len(), |i| {
        let (n, k, m, a) = points[i];
        let closed = shift_opt_closed(n, k, m, a)?.value;
        let dp = shift_opt_dp(n, k, m, a, DP_A_GRID, DP_ETA_GRID)?;
        Ok((closed - dp).abs() / closed.max(1e-12))
    })?;
    let worst = gaps.iter().copied().fold(0.0, f64::max);
    let mut spots_ok = true;
    for &(k, m, a) in &[(0.5, 0.3, 1.7), (0.9, 1.0, 0.03), (1.0, 0.1, 10.0)] {
        spots_ok &= shift_opt_closed(1, k, m, a)?.value == a * a;
        spots_ok &= shift_opt_dp(1, k, m, a, DP_A_GRID, DP_ETA_GRID)? == a * a;
    }
    for n in SWEEP_N {
        for a in [0.03, 1.0, 10.0] {
            spots_ok &= rel(shift_opt_closed(n, 1.0, 0.0, a)?.value, a * a / n as f64) <= 1e-12;
        }
    }
    Ok(Outcome::new(
        worst <= 1e-3 && spots_ok,
        format!("{} points, worst relative gap {worst:.3e}, spot values {}", points.len(), if spots_ok { "ok" } else { "wrong" }),
    ))
}

/// Objective evaluated at the reconstructed schedule against the closed form.
pub fn schedule_closure() -> Result<Outcome> {
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for (n, k, m, a) in sweep() {
        let s = shift_opt_closed(n, k, m, a)?;
        let direct = shift_objective(a, k, m, &s.etas);
        let gap = if direct == s.value { 0.0 } else { (direct - s.value).abs() / s.value.abs().max(1e-300) };
        worst = worst.max(gap);
        count += 1;
    }
    Ok(Outcome::new(worst <= 1e-12, format!("{count} points, worst relative gap {worst:.3e}")))
}

/// LMC on a quadratic without perturbation: the Dirac images are Gaussians
/// whose distance is exactly the contracted gap.
pub fn exact_curvature(workers: &Workers) -> Result<Outcome> {
    let combos: [(f64, f64, &[f64], &[f64]); 20] = [
        (1.0, 0.1, &[1.0], &[0.0]),
        (1.0, 0.5, &[2.5], &[-1.0]),
        (1.0, 1.0, &[3.0], &[1.0]),
        (0.5, 0.2, &[0.0], &[0.0]),
        (0.5, 1.5, &[-2.0], &[4.0]),
        (2.0, 0.05, &[0.3], &[0.31]),
        (2.0, 0.25, &[10.0], &[-10.0]),
        (2.0, 0.5, &[1.0], &[2.0]),
        (4.0, 0.01, &[5.0], &[-5.0]),
        (4.0, 0.2, &[0.7], &[-0.2]),
        (0.1, 3.0, &[1.0], &[-1.0]),
        (0.1, 9.0, &[6.0], &[2.0]),
        (3.0, 0.3, &[-1.5], &[1.5]),
        (0.25, 0.75, &[8.0], &[0.5]),
        (1.5, 0.6, &[0.0], &[1e-6]),
        (1.0, 0.3, &[1.0, 2.0], &[0.0, -1.0]),
        (2.0, 0.1, &[0.5, -0.5], &[3.0, 3.0]),
        (0.5, 1.0, &[1.0, 1.0, 1.0], &[0.0, 0.0, 0.0]),
        (1.0, 0.9, &[-4.0, 2.0], &[4.0, -2.0]),
        (3.0, 0.2, &[0.1, 0.2, 0.3], &[0.3, 0.2, 0.1]),
    ];
    let mut reports = Vec::new();
    let mut worst: f64 = 0.0;
    for (alpha, h, x, y) in combos {
        let kernel = KernelSpec::lmc(h, PotentialSpec::isotropic(x.len(), alpha, Perturbation::Zero)?)?;
        let report = verify_curvature(&kernel, &[(x.to_vec(), y.to_vec())], 1, 2.0, 0, workers)?;
        let dist = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        let expect = (1.0 - alpha * h).abs() * dist;
        worst = worst.max((report.records[0].lhs - expect).abs() / expect.max(1.0));
        reports.push(report);
    }
    let merged = VerificationReport::new(
        "curvature_lmc_exact",
        CheckPath::Exact,
        reports
            .into_iter()
            .enumerate()
            .map(|(i, r)| CaseRecord { case: i, ..r.records[0].clone() })
            .collect(),
    );
    let (ok, detail) = summarize(std::slice::from_ref(&merged));
    let mut out = Outcome::new(ok && worst <= 1e-12, format!("{detail}, worst deviation from (1-ah)|x-y| {worst:.3e}"));
    out.reports.push(merged);
    Ok(out)
}

/// Pairs for the Monte-Carlo curvature runs, drawn from the seed.
pub fn curvature_pairs(seed: u64, count: usize, range: f64, dim: usize) -> Vec<(Vec<f64>, Vec<f64>)> {
    let mut rng = stream(seed, u64::MAX, 0);
    let mut point = move || -> Vec<f64> { (0..dim).map(|_| (2.0 * rng.random::<f64>() - 1.0) * range).collect() };
    (0..count)
        .map(|i| {
            let x = point();
            // one coincident pair checks the pure-defect case
            let y = if i == 0 { x.clone() } else { point() };
            (x, y)
        })
        .collect()
}

pub const MC_SAMPLES: usize = 200_000;

/// LMC and the Proximal Sampler under a sinusoidal perturbation.
pub fn mc_curvature_reports(seed: u64, samples: usize, workers: &Workers) -> Result<Vec<VerificationReport>> {
    let potential = PotentialSpec::isotropic(1, 1.0, Perturbation::Sinusoid { amplitude: 0.5, frequency: 1.0 })?;
    let pairs = curvature_pairs(seed, 20, 3.0, 1);
    let mut reports = Vec::new();
    for (i, h) in [0.1, 0.5].into_iter().enumerate() {
        let lmc = KernelSpec::lmc(h, potential.clone())?;
        let ps = KernelSpec::ps(h, potential.clone())?.with_backward(BackwardMethod::Rejection)?;
        for (j, kernel) in [lmc, ps].iter().enumerate() {
            let mut r = verify_curvature(kernel, &pairs, samples, 2.0, seed + (2 * i + j) as u64, workers)?;
            r.experiment = format!("{}_h{h}", r.experiment);
            reports.push(r);
        }
    }
    Ok(reports)
}

pub fn mc_curvature(seed: u64, workers: &Workers) -> Result<Outcome> {
    let reports = mc_curvature_reports(seed, MC_SAMPLES, workers)?;
    let (ok, detail) = summarize(&reports);
    Ok(Outcome { pass: ok, detail, reports, artifacts: Vec::new() })
}

/// Exact OU from a Dirac start against 100 Gaussian test measures per `T`.
pub fn def_t2_ou(seed: u64, workers: &Workers) -> Result<Outcome> {
    let potential = PotentialSpec::isotropic(1, 1.0, Perturbation::Zero)?;
    let mut reports = Vec::new();
    for (i, t) in [0.1, 1.0, 10.0].into_iter().enumerate() {
        let scenario = T2Scenario::Langevin {
            potential: potential.clone(),
            t,
            init: GaussianMeasure::point_mass(vec![2.0])?,
            j: 0.0,
            s: 0.0,
            tests: 100,
        };
        let mut r = verify_def_t2(&scenario, seed + i as u64, workers)?;
        r.experiment = format!("{}_T{t}", r.experiment);
        reports.push(r);
    }
    let mut worst: f64 = 0.0;
    for t in [0.1, 1.0, 10.0] {
        for (j, s) in [(0.0, 0.0), (0.7, 0.3), (5.0, 2.0)] {
            let cert = def_t2_ld(1.0, 0.0, t, j, s)?;
            let e2 = (-2.0 * t).exp();
            worst = worst.max(rel(cert.a(), e2 * j + (1.0 - e2))).max((cert.b() - (-t).exp() * s).abs());
        }
    }
    let (ok, detail) = summarize(&reports);
    let mut out = Outcome::new(ok && worst <= 1e-15, format!("{detail}, constants deviate by {worst:.1e}"));
    out.reports = reports;
    Ok(out)
}

/// Small-step limits of the discrete certificates.
pub fn discretization_limits() -> Result<Outcome> {
    let n = 100_000u64;
    let mut worst: f64 = 0.0;
    for &(alpha, l, t, j, s) in &[(1.0, 0.5, 1.0, 0.3, 0.2), (0.5, 0.1, 3.0, 2.0, 0.0), (2.0, 1.0, 0.2, 0.0, 1.0), (0.0, 0.4, 1.5, 1.0, 0.5)] {
        let h = t / n as f64;
        let curv = curvature_lmc(alpha, alpha, l, h, 2.0)?;
        let step = DefTpCert::t2(2.0 * h, 0.0)?;
        let discrete = def_tp_iterate(&DefTpCert::t2(j, s)?, &step, &curv, n)?;
        let limit = def_t2_ld(alpha, l, t, j, s)?;
        worst = worst.max(rel(discrete.a(), limit.a())).max(rel(discrete.b(), limit.b()));
    }
    for &(alpha, l, t, w) in &[(1.0, 0.5, 1.0, 0.7), (0.0, 0.3, 0.5, 1.2), (2.0, 0.0, 2.0, 0.4), (0.3, 1.0, 4.0, 2.5)] {
        let h = t / n as f64;
        let curv = CurvatureCert::new(2.0, 1.0 - alpha * h, 2.0 * l * h)?;
        let discrete = rte_discrete(&RteCert::new(1.0 / (4.0 * h))?, &curv, n - 1, w)?.value;
        worst = worst.max(rel(discrete, rte_ld(alpha, l, t, w)?));
    }
    Ok(Outcome::new(worst <= 1e-3, format!("N = {n}, worst relative gap {worst:.3e}")))
}

/// Heat-flow tightness and OU pairs.
pub fn rte_tightness(seed: u64, workers: &Workers) -> Result<Outcome> {
    let heat = PotentialSpec::isotropic(1, 0.0, Perturbation::Zero)?;
    let pair = (GaussianMeasure::point_mass(vec![0.0])?, GaussianMeasure::point_mass(vec![1.0])?);
    let mut tight = verify_rte(&RteScenario::Langevin { potential: heat, t: 0.25, pairs: vec![pair] }, workers)?;
    tight.experiment = "rte_heat_flow".into();
    let rec = tight.records[0].clone();
    let tight_ok = (rec.lhs - 1.0).abs() <= 1e-12 && (rec.rhs - 1.0).abs() <= 1e-12;

    let ou = PotentialSpec::isotropic(1, 1.0, Perturbation::Zero)?;
    let mut rng = stream(seed, u64::MAX, 7);
    let mut pairs = Vec::new();
    for _ in 0..30 {
        let mut g = || GaussianMeasure::univariate(rng.random::<f64>() * 6.0 - 3.0, 0.05 + 2.0 * rng.random::<f64>());
        pairs.push((g()?, g()?));
    }
    let mut reports = vec![tight];
    let mut strict = true;
    for t in [0.1, 1.0, 10.0] {
        let mut r = verify_rte(&RteScenario::Langevin { potential: ou.clone(), t, pairs: pairs.clone() }, workers)?;
        r.experiment = format!("{}_T{t}", r.experiment);
        strict &= r.records.iter().all(|c| c.lhs < c.rhs);
        reports.push(r);
    }
    let (ok, detail) = summarize(&reports);
    let mut out = Outcome::new(
        ok && tight_ok && strict,
        format!("heat flow lhs {:.17} rhs {:.17}; {detail}; strict {strict}", rec.lhs, rec.rhs),
    );
    out.reports = reports;
    Ok(out)
}

/// W–TV inequality on Gaussian pairs with strong log-concavity certificates.
pub fn wtv_gaussians(seed: u64) -> Result<Outcome> {
    let mut rng = stream(seed, u64::MAX, 8);
    let mut records = Vec::new();
    for case in 0..200 {
        let (m1, v1) = (rng.random::<f64>() * 8.0 - 4.0, 0.05 + 3.0 * rng.random::<f64>());
        let (m2, v2) = (rng.random::<f64>() * 8.0 - 4.0, 0.05 + 3.0 * rng.random::<f64>());
        let (g1, g2) = (GaussianMeasure::univariate(m1, v1)?, GaussianMeasure::univariate(m2, v2)?);
        let lhs = w2_gaussian(&g1, &g2)?.value;
        let tv = tv_gaussian_1d(&g1, &g2)?.value.to_f64();
        let rhs = wtv_bound(&DefTpCert::t2(v1, 0.0)?, &DefTpCert::t2(v2, 0.0)?, tv)?.to_f64();
        let inputs = format!("m1={m1} v1={v1} m2={m2} v2={v2} tv={tv}");
        records.push(CaseRecord::new(case, inputs, lhs, rhs, None, CheckPath::Exact));
    }
    let report = VerificationReport::new("wtv_gaussian", CheckPath::Exact, records);
    let (ok, detail) = summarize(std::slice::from_ref(&report));
    let mut out = Outcome::new(ok, detail);
    out.reports.push(report);
    Ok(out)
}

/// Grid evolution against Gaussian closed forms.
pub fn grid_fidelity(seed: u64) -> Result<Outcome> {
    let grid = Grid::new(-14.0, 14.0, 8192)?;
    let quad = PotentialSpec::isotropic(1, 1.0, Perturbation::Zero)?;
    let kernels = [KernelSpec::lmc(0.1, quad.clone())?, KernelSpec::ps(0.3, quad.clone())?, KernelSpec::ou_exact(0.1, quad)?];
    let mut worst_sup: f64 = 0.0;
    for kernel in &kernels {
        let mut g = GaussianMeasure::univariate(3.0, 0.5)?;
        let mut rho = GridDensity::from_gaussian(grid, 3.0, 0.5)?;
        for _ in 0..50 {
            g = gaussian_pushforward(kernel, &g)?;
            rho = grid_pushforward(kernel, &rho)?;
        }
        let exact = GridDensity::from_gaussian(grid, g.mean()[0], g.var()[0])?;
        worst_sup = worst_sup.max(rho.sup_distance(&exact)?);
    }
    let tv_grid_nodes = Grid::new(-16.0, 16.0, 3201)?;
    let mut rng = stream(seed, u64::MAX, 9);
    let mut worst_tv: f64 = 0.0;
    for _ in 0..100 {
        let (m1, m2) = (rng.random::<f64>() * 6.0 - 3.0, rng.random::<f64>() * 6.0 - 3.0);
        let sigma = 0.3 + 1.5 * rng.random::<f64>();
        let closed = tv_gaussian_equal_var_1d(m1, m2, sigma)?.value.to_f64();
        let a = GridDensity::from_gaussian(tv_grid_nodes, m1, sigma * sigma)?;
        let b = GridDensity::from_gaussian(tv_grid_nodes, m2, sigma * sigma)?;
        worst_tv = worst_tv.max((tv_grid(&a, &b)?.value.to_f64() - closed).abs());
    }
    Ok(Outcome::new(
        worst_sup <= 1e-5 && worst_tv <= 1e-4,
        format!("pushforward sup-norm {worst_sup:.3e} (lmc, ps, ou over 50 steps), tv gap {worst_tv:.3e} on 100 cases"),
    ))
}

#[derive(Debug, Clone, Serialize)]
struct MixingSummary {
    scenario: &'static str,
    curve: MixingCurve,
    windows: Vec<WindowComparison>,
}

/// OU from `δ₆` on a grid against quadrature of the exact laws, plus the
/// window tables for OU and perturbed LMC.
pub fn mixing_crosscheck() -> Result<Outcome> {
    let (start, dt, steps) = (6.0, 0.01, 500);
    let potential = PotentialSpec::isotropic(1, 1.0, Perturbation::Zero)?;
    let kernel = KernelSpec::ou_exact(dt, potential.clone())?;
    let grid = Grid::new(-6.0, 12.0, 2048)?;
    let target = GridDensity::from_gaussian(grid, 0.0, 1.0)?;
    let eps = [0.25];
    let curve = mixing_curve(&kernel, &MixingStart::Point(start), &MixingTarget::Density(target.clone()), steps, &eps)?;
    let mut worst: f64 = 0.0;
    for (k, &tv) in curve.tv.iter().enumerate().skip(1) {
        let t = k as f64 * dt;
        let law = GridDensity::from_gaussian(grid, start * (-t).exp(), -(-2.0 * t).exp_m1())?;
        worst = worst.max((tv - tv_grid(&law, &target)?.value.to_f64()).abs());
    }
    let exact = mixing_curve(
        &kernel,
        &MixingStart::Gaussian(GaussianMeasure::point_mass(vec![start])?),
        &MixingTarget::Gaussian(GaussianMeasure::univariate(0.0, 1.0)?),
        steps,
        &eps,
    )?;
    let monotone = exact.tv.windows(2).all(|w| w[1] <= w[0] + 1e-9);
    let ou_windows = compare_window_ld(&curve, 1.0, 0.0, 0.0, 0.0, 1.0)?;

    let wavy = PotentialSpec::isotropic(1, 1.0, Perturbation::Sinusoid { amplitude: 0.5, frequency: 1.0 })?;
    let lmc = KernelSpec::lmc(0.01, wavy)?;
    let lmc_grid = Grid::new(-6.0, 8.0, 1024)?;
    let fixed = grid_fixed_point(&lmc, &GridDensity::from_gaussian(lmc_grid, 0.0, 1.0)?, 1e-10, 20_000)?;
    let lmc_curve = mixing_curve(&lmc, &MixingStart::Point(4.0), &MixingTarget::Density(fixed), 1500, &eps)?;
    let lmc_windows = compare_window_ld(&lmc_curve, 1.0, 0.5, 0.0, 0.0, lmc.step())?;

    let fmt = |w: &WindowComparison| {
        format!(
            "t_mix {} w_mix {} ratio {}",
            w.t_mix.map_or("-".into(), |v| format!("{v:.4}")),
            w.w_mix.map_or("-".into(), |v| format!("{v:.4}")),
            w.ratio.map_or("-".into(), |v| format!("{v:.4}"))
        )
    };
    let detail = format!(
        "grid vs quadrature {worst:.3e} over {steps} steps, exact curve monotone {monotone}; ou(0.25): {}; lmc h=0.01 (steps): {}",
        fmt(&ou_windows[0]),
        fmt(&lmc_windows[0])
    );
    let mut out = Outcome::new(worst <= 1e-3 && monotone && ou_windows[0].w_mix.is_some(), detail);
    for (name, scenario, curve, windows) in [
        ("mixing_ou_grid", "ou alpha=1 from 6, dt=0.01", curve, ou_windows),
        ("mixing_lmc_wavy", "lmc alpha=1 L=0.5 h=0.01 from 4", lmc_curve, lmc_windows),
    ] {
        out.artifacts.push(Artifact { name: name.into(), body: serde_json::to_value(MixingSummary { scenario, curve, windows })? });
    }
    Ok(out)
}

/// Limit and monotonicity checks of the window expressions.
pub fn window_asymptotics() -> Result<Outcome> {
    let mut ok = true;
    for &(alpha, cp) in &[(0.5, 2.0), (1.0, 1.0), (2.5, 0.7)] {
        let flat = wmix_bound_ld(alpha, 0.0, cp, 1e3, 4.0, 1.0)?;
        ok &= rel(flat.value, cp + (cp / alpha).sqrt()) <= 1e-12 && flat.up_to_constant;
        let mut prev = f64::INFINITY;
        for t0 in 0..20 {
            let v = wmix_bound_ld(alpha, 0.4, cp, t0 as f64 * 0.5, 3.0, 1.0)?;
            ok &= v.value <= prev && v.poincare_free.is_finite();
            prev = v.value;
        }
        let small = wmix_bound_ld(alpha, 1e-9, cp, 2.0, 1.0, 0.5)?.value;
        ok &= rel(small, wmix_bound_ld(alpha, 0.0, cp, 2.0, 1.0, 0.5)?.value) <= 1e-6;
        let mut prev = 0.0;
        for i in 0..10 {
            let v = wmix_bound_ps(alpha, i as f64 * 0.2, 0.5, cp)?;
            ok &= v.value > prev && v.up_to_constant;
            prev = v.value;
        }
        let ps_small = wmix_bound_ps(alpha, 1e-9, 0.5, cp)?.value;
        ok &= rel(ps_small, wmix_bound_ps(alpha, 0.0, 0.5, cp)?.value) <= 1e-6;
    }
    ok &= poincare_bound(1.0, 0.0)? == 1.0;
    Ok(Outcome::new(ok, "L -> 0 recovery, t0 monotonicity, L monotonicity".into()))
}

pub struct Suite {
    pub criteria: Vec<Criterion>,
    pub reports: Vec<VerificationReport>,
    pub artifacts: Vec<Artifact>,
}

impl Suite {
    pub fn all_passed(&self) -> bool {
        self.criteria.iter().all(|c| c.pass)
    }
}

/// Monte-Carlo CSVs regenerated under several worker counts must match the
/// originals byte for byte.
pub fn determinism(seed: u64, reference: &[VerificationReport], counts: &[usize]) -> Result<Outcome> {
    let expect: Vec<Vec<u8>> = reference.iter().map(csv_bytes).collect::<Result<_>>()?;
    let mut same = true;
    for &threads in counts {
        let rerun = mc_curvature_reports(seed, MC_SAMPLES, &Workers::new(threads)?)?;
        for (a, b) in rerun.iter().zip(&expect) {
            same &= csv_bytes(a)? == *b;
        }
        same &= rerun.len() == expect.len();
    }
    Ok(Outcome::new(same, format!("Monte-Carlo CSVs identical under worker counts {counts:?}: {same}")))
}

pub const SELFTEST_BUDGET: f64 = 300.0;

/// Runs every criterion in order.
pub fn run_all(seed: u64, workers: &Workers) -> Suite {
    let start = Instant::now();
    let mut criteria = Vec::new();
    let mut reports = Vec::new();
    let mut artifacts = Vec::new();
    let mut mc_reports = Vec::new();
    let mut push = |(c, o): (Criterion, Outcome), keep_mc: bool| {
        if keep_mc {
            mc_reports = o.reports.clone();
        }
        criteria.push(c);
        reports.extend(o.reports);
        artifacts.extend(o.artifacts);
    };
    push(timed(1, "shift oracle equivalence", Some(60.0), || shift_oracle(workers)), false);
    push(timed(2, "schedule closure", None, schedule_closure), false);
    push(timed(3, "exact affine curvature", None, || exact_curvature(workers)), false);
    push(timed(4, "monte-carlo curvature", Some(90.0), || mc_curvature(seed, workers)), true);
    push(timed(5, "defective T2 on OU", None, || def_t2_ou(seed, workers)), false);
    push(timed(6, "discretization limits", Some(10.0), discretization_limits), false);
    push(timed(7, "reverse transport-entropy", None, || rte_tightness(seed, workers)), false);
    push(timed(8, "W-TV on Gaussians", None, || wtv_gaussians(seed)), false);
    push(timed(9, "grid oracle fidelity", None, || grid_fidelity(seed)), false);
    push(timed(10, "mixing cross-check", None, mixing_crosscheck), false);
    push(timed(11, "window asymptotics", None, window_asymptotics), false);
    let alt = [1, workers.threads() + 2];
    let (mut c12, _) = timed(12, "selftest budget and determinism", None, || determinism(seed, &mc_reports, &alt));
    let total = start.elapsed().as_secs_f64();
    c12.seconds = total;
    c12.budget = Some(SELFTEST_BUDGET);
    c12.pass &= total < SELFTEST_BUDGET;
    if total >= SELFTEST_BUDGET {
        c12.detail.push_str(" [over budget]");
    }
    criteria.push(c12);
    Suite { criteria, reports, artifacts }
}
