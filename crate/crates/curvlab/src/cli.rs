//! Command-line front end.
//!
//! Exit codes: 0 when every inequality holds, 2 when any case fails, 1 for
//! usage and configuration errors.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use curvlab_core::bounds::*;
use curvlab_core::kernels::{gaussian_pushforward, run_chain, ChainInit, KernelKind};
use curvlab_core::model::{GaussianMeasure, GridDensity};
use curvlab_core::rng::StreamKey;
use serde_json::{json, Map, Value};

use crate::acceptance::{self, curvature_pairs};
use crate::config::{BackwardChoice, InitKind, KernelChoice, PerturbationKind, ScenarioConfig};
use crate::error::{Error, Result};
use crate::harness::*;
use crate::report::{emit_results, Artifact};

pub const EXIT_OK: u8 = 0;
pub const EXIT_USAGE: u8 = 1;
pub const EXIT_FAILED: u8 = 2;

#[derive(Debug, Parser)]
#[command(name = "curvlab", version, about = "Defective-curvature bounds and their numerical verification")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the certificates and bounds for the configured kernel as JSON.
    #[command(allow_negative_numbers = true)]
    Bounds(ScenarioArgs),
    /// Run particle chains and summarise the final law.
    #[command(allow_negative_numbers = true)]
    Simulate(ScenarioArgs),
    /// Check W_p(δx P, δy P) ≤ K|x − y| + M (W_inf for `ps_backward`).
    #[command(allow_negative_numbers = true)]
    VerifyCurvature(ScenarioArgs),
    /// Check the defective Talagrand inequality of the evolved law.
    #[command(allow_negative_numbers = true)]
    VerifyT2(ScenarioArgs),
    /// Check the reverse transport-entropy bound.
    #[command(allow_negative_numbers = true)]
    VerifyRte(ScenarioArgs),
    /// Mixing curve, t_mix and w_mix with the window expressions.
    #[command(allow_negative_numbers = true)]
    Mixing(ScenarioArgs),
    /// Run the full acceptance suite.
    Selftest(SelftestArgs),
}

#[derive(Debug, Args)]
pub struct ScenarioArgs {
    /// JSON scenario file; flags override its keys.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub overrides: Overrides,
}

#[derive(Debug, Args)]
pub struct SelftestArgs {
    #[arg(long, default_value_t = acceptance::DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long, default_value = "curvlab-selftest")]
    pub out: PathBuf,
}

/// Command-line overrides, one per config key.
#[derive(Debug, Default, Args)]
pub struct Overrides {
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long = "L")]
    pub l: Option<f64>,
    #[arg(long)]
    pub center: Option<f64>,
    #[arg(long)]
    pub curvature: Option<f64>,
    #[arg(long, value_enum)]
    pub perturbation: Option<PerturbationKind>,
    #[arg(long)]
    pub amplitude: Option<f64>,
    #[arg(long)]
    pub frequency: Option<f64>,
    #[arg(long)]
    pub scale: Option<f64>,
    #[arg(long, value_enum)]
    pub kernel: Option<KernelChoice>,
    /// Shorthand for `--kernel lmc`.
    #[arg(long, conflicts_with_all = ["kernel", "ps", "ou"])]
    pub lmc: bool,
    /// Shorthand for `--kernel ps`.
    #[arg(long, conflicts_with_all = ["kernel", "ou"])]
    pub ps: bool,
    /// Shorthand for `--kernel ou`.
    #[arg(long, conflicts_with = "kernel")]
    pub ou: bool,
    #[arg(long)]
    pub h: Option<f64>,
    #[arg(long = "T")]
    pub t: Option<f64>,
    #[arg(long = "N")]
    pub n: Option<u64>,
    #[arg(long, value_enum)]
    pub backward: Option<BackwardChoice>,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long, value_enum)]
    pub init: Option<InitKind>,
    #[arg(long)]
    pub x0: Option<f64>,
    #[arg(long)]
    pub var0: Option<f64>,
    #[arg(long = "J")]
    pub j: Option<f64>,
    #[arg(long = "S")]
    pub s: Option<f64>,
    /// A pair `x,y`; repeat for more.
    #[arg(long = "pair", value_parser = parse_pair, allow_hyphen_values = true)]
    pub pairs: Vec<[f64; 2]>,
    #[arg(long)]
    pub pair_count: Option<usize>,
    #[arg(long)]
    pub pair_range: Option<f64>,
    #[arg(long)]
    pub tests: Option<usize>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Mixing level; repeat for more.
    #[arg(long)]
    pub eps: Vec<f64>,
    #[arg(long)]
    pub max_steps: Option<usize>,
    #[arg(long)]
    pub grid_lo: Option<f64>,
    #[arg(long)]
    pub grid_hi: Option<f64>,
    #[arg(long)]
    pub grid_nodes: Option<usize>,
    #[arg(long)]
    pub out: Option<String>,
}

fn parse_pair(s: &str) -> std::result::Result<[f64; 2], String> {
    let (a, b) = s.split_once(',').ok_or_else(|| format!("expected x,y, got {s:?}"))?;
    let parse = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("{t:?}: {e}"));
    Ok([parse(a)?, parse(b)?])
}

impl Overrides {
    pub fn to_map(&self) -> Map<String, Value> {
        let mut m = Map::new();
        let mut put = |k: &str, v: Option<Value>| {
            if let Some(v) = v {
                m.insert(k.into(), v);
            }
        };
        put("dim", self.dim.map(Value::from));
        put("alpha", self.alpha.map(Value::from));
        put("beta", self.beta.map(Value::from));
        put("L", self.l.map(Value::from));
        put("center", self.center.map(Value::from));
        put("curvature", self.curvature.map(Value::from));
        put("perturbation", self.perturbation.map(|v| json!(v)));
        put("amplitude", self.amplitude.map(Value::from));
        put("frequency", self.frequency.map(Value::from));
        put("scale", self.scale.map(Value::from));
        let shorthand = if self.lmc {
            Some(KernelChoice::Lmc)
        } else if self.ps {
            Some(KernelChoice::Ps)
        } else if self.ou {
            Some(KernelChoice::Ou)
        } else {
            self.kernel
        };
        put("kernel", shorthand.map(|v| json!(v)));
        put("h", self.h.map(Value::from));
        put("T", self.t.map(Value::from));
        put("N", self.n.map(Value::from));
        put("backward", self.backward.map(|v| json!(v)));
        put("p", self.p.map(Value::from));
        put("init", self.init.map(|v| json!(v)));
        put("x0", self.x0.map(Value::from));
        put("var0", self.var0.map(Value::from));
        put("J", self.j.map(Value::from));
        put("S", self.s.map(Value::from));
        put("pairs", (!self.pairs.is_empty()).then(|| json!(self.pairs)));
        put("pair_count", self.pair_count.map(Value::from));
        put("pair_range", self.pair_range.map(Value::from));
        put("tests", self.tests.map(Value::from));
        put("samples", self.samples.map(Value::from));
        put("seed", self.seed.map(Value::from));
        put("eps", (!self.eps.is_empty()).then(|| json!(self.eps)));
        put("max_steps", self.max_steps.map(Value::from));
        put("grid_lo", self.grid_lo.map(Value::from));
        put("grid_hi", self.grid_hi.map(Value::from));
        put("grid_nodes", self.grid_nodes.map(Value::from));
        put("out", self.out.clone().map(Value::from));
        m
    }
}

/// Loads, overrides, resolves and validates a scenario.
pub fn parse_config(args: &ScenarioArgs) -> Result<ScenarioConfig> {
    let base = match &args.config {
        Some(path) => ScenarioConfig::from_path(path)?,
        None => ScenarioConfig::default(),
    };
    let cfg = base.merged(args.overrides.to_map())?.resolve();
    cfg.validate()?;
    Ok(cfg)
}

/// Parses `argv` and runs it, writing human output to `out`.
pub fn run_from<I, T>(argv: I, out: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(&cli.command, out) {
        Ok(true) => EXIT_OK,
        Ok(false) => EXIT_FAILED,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
    }
}

/// Runs one subcommand; `Ok(false)` means some inequality failed.
pub fn dispatch(command: &Command, out: &mut dyn Write) -> Result<bool> {
    let workers = Workers::from_env()?;
    let (name, args) = match command {
        Command::Selftest(a) => return selftest(a, &workers, out),
        Command::Bounds(a) => ("bounds", a),
        Command::Simulate(a) => ("simulate", a),
        Command::VerifyCurvature(a) => ("verify-curvature", a),
        Command::VerifyT2(a) => ("verify-t2", a),
        Command::VerifyRte(a) => ("verify-rte", a),
        Command::Mixing(a) => ("mixing", a),
    };
    let cfg = parse_config(args)?;
    let (reports, artifacts) = match command {
        Command::Bounds(_) => {
            let record = bounds_record(&cfg)?;
            writeln!(out, "{}", serde_json::to_string_pretty(&record)?).map_err(stdout_err)?;
            (Vec::new(), vec![Artifact { name: "bounds".into(), body: record }])
        }
        Command::Simulate(_) => (Vec::new(), vec![simulate(&cfg)?]),
        Command::VerifyCurvature(_) => (vec![curvature(&cfg, &workers)?], Vec::new()),
        Command::VerifyT2(_) => (vec![def_t2(&cfg, &workers)?], Vec::new()),
        Command::VerifyRte(_) => (vec![rte(&cfg, &workers)?], Vec::new()),
        Command::Mixing(_) => (Vec::new(), vec![mixing(&cfg)?]),
        Command::Selftest(_) => unreachable!(),
    };
    for r in &reports {
        writeln!(out, "{}: {} passed, {} failed", r.experiment, r.passed, r.failed).map_err(stdout_err)?;
    }
    let (manifest, path) = emit_results(name, &reports, &artifacts, &cfg.echo(), cfg.seed, Path::new(&cfg.out))?;
    writeln!(out, "manifest: {}", path.display()).map_err(stdout_err)?;
    Ok(manifest.all_passed())
}

fn stdout_err(e: std::io::Error) -> Error {
    Error::Io { path: PathBuf::from("<stdout>"), source: e }
}

fn selftest(args: &SelftestArgs, workers: &Workers, out: &mut dyn Write) -> Result<bool> {
    let suite = acceptance::run_all(args.seed, workers);
    for c in &suite.criteria {
        writeln!(out, "{}", c.line()).map_err(stdout_err)?;
    }
    let mut artifacts = suite.artifacts.clone();
    artifacts.push(Artifact { name: "selftest".into(), body: serde_json::to_value(&suite.criteria)? });
    let config = json!({ "seed": args.seed });
    let (_, path) = emit_results("selftest", &suite.reports, &artifacts, &config, args.seed, &args.out)?;
    writeln!(out, "manifest: {}", path.display()).map_err(stdout_err)?;
    Ok(suite.all_passed())
}

fn cert_json(c: &CurvatureCert) -> Value {
    json!({ "p": c.p(), "K": c.k(), "M": c.m() })
}

fn t2_json(c: &DefTpCert) -> Value {
    json!({ "A": c.a(), "B": c.b() })
}

/// Certificates for the configured kernel. Sections whose preconditions do
/// not hold are `null`.
pub fn bounds_record(cfg: &ScenarioConfig) -> Result<Value> {
    let (alpha, l, p, n) = (cfg.alpha, cfg.lipschitz(), cfg.p, cfg.n);
    let beta = cfg.beta.unwrap_or(alpha);
    let (j, s) = (cfg.j(), cfg.s());
    let cp = poincare_bound(alpha, l).ok();
    let mut rec = Map::new();
    rec.insert("kernel".into(), json!(cfg.kernel));
    rec.insert("alpha".into(), json!(alpha));
    rec.insert("beta".into(), json!(beta));
    rec.insert("L".into(), json!(l));
    rec.insert("p".into(), json!(p));
    rec.insert("N".into(), json!(n));
    rec.insert("J".into(), json!(j));
    rec.insert("S".into(), json!(s));
    rec.insert("poincare".into(), json!(cp));
    match cfg.kernel {
        KernelChoice::Lmc | KernelChoice::Ps => {
            let h = cfg.step()?;
            let cert = if cfg.kernel == KernelChoice::Lmc {
                curvature_lmc(alpha, beta, l, h, p)?
            } else {
                curvature_ps(alpha, l, h, p)?
            };
            rec.insert("h".into(), json!(h));
            rec.insert("K".into(), json!(cert.k()));
            rec.insert("M".into(), json!(cert.m()));
            rec.insert("curvature".into(), cert_json(&cert));
            rec.insert("iterate".into(), cert_json(&cert.iterate(n)));
            if p == 2.0 {
                let t2 = if cfg.kernel == KernelChoice::Lmc {
                    def_tp_iterate(&DefTpCert::t2(j, s)?, &DefTpCert::t2(2.0 * h, 0.0)?, &cert, n)?
                } else {
                    def_t2_ps(alpha, l, h, n, j, s)?
                };
                rec.insert("def_t2".into(), t2_json(&t2));
            }
            if cfg.kernel == KernelChoice::Ps {
                rec.insert("rte_unit_w2".into(), json!(rte_ps(alpha, l, h, n, 1.0)?));
                let window = cp.and_then(|cp| wmix_bound_ps(alpha, l, h, cp).ok());
                rec.insert("wmix".into(), json!(window));
            }
        }
        KernelChoice::Ou => {
            let t = cfg.time()?;
            rec.insert("T".into(), json!(t));
            rec.insert("def_t2".into(), t2_json(&def_t2_ld(alpha, l, t, j, s)?));
            rec.insert("rte_unit_w2".into(), json!(rte_ld(alpha, l, t, 1.0)?));
            let window = cp.and_then(|cp| wmix_bound_ld(alpha, l, cp, t, j, s).ok());
            rec.insert("wmix".into(), json!(window));
        }
        _ => {
            let spec = cfg.kernel_spec()?;
            let cert = spec.curvature_cert(p)?;
            rec.insert("h".into(), json!(cfg.h));
            rec.insert("K".into(), json!(cert.k()));
            rec.insert("M".into(), json!(cert.m()));
            rec.insert("curvature".into(), cert_json(&cert));
            rec.insert("iterate".into(), cert_json(&cert.iterate(n)));
        }
    }
    Ok(Value::Object(rec))
}

fn simulate(cfg: &ScenarioConfig) -> Result<Artifact> {
    let kernel = cfg.kernel_spec()?;
    let law = cfg.initial_law()?;
    let init = ChainInit::Gaussian { law: law.clone(), particles: cfg.samples };
    let cloud = run_chain(&kernel, &init, cfg.n as usize, StreamKey::new(cfg.seed, 0))?;
    let mut oracle = Some(law);
    for _ in 0..cfg.n {
        oracle = oracle.and_then(|g| gaussian_pushforward(&kernel, &g).ok());
    }
    let body = json!({
        "kernel": cfg.kernel,
        "particles": cloud.len(),
        "steps": cfg.n,
        "mean": cloud.mean(),
        "variance": cloud.variance(),
        "oracle": oracle.map(|g| json!({ "mean": g.mean(), "variance": g.var() })),
    });
    Ok(Artifact { name: "simulate".into(), body })
}

fn point_pairs(cfg: &ScenarioConfig) -> Vec<(Vec<f64>, Vec<f64>)> {
    if cfg.pairs.is_empty() {
        curvature_pairs(cfg.seed, cfg.pair_count, cfg.pair_range, cfg.dim)
    } else {
        cfg.pairs.iter().map(|&[x, y]| (vec![x; cfg.dim], vec![y; cfg.dim])).collect()
    }
}

fn curvature(cfg: &ScenarioConfig, workers: &Workers) -> Result<VerificationReport> {
    let pairs = point_pairs(cfg);
    if cfg.kernel == KernelChoice::PsBackward {
        let scalar: Vec<(f64, f64)> = pairs.iter().map(|(x, y)| (x[0], y[0])).collect();
        return verify_backward_winfty(&cfg.potential()?, cfg.step()?, &scalar, cfg.samples, cfg.seed, workers);
    }
    verify_curvature(&cfg.kernel_spec()?, &pairs, cfg.samples, cfg.p, cfg.seed, workers)
}

fn def_t2(cfg: &ScenarioConfig, workers: &Workers) -> Result<VerificationReport> {
    let potential = cfg.potential()?;
    let scenario = match cfg.kernel {
        KernelChoice::Ou => T2Scenario::Langevin {
            potential,
            t: cfg.time()?,
            init: cfg.initial_law()?,
            j: cfg.j(),
            s: cfg.s(),
            tests: cfg.tests,
        },
        KernelChoice::Ps => T2Scenario::Proximal {
            potential,
            h: cfg.step()?,
            n: cfg.n,
            init: cfg.initial_law()?,
            j: cfg.j(),
            s: cfg.s(),
            grid: cfg.grid()?,
            tests: cfg.tests,
        },
        other => return Err(Error::Config(format!("verify-t2 supports kernels ou and ps, not {other:?}"))),
    };
    verify_def_t2(&scenario, cfg.seed, workers)
}

fn rte(cfg: &ScenarioConfig, workers: &Workers) -> Result<VerificationReport> {
    if cfg.dim != 1 && cfg.kernel == KernelChoice::Ps {
        return Err(Error::Config("verify-rte with ps runs on a 1D grid".into()));
    }
    let law = |x: &[f64]| -> Result<GaussianMeasure> {
        Ok(match cfg.init {
            InitKind::Dirac => GaussianMeasure::point_mass(x.to_vec())?,
            InitKind::Gaussian => GaussianMeasure::new(x.to_vec(), vec![cfg.var0; x.len()])?,
        })
    };
    let pairs = point_pairs(cfg)
        .iter()
        .map(|(x, y)| Ok((law(x)?, law(y)?)))
        .collect::<Result<Vec<_>>>()?;
    let potential = cfg.potential()?;
    let scenario = match cfg.kernel {
        KernelChoice::Ou => RteScenario::Langevin { potential, t: cfg.time()?, pairs },
        KernelChoice::Ps => RteScenario::Proximal { potential, h: cfg.step()?, n: cfg.n, grid: cfg.grid()?, pairs },
        other => return Err(Error::Config(format!("verify-rte supports kernels ou and ps, not {other:?}"))),
    };
    verify_rte(&scenario, workers)
}

fn mixing(cfg: &ScenarioConfig) -> Result<Artifact> {
    let kernel = cfg.kernel_spec()?;
    let potential = cfg.potential()?;
    let law = cfg.initial_law()?;
    let (curve, windows) = if kernel.kind() == KernelKind::OuExact {
        let pi = GaussianMeasure::univariate(cfg.center, 1.0 / potential.curvature()[0])?;
        let curve = mixing_curve(&kernel, &MixingStart::Gaussian(law), &MixingTarget::Gaussian(pi), cfg.max_steps, &cfg.eps)?;
        let windows = compare_window_ld(&curve, cfg.alpha, cfg.lipschitz(), cfg.j(), cfg.s(), 1.0)?;
        (curve, json!(windows))
    } else {
        let grid = cfg.grid()?;
        let gibbs = GridDensity::gibbs(grid, &potential)?;
        let target = match kernel.kind() {
            KernelKind::Lmc => grid_fixed_point(&kernel, &gibbs, 1e-10, 1_000_000)?,
            _ => gibbs,
        };
        let start = if law.is_degenerate() {
            MixingStart::Point(cfg.x0)
        } else {
            MixingStart::Density(GridDensity::from_gaussian(grid, cfg.x0, cfg.var0)?)
        };
        let curve = mixing_curve(&kernel, &start, &MixingTarget::Density(target), cfg.max_steps, &cfg.eps)?;
        let windows = match kernel.kind() {
            KernelKind::Ps => {
                let cp = poincare_bound(cfg.alpha, cfg.lipschitz())?;
                let b = wmix_bound_ps(cfg.alpha, cfg.lipschitz(), cfg.step()?, cp)?;
                let rows: Vec<Value> = curve
                    .eps
                    .iter()
                    .zip(curve.t_mix.iter().zip(&curve.w_mix))
                    .map(|(e, (t, w))| json!({ "eps": e, "t_mix": t, "w_mix": w, "bound": b, "ratio": w.map(|w| w / b.value) }))
                    .collect();
                json!(rows)
            }
            _ => json!(compare_window_ld(&curve, cfg.alpha, cfg.lipschitz(), cfg.j(), cfg.s(), kernel.step())?),
        };
        (curve, windows)
    };
    Ok(Artifact { name: "mixing".into(), body: json!({ "curve": curve, "windows": windows }) })
}
