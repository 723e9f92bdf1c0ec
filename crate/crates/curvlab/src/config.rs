//! Scenario configuration.
//!
//! The on-disk form is one flat JSON object. Every key is optional; missing
//! keys take the defaults below and unknown keys are rejected. After
//! [`ScenarioConfig::resolve`] every derived value is explicit, so the echo
//! written into a manifest reproduces the run when fed back in.

use std::path::Path;

use curvlab_core::kernels::{BackwardMethod, KernelSpec};
use curvlab_core::model::{Confining, GaussianMeasure, Grid, Perturbation, PotentialSpec};
use serde::{Deserialize, Serialize};

use crate::error::{io_at, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum KernelChoice {
    GradStep,
    Gaussian,
    Lmc,
    PsForward,
    PsBackward,
    Ps,
    Ou,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum PerturbationKind {
    Zero,
    Sinusoid,
    SmoothedNorm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum BackwardChoice {
    Grid,
    Rejection,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum InitKind {
    Dirac,
    Gaussian,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub dim: usize,
    pub alpha: f64,
    /// Defaults to the largest quadratic curvature.
    pub beta: Option<f64>,
    /// Lipschitz constant of `∇H`; defaults to the perturbation's own bound.
    #[serde(rename = "L")]
    pub l: Option<f64>,
    pub center: f64,
    /// Per-coordinate curvature of `V`; defaults to `alpha`.
    pub curvature: Option<f64>,
    pub perturbation: PerturbationKind,
    pub amplitude: f64,
    pub frequency: f64,
    pub scale: f64,

    pub kernel: KernelChoice,
    pub h: Option<f64>,
    #[serde(rename = "T")]
    pub t: Option<f64>,
    #[serde(rename = "N")]
    pub n: u64,
    pub backward: BackwardChoice,
    pub p: f64,

    pub init: InitKind,
    pub x0: f64,
    pub var0: f64,
    /// `T_2(J, S)` constants of the start; default to `(var0, 0)`.
    #[serde(rename = "J")]
    pub j: Option<f64>,
    #[serde(rename = "S")]
    pub s: Option<f64>,

    /// Explicit `(x, y)` pairs (1D); generated from the seed when empty.
    pub pairs: Vec<[f64; 2]>,
    pub pair_count: usize,
    pub pair_range: f64,
    pub tests: usize,
    pub samples: usize,
    pub seed: u64,
    pub eps: Vec<f64>,
    pub max_steps: usize,
    pub grid_lo: f64,
    pub grid_hi: f64,
    pub grid_nodes: usize,
    pub out: String,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            dim: 1,
            alpha: 1.0,
            beta: None,
            l: None,
            center: 0.0,
            curvature: None,
            perturbation: PerturbationKind::Zero,
            amplitude: 0.0,
            frequency: 1.0,
            scale: 0.0,
            kernel: KernelChoice::Lmc,
            h: None,
            t: None,
            n: 1,
            backward: BackwardChoice::Grid,
            p: 2.0,
            init: InitKind::Dirac,
            x0: 0.0,
            var0: 0.0,
            j: None,
            s: None,
            pairs: Vec::new(),
            pair_count: 20,
            pair_range: 3.0,
            tests: 100,
            samples: 200_000,
            seed: 0,
            eps: vec![0.25],
            max_steps: 1000,
            grid_lo: -10.0,
            grid_hi: 10.0,
            grid_nodes: 4096,
            out: "curvlab-out".into(),
        }
    }
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path).map_err(io_at(path))?)
    }

    /// Applies `overrides` (a JSON object of config keys) on top of `self`,
    /// with the same key checking as a config file.
    pub fn merged(&self, overrides: serde_json::Map<String, serde_json::Value>) -> Result<Self> {
        let mut value = serde_json::to_value(self)?;
        let map = value.as_object_mut().expect("config serialises to an object");
        for (k, v) in overrides {
            map.insert(k, v);
        }
        serde_json::from_value(value).map_err(|e| Error::Config(e.to_string()))
    }

    /// Fills every derived default so the config is self-describing.
    pub fn resolve(mut self) -> Self {
        let curvature = *self.curvature.get_or_insert(self.alpha);
        self.beta.get_or_insert(curvature.max(self.alpha));
        let own = match self.perturbation {
            PerturbationKind::Zero => 0.0,
            PerturbationKind::Sinusoid => (self.amplitude * self.frequency).abs(),
            PerturbationKind::SmoothedNorm => self.scale,
        };
        self.l.get_or_insert(own);
        let var0 = if self.init == InitKind::Dirac { 0.0 } else { self.var0 };
        self.j.get_or_insert(var0);
        self.s.get_or_insert(0.0);
        self
    }

    pub fn echo(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("config serialises")
    }

    pub fn lipschitz(&self) -> f64 {
        self.l.unwrap_or(0.0)
    }

    pub fn j(&self) -> f64 {
        self.j.unwrap_or(0.0)
    }

    pub fn s(&self) -> f64 {
        self.s.unwrap_or(0.0)
    }

    pub fn potential(&self) -> Result<PotentialSpec> {
        let curvature = self.curvature.unwrap_or(self.alpha);
        let perturbation = match self.perturbation {
            PerturbationKind::Zero => Perturbation::Zero,
            PerturbationKind::Sinusoid => Perturbation::Sinusoid { amplitude: self.amplitude, frequency: self.frequency },
            PerturbationKind::SmoothedNorm => Perturbation::SmoothedNorm { scale: self.scale },
        };
        Ok(PotentialSpec::new(
            self.dim,
            self.alpha,
            self.beta.unwrap_or(curvature.max(self.alpha)),
            self.lipschitz(),
            Confining::Quadratic { center: vec![self.center; self.dim], curvature: vec![curvature; self.dim] },
            perturbation,
        )?)
    }

    pub fn step(&self) -> Result<f64> {
        self.h.ok_or_else(|| Error::Config(format!("kernel {:?} needs h", self.kernel)))
    }

    pub fn time(&self) -> Result<f64> {
        self.t.ok_or_else(|| Error::Config("ou kernel needs T".into()))
    }

    pub fn kernel_spec(&self) -> Result<KernelSpec> {
        let potential = self.potential()?;
        let spec = match self.kernel {
            KernelChoice::GradStep => KernelSpec::grad_step(self.step()?, potential)?,
            KernelChoice::Gaussian => KernelSpec::gaussian(self.step()?, self.dim)?,
            KernelChoice::Lmc => KernelSpec::lmc(self.step()?, potential)?,
            KernelChoice::PsForward => KernelSpec::ps_forward(self.step()?, self.dim)?,
            KernelChoice::PsBackward => KernelSpec::ps_backward(self.step()?, potential)?,
            KernelChoice::Ps => KernelSpec::ps(self.step()?, potential)?,
            KernelChoice::Ou => KernelSpec::ou_exact(self.time()?, potential)?,
        };
        Ok(match (self.kernel, self.backward) {
            (KernelChoice::PsBackward | KernelChoice::Ps, BackwardChoice::Grid) if self.dim == 1 => {
                spec.with_backward(BackwardMethod::GridInverseCdf)?
            }
            (KernelChoice::PsBackward | KernelChoice::Ps, _) => spec.with_backward(BackwardMethod::Rejection)?,
            _ => spec,
        })
    }

    pub fn initial_law(&self) -> Result<GaussianMeasure> {
        let mean = vec![self.x0; self.dim];
        Ok(match self.init {
            InitKind::Dirac => GaussianMeasure::point_mass(mean)?,
            InitKind::Gaussian => GaussianMeasure::isotropic(mean, self.var0)?,
        })
    }

    pub fn grid(&self) -> Result<Grid> {
        Ok(Grid::new(self.grid_lo, self.grid_hi, self.grid_nodes)?)
    }

    /// Checks every precondition the run will rely on before any work.
    pub fn validate(&self) -> Result<()> {
        self.potential()?;
        if self.kernel != KernelChoice::Ou || self.t.is_some() {
            self.kernel_spec()?;
        }
        if !(self.p >= 1.0) {
            return Err(Error::Config("p must be >= 1".into()));
        }
        if self.n == 0 {
            return Err(Error::Config("N must be >= 1".into()));
        }
        if self.init == InitKind::Gaussian && !(self.var0 > 0.0) {
            return Err(Error::Config("gaussian init needs var0 > 0".into()));
        }
        if self.j() < 0.0 || self.s() < 0.0 {
            return Err(Error::Config("J and S must be >= 0".into()));
        }
        if self.eps.iter().any(|e| !(*e > 0.0 && *e < 1.0)) {
            return Err(Error::Config("eps values must lie in (0, 1)".into()));
        }
        if self.samples == 0 {
            return Err(Error::Config("samples must be >= 1".into()));
        }
        if !(self.pair_range >= 0.0) {
            return Err(Error::Config("pair_range must be >= 0".into()));
        }
        self.grid()?;
        Ok(())
    }
}
