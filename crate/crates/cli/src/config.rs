//! Run configuration: JSON file, per-experiment defaults and flag overrides.

use std::path::PathBuf;

use fhm_core::dynamics::TrotterMode;
use fhm_core::qeom::PoolKind;
use fhm_core::vqe::VqeOptions;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    GroundScan,
    Gaps,
    Spectral,
    Dynamics,
    Resources,
    Band,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::GroundScan => "ground-scan",
            Experiment::Gaps => "gaps",
            Experiment::Spectral => "spectral",
            Experiment::Dynamics => "dynamics",
            Experiment::Resources => "resources",
            Experiment::Band => "band",
        }
    }
}

/// Which solvers produce energies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Solver {
    Exact,
    Vqe,
    Both,
}

impl Solver {
    pub fn exact(self) -> bool {
        matches!(self, Solver::Exact | Solver::Both)
    }

    pub fn vqe(self) -> bool {
        matches!(self, Solver::Vqe | Solver::Both)
    }
}

/// Source of the excited states in the Lehmann sum.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum StateSource {
    Exact,
    Qeom,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum GroundSource {
    Exact,
    Vqe,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum PropagatorChoice {
    Trotter,
    Exact,
    Both,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum SpinChoice {
    Up,
    Down,
}

/// Inclusive uniform grid.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
}

impl Grid {
    pub const fn new(lo: f64, hi: f64, step: f64) -> Self {
        Grid { lo, hi, step }
    }

    pub fn points(&self) -> Vec<f64> {
        let n = ((self.hi - self.lo) / self.step + 1e-9).floor() as usize;
        (0..=n).map(|i| self.lo + self.step * i as f64).collect()
    }

    fn validate(&self, what: &str) -> Result<(), CliError> {
        if !(self.step > 0.0) || !(self.hi >= self.lo) || !self.lo.is_finite() || !self.hi.is_finite() {
            return Err(CliError::Config(format!("{what}: need lo <= hi and step > 0, got {self:?}")));
        }
        Ok(())
    }
}

/// A momentum given as a number or as a multiple of pi such as `"pi"`, `"-pi/3"` or `"2pi/3"`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Momentum {
    Value(f64),
    Expr(String),
}

impl Momentum {
    pub fn value(&self) -> Result<f64, CliError> {
        match self {
            Momentum::Value(v) => Ok(*v),
            Momentum::Expr(s) => parse_momentum(s),
        }
    }
}

pub fn parse_momentum(s: &str) -> Result<f64, CliError> {
    let bad = || CliError::Config(format!("cannot read momentum {s:?}"));
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect::<String>().to_lowercase();
    let t = t.replace('π', "pi");
    if let Ok(v) = t.parse::<f64>() {
        return Ok(v);
    }
    let (num, den) = match t.split_once('/') {
        Some((a, b)) => (a.to_string(), b.parse::<f64>().map_err(|_| bad())?),
        None => (t.clone(), 1.0),
    };
    let coeff = num.strip_suffix("pi").ok_or_else(bad)?;
    let coeff = match coeff.trim_end_matches('*') {
        "" | "+" => 1.0,
        "-" => -1.0,
        c => c.parse::<f64>().map_err(|_| bad())?,
    };
    if den == 0.0 {
        return Err(bad());
    }
    Ok(coeff * std::f64::consts::PI / den)
}

/// `"growing"` or `"fixed:n"`.
pub fn parse_mode(s: &str) -> Result<TrotterMode, CliError> {
    match s.trim() {
        "growing" => Ok(TrotterMode::Growing),
        other => other
            .strip_prefix("fixed:")
            .and_then(|n| n.parse::<usize>().ok())
            .filter(|&n| n > 0)
            .map(TrotterMode::Fixed)
            .ok_or_else(|| CliError::Config(format!("mode must be \"growing\" or \"fixed:n\" with n > 0, got {s:?}"))),
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ResourceSpec {
    /// `(L, d)` for the static ansatz counts.
    #[serde(rename = "static")]
    pub static_counts: Option<(usize, usize)>,
    /// `L` for the per-step Trotter counts.
    pub trotter: Option<usize>,
    /// Preset heavy-hex routes to bound; all presets when empty.
    pub routes: Vec<String>,
    /// Lattice sizes for the all-to-all same-spin scaling fit.
    pub scaling_sizes: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub experiment: Option<Experiment>,
    #[serde(rename = "L")]
    pub l: usize,
    pub t: f64,
    pub t_prime: f64,
    #[serde(rename = "U")]
    pub u: f64,
    /// Scan values of `t'`; scans fall back to their default grid when unset.
    pub t_primes: Option<Vec<f64>>,
    /// Scan values of `U`.
    pub u_values: Option<Vec<f64>>,
    /// `(n_up, n_down)`; half filling when unset.
    pub sector: Option<(usize, usize)>,
    pub depth: Option<usize>,
    pub solver: Solver,
    pub vqe: VqeOptions,
    pub seed: Option<u64>,
    pub eta: f64,
    /// Momenta; every ring momentum when unset.
    pub k: Option<Vec<Momentum>>,
    pub omega: Grid,
    pub spin: SpinChoice,
    pub states: StateSource,
    pub ground: GroundSource,
    pub pool: PoolKind,
    pub dt: f64,
    pub tau_max: f64,
    pub mode: String,
    pub propagator: PropagatorChoice,
    /// Reference site `i` of `C_ij`.
    pub site: usize,
    /// Fourier window `T`; `tau_max` when unset.
    pub window: Option<f64>,
    pub s_omega: Grid,
    pub resources: ResourceSpec,
    pub out: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            experiment: None,
            l: 6,
            t: 1.0,
            t_prime: 0.0,
            u: 2.0,
            t_primes: None,
            u_values: None,
            sector: None,
            depth: None,
            solver: Solver::Both,
            vqe: VqeOptions { fidelity: true, ..VqeOptions::default() },
            seed: None,
            eta: 0.2,
            k: None,
            omega: Grid::new(-10.0, 10.0, 0.02),
            spin: SpinChoice::Up,
            states: StateSource::Exact,
            ground: GroundSource::Exact,
            pool: PoolKind::Paper,
            dt: 0.1,
            tau_max: 10.0,
            mode: "growing".to_string(),
            propagator: PropagatorChoice::Trotter,
            site: 0,
            window: None,
            s_omega: Grid::new(0.0, 8.0, 0.05),
            resources: ResourceSpec::default(),
            out: PathBuf::from("out"),
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(format!("config: {e}")))
    }

    pub fn load(path: &std::path::Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Fills experiment-dependent defaults so the manifest records what actually ran.
    pub fn resolve(mut self, experiment: Experiment) -> Result<Self, CliError> {
        if let Some(e) = self.experiment {
            if e != experiment {
                return Err(CliError::Config(format!(
                    "config is for experiment {:?} but {:?} was requested",
                    e.name(),
                    experiment.name()
                )));
            }
        }
        self.experiment = Some(experiment);
        if let Some(seed) = self.seed {
            self.vqe.seed = seed;
        }
        self.seed = Some(self.vqe.seed);
        if self.sector.is_none() {
            self.sector = Some((self.l / 2, self.l / 2));
        }
        if self.window.is_none() {
            self.window = Some(self.tau_max);
        }
        let grid = |lo: f64, hi: f64, step: f64| Grid::new(lo, hi, step).points();
        match experiment {
            Experiment::GroundScan => {
                self.depth.get_or_insert(4);
                self.t_primes.get_or_insert_with(|| grid(0.0, 2.0, 0.25));
                self.u_values.get_or_insert_with(|| vec![0.0, 2.0, 4.0, 6.0]);
            }
            Experiment::Gaps => {
                self.depth.get_or_insert(6);
                self.t_primes.get_or_insert_with(|| grid(0.0, 2.0, 0.25));
                self.u_values.get_or_insert_with(|| vec![0.0, 2.0, 4.0, 6.0]);
            }
            Experiment::Band => {
                self.t_primes.get_or_insert_with(|| grid(0.0, 2.0, 0.5));
            }
            Experiment::Spectral | Experiment::Dynamics => {
                self.depth.get_or_insert(6);
                self.t_primes.get_or_insert_with(|| vec![self.t_prime]);
                self.u_values.get_or_insert_with(|| vec![self.u]);
            }
            Experiment::Resources => {
                let d = *self.depth.get_or_insert(1);
                self.resources.static_counts.get_or_insert((self.l, d));
                self.resources.trotter.get_or_insert(self.l);
                if self.resources.routes.is_empty() {
                    self.resources.routes = fhm_core::resources::PRESET_NAMES.iter().map(|s| s.to_string()).collect();
                }
                if self.resources.scaling_sizes.is_empty() {
                    self.resources.scaling_sizes = vec![8, 12, 16, 20, 24];
                }
            }
        }
        self.validate()?;
        Ok(self)
    }

    fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Config(m));
        if self.experiment != Some(Experiment::Resources) {
            fhm_core::model::HubbardParams::new(self.l, self.t, self.t_prime, self.u).map_err(|e| CliError::Config(e.to_string()))?;
        }
        for &v in self.t_primes.iter().flatten().chain(self.u_values.iter().flatten()) {
            if !v.is_finite() {
                return bad(format!("scan values must be finite, got {v}"));
            }
        }
        if self.depth == Some(0) {
            return bad("depth must be at least 1".to_string());
        }
        if !(self.eta > 0.0) {
            return bad(format!("eta must be positive, got {}", self.eta));
        }
        if !(self.dt > 0.0) || !(self.tau_max >= 0.0) {
            return bad(format!("need dt > 0 and tau_max >= 0, got dt={} tau_max={}", self.dt, self.tau_max));
        }
        if self.window.is_some_and(|w| !(w > 0.0) || w > self.tau_max + 1e-12) {
            return bad(format!("window must lie in (0, tau_max], got {:?}", self.window));
        }
        if self.site >= self.l {
            return bad(format!("site {} outside a ring of {} sites", self.site, self.l));
        }
        parse_mode(&self.mode)?;
        self.omega.validate("omega")?;
        self.s_omega.validate("s_omega")?;
        for k in self.k.iter().flatten() {
            let v = k.value()?;
            fhm_core::spectral::momentum_index(self.l, v).map_err(|e| CliError::Config(e.to_string()))?;
        }
        Ok(())
    }

    pub fn depth(&self) -> usize {
        self.depth.expect("resolved config")
    }

    pub fn sector(&self) -> (usize, usize) {
        self.sector.expect("resolved config")
    }

    pub fn t_primes(&self) -> &[f64] {
        self.t_primes.as_deref().unwrap_or(&[])
    }

    pub fn u_values(&self) -> &[f64] {
        self.u_values.as_deref().unwrap_or(&[])
    }

    pub fn window(&self) -> f64 {
        self.window.unwrap_or(self.tau_max)
    }

    pub fn trotter_mode(&self) -> TrotterMode {
        parse_mode(&self.mode).expect("validated mode")
    }

    pub fn momenta(&self) -> Vec<f64> {
        match &self.k {
            Some(ks) => ks.iter().map(|k| k.value().expect("validated momentum")).collect(),
            None => fhm_core::model::momenta(self.l),
        }
    }

    pub fn spin(&self) -> fhm_core::model::Spin {
        match self.spin {
            SpinChoice::Up => fhm_core::model::Spin::Up,
            SpinChoice::Down => fhm_core::model::Spin::Down,
        }
    }

    pub fn params(&self, t_prime: f64, u: f64) -> Result<fhm_core::model::HubbardParams, CliError> {
        fhm_core::model::HubbardParams::new(self.l, self.t, t_prime, u).map_err(|e| CliError::Config(e.to_string()))
    }
}
