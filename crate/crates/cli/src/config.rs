//! `key = value` experiment configuration.
//!
//! One key per line, `#` starts a comment, blank lines are ignored. Keys are
//! case-sensitive; unknown or repeated keys are rejected. Cycle lists accept
//! comma-separated integers and inclusive ranges `a..b` or `a..b:step`.

use std::collections::BTreeSet;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use floquet_coe::hilbert::{MAX_BOSE_DIM, MAX_SPIN_SITES};
use floquet_coe::rmt::R_BINS;
use floquet_coe::stats::{D_BINS, PT_BINS};
use floquet_coe::ModelParams;

use crate::error::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Experiment {
    LevelSpacing,
    EigenstateDist,
    PtConvergence,
    AntiConcentration,
    UndrivenCompare,
    VerifyIsingMap,
    RmtBaseline,
}

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Experiment::LevelSpacing => "level_spacing",
            Experiment::EigenstateDist => "eigenstate_dist",
            Experiment::PtConvergence => "pt_convergence",
            Experiment::AntiConcentration => "anti_concentration",
            Experiment::UndrivenCompare => "undriven_compare",
            Experiment::VerifyIsingMap => "verify_ising_map",
            Experiment::RmtBaseline => "rmt_baseline",
        }
    }

    fn default_cycles(&self) -> Vec<usize> {
        match self {
            Experiment::LevelSpacing => vec![1, 25],
            Experiment::PtConvergence => (1..=50).collect(),
            Experiment::AntiConcentration => (40..=60).step_by(5).collect(),
            Experiment::UndrivenCompare => (1..=100).collect(),
            Experiment::RmtBaseline => vec![1, 50],
            Experiment::EigenstateDist | Experiment::VerifyIsingMap => vec![1],
        }
    }
}

impl FromStr for Experiment {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s {
            "level_spacing" => Experiment::LevelSpacing,
            "eigenstate_dist" => Experiment::EigenstateDist,
            "pt_convergence" => Experiment::PtConvergence,
            "anti_concentration" => Experiment::AntiConcentration,
            "undriven_compare" => Experiment::UndrivenCompare,
            "verify_ising_map" => Experiment::VerifyIsingMap,
            "rmt_baseline" => Experiment::RmtBaseline,
            _ => return Err(format!("unknown experiment `{s}`")),
        })
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModelChoice {
    Ising,
    BoseHubbard,
    Coe,
    Goe,
}

impl ModelChoice {
    pub fn name(&self) -> &'static str {
        match self {
            ModelChoice::Ising => "ising",
            ModelChoice::BoseHubbard => "bose_hubbard",
            ModelChoice::Coe => "coe",
            ModelChoice::Goe => "goe",
        }
    }
}

impl FromStr for ModelChoice {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s {
            "ising" => ModelChoice::Ising,
            "bose_hubbard" => ModelChoice::BoseHubbard,
            "coe" => ModelChoice::Coe,
            "goe" => ModelChoice::Goe,
            _ => return Err(format!("unknown model `{s}`")),
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub model: ModelChoice,
    /// Chain length `L`.
    pub sites: usize,
    /// Boson number; defaults to half filling.
    pub particles: usize,
    /// Matrix dimension for `coe` and `goe`.
    pub dim: usize,
    pub params: ModelParams,
    pub cycles: Vec<usize>,
    pub realizations: usize,
    pub master_seed: u64,
    pub output_dir: PathBuf,
    pub pt_bins: usize,
    pub r_bins: usize,
    pub d_bins: usize,
    /// COE matrices sampled for the level-spacing reference.
    pub reference_samples: usize,
    /// Dimension of those COE matrices.
    pub reference_dim: usize,
    /// Anti-concentration threshold on `N p`.
    pub delta: f64,
    /// Cycle counts at or above this value form the long-time plateau.
    pub plateau_start: usize,
    /// Time step of GOE static evolution.
    pub goe_dt: f64,
    /// Circuits checked by `verify_ising_map`.
    pub trials: usize,
    /// Random bit-string pairs per circuit.
    pub pairs: usize,
    pub max_qubits: usize,
    pub max_layers: usize,
}

impl ExperimentConfig {
    pub fn new(experiment: Experiment) -> Self {
        let params = ModelParams::default();
        let cycles = experiment.default_cycles();
        let plateau_start = cycles.iter().max().copied().unwrap_or(1).div_ceil(2);
        Self {
            experiment,
            model: ModelChoice::Ising,
            sites: 8,
            particles: 4,
            dim: 256,
            params,
            cycles,
            realizations: 10,
            master_seed: 0,
            output_dir: PathBuf::from("output"),
            pt_bins: PT_BINS,
            r_bins: R_BINS,
            d_bins: D_BINS,
            reference_samples: 500,
            reference_dim: 256,
            delta: 1.0,
            plateau_start,
            goe_dt: 1.0,
            trials: 100,
            pairs: 4,
            max_qubits: 4,
            max_layers: 8,
        }
    }

    /// Parses the configuration text; every problem is a usage error.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut entries = Vec::new();
        let mut seen = BTreeSet::new();
        for (k, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| usage(k + 1, format!("expected `key = value`, got `{line}`")))?;
            let (key, value) = (key.trim(), value.trim());
            if !seen.insert(key.to_string()) {
                return Err(usage(k + 1, format!("duplicate key `{key}`")));
            }
            entries.push((k + 1, key.to_string(), value.to_string()));
        }
        let experiment = entries
            .iter()
            .find(|e| e.1 == "experiment")
            .ok_or_else(|| CliError::Usage("missing key `experiment`".into()))?;
        let mut cfg = ExperimentConfig::new(experiment.2.parse().map_err(|e| usage(experiment.0, e))?);
        let mut particles_set = false;
        let mut plateau_set = false;
        for (line, key, value) in &entries {
            let line = *line;
            match key.as_str() {
                "experiment" => {}
                "model" => cfg.model = value.parse().map_err(|e| usage(line, e))?,
                "L" => cfg.sites = number(line, key, value)?,
                "n_particles" => {
                    cfg.particles = number(line, key, value)?;
                    particles_set = true;
                }
                "N" => cfg.dim = number(line, key, value)?,
                "J" => cfg.params.coupling = real(line, key, value)?,
                "W" => cfg.params.disorder = real(line, key, value)?,
                "F" => cfg.params.drive = real(line, key, value)?,
                "U_int" => cfg.params.interaction = real(line, key, value)?,
                "omega" => cfg.params.omega = real(line, key, value)?,
                "M_list" => cfg.cycles = cycle_list(line, value)?,
                "realizations" => cfg.realizations = number(line, key, value)?,
                "master_seed" => cfg.master_seed = number(line, key, value)?,
                "output_dir" => cfg.output_dir = PathBuf::from(value),
                "pt_bins" => cfg.pt_bins = number(line, key, value)?,
                "r_bins" => cfg.r_bins = number(line, key, value)?,
                "d_bins" => cfg.d_bins = number(line, key, value)?,
                "reference_samples" => cfg.reference_samples = number(line, key, value)?,
                "reference_N" => cfg.reference_dim = number(line, key, value)?,
                "delta" => cfg.delta = real(line, key, value)?,
                "plateau_start" => {
                    cfg.plateau_start = number(line, key, value)?;
                    plateau_set = true;
                }
                "goe_dt" => cfg.goe_dt = real(line, key, value)?,
                "trials" => cfg.trials = number(line, key, value)?,
                "pairs" => cfg.pairs = number(line, key, value)?,
                "max_qubits" => cfg.max_qubits = number(line, key, value)?,
                "max_layers" => cfg.max_layers = number(line, key, value)?,
                _ => return Err(usage(line, format!("unknown key `{key}`"))),
            }
        }
        if !particles_set {
            cfg.particles = cfg.sites / 2;
        }
        if !plateau_set {
            cfg.plateau_start = cfg.cycles.iter().max().copied().unwrap_or(1).div_ceil(2);
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let p = &self.params;
        for (name, v) in [
            ("J", p.coupling),
            ("W", p.disorder),
            ("F", p.drive),
            ("U_int", p.interaction),
            ("omega", p.omega),
            ("delta", self.delta),
            ("goe_dt", self.goe_dt),
        ] {
            if !v.is_finite() || v < 0.0 {
                return Err(CliError::Usage(format!("{name} must be finite and nonnegative, got {v}")));
            }
        }
        if p.omega == 0.0 {
            return Err(CliError::Usage("omega must be positive".into()));
        }
        if self.goe_dt == 0.0 {
            return Err(CliError::Usage("goe_dt must be positive".into()));
        }
        if self.realizations == 0 {
            return Err(CliError::Usage("realizations must be at least 1".into()));
        }
        if self.pt_bins == 0 || self.r_bins == 0 || self.d_bins == 0 {
            return Err(CliError::Usage("bin counts must be positive".into()));
        }
        if self.cycles.is_empty() {
            return Err(CliError::Usage("M_list must not be empty".into()));
        }
        match self.model {
            ModelChoice::Ising if !(2..=MAX_SPIN_SITES).contains(&self.sites) => {
                return Err(CliError::Usage(format!(
                    "Ising chains need 2 <= L <= {MAX_SPIN_SITES}, got {}",
                    self.sites
                )))
            }
            ModelChoice::BoseHubbard => {
                if self.sites < 2 {
                    return Err(CliError::Usage("Bose-Hubbard chains need L >= 2".into()));
                }
                let dim = binomial(self.particles + self.sites - 1, self.particles);
                if dim > MAX_BOSE_DIM as u128 {
                    return Err(CliError::Usage(format!(
                        "Bose-Hubbard dimension {dim} exceeds {MAX_BOSE_DIM}"
                    )));
                }
            }
            ModelChoice::Coe | ModelChoice::Goe if !(3..=4096).contains(&self.dim) => {
                return Err(CliError::Usage(format!("N must lie in 3..=4096, got {}", self.dim)))
            }
            _ => {}
        }
        let allowed: &[ModelChoice] = match self.experiment {
            Experiment::LevelSpacing
            | Experiment::EigenstateDist
            | Experiment::PtConvergence
            | Experiment::AntiConcentration => {
                &[ModelChoice::Ising, ModelChoice::BoseHubbard, ModelChoice::Coe]
            }
            Experiment::UndrivenCompare => &[ModelChoice::Ising, ModelChoice::BoseHubbard],
            Experiment::RmtBaseline => &[ModelChoice::Coe, ModelChoice::Goe],
            Experiment::VerifyIsingMap => &[
                ModelChoice::Ising,
                ModelChoice::BoseHubbard,
                ModelChoice::Coe,
                ModelChoice::Goe,
            ],
        };
        if !allowed.contains(&self.model) {
            return Err(CliError::Usage(format!(
                "experiment {} does not support model {}",
                self.experiment,
                self.model.name()
            )));
        }
        if self.experiment == Experiment::LevelSpacing
            && (self.reference_samples < 100 || !(3..=4096).contains(&self.reference_dim))
        {
            return Err(CliError::Usage(
                "level_spacing needs reference_samples >= 100 and 3 <= reference_N <= 4096".into(),
            ));
        }
        if self.experiment == Experiment::VerifyIsingMap
            && (self.max_qubits == 0 || self.max_qubits > 12 || self.max_layers == 0 || self.pairs == 0)
        {
            return Err(CliError::Usage(
                "verify_ising_map needs 1 <= max_qubits <= 12, max_layers >= 1, pairs >= 1".into(),
            ));
        }
        Ok(())
    }
}

fn usage(line: usize, message: String) -> CliError {
    CliError::Usage(format!("config line {line}: {message}"))
}

fn number<T: FromStr>(line: usize, key: &str, value: &str) -> Result<T, CliError> {
    value
        .parse()
        .map_err(|_| usage(line, format!("`{key}` expects a nonnegative integer, got `{value}`")))
}

fn real(line: usize, key: &str, value: &str) -> Result<f64, CliError> {
    value
        .parse()
        .map_err(|_| usage(line, format!("`{key}` expects a number, got `{value}`")))
}

fn cycle_list(line: usize, value: &str) -> Result<Vec<usize>, CliError> {
    let mut out = Vec::new();
    for item in value.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        if let Some((a, rest)) = item.split_once("..") {
            let (b, step) = rest.split_once(':').unwrap_or((rest, "1"));
            let a: usize = number(line, "M_list", a.trim())?;
            let b: usize = number(line, "M_list", b.trim())?;
            let step: usize = number(line, "M_list", step.trim())?;
            if step == 0 || b < a {
                return Err(usage(line, format!("bad range `{item}`")));
            }
            out.extend((a..=b).step_by(step));
        } else {
            out.push(number(line, "M_list", item)?);
        }
    }
    Ok(out)
}

fn binomial(n: usize, k: usize) -> u128 {
    let k = k.min(n - k.min(n));
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > u64::MAX as u128 {
            return acc;
        }
    }
    acc
}
