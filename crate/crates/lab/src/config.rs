//! Experiment configuration: one JSON document with a schema version.

use chainlab::potential::{Potential, PotentialKind};
use chainlab::psystem::TrigProfile;
use chainlab::regime::{validate_regime, ScalingRegime};
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Thermo,
    Simulate,
    Hydro,
    Fluct,
    Verify,
}

/// A schema violation, reported with the offending field.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub field: String,
    pub reason: String,
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "config field `{}`: {}", self.field, self.reason)
    }
}

fn bad(field: &str, reason: impl Into<String>) -> ConfigError {
    ConfigError { field: field.into(), reason: reason.into() }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Model {
    pub beta: f64,
    #[serde(default)]
    pub sigma: f64,
    #[serde(default)]
    pub gamma: f64,
}

impl Default for Model {
    fn default() -> Self {
        Model { beta: 1.0, sigma: 0.0, gamma: 0.0 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThermoSection {
    pub tau_max: f64,
    pub nodes: usize,
    /// Stretch range for the tension table.
    pub r_max: f64,
    pub r_nodes: usize,
}

impl Default for ThermoSection {
    fn default() -> Self {
        ThermoSection { tau_max: 5.0, nodes: 201, r_max: 3.0, r_nodes: 121 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HydroSection {
    pub p_exponent: f64,
    /// Test function paired with the empirical fields.
    pub test: TrigProfile,
}

impl Default for HydroSection {
    fn default() -> Self {
        HydroSection { p_exponent: 1.0, test: TrigProfile { p0: 1.0, r0: 1.0, ..Default::default() } }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FluctObservable {
    Transport,
    Martingale,
    BoltzmannGibbs,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FluctSection {
    pub observable: FluctObservable,
    /// Fourier mode of the transported field.
    #[serde(default = "one_mode")]
    pub mode: i64,
    /// Observation times of the transport check.
    #[serde(default)]
    pub times: Vec<f64>,
    #[serde(default)]
    pub pbar: f64,
    #[serde(default)]
    pub tau: f64,
    /// Test function of the martingale or weight of the Boltzmann-Gibbs integrand.
    #[serde(default)]
    pub test: TrigProfile,
    /// Integrator CFL number for the Boltzmann-Gibbs run.
    #[serde(default = "default_cfl")]
    pub cfl: f64,
}

fn default_cfl() -> f64 {
    chainlab::dynamics::DEFAULT_CFL
}

fn one_mode() -> i64 {
    1
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VerifyCheck {
    EigSweep,
    Edgeworth,
    EeGap,
    Subgaussian,
    Poisson,
    Entropy,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifySection {
    pub checks: Vec<VerifyCheck>,
    #[serde(default = "thousand")]
    pub instances: usize,
}

fn thousand() -> usize {
    1000
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    #[serde(default)]
    pub kind: Option<Kind>,
    #[serde(default = "default_potential")]
    pub potential: PotentialKind,
    #[serde(default)]
    pub model: Model,
    /// Scaling regime; when present it overrides `model.sigma` and `model.gamma` per size.
    #[serde(default)]
    pub regime: Option<ScalingRegime>,
    #[serde(default = "default_sizes")]
    pub n: Vec<usize>,
    #[serde(default = "default_replicas")]
    pub replicas: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_t_end")]
    pub t_end: f64,
    #[serde(default = "default_interval")]
    pub interval: f64,
    #[serde(default)]
    pub initial: TrigProfile,
    #[serde(default)]
    pub out_dir: Option<String>,
    #[serde(default)]
    pub thermo: ThermoSection,
    #[serde(default)]
    pub hydro: HydroSection,
    #[serde(default)]
    pub fluct: Option<FluctSection>,
    #[serde(default)]
    pub verify: Option<VerifySection>,
}

fn default_potential() -> PotentialKind {
    PotentialKind::OneMinusCosine
}
fn default_sizes() -> Vec<usize> {
    vec![64]
}
fn default_replicas() -> usize {
    10
}
fn default_t_end() -> f64 {
    0.1
}
fn default_interval() -> f64 {
    0.01
}

impl ExperimentConfig {
    /// Parses and validates a config for `kind`.
    pub fn parse(text: &str, kind: Kind) -> Result<Self, ConfigError> {
        let cfg: ExperimentConfig = serde_json::from_str(text).map_err(|e| {
            let msg = e.to_string();
            let field = msg.split('`').nth(1).unwrap_or("<document>").to_string();
            bad(&field, msg)
        })?;
        cfg.validate(kind)?;
        Ok(cfg)
    }

    pub fn validate(&self, kind: Kind) -> Result<(), ConfigError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(bad("schema_version", format!("expected {SCHEMA_VERSION}, got {}", self.schema_version)));
        }
        if let Some(k) = self.kind {
            if k != kind {
                return Err(bad("kind", format!("config is for {k:?} but {kind:?} was requested")));
            }
        }
        if self.potential == PotentialKind::User {
            return Err(bad("potential", "user potentials cannot be given in a config file"));
        }
        if !(self.model.beta > 0.0 && self.model.beta.is_finite()) {
            return Err(bad("model.beta", "must be positive"));
        }
        if !(0.0..1.0).contains(&self.model.sigma) {
            return Err(bad("model.sigma", "must lie in [0, 1)"));
        }
        if !(self.model.gamma >= 0.0) {
            return Err(bad("model.gamma", "must be non-negative"));
        }
        if self.n.is_empty() {
            return Err(bad("n", "needs at least one size"));
        }
        if let Some(n) = self.n.iter().find(|&&n| n < 8) {
            return Err(bad("n", format!("sizes must be >= 8, got {n}")));
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(bad("t_end", "must be positive"));
        }
        if !(self.interval > 0.0 && self.interval <= self.t_end) {
            return Err(bad("interval", "must lie in (0, t_end]"));
        }
        if self.replicas == 0 {
            return Err(bad("replicas", "must be positive"));
        }
        if let Some(reg) = &self.regime {
            reg.validate().map_err(|e| bad("regime", e.to_string()))?;
        }
        match kind {
            Kind::Thermo => {
                let t = &self.thermo;
                if !(t.tau_max > 0.0 && t.tau_max <= 20.0) || t.nodes < 2 {
                    return Err(bad("thermo", "needs 0 < tau_max <= 20 and nodes >= 2"));
                }
                if !(t.r_max > 0.0) || t.r_nodes < 2 {
                    return Err(bad("thermo", "needs r_max > 0 and r_nodes >= 2"));
                }
            }
            Kind::Hydro => {
                let reg = self.regime.as_ref().ok_or_else(|| bad("regime", "required for hydro"))?;
                if !validate_regime(reg).allows_hydro() {
                    return Err(bad("regime", format!("rejected: {:?}", validate_regime(reg))));
                }
                if !(1.0..2.0).contains(&self.hydro.p_exponent) {
                    return Err(bad("hydro.p_exponent", "must lie in [1, 2)"));
                }
            }
            Kind::Fluct => {
                let f = self.fluct.as_ref().ok_or_else(|| bad("fluct", "required for fluct"))?;
                if !(f.cfl > 0.0 && f.cfl <= 1.0) {
                    return Err(bad("fluct.cfl", "must lie in (0, 1]"));
                }
                match f.observable {
                    FluctObservable::Transport => {
                        if f.times.is_empty() || f.times.iter().any(|t| !(*t > 0.0)) {
                            return Err(bad("fluct.times", "needs positive observation times"));
                        }
                    }
                    FluctObservable::BoltzmannGibbs => {
                        let reg = self.regime.as_ref().ok_or_else(|| bad("regime", "required for the Boltzmann-Gibbs statistic"))?;
                        let verdict = validate_regime(reg);
                        if !verdict.allows_fluct() {
                            return Err(bad("regime", format!("not admissible for fluctuations: {verdict:?}")));
                        }
                    }
                    FluctObservable::Martingale => {}
                }
            }
            Kind::Verify => {
                let v = self.verify.as_ref().ok_or_else(|| bad("verify", "required for verify"))?;
                if v.checks.is_empty() {
                    return Err(bad("verify.checks", "needs at least one check"));
                }
            }
            Kind::Simulate => {}
        }
        Ok(())
    }

    pub fn potential(&self) -> Potential {
        match self.potential {
            PotentialKind::Zero => Potential::Zero,
            _ => Potential::OneMinusCosine,
        }
    }

    /// `(σ, γ)` at size `n`: from the regime if given, else the explicit model values.
    pub fn sigma_gamma(&self, n: usize) -> (f64, f64) {
        match &self.regime {
            Some(reg) => (reg.sigma_n(n), reg.gamma_n(n)),
            None => (self.model.sigma, self.model.gamma),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(json: &str, kind: Kind) -> Result<ExperimentConfig, ConfigError> {
        ExperimentConfig::parse(json, kind)
    }

    #[test]
    fn minimal_config_takes_defaults() {
        let cfg = parse(r#"{"schema_version": 1}"#, Kind::Thermo).unwrap();
        assert_eq!(cfg.n, vec![64]);
        assert_eq!(cfg.model.beta, 1.0);
    }

    #[test]
    fn violations_name_the_field() {
        let cases = [
            (r#"{"schema_version": 2}"#, "schema_version"),
            (r#"{"schema_version": 1, "n": [4]}"#, "n"),
            (r#"{"schema_version": 1, "t_end": 0}"#, "t_end"),
            (r#"{"schema_version": 1, "model": {"beta": -1}}"#, "model.beta"),
            (r#"{"schema_version": 1, "bogus": 3}"#, "bogus"),
            (r#"{"schema_version": 1, "kind": "verify"}"#, "kind"),
        ];
        for (json, field) in cases {
            assert_eq!(parse(json, Kind::Thermo).unwrap_err().field, field, "{json}");
        }
    }

    #[test]
    fn fluctuation_regime_is_checked() {
        let json = r#"{"schema_version": 1, "regime": {"a": 0.1, "b": 0.9}, "fluct": {"observable": "boltzmann_gibbs"}}"#;
        assert_eq!(parse(json, Kind::Fluct).unwrap_err().field, "regime");
        let ok = r#"{"schema_version": 1, "regime": {"a": 0.25, "b": 0.25}, "fluct": {"observable": "boltzmann_gibbs"}}"#;
        assert!(parse(ok, Kind::Fluct).is_ok());
    }

    #[test]
    fn regime_overrides_model() {
        let cfg = parse(r#"{"schema_version": 1, "model": {"beta": 1, "sigma": 0.5}, "regime": {"a": 0.25, "b": 0.25}}"#, Kind::Simulate).unwrap();
        let (s, g) = cfg.sigma_gamma(16);
        assert!((s - 0.5).abs() < 1e-15 && (g - 2.0).abs() < 1e-15);
    }
}
