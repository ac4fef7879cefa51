//! Experiment configuration: TOML file, `MLIDM_*` environment overrides and
//! command-line overrides, resolved against the Table II defaults.
//!
//! Precedence is file < environment < flags. Angles are in degrees here and
//! converted to radians when the core types are built.

use std::fs;
use std::path::{Path, PathBuf};

use mli_dm::link_sim::{BerSweepConfig, ErrorModel};
use mli_dm::metrics::SsrSweepConfig;
use mli_dm::{deg_to_rad, ArrayGeometry, Method, Regime, Scenario};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

pub const ENV_PREFIX: &str = "MLIDM_";
pub const DEFAULT_SEED: u64 = 2017;
pub const DEFAULT_BER_SNR_DB: f64 = 14.0;
pub const DEFAULT_TRIALS: usize = 200;
pub const DEFAULT_SYMBOLS_PER_TRIAL: usize = 1000;

const KEYS: &[&str] = &[
    "n_antennas",
    "spacing_wl",
    "desired_angles_deg",
    "eaves_angles_deg",
    "eaves_known",
    "ps",
    "beta1_sq",
    "beta2_sq",
    "delta_theta_max_deg",
    "snr_db",
    "angle_grid_deg",
    "trials",
    "symbols_per_trial",
    "seed",
    "methods",
];

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{origin}: {message}")]
    Parse { origin: String, message: String },
    #[error("invalid `{key}`: {message}")]
    Invalid { key: String, message: String },
}

fn invalid(key: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        key: key.to_string(),
        message: message.into(),
    }
}

/// Inclusive `start:step:stop` grid.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl Grid {
    pub fn values(&self, key: &str) -> Result<Vec<f64>, ConfigError> {
        if !(self.start.is_finite() && self.stop.is_finite() && self.step.is_finite()) {
            return Err(invalid(key, "grid bounds must be finite"));
        }
        if self.step <= 0.0 {
            return Err(invalid(key, "step must be positive"));
        }
        if self.stop < self.start {
            return Err(invalid(key, "stop is below start"));
        }
        let count = ((self.stop - self.start) / self.step + 1e-9).floor() as usize + 1;
        Ok((0..count).map(|i| self.start + i as f64 * self.step).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
enum SnrSpec {
    Scalar(f64),
    List(Vec<f64>),
    Grid(Grid),
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
enum MethodSpec {
    List(Vec<String>),
    Csv(String),
}

impl MethodSpec {
    fn names(&self) -> Vec<String> {
        match self {
            MethodSpec::List(v) => v.clone(),
            MethodSpec::Csv(s) => s.split(',').map(str::to_string).collect(),
        }
    }
}

/// One layer of settings; every key is optional.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
struct Layer {
    n_antennas: Option<usize>,
    spacing_wl: Option<f64>,
    desired_angles_deg: Option<Vec<f64>>,
    eaves_angles_deg: Option<Vec<f64>>,
    eaves_known: Option<bool>,
    ps: Option<f64>,
    beta1_sq: Option<f64>,
    beta2_sq: Option<f64>,
    delta_theta_max_deg: Option<f64>,
    snr_db: Option<SnrSpec>,
    angle_grid_deg: Option<Grid>,
    trials: Option<usize>,
    symbols_per_trial: Option<usize>,
    seed: Option<u64>,
    methods: Option<MethodSpec>,
}

impl Layer {
    /// Keys set in `upper` replace the ones here.
    fn overlay(self, upper: Layer) -> Layer {
        Layer {
            n_antennas: upper.n_antennas.or(self.n_antennas),
            spacing_wl: upper.spacing_wl.or(self.spacing_wl),
            desired_angles_deg: upper.desired_angles_deg.or(self.desired_angles_deg),
            eaves_angles_deg: upper.eaves_angles_deg.or(self.eaves_angles_deg),
            eaves_known: upper.eaves_known.or(self.eaves_known),
            ps: upper.ps.or(self.ps),
            beta1_sq: upper.beta1_sq.or(self.beta1_sq),
            beta2_sq: upper.beta2_sq.or(self.beta2_sq),
            delta_theta_max_deg: upper.delta_theta_max_deg.or(self.delta_theta_max_deg),
            snr_db: upper.snr_db.or(self.snr_db),
            angle_grid_deg: upper.angle_grid_deg.or(self.angle_grid_deg),
            trials: upper.trials.or(self.trials),
            symbols_per_trial: upper.symbols_per_trial.or(self.symbols_per_trial),
            seed: upper.seed.or(self.seed),
            methods: upper.methods.or(self.methods),
        }
    }
}

fn parse_layer(text: &str, origin: &str) -> Result<Layer, ConfigError> {
    toml::from_str(text).map_err(|e| ConfigError::Parse {
        origin: origin.to_string(),
        message: e.to_string().trim_end().to_string(),
    })
}

/// Reads `MLIDM_<KEY>` variables. Values are TOML literals
/// (`MLIDM_TRIALS=500`, `MLIDM_SNR_DB='{start=0,stop=35,step=5}'`);
/// bare comma lists such as `60,120` or `proposed,op` are accepted too.
fn env_layer<I>(vars: I) -> Result<Layer, ConfigError>
where
    I: IntoIterator<Item = (String, String)>,
{
    let mut vars: Vec<_> = vars
        .into_iter()
        .filter(|(k, _)| k.starts_with(ENV_PREFIX))
        .collect();
    vars.sort();
    let mut layer = Layer::default();
    for (var, raw) in vars {
        let key = var[ENV_PREFIX.len()..].to_ascii_lowercase();
        if !KEYS.contains(&key.as_str()) {
            return Err(invalid(&var, "unknown setting"));
        }
        let candidates = [
            format!("{key} = {raw}"),
            format!("{key} = [{raw}]"),
            format!("{key} = {}", toml::Value::String(raw.clone())),
        ];
        let parsed = candidates
            .iter()
            .find_map(|doc| toml::from_str::<Layer>(doc).ok())
            .map_or_else(|| parse_layer(&candidates[0], &var), Ok)?;
        layer = layer.overlay(parsed);
    }
    Ok(layer)
}

/// Command-line overrides; `None` keeps the lower layer.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub trials: Option<usize>,
    pub methods: Option<String>,
}

impl Overrides {
    fn layer(&self) -> Layer {
        Layer {
            seed: self.seed,
            trials: self.trials,
            methods: self.methods.clone().map(MethodSpec::Csv),
            ..Layer::default()
        }
    }
}

/// Fully resolved experiment description.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub n_antennas: usize,
    pub spacing_wl: f64,
    pub desired_angles_deg: Vec<f64>,
    pub eaves_angles_deg: Vec<f64>,
    pub eaves_known: bool,
    pub ps: f64,
    pub beta1_sq: f64,
    pub delta_theta_max_deg: f64,
    /// `None` lets each subcommand pick its default.
    pub snr_db: Option<Vec<f64>>,
    pub angle_grid_deg: Grid,
    pub trials: usize,
    pub symbols_per_trial: usize,
    pub seed: u64,
    #[serde(serialize_with = "method_names")]
    pub methods: Vec<Method>,
}

fn method_names<S: serde::Serializer>(methods: &[Method], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(methods.iter().map(|m| m.as_str()))
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        resolve(Layer::default()).expect("defaults are valid")
    }
}

/// Loads and validates a configuration. `env` is normally `std::env::vars()`.
pub fn load<I>(path: Option<&Path>, env: I, overrides: &Overrides) -> Result<ExperimentConfig, ConfigError>
where
    I: IntoIterator<Item = (String, String)>,
{
    let file = match path {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|source| ConfigError::Io {
                path: p.to_path_buf(),
                source,
            })?;
            parse_layer(&text, &p.display().to_string())?
        }
        None => Layer::default(),
    };
    resolve(file.overlay(env_layer(env)?).overlay(overrides.layer()))
}

/// Parses a configuration from TOML text with no environment or flags.
pub fn from_toml_str(text: &str) -> Result<ExperimentConfig, ConfigError> {
    resolve(parse_layer(text, "config")?)
}

fn check_angles(key: &str, angles: &[f64]) -> Result<(), ConfigError> {
    match angles.iter().find(|a| !(0.0..=180.0).contains(*a)) {
        Some(a) => Err(invalid(key, format!("angle {a} is outside [0, 180]"))),
        None => Ok(()),
    }
}

fn resolve(layer: Layer) -> Result<ExperimentConfig, ConfigError> {
    let n_antennas = layer.n_antennas.unwrap_or(16);
    if n_antennas < 2 {
        return Err(invalid("n_antennas", "need at least 2 elements"));
    }
    let spacing_wl = layer.spacing_wl.unwrap_or(0.5);
    if !(spacing_wl.is_finite() && spacing_wl > 0.0) {
        return Err(invalid("spacing_wl", "must be positive"));
    }

    let desired_angles_deg = layer.desired_angles_deg.unwrap_or_else(|| vec![60.0, 120.0]);
    check_angles("desired_angles_deg", &desired_angles_deg)?;
    if desired_angles_deg.is_empty() {
        return Err(invalid("desired_angles_deg", "need at least one desired user"));
    }
    if desired_angles_deg.len() >= n_antennas {
        return Err(invalid(
            "desired_angles_deg",
            format!(
                "{} users need more than {} antennas (K < N)",
                desired_angles_deg.len(),
                n_antennas
            ),
        ));
    }
    let eaves_angles_deg = layer.eaves_angles_deg.unwrap_or_else(|| vec![30.0, 90.0, 150.0]);
    check_angles("eaves_angles_deg", &eaves_angles_deg)?;
    let eaves_known = layer.eaves_known.unwrap_or(!eaves_angles_deg.is_empty());
    if eaves_known && eaves_angles_deg.is_empty() {
        return Err(invalid("eaves_known", "requires eaves_angles_deg"));
    }

    let ps = layer.ps.unwrap_or(1.0);
    if !(ps.is_finite() && ps > 0.0) {
        return Err(invalid("ps", "must be positive"));
    }
    let beta1_sq = match (layer.beta1_sq, layer.beta2_sq) {
        (Some(b1), Some(b2)) if (b1 + b2 - 1.0).abs() > 1e-9 => {
            return Err(invalid("beta2_sq", format!("beta1_sq + beta2_sq = {} != 1", b1 + b2)));
        }
        (Some(b1), _) => b1,
        (None, Some(b2)) => 1.0 - b2,
        (None, None) => 0.9,
    };
    if !(beta1_sq > 0.0 && beta1_sq <= 1.0) {
        return Err(invalid("beta1_sq", "must lie in (0, 1]"));
    }
    let delta_theta_max_deg = layer.delta_theta_max_deg.unwrap_or(5.0);
    if !(0.0..90.0).contains(&delta_theta_max_deg) {
        return Err(invalid("delta_theta_max_deg", "must lie in [0, 90)"));
    }

    let snr_db = match layer.snr_db {
        None => None,
        Some(SnrSpec::Scalar(v)) => Some(vec![v]),
        Some(SnrSpec::List(v)) => Some(v),
        Some(SnrSpec::Grid(g)) => Some(g.values("snr_db")?),
    };
    if let Some(v) = &snr_db {
        if v.is_empty() {
            return Err(invalid("snr_db", "empty SNR list"));
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(invalid("snr_db", "values must be finite"));
        }
    }
    let angle_grid_deg = layer.angle_grid_deg.unwrap_or(Grid {
        start: 0.0,
        stop: 180.0,
        step: 1.0,
    });
    check_angles("angle_grid_deg", &angle_grid_deg.values("angle_grid_deg")?)?;

    let trials = layer.trials.unwrap_or(DEFAULT_TRIALS);
    if trials == 0 {
        return Err(invalid("trials", "must be at least 1"));
    }
    let symbols_per_trial = layer.symbols_per_trial.unwrap_or(DEFAULT_SYMBOLS_PER_TRIAL);
    if symbols_per_trial == 0 {
        return Err(invalid("symbols_per_trial", "must be at least 1"));
    }

    let mut methods = Vec::new();
    match &layer.methods {
        None => methods.extend(Method::ALL),
        Some(spec) => {
            for name in spec.names() {
                let m: Method = name
                    .parse()
                    .map_err(|_| invalid("methods", format!("unknown method {:?}", name.trim())))?;
                if !methods.contains(&m) {
                    methods.push(m);
                }
            }
        }
    }
    if methods.is_empty() {
        return Err(invalid("methods", "no methods selected"));
    }

    Ok(ExperimentConfig {
        n_antennas,
        spacing_wl,
        desired_angles_deg,
        eaves_angles_deg,
        eaves_known,
        ps,
        beta1_sq,
        delta_theta_max_deg,
        snr_db,
        angle_grid_deg,
        trials,
        symbols_per_trial,
        seed: layer.seed.unwrap_or(DEFAULT_SEED),
        methods,
    })
}

impl ExperimentConfig {
    pub fn beta2_sq(&self) -> f64 {
        1.0 - self.beta1_sq
    }

    pub fn regime(&self) -> Regime {
        if self.eaves_known {
            Regime::KnownEavesdroppers
        } else {
            Regime::UnknownEavesdroppers
        }
    }

    pub fn scenario(&self) -> Result<Scenario, ConfigError> {
        let geom = ArrayGeometry::new(self.n_antennas, self.spacing_wl)
            .map_err(|e| invalid("n_antennas", e.to_string()))?;
        let errors = ErrorModel::new(self.delta_theta_max_deg.to_radians())
            .map_err(|e| invalid("delta_theta_max_deg", e.to_string()))?;
        let scenario = Scenario {
            geom,
            desired: self.desired_angles_deg.iter().map(|&a| deg_to_rad(a)).collect(),
            eaves: self.eaves_angles_deg.iter().map(|&a| deg_to_rad(a)).collect(),
            ps: self.ps,
            beta1_sq: self.beta1_sq,
            errors,
        };
        scenario
            .validate()
            .map_err(|e| invalid("desired_angles_deg", e.to_string()))?;
        Ok(scenario)
    }

    /// SNR used by `ber-sweep`; a list with more than one entry is rejected.
    pub fn ber_snr_db(&self) -> Result<f64, ConfigError> {
        match self.snr_db.as_deref() {
            None => Ok(DEFAULT_BER_SNR_DB),
            Some([v]) => Ok(*v),
            Some(_) => Err(invalid("snr_db", "ber-sweep takes a single SNR value")),
        }
    }

    /// SNR grid used by `ssr-sweep`, 0 to 35 dB in 5 dB steps by default.
    pub fn ssr_snr_db(&self) -> Vec<f64> {
        self.snr_db
            .clone()
            .unwrap_or_else(|| (0..=7).map(|i| 5.0 * i as f64).collect())
    }

    pub fn ber_sweep(&self) -> Result<BerSweepConfig, ConfigError> {
        Ok(BerSweepConfig {
            scenario: self.scenario()?,
            regime: self.regime(),
            snr_db: self.ber_snr_db()?,
            angle_grid: self
                .angle_grid_deg
                .values("angle_grid_deg")?
                .into_iter()
                .map(deg_to_rad)
                .collect(),
            trials: self.trials,
            symbols_per_trial: self.symbols_per_trial,
            seed: self.seed,
            methods: self.methods.clone(),
        })
    }

    pub fn ssr_sweep(&self) -> Result<SsrSweepConfig, ConfigError> {
        if self.eaves_angles_deg.is_empty() {
            return Err(invalid("eaves_angles_deg", "secrecy sum-rate needs eavesdropper angles"));
        }
        Ok(SsrSweepConfig {
            scenario: self.scenario()?,
            regime: self.regime(),
            snr_db: self.ssr_snr_db(),
            trials: self.trials,
            seed: self.seed,
            methods: self.methods.clone(),
        })
    }

    /// SHA-256 of the canonical JSON form of the resolved configuration.
    pub fn sha256_hex(&self) -> String {
        let json = serde_json::to_vec(self).expect("config serializes");
        Sha256::digest(&json)
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}
