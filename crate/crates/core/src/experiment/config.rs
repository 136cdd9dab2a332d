//! Experiment configuration: TOML schema, defaults and validation.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::Algorithm;
use crate::sim::scenario::InputKind;

pub const DEFAULT_TRIALS: usize = 500;
pub const DEFAULT_SEED: u64 = 1;
pub const DEFAULT_SYSTEM_SEED: u64 = 7;
pub const DEFAULT_OUTPUT_DIR: &str = "results";

/// Which experiment the configuration describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    /// Linear-phase identification; LMS/CLMS step sizes matched to the
    /// logarithmic algorithms' plateaus.
    Exp1,
    /// CLMLS theory against simulation over several SNRs.
    Exp2Snr,
    /// CLMLS theory against simulation over several step sizes.
    Exp2Mu,
    /// Sparse-system tracking across three sparsity segments.
    Exp3,
    Custom,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 5] = [Self::Exp1, Self::Exp2Snr, Self::Exp2Mu, Self::Exp3, Self::Custom];

    pub fn name(self) -> &'static str {
        match self {
            Self::Exp1 => "exp1",
            Self::Exp2Snr => "exp2-snr",
            Self::Exp2Mu => "exp2-mu",
            Self::Exp3 => "exp3",
            Self::Custom => "custom",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Self::ALL.into_iter().find(|k| k.name() == s).ok_or_else(|| {
            let names: Vec<_> = Self::ALL.iter().map(|k| k.name()).collect();
            format!("unknown experiment `{s}`; expected one of: {}", names.join(", "))
        })
    }
}

/// Linear constraint family applied to the filter.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstraintKind {
    /// Symmetric impulse response.
    LinearPhase,
    /// Sum of taps fixed to the true system's DC gain.
    DcGain,
}

impl ConstraintKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::LinearPhase => "linear-phase",
            Self::DcGain => "dc-gain",
        }
    }
}

impl FromStr for ConstraintKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "linear-phase" => Ok(Self::LinearPhase),
            "dc-gain" => Ok(Self::DcGain),
            _ => Err(format!("unknown constraints `{s}`; expected linear-phase or dc-gain")),
        }
    }
}

/// Observation noise, either as a variance or as SNR values in dB.
#[derive(Debug, Clone, PartialEq)]
pub enum NoiseSpec {
    Variance(f64),
    SnrDb(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParamsConfig {
    pub mu: f64,
    pub alpha: f64,
    /// Sparsity budget; `None` derives it from each stage's optimum.
    pub budget: Option<f64>,
    pub beta_slope: f64,
    /// Match LMS/CLMS step sizes to the LMLS/CLMLS plateaus (exp1).
    pub match_step_size: bool,
    /// Step-size bracket for matching; `None` means `[mu/64, mu]`.
    pub match_bounds: Option<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub input: InputKind,
    pub noise: NoiseSpec,
    pub mu_list: Vec<f64>,
    pub system_seed: u64,
    pub constraints: ConstraintKind,
}

/// A fully resolved, validated experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub algorithms: Vec<Algorithm>,
    pub filter_length: usize,
    pub iterations: usize,
    pub trials: usize,
    pub seed: u64,
    pub output_dir: PathBuf,
    pub params: ParamsConfig,
    pub scenario: ScenarioConfig,
}

/// One point of a parameter sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub mu: f64,
    pub snr_db: Option<f64>,
    /// Suffix appended to curve labels, e.g. `_snr20`; empty for single points.
    pub suffix: String,
}

impl ExperimentConfig {
    /// Default configuration of an experiment.
    pub fn defaults(kind: ExperimentKind) -> Self {
        let base = Self {
            experiment: kind,
            algorithms: vec![Algorithm::Clmls],
            filter_length: 10,
            iterations: 5000,
            trials: DEFAULT_TRIALS,
            seed: DEFAULT_SEED,
            output_dir: PathBuf::from(DEFAULT_OUTPUT_DIR),
            params: ParamsConfig {
                mu: 0.05,
                alpha: 0.5,
                budget: None,
                beta_slope: 10.0,
                match_step_size: false,
                match_bounds: None,
            },
            scenario: ScenarioConfig {
                input: InputKind::White,
                noise: NoiseSpec::Variance(0.01),
                mu_list: Vec::new(),
                system_seed: DEFAULT_SYSTEM_SEED,
                constraints: ConstraintKind::LinearPhase,
            },
        };
        match kind {
            ExperimentKind::Exp1 => Self {
                algorithms: vec![Algorithm::Lms, Algorithm::Lmls, Algorithm::Clms, Algorithm::Clmls],
                iterations: 10000,
                params: ParamsConfig { match_step_size: true, ..base.params },
                ..base
            },
            ExperimentKind::Exp2Snr => Self {
                scenario: ScenarioConfig { noise: NoiseSpec::SnrDb(vec![30.0, 25.0, 20.0]), ..base.scenario },
                ..base
            },
            ExperimentKind::Exp2Mu => Self {
                scenario: ScenarioConfig {
                    noise: NoiseSpec::SnrDb(vec![20.0]),
                    mu_list: vec![0.03, 0.05, 0.1],
                    ..base.scenario
                },
                ..base
            },
            ExperimentKind::Exp3 => Self {
                algorithms: vec![Algorithm::L1Clms, Algorithm::L1Wclms, Algorithm::L1Clmls, Algorithm::L1Wclmls],
                filter_length: 30,
                iterations: 9000,
                params: ParamsConfig { mu: 0.01, alpha: 1.0, ..base.params },
                scenario: ScenarioConfig {
                    noise: NoiseSpec::Variance(0.1),
                    constraints: ConstraintKind::DcGain,
                    ..base.scenario
                },
                ..base
            },
            ExperimentKind::Custom => base,
        }
    }

    /// Step sizes and SNRs swept by the experiment.
    pub fn sweep(&self) -> Vec<SweepPoint> {
        let snrs: Vec<Option<f64>> = match &self.scenario.noise {
            NoiseSpec::Variance(_) => vec![None],
            NoiseSpec::SnrDb(list) => list.iter().copied().map(Some).collect(),
        };
        let mus = if self.scenario.mu_list.is_empty() {
            vec![self.params.mu]
        } else {
            self.scenario.mu_list.clone()
        };
        let mut points = Vec::new();
        for &snr_db in &snrs {
            for &mu in &mus {
                let mut suffix = String::new();
                if snrs.len() > 1 {
                    suffix.push_str(&format!("_snr{}", snr_db.unwrap_or_default()));
                }
                if mus.len() > 1 {
                    suffix.push_str(&format!("_mu{mu}"));
                }
                points.push(SweepPoint { mu, snr_db, suffix });
            }
        }
        points
    }

    /// Serialises the resolved configuration; parsing the result yields an
    /// identical configuration.
    pub fn to_toml(&self) -> String {
        let raw = RawConfig {
            experiment: Some(self.experiment.name().into()),
            algorithms: Some(self.algorithms.iter().map(|a| a.name().to_string()).collect()),
            filter_length: Some(self.filter_length),
            iterations: Some(self.iterations),
            trials: Some(self.trials),
            seed: Some(self.seed),
            output_dir: Some(self.output_dir.to_string_lossy().into_owned()),
            params: Some(RawParams {
                mu: Some(self.params.mu),
                alpha: Some(self.params.alpha),
                budget: self.params.budget,
                beta_slope: Some(self.params.beta_slope),
                match_step_size: Some(self.params.match_step_size),
                match_bounds: self.params.match_bounds.map(|b| b.to_vec()),
            }),
            scenario: Some(RawScenario {
                input: Some(match self.scenario.input {
                    InputKind::White => "white".into(),
                    InputKind::Ar1 { .. } => "ar1".into(),
                }),
                ar1_coefficient: match self.scenario.input {
                    InputKind::Ar1 { rho } => Some(rho),
                    InputKind::White => None,
                },
                noise_variance: match self.scenario.noise {
                    NoiseSpec::Variance(v) => Some(v),
                    NoiseSpec::SnrDb(_) => None,
                },
                snr_db: match &self.scenario.noise {
                    NoiseSpec::SnrDb(list) => Some(list.clone()),
                    NoiseSpec::Variance(_) => None,
                },
                mu_list: (!self.scenario.mu_list.is_empty()).then(|| self.scenario.mu_list.clone()),
                system_seed: Some(self.scenario.system_seed),
                constraints: Some(self.scenario.constraints.name().into()),
            }),
        };
        toml::to_string(&raw).expect("configuration serialises")
    }
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    experiment: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    algorithms: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    filter_length: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    iterations: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    trials: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    output_dir: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    params: Option<RawParams>,
    #[serde(skip_serializing_if = "Option::is_none")]
    scenario: Option<RawScenario>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawParams {
    #[serde(skip_serializing_if = "Option::is_none")]
    mu: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    budget: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    beta_slope: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    match_step_size: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    match_bounds: Option<Vec<f64>>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    #[serde(skip_serializing_if = "Option::is_none")]
    input: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    ar1_coefficient: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    noise_variance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none", deserialize_with = "one_or_many")]
    snr_db: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    mu_list: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    system_seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    constraints: Option<String>,
}

fn one_or_many<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Option<Vec<f64>>, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum OneOrMany {
        One(f64),
        Many(Vec<f64>),
    }
    Ok(Some(match OneOrMany::deserialize(d)? {
        OneOrMany::One(x) => vec![x],
        OneOrMany::Many(v) => v,
    }))
}

/// Result of parsing: the resolved configuration and the defaults that
/// were filled in.
#[derive(Debug, Clone, PartialEq)]
pub struct Validated {
    pub config: ExperimentConfig,
    pub defaults_applied: Vec<String>,
}

/// 1-based line of byte offset `pos` in `src`.
fn line_of(src: &str, pos: usize) -> usize {
    src[..pos.min(src.len())].bytes().filter(|&b| b == b'\n').count() + 1
}

/// 1-based line where `key` is assigned, optionally inside `[table]`.
pub fn key_line(src: &str, table: Option<&str>, key: &str) -> Option<usize> {
    let mut current: Option<String> = None;
    for (i, line) in src.lines().enumerate() {
        let t = line.trim();
        if let Some(name) = t.strip_prefix('[').and_then(|r| r.split(']').next()) {
            current = Some(name.trim().to_string());
            continue;
        }
        let Some((lhs, _)) = t.split_once('=') else { continue };
        if lhs.trim() == key && current.as_deref() == table {
            return Some(i + 1);
        }
    }
    None
}

struct Ctx<'a> {
    src: &'a str,
    applied: Vec<String>,
}

impl Ctx<'_> {
    fn err(&self, table: Option<&str>, key: &str, message: impl Into<String>) -> Error {
        Error::Config {
            line: key_line(self.src, table, key),
            message: message.into(),
        }
    }

    fn default<T: fmt::Debug>(&mut self, value: Option<T>, name: &str, fallback: T) -> T {
        value.unwrap_or_else(|| {
            self.applied.push(format!("{name} default {fallback:?}"));
            fallback
        })
    }
}

/// Parses and validates a configuration document.
pub fn parse_config(src: &str) -> Result<Validated> {
    let raw: RawConfig = toml::from_str(src).map_err(|e| Error::Config {
        line: e.span().map(|s| line_of(src, s.start)),
        message: e.message().trim().to_string(),
    })?;
    let mut ctx = Ctx { src, applied: Vec::new() };

    let kind = match raw.experiment.as_deref() {
        Some(name) => name.parse::<ExperimentKind>().map_err(|m| ctx.err(None, "experiment", m))?,
        None => return Err(Error::Config { line: None, message: "missing required field `experiment`".into() }),
    };
    let d = ExperimentConfig::defaults(kind);

    let algorithms = match raw.algorithms {
        Some(names) => {
            if names.is_empty() {
                return Err(ctx.err(None, "algorithms", "algorithm list is empty"));
            }
            names
                .iter()
                .map(|n| n.parse::<Algorithm>().map_err(|m| ctx.err(None, "algorithms", m.to_string())))
                .collect::<Result<Vec<_>>>()?
        }
        None => {
            let names: Vec<_> = d.algorithms.iter().map(|a| a.name()).collect();
            ctx.applied.push(format!("algorithms default [{}]", names.join(", ")));
            d.algorithms.clone()
        }
    };

    let filter_length = ctx.default(raw.filter_length, "filter_length", d.filter_length);
    let iterations = ctx.default(raw.iterations, "iterations", d.iterations);
    let trials = ctx.default(raw.trials, "trials", d.trials);
    let seed = ctx.default(raw.seed, "seed", d.seed);
    let output_dir = PathBuf::from(ctx.default(raw.output_dir, "output_dir", d.output_dir.to_string_lossy().into_owned()));
    if filter_length < 2 {
        return Err(ctx.err(None, "filter_length", "filter_length must be at least 2"));
    }
    if iterations == 0 {
        return Err(ctx.err(None, "iterations", "iterations must be at least 1"));
    }
    if trials == 0 {
        return Err(ctx.err(None, "trials", "trials must be at least 1"));
    }

    let rp = raw.params.unwrap_or_default();
    let t = Some("params");
    let params = ParamsConfig {
        mu: ctx.default(rp.mu, "params.mu", d.params.mu),
        alpha: ctx.default(rp.alpha, "params.alpha", d.params.alpha),
        budget: rp.budget,
        beta_slope: ctx.default(rp.beta_slope, "params.beta_slope", d.params.beta_slope),
        match_step_size: ctx.default(rp.match_step_size, "params.match_step_size", d.params.match_step_size),
        match_bounds: match rp.match_bounds {
            Some(b) if b.len() == 2 && b[0] > 0.0 && b[1] > b[0] => Some([b[0], b[1]]),
            Some(_) => return Err(ctx.err(t, "match_bounds", "match_bounds must be [low, high] with 0 < low < high")),
            None => None,
        },
    };
    if !(params.mu >= 0.0 && params.mu.is_finite()) {
        return Err(ctx.err(t, "mu", "mu must be finite and non-negative"));
    }
    if !(params.alpha > 0.0 && params.alpha.is_finite()) {
        return Err(ctx.err(t, "alpha", "alpha must be finite and positive"));
    }
    if !(params.beta_slope > 0.0 && params.beta_slope.is_finite()) {
        return Err(ctx.err(t, "beta_slope", "beta_slope must be finite and positive"));
    }
    if let Some(b) = params.budget {
        if !(b >= 0.0 && b.is_finite()) {
            return Err(ctx.err(t, "budget", "budget must be finite and non-negative"));
        }
    }

    let rs = raw.scenario.unwrap_or_default();
    let t = Some("scenario");
    let input = match rs.input.as_deref().unwrap_or_else(|| {
        ctx.applied.push("scenario.input default \"white\"".into());
        "white"
    }) {
        "white" => {
            if rs.ar1_coefficient.is_some() {
                return Err(ctx.err(t, "ar1_coefficient", "ar1_coefficient requires input = \"ar1\""));
            }
            InputKind::White
        }
        "ar1" => {
            let rho = rs.ar1_coefficient.ok_or_else(|| ctx.err(t, "input", "input = \"ar1\" requires ar1_coefficient"))?;
            if !(rho.abs() < 1.0) {
                return Err(ctx.err(t, "ar1_coefficient", "ar1_coefficient must lie in (-1, 1)"));
            }
            InputKind::Ar1 { rho }
        }
        other => return Err(ctx.err(t, "input", format!("unknown input `{other}`; expected white or ar1"))),
    };

    let noise = match (rs.noise_variance, rs.snr_db) {
        (Some(_), Some(_)) => {
            return Err(ctx.err(t, "snr_db", "noise_variance and snr_db are mutually exclusive; set only one"));
        }
        (Some(v), None) => {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(ctx.err(t, "noise_variance", "noise_variance must be finite and non-negative"));
            }
            NoiseSpec::Variance(v)
        }
        (None, Some(list)) => {
            if list.is_empty() || list.iter().any(|x| !x.is_finite()) {
                return Err(ctx.err(t, "snr_db", "snr_db must be a finite number or a non-empty list"));
            }
            NoiseSpec::SnrDb(list)
        }
        (None, None) => {
            ctx.applied.push(match &d.scenario.noise {
                NoiseSpec::Variance(v) => format!("scenario.noise_variance default {v:?}"),
                NoiseSpec::SnrDb(l) => format!("scenario.snr_db default {l:?}"),
            });
            d.scenario.noise.clone()
        }
    };
    if let NoiseSpec::SnrDb(list) = &noise {
        if list.len() > 1 && kind != ExperimentKind::Exp2Snr {
            return Err(ctx.err(t, "snr_db", "a list of SNR values is only supported by exp2-snr"));
        }
    }

    let mu_list = match rs.mu_list {
        Some(list) => {
            if kind != ExperimentKind::Exp2Mu {
                return Err(ctx.err(t, "mu_list", "mu_list is only supported by exp2-mu"));
            }
            if list.is_empty() || list.iter().any(|&m| !(m >= 0.0 && m.is_finite())) {
                return Err(ctx.err(t, "mu_list", "mu_list must be a non-empty list of non-negative step sizes"));
            }
            list
        }
        None => {
            if !d.scenario.mu_list.is_empty() {
                ctx.applied.push(format!("scenario.mu_list default {:?}", d.scenario.mu_list));
            }
            d.scenario.mu_list.clone()
        }
    };

    let system_seed = ctx.default(rs.system_seed, "scenario.system_seed", d.scenario.system_seed);
    let constraints = match rs.constraints {
        Some(name) => name.parse::<ConstraintKind>().map_err(|m| ctx.err(t, "constraints", m))?,
        None => {
            ctx.applied.push(format!("scenario.constraints default \"{}\"", d.scenario.constraints.name()));
            d.scenario.constraints
        }
    };
    if kind == ExperimentKind::Exp3 && filter_length < 3 {
        return Err(ctx.err(None, "filter_length", "exp3 needs filter_length of at least 3"));
    }

    let config = ExperimentConfig {
        experiment: kind,
        algorithms,
        filter_length,
        iterations,
        trials,
        seed,
        output_dir,
        params,
        scenario: ScenarioConfig { input, noise, mu_list, system_seed, constraints },
    };
    Ok(Validated { config, defaults_applied: ctx.applied })
}

/// Reads and validates a configuration file.
pub fn load_config(path: &Path) -> Result<Validated> {
    let src = std::fs::read_to_string(path)?;
    parse_config(&src)
}

/// Commented template listing every field with its default.
pub fn config_template(kind: ExperimentKind) -> String {
    let d = ExperimentConfig::defaults(kind);
    let algorithms: Vec<_> = d.algorithms.iter().map(|a| format!("\"{}\"", a.name())).collect();
    let all: Vec<_> = Algorithm::ALL.iter().map(|a| a.name()).collect();
    let kinds: Vec<_> = ExperimentKind::ALL.iter().map(|k| k.name()).collect();
    let noise = match &d.scenario.noise {
        NoiseSpec::Variance(v) => format!("noise_variance = {v:?}\n# snr_db = 20.0"),
        NoiseSpec::SnrDb(l) => format!("# noise_variance = 0.01\nsnr_db = {l:?}"),
    };
    let mu_list = if d.scenario.mu_list.is_empty() {
        "# mu_list = [0.03, 0.05, 0.1]   # exp2-mu only".to_string()
    } else {
        format!("mu_list = {:?}", d.scenario.mu_list)
    };
    format!(
        "# Experiment configuration. Every field except `experiment` is optional;\n\
         # the values below are the defaults for `{kind}`.\n\
         \n\
         # One of: {kinds}\n\
         experiment = \"{kind}\"\n\
         \n\
         # Any of: {all}\n\
         algorithms = [{algorithms}]\n\
         filter_length = {len}\n\
         iterations = {iters}\n\
         trials = {trials}\n\
         seed = {seed}\n\
         output_dir = \"{out}\"\n\
         \n\
         [params]\n\
         mu = {mu:?}\n\
         alpha = {alpha:?}\n\
         beta_slope = {beta:?}\n\
         # Sparsity budget t; omitted means the measure of each stage's optimum.\n\
         # budget = 1.0\n\
         # Match LMS/CLMS step sizes to the LMLS/CLMLS plateaus.\n\
         match_step_size = {matching}\n\
         # Bracket for the matching search; omitted means [mu/64, mu].\n\
         # match_bounds = [0.0005, 0.05]\n\
         \n\
         [scenario]\n\
         # white or ar1 (then set ar1_coefficient)\n\
         input = \"white\"\n\
         # ar1_coefficient = 0.5\n\
         # Set either noise_variance or snr_db, not both.\n\
         {noise}\n\
         {mu_list}\n\
         system_seed = {system_seed}\n\
         # linear-phase or dc-gain\n\
         constraints = \"{constraints}\"\n",
        kinds = kinds.join(", "),
        all = all.join(", "),
        algorithms = algorithms.join(", "),
        len = d.filter_length,
        iters = d.iterations,
        trials = d.trials,
        seed = d.seed,
        out = d.output_dir.display(),
        mu = d.params.mu,
        alpha = d.params.alpha,
        beta = d.params.beta_slope,
        matching = d.params.match_step_size,
        system_seed = d.scenario.system_seed,
        constraints = d.scenario.constraints.name(),
    )
}
