//! TOML scenario files.
//!
//! A file holds one or more `[[scenario]]` tables. Each table expands into
//! one `ScenarioSpec` per listed design; the ER comparator, when present,
//! is attached to the first design only so its rows appear once.

use std::path::Path;

use aptest::calibration::Mode;
use aptest::harness::{tenth_burn_in, ErComparator, ScenarioSpec};
use aptest::outcome::{Direction, FamilyKind, OutcomeModel, PriorSpec};
use aptest::stats::{ApTestSpec, Comparator, TestSpec, Transform, Weights};
use aptest::{DesignConfig, DesignKind};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    scenario: Vec<ScenarioConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyName {
    Exponential,
    Bernoulli,
    Normal,
}

impl FamilyName {
    pub fn kind(&self) -> FamilyKind {
        match self {
            FamilyName::Exponential => FamilyKind::Exponential,
            FamilyName::Bernoulli => FamilyKind::Bernoulli,
            FamilyName::Normal => FamilyKind::Normal,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DirectionName {
    LargerIsBetter,
    SmallerIsBetter,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DesignName {
    StandardBrar,
    TunedBrar,
}

impl DesignName {
    fn kind(self) -> DesignKind {
        match self {
            DesignName::StandardBrar => DesignKind::StandardBrar,
            DesignName::TunedBrar => DesignKind::TunedBrar,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepKind {
    /// Null model only, at every size.
    Type1,
    /// Null and alternatives at every size.
    Power,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PriorConfig {
    Gamma { shape: f64, rate: f64 },
    Beta { alpha: f64, beta: f64 },
    Normal { mean: f64, variance: f64 },
}

impl PriorConfig {
    fn spec(self) -> PriorSpec<f64> {
        match self {
            PriorConfig::Gamma { shape, rate } => PriorSpec::Gamma { shape, rate },
            PriorConfig::Beta { alpha, beta } => PriorSpec::Beta { alpha, beta },
            PriorConfig::Normal { mean, variance } => PriorSpec::Normal { mean, variance },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum WeightsConfig {
    Named(String),
    Custom(Vec<f64>),
}

/// A user-defined member of the generalized AP family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomTestConfig {
    pub label: String,
    /// "identity" or "indicator".
    pub transform: String,
    #[serde(default)]
    pub threshold: Option<f64>,
    #[serde(default = "yes")]
    pub strict: bool,
    /// "ones", "time", "last" or an explicit list.
    pub weights: WeightsConfig,
    #[serde(default = "one")]
    pub t_min: u64,
}

fn yes() -> bool {
    true
}

fn one() -> u64 {
    1
}

/// One `[[scenario]]` table, before expansion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    pub family: FamilyName,
    #[serde(default)]
    pub direction: Option<DirectionName>,
    pub total_n: u64,
    pub burn_in: u64,
    pub block_size: u64,
    #[serde(default = "one")]
    pub t_min: u64,
    pub designs: Vec<DesignName>,
    pub alpha: f64,
    pub mode: Mode,
    /// Control-arm parameter; the null model sets both arms to it.
    pub control: f64,
    /// Experimental-arm parameters of the alternative models.
    #[serde(default)]
    pub alternatives: Vec<f64>,
    /// Known (control, experimental) SDs for normal outcomes.
    #[serde(default)]
    pub sd: Option<[f64; 2]>,
    #[serde(default)]
    pub prior: Option<PriorConfig>,
    /// Named tests: original, timedirect, lastblock, lr, lr1, fisher, z.
    pub tests: Vec<String>,
    #[serde(default)]
    pub custom_tests: Vec<CustomTestConfig>,
    #[serde(default)]
    pub er_comparator: Option<String>,
    #[serde(default = "default_permuted_block")]
    pub permuted_block_size: u64,
    pub replicates_eval: u64,
    pub replicates_calib: u64,
    pub seed: u64,
    /// Total sizes of a sweep; burn-in is a tenth of each size.
    #[serde(default)]
    pub sizes: Vec<u64>,
    #[serde(default)]
    pub sweep: Option<SweepKind>,
    /// Candidate null values for a calibration sensitivity table.
    #[serde(default)]
    pub null_sweep: Vec<f64>,
    /// Figure-data file this scenario contributes to, e.g. "fig2".
    #[serde(default)]
    pub figure: Option<String>,
    /// Null-model trajectories to write per design.
    #[serde(default)]
    pub dump_trajectories: u64,
}

fn default_permuted_block() -> u64 {
    DesignKind::DEFAULT_PERMUTED_BLOCK
}

/// A scenario table after validation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResolvedScenario {
    pub config: ScenarioConfig,
    /// One spec per design, in the order listed.
    pub specs: Vec<ScenarioSpec<f64>>,
}

impl ResolvedScenario {
    pub fn name(&self) -> &str {
        &self.config.name
    }

    /// Sizes to run, each paired with its burn-in.
    pub fn size_grid(&self) -> Vec<(u64, u64)> {
        self.config
            .sizes
            .iter()
            .map(|&n| (n, tenth_burn_in(n)))
            .collect()
    }
}

fn field_err(scenario: &str, field: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("scenario `{scenario}`, field `{field}`: {msg}"))
}

fn named_test(name: &str) -> Option<TestSpec<f64>> {
    Some(match name {
        "original" => TestSpec::original(),
        "timedirect" => TestSpec::timedirect(),
        "lastblock" => TestSpec::last_block(),
        other => TestSpec::Comparator(comparator(other)?),
    })
}

fn comparator(name: &str) -> Option<Comparator> {
    Some(match name {
        "lr" => Comparator::LikelihoodRatioTwoSided,
        "lr1" => Comparator::LikelihoodRatio,
        "fisher" => Comparator::FisherExact,
        "z" => Comparator::ZTest,
        _ => return None,
    })
}

fn custom_test(c: &CustomTestConfig) -> Result<TestSpec<f64>, String> {
    let f = match c.transform.as_str() {
        "identity" => Transform::Identity,
        "indicator" => Transform::Indicator {
            threshold: c.threshold.unwrap_or(0.5),
            strict: c.strict,
        },
        other => return Err(format!("unknown transform `{other}`")),
    };
    let w = match &c.weights {
        WeightsConfig::Named(s) => match s.as_str() {
            "ones" => Weights::Ones,
            "time" => Weights::Time,
            "last" => Weights::LastBlockOnly,
            other => return Err(format!("unknown weights `{other}`")),
        },
        WeightsConfig::Custom(v) => Weights::Custom(v.clone()),
    };
    let spec = ApTestSpec::new(f, w, c.t_min).map_err(|e| e.to_string())?;
    Ok(TestSpec::Ap {
        label: c.label.clone(),
        spec,
    })
}

fn model(cfg: &ScenarioConfig, experimental: f64) -> aptest::Result<OutcomeModel<f64>> {
    let control = cfg.control;
    let m = match cfg.family {
        FamilyName::Exponential => OutcomeModel::exponential(control, experimental)?,
        FamilyName::Bernoulli => OutcomeModel::bernoulli(control, experimental)?,
        FamilyName::Normal => {
            let [s0, s1] = cfg.sd.unwrap_or([1.0, 1.0]);
            OutcomeModel::normal(control, experimental, s0, s1)?
        }
    };
    Ok(match cfg.direction {
        Some(DirectionName::LargerIsBetter) => m.with_direction(Direction::LargerIsBetter),
        Some(DirectionName::SmallerIsBetter) => m.with_direction(Direction::SmallerIsBetter),
        None => m,
    })
}

impl ScenarioConfig {
    /// Validates every field and expands the table into one spec per design.
    pub fn resolve(&self) -> Result<ResolvedScenario, CliError> {
        let name = self.name.as_str();
        if name.is_empty()
            || !name
                .chars()
                .all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_')
        {
            return Err(field_err(name, "name", "use letters, digits, '-' or '_'"));
        }
        if self.designs.is_empty() {
            return Err(field_err(name, "designs", "list at least one design"));
        }
        if self.family != FamilyName::Normal && self.sd.is_some() {
            return Err(field_err(name, "sd", "only normal outcomes take known SDs"));
        }
        if self.sweep.is_some() != !self.sizes.is_empty() {
            return Err(field_err(
                name,
                "sweep",
                "`sweep` and `sizes` must be given together",
            ));
        }
        if !self.null_sweep.is_empty() && self.family == FamilyName::Exponential {
            return Err(field_err(
                name,
                "null_sweep",
                "exponential calibration does not depend on the common rate",
            ));
        }

        let kind = self.family.kind();
        let prior = self
            .prior
            .map(PriorConfig::spec)
            .unwrap_or_else(|| PriorSpec::default_for(kind));
        let null_model = model(self, self.control).map_err(|e| field_err(name, "control", e))?;
        let alternative_models = self
            .alternatives
            .iter()
            .map(|&v| model(self, v))
            .collect::<aptest::Result<Vec<_>>>()
            .map_err(|e| field_err(name, "alternatives", e))?;

        let mut tests = Vec::new();
        for t in &self.tests {
            tests.push(
                named_test(t)
                    .ok_or_else(|| field_err(name, "tests", format!("unknown test `{t}`")))?,
            );
        }
        for c in &self.custom_tests {
            tests.push(custom_test(c).map_err(|e| field_err(name, "custom_tests", e))?);
        }
        let mut labels: Vec<&str> = tests.iter().map(|t| t.label()).collect();
        labels.sort_unstable();
        if let Some(w) = labels.windows(2).find(|w| w[0] == w[1]) {
            return Err(field_err(
                name,
                "tests",
                format!("duplicate test label `{}`", w[0]),
            ));
        }
        let er = match &self.er_comparator {
            None => None,
            Some(s) => Some(ErComparator {
                comparator: comparator(s).ok_or_else(|| {
                    field_err(name, "er_comparator", format!("unknown comparator `{s}`"))
                })?,
                permuted_block_size: self.permuted_block_size,
            }),
        };

        let mut specs = Vec::with_capacity(self.designs.len());
        for (i, d) in self.designs.iter().enumerate() {
            let design = DesignConfig::new(
                self.total_n,
                self.burn_in,
                self.block_size,
                self.t_min,
                d.kind(),
            )
            .map_err(|e| field_err(name, "total_n/burn_in/block_size", e))?;
            let spec = ScenarioSpec {
                name: format!("{}/{}", self.name, d.kind().label()),
                design,
                prior,
                null_model,
                alternative_models: alternative_models.clone(),
                alpha: self.alpha,
                tests: tests.clone(),
                er_comparator: if i == 0 { er } else { None },
                mode: self.mode,
                replicates_eval: self.replicates_eval,
                replicates_calib: self.replicates_calib,
                seed: self.seed,
            };
            spec.validate()
                .map_err(|e| field_err(name, "scenario", e))?;
            for &n in &self.sizes {
                spec.with_size(n, tenth_burn_in(n))
                    .and_then(|s| s.validate())
                    .map_err(|e| field_err(name, "sizes", format!("N = {n}: {e}")))?;
            }
            specs.push(spec);
        }
        Ok(ResolvedScenario {
            config: self.clone(),
            specs,
        })
    }
}

/// Parses a TOML document into unvalidated scenario tables.
pub fn parse_tables(text: &str) -> Result<Vec<ScenarioConfig>, CliError> {
    let file: ConfigFile = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
    if file.scenario.is_empty() {
        return Err(CliError::Config("no [[scenario]] tables".into()));
    }
    Ok(file.scenario)
}

pub fn resolve_all(tables: &[ScenarioConfig]) -> Result<Vec<ResolvedScenario>, CliError> {
    let resolved = tables
        .iter()
        .map(ScenarioConfig::resolve)
        .collect::<Result<Vec<_>, _>>()?;
    let mut names: Vec<&str> = resolved.iter().map(|s| s.name()).collect();
    names.sort_unstable();
    if let Some(w) = names.windows(2).find(|w| w[0] == w[1]) {
        return Err(CliError::Config(format!(
            "duplicate scenario name `{}`",
            w[0]
        )));
    }
    Ok(resolved)
}

/// Parses and validates a TOML document.
pub fn parse_config(text: &str) -> Result<Vec<ResolvedScenario>, CliError> {
    resolve_all(&parse_tables(text)?)
}

pub fn read_tables(path: &Path) -> Result<Vec<ScenarioConfig>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    parse_tables(&text).map_err(|e| match e {
        CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
        other => other,
    })
}

pub fn load_config(path: &Path) -> Result<Vec<ResolvedScenario>, CliError> {
    resolve_all(&read_tables(path)?).map_err(|e| match e {
        CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
        other => other,
    })
}
