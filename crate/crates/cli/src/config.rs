//! Run configuration: one JSON record per subcommand, plus flag overrides.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use aggmo_core::optim::Moments;
use aggmo_core::problems::{
    mlp_init, DiagonalQuadratic, FunnelDataset, MlpRegression, Reduction, Rosenbrock, ToyFunnel,
    FUNNEL_SIGMA,
};
use aggmo_core::{
    build_damping_vector, DampingDecay, DampingVector, Method, Objective, Optimizer, Schedule,
};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

/// Core validation failures while building from a config are config errors.
pub(crate) fn invalid(e: aggmo_core::Error) -> CliError {
    CliError::Config(e.to_string())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Self::Csv => "csv",
            Self::Json => "json",
        }
    }
}

impl FromStr for Format {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            _ => Err(CliError::config(format!(
                "unknown format {s:?} (expected csv or json)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MethodName {
    Cm,
    Nesterov,
    Aggmo,
    AggmoGen,
    BetaAvg,
}

impl MethodName {
    pub const ALL: [MethodName; 5] = [
        Self::Cm,
        Self::Nesterov,
        Self::Aggmo,
        Self::AggmoGen,
        Self::BetaAvg,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Cm => "cm",
            Self::Nesterov => "nesterov",
            Self::Aggmo => "aggmo",
            Self::AggmoGen => "aggmo-gen",
            Self::BetaAvg => "beta-avg",
        }
    }
}

impl fmt::Display for MethodName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MethodName {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| {
                let names: Vec<_> = Self::ALL.iter().map(|m| m.as_str()).collect();
                CliError::config(format!(
                    "unknown method {s:?} (expected one of {})",
                    names.join(", ")
                ))
            })
    }
}

/// An optimizer and its damping, as written in a config file.
///
/// Damping is either an explicit `betas` list or the exponential
/// constructor `damping_a`/`damping_k` (AggMo defaults to `a = 0.1, K = 3`).
/// Beta-averaged momentum takes the shapes `alpha`/`beta_shape`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MethodSpec {
    pub name: MethodName,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub betas: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub damping_a: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub damping_k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lr_scales: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta_shape: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truncation: Option<usize>,
    /// Damping decay `λ`: `β(i)_t = β(i)·λ^t`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decay: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

impl MethodSpec {
    pub fn new(name: MethodName) -> Self {
        Self {
            name,
            betas: None,
            damping_a: None,
            damping_k: None,
            lr_scales: None,
            alpha: None,
            beta_shape: None,
            truncation: None,
            decay: None,
            label: None,
        }
    }

    pub fn with_betas(name: MethodName, betas: &[f64]) -> Self {
        Self {
            betas: Some(betas.to_vec()),
            ..Self::new(name)
        }
    }

    /// Label used in file names and tables: the explicit label, or the method
    /// name followed by its damping.
    pub fn label(&self) -> String {
        if let Some(l) = &self.label {
            return l.clone();
        }
        let mut s = self.name.to_string();
        if let Some(b) = &self.betas {
            let parts: Vec<String> = b.iter().map(|x| x.to_string()).collect();
            s.push('-');
            s.push_str(&parts.join("_"));
        } else if self.damping_a.is_some() || self.damping_k.is_some() {
            s.push_str(&format!(
                "-a{}k{}",
                self.damping_a.unwrap_or(DEFAULT_DAMPING_A),
                self.damping_k.unwrap_or(DEFAULT_DAMPING_K)
            ));
        }
        s
    }

    fn damping(&self) -> Result<DampingVector> {
        match (&self.betas, self.damping_a, self.damping_k) {
            (Some(_), Some(_), _) | (Some(_), _, Some(_)) => Err(CliError::config(format!(
                "{}: give either betas or damping_a/damping_k, not both",
                self.name
            ))),
            (Some(b), None, None) => DampingVector::with_repeats(b.clone()).map_err(invalid),
            (None, a, k) => build_damping_vector(
                a.unwrap_or(DEFAULT_DAMPING_A),
                k.unwrap_or(DEFAULT_DAMPING_K),
            )
            .map_err(invalid),
        }
    }

    fn single_beta(&self) -> Result<f64> {
        if self.damping_a.is_some() || self.damping_k.is_some() {
            return Err(CliError::config(format!(
                "{} takes a single beta, not damping_a/damping_k",
                self.name
            )));
        }
        match self.betas.as_deref() {
            Some([b]) => Ok(*b),
            Some(b) => Err(CliError::config(format!(
                "{} takes exactly one beta, got {}",
                self.name,
                b.len()
            ))),
            None => Err(CliError::config(format!(
                "{} needs betas: [beta]",
                self.name
            ))),
        }
    }

    fn reject(&self, present: bool, field: &str) -> Result<()> {
        if present {
            Err(CliError::config(format!(
                "{}: field {field} does not apply",
                self.name
            )))
        } else {
            Ok(())
        }
    }

    /// Validates the fields and builds the core method.
    pub fn build(&self) -> Result<Method> {
        let not_beta_avg =
            self.alpha.is_some() || self.beta_shape.is_some() || self.truncation.is_some();
        let method = match self.name {
            MethodName::Cm | MethodName::Nesterov => {
                self.reject(not_beta_avg, "alpha/beta_shape/truncation")?;
                self.reject(self.lr_scales.is_some(), "lr_scales")?;
                let beta = self.single_beta()?;
                if self.name == MethodName::Cm {
                    Method::Cm { beta }
                } else {
                    Method::Nesterov { beta }
                }
            }
            MethodName::Aggmo => {
                self.reject(not_beta_avg, "alpha/beta_shape/truncation")?;
                self.reject(self.lr_scales.is_some(), "lr_scales")?;
                Method::AggMo {
                    damping: self.damping()?,
                }
            }
            MethodName::AggmoGen => {
                self.reject(not_beta_avg, "alpha/beta_shape/truncation")?;
                let lr_scales = self
                    .lr_scales
                    .clone()
                    .ok_or_else(|| CliError::config("aggmo-gen needs lr_scales"))?;
                Method::AggMoGeneralized {
                    damping: self.damping()?,
                    lr_scales,
                }
            }
            MethodName::BetaAvg => {
                self.reject(self.betas.is_some(), "betas")?;
                self.reject(
                    self.damping_a.is_some() || self.damping_k.is_some(),
                    "damping_a/damping_k",
                )?;
                self.reject(self.lr_scales.is_some(), "lr_scales")?;
                self.reject(self.decay.is_some(), "decay")?;
                let (Some(alpha), Some(beta)) = (self.alpha, self.beta_shape) else {
                    return Err(CliError::config("beta-avg needs alpha and beta_shape"));
                };
                Method::BetaAveraged {
                    moments: Moments::Beta { alpha, beta },
                    truncation: self.truncation,
                }
            }
        };
        Ok(method)
    }

    /// Builds an optimizer at `theta0`, including damping decay.
    pub fn optimizer(&self, theta0: Vec<f64>) -> Result<Optimizer> {
        let opt = Optimizer::new(self.build()?, theta0).map_err(invalid)?;
        Ok(match self.decay {
            Some(l) => opt.with_decay(DampingDecay::new(l).map_err(invalid)?),
            None => opt,
        })
    }
}

pub const DEFAULT_DAMPING_A: f64 = 0.1;
pub const DEFAULT_DAMPING_K: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReductionSpec {
    Sum,
    #[default]
    Mean,
}

impl From<ReductionSpec> for Reduction {
    fn from(r: ReductionSpec) -> Self {
        match r {
            ReductionSpec::Sum => Reduction::Sum,
            ReductionSpec::Mean => Reduction::Mean,
        }
    }
}

fn default_funnel_a() -> f64 {
    ToyFunnel::default().a
}

fn default_funnel_b() -> f64 {
    ToyFunnel::default().b
}

fn default_points() -> usize {
    aggmo_core::problems::FUNNEL_POINTS
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ProblemSpec {
    /// `½·Σ λ_j (x_j − m_j)²`.
    Quadratic {
        eigs: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        optimum: Option<Vec<f64>>,
    },
    Rosenbrock,
    ToyFunnel {
        #[serde(default = "default_funnel_a")]
        a: f64,
        #[serde(default = "default_funnel_b")]
        b: f64,
    },
    /// Funnel regression; the dataset and initial weights come from the run
    /// seed.
    MlpRegression {
        #[serde(default)]
        reduction: ReductionSpec,
        #[serde(default = "default_points")]
        points: usize,
    },
}

pub type DynObjective = Box<dyn Objective + Send + Sync>;

impl ProblemSpec {
    pub fn objective(&self, seed: u64) -> Result<DynObjective> {
        Ok(match self {
            Self::Quadratic { eigs, optimum } => {
                let q = DiagonalQuadratic::new(eigs.clone()).map_err(invalid)?;
                Box::new(match optimum {
                    Some(m) => q.with_offset(m.clone()).map_err(invalid)?,
                    None => q,
                })
            }
            Self::Rosenbrock => Box::new(Rosenbrock),
            Self::ToyFunnel { a, b } => {
                if !(a.is_finite() && b.is_finite() && *b > 0.0) {
                    return Err(CliError::config(format!(
                        "toy-funnel needs finite a and b > 0, got a={a}, b={b}"
                    )));
                }
                Box::new(ToyFunnel { a: *a, b: *b })
            }
            Self::MlpRegression { reduction, .. } => Box::new(
                MlpRegression::new(self.dataset(seed)?).with_reduction((*reduction).into()),
            ),
        })
    }

    pub fn dataset(&self, seed: u64) -> Result<FunnelDataset> {
        match self {
            Self::MlpRegression { points, .. } => {
                if *points == 0 {
                    return Err(CliError::config("mlp-regression needs at least one point"));
                }
                FunnelDataset::generate(seed, *points, FUNNEL_SIGMA, FUNNEL_SIGMA).map_err(invalid)
            }
            _ => Err(CliError::config("only mlp-regression has a dataset")),
        }
    }

    /// Starting point used when the config gives none.
    pub fn default_theta0(&self, seed: u64) -> Vec<f64> {
        match self {
            Self::Quadratic { eigs, .. } => vec![1.0; eigs.len()],
            Self::Rosenbrock => vec![0.0, 0.0],
            Self::ToyFunnel { .. } => vec![-2.0, 0.0],
            Self::MlpRegression { .. } => mlp_init(seed),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ScheduleSpec {
    #[default]
    Constant,
    InverseSqrt,
    Milestones {
        milestones: Vec<u64>,
        factor: f64,
    },
}

impl ScheduleSpec {
    pub fn build(&self, lr: f64) -> Result<Schedule> {
        Ok(match self {
            Self::Constant => Schedule::constant(lr).map_err(invalid)?,
            Self::InverseSqrt => Schedule::inverse_sqrt(lr).map_err(invalid)?,
            Self::Milestones { milestones, factor } => {
                Schedule::milestones(lr, milestones.clone(), *factor).map_err(invalid)?
            }
        })
    }
}

fn default_seeds() -> Vec<u64> {
    vec![0]
}

/// `optimize`: one trace per (seed, learning rate).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizeConfig {
    pub problem: ProblemSpec,
    pub method: MethodSpec,
    #[serde(default)]
    pub schedule: ScheduleSpec,
    pub lrs: Vec<f64>,
    pub steps: u64,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta0: Option<Vec<f64>>,
    #[serde(default = "default_divergence")]
    pub divergence_threshold: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub format: Format,
}

fn default_divergence() -> f64 {
    aggmo_core::RunOptions::default().divergence_threshold
}

impl Default for OptimizeConfig {
    /// AggMo `[0, 0.9, 0.99, 0.999]` at learning rate 0.33 on the quadratic
    /// with curvatures 1 and 0.001.
    fn default() -> Self {
        Self {
            problem: ProblemSpec::Quadratic {
                eigs: vec![1.0, 0.001],
                optimum: None,
            },
            method: MethodSpec::with_betas(MethodName::Aggmo, &[0.0, 0.9, 0.99, 0.999]),
            schedule: ScheduleSpec::Constant,
            lrs: vec![0.33],
            steps: 1000,
            seeds: default_seeds(),
            theta0: None,
            divergence_threshold: default_divergence(),
            out: None,
            format: Format::Csv,
        }
    }
}

fn funnel_default_methods() -> Vec<MethodSpec> {
    vec![
        MethodSpec::with_betas(MethodName::Aggmo, &[0.0, 0.9, 0.99, 0.999]),
        MethodSpec::with_betas(MethodName::Nesterov, &[0.999]),
        MethodSpec::with_betas(MethodName::Cm, &[0.999]),
    ]
}

/// `funnel-regression`: the noisy 1-D regression protocol.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FunnelConfig {
    pub seeds: Vec<u64>,
    pub lrs: Vec<f64>,
    pub steps: u64,
    pub points: usize,
    pub reduction: ReductionSpec,
    pub methods: Vec<MethodSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    pub format: Format,
}

impl Default for FunnelConfig {
    fn default() -> Self {
        Self {
            seeds: (0..5).collect(),
            lrs: vec![1e-6, 2e-6, 3e-6],
            steps: 4000,
            points: default_points(),
            reduction: ReductionSpec::Mean,
            methods: funnel_default_methods(),
            out: None,
            format: Format::Csv,
        }
    }
}

impl FunnelConfig {
    pub fn problem(&self) -> ProblemSpec {
        ProblemSpec::MlpRegression {
            reduction: self.reduction,
            points: self.points,
        }
    }
}

/// `sweep-rates`: convergence rate against condition number.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    pub methods: Vec<MethodSpec>,
    /// Explicit condition numbers; overrides the log-spaced range.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kappas: Option<Vec<f64>>,
    pub kappa_min: f64,
    pub kappa_max: f64,
    pub kappa_count: usize,
    /// Explicit learning-rate grid; overrides the refined automatic grid.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lr_grid: Option<Vec<f64>>,
    pub grid_points: usize,
    pub refinements: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    pub format: Format,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            methods: vec![
                MethodSpec::with_betas(MethodName::Cm, &[0.9]),
                MethodSpec::with_betas(MethodName::Cm, &[0.99]),
                MethodSpec::with_betas(MethodName::Aggmo, &[0.0, 0.9, 0.99]),
                MethodSpec::with_betas(MethodName::Nesterov, &[0.99]),
            ],
            kappas: None,
            kappa_min: 10.0,
            kappa_max: 1e7,
            kappa_count: 40,
            lr_grid: None,
            grid_points: 200,
            refinements: 6,
            out: None,
            format: Format::Csv,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeSpec {
    #[default]
    Exact,
    Approximate,
}

impl FromStr for ModeSpec {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(Self::Exact),
            "approximate" => Ok(Self::Approximate),
            _ => Err(CliError::config(format!(
                "unknown mode {s:?} (expected exact or approximate)"
            ))),
        }
    }
}

/// `equiv-check`: Nesterov against its AggMo reparameterization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EquivConfig {
    pub problem: ProblemSpec,
    pub beta: f64,
    pub gamma: f64,
    pub steps: u64,
    pub mode: ModeSpec,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta0: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    pub format: Format,
}

impl Default for EquivConfig {
    fn default() -> Self {
        Self {
            problem: ProblemSpec::Quadratic {
                eigs: vec![1.0, 0.001],
                optimum: None,
            },
            beta: 0.999,
            gamma: 0.5,
            steps: 1000,
            mode: ModeSpec::Exact,
            theta0: None,
            out: None,
            format: Format::Csv,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum RegretFamily {
    /// Quadratics with minima drawn uniformly from `[−half_width, half_width]^d`.
    DriftingQuadratic {
        curvature: f64,
        half_width: f64,
        radius: f64,
    },
    /// `±slope·Σθ_j` on alternate rounds.
    AlternatingLinear { slope: f64, radius: f64 },
}

/// `regret-check`: online runs against the regret bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RegretConfig {
    pub family: RegretFamily,
    /// Trial `i` uses `dims[i % dims.len()]`.
    pub dims: Vec<usize>,
    pub betas: Vec<f64>,
    pub gamma: f64,
    pub lambda: f64,
    pub steps: usize,
    pub trials: usize,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    pub format: Format,
}

impl Default for RegretConfig {
    fn default() -> Self {
        Self {
            family: RegretFamily::DriftingQuadratic {
                curvature: 1.0,
                half_width: 1.0,
                radius: 3.0,
            },
            dims: vec![1, 10],
            betas: vec![0.0, 0.9, 0.99],
            gamma: 0.5,
            lambda: 0.9,
            steps: 500,
            trials: 100,
            seed: 0,
            out: None,
            format: Format::Csv,
        }
    }
}

/// Every subcommand's configuration, tagged by command name. This is the form
/// echoed into run manifests.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
#[allow(clippy::large_enum_variant)]
pub enum RunConfig {
    Optimize(OptimizeConfig),
    FunnelRegression(FunnelConfig),
    SweepRates(SweepConfig),
    EquivCheck(EquivConfig),
    RegretCheck(RegretConfig),
}

impl RunConfig {
    pub fn command(&self) -> &'static str {
        match self {
            Self::Optimize(_) => "optimize",
            Self::FunnelRegression(_) => "funnel-regression",
            Self::SweepRates(_) => "sweep-rates",
            Self::EquivCheck(_) => "equiv-check",
            Self::RegretCheck(_) => "regret-check",
        }
    }

    /// Defaults for `command`.
    pub fn default_for(command: &str) -> Result<Self> {
        Ok(match command {
            "optimize" => Self::Optimize(OptimizeConfig::default()),
            "funnel-regression" => Self::FunnelRegression(FunnelConfig::default()),
            "sweep-rates" => Self::SweepRates(SweepConfig::default()),
            "equiv-check" => Self::EquivCheck(EquivConfig::default()),
            "regret-check" => Self::RegretCheck(RegretConfig::default()),
            _ => return Err(CliError::config(format!("unknown command {command:?}"))),
        })
    }

    /// Parses a config file body for `command`. The file holds the
    /// subcommand's fields without the `command` tag.
    pub fn from_json(command: &str, text: &str) -> Result<Self> {
        let parse =
            |e: serde_json::Error| CliError::config(format!("invalid {command} config: {e}"));
        Ok(match command {
            "optimize" => Self::Optimize(serde_json::from_str(text).map_err(parse)?),
            "funnel-regression" => {
                Self::FunnelRegression(serde_json::from_str(text).map_err(parse)?)
            }
            "sweep-rates" => Self::SweepRates(serde_json::from_str(text).map_err(parse)?),
            "equiv-check" => Self::EquivCheck(serde_json::from_str(text).map_err(parse)?),
            "regret-check" => Self::RegretCheck(serde_json::from_str(text).map_err(parse)?),
            _ => return Err(CliError::config(format!("unknown command {command:?}"))),
        })
    }

    pub fn out(&self) -> Option<&PathBuf> {
        match self {
            Self::Optimize(c) => c.out.as_ref(),
            Self::FunnelRegression(c) => c.out.as_ref(),
            Self::SweepRates(c) => c.out.as_ref(),
            Self::EquivCheck(c) => c.out.as_ref(),
            Self::RegretCheck(c) => c.out.as_ref(),
        }
    }

    pub fn format(&self) -> Format {
        match self {
            Self::Optimize(c) => c.format,
            Self::FunnelRegression(c) => c.format,
            Self::SweepRates(c) => c.format,
            Self::EquivCheck(c) => c.format,
            Self::RegretCheck(c) => c.format,
        }
    }

    /// Applies command-line overrides. Flags win over the file; a flag that
    /// has no meaning for the command is a configuration error.
    pub fn apply(&mut self, o: &Overrides) -> Result<()> {
        let command = self.command();
        let deny = |present: bool, flag: &str| -> Result<()> {
            if present {
                Err(CliError::config(format!(
                    "--{flag} does not apply to {command}"
                )))
            } else {
                Ok(())
            }
        };
        let damping_flags = o.betas.is_some() || o.damping_a.is_some() || o.damping_k.is_some();
        match self {
            Self::Optimize(c) => {
                deny(o.trials.is_some(), "trials")?;
                deny(o.lambda.is_some(), "lambda")?;
                deny(o.mode.is_some(), "mode")?;
                o.apply_method(&mut c.method)?;
                if let Some(lrs) = o.lrs()? {
                    c.lrs = lrs;
                }
                if let Some(s) = o.steps {
                    c.steps = s;
                }
                if let Some(s) = &o.seeds {
                    c.seeds = s.clone();
                }
                o.apply_output(&mut c.out, &mut c.format);
            }
            Self::FunnelRegression(c) => {
                deny(
                    o.method.is_some() || damping_flags,
                    "method/--betas/--damping-a/--damping-k",
                )?;
                deny(o.trials.is_some(), "trials")?;
                deny(o.lambda.is_some(), "lambda")?;
                deny(o.mode.is_some(), "mode")?;
                if let Some(lrs) = o.lrs()? {
                    c.lrs = lrs;
                }
                if let Some(s) = o.steps {
                    c.steps = s;
                }
                if let Some(s) = &o.seeds {
                    c.seeds = s.clone();
                }
                o.apply_output(&mut c.out, &mut c.format);
            }
            Self::SweepRates(c) => {
                deny(o.lr.is_some(), "lr")?;
                deny(o.steps.is_some(), "steps")?;
                deny(o.seeds.is_some(), "seed")?;
                deny(o.trials.is_some(), "trials")?;
                deny(o.lambda.is_some(), "lambda")?;
                deny(o.mode.is_some(), "mode")?;
                if o.method.is_some() || damping_flags {
                    let mut m = MethodSpec::new(MethodName::Aggmo);
                    o.apply_method(&mut m)?;
                    c.methods = vec![m];
                }
                if let Some(g) = &o.lr_grid {
                    c.lr_grid = Some(g.clone());
                }
                o.apply_output(&mut c.out, &mut c.format);
            }
            Self::EquivCheck(c) => {
                deny(o.method.is_some(), "method")?;
                deny(
                    o.damping_a.is_some() || o.damping_k.is_some(),
                    "damping-a/--damping-k",
                )?;
                deny(o.lr_grid.is_some(), "lr-grid")?;
                deny(o.seeds.is_some(), "seed")?;
                deny(o.trials.is_some(), "trials")?;
                deny(o.lambda.is_some(), "lambda")?;
                if let Some(b) = &o.betas {
                    match b.as_slice() {
                        [beta] => c.beta = *beta,
                        _ => {
                            return Err(CliError::config(
                                "equiv-check takes a single --betas value",
                            ))
                        }
                    }
                }
                if let Some(lr) = o.lr {
                    c.gamma = lr;
                }
                if let Some(s) = o.steps {
                    c.steps = s;
                }
                if let Some(m) = o.mode {
                    c.mode = m;
                }
                o.apply_output(&mut c.out, &mut c.format);
            }
            Self::RegretCheck(c) => {
                deny(
                    o.method.is_some_and(|m| m != MethodName::Aggmo),
                    "method (only aggmo)",
                )?;
                deny(o.lr_grid.is_some(), "lr-grid")?;
                deny(o.mode.is_some(), "mode")?;
                if damping_flags {
                    let mut m = MethodSpec::with_betas(MethodName::Aggmo, &c.betas);
                    o.apply_method(&mut m)?;
                    let Method::AggMo { damping } = m.build()? else {
                        unreachable!("method name is aggmo")
                    };
                    c.betas = damping.betas().to_vec();
                }
                if let Some(lr) = o.lr {
                    c.gamma = lr;
                }
                if let Some(s) = o.steps {
                    c.steps =
                        usize::try_from(s).map_err(|_| CliError::config("--steps is too large"))?;
                }
                match o.seeds.as_deref() {
                    None => {}
                    Some([s]) => c.seed = *s,
                    Some(_) => return Err(CliError::config("regret-check takes a single --seed")),
                }
                if let Some(t) = o.trials {
                    c.trials = t;
                }
                if let Some(l) = o.lambda {
                    c.lambda = l;
                }
                o.apply_output(&mut c.out, &mut c.format);
            }
        }
        Ok(())
    }
}

/// Command-line flags that override config fields.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub method: Option<MethodName>,
    pub betas: Option<Vec<f64>>,
    pub damping_a: Option<f64>,
    pub damping_k: Option<usize>,
    pub lr: Option<f64>,
    pub lr_grid: Option<Vec<f64>>,
    pub steps: Option<u64>,
    pub seeds: Option<Vec<u64>>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub trials: Option<usize>,
    pub lambda: Option<f64>,
    pub mode: Option<ModeSpec>,
}

impl Overrides {
    fn lrs(&self) -> Result<Option<Vec<f64>>> {
        match (self.lr, &self.lr_grid) {
            (Some(_), Some(_)) => Err(CliError::config("give either --lr or --lr-grid")),
            (Some(lr), None) => Ok(Some(vec![lr])),
            (None, Some(g)) => Ok(Some(g.clone())),
            (None, None) => Ok(None),
        }
    }

    /// `--method` starts a fresh spec; damping flags replace the damping.
    fn apply_method(&self, m: &mut MethodSpec) -> Result<()> {
        if self.betas.is_some() && (self.damping_a.is_some() || self.damping_k.is_some()) {
            return Err(CliError::config(
                "give either --betas or --damping-a/--damping-k",
            ));
        }
        if let Some(name) = self.method {
            *m = MethodSpec::new(name);
        }
        if let Some(b) = &self.betas {
            m.betas = Some(b.clone());
            m.damping_a = None;
            m.damping_k = None;
        }
        if self.damping_a.is_some() || self.damping_k.is_some() {
            m.betas = None;
            m.damping_a = self.damping_a.or(m.damping_a);
            m.damping_k = self.damping_k.or(m.damping_k);
        }
        Ok(())
    }

    fn apply_output(&self, out: &mut Option<PathBuf>, format: &mut Format) {
        if let Some(o) = &self.out {
            *out = Some(o.clone());
        }
        if let Some(f) = self.format {
            *format = f;
        }
    }
}
