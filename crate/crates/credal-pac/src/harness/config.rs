//! Experiment configuration: the TOML schema, validation, and the
//! canonical digest.
//!
//! A config document describes one Monte Carlo campaign. The layout is
//! documented in `docs/config-schema.md`; the short version:
//!
//! ```toml
//! [domain]
//! inputs = 4
//! labels = 2
//!
//! [hypotheses]
//! kind = "all_tables"          # or "explicit" with `tables = [[..], ..]`
//!
//! [distribution]               # classical mode: exactly one of
//! mass = [0.25, 0.0, ...]      # [distribution] / [credal]
//!
//! [credal]
//! vertices = [[...], [...]]
//!
//! [training]                   # credal mode only
//! mode = "fixed_vertex"
//! vertex = 0
//!
//! [campaign]
//! n = 20
//! trials = 100000
//! delta = 0.05
//! eps_grid = [0.05, 0.1, 0.2]
//! seed = 42
//! ```
//!
//! Unknown keys anywhere are errors. Probability entries below
//! [`MASS_CLAMP`] are clamped to zero at parse time so text round-off
//! cannot create phantom support.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::core::{DomainSpace, Hypothesis, HypothesisClass, LossFunction};
use crate::credal::CredalSet;
use crate::core::Distribution;

use super::HarnessError;

/// Probability entries strictly below this are treated as exact zeros
/// when a config is parsed.
pub const MASS_CLAMP: f64 = 1e-12;

/// Hypothesis classes larger than this are refused by the `all_tables`
/// generator at config level.
pub const ALL_TABLES_CAP: u64 = 4096;

// ---------------------------------------------------------------------------
// Raw TOML layer
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    domain: RawDomain,
    hypotheses: RawHypotheses,
    #[serde(skip_serializing_if = "Option::is_none")]
    loss: Option<RawLoss>,
    #[serde(skip_serializing_if = "Option::is_none")]
    distribution: Option<RawDistribution>,
    #[serde(skip_serializing_if = "Option::is_none")]
    credal: Option<RawCredal>,
    #[serde(skip_serializing_if = "Option::is_none")]
    training: Option<RawTraining>,
    campaign: RawCampaign,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDomain {
    inputs: usize,
    labels: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawHypotheses {
    kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    tables: Option<Vec<Vec<usize>>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLoss {
    kind: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDistribution {
    mass: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCredal {
    vertices: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTraining {
    mode: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    vertex: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCampaign {
    n: usize,
    trials: u64,
    delta: f64,
    eps_grid: Vec<f64>,
    seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    candidate_bound: Option<String>,
}

// ---------------------------------------------------------------------------
// Validated layer
// ---------------------------------------------------------------------------

/// How the hypothesis class is specified.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HypothesisSpec {
    /// Every total table `X -> Y`, in the canonical enumeration order.
    AllTables,
    /// An explicit ordered list of lookup tables.
    Explicit(Vec<Vec<usize>>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossKind {
    ZeroOne,
}

/// How each trial picks its training distribution from the credal set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrainingMode {
    /// Always train from the given vertex.
    FixedVertex(usize),
    /// A uniformly random vertex per trial.
    UniformVertex,
    /// A uniform-simplex mixture of the vertices per trial.
    RandomMixture,
    /// The vertex most favourable to the minimax-best hypothesis.
    OracleAligned,
    /// The vertex with the largest best-in-class risk.
    Adversarial,
}

/// Which analytic curve to attach to violation frequencies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CandidateBound {
    /// `min(1, |H| exp(-eps n))` — the realisable finite-class tail.
    RealisableUnion,
    /// `exp(-2 n eps^2)` — the uniform-deviation tail.
    GnTail,
    /// No analytic curve; every verdict is `consistent`.
    None,
}

/// A validated experiment configuration.
///
/// Probability vectors are stored in normalized form, so the canonical
/// digest identifies configs up to normalization and key order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub domain: DomainSpace,
    pub hypotheses: HypothesisSpec,
    pub loss: LossKind,
    pub distribution: Option<Vec<f64>>,
    pub credal_vertices: Option<Vec<Vec<f64>>>,
    pub training: Option<TrainingMode>,
    pub n: usize,
    pub trials: u64,
    pub delta: f64,
    pub eps_grid: Vec<f64>,
    pub seed: u64,
    pub candidate_bound: CandidateBound,
}

fn invalid(field: &str, message: impl Into<String>) -> HarnessError {
    HarnessError::Invalid {
        field: field.to_string(),
        message: message.into(),
    }
}

fn clamp_mass(field: &str, mass: &[f64]) -> Result<Vec<f64>, HarnessError> {
    mass.iter()
        .enumerate()
        .map(|(i, &m)| {
            if !m.is_finite() {
                Err(invalid(field, format!("entry {i} is not finite")))
            } else if m < 0.0 {
                Err(invalid(field, format!("entry {i} is negative ({m})")))
            } else if m < MASS_CLAMP {
                Ok(0.0)
            } else {
                Ok(m)
            }
        })
        .collect()
}

fn build_distribution(
    field: &str,
    domain: DomainSpace,
    mass: &[f64],
) -> Result<Distribution, HarnessError> {
    let mass = clamp_mass(field, mass)?;
    Distribution::new(domain, mass).map_err(|e| invalid(field, e.to_string()))
}

/// Parses and validates a config document.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, HarnessError> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| HarnessError::Parse(e.to_string()))?;
    validate(raw)
}

fn validate(raw: RawConfig) -> Result<ExperimentConfig, HarnessError> {
    let domain = DomainSpace::new(raw.domain.inputs, raw.domain.labels)
        .map_err(|e| invalid("domain", e.to_string()))?;

    let hypotheses = match raw.hypotheses.kind.as_str() {
        "all_tables" => {
            if raw.hypotheses.tables.is_some() {
                return Err(invalid(
                    "hypotheses.tables",
                    "not allowed when kind = \"all_tables\"",
                ));
            }
            let count = (raw.domain.labels as u64)
                .checked_pow(raw.domain.inputs as u32)
                .unwrap_or(u64::MAX);
            if count > ALL_TABLES_CAP {
                return Err(invalid(
                    "hypotheses",
                    format!(
                        "all_tables would enumerate {count} hypotheses, cap is {ALL_TABLES_CAP}"
                    ),
                ));
            }
            HypothesisSpec::AllTables
        }
        "explicit" => {
            let tables = raw
                .hypotheses
                .tables
                .ok_or_else(|| invalid("hypotheses.tables", "required when kind = \"explicit\""))?;
            HypothesisSpec::Explicit(tables)
        }
        other => {
            return Err(invalid(
                "hypotheses.kind",
                format!("unknown kind {other:?}, expected \"all_tables\" or \"explicit\""),
            ))
        }
    };

    let loss = match raw.loss.as_ref().map(|l| l.kind.as_str()) {
        None | Some("zero_one") => LossKind::ZeroOne,
        Some(other) => {
            return Err(invalid(
                "loss.kind",
                format!("unknown kind {other:?}, expected \"zero_one\""),
            ))
        }
    };

    let (distribution, credal_vertices) = match (&raw.distribution, &raw.credal) {
        (Some(_), Some(_)) => {
            return Err(invalid(
                "distribution/credal",
                "give exactly one of [distribution] (classical) or [credal] (credal)",
            ))
        }
        (None, None) => {
            return Err(invalid(
                "distribution/credal",
                "one of [distribution] or [credal] is required",
            ))
        }
        (Some(d), None) => {
            let p = build_distribution("distribution.mass", domain, &d.mass)?;
            (Some(p.mass().to_vec()), None)
        }
        (None, Some(c)) => {
            if c.vertices.is_empty() {
                return Err(invalid("credal.vertices", "at least one vertex is required"));
            }
            let mut vertices = Vec::with_capacity(c.vertices.len());
            for (i, row) in c.vertices.iter().enumerate() {
                let field = format!("credal.vertices[{i}]");
                let p = build_distribution(&field, domain, row)?;
                vertices.push(p.mass().to_vec());
            }
            (None, Some(vertices))
        }
    };

    let training = match (&raw.training, credal_vertices.as_ref()) {
        (Some(_), None) => {
            return Err(invalid(
                "training",
                "[training] is only valid in credal mode",
            ))
        }
        (None, Some(_)) => {
            return Err(invalid(
                "training",
                "[training] is required in credal mode",
            ))
        }
        (None, None) => None,
        (Some(t), Some(vertices)) => Some(parse_training(t, vertices.len())?),
    };

    if raw.campaign.n == 0 {
        return Err(invalid("campaign.n", "must be at least 1"));
    }
    if raw.campaign.trials == 0 {
        return Err(invalid("campaign.trials", "must be at least 1"));
    }
    let delta = raw.campaign.delta;
    if delta.is_nan() || delta <= 0.0 || delta > 1.0 {
        return Err(invalid(
            "campaign.delta",
            format!("must lie in (0, 1], got {}", raw.campaign.delta),
        ));
    }
    if raw.campaign.eps_grid.is_empty() {
        return Err(invalid("campaign.eps_grid", "must be non-empty"));
    }
    for (i, &eps) in raw.campaign.eps_grid.iter().enumerate() {
        if !eps.is_finite() || eps < 0.0 {
            return Err(invalid(
                "campaign.eps_grid",
                format!("entry {i} must be a non-negative real, got {eps}"),
            ));
        }
        if i > 0 && eps <= raw.campaign.eps_grid[i - 1] {
            return Err(invalid(
                "campaign.eps_grid",
                format!("must be strictly ascending, entry {i} = {eps} is not"),
            ));
        }
    }
    let candidate_bound = match raw.campaign.candidate_bound.as_deref() {
        None | Some("realisable_union") => CandidateBound::RealisableUnion,
        Some("gn_tail") => CandidateBound::GnTail,
        Some("none") => CandidateBound::None,
        Some(other) => {
            return Err(invalid(
                "campaign.candidate_bound",
                format!(
                    "unknown bound {other:?}, expected \"realisable_union\", \"gn_tail\", or \"none\""
                ),
            ))
        }
    };

    let config = ExperimentConfig {
        domain,
        hypotheses,
        loss,
        distribution,
        credal_vertices,
        training,
        n: raw.campaign.n,
        trials: raw.campaign.trials,
        delta: raw.campaign.delta,
        eps_grid: raw.campaign.eps_grid,
        seed: raw.campaign.seed,
        candidate_bound,
    };
    // Explicit tables must build into a valid class.
    config.build_class()?;
    Ok(config)
}

fn parse_training(raw: &RawTraining, vertex_count: usize) -> Result<TrainingMode, HarnessError> {
    let mode = match raw.mode.as_str() {
        "fixed_vertex" => {
            let vertex = raw
                .vertex
                .ok_or_else(|| invalid("training.vertex", "required when mode = \"fixed_vertex\""))?;
            if vertex >= vertex_count {
                return Err(invalid(
                    "training.vertex",
                    format!("index {vertex} out of range, set has {vertex_count} vertices"),
                ));
            }
            return Ok(TrainingMode::FixedVertex(vertex));
        }
        "uniform_vertex" => TrainingMode::UniformVertex,
        "random_mixture" => TrainingMode::RandomMixture,
        "oracle_aligned" => TrainingMode::OracleAligned,
        "adversarial" => TrainingMode::Adversarial,
        other => {
            return Err(invalid(
                "training.mode",
                format!("unknown mode {other:?}"),
            ))
        }
    };
    if raw.vertex.is_some() {
        return Err(invalid(
            "training.vertex",
            "only allowed when mode = \"fixed_vertex\"",
        ));
    }
    Ok(mode)
}

impl ExperimentConfig {
    /// True when a credal vertex list is present.
    pub fn is_credal(&self) -> bool {
        self.credal_vertices.is_some()
    }

    /// Builds the hypothesis class described by the config.
    pub fn build_class(&self) -> Result<HypothesisClass, HarnessError> {
        match &self.hypotheses {
            HypothesisSpec::AllTables => HypothesisClass::all_tables(self.domain)
                .map_err(|e| invalid("hypotheses", e.to_string())),
            HypothesisSpec::Explicit(tables) => {
                let hypotheses = tables
                    .iter()
                    .enumerate()
                    .map(|(i, table)| {
                        Hypothesis::new(self.domain, table.clone()).map_err(|e| {
                            invalid(&format!("hypotheses.tables[{i}]"), e.to_string())
                        })
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                HypothesisClass::new(hypotheses).map_err(|e| invalid("hypotheses.tables", e.to_string()))
            }
        }
    }

    pub fn build_loss(&self) -> LossFunction {
        match self.loss {
            LossKind::ZeroOne => LossFunction::ZeroOne,
        }
    }

    /// The single training distribution of a classical config.
    pub fn build_classical_distribution(&self) -> Result<Option<Distribution>, HarnessError> {
        self.distribution
            .as_ref()
            .map(|mass| build_distribution("distribution.mass", self.domain, mass))
            .transpose()
    }

    /// The credal set of a credal config.
    pub fn build_credal_set(&self) -> Result<Option<CredalSet>, HarnessError> {
        let Some(rows) = &self.credal_vertices else {
            return Ok(None);
        };
        let vertices = rows
            .iter()
            .enumerate()
            .map(|(i, row)| build_distribution(&format!("credal.vertices[{i}]"), self.domain, row))
            .collect::<Result<Vec<_>, _>>()?;
        CredalSet::new(vertices)
            .map(Some)
            .map_err(|e| invalid("credal.vertices", e.to_string()))
    }

    /// SHA-256 of the canonical JSON serialization, as lowercase hex.
    pub fn digest(&self) -> String {
        let canonical = serde_json::to_vec(self).expect("config serializes");
        let hash = Sha256::digest(&canonical);
        let mut out = String::with_capacity(64);
        for byte in hash {
            out.push_str(&format!("{byte:02x}"));
        }
        out
    }

    /// Emits the config back to TOML. `parse_config(emit(c)) == c`.
    pub fn to_toml(&self) -> String {
        let raw = RawConfig {
            domain: RawDomain {
                inputs: self.domain.input_count(),
                labels: self.domain.label_count(),
            },
            hypotheses: match &self.hypotheses {
                HypothesisSpec::AllTables => RawHypotheses {
                    kind: "all_tables".into(),
                    tables: None,
                },
                HypothesisSpec::Explicit(tables) => RawHypotheses {
                    kind: "explicit".into(),
                    tables: Some(tables.clone()),
                },
            },
            loss: Some(RawLoss {
                kind: "zero_one".into(),
            }),
            distribution: self
                .distribution
                .as_ref()
                .map(|mass| RawDistribution { mass: mass.clone() }),
            credal: self.credal_vertices.as_ref().map(|vertices| RawCredal {
                vertices: vertices.clone(),
            }),
            training: self.training.map(|mode| match mode {
                TrainingMode::FixedVertex(vertex) => RawTraining {
                    mode: "fixed_vertex".into(),
                    vertex: Some(vertex),
                },
                TrainingMode::UniformVertex => RawTraining {
                    mode: "uniform_vertex".into(),
                    vertex: None,
                },
                TrainingMode::RandomMixture => RawTraining {
                    mode: "random_mixture".into(),
                    vertex: None,
                },
                TrainingMode::OracleAligned => RawTraining {
                    mode: "oracle_aligned".into(),
                    vertex: None,
                },
                TrainingMode::Adversarial => RawTraining {
                    mode: "adversarial".into(),
                    vertex: None,
                },
            }),
            campaign: RawCampaign {
                n: self.n,
                trials: self.trials,
                delta: self.delta,
                eps_grid: self.eps_grid.clone(),
                seed: self.seed,
                candidate_bound: Some(
                    match self.candidate_bound {
                        CandidateBound::RealisableUnion => "realisable_union",
                        CandidateBound::GnTail => "gn_tail",
                        CandidateBound::None => "none",
                    }
                    .into(),
                ),
            },
        };
        toml::to_string(&raw).expect("config serializes to TOML")
    }
}
