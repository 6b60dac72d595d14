//! Seeded Monte Carlo campaigns that estimate bound-violation
//! probabilities in classical and credal regimes.
//!
//! A campaign is described by an [`ExperimentConfig`] and compiled into
//! an [`Experiment`]: the hypothesis class is materialized, expected
//! risks are precomputed per (hypothesis, vertex), and the training
//! mode is resolved. Each trial `i` then runs on substream `i` of the
//! master seed, drawing in a fixed order (training-distribution choice
//! first where the mode is random, then the `n` dataset outcomes), so a
//! `(config, master_seed)` pair fully determines every
//! [`TrialOutcome`] and the final [`ViolationReport`] regardless of
//! thread count. Trials are aggregated as integer counts, which makes
//! the aggregation order-insensitive.

mod config;
mod report;

pub use config::{
    parse_config, CandidateBound, ExperimentConfig, HypothesisSpec, LossKind, TrainingMode,
    ALL_TABLES_CAP, MASS_CLAMP,
};
pub use report::{
    emit_report, CalibrationOutcome, CampaignMode, EpsRow, ReportFormat, Verdict, ViolationReport,
};

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bounds::{gn_tail, realisable_union_tail, BoundsError};
use crate::core::{
    erm, expected_risk_unchecked, CoreError, Dataset, Distribution, HypothesisClass, LossFunction,
    RiskMinimiser,
};
use crate::credal::{CredalError, CredalSet, VertexRisk};
use crate::rng::{SeedSpec, SplitMix64};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("failed to parse config: {0}")]
    Parse(String),
    #[error("invalid config: {field}: {message}")]
    Invalid { field: String, message: String },
    #[error("classical trial requested on a credal experiment")]
    ExpectedClassicalMode,
    #[error("credal trial requested on a classical experiment")]
    ExpectedCredalMode,
    #[error("training mode {0:?} requires a hypothesis class")]
    ModeNeedsClass(TrainingMode),
    #[error("delta must lie in (0, 1], got {0}")]
    InvalidDelta(f64),
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error(transparent)]
    Credal(#[from] CredalError),
    #[error(transparent)]
    Bounds(#[from] BoundsError),
}

/// Which distribution a trial trained on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrainingDistributionId {
    /// The single distribution of a classical campaign.
    Single,
    /// Credal vertex by index.
    Vertex(usize),
    /// A sampled mixture of the credal vertices.
    Mixture,
}

/// Everything observed in one Monte Carlo trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialOutcome {
    pub trial: u64,
    pub training_distribution: TrainingDistributionId,
    pub erm_index: usize,
    pub erm_empirical_risk: f64,
    /// Expected risk of the ERM under the trial's training
    /// distribution.
    pub classical_risk: f64,
    /// `max_p L_p(erm)` over the credal set, with the achieving vertex;
    /// `None` in classical mode.
    pub worst_case: Option<VertexRisk>,
    /// `classical_risk` minus the best in-class risk under the training
    /// distribution.
    pub excess_risk: f64,
}

// ---------------------------------------------------------------------------
// Compiled experiments
// ---------------------------------------------------------------------------

enum Regime {
    Classical(ClassicalRegime),
    Credal(CredalRegime),
}

struct ClassicalRegime {
    p: Distribution,
    /// Expected risk per hypothesis under `p`.
    risks: Vec<f64>,
    best_risk: f64,
}

enum CompiledTraining {
    Vertex(usize),
    UniformVertex,
    RandomMixture,
}

struct CredalRegime {
    set: CredalSet,
    /// `vertex_risks[h][v]` = expected risk of hypothesis `h` under
    /// vertex `v`.
    vertex_risks: Vec<Vec<f64>>,
    /// Per-hypothesis worst case over vertices.
    upper: Vec<VertexRisk>,
    /// Per-vertex best in-class risk.
    best_per_vertex: Vec<f64>,
    training: CompiledTraining,
}

/// A validated config compiled for trial execution.
pub struct Experiment {
    config: ExperimentConfig,
    class: HypothesisClass,
    loss: LossFunction,
    regime: Regime,
}

impl Experiment {
    pub fn prepare(config: &ExperimentConfig) -> Result<Self, HarnessError> {
        let class = config.build_class()?;
        let loss = config.build_loss();
        let regime = if let Some(p) = config.build_classical_distribution()? {
            let risks: Vec<f64> = class
                .iter()
                .map(|h| expected_risk_unchecked(h, &p, &loss))
                .collect();
            let best_risk = risks.iter().cloned().fold(f64::INFINITY, f64::min);
            Regime::Classical(ClassicalRegime {
                p,
                risks,
                best_risk,
            })
        } else {
            let set = config
                .build_credal_set()?
                .expect("validated config is classical or credal");
            let vertex_risks: Vec<Vec<f64>> = class
                .iter()
                .map(|h| {
                    set.vertices()
                        .iter()
                        .map(|v| expected_risk_unchecked(h, v, &loss))
                        .collect()
                })
                .collect();
            let upper = vertex_risks.iter().map(|row| max_vertex(row)).collect();
            let best_per_vertex: Vec<f64> = (0..set.len())
                .map(|v| {
                    vertex_risks
                        .iter()
                        .map(|row| row[v])
                        .fold(f64::INFINITY, f64::min)
                })
                .collect();
            let training = compile_training(
                config.training.expect("credal config has a training mode"),
                &vertex_risks,
                &best_per_vertex,
            );
            Regime::Credal(CredalRegime {
                set,
                vertex_risks,
                upper,
                best_per_vertex,
                training,
            })
        };
        Ok(Self {
            config: config.clone(),
            class,
            loss,
            regime,
        })
    }

    pub fn config(&self) -> &ExperimentConfig {
        &self.config
    }

    pub fn class(&self) -> &HypothesisClass {
        &self.class
    }

    pub fn is_credal(&self) -> bool {
        matches!(self.regime, Regime::Credal(_))
    }

    /// Runs trial `trial` on its own substream. Infallible: everything
    /// that can fail was validated in [`prepare`](Self::prepare).
    pub fn run_trial(&self, trial: u64) -> TrialOutcome {
        let mut rng = SeedSpec::new(self.config.seed).stream(trial);
        match &self.regime {
            Regime::Classical(regime) => self.classical_trial(regime, trial, &mut rng),
            Regime::Credal(regime) => self.credal_trial(regime, trial, &mut rng),
        }
    }

    /// As [`run_trial`](Self::run_trial), but only valid on a classical
    /// experiment.
    pub fn run_classical_trial(&self, trial: u64) -> Result<TrialOutcome, HarnessError> {
        match &self.regime {
            Regime::Classical(regime) => {
                let mut rng = SeedSpec::new(self.config.seed).stream(trial);
                Ok(self.classical_trial(regime, trial, &mut rng))
            }
            Regime::Credal(_) => Err(HarnessError::ExpectedClassicalMode),
        }
    }

    /// As [`run_trial`](Self::run_trial), but only valid on a credal
    /// experiment.
    pub fn run_credal_trial(&self, trial: u64) -> Result<TrialOutcome, HarnessError> {
        match &self.regime {
            Regime::Credal(regime) => {
                let mut rng = SeedSpec::new(self.config.seed).stream(trial);
                Ok(self.credal_trial(regime, trial, &mut rng))
            }
            Regime::Classical(_) => Err(HarnessError::ExpectedCredalMode),
        }
    }

    fn erm_on(&self, data: &Dataset) -> RiskMinimiser {
        erm(&self.class, data, &self.loss).expect("compiled experiment has valid operands")
    }

    fn classical_trial(
        &self,
        regime: &ClassicalRegime,
        trial: u64,
        rng: &mut SplitMix64,
    ) -> TrialOutcome {
        let data = regime.p.sample_dataset_with(self.config.n, rng);
        let chosen = self.erm_on(&data);
        let classical_risk = regime.risks[chosen.index];
        TrialOutcome {
            trial,
            training_distribution: TrainingDistributionId::Single,
            erm_index: chosen.index,
            erm_empirical_risk: chosen.risk,
            classical_risk,
            worst_case: None,
            excess_risk: classical_risk - regime.best_risk,
        }
    }

    fn credal_trial(
        &self,
        regime: &CredalRegime,
        trial: u64,
        rng: &mut SplitMix64,
    ) -> TrialOutcome {
        // Draw order: training-distribution choice first, then the
        // dataset outcomes.
        enum Chosen {
            Vertex(usize),
            Mixture(Distribution, Vec<f64>),
        }
        let chosen_training = match &regime.training {
            CompiledTraining::Vertex(v) => Chosen::Vertex(*v),
            CompiledTraining::UniformVertex => {
                Chosen::Vertex(rng.next_below(regime.set.len() as u64) as usize)
            }
            CompiledTraining::RandomMixture => {
                let weights = regime.set.sample_mixture_weights_with(rng);
                let mix = regime.set.mixture_from_weights(&weights);
                Chosen::Mixture(mix, weights)
            }
        };

        let (data, id) = match &chosen_training {
            Chosen::Vertex(v) => (
                regime.set.vertex(*v).sample_dataset_with(self.config.n, rng),
                TrainingDistributionId::Vertex(*v),
            ),
            Chosen::Mixture(p, _) => (
                p.sample_dataset_with(self.config.n, rng),
                TrainingDistributionId::Mixture,
            ),
        };

        let chosen = self.erm_on(&data);
        let (classical_risk, best_risk) = match &chosen_training {
            Chosen::Vertex(v) => (
                regime.vertex_risks[chosen.index][*v],
                regime.best_per_vertex[*v],
            ),
            Chosen::Mixture(_, weights) => {
                // Risk under a mixture is the weighted vertex risk.
                let risk_at = |h: usize| -> f64 {
                    regime.vertex_risks[h]
                        .iter()
                        .zip(weights)
                        .map(|(r, w)| r * w)
                        .sum()
                };
                let best = (0..regime.vertex_risks.len())
                    .map(risk_at)
                    .fold(f64::INFINITY, f64::min);
                (risk_at(chosen.index), best)
            }
        };
        TrialOutcome {
            trial,
            training_distribution: id,
            erm_index: chosen.index,
            erm_empirical_risk: chosen.risk,
            classical_risk,
            worst_case: Some(regime.upper[chosen.index]),
            excess_risk: classical_risk - best_risk,
        }
    }
}

fn max_vertex(risks: &[f64]) -> VertexRisk {
    let mut best = VertexRisk {
        risk: risks[0],
        vertex: 0,
    };
    for (vertex, &risk) in risks.iter().enumerate().skip(1) {
        if risk > best.risk {
            best = VertexRisk { risk, vertex };
        }
    }
    best
}

fn compile_training(
    mode: TrainingMode,
    vertex_risks: &[Vec<f64>],
    best_per_vertex: &[f64],
) -> CompiledTraining {
    match mode {
        TrainingMode::FixedVertex(v) => CompiledTraining::Vertex(v),
        TrainingMode::UniformVertex => CompiledTraining::UniformVertex,
        TrainingMode::RandomMixture => CompiledTraining::RandomMixture,
        TrainingMode::OracleAligned => {
            CompiledTraining::Vertex(oracle_vertex(vertex_risks))
        }
        TrainingMode::Adversarial => {
            CompiledTraining::Vertex(adversarial_vertex(best_per_vertex))
        }
    }
}

/// The vertex minimising `L_p(h*)`, where `h*` minimises the worst-case
/// (max over vertices) risk; all ties go to the lowest index.
fn oracle_vertex(vertex_risks: &[Vec<f64>]) -> usize {
    let mut best_h = 0;
    let mut best_upper = f64::INFINITY;
    for (h, row) in vertex_risks.iter().enumerate() {
        let upper = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if upper < best_upper {
            best_upper = upper;
            best_h = h;
        }
    }
    let row = &vertex_risks[best_h];
    let mut best_v = 0;
    for (v, &risk) in row.iter().enumerate().skip(1) {
        if risk < row[best_v] {
            best_v = v;
        }
    }
    best_v
}

/// The vertex maximising the best-in-class risk `min_h L_p(h)`; ties go
/// to the lowest index.
fn adversarial_vertex(best_per_vertex: &[f64]) -> usize {
    let mut best_v = 0;
    for (v, &risk) in best_per_vertex.iter().enumerate().skip(1) {
        if risk > best_per_vertex[best_v] {
            best_v = v;
        }
    }
    best_v
}

/// Picks a training distribution from the credal set per `mode`, using
/// substream 0 of `seed` where the mode is random. `oracle_aligned` and
/// `adversarial` need the hypothesis class (and its loss) to resolve.
pub fn select_training_distribution(
    set: &CredalSet,
    mode: TrainingMode,
    class: Option<&HypothesisClass>,
    loss: &LossFunction,
    seed: SeedSpec,
) -> Result<Distribution, HarnessError> {
    match mode {
        TrainingMode::FixedVertex(v) => {
            if v >= set.len() {
                return Err(HarnessError::Invalid {
                    field: "training.vertex".into(),
                    message: format!("index {v} out of range, set has {} vertices", set.len()),
                });
            }
            Ok(set.vertex(v).clone())
        }
        TrainingMode::UniformVertex => {
            let v = seed.root().next_below(set.len() as u64) as usize;
            Ok(set.vertex(v).clone())
        }
        TrainingMode::RandomMixture => Ok(set.sample_mixture(seed)),
        TrainingMode::OracleAligned | TrainingMode::Adversarial => {
            let class = class.ok_or(HarnessError::ModeNeedsClass(mode))?;
            if class.domain() != set.domain() {
                return Err(CoreError::DomainMismatch {
                    context: "class vs credal set",
                }
                .into());
            }
            let vertex_risks: Vec<Vec<f64>> = class
                .iter()
                .map(|h| {
                    set.vertices()
                        .iter()
                        .map(|v| expected_risk_unchecked(h, v, loss))
                        .collect()
                })
                .collect();
            let v = if mode == TrainingMode::OracleAligned {
                oracle_vertex(&vertex_risks)
            } else {
                let best_per_vertex: Vec<f64> = (0..set.len())
                    .map(|v| {
                        vertex_risks
                            .iter()
                            .map(|row| row[v])
                            .fold(f64::INFINITY, f64::min)
                    })
                    .collect();
                adversarial_vertex(&best_per_vertex)
            };
            Ok(set.vertex(v).clone())
        }
    }
}

// ---------------------------------------------------------------------------
// Campaigns
// ---------------------------------------------------------------------------

/// Runs the configured campaign and reports, per grid epsilon, the
/// fraction of trials whose operative risk (classical risk in classical
/// mode, worst-case credal risk in credal mode) strictly exceeds it,
/// next to the configured analytic bound.
///
/// Trials run on the ambient rayon pool; outcomes are reduced to
/// integer counts, so the report is identical for every thread count.
pub fn estimate_violation_probability(
    config: &ExperimentConfig,
) -> Result<ViolationReport, HarnessError> {
    let started = Instant::now();
    let experiment = Experiment::prepare(config)?;
    let outcomes: Vec<TrialOutcome> = (0..config.trials)
        .into_par_iter()
        .map(|trial| experiment.run_trial(trial))
        .collect();

    let trials = config.trials;
    let mut operative_counts = vec![0u64; config.eps_grid.len()];
    let mut classical_counts = vec![0u64; config.eps_grid.len()];
    let mut erm_zero = 0u64;
    for outcome in &outcomes {
        if outcome.erm_empirical_risk == 0.0 {
            erm_zero += 1;
        }
        let operative = outcome
            .worst_case
            .map(|w| w.risk)
            .unwrap_or(outcome.classical_risk);
        for (i, &eps) in config.eps_grid.iter().enumerate() {
            if operative > eps {
                operative_counts[i] += 1;
            }
            if outcome.classical_risk > eps {
                classical_counts[i] += 1;
            }
        }
    }

    let class_size = experiment.class.len();
    let rows = config
        .eps_grid
        .iter()
        .enumerate()
        .map(|(i, &eps)| {
            let frequency = operative_counts[i] as f64 / trials as f64;
            let std_error = (frequency * (1.0 - frequency) / trials as f64).sqrt();
            let analytic_bound = match config.candidate_bound {
                CandidateBound::RealisableUnion => Some(
                    realisable_union_tail(class_size, eps, config.n)?.as_probability(),
                ),
                CandidateBound::GnTail => Some(gn_tail(config.n, eps)?.as_probability()),
                CandidateBound::None => None,
            };
            let verdict = match analytic_bound {
                Some(bound) if frequency > bound + 3.0 * std_error => {
                    Verdict::ViolatedBeyondSlack
                }
                _ => Verdict::Consistent,
            };
            let classical_frequency = if experiment.is_credal() {
                Some(classical_counts[i] as f64 / trials as f64)
            } else {
                None
            };
            Ok(EpsRow {
                eps,
                frequency,
                std_error,
                classical_frequency,
                analytic_bound,
                verdict,
            })
        })
        .collect::<Result<Vec<_>, HarnessError>>()?;

    let mut report = ViolationReport {
        config_digest: config.digest(),
        master_seed: config.seed,
        mode: if experiment.is_credal() {
            CampaignMode::Credal
        } else {
            CampaignMode::Classical
        },
        trials,
        n: config.n,
        delta: config.delta,
        erm_zero_empirical_risk_trials: erm_zero,
        rows,
        calibration: CalibrationOutcome::UncalibratableOnGrid,
        wall_time_ms: None,
    };
    report.calibration = report.calibrate(config.delta);
    report.wall_time_ms = Some(started.elapsed().as_millis() as u64);
    Ok(report)
}

/// The empirical epsilon for a campaign: the smallest grid epsilon
/// whose violation frequency is at most `delta`, or
/// `UncalibratableOnGrid` if no grid point qualifies.
pub fn calibrate_epsilon(
    config: &ExperimentConfig,
    delta: f64,
) -> Result<CalibrationOutcome, HarnessError> {
    if delta.is_nan() || delta <= 0.0 || delta > 1.0 {
        return Err(HarnessError::InvalidDelta(delta));
    }
    let report = estimate_violation_probability(config)?;
    Ok(report.calibrate(delta))
}
