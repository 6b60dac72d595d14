//! Finite discrete probability spaces, lookup-table hypotheses, bounded
//! losses, exact risks, empirical risk minimisation, and i.i.d. dataset
//! sampling.
//!
//! Everything here is exact and allocation-light: domains are index
//! pairs `(x, y)` over `[0, |X|) x [0, |Y|)`, a hypothesis is a total
//! lookup table `X -> Y`, and a distribution is a mass vector over the
//! flattened outcome space. Expected risks are exact weighted sums, and
//! zero-one empirical risks are exact multiples of `1/n` (mismatches
//! are counted as integers and divided once).
//!
//! All values are immutable after construction and all operations are
//! pure, so sharing across threads is safe; sampling determinism
//! depends only on `(seed, n, distribution)`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rng::{SeedSpec, SplitMix64};

/// Construction-time tolerance on `|sum(mass) - 1|`; inside it the mass
/// vector is renormalized exactly once, outside it construction fails.
pub const MASS_SUM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CoreError {
    #[error("domain must have at least one input and one label, got {inputs}x{labels}")]
    InvalidDomain { inputs: usize, labels: usize },
    #[error("domain mismatch: {context}")]
    DomainMismatch { context: &'static str },
    #[error("outcome index ({x}, {y}) out of range for a {inputs}x{labels} domain")]
    IndexOutOfRange {
        x: usize,
        y: usize,
        inputs: usize,
        labels: usize,
    },
    #[error("mass vector has length {got}, domain has {expected} outcomes")]
    MassLength { expected: usize, got: usize },
    #[error("mass entry {index} is negative ({value})")]
    NegativeMass { index: usize, value: f64 },
    #[error("mass vector sums to {sum}, outside 1 +/- {MASS_SUM_TOLERANCE}")]
    MassSum { sum: f64 },
    #[error("hypothesis table entry {entry} for input {input} exceeds label count {labels}")]
    LabelOutOfRange {
        input: usize,
        entry: usize,
        labels: usize,
    },
    #[error("hypothesis table has length {got}, domain has {expected} inputs")]
    TableLength { expected: usize, got: usize },
    #[error("hypothesis class must be non-empty")]
    EmptyClass,
    #[error("hypotheses {first} and {second} have identical tables")]
    DuplicateHypothesis { first: usize, second: usize },
    #[error("enumerating all tables would create {labels}^{inputs} hypotheses, which overflows")]
    ClassTooLarge { inputs: usize, labels: usize },
    #[error("dataset pair {index} = ({x}, {y}) is out of range")]
    DatasetIndexOutOfRange { index: usize, x: usize, y: usize },
    #[error("operation requires a non-empty dataset")]
    EmptyDataset,
    #[error("loss table has length {got}, expected {expected}")]
    LossTableLength { expected: usize, got: usize },
    #[error("loss value {value} at entry {index} lies outside declared range [{lo}, {hi}]")]
    LossValueOutOfRange {
        index: usize,
        value: f64,
        lo: f64,
        hi: f64,
    },
    #[error("loss range [{lo}, {hi}] is not a valid interval")]
    InvalidLossRange { lo: f64, hi: f64 },
}

// ---------------------------------------------------------------------------
// Domain
// ---------------------------------------------------------------------------

/// A finite product space of inputs and labels.
///
/// Outcomes are pairs `(x, y)`; the flattened outcome index is
/// `x * label_count + y`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DomainSpace {
    input_count: usize,
    label_count: usize,
}

impl DomainSpace {
    pub fn new(input_count: usize, label_count: usize) -> Result<Self, CoreError> {
        if input_count == 0 || label_count == 0 {
            return Err(CoreError::InvalidDomain {
                inputs: input_count,
                labels: label_count,
            });
        }
        Ok(Self {
            input_count,
            label_count,
        })
    }

    pub fn input_count(&self) -> usize {
        self.input_count
    }

    pub fn label_count(&self) -> usize {
        self.label_count
    }

    pub fn outcome_count(&self) -> usize {
        self.input_count * self.label_count
    }

    /// Flattened index of the outcome `(x, y)`.
    #[inline]
    pub fn flatten(&self, x: usize, y: usize) -> usize {
        debug_assert!(x < self.input_count && y < self.label_count);
        x * self.label_count + y
    }

    /// Inverse of [`flatten`](Self::flatten).
    #[inline]
    pub fn unflatten(&self, outcome: usize) -> (usize, usize) {
        debug_assert!(outcome < self.outcome_count());
        (outcome / self.label_count, outcome % self.label_count)
    }

    pub fn contains(&self, x: usize, y: usize) -> bool {
        x < self.input_count && y < self.label_count
    }
}

// ---------------------------------------------------------------------------
// Distribution
// ---------------------------------------------------------------------------

/// A probability vector over the flattened outcome space of a domain.
///
/// Construction validates non-negativity, checks the total mass against
/// [`MASS_SUM_TOLERANCE`], and renormalizes exactly once; afterwards the
/// stored vector is treated as exact.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Distribution {
    domain: DomainSpace,
    mass: Vec<f64>,
}

impl Distribution {
    pub fn new(domain: DomainSpace, mass: Vec<f64>) -> Result<Self, CoreError> {
        if mass.len() != domain.outcome_count() {
            return Err(CoreError::MassLength {
                expected: domain.outcome_count(),
                got: mass.len(),
            });
        }
        for (index, &value) in mass.iter().enumerate() {
            if value.is_nan() || value < 0.0 {
                return Err(CoreError::NegativeMass { index, value });
            }
        }
        let sum: f64 = mass.iter().sum();
        let deviation = (sum - 1.0).abs();
        if deviation.is_nan() || deviation > MASS_SUM_TOLERANCE {
            return Err(CoreError::MassSum { sum });
        }
        let mass = mass.into_iter().map(|m| m / sum).collect();
        Ok(Self { domain, mass })
    }

    /// Uniform distribution over all outcomes.
    pub fn uniform(domain: DomainSpace) -> Self {
        let count = domain.outcome_count();
        Self {
            domain,
            mass: vec![1.0 / count as f64; count],
        }
    }

    /// Distribution from weighted `(x, y, weight)` triples; unlisted
    /// outcomes get zero mass. Weights must sum to 1 within tolerance.
    pub fn from_outcomes(
        domain: DomainSpace,
        outcomes: &[(usize, usize, f64)],
    ) -> Result<Self, CoreError> {
        let mut mass = vec![0.0; domain.outcome_count()];
        for &(x, y, w) in outcomes {
            if !domain.contains(x, y) {
                return Err(CoreError::IndexOutOfRange {
                    x,
                    y,
                    inputs: domain.input_count(),
                    labels: domain.label_count(),
                });
            }
            mass[domain.flatten(x, y)] += w;
        }
        Self::new(domain, mass)
    }

    /// Convex combination `sum_i weights[i] * components[i]`.
    ///
    /// Weights must be non-negative and sum to 1 within tolerance; the
    /// result goes through the usual construction checks. Panics when
    /// the slice lengths differ or no components are given.
    pub fn mixture(
        components: &[&Distribution],
        weights: &[f64],
    ) -> Result<Self, CoreError> {
        assert_eq!(
            components.len(),
            weights.len(),
            "one weight per component"
        );
        assert!(!components.is_empty(), "mixture of nothing");
        let domain = components[0].domain;
        let mut mass = vec![0.0; domain.outcome_count()];
        for (component, &weight) in components.iter().zip(weights) {
            if component.domain != domain {
                return Err(CoreError::DomainMismatch {
                    context: "mixture components",
                });
            }
            for (slot, &m) in mass.iter_mut().zip(component.mass()) {
                *slot += weight * m;
            }
        }
        Self::new(domain, mass)
    }

    pub fn domain(&self) -> DomainSpace {
        self.domain
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    /// Probability of the outcome `(x, y)`.
    pub fn prob(&self, x: usize, y: usize) -> f64 {
        self.mass[self.domain.flatten(x, y)]
    }

    /// Flattened indices of outcomes with strictly positive mass.
    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.mass
            .iter()
            .enumerate()
            .filter(|(_, &m)| m > 0.0)
            .map(|(i, _)| i)
    }

    /// Draws `n` outcomes i.i.d. by inverse-CDF lookup over the
    /// flattened mass vector, using substream 0 of `seed`.
    pub fn sample_dataset(&self, n: usize, seed: SeedSpec) -> Dataset {
        self.sample_dataset_with(n, &mut seed.root())
    }

    /// As [`sample_dataset`](Self::sample_dataset) but drawing from a
    /// caller-managed stream (one `next_f64` per outcome).
    pub fn sample_dataset_with(&self, n: usize, rng: &mut SplitMix64) -> Dataset {
        let cdf = self.cumulative();
        let pairs = (0..n)
            .map(|_| {
                let outcome = self.lookup(&cdf, rng.next_f64());
                self.domain.unflatten(outcome)
            })
            .collect();
        Dataset {
            domain: self.domain,
            pairs,
        }
    }

    fn cumulative(&self) -> Vec<f64> {
        let mut acc = 0.0;
        self.mass
            .iter()
            .map(|&m| {
                acc += m;
                acc
            })
            .collect()
    }

    /// First outcome whose CDF value exceeds `u`. An outcome with zero
    /// mass has an empty `[cdf[i-1], cdf[i])` interval and can never be
    /// selected. If rounding leaves `u` past the final CDF value, the
    /// last supported outcome is returned.
    fn lookup(&self, cdf: &[f64], u: f64) -> usize {
        let idx = cdf.partition_point(|&c| c <= u);
        if idx < cdf.len() {
            idx
        } else {
            self.support().last().expect("unit mass has support")
        }
    }
}

// ---------------------------------------------------------------------------
// Hypotheses
// ---------------------------------------------------------------------------

/// A total lookup-table classifier `X -> Y`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Hypothesis {
    domain: DomainSpace,
    table: Vec<usize>,
}

impl Hypothesis {
    pub fn new(domain: DomainSpace, table: Vec<usize>) -> Result<Self, CoreError> {
        if table.len() != domain.input_count() {
            return Err(CoreError::TableLength {
                expected: domain.input_count(),
                got: table.len(),
            });
        }
        for (input, &entry) in table.iter().enumerate() {
            if entry >= domain.label_count() {
                return Err(CoreError::LabelOutOfRange {
                    input,
                    entry,
                    labels: domain.label_count(),
                });
            }
        }
        Ok(Self { domain, table })
    }

    pub fn domain(&self) -> DomainSpace {
        self.domain
    }

    pub fn table(&self) -> &[usize] {
        &self.table
    }

    #[inline]
    pub fn predict(&self, x: usize) -> usize {
        self.table[x]
    }
}

/// An ordered, non-empty list of distinct hypotheses over one domain.
///
/// The order is part of the contract: argmin operations break ties by
/// the lowest class index.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HypothesisClass {
    domain: DomainSpace,
    hypotheses: Vec<Hypothesis>,
}

impl HypothesisClass {
    pub fn new(hypotheses: Vec<Hypothesis>) -> Result<Self, CoreError> {
        let Some(first) = hypotheses.first() else {
            return Err(CoreError::EmptyClass);
        };
        let domain = first.domain;
        for h in &hypotheses {
            if h.domain != domain {
                return Err(CoreError::DomainMismatch {
                    context: "hypotheses in a class",
                });
            }
        }
        for i in 0..hypotheses.len() {
            for j in (i + 1)..hypotheses.len() {
                if hypotheses[i].table == hypotheses[j].table {
                    return Err(CoreError::DuplicateHypothesis { first: i, second: j });
                }
            }
        }
        Ok(Self { domain, hypotheses })
    }

    /// Every total table `X -> Y`, enumerated so that hypothesis `k` has
    /// `table[x] = (k / label_count^x) mod label_count` (input 0 is the
    /// least significant digit). Hypothesis 0 predicts label 0
    /// everywhere.
    pub fn all_tables(domain: DomainSpace) -> Result<Self, CoreError> {
        let count = (domain.label_count() as u128)
            .checked_pow(domain.input_count() as u32)
            .filter(|&c| c <= usize::MAX as u128)
            .ok_or(CoreError::ClassTooLarge {
                inputs: domain.input_count(),
                labels: domain.label_count(),
            })? as usize;
        let hypotheses = (0..count)
            .map(|k| {
                let mut digits = k;
                let table = (0..domain.input_count())
                    .map(|_| {
                        let label = digits % domain.label_count();
                        digits /= domain.label_count();
                        label
                    })
                    .collect();
                Hypothesis { domain, table }
            })
            .collect();
        Ok(Self { domain, hypotheses })
    }

    pub fn domain(&self) -> DomainSpace {
        self.domain
    }

    pub fn len(&self) -> usize {
        self.hypotheses.len()
    }

    pub fn is_empty(&self) -> bool {
        false // non-empty by construction
    }

    pub fn get(&self, index: usize) -> &Hypothesis {
        &self.hypotheses[index]
    }

    pub fn iter(&self) -> impl Iterator<Item = &Hypothesis> {
        self.hypotheses.iter()
    }
}

// ---------------------------------------------------------------------------
// Datasets
// ---------------------------------------------------------------------------

/// An ordered sequence of `(x, y)` outcome pairs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dataset {
    domain: DomainSpace,
    pairs: Vec<(usize, usize)>,
}

impl Dataset {
    pub fn new(domain: DomainSpace, pairs: Vec<(usize, usize)>) -> Result<Self, CoreError> {
        for (index, &(x, y)) in pairs.iter().enumerate() {
            if !domain.contains(x, y) {
                return Err(CoreError::DatasetIndexOutOfRange { index, x, y });
            }
        }
        Ok(Self { domain, pairs })
    }

    pub fn domain(&self) -> DomainSpace {
        self.domain
    }

    pub fn n(&self) -> usize {
        self.pairs.len()
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    /// The empirical distribution: outcome counts divided by `n`.
    pub fn empirical_distribution(&self) -> Result<Distribution, CoreError> {
        if self.pairs.is_empty() {
            return Err(CoreError::EmptyDataset);
        }
        let mut mass = vec![0.0; self.domain.outcome_count()];
        let unit = 1.0 / self.pairs.len() as f64;
        for &(x, y) in &self.pairs {
            mass[self.domain.flatten(x, y)] += unit;
        }
        Distribution::new(self.domain, mass)
    }
}

// ---------------------------------------------------------------------------
// Losses
// ---------------------------------------------------------------------------

/// A bounded loss on `(outcome, prediction)` triples.
///
/// `ZeroOne` is the built-in misclassification loss. `Tabular` is the
/// extension point for arbitrary bounded losses on a finite domain: a
/// value for every `(input, predicted label, actual label)` triple plus
/// a declared range `[lo, hi]` (needed by the concentration bounds).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum LossFunction {
    ZeroOne,
    Tabular(TabularLoss),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TabularLoss {
    domain: DomainSpace,
    lo: f64,
    hi: f64,
    /// Indexed by `(x * label_count + predicted) * label_count + actual`.
    values: Vec<f64>,
}

impl TabularLoss {
    pub fn new(
        domain: DomainSpace,
        lo: f64,
        hi: f64,
        values: Vec<f64>,
    ) -> Result<Self, CoreError> {
        if lo.is_nan() || hi.is_nan() || lo > hi {
            return Err(CoreError::InvalidLossRange { lo, hi });
        }
        let expected = domain.input_count() * domain.label_count() * domain.label_count();
        if values.len() != expected {
            return Err(CoreError::LossTableLength {
                expected,
                got: values.len(),
            });
        }
        for (index, &value) in values.iter().enumerate() {
            if value.is_nan() || value < lo || value > hi {
                return Err(CoreError::LossValueOutOfRange {
                    index,
                    value,
                    lo,
                    hi,
                });
            }
        }
        Ok(Self {
            domain,
            lo,
            hi,
            values,
        })
    }

    #[inline]
    fn value(&self, x: usize, predicted: usize, actual: usize) -> f64 {
        self.values[(x * self.domain.label_count() + predicted) * self.domain.label_count()
            + actual]
    }
}

impl LossFunction {
    /// Declared range `[lo, hi]` of the loss values.
    pub fn range(&self) -> (f64, f64) {
        match self {
            LossFunction::ZeroOne => (0.0, 1.0),
            LossFunction::Tabular(t) => (t.lo, t.hi),
        }
    }

    /// Domain check for use against hypotheses; `ZeroOne` fits any domain.
    fn accepts(&self, domain: DomainSpace) -> bool {
        match self {
            LossFunction::ZeroOne => true,
            LossFunction::Tabular(t) => t.domain == domain,
        }
    }

    /// Loss of predicting `predicted` on the outcome `(x, y)`.
    ///
    /// Callers must have validated the indices; risk operations do so
    /// via their input types.
    #[inline]
    pub(crate) fn apply(&self, x: usize, predicted: usize, actual: usize) -> f64 {
        match self {
            LossFunction::ZeroOne => {
                if predicted == actual {
                    0.0
                } else {
                    1.0
                }
            }
            LossFunction::Tabular(t) => t.value(x, predicted, actual),
        }
    }

    /// Checked single-pair evaluation.
    pub fn evaluate(
        &self,
        pair: (usize, usize),
        hypothesis: &Hypothesis,
    ) -> Result<f64, CoreError> {
        let (x, y) = pair;
        let domain = hypothesis.domain();
        if !domain.contains(x, y) {
            return Err(CoreError::IndexOutOfRange {
                x,
                y,
                inputs: domain.input_count(),
                labels: domain.label_count(),
            });
        }
        if !self.accepts(domain) {
            return Err(CoreError::DomainMismatch {
                context: "loss table vs hypothesis domain",
            });
        }
        Ok(self.apply(x, hypothesis.predict(x), y))
    }
}

/// Zero-one loss of `hypothesis` on `pair`: 1 on a mismatch, else 0.
pub fn zero_one_loss(pair: (usize, usize), hypothesis: &Hypothesis) -> Result<f64, CoreError> {
    LossFunction::ZeroOne.evaluate(pair, hypothesis)
}

// ---------------------------------------------------------------------------
// Risks and ERM
// ---------------------------------------------------------------------------

/// An argmin over a hypothesis class: the class index and its risk.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiskMinimiser {
    pub index: usize,
    pub risk: f64,
}

fn check_domains(
    lhs: DomainSpace,
    rhs: DomainSpace,
    loss: &LossFunction,
    context: &'static str,
) -> Result<(), CoreError> {
    if lhs != rhs {
        return Err(CoreError::DomainMismatch { context });
    }
    if !loss.accepts(lhs) {
        return Err(CoreError::DomainMismatch {
            context: "loss table vs operand domain",
        });
    }
    Ok(())
}

/// Expected risk: the exact weighted sum of the loss over all outcomes.
pub fn expected_risk(
    hypothesis: &Hypothesis,
    p: &Distribution,
    loss: &LossFunction,
) -> Result<f64, CoreError> {
    check_domains(hypothesis.domain(), p.domain(), loss, "hypothesis vs distribution")?;
    Ok(expected_risk_unchecked(hypothesis, p, loss))
}

/// Hot-path variant for pre-validated operands.
pub(crate) fn expected_risk_unchecked(
    hypothesis: &Hypothesis,
    p: &Distribution,
    loss: &LossFunction,
) -> f64 {
    let domain = p.domain();
    let labels = domain.label_count();
    let mass = p.mass();
    let mut risk = 0.0;
    for x in 0..domain.input_count() {
        let predicted = hypothesis.predict(x);
        let row = x * labels;
        match loss {
            // Only mismatched labels contribute, each with loss 1.
            LossFunction::ZeroOne => {
                for y in 0..labels {
                    if y != predicted {
                        risk += mass[row + y];
                    }
                }
            }
            LossFunction::Tabular(t) => {
                for y in 0..labels {
                    risk += mass[row + y] * t.value(x, predicted, y);
                }
            }
        }
    }
    risk
}

/// Empirical risk: average loss over the dataset.
///
/// For the zero-one loss the result is an exact multiple of `1/n`
/// (integer mismatch count divided once).
pub fn empirical_risk(
    hypothesis: &Hypothesis,
    data: &Dataset,
    loss: &LossFunction,
) -> Result<f64, CoreError> {
    check_domains(hypothesis.domain(), data.domain(), loss, "hypothesis vs dataset")?;
    if data.n() == 0 {
        return Err(CoreError::EmptyDataset);
    }
    Ok(empirical_risk_unchecked(hypothesis, data, loss))
}

pub(crate) fn empirical_risk_unchecked(
    hypothesis: &Hypothesis,
    data: &Dataset,
    loss: &LossFunction,
) -> f64 {
    match loss {
        LossFunction::ZeroOne => {
            let mismatches = data
                .pairs()
                .iter()
                .filter(|&&(x, y)| hypothesis.predict(x) != y)
                .count();
            mismatches as f64 / data.n() as f64
        }
        LossFunction::Tabular(t) => {
            let total: f64 = data
                .pairs()
                .iter()
                .map(|&(x, y)| t.value(x, hypothesis.predict(x), y))
                .sum();
            total / data.n() as f64
        }
    }
}

fn argmin_over_class(
    class: &HypothesisClass,
    mut risk_of: impl FnMut(&Hypothesis) -> f64,
) -> RiskMinimiser {
    let mut best = RiskMinimiser {
        index: 0,
        risk: risk_of(class.get(0)),
    };
    for (index, hypothesis) in class.iter().enumerate().skip(1) {
        let risk = risk_of(hypothesis);
        if risk < best.risk {
            best = RiskMinimiser { index, risk };
        }
    }
    best
}

/// The empirical risk minimiser over the class; ties go to the lowest
/// class index.
pub fn erm(
    class: &HypothesisClass,
    data: &Dataset,
    loss: &LossFunction,
) -> Result<RiskMinimiser, CoreError> {
    check_domains(class.domain(), data.domain(), loss, "class vs dataset")?;
    if data.n() == 0 {
        return Err(CoreError::EmptyDataset);
    }
    Ok(argmin_over_class(class, |h| {
        empirical_risk_unchecked(h, data, loss)
    }))
}

/// The expected risk minimiser over the class; ties go to the lowest
/// class index.
pub fn expected_risk_minimiser(
    class: &HypothesisClass,
    p: &Distribution,
    loss: &LossFunction,
) -> Result<RiskMinimiser, CoreError> {
    check_domains(class.domain(), p.domain(), loss, "class vs distribution")?;
    Ok(argmin_over_class(class, |h| {
        expected_risk_unchecked(h, p, loss)
    }))
}

/// Excess risk of the ERM trained on `data` and evaluated under `p`:
/// its expected risk minus the best in-class expected risk. Always
/// non-negative.
pub fn excess_risk(
    class: &HypothesisClass,
    data: &Dataset,
    p: &Distribution,
    loss: &LossFunction,
) -> Result<f64, CoreError> {
    let chosen = erm(class, data, loss)?;
    let best = expected_risk_minimiser(class, p, loss)?;
    let chosen_risk = expected_risk(class.get(chosen.index), p, loss)?;
    Ok(chosen_risk - best.risk)
}
