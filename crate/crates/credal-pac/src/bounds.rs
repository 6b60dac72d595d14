//! Closed-form concentration inequalities and PAC epsilon formulas for
//! finite hypothesis classes.
//!
//! Tail bounds (probability-valued) are returned as [`BoundReport`]s
//! carrying both the raw closed-form value and the value clipped to
//! `[0, 1]`; the raw value is what sample-complexity inversions and
//! plots need, the clipped value is the probability statement.
//!
//! All logarithms are natural.
//!
//! ```text
//! markov:     P[Z >= t]                  <= E[Z] / t
//! hoeffding:  P[mean >= E[mean] + eps]   <= exp(-2 n^2 eps^2 / sum_i width_i^2)
//! mcdiarmid:  P[f - E[f] >= eps]         <= exp(-2 eps^2 / sum_i c_i^2)
//! gn tail:    P[G_n >= E[G_n] + eps]     <= exp(-2 n eps^2)
//! union:      P[A_1 or ... or A_K]       <= sum_k P[A_k]
//!
//! eps_finite_realisable = (ln|H| + ln(1/delta)) / n
//! eps_finite_agnostic   = sqrt(2 (ln|H| + ln(2/delta)) / n)
//! eps_rademacher        = 4 R_n + sqrt(2 ln(2/delta) / n)
//! ```
//!
//! With `c_i = width_i / n`, McDiarmid's exponent reduces exactly to
//! Hoeffding's, and with `c_i = 1/n` (zero-one losses) to the `G_n`
//! tail; both identities are kept under test.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BoundsError {
    #[error("expectation must be non-negative, got {0}")]
    NegativeExpectation(f64),
    #[error("threshold must be positive, got {0}")]
    NonPositiveThreshold(f64),
    #[error("epsilon must be non-negative, got {0}")]
    NegativeEpsilon(f64),
    #[error("epsilon must be positive, got {0}")]
    NonPositiveEpsilon(f64),
    #[error("expected {expected} per-variable ranges, got {got}")]
    RangeCount { expected: usize, got: usize },
    #[error("range width at index {index} must be positive, got {value}")]
    NonPositiveWidth { index: usize, value: f64 },
    #[error("bounded-difference constant at index {index} must be positive, got {value}")]
    NonPositiveConstant { index: usize, value: f64 },
    #[error("probability at index {index} must lie in [0, 1], got {value}")]
    ProbabilityOutOfRange { index: usize, value: f64 },
    #[error("n must be at least 1")]
    ZeroSampleSize,
    #[error("class size must be at least 1")]
    EmptyClassSize,
    #[error("delta must lie in {domain}, got {value}")]
    DeltaOutOfRange { domain: &'static str, value: f64 },
    #[error("rademacher complexity must be non-negative, got {0}")]
    NegativeRademacher(f64),
}

/// Which closed form produced a [`BoundReport`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    Markov,
    Hoeffding,
    Mcdiarmid,
    Union,
    PacFiniteRealisable,
    PacFiniteAgnostic,
    PacRademacher,
}

/// A computed bound with its inputs.
///
/// `clipped_value = min(1, max(0, raw_value))` for probability-valued
/// kinds and is `None` for the PAC epsilon kinds, where the value is a
/// risk threshold rather than a probability.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub kind: BoundKind,
    pub inputs: BTreeMap<String, f64>,
    pub raw_value: f64,
    pub clipped_value: Option<f64>,
}

impl BoundReport {
    fn probability(kind: BoundKind, inputs: BTreeMap<String, f64>, raw_value: f64) -> Self {
        Self {
            kind,
            inputs,
            raw_value,
            clipped_value: Some(raw_value.clamp(0.0, 1.0)),
        }
    }

    fn epsilon(kind: BoundKind, inputs: BTreeMap<String, f64>, raw_value: f64) -> Self {
        Self {
            kind,
            inputs,
            raw_value,
            clipped_value: None,
        }
    }

    /// The value to quote as a probability.
    pub fn as_probability(&self) -> f64 {
        self.clipped_value.unwrap_or(self.raw_value)
    }
}

fn inputs(entries: &[(&str, f64)]) -> BTreeMap<String, f64> {
    entries
        .iter()
        .map(|&(k, v)| (k.to_string(), v))
        .collect()
}

/// Markov: `P[Z >= t] <= E[Z] / t` for non-negative `Z`.
pub fn markov_bound(expectation: f64, t: f64) -> Result<BoundReport, BoundsError> {
    if expectation.is_nan() || expectation < 0.0 {
        return Err(BoundsError::NegativeExpectation(expectation));
    }
    if t.is_nan() || t <= 0.0 {
        return Err(BoundsError::NonPositiveThreshold(t));
    }
    Ok(BoundReport::probability(
        BoundKind::Markov,
        inputs(&[("expectation", expectation), ("t", t)]),
        expectation / t,
    ))
}

/// Hoeffding upper tail for the sample mean of `n` independent bounded
/// variables: `exp(-2 n^2 eps^2 / sum_i width_i^2)` where `width_i` is
/// the length of variable `i`'s range.
pub fn hoeffding_tail(n: usize, eps: f64, ranges: &[f64]) -> Result<BoundReport, BoundsError> {
    if n == 0 {
        return Err(BoundsError::ZeroSampleSize);
    }
    if ranges.len() != n {
        return Err(BoundsError::RangeCount {
            expected: n,
            got: ranges.len(),
        });
    }
    if eps.is_nan() || eps < 0.0 {
        return Err(BoundsError::NegativeEpsilon(eps));
    }
    let mut sum_sq = 0.0;
    for (index, &value) in ranges.iter().enumerate() {
        if value.is_nan() || value <= 0.0 {
            return Err(BoundsError::NonPositiveWidth { index, value });
        }
        sum_sq += value * value;
    }
    let nf = n as f64;
    let raw = (-2.0 * nf * nf * eps * eps / sum_sq).exp();
    Ok(BoundReport::probability(
        BoundKind::Hoeffding,
        inputs(&[("n", nf), ("eps", eps), ("sum_width_sq", sum_sq)]),
        raw,
    ))
}

/// Hoeffding tail with a shared range width for all `n` variables.
pub fn hoeffding_tail_uniform(n: usize, eps: f64, width: f64) -> Result<BoundReport, BoundsError> {
    hoeffding_tail(n, eps, &vec![width; n])
}

/// McDiarmid: `P[f - E[f] >= eps] <= exp(-2 eps^2 / sum_i c_i^2)` under
/// the bounded-difference condition with constants `c_i`.
pub fn mcdiarmid_tail(eps: f64, constants: &[f64]) -> Result<BoundReport, BoundsError> {
    if eps.is_nan() || eps < 0.0 {
        return Err(BoundsError::NegativeEpsilon(eps));
    }
    let mut sum_sq = 0.0;
    for (index, &value) in constants.iter().enumerate() {
        if value.is_nan() || value <= 0.0 {
            return Err(BoundsError::NonPositiveConstant { index, value });
        }
        sum_sq += value * value;
    }
    let raw = (-2.0 * eps * eps / sum_sq).exp();
    Ok(BoundReport::probability(
        BoundKind::Mcdiarmid,
        inputs(&[
            ("eps", eps),
            ("n", constants.len() as f64),
            ("sum_c_sq", sum_sq),
        ]),
        raw,
    ))
}

/// Tail of the uniform-deviation variable `G_n` for zero-one losses:
/// `exp(-2 n eps^2)`. This is McDiarmid with `c_i = 1/n`, so the kind
/// is reported as `mcdiarmid`.
pub fn gn_tail(n: usize, eps: f64) -> Result<BoundReport, BoundsError> {
    if n == 0 {
        return Err(BoundsError::ZeroSampleSize);
    }
    if eps.is_nan() || eps < 0.0 {
        return Err(BoundsError::NegativeEpsilon(eps));
    }
    let nf = n as f64;
    let raw = (-2.0 * nf * eps * eps).exp();
    Ok(BoundReport::probability(
        BoundKind::Mcdiarmid,
        inputs(&[("n", nf), ("eps", eps)]),
        raw,
    ))
}

/// Union bound: `P[union of events] <= sum of probabilities`.
pub fn union_bound(probs: &[f64]) -> Result<BoundReport, BoundsError> {
    for (index, &value) in probs.iter().enumerate() {
        if !(0.0..=1.0).contains(&value) {
            return Err(BoundsError::ProbabilityOutOfRange { index, value });
        }
    }
    let raw: f64 = probs.iter().sum();
    Ok(BoundReport::probability(
        BoundKind::Union,
        inputs(&[("count", probs.len() as f64)]),
        raw,
    ))
}

/// The bad-hypothesis union tail for a realisable class of the given
/// size: `|H| * exp(-eps * n)`, clipped to `[0, 1]`. This is the
/// analytic curve Monte Carlo violation frequencies are compared to in
/// classical realisable campaigns.
pub fn realisable_union_tail(
    class_size: usize,
    eps: f64,
    n: usize,
) -> Result<BoundReport, BoundsError> {
    if class_size == 0 {
        return Err(BoundsError::EmptyClassSize);
    }
    if n == 0 {
        return Err(BoundsError::ZeroSampleSize);
    }
    if eps.is_nan() || eps < 0.0 {
        return Err(BoundsError::NegativeEpsilon(eps));
    }
    let raw = class_size as f64 * (-eps * n as f64).exp();
    Ok(BoundReport::probability(
        BoundKind::Union,
        inputs(&[("class_size", class_size as f64), ("eps", eps), ("n", n as f64)]),
        raw,
    ))
}

fn check_delta_half_open(delta: f64) -> Result<(), BoundsError> {
    if delta.is_nan() || delta <= 0.0 || delta > 1.0 {
        return Err(BoundsError::DeltaOutOfRange {
            domain: "(0, 1]",
            value: delta,
        });
    }
    Ok(())
}

/// PAC epsilon for a finite realisable class:
/// `(ln|H| + ln(1/delta)) / n`.
pub fn eps_finite_realisable(
    class_size: usize,
    delta: f64,
    n: usize,
) -> Result<f64, BoundsError> {
    if class_size == 0 {
        return Err(BoundsError::EmptyClassSize);
    }
    check_delta_half_open(delta)?;
    if n == 0 {
        return Err(BoundsError::ZeroSampleSize);
    }
    Ok(((class_size as f64).ln() + (1.0 / delta).ln()) / n as f64)
}

/// Training-set size needed for risk at most `eps` with confidence
/// `1 - delta` in the realisable finite case:
/// `ceil((ln|H| + ln(1/delta)) / eps)`.
pub fn sample_complexity_realisable(
    class_size: usize,
    delta: f64,
    eps: f64,
) -> Result<u64, BoundsError> {
    if class_size == 0 {
        return Err(BoundsError::EmptyClassSize);
    }
    check_delta_half_open(delta)?;
    if eps.is_nan() || eps <= 0.0 {
        return Err(BoundsError::NonPositiveEpsilon(eps));
    }
    let numerator = (class_size as f64).ln() + (1.0 / delta).ln();
    Ok((numerator / eps).ceil() as u64)
}

/// PAC epsilon for a finite class without realisability:
/// `sqrt(2 (ln|H| + ln(2/delta)) / n)`.
pub fn eps_finite_agnostic(class_size: usize, delta: f64, n: usize) -> Result<f64, BoundsError> {
    if class_size == 0 {
        return Err(BoundsError::EmptyClassSize);
    }
    check_delta_half_open(delta)?;
    if n == 0 {
        return Err(BoundsError::ZeroSampleSize);
    }
    Ok((2.0 * ((class_size as f64).ln() + (2.0 / delta).ln()) / n as f64).sqrt())
}

/// PAC epsilon from the Rademacher complexity of the loss class:
/// `4 R_n + sqrt(2 ln(2/delta) / n)`.
pub fn eps_rademacher(rademacher: f64, delta: f64, n: usize) -> Result<f64, BoundsError> {
    if rademacher.is_nan() || rademacher < 0.0 {
        return Err(BoundsError::NegativeRademacher(rademacher));
    }
    if delta.is_nan() || delta <= 0.0 || delta >= 1.0 {
        return Err(BoundsError::DeltaOutOfRange {
            domain: "(0, 1)",
            value: delta,
        });
    }
    if n == 0 {
        return Err(BoundsError::ZeroSampleSize);
    }
    Ok(4.0 * rademacher + (2.0 * (2.0 / delta).ln() / n as f64).sqrt())
}

/// [`BoundReport`] wrappers for the epsilon formulas, for report and
/// CLI output.
pub fn pac_finite_realisable_report(
    class_size: usize,
    delta: f64,
    n: usize,
) -> Result<BoundReport, BoundsError> {
    let eps = eps_finite_realisable(class_size, delta, n)?;
    Ok(BoundReport::epsilon(
        BoundKind::PacFiniteRealisable,
        inputs(&[
            ("class_size", class_size as f64),
            ("delta", delta),
            ("n", n as f64),
        ]),
        eps,
    ))
}

pub fn pac_finite_agnostic_report(
    class_size: usize,
    delta: f64,
    n: usize,
) -> Result<BoundReport, BoundsError> {
    let eps = eps_finite_agnostic(class_size, delta, n)?;
    Ok(BoundReport::epsilon(
        BoundKind::PacFiniteAgnostic,
        inputs(&[
            ("class_size", class_size as f64),
            ("delta", delta),
            ("n", n as f64),
        ]),
        eps,
    ))
}

pub fn pac_rademacher_report(
    rademacher: f64,
    delta: f64,
    n: usize,
) -> Result<BoundReport, BoundsError> {
    let eps = eps_rademacher(rademacher, delta, n)?;
    Ok(BoundReport::epsilon(
        BoundKind::PacRademacher,
        inputs(&[("rademacher", rademacher), ("delta", delta), ("n", n as f64)]),
        eps,
    ))
}
