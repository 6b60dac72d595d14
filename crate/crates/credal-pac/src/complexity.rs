//! Rademacher complexity of the loss class, exact and Monte Carlo, and
//! the uniform-deviation variable `G_n`.
//!
//! The loss class of a hypothesis class `H` under a loss `l` is the set
//! of outcome-to-loss maps `{ z -> l(z, h) : h in H }`. Its empirical
//! Rademacher complexity on a dataset `z_1..z_n` is
//!
//! ```text
//! R_hat = E_sigma [ sup_f (1/n) sum_i sigma_i f(z_i) ],    sigma_i ~ uniform{-1, +1}
//! ```
//!
//! The exact variant averages over all `2^n` sign vectors (guarded at
//! `n <= 20`), walking them in binary-reflected Gray-code order so each
//! step updates every per-function signed sum with a single add. The
//! Monte Carlo variant averages over seeded sign draws and reports a
//! standard error. Sign vectors are two-point uniform on `{-1, +1}`:
//! the class is finite, so the inner supremum is an exact maximum.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::core::{
    empirical_risk_unchecked, expected_risk_unchecked, CoreError, Dataset, Distribution,
    HypothesisClass, LossFunction,
};
use crate::rng::SeedSpec;

/// Largest dataset size accepted by the exact `2^n` enumeration.
pub const EXACT_ENUMERATION_LIMIT: usize = 20;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ComplexityError {
    #[error(
        "exact enumeration is limited to n <= {EXACT_ENUMERATION_LIMIT} (got n = {0}); \
         use the Monte Carlo estimator for larger datasets"
    )]
    DatasetTooLargeForExact(usize),
    #[error("operation requires a non-empty dataset")]
    EmptyDataset,
    #[error("draw counts must be positive")]
    ZeroDraws,
    #[error(transparent)]
    Core(#[from] CoreError),
}

/// The loss class `A = { z -> l(z, h) : h in H }`.
#[derive(Debug, Clone)]
pub struct LossClass<'a> {
    class: &'a HypothesisClass,
    loss: &'a LossFunction,
}

impl<'a> LossClass<'a> {
    pub fn new(class: &'a HypothesisClass, loss: &'a LossFunction) -> Self {
        Self { class, loss }
    }

    pub fn hypothesis_class(&self) -> &HypothesisClass {
        self.class
    }

    pub fn loss(&self) -> &LossFunction {
        self.loss
    }

    pub fn len(&self) -> usize {
        self.class.len()
    }

    pub fn is_empty(&self) -> bool {
        false // hypothesis classes are non-empty by construction
    }

    /// Per-function loss rows on the dataset: `rows[f][i] = l(z_i, f)`.
    fn loss_rows(&self, data: &Dataset) -> Result<Vec<Vec<f64>>, ComplexityError> {
        if self.class.domain() != data.domain() {
            return Err(CoreError::DomainMismatch {
                context: "loss class vs dataset",
            }
            .into());
        }
        Ok(self
            .class
            .iter()
            .map(|h| {
                data.pairs()
                    .iter()
                    .map(|&(x, y)| self.loss.apply(x, h.predict(x), y))
                    .collect()
            })
            .collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RademacherMethod {
    Exact,
    MonteCarlo,
}

/// A Rademacher complexity value with its provenance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RademacherEstimate {
    pub value: f64,
    /// Zero for the exact method.
    pub std_error: f64,
    pub method: RademacherMethod,
    /// Dataset size the estimate is conditioned on.
    pub n: usize,
    /// Sign vectors evaluated: `2^n` for exact, the draw count for
    /// Monte Carlo.
    pub sample_count: u64,
}

/// Exact empirical Rademacher complexity by full sign-vector
/// enumeration.
pub fn empirical_rademacher_exact(
    a: &LossClass<'_>,
    data: &Dataset,
) -> Result<RademacherEstimate, ComplexityError> {
    let n = data.n();
    if n == 0 {
        return Err(ComplexityError::EmptyDataset);
    }
    if n > EXACT_ENUMERATION_LIMIT {
        return Err(ComplexityError::DatasetTooLargeForExact(n));
    }
    let rows = a.loss_rows(data)?;

    // Start at sigma = (+1, ..., +1); Gray-code step k flips the sign at
    // position trailing_zeros(k), changing each signed sum by -+ 2 f(z_i).
    let mut signs = vec![1.0f64; n];
    let mut sums: Vec<f64> = rows.iter().map(|row| row.iter().sum()).collect();
    let total_vectors: u64 = 1 << n;
    let mut acc = 0.0f64;
    acc += sums.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    for k in 1..total_vectors {
        let i = k.trailing_zeros() as usize;
        signs[i] = -signs[i];
        let delta = 2.0 * signs[i];
        let mut sup = f64::NEG_INFINITY;
        for (sum, row) in sums.iter_mut().zip(&rows) {
            *sum += delta * row[i];
            if *sum > sup {
                sup = *sum;
            }
        }
        acc += sup;
    }
    Ok(RademacherEstimate {
        value: acc / (total_vectors as f64 * n as f64),
        std_error: 0.0,
        method: RademacherMethod::Exact,
        n,
        sample_count: total_vectors,
    })
}

/// Monte Carlo empirical Rademacher complexity.
///
/// Draw `j` takes its sign vector from substream `j` of `seed` (bit `i`
/// of consecutive 64-bit words gives `sigma_i`). The standard error is
/// the sample standard deviation of the per-draw suprema divided by
/// `sqrt(draws)`.
pub fn empirical_rademacher_mc(
    a: &LossClass<'_>,
    data: &Dataset,
    draws: u64,
    seed: SeedSpec,
) -> Result<RademacherEstimate, ComplexityError> {
    let n = data.n();
    if n == 0 {
        return Err(ComplexityError::EmptyDataset);
    }
    if draws == 0 {
        return Err(ComplexityError::ZeroDraws);
    }
    let rows = a.loss_rows(data)?;

    let mut sum = 0.0f64;
    let mut sum_sq = 0.0f64;
    let mut signs = vec![1.0f64; n];
    for draw in 0..draws {
        let mut rng = seed.stream(draw);
        let mut word = 0u64;
        for (i, sign) in signs.iter_mut().enumerate() {
            if i % 64 == 0 {
                word = rng.next_u64();
            }
            *sign = if word & 1 == 1 { 1.0 } else { -1.0 };
            word >>= 1;
        }
        let mut sup = f64::NEG_INFINITY;
        for row in &rows {
            let dot: f64 = row.iter().zip(&signs).map(|(f, s)| f * s).sum();
            if dot > sup {
                sup = dot;
            }
        }
        let value = sup / n as f64;
        sum += value;
        sum_sq += value * value;
    }
    let mean = sum / draws as f64;
    let std_error = if draws > 1 {
        let variance = ((sum_sq - sum * sum / draws as f64) / (draws - 1) as f64).max(0.0);
        (variance / draws as f64).sqrt()
    } else {
        0.0
    };
    Ok(RademacherEstimate {
        value: mean,
        std_error,
        method: RademacherMethod::MonteCarlo,
        n,
        sample_count: draws,
    })
}

/// Rademacher complexity `R_n = E[R_hat_n]`: the Monte Carlo empirical
/// estimate averaged over freshly sampled datasets of size `n`.
///
/// Dataset draw `d` uses substream `2d` of `seed` for its outcomes and
/// substreams derived from `2d + 1` for its sign vectors. The standard
/// error is the sample standard deviation of the per-dataset estimates
/// over `sqrt(dataset_draws)`, which includes the inner Monte Carlo
/// noise.
pub fn rademacher_complexity(
    a: &LossClass<'_>,
    p: &Distribution,
    n: usize,
    dataset_draws: u64,
    sign_draws: u64,
    seed: SeedSpec,
) -> Result<RademacherEstimate, ComplexityError> {
    if n == 0 {
        return Err(ComplexityError::EmptyDataset);
    }
    if dataset_draws == 0 || sign_draws == 0 {
        return Err(ComplexityError::ZeroDraws);
    }
    if a.hypothesis_class().domain() != p.domain() {
        return Err(CoreError::DomainMismatch {
            context: "loss class vs distribution",
        }
        .into());
    }
    let mut sum = 0.0f64;
    let mut sum_sq = 0.0f64;
    for draw in 0..dataset_draws {
        let data = p.sample_dataset_with(n, &mut seed.stream(2 * draw));
        let inner_seed = SeedSpec::new(seed.stream(2 * draw + 1).next_u64());
        let estimate = empirical_rademacher_mc(a, &data, sign_draws, inner_seed)?;
        sum += estimate.value;
        sum_sq += estimate.value * estimate.value;
    }
    let mean = sum / dataset_draws as f64;
    let std_error = if dataset_draws > 1 {
        let variance =
            ((sum_sq - sum * sum / dataset_draws as f64) / (dataset_draws - 1) as f64).max(0.0);
        (variance / dataset_draws as f64).sqrt()
    } else {
        0.0
    };
    Ok(RademacherEstimate {
        value: mean,
        std_error,
        method: RademacherMethod::MonteCarlo,
        n,
        sample_count: dataset_draws * sign_draws,
    })
}

/// The achieving hypothesis of a supremum deviation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SupDeviation {
    pub value: f64,
    pub hypothesis: usize,
}

/// `G_n`-style supremum over the class of the gap between expected and
/// empirical risk: `sup_h (L(h) - L_hat(h))`, or of the absolute gap
/// when `absolute` is set (the uniform-convergence form). Ties go to
/// the lowest hypothesis index.
pub fn sup_deviation(
    class: &HypothesisClass,
    p: &Distribution,
    data: &Dataset,
    loss: &LossFunction,
    absolute: bool,
) -> Result<SupDeviation, ComplexityError> {
    if class.domain() != p.domain() || class.domain() != data.domain() {
        return Err(CoreError::DomainMismatch {
            context: "class vs distribution vs dataset",
        }
        .into());
    }
    if data.n() == 0 {
        return Err(ComplexityError::EmptyDataset);
    }
    let mut best = SupDeviation {
        value: f64::NEG_INFINITY,
        hypothesis: 0,
    };
    for (index, h) in class.iter().enumerate() {
        let gap = expected_risk_unchecked(h, p, loss) - empirical_risk_unchecked(h, data, loss);
        let value = if absolute { gap.abs() } else { gap };
        if value > best.value {
            best = SupDeviation {
                value,
                hypothesis: index,
            };
        }
    }
    Ok(best)
}
