//! Shared fixtures for the integration suites: the canonical 2x2
//! instances and small random-instance generators driven by the
//! crate's own seeded streams.

#![allow(dead_code)]

use credal_pac::rng::SplitMix64;
use credal_pac::{CredalSet, Dataset, Distribution, DomainSpace, Hypothesis, HypothesisClass};

pub fn domain_2x2() -> DomainSpace {
    DomainSpace::new(2, 2).unwrap()
}

/// h(x) = x.
pub fn h_id() -> Hypothesis {
    Hypothesis::new(domain_2x2(), vec![0, 1]).unwrap()
}

/// h(x) = 1 - x.
pub fn h_neg() -> Hypothesis {
    Hypothesis::new(domain_2x2(), vec![1, 0]).unwrap()
}

/// Constant 0.
pub fn h_zero() -> Hypothesis {
    Hypothesis::new(domain_2x2(), vec![0, 0]).unwrap()
}

/// Half mass on (0,0), half on (1,1).
pub fn p_det() -> Distribution {
    Distribution::from_outcomes(domain_2x2(), &[(0, 0, 0.5), (1, 1, 0.5)]).unwrap()
}

/// Half mass on (0,1), half on (1,0).
pub fn p_flip() -> Distribution {
    Distribution::from_outcomes(domain_2x2(), &[(0, 1, 0.5), (1, 0, 0.5)]).unwrap()
}

/// Uniform over the four outcomes.
pub fn p_noise() -> Distribution {
    Distribution::uniform(domain_2x2())
}

/// A random domain with at most `max_outcomes` outcomes and at least
/// two labels.
pub fn random_domain(rng: &mut SplitMix64, max_outcomes: usize) -> DomainSpace {
    loop {
        let labels = 2 + rng.next_below(2) as usize; // 2..=3
        let inputs = 1 + rng.next_below(4) as usize; // 1..=4
        if inputs * labels <= max_outcomes {
            return DomainSpace::new(inputs, labels).unwrap();
        }
    }
}

/// A distribution whose positive masses are drawn from [0.2, 1.2]
/// before normalization, so no supported outcome carries negligible
/// mass. At least one outcome is supported.
pub fn random_distribution(rng: &mut SplitMix64, domain: DomainSpace) -> Distribution {
    loop {
        let mass: Vec<f64> = (0..domain.outcome_count())
            .map(|_| {
                if rng.next_f64() < 0.5 {
                    0.0
                } else {
                    0.2 + rng.next_f64()
                }
            })
            .collect();
        let total: f64 = mass.iter().sum();
        if total > 0.0 {
            let mass = mass.into_iter().map(|m| m / total).collect();
            return Distribution::new(domain, mass).unwrap();
        }
    }
}

/// A random non-empty class of at most `max_size` distinct tables.
pub fn random_class(
    rng: &mut SplitMix64,
    domain: DomainSpace,
    max_size: usize,
) -> HypothesisClass {
    let full = HypothesisClass::all_tables(domain).unwrap();
    let target = 1 + rng.next_below(max_size.min(full.len()) as u64) as usize;
    let mut picked = Vec::new();
    let mut seen = std::collections::BTreeSet::new();
    while picked.len() < target {
        let index = rng.next_below(full.len() as u64) as usize;
        if seen.insert(index) {
            picked.push(full.get(index).clone());
        }
    }
    HypothesisClass::new(picked).unwrap()
}

/// A random credal set with at most `max_vertices` vertices.
pub fn random_credal_set(
    rng: &mut SplitMix64,
    domain: DomainSpace,
    max_vertices: usize,
) -> CredalSet {
    let count = 1 + rng.next_below(max_vertices as u64) as usize;
    let vertices = (0..count)
        .map(|_| random_distribution(rng, domain))
        .collect();
    CredalSet::new(vertices).unwrap()
}

/// A random dataset of size `n` supported on the whole domain.
pub fn random_dataset(rng: &mut SplitMix64, domain: DomainSpace, n: usize) -> Dataset {
    let pairs = (0..n)
        .map(|_| {
            (
                rng.next_below(domain.input_count() as u64) as usize,
                rng.next_below(domain.label_count() as u64) as usize,
            )
        })
        .collect();
    Dataset::new(domain, pairs).unwrap()
}
