//! Statistical learning theory for finite hypothesis classes over
//! finite domains, extended to credal sets.
//!
//! The crate has five parts:
//!
//! - [`core`] — discrete probability spaces, lookup-table hypotheses,
//!   bounded losses, exact expected/empirical risks, ERM, and seeded
//!   i.i.d. dataset sampling.
//! - [`credal`] — credal sets (convex sets of distributions given by
//!   their extreme points), lower/upper expected risk, and exact
//!   realisability checks, both existential and uniform.
//! - [`bounds`] — closed-form concentration inequalities (Markov,
//!   Hoeffding, McDiarmid, union) and the PAC epsilon formulas for the
//!   realisable, agnostic, and Rademacher regimes.
//! - [`complexity`] — exact and Monte Carlo Rademacher complexity of
//!   the loss class, and the uniform-deviation variable.
//! - [`harness`] — seeded Monte Carlo campaigns that measure how often
//!   risks exceed thresholds in classical and credal regimes, compare
//!   the frequencies against analytic bounds, and emit JSON/CSV
//!   reports. The `credalpac` binary is a thin CLI over this module.
//!
//! Everything is deterministic: a campaign's results are a pure
//! function of its validated config and master seed, independent of
//! thread count.

#![forbid(unsafe_code)]

pub mod bounds;
pub mod complexity;
pub mod core;
pub mod credal;
pub mod harness;
pub mod rng;

pub use crate::core::{
    empirical_risk, erm, excess_risk, expected_risk, expected_risk_minimiser, zero_one_loss,
    CoreError, Dataset, Distribution, DomainSpace, Hypothesis, HypothesisClass, LossFunction,
    RiskMinimiser, TabularLoss,
};
pub use crate::credal::{
    check_credal_realisability, check_uniform_credal_realisability, lower_risk,
    per_vertex_minimisers, upper_risk, CredalError, CredalSet, RealisabilityReport, VertexRisk,
    REALISABILITY_TOLERANCE,
};
pub use crate::rng::{SeedSpec, SplitMix64};
