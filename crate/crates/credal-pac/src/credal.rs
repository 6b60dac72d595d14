//! Credal sets — convex sets of distributions given by finitely many
//! extreme points — with lower/upper expected risk and realisability
//! checks.
//!
//! Expected risk is linear in the distribution, so over the convex hull
//! of the vertices its extrema are attained at vertices. That single
//! fact makes everything here exact: `upper_risk`/`lower_risk` scan the
//! vertex list, the existential realisability check reduces to a
//! (hypothesis, vertex) scan, and the universal ("uniform") check
//! reduces to a support argument:
//!
//! Every interior point of the hull has support equal to the union of
//! the vertex supports. Hence "every member of the set admits a
//! zero-risk hypothesis" holds across the whole hull if and only if a
//! single hypothesis is correct on every outcome in that support union
//! (points on faces have smaller support and are covered a fortiori).
//! Per-vertex witnesses are reported separately for the vertex-only
//! reading.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::core::{
    expected_risk_unchecked, CoreError, Distribution, DomainSpace, Hypothesis, HypothesisClass,
    LossFunction,
};
use crate::rng::{SeedSpec, SplitMix64};

/// Default tolerance for "risk equals zero" in realisability checks.
pub const REALISABILITY_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CredalError {
    #[error("credal set must have at least one vertex")]
    EmptySet,
    #[error("vertex {index} has a different domain than vertex 0")]
    VertexDomainMismatch { index: usize },
    #[error(transparent)]
    Core(#[from] CoreError),
}

/// A credal set represented by the ordered list of its extreme points.
///
/// Duplicate vertices are permitted; exact duplicates found at
/// construction are recorded in
/// [`duplicate_vertex_pairs`](Self::duplicate_vertex_pairs) as a
/// diagnostic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CredalSet {
    domain: DomainSpace,
    vertices: Vec<Distribution>,
    duplicate_vertex_pairs: Vec<(usize, usize)>,
}

impl CredalSet {
    pub fn new(vertices: Vec<Distribution>) -> Result<Self, CredalError> {
        let Some(first) = vertices.first() else {
            return Err(CredalError::EmptySet);
        };
        let domain = first.domain();
        for (index, vertex) in vertices.iter().enumerate().skip(1) {
            if vertex.domain() != domain {
                return Err(CredalError::VertexDomainMismatch { index });
            }
        }
        let mut duplicate_vertex_pairs = Vec::new();
        for i in 0..vertices.len() {
            for j in (i + 1)..vertices.len() {
                if vertices[i].mass() == vertices[j].mass() {
                    duplicate_vertex_pairs.push((i, j));
                }
            }
        }
        Ok(Self {
            domain,
            vertices,
            duplicate_vertex_pairs,
        })
    }

    /// The credal set whose hull is the single distribution `p`.
    pub fn singleton(p: Distribution) -> Self {
        Self {
            domain: p.domain(),
            vertices: vec![p],
            duplicate_vertex_pairs: Vec::new(),
        }
    }

    pub fn domain(&self) -> DomainSpace {
        self.domain
    }

    pub fn vertices(&self) -> &[Distribution] {
        &self.vertices
    }

    pub fn vertex(&self, index: usize) -> &Distribution {
        &self.vertices[index]
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        false // non-empty by construction
    }

    pub fn duplicate_vertex_pairs(&self) -> &[(usize, usize)] {
        &self.duplicate_vertex_pairs
    }

    /// Union over all vertices of the outcomes with strictly positive
    /// mass — the support of every interior point of the hull.
    pub fn support_union(&self) -> BTreeSet<usize> {
        let mut union = BTreeSet::new();
        for vertex in &self.vertices {
            union.extend(vertex.support());
        }
        union
    }

    /// A hull element with symmetric Dirichlet(1) (uniform-simplex)
    /// vertex weights, drawn from substream 0 of `seed`.
    pub fn sample_mixture(&self, seed: SeedSpec) -> Distribution {
        self.sample_mixture_with(&mut seed.root())
    }

    /// As [`sample_mixture`](Self::sample_mixture) from a caller-managed
    /// stream.
    pub fn sample_mixture_with(&self, rng: &mut SplitMix64) -> Distribution {
        let weights = self.sample_mixture_weights_with(rng);
        self.mixture_from_weights(&weights)
    }

    /// Uniform-simplex vertex weights: normalized Exp(1) draws, one per
    /// vertex, in vertex order.
    pub fn sample_mixture_weights_with(&self, rng: &mut SplitMix64) -> Vec<f64> {
        let mut weights: Vec<f64> = self.vertices.iter().map(|_| rng.next_exp()).collect();
        let total: f64 = weights.iter().sum();
        if total > 0.0 {
            for w in &mut weights {
                *w /= total;
            }
        } else {
            // All draws hit exactly zero; fall back to the barycentre.
            weights.fill(1.0 / self.vertices.len() as f64);
        }
        weights
    }

    /// The hull element with the given convex vertex weights.
    pub fn mixture_from_weights(&self, weights: &[f64]) -> Distribution {
        let refs: Vec<&Distribution> = self.vertices.iter().collect();
        Distribution::mixture(&refs, weights)
            .expect("vertices share a domain and weights are convex")
    }
}

/// A risk extremum over the vertex list: the value and the achieving
/// vertex index (lowest index on ties).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VertexRisk {
    pub risk: f64,
    pub vertex: usize,
}

fn check_credal_domains(
    lhs: DomainSpace,
    set: &CredalSet,
) -> Result<(), CredalError> {
    if lhs != set.domain() {
        return Err(CredalError::Core(CoreError::DomainMismatch {
            context: "operand vs credal set",
        }));
    }
    Ok(())
}

/// Upper expected risk `max_{p in hull} L_p(h)`, attained at a vertex
/// by linearity.
pub fn upper_risk(
    hypothesis: &Hypothesis,
    set: &CredalSet,
    loss: &LossFunction,
) -> Result<VertexRisk, CredalError> {
    check_credal_domains(hypothesis.domain(), set)?;
    let mut best = VertexRisk {
        risk: expected_risk_unchecked(hypothesis, set.vertex(0), loss),
        vertex: 0,
    };
    for (vertex, p) in set.vertices().iter().enumerate().skip(1) {
        let risk = expected_risk_unchecked(hypothesis, p, loss);
        if risk > best.risk {
            best = VertexRisk { risk, vertex };
        }
    }
    Ok(best)
}

/// Lower expected risk `min_{p in hull} L_p(h)`, attained at a vertex
/// by linearity.
pub fn lower_risk(
    hypothesis: &Hypothesis,
    set: &CredalSet,
    loss: &LossFunction,
) -> Result<VertexRisk, CredalError> {
    check_credal_domains(hypothesis.domain(), set)?;
    let mut best = VertexRisk {
        risk: expected_risk_unchecked(hypothesis, set.vertex(0), loss),
        vertex: 0,
    };
    for (vertex, p) in set.vertices().iter().enumerate().skip(1) {
        let risk = expected_risk_unchecked(hypothesis, p, loss);
        if risk < best.risk {
            best = VertexRisk { risk, vertex };
        }
    }
    Ok(best)
}

/// For each vertex, the expected-risk minimiser over the class and its
/// risk (ties broken by the lowest hypothesis index).
pub fn per_vertex_minimisers(
    class: &HypothesisClass,
    set: &CredalSet,
    loss: &LossFunction,
) -> Result<Vec<PerVertexMinimiser>, CredalError> {
    check_credal_domains(class.domain(), set)?;
    Ok(set
        .vertices()
        .iter()
        .enumerate()
        .map(|(vertex, p)| {
            let mut best_index = 0;
            let mut best_risk = expected_risk_unchecked(class.get(0), p, loss);
            for (index, h) in class.iter().enumerate().skip(1) {
                let risk = expected_risk_unchecked(h, p, loss);
                if risk < best_risk {
                    best_index = index;
                    best_risk = risk;
                }
            }
            PerVertexMinimiser {
                vertex,
                hypothesis: best_index,
                risk: best_risk,
            }
        })
        .collect())
}

/// Row of the per-vertex minimiser table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerVertexMinimiser {
    pub vertex: usize,
    pub hypothesis: usize,
    pub risk: f64,
}

/// Existential realisability: some hypothesis has (near-)zero risk
/// under some member of the set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CredalRealisability {
    pub holds: bool,
    /// All (hypothesis index, vertex index) pairs with risk <= tolerance.
    pub witnesses: Vec<(usize, usize)>,
}

/// True iff `min over (h, vertex)` of the zero-one expected risk is at
/// most `tol`. Exact over the full hull: for fixed `h` the hull minimum
/// equals the vertex minimum by linearity, so quantifying over the set
/// reduces to its vertices.
pub fn check_credal_realisability(
    class: &HypothesisClass,
    set: &CredalSet,
    tol: f64,
) -> Result<CredalRealisability, CredalError> {
    check_credal_domains(class.domain(), set)?;
    let loss = LossFunction::ZeroOne;
    let mut witnesses = Vec::new();
    for (h_index, h) in class.iter().enumerate() {
        for (v_index, p) in set.vertices().iter().enumerate() {
            if expected_risk_unchecked(h, p, &loss) <= tol {
                witnesses.push((h_index, v_index));
            }
        }
    }
    Ok(CredalRealisability {
        holds: !witnesses.is_empty(),
        witnesses,
    })
}

/// Universal ("uniform") realisability: every member of the set admits
/// some zero-risk hypothesis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniformCredalRealisability {
    pub holds: bool,
    /// A hypothesis correct on the whole support union, if one exists.
    pub witness_hypothesis: Option<usize>,
    /// Vertex-only reading: the best hypothesis per vertex and whether
    /// its risk clears the tolerance.
    pub per_vertex: Vec<PerVertexWitness>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerVertexWitness {
    pub vertex: usize,
    pub hypothesis: usize,
    pub risk: f64,
    pub realisable: bool,
}

/// True iff some hypothesis has zero loss on every outcome in
/// [`CredalSet::support_union`]. See the module docs for why this is
/// exact over the entire hull, not just the vertices.
pub fn check_uniform_credal_realisability(
    class: &HypothesisClass,
    set: &CredalSet,
    tol: f64,
) -> Result<UniformCredalRealisability, CredalError> {
    check_credal_domains(class.domain(), set)?;
    let loss = LossFunction::ZeroOne;
    let union: Vec<(usize, usize)> = set
        .support_union()
        .into_iter()
        .map(|outcome| set.domain().unflatten(outcome))
        .collect();
    let witness_hypothesis = class
        .iter()
        .enumerate()
        .find(|(_, h)| union.iter().all(|&(x, y)| h.predict(x) == y))
        .map(|(index, _)| index);
    let per_vertex = per_vertex_minimisers(class, set, &loss)?
        .into_iter()
        .map(|m| PerVertexWitness {
            vertex: m.vertex,
            hypothesis: m.hypothesis,
            risk: m.risk,
            realisable: m.risk <= tol,
        })
        .collect();
    Ok(UniformCredalRealisability {
        holds: witness_hypothesis.is_some(),
        witness_hypothesis,
        per_vertex,
    })
}

/// Combined realisability diagnostics for a (class, credal set) pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RealisabilityReport {
    pub credal_realisable: bool,
    pub uniform_credal_realisable: bool,
    /// (hypothesis index, vertex index) pairs with risk <= tolerance.
    pub witnesses: Vec<(usize, usize)>,
    pub tolerance: f64,
    pub uniform_witness_hypothesis: Option<usize>,
    pub per_vertex: Vec<PerVertexWitness>,
}

impl RealisabilityReport {
    pub fn evaluate(
        class: &HypothesisClass,
        set: &CredalSet,
        tolerance: f64,
    ) -> Result<Self, CredalError> {
        let existential = check_credal_realisability(class, set, tolerance)?;
        let uniform = check_uniform_credal_realisability(class, set, tolerance)?;
        Ok(Self {
            credal_realisable: existential.holds,
            uniform_credal_realisable: uniform.holds,
            witnesses: existential.witnesses,
            tolerance,
            uniform_witness_hypothesis: uniform.witness_hypothesis,
            per_vertex: uniform.per_vertex,
        })
    }
}
