//! Cross-module invariants, mostly property-based: exactness of the
//! risk algebra, vertex optimality of credal extrema, monotonicities of
//! the closed-form bounds, Monte Carlo estimator consistency, and the
//! determinism contract of the harness.

mod common;

use common::*;
use proptest::prelude::*;

use credal_pac::bounds::{
    eps_finite_agnostic, eps_finite_realisable, eps_rademacher, gn_tail, hoeffding_tail_uniform,
    markov_bound, mcdiarmid_tail, sample_complexity_realisable, union_bound,
};
use credal_pac::complexity::{
    empirical_rademacher_exact, empirical_rademacher_mc, sup_deviation, LossClass,
};
use credal_pac::harness::{
    calibrate_epsilon, estimate_violation_probability, select_training_distribution,
    CalibrationOutcome, CampaignMode, CandidateBound, Experiment, ExperimentConfig,
    HypothesisSpec, LossKind, TrainingMode,
};
use credal_pac::{
    check_credal_realisability, check_uniform_credal_realisability, empirical_risk, erm,
    excess_risk, expected_risk, expected_risk_minimiser, lower_risk, upper_risk, CredalSet,
    Distribution, DomainSpace, Hypothesis, HypothesisClass, LossFunction, SeedSpec,
};

// ---------------------------------------------------------------------------
// Strategies
// ---------------------------------------------------------------------------

fn arb_domain() -> impl Strategy<Value = DomainSpace> {
    (1usize..=4, 2usize..=3).prop_map(|(inputs, labels)| DomainSpace::new(inputs, labels).unwrap())
}

fn arb_distribution(domain: DomainSpace) -> impl Strategy<Value = Distribution> {
    prop::collection::vec(0.0f64..1.0, domain.outcome_count()).prop_map(move |raw| {
        let total: f64 = raw.iter().sum();
        if total <= 0.0 {
            Distribution::uniform(domain)
        } else {
            Distribution::new(domain, raw.into_iter().map(|w| w / total).collect()).unwrap()
        }
    })
}

fn arb_class(domain: DomainSpace) -> impl Strategy<Value = HypothesisClass> {
    let full = HypothesisClass::all_tables(domain).unwrap();
    let total = full.len();
    prop::collection::btree_set(0..total, 1..=total.min(8)).prop_map(move |indices| {
        HypothesisClass::new(indices.iter().map(|&i| full.get(i).clone()).collect()).unwrap()
    })
}

fn arb_instance() -> impl Strategy<Value = (DomainSpace, Distribution, HypothesisClass, u64)> {
    arb_domain().prop_flat_map(|domain| {
        (
            Just(domain),
            arb_distribution(domain),
            arb_class(domain),
            any::<u64>(),
        )
    })
}

// ---------------------------------------------------------------------------
// Core invariants
// ---------------------------------------------------------------------------

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn risks_stay_within_the_loss_range((domain, p, class, seed) in arb_instance()) {
        let loss = LossFunction::ZeroOne;
        let data = p.sample_dataset(12, SeedSpec::new(seed));
        for h in class.iter() {
            let expected = expected_risk(h, &p, &loss).unwrap();
            let empirical = empirical_risk(h, &data, &loss).unwrap();
            prop_assert!((0.0..=1.0).contains(&expected));
            prop_assert!((0.0..=1.0).contains(&empirical));
        }
        let _ = domain;
    }

    #[test]
    fn expected_risk_is_linear_in_the_distribution(
        domain in arb_domain(),
        lambda in 0.0f64..=1.0,
        seed in any::<u64>(),
    ) {
        let mut rng = SeedSpec::new(seed).root();
        let p1 = random_distribution(&mut rng, domain);
        let p2 = random_distribution(&mut rng, domain);
        let h = random_class(&mut rng, domain, 8).get(0).clone();
        let loss = LossFunction::ZeroOne;

        let mixed = Distribution::mixture(&[&p1, &p2], &[lambda, 1.0 - lambda]).unwrap();
        let lhs = expected_risk(&h, &mixed, &loss).unwrap();
        let rhs = lambda * expected_risk(&h, &p1, &loss).unwrap()
            + (1.0 - lambda) * expected_risk(&h, &p2, &loss).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-12, "{lhs} vs {rhs}");
    }

    #[test]
    fn empirical_risk_equals_risk_under_empirical_distribution(
        (_, p, class, seed) in arb_instance()
    ) {
        let loss = LossFunction::ZeroOne;
        let data = p.sample_dataset(16, SeedSpec::new(seed));
        let empirical_p = data.empirical_distribution().unwrap();
        for h in class.iter() {
            let direct = empirical_risk(h, &data, &loss).unwrap();
            let via_distribution = expected_risk(h, &empirical_p, &loss).unwrap();
            prop_assert!((direct - via_distribution).abs() <= 1e-12);
        }
    }

    #[test]
    fn erm_is_minimal_over_the_class((_, p, class, seed) in arb_instance()) {
        let loss = LossFunction::ZeroOne;
        let data = p.sample_dataset(9, SeedSpec::new(seed));
        let chosen = erm(&class, &data, &loss).unwrap();
        for h in class.iter() {
            prop_assert!(chosen.risk <= empirical_risk(h, &data, &loss).unwrap() + 1e-15);
        }
        // The winner's stored risk matches a direct evaluation.
        let recomputed = empirical_risk(class.get(chosen.index), &data, &loss).unwrap();
        prop_assert_eq!(chosen.risk, recomputed);
    }

    #[test]
    fn excess_risk_is_non_negative((_, p, class, seed) in arb_instance()) {
        let loss = LossFunction::ZeroOne;
        let data = p.sample_dataset(10, SeedSpec::new(seed));
        prop_assert!(excess_risk(&class, &data, &p, &loss).unwrap() >= 0.0);
    }

    #[test]
    fn realisable_distributions_give_zero_erm_risk(
        domain in arb_domain(),
        seed in any::<u64>(),
        n in 1usize..=40,
    ) {
        // Build p supported only on the graph of one class member; the
        // ERM must then fit every sample exactly.
        let mut rng = SeedSpec::new(seed).root();
        let class = random_class(&mut rng, domain, 8);
        let target = rng.next_below(class.len() as u64) as usize;
        let h_star = class.get(target);
        let weights: Vec<(usize, usize, f64)> = (0..domain.input_count())
            .map(|x| (x, h_star.predict(x), 1.0 / domain.input_count() as f64))
            .collect();
        let p = Distribution::from_outcomes(domain, &weights).unwrap();
        prop_assert_eq!(expected_risk(h_star, &p, &LossFunction::ZeroOne).unwrap(), 0.0);

        let data = p.sample_dataset(n, SeedSpec::new(seed ^ 0xABCD));
        let chosen = erm(&class, &data, &LossFunction::ZeroOne).unwrap();
        prop_assert_eq!(chosen.risk, 0.0);
    }
}

// ---------------------------------------------------------------------------
// Credal invariants
// ---------------------------------------------------------------------------

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn vertex_extrema_bracket_every_sampled_mixture(
        domain in arb_domain(),
        seed in any::<u64>(),
    ) {
        let mut rng = SeedSpec::new(seed).root();
        let set = random_credal_set(&mut rng, domain, 4);
        let h = random_class(&mut rng, domain, 8).get(0).clone();
        let loss = LossFunction::ZeroOne;
        let upper = upper_risk(&h, &set, &loss).unwrap();
        let lower = lower_risk(&h, &set, &loss).unwrap();
        prop_assert!(lower.risk <= upper.risk);
        for _ in 0..200 {
            let mix = set.sample_mixture_with(&mut rng);
            let risk = expected_risk(&h, &mix, &loss).unwrap();
            prop_assert!(risk >= lower.risk - 1e-12);
            prop_assert!(risk <= upper.risk + 1e-12);
        }
    }

    #[test]
    fn singleton_sets_collapse_the_extrema(
        domain in arb_domain(),
        seed in any::<u64>(),
    ) {
        let mut rng = SeedSpec::new(seed).root();
        let p = random_distribution(&mut rng, domain);
        let h = random_class(&mut rng, domain, 4).get(0).clone();
        let loss = LossFunction::ZeroOne;
        let set = CredalSet::singleton(p.clone());
        let risk = expected_risk(&h, &p, &loss).unwrap();
        prop_assert_eq!(upper_risk(&h, &set, &loss).unwrap().risk, risk);
        prop_assert_eq!(lower_risk(&h, &set, &loss).unwrap().risk, risk);
    }

    #[test]
    fn uniform_realisability_implies_existential(
        domain in arb_domain(),
        seed in any::<u64>(),
    ) {
        let mut rng = SeedSpec::new(seed).root();
        let set = random_credal_set(&mut rng, domain, 4);
        let class = random_class(&mut rng, domain, 8);
        let uniform = check_uniform_credal_realisability(&class, &set, 1e-9).unwrap();
        let existential = check_credal_realisability(&class, &set, 1e-9).unwrap();
        if uniform.holds {
            prop_assert!(existential.holds);
        }
    }

    #[test]
    fn adding_a_vertex_widens_the_risk_interval(
        domain in arb_domain(),
        seed in any::<u64>(),
    ) {
        let mut rng = SeedSpec::new(seed).root();
        let set = random_credal_set(&mut rng, domain, 3);
        let extra = random_distribution(&mut rng, domain);
        let h = random_class(&mut rng, domain, 4).get(0).clone();
        let loss = LossFunction::ZeroOne;

        let mut vertices = set.vertices().to_vec();
        vertices.push(extra);
        let widened = CredalSet::new(vertices).unwrap();

        prop_assert!(
            upper_risk(&h, &widened, &loss).unwrap().risk
                >= upper_risk(&h, &set, &loss).unwrap().risk
        );
        prop_assert!(
            lower_risk(&h, &widened, &loss).unwrap().risk
                <= lower_risk(&h, &set, &loss).unwrap().risk
        );
    }

    #[test]
    fn uniform_check_agrees_with_mixture_brute_force(
        domain in arb_domain(),
        seed in any::<u64>(),
    ) {
        let mut rng = SeedSpec::new(seed).root();
        let set = random_credal_set(&mut rng, domain, 4);
        let class = random_class(&mut rng, domain, 8);
        let loss = LossFunction::ZeroOne;
        let uniform = check_uniform_credal_realisability(&class, &set, 1e-9).unwrap();

        // Brute force: every sampled hull element must admit a
        // (near-)zero-risk hypothesis.
        let mut all_realisable = true;
        for _ in 0..1_000 {
            let mix = set.sample_mixture_with(&mut rng);
            let best = expected_risk_minimiser(&class, &mix, &loss).unwrap();
            if best.risk > 1e-9 {
                all_realisable = false;
                break;
            }
        }
        prop_assert_eq!(uniform.holds, all_realisable);
    }
}

// ---------------------------------------------------------------------------
// Bounds monotonicities
// ---------------------------------------------------------------------------

#[test]
fn epsilon_formulas_are_monotone_on_a_grid() {
    let sizes = [1usize, 2, 16, 128];
    let deltas = [0.01, 0.05, 0.2, 1.0];
    let ns = [1usize, 10, 100, 1000];
    for &size in &sizes {
        for &delta in &deltas {
            for &n in &ns {
                let real = eps_finite_realisable(size, delta, n).unwrap();
                let agnostic = eps_finite_agnostic(size, delta, n).unwrap();
                assert!(real >= 0.0 && agnostic >= 0.0);

                // Strictly decreasing in n (non-degenerate constants).
                if size > 1 || delta < 1.0 {
                    assert!(eps_finite_realisable(size, delta, n * 2).unwrap() < real);
                    assert!(eps_finite_agnostic(size, delta, n * 2).unwrap() < agnostic);
                }
                // Non-decreasing in class size.
                assert!(eps_finite_realisable(size * 2, delta, n).unwrap() >= real);
                assert!(eps_finite_agnostic(size * 2, delta, n).unwrap() >= agnostic);
                // Non-increasing in delta.
                assert!(eps_finite_realisable(size, delta / 2.0, n).unwrap() >= real);
                assert!(eps_finite_agnostic(size, delta / 2.0, n).unwrap() >= agnostic);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn probability_bounds_clip_into_the_unit_interval(
        expectation in 0.0f64..10.0,
        t in 0.01f64..10.0,
        eps in 0.0f64..1.0,
        n in 1usize..200,
    ) {
        for report in [
            markov_bound(expectation, t).unwrap(),
            hoeffding_tail_uniform(n, eps, 1.0).unwrap(),
            gn_tail(n, eps).unwrap(),
            mcdiarmid_tail(eps, &vec![1.0 / n as f64; n]).unwrap(),
            union_bound(&[0.3, 0.4, 0.5]).unwrap(),
        ] {
            let clipped = report.clipped_value.unwrap();
            prop_assert!((0.0..=1.0).contains(&clipped));
            prop_assert!(report.raw_value >= 0.0);
            prop_assert!(clipped <= report.raw_value + 1e-15);
        }
    }

    #[test]
    fn sample_complexity_round_trips_epsilon(
        size in 1usize..64,
        delta in 0.01f64..1.0,
        n in 1usize..500,
    ) {
        // Exact arithmetic would give n back; the division round trip
        // can push the ceiling up by one.
        let eps = eps_finite_realisable(size, delta, n).unwrap();
        if eps > 0.0 {
            let required = sample_complexity_realisable(size, delta, eps).unwrap();
            prop_assert!(required == n as u64 || required == n as u64 + 1,
                "expected ~{n}, got {required}");
        }
    }

    #[test]
    fn rademacher_epsilon_decreases_in_n(r in 0.0f64..0.5, delta in 0.01f64..0.99) {
        let coarse = eps_rademacher(r, delta, 50).unwrap();
        let fine = eps_rademacher(r, delta, 500).unwrap();
        prop_assert!(fine < coarse);
        prop_assert!(fine >= 4.0 * r);
    }
}

// ---------------------------------------------------------------------------
// Complexity invariants
// ---------------------------------------------------------------------------

#[test]
fn mc_estimator_tracks_exact_within_four_standard_errors() {
    // 100 seeded runs; at 4 standard errors the exact value must be
    // inside the interval on at least 95 of them.
    let loss = LossFunction::ZeroOne;
    let class = HypothesisClass::all_tables(domain_2x2()).unwrap();
    let a = LossClass::new(&class, &loss);
    let data = p_noise().sample_dataset(10, SeedSpec::new(1234));
    let exact = empirical_rademacher_exact(&a, &data).unwrap().value;

    let mut hits = 0;
    for run in 0..100u64 {
        let estimate = empirical_rademacher_mc(&a, &data, 2_000, SeedSpec::new(run)).unwrap();
        if (estimate.value - exact).abs() <= 4.0 * estimate.std_error {
            hits += 1;
        }
    }
    assert!(hits >= 95, "only {hits}/100 runs within 4 standard errors");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn rademacher_values_lie_in_the_loss_span((_, p, class, seed) in arb_instance()) {
        let loss = LossFunction::ZeroOne;
        let a = LossClass::new(&class, &loss);
        let data = p.sample_dataset(8, SeedSpec::new(seed));
        let exact = empirical_rademacher_exact(&a, &data).unwrap();
        prop_assert!((0.0..=1.0).contains(&exact.value));
        let mc = empirical_rademacher_mc(&a, &data, 500, SeedSpec::new(seed ^ 1)).unwrap();
        prop_assert!((-1.0..=1.0).contains(&mc.value));
    }

    #[test]
    fn deviation_suprema_are_ordered_and_bounded((_, p, class, seed) in arb_instance()) {
        let loss = LossFunction::ZeroOne;
        let data = p.sample_dataset(10, SeedSpec::new(seed));
        let signed = sup_deviation(&class, &p, &data, &loss, false).unwrap();
        let absolute = sup_deviation(&class, &p, &data, &loss, true).unwrap();
        prop_assert!(signed.value <= absolute.value);
        prop_assert!(absolute.value <= 1.0);
    }
}

#[test]
fn averaged_complexity_matches_an_independent_oracle() {
    // Oracle: estimate R_n = E[R_hat_n] from scratch — fresh dataset
    // draws on their own seeds, exact (noise-free) inner enumeration —
    // and compare the library estimate within 3 combined standard
    // errors.
    let loss = LossFunction::ZeroOne;
    let class = HypothesisClass::all_tables(domain_2x2()).unwrap();
    let a = LossClass::new(&class, &loss);
    let p = Distribution::new(domain_2x2(), vec![0.35, 0.15, 0.2, 0.3]).unwrap();
    let n = 8;

    let oracle_draws = 400u64;
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for k in 0..oracle_draws {
        let data = p.sample_dataset(n, SeedSpec::new(900_000 + k));
        let value = empirical_rademacher_exact(&a, &data).unwrap().value;
        sum += value;
        sum_sq += value * value;
    }
    let oracle_mean = sum / oracle_draws as f64;
    let oracle_var =
        (sum_sq - sum * sum / oracle_draws as f64) / (oracle_draws - 1) as f64;
    let oracle_se = (oracle_var / oracle_draws as f64).sqrt();

    let estimate =
        credal_pac::complexity::rademacher_complexity(&a, &p, n, 400, 512, SeedSpec::new(17))
            .unwrap();
    let combined_se = (estimate.std_error.powi(2) + oracle_se.powi(2)).sqrt();
    assert!(
        (estimate.value - oracle_mean).abs() <= 3.0 * combined_se,
        "estimate {} vs oracle {} (combined se {})",
        estimate.value,
        oracle_mean,
        combined_se
    );
}

#[test]
fn excess_risk_event_implies_half_deviation_event() {
    // Per trial: L(erm) - L(h*) <= 2 sup_h |L(h) - L_hat(h)|, so the
    // excess-risk event at eps is contained in the deviation event at
    // eps/2 and the frequencies are ordered with no slack.
    let loss = LossFunction::ZeroOne;
    let domain = DomainSpace::new(3, 2).unwrap();
    let class = HypothesisClass::all_tables(domain).unwrap();
    let p = Distribution::new(
        domain,
        vec![0.30, 0.05, 0.10, 0.20, 0.05, 0.30],
    )
    .unwrap();
    let best = expected_risk_minimiser(&class, &p, &loss).unwrap();
    let seed = SeedSpec::new(31337);
    let eps_grid = [0.05, 0.1, 0.2, 0.3, 0.5];
    let trials = 4_000;
    let n = 12;

    let mut excess_counts = [0u32; 5];
    let mut deviation_counts = [0u32; 5];
    for trial in 0..trials {
        let data = p.sample_dataset_with(n, &mut seed.stream(trial));
        let chosen = erm(&class, &data, &loss).unwrap();
        let excess = expected_risk(class.get(chosen.index), &p, &loss).unwrap() - best.risk;
        let deviation = sup_deviation(&class, &p, &data, &loss, true).unwrap().value;
        for (i, &eps) in eps_grid.iter().enumerate() {
            if excess >= eps {
                excess_counts[i] += 1;
                assert!(
                    deviation >= eps / 2.0,
                    "trial {trial}: excess {excess} >= {eps} but deviation {deviation} < {}",
                    eps / 2.0
                );
            }
            if deviation >= eps / 2.0 {
                deviation_counts[i] += 1;
            }
        }
    }
    for i in 0..eps_grid.len() {
        assert!(excess_counts[i] <= deviation_counts[i]);
    }
}

// ---------------------------------------------------------------------------
// Harness invariants
// ---------------------------------------------------------------------------

fn classical_config(trials: u64, seed: u64) -> ExperimentConfig {
    ExperimentConfig {
        domain: domain_2x2(),
        hypotheses: HypothesisSpec::AllTables,
        loss: LossKind::ZeroOne,
        distribution: Some(vec![0.4, 0.1, 0.1, 0.4]),
        credal_vertices: None,
        training: None,
        n: 15,
        trials,
        delta: 0.05,
        eps_grid: vec![0.1, 0.25, 0.5, 0.75, 1.0],
        seed,
        candidate_bound: CandidateBound::None,
    }
}

fn credal_config(mode: TrainingMode, trials: u64, seed: u64) -> ExperimentConfig {
    ExperimentConfig {
        domain: domain_2x2(),
        hypotheses: HypothesisSpec::AllTables,
        loss: LossKind::ZeroOne,
        distribution: None,
        credal_vertices: Some(vec![
            p_det().mass().to_vec(),
            p_flip().mass().to_vec(),
        ]),
        training: Some(mode),
        n: 15,
        trials,
        delta: 0.05,
        eps_grid: vec![0.1, 0.25, 0.5, 0.75, 1.0],
        seed,
        candidate_bound: CandidateBound::None,
    }
}

#[test]
fn reports_are_deterministic_and_internally_consistent() {
    let config = credal_config(TrainingMode::RandomMixture, 3_000, 99);
    let a = estimate_violation_probability(&config).unwrap();
    let b = estimate_violation_probability(&config).unwrap();
    // Wall time is measured, everything else is a pure function of the
    // config.
    assert_eq!(a.rows, b.rows);
    assert_eq!(a.config_digest, b.config_digest);
    assert_eq!(a.calibration, b.calibration);
    assert_eq!(a.mode, CampaignMode::Credal);

    let mut last = f64::INFINITY;
    for row in &a.rows {
        // Frequencies are non-increasing along the ascending grid.
        assert!(row.frequency <= last);
        last = row.frequency;
        // The standard error is recomputable from the frequency.
        let se = (row.frequency * (1.0 - row.frequency) / a.trials as f64).sqrt();
        assert_eq!(row.std_error, se);
    }
    // Risks never exceed 1, so nothing violates eps = 1.
    assert_eq!(a.rows.last().unwrap().frequency, 0.0);
}

#[test]
fn worst_case_risk_dominates_training_risk_in_every_trial() {
    for mode in [
        TrainingMode::FixedVertex(0),
        TrainingMode::UniformVertex,
        TrainingMode::RandomMixture,
        TrainingMode::OracleAligned,
        TrainingMode::Adversarial,
    ] {
        let config = credal_config(mode, 200, 5);
        let experiment = Experiment::prepare(&config).unwrap();
        for trial in 0..config.trials {
            let outcome = experiment.run_credal_trial(trial).unwrap();
            let worst = outcome.worst_case.unwrap();
            assert!(
                worst.risk >= outcome.classical_risk - 1e-12,
                "{mode:?} trial {trial}: worst {} < classical {}",
                worst.risk,
                outcome.classical_risk
            );
            assert!(outcome.excess_risk >= -1e-15);
        }
    }
}

#[test]
fn trials_are_reproducible_and_mode_checked() {
    let config = classical_config(10, 7);
    let experiment = Experiment::prepare(&config).unwrap();
    let a = experiment.run_classical_trial(3).unwrap();
    let b = experiment.run_classical_trial(3).unwrap();
    assert_eq!(a, b);
    assert!(experiment.run_credal_trial(3).is_err());

    let credal = Experiment::prepare(&credal_config(TrainingMode::FixedVertex(0), 10, 7)).unwrap();
    assert!(credal.run_classical_trial(0).is_err());
}

#[test]
fn singleton_credal_campaign_coincides_with_classical() {
    let classical = ExperimentConfig {
        distribution: Some(p_det().mass().to_vec()),
        ..classical_config(100, 21)
    };
    let singleton = ExperimentConfig {
        distribution: None,
        credal_vertices: Some(vec![p_det().mass().to_vec()]),
        training: Some(TrainingMode::FixedVertex(0)),
        ..classical_config(100, 21)
    };
    let classical_exp = Experiment::prepare(&classical).unwrap();
    let singleton_exp = Experiment::prepare(&singleton).unwrap();
    for trial in 0..100 {
        let c = classical_exp.run_trial(trial);
        let s = singleton_exp.run_trial(trial);
        assert_eq!(c.erm_index, s.erm_index);
        assert_eq!(c.erm_empirical_risk, s.erm_empirical_risk);
        assert_eq!(c.classical_risk, s.classical_risk);
        assert_eq!(c.excess_risk, s.excess_risk);
        // The singleton's worst case collapses onto the classical risk.
        assert_eq!(s.worst_case.unwrap().risk, s.classical_risk);
    }
}

#[test]
fn training_selection_resolves_oracle_and_adversarial_vertices() {
    let set = CredalSet::new(vec![p_det(), p_flip()]).unwrap();
    let class = HypothesisClass::new(vec![h_id()]).unwrap();
    let loss = LossFunction::ZeroOne;

    // h_id is perfect under the first vertex and hopeless under the
    // second, so the oracle picks vertex 0 and the adversary vertex 1.
    let oracle = select_training_distribution(
        &set,
        TrainingMode::OracleAligned,
        Some(&class),
        &loss,
        SeedSpec::new(0),
    )
    .unwrap();
    assert_eq!(oracle.mass(), p_det().mass());

    let adversarial = select_training_distribution(
        &set,
        TrainingMode::Adversarial,
        Some(&class),
        &loss,
        SeedSpec::new(0),
    )
    .unwrap();
    assert_eq!(adversarial.mass(), p_flip().mass());

    // Singleton sets leave no choice in any mode.
    let single = CredalSet::singleton(p_noise());
    for mode in [
        TrainingMode::FixedVertex(0),
        TrainingMode::UniformVertex,
        TrainingMode::RandomMixture,
        TrainingMode::OracleAligned,
        TrainingMode::Adversarial,
    ] {
        let chosen =
            select_training_distribution(&single, mode, Some(&class), &loss, SeedSpec::new(3))
                .unwrap();
        for (a, b) in chosen.mass().iter().zip(p_noise().mass()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    // Modes that need the class reject its absence.
    assert!(select_training_distribution(
        &set,
        TrainingMode::OracleAligned,
        None,
        &loss,
        SeedSpec::new(0)
    )
    .is_err());
}

#[test]
fn large_samples_drive_the_excess_risk_down() {
    // With n = 1e4 the ERM of the noisy instance all but surely finds
    // the best-in-class hypothesis, so the excess risk clears 0.05 in
    // at least 99% of trials.
    let config = ExperimentConfig {
        n: 10_000,
        ..classical_config(500, 13)
    };
    let experiment = Experiment::prepare(&config).unwrap();
    let small = (0..config.trials)
        .filter(|&t| experiment.run_trial(t).excess_risk <= 0.05)
        .count();
    assert!(
        small as f64 >= 0.99 * config.trials as f64,
        "only {small}/{} trials had excess risk <= 0.05",
        config.trials
    );
}

#[test]
fn calibrated_epsilon_is_within_grid_resolution_of_the_analytic_value() {
    // In the realisable case the analytic epsilon is guaranteed
    // feasible, so the calibrated grid value can exceed it by at most
    // one grid step.
    let domain = DomainSpace::new(4, 2).unwrap();
    let h_star = Hypothesis::new(domain, vec![0, 1, 0, 1]).unwrap();
    let weights: Vec<(usize, usize, f64)> =
        (0..4).map(|x| (x, h_star.predict(x), 0.25)).collect();
    let p = Distribution::from_outcomes(domain, &weights).unwrap();
    let resolution = 0.02;
    let config = ExperimentConfig {
        domain,
        hypotheses: HypothesisSpec::AllTables,
        loss: LossKind::ZeroOne,
        distribution: Some(p.mass().to_vec()),
        credal_vertices: None,
        training: None,
        n: 20,
        trials: 20_000,
        delta: 0.05,
        eps_grid: (1..=20).map(|k| k as f64 * resolution).collect(),
        seed: 47,
        candidate_bound: CandidateBound::RealisableUnion,
    };
    let analytic = eps_finite_realisable(16, config.delta, config.n).unwrap();
    match calibrate_epsilon(&config, config.delta).unwrap() {
        CalibrationOutcome::Calibrated { eps } => {
            assert!(
                eps <= analytic + resolution,
                "calibrated {eps} exceeds analytic {analytic} + resolution"
            );
        }
        CalibrationOutcome::UncalibratableOnGrid => {
            panic!("realisable campaign must be calibratable")
        }
    }
}

#[test]
fn report_digest_matches_a_rehash_of_the_canonical_config() {
    let config = classical_config(50, 3);
    let report = estimate_violation_probability(&config).unwrap();
    assert_eq!(report.config_digest, config.digest());
    // Round-tripping the config through emit/parse preserves the hash.
    let reparsed = credal_pac::harness::parse_config(&config.to_toml()).unwrap();
    assert_eq!(reparsed.digest(), report.config_digest);
}

#[test]
fn uniform_vertex_mode_visits_every_vertex() {
    let config = credal_config(TrainingMode::UniformVertex, 4_000, 23);
    let experiment = Experiment::prepare(&config).unwrap();
    let mut counts = [0u64; 2];
    for trial in 0..config.trials {
        match experiment.run_trial(trial).training_distribution {
            credal_pac::harness::TrainingDistributionId::Vertex(v) => counts[v] += 1,
            other => panic!("unexpected training id {other:?}"),
        }
    }
    // Ten standard errors around an even split.
    let slack = 10.0 * (0.25 * config.trials as f64).sqrt();
    assert!(
        (counts[0] as f64 - counts[1] as f64).abs() <= 2.0 * slack,
        "vertex counts too lopsided: {counts:?}"
    );
}

#[test]
fn csv_numbers_parse_back_to_the_report_values() {
    let config = credal_config(TrainingMode::RandomMixture, 777, 3);
    let report = estimate_violation_probability(&config).unwrap();
    let csv = credal_pac::harness::emit_report(&report, credal_pac::harness::ReportFormat::Csv);
    for (line, row) in csv.lines().skip(1).zip(&report.rows) {
        let fields: Vec<&str> = line.split(',').collect();
        assert_eq!(fields.len(), 5);
        assert_eq!(fields[0].parse::<f64>().unwrap(), row.eps);
        assert_eq!(fields[1].parse::<f64>().unwrap(), row.frequency);
        assert_eq!(fields[2].parse::<f64>().unwrap(), row.std_error);
        match row.analytic_bound {
            Some(bound) => assert_eq!(fields[3].parse::<f64>().unwrap(), bound),
            None => assert!(fields[3].is_empty()),
        }
    }
}

#[test]
fn classical_realisable_campaign_has_zero_erm_risk_everywhere() {
    let config = ExperimentConfig {
        distribution: Some(p_det().mass().to_vec()),
        candidate_bound: CandidateBound::RealisableUnion,
        ..classical_config(2_000, 11)
    };
    let report = estimate_violation_probability(&config).unwrap();
    assert_eq!(report.erm_zero_empirical_risk_trials, report.trials);
    assert!(!report.has_violation());
}
