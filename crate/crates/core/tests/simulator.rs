use netlearn::analytics::{
    density_regression, gain_from_social_learning, independent_experiment_regression, misleading_interaction_regression,
    outcomes_from_records, robustness_sweep, DENSITY, INTERACTION, ROBUSTNESS_RANGE,
};
use netlearn::model::{autarky_accuracy, BehaviorModel, NetworkParams, SignalParams, State};
use netlearn::naive::{naive_accuracy_curve, ChoiceProbVariant, EllVariant};
use netlearn::ols::SeFlavor;
use netlearn::sim::{
    against_signal_stats, fraction_correct_histogram, mean_window_uncertainty, run_batch, run_batch_streaming,
    summarize, verify_record, window_uncertainty, IndependentDesign, TrialConfig, TrialRecord, LAST_K,
};
use std::sync::OnceLock;

fn exact(q: f64) -> Vec<f64> {
    naive_accuracy_curve(
        &NetworkParams::new(q, 40).unwrap(),
        &SignalParams::experiment(),
        EllVariant::TruncatedMean,
        ChoiceProbVariant::DerivedArgument,
    )
    .unwrap()
    .values
}

/// 10^4 naive trials per arm, shared by the herding tests.
fn naive_arms() -> &'static Vec<TrialRecord> {
    static RECORDS: OnceLock<Vec<TrialRecord>> = OnceLock::new();
    RECORDS.get_or_init(|| {
        let mut all = Vec::new();
        for (q, seed) in [(0.25, 11), (0.75, 12)] {
            let (_, mut recs) = run_batch(&TrialConfig::sequential(q, BehaviorModel::Naive), 10_000, seed, 8).unwrap();
            // keep trial ids unique across arms
            let offset = all.len() as u64;
            recs.iter_mut().for_each(|r| r.trial_id += offset);
            all.extend(recs);
        }
        all
    })
}

fn arm(q: f64) -> Vec<TrialRecord> {
    naive_arms().iter().filter(|r| r.q() == q).cloned().collect()
}

#[test]
fn batch_accuracy_matches_exact_curve_at_every_position() {
    for (q, seed) in [(0.25, 101), (0.75, 102)] {
        let curve = exact(q);
        let trials = 100_000;
        let summary = run_batch_streaming(&TrialConfig::sequential(q, BehaviorModel::Naive), trials, seed, 8, |_| Ok(())).unwrap();
        for (p, pos) in curve.iter().zip(&summary.positions) {
            let se = (p * (1.0 - p) / trials as f64).sqrt();
            assert!((pos.accuracy - p).abs() < 3.0 * se, "q={q} position {}: {} vs {p}", pos.position, pos.accuracy);
        }
    }
}

#[test]
fn sparse_beats_dense_by_the_exact_margin() {
    let trials = 100_000;
    let mean_last8 = |q: f64, seed| {
        run_batch_streaming(&TrialConfig::sequential(q, BehaviorModel::Naive), trials, seed, 8, |_| Ok(()))
            .unwrap()
            .mean_last8
    };
    let expected = |q| exact(q)[32..].iter().sum::<f64>() / 8.0;
    let diff = mean_last8(0.25, 201) - mean_last8(0.75, 202);
    let want = expected(0.25) - expected(0.75);
    // Per-trial last-8 fractions have sd below 0.5, so each mean has se below 0.5 / sqrt(n).
    let se = (2.0 * 0.25 / trials as f64).sqrt();
    assert!((diff - want).abs() < 3.0 * se, "{diff} vs {want}");
}

#[test]
fn results_do_not_depend_on_parallelism() {
    for config in [TrialConfig::sequential(0.75, BehaviorModel::Naive), TrialConfig::independent(BehaviorModel::IndependentObserved)] {
        let (s1, r1) = run_batch(&config, 3000, 42, 1).unwrap();
        let (s8, r8) = run_batch(&config, 3000, 42, 8).unwrap();
        assert_eq!(r1, r8);
        assert_eq!(s1, s8);
    }
}

#[test]
fn summary_matches_records() {
    let (summary, records) = run_batch(&TrialConfig::sequential(0.25, BehaviorModel::Naive), 500, 3, 4).unwrap();
    assert_eq!(summary, summarize(&records).unwrap());
    for (y, r) in summary.last8.iter().zip(&records) {
        assert_eq!((y * 8.0).round() / 8.0, *y);
        assert_eq!(*y, r.last_fraction(LAST_K));
    }
}

#[test]
fn every_record_is_reproducible_from_its_inputs() {
    let configs = [
        TrialConfig { keep_network: true, ..TrialConfig::sequential(0.25, BehaviorModel::Naive) },
        TrialConfig { keep_network: true, epsilon: 0.1, ..TrialConfig::sequential(0.75, BehaviorModel::MixedPopulation { naive_share: 0.6 }) },
        TrialConfig { keep_network: true, ..TrialConfig::independent(BehaviorModel::IndependentObserved) },
    ];
    for config in configs {
        let (_, records) = run_batch(&config, 2000, 9, 8).unwrap();
        for r in &records {
            verify_record(r, &config).unwrap();
        }
    }
}

#[test]
fn degenerate_behaviors_coincide() {
    let (_, naive) = run_batch(&TrialConfig::sequential(0.5, BehaviorModel::Naive), 300, 5, 2).unwrap();
    let (_, mixed) = run_batch(&TrialConfig::sequential(0.5, BehaviorModel::MixedPopulation { naive_share: 1.0 }), 300, 5, 2).unwrap();
    let actions = |rs: &[TrialRecord]| rs.iter().flat_map(|r| r.agents.iter().map(|a| a.action)).collect::<Vec<_>>();
    assert_eq!(actions(&naive), actions(&mixed));

    let (_, isolated) = run_batch(&TrialConfig::sequential(0.0, BehaviorModel::Naive), 300, 6, 2).unwrap();
    let (_, autarkic) = run_batch(&TrialConfig::sequential(0.0, BehaviorModel::Autarkic), 300, 6, 2).unwrap();
    assert_eq!(actions(&isolated), actions(&autarkic));
}

#[test]
fn autarky_never_goes_against_the_signal() {
    let trials = 20_000;
    let (summary, records) = run_batch(&TrialConfig::sequential(0.75, BehaviorModel::Autarkic), trials, 8, 8).unwrap();
    let report = against_signal_stats(&records, LAST_K).unwrap();
    assert_eq!(report.arms[0].all.against, 0);
    let p = autarky_accuracy(&SignalParams::experiment());
    let se = (p * (1.0 - p) / (trials as f64 * 40.0)).sqrt();
    assert!((summary.mean_overall - p).abs() < 3.0 * se);
}

#[test]
fn independent_design_observes_only_the_initial_block() {
    let design = IndependentDesign::default();
    let (_, records) = run_batch(&TrialConfig::independent(BehaviorModel::IndependentObserved), 2000, 13, 8).unwrap();
    for r in &records {
        assert_eq!(r.n_agents(), 48);
        let initial_r = r.agents[..32].iter().filter(|a| a.action == State::R).count() as u32;
        for a in &r.agents {
            if a.position <= design.n_initial {
                assert_eq!(a.obs_l + a.obs_r, 0);
                assert_eq!(a.action == State::R, a.signal >= 0.0);
            } else {
                assert!(a.obs_r <= initial_r && a.obs_l <= 32 - initial_r);
                assert_eq!(a.q, design.q_at(a.position));
            }
        }
    }
}

#[test]
fn dense_networks_herd() {
    let sparse = arm(0.25);
    let dense = arm(0.75);
    let sd = |rs: &[TrialRecord]| fraction_correct_histogram(rs, 41).unwrap().sd;
    assert!(sd(&dense) > sd(&sparse));

    let windows = window_uncertainty(naive_arms()).unwrap();
    let u_sparse = mean_window_uncertainty(&windows, 0.25);
    let u_dense = mean_window_uncertainty(&windows, 0.75);
    assert_eq!(u_sparse.len(), 30);
    for (w, (d, s)) in u_dense.iter().zip(&u_sparse).enumerate() {
        assert!(d < s, "window centred at {}: {d} vs {s}", w + 6);
    }

    let fit = density_regression(&outcomes_from_records(naive_arms()).unwrap(), SeFlavor::HC1).unwrap();
    assert!(fit.coef(DENSITY).unwrap() < 0.0);
    assert!(fit.p_value(DENSITY).unwrap() < 0.01);
}

#[test]
fn misleading_early_signals_hurt_more_on_dense_networks() {
    let result = misleading_interaction_regression(&outcomes_from_records(naive_arms()).unwrap(), SeFlavor::HC1).unwrap();
    assert!(result.regression.coef(INTERACTION).unwrap() < 0.0);
    assert!(result.marginal_effect_difference < 0.0);
}

#[test]
fn sparse_gain_exceeds_dense_gain() {
    let gains = gain_from_social_learning(&outcomes_from_records(naive_arms()).unwrap(), &SignalParams::experiment()).unwrap();
    assert_eq!(gains.len(), 2);
    assert!(gains[0].q < gains[1].q);
    assert!(gains[0].mean_gain > gains[1].mean_gain);
}

#[test]
fn density_slope_negative_for_every_last_m() {
    let sweep = robustness_sweep(naive_arms(), ROBUSTNESS_RANGE, SeFlavor::HC1).unwrap();
    assert_eq!(sweep.len(), 9);
    assert!(sweep.iter().all(|p| p.regression.coef(DENSITY).unwrap() < 0.0));
    let m8 = sweep.iter().find(|p| p.last_m == 8).unwrap();
    let direct = density_regression(&outcomes_from_records(naive_arms()).unwrap(), SeFlavor::HC1).unwrap();
    assert_eq!(m8.regression, direct);
}

#[test]
fn going_against_the_signal_pays_off_less_on_dense_networks() {
    let report = against_signal_stats(naive_arms(), LAST_K).unwrap();
    let acc = |q| report.arm(q).unwrap().last.conditional_accuracy().unwrap();
    assert!(acc(0.75) < acc(0.25), "{} vs {}", acc(0.75), acc(0.25));
}

#[test]
fn uncorrelated_observations_make_density_beneficial() {
    let (_, records) = run_batch(&TrialConfig::independent(BehaviorModel::IndependentObserved), 10_000, 21, 8).unwrap();
    let outcomes = outcomes_from_records(&records).unwrap();
    let mean_arm = |i: usize| outcomes.iter().map(|o| o.arms.unwrap()[i].fraction_correct).sum::<f64>() / outcomes.len() as f64;
    assert!(mean_arm(1) > mean_arm(0));
    let fit = independent_experiment_regression(&outcomes, SeFlavor::HC1).unwrap();
    assert_eq!(fit.n_obs, 20_000);
    assert!(fit.coef(DENSITY).unwrap() > 0.0);
    assert!(fit.p_value(DENSITY).unwrap() < 0.01);
}

#[test]
fn autarky_shows_no_density_effect_or_gain() {
    let mut records = Vec::new();
    for (q, seed) in [(0.25, 31), (0.75, 32)] {
        let (_, mut recs) = run_batch(&TrialConfig::sequential(q, BehaviorModel::Autarkic), 5000, seed, 8).unwrap();
        let offset = records.len() as u64;
        recs.iter_mut().for_each(|r| r.trial_id += offset);
        records.extend(recs);
    }
    let outcomes = outcomes_from_records(&records).unwrap();
    let fit = density_regression(&outcomes, SeFlavor::HC1).unwrap();
    let slope = fit.coef(DENSITY).unwrap();
    assert!(slope.abs() < 3.0 * fit.se(DENSITY).unwrap());
    for g in gain_from_social_learning(&outcomes, &SignalParams::experiment()).unwrap() {
        assert!(g.mean_gain.abs() < 3.0 * g.se, "q={} gain {}", g.q, g.mean_gain);
    }
}
