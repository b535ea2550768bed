use netlearn::model::{autarky_accuracy, NetworkParams, SignalParams};
use netlearn::naive::{naive_accuracy_curve, ChoiceProbVariant, EllVariant};
use netlearn::rational::{combine_signal_with_binary, constrained_accuracy_curve, simulate_constrained_profile};

// Independent evaluation of the recursion (scipy), q = 3/4, positions 33..=40.
const ORACLE_DENSE_33_40: [f64; 8] = [
    0.894769229236, 0.895973233187, 0.897128600559, 0.898238541347, 0.899305976453, 0.900333570315, 0.901323759141,
    0.902278775436,
];

fn quadrature_combine(p: f64, params: &SignalParams) -> f64 {
    // State R; the rule picks R iff 2 mu s / sigma^2 ± ln(p/(1-p)) > 0.
    // Integrate the N(mu, sigma^2) density over each acceptance region with
    // composite Simpson on a wide finite interval.
    let SignalParams { mu, sigma } = *params;
    let cut = (p / (1.0 - p)).ln() * sigma * sigma / (2.0 * mu);
    let density = |s: f64| (-(s - mu) * (s - mu) / (2.0 * sigma * sigma)).exp() / (sigma * (2.0 * std::f64::consts::PI).sqrt());
    let tail = |from: f64| {
        let to = mu + 40.0 * sigma;
        let n = 200_000;
        let h = (to - from) / n as f64;
        let mut acc = density(from) + density(to);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            acc += w * density(from + i as f64 * h);
        }
        acc * h / 3.0
    };
    p * tail(-cut) + (1.0 - p) * tail(cut)
}

#[test]
fn combine_matches_quadrature() {
    let params = SignalParams::experiment();
    for p in [0.5, 0.6, 0.6915, 0.8, 0.9, 0.97] {
        let closed = combine_signal_with_binary(p, &params).unwrap();
        assert!((closed - quadrature_combine(p, &params)).abs() < 1e-10, "p={p}");
    }
}

#[test]
fn dp_matches_oracle() {
    let c = constrained_accuracy_curve(&NetworkParams::new(0.75, 40).unwrap(), &SignalParams::experiment()).unwrap();
    for (got, want) in c.window(33, 40).iter().zip(ORACLE_DENSE_33_40) {
        assert!((got - want).abs() < 1e-10);
    }
    assert_eq!(c.at(1), autarky_accuracy(&SignalParams::experiment()));
}

#[test]
fn dp_matches_direct_simulation_of_constrained_profile() {
    let params = SignalParams::experiment();
    let trials = 100_000u64;
    for q in [0.25, 0.75] {
        let net = NetworkParams::new(q, 40).unwrap();
        let dp = constrained_accuracy_curve(&net, &params).unwrap();
        let mc = simulate_constrained_profile(&net, &params, trials, 2024).unwrap();
        for (i, (p, est)) in dp.values.iter().zip(&mc).enumerate() {
            let se = (p * (1.0 - p) / trials as f64).sqrt();
            assert!((p - est).abs() < 3.0 * se + 1e-12, "q={q} position {}: dp {p} mc {est}", i + 1);
        }
    }
}

#[test]
fn bound_exceeds_naive_on_dense_network() {
    let params = SignalParams::experiment();
    let net = NetworkParams::new(0.75, 40).unwrap();
    let bound = constrained_accuracy_curve(&net, &params).unwrap();
    let naive = naive_accuracy_curve(&net, &params, EllVariant::TruncatedMean, ChoiceProbVariant::DerivedArgument).unwrap();
    for p in 33..=40 {
        assert!(bound.at(p) > naive.at(p));
    }
}
