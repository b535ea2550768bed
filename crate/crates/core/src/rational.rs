//! Lower bounds on rational accuracy from constrained one-neighbor strategies.
//!
//! A constrained agent uses only its own signal and the action of the most
//! recent predecessor it observes. Any equilibrium agent can garble its richer
//! information down to this, so the optimal constrained profile bounds
//! equilibrium accuracy from below. Because signals and strategies are
//! state-symmetric, the observed action is a binary signal with the same
//! accuracy `p_j` in both states, and the best response is a shifted signal
//! threshold.

use crate::error::{Error, Result};
use crate::gauss::std_normal_cdf;
use crate::model::{autarky_accuracy, sample_neighbors, sample_signal, signal_loglik_ratio, NetworkParams, SignalParams, State};
use crate::seed::{agent_rng, state_rng, trial_seed, Purpose};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Published lower bounds for agents 33..=40 at `q = 3/4` (mu = 1, sigma = 2).
pub const RATIONAL_BOUND_TABLE_DENSE: [f64; 8] = [0.9685, 0.9695, 0.9705, 0.9714, 0.9723, 0.9731, 0.9739, 0.9746];

/// Distribution of the most recent observed predecessor of one agent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NeighborDistribution {
    pub agent: u32,
    /// `weights[j - 1]` = P(most recent observed predecessor is `j`).
    pub weights: Vec<f64>,
    /// P(no predecessor observed).
    pub none: f64,
}

impl NeighborDistribution {
    pub fn new(agent: u32, q: f64) -> Self {
        let weights = (1..agent).map(|j| q * (1.0 - q).powi((agent - 1 - j) as i32)).collect();
        NeighborDistribution { agent, weights, none: (1.0 - q).powi(agent as i32 - 1) }
    }

    pub fn total(&self) -> f64 {
        self.weights.iter().sum::<f64>() + self.none
    }
}

fn binary_log_odds(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

fn check_neighbor_accuracy(p: f64) -> Result<()> {
    if (0.5..1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("neighbor accuracy must lie in [0.5, 1), got {p}")))
    }
}

/// Accuracy of the Bayes-optimal rule combining the own Gaussian signal with a
/// symmetric binary signal of accuracy `p`.
///
/// With `a = mu/sigma` and `b = (sigma / 2mu) ln(p / (1 - p))` this is
/// `p Φ(a + b) + (1 - p) Φ(a - b)`.
pub fn combine_signal_with_binary(p: f64, params: &SignalParams) -> Result<f64> {
    check_neighbor_accuracy(p)?;
    let a = params.snr();
    let b = params.sigma / (2.0 * params.mu) * binary_log_odds(p);
    Ok(p * std_normal_cdf(a + b) + (1.0 - p) * std_normal_cdf(a - b))
}

/// The same rule's accuracy conditional on `state`, computed from that state's
/// signal distribution directly.
pub fn combine_conditional(p: f64, params: &SignalParams, state: State) -> Result<f64> {
    check_neighbor_accuracy(p)?;
    let SignalParams { mu, sigma } = *params;
    let odds = binary_log_odds(p);
    // R iff 2 mu s / sigma^2 + (±odds) > 0, i.e. s > ∓ odds sigma^2 / (2 mu)
    let cut = odds * sigma * sigma / (2.0 * mu);
    let mean = state.sign() * mu;
    let prob_r_above = |threshold: f64| 1.0 - std_normal_cdf((threshold - mean) / sigma);
    let (if_right, if_wrong) = match state {
        // neighbor correct says R (threshold -cut), wrong says L (threshold +cut)
        State::R => (prob_r_above(-cut), prob_r_above(cut)),
        // correct action is L: complement of choosing R
        State::L => (1.0 - prob_r_above(cut), 1.0 - prob_r_above(-cut)),
    };
    Ok(p * if_right + (1.0 - p) * if_wrong)
}

/// Per-position accuracy of the optimal constrained profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundCurve {
    pub q: f64,
    pub values: Vec<f64>,
}

impl BoundCurve {
    pub fn at(&self, position: u32) -> f64 {
        self.values[position as usize - 1]
    }

    pub fn window(&self, first: u32, last: u32) -> &[f64] {
        &self.values[first as usize - 1..last as usize]
    }

    pub fn is_monotone(&self) -> bool {
        self.values.windows(2).all(|w| w[1] >= w[0])
    }
}

/// Sequential best-response recursion:
/// `p_{i+1} = Σ_{j≤i} q(1-q)^{i-j} combine(p_j) + (1-q)^i Φ(mu/sigma)`.
pub fn constrained_accuracy_curve(net: &NetworkParams, params: &SignalParams) -> Result<BoundCurve> {
    crate::model::check_probability("q", net.q)?;
    let autarky = autarky_accuracy(params);
    let mut values = Vec::with_capacity(net.n_agents as usize);
    let mut combined = Vec::with_capacity(net.n_agents as usize);
    values.push(autarky);
    for agent in 2..=net.n_agents {
        let prev = *values.last().unwrap();
        combined.push(combine_signal_with_binary(prev, params)?);
        let nd = NeighborDistribution::new(agent, net.q);
        let p = nd.weights.iter().zip(&combined).map(|(w, c)| w * c).sum::<f64>() + nd.none * autarky;
        values.push(p);
    }
    if net.n_agents == 0 {
        values.clear();
    }
    Ok(BoundCurve { q: net.q, values })
}

/// Monte Carlo estimate of the constrained profile's per-position accuracy,
/// playing the rules out on sampled networks and signals.
pub fn simulate_constrained_profile(
    net: &NetworkParams,
    params: &SignalParams,
    n_trials: u64,
    master_seed: u64,
) -> Result<Vec<f64>> {
    let curve = constrained_accuracy_curve(net, params)?;
    let odds: Vec<f64> = curve.values.iter().map(|&p| binary_log_odds(p)).collect();
    let n = net.n_agents as usize;
    let correct = (0..n_trials)
        .into_par_iter()
        .fold(
            || vec![0u64; n],
            |mut acc, t| {
                let seed = trial_seed(master_seed, t);
                let state = State::sample(&mut state_rng(seed));
                let mut actions: Vec<State> = Vec::with_capacity(n);
                for agent in 1..=net.n_agents {
                    let s = sample_signal(state, params, &mut agent_rng(seed, agent, Purpose::Signal));
                    let nbrs = sample_neighbors(agent, net.q, &mut agent_rng(seed, agent, Purpose::Links));
                    let llr = signal_loglik_ratio(s, params);
                    let posterior = match nbrs.last() {
                        Some(&j) => {
                            let o = odds[j as usize - 1];
                            llr + if actions[j as usize - 1] == State::R { o } else { -o }
                        }
                        None => llr,
                    };
                    let action = crate::model::decide_on(posterior, s);
                    if action == state {
                        acc[agent as usize - 1] += 1;
                    }
                    actions.push(action);
                }
                acc
            },
        )
        .reduce(|| vec![0u64; n], |a, b| a.iter().zip(&b).map(|(x, y)| x + y).collect());
    Ok(correct.into_iter().map(|c| c as f64 / n_trials as f64).collect())
}
