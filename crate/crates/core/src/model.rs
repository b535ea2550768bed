//! Shared domain types, signal and network sampling, and the naive
//! decision rule.

use crate::error::{Error, Result};
use crate::gauss::std_normal_cdf;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use std::fmt;

/// The binary state of the world. `L` maps to 0 and `R` to 1; the prior is uniform.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum State {
    L,
    R,
}

impl State {
    pub fn flip(self) -> State {
        match self {
            State::L => State::R,
            State::R => State::L,
        }
    }

    /// `-1.0` for `L`, `+1.0` for `R`.
    pub fn sign(self) -> f64 {
        match self {
            State::L => -1.0,
            State::R => 1.0,
        }
    }

    pub fn index(self) -> u8 {
        match self {
            State::L => 0,
            State::R => 1,
        }
    }

    pub fn parse(s: &str) -> Result<State> {
        match s.trim() {
            "L" | "l" | "0" => Ok(State::L),
            "R" | "r" | "1" => Ok(State::R),
            other => Err(Error::Malformed(format!("unknown state label {other:?}"))),
        }
    }

    /// Uniform draw over the two states.
    pub fn sample<R: Rng + ?Sized>(rng: &mut R) -> State {
        if rng.random::<bool>() {
            State::R
        } else {
            State::L
        }
    }
}

impl fmt::Display for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            State::L => "L",
            State::R => "R",
        })
    }
}

/// Gaussian signal model: `s ~ N(+mu, sigma^2)` in state R and `N(-mu, sigma^2)` in state L.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignalParams {
    pub mu: f64,
    pub sigma: f64,
}

impl SignalParams {
    pub fn new(mu: f64, sigma: f64) -> Result<Self> {
        if !(mu.is_finite() && mu > 0.0) {
            return Err(Error::InvalidParameter(format!("mu must be positive, got {mu}")));
        }
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(Error::InvalidParameter(format!("sigma must be positive, got {sigma}")));
        }
        Ok(SignalParams { mu, sigma })
    }

    /// The experimental environment: `N(-1, 4)` versus `N(1, 4)`.
    pub fn experiment() -> Self {
        SignalParams { mu: 1.0, sigma: 2.0 }
    }

    /// Signal-to-noise ratio `mu / sigma`.
    pub fn snr(&self) -> f64 {
        self.mu / self.sigma
    }
}

impl Default for SignalParams {
    fn default() -> Self {
        Self::experiment()
    }
}

/// Link probability and population size of a sequential random network.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NetworkParams {
    pub q: f64,
    pub n_agents: u32,
}

impl NetworkParams {
    pub fn new(q: f64, n_agents: u32) -> Result<Self> {
        check_probability("q", q)?;
        if n_agents == 0 {
            return Err(Error::InvalidParameter("n_agents must be at least 1".into()));
        }
        Ok(NetworkParams { q, n_agents })
    }
}

pub(crate) fn check_probability(name: &str, p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} must lie in [0, 1], got {p}")))
    }
}

/// For each agent (1-based), the increasing list of predecessors it observes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetworkRealization {
    neighbors: Vec<Vec<u32>>,
}

impl NetworkRealization {
    /// Builds a realization, rejecting any neighbor that is not a strict predecessor.
    pub fn from_neighbors(neighbors: Vec<Vec<u32>>) -> Result<Self> {
        for (idx, list) in neighbors.iter().enumerate() {
            let agent = idx as u32 + 1;
            let mut prev = 0;
            for &j in list {
                if j == 0 || j >= agent || j <= prev {
                    return Err(Error::InvalidParameter(format!(
                        "agent {agent} cannot observe {j}: neighbors must be increasing predecessors"
                    )));
                }
                prev = j;
            }
        }
        Ok(NetworkRealization { neighbors })
    }

    pub fn n_agents(&self) -> u32 {
        self.neighbors.len() as u32
    }

    /// Predecessors observed by `agent` (1-based).
    pub fn neighbors(&self, agent: u32) -> &[u32] {
        &self.neighbors[agent as usize - 1]
    }

    pub fn n_links(&self) -> usize {
        self.neighbors.iter().map(Vec::len).sum()
    }
}

/// Draws the set of predecessors observed by `agent`, one Bernoulli(q) per predecessor in order.
pub fn sample_neighbors<R: Rng + ?Sized>(agent: u32, q: f64, rng: &mut R) -> Vec<u32> {
    (1..agent).filter(|_| rng.random::<f64>() < q).collect()
}

/// Draws a full network realization; every pair `j < i` is linked independently with probability `q`.
pub fn sample_network<R: Rng + ?Sized>(params: &NetworkParams, rng: &mut R) -> NetworkRealization {
    let neighbors = (1..=params.n_agents)
        .map(|i| sample_neighbors(i, params.q, rng))
        .collect();
    NetworkRealization { neighbors }
}

/// One private signal drawn conditionally on the state.
pub fn sample_signal<R: Rng + ?Sized>(state: State, params: &SignalParams, rng: &mut R) -> f64 {
    let z: f64 = StandardNormal.sample(rng);
    state.sign() * params.mu + params.sigma * z
}

/// How agents map their information to actions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BehaviorModel {
    /// Treats every observed action as an independent signal-following action.
    Naive,
    /// Follows the sign of the own signal.
    Autarkic,
    /// Each agent independently naive with probability `naive_share`, else autarkic.
    MixedPopulation { naive_share: f64 },
    /// Naive agents whose observations carry no redundancy (independent-neighbors design).
    IndependentObserved,
}

impl BehaviorModel {
    pub fn validate(&self) -> Result<()> {
        match *self {
            BehaviorModel::MixedPopulation { naive_share } => check_probability("naive_share", naive_share),
            _ => Ok(()),
        }
    }
}

/// Numbers of observed predecessors who chose L and R.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ObservedCounts {
    pub l: u32,
    pub r: u32,
}

impl ObservedCounts {
    pub fn new(l: u32, r: u32) -> Self {
        ObservedCounts { l, r }
    }

    /// `r - l` as a signed integer.
    pub fn net_r(&self) -> i64 {
        i64::from(self.r) - i64::from(self.l)
    }
}

/// Log-likelihood ratio `log f(s|R) / f(s|L) = 2 mu s / sigma^2`.
pub fn signal_loglik_ratio(s: f64, params: &SignalParams) -> f64 {
    2.0 * params.mu * s / (params.sigma * params.sigma)
}

/// Accuracy of an agent acting on the own signal alone, `Φ(mu / sigma)`.
pub fn autarky_accuracy(params: &SignalParams) -> f64 {
    std_normal_cdf(params.snr())
}

/// The naive decision: R iff the own log-likelihood ratio plus `ell` per net
/// observed R action is positive.
///
/// Exact ties follow the sign of the signal, and `s = 0` picks R.
pub fn naive_decide(s: f64, counts: ObservedCounts, ell: f64, params: &SignalParams) -> State {
    debug_assert!(ell > 0.0);
    let posterior = signal_loglik_ratio(s, params) + counts.net_r() as f64 * ell;
    decide_on(posterior, s)
}

pub(crate) fn decide_on(posterior: f64, s: f64) -> State {
    if posterior > 0.0 {
        State::R
    } else if posterior < 0.0 || s < 0.0 {
        State::L
    } else {
        State::R
    }
}

/// The autarkic decision (sign of the signal, `s = 0` picks R).
pub fn autarkic_decide(s: f64) -> State {
    decide_on(s, s)
}
