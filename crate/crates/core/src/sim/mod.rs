//! Seeded Monte Carlo trials of the sequential guessing experiment.
//!
//! Every trial is a pure function of its configuration and trial seed, so
//! batches give identical records at any parallelism.

mod stats;

pub use stats::{
    against_signal_stats, fraction_correct_histogram, mean_window_uncertainty, window_uncertainty, AgainstSignalArm,
    AgainstSignalReport, AgainstSignalTally, Histogram, WindowUncertainty, WINDOW_HALF_WIDTH,
};

use crate::error::{Error, Result};
use crate::model::{
    autarkic_decide, check_probability, naive_decide, sample_neighbors, sample_signal, BehaviorModel, NetworkParams,
    NetworkRealization, ObservedCounts, SignalParams, State,
};
use crate::naive::{compute_ell, EllVariant};
use crate::seed::{agent_rng, state_rng, trial_seed, Purpose};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Number of final positions that make up a trial's headline accuracy.
pub const LAST_K: u32 = 8;

/// The independent-neighbors design: a block of agents who observe nobody,
/// followed by two groups of evaluators who observe only that block.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IndependentDesign {
    pub n_initial: u32,
    pub n_sparse_evaluators: u32,
    pub n_dense_evaluators: u32,
    pub q_sparse: f64,
    pub q_dense: f64,
}

impl Default for IndependentDesign {
    fn default() -> Self {
        IndependentDesign { n_initial: 32, n_sparse_evaluators: 8, n_dense_evaluators: 8, q_sparse: 0.25, q_dense: 0.75 }
    }
}

impl IndependentDesign {
    pub fn n_agents(&self) -> u32 {
        self.n_initial + self.n_sparse_evaluators + self.n_dense_evaluators
    }

    /// Positions of the sparse evaluators (1-based, inclusive).
    pub fn sparse_positions(&self) -> std::ops::RangeInclusive<u32> {
        self.n_initial + 1..=self.n_initial + self.n_sparse_evaluators
    }

    pub fn dense_positions(&self) -> std::ops::RangeInclusive<u32> {
        self.n_initial + self.n_sparse_evaluators + 1..=self.n_agents()
    }

    /// Link probability used by the agent at `position` (0 for the initial block).
    pub fn q_at(&self, position: u32) -> f64 {
        if self.sparse_positions().contains(&position) {
            self.q_sparse
        } else if self.dense_positions().contains(&position) {
            self.q_dense
        } else {
            0.0
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Topology {
    Sequential(NetworkParams),
    IndependentObserved(IndependentDesign),
}

impl Topology {
    pub fn n_agents(&self) -> u32 {
        match self {
            Topology::Sequential(net) => net.n_agents,
            Topology::IndependentObserved(d) => d.n_agents(),
        }
    }

    pub fn kind(&self) -> TopologyKind {
        match self {
            Topology::Sequential(_) => TopologyKind::Sequential,
            Topology::IndependentObserved(_) => TopologyKind::IndependentObserved,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TopologyKind {
    Sequential,
    IndependentObserved,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialConfig {
    pub topology: Topology,
    pub signal: SignalParams,
    pub behavior: BehaviorModel,
    /// Log-likelihood increment used by naive agents.
    pub ell_variant: EllVariant,
    /// Probability that an agent's chosen action is flipped.
    pub epsilon: f64,
    /// Keep the realized network on each record.
    pub keep_network: bool,
}

impl TrialConfig {
    /// A 40-agent sequential trial with the experiment's signals and calibrated naive agents.
    pub fn sequential(q: f64, behavior: BehaviorModel) -> Self {
        TrialConfig {
            topology: Topology::Sequential(NetworkParams { q, n_agents: 40 }),
            signal: SignalParams::experiment(),
            behavior,
            ell_variant: EllVariant::TruncatedMean,
            epsilon: 0.0,
            keep_network: false,
        }
    }

    pub fn independent(behavior: BehaviorModel) -> Self {
        TrialConfig {
            topology: Topology::IndependentObserved(IndependentDesign::default()),
            ..Self::sequential(0.0, behavior)
        }
    }

    pub fn validate(&self) -> Result<()> {
        SignalParams::new(self.signal.mu, self.signal.sigma)?;
        self.behavior.validate()?;
        check_probability("epsilon", self.epsilon)?;
        match self.topology {
            Topology::Sequential(net) => {
                NetworkParams::new(net.q, net.n_agents)?;
            }
            Topology::IndependentObserved(d) => {
                if d.n_initial == 0 || d.n_sparse_evaluators == 0 || d.n_dense_evaluators == 0 {
                    return Err(Error::InvalidParameter("independent design needs positive group sizes".into()));
                }
                check_probability("q_sparse", d.q_sparse)?;
                check_probability("q_dense", d.q_dense)?;
            }
        }
        Ok(())
    }
}

/// Which rule an individual agent followed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AgentKind {
    Naive,
    Autarkic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentRecord {
    pub position: u32,
    pub q: f64,
    pub signal: f64,
    pub obs_l: u32,
    pub obs_r: u32,
    pub action: State,
    pub correct: bool,
    /// Known for simulated trials only.
    #[serde(default)]
    pub kind: Option<AgentKind>,
    #[serde(default)]
    pub flipped: bool,
}

impl AgentRecord {
    pub fn counts(&self) -> ObservedCounts {
        ObservedCounts::new(self.obs_l, self.obs_r)
    }

    /// Chose against the sign of the own signal.
    pub fn against_signal(&self) -> bool {
        (self.action == State::L && self.signal > 0.0) || (self.action == State::R && self.signal < 0.0)
    }

    /// The signal's sign points away from the true state.
    pub fn misleading(&self, state: State) -> bool {
        match state {
            State::L => self.signal > 0.0,
            State::R => self.signal < 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial_id: u64,
    pub topology: TopologyKind,
    pub state: State,
    pub agents: Vec<AgentRecord>,
    #[serde(default)]
    pub network: Option<NetworkRealization>,
}

impl TrialRecord {
    /// Trial-level link probability for sequential trials.
    pub fn q(&self) -> f64 {
        self.agents.first().map_or(0.0, |a| a.q)
    }

    pub fn n_agents(&self) -> u32 {
        self.agents.len() as u32
    }

    /// Fraction correct over positions `first..=last`.
    pub fn fraction_correct(&self, first: u32, last: u32) -> f64 {
        let slice = &self.agents[first as usize - 1..last as usize];
        slice.iter().filter(|a| a.correct).count() as f64 / slice.len() as f64
    }

    /// Fraction correct among the last `m` agents.
    pub fn last_fraction(&self, m: u32) -> f64 {
        let n = self.n_agents();
        self.fraction_correct(n - m + 1, n)
    }

    pub fn overall_fraction(&self) -> f64 {
        self.fraction_correct(1, self.n_agents())
    }
}

fn agent_kind<R: Rng>(behavior: BehaviorModel, rng: &mut R) -> AgentKind {
    match behavior {
        BehaviorModel::Naive | BehaviorModel::IndependentObserved => AgentKind::Naive,
        BehaviorModel::Autarkic => AgentKind::Autarkic,
        BehaviorModel::MixedPopulation { naive_share } => {
            if rng.random::<f64>() < naive_share {
                AgentKind::Naive
            } else {
                AgentKind::Autarkic
            }
        }
    }
}

fn choose(kind: AgentKind, signal: f64, counts: ObservedCounts, ell: f64, params: &SignalParams) -> State {
    match kind {
        AgentKind::Naive => naive_decide(signal, counts, ell, params),
        AgentKind::Autarkic => autarkic_decide(signal),
    }
}

/// Plays out one trial.
pub fn run_trial(config: &TrialConfig, trial_id: u64, seed: u64) -> TrialRecord {
    let ell = compute_ell(&config.signal, config.ell_variant);
    let state = State::sample(&mut state_rng(seed));
    let n = config.topology.n_agents();
    let mut agents: Vec<AgentRecord> = Vec::with_capacity(n as usize);
    let mut network = Vec::with_capacity(if config.keep_network { n as usize } else { 0 });

    for position in 1..=n {
        let (q, observable) = match config.topology {
            Topology::Sequential(net) => (net.q, position),
            Topology::IndependentObserved(d) => {
                let q = d.q_at(position);
                (q, if position > d.n_initial { d.n_initial + 1 } else { 1 })
            }
        };
        let neighbors = sample_neighbors(observable, q, &mut agent_rng(seed, position, Purpose::Links));
        let signal = sample_signal(state, &config.signal, &mut agent_rng(seed, position, Purpose::Signal));
        let kind = agent_kind(config.behavior, &mut agent_rng(seed, position, Purpose::Kind));
        let flipped = config.epsilon > 0.0 && agent_rng(seed, position, Purpose::Noise).random::<f64>() < config.epsilon;

        let obs_r = neighbors.iter().filter(|&&j| agents[j as usize - 1].action == State::R).count() as u32;
        let counts = ObservedCounts::new(neighbors.len() as u32 - obs_r, obs_r);
        let mut action = choose(kind, signal, counts, ell, &config.signal);
        if flipped {
            action = action.flip();
        }
        agents.push(AgentRecord {
            position,
            q,
            signal,
            obs_l: counts.l,
            obs_r: counts.r,
            action,
            correct: action == state,
            kind: Some(kind),
            flipped,
        });
        if config.keep_network {
            network.push(neighbors);
        }
    }

    TrialRecord {
        trial_id,
        topology: config.topology.kind(),
        state,
        agents,
        network: config
            .keep_network
            .then(|| NetworkRealization::from_neighbors(network).expect("sampled neighbors are predecessors")),
    }
}

/// Checks a simulated record against its configuration: recorded counts agree
/// with the realized network (when kept) and every action is reproduced from
/// the recorded signal, counts and agent rule.
pub fn verify_record(record: &TrialRecord, config: &TrialConfig) -> Result<()> {
    let ell = compute_ell(&config.signal, config.ell_variant);
    for a in &record.agents {
        let kind = a
            .kind
            .ok_or_else(|| Error::Malformed(format!("trial {} position {} has no agent kind", record.trial_id, a.position)))?;
        if let Some(net) = &record.network {
            let obs_r = net
                .neighbors(a.position)
                .iter()
                .filter(|&&j| record.agents[j as usize - 1].action == State::R)
                .count() as u32;
            let total = net.neighbors(a.position).len() as u32;
            if obs_r != a.obs_r || total - obs_r != a.obs_l {
                return Err(Error::Malformed(format!(
                    "trial {} position {}: counts disagree with network",
                    record.trial_id, a.position
                )));
            }
        }
        let mut action = choose(kind, a.signal, a.counts(), ell, &config.signal);
        if a.flipped {
            action = action.flip();
        }
        if action != a.action || a.correct != (a.action == record.state) {
            return Err(Error::Malformed(format!(
                "trial {} position {}: action not reproducible",
                record.trial_id, a.position
            )));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PositionAccuracy {
    pub position: u32,
    pub trials: u64,
    pub correct: u64,
    pub accuracy: f64,
    /// Binomial standard error `sqrt(p (1 - p) / n)`.
    pub se: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchSummary {
    pub n_trials: u64,
    pub n_agents: u32,
    pub positions: Vec<PositionAccuracy>,
    /// Per-trial fraction correct among the last eight agents.
    pub last8: Vec<f64>,
    /// Per-trial fraction correct over all agents.
    pub overall: Vec<f64>,
    pub mean_last8: f64,
    pub mean_overall: f64,
    pub sd_overall: f64,
}

impl BatchSummary {
    pub fn accuracy_at(&self, position: u32) -> &PositionAccuracy {
        &self.positions[position as usize - 1]
    }
}

#[derive(Debug, Default)]
struct SummaryAccumulator {
    n_agents: u32,
    correct: Vec<u64>,
    last8: Vec<f64>,
    overall: Vec<f64>,
}

impl SummaryAccumulator {
    fn push(&mut self, rec: &TrialRecord) -> Result<()> {
        if self.correct.is_empty() {
            self.n_agents = rec.n_agents();
            self.correct = vec![0; rec.agents.len()];
        } else if rec.n_agents() != self.n_agents {
            return Err(Error::Malformed(format!(
                "trial {} has {} agents, expected {}",
                rec.trial_id,
                rec.n_agents(),
                self.n_agents
            )));
        }
        for (c, a) in self.correct.iter_mut().zip(&rec.agents) {
            *c += u64::from(a.correct);
        }
        self.last8.push(rec.last_fraction(LAST_K.min(rec.n_agents())));
        self.overall.push(rec.overall_fraction());
        Ok(())
    }

    fn finish(self) -> Result<BatchSummary> {
        let n = self.overall.len() as u64;
        if n == 0 {
            return Err(Error::EmptyInput("trial records"));
        }
        let positions = self
            .correct
            .iter()
            .enumerate()
            .map(|(i, &c)| {
                let p = c as f64 / n as f64;
                PositionAccuracy { position: i as u32 + 1, trials: n, correct: c, accuracy: p, se: (p * (1.0 - p) / n as f64).sqrt() }
            })
            .collect();
        Ok(BatchSummary {
            n_trials: n,
            n_agents: self.n_agents,
            positions,
            mean_last8: mean(&self.last8),
            mean_overall: mean(&self.overall),
            sd_overall: sample_sd(&self.overall),
            last8: self.last8,
            overall: self.overall,
        })
    }
}

pub(crate) fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample standard deviation (n - 1 denominator); zero for fewer than two values.
pub(crate) fn sample_sd(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    (xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64).sqrt()
}

/// Summary statistics over a set of records.
pub fn summarize(records: &[TrialRecord]) -> Result<BatchSummary> {
    let mut acc = SummaryAccumulator::default();
    for r in records {
        acc.push(r)?;
    }
    acc.finish()
}

const CHUNK: u64 = 8192;

/// Runs `n_trials` trials and hands each record to `sink` in trial order,
/// holding at most one chunk of records in memory.
pub fn run_batch_streaming<F>(
    config: &TrialConfig,
    n_trials: u64,
    master_seed: u64,
    parallelism: usize,
    mut sink: F,
) -> Result<BatchSummary>
where
    F: FnMut(&TrialRecord) -> Result<()>,
{
    config.validate()?;
    if n_trials == 0 {
        return Err(Error::InvalidParameter("n_trials must be at least 1".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(parallelism.max(1))
        .build()
        .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
    let mut acc = SummaryAccumulator::default();
    let mut start = 0;
    while start < n_trials {
        let end = (start + CHUNK).min(n_trials);
        let chunk: Vec<TrialRecord> = pool.install(|| {
            (start..end)
                .into_par_iter()
                .map(|t| run_trial(config, t, trial_seed(master_seed, t)))
                .collect()
        });
        for rec in &chunk {
            acc.push(rec)?;
            sink(rec)?;
        }
        start = end;
    }
    acc.finish()
}

/// Runs a batch and keeps every record.
pub fn run_batch(
    config: &TrialConfig,
    n_trials: u64,
    master_seed: u64,
    parallelism: usize,
) -> Result<(BatchSummary, Vec<TrialRecord>)> {
    let mut records = Vec::with_capacity(n_trials as usize);
    let summary = run_batch_streaming(config, n_trials, master_seed, parallelism, |r| {
        records.push(r.clone());
        Ok(())
    })?;
    Ok((summary, records))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::autarky_accuracy;

    #[test]
    fn autarkic_actions_follow_signal_sign() {
        let cfg = TrialConfig::sequential(0.75, BehaviorModel::Autarkic);
        for t in 0..50 {
            let rec = run_trial(&cfg, t, trial_seed(1, t));
            for a in &rec.agents {
                assert_eq!(a.action, autarkic_decide(a.signal));
                assert!(!a.against_signal());
            }
        }
    }

    #[test]
    fn q_zero_naive_equals_autarkic() {
        let naive = TrialConfig::sequential(0.0, BehaviorModel::Naive);
        let aut = TrialConfig::sequential(0.0, BehaviorModel::Autarkic);
        for t in 0..100 {
            let a = run_trial(&naive, t, trial_seed(3, t));
            let b = run_trial(&aut, t, trial_seed(3, t));
            let acts = |r: &TrialRecord| r.agents.iter().map(|x| x.action).collect::<Vec<_>>();
            assert_eq!(acts(&a), acts(&b));
        }
    }

    #[test]
    fn independent_evaluators_observe_only_initial_block() {
        let mut cfg = TrialConfig::independent(BehaviorModel::IndependentObserved);
        cfg.keep_network = true;
        let design = IndependentDesign::default();
        for t in 0..50 {
            let rec = run_trial(&cfg, t, trial_seed(9, t));
            assert_eq!(rec.n_agents(), 48);
            let net = rec.network.as_ref().unwrap();
            for a in &rec.agents {
                let nb = net.neighbors(a.position);
                if a.position <= design.n_initial {
                    assert!(nb.is_empty());
                    assert_eq!(a.action, autarkic_decide(a.signal));
                } else {
                    assert!(nb.iter().all(|&j| j <= design.n_initial));
                }
                assert_eq!(a.q, design.q_at(a.position));
            }
            verify_record(&rec, &cfg).unwrap();
        }
    }

    #[test]
    fn records_are_reproducible_from_their_contents() {
        for behavior in [BehaviorModel::Naive, BehaviorModel::MixedPopulation { naive_share: 0.4 }, BehaviorModel::Autarkic] {
            for q in [0.25, 0.75] {
                let mut cfg = TrialConfig::sequential(q, behavior);
                cfg.keep_network = true;
                cfg.epsilon = 0.05;
                let (_, recs) = run_batch(&cfg, 300, 17, 4).unwrap();
                for r in &recs {
                    verify_record(r, &cfg).unwrap();
                }
            }
        }
    }

    #[test]
    fn parallelism_does_not_change_records() {
        let cfg = TrialConfig::sequential(0.25, BehaviorModel::Naive);
        let (s1, r1) = run_batch(&cfg, 2000, 42, 1).unwrap();
        let (s8, r8) = run_batch(&cfg, 2000, 42, 8).unwrap();
        assert_eq!(r1, r8);
        assert_eq!(s1, s8);
    }

    #[test]
    fn full_naive_mixture_equals_naive() {
        let a = run_batch(&TrialConfig::sequential(0.75, BehaviorModel::Naive), 200, 5, 2).unwrap().1;
        let b = run_batch(&TrialConfig::sequential(0.75, BehaviorModel::MixedPopulation { naive_share: 1.0 }), 200, 5, 2)
            .unwrap()
            .1;
        let acts = |rs: &[TrialRecord]| rs.iter().flat_map(|r| r.agents.iter().map(|a| a.action)).collect::<Vec<_>>();
        assert_eq!(acts(&a), acts(&b));
    }

    #[test]
    fn summary_matches_records() {
        let cfg = TrialConfig::sequential(0.75, BehaviorModel::Naive);
        let (summary, recs) = run_batch(&cfg, 500, 8, 3).unwrap();
        assert_eq!(summary, summarize(&recs).unwrap());
        for (i, r) in recs.iter().enumerate() {
            assert_eq!(r.trial_id, i as u64);
            assert!((summary.last8[i] * 8.0).fract() == 0.0);
            assert!((summary.overall[i] * 40.0 - (summary.overall[i] * 40.0).round()).abs() < 1e-9);
        }
        let c40 = recs.iter().filter(|r| r.agents[39].correct).count() as u64;
        assert_eq!(summary.accuracy_at(40).correct, c40);
    }

    #[test]
    fn autarkic_batch_accuracy() {
        let cfg = TrialConfig::sequential(0.25, BehaviorModel::Autarkic);
        let summary = run_batch_streaming(&cfg, 20_000, 2, 4, |_| Ok(())).unwrap();
        let p = autarky_accuracy(&cfg.signal);
        let pooled = summary.positions.iter().map(|x| x.correct).sum::<u64>() as f64 / (20_000.0 * 40.0);
        let se = (p * (1.0 - p) / (20_000.0 * 40.0)).sqrt();
        assert!((pooled - p).abs() < 3.0 * se, "{pooled} vs {p}");
    }

    #[test]
    fn invalid_configs_rejected() {
        let mut cfg = TrialConfig::sequential(0.25, BehaviorModel::Naive);
        cfg.epsilon = 2.0;
        assert!(run_batch(&cfg, 1, 0, 1).is_err());
        let cfg = TrialConfig::sequential(0.25, BehaviorModel::Naive);
        assert!(run_batch(&cfg, 0, 0, 1).is_err());
    }
}
