//! Trial-level outcomes and the regressions run on them.

use crate::error::{Error, Result};
use crate::model::autarky_accuracy;
use crate::model::SignalParams;
use crate::ols::{ols_robust, RegressionResult, SeFlavor};
use crate::sim::{mean, sample_sd, TopologyKind, TrialRecord, LAST_K};
use serde::{Deserialize, Serialize};

pub const CONSTANT: &str = "Constant";
pub const DENSITY: &str = "NetworkDensity";
pub const MISLEADING: &str = "MisleadingEarlySignals";
pub const INTERACTION: &str = "MisleadingEarlySignals:NetworkDensity";

/// Range of last-m definitions checked by [`robustness_sweep`].
pub const ROBUSTNESS_RANGE: std::ops::RangeInclusive<u32> = 4..=12;

/// Evaluator-group accuracy in an independent-neighbors trial.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArmOutcome {
    pub q: f64,
    pub fraction_correct: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialOutcome {
    pub trial_id: u64,
    pub topology: TopologyKind,
    /// Trial link probability (sequential trials).
    pub q: f64,
    /// Fraction correct among the last eight agents.
    pub last8: f64,
    /// Fraction correct over all agents.
    pub overall: f64,
    /// Misleading signals among the first `ceil(n / 5)` agents.
    pub misleading: u32,
    /// Sparse and dense evaluator groups, for independent-neighbors trials.
    pub arms: Option<[ArmOutcome; 2]>,
}

/// Size of the "first fifth" used to count misleading early signals.
pub fn first_fifth(n_agents: u32) -> u32 {
    n_agents.div_ceil(5)
}

impl TrialOutcome {
    pub fn from_record(rec: &TrialRecord) -> Result<Self> {
        let n = rec.n_agents();
        if n < LAST_K {
            return Err(Error::Malformed(format!("trial {} has only {n} agents", rec.trial_id)));
        }
        let misleading = rec.agents[..first_fifth(n) as usize]
            .iter()
            .filter(|a| a.misleading(rec.state))
            .count() as u32;
        let arms = match rec.topology {
            TopologyKind::Sequential => None,
            TopologyKind::IndependentObserved => Some(evaluator_arms(rec)?),
        };
        Ok(TrialOutcome {
            trial_id: rec.trial_id,
            topology: rec.topology,
            q: rec.q(),
            last8: rec.last_fraction(LAST_K),
            overall: rec.overall_fraction(),
            misleading,
            arms,
        })
    }
}

fn evaluator_arms(rec: &TrialRecord) -> Result<[ArmOutcome; 2]> {
    let mut qs: Vec<f64> = rec.agents.iter().map(|a| a.q).filter(|q| *q > 0.0).collect();
    qs.sort_by(f64::total_cmp);
    qs.dedup();
    if qs.len() != 2 {
        return Err(Error::TopologyMismatch(format!(
            "trial {}: expected two evaluator link probabilities, found {}",
            rec.trial_id,
            qs.len()
        )));
    }
    let arm = |q: f64| {
        let group: Vec<_> = rec.agents.iter().filter(|a| a.q == q).collect();
        ArmOutcome { q, fraction_correct: group.iter().filter(|a| a.correct).count() as f64 / group.len() as f64 }
    };
    Ok([arm(qs[0]), arm(qs[1])])
}

pub fn outcomes_from_records(records: &[TrialRecord]) -> Result<Vec<TrialOutcome>> {
    records.iter().map(TrialOutcome::from_record).collect()
}

fn sequential_only(outcomes: &[TrialOutcome]) -> Result<()> {
    if outcomes.is_empty() {
        return Err(Error::EmptyInput("trial outcomes"));
    }
    match outcomes.iter().find(|o| o.topology != TopologyKind::Sequential) {
        Some(o) => Err(Error::TopologyMismatch(format!("trial {} is not a sequential trial", o.trial_id))),
        None => Ok(()),
    }
}

/// `last8 = b0 + b1 q + e`.
pub fn density_regression(outcomes: &[TrialOutcome], flavor: SeFlavor) -> Result<RegressionResult> {
    sequential_only(outcomes)?;
    let y: Vec<f64> = outcomes.iter().map(|o| o.last8).collect();
    let x: Vec<Vec<f64>> = outcomes.iter().map(|o| vec![1.0, o.q]).collect();
    ols_robust(&y, &x, &[CONSTANT, DENSITY], flavor)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InteractionResult {
    pub regression: RegressionResult,
    /// Difference in the marginal effect of one more misleading early signal
    /// between `q = 3/4` and `q = 1/4`: half the interaction coefficient.
    pub marginal_effect_difference: f64,
}

/// `last8 = b0 + b1 q + b2 m + g (q m) + e`.
pub fn misleading_interaction_regression(outcomes: &[TrialOutcome], flavor: SeFlavor) -> Result<InteractionResult> {
    sequential_only(outcomes)?;
    let y: Vec<f64> = outcomes.iter().map(|o| o.last8).collect();
    let x: Vec<Vec<f64>> = outcomes
        .iter()
        .map(|o| {
            let m = f64::from(o.misleading);
            vec![1.0, o.q, m, o.q * m]
        })
        .collect();
    let regression = ols_robust(&y, &x, &[CONSTANT, DENSITY, MISLEADING, INTERACTION], flavor)?;
    let gamma = regression.coef(INTERACTION).expect("interaction column");
    Ok(InteractionResult { marginal_effect_difference: gamma * (0.75 - 0.25), regression })
}

/// Evaluator accuracy on evaluator link probability, two rows per trial.
pub fn independent_experiment_regression(outcomes: &[TrialOutcome], flavor: SeFlavor) -> Result<RegressionResult> {
    if outcomes.is_empty() {
        return Err(Error::EmptyInput("trial outcomes"));
    }
    let mut y = Vec::with_capacity(2 * outcomes.len());
    let mut x = Vec::with_capacity(2 * outcomes.len());
    for o in outcomes {
        let arms = o
            .arms
            .ok_or_else(|| Error::TopologyMismatch(format!("trial {} is not an independent-neighbors trial", o.trial_id)))?;
        for arm in arms {
            y.push(arm.fraction_correct);
            x.push(vec![1.0, arm.q]);
        }
    }
    ols_robust(&y, &x, &[CONSTANT, DENSITY], flavor)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GainArm {
    pub q: f64,
    pub n_trials: usize,
    /// Mean of `last8 - autarky`.
    pub mean_gain: f64,
    pub se: f64,
}

/// Mean gain over the autarky benchmark per link probability, sorted by `q`.
pub fn gain_from_social_learning(outcomes: &[TrialOutcome], params: &SignalParams) -> Result<Vec<GainArm>> {
    if outcomes.is_empty() {
        return Err(Error::EmptyInput("trial outcomes"));
    }
    let benchmark = autarky_accuracy(params);
    let mut qs: Vec<f64> = outcomes.iter().map(|o| o.q).collect();
    qs.sort_by(f64::total_cmp);
    qs.dedup();
    Ok(qs
        .into_iter()
        .map(|q| {
            let gains: Vec<f64> = outcomes.iter().filter(|o| o.q == q).map(|o| o.last8 - benchmark).collect();
            GainArm { q, n_trials: gains.len(), mean_gain: mean(&gains), se: sample_sd(&gains) / (gains.len() as f64).sqrt() }
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub last_m: u32,
    pub regression: RegressionResult,
}

/// Re-runs the density regression with the outcome redefined as the fraction
/// correct among the last `m` agents, for each `m` in `ms`.
pub fn robustness_sweep(
    records: &[TrialRecord],
    ms: std::ops::RangeInclusive<u32>,
    flavor: SeFlavor,
) -> Result<Vec<SweepPoint>> {
    if ms.is_empty() || !ROBUSTNESS_RANGE.contains(ms.start()) || !ROBUSTNESS_RANGE.contains(ms.end()) {
        return Err(Error::InvalidParameter(format!("last-m range must lie within {ROBUSTNESS_RANGE:?}, got {ms:?}")));
    }
    if records.is_empty() {
        return Err(Error::EmptyInput("trial records"));
    }
    if let Some(r) = records.iter().find(|r| r.topology != TopologyKind::Sequential || r.n_agents() < *ms.end()) {
        return Err(Error::TopologyMismatch(format!("trial {} is not a usable sequential trial", r.trial_id)));
    }
    ms.map(|m| {
        let y: Vec<f64> = records.iter().map(|r| r.last_fraction(m)).collect();
        let x: Vec<Vec<f64>> = records.iter().map(|r| vec![1.0, r.q()]).collect();
        Ok(SweepPoint { last_m: m, regression: ols_robust(&y, &x, &[CONSTANT, DENSITY], flavor)? })
    })
    .collect()
}
