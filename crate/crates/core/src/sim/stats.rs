//! Descriptive statistics over trial records: going against one's signal,
//! moving-window uncertainty, and the spread of per-trial accuracy.

use super::{mean, sample_sd, TopologyKind, TrialRecord};
use crate::error::{Error, Result};
use crate::model::State;
use serde::{Deserialize, Serialize};

/// Windows span `2 * WINDOW_HALF_WIDTH + 1 = 11` consecutive positions.
pub const WINDOW_HALF_WIDTH: u32 = 5;

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct AgainstSignalTally {
    /// Agent-decisions examined.
    pub decisions: u64,
    /// Decisions that went against the sign of the own signal.
    pub against: u64,
    /// Of those, how many were correct.
    pub against_correct: u64,
}

impl AgainstSignalTally {
    /// Accuracy conditional on going against the signal; `None` when there were no such decisions.
    pub fn conditional_accuracy(&self) -> Option<f64> {
        (self.against > 0).then(|| self.against_correct as f64 / self.against as f64)
    }

    fn add(&mut self, against: bool, correct: bool) {
        self.decisions += 1;
        if against {
            self.against += 1;
            self.against_correct += u64::from(correct);
        }
    }
}

/// Against-signal counts for one link probability.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgainstSignalArm {
    pub q: f64,
    pub all: AgainstSignalTally,
    /// The final `last_k` positions of each trial.
    pub last: AgainstSignalTally,
    /// Every position before those.
    pub earlier: AgainstSignalTally,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgainstSignalReport {
    pub last_k: u32,
    pub arms: Vec<AgainstSignalArm>,
}

impl AgainstSignalReport {
    pub fn arm(&self, q: f64) -> Option<&AgainstSignalArm> {
        self.arms.iter().find(|a| a.q == q)
    }
}

/// Counts decisions that go against the own signal, split by the agents' link
/// probability and by position range, with the accuracy of those decisions.
pub fn against_signal_stats(records: &[TrialRecord], last_k: u32) -> Result<AgainstSignalReport> {
    if records.is_empty() {
        return Err(Error::EmptyInput("trial records"));
    }
    let mut arms: Vec<AgainstSignalArm> = Vec::new();
    for rec in records {
        let n = rec.n_agents();
        for a in &rec.agents {
            let idx = match arms.iter().position(|arm| arm.q == a.q) {
                Some(i) => i,
                None => {
                    arms.push(AgainstSignalArm {
                        q: a.q,
                        all: Default::default(),
                        last: Default::default(),
                        earlier: Default::default(),
                    });
                    arms.len() - 1
                }
            };
            let arm = &mut arms[idx];
            let against = a.against_signal();
            arm.all.add(against, a.correct);
            if a.position + last_k > n {
                arm.last.add(against, a.correct);
            } else {
                arm.earlier.add(against, a.correct);
            }
        }
    }
    arms.sort_by(|a, b| a.q.total_cmp(&b.q));
    Ok(AgainstSignalReport { last_k, arms })
}

/// `u = r (1 - r)` per moving window of one trial, where `r` is the fraction of
/// the window choosing R.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowUncertainty {
    pub trial_id: u64,
    pub q: f64,
    /// Centre positions, `6..=n-5`.
    pub centres: Vec<u32>,
    pub values: Vec<f64>,
}

/// Window uncertainty for every trial. Window `c` covers positions `c-5..=c+5`.
pub fn window_uncertainty(records: &[TrialRecord]) -> Result<Vec<WindowUncertainty>> {
    records
        .iter()
        .map(|rec| {
            if rec.topology != TopologyKind::Sequential || rec.n_agents() < 40 {
                return Err(Error::TopologyMismatch(format!(
                    "trial {}: window uncertainty needs a sequential trial with at least 40 agents",
                    rec.trial_id
                )));
            }
            let width = 2 * WINDOW_HALF_WIDTH + 1;
            let centres: Vec<u32> = (WINDOW_HALF_WIDTH + 1..=rec.n_agents() - WINDOW_HALF_WIDTH).collect();
            let values = centres
                .iter()
                .map(|&c| {
                    let lo = (c - WINDOW_HALF_WIDTH) as usize - 1;
                    let hi = (c + WINDOW_HALF_WIDTH) as usize;
                    let r = rec.agents[lo..hi].iter().filter(|a| a.action == State::R).count() as f64 / f64::from(width);
                    r * (1.0 - r)
                })
                .collect();
            Ok(WindowUncertainty { trial_id: rec.trial_id, q: rec.q(), centres, values })
        })
        .collect()
}

/// Mean uncertainty per window across the trials with link probability `q`.
pub fn mean_window_uncertainty(windows: &[WindowUncertainty], q: f64) -> Vec<f64> {
    let selected: Vec<&WindowUncertainty> = windows.iter().filter(|w| w.q == q).collect();
    let Some(first) = selected.first() else {
        return Vec::new();
    };
    (0..first.values.len())
        .map(|i| selected.iter().map(|w| w.values[i]).sum::<f64>() / selected.len() as f64)
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    /// `bins + 1` edges spanning `[0, 1]`.
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
    pub n: u64,
    pub mean: f64,
    /// Sample standard deviation of per-trial overall accuracy.
    pub sd: f64,
}

/// Histogram of per-trial overall fraction correct over equal-width bins on
/// `[0, 1]`; a fraction of exactly 1 falls in the last bin.
pub fn fraction_correct_histogram(records: &[TrialRecord], bins: usize) -> Result<Histogram> {
    if records.is_empty() {
        return Err(Error::EmptyInput("trial records"));
    }
    if bins == 0 {
        return Err(Error::InvalidParameter("bins must be positive".into()));
    }
    let fractions: Vec<f64> = records.iter().map(TrialRecord::overall_fraction).collect();
    let mut counts = vec![0u64; bins];
    for &f in &fractions {
        let idx = ((f * bins as f64).floor() as usize).min(bins - 1);
        counts[idx] += 1;
    }
    Ok(Histogram {
        edges: (0..=bins).map(|i| i as f64 / bins as f64).collect(),
        counts,
        n: fractions.len() as u64,
        mean: mean(&fractions),
        sd: sample_sd(&fractions),
    })
}
