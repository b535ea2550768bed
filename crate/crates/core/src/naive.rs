//! Exact action-count recursion for naive agents.
//!
//! Conditional on state R, let `P_n(k, k')` be the probability that `k` of the
//! first `n` agents chose L and `k' = n - k` chose R. Agent `n + 1` observes
//! `i ~ Bin(k, q)` of the L-players and `i' ~ Bin(k', q)` of the R-players and,
//! being naive, acts on `i - i'` alone. Marginalising over both binomials and
//! over the entering agent's action yields `P_{n+1}`; the R-mass produced by
//! that step is the accuracy of agent `n + 1`.
//!
//! Two quantities in this recursion admit more than one reading, so both are
//! selectable: the per-action log-likelihood increment `ell` ([`EllVariant`])
//! and the argument of Φ in the choice probability ([`ChoiceProbVariant`]).
//! [`calibrate_variants`] picks the pair that reproduces the published
//! accuracy table.

use crate::error::{Error, Result};
use crate::gauss::{binomial_row, std_normal_cdf, std_normal_pdf};
use crate::model::{autarky_accuracy, check_probability, NetworkParams, ObservedCounts, SignalParams, State};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Largest population the exact solver accepts.
pub const MAX_AGENTS: u32 = 200;

/// Published accuracies of naive agents 33..=40 at `q = 1/4` (mu = 1, sigma = 2).
pub const NAIVE_TABLE_SPARSE: [f64; 8] = [0.8773, 0.8780, 0.8786, 0.8792, 0.8797, 0.8801, 0.8805, 0.8808];
/// Published accuracies of naive agents 33..=40 at `q = 3/4`.
pub const NAIVE_TABLE_DENSE: [f64; 8] = [0.7768; 8];
/// First position covered by the published tables.
pub const TABLE_FIRST_POSITION: u32 = 33;

/// Calibration fails if no variant pair gets within this distance of the table.
pub const CALIBRATION_LIMIT: f64 = 0.01;

/// Which closed form to use for the per-action increment `ell`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EllVariant {
    /// `(2/σ²)·(μ + σφ(−μ/σ)) / (1 − Φ(−μ/σ))`, parenthesised as typeset.
    PrintedFormula,
    /// `(2/σ²)·(μ + σφ(−μ/σ)/(1 − Φ(−μ/σ)))`: twice the positive-truncated mean over σ².
    TruncatedMean,
    /// `ln(Φ(μ/σ) / Φ(−μ/σ))`, the likelihood ratio of a signal-following action.
    ExactBinary,
}

impl EllVariant {
    pub const ALL: [EllVariant; 3] = [EllVariant::PrintedFormula, EllVariant::TruncatedMean, EllVariant::ExactBinary];

    pub fn name(self) -> &'static str {
        match self {
            EllVariant::PrintedFormula => "printed-formula",
            EllVariant::TruncatedMean => "truncated-mean",
            EllVariant::ExactBinary => "exact-binary",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown ell variant {s:?}")))
    }
}

/// Which argument of Φ gives `P(choose L | counts, state R)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChoiceProbVariant {
    /// `(σ(i − i')ℓ − 2μσ) / 2`, as typeset.
    PrintedArgument,
    /// `(i − i')ℓσ/(2μ) − μ/σ`, from solving the naive threshold for the signal.
    DerivedArgument,
}

impl ChoiceProbVariant {
    pub const ALL: [ChoiceProbVariant; 2] = [ChoiceProbVariant::PrintedArgument, ChoiceProbVariant::DerivedArgument];

    pub fn name(self) -> &'static str {
        match self {
            ChoiceProbVariant::PrintedArgument => "printed-argument",
            ChoiceProbVariant::DerivedArgument => "derived-argument",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown choice-probability variant {s:?}")))
    }

    /// Argument of Φ for `P(L | net L-minus-R observed = d, state R)`.
    fn argument(self, d: f64, ell: f64, params: &SignalParams) -> f64 {
        let SignalParams { mu, sigma } = *params;
        match self {
            ChoiceProbVariant::PrintedArgument => (sigma * d * ell - 2.0 * mu * sigma) / 2.0,
            ChoiceProbVariant::DerivedArgument => d * ell * sigma / (2.0 * mu) - mu / sigma,
        }
    }
}

/// The log-likelihood increment a naive agent assigns to one observed action.
pub fn compute_ell(params: &SignalParams, variant: EllVariant) -> f64 {
    let SignalParams { mu, sigma } = *params;
    let a = mu / sigma;
    let scale = 2.0 / (sigma * sigma);
    // 1 - Φ(-a) == Φ(a)
    let upper = std_normal_cdf(a);
    match variant {
        EllVariant::PrintedFormula => scale * (mu + sigma * std_normal_pdf(-a)) / upper,
        EllVariant::TruncatedMean => scale * (mu + sigma * std_normal_pdf(-a) / upper),
        EllVariant::ExactBinary => (upper / std_normal_cdf(-a)).ln(),
    }
}

/// `P(choose L | counts, state R)` under the chosen argument variant.
pub fn choice_prob_l(counts: ObservedCounts, ell: f64, params: &SignalParams, variant: ChoiceProbVariant) -> f64 {
    let d = -(counts.net_r() as f64);
    std_normal_cdf(variant.argument(d, ell, params))
}

/// Choice probabilities `(P(L), P(R))` for every net count `d = i - i'` in `-n..=n`,
/// conditional on `state`. Index `d + n`.
///
/// Under state L the probabilities are the mirror image of the state-R formula,
/// evaluated explicitly rather than inferred from symmetry.
fn choice_table(n: u32, ell: f64, params: &SignalParams, variant: ChoiceProbVariant, state: State) -> Vec<(f64, f64)> {
    let n = i64::from(n);
    (-n..=n)
        .map(|d| {
            let d = d as f64;
            match (state, variant) {
                (State::R, v) => {
                    let arg = v.argument(d, ell, params);
                    (std_normal_cdf(arg), std_normal_cdf(-arg))
                }
                (State::L, ChoiceProbVariant::DerivedArgument) => {
                    // L iff s < d ℓ σ² / (2μ) with s ~ N(-μ, σ²)
                    let arg = d * ell * params.sigma / (2.0 * params.mu) + params.mu / params.sigma;
                    (std_normal_cdf(arg), std_normal_cdf(-arg))
                }
                (State::L, ChoiceProbVariant::PrintedArgument) => {
                    let arg = ChoiceProbVariant::PrintedArgument.argument(-d, ell, params);
                    (std_normal_cdf(-arg), std_normal_cdf(arg))
                }
            }
        })
        .collect()
}

/// Distribution of (L-count, R-count) among the first `n` agents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountDistribution {
    n: u32,
    /// `probs[k]` = P(k chose L, n - k chose R).
    probs: Vec<f64>,
}

impl CountDistribution {
    /// The empty history: `P(0, 0) = 1`.
    pub fn base() -> Self {
        CountDistribution { n: 0, probs: vec![1.0] }
    }

    /// Builds a distribution over `probs.len() - 1` agents, checking the invariants.
    pub fn from_probs(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::EmptyInput("count distribution"));
        }
        if probs.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
            return Err(Error::InvalidParameter("probabilities must be finite and non-negative".into()));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidParameter(format!("probabilities sum to {total}, not 1")));
        }
        Ok(CountDistribution { n: probs.len() as u32 - 1, probs })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    /// `P(k, k')`; zero unless `k + k' = n`.
    pub fn get(&self, k: u32, k_prime: u32) -> f64 {
        if k + k_prime != self.n {
            return 0.0;
        }
        self.probs[k as usize]
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }
}

/// Advances the distribution by one agent and returns it together with the
/// probability that the entering agent's action matches `state`.
fn step_with_accuracy(
    dist: &CountDistribution,
    q: f64,
    choice: &[(f64, f64)],
    state: State,
) -> (CountDistribution, f64) {
    let n = dist.n;
    let offset = choice.len() as i64 / 2;
    let mut next = vec![0.0; n as usize + 2];
    let mut correct = 0.0;
    for k in 0..=n {
        let mass = dist.probs[k as usize];
        if mass == 0.0 {
            continue;
        }
        let k_prime = n - k;
        let obs_l = binomial_row(k, q);
        let obs_r = binomial_row(k_prime, q);
        let (mut to_l, mut to_r) = (0.0, 0.0);
        for (i, bl) in obs_l.iter().enumerate() {
            if *bl == 0.0 {
                continue;
            }
            let (mut inner_l, mut inner_r) = (0.0, 0.0);
            for (i_prime, br) in obs_r.iter().enumerate() {
                let (pl, pr) = choice[(i as i64 - i_prime as i64 + offset) as usize];
                inner_l += br * pl;
                inner_r += br * pr;
            }
            to_l += bl * inner_l;
            to_r += bl * inner_r;
        }
        next[k as usize + 1] += mass * to_l;
        next[k as usize] += mass * to_r;
        correct += mass * if state == State::R { to_r } else { to_l };
    }
    (CountDistribution { n: n + 1, probs: next }, correct)
}

/// One step of the recursion conditional on state R.
pub fn step_distribution(
    dist: &CountDistribution,
    q: f64,
    ell: f64,
    params: &SignalParams,
    variant: ChoiceProbVariant,
) -> Result<CountDistribution> {
    check_probability("q", q)?;
    if ell.is_nan() || ell <= 0.0 {
        return Err(Error::InvalidParameter(format!("ell must be positive, got {ell}")));
    }
    let choice = choice_table(dist.n, ell, params, variant, State::R);
    Ok(step_with_accuracy(dist, q, &choice, State::R).0)
}

/// Per-position probability that an agent's action equals the state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracyCurve {
    pub q: f64,
    pub values: Vec<f64>,
}

impl AccuracyCurve {
    /// Accuracy of the agent at 1-based `position`.
    pub fn at(&self, position: u32) -> f64 {
        self.values[position as usize - 1]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Values at positions `first..=last`.
    pub fn window(&self, first: u32, last: u32) -> &[f64] {
        &self.values[first as usize - 1..last as usize]
    }
}

/// Exact accuracy curve conditional on `state`.
pub fn naive_accuracy_curve_given_state(
    net: &NetworkParams,
    params: &SignalParams,
    ell_variant: EllVariant,
    choice_variant: ChoiceProbVariant,
    state: State,
) -> Result<AccuracyCurve> {
    check_probability("q", net.q)?;
    if net.n_agents == 0 || net.n_agents > MAX_AGENTS {
        return Err(Error::InvalidParameter(format!(
            "exact solver supports 1..={MAX_AGENTS} agents, got {}",
            net.n_agents
        )));
    }
    let ell = compute_ell(params, ell_variant);
    let choice = choice_table(net.n_agents, ell, params, choice_variant, state);
    // The table is built for the largest n; re-centre it for each step.
    let centre = net.n_agents as usize;
    let mut dist = CountDistribution::base();
    let mut values = Vec::with_capacity(net.n_agents as usize);
    for n in 0..net.n_agents {
        let slice = &choice[centre - n as usize..=centre + n as usize];
        let (next, acc) = step_with_accuracy(&dist, net.q, slice, state);
        values.push(acc);
        dist = next;
    }
    Ok(AccuracyCurve { q: net.q, values })
}

/// Exact per-position accuracy of naive agents. Conditioning on R gives the
/// unconditional accuracy by symmetry.
pub fn naive_accuracy_curve(
    net: &NetworkParams,
    params: &SignalParams,
    ell_variant: EllVariant,
    choice_variant: ChoiceProbVariant,
) -> Result<AccuracyCurve> {
    naive_accuracy_curve_given_state(net, params, ell_variant, choice_variant, State::R)
}

/// All count distributions `P_0..=P_n` for inspection.
pub fn count_distributions(
    net: &NetworkParams,
    params: &SignalParams,
    ell_variant: EllVariant,
    choice_variant: ChoiceProbVariant,
) -> Result<Vec<CountDistribution>> {
    let ell = compute_ell(params, ell_variant);
    let mut out = vec![CountDistribution::base()];
    for _ in 0..net.n_agents {
        let next = step_distribution(out.last().unwrap(), net.q, ell, params, choice_variant)?;
        out.push(next);
    }
    Ok(out)
}

/// One variant pair's fit against the published table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationEntry {
    pub ell_variant: EllVariant,
    pub choice_variant: ChoiceProbVariant,
    pub ell: f64,
    pub max_abs_deviation: f64,
    pub sparse: Vec<f64>,
    pub dense: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationReport {
    pub mu: f64,
    pub sigma: f64,
    pub first_position: u32,
    pub published_sparse: Vec<f64>,
    pub published_dense: Vec<f64>,
    pub entries: Vec<CalibrationEntry>,
    pub selected_ell: EllVariant,
    pub selected_choice: ChoiceProbVariant,
    pub selected_max_abs_deviation: f64,
}

impl CalibrationReport {
    pub fn selected(&self) -> (EllVariant, ChoiceProbVariant) {
        (self.selected_ell, self.selected_choice)
    }
}

/// Evaluates all six variant pairs on 40-agent networks at `q = 1/4` and `q = 3/4`
/// and selects the pair closest (in max absolute deviation) to the published table.
pub fn calibrate_variants(params: &SignalParams) -> Result<CalibrationReport> {
    let pairs: Vec<(EllVariant, ChoiceProbVariant)> = EllVariant::ALL
        .into_iter()
        .flat_map(|e| ChoiceProbVariant::ALL.into_iter().map(move |c| (e, c)))
        .collect();
    let last = TABLE_FIRST_POSITION + 7;
    let entries = pairs
        .par_iter()
        .map(|&(ell_variant, choice_variant)| {
            let curve_at = |q| {
                let net = NetworkParams { q, n_agents: last };
                naive_accuracy_curve(&net, params, ell_variant, choice_variant)
                    .map(|c| c.window(TABLE_FIRST_POSITION, last).to_vec())
            };
            let sparse = curve_at(0.25)?;
            let dense = curve_at(0.75)?;
            let max_abs_deviation = sparse
                .iter()
                .zip(NAIVE_TABLE_SPARSE.iter())
                .chain(dense.iter().zip(NAIVE_TABLE_DENSE.iter()))
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            Ok(CalibrationEntry {
                ell_variant,
                choice_variant,
                ell: compute_ell(params, ell_variant),
                max_abs_deviation,
                sparse,
                dense,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let best = entries
        .iter()
        .min_by(|a, b| a.max_abs_deviation.total_cmp(&b.max_abs_deviation))
        .expect("six pairs");
    if best.max_abs_deviation >= CALIBRATION_LIMIT {
        return Err(Error::Calibration {
            ell: best.ell_variant,
            choice: best.choice_variant,
            max_deviation: best.max_abs_deviation,
            limit: CALIBRATION_LIMIT,
        });
    }
    Ok(CalibrationReport {
        mu: params.mu,
        sigma: params.sigma,
        first_position: TABLE_FIRST_POSITION,
        published_sparse: NAIVE_TABLE_SPARSE.to_vec(),
        published_dense: NAIVE_TABLE_DENSE.to_vec(),
        selected_ell: best.ell_variant,
        selected_choice: best.choice_variant,
        selected_max_abs_deviation: best.max_abs_deviation,
        entries,
    })
}

/// Number of sign changes of `upper - lower` over positions `from..=len`,
/// ignoring exact zeros.
pub fn sign_changes(lower: &AccuracyCurve, upper: &AccuracyCurve, from: u32) -> usize {
    let diffs: Vec<f64> = upper
        .values
        .iter()
        .zip(&lower.values)
        .skip(from as usize - 1)
        .map(|(u, l)| u - l)
        .filter(|d| *d != 0.0)
        .collect();
    diffs.windows(2).filter(|w| (w[0] > 0.0) != (w[1] > 0.0)).count()
}

/// Sanity check that position 1 equals the autarky benchmark.
pub fn first_position_is_autarkic(curve: &AccuracyCurve, params: &SignalParams) -> bool {
    curve.values.first().is_some_and(|v| *v == autarky_accuracy(params))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exp() -> SignalParams {
        SignalParams::experiment()
    }

    #[test]
    fn ell_variants_match_high_precision_values() {
        // mpmath, 30 digits
        assert!((compute_ell(&exp(), EllVariant::PrintedFormula) - 1.232_265_487_260_692_5).abs() < 1e-12);
        assert!((compute_ell(&exp(), EllVariant::TruncatedMean) - 1.009_160_433_837_033_5).abs() < 1e-12);
        assert!((compute_ell(&exp(), EllVariant::ExactBinary) - 0.806_965_346_304_962_2).abs() < 1e-12);
        for v in EllVariant::ALL {
            assert!(compute_ell(&SignalParams::new(0.3, 3.0).unwrap(), v) > 0.0);
        }
    }

    #[test]
    fn choice_prob_examples() {
        let p = exp();
        let ell = compute_ell(&p, EllVariant::TruncatedMean);
        let d = ChoiceProbVariant::DerivedArgument;
        let base = choice_prob_l(ObservedCounts::new(0, 0), ell, &p, d);
        assert!((base - 0.308_537_538_725_986_9).abs() < 1e-12);
        assert_eq!(choice_prob_l(ObservedCounts::new(4, 4), ell, &p, d), base);
        let more_r = choice_prob_l(ObservedCounts::new(0, 1), ell, &p, d);
        let more_l = choice_prob_l(ObservedCounts::new(1, 0), ell, &p, d);
        assert!(more_r < base && base < more_l);
        // The printed argument gives Φ(-2) at balance.
        let printed = choice_prob_l(ObservedCounts::new(0, 0), ell, &p, ChoiceProbVariant::PrintedArgument);
        assert!((printed - 0.022_750_131_948_179_2).abs() < 1e-12);
    }

    #[test]
    fn first_step_is_autarky() {
        let p = exp();
        let ell = compute_ell(&p, EllVariant::TruncatedMean);
        let d1 = step_distribution(&CountDistribution::base(), 0.25, ell, &p, ChoiceProbVariant::DerivedArgument).unwrap();
        assert!((d1.get(1, 0) - 0.308_537_538_725_986_9).abs() < 1e-12);
        assert!((d1.get(0, 1) - 0.691_462_461_274_013_1).abs() < 1e-12);
        assert_eq!(d1.get(1, 1), 0.0);
    }

    #[test]
    fn step_rejects_bad_q() {
        let p = exp();
        assert!(step_distribution(&CountDistribution::base(), 1.5, 1.0, &p, ChoiceProbVariant::DerivedArgument).is_err());
        assert!(step_distribution(&CountDistribution::base(), -0.1, 1.0, &p, ChoiceProbVariant::DerivedArgument).is_err());
    }

    #[test]
    fn q_zero_is_independent_bernoulli() {
        let p = exp();
        let net = NetworkParams::new(0.0, 12).unwrap();
        let dists = count_distributions(&net, &p, EllVariant::TruncatedMean, ChoiceProbVariant::DerivedArgument).unwrap();
        let acc = autarky_accuracy(&p);
        for (n, dist) in dists.iter().enumerate() {
            let n = n as u32;
            for k in 0..=n {
                // k wrong (L) out of n, each wrong with prob 1 - acc
                let want = crate::gauss::binomial_pmf(k, n, 1.0 - acc);
                assert!((dist.get(k, n - k) - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn distributions_normalize() {
        let p = exp();
        for q in [0.25, 0.75] {
            let net = NetworkParams::new(q, 40).unwrap();
            for ev in EllVariant::ALL {
                for cv in ChoiceProbVariant::ALL {
                    for dist in count_distributions(&net, &p, ev, cv).unwrap() {
                        assert!((dist.total() - 1.0).abs() < 1e-9);
                        assert!(dist.probs().iter().all(|x| *x >= 0.0));
                    }
                }
            }
        }
    }

    #[test]
    fn count_distribution_validation() {
        assert!(CountDistribution::from_probs(vec![0.5, 0.5]).is_ok());
        assert!(CountDistribution::from_probs(vec![0.5, 0.6]).is_err());
        assert!(CountDistribution::from_probs(vec![1.5, -0.5]).is_err());
        assert!(CountDistribution::from_probs(vec![]).is_err());
    }

    #[test]
    fn complexity_guard() {
        let p = exp();
        let net = NetworkParams::new(0.5, MAX_AGENTS + 1).unwrap();
        assert!(naive_accuracy_curve(&net, &p, EllVariant::TruncatedMean, ChoiceProbVariant::DerivedArgument).is_err());
    }

    #[test]
    fn variant_names_round_trip() {
        for v in EllVariant::ALL {
            assert_eq!(EllVariant::parse(v.name()).unwrap(), v);
        }
        for v in ChoiceProbVariant::ALL {
            assert_eq!(ChoiceProbVariant::parse(v.name()).unwrap(), v);
        }
        assert!(EllVariant::parse("bogus").is_err());
    }

    #[test]
    fn sign_change_counter() {
        let a = AccuracyCurve { q: 0.0, values: vec![0.5, 0.6, 0.7, 0.8] };
        let b = AccuracyCurve { q: 0.0, values: vec![0.5, 0.7, 0.7, 0.7] };
        assert_eq!(sign_changes(&a, &b, 2), 1);
        assert_eq!(sign_changes(&a, &a, 1), 0);
    }
}
