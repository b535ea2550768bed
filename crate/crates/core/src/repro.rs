//! End-to-end reproduction: every table and figure of the experiment
//! regenerated from solvers and seeded simulations, written as plain files.
//!
//! [`repro_all`] output depends only on the [`ReproConfig`], never on the
//! wall clock or the number of threads.

use crate::analytics::{
    density_regression, gain_from_social_learning, independent_experiment_regression, misleading_interaction_regression,
    outcomes_from_records, robustness_sweep, ArmOutcome, GainArm, InteractionResult, SweepPoint, CONSTANT, DENSITY,
    INTERACTION, MISLEADING, ROBUSTNESS_RANGE,
};
use crate::error::{Error, Result};
use crate::io::{curve_rows, to_json, write_curve_csv, write_records, CurveRow};
use crate::model::{autarky_accuracy, BehaviorModel, NetworkParams, SignalParams};
use crate::naive::{calibrate_variants, naive_accuracy_curve, CalibrationReport};
use crate::ols::{RegressionResult, SeFlavor};
use crate::rational::constrained_accuracy_curve;
use crate::report::{regression_table, REFERENCE_VALUES};
use crate::seed::trial_seed;
use crate::sim::{
    against_signal_stats, fraction_correct_histogram, mean_window_uncertainty, run_batch, summarize, window_uncertainty,
    AgainstSignalReport, BatchSummary, Histogram, TopologyKind, TrialConfig, TrialRecord, LAST_K,
};
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

/// The two treatments of the experiment.
pub const ARMS: [f64; 2] = [0.25, 0.75];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReproConfig {
    pub master_seed: u64,
    pub trials_per_arm: u64,
    pub signal: SignalParams,
    pub n_agents: u32,
    pub se_flavor: SeFlavor,
    /// Worker threads; has no effect on the output.
    #[serde(skip)]
    pub parallelism: usize,
    /// Also write the raw trial-record CSVs.
    pub write_records: bool,
}

impl Default for ReproConfig {
    fn default() -> Self {
        ReproConfig {
            master_seed: 2024,
            trials_per_arm: 10_000,
            signal: SignalParams::experiment(),
            n_agents: 40,
            se_flavor: SeFlavor::HC1,
            parallelism: 1,
            write_records: false,
        }
    }
}

/// Runs sequential trials for each `q` in `qs` and concatenates them with
/// trial ids numbered consecutively across arms. Each arm draws its trials
/// from its own seed derived from `master_seed`.
pub fn simulate_arms(
    base: &TrialConfig,
    qs: &[f64],
    n_trials: u64,
    master_seed: u64,
    parallelism: usize,
) -> Result<Vec<TrialRecord>> {
    let crate::sim::Topology::Sequential(net) = base.topology else {
        return Err(Error::TopologyMismatch("arms are defined for sequential trials only".into()));
    };
    let mut all = Vec::with_capacity(qs.len() * n_trials as usize);
    for (i, &q) in qs.iter().enumerate() {
        let config = TrialConfig { topology: crate::sim::Topology::Sequential(NetworkParams { q, ..net }), ..*base };
        let (_, mut recs) = run_batch(&config, n_trials, arm_seed(master_seed, i as u64), parallelism)?;
        let offset = all.len() as u64;
        recs.iter_mut().for_each(|r| r.trial_id += offset);
        all.extend(recs);
    }
    Ok(all)
}

/// Master seed for arm `arm` of a multi-arm run.
pub fn arm_seed(master: u64, arm: u64) -> u64 {
    trial_seed(master, u64::MAX - arm)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowProfile {
    pub q: f64,
    pub centres: Vec<u32>,
    pub mean_uncertainty: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArmDescription {
    pub q: f64,
    pub n_trials: usize,
    pub mean_last8: f64,
    pub histogram: Histogram,
}

/// Everything computed from a batch of sequential trials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequentialAnalysis {
    pub arms: Vec<ArmDescription>,
    pub density: RegressionResult,
    pub interaction: InteractionResult,
    pub gains: Vec<GainArm>,
    pub against_signal: AgainstSignalReport,
    /// Empty when trials have fewer than 40 agents.
    pub windows: Vec<WindowProfile>,
    pub robustness: Vec<SweepPoint>,
}

pub fn analyze_sequential(records: &[TrialRecord], params: &SignalParams, flavor: SeFlavor) -> Result<SequentialAnalysis> {
    let outcomes = outcomes_from_records(records)?;
    let mut qs: Vec<f64> = records.iter().map(TrialRecord::q).collect();
    qs.sort_by(f64::total_cmp);
    qs.dedup();
    let arms = qs
        .iter()
        .map(|&q| {
            let arm: Vec<TrialRecord> = records.iter().filter(|r| r.q() == q).cloned().collect();
            Ok(ArmDescription {
                q,
                n_trials: arm.len(),
                mean_last8: arm.iter().map(|r| r.last_fraction(LAST_K)).sum::<f64>() / arm.len() as f64,
                histogram: fraction_correct_histogram(&arm, 20)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let windows = if records.iter().all(|r| r.n_agents() >= 40) {
        let w = window_uncertainty(records)?;
        let centres = w.first().map(|x| x.centres.clone()).unwrap_or_default();
        qs.iter()
            .map(|&q| WindowProfile { q, centres: centres.clone(), mean_uncertainty: mean_window_uncertainty(&w, q) })
            .collect()
    } else {
        Vec::new()
    };
    let robustness = if records.iter().all(|r| r.n_agents() >= *ROBUSTNESS_RANGE.end()) {
        robustness_sweep(records, ROBUSTNESS_RANGE, flavor)?
    } else {
        Vec::new()
    };
    Ok(SequentialAnalysis {
        arms,
        density: density_regression(&outcomes, flavor)?,
        interaction: misleading_interaction_regression(&outcomes, flavor)?,
        gains: gain_from_social_learning(&outcomes, params)?,
        against_signal: against_signal_stats(records, LAST_K)?,
        windows,
        robustness,
    })
}

/// Everything computed from a batch of independent-neighbors trials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndependentAnalysis {
    pub n_trials: usize,
    /// Mean evaluator accuracy, sparse group first.
    pub arm_means: [ArmOutcome; 2],
    pub regression: RegressionResult,
}

pub fn analyze_independent(records: &[TrialRecord], flavor: SeFlavor) -> Result<IndependentAnalysis> {
    let outcomes = outcomes_from_records(records)?;
    let regression = independent_experiment_regression(&outcomes, flavor)?;
    let arms: Vec<[ArmOutcome; 2]> = outcomes.iter().filter_map(|o| o.arms).collect();
    let mean_of = |i: usize| ArmOutcome {
        q: arms[0][i].q,
        fraction_correct: arms.iter().map(|a| a[i].fraction_correct).sum::<f64>() / arms.len() as f64,
    };
    Ok(IndependentAnalysis { n_trials: arms.len(), arm_means: [mean_of(0), mean_of(1)], regression })
}

/// Splits records by topology and analyzes each kind present.
pub fn analyze_records(
    records: &[TrialRecord],
    params: &SignalParams,
    flavor: SeFlavor,
) -> Result<(Option<SequentialAnalysis>, Option<IndependentAnalysis>)> {
    if records.is_empty() {
        return Err(Error::EmptyInput("trial records"));
    }
    let (seq, ind): (Vec<TrialRecord>, Vec<TrialRecord>) =
        records.iter().cloned().partition(|r| r.topology == TopologyKind::Sequential);
    let seq = (!seq.is_empty()).then(|| analyze_sequential(&seq, params, flavor)).transpose()?;
    let ind = (!ind.is_empty()).then(|| analyze_independent(&ind, flavor)).transpose()?;
    Ok((seq, ind))
}

pub fn density_table(fit: &RegressionResult) -> String {
    regression_table(
        "Last-8 accuracy on network density",
        "FractionCorrectLast8",
        &[(DENSITY, DENSITY), (CONSTANT, CONSTANT)],
        fit,
    )
}

pub fn interaction_table(fit: &RegressionResult) -> String {
    regression_table(
        "Misleading early signals and network density",
        "FractionCorrectLast8",
        &[(MISLEADING, MISLEADING), (DENSITY, DENSITY), (INTERACTION, INTERACTION), (CONSTANT, CONSTANT)],
        fit,
    )
}

pub fn independent_table(fit: &RegressionResult) -> String {
    regression_table(
        "Evaluator accuracy on density, independent neighbors",
        "FractionCorrectEvaluators",
        &[(DENSITY, DENSITY), (CONSTANT, CONSTANT)],
        fit,
    )
}

/// A published estimate next to its simulated counterpart.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison {
    pub key: &'static str,
    pub description: &'static str,
    pub published: f64,
    pub published_se: Option<f64>,
    pub simulated: Option<f64>,
}

/// Pairs every reference value with the matching simulated quantity, when
/// the analyses provide one.
pub fn compare_with_references(
    seq: Option<&SequentialAnalysis>,
    ind: Option<&IndependentAnalysis>,
    params: &SignalParams,
) -> Vec<Comparison> {
    let arm = |q: f64| seq.and_then(|s| s.arms.iter().find(|a| a.q == q));
    let gain = |q: f64| seq.and_then(|s| s.gains.iter().find(|g| g.q == q)).map(|g| 100.0 * g.mean_gain);
    let against = |q: f64| seq.and_then(|s| s.against_signal.arm(q)).map(|a| a.all);
    let simulated = |key: &str| -> Option<f64> {
        match key {
            "density_slope" => seq?.density.coef(DENSITY),
            "density_constant" => seq?.density.coef(CONSTANT),
            "density_slope_p" => seq?.density.p_value(DENSITY),
            "density_observations" => seq.map(|s| s.density.n_obs as f64),
            "interaction_gamma" => seq?.interaction.regression.coef(INTERACTION),
            "interaction_p" => seq?.interaction.regression.p_value(INTERACTION),
            "independent_slope" => ind?.regression.coef(DENSITY),
            "independent_constant" => ind?.regression.coef(CONSTANT),
            "independent_slope_p" => ind?.regression.p_value(DENSITY),
            "gain_sparse_points" => gain(0.25),
            "gain_dense_points" => gain(0.75),
            "against_signal_instances_sparse" => against(0.25).map(|t| t.against as f64),
            "against_signal_instances_dense" => against(0.75).map(|t| t.against as f64),
            "against_signal_accuracy_sparse" => against(0.25)?.conditional_accuracy().map(|a| 100.0 * a),
            "against_signal_accuracy_dense" => against(0.75)?.conditional_accuracy().map(|a| 100.0 * a),
            "overall_accuracy_sd_dense_points" => arm(0.75).map(|a| 100.0 * a.histogram.sd),
            "overall_accuracy_sd_sparse_points" => arm(0.25).map(|a| 100.0 * a.histogram.sd),
            "evaluator_accuracy_dense_pct" => ind.map(|i| 100.0 * i.arm_means[1].fraction_correct),
            "evaluator_accuracy_sparse_pct" => ind.map(|i| 100.0 * i.arm_means[0].fraction_correct),
            "autarky_accuracy_pct" => Some(100.0 * autarky_accuracy(params)),
            _ => None,
        }
    };
    REFERENCE_VALUES
        .iter()
        .map(|r| Comparison {
            key: r.key,
            description: r.description,
            published: r.value,
            published_se: r.std_error,
            simulated: simulated(r.key),
        })
        .collect()
}

/// Plain-text listing of [`compare_with_references`].
pub fn reference_report(comparisons: &[Comparison]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "Experimental estimates (human subjects) and simulated counterparts");
    let _ = writeln!(out, "The subject data is not distributed; published values are context only.");
    let _ = writeln!(out);
    let _ = writeln!(out, "{:<60}{:>14}{:>14}", "quantity", "published", "simulated");
    for c in comparisons {
        let published = match c.published_se {
            Some(se) => format!("{} ({se})", c.published),
            None => c.published.to_string(),
        };
        let simulated = match c.simulated {
            None => "-".to_string(),
            Some(v) if v.fract() == 0.0 && v.abs() >= 1.0 => format!("{v}"),
            Some(v) => format!("{v:.4}"),
        };
        let _ = writeln!(out, "{:<60}{:>14}{:>14}", c.description, published, simulated);
    }
    out
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    config: &'a ReproConfig,
    files: Vec<String>,
}

struct Out<'a> {
    dir: &'a Path,
    files: Vec<String>,
}

impl Out<'_> {
    fn put(&mut self, name: &str, bytes: impl AsRef<[u8]>) -> Result<()> {
        fs::write(self.dir.join(name), bytes)?;
        self.files.push(name.to_string());
        Ok(())
    }
}

/// Exact naive curves for both treatments, the calibration used to pick the
/// model variants, and the rational lower bounds.
pub struct SolverArtifacts {
    pub calibration: CalibrationReport,
    pub naive: Vec<CurveRow>,
    pub bound: Vec<CurveRow>,
}

pub fn solver_artifacts(params: &SignalParams, n_agents: u32) -> Result<SolverArtifacts> {
    let calibration = calibrate_variants(params)?;
    let (ell, choice) = calibration.selected();
    let mut naive = Vec::new();
    let mut bound = Vec::new();
    for q in ARMS {
        let net = NetworkParams::new(q, n_agents)?;
        naive.extend(curve_rows("naive", q, &naive_accuracy_curve(&net, params, ell, choice)?.values));
        bound.extend(curve_rows("rational_bound", q, &constrained_accuracy_curve(&net, params)?.values));
    }
    Ok(SolverArtifacts { calibration, naive, bound })
}

fn strip_trials(mut s: BatchSummary) -> BatchSummary {
    s.last8.clear();
    s.overall.clear();
    s
}

/// Regenerates every artifact into `dir` (created if missing) and returns the
/// paths written, in order. The directory should be fresh; existing files
/// with the same names are overwritten.
pub fn repro_all(dir: &Path, config: &ReproConfig) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut out = Out { dir, files: Vec::new() };
    let params = config.signal;

    let solver = solver_artifacts(&params, config.n_agents)?;
    out.put("calibration.json", to_json(&solver.calibration)?)?;
    out.put("figure1.csv", write_curve_csv(Vec::new(), &solver.naive)?)?;
    out.put("rational_bound.csv", write_curve_csv(Vec::new(), &solver.bound)?)?;

    let mut base = TrialConfig::sequential(0.0, BehaviorModel::Naive);
    base.signal = params;
    base.ell_variant = solver.calibration.selected_ell;
    base.topology = crate::sim::Topology::Sequential(NetworkParams::new(0.0, config.n_agents)?);
    let seq = simulate_arms(&base, &ARMS, config.trials_per_arm, config.master_seed, config.parallelism)?;
    let ind_config = TrialConfig { signal: params, ell_variant: base.ell_variant, ..TrialConfig::independent(BehaviorModel::IndependentObserved) };
    let (ind_summary, ind) =
        run_batch(&ind_config, config.trials_per_arm, arm_seed(config.master_seed, ARMS.len() as u64), config.parallelism)?;
    if config.write_records {
        out.put("records_sequential.csv", write_records(Vec::new(), &seq)?)?;
        out.put("records_independent.csv", write_records(Vec::new(), &ind)?)?;
    }

    let seq_summaries = ARMS
        .iter()
        .map(|&q| {
            let arm: Vec<TrialRecord> = seq.iter().filter(|r| r.q() == q).cloned().collect();
            summarize(&arm).map(strip_trials)
        })
        .collect::<Result<Vec<_>>>()?;
    out.put("summary_sequential.json", to_json(&seq_summaries)?)?;
    out.put("summary_independent.json", to_json(&strip_trials(ind_summary))?)?;

    let seq_analysis = analyze_sequential(&seq, &params, config.se_flavor)?;
    let ind_analysis = analyze_independent(&ind, config.se_flavor)?;
    out.put("table1.json", to_json(&seq_analysis.density)?)?;
    out.put("table1.txt", density_table(&seq_analysis.density))?;
    out.put("table4.json", to_json(&seq_analysis.interaction)?)?;
    out.put("table4.txt", interaction_table(&seq_analysis.interaction.regression))?;
    out.put("table5.json", to_json(&ind_analysis)?)?;
    out.put("table5.txt", independent_table(&ind_analysis.regression))?;
    out.put("gains.json", to_json(&seq_analysis.gains)?)?;
    out.put("against_signal.json", to_json(&seq_analysis.against_signal)?)?;
    out.put("window_uncertainty.json", to_json(&seq_analysis.windows)?)?;
    out.put("histograms.json", to_json(&seq_analysis.arms)?)?;
    out.put("robustness.json", to_json(&seq_analysis.robustness)?)?;

    let comparisons = compare_with_references(Some(&seq_analysis), Some(&ind_analysis), &params);
    out.put("reference.json", to_json(&comparisons)?)?;
    out.put("report.txt", reference_report(&comparisons))?;

    let mut files = out.files.clone();
    files.push("manifest.json".into());
    out.put("manifest.json", to_json(&Manifest { config, files })?)?;
    Ok(out.files.iter().map(|f| dir.join(f)).collect())
}
