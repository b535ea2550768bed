//! Text tables in the usual regression-table layout, and the experiment's
//! published point estimates kept as reference constants.
//!
//! The reference values come from human-subject data that is not distributed,
//! so they are reported next to simulated results and never asserted against.

use crate::ols::RegressionResult;
use serde::Serialize;
use std::fmt::Write;

/// A published experimental estimate.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Reference {
    pub key: &'static str,
    pub description: &'static str,
    pub value: f64,
    pub std_error: Option<f64>,
}

pub const REFERENCE_VALUES: &[Reference] = &[
    Reference { key: "density_slope", description: "Last-8 accuracy on density: NetworkDensity", value: -0.0923, std_error: Some(0.0406) },
    Reference { key: "density_constant", description: "Last-8 accuracy on density: Constant", value: 0.802, std_error: Some(0.0218) },
    Reference { key: "density_slope_p", description: "Density slope p-value", value: 0.0239, std_error: None },
    Reference { key: "density_observations", description: "Trials in the density regression", value: 260.0, std_error: None },
    Reference { key: "interaction_gamma", description: "MisleadingEarlySignals x NetworkDensity", value: -0.050, std_error: Some(0.030) },
    Reference { key: "interaction_p", description: "Interaction p-value", value: 0.0923, std_error: None },
    Reference { key: "independent_slope", description: "Evaluator accuracy on density (independent neighbors)", value: 0.0865, std_error: Some(0.0417) },
    Reference { key: "independent_constant", description: "Evaluator accuracy on density: Constant", value: 0.660, std_error: None },
    Reference { key: "independent_slope_p", description: "Independent-neighbors slope p-value", value: 0.0391, std_error: None },
    Reference { key: "gain_sparse_points", description: "Gain from social learning, q = 1/4 (percentage points)", value: 8.73, std_error: None },
    Reference { key: "gain_dense_points", description: "Gain from social learning, q = 3/4 (percentage points)", value: 4.12, std_error: None },
    Reference { key: "against_signal_instances_sparse", description: "Against-signal guesses, q = 1/4", value: 138.0, std_error: None },
    Reference { key: "against_signal_instances_dense", description: "Against-signal guesses, q = 3/4", value: 136.0, std_error: None },
    Reference { key: "against_signal_accuracy_sparse", description: "Accuracy when going against the signal, q = 1/4 (%)", value: 81.88, std_error: None },
    Reference { key: "against_signal_accuracy_dense", description: "Accuracy when going against the signal, q = 3/4 (%)", value: 71.32, std_error: None },
    Reference { key: "overall_accuracy_sd_dense_points", description: "SD of per-trial overall accuracy, q = 3/4 (points)", value: 11.36, std_error: None },
    Reference { key: "overall_accuracy_sd_sparse_points", description: "SD of per-trial overall accuracy, q = 1/4 (points)", value: 9.12, std_error: None },
    Reference { key: "evaluator_accuracy_dense_pct", description: "Dense evaluators' accuracy, independent neighbors (%)", value: 72.5, std_error: None },
    Reference { key: "evaluator_accuracy_sparse_pct", description: "Sparse evaluators' accuracy, independent neighbors (%)", value: 68.2, std_error: None },
    Reference { key: "autarky_accuracy_pct", description: "Accuracy from the private signal alone (%)", value: 69.15, std_error: None },
];

fn stars(p: f64) -> &'static str {
    if p < 0.01 {
        "***"
    } else if p < 0.05 {
        "**"
    } else if p < 0.1 {
        "*"
    } else {
        ""
    }
}

/// Formats a regression as a two-column table: regressors first (in the given
/// order, constant last), coefficient with stars over the standard error in
/// parentheses, then fit statistics.
pub fn regression_table(title: &str, dependent: &str, rows: &[(&str, &str)], fit: &RegressionResult) -> String {
    const LABEL: usize = 46;
    const VALUE: usize = 16;
    let rule = "=".repeat(LABEL + VALUE);
    let thin = "-".repeat(LABEL + VALUE);
    let mut out = String::new();
    let _ = writeln!(out, "{title}");
    let _ = writeln!(out, "{rule}");
    let _ = writeln!(out, "{:<LABEL$}{:>VALUE$}", "", "Dependent variable:");
    let _ = writeln!(out, "{:<LABEL$}{:>VALUE$}", "", dependent);
    let _ = writeln!(out, "{thin}");
    for (label, name) in rows {
        let Some(i) = fit.names.iter().position(|n| n == name) else { continue };
        let coef = format!("{:.4}{}", fit.coefficients[i], stars(fit.p_values[i]));
        let se = format!("({:.4})", fit.std_errors[i]);
        let _ = writeln!(out, "{:<LABEL$}{:>VALUE$}", label, coef);
        let _ = writeln!(out, "{:<LABEL$}{:>VALUE$}", "", se);
    }
    let _ = writeln!(out, "{thin}");
    let _ = writeln!(out, "{:<LABEL$}{:>VALUE$}", "Observations", fit.n_obs);
    let _ = writeln!(out, "{:<LABEL$}{:>VALUE$}", "R2", format!("{:.4}", fit.r_squared));
    let _ = writeln!(out, "{:<LABEL$}{:>VALUE$}", "Adjusted R2", format!("{:.4}", fit.adj_r_squared));
    let _ = writeln!(
        out,
        "{:<LABEL$}{:>VALUE$}",
        "Residual Std. Error",
        format!("{:.4} (df = {})", fit.residual_se, fit.df_resid)
    );
    let _ = writeln!(out, "{rule}");
    let _ = writeln!(out, "Note: {:?} robust standard errors; *p<0.1; **p<0.05; ***p<0.01", fit.se_flavor);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ols::{ols_robust, SeFlavor};

    #[test]
    fn table_lists_regressors_then_fit_stats() {
        let x: Vec<Vec<f64>> = [0.25, 0.25, 0.75, 0.75, 0.25, 0.75].iter().map(|&q| vec![1.0, q]).collect();
        let fit = ols_robust(&[0.8, 0.9, 0.7, 0.8, 0.85, 0.65], &x, &["Constant", "NetworkDensity"], SeFlavor::HC1).unwrap();
        let t = regression_table("Table", "FractionCorrect", &[("NetworkDensity", "NetworkDensity"), ("Constant", "Constant")], &fit);
        let density = t.find("NetworkDensity").unwrap();
        let constant = t.find("\nConstant").unwrap();
        assert!(density < constant);
        assert!(t.contains("Observations"));
        assert!(t.contains("HC1"));
    }

    #[test]
    fn reference_keys_unique() {
        let mut keys: Vec<_> = REFERENCE_VALUES.iter().map(|r| r.key).collect();
        keys.sort();
        keys.dedup();
        assert_eq!(keys.len(), REFERENCE_VALUES.len());
    }
}
