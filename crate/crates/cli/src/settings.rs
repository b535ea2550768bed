//! Run parameters shared by the subcommands. Each value comes from the first
//! of: command-line flag, `--config` TOML file, built-in default.

use anyhow::{bail, Context, Result};
use clap::Args;
use netlearn::model::{BehaviorModel, SignalParams};
use netlearn::naive::{ChoiceProbVariant, EllVariant};
use netlearn::ols::SeFlavor;
use serde::Deserialize;
use std::path::{Path, PathBuf};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "NETLEARN_OUT_DIR";

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct Settings {
    /// Link probability; repeat for several curves or arms [default: 0.25 and 0.75]
    #[arg(long = "q", value_name = "Q")]
    #[serde(default)]
    pub q: Vec<f64>,
    /// Agents per trial [default: 40]
    #[arg(long)]
    pub agents: Option<u32>,
    /// Signal mean in state R [default: 1]
    #[arg(long, allow_hyphen_values = true)]
    pub mu: Option<f64>,
    /// Signal standard deviation [default: 2]
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Trials per arm [default: 10000]
    #[arg(long)]
    pub trials: Option<u64>,
    /// Master seed [default: 2024]
    #[arg(long)]
    pub seed: Option<u64>,
    /// naive, autarkic, mixed or independent [default: naive]
    #[arg(long)]
    pub behavior: Option<String>,
    /// Share of naive agents for `--behavior mixed` [default: 0.5]
    #[arg(long)]
    pub naive_share: Option<f64>,
    /// Probability that an action is flipped [default: 0]
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// sequential or independent [default: sequential]
    #[arg(long)]
    pub topology: Option<String>,
    /// printed-formula, truncated-mean or exact-binary [default: calibrated]
    #[arg(long)]
    pub ell_variant: Option<String>,
    /// printed-argument or derived-argument [default: calibrated]
    #[arg(long)]
    pub choice_variant: Option<String>,
    /// HC0 or HC1 [default: HC1]
    #[arg(long)]
    pub se_flavor: Option<String>,
    /// csv or json [default: csv]
    #[arg(long)]
    pub format: Option<String>,
    /// Output directory [default: $NETLEARN_OUT_DIR, else netlearn-out]
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads; results do not depend on it [default: all cores]
    #[arg(long)]
    pub parallelism: Option<usize>,
    /// Also write an SVG rendering of the accuracy curves
    #[arg(long)]
    #[serde(default)]
    pub svg: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TopologyChoice {
    Sequential,
    Independent,
}

impl Settings {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }

    /// Fills every unset field of `self` from `lower`.
    pub fn or(self, lower: Settings) -> Settings {
        Settings {
            q: if self.q.is_empty() { lower.q } else { self.q },
            agents: self.agents.or(lower.agents),
            mu: self.mu.or(lower.mu),
            sigma: self.sigma.or(lower.sigma),
            trials: self.trials.or(lower.trials),
            seed: self.seed.or(lower.seed),
            behavior: self.behavior.or(lower.behavior),
            naive_share: self.naive_share.or(lower.naive_share),
            epsilon: self.epsilon.or(lower.epsilon),
            topology: self.topology.or(lower.topology),
            ell_variant: self.ell_variant.or(lower.ell_variant),
            choice_variant: self.choice_variant.or(lower.choice_variant),
            se_flavor: self.se_flavor.or(lower.se_flavor),
            format: self.format.or(lower.format),
            out: self.out.or(lower.out),
            parallelism: self.parallelism.or(lower.parallelism),
            svg: self.svg || lower.svg,
        }
    }

    pub fn qs(&self) -> Vec<f64> {
        if self.q.is_empty() {
            netlearn::repro::ARMS.to_vec()
        } else {
            self.q.clone()
        }
    }

    pub fn agents(&self) -> u32 {
        self.agents.unwrap_or(40)
    }

    pub fn signal(&self) -> Result<SignalParams> {
        let d = SignalParams::experiment();
        Ok(SignalParams::new(self.mu.unwrap_or(d.mu), self.sigma.unwrap_or(d.sigma))?)
    }

    pub fn trials(&self) -> u64 {
        self.trials.unwrap_or(10_000)
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(2024)
    }

    pub fn behavior(&self) -> Result<BehaviorModel> {
        let b = match self.behavior.as_deref().unwrap_or("naive") {
            "naive" => BehaviorModel::Naive,
            "autarkic" => BehaviorModel::Autarkic,
            "mixed" => BehaviorModel::MixedPopulation { naive_share: self.naive_share.unwrap_or(0.5) },
            "independent" => BehaviorModel::IndependentObserved,
            other => bail!("unknown behavior {other:?}; expected naive, autarkic, mixed or independent"),
        };
        b.validate()?;
        Ok(b)
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon.unwrap_or(0.0)
    }

    pub fn topology(&self) -> Result<TopologyChoice> {
        match self.topology.as_deref().unwrap_or("sequential") {
            "sequential" => Ok(TopologyChoice::Sequential),
            "independent" => Ok(TopologyChoice::Independent),
            other => bail!("unknown topology {other:?}; expected sequential or independent"),
        }
    }

    pub fn ell_variant(&self) -> Result<Option<EllVariant>> {
        Ok(self.ell_variant.as_deref().map(EllVariant::parse).transpose()?)
    }

    pub fn choice_variant(&self) -> Result<Option<ChoiceProbVariant>> {
        Ok(self.choice_variant.as_deref().map(ChoiceProbVariant::parse).transpose()?)
    }

    pub fn se_flavor(&self) -> Result<SeFlavor> {
        Ok(self.se_flavor.as_deref().map(SeFlavor::parse).transpose()?.unwrap_or_default())
    }

    pub fn format(&self) -> Result<Format> {
        match self.format.as_deref().unwrap_or("csv") {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => bail!("unknown format {other:?}; expected csv or json"),
        }
    }

    pub fn out_dir(&self) -> PathBuf {
        self.out
            .clone()
            .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("netlearn-out"))
    }

    pub fn parallelism(&self) -> usize {
        self.parallelism
            .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
    }
}
