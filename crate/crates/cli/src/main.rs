mod settings;
mod svg;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use netlearn::io::{curve_rows, read_curve_csv, read_records, to_json, write_curve_csv, CurveRow, RecordWriter};
use netlearn::model::{NetworkParams, SignalParams};
use netlearn::naive::{calibrate_variants, naive_accuracy_curve, CalibrationReport, ChoiceProbVariant, EllVariant};
use netlearn::rational::constrained_accuracy_curve;
use netlearn::repro::{
    analyze_records, arm_seed, compare_with_references, density_table, independent_table, interaction_table,
    reference_report, repro_all, ReproConfig,
};
use netlearn::sim::{run_batch_streaming, BatchSummary, Topology, TrialConfig};
use serde::Serialize;
use settings::{Format, Settings, TopologyChoice};
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

/// Sequential social learning on random networks: exact solvers, seeded
/// simulations and the regressions run on them.
#[derive(Debug, Parser)]
#[command(name = "netlearn", version)]
struct Cli {
    /// TOML file of defaults; flags given on the command line take precedence
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Exact accuracy curves of naive agents, with the variant calibration
    ExactNaive(Plain),
    /// Lower bounds on rational accuracy from one-neighbor strategies
    RationalBound(Plain),
    /// Simulate trials and write trial records plus a batch summary
    Simulate(Plain),
    /// Run the trial-level regressions on a trial-record CSV
    Analyze(AnalyzeArgs),
    /// Regenerate every table and figure into a timestamped directory
    ReproAll(ReproArgs),
}

#[derive(Debug, clap::Args)]
struct Plain {
    #[command(flatten)]
    settings: Settings,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Report {
    /// Regression tables and reference comparison
    Tables,
    /// Two-curve naive accuracy CSV for plotting
    Figure1,
}

#[derive(Debug, clap::Args)]
struct AnalyzeArgs {
    /// Trial-record CSV to analyze
    #[arg(long, value_name = "CSV")]
    input: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "tables")]
    report: Report,
    #[command(flatten)]
    settings: Settings,
}

#[derive(Debug, clap::Args)]
struct ReproArgs {
    /// Also write the raw trial records
    #[arg(long)]
    records: bool,
    #[command(flatten)]
    settings: Settings,
}

fn main() {
    if let Err(err) = run(Cli::parse()) {
        eprintln!("error: {err:#}");
        std::process::exit(1);
    }
}

fn run(cli: Cli) -> Result<()> {
    let config = cli.config.as_deref().map(Settings::load).transpose()?.unwrap_or_default();
    let written = match cli.command {
        Command::ExactNaive(a) => exact_naive(&a.settings.or(config)),
        Command::RationalBound(a) => rational_bound(&a.settings.or(config)),
        Command::Simulate(a) => simulate(&a.settings.or(config)),
        Command::Analyze(a) => analyze(a.input.as_deref(), a.report, &a.settings.or(config)),
        Command::ReproAll(a) => repro(a.records, &a.settings.or(config)),
    }?;
    for path in written {
        println!("{}", path.display());
    }
    Ok(())
}

fn out_dir(s: &Settings) -> Result<PathBuf> {
    let dir = s.out_dir();
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    Ok(dir)
}

fn write(path: PathBuf, bytes: impl AsRef<[u8]>) -> Result<PathBuf> {
    fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))?;
    Ok(path)
}

/// Variant pair: explicit flags win; otherwise the calibrated pair, which
/// must exist unless both variants were given.
fn variants(s: &Settings, params: &SignalParams) -> Result<(EllVariant, ChoiceProbVariant, Option<CalibrationReport>)> {
    let (ell, choice) = (s.ell_variant()?, s.choice_variant()?);
    let calibration = calibrate_variants(params);
    match (ell, choice, calibration) {
        (e, c, Ok(report)) => {
            let (ce, cc) = report.selected();
            Ok((e.unwrap_or(ce), c.unwrap_or(cc), Some(report)))
        }
        (Some(e), Some(c), Err(_)) => Ok((e, c, None)),
        (_, _, Err(err)) => bail!("{err}; pass --ell-variant and --choice-variant to choose a pair explicitly"),
    }
}

fn naive_rows(s: &Settings) -> Result<(Vec<CurveRow>, Option<CalibrationReport>)> {
    let params = s.signal()?;
    let (ell, choice, calibration) = variants(s, &params)?;
    let mut rows = Vec::new();
    for q in s.qs() {
        let curve = naive_accuracy_curve(&NetworkParams::new(q, s.agents())?, &params, ell, choice)?;
        rows.extend(curve_rows("naive", q, &curve.values));
    }
    Ok((rows, calibration))
}

fn write_curves(s: &Settings, dir: &Path, stem: &str, title: &str, rows: &[CurveRow]) -> Result<Vec<PathBuf>> {
    let mut written = vec![match s.format()? {
        Format::Csv => write(dir.join(format!("{stem}.csv")), write_curve_csv(Vec::new(), rows)?)?,
        Format::Json => write(dir.join(format!("{stem}.json")), to_json(&rows)?)?,
    }];
    if s.svg {
        written.push(write(dir.join(format!("{stem}.svg")), svg::curve_chart(title, rows))?);
    }
    Ok(written)
}

fn exact_naive(s: &Settings) -> Result<Vec<PathBuf>> {
    let (rows, calibration) = naive_rows(s)?;
    let dir = out_dir(s)?;
    let mut written = write_curves(s, &dir, "naive_curves", "Accuracy of naive agents", &rows)?;
    if let Some(report) = calibration {
        written.push(write(dir.join("calibration.json"), to_json(&report)?)?);
    }
    Ok(written)
}

fn rational_bound(s: &Settings) -> Result<Vec<PathBuf>> {
    let params = s.signal()?;
    let mut rows = Vec::new();
    for q in s.qs() {
        let curve = constrained_accuracy_curve(&NetworkParams::new(q, s.agents())?, &params)?;
        rows.extend(curve_rows("rational_bound", q, &curve.values));
    }
    write_curves(s, &out_dir(s)?, "rational_bound", "Lower bound on rational accuracy", &rows)
}

#[derive(Serialize)]
struct ArmSummary {
    arm: usize,
    q: Option<f64>,
    seed: u64,
    config: TrialConfig,
    summary: BatchSummary,
}

fn simulate(s: &Settings) -> Result<Vec<PathBuf>> {
    let params = s.signal()?;
    let ell = match s.ell_variant()? {
        Some(e) => e,
        None => variants(s, &params)?.0,
    };
    let topology = s.topology()?;
    let behavior = match (topology, &s.behavior) {
        (TopologyChoice::Independent, None) => netlearn::model::BehaviorModel::IndependentObserved,
        _ => s.behavior()?,
    };
    let base = TrialConfig { signal: params, ell_variant: ell, epsilon: s.epsilon(), ..TrialConfig::sequential(0.0, behavior) };
    let configs: Vec<(Option<f64>, TrialConfig)> = match topology {
        TopologyChoice::Sequential => s
            .qs()
            .into_iter()
            .map(|q| Ok((Some(q), TrialConfig { topology: Topology::Sequential(NetworkParams::new(q, s.agents())?), ..base })))
            .collect::<Result<_>>()?,
        TopologyChoice::Independent => vec![(None, TrialConfig { topology: TrialConfig::independent(behavior).topology, ..base })],
    };

    let dir = out_dir(s)?;
    let records_path = dir.join("records.csv");
    let file = File::create(&records_path).with_context(|| format!("creating {}", records_path.display()))?;
    let mut writer = RecordWriter::new(BufWriter::new(file))?;
    let mut summaries = Vec::new();
    let mut offset = 0;
    for (arm, (q, config)) in configs.into_iter().enumerate() {
        let seed = arm_seed(s.seed(), arm as u64);
        let summary = run_batch_streaming(&config, s.trials(), seed, s.parallelism(), |rec| {
            let mut rec = rec.clone();
            rec.trial_id += offset;
            writer.write(&rec)
        })?;
        offset += s.trials();
        summaries.push(ArmSummary { arm, q, seed, config, summary });
    }
    writer.finish()?;
    let summary_path = write(dir.join("summary.json"), to_json(&summaries)?)?;
    Ok(vec![records_path, summary_path])
}

#[derive(Serialize)]
struct Analysis {
    se_flavor: netlearn::ols::SeFlavor,
    sequential: Option<netlearn::repro::SequentialAnalysis>,
    independent: Option<netlearn::repro::IndependentAnalysis>,
}

fn analyze(input: Option<&Path>, report: Report, s: &Settings) -> Result<Vec<PathBuf>> {
    let dir = out_dir(s)?;
    if let Report::Figure1 = report {
        let (rows, _) = naive_rows(s)?;
        // round-trip through the reader so the CSV is known to be well formed
        let bytes = write_curve_csv(Vec::new(), &rows)?;
        read_curve_csv(&bytes[..])?;
        let mut written = vec![write(dir.join("figure1.csv"), bytes)?];
        if s.svg {
            written.push(write(dir.join("figure1.svg"), svg::curve_chart("Accuracy of naive agents", &rows))?);
        }
        return Ok(written);
    }
    let Some(input) = input else { bail!("--input is required for --report tables") };
    let file = File::open(input).with_context(|| format!("opening {}", input.display()))?;
    let records = read_records(std::io::BufReader::new(file)).with_context(|| format!("reading {}", input.display()))?;
    let params = s.signal()?;
    let se_flavor = s.se_flavor()?;
    let (sequential, independent) = analyze_records(&records, &params, se_flavor)?;

    let mut written = Vec::new();
    let mut tables = String::new();
    if let Some(a) = &sequential {
        tables.push_str(&density_table(&a.density));
        tables.push('\n');
        tables.push_str(&interaction_table(&a.interaction.regression));
        written.push(write(dir.join("table1.txt"), density_table(&a.density))?);
        written.push(write(dir.join("table4.txt"), interaction_table(&a.interaction.regression))?);
    }
    if let Some(a) = &independent {
        if !tables.is_empty() {
            tables.push('\n');
        }
        tables.push_str(&independent_table(&a.regression));
        written.push(write(dir.join("table5.txt"), independent_table(&a.regression))?);
    }
    let comparisons = compare_with_references(sequential.as_ref(), independent.as_ref(), &params);
    written.push(write(dir.join("reference.json"), to_json(&comparisons)?)?);
    written.push(write(dir.join("report.txt"), reference_report(&comparisons))?);
    written.insert(0, write(dir.join("analysis.json"), to_json(&Analysis { se_flavor, sequential, independent })?)?);
    eprint!("{tables}");
    Ok(written)
}

fn repro(records: bool, s: &Settings) -> Result<Vec<PathBuf>> {
    let base = out_dir(s)?;
    let stamp = chrono::Local::now().format("%Y%m%d-%H%M%S").to_string();
    let mut dir = base.join(format!("repro-{stamp}"));
    let mut n = 1;
    while dir.exists() {
        dir = base.join(format!("repro-{stamp}-{n}"));
        n += 1;
    }
    let config = ReproConfig {
        master_seed: s.seed(),
        trials_per_arm: s.trials(),
        signal: s.signal()?,
        n_agents: s.agents(),
        se_flavor: s.se_flavor()?,
        parallelism: s.parallelism(),
        write_records: records,
    };
    let mut written = repro_all(&dir, &config)?;
    if s.svg {
        let rows = read_curve_csv(File::open(dir.join("figure1.csv"))?)?;
        written.push(write(dir.join("figure1.svg"), svg::curve_chart("Accuracy of naive agents", &rows))?);
    }
    Ok(written)
}
