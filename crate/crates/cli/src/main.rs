use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use collabspan::{cmd_analyze, cmd_generate, cmd_sensitivity, with_threads, GaussianPoint, RunConfig};
use collabspan_core::cohorts::EdgeLifetimeMode;
use collabspan_core::fitting::FitVariant;
use collabspan_core::ingest::{DurationKind, InputFormat, Schema, YearWindow};
use collabspan_core::synth::CohortSchedule;

#[derive(Parser)]
#[command(name = "collabspan", version, about = "Cohort lifetime analysis of collaboration networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a synthetic event file from a cohort schedule.
    Generate(GenerateArgs),
    /// Build cohort tables and fits from event files.
    Analyze(AnalyzeArgs),
    /// Repeat the analysis over several project-duration models.
    Sensitivity(SensitivityArgs),
}

#[derive(Args)]
struct GenerateArgs {
    /// Cohort schedule (TOML).
    #[arg(long)]
    schedule: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Event file to write.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value = "delimited")]
    format: InputFormat,
    /// Also write per-participant ground truth to this file.
    #[arg(long)]
    truth: Option<PathBuf>,
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args)]
struct AnalysisFlags {
    /// TOML config; a run manifest also works. Flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Event file; repeat for several.
    #[arg(long)]
    input: Vec<PathBuf>,
    /// delimited or json_lines.
    #[arg(long)]
    format: Option<InputFormat>,
    #[arg(long)]
    tau_project: Option<f64>,
    /// fixed or gaussian.
    #[arg(long)]
    duration_model: Option<DurationKind>,
    #[arg(long)]
    sigma: Option<f64>,
    /// Seed for gaussian durations.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    max_lifetime: Option<u32>,
    #[arg(long)]
    min_samples: Option<u64>,
    #[arg(long)]
    xmin: Option<u32>,
    /// Point index dropped by weibull-excl-central instead of the
    /// log-midpoint.
    #[arg(long)]
    central_index: Option<usize>,
    /// merged or per-collab.
    #[arg(long)]
    edge_mode: Option<EdgeLifetimeMode>,
    /// Comma-separated: powerlaw,weibull,weibull-excl-central.
    #[arg(long)]
    variants: Option<String>,
    /// Completion-year window as min:max.
    #[arg(long)]
    window: Option<YearWindow>,
    #[arg(long)]
    threads: Option<usize>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Edge instances held in memory before spilling to disk.
    #[arg(long)]
    memory_limit: Option<usize>,
    #[arg(long)]
    spill_dir: Option<PathBuf>,
    /// Also write merged edge intervals.
    #[arg(long)]
    export_edges: bool,
    #[arg(long)]
    project_column: Option<String>,
    #[arg(long)]
    year_column: Option<String>,
    #[arg(long)]
    members_column: Option<String>,
    #[arg(long)]
    delimiter: Option<char>,
    #[arg(long)]
    list_separator: Option<char>,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    flags: AnalysisFlags,
}

#[derive(Args)]
struct SensitivityArgs {
    #[command(flatten)]
    flags: AnalysisFlags,
    /// Fixed durations to sweep, comma-separated years.
    #[arg(long, value_delimiter = ',')]
    taus: Vec<f64>,
    /// Gaussian durations as tau:sigma; comma-separated or repeated.
    #[arg(long, value_delimiter = ',', value_parser = parse_gaussian)]
    gaussian: Vec<GaussianPoint>,
}

fn parse_gaussian(s: &str) -> Result<GaussianPoint, String> {
    let (tau, sigma) = s.split_once(':').ok_or_else(|| format!("expected tau:sigma, got '{s}'"))?;
    let parse = |v: &str| v.trim().parse::<f64>().map_err(|e| format!("'{v}': {e}"));
    Ok(GaussianPoint {
        tau: parse(tau)?,
        sigma: parse(sigma)?,
    })
}

impl AnalysisFlags {
    fn resolve(self) -> anyhow::Result<RunConfig> {
        let mut c = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        if !self.input.is_empty() {
            c.input = self.input;
        }
        if let Some(v) = self.format {
            c.format = v;
        }
        if let Some(v) = self.tau_project {
            c.duration.tau_project = v;
        }
        if let Some(v) = self.duration_model {
            c.duration.kind = v;
        }
        if let Some(v) = self.sigma {
            c.duration.sigma = v;
        }
        if let Some(v) = self.seed {
            c.duration.seed = v;
        }
        if let Some(v) = self.max_lifetime {
            c.max_lifetime = v;
        }
        if let Some(v) = self.min_samples {
            c.min_samples = v;
        }
        if let Some(v) = self.xmin {
            c.xmin = v;
        }
        if self.central_index.is_some() {
            c.central_index = self.central_index;
        }
        if let Some(v) = self.edge_mode {
            c.edge_mode = v;
        }
        if let Some(v) = self.variants {
            c.variants = FitVariant::parse_list(&v)?;
        }
        if let Some(v) = self.window {
            c.window = v;
        }
        if self.threads.is_some() {
            c.threads = self.threads;
        }
        if let Some(v) = self.out {
            c.out = v;
        }
        if self.memory_limit.is_some() {
            c.memory_limit_instances = self.memory_limit;
        }
        if self.spill_dir.is_some() {
            c.spill_dir = self.spill_dir;
        }
        c.export_edges |= self.export_edges;
        let Schema {
            project,
            year,
            members,
            delimiter,
            list_separator,
        } = &mut c.schema;
        if let Some(v) = self.project_column {
            *project = v;
        }
        if let Some(v) = self.year_column {
            *year = v;
        }
        if let Some(v) = self.members_column {
            *members = v;
        }
        if let Some(v) = self.delimiter {
            *delimiter = v;
        }
        if let Some(v) = self.list_separator {
            *list_separator = v;
        }
        Ok(c)
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Generate(args) => {
            let text = std::fs::read_to_string(&args.schedule)
                .with_context(|| format!("reading schedule {}", args.schedule.display()))?;
            let schedule = CohortSchedule::from_toml(&text)
                .with_context(|| format!("invalid schedule {}", args.schedule.display()))?;
            let dataset = with_threads(args.threads, || {
                cmd_generate(
                    &schedule,
                    args.seed,
                    &args.out,
                    args.format,
                    &Schema::default(),
                    args.truth.as_deref(),
                )
            })??;
            eprintln!(
                "wrote {} events for {} participants to {}",
                dataset.stats.events,
                dataset.stats.participants,
                args.out.display()
            );
        }
        Command::Analyze(args) => {
            let config = args.flags.resolve()?;
            let analysis = with_threads(config.threads, || cmd_analyze(&config))??;
            let c = &analysis.counters;
            eprintln!(
                "{} events, {} participants, {} edges; {} node and {} edge cohorts; {} fits, {} gaps; outputs in {}",
                c.events,
                c.participants,
                c.edges,
                c.node_cohorts,
                c.edge_cohorts,
                c.fits,
                c.fit_gaps,
                config.out.display()
            );
        }
        Command::Sensitivity(args) => {
            let config = args.flags.resolve()?;
            let mut sweep = config.sweep.clone().unwrap_or_default();
            if !args.taus.is_empty() {
                sweep.taus = args.taus;
            }
            if !args.gaussian.is_empty() {
                sweep.gaussian = args.gaussian;
            }
            let report = with_threads(config.threads, || cmd_sensitivity(&config, &sweep))??;
            for s in &report.summaries {
                let fmt = |v: Option<f64>| v.map_or("-".to_string(), |x| format!("{x:.4}"));
                eprintln!(
                    "{} {}: max |dk| vs {} = {}, spread = {}",
                    s.kind,
                    s.variant,
                    report.points[report.baseline],
                    fmt(s.max_abs_delta(report.baseline)),
                    fmt(s.max_pairwise_dk())
                );
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
