use std::fs::File;
use std::io::{BufReader, Read};
use std::path::{Path, PathBuf};

use anyhow::Context;
use collabspan_core::cohorts::{self, CohortTable, EntityKind};
use collabspan_core::fitting::{self, ParameterSeries};
use collabspan_core::ingest::{self, CollaborationEvent, DurationModel, EventReader, EventTable, IngestStats};
use collabspan_core::tempgraph::{self, TemporalGraph};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::RunConfig;

pub const COHORTS_FILE: &str = "cohorts.tsv";
pub const COHORT_TOTALS_FILE: &str = "cohort_totals.tsv";
pub const FITS_FILE: &str = "fits.tsv";
pub const SINGLE_YEAR_FILE: &str = "single_year.tsv";
pub const MANIFEST_FILE: &str = "manifest.toml";
pub const EDGES_FILE: &str = "edges.tsv";

/// Malformed rows echoed to stderr per input.
const REPORTED_ROW_ERRORS: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputRecord {
    pub path: PathBuf,
    pub sha256: String,
    pub bytes: u64,
    pub rows: u64,
    pub parsed: u64,
    pub malformed: u64,
    pub skipped_window: u64,
    pub deduplicated_rows: u64,
}

/// Ingested events plus per-input accounting.
pub struct Loaded {
    pub table: EventTable,
    pub inputs: Vec<InputRecord>,
}

fn sha256_file(path: &Path) -> anyhow::Result<(String, u64)> {
    let mut file = BufReader::new(File::open(path).with_context(|| format!("opening {}", path.display()))?);
    let mut hasher = Sha256::new();
    let mut buf = vec![0u8; 1 << 16];
    let mut bytes = 0u64;
    loop {
        let n = file.read(&mut buf).with_context(|| format!("reading {}", path.display()))?;
        if n == 0 {
            break;
        }
        bytes += n as u64;
        hasher.update(&buf[..n]);
    }
    Ok((format!("{:x}", hasher.finalize()), bytes))
}

/// Yields the events of one reader, parking the first fatal error.
struct Drain<'a, R: Read> {
    reader: &'a mut EventReader<R>,
    fatal: &'a mut Option<collabspan_core::Error>,
}

impl<R: Read> Iterator for Drain<'_, R> {
    type Item = CollaborationEvent;

    fn next(&mut self) -> Option<CollaborationEvent> {
        match self.reader.next()? {
            Ok(ev) => Some(ev),
            Err(e) => {
                *self.fatal = Some(e);
                None
            }
        }
    }
}

/// Reads every input into one event table.
pub fn load(config: &RunConfig) -> anyhow::Result<Loaded> {
    let mut readers = Vec::with_capacity(config.input.len());
    for path in &config.input {
        let file = File::open(path).with_context(|| format!("opening input {}", path.display()))?;
        let reader = ingest::read_events(file, config.format, &config.schema, config.window)
            .with_context(|| format!("reading input {}", path.display()))?;
        readers.push(reader);
    }

    let mut fatal: Vec<Option<collabspan_core::Error>> = (0..readers.len()).map(|_| None).collect();
    let table = EventTable::from_events(
        readers
            .iter_mut()
            .zip(fatal.iter_mut())
            .flat_map(|(reader, fatal)| Drain { reader, fatal }),
    );
    for (path, err) in config.input.iter().zip(fatal) {
        if let Some(e) = err {
            return Err(e).with_context(|| format!("reading input {}", path.display()));
        }
    }

    let mut inputs = Vec::with_capacity(readers.len());
    for (path, reader) in config.input.iter().zip(readers) {
        let stats: IngestStats = reader.into_stats();
        for err in stats.errors.iter().take(REPORTED_ROW_ERRORS) {
            eprintln!("warning: {}:{}: {}", path.display(), err.line, err.message);
        }
        if stats.malformed > REPORTED_ROW_ERRORS as u64 {
            eprintln!(
                "warning: {}: {} malformed rows in total",
                path.display(),
                stats.malformed
            );
        }
        let (sha256, bytes) = sha256_file(path)?;
        inputs.push(InputRecord {
            path: path.clone(),
            sha256,
            bytes,
            rows: stats.rows,
            parsed: stats.parsed,
            malformed: stats.malformed,
            skipped_window: stats.skipped_window,
            deduplicated_rows: stats.deduplicated_rows,
        });
    }
    Ok(Loaded { table, inputs })
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counters {
    pub events: u64,
    pub participants: u64,
    pub memberships: u64,
    pub edge_instances: u64,
    pub spilled_instances: u64,
    pub edges: u64,
    pub edge_intervals: u64,
    pub node_lifetimes: u64,
    pub edge_lifetimes: u64,
    pub node_cohorts: u64,
    pub edge_cohorts: u64,
    pub truncated_nodes: u64,
    pub truncated_edges: u64,
    pub fits: u64,
    pub fit_gaps: u64,
}

/// Results of one analysis, before anything is written.
pub struct Analysis {
    pub graph: TemporalGraph,
    pub node_tables: Vec<CohortTable>,
    pub edge_tables: Vec<CohortTable>,
    pub series: Vec<ParameterSeries>,
    pub single_year_threshold: u32,
    pub single_year: Vec<(i32, f64)>,
    pub counters: Counters,
}

impl Analysis {
    pub fn tables(&self) -> impl Iterator<Item = &CohortTable> {
        self.node_tables.iter().chain(&self.edge_tables)
    }

    pub fn series(&self, kind: EntityKind, variant: fitting::FitVariant) -> Option<&ParameterSeries> {
        self.series.iter().find(|s| s.kind == kind && s.variant == variant)
    }
}

/// Builds the temporal graph, cohort tables and fits under `model`.
pub fn analyze_table(table: &EventTable, config: &RunConfig, model: &DurationModel) -> anyhow::Result<Analysis> {
    let durations = table.durations(model);
    let graph = tempgraph::build_graph(table, &durations, &config.accumulator_config())?;
    drop(durations);

    let node_lifetimes = cohorts::node_lifetimes(&graph.nodes)?;
    let node_tables = cohorts::build_cohorts(EntityKind::Node, &node_lifetimes, config.max_lifetime);
    let mode = config.edge_mode;
    let edge_lifetimes = graph
        .edges
        .par_flat_map(|edge, out| cohorts::edge_lifetimes(&edge, mode, out));
    let edge_tables = cohorts::build_cohorts(EntityKind::Edge, &edge_lifetimes, config.max_lifetime);

    let all: Vec<CohortTable> = node_tables.iter().chain(&edge_tables).cloned().collect();
    let series = fitting::parameter_evolution(&all, &config.variants, &config.fit_config());
    let single_year_threshold = cohorts::single_year_threshold(model);
    let single_year = cohorts::single_year_fraction(&node_tables, EntityKind::Node, single_year_threshold);

    let counters = Counters {
        events: table.len() as u64,
        participants: table.participant_count() as u64,
        memberships: table.membership_count() as u64,
        edge_instances: graph.stats.instances,
        spilled_instances: graph.stats.spilled_instances,
        edges: graph.edges.len() as u64,
        edge_intervals: graph.edges.interval_count() as u64,
        node_lifetimes: node_lifetimes.len() as u64,
        edge_lifetimes: edge_lifetimes.len() as u64,
        node_cohorts: node_tables.len() as u64,
        edge_cohorts: edge_tables.len() as u64,
        truncated_nodes: node_tables.iter().map(|t| t.truncated).sum(),
        truncated_edges: edge_tables.iter().map(|t| t.truncated).sum(),
        fits: series.iter().map(|s| s.points.len() as u64).sum(),
        fit_gaps: series.iter().map(|s| s.gaps.len() as u64).sum(),
    };
    Ok(Analysis {
        graph,
        node_tables,
        edge_tables,
        series,
        single_year_threshold,
        single_year,
        counters,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Versions {
    pub collabspan: String,
    pub collabspan_core: String,
}

impl Default for Versions {
    fn default() -> Self {
        Versions {
            collabspan: env!("CARGO_PKG_VERSION").to_string(),
            collabspan_core: collabspan_core::VERSION.to_string(),
        }
    }
}

/// Everything needed to repeat a run: the config, input digests, counters
/// and tool versions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub command: String,
    pub versions: Versions,
    pub config: RunConfig,
    pub counters: Counters,
    pub inputs: Vec<InputRecord>,
}

fn create(dir: &Path, name: &str) -> anyhow::Result<File> {
    let path = dir.join(name);
    File::create(&path).with_context(|| format!("creating {}", path.display()))
}

/// Writes the cohort, fit and single-year tables plus the manifest to `dir`.
pub fn write_outputs(
    dir: &Path,
    loaded: &Loaded,
    config: &RunConfig,
    model: &DurationModel,
    analysis: &Analysis,
    command: &str,
) -> anyhow::Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating output directory {}", dir.display()))?;
    let tables: Vec<CohortTable> = analysis.tables().cloned().collect();
    cohorts::write_cohorts(create(dir, COHORTS_FILE)?, &tables)?;
    cohorts::write_cohort_totals(create(dir, COHORT_TOTALS_FILE)?, &tables)?;
    fitting::write_fits(create(dir, FITS_FILE)?, &analysis.series, &config.fit_config())?;
    cohorts::write_single_year(
        create(dir, SINGLE_YEAR_FILE)?,
        &analysis.single_year,
        analysis.single_year_threshold,
    )?;
    if config.export_edges {
        analysis.graph.edges.write_intervals(create(dir, EDGES_FILE)?, &loaded.table)?;
    }

    let mut recorded = config.clone();
    recorded.duration = *model;
    recorded.sweep = None;
    let manifest = Manifest {
        tool: "collabspan".into(),
        command: command.into(),
        versions: Versions::default(),
        config: recorded,
        counters: analysis.counters.clone(),
        inputs: loaded.inputs.clone(),
    };
    let text = toml::to_string(&manifest).context("serializing manifest")?;
    let path = dir.join(MANIFEST_FILE);
    std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

/// Ingest, analyze and write outputs under the config's own duration model.
pub fn cmd_analyze(config: &RunConfig) -> anyhow::Result<Analysis> {
    config.validate()?;
    let loaded = load(config)?;
    let analysis = analyze_table(&loaded.table, config, &config.duration)?;
    write_outputs(&config.out, &loaded, config, &config.duration, &analysis, "analyze")?;
    Ok(analysis)
}
