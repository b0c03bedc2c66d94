use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use collabspan_core::cohorts::{EdgeLifetimeMode, DEFAULT_MAX_LIFETIME};
use collabspan_core::fitting::{FitConfig, FitVariant, DEFAULT_MIN_SAMPLES, DEFAULT_XMIN};
use collabspan_core::ingest::{DurationModel, InputFormat, Schema, YearWindow};
use collabspan_core::tempgraph::AccumulatorConfig;
use serde::{Deserialize, Serialize};

/// Everything an analysis run depends on. Run-local settings (output
/// directory, thread count, spill location) are not serialized, so the
/// manifest of two runs differing only in those is identical.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub input: Vec<PathBuf>,
    pub format: InputFormat,
    pub max_lifetime: u32,
    pub min_samples: u64,
    pub xmin: u32,
    /// Index of the point dropped by the excluded-central Weibull variant,
    /// replacing the log-midpoint rule.
    pub central_index: Option<usize>,
    pub edge_mode: EdgeLifetimeMode,
    pub variants: Vec<FitVariant>,
    /// Edge instances buffered before spilling partitions to disk.
    pub memory_limit_instances: Option<usize>,
    /// Also write every merged edge interval to `edges.tsv`.
    pub export_edges: bool,
    #[serde(skip_serializing)]
    pub out: PathBuf,
    #[serde(skip_serializing)]
    pub threads: Option<usize>,
    #[serde(skip_serializing)]
    pub spill_dir: Option<PathBuf>,
    pub schema: Schema,
    pub duration: DurationModel,
    pub window: YearWindow,
    pub sweep: Option<SweepConfig>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            input: Vec::new(),
            format: InputFormat::Delimited,
            max_lifetime: DEFAULT_MAX_LIFETIME,
            min_samples: DEFAULT_MIN_SAMPLES,
            xmin: DEFAULT_XMIN,
            central_index: None,
            edge_mode: EdgeLifetimeMode::default(),
            variants: FitVariant::ALL.to_vec(),
            memory_limit_instances: None,
            export_edges: false,
            out: PathBuf::from("out"),
            threads: None,
            spill_dir: None,
            schema: Schema::default(),
            duration: DurationModel::default(),
            window: YearWindow::default(),
            sweep: None,
        }
    }
}

/// Duration models for a sensitivity sweep.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    /// Fixed durations, in years.
    pub taus: Vec<f64>,
    pub gaussian: Vec<GaussianPoint>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaussianPoint {
    pub tau: f64,
    pub sigma: f64,
}

impl RunConfig {
    /// Loads a config file. A run manifest is accepted too; its `config`
    /// table is used.
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let mut value: toml::Table =
            toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
        if value.contains_key("tool") {
            value = match value.remove("config") {
                Some(toml::Value::Table(t)) => t,
                _ => bail!("manifest {} has no [config] table", path.display()),
            };
        }
        let config: RunConfig = toml::Value::Table(value)
            .try_into()
            .with_context(|| format!("invalid config {}", path.display()))?;
        Ok(config)
    }

    /// Checks numeric fields and that every input exists.
    pub fn validate(&self) -> anyhow::Result<()> {
        DurationModel::new(
            self.duration.kind,
            self.duration.tau_project,
            self.duration.sigma,
            self.duration.seed,
        )?;
        YearWindow::new(self.window.min, self.window.max)?;
        if self.max_lifetime < 1 {
            bail!("max_lifetime must be at least 1");
        }
        if self.variants.is_empty() {
            bail!("no fit variants selected");
        }
        if self.threads == Some(0) {
            bail!("--threads must be at least 1");
        }
        if self.memory_limit_instances == Some(0) {
            bail!("memory limit must be positive");
        }
        if self.input.is_empty() {
            bail!("no input files given");
        }
        for path in &self.input {
            if !path.is_file() {
                bail!("input file not found: {}", path.display());
            }
        }
        Ok(())
    }

    pub fn fit_config(&self) -> FitConfig {
        FitConfig {
            min_samples: self.min_samples,
            xmin: self.xmin,
            central_index: self.central_index,
        }
    }

    pub fn accumulator_config(&self) -> AccumulatorConfig {
        AccumulatorConfig {
            memory_limit_instances: self.memory_limit_instances,
            spill_dir: self.spill_dir.clone(),
            ..AccumulatorConfig::default()
        }
    }
}
