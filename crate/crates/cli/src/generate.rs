use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::Context;
use collabspan_core::ingest::{InputFormat, Schema};
use collabspan_core::synth::{self, CohortSchedule, GenerateStats, GeneratedDataset};
use serde::{Deserialize, Serialize};

use crate::pipeline::Versions;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerateManifest {
    pub tool: String,
    pub command: String,
    pub seed: u64,
    pub format: InputFormat,
    pub output: PathBuf,
    pub versions: Versions,
    pub stats: GenerateStats,
    pub schema: Schema,
    pub schedule: CohortSchedule,
}

/// Path of the manifest written next to a generated event file.
pub fn manifest_path(output: &Path) -> PathBuf {
    let mut name = output.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".manifest.toml");
    output.with_file_name(name)
}

/// Generates a dataset from `schedule` and writes the events, a manifest
/// and, when `truth` is given, the per-participant ground truth.
pub fn cmd_generate(
    schedule: &CohortSchedule,
    seed: u64,
    output: &Path,
    format: InputFormat,
    schema: &Schema,
    truth: Option<&Path>,
) -> anyhow::Result<GeneratedDataset> {
    let dataset = synth::generate_dataset(schedule, seed)?;
    if let Some(dir) = output.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    let file = File::create(output).with_context(|| format!("creating {}", output.display()))?;
    dataset
        .write(file, format, schema)
        .with_context(|| format!("writing {}", output.display()))?;

    if let Some(path) = truth {
        write_truth(path, &dataset)?;
    }

    let manifest = GenerateManifest {
        tool: "collabspan".into(),
        command: "generate".into(),
        seed,
        format,
        output: output.to_path_buf(),
        versions: Versions::default(),
        stats: dataset.stats.clone(),
        schema: schema.clone(),
        schedule: schedule.clone(),
    };
    let path = manifest_path(output);
    std::fs::write(&path, toml::to_string(&manifest).context("serializing manifest")?)
        .with_context(|| format!("writing {}", path.display()))?;
    Ok(dataset)
}

fn write_truth(path: &Path, dataset: &GeneratedDataset) -> anyhow::Result<()> {
    let mut out = BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?);
    writeln!(
        out,
        "# collabspan {} synthetic ground truth; lifetime as drawn, career as placed",
        env!("CARGO_PKG_VERSION")
    )?;
    writeln!(out, "participant\tcohort\tstart\tlifetime\tcareer")?;
    for (id, p) in dataset.participants.iter().enumerate() {
        writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}",
            synth::participant_name(id as u32),
            p.cohort,
            p.start,
            p.lifetime,
            p.career
        )?;
    }
    out.flush()?;
    Ok(())
}
