use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::{bail, Context};
use collabspan_core::cohorts::EntityKind;
use collabspan_core::fitting::FitVariant;
use collabspan_core::ingest::DurationModel;
use serde::{Deserialize, Serialize};

use crate::config::{RunConfig, SweepConfig};
use crate::pipeline::{analyze_table, load, write_outputs};

pub const SENSITIVITY_FILE: &str = "sensitivity.tsv";
pub const SUMMARY_FILE: &str = "sensitivity_summary.tsv";

/// Fitted shape per sweep point for one `(kind, variant, t0)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitivityRow {
    pub kind: EntityKind,
    pub variant: FitVariant,
    pub cohort: i32,
    /// One entry per sweep point, `None` where the cohort had no fit.
    pub k: Vec<Option<f64>>,
}

impl SensitivityRow {
    /// Largest `|k_i - k_j|` over sweep points with a fit.
    pub fn max_pairwise_dk(&self) -> Option<f64> {
        spread(self.k.iter().flatten().copied())
    }
}

/// Median shape per sweep point for one `(kind, variant)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitivitySummary {
    pub kind: EntityKind,
    pub variant: FitVariant,
    pub median_k: Vec<Option<f64>>,
}

impl SensitivitySummary {
    /// `median_k[i] - median_k[baseline]`.
    pub fn delta_vs_baseline(&self, baseline: usize) -> Vec<Option<f64>> {
        let base = self.median_k[baseline];
        self.median_k
            .iter()
            .map(|m| Some((*m)? - base?))
            .collect()
    }

    pub fn max_abs_delta(&self, baseline: usize) -> Option<f64> {
        self.delta_vs_baseline(baseline)
            .into_iter()
            .flatten()
            .map(f64::abs)
            .reduce(f64::max)
    }

    pub fn max_pairwise_dk(&self) -> Option<f64> {
        spread(self.median_k.iter().flatten().copied())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitivityReport {
    /// Duration-model labels, in sweep order.
    pub points: Vec<String>,
    /// Index of the config's own duration model in `points`.
    pub baseline: usize,
    pub rows: Vec<SensitivityRow>,
    pub summaries: Vec<SensitivitySummary>,
}

impl SensitivityReport {
    pub fn summary(&self, kind: EntityKind, variant: FitVariant) -> Option<&SensitivitySummary> {
        self.summaries.iter().find(|s| s.kind == kind && s.variant == variant)
    }
}

fn spread(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    (lo <= hi).then_some(hi - lo)
}

fn median(mut v: Vec<f64>) -> Option<f64> {
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Some(if n % 2 == 1 { v[n / 2] } else { 0.5 * (v[n / 2 - 1] + v[n / 2]) })
}

/// Duration models of a sweep. The config's own model comes first and is
/// the baseline, unless the sweep already contains it.
pub fn sweep_models(config: &RunConfig, sweep: &SweepConfig) -> anyhow::Result<(Vec<DurationModel>, usize)> {
    let mut models = Vec::new();
    for &tau in &sweep.taus {
        models.push(DurationModel::fixed(tau)?);
    }
    for g in &sweep.gaussian {
        models.push(DurationModel::gaussian(g.tau, g.sigma, config.duration.seed)?);
    }
    if models.len() < 2 {
        bail!("a sensitivity sweep needs at least two duration models, got {}", models.len());
    }
    let baseline = match models.iter().position(|m| *m == config.duration) {
        Some(i) => i,
        None => {
            models.insert(0, config.duration);
            0
        }
    };
    Ok((models, baseline))
}

/// Subdirectory name for one sweep point.
pub fn point_dir(label: &str) -> String {
    label.replace(':', "-")
}

/// Runs the analysis once per duration model, writing each run's outputs to
/// its own subdirectory, and tabulates the fitted shapes.
pub fn cmd_sensitivity(config: &RunConfig, sweep: &SweepConfig) -> anyhow::Result<SensitivityReport> {
    config.validate()?;
    let (models, baseline) = sweep_models(config, sweep)?;
    let loaded = load(config)?;

    let weibull: Vec<FitVariant> = config
        .variants
        .iter()
        .copied()
        .filter(|v| *v != FitVariant::Powerlaw)
        .collect();
    let mut by_key: BTreeMap<(EntityKind, FitVariant, i32), Vec<Option<f64>>> = BTreeMap::new();
    let mut labels = Vec::with_capacity(models.len());
    for (i, model) in models.iter().enumerate() {
        let label = model.label();
        let analysis = analyze_table(&loaded.table, config, model)?;
        write_outputs(
            &config.out.join(point_dir(&label)),
            &loaded,
            config,
            model,
            &analysis,
            "sensitivity",
        )?;
        for s in analysis.series.iter().filter(|s| weibull.contains(&s.variant)) {
            for (cohort, k) in s.shape_series() {
                by_key
                    .entry((s.kind, s.variant, cohort))
                    .or_insert_with(|| vec![None; models.len()])[i] = Some(k);
            }
        }
        labels.push(label);
    }

    let rows: Vec<SensitivityRow> = by_key
        .into_iter()
        .map(|((kind, variant, cohort), k)| SensitivityRow {
            kind,
            variant,
            cohort,
            k,
        })
        .collect();
    let mut summaries = Vec::new();
    for kind in [EntityKind::Node, EntityKind::Edge] {
        for &variant in &weibull {
            let group: Vec<&SensitivityRow> = rows.iter().filter(|r| r.kind == kind && r.variant == variant).collect();
            if group.is_empty() {
                continue;
            }
            let median_k = (0..models.len())
                .map(|i| median(group.iter().filter_map(|r| r.k[i]).collect()))
                .collect();
            summaries.push(SensitivitySummary {
                kind,
                variant,
                median_k,
            });
        }
    }
    let report = SensitivityReport {
        points: labels,
        baseline,
        rows,
        summaries,
    };
    write_report(&config.out, &report)?;
    Ok(report)
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn write_report(dir: &Path, report: &SensitivityReport) -> anyhow::Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let base = &report.points[report.baseline];

    let path = dir.join(SENSITIVITY_FILE);
    let mut out = BufWriter::new(File::create(&path).with_context(|| format!("creating {}", path.display()))?);
    writeln!(
        out,
        "# collabspan {} sensitivity; fitted k per duration model; baseline {base}",
        env!("CARGO_PKG_VERSION")
    )?;
    let cols: Vec<String> = report.points.iter().map(|p| format!("k[{p}]")).collect();
    writeln!(out, "kind\tvariant\tt0\t{}\tmax_pairwise_dk", cols.join("\t"))?;
    for r in &report.rows {
        let ks: Vec<String> = r.k.iter().map(|k| opt(*k)).collect();
        writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}",
            r.kind,
            r.variant,
            r.cohort,
            ks.join("\t"),
            opt(r.max_pairwise_dk())
        )?;
    }
    out.flush()?;

    let path = dir.join(SUMMARY_FILE);
    let mut out = BufWriter::new(File::create(&path).with_context(|| format!("creating {}", path.display()))?);
    writeln!(
        out,
        "# collabspan {} sensitivity summary; median of per-cohort k; delta against {base}",
        env!("CARGO_PKG_VERSION")
    )?;
    writeln!(out, "kind\tvariant\tduration_model\tmedian_k\tdelta_k")?;
    for s in &report.summaries {
        let deltas = s.delta_vs_baseline(report.baseline);
        for (i, label) in report.points.iter().enumerate() {
            writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}",
                s.kind,
                s.variant,
                label,
                opt(s.median_k[i]),
                opt(deltas[i])
            )?;
        }
    }
    out.flush()?;
    Ok(())
}
