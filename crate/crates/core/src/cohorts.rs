//! Entry-year cohorts and their lifetime histograms.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::ingest::DurationModel;
use crate::tempgraph::{NodeActivity, TemporalEdge};
use crate::{exec, Error, Result};

pub const DEFAULT_MAX_LIFETIME: u32 = 60;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntityKind {
    Node,
    Edge,
}

impl fmt::Display for EntityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EntityKind::Node => "node",
            EntityKind::Edge => "edge",
        })
    }
}

/// Whether a pair's repeated collaborations form one lifetime or several.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EdgeLifetimeMode {
    /// One lifetime per pair, first creation to last removal.
    #[default]
    Merged,
    /// One lifetime per merged activity interval.
    PerCollab,
}

impl FromStr for EdgeLifetimeMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "merged" => Ok(EdgeLifetimeMode::Merged),
            "per-collab" | "per_collab" => Ok(EdgeLifetimeMode::PerCollab),
            other => Err(Error::Parameter(format!("unknown edge mode '{other}'"))),
        }
    }
}

impl fmt::Display for EdgeLifetimeMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EdgeLifetimeMode::Merged => "merged",
            EdgeLifetimeMode::PerCollab => "per-collab",
        })
    }
}

/// Entry cohort and whole-year lifetime of one entity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Lifetime {
    pub cohort: i32,
    pub dt: u32,
}

/// Round half up to the nearest integer.
pub fn round_half_up(x: f64) -> f64 {
    (x + 0.5).floor()
}

fn lifetime_from_span(entry: f64, end: f64) -> Lifetime {
    let dt = round_half_up(end - entry).max(0.0);
    Lifetime {
        cohort: entry.floor() as i32,
        dt: dt as u32,
    }
}

pub fn node_lifetime(activity: &NodeActivity) -> Result<Lifetime> {
    let NodeActivity {
        participant,
        first_entry,
        last_activity,
        ..
    } = *activity;
    if !(first_entry.is_finite() && last_activity.is_finite()) || first_entry > last_activity {
        return Err(Error::InvalidActivity {
            participant,
            first_entry,
            last_activity,
        });
    }
    Ok(lifetime_from_span(first_entry, last_activity))
}

/// Lifetimes of one edge, pushed onto `out`: one in merged mode, one per
/// interval otherwise.
pub fn edge_lifetimes(edge: &TemporalEdge<'_>, mode: EdgeLifetimeMode, out: &mut Vec<Lifetime>) {
    match mode {
        EdgeLifetimeMode::Merged => {
            out.push(lifetime_from_span(edge.first_creation(), edge.last_removal()))
        }
        EdgeLifetimeMode::PerCollab => out.extend(
            edge.intervals
                .iter()
                .map(|iv| lifetime_from_span(iv.creation, iv.removal)),
        ),
    }
}

/// Lifetime histogram of one cohort, `P(Δt | t₀)` up to normalization.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CohortTable {
    pub kind: EntityKind,
    pub cohort: i32,
    /// `histogram[dt]` counts lifetimes of `dt` whole years, `0..=max_lifetime`.
    pub histogram: Vec<u64>,
    pub total: u64,
    /// Lifetimes longer than `max_lifetime`; counted in `total` only.
    pub truncated: u64,
}

impl CohortTable {
    pub fn new(kind: EntityKind, cohort: i32, max_lifetime: u32) -> Self {
        CohortTable {
            kind,
            cohort,
            histogram: vec![0; max_lifetime as usize + 1],
            total: 0,
            truncated: 0,
        }
    }

    /// Builds a table straight from `(dt, count)` pairs.
    pub fn from_counts(
        kind: EntityKind,
        cohort: i32,
        max_lifetime: u32,
        counts: impl IntoIterator<Item = (u32, u64)>,
    ) -> Self {
        let mut t = Self::new(kind, cohort, max_lifetime);
        for (dt, c) in counts {
            t.add(dt, c);
        }
        t
    }

    pub fn max_lifetime(&self) -> u32 {
        (self.histogram.len() - 1) as u32
    }

    pub fn add(&mut self, dt: u32, count: u64) {
        self.total += count;
        match self.histogram.get_mut(dt as usize) {
            Some(slot) => *slot += count,
            None => self.truncated += count,
        }
    }

    /// Bins a raw lifetime in years, rounding half up.
    pub fn add_lifetime(&mut self, years: f64) {
        self.add(round_half_up(years) as u32, 1);
    }

    /// Adds another table of the same cohort and limit.
    pub fn merge(&mut self, other: &CohortTable) {
        debug_assert_eq!((self.kind, self.cohort), (other.kind, other.cohort));
        debug_assert_eq!(self.histogram.len(), other.histogram.len());
        for (a, b) in self.histogram.iter_mut().zip(&other.histogram) {
            *a += b;
        }
        self.total += other.total;
        self.truncated += other.truncated;
    }

    /// Lifetimes that made it into the histogram.
    pub fn in_range(&self) -> u64 {
        self.total - self.truncated
    }
}

const COHORT_CHUNK: usize = 1 << 16;

/// Buckets lifetimes by `(cohort, dt)`. Output is sorted by cohort year.
pub fn build_cohorts(kind: EntityKind, lifetimes: &[Lifetime], max_lifetime: u32) -> Vec<CohortTable> {
    assert!(max_lifetime >= 1, "max_lifetime must be at least one year");
    let partials = exec::map_chunks(lifetimes, COHORT_CHUNK, |_, chunk| {
        let mut local: BTreeMap<i32, CohortTable> = BTreeMap::new();
        for l in chunk {
            local
                .entry(l.cohort)
                .or_insert_with(|| CohortTable::new(kind, l.cohort, max_lifetime))
                .add(l.dt, 1);
        }
        local
    });
    let mut merged: BTreeMap<i32, CohortTable> = BTreeMap::new();
    for part in partials {
        for (year, table) in part {
            match merged.get_mut(&year) {
                Some(t) => t.merge(&table),
                None => {
                    merged.insert(year, table);
                }
            }
        }
    }
    merged.into_values().collect()
}

/// Node lifetimes for every participant that appears in at least one event.
pub fn node_lifetimes(nodes: &[NodeActivity]) -> Result<Vec<Lifetime>> {
    nodes
        .iter()
        .filter(|n| n.event_count > 0)
        .map(node_lifetime)
        .collect()
}

/// Largest Δt that still counts as a single-project participant under
/// `model`: the project duration rounded to whole years.
pub fn single_year_threshold(model: &DurationModel) -> u32 {
    round_half_up(model.tau_project) as u32
}

/// Per cohort, the share of lifetimes with `Δt <= threshold`, over all
/// lifetimes in the cohort including truncated ones. Empty cohorts are
/// skipped; only tables of `kind` are considered.
pub fn single_year_fraction(tables: &[CohortTable], kind: EntityKind, threshold: u32) -> Vec<(i32, f64)> {
    tables
        .iter()
        .filter(|t| t.kind == kind && t.total > 0)
        .map(|t| {
            let short: u64 = t.histogram.iter().take(threshold as usize + 1).sum();
            (t.cohort, short as f64 / t.total as f64)
        })
        .collect()
}

/// Writes one row per non-empty bucket: `kind, t0, dt, count`.
pub fn write_cohorts<W: Write>(out: W, tables: &[CohortTable]) -> Result<()> {
    let mut out = std::io::BufWriter::new(out);
    writeln!(out, "# collabspan {} cohort histograms", crate::VERSION)?;
    writeln!(out, "kind\tt0\tdt\tcount")?;
    for t in tables {
        for (dt, &c) in t.histogram.iter().enumerate() {
            if c > 0 {
                writeln!(out, "{}\t{}\t{}\t{}", t.kind, t.cohort, dt, c)?;
            }
        }
    }
    out.flush()?;
    Ok(())
}

/// Totals sidecar: `kind, t0, total, truncated, max_lifetime`.
pub fn write_cohort_totals<W: Write>(out: W, tables: &[CohortTable]) -> Result<()> {
    let mut out = std::io::BufWriter::new(out);
    writeln!(out, "# collabspan {} cohort totals", crate::VERSION)?;
    writeln!(out, "kind\tt0\ttotal\ttruncated\tmax_lifetime")?;
    for t in tables {
        writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}",
            t.kind,
            t.cohort,
            t.total,
            t.truncated,
            t.max_lifetime()
        )?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_single_year<W: Write>(out: W, series: &[(i32, f64)], threshold: u32) -> Result<()> {
    let mut out = std::io::BufWriter::new(out);
    writeln!(
        out,
        "# collabspan {} single-project fraction, dt <= {threshold}",
        crate::VERSION
    )?;
    writeln!(out, "t0\tfraction")?;
    for (t0, f) in series {
        writeln!(out, "{t0}\t{f}")?;
    }
    out.flush()?;
    Ok(())
}
