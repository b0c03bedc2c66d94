//! Synthetic collaboration datasets with known lifetime laws.
//!
//! Each cohort year introduces a number of participants whose career length
//! is drawn from the cohort's law. A participant leads an event at the start
//! and at the end of the career, plus a Poisson number of events placed
//! uniformly in between. Co-members are drawn from participants whose careers
//! cover the event time, so they never move anyone's first or last activity.

use std::io::Write;

use rand::distr::{Distribution, Open01};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Poisson;
use serde::{Deserialize, Serialize};

use crate::ingest::{self, CollaborationEvent, InputFormat, Schema};
use crate::{exec, Error, Result};

pub const DEFAULT_MAX_CAREER: f64 = 80.0;

/// Largest value tabulated exactly by [`DiscretePowerLaw`].
const POWERLAW_TABLE_MAX: u64 = 100_000;
/// Draws attempted per co-member slot before the slot is given up.
const MEMBER_ATTEMPTS: usize = 32;

/// Inverse of the Weibull CDF.
pub fn sample_weibull(k: f64, lambda: f64, u: f64) -> f64 {
    debug_assert!(u > 0.0 && u < 1.0, "u must lie in (0, 1), got {u}");
    lambda * (-(-u).ln_1p()).powf(1.0 / k)
}

/// Discrete power law `P(x) ∝ x^-α` on `x >= xmin`, sampled by inverse
/// transform over a tabulated CDF. Beyond the table the tail follows the
/// continuous approximation.
#[derive(Debug, Clone)]
pub struct DiscretePowerLaw {
    alpha: f64,
    xmin: u64,
    cdf: Vec<f64>,
}

impl DiscretePowerLaw {
    pub fn new(alpha: f64, xmin: u64) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 1.0) || xmin == 0 {
            return Err(Error::Parameter(format!(
                "power law needs alpha > 1 and xmin >= 1, got alpha={alpha}, xmin={xmin}"
            )));
        }
        let top = POWERLAW_TABLE_MAX.max(xmin * 10);
        let mut cdf = Vec::with_capacity((top - xmin + 1) as usize);
        let mut acc = 0.0;
        for x in xmin..=top {
            acc += (x as f64).powf(-alpha);
            cdf.push(acc);
        }
        let tail = (top as f64 + 0.5).powf(1.0 - alpha) / (alpha - 1.0);
        let norm = acc + tail;
        for c in &mut cdf {
            *c /= norm;
        }
        Ok(DiscretePowerLaw { alpha, xmin, cdf })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn xmin(&self) -> u64 {
        self.xmin
    }

    pub fn sample(&self, u: f64) -> u64 {
        let last = *self.cdf.last().expect("table is non-empty");
        if u <= last {
            let i = self.cdf.partition_point(|&c| c < u);
            return self.xmin + i as u64;
        }
        // Continuous tail above the table edge.
        let top = self.xmin + self.cdf.len() as u64 - 1;
        let rest = (1.0 - u) / (1.0 - last);
        let x = (top as f64 + 0.5) * rest.powf(-1.0 / (self.alpha - 1.0));
        (x + 0.5).floor().max(top as f64 + 1.0) as u64
    }
}

/// Distribution of career lengths for one cohort, in years.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case")]
pub enum LifetimeLaw {
    Weibull { k: f64, lambda: f64 },
    Powerlaw { alpha: f64, xmin: u64 },
    /// Every career lasts exactly `years`.
    Fixed { years: f64 },
}

impl LifetimeLaw {
    pub fn validate(&self) -> Result<()> {
        match *self {
            LifetimeLaw::Weibull { k, lambda } => {
                crate::fitting::WeibullParams::new(k, lambda)?;
            }
            LifetimeLaw::Powerlaw { alpha, xmin } => {
                if !(alpha.is_finite() && alpha > 1.0) || xmin == 0 {
                    return Err(Error::Schedule(format!(
                        "power law needs alpha > 1 and xmin >= 1, got alpha={alpha}, xmin={xmin}"
                    )));
                }
            }
            LifetimeLaw::Fixed { years } => {
                if !(years.is_finite() && years >= 0.0) {
                    return Err(Error::Schedule(format!("fixed lifetime must be >= 0, got {years}")));
                }
            }
        }
        Ok(())
    }
}

enum Sampler {
    Weibull { k: f64, lambda: f64 },
    Powerlaw(DiscretePowerLaw),
    Fixed(f64),
}

impl Sampler {
    fn new(law: &LifetimeLaw) -> Result<Self> {
        Ok(match *law {
            LifetimeLaw::Weibull { k, lambda } => Sampler::Weibull { k, lambda },
            LifetimeLaw::Powerlaw { alpha, xmin } => Sampler::Powerlaw(DiscretePowerLaw::new(alpha, xmin)?),
            LifetimeLaw::Fixed { years } => Sampler::Fixed(years),
        })
    }

    fn sample(&self, u: f64) -> f64 {
        match self {
            Sampler::Weibull { k, lambda } => sample_weibull(*k, *lambda, u),
            Sampler::Powerlaw(p) => p.sample(u) as f64,
            Sampler::Fixed(y) => *y,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CohortSpec {
    pub year: i32,
    pub new_nodes: u64,
    pub law: LifetimeLaw,
    #[serde(default = "default_team_size")]
    pub mean_team_size: f64,
    #[serde(default)]
    pub events_per_node_year: f64,
}

fn default_team_size() -> f64 {
    1.0
}

fn default_max_career() -> f64 {
    DEFAULT_MAX_CAREER
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CohortSchedule {
    #[serde(rename = "cohort")]
    pub cohorts: Vec<CohortSpec>,
    /// Careers are cut at this length when events are placed; the drawn
    /// lifetime is kept as ground truth.
    #[serde(default = "default_max_career")]
    pub max_career: f64,
    /// Draw the `i`-th of `n` uniforms from `[i/n, (i+1)/n)` instead of
    /// independently, which removes most sampling noise from the realized
    /// distribution.
    #[serde(default)]
    pub stratified: bool,
}

impl CohortSchedule {
    pub fn new(cohorts: Vec<CohortSpec>) -> Self {
        CohortSchedule {
            cohorts,
            max_career: DEFAULT_MAX_CAREER,
            stratified: false,
        }
    }

    /// One cohort of `n` participants per year, with team size one and no
    /// interior events.
    pub fn per_year(years: impl IntoIterator<Item = i32>, n: u64, law: impl Fn(i32) -> LifetimeLaw) -> Self {
        Self::new(
            years
                .into_iter()
                .map(|year| CohortSpec {
                    year,
                    new_nodes: n,
                    law: law(year),
                    mean_team_size: 1.0,
                    events_per_node_year: 0.0,
                })
                .collect(),
        )
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.max_career.is_finite() && self.max_career > 0.0) {
            return Err(Error::Schedule(format!("max_career must be positive, got {}", self.max_career)));
        }
        let mut years: Vec<i32> = self.cohorts.iter().map(|c| c.year).collect();
        years.sort_unstable();
        if let Some(w) = years.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::Schedule(format!("cohort year {} appears twice", w[0])));
        }
        let total: u64 = self.cohorts.iter().map(|c| c.new_nodes).sum();
        if total > u32::MAX as u64 {
            return Err(Error::Schedule(format!("{total} participants exceed the id space")));
        }
        for c in &self.cohorts {
            c.law.validate()?;
            if !(c.mean_team_size.is_finite() && c.mean_team_size >= 1.0) {
                return Err(Error::Schedule(format!(
                    "cohort {}: mean_team_size must be >= 1, got {}",
                    c.year, c.mean_team_size
                )));
            }
            if !(c.events_per_node_year.is_finite() && c.events_per_node_year >= 0.0) {
                return Err(Error::Schedule(format!(
                    "cohort {}: events_per_node_year must be >= 0, got {}",
                    c.year, c.events_per_node_year
                )));
            }
        }
        Ok(())
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let s: CohortSchedule = toml::from_str(text).map_err(|e| Error::Schedule(e.to_string()))?;
        s.validate()?;
        Ok(s)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Schedule(e.to_string()))
    }
}

/// Ground truth for one synthetic participant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SyntheticParticipant {
    pub cohort: i32,
    /// Time of the first event.
    pub start: f64,
    /// Lifetime drawn from the cohort's law.
    pub lifetime: f64,
    /// Span between first and last event: the lifetime capped at
    /// `max_career`.
    pub career: f64,
}

impl SyntheticParticipant {
    pub fn end(&self) -> f64 {
        self.start + self.career
    }

    fn active_at(&self, t: f64) -> bool {
        self.start <= t && t <= self.end()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenerateStats {
    pub participants: u64,
    pub events: u64,
    pub memberships: u64,
    /// Events emitted with fewer members than drawn because too few
    /// participants were active.
    pub reduced_teams: u64,
}

/// Draws every participant's lifetime and start time without placing events.
pub fn sample_participants(schedule: &CohortSchedule, seed: u64) -> Result<Vec<SyntheticParticipant>> {
    schedule.validate()?;
    let per_cohort = exec::map(&schedule.cohorts, |spec| -> Result<Vec<SyntheticParticipant>> {
        let sampler = Sampler::new(&spec.law)?;
        let mut rng = cohort_rng(seed, spec.year, 0);
        let n = spec.new_nodes;
        Ok((0..n)
            .map(|i| {
                let u: f64 = rng.sample(Open01);
                let u = if schedule.stratified {
                    ((i as f64 + u) / n as f64).clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON)
                } else {
                    u
                };
                let lifetime = sampler.sample(u);
                let start = spec.year as f64 + rng.random::<f64>();
                SyntheticParticipant {
                    cohort: spec.year,
                    start,
                    lifetime,
                    career: lifetime.min(schedule.max_career),
                }
            })
            .collect())
    });
    let mut out = Vec::new();
    for part in per_cohort {
        out.extend(part?);
    }
    Ok(out)
}

/// A generated event stream, stored compactly. Participant `i` is named
/// [`participant_name`]`(i)`; event `j` has project id `s{j}`.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedDataset {
    pub participants: Vec<SyntheticParticipant>,
    pub stats: GenerateStats,
    times: Vec<f64>,
    member_offsets: Vec<usize>,
    members: Vec<u32>,
}

pub fn participant_name(id: u32) -> String {
    format!("n{id}")
}

impl GeneratedDataset {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn time(&self, i: usize) -> f64 {
        self.times[i]
    }

    pub fn members(&self, i: usize) -> &[u32] {
        &self.members[self.member_offsets[i]..self.member_offsets[i + 1]]
    }

    pub fn event(&self, i: usize) -> CollaborationEvent {
        CollaborationEvent {
            project_id: format!("s{i}"),
            completion_year: self.times[i],
            participants: self.members(i).iter().map(|&m| participant_name(m)).collect(),
        }
    }

    pub fn events(&self) -> impl Iterator<Item = CollaborationEvent> + '_ {
        (0..self.len()).map(|i| self.event(i))
    }

    /// Writes the stream in any format ingest reads.
    pub fn write<W: Write>(&self, out: W, format: InputFormat, schema: &Schema) -> Result<()> {
        // Events are materialized in blocks to keep string allocation bounded.
        let mut out = std::io::BufWriter::new(out);
        let block = 1 << 16;
        let mut start = 0;
        let mut first = true;
        while start < self.len() || first {
            let end = (start + block).min(self.len());
            let chunk: Vec<CollaborationEvent> = (start..end).map(|i| self.event(i)).collect();
            match format {
                InputFormat::JsonLines => ingest::write_events(&mut out, format, schema, &chunk)?,
                InputFormat::Delimited => {
                    if first {
                        ingest::write_events(&mut out, format, schema, &chunk)?;
                    } else {
                        write_delimited_rows(&mut out, schema, &chunk)?;
                    }
                }
            }
            first = false;
            start = end;
        }
        out.flush()?;
        Ok(())
    }
}

fn write_delimited_rows<W: Write>(out: W, schema: &Schema, events: &[CollaborationEvent]) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .delimiter(schema.delimiter as u8)
        .has_headers(false)
        .from_writer(out);
    let sep = schema.list_separator.to_string();
    for ev in events {
        w.write_record([
            ev.project_id.as_str(),
            &ev.completion_year.to_string(),
            &ev.participants.join(&sep),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn cohort_rng(seed: u64, year: i32, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (year as i64 as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    rng.set_stream(stream);
    rng
}

/// Participants whose careers touch each calendar year.
struct ActiveIndex {
    first_year: i64,
    offsets: Vec<usize>,
    ids: Vec<u32>,
}

impl ActiveIndex {
    fn new(participants: &[SyntheticParticipant]) -> Self {
        if participants.is_empty() {
            return ActiveIndex {
                first_year: 0,
                offsets: vec![0],
                ids: Vec::new(),
            };
        }
        let span = |p: &SyntheticParticipant| (p.start.floor() as i64, p.end().floor() as i64);
        let first_year = participants.iter().map(|p| span(p).0).min().unwrap();
        let last_year = participants.iter().map(|p| span(p).1).max().unwrap();
        let years = (last_year - first_year + 1) as usize;
        let mut counts = vec![0usize; years + 1];
        for p in participants {
            let (a, b) = span(p);
            for y in a..=b {
                counts[(y - first_year) as usize + 1] += 1;
            }
        }
        for i in 1..counts.len() {
            counts[i] += counts[i - 1];
        }
        let offsets = counts.clone();
        let mut fill = counts;
        let mut ids = vec![0u32; offsets[years]];
        for (id, p) in participants.iter().enumerate() {
            let (a, b) = span(p);
            for y in a..=b {
                let slot = &mut fill[(y - first_year) as usize];
                ids[*slot] = id as u32;
                *slot += 1;
            }
        }
        ActiveIndex {
            first_year,
            offsets,
            ids,
        }
    }

    fn year(&self, t: f64) -> &[u32] {
        let y = t.floor() as i64 - self.first_year;
        if y < 0 || y as usize + 1 >= self.offsets.len() {
            return &[];
        }
        let y = y as usize;
        &self.ids[self.offsets[y]..self.offsets[y + 1]]
    }
}

struct CohortEvents {
    times: Vec<f64>,
    offsets: Vec<usize>,
    members: Vec<u32>,
    reduced: u64,
}

/// Generates the full event stream. The same schedule and seed always give
/// the same dataset, independent of thread count.
pub fn generate_dataset(schedule: &CohortSchedule, seed: u64) -> Result<GeneratedDataset> {
    let participants = sample_participants(schedule, seed)?;
    let index = ActiveIndex::new(&participants);

    let mut first_id = Vec::with_capacity(schedule.cohorts.len());
    let mut next = 0usize;
    for spec in &schedule.cohorts {
        first_id.push(next);
        next += spec.new_nodes as usize;
    }
    let jobs: Vec<(usize, &CohortSpec)> = first_id.iter().copied().zip(&schedule.cohorts).collect();

    let per_cohort = exec::map(&jobs, |&(first, spec)| {
        let mut rng = cohort_rng(seed, spec.year, 1);
        let extra = (spec.mean_team_size > 1.0).then(|| Poisson::new(spec.mean_team_size - 1.0).expect("validated"));
        let mut out = CohortEvents {
            times: Vec::new(),
            offsets: vec![0],
            members: Vec::new(),
            reduced: 0,
        };
        let mut times = Vec::new();
        for id in first..first + spec.new_nodes as usize {
            let p = participants[id];
            times.clear();
            times.push(p.start);
            if p.career > 0.0 {
                let mean = spec.events_per_node_year * p.career;
                let interior = if mean > 0.0 {
                    Poisson::new(mean).expect("positive mean").sample(&mut rng) as usize
                } else {
                    0
                };
                for _ in 0..interior {
                    times.push(p.start + rng.random::<f64>() * p.career);
                }
                times.push(p.end());
            }
            for &t in &times {
                let want = extra.as_ref().map_or(0, |d| d.sample(&mut rng) as usize);
                let begin = out.members.len();
                out.members.push(id as u32);
                let pool = index.year(t);
                for _ in 0..want {
                    let mut placed = false;
                    for _ in 0..MEMBER_ATTEMPTS.min(pool.len() * 4) {
                        let cand = pool[rng.random_range(0..pool.len())];
                        if participants[cand as usize].active_at(t) && !out.members[begin..].contains(&cand) {
                            out.members.push(cand);
                            placed = true;
                            break;
                        }
                    }
                    if !placed {
                        out.reduced += 1;
                        break;
                    }
                }
                out.times.push(t);
                out.offsets.push(out.members.len());
            }
        }
        out
    });

    // Interleave by (time, cohort, sequence).
    let mut order: Vec<(f64, u32, u32)> = Vec::new();
    for (c, ev) in per_cohort.iter().enumerate() {
        order.extend(ev.times.iter().enumerate().map(|(j, &t)| (t, c as u32, j as u32)));
    }
    exec::sort_unstable_by(&mut order, |x, y| {
        x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2))
    });

    let total_members: usize = per_cohort.iter().map(|c| c.members.len()).sum();
    let mut times = Vec::with_capacity(order.len());
    let mut member_offsets = Vec::with_capacity(order.len() + 1);
    let mut members = Vec::with_capacity(total_members);
    member_offsets.push(0);
    for &(t, c, j) in &order {
        let ev = &per_cohort[c as usize];
        let j = j as usize;
        times.push(t);
        members.extend_from_slice(&ev.members[ev.offsets[j]..ev.offsets[j + 1]]);
        member_offsets.push(members.len());
    }
    // Teams with a reduced slot count once.
    let stats = GenerateStats {
        participants: participants.len() as u64,
        events: times.len() as u64,
        memberships: members.len() as u64,
        reduced_teams: per_cohort.iter().map(|c| c.reduced).sum(),
    };
    Ok(GeneratedDataset {
        participants,
        stats,
        times,
        member_offsets,
        members,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cohorts::{self, EntityKind};
    use crate::ingest::{DurationModel, EventTable};
    use crate::tempgraph::{build_graph, AccumulatorConfig};

    #[test]
    fn weibull_inverse_examples() {
        let u = 1.0 - (-1.0f64).exp();
        for (k, lambda) in [(0.2, 5.0), (1.0, 1.0), (3.0, 40.0)] {
            assert!((sample_weibull(k, lambda, u) - lambda).abs() < 1e-12 * lambda);
        }
        assert!((sample_weibull(1.0, 1.0, 0.5) - std::f64::consts::LN_2).abs() < 1e-15);
    }

    #[test]
    fn discrete_powerlaw_head_probability() {
        let p = DiscretePowerLaw::new(2.0, 1).unwrap();
        // P(X = 1) = 1/ζ(2) = 6/π².
        let p1 = 6.0 / std::f64::consts::PI.powi(2);
        assert_eq!(p.sample(p1 * 0.999), 1);
        assert_eq!(p.sample(p1 * 1.001), 2);
        assert!(p.sample(1.0 - 1e-12) > POWERLAW_TABLE_MAX);
        assert!(DiscretePowerLaw::new(1.0, 1).is_err());
    }

    #[test]
    fn schedule_validation() {
        let law = LifetimeLaw::Weibull { k: 0.2, lambda: 5.0 };
        let mut s = CohortSchedule::per_year([1950, 1950], 10, |_| law);
        assert!(s.validate().is_err());
        s.cohorts[1].year = 1951;
        s.validate().unwrap();
        s.cohorts[0].mean_team_size = 0.5;
        assert!(s.validate().is_err());
        let bad = CohortSchedule::per_year([1950], 10, |_| LifetimeLaw::Weibull { k: 0.0, lambda: 5.0 });
        assert!(bad.validate().is_err());
    }

    #[test]
    fn schedule_toml_roundtrip() {
        let text = r#"
            max_career = 70
            [[cohort]]
            year = 1950
            new_nodes = 100
            law = { law = "weibull", k = 0.2, lambda = 5.0 }
            mean_team_size = 3.0
            events_per_node_year = 0.5

            [[cohort]]
            year = 1951
            new_nodes = 20
            law = { law = "powerlaw", alpha = 2.5, xmin = 1 }
        "#;
        let s = CohortSchedule::from_toml(text).unwrap();
        assert_eq!(s.cohorts.len(), 2);
        assert_eq!(s.max_career, 70.0);
        assert_eq!(s.cohorts[1].mean_team_size, 1.0);
        assert_eq!(CohortSchedule::from_toml(&s.to_toml().unwrap()).unwrap(), s);
    }

    fn small_schedule() -> CohortSchedule {
        let mut s = CohortSchedule::per_year(1950..1955, 300, |_| LifetimeLaw::Weibull { k: 0.5, lambda: 6.0 });
        for c in &mut s.cohorts {
            c.mean_team_size = 3.0;
            c.events_per_node_year = 0.5;
        }
        s
    }

    #[test]
    fn generation_is_deterministic() {
        let a = generate_dataset(&small_schedule(), 7).unwrap();
        let b = exec::sequential(|| generate_dataset(&small_schedule(), 7).unwrap());
        assert_eq!(a, b);
        let c = generate_dataset(&small_schedule(), 8).unwrap();
        assert_ne!(a.times, c.times);
    }

    #[test]
    fn events_reproduce_careers() {
        let d = generate_dataset(&small_schedule(), 3).unwrap();
        let mut first = vec![f64::INFINITY; d.participants.len()];
        let mut last = vec![f64::NEG_INFINITY; d.participants.len()];
        for i in 0..d.len() {
            let m = d.members(i);
            let mut sorted = m.to_vec();
            sorted.sort_unstable();
            sorted.dedup();
            assert_eq!(sorted.len(), m.len(), "duplicate member in event {i}");
            for &p in m {
                first[p as usize] = first[p as usize].min(d.time(i));
                last[p as usize] = last[p as usize].max(d.time(i));
            }
        }
        for (i, p) in d.participants.iter().enumerate() {
            assert_eq!(first[i], p.start);
            assert_eq!(last[i], p.end());
        }
        assert!(d.times.windows(2).all(|w| w[0] <= w[1]));
        assert!(d.stats.memberships > d.stats.events, "teams should have co-members");
    }

    #[test]
    fn degenerate_law_is_all_single_year() {
        let s = CohortSchedule::per_year([1960], 200, |_| LifetimeLaw::Fixed { years: 0.0 });
        let d = generate_dataset(&s, 1).unwrap();
        assert_eq!(d.len(), 200);
        let table = EventTable::from_events(d.events());
        let model = DurationModel::default();
        let durations = table.durations(&model);
        let graph = build_graph(&table, &durations, &AccumulatorConfig::default()).unwrap();
        let lifetimes = cohorts::node_lifetimes(&graph.nodes).unwrap();
        let tables = cohorts::build_cohorts(EntityKind::Node, &lifetimes, 60);
        let threshold = cohorts::single_year_threshold(&model);
        let frac = cohorts::single_year_fraction(&tables, EntityKind::Node, threshold);
        assert_eq!(frac, vec![(1958, 1.0)]);
    }

    #[test]
    fn written_stream_reingests() {
        let d = generate_dataset(&small_schedule(), 5).unwrap();
        // Careers run past the default window's end.
        let window = ingest::YearWindow::new(1900.0, 2200.0).unwrap();
        for format in [InputFormat::Delimited, InputFormat::JsonLines] {
            let mut buf = Vec::new();
            d.write(&mut buf, format, &Schema::default()).unwrap();
            let reader = ingest::read_events(&buf[..], format, &Schema::default(), window).unwrap();
            let back: Vec<CollaborationEvent> = reader.map(|e| e.unwrap()).collect();
            let orig: Vec<CollaborationEvent> = d.events().collect();
            assert_eq!(back, orig, "{format}");
        }
    }

    #[test]
    fn empty_schedule_writes_header_only() {
        let d = generate_dataset(&CohortSchedule::new(Vec::new()), 0).unwrap();
        let mut buf = Vec::new();
        d.write(&mut buf, InputFormat::Delimited, &Schema::default()).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 1);
    }
}
