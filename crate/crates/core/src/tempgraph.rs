//! Clique expansion of events into edge instances, and the merge of those
//! instances into per-pair activity intervals.
//!
//! Activity intervals are half-open, `[creation, removal)`. Pairs are stored
//! as `(a, b)` with `a < b` in the id order of [`EventTable`], which is the
//! lexicographic order of participant identifiers.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::ingest::EventTable;
use crate::{exec, Error, Result};

/// One pairwise edge produced by one event.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeInstance {
    pub a: u32,
    pub b: u32,
    pub creation: f64,
    pub removal: f64,
}

/// Half-open activity interval in decimal years.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub creation: f64,
    pub removal: f64,
}

impl Interval {
    pub fn contains(&self, t: f64) -> bool {
        self.creation <= t && t < self.removal
    }
}

/// All n(n−1)/2 pairs of `participants`, active over
/// `[completion − duration, completion)`.
///
/// `participants` must be free of duplicates; pairs come out canonical.
pub fn expand_event(
    participants: &[u32],
    completion_year: f64,
    duration: f64,
) -> impl Iterator<Item = EdgeInstance> + '_ {
    let creation = completion_year - duration;
    participants.iter().enumerate().flat_map(move |(i, &x)| {
        participants[i + 1..].iter().map(move |&y| EdgeInstance {
            a: x.min(y),
            b: x.max(y),
            creation,
            removal: completion_year,
        })
    })
}

pub fn pair_count(n: usize) -> u64 {
    let n = n as u64;
    n * n.saturating_sub(1) / 2
}

/// First entry and last activity of one participant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NodeActivity {
    pub participant: u32,
    /// Earliest `completion − duration` over the participant's events.
    pub first_entry: f64,
    /// Latest completion over the participant's events.
    pub last_activity: f64,
    pub event_count: u32,
}

/// Node activity for every participant in `table`, indexed by id.
///
/// Min/max reductions are exact, so the result does not depend on event
/// order.
pub fn node_activities(table: &EventTable, durations: &[f64]) -> Vec<NodeActivity> {
    assert_eq!(durations.len(), table.len(), "one duration per event");
    let mut nodes: Vec<NodeActivity> = (0..table.participant_count() as u32)
        .map(|participant| NodeActivity {
            participant,
            first_entry: f64::INFINITY,
            last_activity: f64::NEG_INFINITY,
            event_count: 0,
        })
        .collect();
    for (i, ev) in table.iter().enumerate() {
        let entry = ev.completion_year - durations[i];
        for &m in ev.members {
            let n = &mut nodes[m as usize];
            n.first_entry = n.first_entry.min(entry);
            n.last_activity = n.last_activity.max(ev.completion_year);
            n.event_count += 1;
        }
    }
    nodes
}

/// Merged activity of one participant pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TemporalEdge<'a> {
    pub a: u32,
    pub b: u32,
    /// Sorted, disjoint, non-touching intervals.
    pub intervals: &'a [Interval],
    /// Number of edge instances merged into this pair.
    pub collaboration_count: u32,
}

impl TemporalEdge<'_> {
    pub fn first_creation(&self) -> f64 {
        self.intervals[0].creation
    }

    pub fn last_removal(&self) -> f64 {
        self.intervals[self.intervals.len() - 1].removal
    }
}

/// True iff `t` falls inside one of the edge's half-open intervals.
pub fn is_active(edge: &TemporalEdge<'_>, t: f64) -> bool {
    // First interval whose removal is beyond t.
    let idx = edge.intervals.partition_point(|iv| iv.removal <= t);
    edge.intervals.get(idx).is_some_and(|iv| iv.contains(t))
}

/// Sorts intervals and coalesces overlapping or touching ones.
pub fn merge_intervals(intervals: &mut Vec<Interval>) {
    intervals.sort_unstable_by(|x, y| {
        x.creation
            .total_cmp(&y.creation)
            .then(x.removal.total_cmp(&y.removal))
    });
    let mut out: Vec<Interval> = Vec::with_capacity(intervals.len());
    for iv in intervals.drain(..) {
        match out.last_mut() {
            Some(last) if iv.creation <= last.removal => {
                last.removal = last.removal.max(iv.removal);
            }
            _ => out.push(iv),
        }
    }
    *intervals = out;
}

/// One partition's merged pairs, sorted by `(a, b)`.
#[derive(Debug, Clone, Default)]
struct EdgeBlock {
    pairs: Vec<(u32, u32)>,
    /// `offsets[i]..offsets[i + 1]` indexes `intervals` for pair `i`.
    offsets: Vec<usize>,
    intervals: Vec<Interval>,
    counts: Vec<u32>,
}

impl EdgeBlock {
    fn len(&self) -> usize {
        self.pairs.len()
    }

    fn edge(&self, i: usize) -> TemporalEdge<'_> {
        let (a, b) = self.pairs[i];
        TemporalEdge {
            a,
            b,
            intervals: &self.intervals[self.offsets[i]..self.offsets[i + 1]],
            collaboration_count: self.counts[i],
        }
    }

    /// Builds the block from raw instances of one partition.
    fn from_instances(mut raw: Vec<EdgeInstance>) -> Self {
        raw.sort_unstable_by(|x, y| {
            (x.a, x.b)
                .cmp(&(y.a, y.b))
                .then(x.creation.total_cmp(&y.creation))
                .then(x.removal.total_cmp(&y.removal))
        });
        let mut block = EdgeBlock {
            offsets: vec![0],
            ..Default::default()
        };
        let mut i = 0;
        while i < raw.len() {
            let key = (raw[i].a, raw[i].b);
            let mut current = Interval {
                creation: raw[i].creation,
                removal: raw[i].removal,
            };
            let mut count = 0u32;
            while i < raw.len() && (raw[i].a, raw[i].b) == key {
                let inst = raw[i];
                count += 1;
                if inst.creation <= current.removal {
                    current.removal = current.removal.max(inst.removal);
                } else {
                    block.intervals.push(current);
                    current = Interval {
                        creation: inst.creation,
                        removal: inst.removal,
                    };
                }
                i += 1;
            }
            block.intervals.push(current);
            block.pairs.push(key);
            block.offsets.push(block.intervals.len());
            block.counts.push(count);
        }
        block
    }
}

/// Every participant pair that ever collaborated, in canonical pair order.
#[derive(Debug, Clone, Default)]
pub struct TemporalEdges {
    blocks: Vec<EdgeBlock>,
    /// First `a` owned by each block; block `i` covers
    /// `bounds[i]..bounds[i + 1]`.
    bounds: Vec<u32>,
}

/// Equal when the edges are, however they are partitioned.
impl PartialEq for TemporalEdges {
    fn eq(&self, other: &Self) -> bool {
        self.len() == other.len() && self.iter().eq(other.iter())
    }
}

impl TemporalEdges {
    pub fn len(&self) -> usize {
        self.blocks.iter().map(EdgeBlock::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn interval_count(&self) -> usize {
        self.blocks.iter().map(|b| b.intervals.len()).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = TemporalEdge<'_>> + '_ {
        self.blocks
            .iter()
            .flat_map(|b| (0..b.len()).map(move |i| b.edge(i)))
    }

    /// Looks up a pair in either order.
    pub fn get(&self, x: u32, y: u32) -> Option<TemporalEdge<'_>> {
        let (a, b) = (x.min(y), x.max(y));
        let bi = self.bounds.partition_point(|&lo| lo <= a).checked_sub(1)?;
        let block = self.blocks.get(bi)?;
        block
            .pairs
            .binary_search(&(a, b))
            .ok()
            .map(|i| block.edge(i))
    }

    /// Runs `f` over each block in parallel and concatenates the results in
    /// pair order.
    pub fn par_flat_map<R, F>(&self, f: F) -> Vec<R>
    where
        R: Send,
        F: Fn(TemporalEdge<'_>, &mut Vec<R>) + Sync + Send,
    {
        let parts = exec::map(&self.blocks, |block| {
            let mut out = Vec::new();
            for i in 0..block.len() {
                f(block.edge(i), &mut out);
            }
            out
        });
        parts.into_iter().flatten().collect()
    }

    /// Writes `a, b, creation, removal`, one row per interval.
    pub fn write_intervals<W: Write>(&self, out: W, table: &EventTable) -> Result<()> {
        let mut out = BufWriter::new(out);
        writeln!(out, "# collabspan {} edge intervals, half-open [creation, removal)", crate::VERSION)?;
        writeln!(out, "a\tb\tcreation\tremoval")?;
        for e in self.iter() {
            for iv in e.intervals {
                writeln!(
                    out,
                    "{}\t{}\t{}\t{}",
                    table.participant_name(e.a),
                    table.participant_name(e.b),
                    iv.creation,
                    iv.removal
                )?;
            }
        }
        out.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AccumulatorConfig {
    /// Number of range partitions over the lower pair endpoint.
    pub partitions: usize,
    /// Buffered instances allowed in memory before spilling to disk.
    /// `None` never spills.
    pub memory_limit_instances: Option<usize>,
    /// Directory for spill files; a temporary directory under the system
    /// temp dir when unset.
    pub spill_dir: Option<PathBuf>,
}

impl Default for AccumulatorConfig {
    fn default() -> Self {
        AccumulatorConfig {
            partitions: 64,
            memory_limit_instances: None,
            spill_dir: None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AccumulateStats {
    pub instances: u64,
    pub spilled_instances: u64,
    pub spill_flushes: u64,
    pub pairs: u64,
    pub intervals: u64,
}

const SPILL_MAGIC: &[u8; 8] = b"CSPILL\0\0";
const SPILL_VERSION: u32 = 1;
const SPILL_RECORD: usize = 24;

struct SpillSet {
    dir: PathBuf,
    owned: bool,
    files: Vec<Option<BufWriter<File>>>,
}

impl SpillSet {
    fn create(base: Option<&Path>, partitions: usize) -> Result<Self> {
        let (dir, owned) = match base {
            Some(d) => (d.to_path_buf(), false),
            None => {
                let unique = format!(
                    "collabspan-spill-{}-{}",
                    std::process::id(),
                    std::time::SystemTime::now()
                        .duration_since(std::time::UNIX_EPOCH)
                        .map(|d| d.as_nanos())
                        .unwrap_or(0)
                );
                (std::env::temp_dir().join(unique), true)
            }
        };
        std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        Ok(SpillSet {
            dir,
            owned,
            files: (0..partitions).map(|_| None).collect(),
        })
    }

    fn path(&self, p: usize) -> PathBuf {
        self.dir.join(format!("partition-{p:05}.spill"))
    }

    fn append(&mut self, p: usize, records: &[EdgeInstance]) -> Result<()> {
        if self.files[p].is_none() {
            let path = self.path(p);
            let file = File::create(&path).map_err(|e| Error::io(&path, e))?;
            let mut w = BufWriter::new(file);
            w.write_all(SPILL_MAGIC)?;
            w.write_all(&SPILL_VERSION.to_le_bytes())?;
            self.files[p] = Some(w);
        }
        let w = self.files[p].as_mut().expect("opened above");
        for r in records {
            w.write_all(&r.a.to_le_bytes())?;
            w.write_all(&r.b.to_le_bytes())?;
            w.write_all(&r.creation.to_le_bytes())?;
            w.write_all(&r.removal.to_le_bytes())?;
        }
        Ok(())
    }

    fn finish_writes(&mut self) -> Result<()> {
        for w in self.files.iter_mut().flatten() {
            w.flush()?;
        }
        Ok(())
    }

    fn read(&self, p: usize, into: &mut Vec<EdgeInstance>) -> Result<()> {
        if self.files[p].is_none() {
            return Ok(());
        }
        let path = self.path(p);
        read_spill_file(&path, into)
    }
}

impl Drop for SpillSet {
    fn drop(&mut self) {
        self.files.clear();
        if self.owned {
            let _ = std::fs::remove_dir_all(&self.dir);
        }
    }
}

fn read_spill_file(path: &Path, into: &mut Vec<EdgeInstance>) -> Result<()> {
    let corrupt = |reason: &str| Error::Spill {
        path: path.to_path_buf(),
        reason: reason.to_string(),
    };
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let len = file.metadata().map_err(|e| Error::io(path, e))?.len() as usize;
    let mut r = BufReader::new(file);
    let mut header = [0u8; 12];
    r.read_exact(&mut header).map_err(|_| corrupt("truncated header"))?;
    if &header[..8] != SPILL_MAGIC {
        return Err(corrupt("bad magic"));
    }
    let version = u32::from_le_bytes(header[8..12].try_into().expect("4 bytes"));
    if version != SPILL_VERSION {
        return Err(corrupt(&format!("unsupported version {version}")));
    }
    let body = len - header.len();
    if !body.is_multiple_of(SPILL_RECORD) {
        return Err(corrupt("partial record"));
    }
    into.reserve(body / SPILL_RECORD);
    let mut rec = [0u8; SPILL_RECORD];
    for _ in 0..body / SPILL_RECORD {
        r.read_exact(&mut rec).map_err(|e| Error::io(path, e))?;
        into.push(EdgeInstance {
            a: u32::from_le_bytes(rec[0..4].try_into().expect("4 bytes")),
            b: u32::from_le_bytes(rec[4..8].try_into().expect("4 bytes")),
            creation: f64::from_le_bytes(rec[8..16].try_into().expect("8 bytes")),
            removal: f64::from_le_bytes(rec[16..24].try_into().expect("8 bytes")),
        });
    }
    Ok(())
}

/// Collects edge instances into range partitions over the lower endpoint
/// and merges each partition independently. The result depends only on the
/// multiset of instances pushed.
pub struct EdgeAccumulator {
    bounds: Vec<u32>,
    buffers: Vec<Vec<EdgeInstance>>,
    buffered: usize,
    config: AccumulatorConfig,
    spill: Option<SpillSet>,
    stats: AccumulateStats,
}

impl EdgeAccumulator {
    /// `participant_count` bounds the ids that will be pushed.
    pub fn new(participant_count: usize, config: AccumulatorConfig) -> Self {
        let parts = config.partitions.clamp(1, participant_count.max(1));
        let bounds = (0..parts)
            .map(|p| ((p as u64 * participant_count as u64) / parts as u64) as u32)
            .collect();
        Self::with_bounds(bounds, config)
    }

    fn with_bounds(bounds: Vec<u32>, config: AccumulatorConfig) -> Self {
        let parts = bounds.len();
        EdgeAccumulator {
            bounds,
            buffers: (0..parts).map(|_| Vec::new()).collect(),
            buffered: 0,
            config,
            spill: None,
            stats: AccumulateStats::default(),
        }
    }

    /// Partitions balanced by the expected number of instances whose lower
    /// endpoint is each id, with buffers reserved up front.
    pub fn with_load(load: &[u64], config: AccumulatorConfig) -> Self {
        let total: u64 = load.iter().sum();
        let parts = config.partitions.clamp(1, load.len().max(1));
        let mut bounds = vec![0u32];
        let mut sizes = vec![0u64];
        let mut acc = 0u64;
        for (id, &l) in load.iter().enumerate() {
            let target = (total * bounds.len() as u64) / parts as u64;
            if acc >= target && bounds.len() < parts && *sizes.last().expect("nonempty") > 0 {
                bounds.push(id as u32);
                sizes.push(0);
            }
            acc += l;
            *sizes.last_mut().expect("nonempty") += l;
        }
        let mut me = Self::with_bounds(bounds, config);
        if me.config.memory_limit_instances.is_none_or(|lim| total as usize <= lim) {
            for (buf, &s) in me.buffers.iter_mut().zip(&sizes) {
                buf.reserve_exact(s as usize);
            }
        }
        me
    }

    fn partition_of(&self, a: u32) -> usize {
        self.bounds.partition_point(|&lo| lo <= a) - 1
    }

    pub fn push(&mut self, inst: EdgeInstance) -> Result<()> {
        debug_assert!(inst.a < inst.b, "pairs must be canonical");
        let p = self.partition_of(inst.a);
        self.buffers[p].push(inst);
        self.buffered += 1;
        self.stats.instances += 1;
        if self
            .config
            .memory_limit_instances
            .is_some_and(|lim| self.buffered > lim)
        {
            self.flush_to_disk()?;
        }
        Ok(())
    }

    pub fn extend<I: IntoIterator<Item = EdgeInstance>>(&mut self, iter: I) -> Result<()> {
        for inst in iter {
            self.push(inst)?;
        }
        Ok(())
    }

    fn flush_to_disk(&mut self) -> Result<()> {
        if self.spill.is_none() {
            self.spill = Some(SpillSet::create(
                self.config.spill_dir.as_deref(),
                self.buffers.len(),
            )?);
        }
        let spill = self.spill.as_mut().expect("created above");
        for (p, buf) in self.buffers.iter_mut().enumerate() {
            if !buf.is_empty() {
                spill.append(p, buf)?;
                self.stats.spilled_instances += buf.len() as u64;
                buf.clear();
            }
        }
        self.buffered = 0;
        self.stats.spill_flushes += 1;
        Ok(())
    }

    pub fn finish(mut self) -> Result<(TemporalEdges, AccumulateStats)> {
        let buffers = std::mem::take(&mut self.buffers);
        let blocks = match self.spill.as_mut() {
            None => exec::map_owned(buffers, EdgeBlock::from_instances),
            Some(spill) => {
                spill.finish_writes()?;
                // One partition in memory at a time.
                let mut blocks = Vec::with_capacity(buffers.len());
                for (p, mut buf) in buffers.into_iter().enumerate() {
                    spill.read(p, &mut buf)?;
                    blocks.push(EdgeBlock::from_instances(buf));
                }
                blocks
            }
        };
        let edges = TemporalEdges {
            blocks,
            bounds: std::mem::take(&mut self.bounds),
        };
        self.stats.pairs = edges.len() as u64;
        self.stats.intervals = edges.interval_count() as u64;
        Ok((edges, std::mem::take(&mut self.stats)))
    }
}

/// Nodes and merged edges for a whole event table.
#[derive(Debug, Clone, PartialEq)]
pub struct TemporalGraph {
    pub nodes: Vec<NodeActivity>,
    pub edges: TemporalEdges,
    pub stats: AccumulateStats,
}

const EXPAND_BATCH_EVENTS: usize = 1 << 20;
const EXPAND_CHUNK_EVENTS: usize = 1 << 14;

/// Expands every event and accumulates nodes and edges.
pub fn build_graph(
    table: &EventTable,
    durations: &[f64],
    config: &AccumulatorConfig,
) -> Result<TemporalGraph> {
    assert_eq!(durations.len(), table.len(), "one duration per event");
    let nodes = node_activities(table, durations);

    // Instances per lower endpoint, for balanced, pre-sized partitions.
    let mut load = vec![0u64; table.participant_count()];
    for ev in table.iter() {
        if ev.members.len() < 2 {
            continue;
        }
        let mut sorted = ev.members.to_vec();
        sorted.sort_unstable();
        let n = sorted.len() as u64;
        for (i, &m) in sorted.iter().enumerate() {
            load[m as usize] += n - 1 - i as u64;
        }
    }
    let mut acc = EdgeAccumulator::with_load(&load, config.clone());
    drop(load);

    let indices: Vec<usize> = (0..table.len()).collect();
    for batch in indices.chunks(EXPAND_BATCH_EVENTS) {
        let parts = exec::map_chunks(batch, EXPAND_CHUNK_EVENTS, |_, chunk| {
            let mut out = Vec::new();
            for &i in chunk {
                let ev = table.event(i);
                out.extend(expand_event(ev.members, ev.completion_year, durations[i]));
            }
            out
        });
        for part in parts {
            acc.extend(part)?;
        }
    }
    let (edges, stats) = acc.finish()?;
    Ok(TemporalGraph {
        nodes,
        edges,
        stats,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::CollaborationEvent;

    fn accumulate(instances: &[EdgeInstance], n: usize, cfg: AccumulatorConfig) -> TemporalEdges {
        let mut acc = EdgeAccumulator::new(n, cfg);
        acc.extend(instances.iter().copied()).unwrap();
        acc.finish().unwrap().0
    }

    fn inst(a: u32, b: u32, c: f64, r: f64) -> EdgeInstance {
        EdgeInstance {
            a,
            b,
            creation: c,
            removal: r,
        }
    }

    #[test]
    fn triangle_expansion() {
        let got: Vec<_> = expand_event(&[0, 1, 2], 1950.0, 2.0).collect();
        assert_eq!(
            got,
            vec![
                inst(0, 1, 1948.0, 1950.0),
                inst(0, 2, 1948.0, 1950.0),
                inst(1, 2, 1948.0, 1950.0),
            ]
        );
    }

    #[test]
    fn expansion_sizes() {
        assert_eq!(expand_event(&[7], 1950.0, 2.0).count(), 0);
        assert_eq!(expand_event(&[], 1950.0, 2.0).count(), 0);
        assert_eq!(expand_event(&[4, 3, 2, 1, 0], 1950.0, 2.0).count(), 10);
        assert!(expand_event(&[4, 3, 2, 1, 0], 1950.0, 2.0).all(|e| e.a < e.b));
        assert_eq!(pair_count(5), 10);
        assert_eq!(pair_count(1), 0);
        assert_eq!(pair_count(0), 0);
    }

    #[test]
    fn overlapping_instances_coalesce() {
        let edges = accumulate(&[inst(0, 1, 1948.0, 1950.0), inst(0, 1, 1949.0, 1951.0)], 2, Default::default());
        let e = edges.get(1, 0).unwrap();
        assert_eq!(e.intervals, &[Interval { creation: 1948.0, removal: 1951.0 }]);
        assert_eq!(e.collaboration_count, 2);
    }

    #[test]
    fn disjoint_instances_stay_apart() {
        let edges = accumulate(&[inst(0, 1, 1960.0, 1962.0), inst(0, 1, 1948.0, 1950.0)], 2, Default::default());
        let e = edges.get(0, 1).unwrap();
        assert_eq!(e.intervals.len(), 2);
        assert_eq!(e.collaboration_count, 2);
        assert_eq!(e.first_creation(), 1948.0);
        assert_eq!(e.last_removal(), 1962.0);
    }

    #[test]
    fn touching_intervals_are_one_active_stretch() {
        let mut v = vec![
            Interval { creation: 1950.0, removal: 1952.0 },
            Interval { creation: 1948.0, removal: 1950.0 },
        ];
        merge_intervals(&mut v);
        assert_eq!(v, vec![Interval { creation: 1948.0, removal: 1952.0 }]);
    }

    #[test]
    fn node_first_entry_and_last_activity() {
        let table = EventTable::from_events(vec![
            CollaborationEvent { project_id: "x".into(), completion_year: 1970.0, participants: vec!["a".into(), "b".into()] },
            CollaborationEvent { project_id: "y".into(), completion_year: 1950.0, participants: vec!["a".into()] },
        ]);
        let nodes = node_activities(&table, &[2.0, 2.0]);
        let a = nodes[table.participant_id("a").unwrap() as usize];
        assert_eq!((a.first_entry, a.last_activity, a.event_count), (1948.0, 1970.0, 2));
        let b = nodes[table.participant_id("b").unwrap() as usize];
        assert_eq!((b.first_entry, b.last_activity, b.event_count), (1968.0, 1970.0, 1));
    }

    #[test]
    fn activity_is_half_open() {
        let iv = [Interval { creation: 1948.0, removal: 1950.0 }, Interval { creation: 1960.0, removal: 1962.0 }];
        let e = TemporalEdge { a: 0, b: 1, intervals: &iv, collaboration_count: 2 };
        assert!(is_active(&e, 1949.0));
        assert!(is_active(&e, 1948.0));
        assert!(!is_active(&e, 1950.0));
        assert!(!is_active(&e, 1955.0));
        assert!(is_active(&e, 1961.999));
        assert!(!is_active(&e, 1947.0));
        assert!(!is_active(&e, 1970.0));
    }

    /// Brute-force membership over a fine grid agrees with the binary search.
    #[test]
    fn activity_matches_grid_membership() {
        let iv = [Interval { creation: 1948.0, removal: 1950.0 }];
        let e = TemporalEdge { a: 0, b: 1, intervals: &iv, collaboration_count: 1 };
        for step in 0..=4000 {
            let t = 1947.0 + step as f64 * 0.001;
            let brute = iv.iter().any(|i| t >= i.creation && t < i.removal);
            assert_eq!(is_active(&e, t), brute, "t={t}");
        }
        assert!(!is_active(&e, 1950.0));
    }

    #[test]
    fn spilled_accumulation_matches_in_memory() {
        let mut instances = Vec::new();
        for i in 0..2000u32 {
            let a = i % 37;
            let b = 37 + (i * 7) % 41;
            let c = 1900.0 + (i % 90) as f64 * 0.7;
            instances.push(inst(a, b, c, c + 2.0));
        }
        let in_mem = accumulate(&instances, 80, AccumulatorConfig { partitions: 5, ..Default::default() });
        let dir = tempfile::tempdir().unwrap();
        let mut acc = EdgeAccumulator::new(
            80,
            AccumulatorConfig {
                partitions: 5,
                memory_limit_instances: Some(100),
                spill_dir: Some(dir.path().to_path_buf()),
            },
        );
        acc.extend(instances.iter().copied()).unwrap();
        let (spilled, stats) = acc.finish().unwrap();
        assert!(stats.spilled_instances > 0);
        assert!(stats.spill_flushes >= 19);
        assert_eq!(stats.instances, 2000);
        let a: Vec<_> = in_mem.iter().map(|e| (e.a, e.b, e.intervals.to_vec(), e.collaboration_count)).collect();
        let b: Vec<_> = spilled.iter().map(|e| (e.a, e.b, e.intervals.to_vec(), e.collaboration_count)).collect();
        assert_eq!(a, b);
    }

    #[test]
    fn corrupt_spill_is_reported() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.spill");
        std::fs::write(&path, b"NOTSPILL\x01\0\0\0").unwrap();
        let err = read_spill_file(&path, &mut Vec::new()).unwrap_err();
        assert!(matches!(err, Error::Spill { .. }));
    }

    #[test]
    fn partition_bounds_cover_every_id() {
        let load = vec![5, 0, 0, 9, 1, 1, 1, 30, 0, 2];
        let acc = EdgeAccumulator::with_load(&load, AccumulatorConfig { partitions: 4, ..Default::default() });
        assert_eq!(acc.bounds[0], 0);
        assert!(acc.bounds.windows(2).all(|w| w[0] < w[1]));
        for id in 0..load.len() as u32 {
            let p = acc.partition_of(id);
            assert!(acc.bounds[p] <= id);
        }
    }

    #[test]
    fn interval_export() {
        let table = EventTable::from_events(vec![CollaborationEvent {
            project_id: "x".into(),
            completion_year: 1950.0,
            participants: vec!["b".into(), "a".into()],
        }]);
        let g = build_graph(&table, &[2.0], &AccumulatorConfig::default()).unwrap();
        let mut buf = Vec::new();
        g.edges.write_intervals(&mut buf, &table).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.ends_with("a\tb\tcreation\tremoval\na\tb\t1948\t1950\n"));
    }
}
