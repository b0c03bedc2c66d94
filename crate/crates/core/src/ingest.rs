//! Event ingestion: delimited text or JSON lines into [`CollaborationEvent`]s,
//! plus the project-duration models used to place edge creation times.

use std::collections::HashMap;
use std::fmt;
use std::io::{BufRead, BufReader, Read};
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// One project: its identifier, completion year and participants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollaborationEvent {
    pub project_id: String,
    pub completion_year: f64,
    pub participants: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InputFormat {
    Delimited,
    JsonLines,
}

impl FromStr for InputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "delimited" | "csv" | "tsv" => Ok(InputFormat::Delimited),
            "json_lines" | "json-lines" | "jsonl" => Ok(InputFormat::JsonLines),
            other => Err(Error::Schema(format!("unknown input format '{other}'"))),
        }
    }
}

impl fmt::Display for InputFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            InputFormat::Delimited => "delimited",
            InputFormat::JsonLines => "json_lines",
        })
    }
}

/// Maps input columns (or JSON keys) onto event fields.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Schema {
    pub project: String,
    pub year: String,
    pub members: String,
    pub delimiter: char,
    /// Separates participants inside the members field.
    pub list_separator: char,
}

impl Default for Schema {
    fn default() -> Self {
        Schema {
            project: "project".into(),
            year: "year".into(),
            members: "members".into(),
            delimiter: ',',
            list_separator: ';',
        }
    }
}

/// Closed range of accepted completion years.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct YearWindow {
    pub min: f64,
    pub max: f64,
}

impl YearWindow {
    pub fn new(min: f64, max: f64) -> Result<Self> {
        if !(min.is_finite() && max.is_finite()) || min > max {
            return Err(Error::Parameter(format!("invalid year window {min}:{max}")));
        }
        Ok(YearWindow { min, max })
    }

    pub fn contains(&self, year: f64) -> bool {
        year >= self.min && year <= self.max
    }
}

impl Default for YearWindow {
    fn default() -> Self {
        YearWindow {
            min: 1800.0,
            max: 2020.0,
        }
    }
}

impl FromStr for YearWindow {
    type Err = Error;

    /// Parses `min:max`.
    fn from_str(s: &str) -> Result<Self> {
        let (lo, hi) = s
            .split_once(':')
            .ok_or_else(|| Error::Parameter(format!("window '{s}' is not of the form min:max")))?;
        let parse = |v: &str| {
            v.trim()
                .parse::<f64>()
                .map_err(|_| Error::Parameter(format!("window bound '{v}' is not a number")))
        };
        YearWindow::new(parse(lo)?, parse(hi)?)
    }
}

impl fmt::Display for YearWindow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.min, self.max)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RowError {
    pub line: u64,
    pub message: String,
}

/// Row accounting for one read. `rows == parsed + malformed + skipped_window`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestStats {
    pub rows: u64,
    pub parsed: u64,
    pub malformed: u64,
    pub skipped_window: u64,
    /// Rows that listed at least one participant twice.
    pub deduplicated_rows: u64,
    /// The first [`MAX_RECORDED_ERRORS`] malformed rows.
    pub errors: Vec<RowError>,
}

pub const MAX_RECORDED_ERRORS: usize = 100;

impl IngestStats {
    fn malformed(&mut self, line: u64, message: impl Into<String>) {
        self.malformed += 1;
        if self.errors.len() < MAX_RECORDED_ERRORS {
            self.errors.push(RowError {
                line,
                message: message.into(),
            });
        }
    }
}

enum Source<R: Read> {
    Delimited {
        reader: csv::Reader<R>,
        columns: [usize; 3],
        record: csv::StringRecord,
    },
    JsonLines {
        reader: BufReader<R>,
        line_no: u64,
        buf: String,
    },
}

/// Streaming reader. Yields valid events in file order; malformed and
/// out-of-window rows are tallied in [`EventReader::stats`]. Only fatal
/// conditions (an unreadable source) surface as `Err` items.
pub struct EventReader<R: Read> {
    source: Source<R>,
    schema: Schema,
    window: YearWindow,
    stats: IngestStats,
    failed: bool,
}

/// Opens `source` for reading events. Delimited input must carry a header
/// row naming the schema's columns.
pub fn read_events<R: Read>(
    source: R,
    format: InputFormat,
    schema: &Schema,
    window: YearWindow,
) -> Result<EventReader<R>> {
    let source = match format {
        InputFormat::Delimited => {
            if !schema.delimiter.is_ascii() {
                return Err(Error::Schema("delimiter must be a single ASCII character".into()));
            }
            let mut reader = csv::ReaderBuilder::new()
                .delimiter(schema.delimiter as u8)
                .has_headers(true)
                .flexible(true)
                .from_reader(source);
            let headers = reader.headers()?.clone();
            let find = |name: &str| {
                headers
                    .iter()
                    .position(|h| h.trim() == name)
                    .ok_or_else(|| Error::Schema(format!("header has no column '{name}'")))
            };
            let columns = [find(&schema.project)?, find(&schema.year)?, find(&schema.members)?];
            Source::Delimited {
                reader,
                columns,
                record: csv::StringRecord::new(),
            }
        }
        InputFormat::JsonLines => Source::JsonLines {
            reader: BufReader::new(source),
            line_no: 0,
            buf: String::new(),
        },
    };
    Ok(EventReader {
        source,
        schema: schema.clone(),
        window,
        stats: IngestStats::default(),
        failed: false,
    })
}

impl<R: Read> EventReader<R> {
    pub fn stats(&self) -> &IngestStats {
        &self.stats
    }

    pub fn into_stats(self) -> IngestStats {
        self.stats
    }

    /// Validates raw fields and applies dedup and the window. `None` means
    /// the row was tallied and dropped.
    fn finish_row(
        &mut self,
        line: u64,
        project: &str,
        year: std::result::Result<f64, String>,
        members: Vec<String>,
    ) -> Option<CollaborationEvent> {
        self.stats.rows += 1;
        let project = project.trim();
        if project.is_empty() {
            self.stats.malformed(line, "empty project identifier");
            return None;
        }
        let year = match year {
            Ok(y) if y.is_finite() => y,
            Ok(y) => {
                self.stats.malformed(line, format!("non-finite year {y}"));
                return None;
            }
            Err(msg) => {
                self.stats.malformed(line, msg);
                return None;
            }
        };
        let (participants, had_duplicates) = dedup_participants(members);
        if participants.is_empty() {
            self.stats.malformed(line, "no participants");
            return None;
        }
        if !self.window.contains(year) {
            self.stats.skipped_window += 1;
            return None;
        }
        if had_duplicates {
            self.stats.deduplicated_rows += 1;
        }
        self.stats.parsed += 1;
        Some(CollaborationEvent {
            project_id: project.to_string(),
            completion_year: year,
            participants,
        })
    }
}

fn split_members(field: &str, sep: char) -> Vec<String> {
    field
        .split(sep)
        .map(str::trim)
        .filter(|m| !m.is_empty())
        .map(str::to_string)
        .collect()
}

/// Removes repeated identifiers, keeping first occurrences in order.
fn dedup_participants(members: Vec<String>) -> (Vec<String>, bool) {
    if members.len() < 2 {
        return (members, false);
    }
    let mut seen = std::collections::HashSet::with_capacity(members.len());
    let before = members.len();
    let out: Vec<String> = members.into_iter().filter(|m| seen.insert(m.clone())).collect();
    let dup = out.len() != before;
    (out, dup)
}

fn json_scalar_to_string(v: &serde_json::Value) -> Option<String> {
    match v {
        serde_json::Value::String(s) => Some(s.clone()),
        serde_json::Value::Number(n) => Some(n.to_string()),
        _ => None,
    }
}

impl<R: Read> Iterator for EventReader<R> {
    type Item = Result<CollaborationEvent>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.failed {
            return None;
        }
        loop {
            let row = match &mut self.source {
                Source::Delimited {
                    reader,
                    columns,
                    record,
                } => match reader.read_record(record) {
                    Ok(false) => return None,
                    Err(e) if e.is_io_error() => {
                        self.failed = true;
                        return Some(Err(e.into()));
                    }
                    Err(e) => {
                        let line = e.position().map(|p| p.line()).unwrap_or(0);
                        self.stats.rows += 1;
                        self.stats.malformed(line, e.to_string());
                        continue;
                    }
                    Ok(true) => {
                        let line = record.position().map(|p| p.line()).unwrap_or(0);
                        let get = |i: usize| record.get(i);
                        match (get(columns[0]), get(columns[1]), get(columns[2])) {
                            (Some(p), Some(y), Some(m)) => {
                                let year = y
                                    .trim()
                                    .parse::<f64>()
                                    .map_err(|_| format!("year '{y}' is not a number"));
                                let members = split_members(m, self.schema.list_separator);
                                (line, p.to_string(), year, members)
                            }
                            _ => {
                                self.stats.rows += 1;
                                self.stats.malformed(line, "row has too few fields");
                                continue;
                            }
                        }
                    }
                },
                Source::JsonLines {
                    reader,
                    line_no,
                    buf,
                } => {
                    buf.clear();
                    match reader.read_line(buf) {
                        Ok(0) => return None,
                        Ok(_) => {}
                        Err(e) => {
                            self.failed = true;
                            return Some(Err(e.into()));
                        }
                    }
                    *line_no += 1;
                    let line = *line_no;
                    if buf.trim().is_empty() {
                        continue;
                    }
                    let value: serde_json::Value = match serde_json::from_str(buf) {
                        Ok(v) => v,
                        Err(e) => {
                            self.stats.rows += 1;
                            self.stats.malformed(line, format!("invalid JSON: {e}"));
                            continue;
                        }
                    };
                    let project = value.get(&self.schema.project).and_then(json_scalar_to_string);
                    let year = match value.get(&self.schema.year) {
                        Some(serde_json::Value::Number(n)) => {
                            n.as_f64().ok_or_else(|| "year is not representable".to_string())
                        }
                        Some(serde_json::Value::String(s)) => s
                            .trim()
                            .parse::<f64>()
                            .map_err(|_| format!("year '{s}' is not a number")),
                        _ => Err(format!("missing or invalid key '{}'", self.schema.year)),
                    };
                    let members = match value.get(&self.schema.members) {
                        Some(serde_json::Value::Array(items)) => {
                            let parsed: Option<Vec<String>> =
                                items.iter().map(json_scalar_to_string).collect();
                            match parsed {
                                Some(v) => v
                                    .into_iter()
                                    .map(|m| m.trim().to_string())
                                    .filter(|m| !m.is_empty())
                                    .collect(),
                                None => {
                                    self.stats.rows += 1;
                                    self.stats.malformed(line, "members must be strings or numbers");
                                    continue;
                                }
                            }
                        }
                        Some(serde_json::Value::String(s)) => {
                            split_members(s, self.schema.list_separator)
                        }
                        _ => Vec::new(),
                    };
                    match project {
                        Some(p) => (line, p, year, members),
                        None => {
                            self.stats.rows += 1;
                            self.stats.malformed(
                                line,
                                format!("missing or invalid key '{}'", self.schema.project),
                            );
                            continue;
                        }
                    }
                }
            };
            let (line, project, year, members) = row;
            if let Some(ev) = self.finish_row(line, &project, year, members) {
                return Some(Ok(ev));
            }
        }
    }
}

/// Writes events in a format [`read_events`] accepts with the given schema.
pub fn write_events<'a, W: std::io::Write>(
    out: W,
    format: InputFormat,
    schema: &Schema,
    events: impl IntoIterator<Item = &'a CollaborationEvent>,
) -> Result<()> {
    let mut out = std::io::BufWriter::new(out);
    let sep = schema.list_separator.to_string();
    match format {
        InputFormat::Delimited => {
            let mut w = csv::WriterBuilder::new()
                .delimiter(schema.delimiter as u8)
                .from_writer(out);
            w.write_record([&schema.project, &schema.year, &schema.members])?;
            for ev in events {
                w.write_record([
                    ev.project_id.as_str(),
                    &ev.completion_year.to_string(),
                    &ev.participants.join(&sep),
                ])?;
            }
            w.flush()?;
        }
        InputFormat::JsonLines => {
            use std::io::Write;
            for ev in events {
                let mut obj = serde_json::Map::new();
                obj.insert(schema.project.clone(), ev.project_id.clone().into());
                obj.insert(schema.year.clone(), ev.completion_year.into());
                obj.insert(schema.members.clone(), ev.participants.clone().into());
                serde_json::to_writer(&mut out, &serde_json::Value::Object(obj))
                    .map_err(std::io::Error::from)?;
                out.write_all(b"\n")?;
            }
            out.flush()?;
        }
    }
    Ok(())
}

/// Lower bound applied to gaussian duration draws, in years.
pub const MIN_GAUSSIAN_DURATION: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DurationKind {
    Fixed,
    Gaussian,
}

impl FromStr for DurationKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fixed" => Ok(DurationKind::Fixed),
            "gaussian" => Ok(DurationKind::Gaussian),
            other => Err(Error::DurationModel(format!("unknown duration model '{other}'"))),
        }
    }
}

/// How long a project ran before its completion date.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DurationModel {
    pub kind: DurationKind,
    /// Duration in years (the mean for gaussian).
    pub tau_project: f64,
    pub sigma: f64,
    pub seed: u64,
}

impl DurationModel {
    pub fn fixed(tau_project: f64) -> Result<Self> {
        Self::new(DurationKind::Fixed, tau_project, 0.0, 0)
    }

    pub fn gaussian(tau_project: f64, sigma: f64, seed: u64) -> Result<Self> {
        Self::new(DurationKind::Gaussian, tau_project, sigma, seed)
    }

    pub fn new(kind: DurationKind, tau_project: f64, sigma: f64, seed: u64) -> Result<Self> {
        if !(tau_project.is_finite() && tau_project > 0.0) {
            return Err(Error::DurationModel(format!(
                "tau_project must be positive, got {tau_project}"
            )));
        }
        if !(sigma.is_finite() && sigma >= 0.0) {
            return Err(Error::DurationModel(format!(
                "sigma must be non-negative, got {sigma}"
            )));
        }
        Ok(DurationModel {
            kind,
            tau_project,
            sigma,
            seed,
        })
    }

    /// Duration for one project. Gaussian draws depend only on
    /// `(seed, project_id)`, never on processing order.
    pub fn duration_for(&self, project_id: &str) -> f64 {
        match self.kind {
            DurationKind::Fixed => self.tau_project,
            DurationKind::Gaussian if self.sigma == 0.0 => self.tau_project,
            DurationKind::Gaussian => {
                let mut rng = ChaCha8Rng::seed_from_u64(project_key(self.seed, project_id));
                let normal = Normal::new(self.tau_project, self.sigma)
                    .expect("sigma validated at construction");
                normal.sample(&mut rng).max(MIN_GAUSSIAN_DURATION)
            }
        }
    }

    pub fn label(&self) -> String {
        match self.kind {
            DurationKind::Fixed => format!("fixed:{}", self.tau_project),
            DurationKind::Gaussian => format!("gaussian:{}:{}", self.tau_project, self.sigma),
        }
    }
}

impl Default for DurationModel {
    fn default() -> Self {
        DurationModel {
            kind: DurationKind::Fixed,
            tau_project: 2.0,
            sigma: 0.0,
            seed: 0,
        }
    }
}

pub fn assign_duration(event: &CollaborationEvent, model: &DurationModel) -> f64 {
    model.duration_for(&event.project_id)
}

/// 64-bit FNV-1a over the seed bytes followed by the identifier.
fn project_key(seed: u64, project_id: &str) -> u64 {
    const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
    const PRIME: u64 = 0x0000_0100_0000_01b3;
    seed.to_le_bytes()
        .iter()
        .chain(project_id.as_bytes())
        .fold(OFFSET, |h, &b| (h ^ u64::from(b)).wrapping_mul(PRIME))
}

/// Compact, column-oriented copy of an event stream.
///
/// Participants are interned to dense `u32` ids whose numeric order equals
/// the lexicographic order of their identifiers, so `(min, max)` of two ids
/// is the canonical pair regardless of input order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EventTable {
    names: Vec<String>,
    project_text: String,
    project_ends: Vec<usize>,
    years: Vec<f64>,
    member_offsets: Vec<usize>,
    members: Vec<u32>,
}

#[derive(Debug, Clone, Copy)]
pub struct EventRef<'a> {
    pub project_id: &'a str,
    pub completion_year: f64,
    pub members: &'a [u32],
}

impl EventTable {
    pub fn from_events<I>(events: I) -> Self
    where
        I: IntoIterator<Item = CollaborationEvent>,
    {
        let mut ids: HashMap<String, u32> = HashMap::new();
        let mut names: Vec<String> = Vec::new();
        let mut table = EventTable {
            member_offsets: vec![0],
            ..Default::default()
        };
        for ev in events {
            table.project_text.push_str(&ev.project_id);
            table.project_ends.push(table.project_text.len());
            table.years.push(ev.completion_year);
            for p in ev.participants {
                let next = names.len() as u32;
                let id = *ids.entry(p).or_insert_with_key(|k| {
                    names.push(k.clone());
                    next
                });
                table.members.push(id);
            }
            table.member_offsets.push(table.members.len());
        }
        drop(ids);

        // Re-number so id order is lexicographic.
        let mut order: Vec<u32> = (0..names.len() as u32).collect();
        order.sort_unstable_by(|&a, &b| names[a as usize].cmp(&names[b as usize]));
        let mut rank = vec![0u32; names.len()];
        for (r, &old) in order.iter().enumerate() {
            rank[old as usize] = r as u32;
        }
        crate::exec::for_each_mut(&mut table.members, |m| *m = rank[*m as usize]);
        let mut slots: Vec<Option<String>> = names.into_iter().map(Some).collect();
        table.names = order
            .iter()
            .map(|&old| slots[old as usize].take().expect("each id ranked once"))
            .collect();
        table
    }

    pub fn len(&self) -> usize {
        self.years.len()
    }

    pub fn is_empty(&self) -> bool {
        self.years.is_empty()
    }

    pub fn participant_count(&self) -> usize {
        self.names.len()
    }

    pub fn participant_name(&self, id: u32) -> &str {
        &self.names[id as usize]
    }

    pub fn participant_id(&self, name: &str) -> Option<u32> {
        self.names
            .binary_search_by(|n| n.as_str().cmp(name))
            .ok()
            .map(|i| i as u32)
    }

    pub fn project_id(&self, i: usize) -> &str {
        let start = if i == 0 { 0 } else { self.project_ends[i - 1] };
        &self.project_text[start..self.project_ends[i]]
    }

    pub fn completion_years(&self) -> &[f64] {
        &self.years
    }

    pub fn members(&self, i: usize) -> &[u32] {
        &self.members[self.member_offsets[i]..self.member_offsets[i + 1]]
    }

    /// Total participant slots over all events.
    pub fn membership_count(&self) -> usize {
        self.members.len()
    }

    pub fn event(&self, i: usize) -> EventRef<'_> {
        EventRef {
            project_id: self.project_id(i),
            completion_year: self.years[i],
            members: self.members(i),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = EventRef<'_>> + '_ {
        (0..self.len()).map(move |i| self.event(i))
    }

    /// Per-event durations under `model`, in event order.
    pub fn durations(&self, model: &DurationModel) -> Vec<f64> {
        match model.kind {
            DurationKind::Fixed => vec![model.tau_project; self.len()],
            DurationKind::Gaussian => {
                crate::exec::map_range(self.len(), |i| model.duration_for(self.project_id(i)))
            }
        }
    }
}
