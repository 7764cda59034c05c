//! Track files, session manifests and floor-plan configuration.
//!
//! Track records arrive as JSON lines or headered CSV with the columns
//! `session_id,track_id,t,x,y,orientation`. Manifests and floor plans are
//! TOML documents carrying a `schema_version` field.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::io::{BufRead, BufReader, Read, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::geometry::{BBox, Point2D};
use crate::model::{
    label_cohort_with_threshold, split_on_gaps, BreakSession, Cohort, CohortLabel, FloorPlan,
    Region, TrackSample, OTHER_REGION,
};

pub const MANIFEST_SCHEMA_VERSION: u32 = 1;
pub const FLOORPLAN_SCHEMA_VERSION: u32 = 1;

const CSV_COLUMNS: [&str; 6] = ["session_id", "track_id", "t", "x", "y", "orientation"];

/// Wire form of one tracker observation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackRecord {
    pub session_id: String,
    pub track_id: String,
    pub t: u32,
    pub x: f64,
    pub y: f64,
    #[serde(default)]
    pub orientation: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrackFormat {
    Jsonl,
    Csv,
}

impl TrackFormat {
    pub fn extension(self) -> &'static str {
        match self {
            TrackFormat::Jsonl => "jsonl",
            TrackFormat::Csv => "csv",
        }
    }

    /// Guess from a file name, defaulting to JSON lines.
    pub fn from_path(path: &std::path::Path) -> TrackFormat {
        match path.extension().and_then(|e| e.to_str()) {
            Some("csv") => TrackFormat::Csv,
            _ => TrackFormat::Jsonl,
        }
    }
}

impl FromStr for TrackFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "jsonl" => Ok(TrackFormat::Jsonl),
            "csv" => Ok(TrackFormat::Csv),
            other => Err(Error::Config(format!("unknown track format {other:?}"))),
        }
    }
}

/// Per-session metadata from the manifest.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionEntry {
    pub session_id: String,
    pub cohort_id: String,
    pub date: String,
    pub duration_s: u32,
}

/// Session manifest: which sessions exist, how long they ran, and the MoCA
/// scores of the cohort attending each.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub schema_version: u32,
    #[serde(default)]
    pub cohorts: Vec<Cohort>,
    #[serde(default)]
    pub sessions: Vec<SessionEntry>,
}

impl Manifest {
    pub fn new(cohorts: Vec<Cohort>, sessions: Vec<SessionEntry>) -> Result<Self> {
        let m = Manifest {
            schema_version: MANIFEST_SCHEMA_VERSION,
            cohorts,
            sessions,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != MANIFEST_SCHEMA_VERSION {
            return Err(invalid(format!(
                "unsupported manifest schema_version {}",
                self.schema_version
            )));
        }
        let mut cohort_ids = BTreeSet::new();
        for c in &self.cohorts {
            c.validate()?;
            if !cohort_ids.insert(c.cohort_id.as_str()) {
                return Err(invalid(format!("duplicate cohort {}", c.cohort_id)));
            }
        }
        let mut session_ids = BTreeSet::new();
        for s in &self.sessions {
            if !session_ids.insert(s.session_id.as_str()) {
                return Err(invalid(format!("duplicate session {}", s.session_id)));
            }
            if s.duration_s == 0 {
                return Err(invalid(format!("session {} has zero duration", s.session_id)));
            }
            if !cohort_ids.contains(s.cohort_id.as_str()) {
                return Err(invalid(format!(
                    "session {} references unknown cohort {}",
                    s.session_id, s.cohort_id
                )));
            }
        }
        Ok(())
    }

    pub fn session(&self, session_id: &str) -> Option<&SessionEntry> {
        self.sessions.iter().find(|s| s.session_id == session_id)
    }

    pub fn cohort(&self, cohort_id: &str) -> Option<&Cohort> {
        self.cohorts.iter().find(|c| c.cohort_id == cohort_id)
    }

    /// Label of every cohort at the given MoCA cut point.
    pub fn cohort_labels(&self, threshold: f64) -> Result<BTreeMap<String, CohortLabel>> {
        self.cohorts
            .iter()
            .map(|c| Ok((c.cohort_id.clone(), label_cohort_with_threshold(c, threshold)?)))
            .collect()
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("manifest serialises")
    }
}

pub fn load_manifest(text: &str) -> Result<Manifest> {
    let m: Manifest = toml::from_str(text).map_err(|e| Error::Config(format!("manifest: {e}")))?;
    m.validate()?;
    Ok(m)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct RegionConfig {
    name: String,
    polygon: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct FloorPlanConfig {
    schema_version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    bounds: Option<[f64; 4]>,
    #[serde(default)]
    regions: Vec<RegionConfig>,
}

/// Parse floor-plan TOML. `bounds = [min_x, min_y, max_x, max_y]` is
/// optional; an `other` region is added when absent.
pub fn load_floorplan(text: &str) -> Result<FloorPlan> {
    let cfg: FloorPlanConfig =
        toml::from_str(text).map_err(|e| Error::Config(format!("floor plan: {e}")))?;
    if cfg.schema_version != FLOORPLAN_SCHEMA_VERSION {
        return Err(invalid(format!(
            "unsupported floor-plan schema_version {}",
            cfg.schema_version
        )));
    }
    let regions = cfg
        .regions
        .into_iter()
        .map(|r| {
            let poly = r.polygon.iter().map(|&[x, y]| Point2D::new(x, y)).collect();
            Region::new(r.name, poly)
        })
        .collect::<Result<Vec<_>>>()?;
    let bounds = cfg.bounds.map(|[a, b, c, d]| BBox::new(a, b, c, d));
    FloorPlan::new(regions, bounds)
}

pub fn floorplan_to_toml(plan: &FloorPlan) -> String {
    let cfg = FloorPlanConfig {
        schema_version: FLOORPLAN_SCHEMA_VERSION,
        bounds: plan.bounds().map(|b| [b.min_x, b.min_y, b.max_x, b.max_y]),
        regions: plan
            .regions()
            .iter()
            .filter(|r| r.name != OTHER_REGION)
            .map(|r| RegionConfig {
                name: r.name.clone(),
                polygon: r.polygon.iter().map(|p| [p.x, p.y]).collect(),
            })
            .collect(),
    };
    toml::to_string(&cfg).expect("floor plan serialises")
}

/// Ingestion knobs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IngestOptions {
    /// Timestamp gaps larger than this split a track.
    pub max_gap_s: u32,
    /// Positions outside the plan bounds inflated by this margin are dropped.
    pub bounds_margin_m: f64,
    /// Fail on malformed lines instead of counting and skipping them.
    pub strict: bool,
}

impl Default for IngestOptions {
    fn default() -> Self {
        Self {
            max_gap_s: 2,
            bounds_margin_m: 1.0,
            strict: true,
        }
    }
}

/// Accounting for records that did not make it into a trajectory.
#[derive(Debug, Default, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DropReport {
    pub records_read: usize,
    pub records_kept: usize,
    pub gap_singletons: usize,
    pub out_of_bounds: usize,
    pub malformed: usize,
}

impl DropReport {
    pub fn is_balanced(&self) -> bool {
        self.records_read == self.records_kept + self.gap_singletons + self.out_of_bounds + self.malformed
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ingested {
    /// Sessions in manifest order, including those without any track.
    pub sessions: Vec<BreakSession>,
    pub report: DropReport,
}

fn validate_record(rec: &TrackRecord) -> std::result::Result<(), String> {
    if !rec.x.is_finite() || !rec.y.is_finite() {
        return Err("position is not finite".into());
    }
    if let Some(o) = rec.orientation {
        if !(0.0..360.0).contains(&o) {
            return Err(format!("orientation {o} outside [0, 360)"));
        }
    }
    Ok(())
}

fn read_records(
    input: impl Read,
    format: TrackFormat,
    strict: bool,
    report: &mut DropReport,
) -> Result<Vec<TrackRecord>> {
    let mut out = Vec::new();
    let reject = |line: usize, message: String, report: &mut DropReport| -> Result<()> {
        if strict {
            Err(Error::Parse { line, message })
        } else {
            report.malformed += 1;
            Ok(())
        }
    };
    match format {
        TrackFormat::Jsonl => {
            for (idx, line) in BufReader::new(input).lines().enumerate() {
                let line_no = idx + 1;
                let line = line.map_err(|e| Error::Parse {
                    line: line_no,
                    message: e.to_string(),
                })?;
                let trimmed = line.trim_start();
                if trimmed.is_empty() || trimmed.starts_with('#') {
                    continue;
                }
                report.records_read += 1;
                match serde_json::from_str::<TrackRecord>(&line) {
                    Ok(rec) => match validate_record(&rec) {
                        Ok(()) => out.push(rec),
                        Err(msg) => reject(line_no, msg, report)?,
                    },
                    Err(e) => reject(line_no, e.to_string(), report)?,
                }
            }
        }
        TrackFormat::Csv => {
            let mut rdr = csv::ReaderBuilder::new()
                .has_headers(true)
                .trim(csv::Trim::All)
                .comment(Some(b'#'))
                .flexible(false)
                .from_reader(input);
            let headers = rdr.headers().map_err(|e| Error::Parse {
                line: 1,
                message: e.to_string(),
            })?;
            if headers.is_empty() {
                return Ok(out);
            }
            for col in CSV_COLUMNS {
                if !headers.iter().any(|h| h == col) {
                    return Err(Error::Parse {
                        line: 1,
                        message: format!("missing column {col}"),
                    });
                }
            }
            let headers = headers.clone();
            for row in rdr.records() {
                report.records_read += 1;
                let row = match row {
                    Ok(r) => r,
                    Err(e) => {
                        let line = e.position().map_or(0, |p| p.line() as usize);
                        reject(line, e.to_string(), report)?;
                        continue;
                    }
                };
                let line = row.position().map_or(0, |p| p.line() as usize);
                match row.deserialize::<TrackRecord>(Some(&headers)) {
                    Ok(rec) => match validate_record(&rec) {
                        Ok(()) => out.push(rec),
                        Err(msg) => reject(line, msg, report)?,
                    },
                    Err(e) => reject(line, e.to_string(), report)?,
                }
            }
        }
    }
    Ok(out)
}

/// Parse a track stream into validated sessions.
///
/// Records are grouped by session then track, sorted by time, checked for
/// duplicates, filtered against the plan bounds when a plan is given, and cut
/// at timestamp gaps. Every manifest session is returned, in manifest order.
/// Lines starting with `#` are comments in both formats.
pub fn parse_tracks(
    input: impl Read,
    format: TrackFormat,
    manifest: &Manifest,
    plan: Option<&FloorPlan>,
    options: &IngestOptions,
) -> Result<Ingested> {
    let mut report = DropReport::default();
    let records = read_records(input, format, options.strict, &mut report)?;
    let bounds = plan
        .and_then(FloorPlan::bounds)
        .map(|b| b.inflate(options.bounds_margin_m));

    let mut grouped: BTreeMap<&str, BTreeMap<&str, Vec<TrackSample>>> = BTreeMap::new();
    for rec in &records {
        let entry = manifest
            .session(&rec.session_id)
            .ok_or_else(|| Error::UnknownSession(rec.session_id.clone()))?;
        if rec.t >= entry.duration_s {
            return Err(invalid(format!(
                "session {} track {} sample t={} is not before duration {}",
                rec.session_id, rec.track_id, rec.t, entry.duration_s
            )));
        }
        let position = Point2D::new(rec.x, rec.y);
        if bounds.is_some_and(|b| !b.contains(&position)) {
            report.out_of_bounds += 1;
            continue;
        }
        grouped
            .entry(rec.session_id.as_str())
            .or_default()
            .entry(rec.track_id.as_str())
            .or_default()
            .push(TrackSample::new(rec.t, position, rec.orientation));
    }

    let mut sessions = Vec::with_capacity(manifest.sessions.len());
    for entry in &manifest.sessions {
        let mut trajectories = Vec::new();
        if let Some(tracks) = grouped.get_mut(entry.session_id.as_str()) {
            for (track_id, samples) in tracks.iter_mut() {
                samples.sort_by_key(|s| s.t);
                if let Some(w) = samples.windows(2).find(|w| w[0].t == w[1].t) {
                    return Err(Error::DuplicateSample {
                        session_id: entry.session_id.clone(),
                        track_id: track_id.to_string(),
                        t: w[0].t,
                    });
                }
                let split = split_on_gaps(track_id, samples, options.max_gap_s)?;
                report.gap_singletons += split.dropped_singletons;
                report.records_kept += split.trajectories.iter().map(|t| t.len()).sum::<usize>();
                trajectories.extend(split.trajectories);
            }
        }
        trajectories.sort_by(|a, b| a.track_id().cmp(b.track_id()));
        sessions.push(BreakSession::new(
            entry.session_id.clone(),
            entry.cohort_id.clone(),
            entry.duration_s,
            trajectories,
        )?);
    }
    debug_assert!(report.is_balanced());
    Ok(Ingested { sessions, report })
}

fn push_float(buf: &mut String, v: f64) {
    // Display never switches to exponent notation and round-trips exactly.
    write!(buf, "{v}").expect("string write");
}

/// Serialise sessions back to the wire format, ordered by session, track and
/// time.
pub fn write_tracks(sessions: &[BreakSession], format: TrackFormat, mut out: impl Write) -> Result<()> {
    let mut buf = String::new();
    if format == TrackFormat::Csv {
        buf.push_str(&CSV_COLUMNS.join(","));
        buf.push('\n');
    }
    for session in sessions {
        for traj in &session.trajectories {
            for s in traj.samples() {
                match format {
                    TrackFormat::Jsonl => {
                        buf.push_str("{\"session_id\":");
                        buf.push_str(&serde_json::to_string(&session.session_id).expect("string"));
                        buf.push_str(",\"track_id\":");
                        buf.push_str(&serde_json::to_string(traj.track_id()).expect("string"));
                        write!(buf, ",\"t\":{},\"x\":", s.t).expect("string write");
                        push_float(&mut buf, s.position.x);
                        buf.push_str(",\"y\":");
                        push_float(&mut buf, s.position.y);
                        buf.push_str(",\"orientation\":");
                        match s.orientation {
                            Some(o) => push_float(&mut buf, o),
                            None => buf.push_str("null"),
                        }
                        buf.push_str("}\n");
                    }
                    TrackFormat::Csv => {
                        buf.push_str(&csv_field(&session.session_id));
                        buf.push(',');
                        buf.push_str(&csv_field(traj.track_id()));
                        write!(buf, ",{},", s.t).expect("string write");
                        push_float(&mut buf, s.position.x);
                        buf.push(',');
                        push_float(&mut buf, s.position.y);
                        buf.push(',');
                        if let Some(o) = s.orientation {
                            push_float(&mut buf, o);
                        }
                        buf.push('\n');
                    }
                }
            }
            if buf.len() > 1 << 16 {
                out.write_all(buf.as_bytes())?;
                buf.clear();
            }
        }
    }
    out.write_all(buf.as_bytes())?;
    Ok(())
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) || s.starts_with('#') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn manifest(ids: &[(&str, u32)]) -> Manifest {
        Manifest::new(
            vec![Cohort::new("A", vec![25, 26]).unwrap()],
            ids.iter()
                .map(|&(id, d)| SessionEntry {
                    session_id: id.into(),
                    cohort_id: "A".into(),
                    date: "2023-01-02".into(),
                    duration_s: d,
                })
                .collect(),
        )
        .unwrap()
    }

    fn jsonl(lines: &[&str]) -> Vec<u8> {
        lines.join("\n").into_bytes()
    }

    #[test]
    fn two_records_make_one_trajectory() {
        let m = manifest(&[("s1", 900)]);
        let input = jsonl(&[
            r#"{"session_id":"s1","track_id":"p","t":0,"x":1.0,"y":2.0}"#,
            r#"{"session_id":"s1","track_id":"p","t":1,"x":1.5,"y":2.0,"orientation":90}"#,
        ]);
        let got = parse_tracks(&input[..], TrackFormat::Jsonl, &m, None, &IngestOptions::default()).unwrap();
        assert_eq!(got.sessions.len(), 1);
        assert_eq!(got.sessions[0].trajectories.len(), 1);
        assert_eq!(got.sessions[0].trajectories[0].len(), 2);
        assert_eq!(got.sessions[0].trajectories[0].samples()[1].orientation, Some(90.0));
    }

    #[test]
    fn comment_lines_are_skipped() {
        let m = manifest(&[("s1", 900)]);
        let rec = r#"{"session_id":"s1","track_id":"p","t":0,"x":1.0,"y":2.0}"#;
        let input = jsonl(&["# config_hash: ab", rec, "  # trailing"]);
        let got = parse_tracks(&input[..], TrackFormat::Jsonl, &m, None, &IngestOptions::default()).unwrap();
        assert_eq!(got.report.records_read, 1);
        let csv = b"# config_hash: ab\nsession_id,track_id,t,x,y,orientation\ns1,p,0,1,2,\n# end\n";
        let got = parse_tracks(&csv[..], TrackFormat::Csv, &m, None, &IngestOptions::default()).unwrap();
        assert_eq!(got.report.records_read, 1);
        assert_eq!(csv_field("#x"), "\"#x\"");
    }

    #[test]
    fn gap_split_and_singleton_drop() {
        let m = manifest(&[("s1", 900)]);
        let input = b"session_id,track_id,t,x,y,orientation\n\
            s1,p,0,0,0,\n\
            s1,p,1,1,0,\n\
            s1,p,5,2,0,\n";
        let got = parse_tracks(&input[..], TrackFormat::Csv, &m, None, &IngestOptions::default()).unwrap();
        let trajs = &got.sessions[0].trajectories;
        assert_eq!(trajs.len(), 1);
        assert_eq!(trajs[0].samples().iter().map(|s| s.t).collect::<Vec<_>>(), [0, 1]);
        assert_eq!(got.report.gap_singletons, 1);
        assert!(got.report.is_balanced());
    }

    #[test]
    fn malformed_line_reports_line_number() {
        let m = manifest(&[("s1", 900)]);
        let input = jsonl(&[
            r#"{"session_id":"s1","track_id":"p","t":0,"x":1.0,"y":2.0}"#,
            r#"{"session_id":"s1","track_id":"p","t":"x"}"#,
        ]);
        let err = parse_tracks(&input[..], TrackFormat::Jsonl, &m, None, &IngestOptions::default()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");

        let lenient = IngestOptions {
            strict: false,
            ..IngestOptions::default()
        };
        let got = parse_tracks(&input[..], TrackFormat::Jsonl, &m, None, &lenient).unwrap();
        assert_eq!(got.report.malformed, 1);
        assert_eq!(got.report.gap_singletons, 1);
        assert!(got.report.is_balanced());
    }

    #[test]
    fn csv_malformed_line_number() {
        let m = manifest(&[("s1", 900)]);
        let input = b"session_id,track_id,t,x,y,orientation\ns1,p,0,0,0,\ns1,p,one,1,0,\n";
        let err = parse_tracks(&input[..], TrackFormat::Csv, &m, None, &IngestOptions::default()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
    }

    #[test]
    fn duplicate_and_unknown_session_errors() {
        let m = manifest(&[("s1", 900)]);
        let dup = jsonl(&[
            r#"{"session_id":"s1","track_id":"p","t":3,"x":1.0,"y":2.0}"#,
            r#"{"session_id":"s1","track_id":"p","t":3,"x":1.0,"y":2.5}"#,
        ]);
        let err = parse_tracks(&dup[..], TrackFormat::Jsonl, &m, None, &IngestOptions::default()).unwrap_err();
        assert!(matches!(err, Error::DuplicateSample { t: 3, .. }));

        let unknown = jsonl(&[r#"{"session_id":"s9","track_id":"p","t":3,"x":1.0,"y":2.0}"#]);
        let err = parse_tracks(&unknown[..], TrackFormat::Jsonl, &m, None, &IngestOptions::default()).unwrap_err();
        assert!(matches!(err, Error::UnknownSession(ref s) if s == "s9"));
    }

    #[test]
    fn out_of_bounds_records_are_counted() {
        let m = manifest(&[("s1", 900)]);
        let plan = FloorPlan::default_facility();
        let input = jsonl(&[
            r#"{"session_id":"s1","track_id":"p","t":0,"x":-0.5,"y":2.0}"#,
            r#"{"session_id":"s1","track_id":"p","t":1,"x":-3.0,"y":2.0}"#,
            r#"{"session_id":"s1","track_id":"p","t":2,"x":1.0,"y":2.0}"#,
        ]);
        let got = parse_tracks(&input[..], TrackFormat::Jsonl, &m, Some(&plan), &IngestOptions::default()).unwrap();
        assert_eq!(got.report.out_of_bounds, 1);
        assert_eq!(got.sessions[0].trajectories[0].len(), 2);
        assert!(got.report.is_balanced());
    }

    #[test]
    fn manifest_sessions_without_tracks_are_kept() {
        let ids: Vec<String> = (0..315).map(|i| format!("s{i:03}")).collect();
        let pairs: Vec<(&str, u32)> = ids.iter().map(|s| (s.as_str(), 900)).collect();
        let m = manifest(&pairs);
        let got = parse_tracks(&b""[..], TrackFormat::Jsonl, &m, None, &IngestOptions::default()).unwrap();
        assert_eq!(got.sessions.len(), 315);
    }

    #[test]
    fn floorplan_config() {
        let plan = load_floorplan(
            r#"
            schema_version = 1
            [[regions]]
            name = "gym"
            polygon = [[0, 0], [10, 0], [10, 10], [0, 10]]
            "#,
        )
        .unwrap();
        assert_eq!(plan.region_names(), ["gym", "other"]);
        assert_eq!(plan.region_of(&Point2D::new(5.0, 5.0)), "gym");

        let empty = load_floorplan("schema_version = 1\n").unwrap();
        assert_eq!(empty.region_names(), ["other"]);
        assert_eq!(empty.region_of(&Point2D::new(5.0, 5.0)), "other");

        let err = load_floorplan(
            r#"
            schema_version = 1
            [[regions]]
            name = "gym"
            polygon = [[0, 0], [10, 0], [10, 10], [0, 10]]
            [[regions]]
            name = "lounge"
            polygon = [[5, 5], [15, 5], [15, 15], [5, 15]]
            "#,
        )
        .unwrap_err();
        assert!(matches!(err, Error::OverlappingRegions(ref a, ref b) if a == "gym" && b == "lounge"));

        assert!(load_floorplan("schema_version = 7\n").is_err());
    }

    #[test]
    fn floorplan_toml_round_trip() {
        let plan = FloorPlan::default_facility();
        let again = load_floorplan(&floorplan_to_toml(&plan)).unwrap();
        assert_eq!(plan, again);
    }

    #[test]
    fn manifest_toml_round_trip() {
        let m = manifest(&[("s1", 900), ("s2", 1800)]);
        assert_eq!(load_manifest(&m.to_toml()).unwrap(), m);
        let bad = m.to_toml().replace("cohort_id = \"A\"\ndate", "cohort_id = \"Q\"\ndate");
        assert!(load_manifest(&bad).is_err());
    }

    #[test]
    fn writer_uses_plain_decimal() {
        let m = manifest(&[("s1", 900)]);
        let input = jsonl(&[
            r#"{"session_id":"s1","track_id":"p","t":0,"x":0.0000001,"y":2.0}"#,
            r#"{"session_id":"s1","track_id":"p","t":1,"x":1e3,"y":2.0}"#,
        ]);
        let got = parse_tracks(&input[..], TrackFormat::Jsonl, &m, None, &IngestOptions::default()).unwrap();
        let mut out = Vec::new();
        write_tracks(&got.sessions, TrackFormat::Jsonl, &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert!(text.contains("\"x\":0.0000001"), "{text}");
        assert!(text.contains("\"x\":1000,"), "{text}");
        assert!(!text.contains("e-7"));
    }
}
