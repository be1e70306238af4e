use std::collections::BTreeMap;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{AgentTrack, AgentType, TrajectoryFrame};
use crate::error::{Error, Result};

/// Maps canonical fields to header names in the source table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ColumnSchema {
    pub id: String,
    pub time: String,
    pub x: String,
    pub y: String,
    pub lane: Option<String>,
    pub agent_type: Option<String>,
    pub length: Option<String>,
    pub width: Option<String>,
    pub vx: Option<String>,
    pub vy: Option<String>,
    pub ax: Option<String>,
    pub ay: Option<String>,
}

impl Default for ColumnSchema {
    fn default() -> Self {
        Self {
            id: "id".into(),
            time: "time".into(),
            x: "x".into(),
            y: "y".into(),
            lane: Some("lane".into()),
            agent_type: Some("type".into()),
            length: Some("length".into()),
            width: Some("width".into()),
            vx: None,
            vy: None,
            ax: None,
            ay: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LoadReport {
    pub tracks: Vec<AgentTrack>,
    /// Rows dropped for a non-finite or unparsable position or time.
    pub dropped_rows: usize,
}

struct Resolved {
    id: usize,
    time: usize,
    x: usize,
    y: usize,
    lane: Option<usize>,
    agent_type: Option<usize>,
    length: Option<usize>,
    width: Option<usize>,
    vx: Option<usize>,
    vy: Option<usize>,
    ax: Option<usize>,
    ay: Option<usize>,
}

impl Resolved {
    fn new(headers: &csv::StringRecord, schema: &ColumnSchema) -> Result<Self> {
        let find = |name: &str| headers.iter().position(|h| h.trim() == name);
        let required = |name: &str| find(name).ok_or_else(|| Error::MissingColumn(name.to_string()));
        // optional columns that were named explicitly but are absent are tolerated; the
        // default schema names columns many tables do not have
        let optional = |name: &Option<String>| name.as_deref().and_then(find);
        Ok(Self {
            id: required(&schema.id)?,
            time: required(&schema.time)?,
            x: required(&schema.x)?,
            y: required(&schema.y)?,
            lane: optional(&schema.lane),
            agent_type: optional(&schema.agent_type),
            length: optional(&schema.length),
            width: optional(&schema.width),
            vx: optional(&schema.vx),
            vy: optional(&schema.vy),
            ax: optional(&schema.ax),
            ay: optional(&schema.ay),
        })
    }
}

fn parse_f64(record: &csv::StringRecord, col: Option<usize>) -> f64 {
    col.and_then(|c| record.get(c)).and_then(|s| s.trim().parse::<f64>().ok()).unwrap_or(f64::NAN)
}

struct RawRow {
    t: f64,
    frame: Option<TrajectoryFrame>,
    agent_type: Option<AgentType>,
    length: f64,
    width: f64,
}

pub fn load_trajectories(path: &Path, schema: &ColumnSchema, dt: f64) -> Result<LoadReport> {
    let file = std::fs::File::open(path)?;
    read_trajectories(file, schema, dt)
}

/// Read a comma-separated table with a header row into per-agent tracks sorted by time.
///
/// The time grid is validated per agent on every row with a finite timestamp; rows whose
/// position is not finite are then dropped and counted, leaving a gap in the track.
pub fn read_trajectories<R: Read>(reader: R, schema: &ColumnSchema, dt: f64) -> Result<LoadReport> {
    if !(dt > 0.0) {
        return Err(Error::Config(format!("sampling interval must be > 0 (got {dt})")));
    }
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).flexible(true).from_reader(reader);
    let cols = Resolved::new(rdr.headers()?, schema)?;

    let mut by_agent: BTreeMap<String, Vec<RawRow>> = BTreeMap::new();
    let mut dropped = 0usize;
    for record in rdr.records() {
        let record = record?;
        let Some(id) = record.get(cols.id).map(str::trim).filter(|s| !s.is_empty()) else {
            dropped += 1;
            continue;
        };
        let t = parse_f64(&record, Some(cols.time));
        if !t.is_finite() {
            dropped += 1;
            continue;
        }
        let x = parse_f64(&record, Some(cols.x));
        let y = parse_f64(&record, Some(cols.y));
        let frame = (x.is_finite() && y.is_finite()).then(|| {
            let mut f = TrajectoryFrame::new(t, (t / dt).round() as i64, x, y);
            f.lane_id =
                cols.lane.and_then(|c| record.get(c)).map(str::trim).filter(|s| !s.is_empty()).map(str::to_string);
            f.vx = parse_f64(&record, cols.vx);
            f.vy = parse_f64(&record, cols.vy);
            f.ax = parse_f64(&record, cols.ax);
            f.ay = parse_f64(&record, cols.ay);
            f
        });
        let agent_type = cols
            .agent_type
            .and_then(|c| record.get(c))
            .filter(|s| !s.trim().is_empty())
            .map(|s| s.parse::<AgentType>().unwrap_or(AgentType::Other));
        by_agent.entry(id.to_string()).or_default().push(RawRow {
            t,
            frame,
            agent_type,
            length: parse_f64(&record, cols.length),
            width: parse_f64(&record, cols.width),
        });
    }

    let tol = 1e-3 * dt;
    let mut tracks = Vec::with_capacity(by_agent.len());
    for (agent_id, mut rows) in by_agent {
        rows.sort_by(|a, b| a.t.total_cmp(&b.t));
        for w in rows.windows(2) {
            let step = w[1].t - w[0].t;
            if (step - dt).abs() > tol {
                return Err(Error::TimeGrid { agent: agent_id, at: w[1].t, found: step, expected: dt });
            }
        }
        let agent_type = rows.iter().find_map(|r| r.agent_type).unwrap_or(AgentType::Other);
        let dim = |sel: fn(&RawRow) -> f64| rows.iter().map(sel).find(|v| v.is_finite());
        let length = dim(|r| r.length);
        let width = dim(|r| r.width);
        if length.is_some_and(|l| l < 0.0) || width.is_some_and(|w| w < 0.0) {
            return Err(Error::Schema(format!("negative vehicle dimension for agent `{agent_id}`")));
        }
        let frames: Vec<TrajectoryFrame> = rows
            .into_iter()
            .filter_map(|r| {
                if r.frame.is_none() {
                    dropped += 1;
                }
                r.frame
            })
            .collect();
        if frames.is_empty() {
            continue;
        }
        tracks.push(AgentTrack { agent_id, agent_type, length, width, frames });
    }
    Ok(LoadReport { tracks, dropped_rows: dropped })
}
