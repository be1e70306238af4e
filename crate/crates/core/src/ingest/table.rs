use std::collections::BTreeMap;
use std::io::{Read, Write};

use super::{AgentTrack, AgentType, TrajectoryFrame};
use crate::error::{Error, Result};

pub const FRAMES_HEADER: [&str; 14] =
    ["agent_id", "t", "x", "y", "vx", "vy", "ax", "ay", "jx", "jy", "lane_id", "type", "length", "width"];

pub(crate) fn fmt_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v}")
    } else {
        String::new()
    }
}

pub(crate) fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

/// Canonical frames table: fixed column order, one row per (agent, timestep).
pub fn write_frames_table<W: Write>(writer: W, tracks: &[AgentTrack]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(FRAMES_HEADER)?;
    for track in tracks {
        for f in &track.frames {
            w.write_record([
                track.agent_id.clone(),
                fmt_f64(f.t),
                fmt_f64(f.x),
                fmt_f64(f.y),
                fmt_f64(f.vx),
                fmt_f64(f.vy),
                fmt_f64(f.ax),
                fmt_f64(f.ay),
                fmt_f64(f.jx),
                fmt_f64(f.jy),
                f.lane_id.clone().unwrap_or_default(),
                track.agent_type.to_string(),
                fmt_opt(track.length),
                fmt_opt(track.width),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn read_frames_table<R: Read>(reader: R, dt: f64) -> Result<Vec<AgentTrack>> {
    let mut rdr = csv::Reader::from_reader(reader);
    let headers = rdr.headers()?.clone();
    if headers.iter().collect::<Vec<_>>() != FRAMES_HEADER {
        return Err(Error::Schema("frames table header does not match the canonical layout".into()));
    }
    let num = |s: &str| if s.is_empty() { f64::NAN } else { s.parse().unwrap_or(f64::NAN) };
    let mut map: BTreeMap<String, AgentTrack> = BTreeMap::new();
    for rec in rdr.records() {
        let rec = rec?;
        let id = rec[0].to_string();
        let t = num(&rec[1]);
        let mut f = TrajectoryFrame::new(t, (t / dt).round() as i64, num(&rec[2]), num(&rec[3]));
        f.vx = num(&rec[4]);
        f.vy = num(&rec[5]);
        f.ax = num(&rec[6]);
        f.ay = num(&rec[7]);
        f.jx = num(&rec[8]);
        f.jy = num(&rec[9]);
        f.lane_id = (!rec[10].is_empty()).then(|| rec[10].to_string());
        let opt = |s: &str| Some(num(s)).filter(|v| v.is_finite());
        let track = map.entry(id.clone()).or_insert_with(|| AgentTrack {
            agent_id: id,
            agent_type: rec[11].parse().unwrap_or(AgentType::Other),
            length: opt(&rec[12]),
            width: opt(&rec[13]),
            frames: Vec::new(),
        });
        track.frames.push(f);
    }
    let mut tracks: Vec<AgentTrack> = map.into_values().collect();
    for t in &mut tracks {
        t.frames.sort_by_key(|f| f.step);
    }
    Ok(tracks)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{read_trajectories, ColumnSchema};

    #[test]
    fn frames_table_round_trip() {
        let rep = read_trajectories(
            "id,time,x,y,lane,type,length,width\nb,0,0,0,,car,,\na,0,1.5,2,L1,av,4.5,1.8\na,0.1,2.5,2,L1,av,4.5,1.8\n"
                .as_bytes(),
            &ColumnSchema::default(),
            0.1,
        )
        .unwrap();
        let mut buf = Vec::new();
        write_frames_table(&mut buf, &rep.tracks).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("agent_id,t,x,y,vx,vy,ax,ay,jx,jy,lane_id,type,length,width\n"));
        let back = read_frames_table(buf.as_slice(), 0.1).unwrap();
        assert_eq!(back.len(), 2);
        assert_eq!(back[0].agent_id, "a");
        assert_eq!(back[0].frames[1].x, 2.5);
        assert_eq!(back[0].length, Some(4.5));
        assert_eq!(back[1].length, None);
    }
}
