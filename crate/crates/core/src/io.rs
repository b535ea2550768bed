//! Stable file formats: trial-record CSV, accuracy-curve CSV, and JSON reports.
//!
//! Trial records use the header
//! `trial_id,position,q,state,signal,obs_L,obs_R,action,correct`, one row per
//! agent, states as `L`/`R` and `correct` as `0`/`1`. Curves use
//! `position,q,accuracy,model`.

use crate::error::{Error, Result};
use crate::model::State;
use crate::sim::{AgentRecord, TopologyKind, TrialRecord};
use serde::{Deserialize, Serialize};
use std::io::{Read, Write};

pub const RECORD_HEADER: [&str; 9] = ["trial_id", "position", "q", "state", "signal", "obs_L", "obs_R", "action", "correct"];

#[derive(Debug, Serialize, Deserialize)]
struct RecordRow {
    trial_id: u64,
    position: u32,
    q: f64,
    state: String,
    signal: f64,
    #[serde(rename = "obs_L")]
    obs_l: u32,
    #[serde(rename = "obs_R")]
    obs_r: u32,
    action: String,
    correct: u8,
}

/// Incremental writer for trial-record CSV.
pub struct RecordWriter<W: Write> {
    inner: csv::Writer<W>,
}

impl<W: Write> RecordWriter<W> {
    pub fn new(writer: W) -> Result<Self> {
        let mut inner = csv::WriterBuilder::new().has_headers(false).from_writer(writer);
        inner.write_record(RECORD_HEADER)?;
        Ok(RecordWriter { inner })
    }

    pub fn write(&mut self, rec: &TrialRecord) -> Result<()> {
        for a in &rec.agents {
            self.inner.serialize(RecordRow {
                trial_id: rec.trial_id,
                position: a.position,
                q: a.q,
                state: rec.state.to_string(),
                signal: a.signal,
                obs_l: a.obs_l,
                obs_r: a.obs_r,
                action: a.action.to_string(),
                correct: u8::from(a.correct),
            })?;
        }
        Ok(())
    }

    pub fn finish(mut self) -> Result<W> {
        self.inner.flush()?;
        self.inner.into_inner().map_err(|e| Error::Io(e.into_error()))
    }
}

pub fn write_records<W: Write>(writer: W, records: &[TrialRecord]) -> Result<W> {
    let mut w = RecordWriter::new(writer)?;
    for r in records {
        w.write(r)?;
    }
    w.finish()
}

/// Reads trial-record CSV, grouping rows by `trial_id` in order of first
/// appearance. A trial whose agents carry more than one distinct link
/// probability is treated as an independent-neighbors trial.
pub fn read_records<R: Read>(reader: R) -> Result<Vec<TrialRecord>> {
    let mut rdr = csv::Reader::from_reader(reader);
    let headers = rdr.headers()?.clone();
    if headers.iter().ne(RECORD_HEADER.iter().copied()) {
        return Err(Error::Malformed(format!("unexpected header {:?}", headers.iter().collect::<Vec<_>>())));
    }
    let mut records: Vec<TrialRecord> = Vec::new();
    for row in rdr.deserialize() {
        let row: RecordRow = row?;
        let state = State::parse(&row.state)?;
        let action = State::parse(&row.action)?;
        if row.correct > 1 {
            return Err(Error::Malformed(format!("trial {}: correct must be 0 or 1", row.trial_id)));
        }
        let agent = AgentRecord {
            position: row.position,
            q: row.q,
            signal: row.signal,
            obs_l: row.obs_l,
            obs_r: row.obs_r,
            action,
            correct: row.correct == 1,
            kind: None,
            flipped: false,
        };
        if agent.correct != (action == state) {
            return Err(Error::Malformed(format!("trial {} position {}: correct flag disagrees", row.trial_id, row.position)));
        }
        match records.last_mut() {
            Some(rec) if rec.trial_id == row.trial_id => {
                if rec.state != state {
                    return Err(Error::Malformed(format!("trial {}: inconsistent state", row.trial_id)));
                }
                rec.agents.push(agent);
            }
            _ => {
                if records.iter().any(|r| r.trial_id == row.trial_id) {
                    return Err(Error::Malformed(format!("trial {}: rows are not contiguous", row.trial_id)));
                }
                records.push(TrialRecord {
                    trial_id: row.trial_id,
                    topology: TopologyKind::Sequential,
                    state,
                    agents: vec![agent],
                    network: None,
                });
            }
        }
    }
    for rec in &mut records {
        for (i, a) in rec.agents.iter().enumerate() {
            if a.position != i as u32 + 1 {
                return Err(Error::Malformed(format!("trial {}: positions must run 1..n in order", rec.trial_id)));
            }
        }
        let first_q = rec.agents[0].q;
        if rec.agents.iter().any(|a| a.q != first_q) {
            rec.topology = TopologyKind::IndependentObserved;
        }
    }
    Ok(records)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub position: u32,
    pub q: f64,
    pub accuracy: f64,
    pub model: String,
}

/// Flattens curves into rows, position-major within each curve.
pub fn curve_rows(model: &str, q: f64, values: &[f64]) -> Vec<CurveRow> {
    values
        .iter()
        .enumerate()
        .map(|(i, &accuracy)| CurveRow { position: i as u32 + 1, q, accuracy, model: model.to_string() })
        .collect()
}

pub fn write_curve_csv<W: Write>(writer: W, rows: &[CurveRow]) -> Result<W> {
    let mut w = csv::Writer::from_writer(writer);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    w.into_inner().map_err(|e| Error::Io(e.into_error()))
}

pub fn read_curve_csv<R: Read>(reader: R) -> Result<Vec<CurveRow>> {
    csv::Reader::from_reader(reader).deserialize().map(|r| r.map_err(Error::from)).collect()
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}
