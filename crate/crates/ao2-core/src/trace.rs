//! Decision-trace log: one row per environment step, the raw material for
//! the interpretability tooling.
//!
//! CSV columns, in order:
//! `step,episode,entry,path,action,distances,reward,exploratory,obs`
//! where `path` is the pipe-joined node-id chain from the entry node to the
//! node whose action edge fired, `distances` holds the observation distance
//! of each path node (pipe-joined), `exploratory` is 0/1, and `obs` is the
//! pipe-joined observation vector. Floats use the shortest representation
//! that round-trips, so logs are byte-stable and lossless.

use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};

pub const TRACE_HEADER: &str = "step,episode,entry,path,action,distances,reward,exploratory,obs";

/// One logged decision.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceRow {
    /// Global step index over the whole run.
    pub step: u64,
    pub episode: u32,
    /// Entry node of the decision path.
    pub entry: u32,
    /// Node ids along the path, entry first.
    pub path: Vec<u32>,
    pub action: usize,
    /// Distance from the observation to each path node.
    pub distances: Vec<f64>,
    /// Reward the environment returned for this action.
    pub reward: f64,
    /// True when epsilon-greedy overrode the greedy action.
    pub exploratory: bool,
    pub obs: Vec<f64>,
}

fn join_u32(values: &[u32]) -> String {
    values
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join("|")
}

fn join_f64(values: &[f64]) -> String {
    values
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join("|")
}

impl TraceRow {
    pub fn to_csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.step,
            self.episode,
            self.entry,
            join_u32(&self.path),
            self.action,
            join_f64(&self.distances),
            self.reward,
            u8::from(self.exploratory),
            join_f64(&self.obs),
        )
    }

    pub fn from_csv_line(line: &str) -> std::result::Result<Self, String> {
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 9 {
            return Err(format!("expected 9 columns, got {}", cols.len()));
        }
        let split_u32 = |s: &str| -> std::result::Result<Vec<u32>, String> {
            if s.is_empty() {
                return Ok(Vec::new());
            }
            s.split('|')
                .map(|p| p.parse::<u32>().map_err(|e| format!("bad id {p:?}: {e}")))
                .collect()
        };
        let split_f64 = |s: &str| -> std::result::Result<Vec<f64>, String> {
            if s.is_empty() {
                return Ok(Vec::new());
            }
            s.split('|')
                .map(|p| p.parse::<f64>().map_err(|e| format!("bad float {p:?}: {e}")))
                .collect()
        };
        Ok(TraceRow {
            step: cols[0].parse().map_err(|e| format!("bad step: {e}"))?,
            episode: cols[1].parse().map_err(|e| format!("bad episode: {e}"))?,
            entry: cols[2].parse().map_err(|e| format!("bad entry: {e}"))?,
            path: split_u32(cols[3])?,
            action: cols[4].parse().map_err(|e| format!("bad action: {e}"))?,
            distances: split_f64(cols[5])?,
            reward: cols[6].parse().map_err(|e| format!("bad reward: {e}"))?,
            exploratory: cols[7] == "1",
            obs: split_f64(cols[8])?,
        })
    }
}

pub fn write_trace(path: &Path, rows: &[TraceRow]) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    writeln!(out, "{TRACE_HEADER}").map_err(|e| Error::io(path, e))?;
    for row in rows {
        writeln!(out, "{}", row.to_csv_line()).map_err(|e| Error::io(path, e))?;
    }
    out.flush().map_err(|e| Error::io(path, e))
}

pub fn read_trace(path: &Path) -> Result<Vec<TraceRow>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = BufReader::new(file);
    let mut rows = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if i == 0 {
            if line.trim() != TRACE_HEADER {
                return Err(Error::parse(path, format!("unexpected header {line:?}")));
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        rows.push(
            TraceRow::from_csv_line(&line)
                .map_err(|m| Error::parse(path, format!("line {}: {m}", i + 1)))?,
        );
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> TraceRow {
        TraceRow {
            step: 42,
            episode: 3,
            entry: 7,
            path: vec![7, 9],
            action: 1,
            distances: vec![0.25, 0.1],
            reward: -1.5,
            exploratory: true,
            obs: vec![0.1, -0.2, 0.3],
        }
    }

    #[test]
    fn csv_line_round_trips() {
        let row = sample();
        let parsed = TraceRow::from_csv_line(&row.to_csv_line()).unwrap();
        assert_eq!(parsed, row);
    }

    #[test]
    fn file_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("trace.csv");
        let rows = vec![sample(), {
            let mut r = sample();
            r.step = 43;
            r.exploratory = false;
            r
        }];
        write_trace(&path, &rows).unwrap();
        assert_eq!(read_trace(&path).unwrap(), rows);
    }
}
