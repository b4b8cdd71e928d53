//! Frozen dynamics oracle: transition tuples generated once from the public
//! reference implementations, replayed against the native dynamics.
//!
//! Table format: CSV with header
//! `env,s0,s1,s2,s3,action,n0,n1,n2,n3,reward,done`. Unused state slots
//! hold zeros (the pendulum uses two of the four). Actions are stored as
//! floats: index values for discrete environments, the torque for the
//! pendulum.

use std::path::Path;

use super::{acrobot_dynamics, cartpole_dynamics, pendulum_dynamics};
use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct OracleRow {
    pub env: String,
    pub state: [f64; 4],
    pub action: f64,
    pub next: [f64; 4],
    pub reward: f64,
    pub done: bool,
}

/// Outcome of replaying one row: the worst absolute component error across
/// next state and reward, plus whether the termination flag agreed.
#[derive(Clone, Copy, Debug)]
pub struct RowCheck {
    pub max_err: f64,
    pub done_matches: bool,
}

impl RowCheck {
    pub fn passes(&self, tolerance: f64) -> bool {
        self.max_err <= tolerance && self.done_matches
    }
}

pub fn parse_table(path: &Path) -> Result<Vec<OracleRow>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_table_str(&text).map_err(|m| Error::parse(path, m))
}

pub fn parse_table_str(text: &str) -> std::result::Result<Vec<OracleRow>, String> {
    let mut rows = Vec::new();
    let mut lines = text.lines();
    let header = lines.next().ok_or("empty table")?;
    if header.trim() != "env,s0,s1,s2,s3,action,n0,n1,n2,n3,reward,done" {
        return Err(format!("unexpected header {header:?}"));
    }
    for (lineno, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 12 {
            return Err(format!("line {}: expected 12 columns", lineno + 2));
        }
        let num = |s: &str| -> std::result::Result<f64, String> {
            s.trim()
                .parse::<f64>()
                .map_err(|e| format!("line {}: bad number {s:?}: {e}", lineno + 2))
        };
        rows.push(OracleRow {
            env: cols[0].trim().to_string(),
            state: [num(cols[1])?, num(cols[2])?, num(cols[3])?, num(cols[4])?],
            action: num(cols[5])?,
            next: [num(cols[6])?, num(cols[7])?, num(cols[8])?, num(cols[9])?],
            reward: num(cols[10])?,
            done: cols[11].trim() == "1",
        });
    }
    Ok(rows)
}

/// Replays one row against the native dynamics.
pub fn check_row(row: &OracleRow) -> Result<RowCheck> {
    let (next, reward, done) = match row.env.as_str() {
        "cartpole-v0" => cartpole_dynamics(row.state, row.action as usize),
        "acrobot-v1" => acrobot_dynamics(row.state, row.action as usize),
        "pendulum-v0" => {
            let ([n0, n1], r) = pendulum_dynamics([row.state[0], row.state[1]], row.action);
            ([n0, n1, 0.0, 0.0], r, false)
        }
        other => return Err(Error::UnknownEnvironment(other.to_string())),
    };
    let mut max_err: f64 = (reward - row.reward).abs();
    for i in 0..4 {
        max_err = max_err.max((next[i] - row.next[i]).abs());
    }
    Ok(RowCheck {
        max_err,
        done_matches: done == row.done,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_replays_a_minimal_table() {
        let text = "env,s0,s1,s2,s3,action,n0,n1,n2,n3,reward,done\n\
             pendulum-v0,0.0,0.0,0.0,0.0,0.0,-4.5924254968025759e-18,-9.1848509936051509e-17,0.0,0.0,-0.0,0\n";
        let rows = parse_table_str(text).unwrap();
        assert_eq!(rows.len(), 1);
        let check = check_row(&rows[0]).unwrap();
        assert!(check.passes(1e-10), "max_err {}", check.max_err);
    }

    #[test]
    fn rejects_malformed_tables() {
        assert!(parse_table_str("nope\n").is_err());
        let bad = "env,s0,s1,s2,s3,action,n0,n1,n2,n3,reward,done\nshort,line\n";
        assert!(parse_table_str(bad).is_err());
    }
}
