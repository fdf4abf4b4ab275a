//! Per-episode run records shared by the incremental agents and the harness.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One episode (or iteration) of one run.
///
/// `tracked_value_1` and `tracked_value_2` carry the two approximate values a
/// learning-curve plot follows in green and red: the start state's left and
/// right action values for Q-learning and the DQN, or the two aliased-group
/// state values for actor-critic. `policy_stat` is the actor's probability of
/// the right action at the start state, where an actor exists.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub seed: u64,
    pub episode: usize,
    #[serde(rename = "return")]
    pub return_: f64,
    pub tracked_value_1: f64,
    pub tracked_value_2: f64,
    pub policy_stat: Option<f64>,
}

pub const CSV_HEADER: &str = "seed,episode,return,tracked_value_1,tracked_value_2,pi_r_at_A";

pub fn to_csv(records: &[RunRecord]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.seed,
            r.episode,
            r.return_,
            r.tracked_value_1,
            r.tracked_value_2,
            r.policy_stat.map_or_else(String::new, |p| p.to_string())
        ));
    }
    out
}

/// Parse records from CSV text, tolerating extra columns but insisting on the
/// required ones by name.
pub fn from_csv(text: &str) -> Result<Vec<RunRecord>> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::MalformedCsv("empty input".into()))?;
    let columns: Vec<&str> = header.split(',').map(str::trim).collect();
    let col = |name: &str| -> Result<usize> {
        columns
            .iter()
            .position(|c| *c == name)
            .ok_or_else(|| Error::MissingColumn(name.to_string()))
    };
    let seed_i = col("seed")?;
    let episode_i = col("episode")?;
    let return_i = col("return")?;
    let tv1_i = col("tracked_value_1")?;
    let tv2_i = col("tracked_value_2")?;
    let ps_i = columns
        .iter()
        .position(|c| *c == "pi_r_at_A" || *c == "policy_stat");

    let mut records = Vec::new();
    for (lineno, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        let get = |i: usize| -> Result<&str> {
            fields.get(i).copied().ok_or_else(|| {
                Error::MalformedCsv(format!("line {}: missing field {i}", lineno + 2))
            })
        };
        let parse = |s: &str| -> Result<f64> {
            s.trim()
                .parse::<f64>()
                .map_err(|e| Error::MalformedCsv(format!("line {}: {e}", lineno + 2)))
        };
        let policy_stat = match ps_i {
            Some(i) => {
                let raw = fields.get(i).copied().unwrap_or("").trim();
                if raw.is_empty() {
                    None
                } else {
                    Some(parse(raw)?)
                }
            }
            None => None,
        };
        records.push(RunRecord {
            seed: parse(get(seed_i)?)? as u64,
            episode: parse(get(episode_i)?)? as usize,
            return_: parse(get(return_i)?)?,
            tracked_value_1: parse(get(tv1_i)?)?,
            tracked_value_2: parse(get(tv2_i)?)?,
            policy_stat,
        });
    }
    Ok(records)
}
