use std::collections::HashMap;
use std::io::Write;
use std::process::{Command, Stdio};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleRequest {
    pub id: u64,
    pub prompt: String,
    pub temperature: f64,
    /// 0 for the first request of a prompt, then one more per resample.
    pub attempt: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleResponse {
    pub id: u64,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScoreRequest {
    pub id: u64,
    pub wyckoff_text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreResponse {
    pub id: u64,
    pub energy_per_atom: f64,
}

#[derive(Debug, Error)]
pub enum PluginError {
    #[error("could not start `{command}`: {source}")]
    Spawn { command: String, source: std::io::Error },
    #[error("`{command}` exited with {status}")]
    Exit { command: String, status: String },
    #[error("`{command}` output line {line}: {message}")]
    Output { command: String, line: usize, message: String },
}

/// Run `command` through `sh -c`, feeding `input` on standard input and
/// collecting standard output. Standard error passes through.
pub fn run_plugin(command: &str, input: &[u8]) -> Result<Vec<u8>, PluginError> {
    let spawn_err = |source| PluginError::Spawn { command: command.to_string(), source };
    let mut child = Command::new("sh")
        .arg("-c")
        .arg(command)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::inherit())
        .spawn()
        .map_err(spawn_err)?;
    let mut stdin = child.stdin.take().expect("stdin is piped");
    let input = input.to_vec();
    let writer = std::thread::spawn(move || {
        // a plugin that stops reading early is judged by its exit status
        let _ = stdin.write_all(&input);
    });
    let output = child.wait_with_output().map_err(spawn_err)?;
    let _ = writer.join();
    if !output.status.success() {
        return Err(PluginError::Exit { command: command.to_string(), status: output.status.to_string() });
    }
    Ok(output.stdout)
}

pub fn to_jsonl<T: Serialize>(rows: &[T]) -> Vec<u8> {
    let mut out = Vec::new();
    for r in rows {
        serde_json::to_writer(&mut out, r).expect("plain rows serialize");
        out.push(b'\n');
    }
    out
}

/// Parse JSONL, skipping blank lines. Errors carry the 1-based line.
pub fn from_jsonl<T: DeserializeOwned>(bytes: &[u8]) -> Result<Vec<T>, (usize, String)> {
    let text = std::str::from_utf8(bytes).map_err(|e| (0, e.to_string()))?;
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        rows.push(serde_json::from_str(line).map_err(|e| (i + 1, e.to_string()))?);
    }
    Ok(rows)
}

/// Fixed generation keyed by prompt id and attempt.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReplayEntry {
    pub id: u64,
    #[serde(default)]
    pub attempt: u32,
    pub text: String,
}

/// Answer each request with the entry of the same id whose attempt is the
/// largest not exceeding the requested one. Ids without entries get no row.
pub fn replay(requests: &[SampleRequest], entries: &[ReplayEntry]) -> Vec<SampleResponse> {
    let mut by_id: HashMap<u64, Vec<&ReplayEntry>> = HashMap::new();
    for e in entries {
        by_id.entry(e.id).or_default().push(e);
    }
    requests
        .iter()
        .filter_map(|r| {
            let best = by_id.get(&r.id)?.iter().filter(|e| e.attempt <= r.attempt).max_by_key(|e| e.attempt)?;
            Some(SampleResponse { id: r.id, text: best.text.clone() })
        })
        .collect()
}

/// Energies looked up by id; the first id without an entry is returned as
/// the error.
pub fn lookup(requests: &[ScoreRequest], table: &[ScoreResponse]) -> Result<Vec<ScoreResponse>, u64> {
    let by_id: HashMap<u64, f64> = table.iter().map(|r| (r.id, r.energy_per_atom)).collect();
    requests
        .iter()
        .map(|r| by_id.get(&r.id).map(|&e| ScoreResponse { id: r.id, energy_per_atom: e }).ok_or(r.id))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn req(id: u64, attempt: u32) -> SampleRequest {
        SampleRequest { id, prompt: String::new(), temperature: 1.0, attempt }
    }

    #[test]
    fn replay_picks_latest_attempt() {
        let entries = vec![
            ReplayEntry { id: 1, attempt: 0, text: "a".into() },
            ReplayEntry { id: 1, attempt: 2, text: "c".into() },
            ReplayEntry { id: 2, attempt: 1, text: "x".into() },
        ];
        let got = replay(&[req(1, 0), req(1, 1), req(1, 5), req(2, 0), req(3, 0)], &entries);
        let texts: Vec<_> = got.iter().map(|r| (r.id, r.text.as_str())).collect();
        assert_eq!(texts, [(1, "a"), (1, "a"), (1, "c")]);
    }

    #[test]
    fn shell_round_trip() {
        assert_eq!(run_plugin("cat", b"abc\n").unwrap(), b"abc\n");
        assert!(matches!(run_plugin("exit 4", b""), Err(PluginError::Exit { .. })));
        let rows: Vec<SampleResponse> = from_jsonl(b"{\"id\":1,\"text\":\"t\"}\n\n").unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(from_jsonl::<SampleResponse>(b"\n{bad").unwrap_err().0, 2);
    }
}
