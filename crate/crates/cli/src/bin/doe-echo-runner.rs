//! Minimal runner for tests: every metric is the sum of the numeric factor
//! values plus the metric's index.
//!
//! Environment:
//! - `ECHO_RUNNER_COUNTER`: file that gets one line per executed run id
//! - `ECHO_RUNNER_FAIL_ON`: comma-separated run ids answered with `runner_error`
//! - `ECHO_RUNNER_EXIT_ON`: run id on which the process exits without answering
//! - `ECHO_RUNNER_SLEEP_MS`: delay before each answer
//! - `ECHO_RUNNER_GARBAGE_ON`: run id answered with a line that is not JSON

use std::collections::BTreeMap;
use std::fs::OpenOptions;
use std::io::{self, BufRead, Write};

use doe_core::runner::{Message, RunStatus};

fn ids(var: &str) -> Vec<u64> {
    std::env::var(var)
        .unwrap_or_default()
        .split(',')
        .filter_map(|s| s.trim().parse().ok())
        .collect()
}

fn main() -> anyhow::Result<()> {
    let counter = std::env::var("ECHO_RUNNER_COUNTER").ok();
    let fail_on = ids("ECHO_RUNNER_FAIL_ON");
    let exit_on = ids("ECHO_RUNNER_EXIT_ON");
    let garbage_on = ids("ECHO_RUNNER_GARBAGE_ON");
    let sleep_ms: u64 = std::env::var("ECHO_RUNNER_SLEEP_MS")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(0);
    let mut metrics: Vec<String> = Vec::new();
    let stdin = io::stdin();
    let mut out = io::stdout().lock();
    for line in stdin.lock().lines() {
        let line = line?;
        let reply = match Message::from_line(&line) {
            Ok(Message::Init { metrics: m, .. }) => {
                metrics = m;
                Message::Ready {
                    metrics: metrics.clone(),
                }
            }
            Ok(Message::Run { run_id, treatment, .. }) => {
                if exit_on.contains(&run_id) {
                    std::process::exit(1);
                }
                if let Some(path) = &counter {
                    let mut f = OpenOptions::new().create(true).append(true).open(path)?;
                    writeln!(f, "{run_id}")?;
                }
                if sleep_ms > 0 {
                    std::thread::sleep(std::time::Duration::from_millis(sleep_ms));
                }
                if garbage_on.contains(&run_id) {
                    writeln!(out, "this is not a protocol message")?;
                    out.flush()?;
                    continue;
                }
                if fail_on.contains(&run_id) {
                    Message::Result {
                        run_id,
                        status: RunStatus::RunnerError,
                        responses: BTreeMap::new(),
                        reason: Some("failure requested by ECHO_RUNNER_FAIL_ON".into()),
                    }
                } else {
                    let sum: f64 = treatment.values().filter_map(|v| v.as_number()).sum();
                    Message::Result {
                        run_id,
                        status: RunStatus::Ok,
                        responses: metrics
                            .iter()
                            .enumerate()
                            .map(|(i, m)| (m.clone(), sum + i as f64))
                            .collect(),
                        reason: None,
                    }
                }
            }
            Ok(other) => Message::Error {
                reason: format!("unexpected {}", other.to_line()),
            },
            Err(e) => Message::Error {
                reason: format!("malformed message: {e}"),
            },
        };
        writeln!(out, "{}", reply.to_line())?;
        out.flush()?;
    }
    Ok(())
}
