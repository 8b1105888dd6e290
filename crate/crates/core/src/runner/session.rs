//! A child experiment process speaking the line protocol.

use std::collections::BTreeMap;
use std::io::{BufRead, BufReader, Write};
use std::path::PathBuf;
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::thread;
use std::time::Duration;

use super::protocol::{Message, RunStatus};
use super::RunnerError;
use crate::design::Run;
use crate::spec::Factor;

/// Outcome of one run as reported (or not) by the process.
#[derive(Debug, Clone, PartialEq)]
pub struct RunReply {
    pub status: RunStatus,
    pub responses: BTreeMap<String, f64>,
    pub reason: Option<String>,
}

impl RunReply {
    fn failed(status: RunStatus, reason: impl Into<String>) -> Self {
        RunReply {
            status,
            responses: BTreeMap::new(),
            reason: Some(reason.into()),
        }
    }
}

pub struct Session {
    child: Child,
    stdin: Option<ChildStdin>,
    lines: Receiver<String>,
    metrics: Vec<String>,
    alive: bool,
}

/// Finds the program: paths are used as given, bare names are looked up
/// next to the current executable first and then on `PATH`.
pub fn resolve_program(name: &str) -> PathBuf {
    if name.contains(std::path::MAIN_SEPARATOR) || name.contains('/') {
        return PathBuf::from(name);
    }
    if let Some(dir) = std::env::current_exe().ok().and_then(|p| p.parent().map(PathBuf::from)) {
        // test harnesses live one level down, in cargo's deps/ directory
        let mut dirs = vec![dir.clone()];
        if dir.file_name().is_some_and(|n| n == "deps") {
            dirs.extend(dir.parent().map(PathBuf::from));
        }
        for d in dirs {
            for candidate in [d.join(name), d.join(format!("{name}{}", std::env::consts::EXE_SUFFIX))] {
                if candidate.is_file() {
                    return candidate;
                }
            }
        }
    }
    PathBuf::from(name)
}

impl Session {
    /// Starts the process and performs the `init`/`ready` handshake.
    pub fn spawn(
        command: &[String],
        environment: &BTreeMap<String, String>,
        factors: &[Factor],
        metrics: &[String],
        timeout: Duration,
    ) -> Result<Session, RunnerError> {
        let (program, args) = command.split_first().ok_or_else(|| RunnerError::SpawnFailure {
            command: String::new(),
            reason: "empty runner command".into(),
        })?;
        let mut child = Command::new(resolve_program(program))
            .args(args)
            .envs(environment)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(|e| RunnerError::SpawnFailure {
                command: command.join(" "),
                reason: e.to_string(),
            })?;
        let stdout = child.stdout.take().expect("stdout piped");
        let (tx, rx) = mpsc::channel();
        thread::spawn(move || {
            for line in BufReader::new(stdout).lines() {
                let Ok(line) = line else { break };
                if tx.send(line).is_err() {
                    break;
                }
            }
        });
        let mut session = Session {
            stdin: child.stdin.take(),
            child,
            lines: rx,
            metrics: metrics.to_vec(),
            alive: true,
        };
        let init = Message::Init {
            factors: factors.to_vec(),
            metrics: metrics.to_vec(),
        };
        if session.send(&init).is_err() {
            session.kill();
            return Err(RunnerError::SpawnFailure {
                command: command.join(" "),
                reason: "process closed its input before the handshake".into(),
            });
        }
        let line = match session.lines.recv_timeout(timeout) {
            Ok(line) => line,
            Err(RecvTimeoutError::Timeout) => {
                session.kill();
                return Err(RunnerError::HandshakeTimeout(timeout.as_secs_f64()));
            }
            Err(RecvTimeoutError::Disconnected) => {
                session.kill();
                return Err(RunnerError::SpawnFailure {
                    command: command.join(" "),
                    reason: "process exited before replying to init".into(),
                });
            }
        };
        match Message::from_line(&line) {
            Ok(Message::Ready { metrics: offered }) => {
                if let Some(missing) = metrics.iter().find(|m| !offered.contains(m)) {
                    session.kill();
                    return Err(RunnerError::ProtocolViolation {
                        line,
                        reason: format!("runner does not provide metric '{missing}'"),
                    });
                }
                Ok(session)
            }
            Ok(_) => {
                session.kill();
                Err(RunnerError::ProtocolViolation {
                    line,
                    reason: "expected a ready message".into(),
                })
            }
            Err(e) => {
                session.kill();
                Err(RunnerError::ProtocolViolation {
                    line,
                    reason: e.to_string(),
                })
            }
        }
    }

    pub fn is_alive(&self) -> bool {
        self.alive
    }

    fn send(&mut self, message: &Message) -> std::io::Result<()> {
        let stdin = self
            .stdin
            .as_mut()
            .ok_or_else(|| std::io::Error::from(std::io::ErrorKind::BrokenPipe))?;
        let mut line = message.to_line();
        line.push('\n');
        stdin.write_all(line.as_bytes())?;
        stdin.flush()
    }

    /// Sends one run and waits for its result. Any failure other than a
    /// well-formed result leaves the session dead and the reply says why.
    pub fn execute(&mut self, run: &Run, timeout: Duration) -> RunReply {
        let request = Message::Run {
            run_id: run.run_id,
            seed: run.seed,
            treatment: run.treatment.clone(),
        };
        if let Err(e) = self.send(&request) {
            self.kill();
            return RunReply::failed(RunStatus::RunnerError, format!("cannot send run: {e}"));
        }
        let line = match self.lines.recv_timeout(timeout) {
            Ok(line) => line,
            Err(RecvTimeoutError::Timeout) => {
                self.kill();
                return RunReply::failed(
                    RunStatus::Timeout,
                    format!("no result within {} s", timeout.as_secs_f64()),
                );
            }
            Err(RecvTimeoutError::Disconnected) => {
                let code = self.kill();
                return RunReply::failed(RunStatus::RunnerError, format!("runner exited during run ({code})"));
            }
        };
        match Message::from_line(&line) {
            Ok(Message::Result {
                run_id,
                status,
                responses,
                reason,
            }) if run_id == run.run_id => {
                if status == RunStatus::Ok {
                    if let Some(m) = self.metrics.iter().find(|m| !responses.contains_key(*m)) {
                        return RunReply::failed(RunStatus::InvalidResponse, format!("result lacks metric '{m}'"));
                    }
                }
                RunReply {
                    status,
                    responses,
                    reason,
                }
            }
            Ok(Message::Error { reason }) => RunReply::failed(RunStatus::InvalidResponse, reason),
            Ok(_) => {
                self.kill();
                RunReply::failed(
                    RunStatus::InvalidResponse,
                    format!("unexpected message for run {}: {line}", run.run_id),
                )
            }
            Err(e) => {
                self.kill();
                RunReply::failed(RunStatus::InvalidResponse, format!("{e}: {line}"))
            }
        }
    }

    /// Kills the process and reaps it; returns a description of how it ended.
    fn kill(&mut self) -> String {
        self.alive = false;
        self.stdin = None;
        let _ = self.child.kill();
        match self.child.wait() {
            Ok(status) => status.to_string(),
            Err(e) => e.to_string(),
        }
    }

    /// Closes the input so the process can exit on its own, then reaps it.
    pub fn close(mut self) {
        self.stdin = None;
        if self.alive {
            // give a well-behaved runner a moment to exit on end of input
            for _ in 0..50 {
                if let Ok(Some(_)) = self.child.try_wait() {
                    return;
                }
                thread::sleep(Duration::from_millis(10));
            }
        }
        self.kill();
    }
}

impl Drop for Session {
    fn drop(&mut self) {
        if let Ok(None) = self.child.try_wait() {
            let _ = self.child.kill();
            let _ = self.child.wait();
        }
    }
}
