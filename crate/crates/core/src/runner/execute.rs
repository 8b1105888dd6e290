//! Plan execution with worker sessions, a single appender, and resume.

use std::collections::{BTreeSet, VecDeque};
use std::path::Path;
use std::sync::mpsc;
use std::sync::{Arc, Mutex};
use std::thread;
use std::time::{Duration, Instant};

use chrono::{SecondsFormat, Utc};

use super::protocol::RunStatus;
use super::results::{ResultRow, ResultSet, ResultWriter, TOOLKIT_VERSION};
use super::session::{RunReply, Session};
use super::RunnerError;
use crate::design::{Run, RunPlan};
use crate::spec::{ExperimentSpecification, Factor};

const DEFAULT_HANDSHAKE_TIMEOUT: Duration = Duration::from_secs(30);

#[derive(Debug, Clone, PartialEq)]
pub struct ExecuteOptions {
    /// Worker sessions running at once; 1 executes strictly in plan order.
    pub parallelism: usize,
    /// Continue an interrupted result file instead of starting over.
    pub resume: bool,
    /// Stop after this many newly executed runs (the result file is left
    /// as an interrupted run would leave it).
    pub limit: Option<usize>,
}

impl Default for ExecuteOptions {
    fn default() -> Self {
        ExecuteOptions {
            parallelism: 1,
            resume: false,
            limit: None,
        }
    }
}

fn now() -> String {
    Utc::now().to_rfc3339_opts(SecondsFormat::Micros, true)
}

struct Worker<'a> {
    command: &'a [String],
    spec: &'a ExperimentSpecification,
    factors: &'a [Factor],
    metrics: &'a [String],
    block_factor: Option<&'a str>,
    session: Option<Session>,
}

impl Worker<'_> {
    fn timeout(&self) -> Duration {
        Duration::from_secs_f64(self.spec.experiment_setup.timeout_s)
    }

    fn ensure_session(&mut self) -> Result<&mut Session, RunnerError> {
        if self.session.as_ref().is_none_or(|s| !s.is_alive()) {
            if let Some(old) = self.session.take() {
                old.close();
            }
            let handshake = self.timeout().max(DEFAULT_HANDSHAKE_TIMEOUT);
            self.session = Some(Session::spawn(
                self.command,
                &self.spec.experiment_setup.environment,
                self.factors,
                self.metrics,
                handshake,
            )?);
        }
        Ok(self.session.as_mut().expect("session just ensured"))
    }

    fn run(&mut self, run: &Run) -> Result<ResultRow, RunnerError> {
        let timeout = self.timeout();
        let started_at = now();
        let clock = Instant::now();
        // the runner has to set the blocked factor too, so it travels in the
        // treatment on the wire while the result row keeps it in its own column
        let blocked;
        let wire = match (self.block_factor, &run.block) {
            (Some(name), Some(level)) => {
                let mut r = run.clone();
                r.treatment.insert(name.to_string(), level.clone());
                blocked = r;
                &blocked
            }
            _ => run,
        };
        let reply = self.ensure_session()?.execute(wire, timeout);
        // microseconds, which is what the results file keeps
        let wall = (clock.elapsed().as_secs_f64() * 1e6).round() / 1e6;
        let ended_at = now();
        if self.spec.experiment_setup.fresh_process {
            if let Some(s) = self.session.take() {
                s.close();
            }
        }
        let RunReply {
            status,
            responses,
            reason,
        } = reply;
        if let Some(reason) = reason.filter(|_| status != RunStatus::Ok) {
            eprintln!("run {}: {status}: {reason}", run.run_id);
        }
        Ok(ResultRow {
            run_id: run.run_id,
            block: run.block.clone(),
            replicate: run.replicate,
            seed: run.seed,
            treatment: run.treatment.clone(),
            responses: if status == RunStatus::Ok {
                responses
            } else {
                Default::default()
            },
            status,
            wall_time_s: wall,
            started_at,
            ended_at,
        })
    }

    fn finish(self) {
        if let Some(s) = self.session {
            s.close();
        }
    }
}

/// Runs every plan run that has no result yet and returns the result set
/// (sorted by run id). Rows are appended to `results_path` as they finish.
pub fn execute_plan(
    plan: &RunPlan,
    spec: &ExperimentSpecification,
    results_path: &Path,
    options: &ExecuteOptions,
) -> Result<ResultSet, RunnerError> {
    let ts = spec.test_specification();
    let metrics = ts.metric_names();
    let plan_digest = plan.digest();
    let mut factors: Vec<Factor> = plan.factor_names.iter().filter_map(|n| ts.factor(n).cloned()).collect();
    if let Some(b) = plan.block_factor.as_ref().and_then(|n| ts.factor(n)) {
        factors.push(b.clone());
    }
    let categorical = plan
        .factor_names
        .iter()
        .filter(|n| ts.factor(n).is_some_and(Factor::is_categorical))
        .cloned()
        .collect();
    let command = &spec.experiment_setup.command;

    let mut writer = if options.resume && results_path.exists() {
        ResultWriter::resume(results_path, &plan_digest)?
    } else {
        ResultWriter::create(
            results_path,
            ResultSet {
                plan_digest: plan_digest.clone(),
                runner_command: command.clone(),
                toolkit_version: TOOLKIT_VERSION.to_string(),
                master_seed: plan.master_seed,
                factor_names: plan.factor_names.clone(),
                categorical_factors: categorical,
                metric_names: metrics.clone(),
                block_factor: plan.block_factor.clone(),
                rows: Vec::new(),
            },
        )?
    };
    let done: BTreeSet<u64> = writer.set.rows.iter().map(|r| r.run_id).collect();
    let mut pending: VecDeque<&Run> = plan.runs.iter().filter(|r| !done.contains(&r.run_id)).collect();
    if let Some(limit) = options.limit {
        pending.truncate(limit);
    }
    if pending.is_empty() {
        return Ok(writer.set);
    }

    let parallelism = options.parallelism.clamp(1, pending.len());
    let queue = Arc::new(Mutex::new(pending));
    let (tx, rx) = mpsc::channel::<Result<ResultRow, RunnerError>>();
    let factors = &factors;
    let metrics = &metrics;
    let outcome = thread::scope(|scope| {
        for _ in 0..parallelism {
            let queue = Arc::clone(&queue);
            let tx = tx.clone();
            scope.spawn(move || {
                let mut worker = Worker {
                    command,
                    spec,
                    factors,
                    metrics,
                    block_factor: plan.block_factor.as_deref(),
                    session: None,
                };
                loop {
                    let next = queue.lock().expect("queue lock").pop_front();
                    let Some(run) = next else { break };
                    let result = worker.run(run);
                    let failed = result.is_err();
                    if tx.send(result).is_err() || failed {
                        break;
                    }
                }
                worker.finish();
            });
        }
        drop(tx);
        let mut first_error = None;
        for result in rx {
            match result {
                Ok(row) => {
                    if let Err(e) = writer.append(row) {
                        first_error.get_or_insert(e);
                        queue.lock().expect("queue lock").clear();
                    }
                }
                Err(e) => {
                    first_error.get_or_insert(e);
                    queue.lock().expect("queue lock").clear();
                }
            }
        }
        first_error
    });
    match outcome {
        Some(e) => Err(e),
        None => Ok(writer.set),
    }
}
