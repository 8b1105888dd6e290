use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Serialize;

use doe_core::design::RunPlan;
use doe_core::runner::{execute_plan, ExecuteOptions, ResultSet, RunStatus};
use doe_core::spec::ExperimentSpecification;

use crate::args::{GlobalArgs, RunArgs};
use crate::error::{CliError, OrExit, EXIT_EXECUTION};
use crate::output::{emit, Render};
use crate::pipeline::{build_design, build_plan, load_experiment, DesignSidecar};

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub plan_digest: String,
    pub results: String,
    pub planned_runs: usize,
    pub recorded_runs: usize,
    pub status_counts: BTreeMap<String, usize>,
    pub results_digest: String,
}

impl Render for RunReport {
    fn text(&self) -> String {
        let counts: Vec<String> = self.status_counts.iter().map(|(k, v)| format!("{k} {v}")).collect();
        let mut s = format!(
            "{} of {} runs recorded in {} ({})\n",
            self.recorded_runs,
            self.planned_runs,
            self.results,
            counts.join(", ")
        );
        let failed: usize = self
            .status_counts
            .iter()
            .filter(|(k, _)| k.as_str() != "ok")
            .map(|(_, v)| v)
            .sum();
        if failed > 0 {
            s += &format!(
                "warning: {failed} failed run(s) will be excluded from analysis, leaving the design unbalanced\n"
            );
        }
        s += &format!("plan digest {}\n", self.plan_digest);
        s
    }
}

/// The run plan for an experiment: read from `plan` when given, otherwise
/// built from the design sidecar the specification names, or from its test
/// design request.
pub fn plan_for(
    es: &ExperimentSpecification,
    experiment_path: &Path,
    plan: Option<&Path>,
    seed: Option<u64>,
) -> Result<RunPlan, CliError> {
    if let Some(p) = plan {
        return RunPlan::load(p).map_err(|e| CliError::validation(format!("cannot read plan {}: {e}", p.display())));
    }
    let ts = es.test_specification();
    let seed = seed.unwrap_or(es.experiment_design.master_seed);
    let replicates = es.experiment_design.replicates;
    match &es.experiment_design.design {
        Some(rel) => {
            let base = experiment_path.parent().unwrap_or(Path::new("."));
            let path = base.join(rel);
            let text = std::fs::read_to_string(&path)
                .map_err(|e| CliError::validation(format!("cannot read design {}: {e}", path.display())))?;
            let side: DesignSidecar = serde_json::from_str(&text)
                .map_err(|e| CliError::validation(format!("bad design file {}: {e}", path.display())))?;
            build_plan(ts, &side.request, &side.design, seed, replicates)
        }
        None => {
            let out = build_design(ts, &ts.test_design, seed)?;
            build_plan(ts, &ts.test_design, &out.design, seed, replicates)
        }
    }
}

pub fn summarize(plan: &RunPlan, set: &ResultSet, results: &Path) -> RunReport {
    let mut status_counts = BTreeMap::new();
    for r in &set.rows {
        *status_counts.entry(r.status.name().to_string()).or_insert(0) += 1;
    }
    status_counts.entry(RunStatus::Ok.name().to_string()).or_insert(0);
    RunReport {
        plan_digest: plan.digest(),
        results: results.display().to_string(),
        planned_runs: plan.runs.len(),
        recorded_runs: set.rows.len(),
        status_counts,
        results_digest: set.results_digest(),
    }
}

pub fn cmd_run(args: &RunArgs, global: &GlobalArgs) -> Result<RunReport, CliError> {
    if args.parallel == 0 {
        return Err(CliError::validation("--parallel must be at least 1"));
    }
    let (es, _) = load_experiment(&args.experiment, global.lenient)?;
    let plan = plan_for(&es, &args.experiment, args.plan.as_deref(), global.seed)?;
    std::fs::create_dir_all(&global.out_dir).or_exit(EXIT_EXECUTION)?;
    if args.plan.is_none() {
        plan.save(&global.out_dir).or_exit(EXIT_EXECUTION)?;
    }
    let results: PathBuf = args
        .results
        .clone()
        .unwrap_or_else(|| global.out_dir.join("results.csv"));
    if let Some(parent) = results.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).or_exit(EXIT_EXECUTION)?;
    }
    let options = ExecuteOptions {
        parallelism: args.parallel,
        resume: args.resume,
        limit: args.limit,
    };
    let set = execute_plan(&plan, &es, &results, &options).or_exit(EXIT_EXECUTION)?;
    let report = summarize(&plan, &set, &results);
    emit(global, &report);
    Ok(report)
}
