use std::collections::BTreeMap;

use serde::Serialize;

use doe_core::analysis::{power_estimate, FactorConclusion, PowerConfig, DEFAULT_ALPHA};
use doe_core::design::Design;
use doe_core::fixtures::write_frt;
use doe_core::runner::{execute_plan, ExecuteOptions};
use doe_core::terms::ModelTerm;

use crate::args::{GlobalArgs, MethodChoice, ScreenDemoArgs};
use crate::commands::analyze::{analyze, verdict_text, AnalysisReport, AnalyzeOptions};
use crate::error::{CliError, OrExit, EXIT_ANALYSIS, EXIT_EXECUTION};
use crate::output::{emit, fmt_num, Render};
use crate::pipeline::{build_design, build_plan, load_experiment, write_json};

/// Power is judged sufficient at this level.
const TARGET_POWER: f64 = 0.8;
const MAX_SUGGESTED_REPLICATES: u32 = 128;
const POWER_SIMULATIONS: usize = 1000;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FactorPower {
    pub factor: String,
    pub power: f64,
    pub half_width_95: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PowerCheck {
    /// Difference in the primary response, between the ends of each
    /// factor's range, that the screening should be able to detect.
    pub reference_effect: f64,
    pub noise_sd_estimate: f64,
    pub replicates: u32,
    pub factors: Vec<FactorPower>,
    pub low_power: bool,
    /// Smallest replicate count (doubling from the current one) reaching the
    /// target power for every factor; `None` if even the cap does not.
    pub suggested_replicates: Option<u32>,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScreenDemoReport {
    pub seed: u64,
    pub noise_sd: f64,
    pub replicates: u32,
    pub runs: usize,
    pub primary_response: String,
    pub conclusions: Vec<FactorConclusion>,
    pub statements: Vec<String>,
    pub power: Option<PowerCheck>,
    pub analysis: AnalysisReport,
}

impl Render for ScreenDemoReport {
    fn text(&self) -> String {
        let mut s = format!(
            "screening the bundled fault ride-through case: {} runs ({} replicates), noise sd {}, seed {}\n\n",
            self.runs, self.replicates, self.noise_sd, self.seed
        );
        s += &self.analysis.text();
        s += &format!("\nconclusions on {}:\n", self.primary_response);
        for st in &self.statements {
            s += &format!("  - {st}\n");
        }
        if let Some(p) = &self.power {
            s += &format!(
                "\npower to detect a difference of {} (noise sd estimate {}, {} replicates):\n",
                fmt_num(p.reference_effect),
                fmt_num(p.noise_sd_estimate),
                p.replicates
            );
            for f in &p.factors {
                s += &format!("    {}: {:.3} ± {:.3}\n", f.factor, f.power, f.half_width_95);
            }
            s += &format!("  {}\n", p.note);
        }
        s
    }
}

fn replicated(design: &Design, r: u32) -> Design {
    let mut d = design.clone();
    d.matrix = (0..r).flat_map(|_| design.matrix.iter().cloned()).collect();
    d
}

fn powers(design: &Design, r: u32, effect: f64, sigma: f64, seed: u64) -> Result<Vec<FactorPower>, CliError> {
    let d = replicated(design, r);
    let terms: Vec<ModelTerm> = d.factor_names.iter().map(|n| ModelTerm::main(n)).collect();
    terms
        .iter()
        .map(|target| {
            let label = target.label();
            let coefficients = BTreeMap::from([(label.clone(), effect / 2.0)]);
            let est = power_estimate(
                &d,
                &PowerConfig {
                    terms: &terms,
                    target,
                    coefficients: &coefficients,
                    noise_sd: sigma,
                    alpha: DEFAULT_ALPHA,
                    n_sims: POWER_SIMULATIONS,
                    seed,
                },
            )
            .or_exit(EXIT_ANALYSIS)?;
            Ok(FactorPower {
                factor: label,
                power: est.power,
                half_width_95: est.half_width_95,
            })
        })
        .collect()
}

fn power_check(design: &Design, replicates: u32, effect: f64, sigma: f64, seed: u64) -> Result<PowerCheck, CliError> {
    let current = powers(design, replicates, effect, sigma, seed)?;
    let low_power = current.iter().any(|f| f.power < TARGET_POWER);
    let mut suggested = (!low_power).then_some(replicates);
    let mut r = replicates.max(1);
    while suggested.is_none() && r < MAX_SUGGESTED_REPLICATES {
        r = (r * 2).min(MAX_SUGGESTED_REPLICATES);
        if powers(design, r, effect, sigma, seed)?
            .iter()
            .all(|f| f.power >= TARGET_POWER)
        {
            suggested = Some(r);
        }
    }
    let note = match (low_power, suggested) {
        (false, _) => format!("power is at least {TARGET_POWER} for every factor"),
        (true, Some(r)) => format!(
            "LOW POWER: negligible verdicts are not reliable; about {r} replicates would reach power {TARGET_POWER}"
        ),
        (true, None) => format!(
            "LOW POWER: even {MAX_SUGGESTED_REPLICATES} replicates stay below power {TARGET_POWER}; reduce noise or raise the reference effect"
        ),
    };
    Ok(PowerCheck {
        reference_effect: effect,
        noise_sd_estimate: sigma,
        replicates,
        factors: current,
        low_power,
        suggested_replicates: suggested,
        note,
    })
}

pub fn cmd_screen_demo(args: &ScreenDemoArgs, global: &GlobalArgs) -> Result<ScreenDemoReport, CliError> {
    if !(args.noise >= 0.0 && args.noise.is_finite()) {
        return Err(CliError::validation("--noise must be a finite value >= 0"));
    }
    if args.replicates == 0 || args.parallel == 0 {
        return Err(CliError::validation("--replicates and --parallel must be at least 1"));
    }
    let dir = &global.out_dir;
    let spec_dir = dir.join("specs");
    write_frt(&spec_dir).or_exit(EXIT_EXECUTION)?;
    let (mut es, digest) = load_experiment(&spec_dir.join("frt_screening_experiment.json"), global.lenient)?;
    es.experiment_setup.command = vec!["example-sut".into(), "--noise".into(), args.noise.to_string()];
    es.experiment_design.replicates = args.replicates;
    let seed = global.seed.unwrap_or(es.experiment_design.master_seed);
    let ts = es.test_specification().clone();

    let built = build_design(&ts, &ts.test_design, seed)?;
    let plan = build_plan(&ts, &ts.test_design, &built.design, seed, args.replicates)?;
    plan.save(dir).or_exit(EXIT_EXECUTION)?;
    let results = dir.join("results.csv");
    let options = ExecuteOptions {
        parallelism: args.parallel,
        ..Default::default()
    };
    let set = execute_plan(&plan, &es, &results, &options).or_exit(EXIT_EXECUTION)?;

    let opts = AnalyzeOptions {
        method: MethodChoice::Auto,
        alpha: DEFAULT_ALPHA,
        screening: true,
        nonlinearity_check: false,
        responses: Vec::new(),
    };
    let analysis = analyze(&set, &ts, digest, &opts)?;
    write_json(&dir.join("analysis.json"), &analysis)?;

    let primary = ts.responses[0].name.clone();
    let section = analysis
        .responses
        .iter()
        .find(|r| r.response == primary)
        .ok_or_else(|| CliError::analysis(format!("no analysis of {primary}")))?;
    let conclusions = section.conclusions.clone().unwrap_or_default();
    let statements = conclusions
        .iter()
        .map(|c| format!("{}: {}", c.factor, verdict_text(c)))
        .collect();
    let sigma = section
        .anova
        .as_ref()
        .map(|t| t.residual())
        .filter(|r| r.df > 0)
        .map(|r| r.mean_square.sqrt());
    let power = match sigma {
        Some(s) if s > 0.0 => Some(power_check(&built.design, args.replicates, args.min_effect, s, seed)?),
        _ => None,
    };
    let report = ScreenDemoReport {
        seed,
        noise_sd: args.noise,
        replicates: args.replicates,
        runs: plan.runs.len(),
        primary_response: primary,
        conclusions,
        statements,
        power,
        analysis,
    };
    write_json(&dir.join("screen_demo.json"), &report)?;
    emit(global, &report);
    Ok(report)
}
