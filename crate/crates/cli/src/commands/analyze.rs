use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;

use doe_core::analysis::{
    anova, build_model_matrix, compare_models, default_terms, regression, screen_rank, screening_conclusions,
    AnalysisError, AnovaTable, Coefficient, Dataset, FactorConclusion, ModelComparison, RankedTerm, RegressionResult,
};
use doe_core::runner::{ResultSet, RunStatus, TOOLKIT_VERSION};
use doe_core::spec::{
    recommend_analysis, AnalysisMode, Domain, Factor, FactorRole, Method, Preliminary, TestSpecification,
};
use doe_core::terms::ModelTerm;

use crate::args::{AnalyzeArgs, GlobalArgs, MethodChoice};
use crate::error::{CliError, OrExit, EXIT_ANALYSIS, EXIT_VALIDATION};
use crate::output::{emit, fmt_num, fmt_p, table, Render};
use crate::pipeline::{load_test_spec, write_json};

#[derive(Debug, Clone, PartialEq)]
pub struct AnalyzeOptions {
    pub method: MethodChoice,
    pub alpha: f64,
    pub screening: bool,
    pub nonlinearity_check: bool,
    pub responses: Vec<String>,
}

impl From<&AnalyzeArgs> for AnalyzeOptions {
    fn from(a: &AnalyzeArgs) -> Self {
        AnalyzeOptions {
            method: a.method,
            alpha: a.alpha,
            screening: a.screening,
            nonlinearity_check: a.nonlinearity_check,
            responses: a.responses.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Inputs {
    pub spec_digest: String,
    pub plan_digest: String,
    pub results_digest: String,
    pub toolkit_version: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Selection {
    pub mode: AnalysisMode,
    /// Purpose row of the analysis-method guideline that fired.
    pub row: String,
    pub recommended: Vec<Method>,
    pub used: Vec<String>,
    /// `auto` when the guideline chose, `explicit` when --method did.
    pub source: String,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Balance {
    pub balanced: bool,
    pub cells: usize,
    pub min_replicates: usize,
    pub max_replicates: usize,
    /// Treatment cells that lost every run.
    pub empty_cells: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegressionSummary {
    pub terms: Vec<String>,
    pub coefficients: Vec<Coefficient>,
    pub r_squared: f64,
    pub adjusted_r_squared: f64,
    pub sigma: f64,
    pub n: usize,
    pub df_residual: usize,
}

impl RegressionSummary {
    fn new(terms: &[ModelTerm], r: RegressionResult) -> Self {
        RegressionSummary {
            terms: terms.iter().map(ModelTerm::label).collect(),
            coefficients: r.coefficients,
            r_squared: r.r_squared,
            adjusted_r_squared: r.adjusted_r_squared,
            sigma: r.sigma,
            n: r.n,
            df_residual: r.df_residual,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResponseAnalysis {
    pub response: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub anova: Option<AnovaTable>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ranking: Option<Vec<RankedTerm>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub conclusions: Option<Vec<FactorConclusion>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub regression: Option<RegressionSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nonlinearity: Option<ModelComparison>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ancova: Option<AnovaTable>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalysisReport {
    pub inputs: Inputs,
    pub selection: Selection,
    pub alpha: f64,
    pub factors: Vec<String>,
    pub block_factor: Option<String>,
    pub covariates: Vec<String>,
    pub runs_recorded: usize,
    pub runs_analysed: usize,
    pub runs_excluded: usize,
    pub balance: Balance,
    pub responses: Vec<ResponseAnalysis>,
    pub warnings: Vec<String>,
}

fn anova_text(t: &AnovaTable) -> String {
    let rows: Vec<Vec<String>> = t
        .rows
        .iter()
        .map(|r| {
            vec![
                r.source.clone(),
                r.df.to_string(),
                fmt_num(r.sum_of_squares),
                if r.df > 0 { fmt_num(r.mean_square) } else { "-".into() },
                r.f_statistic.map_or("-".into(), fmt_num),
                fmt_p(r.p_value),
            ]
        })
        .collect();
    let mut s = table(&["source", "df", "SS", "MS", "F", "p"], &rows);
    for w in &t.warnings {
        s += &format!("    warning: {w}\n");
    }
    s
}

impl Render for AnalysisReport {
    fn text(&self) -> String {
        let sel = &self.selection;
        let rec: Vec<String> = sel.recommended.iter().map(|m| m.to_string()).collect();
        let mut s = format!(
            "analysis row fired: {} -> {} ({}); using {} [{}]\n",
            sel.row,
            rec.join(" + "),
            sel.note,
            sel.used.join(" + "),
            sel.source
        );
        s += &format!(
            "inputs: spec {}, plan {}, results {}\n",
            &self.inputs.spec_digest[..12],
            &self.inputs.plan_digest[..12],
            &self.inputs.results_digest[..12]
        );
        s += &format!(
            "runs: {} analysed of {} recorded ({} excluded)",
            self.runs_analysed, self.runs_recorded, self.runs_excluded
        );
        s += if self.balance.balanced {
            ", balanced\n"
        } else {
            ", UNBALANCED\n"
        };
        for r in &self.responses {
            s += &format!("\n== {}\n", r.response);
            if let Some(t) = &r.anova {
                s += "ANOVA (sequential sums of squares)\n";
                s += &anova_text(t);
            }
            if let Some(rank) = &r.ranking {
                s += "screening rank\n";
                let rows: Vec<Vec<String>> = rank
                    .iter()
                    .map(|t| {
                        vec![
                            t.term.clone(),
                            fmt_p(t.p_value),
                            if t.significant {
                                "retain".into()
                            } else {
                                "negligible".into()
                            },
                        ]
                    })
                    .collect();
                s += &table(&["term", "p", "decision"], &rows);
            }
            if let Some(c) = &r.conclusions {
                s += "factor decisions (primary response, lower is better)\n";
                for c in c {
                    s += &format!("    {}: {}\n", c.factor, verdict_text(c));
                }
            }
            if let Some(reg) = &r.regression {
                s += &format!(
                    "regression: R^2 = {:.4}, adjusted {:.4}, sigma {}, df {}\n",
                    reg.r_squared,
                    reg.adjusted_r_squared,
                    fmt_num(reg.sigma),
                    reg.df_residual
                );
                let rows: Vec<Vec<String>> = reg
                    .coefficients
                    .iter()
                    .map(|c| {
                        vec![
                            c.label.clone(),
                            fmt_num(c.estimate),
                            fmt_num(c.standard_error),
                            fmt_num(c.t_statistic),
                            fmt_p(Some(c.p_value)),
                        ]
                    })
                    .collect();
                s += &table(&["coefficient", "estimate", "se", "t", "p"], &rows);
            }
            if let Some(n) = &r.nonlinearity {
                s += &format!(
                    "nonlinearity check: F({}, {}) = {}, p = {}; prefer the {:?} model\n",
                    n.df_difference,
                    n.df_residual_full,
                    fmt_num(n.f_statistic),
                    fmt_p(Some(n.p_value)),
                    n.preferred
                );
            }
            if let Some(t) = &r.ancova {
                s += "ANCOVA (covariates first)\n";
                s += &anova_text(t);
            }
        }
        for w in &self.warnings {
            s += &format!("warning: {w}\n");
        }
        s
    }
}

pub fn verdict_text(c: &FactorConclusion) -> String {
    use doe_core::analysis::Verdict::*;
    let what = match &c.verdict {
        TreatmentFactor => "retain as a treatment factor".to_string(),
        BlockAt { level } => format!("block at '{level}' for further analysis"),
        RestrictRange { low, high } => format!("retain with range limited to [{low}, {high}]"),
        Drop => "negligible; exclude from further experiments".to_string(),
    };
    format!("{what} ({})", c.rationale)
}

fn analysis_err(e: AnalysisError) -> CliError {
    CliError::new(EXIT_ANALYSIS, e)
}

fn main_and_pairs(names: &[&str]) -> (Vec<ModelTerm>, Vec<ModelTerm>) {
    let mains = names.iter().map(|n| ModelTerm::main(n)).collect();
    let mut pairs = Vec::new();
    for i in 0..names.len() {
        for j in i + 1..names.len() {
            pairs.push(ModelTerm::interaction(&[names[i], names[j]]));
        }
    }
    (mains, pairs)
}

/// Keeps the interaction terms only while the model leaves residual degrees
/// of freedom.
fn fit_terms(
    data: &Dataset,
    lead: Vec<ModelTerm>,
    rest: Vec<ModelTerm>,
    pairs: Vec<ModelTerm>,
    warnings: &mut Vec<String>,
    what: &str,
) -> Result<Vec<ModelTerm>, CliError> {
    let mut base = lead;
    base.extend(rest);
    let mut full = base.clone();
    full.extend(pairs.iter().cloned());
    let cols = build_model_matrix(data, &full, true).map_err(analysis_err)?.n_cols();
    if pairs.is_empty() || cols < data.n() {
        return Ok(full);
    }
    warnings.push(format!(
        "{what}: {} runs cannot support two-factor interactions; fitting main effects only",
        data.n()
    ));
    Ok(base)
}

fn balance(set: &ResultSet) -> Balance {
    let mut cells: BTreeMap<String, usize> = BTreeMap::new();
    for r in &set.rows {
        let key = format!("{:?}|{:?}", r.treatment, r.block);
        let e = cells.entry(key).or_insert(0);
        if r.status == RunStatus::Ok {
            *e += 1;
        }
    }
    let min = cells.values().copied().min().unwrap_or(0);
    let max = cells.values().copied().max().unwrap_or(0);
    Balance {
        balanced: min == max,
        cells: cells.len(),
        min_replicates: min,
        max_replicates: max,
        empty_cells: cells.values().filter(|&&c| c == 0).count(),
    }
}

/// Analyses a result set against its test specification.
pub fn analyze(
    set: &ResultSet,
    ts: &TestSpecification,
    spec_digest: String,
    opts: &AnalyzeOptions,
) -> Result<AnalysisReport, CliError> {
    if !(opts.alpha > 0.0 && opts.alpha < 1.0) {
        return Err(CliError::validation("--alpha must lie in (0, 1)"));
    }
    let lookup = |n: &String| -> Result<&Factor, CliError> {
        ts.factor(n)
            .ok_or_else(|| CliError::analysis(format!("results column '{n}' is not a factor of the specification")))
    };
    for n in &set.factor_names {
        lookup(n)?;
    }
    // declared order reads better than the sorted column order of the file
    let design_factors: Vec<&Factor> = ts
        .factors
        .iter()
        .filter(|f| set.factor_names.contains(&f.name))
        .collect();
    let block = set.block_factor.as_ref().map(lookup).transpose()?;
    let mut all = design_factors.clone();
    all.extend(block);
    let (data, excluded) = set.dataset(&all).map_err(analysis_err)?;
    if data.n() == 0 {
        return Err(analysis_err(AnalysisError::EmptyResults));
    }
    let covariates: Vec<String> = ts
        .factors
        .iter()
        .filter(|f| f.role == FactorRole::NuisanceKnownUncontrollable)
        .filter(|f| set.metric_names.contains(&f.name))
        .map(|f| f.name.clone())
        .collect();
    let responses: Vec<String> = if opts.responses.is_empty() {
        set.metric_names
            .iter()
            .filter(|m| !covariates.contains(m))
            .cloned()
            .collect()
    } else {
        for r in &opts.responses {
            if !set.metric_names.contains(r) {
                return Err(analysis_err(AnalysisError::UnknownResponse(r.clone())));
            }
        }
        opts.responses.clone()
    };

    let (mut screening, mut nonlin) = (opts.screening, opts.nonlinearity_check);
    if !screening && !nonlin {
        match ts.preliminary_purpose {
            Some(Preliminary::Screening) => screening = true,
            Some(Preliminary::NonlinearityCheck) => nonlin = true,
            None => {}
        }
    }
    let mode = AnalysisMode::from_flags(ts.test_case().purpose_of_investigation, screening, nonlin)
        .or_exit(EXIT_VALIDATION)?;
    let plan = recommend_analysis(mode);
    let (use_anova, use_regression, use_ancova, source) = match opts.method {
        MethodChoice::Auto => (
            plan.methods.contains(&Method::Anova),
            plan.methods.contains(&Method::Regression),
            plan.methods.contains(&Method::Anova) && !covariates.is_empty(),
            "auto",
        ),
        MethodChoice::Anova => (true, false, false, "explicit"),
        MethodChoice::Regression => (false, true, false, "explicit"),
        MethodChoice::Ancova => (false, false, true, "explicit"),
    };
    if use_ancova && covariates.is_empty() {
        return Err(CliError::analysis(
            "ANCOVA needs a nuisance_known_uncontrollable factor recorded as a response metric",
        ));
    }
    let mut used = Vec::new();
    if use_anova {
        used.push("anova".to_string());
    }
    if use_regression {
        used.push("regression".to_string());
    }
    if use_ancova {
        used.push("ancova".to_string());
    }

    let names: Vec<&str> = design_factors.iter().map(|f| f.name.as_str()).collect();
    let lead: Vec<ModelTerm> = block.iter().map(|b| ModelTerm::main(&b.name)).collect();
    let (mains, pairs) = main_and_pairs(&names);
    let mut warnings = Vec::new();
    if excluded > 0 {
        warnings.push(format!("{excluded} run(s) without an ok status were excluded"));
    }
    let grouped = data.with_levels_as_groups();
    let anova_terms = if use_anova {
        fit_terms(
            &grouped,
            lead.clone(),
            mains.clone(),
            pairs.clone(),
            &mut warnings,
            "ANOVA",
        )?
    } else {
        Vec::new()
    };

    let mut out = Vec::new();
    for response in &responses {
        let mut ra = ResponseAnalysis {
            response: response.clone(),
            anova: None,
            ranking: None,
            conclusions: None,
            regression: None,
            nonlinearity: None,
            ancova: None,
        };
        if use_anova {
            let t = anova(&grouped, response, &anova_terms, opts.alpha).map_err(analysis_err)?;
            // factor decisions assume lower is better, which only the
            // primary (first) response is taken to mean
            if mode == AnalysisMode::Screening && *response == responses[0] {
                ra.ranking = Some(screen_rank(&t, opts.alpha));
                ra.conclusions =
                    Some(screening_conclusions(&data, &t, &design_factors, opts.alpha).map_err(analysis_err)?);
            }
            ra.anova = Some(t);
        }
        if use_regression {
            let mut terms = lead.clone();
            terms.extend(default_terms(&data, &names));
            let fit = match regression(&data, response, &terms) {
                Ok(r) => r,
                Err(e @ (AnalysisError::RankDeficient { .. } | AnalysisError::NoResidualDf)) => {
                    warnings.push(format!(
                        "{response}: full regression model failed ({e}); fitting main effects only"
                    ));
                    terms = lead.clone();
                    terms.extend(mains.iter().cloned());
                    regression(&data, response, &terms).map_err(analysis_err)?
                }
                Err(e) => return Err(analysis_err(e)),
            };
            ra.regression = Some(RegressionSummary::new(&terms, fit));
            if mode == AnalysisMode::NonlinearityCheck {
                let mut reduced = lead.clone();
                reduced.extend(mains.iter().cloned());
                reduced.extend(pairs.iter().cloned());
                let mut full = reduced.clone();
                for f in &design_factors {
                    let continuous = matches!(f.domain, Domain::Continuous { .. });
                    if continuous && data.column(&f.name).is_some_and(|c| c.distinct_count() >= 3) {
                        full.push(ModelTerm::power(&f.name, 2));
                    }
                }
                if full.len() == reduced.len() {
                    warnings.push(format!(
                        "{response}: nonlinearity check needs a continuous factor with at least three levels"
                    ));
                } else {
                    match compare_models(&data, response, &reduced, &full, opts.alpha) {
                        Ok(c) => ra.nonlinearity = Some(c),
                        Err(e) => warnings.push(format!("{response}: nonlinearity check failed: {e}")),
                    }
                }
            }
        }
        if use_ancova {
            let mut d = grouped.clone();
            let mut terms = Vec::new();
            for c in &covariates {
                let values = data.response(c).map_err(analysis_err)?.to_vec();
                d.add_continuous(c, values, None).map_err(analysis_err)?;
                terms.push(ModelTerm::covariate(c));
            }
            let mut design_terms = lead.clone();
            design_terms.extend(mains.iter().cloned());
            terms.extend(design_terms);
            ra.ancova = Some(anova(&d, response, &terms, opts.alpha).map_err(analysis_err)?);
        }
        out.push(ra);
    }

    Ok(AnalysisReport {
        inputs: Inputs {
            spec_digest,
            plan_digest: set.plan_digest.clone(),
            results_digest: set.results_digest(),
            toolkit_version: TOOLKIT_VERSION.to_string(),
        },
        selection: Selection {
            mode,
            row: plan.row,
            recommended: plan.methods,
            used,
            source: source.to_string(),
            note: plan.note,
        },
        alpha: opts.alpha,
        factors: names.iter().map(|s| s.to_string()).collect(),
        block_factor: set.block_factor.clone(),
        covariates,
        runs_recorded: set.rows.len(),
        runs_analysed: data.n(),
        runs_excluded: excluded,
        balance: balance(set),
        responses: out,
        warnings,
    })
}

pub fn load_results(path: &Path) -> Result<ResultSet, CliError> {
    ResultSet::load(path).or_exit(EXIT_ANALYSIS)
}

pub fn cmd_analyze(args: &AnalyzeArgs, global: &GlobalArgs) -> Result<AnalysisReport, CliError> {
    let (ts, digest) = load_test_spec(&args.spec, global.lenient)?;
    let set = load_results(&args.results)?;
    let report = analyze(&set, &ts, digest, &AnalyzeOptions::from(args))?;
    std::fs::create_dir_all(&global.out_dir).or_exit(crate::error::EXIT_EXECUTION)?;
    write_json(&global.out_dir.join("analysis.json"), &report)?;
    emit(global, &report);
    Ok(report)
}
