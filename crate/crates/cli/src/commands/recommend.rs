use serde::Serialize;

use doe_core::spec::{
    recommend_analysis, recommend_design, recommend_nuisance_handling, AnalysisMode, AnalysisPlan,
    DesignRecommendation, FactorRole, HandlingConcept, Preliminary, Purpose,
};

use crate::args::{GlobalArgs, RecommendArgs};
use crate::error::{CliError, OrExit, EXIT_VALIDATION};
use crate::output::{emit, Render};
use crate::pipeline::load_test_spec;

#[derive(Debug, Clone, Serialize)]
pub struct NuisanceAdvice {
    pub factor: Option<String>,
    pub role: FactorRole,
    pub handling: HandlingConcept,
}

#[derive(Debug, Clone, Serialize)]
pub struct RecommendReport {
    pub analysis: Option<AnalysisPlan>,
    pub design: Option<DesignRecommendation>,
    pub nuisance: Vec<NuisanceAdvice>,
}

impl Render for RecommendReport {
    fn text(&self) -> String {
        let mut s = String::new();
        if let Some(a) = &self.analysis {
            let methods: Vec<String> = a.methods.iter().map(|m| m.to_string()).collect();
            s += &format!("analysis: {} (row: {}; {})\n", methods.join(" + "), a.row, a.note);
        }
        if let Some(d) = &self.design {
            let fams: Vec<String> = d.families.iter().map(|f| f.to_string()).collect();
            s += &format!("design: {:?}: {}\n    {}\n", d.category, fams.join(", "), d.rationale);
        }
        for n in &self.nuisance {
            s += &format!(
                "nuisance {}({}): {:?}\n",
                n.factor.as_deref().map(|f| format!("{f} ")).unwrap_or_default(),
                n.role,
                n.handling
            );
        }
        s
    }
}

fn parse_role(s: &str) -> Result<FactorRole, CliError> {
    FactorRole::ALL
        .into_iter()
        .find(|r| r.to_string() == s)
        .ok_or_else(|| CliError::validation(format!("unknown factor role '{s}'")))
}

fn parse_purpose(s: &str) -> Result<Purpose, CliError> {
    serde_json::from_value(serde_json::Value::String(s.to_string()))
        .map_err(|_| CliError::validation(format!("unknown purpose '{s}'")))
}

pub fn cmd_recommend(args: &RecommendArgs, global: &GlobalArgs) -> Result<RecommendReport, CliError> {
    let spec = match &args.spec {
        Some(p) => Some(load_test_spec(p, global.lenient)?.0),
        None => None,
    };
    let purpose = match (&args.purpose, &spec) {
        (Some(p), _) => Some(parse_purpose(p)?),
        (None, Some(ts)) => Some(ts.test_case().purpose_of_investigation),
        (None, None) => None,
    };
    let (mut screening, mut nonlin) = (args.screening, args.nonlinearity_check);
    if !screening && !nonlin {
        match spec.as_ref().and_then(|ts| ts.preliminary_purpose) {
            Some(Preliminary::Screening) => screening = true,
            Some(Preliminary::NonlinearityCheck) => nonlin = true,
            None => {}
        }
    }
    let analysis = match purpose {
        Some(p) => Some(recommend_analysis(
            AnalysisMode::from_flags(p, screening, nonlin).or_exit(EXIT_VALIDATION)?,
        )),
        None if screening || nonlin => Some(recommend_analysis(if screening {
            AnalysisMode::Screening
        } else {
            AnalysisMode::NonlinearityCheck
        })),
        None => None,
    };

    let advice = spec.as_ref().and_then(|ts| ts.test_design.advice.clone());
    let n_factors = args
        .factors
        .or_else(|| spec.as_ref().map(|ts| ts.design_factors().len()));
    let budget = args
        .max_treatments
        .or_else(|| advice.as_ref().map(|a| a.max_treatments));
    let design = match (n_factors, budget) {
        (Some(k), Some(n)) => Some(
            recommend_design(
                k,
                n,
                args.fluctuations || advice.as_ref().is_some_and(|a| a.fluctuations_expected),
                args.nonlinear || advice.as_ref().is_some_and(|a| a.nonlinear_expected),
            )
            .or_exit(EXIT_VALIDATION)?,
        ),
        _ => None,
    };

    let mut nuisance = Vec::new();
    if let Some(ts) = &spec {
        for f in ts.factors.iter().filter(|f| !f.role.is_treatment()) {
            nuisance.push(NuisanceAdvice {
                factor: Some(f.name.clone()),
                role: f.role,
                handling: recommend_nuisance_handling(f.role),
            });
        }
    }
    for r in &args.roles {
        let role = parse_role(r)?;
        nuisance.push(NuisanceAdvice {
            factor: None,
            role,
            handling: recommend_nuisance_handling(role),
        });
    }
    if analysis.is_none() && design.is_none() && nuisance.is_empty() {
        return Err(CliError::validation(
            "nothing to recommend: give a spec, --purpose, --factors with --max-treatments, or --role",
        ));
    }
    let report = RecommendReport {
        analysis,
        design,
        nuisance,
    };
    emit(global, &report);
    Ok(report)
}
