//! Steps shared by several subcommands: loading specs, building designs and
//! plans.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use doe_core::design::{
    alias_structure, detect_confounding, generate, make_plan, scale_to_ranges, Design, DesignFamily, PlanOptions,
    RunPlan, ScaledTreatment,
};
use doe_core::digest::json_digest;
use doe_core::spec::{
    parse_spec, recommend_design, to_json, DesignRecommendation, DesignRequest, ExperimentSpecification, Factor,
    ParseOptions, SpecDocument, TestSpecification,
};
use doe_core::terms::ModelTerm;

use crate::args::DesignOverrides;
use crate::error::{CliError, OrExit, EXIT_VALIDATION};

/// Digest of a resolved spec document, independent of file layout and
/// formatting.
pub fn spec_digest(doc: &SpecDocument) -> String {
    json_digest(&to_json(doc))
}

fn load(path: &Path, lenient: bool) -> Result<SpecDocument, CliError> {
    parse_spec(path, ParseOptions { lenient }).or_exit(EXIT_VALIDATION)
}

/// A test specification, given directly or through an experiment
/// specification, with the digest of the file that was named.
pub fn load_test_spec(path: &Path, lenient: bool) -> Result<(TestSpecification, String), CliError> {
    let doc = load(path, lenient)?;
    let digest = spec_digest(&doc);
    match doc {
        SpecDocument::TestSpecification(ts) => Ok((ts, digest)),
        SpecDocument::ExperimentSpecification(es) => Ok((es.test_specification().clone(), digest)),
        SpecDocument::TestCase(_) => Err(CliError::validation(format!(
            "{} is a test_case; a test or experiment specification is needed",
            path.display()
        ))),
    }
}

pub fn load_experiment(path: &Path, lenient: bool) -> Result<(ExperimentSpecification, String), CliError> {
    let doc = load(path, lenient)?;
    let digest = spec_digest(&doc);
    match doc {
        SpecDocument::ExperimentSpecification(es) => Ok((es, digest)),
        other => Err(CliError::validation(format!(
            "{} is a {}; an experiment_specification is needed",
            path.display(),
            other.kind()
        ))),
    }
}

pub fn apply_overrides(request: &DesignRequest, o: &DesignOverrides) -> Result<DesignRequest, CliError> {
    let mut r = request.clone();
    if let Some(f) = &o.family {
        r.family =
            DesignFamily::parse(f).ok_or_else(|| CliError::validation(format!("unknown design family '{f}'")))?;
    }
    if !o.generators.is_empty() {
        r.generators = o.generators.clone();
    }
    if o.n_samples.is_some() {
        r.n_samples = o.n_samples;
    }
    if o.n_center.is_some() {
        r.n_center = o.n_center;
    }
    if o.array.is_some() {
        r.array = o.array.clone();
    }
    if o.block.is_some() {
        r.block_factor = o.block.clone();
    }
    Ok(r)
}

/// A generated design with everything `doe design` reports about it.
#[derive(Debug, Clone, Serialize)]
pub struct DesignOutput {
    pub request: DesignRequest,
    pub seed: u64,
    pub design: Design,
    pub treatments: Vec<ScaledTreatment>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub aliases: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub confounding: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub recommendation: Option<DesignRecommendation>,
}

fn low_order_terms(names: &[String]) -> Vec<ModelTerm> {
    let mut terms: Vec<ModelTerm> = names.iter().map(|n| ModelTerm::main(n)).collect();
    for i in 0..names.len() {
        for j in i + 1..names.len() {
            terms.push(ModelTerm::interaction(&[&names[i], &names[j]]));
        }
    }
    terms
}

pub fn build_design(ts: &TestSpecification, request: &DesignRequest, seed: u64) -> Result<DesignOutput, CliError> {
    let factors = ts.design_factors();
    let design = generate(request, &factors, seed).or_exit(EXIT_VALIDATION)?;
    let treatments = scale_to_ranges(&design, &factors).or_exit(EXIT_VALIDATION)?;
    let fractional = matches!(
        design.family,
        DesignFamily::FractionalFactorial | DesignFamily::PlackettBurman
    );
    let aliases = if fractional {
        Some(serde_json::to_value(alias_structure(&design).or_exit(EXIT_VALIDATION)?).expect("serializable"))
    } else {
        None
    };
    let confounding = if fractional || design.family == DesignFamily::OrthogonalArray {
        let report = detect_confounding(&design, &low_order_terms(&design.factor_names));
        Some(serde_json::to_value(report).expect("serializable"))
    } else {
        None
    };
    let recommendation = match &request.advice {
        Some(a) => Some(
            recommend_design(
                factors.len(),
                a.max_treatments,
                a.fluctuations_expected,
                a.nonlinear_expected,
            )
            .or_exit(EXIT_VALIDATION)?,
        ),
        None => None,
    };
    Ok(DesignOutput {
        request: request.clone(),
        seed,
        design,
        treatments,
        aliases,
        confounding,
        recommendation,
    })
}

/// What `doe design` writes as design.json and `doe run` can read back.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DesignSidecar {
    pub spec_digest: String,
    pub seed: u64,
    pub request: DesignRequest,
    pub design: Design,
}

pub fn block_factor<'a>(ts: &'a TestSpecification, request: &DesignRequest) -> Result<Option<&'a Factor>, CliError> {
    match &request.block_factor {
        None => Ok(None),
        Some(name) => ts
            .factor(name)
            .map(Some)
            .ok_or_else(|| CliError::validation(format!("block factor '{name}' is not declared"))),
    }
}

pub fn build_plan(
    ts: &TestSpecification,
    request: &DesignRequest,
    design: &Design,
    seed: u64,
    replicates: u32,
) -> Result<RunPlan, CliError> {
    let factors = ts.design_factors();
    let treatments: Vec<_> = scale_to_ranges(design, &factors)
        .or_exit(EXIT_VALIDATION)?
        .into_iter()
        .map(|t| t.values)
        .collect();
    let options = PlanOptions {
        seed,
        replicates,
        block: block_factor(ts, request)?,
    };
    Ok(make_plan(&treatments, &options)
        .or_exit(EXIT_VALIDATION)?
        .with_design(design))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).expect("serializable") + "\n";
    std::fs::write(path, text).map_err(|e| {
        CliError::new(
            crate::error::EXIT_EXECUTION,
            anyhow::anyhow!("cannot write {}: {e}", path.display()),
        )
    })
}
