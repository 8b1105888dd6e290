//! Holistic test descriptions: test cases, test specifications and
//! experiment specifications, stored as JSON files with a `kind`
//! discriminator, plus the decision-support recommenders.

mod model;
mod parse;
mod recommend;

pub use model::*;
pub use parse::{
    check_unique_test_cases, is_identifier, load_experiment_specification, load_test_specification, parse_spec,
    parse_str, to_json, validate_document, ParseOptions, SpecError, Violation, SPEC_VERSION,
};
pub use recommend::{
    recommend_analysis, recommend_design, recommend_nuisance_handling, AnalysisMode, AnalysisPlan, DesignCategory,
    DesignRecommendation, HandlingConcept, Method, ModeConflict, RecommendError,
};

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL_CASE: &str = r#"{
        "kind": "test_case",
        "version": 1,
        "name": "tc1",
        "purpose_of_investigation": "verification",
        "test_criteria": ["peak speed deviation below 0.02 pu"]
    }"#;

    fn spec_with_factor(domain: &str) -> String {
        format!(
            r#"{{
            "kind": "test_specification",
            "version": 1,
            "test_case": {{"name": "tc", "purpose_of_investigation": "characterization",
                           "test_criteria": ["c"]}},
            "factors": [{{"name": "K_aRCI", "role": "treatment_experimental", "domain": {domain}}}],
            "responses": [{{"name": "y"}}],
            "test_design": {{"family": "full_factorial"}}
        }}"#
        )
    }

    #[test]
    fn minimal_test_case_parses() {
        let doc = parse_str(MINIMAL_CASE, ParseOptions::default()).unwrap();
        let SpecDocument::TestCase(tc) = doc else {
            panic!("wrong kind")
        };
        assert_eq!(tc.purpose_of_investigation, Purpose::Verification);
        assert_eq!(tc.name, "tc1");
        assert_eq!(tc.qualification_strategy, None);
    }

    #[test]
    fn reversed_range_names_the_factor() {
        let text = spec_with_factor(r#"{"type": "continuous", "low": 2, "high": 1}"#);
        let err = parse_str(&text, ParseOptions::default()).unwrap_err();
        let v = err.violations();
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].path, "factors[0].domain");
        assert!(v[0].message.contains("K_aRCI"));
    }

    #[test]
    fn categorical_needs_two_labels() {
        let text = spec_with_factor(r#"{"type": "categorical", "labels": ["d"]}"#);
        let err = parse_str(&text, ParseOptions::default()).unwrap_err();
        assert!(err.violations()[0].path.starts_with("factors[0].domain"));
    }

    #[test]
    fn unknown_fields_rejected_unless_lenient() {
        let text = MINIMAL_CASE.replace("\"name\"", "\"colour\": \"red\", \"name\"");
        let err = parse_str(&text, ParseOptions::default()).unwrap_err();
        assert_eq!(err.violations()[0].path, "colour");
        assert!(parse_str(&text, ParseOptions { lenient: true }).is_ok());
    }

    #[test]
    fn nested_unknown_field_path() {
        let text = spec_with_factor(r#"{"type": "continuous", "low": 0, "high": 1, "step": 2}"#);
        let err = parse_str(&text, ParseOptions::default()).unwrap_err();
        assert_eq!(err.violations()[0].path, "factors[0].domain.step");
    }

    #[test]
    fn kind_and_version_checks() {
        let no_kind = r#"{"version": 1, "name": "x"}"#;
        assert!(matches!(
            parse_str(no_kind, ParseOptions::default()),
            Err(SpecError::UnknownKind { kind: None, .. })
        ));
        let bad_kind = r#"{"kind": "widget", "version": 1}"#;
        assert!(matches!(
            parse_str(bad_kind, ParseOptions::default()),
            Err(SpecError::UnknownKind { kind: Some(_), .. })
        ));
        let bad_version = MINIMAL_CASE.replace("\"version\": 1", "\"version\": 2");
        let err = parse_str(&bad_version, ParseOptions::default()).unwrap_err();
        assert_eq!(err.violations()[0].path, "version");
        assert!(matches!(
            parse_str("{not json", ParseOptions::default()),
            Err(SpecError::MalformedFile { .. })
        ));
    }

    #[test]
    fn type_errors_carry_a_field_path() {
        let text = MINIMAL_CASE.replace("\"verification\"", "\"exploration\"");
        let err = parse_str(&text, ParseOptions::default()).unwrap_err();
        assert_eq!(err.violations()[0].path, "purpose_of_investigation");
    }

    #[test]
    fn empty_criteria_and_missing_treatments() {
        let text = MINIMAL_CASE.replace(r#"["peak speed deviation below 0.02 pu"]"#, "[]");
        let err = parse_str(&text, ParseOptions::default()).unwrap_err();
        assert_eq!(err.violations()[0].path, "test_criteria");

        let text = spec_with_factor(r#"{"type": "continuous", "low": 0, "high": 1}"#)
            .replace("treatment_experimental", "nuisance_unknown");
        let err = parse_str(&text, ParseOptions::default()).unwrap_err();
        assert!(err.violations().iter().any(|v| v.path == "factors"));
    }

    #[test]
    fn levels_must_lie_in_domain() {
        let text = spec_with_factor(r#"{"type": "continuous", "low": 0, "high": 2}"#)
            .replace("\"domain\"", "\"levels\": [0, 3], \"domain\"");
        let err = parse_str(&text, ParseOptions::default()).unwrap_err();
        assert_eq!(err.violations()[0].path, "factors[0].levels[1]");
    }

    #[test]
    fn duplicate_test_case_names() {
        let a = parse_str(MINIMAL_CASE, ParseOptions::default()).unwrap();
        let b = a.clone();
        let v = check_unique_test_cases([("a.json", &a), ("b.json", &b)]);
        assert_eq!(v.len(), 1);
        assert!(v[0].message.contains("a.json"));
    }
}
