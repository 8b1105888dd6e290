use doe_core::spec::{parse_spec, parse_str, ParseOptions, SpecDocument, SpecError};

fn test_spec(factor: &str, extra: &str) -> String {
    format!(
        r#"{{
        "kind": "test_specification",
        "version": 1,
        "test_case": {{
            "name": "tc",
            "purpose_of_investigation": "verification",
            "test_criteria": ["settles within 2 s"]
        }},
        "factors": [
            {{"name": "gain", "role": "treatment_experimental",
              "domain": {{"type": "continuous", "low": 0, "high": 1}}}},
            {factor}
        ],
        "responses": [{{"name": "settling_time", "unit": "s"}}],
        "test_design": {{"family": "full_factorial"}}{extra}
    }}"#
    )
}

const GOOD_FACTOR: &str = r#"{"name": "mode", "role": "nuisance_known_controllable",
    "domain": {"type": "categorical", "labels": ["a", "b"]}}"#;

#[test]
fn inline_test_case_parses() {
    let doc = parse_str(&test_spec(GOOD_FACTOR, ""), ParseOptions::default()).unwrap();
    let SpecDocument::TestSpecification(ts) = doc else {
        panic!("wrong kind");
    };
    assert_eq!(ts.factors.len(), 2);
    assert_eq!(ts.metric_names(), vec!["settling_time".to_string()]);
}

#[test]
fn inverted_range_names_the_factor() {
    let bad = r#"{"name": "delay", "role": "treatment_experimental",
        "domain": {"type": "continuous", "low": 5, "high": 1}}"#;
    let err = parse_str(&test_spec(bad, ""), ParseOptions::default()).unwrap_err();
    let v = err.violations();
    assert!(!v.is_empty(), "{err}");
    assert!(v.iter().any(|v| v.path.starts_with("factors[1]")), "{v:?}");
    assert!(err.to_string().contains("factors[1]"));
}

#[test]
fn unknown_fields_need_lenient_mode() {
    let text = test_spec(GOOD_FACTOR, r#", "colour": "blue""#);
    assert!(parse_str(&text, ParseOptions::default()).is_err());
    assert!(parse_str(&text, ParseOptions { lenient: true }).is_ok());
}

#[test]
fn duplicate_factor_names_are_rejected() {
    let dup = r#"{"name": "gain", "role": "treatment_experimental",
        "domain": {"type": "continuous", "low": 0, "high": 2}}"#;
    assert!(matches!(
        parse_str(&test_spec(dup, ""), ParseOptions::default()),
        Err(SpecError::SchemaViolation { .. })
    ));
}

#[test]
fn malformed_and_unknown_kinds() {
    assert!(matches!(
        parse_str("{not json", ParseOptions::default()),
        Err(SpecError::MalformedFile { .. })
    ));
    assert!(matches!(
        parse_str(r#"{"kind": "recipe", "version": 1}"#, ParseOptions::default()),
        Err(SpecError::UnknownKind { .. })
    ));
}

#[test]
fn bundled_fixtures_resolve_relative_references() {
    let dir = tempfile::tempdir().unwrap();
    doe_core::fixtures::write_frt(dir.path()).unwrap();
    for (name, _) in doe_core::fixtures::FRT_FILES {
        parse_spec(&dir.path().join(name), ParseOptions::default()).unwrap_or_else(|e| panic!("{name}: {e}"));
    }
    assert!(matches!(
        parse_spec(&dir.path().join("missing.json"), ParseOptions::default()),
        Err(SpecError::Io { .. })
    ));
}
