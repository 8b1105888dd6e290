use std::collections::BTreeSet;
use std::fmt;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};

use super::model::*;

pub const SPEC_VERSION: u64 = 1;

/// One failed invariant, located by a JSON field path such as
/// `factors[1].domain`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub path: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum SpecError {
    #[error("cannot read {file}: {source}")]
    Io {
        file: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed file {file}: {message}")]
    MalformedFile { file: String, message: String },
    #[error("schema violation in {file}: {}", join_violations(.violations))]
    SchemaViolation { file: String, violations: Vec<Violation> },
    #[error("unknown kind in {file}: {}", .kind.as_deref().map(|k| format!("{k:?}")).unwrap_or_else(|| "missing `kind` field".into()))]
    UnknownKind { file: String, kind: Option<String> },
}

fn join_violations(v: &[Violation]) -> String {
    v.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; ")
}

impl SpecError {
    pub fn violations(&self) -> &[Violation] {
        match self {
            SpecError::SchemaViolation { violations, .. } => violations,
            _ => &[],
        }
    }
}

/// Parsing options.
#[derive(Debug, Clone, Copy, Default)]
pub struct ParseOptions {
    /// Accept (and ignore) fields the schema does not know.
    pub lenient: bool,
}

/// Reads, checks and validates a spec file, resolving path references
/// relative to the file's directory.
pub fn parse_spec(path: &Path, opts: ParseOptions) -> Result<SpecDocument, SpecError> {
    let file = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|source| SpecError::Io {
        file: file.clone(),
        source,
    })?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    parse_document(&text, &file, Some(&base), opts)
}

/// Parses spec text. `base` is the directory against which path references
/// are resolved; with `None` only inline references are accepted.
pub fn parse_str(text: &str, opts: ParseOptions) -> Result<SpecDocument, SpecError> {
    parse_document(text, "<input>", None, opts)
}

pub fn load_test_specification(path: &Path, opts: ParseOptions) -> Result<TestSpecification, SpecError> {
    match parse_spec(path, opts)? {
        SpecDocument::TestSpecification(t) => Ok(t),
        other => Err(wrong_kind(&path.display().to_string(), "test_specification", &other)),
    }
}

pub fn load_experiment_specification(path: &Path, opts: ParseOptions) -> Result<ExperimentSpecification, SpecError> {
    match parse_spec(path, opts)? {
        SpecDocument::ExperimentSpecification(e) => Ok(e),
        other => Err(wrong_kind(
            &path.display().to_string(),
            "experiment_specification",
            &other,
        )),
    }
}

fn wrong_kind(file: &str, expected: &str, got: &SpecDocument) -> SpecError {
    SpecError::SchemaViolation {
        file: file.to_string(),
        violations: vec![Violation {
            path: "kind".into(),
            message: format!("expected {expected}, found {}", got.kind()),
        }],
    }
}

fn parse_document(text: &str, file: &str, base: Option<&Path>, opts: ParseOptions) -> Result<SpecDocument, SpecError> {
    let value: Value = serde_json::from_str(text).map_err(|e| SpecError::MalformedFile {
        file: file.to_string(),
        message: e.to_string(),
    })?;
    document_from_value(value, file, base, opts)
}

fn document_from_value(
    value: Value,
    file: &str,
    base: Option<&Path>,
    opts: ParseOptions,
) -> Result<SpecDocument, SpecError> {
    let Value::Object(mut obj) = value else {
        return Err(SpecError::MalformedFile {
            file: file.to_string(),
            message: "top level must be a JSON object".into(),
        });
    };
    let kind = match obj.remove("kind") {
        Some(Value::String(k)) => k,
        Some(other) => {
            return Err(SpecError::UnknownKind {
                file: file.to_string(),
                kind: Some(other.to_string()),
            })
        }
        None => {
            return Err(SpecError::UnknownKind {
                file: file.to_string(),
                kind: None,
            })
        }
    };
    if !matches!(
        kind.as_str(),
        "test_case" | "test_specification" | "experiment_specification"
    ) {
        return Err(SpecError::UnknownKind {
            file: file.to_string(),
            kind: Some(kind),
        });
    }
    match obj.remove("version") {
        Some(Value::Number(n)) if n.as_u64() == Some(SPEC_VERSION) => {}
        Some(v) => return Err(schema(file, "version", format!("unsupported version {v}, expected 1"))),
        None => return Err(schema(file, "version", "missing field".into())),
    }
    let payload = Value::Object(obj);
    let doc = match kind.as_str() {
        "test_case" => SpecDocument::TestCase(decode::<TestCase>(payload, file, opts)?),
        "test_specification" => {
            let mut ts = decode::<TestSpecification>(payload, file, opts)?;
            ts.test_case = resolve_test_case(ts.test_case, file, base, opts)?;
            SpecDocument::TestSpecification(ts)
        }
        _ => {
            let mut es = decode::<ExperimentSpecification>(payload, file, opts)?;
            es.test_specification = resolve_test_spec(es.test_specification, file, base, opts)?;
            SpecDocument::ExperimentSpecification(es)
        }
    };
    let violations = validate_document(&doc);
    if violations.is_empty() {
        Ok(doc)
    } else {
        Err(SpecError::SchemaViolation {
            file: file.to_string(),
            violations,
        })
    }
}

fn schema(file: &str, path: &str, message: String) -> SpecError {
    SpecError::SchemaViolation {
        file: file.to_string(),
        violations: vec![Violation {
            path: path.to_string(),
            message,
        }],
    }
}

fn decode<T: DeserializeOwned + Serialize>(payload: Value, file: &str, opts: ParseOptions) -> Result<T, SpecError> {
    let value: T = serde_path_to_error::deserialize(payload.clone()).map_err(|e| {
        let path = e.path().to_string();
        schema(file, if path == "." { "" } else { &path }, e.into_inner().to_string())
    })?;
    if !opts.lenient {
        let known = serde_json::to_value(&value).expect("spec types serialize");
        let mut unknown = Vec::new();
        unknown_fields(&payload, &known, "", &mut unknown);
        if !unknown.is_empty() {
            return Err(SpecError::SchemaViolation {
                file: file.to_string(),
                violations: unknown,
            });
        }
    }
    Ok(value)
}

/// Any object key present in `input` but absent from the re-serialized value
/// is a field the schema does not know.
fn unknown_fields(input: &Value, known: &Value, path: &str, out: &mut Vec<Violation>) {
    match (input, known) {
        (Value::Object(a), Value::Object(b)) => {
            for (key, v) in a {
                let child = join(path, key);
                match b.get(key) {
                    Some(k) => unknown_fields(v, k, &child, out),
                    None => out.push(Violation {
                        path: child,
                        message: "unknown field (use --lenient to ignore)".into(),
                    }),
                }
            }
        }
        (Value::Array(a), Value::Array(b)) => {
            for (i, (v, k)) in a.iter().zip(b).enumerate() {
                unknown_fields(v, k, &format!("{path}[{i}]"), out);
            }
        }
        _ => {}
    }
}

fn join(path: &str, key: &str) -> String {
    if path.is_empty() {
        key.to_string()
    } else {
        format!("{path}.{key}")
    }
}

fn read_referenced(
    rel: &str,
    file: &str,
    base: Option<&Path>,
    field: &str,
    opts: ParseOptions,
) -> Result<SpecDocument, SpecError> {
    let Some(base) = base else {
        return Err(schema(
            file,
            field,
            format!("path reference {rel:?} cannot be resolved without a base directory"),
        ));
    };
    let target: PathBuf = base.join(rel);
    parse_spec(&target, opts)
}

fn resolve_test_case(
    r: Reference<TestCase>,
    file: &str,
    base: Option<&Path>,
    opts: ParseOptions,
) -> Result<Reference<TestCase>, SpecError> {
    match r {
        Reference::Inline(_) => Ok(r),
        Reference::Path(rel) => match read_referenced(&rel, file, base, "test_case", opts)? {
            SpecDocument::TestCase(tc) => Ok(Reference::Inline(Box::new(tc))),
            other => Err(schema(
                file,
                "test_case",
                format!("{rel:?} is a {}, expected test_case", other.kind()),
            )),
        },
    }
}

fn resolve_test_spec(
    r: Reference<TestSpecification>,
    file: &str,
    base: Option<&Path>,
    opts: ParseOptions,
) -> Result<Reference<TestSpecification>, SpecError> {
    match r {
        Reference::Inline(mut ts) => {
            ts.test_case = resolve_test_case(ts.test_case, file, base, opts)?;
            Ok(Reference::Inline(ts))
        }
        Reference::Path(rel) => match read_referenced(&rel, file, base, "test_specification", opts)? {
            SpecDocument::TestSpecification(ts) => Ok(Reference::Inline(Box::new(ts))),
            other => Err(schema(
                file,
                "test_specification",
                format!("{rel:?} is a {}, expected test_specification", other.kind()),
            )),
        },
    }
}

/// Serializes a document to its JSON file form (with `kind` and `version`).
pub fn to_json(doc: &SpecDocument) -> Value {
    let payload = match doc {
        SpecDocument::TestCase(t) => serde_json::to_value(t),
        SpecDocument::TestSpecification(t) => serde_json::to_value(t),
        SpecDocument::ExperimentSpecification(t) => serde_json::to_value(t),
    }
    .expect("spec types serialize");
    let Value::Object(payload) = payload else {
        unreachable!("spec payloads are objects")
    };
    let mut obj = Map::new();
    obj.insert("kind".into(), Value::String(doc.kind().into()));
    obj.insert("version".into(), Value::from(SPEC_VERSION));
    obj.extend(payload);
    Value::Object(obj)
}

// ---------------------------------------------------------------- validation

/// Checks every invariant of a document; an empty list means valid.
pub fn validate_document(doc: &SpecDocument) -> Vec<Violation> {
    let mut out = Vec::new();
    match doc {
        SpecDocument::TestCase(tc) => validate_test_case(tc, "", &mut out),
        SpecDocument::TestSpecification(ts) => validate_test_spec(ts, "", &mut out),
        SpecDocument::ExperimentSpecification(es) => validate_experiment_spec(es, &mut out),
    }
    out
}

fn push(out: &mut Vec<Violation>, path: String, message: impl Into<String>) {
    out.push(Violation {
        path,
        message: message.into(),
    });
}

/// Identifiers become CSV headers and protocol keys.
pub fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-' || c == '.')
}

fn validate_test_case(tc: &TestCase, prefix: &str, out: &mut Vec<Violation>) {
    if tc.name.trim().is_empty() {
        push(out, join(prefix, "name"), "must be non-empty");
    }
    if tc.test_criteria.is_empty() {
        push(
            out,
            join(prefix, "test_criteria"),
            "at least one test criterion required",
        );
    }
}

fn validate_factor(f: &Factor, path: &str, out: &mut Vec<Violation>) {
    if !is_identifier(&f.name) {
        push(
            out,
            join(path, "name"),
            format!("{:?} is not a valid identifier", f.name),
        );
    }
    match &f.domain {
        Domain::Continuous { low, high, .. } => {
            if !(low.is_finite() && high.is_finite()) {
                push(
                    out,
                    join(path, "domain"),
                    format!("factor '{}': range must be finite", f.name),
                );
            } else if low >= high {
                push(
                    out,
                    join(path, "domain"),
                    format!("factor '{}': low ({low}) must be less than high ({high})", f.name),
                );
            }
        }
        Domain::Categorical { labels } => {
            let distinct: BTreeSet<&String> = labels.iter().collect();
            if distinct.len() < 2 {
                push(
                    out,
                    join(path, "domain.labels"),
                    format!("factor '{}': at least 2 distinct labels required", f.name),
                );
            }
            if distinct.len() != labels.len() {
                push(
                    out,
                    join(path, "domain.labels"),
                    format!("factor '{}': duplicate labels", f.name),
                );
            }
        }
    }
    if let Some(levels) = &f.levels {
        for (i, level) in levels.iter().enumerate() {
            if !f.contains(level) {
                push(
                    out,
                    format!("{}[{i}]", join(path, "levels")),
                    format!("factor '{}': level {level} lies outside the domain", f.name),
                );
            }
        }
        let mut seen = Vec::new();
        for level in levels {
            if seen.contains(&level) {
                push(
                    out,
                    join(path, "levels"),
                    format!("factor '{}': duplicate level {level}", f.name),
                );
            }
            seen.push(level);
        }
        if f.role.is_treatment() && levels.len() < 2 {
            push(
                out,
                join(path, "levels"),
                format!("treatment factor '{}' needs at least 2 levels", f.name),
            );
        }
    }
}

fn validate_test_spec(ts: &TestSpecification, prefix: &str, out: &mut Vec<Violation>) {
    if let Some(tc) = ts.test_case.resolved() {
        validate_test_case(tc, &join(prefix, "test_case"), out);
    }
    let mut names = BTreeSet::new();
    for (i, f) in ts.factors.iter().enumerate() {
        let path = format!("{}[{i}]", join(prefix, "factors"));
        validate_factor(f, &path, out);
        if !names.insert(f.name.as_str()) {
            push(out, join(&path, "name"), format!("duplicate factor name '{}'", f.name));
        }
    }
    if !ts.factors.iter().any(|f| f.role.is_treatment()) {
        push(out, join(prefix, "factors"), "at least one treatment factor required");
    }
    if ts.responses.is_empty() {
        push(out, join(prefix, "responses"), "at least one response required");
    }
    let mut metrics = BTreeSet::new();
    for (i, r) in ts.responses.iter().enumerate() {
        let path = format!("{}[{i}].name", join(prefix, "responses"));
        if !is_identifier(&r.name) {
            push(out, path.clone(), format!("{:?} is not a valid identifier", r.name));
        }
        if !metrics.insert(r.name.as_str()) {
            push(out, path.clone(), format!("duplicate response name '{}'", r.name));
        }
        if names.contains(r.name.as_str()) {
            push(out, path, format!("response '{}' shadows a factor name", r.name));
        }
    }
    if let Some(block) = &ts.test_design.block_factor {
        if ts.factor(block).is_none() {
            push(
                out,
                join(prefix, "test_design.block_factor"),
                format!("unknown factor '{block}'"),
            );
        }
    }
    if let Some(advice) = &ts.test_design.advice {
        if advice.max_treatments < 2 {
            push(
                out,
                join(prefix, "test_design.advice.max_treatments"),
                "must be at least 2",
            );
        }
    }
}

fn validate_experiment_spec(es: &ExperimentSpecification, out: &mut Vec<Violation>) {
    if let Some(ts) = es.test_specification.resolved() {
        validate_test_spec(ts, "test_specification", out);
    }
    let setup = &es.experiment_setup;
    if setup.command.is_empty() || setup.command[0].trim().is_empty() {
        push(out, "experiment_setup.command".into(), "must name a program");
    }
    if !(setup.timeout_s > 0.0 && setup.timeout_s.is_finite()) {
        push(out, "experiment_setup.timeout_s".into(), "must be > 0");
    }
    if es.experiment_design.replicates < 1 {
        push(out, "experiment_design.replicates".into(), "must be at least 1");
    }
}

/// Test case names must be unique across the documents of one project.
pub fn check_unique_test_cases<'a>(docs: impl IntoIterator<Item = (&'a str, &'a SpecDocument)>) -> Vec<Violation> {
    let mut seen: std::collections::BTreeMap<String, &str> = Default::default();
    let mut out = Vec::new();
    for (file, doc) in docs {
        if let SpecDocument::TestCase(tc) = doc {
            if let Some(first) = seen.insert(tc.name.clone(), file) {
                push(
                    &mut out,
                    format!("{file}: name"),
                    format!("test case name '{}' already used in {first}", tc.name),
                );
            }
        }
    }
    out
}
