use std::path::PathBuf;

use serde::Serialize;

use doe_core::spec::{parse_spec, ParseOptions, SpecError};

use crate::args::GlobalArgs;
use crate::error::CliError;
use crate::output::{emit, Render};

#[derive(Debug, Clone, Serialize)]
pub struct FileCheck {
    pub file: String,
    pub valid: bool,
    pub kind: Option<String>,
    pub errors: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidateReport {
    pub files: Vec<FileCheck>,
}

impl Render for ValidateReport {
    fn text(&self) -> String {
        let mut s = String::new();
        for f in &self.files {
            if f.valid {
                s += &format!("ok      {} ({})\n", f.file, f.kind.as_deref().unwrap_or("?"));
            } else {
                s += &format!("invalid {}\n", f.file);
                for e in &f.errors {
                    s += &format!("    {e}\n");
                }
            }
        }
        s
    }
}

pub fn check(paths: &[PathBuf], lenient: bool) -> ValidateReport {
    let files = paths
        .iter()
        .map(|p| {
            let file = p.display().to_string();
            match parse_spec(p, ParseOptions { lenient }) {
                Ok(doc) => FileCheck {
                    file,
                    valid: true,
                    kind: Some(doc.kind().to_string()),
                    errors: Vec::new(),
                },
                Err(e) => {
                    let errors = match &e {
                        SpecError::SchemaViolation { violations, .. } => {
                            violations.iter().map(|v| v.to_string()).collect()
                        }
                        SpecError::Io { source, .. } if source.kind() == std::io::ErrorKind::NotFound => {
                            vec![format!("file not found: {file}")]
                        }
                        other => vec![other.to_string()],
                    };
                    FileCheck {
                        file,
                        valid: false,
                        kind: None,
                        errors,
                    }
                }
            }
        })
        .collect();
    ValidateReport { files }
}

pub fn cmd_validate(paths: &[PathBuf], global: &GlobalArgs) -> Result<ValidateReport, CliError> {
    let report = check(paths, global.lenient);
    emit(global, &report);
    let bad = report.files.iter().filter(|f| !f.valid).count();
    if bad > 0 {
        return Err(CliError::validation(format!(
            "{bad} of {} file(s) failed validation",
            report.files.len()
        )));
    }
    Ok(report)
}
