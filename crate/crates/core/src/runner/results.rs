//! Result sets and their CSV + JSON sidecar persistence.

use std::collections::BTreeMap;
use std::fs::{self, File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::protocol::RunStatus;
use super::RunnerError;
use crate::analysis::{AnalysisError, Dataset};
use crate::digest::sha256_hex;
use crate::spec::{Factor, FactorValue, Treatment};

pub const TOOLKIT_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub run_id: u64,
    pub block: Option<FactorValue>,
    pub replicate: u32,
    pub seed: u64,
    pub treatment: Treatment,
    pub responses: BTreeMap<String, f64>,
    pub status: RunStatus,
    pub wall_time_s: f64,
    /// RFC 3339 timestamps.
    pub started_at: String,
    pub ended_at: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultSet {
    pub plan_digest: String,
    pub runner_command: Vec<String>,
    pub toolkit_version: String,
    pub master_seed: u64,
    pub factor_names: Vec<String>,
    /// Factor columns whose values are labels even when they look numeric.
    pub categorical_factors: Vec<String>,
    pub metric_names: Vec<String>,
    pub block_factor: Option<String>,
    /// Sorted by run id.
    pub rows: Vec<ResultRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Sidecar {
    plan_digest: String,
    runner_command: Vec<String>,
    toolkit_version: String,
    master_seed: u64,
    factor_names: Vec<String>,
    categorical_factors: Vec<String>,
    metric_names: Vec<String>,
    block_factor: Option<String>,
    row_count: usize,
    results_digest: String,
}

/// Reals in result files carry 17 significant digits.
pub fn format_real(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn sidecar_path(csv: &Path) -> PathBuf {
    csv.with_extension("json")
}

impl ResultSet {
    pub fn row(&self, run_id: u64) -> Option<&ResultRow> {
        self.rows.iter().find(|r| r.run_id == run_id)
    }

    pub fn header(&self) -> Vec<String> {
        let mut h: Vec<String> = ["run_id", "block", "replicate", "seed"].map(String::from).to_vec();
        h.extend(self.factor_names.iter().cloned());
        h.extend(self.metric_names.iter().cloned());
        h.extend(["status", "wall_time_s", "started_at", "ended_at"].map(String::from));
        h
    }

    fn record(&self, row: &ResultRow) -> Vec<String> {
        let mut rec = vec![
            row.run_id.to_string(),
            row.block.as_ref().map(|b| b.to_string()).unwrap_or_default(),
            row.replicate.to_string(),
            row.seed.to_string(),
        ];
        rec.extend(
            self.factor_names
                .iter()
                .map(|f| row.treatment.get(f).map(|v| v.to_string()).unwrap_or_default()),
        );
        rec.extend(
            self.metric_names
                .iter()
                .map(|m| row.responses.get(m).map(|&x| format_real(x)).unwrap_or_default()),
        );
        rec.push(row.status.to_string());
        rec.push(format!("{:.6}", row.wall_time_s));
        rec.push(row.started_at.clone());
        rec.push(row.ended_at.clone());
        rec
    }

    /// Digest of the responses table: rows in run-id order without timing
    /// columns, so it depends only on the plan and the runner's answers.
    pub fn results_digest(&self) -> String {
        let mut rows: Vec<&ResultRow> = self.rows.iter().collect();
        rows.sort_by_key(|r| r.run_id);
        let mut text = String::new();
        for r in rows {
            let rec = self.record(r);
            // drop wall_time_s, started_at, ended_at
            text.push_str(&rec[..rec.len() - 3].join(","));
            text.push('\n');
        }
        sha256_hex(text.as_bytes())
    }

    fn sidecar(&self) -> Sidecar {
        Sidecar {
            plan_digest: self.plan_digest.clone(),
            runner_command: self.runner_command.clone(),
            toolkit_version: self.toolkit_version.clone(),
            master_seed: self.master_seed,
            factor_names: self.factor_names.clone(),
            categorical_factors: self.categorical_factors.clone(),
            metric_names: self.metric_names.clone(),
            block_factor: self.block_factor.clone(),
            row_count: self.rows.len(),
            results_digest: self.results_digest(),
        }
    }

    fn csv_line(&self, rec: &[String]) -> Vec<u8> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        w.write_record(rec).expect("in-memory write");
        w.into_inner().expect("in-memory flush")
    }

    /// Writes the whole set (CSV and sidecar) to `path`.
    pub fn save(&self, path: &Path) -> Result<(), RunnerError> {
        let mut bytes = self.csv_line(&self.header());
        for r in &self.rows {
            bytes.extend(self.csv_line(&self.record(r)));
        }
        fs::write(path, bytes)?;
        self.write_sidecar(path)
    }

    fn write_sidecar(&self, csv: &Path) -> Result<(), RunnerError> {
        let path = sidecar_path(csv);
        let tmp = path.with_extension("json.tmp");
        let text = serde_json::to_string_pretty(&self.sidecar()).expect("sidecar serializes") + "\n";
        fs::write(&tmp, text)?;
        fs::rename(&tmp, &path)?;
        Ok(())
    }

    /// Strict load: the row count and responses digest must match the sidecar.
    pub fn load(path: &Path) -> Result<ResultSet, RunnerError> {
        let (set, sidecar) = load_parts(path, false)?;
        if sidecar.row_count != set.rows.len() {
            return Err(RunnerError::CorruptResults(format!(
                "{}: sidecar records {} rows, file has {}",
                path.display(),
                sidecar.row_count,
                set.rows.len()
            )));
        }
        let digest = set.results_digest();
        if digest != sidecar.results_digest {
            return Err(RunnerError::CorruptResults(format!(
                "{}: results digest {digest} does not match sidecar digest {}",
                path.display(),
                sidecar.results_digest
            )));
        }
        Ok(set)
    }

    /// Dataset of the successful runs for analysis, and the number of rows
    /// left out because their status was not `ok`. The block factor, if
    /// listed in `factors`, takes its values from the row's block.
    pub fn dataset(&self, factors: &[&Factor]) -> Result<(Dataset, usize), AnalysisError> {
        let ok: Vec<&ResultRow> = self.rows.iter().filter(|r| r.status == RunStatus::Ok).collect();
        let excluded = self.rows.len() - ok.len();
        let treatments: Vec<Treatment> = ok
            .iter()
            .map(|r| {
                let mut t = r.treatment.clone();
                if let (Some(name), Some(b)) = (&self.block_factor, &r.block) {
                    t.insert(name.clone(), b.clone());
                }
                t
            })
            .collect();
        let mut data = Dataset::from_treatments(factors, &treatments)?;
        for m in &self.metric_names {
            let values = ok
                .iter()
                .map(|r| {
                    r.responses
                        .get(m)
                        .copied()
                        .ok_or_else(|| AnalysisError::UnknownResponse(m.clone()))
                })
                .collect::<Result<Vec<f64>, _>>()?;
            data.add_response(m, values)?;
        }
        Ok((data, excluded))
    }
}

fn parse_value(text: &str, categorical: bool) -> FactorValue {
    match text.parse::<f64>() {
        Ok(x) if !categorical => FactorValue::Number(x),
        _ => FactorValue::Label(text.to_string()),
    }
}

/// Reads CSV and sidecar. With `tolerate_partial`, an unterminated final
/// line (an interrupted append) is ignored instead of being an error.
fn load_parts(path: &Path, tolerate_partial: bool) -> Result<(ResultSet, Sidecar), RunnerError> {
    let corrupt = |msg: String| RunnerError::CorruptResults(format!("{}: {msg}", path.display()));
    let side_text = fs::read_to_string(sidecar_path(path)).map_err(|e| corrupt(format!("cannot read sidecar: {e}")))?;
    let sidecar: Sidecar = serde_json::from_str(&side_text).map_err(|e| corrupt(format!("bad sidecar: {e}")))?;
    let mut bytes = fs::read(path)?;
    if !bytes.is_empty() && !bytes.ends_with(b"\n") {
        if !tolerate_partial {
            return Err(corrupt("file ends in a truncated row".into()));
        }
        let keep = bytes.iter().rposition(|&b| b == b'\n').map_or(0, |i| i + 1);
        bytes.truncate(keep);
    }
    let mut set = ResultSet {
        plan_digest: sidecar.plan_digest.clone(),
        runner_command: sidecar.runner_command.clone(),
        toolkit_version: sidecar.toolkit_version.clone(),
        master_seed: sidecar.master_seed,
        factor_names: sidecar.factor_names.clone(),
        categorical_factors: sidecar.categorical_factors.clone(),
        metric_names: sidecar.metric_names.clone(),
        block_factor: sidecar.block_factor.clone(),
        rows: Vec::new(),
    };
    if bytes.is_empty() {
        return Ok((set, sidecar));
    }
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(bytes.as_slice());
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| corrupt(e.to_string()))?
        .iter()
        .map(String::from)
        .collect();
    if header != set.header() {
        return Err(corrupt(format!("unexpected header {header:?}")));
    }
    let nf = set.factor_names.len();
    let nm = set.metric_names.len();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| corrupt(format!("row {}: {e}", i + 1)))?;
        let field = |j: usize| rec.get(j).unwrap_or("");
        let num = |j: usize| -> Result<u64, RunnerError> {
            field(j)
                .parse()
                .map_err(|_| corrupt(format!("row {}: bad integer {:?}", i + 1, field(j))))
        };
        let block = Some(field(1)).filter(|s| !s.is_empty()).map(|s| parse_value(s, true));
        let treatment = set
            .factor_names
            .iter()
            .enumerate()
            .map(|(j, name)| {
                let categorical = set.categorical_factors.contains(name);
                (name.clone(), parse_value(field(4 + j), categorical))
            })
            .collect();
        let mut responses = BTreeMap::new();
        for (j, m) in set.metric_names.iter().enumerate() {
            let text = field(4 + nf + j);
            if !text.is_empty() {
                let x = text
                    .parse()
                    .map_err(|_| corrupt(format!("row {}: bad real {text:?}", i + 1)))?;
                responses.insert(m.clone(), x);
            }
        }
        let base = 4 + nf + nm;
        let status = RunStatus::parse(field(base))
            .ok_or_else(|| corrupt(format!("row {}: bad status {:?}", i + 1, field(base))))?;
        set.rows.push(ResultRow {
            run_id: num(0)?,
            block,
            replicate: num(2)? as u32,
            seed: num(3)?,
            treatment,
            responses,
            status,
            wall_time_s: field(base + 1).parse().unwrap_or(0.0),
            started_at: field(base + 2).to_string(),
            ended_at: field(base + 3).to_string(),
        });
    }
    set.rows.sort_by_key(|r| r.run_id);
    if set.rows.windows(2).any(|w| w[0].run_id == w[1].run_id) {
        return Err(corrupt("duplicate run ids".into()));
    }
    Ok((set, sidecar))
}

/// Appends rows one at a time, keeping CSV and sidecar consistent after
/// every row.
pub(crate) struct ResultWriter {
    path: PathBuf,
    file: File,
    pub set: ResultSet,
}

impl ResultWriter {
    pub fn create(path: &Path, set: ResultSet) -> Result<ResultWriter, RunnerError> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir)?;
        }
        set.save(path)?;
        let file = OpenOptions::new().append(true).open(path)?;
        Ok(ResultWriter {
            path: path.to_path_buf(),
            file,
            set,
        })
    }

    /// Reopens an interrupted result file, dropping a partial final line.
    pub fn resume(path: &Path, plan_digest: &str) -> Result<ResultWriter, RunnerError> {
        let (set, _) = load_parts(path, true)?;
        if set.plan_digest != plan_digest {
            return Err(RunnerError::PlanDigestMismatch {
                expected: plan_digest.to_string(),
                found: set.plan_digest,
            });
        }
        // rewrite so the file holds exactly the recovered rows
        ResultWriter::create(path, set)
    }

    pub fn append(&mut self, row: ResultRow) -> Result<(), RunnerError> {
        let line = self.set.csv_line(&self.set.record(&row));
        self.file.write_all(&line)?;
        self.file.flush()?;
        let pos = self.set.rows.partition_point(|r| r.run_id < row.run_id);
        self.set.rows.insert(pos, row);
        self.set.write_sidecar(&self.path)
    }
}
