//! Sequential (type I) analysis of variance, ANCOVA and screening ranks.

use serde::{Deserialize, Serialize};

use super::data::{Column, Dataset};
use super::dist::f_pvalue;
use super::matrix::{build_model_matrix, ModelMatrix};
use super::AnalysisError;
use crate::terms::ModelTerm;

/// A column is treated as dependent on earlier ones when orthogonalization
/// removes all but this fraction of its norm.
const DEPENDENCE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RowKind {
    Term,
    Residual,
    Total,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnovaRow {
    /// Term label, `Residual` or `Total`.
    pub source: String,
    pub kind: RowKind,
    #[serde(default)]
    pub term: Option<ModelTerm>,
    pub df: usize,
    pub sum_of_squares: f64,
    pub mean_square: f64,
    pub f_statistic: Option<f64>,
    pub p_value: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnovaTable {
    pub response: String,
    pub n: usize,
    pub alpha: f64,
    pub rows: Vec<AnovaRow>,
    #[serde(default)]
    pub warnings: Vec<String>,
}

impl AnovaTable {
    pub fn term_rows(&self) -> impl Iterator<Item = &AnovaRow> {
        self.rows.iter().filter(|r| r.kind == RowKind::Term)
    }

    pub fn row(&self, source: &str) -> Option<&AnovaRow> {
        self.rows.iter().find(|r| r.source == source)
    }

    pub fn residual(&self) -> &AnovaRow {
        self.rows
            .iter()
            .find(|r| r.kind == RowKind::Residual)
            .expect("every table has a residual row")
    }

    pub fn total(&self) -> &AnovaRow {
        self.rows
            .iter()
            .find(|r| r.kind == RowKind::Total)
            .expect("every table has a total row")
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Orthonormal basis built column by column in model order (modified
/// Gram–Schmidt with one re-orthogonalization pass).
pub(crate) struct Sequential {
    basis: Vec<Vec<f64>>,
    /// Span index of each basis vector, `None` for the intercept.
    owner: Vec<Option<usize>>,
    pub term_df: Vec<usize>,
    pub dependent: Vec<String>,
}

impl Sequential {
    pub fn new(m: &ModelMatrix) -> Sequential {
        let mut owner_of_col = vec![None; m.n_cols()];
        for (s, span) in m.spans.iter().enumerate() {
            for slot in &mut owner_of_col[span.start..span.start + span.width] {
                *slot = Some(s);
            }
        }
        let mut seq = Sequential {
            basis: Vec::new(),
            owner: Vec::new(),
            term_df: vec![0; m.spans.len()],
            dependent: Vec::new(),
        };
        for (j, col) in m.columns.iter().enumerate() {
            let norm0 = dot(col, col).sqrt();
            let mut v = col.clone();
            for _ in 0..2 {
                for q in &seq.basis {
                    let c = dot(q, &v);
                    v.iter_mut().zip(q).for_each(|(x, qi)| *x -= c * qi);
                }
            }
            let norm = dot(&v, &v).sqrt();
            if norm0 == 0.0 || norm <= DEPENDENCE_TOL * norm0 {
                seq.dependent.push(m.labels[j].clone());
                continue;
            }
            v.iter_mut().for_each(|x| *x /= norm);
            seq.basis.push(v);
            seq.owner.push(owner_of_col[j]);
            if let Some(s) = owner_of_col[j] {
                seq.term_df[s] += 1;
            }
        }
        seq
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    /// Sequential sums of squares per span, and the residual sum of squares.
    pub fn sums_of_squares(&self, y: &[f64]) -> (Vec<f64>, f64) {
        let mut ss = vec![0.0; self.term_df.len()];
        let mut r = y.to_vec();
        for (q, owner) in self.basis.iter().zip(&self.owner) {
            let c = dot(q, &r);
            r.iter_mut().zip(q).for_each(|(x, qi)| *x -= c * qi);
            if let Some(s) = owner {
                ss[*s] += c * c;
            }
        }
        (ss, dot(&r, &r))
    }
}

pub(crate) fn table_from_matrix(
    m: &ModelMatrix,
    seq: &Sequential,
    response: &str,
    y: &[f64],
    alpha: f64,
) -> AnovaTable {
    let n = y.len();
    let mean = y.iter().sum::<f64>() / n as f64;
    let ss_total: f64 = y.iter().map(|v| (v - mean) * (v - mean)).sum();
    let (ss_terms, ss_res) = seq.sums_of_squares(y);
    let df_res = n.saturating_sub(seq.rank());
    let ms_res = if df_res > 0 { ss_res / df_res as f64 } else { f64::NAN };
    // residual variance this small relative to the total means an exact fit
    let exact_fit = df_res > 0 && ss_res <= 1e-20 * ss_total.max(f64::MIN_POSITIVE);
    let mut warnings = Vec::new();
    if df_res == 0 {
        warnings.push("saturated model: no residual degrees of freedom, F tests omitted".to_string());
    } else if exact_fit {
        warnings.push("residual sum of squares is zero: the model fits exactly".to_string());
    }
    // sums of squares at rounding level are reported as exact zeros
    let noise_floor = 1e-15 * y.iter().map(|v| v * v).sum::<f64>();
    let mut rows = Vec::new();
    for (s, span) in m.spans.iter().enumerate() {
        let df = seq.term_df[s];
        let ss = if ss_terms[s] <= noise_floor { 0.0 } else { ss_terms[s] };
        if df == 0 {
            warnings.push(format!(
                "term {} has no degrees of freedom left (aliased with earlier terms or constant)",
                span.term
            ));
        }
        let ms = if df > 0 { ss / df as f64 } else { 0.0 };
        let (f, p) = if df == 0 || df_res == 0 {
            (None, None)
        } else if exact_fit {
            if ss <= 1e-12 * ss_total.max(f64::MIN_POSITIVE) {
                (Some(0.0), Some(1.0))
            } else {
                (None, Some(0.0))
            }
        } else {
            let f = ms / ms_res;
            (Some(f), Some(f_pvalue(f, df, df_res)))
        };
        rows.push(AnovaRow {
            source: span.term.label(),
            kind: RowKind::Term,
            term: Some(span.term.clone()),
            df,
            sum_of_squares: ss,
            mean_square: ms,
            f_statistic: f,
            p_value: p,
        });
    }
    rows.push(AnovaRow {
        source: "Residual".into(),
        kind: RowKind::Residual,
        term: None,
        df: df_res,
        sum_of_squares: ss_res,
        mean_square: if df_res > 0 { ms_res } else { 0.0 },
        f_statistic: None,
        p_value: None,
    });
    rows.push(AnovaRow {
        source: "Total".into(),
        kind: RowKind::Total,
        term: None,
        df: n.saturating_sub(1),
        sum_of_squares: ss_total,
        mean_square: if n > 1 { ss_total / (n - 1) as f64 } else { 0.0 },
        f_statistic: None,
        p_value: None,
    });
    AnovaTable {
        response: response.to_string(),
        n,
        alpha,
        rows,
        warnings,
    }
}

/// Type I ANOVA: each term's sum of squares is the extra regression sum of
/// squares it adds after the terms listed before it.
pub fn anova(data: &Dataset, response: &str, terms: &[ModelTerm], alpha: f64) -> Result<AnovaTable, AnalysisError> {
    let y = data.response(response)?;
    if data.n() < 2 {
        return Err(AnalysisError::EmptyResults);
    }
    let m = build_model_matrix(data, terms, true)?;
    let seq = Sequential::new(&m);
    Ok(table_from_matrix(&m, &seq, response, y, alpha))
}

/// ANOVA with the covariates entered before the treatment term, so the
/// treatment F tests the covariate-adjusted effect.
pub fn ancova(
    data: &Dataset,
    response: &str,
    treatment: &str,
    covariates: &[&str],
    alpha: f64,
) -> Result<AnovaTable, AnalysisError> {
    let col = data
        .column(treatment)
        .ok_or_else(|| AnalysisError::UnknownFactor(treatment.to_string()))?;
    if !matches!(col, Column::Categorical { .. }) || col.observed_levels().len() < 2 {
        return Err(AnalysisError::InvalidTerm(format!(
            "ANCOVA treatment '{treatment}' must be categorical with at least two observed levels"
        )));
    }
    let mut terms: Vec<ModelTerm> = covariates.iter().map(|c| ModelTerm::covariate(c)).collect();
    terms.push(ModelTerm::main(treatment));
    anova(data, response, &terms, alpha)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedTerm {
    pub term: String,
    pub p_value: Option<f64>,
    pub sum_of_squares: f64,
    pub significant: bool,
}

/// Terms by ascending p value, ties broken by descending sum of squares and
/// then by name. Terms without a p value sort last.
pub fn screen_rank(table: &AnovaTable, alpha: f64) -> Vec<RankedTerm> {
    let mut ranked: Vec<RankedTerm> = table
        .term_rows()
        .map(|r| RankedTerm {
            term: r.source.clone(),
            p_value: r.p_value,
            sum_of_squares: r.sum_of_squares,
            significant: r.p_value.is_some_and(|p| p < alpha),
        })
        .collect();
    ranked.sort_by(|a, b| {
        let pa = a.p_value.unwrap_or(f64::INFINITY);
        let pb = b.p_value.unwrap_or(f64::INFINITY);
        pa.total_cmp(&pb)
            .then(b.sum_of_squares.total_cmp(&a.sum_of_squares))
            .then_with(|| a.term.cmp(&b.term))
    });
    ranked
}
