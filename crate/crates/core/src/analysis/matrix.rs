//! Model matrices from datasets and term lists.

use super::data::{Column, Dataset};
use super::AnalysisError;
use crate::terms::ModelTerm;

/// Columns occupied by one term.
#[derive(Debug, Clone, PartialEq)]
pub struct TermSpan {
    pub term: ModelTerm,
    pub start: usize,
    pub width: usize,
}

/// Column-major model matrix with labels.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelMatrix {
    pub n: usize,
    pub columns: Vec<Vec<f64>>,
    pub labels: Vec<String>,
    pub intercept: bool,
    pub spans: Vec<TermSpan>,
}

impl ModelMatrix {
    pub fn n_cols(&self) -> usize {
        self.columns.len()
    }

    pub fn to_nalgebra(&self) -> nalgebra::DMatrix<f64> {
        nalgebra::DMatrix::from_fn(self.n, self.n_cols(), |i, j| self.columns[j][i])
    }
}

type Block = Vec<(String, Vec<f64>)>;

fn column<'a>(data: &'a Dataset, name: &str) -> Result<&'a Column, AnalysisError> {
    data.column(name)
        .ok_or_else(|| AnalysisError::UnknownFactor(name.to_string()))
}

/// Main-effect columns of one factor: the coded column, or L−1 sum-to-zero
/// contrasts (level i against the last observed level).
fn main_block(data: &Dataset, name: &str) -> Result<Block, AnalysisError> {
    let col = column(data, name)?;
    match col {
        Column::Continuous { .. } => Ok(vec![(name.to_string(), col.coded().expect("continuous"))]),
        Column::Categorical { values, .. } => {
            let levels = col.observed_levels();
            let Some((last, rest)) = levels.split_last() else {
                return Ok(Vec::new());
            };
            Ok(rest
                .iter()
                .map(|level| {
                    let c = values
                        .iter()
                        .map(|v| {
                            if v == level {
                                1.0
                            } else if v == last {
                                -1.0
                            } else {
                                0.0
                            }
                        })
                        .collect();
                    (format!("{name}[{level}]"), c)
                })
                .collect())
        }
    }
}

fn term_block(data: &Dataset, term: &ModelTerm) -> Result<Block, AnalysisError> {
    match term {
        ModelTerm::Main { factor } => main_block(data, factor),
        ModelTerm::Interaction { factors } => {
            let mut acc: Block = vec![(String::new(), vec![1.0; data.n()])];
            for f in factors {
                let block = main_block(data, f)?;
                acc = acc
                    .iter()
                    .flat_map(|(la, a)| {
                        block.iter().map(move |(lb, b)| {
                            let label = if la.is_empty() {
                                lb.clone()
                            } else {
                                format!("{la}:{lb}")
                            };
                            (label, a.iter().zip(b).map(|(x, y)| x * y).collect())
                        })
                    })
                    .collect();
            }
            Ok(acc)
        }
        ModelTerm::Power { factor, degree } => {
            let coded = column(data, factor)?
                .coded()
                .ok_or_else(|| AnalysisError::InvalidTerm(format!("{term}: powers need a continuous factor")))?;
            Ok(vec![(
                term.label(),
                coded.iter().map(|x| x.powi(*degree as i32)).collect(),
            )])
        }
        ModelTerm::Covariate { factor } => {
            let c = column(data, factor)?
                .covariate()
                .ok_or_else(|| AnalysisError::InvalidTerm(format!("{term}: covariates must be continuous")))?;
            Ok(vec![(term.label(), c)])
        }
    }
}

pub fn build_model_matrix(
    data: &Dataset,
    terms: &[ModelTerm],
    include_intercept: bool,
) -> Result<ModelMatrix, AnalysisError> {
    if data.n() == 0 {
        return Err(AnalysisError::EmptyResults);
    }
    let mut m = ModelMatrix {
        n: data.n(),
        columns: Vec::new(),
        labels: Vec::new(),
        intercept: include_intercept,
        spans: Vec::new(),
    };
    if include_intercept {
        m.columns.push(vec![1.0; data.n()]);
        m.labels.push("intercept".into());
    }
    for term in terms {
        let block = term_block(data, term)?;
        m.spans.push(TermSpan {
            term: term.clone(),
            start: m.columns.len(),
            width: block.len(),
        });
        for (label, c) in block {
            m.labels.push(label);
            m.columns.push(c);
        }
    }
    Ok(m)
}

/// Main effects, squares of continuous factors observed at three or more
/// distinct values, and all two-factor interactions.
pub fn default_terms(data: &Dataset, factors: &[&str]) -> Vec<ModelTerm> {
    let mut terms: Vec<ModelTerm> = factors.iter().map(|f| ModelTerm::main(f)).collect();
    for f in factors {
        if let Some(c @ Column::Continuous { .. }) = data.column(f) {
            if c.distinct_count() >= 3 {
                terms.push(ModelTerm::power(f, 2));
            }
        }
    }
    for i in 0..factors.len() {
        for j in i + 1..factors.len() {
            terms.push(ModelTerm::interaction(&[factors[i], factors[j]]));
        }
    }
    terms
}
