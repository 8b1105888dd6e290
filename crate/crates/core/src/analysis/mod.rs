//! Statistical analysis of experiment results: sequential ANOVA, ANCOVA,
//! least-squares regression, nested-model comparison, two-level effects,
//! screening ranks and Monte-Carlo power.
//!
//! Sums of squares are sequential (type I): each term is credited with what
//! it adds after the terms listed before it. On balanced orthogonal designs
//! this is the classical partition and does not depend on term order; on
//! unbalanced data the order matters.

mod anova;
mod data;
mod dist;
mod effects;
mod matrix;
mod power;
mod regression;
mod screen;

pub use anova::{ancova, anova, screen_rank, AnovaRow, AnovaTable, RankedTerm, RowKind};
pub use data::{Column, Dataset};
pub use dist::{f_pvalue, t_pvalue};
pub use effects::{effects_two_level, Effect};
pub use matrix::{build_model_matrix, default_terms, ModelMatrix, TermSpan};
pub use power::{power_estimate, PowerConfig, PowerEstimate, MIN_SIMULATIONS};
pub use regression::{
    compare_models, ols_regression, regression, Coefficient, ModelComparison, Preferred, RegressionResult,
};
pub use screen::{screening_conclusions, FactorConclusion, Verdict, SATURATION_FRACTION};

pub const DEFAULT_ALPHA: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AnalysisError {
    #[error("unknown factor '{0}'")]
    UnknownFactor(String),
    #[error("unknown response metric '{0}'")]
    UnknownResponse(String),
    #[error("no results to analyse")]
    EmptyResults,
    #[error("column '{name}' has {found} values, expected {expected}")]
    LengthMismatch {
        name: String,
        expected: usize,
        found: usize,
    },
    #[error("invalid model term: {0}")]
    InvalidTerm(String),
    #[error("model matrix is rank deficient; dependent columns {dependent:?}, collinear pairs {pairs:?}")]
    RankDeficient {
        dependent: Vec<String>,
        pairs: Vec<(String, String)>,
    },
    #[error("no residual degrees of freedom left")]
    NoResidualDf,
    #[error("reduced model terms must be a strict subset of the full model terms")]
    NotNested,
    #[error("design is not coded at two levels (±1)")]
    NotTwoLevel,
    #[error("{0}")]
    InvalidParameter(String),
}
