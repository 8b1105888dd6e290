//! Experimental designs in coded units, their alias and confounding
//! structure, scaling to engineering units, and randomized or blocked run
//! plans.
//!
//! Coding conventions: two-level and multi-level factorial columns use
//! equally spaced points in [−1, +1]; central-composite designs add axial
//! points at ±α; space-filling designs live in the unit cube [0, 1).

mod arrays;
mod confounding;
mod export;
mod factorial;
mod plan;
mod request;
mod response_surface;
mod scale;
mod screening;
mod space_filling;

use serde::{Deserialize, Serialize};

pub use crate::spec::DesignFamily;
pub use arrays::{orthogonal_array, ArrayName};
pub use confounding::{
    detect_confounding, detect_confounding_with, term_column, ConfoundedPair, ConfoundingReport,
    DEFAULT_CONFOUNDING_THRESHOLD,
};
pub use export::{design_csv, plan_csv, treatments_csv};
pub use factorial::{
    alias_structure, factor_letter, fractional_factorial, full_factorial, parse_word, AliasEntry, AliasStructure, Word,
    MAX_FULL_FACTORIAL_RUNS,
};
pub use plan::{block_design, make_plan, randomize_order, PlanOptions, Provenance, Run, RunPlan};
pub use request::generate;
pub use response_surface::{box_behnken, central_composite, CcdAlpha};
pub use scale::{scale_to_ranges, ScaledTreatment};
pub use screening::plackett_burman;
pub use space_filling::{latin_hypercube, monte_carlo, sobol, SOBOL_MAX_DIM};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Coding {
    /// Every column in {−1, +1}.
    TwoLevel,
    /// Column j takes `column_levels[j]` equally spaced values in [−1, +1].
    LevelGrid,
    /// Cube points ±1, axial points ±α, centre 0.
    FiveLevelCcd,
    /// Entries in {−1, 0, +1}.
    ThreeLevelBb,
    /// Entries in [0, 1).
    UnitCube,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DesignMetadata {
    /// Generator words, e.g. `D=ABC`, written over factor letters.
    #[serde(default)]
    pub generators: Vec<String>,
    #[serde(default)]
    pub defining_relation: Vec<String>,
    #[serde(default)]
    pub resolution: Option<u32>,
    #[serde(default)]
    pub n_center: Option<usize>,
    #[serde(default)]
    pub alpha: Option<f64>,
    #[serde(default)]
    pub array: Option<String>,
    #[serde(default)]
    pub seed: Option<u64>,
}

/// A coded treatment matrix with its generating structure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Design {
    pub family: DesignFamily,
    pub factor_names: Vec<String>,
    /// `n_runs` rows of `factor_names.len()` coded values.
    pub matrix: Vec<Vec<f64>>,
    pub coding: Coding,
    /// Distinct levels per column for level-based codings.
    #[serde(default)]
    pub column_levels: Option<Vec<usize>>,
    pub metadata: DesignMetadata,
}

impl Design {
    pub fn n_runs(&self) -> usize {
        self.matrix.len()
    }

    pub fn n_factors(&self) -> usize {
        self.factor_names.len()
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.matrix.iter().map(|row| row[j]).collect()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.factor_names.iter().position(|n| n == name)
    }

    /// Replaces the default letter names with user factor names.
    pub fn with_factor_names<S: AsRef<str>>(mut self, names: &[S]) -> Result<Self, DesignError> {
        if names.len() != self.n_factors() {
            return Err(DesignError::CardinalityMismatch(format!(
                "design has {} columns, {} names given",
                self.n_factors(),
                names.len()
            )));
        }
        self.factor_names = names.iter().map(|s| s.as_ref().to_string()).collect();
        Ok(self)
    }

    /// Keeps the first `k` columns.
    pub fn truncate_columns(mut self, k: usize) -> Self {
        self.factor_names.truncate(k);
        for row in &mut self.matrix {
            row.truncate(k);
        }
        if let Some(levels) = &mut self.column_levels {
            levels.truncate(k);
        }
        self
    }

    pub fn is_two_level(&self) -> bool {
        self.matrix.iter().flatten().all(|&x| x == 1.0 || x == -1.0)
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DesignError {
    #[error("design would need {runs} runs, above the cap of {cap}")]
    TooManyRuns { runs: u128, cap: u128 },
    #[error("invalid design parameter: {0}")]
    InvalidParameter(String),
    #[error("invalid generator {generator:?}: {reason}")]
    InvalidGenerator { generator: String, reason: String },
    #[error("degenerate design: {0}")]
    DegenerateDesign(String),
    #[error("alias structure is only defined for two-level regular or Plackett-Burman designs, not {0}")]
    UnsupportedFamily(DesignFamily),
    #[error("Plackett-Burman designs support at most 23 factors, {0} requested")]
    TooManyFactors(usize),
    #[error("invalid axial distance {0}: must be > 0")]
    InvalidAlpha(f64),
    #[error("Box-Behnken designs need at least 3 factors, {0} requested")]
    KTooSmall(usize),
    #[error("Sobol sequence supports at most {max} dimensions, {requested} requested")]
    DimensionUnsupported { requested: usize, max: usize },
    #[error("unknown orthogonal array {0:?} (known: L4, L8, L9)")]
    UnknownArray(String),
    #[error("cardinality mismatch: {0}")]
    CardinalityMismatch(String),
    #[error("factor '{0}' has no numeric range for this design")]
    RangeMissing(String),
    #[error("block factor '{name}' has role {role}; blocking needs nuisance_known_controllable")]
    WrongRole { name: String, role: String },
    #[error("{0}")]
    Empty(String),
}
