//! Advisory recommenders: analysis method by purpose, design category by
//! budget and system properties, and handling concept by nuisance-factor
//! type. Their output is guidance; an explicit request always wins.

use std::fmt;

use serde::Serialize;

use super::model::{DesignFamily, FactorRole, Purpose};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Method {
    #[serde(rename = "anova")]
    Anova,
    #[serde(rename = "regression")]
    Regression,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Anova => "ANOVA",
            Method::Regression => "Regression",
        })
    }
}

/// Which purpose drives the recommendation. Mixed preliminary purposes are
/// not representable: the caller picks one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AnalysisMode {
    Screening,
    NonlinearityCheck,
    Purpose(Purpose),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("choose one preliminary purpose: screening and nonlinearity checking cannot be combined")]
pub struct ModeConflict;

impl AnalysisMode {
    pub fn from_flags(poi: Purpose, screening: bool, nonlinearity_check: bool) -> Result<AnalysisMode, ModeConflict> {
        match (screening, nonlinearity_check) {
            (true, true) => Err(ModeConflict),
            (true, false) => Ok(AnalysisMode::Screening),
            (false, true) => Ok(AnalysisMode::NonlinearityCheck),
            (false, false) => Ok(AnalysisMode::Purpose(poi)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AnalysisPlan {
    pub methods: Vec<Method>,
    /// The purpose row that fired.
    pub row: String,
    pub note: String,
}

pub fn recommend_analysis(mode: AnalysisMode) -> AnalysisPlan {
    const GUIDELINE: &str = "Analysis tools are guideline suggestions";
    let (methods, row, note) = match mode {
        AnalysisMode::Screening => (vec![Method::Anova], "Screening (SA)", "Many factors, few levels"),
        AnalysisMode::NonlinearityCheck => (
            vec![Method::Regression],
            "Nonlinearity checking",
            "Few factors, many levels",
        ),
        AnalysisMode::Purpose(Purpose::Characterization) => (vec![Method::Regression], "Characterization", GUIDELINE),
        AnalysisMode::Purpose(Purpose::Validation) => {
            (vec![Method::Regression, Method::Anova], "Validation", GUIDELINE)
        }
        AnalysisMode::Purpose(Purpose::Verification) => (vec![Method::Anova], "Verification", GUIDELINE),
    };
    AnalysisPlan {
        methods,
        row: row.to_string(),
        note: note.to_string(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum DesignCategory {
    Classical,
    Modern,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DesignRecommendation {
    pub category: DesignCategory,
    pub families: Vec<DesignFamily>,
    pub rationale: String,
    /// False when the budget cannot even estimate every main effect.
    pub feasible: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RecommendError {
    #[error("n_factors must be at least 1")]
    NoFactors,
    #[error("max_treatments must be at least 2")]
    BudgetTooSmall,
}

const CLASSICAL_TRAITS: &str = "Small number of treatments, focus on fluctuations, \
trade-off between number of factors and number of levels (interactions vs nonlinearities)";
const MODERN_TRAITS: &str = "Large number of treatments, fluctuations mostly neglected, \
large number of factors, space-filling designs";

/// Suggests a design category and families.
///
/// A budget is "small" when `max_treatments <= 2 * (n_factors + 1)`. Classical
/// designs are suggested for small budgets or fluctuating systems; modern
/// space-filling designs when the budget is large and nonlinear behaviour is
/// expected of a deterministic system.
pub fn recommend_design(
    n_factors: usize,
    max_treatments: usize,
    fluctuations_expected: bool,
    nonlinear_expected: bool,
) -> Result<DesignRecommendation, RecommendError> {
    if n_factors < 1 {
        return Err(RecommendError::NoFactors);
    }
    if max_treatments < 2 {
        return Err(RecommendError::BudgetTooSmall);
    }
    let small = max_treatments <= 2 * (n_factors + 1);
    let feasible = max_treatments > n_factors;
    let full_size = 1usize.checked_shl(n_factors as u32).filter(|_| n_factors < 63);
    let mut reasons = Vec::new();
    if small {
        reasons.push(format!(
            "budget {max_treatments} is small for {n_factors} factors (<= 2*(k+1) = {})",
            2 * (n_factors + 1)
        ));
    }
    if fluctuations_expected {
        reasons.push("fluctuations expected: replication of factor values matters".to_string());
    }
    let modern = !small && !fluctuations_expected && nonlinear_expected;

    let (category, families) = if modern {
        reasons.push("large budget and nonlinear behaviour: space-filling designs apply".into());
        (
            DesignCategory::Modern,
            vec![
                DesignFamily::LatinHypercube,
                DesignFamily::Sobol,
                DesignFamily::MonteCarlo,
            ],
        )
    } else {
        let mut fams = Vec::new();
        let full_fits = full_size.is_some_and(|s| s <= max_treatments);
        if full_fits {
            fams.push(DesignFamily::FullFactorial);
        }
        if nonlinear_expected {
            if n_factors >= 2 && full_size.is_some_and(|s| s + 2 * n_factors + 1 <= max_treatments) {
                fams.push(DesignFamily::CentralComposite);
            }
            if n_factors >= 3 && 2 * n_factors * (n_factors - 1) + 1 <= max_treatments {
                fams.push(DesignFamily::BoxBehnken);
            }
        }
        let pb_runs = [4usize, 8, 12, 16, 20, 24].into_iter().find(|&n| n > n_factors);
        if !full_fits {
            if let Some(n) = pb_runs {
                if n <= max_treatments || !feasible {
                    fams.push(DesignFamily::PlackettBurman);
                }
            }
            let mut runs = 4usize;
            while runs <= n_factors {
                runs *= 2;
            }
            if n_factors >= 3 && runs <= max_treatments {
                fams.push(DesignFamily::FractionalFactorial);
            }
        }
        if fams.is_empty() {
            fams.push(DesignFamily::PlackettBurman);
        }
        (DesignCategory::Classical, fams)
    };
    let traits = match category {
        DesignCategory::Classical => CLASSICAL_TRAITS,
        DesignCategory::Modern => MODERN_TRAITS,
    };
    let mut rationale = format!("{category:?} designs ({traits}).");
    if !reasons.is_empty() {
        rationale.push(' ');
        rationale.push_str(&reasons.join("; "));
        rationale.push('.');
    }
    if !feasible {
        rationale.push_str(&format!(
            " Infeasible budget: {max_treatments} treatments cannot estimate {n_factors} main \
             effects plus a mean (needs at least {}); screen out factors first.",
            n_factors + 1
        ));
    }
    Ok(DesignRecommendation {
        category,
        families,
        rationale,
        feasible,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum HandlingConcept {
    Randomization,
    Blocking,
    Ancova,
    NotApplicable,
}

pub fn recommend_nuisance_handling(role: FactorRole) -> HandlingConcept {
    match role {
        FactorRole::NuisanceUnknown => HandlingConcept::Randomization,
        FactorRole::NuisanceKnownControllable => HandlingConcept::Blocking,
        FactorRole::NuisanceKnownUncontrollable => HandlingConcept::Ancova,
        FactorRole::TreatmentExperimental | FactorRole::TreatmentClassification => HandlingConcept::NotApplicable,
    }
}
