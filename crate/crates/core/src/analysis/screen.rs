//! Turning a screening ANOVA into per-factor decisions for the next stage.

use serde::{Deserialize, Serialize};

use super::{AnalysisError, AnovaTable, Dataset};
use crate::spec::{Domain, Factor};

/// Level-mean spread left after dropping the worst end level, relative to
/// the full spread, below which a factor's effect counts as saturated.
pub const SATURATION_FRACTION: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Verdict {
    /// Keep varying the factor over its full range.
    TreatmentFactor,
    /// Hold the factor at its best level in later experiments.
    BlockAt { level: String },
    /// Keep the factor but only over the levels where it still matters.
    RestrictRange { low: f64, high: f64 },
    /// Negligible: exclude from later experiments.
    Drop,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorConclusion {
    pub factor: String,
    #[serde(flatten)]
    pub verdict: Verdict,
    /// Smallest p value over the terms that involve the factor.
    pub p_value: Option<f64>,
    /// Mean response per level, ascending level order.
    pub level_means: Vec<(String, f64)>,
    pub rationale: String,
}

/// Decides, per factor, how a response to be minimized should shape the
/// next experiment:
///
/// - no significant term involving the factor: drop it;
/// - categorical and significant: block it at the level with the lowest mean;
/// - continuous and significant, with the response saturating once the
///   worst end level is removed: restrict its range to the other levels;
/// - otherwise: keep it as a treatment factor.
pub fn screening_conclusions(
    data: &Dataset,
    table: &AnovaTable,
    factors: &[&Factor],
    alpha: f64,
) -> Result<Vec<FactorConclusion>, AnalysisError> {
    let mut out = Vec::new();
    for f in factors {
        let p_value = table
            .term_rows()
            .filter(|r| r.term.as_ref().is_some_and(|t| t.factors().contains(&f.name.as_str())))
            .filter_map(|r| r.p_value)
            .min_by(f64::total_cmp);
        let means = data.level_means(&f.name, &table.response)?;
        let significant = p_value.is_some_and(|p| p < alpha);
        let p_text = p_value.map_or("n/a".to_string(), |p| format!("{p:.3e}"));
        let (verdict, rationale) = if !significant {
            (
                Verdict::Drop,
                format!("no term involving {} is significant (min p = {p_text})", f.name),
            )
        } else if matches!(f.domain, Domain::Categorical { .. }) || means.len() < 3 {
            let best = means
                .iter()
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .map(|(l, _)| l.clone())
                .unwrap_or_default();
            if matches!(f.domain, Domain::Categorical { .. }) {
                (
                    Verdict::BlockAt { level: best.clone() },
                    format!(
                        "significant (min p = {p_text}); level '{best}' gives the lowest mean {}",
                        table.response
                    ),
                )
            } else {
                (Verdict::TreatmentFactor, format!("significant (min p = {p_text})"))
            }
        } else {
            match saturated_range(&means) {
                Some((low, high, left)) => (
                    Verdict::RestrictRange { low, high },
                    format!(
                        "significant (min p = {p_text}), but only {:.1} % of the level-mean spread \
                         remains over [{low}, {high}]",
                        100.0 * left
                    ),
                ),
                None => (
                    Verdict::TreatmentFactor,
                    format!("significant (min p = {p_text}) across its whole range"),
                ),
            }
        };
        out.push(FactorConclusion {
            factor: f.name.clone(),
            verdict,
            p_value,
            level_means: means,
            rationale,
        });
    }
    Ok(out)
}

/// With numeric levels in ascending order: if removing the worse of the two
/// end levels leaves a spread of at most `SATURATION_FRACTION` of the full
/// spread, the range of the remaining levels and the fraction left.
fn saturated_range(means: &[(String, f64)]) -> Option<(f64, f64, f64)> {
    let levels: Vec<f64> = means.iter().map(|(l, _)| l.parse().ok()).collect::<Option<_>>()?;
    let y: Vec<f64> = means.iter().map(|(_, m)| *m).collect();
    let spread = |v: &[f64]| {
        v.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - v.iter().cloned().fold(f64::INFINITY, f64::min)
    };
    let full = spread(&y);
    if full <= 0.0 {
        return None;
    }
    let n = y.len();
    let (kept, range) = if y[0] >= y[n - 1] {
        (&y[1..], (levels[1], levels[n - 1]))
    } else {
        (&y[..n - 1], (levels[0], levels[n - 2]))
    };
    let left = spread(kept) / full;
    (left <= SATURATION_FRACTION).then_some((range.0, range.1, left))
}
