//! Mapping coded design rows to factor values in engineering units.

use serde::Serialize;

use super::{Coding, Design, DesignError};
use crate::spec::{Factor, FactorValue, Treatment};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScaledTreatment {
    pub values: Treatment,
    /// Factors whose value falls outside the declared range (axial points
    /// of a rotatable central-composite design, for instance).
    pub out_of_range: Vec<String>,
}

fn levels_of(design: &Design, j: usize) -> usize {
    match (&design.column_levels, design.coding) {
        (Some(levels), _) => levels[j],
        (None, Coding::TwoLevel) => 2,
        (None, _) => 3,
    }
}

fn affine(factor: &Factor, coded: f64) -> Result<f64, DesignError> {
    let (low, high) = factor
        .range()
        .ok_or_else(|| DesignError::RangeMissing(factor.name.clone()))?;
    Ok(low + (coded + 1.0) / 2.0 * (high - low))
}

fn scale_one(design: &Design, j: usize, factor: &Factor, coded: f64) -> Result<FactorValue, DesignError> {
    match design.coding {
        Coding::TwoLevel | Coding::LevelGrid | Coding::ThreeLevelBb => {
            let l = levels_of(design, j);
            let index = ((coded + 1.0) / 2.0 * (l - 1) as f64).round() as usize;
            let levels = factor.effective_levels();
            if levels.len() == l {
                Ok(levels[index.min(l - 1)].clone())
            } else if !factor.is_categorical() {
                affine(factor, coded).map(FactorValue::Number)
            } else {
                Err(DesignError::CardinalityMismatch(format!(
                    "factor '{}' has {} levels but design column {} has {l}",
                    factor.name,
                    levels.len(),
                    design.factor_names[j]
                )))
            }
        }
        Coding::FiveLevelCcd => affine(factor, coded).map(FactorValue::Number),
        Coding::UnitCube => match factor.range() {
            Some((low, high)) if factor.levels.is_none() => Ok(FactorValue::Number(low + coded * (high - low))),
            _ => {
                let levels = factor.effective_levels();
                let index = ((coded * levels.len() as f64).floor() as usize).min(levels.len() - 1);
                Ok(levels[index].clone())
            }
        },
    }
}

/// Scales every run of `design`; `factors[j]` describes design column `j`.
pub fn scale_to_ranges(design: &Design, factors: &[&Factor]) -> Result<Vec<ScaledTreatment>, DesignError> {
    if factors.len() != design.n_factors() {
        return Err(DesignError::CardinalityMismatch(format!(
            "design has {} columns, {} factors given",
            design.n_factors(),
            factors.len()
        )));
    }
    design
        .matrix
        .iter()
        .map(|row| {
            let mut values = Treatment::new();
            let mut out_of_range = Vec::new();
            for (j, (&coded, factor)) in row.iter().zip(factors).enumerate() {
                let v = scale_one(design, j, factor, coded)?;
                if !factor.contains(&v) {
                    out_of_range.push(factor.name.clone());
                }
                values.insert(factor.name.clone(), v);
            }
            Ok(ScaledTreatment { values, out_of_range })
        })
        .collect()
}
