//! Classical two-level effect estimates.

use serde::{Deserialize, Serialize};

use super::AnalysisError;
use crate::design::Design;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Effect {
    pub term: String,
    pub estimate: f64,
}

/// Mean response at contrast +1 minus mean response at contrast −1, for
/// every main effect and two-factor interaction.
pub fn effects_two_level(design: &Design, responses: &[f64]) -> Result<Vec<Effect>, AnalysisError> {
    if !design.is_two_level() {
        return Err(AnalysisError::NotTwoLevel);
    }
    if responses.len() != design.n_runs() {
        return Err(AnalysisError::LengthMismatch {
            name: "responses".into(),
            expected: design.n_runs(),
            found: responses.len(),
        });
    }
    let names = &design.factor_names;
    let k = names.len();
    let contrast = |cols: &[usize]| -> Vec<f64> {
        design
            .matrix
            .iter()
            .map(|row| cols.iter().map(|&j| row[j]).product())
            .collect()
    };
    let single = names.iter().all(|n| n.chars().count() == 1);
    let mut terms: Vec<(String, Vec<usize>)> = (0..k).map(|j| (names[j].clone(), vec![j])).collect();
    for a in 0..k {
        for b in a + 1..k {
            let label = if single {
                format!("{}{}", names[a], names[b])
            } else {
                format!("{}:{}", names[a], names[b])
            };
            terms.push((label, vec![a, b]));
        }
    }
    terms
        .into_iter()
        .map(|(term, cols)| {
            let c = contrast(&cols);
            let (mut hi, mut nh, mut lo, mut nl) = (0.0, 0usize, 0.0, 0usize);
            for (x, y) in c.iter().zip(responses) {
                if *x > 0.0 {
                    hi += y;
                    nh += 1;
                } else {
                    lo += y;
                    nl += 1;
                }
            }
            if nh == 0 || nl == 0 {
                return Err(AnalysisError::InvalidTerm(format!(
                    "contrast {term} takes a single sign over the design"
                )));
            }
            Ok(Effect {
                term,
                estimate: hi / nh as f64 - lo / nl as f64,
            })
        })
        .collect()
}
