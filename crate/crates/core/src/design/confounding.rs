//! Detection of confounded model terms in a coded design.

use serde::Serialize;

use super::Design;
use crate::terms::ModelTerm;

pub const DEFAULT_CONFOUNDING_THRESHOLD: f64 = 0.999;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConfoundedPair {
    pub first: String,
    pub second: String,
    pub correlation: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ConfoundingReport {
    /// Term pairs whose columns correlate at or above the threshold in
    /// absolute value.
    pub pairs: Vec<ConfoundedPair>,
    /// Terms whose column does not vary across runs (they cannot be
    /// separated from the intercept).
    pub constant_terms: Vec<String>,
}

impl ConfoundingReport {
    pub fn is_clear(&self) -> bool {
        self.pairs.is_empty() && self.constant_terms.is_empty()
    }
}

/// Coded column of a term: a product of factor columns, or a power of one.
/// `None` for covariates and for terms naming factors not in the design.
pub fn term_column(design: &Design, term: &ModelTerm) -> Option<Vec<f64>> {
    let col = |name: &str| design.column_index(name).map(|j| design.column(j));
    match term {
        ModelTerm::Main { factor } => col(factor),
        ModelTerm::Interaction { factors } => {
            let cols = factors.iter().map(|n| col(n)).collect::<Option<Vec<_>>>()?;
            Some(
                (0..design.n_runs())
                    .map(|i| cols.iter().map(|c| c[i]).product())
                    .collect(),
            )
        }
        ModelTerm::Power { factor, degree } => col(factor).map(|c| c.iter().map(|x| x.powi(*degree as i32)).collect()),
        ModelTerm::Covariate { .. } => None,
    }
}

fn correlation(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    sab / (saa * sbb).sqrt()
}

fn is_constant(c: &[f64]) -> bool {
    let first = c.first().copied().unwrap_or(0.0);
    c.iter().all(|x| (x - first).abs() < 1e-12)
}

pub fn detect_confounding(design: &Design, terms: &[ModelTerm]) -> ConfoundingReport {
    detect_confounding_with(design, terms, DEFAULT_CONFOUNDING_THRESHOLD)
}

pub fn detect_confounding_with(design: &Design, terms: &[ModelTerm], threshold: f64) -> ConfoundingReport {
    let mut report = ConfoundingReport::default();
    let columns: Vec<(String, Vec<f64>)> = terms
        .iter()
        .filter_map(|t| term_column(design, t).map(|c| (t.label(), c)))
        .collect();
    let mut varying = Vec::new();
    for (label, c) in columns {
        if is_constant(&c) {
            report.constant_terms.push(label);
        } else {
            varying.push((label, c));
        }
    }
    for i in 0..varying.len() {
        for j in i + 1..varying.len() {
            let r = correlation(&varying[i].1, &varying[j].1);
            if r.abs() >= threshold {
                report.pairs.push(ConfoundedPair {
                    first: varying[i].0.clone(),
                    second: varying[j].0.clone(),
                    correlation: r,
                });
            }
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::design::{fractional_factorial, full_factorial};

    #[test]
    fn half_fraction_confounds_c_with_ab() {
        let d = fractional_factorial(3, &["C=AB"]).unwrap();
        let terms: Vec<ModelTerm> = ["A", "B", "C", "A:B"].iter().map(|s| s.parse().unwrap()).collect();
        let r = detect_confounding(&d, &terms);
        assert_eq!(r.pairs.len(), 1);
        assert_eq!((r.pairs[0].first.as_str(), r.pairs[0].second.as_str()), ("C", "A:B"));
        assert!((r.pairs[0].correlation - 1.0).abs() < 1e-12);
    }

    #[test]
    fn squares_are_constant_on_two_levels() {
        let d = full_factorial(&[2, 2]).unwrap();
        let terms: Vec<ModelTerm> = ["A", "A^2"].iter().map(|s| s.parse().unwrap()).collect();
        let r = detect_confounding(&d, &terms);
        assert_eq!(r.constant_terms, vec!["A^2".to_string()]);
        assert!(r.pairs.is_empty());
    }

    #[test]
    fn full_factorial_is_clear() {
        let d = full_factorial(&[2, 2, 2]).unwrap();
        let terms: Vec<ModelTerm> = ["A", "B", "C", "A:B", "A:C", "B:C"]
            .iter()
            .map(|s| s.parse().unwrap())
            .collect();
        assert!(detect_confounding(&d, &terms).is_clear());
    }
}
