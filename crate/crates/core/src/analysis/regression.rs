//! Least-squares regression and nested-model comparison.

use std::collections::BTreeSet;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use super::anova::Sequential;
use super::data::Dataset;
use super::dist::{f_pvalue, t_pvalue};
use super::matrix::{build_model_matrix, ModelMatrix};
use super::AnalysisError;
use crate::terms::ModelTerm;

const CORRELATION_THRESHOLD: f64 = 0.999;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Coefficient {
    pub label: String,
    pub estimate: f64,
    pub standard_error: f64,
    pub t_statistic: f64,
    pub p_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionResult {
    pub coefficients: Vec<Coefficient>,
    pub r_squared: f64,
    pub adjusted_r_squared: f64,
    /// Residual standard deviation.
    pub sigma: f64,
    pub residuals: Vec<f64>,
    pub n: usize,
    pub df_residual: usize,
}

impl RegressionResult {
    pub fn coefficient(&self, label: &str) -> Option<&Coefficient> {
        self.coefficients.iter().find(|c| c.label == label)
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
    if saa == 0.0 || sbb == 0.0 {
        return 0.0;
    }
    sab / (saa * sbb).sqrt()
}

fn is_constant(c: &[f64]) -> bool {
    c.iter().all(|x| (x - c[0]).abs() < 1e-12)
}

/// Pairs of columns that are (nearly) collinear, for rank-deficiency
/// messages. Constant columns pair with the intercept.
fn collinear_pairs(m: &ModelMatrix) -> Vec<(String, String)> {
    let mut pairs = Vec::new();
    let start = usize::from(m.intercept);
    for i in start..m.n_cols() {
        if m.intercept && is_constant(&m.columns[i]) {
            pairs.push((m.labels[0].clone(), m.labels[i].clone()));
            continue;
        }
        for j in i + 1..m.n_cols() {
            if is_constant(&m.columns[j]) && m.intercept {
                continue;
            }
            let a = &m.columns[i];
            let b = &m.columns[j];
            let same = a == b || correlation(a, b).abs() >= CORRELATION_THRESHOLD;
            if same {
                pairs.push((m.labels[i].clone(), m.labels[j].clone()));
            }
        }
    }
    pairs
}

/// Ordinary least squares through a QR decomposition of `x`.
pub fn ols_regression(x: &ModelMatrix, y: &[f64]) -> Result<RegressionResult, AnalysisError> {
    let n = x.n;
    let p = x.n_cols();
    if y.len() != n {
        return Err(AnalysisError::LengthMismatch {
            name: "response".into(),
            expected: n,
            found: y.len(),
        });
    }
    let seq = Sequential::new(x);
    if seq.rank() < p {
        let pairs = collinear_pairs(x);
        return Err(AnalysisError::RankDeficient {
            dependent: seq.dependent,
            pairs,
        });
    }
    if n <= p {
        return Err(AnalysisError::NoResidualDf);
    }
    let xm = x.to_nalgebra();
    let yv = DVector::from_column_slice(y);
    let qr = xm.clone().qr();
    let r = qr.r();
    let qty = qr.q().transpose() * &yv;
    let beta = r
        .solve_upper_triangular(&qty)
        .ok_or_else(|| AnalysisError::RankDeficient {
            dependent: Vec::new(),
            pairs: collinear_pairs(x),
        })?;
    let r_inv = r.clone().try_inverse().ok_or_else(|| AnalysisError::RankDeficient {
        dependent: Vec::new(),
        pairs: collinear_pairs(x),
    })?;
    // (XᵀX)⁻¹ = R⁻¹ R⁻ᵀ
    let cov_unscaled = &r_inv * r_inv.transpose();
    let fitted = &xm * &beta;
    let residuals: Vec<f64> = (0..n).map(|i| y[i] - fitted[i]).collect();
    let ss_res: f64 = residuals.iter().map(|e| e * e).sum();
    let df_residual = n - p;
    let s2 = ss_res / df_residual as f64;
    let mean = y.iter().sum::<f64>() / n as f64;
    let ss_tot: f64 = y.iter().map(|v| (v - mean) * (v - mean)).sum();
    let (r_squared, adjusted_r_squared) = if ss_tot > 0.0 {
        let r2 = (1.0 - ss_res / ss_tot).clamp(0.0, 1.0);
        let dof_model = if x.intercept { p - 1 } else { p };
        let adj = 1.0 - (1.0 - r2) * (n - 1) as f64 / (n - 1 - dof_model.min(n - 2)) as f64;
        (r2, adj.min(r2))
    } else {
        (1.0, 1.0)
    };
    let coefficients = (0..p)
        .map(|j| {
            let se = (s2 * cov_unscaled[(j, j)]).sqrt();
            let t = if se > 0.0 {
                beta[j] / se
            } else if beta[j] == 0.0 {
                0.0
            } else {
                f64::INFINITY * beta[j].signum()
            };
            Coefficient {
                label: x.labels[j].clone(),
                estimate: beta[j],
                standard_error: se,
                t_statistic: if t.is_finite() { t } else { f64::MAX.copysign(t) },
                p_value: t_pvalue(t, df_residual),
            }
        })
        .collect();
    Ok(RegressionResult {
        coefficients,
        r_squared,
        adjusted_r_squared,
        sigma: s2.sqrt(),
        residuals,
        n,
        df_residual,
    })
}

/// Builds the model matrix (with intercept) and fits it.
pub fn regression(data: &Dataset, response: &str, terms: &[ModelTerm]) -> Result<RegressionResult, AnalysisError> {
    let y = data.response(response)?;
    let m = build_model_matrix(data, terms, true)?;
    ols_regression(&m, y)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preferred {
    Reduced,
    Full,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelComparison {
    pub reduced: Vec<String>,
    pub full: Vec<String>,
    pub ss_residual_reduced: f64,
    pub ss_residual_full: f64,
    pub df_difference: usize,
    pub df_residual_full: usize,
    pub f_statistic: f64,
    pub p_value: f64,
    pub preferred: Preferred,
}

/// Partial F test of a reduced model against a full model containing it.
pub fn compare_models(
    data: &Dataset,
    response: &str,
    reduced: &[ModelTerm],
    full: &[ModelTerm],
    alpha: f64,
) -> Result<ModelComparison, AnalysisError> {
    let rs: BTreeSet<&ModelTerm> = reduced.iter().collect();
    let fs: BTreeSet<&ModelTerm> = full.iter().collect();
    if !rs.is_subset(&fs) || rs.len() == fs.len() {
        return Err(AnalysisError::NotNested);
    }
    let y = data.response(response)?;
    let fit = |terms: &[ModelTerm]| -> Result<(f64, usize), AnalysisError> {
        let m = build_model_matrix(data, terms, true)?;
        let seq = Sequential::new(&m);
        let (_, ss_res) = seq.sums_of_squares(y);
        Ok((ss_res, seq.rank()))
    };
    let (ss_r, rank_r) = fit(reduced)?;
    let (ss_f, rank_f) = fit(full)?;
    let n = data.n();
    if n <= rank_f {
        return Err(AnalysisError::NoResidualDf);
    }
    let df_res = n - rank_f;
    let df_diff = rank_f.saturating_sub(rank_r);
    let gain = (ss_r - ss_f).max(0.0);
    let mean = y.iter().sum::<f64>() / n as f64;
    let ss_tot: f64 = y.iter().map(|v| (v - mean) * (v - mean)).sum();
    let negligible = df_diff == 0 || gain <= 1e-12 * ss_tot.max(f64::MIN_POSITIVE);
    let (f, p) = if negligible {
        (0.0, 1.0)
    } else {
        let ms_res = ss_f / df_res as f64;
        if ms_res > 0.0 {
            let f = gain / df_diff as f64 / ms_res;
            (f, f_pvalue(f, df_diff, df_res))
        } else {
            (f64::MAX, 0.0)
        }
    };
    Ok(ModelComparison {
        reduced: reduced.iter().map(ModelTerm::label).collect(),
        full: full.iter().map(ModelTerm::label).collect(),
        ss_residual_reduced: ss_r,
        ss_residual_full: ss_f,
        df_difference: df_diff,
        df_residual_full: df_res,
        f_statistic: f,
        p_value: p,
        preferred: if p < alpha { Preferred::Full } else { Preferred::Reduced },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line() {
        let mut d = Dataset::new(3);
        d.add_continuous("x", vec![0.0, 1.0, 2.0], Some((-1.0, 1.0))).unwrap();
        d.add_response("y", vec![0.0, 1.0, 2.0]).unwrap();
        let r = regression(&d, "y", &[ModelTerm::main("x")]).unwrap();
        assert!(r.coefficient("intercept").unwrap().estimate.abs() < 1e-12);
        assert!((r.coefficient("x").unwrap().estimate - 1.0).abs() < 1e-12);
        assert!((r.r_squared - 1.0).abs() < 1e-12);
    }

    #[test]
    fn duplicated_column_names_the_pair() {
        let mut d = Dataset::new(4);
        d.add_continuous("a", vec![0.0, 1.0, 2.0, 3.0], None).unwrap();
        d.add_continuous("b", vec![0.0, 1.0, 2.0, 3.0], None).unwrap();
        d.add_response("y", vec![1.0, 2.0, 2.0, 5.0]).unwrap();
        let err = regression(&d, "y", &[ModelTerm::main("a"), ModelTerm::main("b")]).unwrap_err();
        match err {
            AnalysisError::RankDeficient { pairs, .. } => {
                assert_eq!(pairs, vec![("a".to_string(), "b".to_string())])
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    fn quad_data(y: impl Fn(f64) -> f64) -> Dataset {
        let xs: Vec<f64> = (0..7).map(|i| i as f64).collect();
        let mut d = Dataset::new(7);
        d.add_continuous("x", xs.clone(), Some((0.0, 6.0))).unwrap();
        d.add_response("y", xs.iter().map(|&x| y(x)).collect()).unwrap();
        d
    }

    #[test]
    fn nonlinearity_check() {
        let lin = [ModelTerm::main("x")];
        let quad = [ModelTerm::main("x"), ModelTerm::power("x", 2)];
        let c = compare_models(&quad_data(|x| 1.0 + 2.0 * x), "y", &lin, &quad, 0.05).unwrap();
        assert_eq!(c.preferred, Preferred::Reduced);
        assert_eq!(c.f_statistic, 0.0);
        let c = compare_models(&quad_data(|x| 1.0 + x * x), "y", &lin, &quad, 0.05).unwrap();
        assert_eq!(c.preferred, Preferred::Full);
        assert!(c.p_value < 1e-6);
        assert_eq!(
            compare_models(&quad_data(|x| x), "y", &quad, &quad, 0.05),
            Err(AnalysisError::NotNested)
        );
    }
}
