//! Monte-Carlo power for detecting a planted effect.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::anova::{table_from_matrix, Sequential};
use super::data::Dataset;
use super::matrix::build_model_matrix;
use super::AnalysisError;
use crate::design::Design;
use crate::rng;
use crate::terms::ModelTerm;

pub const MIN_SIMULATIONS: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerEstimate {
    pub power: f64,
    /// Normal-approximation 95 % half-width of the binomial proportion.
    pub half_width_95: f64,
    pub rejections: usize,
    pub n_sims: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PowerConfig<'a> {
    /// Model fitted to every simulated response.
    pub terms: &'a [ModelTerm],
    /// Term whose F test counts as a rejection.
    pub target: &'a ModelTerm,
    /// Planted coefficient per model-matrix column label (coded units);
    /// unlisted columns get zero. The intercept may be listed as `intercept`.
    pub coefficients: &'a BTreeMap<String, f64>,
    pub noise_sd: f64,
    pub alpha: f64,
    pub n_sims: usize,
    pub seed: u64,
}

/// Simulates `y = Xβ + N(0, noise_sd²)` on the design and reports how often
/// the target term is significant. Simulation `i` draws from
/// `mix(seed, i)`, so the estimate does not depend on evaluation order.
pub fn power_estimate(design: &Design, config: &PowerConfig) -> Result<PowerEstimate, AnalysisError> {
    if config.n_sims < MIN_SIMULATIONS {
        return Err(AnalysisError::InvalidParameter(format!(
            "power estimation needs at least {MIN_SIMULATIONS} simulations"
        )));
    }
    if !(config.noise_sd > 0.0) {
        return Err(AnalysisError::InvalidParameter("noise_sd must be positive".into()));
    }
    if !config.terms.contains(config.target) {
        return Err(AnalysisError::InvalidTerm(format!(
            "target term {} is not in the model",
            config.target
        )));
    }
    let data = Dataset::from_design(design);
    let m = build_model_matrix(&data, config.terms, true)?;
    for label in config.coefficients.keys() {
        if !m.labels.contains(label) {
            return Err(AnalysisError::UnknownFactor(label.clone()));
        }
    }
    let seq = Sequential::new(&m);
    let mean: Vec<f64> = (0..m.n)
        .map(|i| {
            m.labels
                .iter()
                .zip(&m.columns)
                .map(|(l, c)| config.coefficients.get(l).copied().unwrap_or(0.0) * c[i])
                .sum()
        })
        .collect();
    let target = config.target.label();
    let mut rejections = 0;
    let mut y = vec![0.0; m.n];
    for i in 0..config.n_sims {
        let mut stream = rng::stream(rng::mix(config.seed, i as u64));
        for (yi, mu) in y.iter_mut().zip(&mean) {
            *yi = mu + config.noise_sd * rng::standard_normal(&mut stream);
        }
        let table = table_from_matrix(&m, &seq, "simulated", &y, config.alpha);
        let p = table.row(&target).and_then(|r| r.p_value);
        if p.is_some_and(|p| p < config.alpha) {
            rejections += 1;
        }
    }
    let power = rejections as f64 / config.n_sims as f64;
    Ok(PowerEstimate {
        power,
        half_width_95: 1.96 * (power * (1.0 - power) / config.n_sims as f64).sqrt(),
        rejections,
        n_sims: config.n_sims,
    })
}
