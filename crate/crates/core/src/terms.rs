//! Model terms shared by the design diagnostics and the analysis routines.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub const MAX_INTERACTION_ORDER: usize = 3;
pub const MAX_POWER: u32 = 3;

/// One term of a linear model over factor columns.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ModelTerm {
    /// Linear column of a continuous factor, or the L−1 contrast columns of a
    /// categorical one.
    Main { factor: String },
    /// Elementwise product of the member factors' main-effect columns.
    Interaction { factors: Vec<String> },
    /// Power of a continuous factor's coded column.
    Power { factor: String, degree: u32 },
    /// Continuous nuisance covariate, centred on its sample mean unless the
    /// column has a declared range.
    Covariate { factor: String },
}

impl ModelTerm {
    pub fn main(factor: &str) -> Self {
        ModelTerm::Main {
            factor: factor.to_string(),
        }
    }

    pub fn interaction(factors: &[&str]) -> Self {
        ModelTerm::Interaction {
            factors: factors.iter().map(|s| s.to_string()).collect(),
        }
    }

    pub fn power(factor: &str, degree: u32) -> Self {
        ModelTerm::Power {
            factor: factor.to_string(),
            degree,
        }
    }

    pub fn covariate(factor: &str) -> Self {
        ModelTerm::Covariate {
            factor: factor.to_string(),
        }
    }

    /// Factors the term refers to.
    pub fn factors(&self) -> Vec<&str> {
        match self {
            ModelTerm::Main { factor } | ModelTerm::Power { factor, .. } | ModelTerm::Covariate { factor } => {
                vec![factor.as_str()]
            }
            ModelTerm::Interaction { factors } => factors.iter().map(String::as_str).collect(),
        }
    }

    pub fn label(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for ModelTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelTerm::Main { factor } => f.write_str(factor),
            ModelTerm::Interaction { factors } => f.write_str(&factors.join(":")),
            ModelTerm::Power { factor, degree: 1 } => f.write_str(factor),
            ModelTerm::Power { factor, degree } => write!(f, "{factor}^{degree}"),
            ModelTerm::Covariate { factor } => write!(f, "cov({factor})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("cannot parse model term {0:?} (expected NAME, A:B[:C], NAME^D or cov(NAME))")]
pub struct TermParseError(pub String);

impl FromStr for ModelTerm {
    type Err = TermParseError;

    /// Parses the display form: `A`, `A:B`, `A^2`, `cov(c)`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let err = || TermParseError(s.to_string());
        if let Some(inner) = s.strip_prefix("cov(").and_then(|r| r.strip_suffix(')')) {
            if inner.is_empty() {
                return Err(err());
            }
            return Ok(ModelTerm::covariate(inner));
        }
        if s.contains(':') {
            let parts: Vec<&str> = s.split(':').map(str::trim).collect();
            if parts.iter().any(|p| p.is_empty()) || parts.len() > MAX_INTERACTION_ORDER || parts.len() < 2 {
                return Err(err());
            }
            return Ok(ModelTerm::interaction(&parts));
        }
        if let Some((name, deg)) = s.split_once('^') {
            let degree: u32 = deg.trim().parse().map_err(|_| err())?;
            if name.is_empty() || degree == 0 || degree > MAX_POWER {
                return Err(err());
            }
            return Ok(ModelTerm::power(name.trim(), degree));
        }
        if s.is_empty() {
            return Err(err());
        }
        Ok(ModelTerm::main(s))
    }
}
