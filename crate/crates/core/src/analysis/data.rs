//! Analysis datasets: factor columns plus response vectors.

use super::AnalysisError;
use crate::design::{Coding, Design};
use crate::spec::{Domain, Factor, FactorValue, Treatment};

#[derive(Debug, Clone, PartialEq)]
pub enum Column {
    Continuous {
        values: Vec<f64>,
        /// Declared range used for coding; the sample range otherwise.
        range: Option<(f64, f64)>,
    },
    Categorical {
        values: Vec<String>,
        /// Level order for the contrasts (declared order, then any label
        /// seen in the data but not declared).
        levels: Vec<String>,
    },
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Dataset {
    n: usize,
    factors: Vec<(String, Column)>,
    responses: Vec<(String, Vec<f64>)>,
}

impl Dataset {
    pub fn new(n: usize) -> Self {
        Dataset {
            n,
            ..Default::default()
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    fn check_len(&self, name: &str, len: usize) -> Result<(), AnalysisError> {
        if len != self.n {
            return Err(AnalysisError::LengthMismatch {
                name: name.to_string(),
                expected: self.n,
                found: len,
            });
        }
        Ok(())
    }

    pub fn add_continuous(
        &mut self,
        name: &str,
        values: Vec<f64>,
        range: Option<(f64, f64)>,
    ) -> Result<&mut Self, AnalysisError> {
        self.check_len(name, values.len())?;
        self.factors
            .push((name.to_string(), Column::Continuous { values, range }));
        Ok(self)
    }

    pub fn add_categorical(
        &mut self,
        name: &str,
        values: Vec<String>,
        declared: &[String],
    ) -> Result<&mut Self, AnalysisError> {
        self.check_len(name, values.len())?;
        let mut levels: Vec<String> = declared.to_vec();
        for v in &values {
            if !levels.contains(v) {
                levels.push(v.clone());
            }
        }
        self.factors
            .push((name.to_string(), Column::Categorical { values, levels }));
        Ok(self)
    }

    pub fn add_response(&mut self, name: &str, values: Vec<f64>) -> Result<&mut Self, AnalysisError> {
        self.check_len(name, values.len())?;
        self.responses.push((name.to_string(), values));
        Ok(self)
    }

    pub fn column(&self, name: &str) -> Option<&Column> {
        self.factors.iter().find(|(n, _)| n == name).map(|(_, c)| c)
    }

    pub fn factor_names(&self) -> Vec<&str> {
        self.factors.iter().map(|(n, _)| n.as_str()).collect()
    }

    pub fn response(&self, name: &str) -> Result<&[f64], AnalysisError> {
        self.responses
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| v.as_slice())
            .ok_or_else(|| AnalysisError::UnknownResponse(name.to_string()))
    }

    pub fn response_names(&self) -> Vec<&str> {
        self.responses.iter().map(|(n, _)| n.as_str()).collect()
    }

    /// The same data with every continuous factor turned into a categorical
    /// one whose levels are its distinct values in ascending order, as in a
    /// classical factorial ANOVA on group means.
    pub fn with_levels_as_groups(&self) -> Dataset {
        let mut out = self.clone();
        for (_, c) in out.factors.iter_mut() {
            if let Column::Continuous { values, .. } = c {
                let mut distinct = values.clone();
                distinct.sort_by(f64::total_cmp);
                distinct.dedup();
                *c = Column::Categorical {
                    values: values.iter().map(|x| x.to_string()).collect(),
                    levels: distinct.iter().map(|x| x.to_string()).collect(),
                };
            }
        }
        out
    }

    /// Mean response per observed level of a factor, in level order
    /// (ascending value for continuous factors).
    pub fn level_means(&self, factor: &str, response: &str) -> Result<Vec<(String, f64)>, AnalysisError> {
        let y = self.response(response)?;
        let grouped = self.with_levels_as_groups();
        let col = grouped
            .column(factor)
            .ok_or_else(|| AnalysisError::UnknownFactor(factor.to_string()))?;
        let Column::Categorical { values, .. } = col else {
            unreachable!("grouped columns are categorical")
        };
        Ok(col
            .observed_levels()
            .into_iter()
            .map(|level| {
                let (sum, n) = values
                    .iter()
                    .zip(y)
                    .filter(|(v, _)| v.as_str() == level)
                    .fold((0.0, 0usize), |(s, n), (_, y)| (s + y, n + 1));
                (level.to_string(), sum / n as f64)
            })
            .collect())
    }

    /// Keeps only the rows where `keep` is true.
    pub fn filter_rows(&self, keep: &[bool]) -> Dataset {
        let pick = |v: &[f64]| -> Vec<f64> { v.iter().zip(keep).filter(|(_, k)| **k).map(|(x, _)| *x).collect() };
        Dataset {
            n: keep.iter().filter(|k| **k).count(),
            factors: self
                .factors
                .iter()
                .map(|(name, c)| {
                    let c = match c {
                        Column::Continuous { values, range } => Column::Continuous {
                            values: pick(values),
                            range: *range,
                        },
                        Column::Categorical { values, levels } => Column::Categorical {
                            values: values
                                .iter()
                                .zip(keep)
                                .filter(|(_, k)| **k)
                                .map(|(x, _)| x.clone())
                                .collect(),
                            levels: levels.clone(),
                        },
                    };
                    (name.clone(), c)
                })
                .collect(),
            responses: self.responses.iter().map(|(n, v)| (n.clone(), pick(v))).collect(),
        }
    }

    /// Builds the factor columns from scaled treatments, coding continuous
    /// factors by their declared ranges.
    pub fn from_treatments(factors: &[&Factor], rows: &[Treatment]) -> Result<Dataset, AnalysisError> {
        let mut data = Dataset::new(rows.len());
        for f in factors {
            let cells = rows
                .iter()
                .map(|t| {
                    t.get(&f.name)
                        .ok_or_else(|| AnalysisError::UnknownFactor(f.name.clone()))
                })
                .collect::<Result<Vec<&FactorValue>, _>>()?;
            match &f.domain {
                Domain::Continuous { low, high, .. } => {
                    let values = cells
                        .iter()
                        .map(|v| {
                            v.as_number().ok_or_else(|| {
                                AnalysisError::InvalidTerm(format!("factor '{}' has a non-numeric value {v}", f.name))
                            })
                        })
                        .collect::<Result<_, _>>()?;
                    data.add_continuous(&f.name, values, Some((*low, *high)))?;
                }
                Domain::Categorical { labels } => {
                    let values = cells.iter().map(|v| v.to_string()).collect();
                    data.add_categorical(&f.name, values, labels)?;
                }
            }
        }
        Ok(data)
    }

    /// Factor columns straight from a coded design (coded units kept as is).
    pub fn from_design(design: &Design) -> Dataset {
        let range = match design.coding {
            Coding::UnitCube => (0.0, 1.0),
            _ => (-1.0, 1.0),
        };
        let mut data = Dataset::new(design.n_runs());
        for (j, name) in design.factor_names.iter().enumerate() {
            data.add_continuous(name, design.column(j), Some(range))
                .expect("design columns have n_runs entries");
        }
        data
    }
}

impl Column {
    /// Coded values: centred and scaled to [−1, +1] over the range.
    pub(crate) fn coded(&self) -> Option<Vec<f64>> {
        let Column::Continuous { values, range } = self else {
            return None;
        };
        let (low, high) = range.unwrap_or_else(|| {
            values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
                (lo.min(x), hi.max(x))
            })
        });
        let mid = (low + high) / 2.0;
        let half = (high - low) / 2.0;
        Some(if half > 0.0 && half.is_finite() {
            values.iter().map(|x| (x - mid) / half).collect()
        } else {
            vec![0.0; values.len()]
        })
    }

    /// Covariate column: coded if a range is declared, else centred on the
    /// sample mean.
    pub(crate) fn covariate(&self) -> Option<Vec<f64>> {
        match self {
            Column::Continuous { range: Some(_), .. } => self.coded(),
            Column::Continuous { values, range: None } => {
                let mean = values.iter().sum::<f64>() / values.len().max(1) as f64;
                Some(values.iter().map(|x| x - mean).collect())
            }
            Column::Categorical { .. } => None,
        }
    }

    /// Levels that actually occur, in contrast order.
    pub(crate) fn observed_levels(&self) -> Vec<&str> {
        match self {
            Column::Categorical { values, levels } => levels
                .iter()
                .filter(|l| values.contains(l))
                .map(String::as_str)
                .collect(),
            Column::Continuous { .. } => Vec::new(),
        }
    }

    /// Distinct values of a continuous column.
    pub fn distinct_count(&self) -> usize {
        match self {
            Column::Continuous { values, .. } => {
                let mut v = values.clone();
                v.sort_by(f64::total_cmp);
                v.dedup();
                v.len()
            }
            Column::Categorical { .. } => self.observed_levels().len(),
        }
    }
}
