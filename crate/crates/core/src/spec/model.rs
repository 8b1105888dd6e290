use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

/// Purpose of investigation declared by a test case.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Purpose {
    Characterization,
    Validation,
    Verification,
}

impl fmt::Display for Purpose {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Purpose::Characterization => "characterization",
            Purpose::Validation => "validation",
            Purpose::Verification => "verification",
        })
    }
}

/// Why an experiment is run and what it must show.
///
/// Only `purpose_of_investigation` drives behaviour; every other field is
/// carried as opaque text.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestCase {
    pub name: String,
    #[serde(default)]
    pub object_under_investigation: String,
    #[serde(default)]
    pub system_under_test: String,
    #[serde(default)]
    pub functions_under_test: Vec<String>,
    pub purpose_of_investigation: Purpose,
    pub test_criteria: Vec<String>,
    #[serde(default)]
    pub qualification_strategy: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FactorRole {
    TreatmentExperimental,
    TreatmentClassification,
    NuisanceUnknown,
    NuisanceKnownControllable,
    NuisanceKnownUncontrollable,
}

impl FactorRole {
    pub const ALL: [FactorRole; 5] = [
        FactorRole::TreatmentExperimental,
        FactorRole::TreatmentClassification,
        FactorRole::NuisanceUnknown,
        FactorRole::NuisanceKnownControllable,
        FactorRole::NuisanceKnownUncontrollable,
    ];

    pub fn is_treatment(self) -> bool {
        matches!(
            self,
            FactorRole::TreatmentExperimental | FactorRole::TreatmentClassification
        )
    }
}

impl fmt::Display for FactorRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FactorRole::TreatmentExperimental => "treatment_experimental",
            FactorRole::TreatmentClassification => "treatment_classification",
            FactorRole::NuisanceUnknown => "nuisance_unknown",
            FactorRole::NuisanceKnownControllable => "nuisance_known_controllable",
            FactorRole::NuisanceKnownUncontrollable => "nuisance_known_uncontrollable",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Domain {
    Continuous {
        low: f64,
        high: f64,
        #[serde(default)]
        unit: String,
    },
    Categorical {
        labels: Vec<String>,
    },
}

/// A single factor setting: a number for continuous factors, a label for
/// categorical ones.
#[derive(Debug, Clone, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FactorValue {
    Number(f64),
    Label(String),
}

impl FactorValue {
    pub fn as_number(&self) -> Option<f64> {
        match self {
            FactorValue::Number(x) => Some(*x),
            FactorValue::Label(_) => None,
        }
    }

    pub fn as_label(&self) -> Option<&str> {
        match self {
            FactorValue::Label(s) => Some(s),
            FactorValue::Number(_) => None,
        }
    }
}

impl fmt::Display for FactorValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FactorValue::Number(x) => write!(f, "{x}"),
            FactorValue::Label(s) => f.write_str(s),
        }
    }
}

impl From<f64> for FactorValue {
    fn from(x: f64) -> Self {
        FactorValue::Number(x)
    }
}

impl From<&str> for FactorValue {
    fn from(s: &str) -> Self {
        FactorValue::Label(s.to_string())
    }
}

/// One complete assignment of values to factors.
pub type Treatment = BTreeMap<String, FactorValue>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Factor {
    pub name: String,
    pub role: FactorRole,
    pub domain: Domain,
    #[serde(default)]
    pub levels: Option<Vec<FactorValue>>,
}

impl Factor {
    pub fn continuous(name: &str, role: FactorRole, low: f64, high: f64) -> Self {
        Factor {
            name: name.to_string(),
            role,
            domain: Domain::Continuous {
                low,
                high,
                unit: String::new(),
            },
            levels: None,
        }
    }

    pub fn categorical(name: &str, role: FactorRole, labels: &[&str]) -> Self {
        Factor {
            name: name.to_string(),
            role,
            domain: Domain::Categorical {
                labels: labels.iter().map(|s| s.to_string()).collect(),
            },
            levels: None,
        }
    }

    pub fn with_levels(mut self, levels: Vec<FactorValue>) -> Self {
        self.levels = Some(levels);
        self
    }

    pub fn is_categorical(&self) -> bool {
        matches!(self.domain, Domain::Categorical { .. })
    }

    pub fn range(&self) -> Option<(f64, f64)> {
        match self.domain {
            Domain::Continuous { low, high, .. } => Some((low, high)),
            Domain::Categorical { .. } => None,
        }
    }

    /// The levels an experiment uses for this factor: the explicit list if
    /// given, otherwise the categorical labels or the two range endpoints.
    pub fn effective_levels(&self) -> Vec<FactorValue> {
        if let Some(levels) = &self.levels {
            return levels.clone();
        }
        match &self.domain {
            Domain::Continuous { low, high, .. } => {
                vec![FactorValue::Number(*low), FactorValue::Number(*high)]
            }
            Domain::Categorical { labels } => labels.iter().cloned().map(FactorValue::Label).collect(),
        }
    }

    pub fn contains(&self, value: &FactorValue) -> bool {
        match (&self.domain, value) {
            (Domain::Continuous { low, high, .. }, FactorValue::Number(x)) => *x >= *low && *x <= *high,
            (Domain::Categorical { labels }, FactorValue::Label(s)) => labels.contains(s),
            _ => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResponseMetric {
    pub name: String,
    #[serde(default)]
    pub unit: String,
    #[serde(default)]
    pub description: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DesignFamily {
    FullFactorial,
    FractionalFactorial,
    PlackettBurman,
    CentralComposite,
    BoxBehnken,
    LatinHypercube,
    Sobol,
    MonteCarlo,
    OrthogonalArray,
}

impl DesignFamily {
    pub fn name(self) -> &'static str {
        match self {
            DesignFamily::FullFactorial => "full_factorial",
            DesignFamily::FractionalFactorial => "fractional_factorial",
            DesignFamily::PlackettBurman => "plackett_burman",
            DesignFamily::CentralComposite => "central_composite",
            DesignFamily::BoxBehnken => "box_behnken",
            DesignFamily::LatinHypercube => "latin_hypercube",
            DesignFamily::Sobol => "sobol",
            DesignFamily::MonteCarlo => "monte_carlo",
            DesignFamily::OrthogonalArray => "orthogonal_array",
        }
    }

    pub fn parse(s: &str) -> Option<DesignFamily> {
        [
            DesignFamily::FullFactorial,
            DesignFamily::FractionalFactorial,
            DesignFamily::PlackettBurman,
            DesignFamily::CentralComposite,
            DesignFamily::BoxBehnken,
            DesignFamily::LatinHypercube,
            DesignFamily::Sobol,
            DesignFamily::MonteCarlo,
            DesignFamily::OrthogonalArray,
        ]
        .into_iter()
        .find(|f| f.name() == s.replace('-', "_"))
    }
}

impl fmt::Display for DesignFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Axial distance of a central-composite design.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlphaMode {
    Rotatable,
    FaceCentered,
    Custom(f64),
}

/// Inputs for the design recommender, when a specification asks for advice.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdviceRequest {
    pub max_treatments: usize,
    #[serde(default)]
    pub fluctuations_expected: bool,
    #[serde(default)]
    pub nonlinear_expected: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignRequest {
    pub family: DesignFamily,
    #[serde(default)]
    pub generators: Vec<String>,
    #[serde(default)]
    pub n_samples: Option<usize>,
    #[serde(default)]
    pub n_center: Option<usize>,
    #[serde(default)]
    pub alpha: Option<AlphaMode>,
    #[serde(default)]
    pub array: Option<String>,
    #[serde(default)]
    pub block_factor: Option<String>,
    #[serde(default)]
    pub advice: Option<AdviceRequest>,
}

impl DesignRequest {
    pub fn new(family: DesignFamily) -> Self {
        DesignRequest {
            family,
            generators: Vec::new(),
            n_samples: None,
            n_center: None,
            alpha: None,
            array: None,
            block_factor: None,
            advice: None,
        }
    }
}

/// Preliminary purposes that precede the major purpose of investigation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preliminary {
    Screening,
    NonlinearityCheck,
}

/// Either a path to another spec file (relative to the referencing file) or
/// the object itself. Loaded documents always hold `Inline`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Reference<T> {
    Path(String),
    Inline(Box<T>),
}

impl<T> Reference<T> {
    pub fn resolved(&self) -> Option<&T> {
        match self {
            Reference::Inline(t) => Some(t),
            Reference::Path(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestSpecification {
    pub test_case: Reference<TestCase>,
    #[serde(default)]
    pub test_system_configuration: String,
    pub factors: Vec<Factor>,
    pub responses: Vec<ResponseMetric>,
    pub test_design: DesignRequest,
    #[serde(default)]
    pub preliminary_purpose: Option<Preliminary>,
}

impl TestSpecification {
    /// The referenced test case. Loaded specifications always have one.
    ///
    /// # Panics
    /// If the reference was never resolved (a hand-built value holding a path).
    pub fn test_case(&self) -> &TestCase {
        self.test_case
            .resolved()
            .expect("test case reference resolved at load time")
    }

    pub fn factor(&self, name: &str) -> Option<&Factor> {
        self.factors.iter().find(|f| f.name == name)
    }

    pub fn treatment_factors(&self) -> Vec<&Factor> {
        self.factors.iter().filter(|f| f.role.is_treatment()).collect()
    }

    /// Treatment factors that form design columns (the block factor, if any,
    /// is a nuisance factor and never a column).
    pub fn design_factors(&self) -> Vec<&Factor> {
        self.treatment_factors()
    }

    pub fn metric_names(&self) -> Vec<String> {
        self.responses.iter().map(|r| r.name.clone()).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunnerBinding {
    /// Program and arguments.
    pub command: Vec<String>,
    #[serde(default)]
    pub environment: BTreeMap<String, String>,
    pub timeout_s: f64,
    #[serde(default)]
    pub fresh_process: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentDesign {
    /// Path to a design sidecar produced by `doe design`; when absent the
    /// test specification's design request is resolved on the fly.
    #[serde(default)]
    pub design: Option<String>,
    pub master_seed: u64,
    pub replicates: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpecification {
    pub test_specification: Reference<TestSpecification>,
    pub experiment_setup: RunnerBinding,
    pub experiment_design: ExperimentDesign,
}

impl ExperimentSpecification {
    /// # Panics
    /// If the reference was never resolved.
    pub fn test_specification(&self) -> &TestSpecification {
        self.test_specification
            .resolved()
            .expect("test specification reference resolved at load time")
    }
}

/// Any of the three spec file kinds.
#[derive(Debug, Clone, PartialEq)]
pub enum SpecDocument {
    TestCase(TestCase),
    TestSpecification(TestSpecification),
    ExperimentSpecification(ExperimentSpecification),
}

impl SpecDocument {
    pub fn kind(&self) -> &'static str {
        match self {
            SpecDocument::TestCase(_) => "test_case",
            SpecDocument::TestSpecification(_) => "test_specification",
            SpecDocument::ExperimentSpecification(_) => "experiment_specification",
        }
    }
}
