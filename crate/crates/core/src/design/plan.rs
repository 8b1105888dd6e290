//! Randomized and blocked run plans.

use std::fs;
use std::io;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Design, DesignError, DesignFamily};
use crate::digest::json_digest;
use crate::rng;
use crate::spec::{Factor, FactorRole, FactorValue, Treatment};

/// One scheduled execution of a treatment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Run {
    /// Position in execution order, starting at 1.
    pub run_id: u64,
    pub treatment: Treatment,
    #[serde(default)]
    pub block: Option<FactorValue>,
    /// 1-based replicate number of this treatment.
    pub replicate: u32,
    /// Seed handed to the system under test, `mix(master_seed, run_id)`.
    pub seed: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    #[serde(default)]
    pub family: Option<DesignFamily>,
    #[serde(default)]
    pub design_digest: Option<String>,
    #[serde(default)]
    pub generators: Vec<String>,
    #[serde(default)]
    pub resolution: Option<u32>,
    /// `complete` or `within_blocks`.
    pub randomization: String,
    /// For each run in execution order, the index of its treatment in the
    /// list the plan was built from.
    pub order: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunPlan {
    pub master_seed: u64,
    pub factor_names: Vec<String>,
    #[serde(default)]
    pub block_factor: Option<String>,
    pub runs: Vec<Run>,
    pub provenance: Provenance,
}

#[derive(Debug, Clone)]
pub struct PlanOptions<'a> {
    pub seed: u64,
    pub replicates: u32,
    pub block: Option<&'a Factor>,
}

impl Default for PlanOptions<'_> {
    fn default() -> Self {
        PlanOptions {
            seed: 0,
            replicates: 1,
            block: None,
        }
    }
}

/// A uniformly random execution order of `n` items.
pub fn randomize_order(n: usize, seed: u64) -> Vec<usize> {
    rng::permutation(n, &mut rng::stream(seed))
}

fn check_treatments(treatments: &[Treatment]) -> Result<Vec<String>, DesignError> {
    let first = treatments
        .first()
        .ok_or_else(|| DesignError::Empty("no treatments to plan".into()))?;
    let names: Vec<String> = first.keys().cloned().collect();
    if treatments.iter().any(|t| !t.keys().eq(names.iter())) {
        return Err(DesignError::CardinalityMismatch(
            "treatments assign different factor sets".into(),
        ));
    }
    Ok(names)
}

fn expand(n: usize, replicates: u32) -> Vec<(usize, u32)> {
    (0..n).flat_map(|t| (1..=replicates).map(move |r| (t, r))).collect()
}

fn assemble(
    treatments: &[Treatment],
    slots: Vec<(usize, u32, Option<FactorValue>)>,
    seed: u64,
    factor_names: Vec<String>,
    block_factor: Option<String>,
    randomization: &str,
) -> RunPlan {
    let order = slots.iter().map(|s| s.0).collect();
    let runs = slots
        .into_iter()
        .enumerate()
        .map(|(i, (t, replicate, block))| {
            let run_id = i as u64 + 1;
            Run {
                run_id,
                treatment: treatments[t].clone(),
                block,
                replicate,
                seed: rng::mix(seed, run_id),
            }
        })
        .collect();
    RunPlan {
        master_seed: seed,
        factor_names,
        block_factor,
        runs,
        provenance: Provenance {
            randomization: randomization.to_string(),
            order,
            ..Default::default()
        },
    }
}

/// Full reproduction of every treatment (with its replicates) inside each
/// level of the block factor, randomized within blocks. Blocks run in the
/// declared level order and share one random stream.
pub fn block_design(
    treatments: &[Treatment],
    block: &Factor,
    replicates: u32,
    seed: u64,
) -> Result<RunPlan, DesignError> {
    if block.role != FactorRole::NuisanceKnownControllable {
        return Err(DesignError::WrongRole {
            name: block.name.clone(),
            role: block.role.to_string(),
        });
    }
    let names = check_treatments(treatments)?;
    if names.contains(&block.name) {
        return Err(DesignError::InvalidParameter(format!(
            "block factor '{}' is also a design column",
            block.name
        )));
    }
    let mut stream = rng::stream(seed);
    let mut slots = Vec::new();
    for level in block.effective_levels() {
        let mut within = expand(treatments.len(), replicates.max(1));
        rng::shuffle(&mut within, &mut stream);
        slots.extend(within.into_iter().map(|(t, r)| (t, r, Some(level.clone()))));
    }
    Ok(assemble(
        treatments,
        slots,
        seed,
        names,
        Some(block.name.clone()),
        "within_blocks",
    ))
}

/// Replicates and completely randomizes the treatments, or delegates to
/// [`block_design`] when a block factor is given.
pub fn make_plan(treatments: &[Treatment], options: &PlanOptions) -> Result<RunPlan, DesignError> {
    if let Some(block) = options.block {
        return block_design(treatments, block, options.replicates, options.seed);
    }
    let names = check_treatments(treatments)?;
    let mut slots = expand(treatments.len(), options.replicates.max(1));
    rng::shuffle(&mut slots, &mut rng::stream(options.seed));
    let slots = slots.into_iter().map(|(t, r)| (t, r, None)).collect();
    Ok(assemble(treatments, slots, options.seed, names, None, "complete"))
}

impl RunPlan {
    /// Records which design the treatments came from.
    pub fn with_design(mut self, design: &Design) -> Self {
        self.provenance.family = Some(design.family);
        self.provenance.design_digest = Some(json_digest(design));
        self.provenance.generators = design.metadata.generators.clone();
        self.provenance.resolution = design.metadata.resolution;
        self
    }

    pub fn digest(&self) -> String {
        json_digest(self)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plan serializes")
    }

    pub fn from_json(text: &str) -> Result<RunPlan, serde_json::Error> {
        serde_json::from_str(text)
    }

    /// Writes `plan.json` and `plan.csv` into `dir`.
    pub fn save(&self, dir: &Path) -> io::Result<()> {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("plan.json"), self.to_json() + "\n")?;
        fs::write(dir.join("plan.csv"), super::plan_csv(self))
    }

    pub fn load(path: &Path) -> io::Result<RunPlan> {
        let text = fs::read_to_string(path)?;
        RunPlan::from_json(&text).map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))
    }
}
