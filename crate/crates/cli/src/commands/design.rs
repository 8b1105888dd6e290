use serde::Serialize;

use doe_core::design::{design_csv, treatments_csv};

use crate::args::{DesignArgs, GlobalArgs};
use crate::error::{CliError, OrExit, EXIT_EXECUTION};
use crate::output::{emit, Render};
use crate::pipeline::{
    apply_overrides, build_design, build_plan, load_test_spec, write_json, DesignOutput, DesignSidecar,
};

#[derive(Debug, Clone, Serialize)]
pub struct DesignReport {
    pub spec_digest: String,
    #[serde(flatten)]
    pub output: DesignOutput,
    pub files: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub plan_digest: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub plan_runs: Option<usize>,
}

impl Render for DesignReport {
    fn text(&self) -> String {
        let o = &self.output;
        let d = &o.design;
        let mut s = format!(
            "{} design: {} runs over {} ({} factors), seed {}\n",
            d.family,
            d.n_runs(),
            d.factor_names.join(", "),
            d.n_factors(),
            o.seed
        );
        if !d.metadata.generators.is_empty() {
            s += &format!("generators: {}\n", d.metadata.generators.join(", "));
        }
        if !d.metadata.defining_relation.is_empty() {
            s += &format!("defining relation: I = {}\n", d.metadata.defining_relation.join(" = "));
        }
        if let Some(r) = d.metadata.resolution {
            s += &format!("resolution: {r}\n");
        }
        if let Some(r) = &o.recommendation {
            let fams: Vec<String> = r.families.iter().map(|f| f.to_string()).collect();
            s += &format!(
                "recommended: {:?} ({})\n    {}\n",
                r.category,
                fams.join(", "),
                r.rationale
            );
        }
        if let Some(a) = &o.aliases {
            s += "alias structure:\n";
            for e in a["entries"].as_array().into_iter().flatten() {
                let aliases: Vec<&str> = e["aliases"]
                    .as_array()
                    .into_iter()
                    .flatten()
                    .filter_map(|v| v.as_str())
                    .collect();
                let term = e["term"].as_str().unwrap_or("");
                if aliases.is_empty() {
                    s += &format!("    {term}: clear\n");
                } else {
                    s += &format!("    {term} = {}\n", aliases.join(" = "));
                }
            }
        }
        if let Some(c) = &o.confounding {
            let pairs = c["pairs"].as_array().map_or(0, Vec::len);
            if pairs == 0 {
                s += "confounding: none among main effects and two-factor interactions\n";
            } else {
                s += "confounding:\n";
                for p in c["pairs"].as_array().into_iter().flatten() {
                    s += &format!("    {} ~ {} (r = {})\n", p["first"], p["second"], p["correlation"]);
                }
            }
        }
        let outside: usize = o.treatments.iter().filter(|t| !t.out_of_range.is_empty()).count();
        if outside > 0 {
            s += &format!("warning: {outside} treatment(s) fall outside the declared factor ranges\n");
        }
        if let (Some(n), Some(digest)) = (self.plan_runs, &self.plan_digest) {
            s += &format!("plan: {n} runs, digest {digest}\n");
        }
        for f in &self.files {
            s += &format!("wrote {f}\n");
        }
        s
    }
}

pub fn cmd_design(args: &DesignArgs, global: &GlobalArgs) -> Result<DesignReport, CliError> {
    let (ts, spec_digest) = load_test_spec(&args.spec, global.lenient)?;
    let request = apply_overrides(&ts.test_design, &args.overrides)?;
    let seed = global.seed.unwrap_or(0);
    let output = build_design(&ts, &request, seed)?;
    std::fs::create_dir_all(&global.out_dir).or_exit(EXIT_EXECUTION)?;
    let dir = &global.out_dir;
    let mut files = Vec::new();

    let csv_path = dir.join("design.csv");
    std::fs::write(&csv_path, treatments_csv(&output.design, &output.treatments)).or_exit(EXIT_EXECUTION)?;
    files.push(csv_path.display().to_string());
    let coded_path = dir.join("design_coded.csv");
    std::fs::write(&coded_path, design_csv(&output.design)).or_exit(EXIT_EXECUTION)?;
    files.push(coded_path.display().to_string());
    let side_path = dir.join("design.json");
    write_json(
        &side_path,
        &DesignSidecar {
            spec_digest: spec_digest.clone(),
            seed,
            request: request.clone(),
            design: output.design.clone(),
        },
    )?;
    files.push(side_path.display().to_string());

    let (mut plan_digest, mut plan_runs) = (None, None);
    if args.plan {
        let plan = build_plan(&ts, &request, &output.design, seed, args.replicates)?;
        plan.save(dir).or_exit(EXIT_EXECUTION)?;
        files.push(dir.join("plan.json").display().to_string());
        files.push(dir.join("plan.csv").display().to_string());
        plan_digest = Some(plan.digest());
        plan_runs = Some(plan.runs.len());
    }
    let report = DesignReport {
        spec_digest,
        output,
        files,
        plan_digest,
        plan_runs,
    };
    emit(global, &report);
    Ok(report)
}
