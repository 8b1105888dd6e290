//! CSV renderings of designs and run plans.

use super::{Design, RunPlan, ScaledTreatment};

fn write_records(header: Vec<String>, rows: Vec<Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&header).expect("in-memory write");
    for row in rows {
        w.write_record(&row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 input")
}

/// Coded design matrix, one column per factor.
pub fn design_csv(design: &Design) -> String {
    let rows = design
        .matrix
        .iter()
        .map(|row| row.iter().map(|x| x.to_string()).collect())
        .collect();
    write_records(design.factor_names.clone(), rows)
}

/// Scaled treatments in design order: `point`, the factor columns, and
/// `out_of_range` listing factors outside their declared range.
pub fn treatments_csv(design: &Design, treatments: &[ScaledTreatment]) -> String {
    let mut header = vec!["point".to_string()];
    header.extend(design.factor_names.iter().cloned());
    header.push("out_of_range".into());
    let rows = treatments
        .iter()
        .enumerate()
        .map(|(i, t)| {
            let mut row = vec![i.to_string()];
            row.extend(
                design
                    .factor_names
                    .iter()
                    .map(|n| t.values.get(n).map(|v| v.to_string()).unwrap_or_default()),
            );
            row.push(t.out_of_range.join(" "));
            row
        })
        .collect();
    write_records(header, rows)
}

/// `run_id,block,replicate,seed` followed by the factor columns.
pub fn plan_csv(plan: &RunPlan) -> String {
    let mut header: Vec<String> = ["run_id", "block", "replicate", "seed"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    header.extend(plan.factor_names.iter().cloned());
    let rows = plan
        .runs
        .iter()
        .map(|r| {
            let mut row = vec![
                r.run_id.to_string(),
                r.block.as_ref().map(|b| b.to_string()).unwrap_or_default(),
                r.replicate.to_string(),
                r.seed.to_string(),
            ];
            row.extend(
                plan.factor_names
                    .iter()
                    .map(|n| r.treatment.get(n).map(|v| v.to_string()).unwrap_or_default()),
            );
            row
        })
        .collect();
    write_records(header, rows)
}
