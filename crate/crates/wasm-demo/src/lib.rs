//! Browser bindings for doe-core. Every export returns a JSON string that
//! the page in `www/` plots; the `*_json` functions behind them are plain
//! Rust so they can be tested natively.

use std::collections::BTreeMap;

use doe_core::analysis::{anova, screening_conclusions, Dataset, FactorConclusion};
use doe_core::design::{central_composite, full_factorial, latin_hypercube, monte_carlo, sobol, Coding, Design};
use doe_core::rng;
use doe_core::spec::{AlphaMode, Factor, FactorRole, FactorValue, Treatment};
use doe_core::sut::{simulate, simulate_trace, Priority, SutConfig, SutTreatment};
use doe_core::terms::ModelTerm;
use serde::Serialize;
use wasm_bindgen::prelude::*;

/// Plotted samples per trace.
const TRACE_POINTS: usize = 600;

#[derive(Serialize)]
struct Points {
    family: String,
    runs: usize,
    /// Axis extent of the coded space.
    low: f64,
    high: f64,
    points: Vec<[f64; 2]>,
}

fn two_factor_design(family: &str, n: usize, seed: u64) -> Result<Design, String> {
    let n = n.max(2);
    let d = match family {
        "full_factorial" => {
            let levels = ((n as f64).sqrt().round() as usize).max(2);
            full_factorial(&[levels, levels])
        }
        "central_composite" => central_composite(2, AlphaMode::Rotatable, 1),
        "latin_hypercube" => latin_hypercube(2, n, seed),
        "sobol" => sobol(2, n),
        "monte_carlo" => monte_carlo(2, n, seed),
        other => return Err(format!("unknown design family {other:?}")),
    };
    d.map_err(|e| e.to_string())
}

pub fn design_points_json(family: &str, n: usize, seed: u64) -> Result<String, String> {
    let d = two_factor_design(family, n, seed)?;
    let (low, high) = match d.coding {
        Coding::UnitCube => (0.0, 1.0),
        _ => {
            let a = d.metadata.alpha.unwrap_or(1.0).max(1.0);
            (-a, a)
        }
    };
    let out = Points {
        family: family.to_string(),
        runs: d.n_runs(),
        low,
        high,
        points: d.matrix.iter().map(|r| [r[0], r[1]]).collect(),
    };
    Ok(serde_json::to_string(&out).expect("points serialize"))
}

#[derive(Serialize)]
struct TraceOut {
    t: Vec<f64>,
    speed_dev: Vec<f64>,
    voltage: Vec<f64>,
    p_plant: Vec<f64>,
    peak_speed_dev: f64,
    voltage_nadir: f64,
    recovery_time: f64,
    recovered: bool,
}

fn priority(label: &str) -> Result<Priority, String> {
    Priority::parse(label).ok_or_else(|| format!("priority must be d or q, got {label:?}"))
}

pub fn frt_trace_json(k_arci: f64, limit_priority: &str, r_p: f64) -> Result<String, String> {
    let tr = SutTreatment {
        k_arci,
        priority: priority(limit_priority)?,
        r_p,
    };
    let (m, trace) = simulate_trace(&SutConfig::default(), &tr, true).map_err(|e| e.to_string())?;
    let trace = trace.expect("trace requested");
    let stride = trace.t.len().div_ceil(TRACE_POINTS).max(1);
    let pick = |v: &[f64]| v.iter().step_by(stride).copied().collect::<Vec<_>>();
    let out = TraceOut {
        t: pick(&trace.t),
        speed_dev: pick(&trace.speed_dev),
        voltage: pick(&trace.voltage),
        p_plant: pick(&trace.p_plant),
        peak_speed_dev: m.peak_speed_dev,
        voltage_nadir: m.voltage_nadir,
        recovery_time: m.recovery_time,
        recovered: m.recovered,
    };
    Ok(serde_json::to_string(&out).expect("trace serializes"))
}

#[derive(Serialize)]
struct TermRow {
    term: String,
    df: usize,
    f: Option<f64>,
    p: Option<f64>,
}

#[derive(Serialize)]
struct ScreenOut {
    runs: usize,
    terms: Vec<TermRow>,
    conclusions: Vec<FactorConclusion>,
}

fn screening_factors() -> Vec<Factor> {
    let with_levels = |mut f: Factor, levels: &[f64]| {
        f.levels = Some(levels.iter().map(|&x| FactorValue::Number(x)).collect());
        f
    };
    vec![
        with_levels(
            Factor::continuous("K_aRCI", FactorRole::TreatmentExperimental, 0.0, 2.0),
            &[0.0, 0.5, 1.0, 2.0],
        ),
        Factor::categorical("limit_priority", FactorRole::TreatmentExperimental, &["d", "q"]),
        with_levels(
            Factor::continuous("R_p", FactorRole::TreatmentExperimental, 0.1, 10.0),
            &[0.1, 1.0, 10.0],
        ),
    ]
}

/// The FRT screening grid run in-process with measurement noise, analysed on
/// the peak speed deviation.
pub fn screen_json(noise_sd: f64, replicates: u32, seed: u64) -> Result<String, String> {
    let factors = screening_factors();
    let cfg = SutConfig {
        noise_sd,
        ..Default::default()
    };
    let mut rows: Vec<Treatment> = Vec::new();
    let mut peaks = Vec::new();
    for k in [0.0, 0.5, 1.0, 2.0] {
        for p in ["d", "q"] {
            for r_p in [0.1, 1.0, 10.0] {
                let tr = SutTreatment {
                    k_arci: k,
                    priority: priority(p)?,
                    r_p,
                };
                for _ in 0..replicates.max(1) {
                    let m = simulate(&cfg, &tr, rng::mix(seed, rows.len() as u64 + 1)).map_err(|e| e.to_string())?;
                    peaks.push(m.peak_speed_dev);
                    rows.push(BTreeMap::from([
                        ("K_aRCI".to_string(), FactorValue::Number(k)),
                        ("limit_priority".to_string(), FactorValue::Label(p.to_string())),
                        ("R_p".to_string(), FactorValue::Number(r_p)),
                    ]));
                }
            }
        }
    }
    let refs: Vec<&Factor> = factors.iter().collect();
    let err = |e: doe_core::analysis::AnalysisError| e.to_string();
    let mut data = Dataset::from_treatments(&refs, &rows).map_err(err)?;
    data.add_response("peak_speed_dev", peaks).map_err(err)?;
    let grouped = data.with_levels_as_groups();
    let names = ["K_aRCI", "limit_priority", "R_p"];
    let mut terms: Vec<ModelTerm> = names.iter().map(|n| ModelTerm::main(n)).collect();
    if replicates > 1 {
        for i in 0..names.len() {
            for j in i + 1..names.len() {
                terms.push(ModelTerm::interaction(&[names[i], names[j]]));
            }
        }
    }
    let table = anova(&grouped, "peak_speed_dev", &terms, 0.05).map_err(err)?;
    let conclusions = screening_conclusions(&data, &table, &refs, 0.05).map_err(err)?;
    let out = ScreenOut {
        runs: rows.len(),
        terms: table
            .term_rows()
            .map(|r| TermRow {
                term: r.source.clone(),
                df: r.df,
                f: r.f_statistic,
                p: r.p_value,
            })
            .collect(),
        conclusions,
    };
    Ok(serde_json::to_string(&out).expect("screen report serializes"))
}

#[wasm_bindgen]
pub fn design_points(family: &str, n: u32, seed: u32) -> Result<String, JsError> {
    design_points_json(family, n as usize, seed as u64).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn frt_trace(k_arci: f64, limit_priority: &str, r_p: f64) -> Result<String, JsError> {
    frt_trace_json(k_arci, limit_priority, r_p).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn screen(noise_sd: f64, replicates: u32, seed: u32) -> Result<String, JsError> {
    screen_json(noise_sd, replicates, seed as u64).map_err(|e| JsError::new(&e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::Value;

    #[test]
    fn points_for_every_family() {
        for (family, runs) in [
            ("full_factorial", 16),
            ("central_composite", 9),
            ("latin_hypercube", 16),
            ("sobol", 16),
            ("monte_carlo", 16),
        ] {
            let v: Value = serde_json::from_str(&design_points_json(family, 16, 3).unwrap()).unwrap();
            assert_eq!(v["runs"], runs, "{family}");
            assert_eq!(v["points"].as_array().unwrap().len(), runs);
        }
        assert!(design_points_json("taguchi", 4, 0).is_err());
    }

    #[test]
    fn trace_is_decimated() {
        let v: Value = serde_json::from_str(&frt_trace_json(1.0, "q", 5.0).unwrap()).unwrap();
        let n = v["t"].as_array().unwrap().len();
        assert!(n <= TRACE_POINTS && n > TRACE_POINTS / 2);
        assert_eq!(v["speed_dev"].as_array().unwrap().len(), n);
        assert!(frt_trace_json(1.0, "x", 5.0).is_err());
    }

    #[test]
    fn screening_reaches_the_three_conclusions() {
        let v: Value = serde_json::from_str(&screen_json(1e-4, 2, 2024).unwrap()).unwrap();
        assert_eq!(v["runs"], 48);
        let verdict = |f: &str| {
            v["conclusions"]
                .as_array()
                .unwrap()
                .iter()
                .find(|c| c["factor"] == f)
                .unwrap()
                .clone()
        };
        assert_eq!(verdict("K_aRCI")["verdict"], "treatment_factor");
        assert_eq!(verdict("limit_priority")["level"], "q");
        assert_eq!(verdict("R_p")["verdict"], "restrict_range");
    }
}
