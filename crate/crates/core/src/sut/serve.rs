//! The example system as an experiment process on the line protocol.

use std::collections::BTreeMap;
use std::io::{self, BufRead, Write};

use super::model::{simulate, Priority, SutConfig, SutTreatment};
use crate::runner::{Message, RunStatus};
use crate::spec::{Factor, FactorRole, FactorValue, Treatment};

pub const METRICS: [&str; 3] = ["peak_speed_dev", "voltage_nadir", "recovery_time"];

/// Factors the process understands, with the domains it accepts.
pub fn declared_factors() -> Vec<Factor> {
    vec![
        Factor::continuous("K_aRCI", FactorRole::TreatmentExperimental, 0.0, 5.0),
        Factor::categorical("limit_priority", FactorRole::TreatmentExperimental, &["d", "q"]),
        Factor::continuous("R_p", FactorRole::TreatmentExperimental, 0.01, 100.0),
    ]
}

/// JSON printed by `--describe`.
pub fn describe() -> String {
    let value = serde_json::json!({
        "factors": declared_factors(),
        "metrics": METRICS,
    });
    serde_json::to_string_pretty(&value).expect("serializable")
}

/// Reads a treatment, checking it against the declared domains.
pub fn parse_treatment(t: &Treatment) -> Result<SutTreatment, String> {
    let domains = declared_factors();
    let number = |name: &str| -> Result<f64, String> {
        let v = t.get(name).ok_or_else(|| format!("treatment lacks '{name}'"))?;
        let x = v
            .as_number()
            .ok_or_else(|| format!("'{name}' must be a number, got {v}"))?;
        let f = domains.iter().find(|f| f.name == name).expect("declared");
        if !f.contains(v) {
            let (lo, hi) = f.range().expect("continuous");
            return Err(format!("'{name}' = {x} outside [{lo}, {hi}]"));
        }
        Ok(x)
    };
    let priority = match t.get("limit_priority") {
        Some(FactorValue::Label(s)) => Priority::parse(s).ok_or_else(|| format!("unknown limit_priority '{s}'"))?,
        Some(v) => return Err(format!("limit_priority must be a label, got {v}")),
        None => return Err("treatment lacks 'limit_priority'".into()),
    };
    Ok(SutTreatment {
        k_arci: number("K_aRCI")?,
        priority,
        r_p: number("R_p")?,
    })
}

fn respond(message: Message, config: &SutConfig) -> Message {
    match message {
        Message::Init { .. } => Message::Ready {
            metrics: METRICS.iter().map(|m| m.to_string()).collect(),
        },
        Message::Run {
            run_id,
            seed,
            treatment,
        } => {
            let outcome =
                parse_treatment(&treatment).and_then(|t| simulate(config, &t, seed).map_err(|e| e.to_string()));
            match outcome {
                Ok(m) => Message::Result {
                    run_id,
                    status: RunStatus::Ok,
                    responses: BTreeMap::from([
                        (METRICS[0].to_string(), m.peak_speed_dev),
                        (METRICS[1].to_string(), m.voltage_nadir),
                        (METRICS[2].to_string(), m.recovery_time),
                    ]),
                    reason: if m.diverged {
                        Some("numerical divergence: not recovered".into())
                    } else if !m.recovered {
                        Some("not recovered within the simulated horizon".into())
                    } else {
                        None
                    },
                },
                Err(reason) => Message::Result {
                    run_id,
                    status: RunStatus::InvalidResponse,
                    responses: BTreeMap::new(),
                    reason: Some(reason),
                },
            }
        }
        other => Message::Error {
            reason: format!("unexpected message {}", other.to_line()),
        },
    }
}

/// Answers protocol messages until end of input. Malformed lines get an
/// `error` reply and the session continues.
pub fn serve<R: BufRead, W: Write>(input: R, mut output: W, config: &SutConfig) -> io::Result<()> {
    if let Err(e) = config.validate() {
        return Err(io::Error::new(io::ErrorKind::InvalidInput, e));
    }
    for line in input.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let reply = match Message::from_line(&line) {
            Ok(m) => respond(m, config),
            Err(e) => Message::Error {
                reason: format!("malformed message: {e}"),
            },
        };
        writeln!(output, "{}", reply.to_line())?;
        output.flush()?;
    }
    Ok(())
}
