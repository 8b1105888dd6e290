use serde::Serialize;

use crate::args::{Format, GlobalArgs};

/// A command result with a human-readable form; the JSON form is its serde
/// serialization.
pub trait Render: Serialize {
    fn text(&self) -> String;
}

pub fn emit<R: Render>(global: &GlobalArgs, report: &R) {
    match global.format {
        Format::Text => print!("{}", report.text()),
        Format::Json => println!("{}", serde_json::to_string_pretty(report).expect("serializable")),
    }
}

pub fn fmt_p(p: Option<f64>) -> String {
    match p {
        None => "-".into(),
        Some(p) if p < 1e-4 => format!("{p:.2e}"),
        Some(p) => format!("{p:.4}"),
    }
}

pub fn fmt_num(x: f64) -> String {
    if x == 0.0 {
        "0".into()
    } else if x.abs() >= 1e4 || x.abs() < 1e-3 {
        format!("{x:.4e}")
    } else {
        format!("{x:.5}")
    }
}

/// Left-aligned first column, right-aligned others.
pub fn table(header: &[&str], rows: &[Vec<String>]) -> String {
    let n = header.len();
    let mut width: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for r in rows {
        for (j, c) in r.iter().enumerate().take(n) {
            width[j] = width[j].max(c.chars().count());
        }
    }
    let line = |cells: Vec<&str>| {
        let mut s = String::from("    ");
        for (j, c) in cells.iter().enumerate() {
            if j == 0 {
                s += &format!("{c:<w$}", w = width[0]);
            } else {
                s += &format!("  {c:>w$}", w = width[j]);
            }
        }
        s.trim_end().to_string() + "\n"
    };
    let mut s = line(header.to_vec());
    for r in rows {
        s += &line(r.iter().map(String::as_str).collect());
    }
    s
}
