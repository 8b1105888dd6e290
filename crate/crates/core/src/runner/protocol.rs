//! Newline-delimited JSON messages exchanged with experiment processes.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::spec::{Factor, Treatment};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Ok,
    RunnerError,
    Timeout,
    InvalidResponse,
}

impl RunStatus {
    pub fn name(self) -> &'static str {
        match self {
            RunStatus::Ok => "ok",
            RunStatus::RunnerError => "runner_error",
            RunStatus::Timeout => "timeout",
            RunStatus::InvalidResponse => "invalid_response",
        }
    }

    pub fn parse(s: &str) -> Option<RunStatus> {
        [
            RunStatus::Ok,
            RunStatus::RunnerError,
            RunStatus::Timeout,
            RunStatus::InvalidResponse,
        ]
        .into_iter()
        .find(|st| st.name() == s)
    }
}

impl fmt::Display for RunStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum Message {
    Init {
        factors: Vec<Factor>,
        metrics: Vec<String>,
    },
    Ready {
        metrics: Vec<String>,
    },
    Run {
        run_id: u64,
        seed: u64,
        treatment: Treatment,
    },
    Result {
        run_id: u64,
        status: RunStatus,
        #[serde(default)]
        responses: BTreeMap<String, f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        reason: Option<String>,
    },
    /// A message the process could not act on (malformed or out of turn).
    Error {
        reason: String,
    },
}

impl Message {
    /// One protocol line, without the trailing newline.
    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("messages serialize")
    }

    pub fn from_line(line: &str) -> Result<Message, serde_json::Error> {
        serde_json::from_str(line.trim_end_matches(['\r', '\n']))
    }
}
