//! Executing run plans against external experiment processes.
//!
//! The process is started once per worker and spoken to over its standard
//! input and output, one JSON object per line:
//!
//! ```text
//! → {"type":"init","factors":[...],"metrics":["m1",...]}
//! ← {"type":"ready","metrics":["m1",...]}
//! → {"type":"run","run_id":1,"seed":123,"treatment":{"x":0.5}}
//! ← {"type":"result","run_id":1,"status":"ok","responses":{"m1":2.0}}
//! ```
//!
//! Results are appended to a CSV as runs finish, with a JSON sidecar that
//! records the plan digest (for safe resumption) and a digest of the
//! responses table.

mod execute;
mod protocol;
mod results;
mod session;

pub use execute::{execute_plan, ExecuteOptions};
pub use protocol::{Message, RunStatus};
pub use results::{format_real, sidecar_path, ResultRow, ResultSet, TOOLKIT_VERSION};
pub use session::{resolve_program, RunReply, Session};

#[derive(Debug, thiserror::Error)]
pub enum RunnerError {
    #[error("cannot start runner '{command}': {reason}")]
    SpawnFailure { command: String, reason: String },
    #[error("runner did not answer init within {0} s")]
    HandshakeTimeout(f64),
    #[error("protocol violation ({reason}) in line {line:?}")]
    ProtocolViolation { line: String, reason: String },
    #[error("results belong to plan {found}, not to the plan being run ({expected})")]
    PlanDigestMismatch { expected: String, found: String },
    #[error("corrupt results: {0}")]
    CorruptResults(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
