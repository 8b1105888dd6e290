//! Bundled example system under test: a fault ride-through scenario with a
//! synchronous machine and a converter-interfaced wind plant, reachable
//! in-process or over the runner protocol.

mod model;
mod serve;

pub use model::{simulate, simulate_trace, Priority, SutConfig, SutError, SutMetrics, SutTreatment, Trace};
pub use serve::{declared_factors, describe, parse_treatment, serve, METRICS};
