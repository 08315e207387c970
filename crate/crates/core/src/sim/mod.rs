//! Deterministic simulation harness: trace I/O, scenario generation,
//! channel models, the discrete-event driver and reporting.

pub mod channel;
pub mod config;
pub mod engine;
pub mod report;
pub mod scenario;
pub mod trace;

pub use channel::{simulate_channel, ChannelModel, ChannelModels, ChannelOutcome};
pub use config::{Outage, SimConfig, StageLatencies};
pub use engine::{run, AlertRecord, RunLogs, RunOutput, StageTimings};
pub use report::{render_report, report, LatencySummary, RunMetrics};
pub use scenario::{generate_scenario, ScenarioKind};
pub use trace::{load_trace, parse_trace, write_trace, TraceFile};
