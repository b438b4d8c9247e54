//! Logical-time cluster simulation: nodes, pods and the tick loop.
//!
//! One time unit is one second of modeled time, so RPS values and
//! millicores-per-unit share a timescale.

mod convert;
mod engine;
mod node;
mod pod;

pub use convert::{aggregate_queue, node_convert_rps, ConvertError};
pub use engine::{Backlog, Event, EventKind, RunOutput, Simulation, WorkLedger};
pub use node::{CpuGrant, MemTicket, MemoryGrant, NodeError, NodeState};
pub use pod::{ActiveRequest, PodRequest, PodState};
