//! Static domain vocabulary and the calibrated cost model.

mod config;
mod cost_table;

pub use config::{ConfigError, NodeImage, PodConfig, ServiceConfig, WorkflowData};
pub use cost_table::{
    build_service_consumption, build_service_memory, interpolate_cost, validate_cost_table,
    CostError, CostTable, CurveKey, Knot, Lookup, Region, Resource, ServiceCost,
    ServiceWorkflowRps, ValidationReport, Violation, WorkflowMix,
};
