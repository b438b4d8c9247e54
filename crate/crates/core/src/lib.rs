//! Logical-time simulation of CPU and memory consumption in a Kubernetes
//! cluster running a microservice application.

pub mod bundled;
pub mod cluster;
pub mod control;
pub mod ids;
pub mod metrics;
pub mod model;
pub mod scenario;
pub mod traffic;
pub mod units;
