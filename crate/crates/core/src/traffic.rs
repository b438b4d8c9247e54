//! Clients, and the master load balancer that fans workflow batches out into
//! per-node service requests.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ids::NodeId;
use crate::model::WorkflowData;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TrafficError {
    #[error("service `{service}` of workflow `{workflow}` has no running pods")]
    UnroutableService { workflow: String, service: String },
}

/// A batch of `rps` requests for one workflow.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClientRequest {
    pub workflow: WorkflowData,
    pub rps: u64,
}

/// A client firing `num_batches` identical batches, one every `delay` ticks,
/// starting at `start`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClientSpec {
    pub request: ClientRequest,
    pub num_batches: u64,
    pub delay: u64,
    pub start: u64,
}

impl ClientSpec {
    /// Whether a batch is due exactly at `now`.
    pub fn emits_at(&self, now: u64) -> bool {
        if now < self.start || self.delay == 0 {
            return false;
        }
        let offset = now - self.start;
        offset.is_multiple_of(self.delay) && offset / self.delay < self.num_batches
    }
}

pub fn client_emit_schedule(spec: &ClientSpec) -> Vec<(u64, ClientRequest)> {
    (0..spec.num_batches)
        .map(|k| (spec.start + k * spec.delay, spec.request.clone()))
        .collect()
}

/// A node's share of one service's traffic for one workflow.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct NodeRequest {
    pub service: String,
    pub workflow: String,
    pub rps: u64,
}

/// Splits `total` into `n` integer quotas differing by at most one; the first
/// `total % n` positions get the larger share.
///
/// # Panics
///
/// If `n == 0`.
pub fn split_round_robin(total: u64, n: usize) -> Vec<u64> {
    assert!(n > 0, "cannot split among zero targets");
    let n64 = n as u64;
    let (base, extra) = (total / n64, total % n64);
    (0..n64).map(|i| base + u64::from(i < extra)).collect()
}

/// Strategy for dividing a batch among a service's pods.
///
/// Only round-robin ships; other policies (seeded random, hashing) plug in here.
pub trait SplitPolicy {
    fn split(&self, total: u64, slots: usize) -> Vec<u64>;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct RoundRobin;

impl SplitPolicy for RoundRobin {
    fn split(&self, total: u64, slots: usize) -> Vec<u64> {
        split_round_robin(total, slots)
    }
}

/// Service name to (node to running pod count).
pub type PodPlacement = BTreeMap<String, BTreeMap<NodeId, u32>>;

/// Orders a service's pods for round-robin: the first pod of every node in
/// node order, then the second pod of every node, and so on.
fn pod_slots(per_node: &BTreeMap<NodeId, u32>) -> Vec<NodeId> {
    let depth = per_node.values().copied().max().unwrap_or(0);
    (0..depth)
        .flat_map(|rank| {
            per_node
                .iter()
                .filter(move |(_, &count)| count > rank)
                .map(|(&node, _)| node)
        })
        .collect()
}

pub fn balance_client_request(
    request: &ClientRequest,
    placement: &PodPlacement,
) -> Result<Vec<(NodeId, NodeRequest)>, TrafficError> {
    balance_with(&RoundRobin, request, placement)
}

/// Splits the batch among each workflow service's pods and emits one
/// [`NodeRequest`] per (service, node) carrying the node's summed quota.
pub fn balance_with(
    policy: &dyn SplitPolicy,
    request: &ClientRequest,
    placement: &PodPlacement,
) -> Result<Vec<(NodeId, NodeRequest)>, TrafficError> {
    let wf = &request.workflow;
    let mut out = Vec::new();
    for service in &wf.services {
        let slots = placement.get(service).map(pod_slots).unwrap_or_default();
        if slots.is_empty() {
            return Err(TrafficError::UnroutableService {
                workflow: wf.name.clone(),
                service: service.clone(),
            });
        }
        let quotas = policy.split(request.rps, slots.len());
        let mut per_node: BTreeMap<NodeId, u64> = BTreeMap::new();
        for (node, quota) in slots.into_iter().zip(quotas) {
            *per_node.entry(node).or_default() += quota;
        }
        out.extend(per_node.into_iter().map(|(node, rps)| {
            (
                node,
                NodeRequest {
                    service: service.clone(),
                    workflow: wf.name.clone(),
                    rps,
                },
            )
        }));
    }
    Ok(out)
}
