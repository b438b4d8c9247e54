use std::collections::BTreeMap;

use crate::ids::NodeId;
use crate::units::Millicores;

/// Per-service ordered node lists. Pods of a ruled service are placed on the
/// listed nodes in turn, wrapping around when the list is exhausted.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PlacementRules(BTreeMap<String, Vec<NodeId>>);

impl PlacementRules {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_rule(mut self, service: impl Into<String>, nodes: Vec<NodeId>) -> Self {
        self.insert(service, nodes);
        self
    }

    pub fn insert(&mut self, service: impl Into<String>, nodes: Vec<NodeId>) {
        self.0.insert(service.into(), nodes);
    }

    pub fn get(&self, service: &str) -> Option<&[NodeId]> {
        self.0.get(service).map(Vec::as_slice).filter(|r| !r.is_empty())
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &Vec<NodeId>)> {
        self.0.iter()
    }
}

/// The scheduler's view of a node: capacity and CPU already reserved by
/// hosted pods.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NodeReservation {
    pub node: NodeId,
    pub capacity: Millicores,
    pub reserved: Millicores,
}

impl NodeReservation {
    pub fn available(&self) -> Millicores {
        self.capacity - self.reserved
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Placement {
    Placed(NodeId),
    /// No suitable node right now; retry on a later tick.
    Pending,
}

#[derive(Debug, Clone, Default)]
pub struct Scheduler {
    rules: PlacementRules,
    cursors: BTreeMap<String, usize>,
}

impl Scheduler {
    pub fn new(rules: PlacementRules) -> Self {
        Self {
            rules,
            cursors: BTreeMap::new(),
        }
    }

    pub fn rules(&self) -> &PlacementRules {
        &self.rules
    }

    /// Chooses a node for a pod of `service` requesting `cpu_request` and
    /// reserves the request there.
    ///
    /// Ruled services take the next node of their rule list; the cursor only
    /// advances on success, so a full node is retried rather than skipped.
    /// Otherwise the node with the most unreserved CPU wins, the earliest node
    /// breaking ties.
    pub fn deploy_pod(
        &mut self,
        service: &str,
        cpu_request: Millicores,
        nodes: &mut [NodeReservation],
    ) -> Placement {
        let candidate = match self.rules.get(service) {
            Some(rule) => {
                let cursor = self.cursors.get(service).copied().unwrap_or(0);
                let target = rule[cursor % rule.len()];
                nodes.iter().position(|n| n.node == target)
            }
            None => nodes
                .iter()
                .enumerate()
                // max_by_key keeps the last maximum; reverse so the earliest node wins ties
                .rev()
                .max_by_key(|(_, n)| n.available())
                .map(|(i, _)| i),
        };

        match candidate {
            Some(i) if nodes[i].available() >= cpu_request => {
                nodes[i].reserved += cpu_request;
                if self.rules.get(service).is_some() {
                    *self.cursors.entry(service.to_string()).or_insert(0) += 1;
                }
                Placement::Placed(nodes[i].node)
            }
            _ => Placement::Pending,
        }
    }
}
