//! The JSON scenario format.
//!
//! A scenario names the node images and the worker nodes built from them,
//! every service with its replica bounds and pod settings, optional fixed
//! placement rules, the workflows, and the clients that drive them.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::control::PlacementRules;
use crate::ids::NodeId;
use crate::model::{NodeImage, PodConfig, ServiceConfig, WorkflowData, WorkflowMix};
use crate::traffic::{ClientRequest, ClientSpec};
use crate::units::Millicores;

pub const SCENARIO_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{path}: {message}")]
pub struct SchemaError {
    pub path: String,
    pub message: String,
}

impl SchemaError {
    fn new(path: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            path: path.into(),
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub format_version: u32,
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    pub duration_ticks: u64,
    pub images: Vec<NodeImage>,
    pub nodes: Vec<NodeSpec>,
    pub services: Vec<ServiceSpec>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub placement_rules: BTreeMap<String, Vec<String>>,
    pub workflows: Vec<WorkflowData>,
    pub clients: Vec<ClientEntry>,
    #[serde(default)]
    pub options: ScenarioOptions,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeSpec {
    pub id: String,
    pub image: String,
    /// Hosts pods the other nodes lack; left out of balance statistics.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub helper: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ServiceSpec {
    pub name: String,
    pub starting_pods: u32,
    pub min_pods: u32,
    pub max_pods: u32,
    #[serde(default)]
    pub autoscaler: ScalerSettings,
    pub pod: PodConfig,
}

impl ServiceSpec {
    pub fn config(&self) -> ServiceConfig {
        ServiceConfig {
            name: self.name.clone(),
            starting_pods: self.starting_pods,
            min_pods: self.min_pods,
            max_pods: self.max_pods,
            scaler_cycle: self.autoscaler.scaler_cycle,
            upscale_threshold: self.autoscaler.upscale_threshold,
            downscale_threshold: self.autoscaler.downscale_threshold,
            downscale_period: self.autoscaler.downscale_period,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScalerSettings {
    pub scaler_cycle: u64,
    pub upscale_threshold: f64,
    pub downscale_threshold: f64,
    pub downscale_period: u32,
}

impl Default for ScalerSettings {
    fn default() -> Self {
        Self {
            scaler_cycle: 15,
            upscale_threshold: 0.8,
            downscale_threshold: 0.2,
            downscale_period: 3,
        }
    }
}

fn one() -> u64 {
    1
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClientEntry {
    pub workflow: String,
    /// Requests per batch.
    pub rps: u64,
    /// Number of batches; defaults to one per `delay` until the run ends.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub batches: Option<u64>,
    #[serde(default = "one")]
    pub delay: u64,
    #[serde(default)]
    pub start: u64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LbPolicy {
    #[default]
    RoundRobin,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioOptions {
    pub autoscaler: bool,
    pub wf_mix: WorkflowMix,
    pub lb_policy: LbPolicy,
    /// Reserved for stochastic balancing policies.
    pub seed: u64,
}

impl Default for ScenarioOptions {
    fn default() -> Self {
        Self {
            autoscaler: false,
            wf_mix: WorkflowMix::Share,
            lb_policy: LbPolicy::RoundRobin,
            seed: 0,
        }
    }
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self, SchemaError> {
        let scenario: Scenario = serde_json::from_str(text).map_err(|e| {
            SchemaError::new(format!("line {} column {}", e.line(), e.column()), e.to_string())
        })?;
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    pub fn image(&self, id: &str) -> Option<&NodeImage> {
        self.images.iter().find(|i| i.id == id)
    }

    pub fn service(&self, name: &str) -> Option<&ServiceSpec> {
        self.services.iter().find(|s| s.name == name)
    }

    pub fn workflow(&self, name: &str) -> Option<&WorkflowData> {
        self.workflows.iter().find(|w| w.name == name)
    }

    pub fn node_index(&self, id: &str) -> Option<NodeId> {
        self.nodes.iter().position(|n| n.id == id).map(NodeId)
    }

    /// The image each node is built from, in node order.
    pub fn node_images(&self) -> impl Iterator<Item = (&NodeSpec, &NodeImage)> {
        self.nodes.iter().filter_map(|n| self.image(&n.image).map(|i| (n, i)))
    }

    /// Nodes flagged as helpers.
    pub fn helper_nodes(&self) -> Vec<String> {
        self.nodes.iter().filter(|n| n.helper).map(|n| n.id.clone()).collect()
    }

    pub fn placement_rules(&self) -> PlacementRules {
        let mut rules = PlacementRules::new();
        for (service, nodes) in &self.placement_rules {
            rules.insert(
                service.clone(),
                nodes.iter().filter_map(|n| self.node_index(n)).collect(),
            );
        }
        rules
    }

    pub fn client_specs(&self) -> Vec<ClientSpec> {
        self.clients
            .iter()
            .filter_map(|c| {
                let workflow = self.workflow(&c.workflow)?.clone();
                let batches = c.batches.unwrap_or_else(|| {
                    self.duration_ticks.saturating_sub(c.start).div_ceil(c.delay)
                });
                Some(ClientSpec {
                    request: ClientRequest { workflow, rps: c.rps },
                    num_batches: batches,
                    delay: c.delay,
                    start: c.start,
                })
            })
            .collect()
    }

    /// Pods each service receives from node images.
    pub fn image_pod_counts(&self) -> BTreeMap<&str, u32> {
        let mut counts = BTreeMap::new();
        for (_, image) in self.node_images() {
            for (service, &n) in &image.pods {
                *counts.entry(service.as_str()).or_default() += n;
            }
        }
        counts
    }

    /// Checks every cross-reference and invariant.
    pub fn validate(&self) -> Result<(), SchemaError> {
        if self.format_version != SCENARIO_FORMAT_VERSION {
            return Err(SchemaError::new(
                "format_version",
                format!("unsupported version {} (expected {SCENARIO_FORMAT_VERSION})", self.format_version),
            ));
        }
        if self.duration_ticks == 0 {
            return Err(SchemaError::new("duration_ticks", "must be positive"));
        }

        let mut image_ids = BTreeSet::new();
        for (i, image) in self.images.iter().enumerate() {
            let path = format!("images[{i}]");
            if !image_ids.insert(image.id.as_str()) {
                return Err(SchemaError::new(path, format!("duplicate image id `{}`", image.id)));
            }
            image.validate().map_err(|e| SchemaError::new(&path, e.to_string()))?;
            for service in image.pods.keys() {
                if self.service(service).is_none() {
                    return Err(SchemaError::new(
                        format!("{path}.pods.{service}"),
                        "service is not declared in `services`",
                    ));
                }
            }
            let reserved: Millicores = image
                .pods
                .iter()
                .filter_map(|(s, &n)| {
                    self.service(s)
                        .map(|spec| Millicores::from_micros(spec.pod.cpu_request.micros() * i64::from(n)))
                })
                .sum();
            if reserved > image.cpu_capacity {
                return Err(SchemaError::new(
                    path,
                    format!("pods reserve {reserved} millicores, above capacity {}", image.cpu_capacity),
                ));
            }
        }

        if self.nodes.is_empty() {
            return Err(SchemaError::new("nodes", "at least one node is required"));
        }
        if self.nodes.iter().all(|n| n.helper) {
            return Err(SchemaError::new("nodes", "every node is a helper"));
        }
        let mut node_ids = BTreeSet::new();
        for (i, node) in self.nodes.iter().enumerate() {
            if !node_ids.insert(node.id.as_str()) {
                return Err(SchemaError::new(format!("nodes[{i}].id"), format!("duplicate node id `{}`", node.id)));
            }
            if self.image(&node.image).is_none() {
                return Err(SchemaError::new(
                    format!("nodes[{i}].image"),
                    format!("unknown image `{}`", node.image),
                ));
            }
        }

        let image_pods = self.image_pod_counts();
        let mut service_names = BTreeSet::new();
        for (i, spec) in self.services.iter().enumerate() {
            let path = format!("services[{i}]");
            if !service_names.insert(spec.name.as_str()) {
                return Err(SchemaError::new(path, format!("duplicate service `{}`", spec.name)));
            }
            spec.config().validate().map_err(|e| SchemaError::new(&path, e.to_string()))?;
            spec.pod
                .validate(&spec.name)
                .map_err(|e| SchemaError::new(format!("{path}.pod"), e.to_string()))?;
            let from_images = image_pods.get(spec.name.as_str()).copied().unwrap_or(0);
            if from_images > spec.starting_pods {
                return Err(SchemaError::new(
                    format!("{path}.starting_pods"),
                    format!("node images already provide {from_images} pods"),
                ));
            }
        }

        for (service, nodes) in &self.placement_rules {
            let path = format!("placement_rules.{service}");
            if self.service(service).is_none() {
                return Err(SchemaError::new(path, "unknown service"));
            }
            for n in nodes {
                if self.node_index(n).is_none() {
                    return Err(SchemaError::new(&path, format!("unknown node `{n}`")));
                }
            }
        }

        let mut wf_names = BTreeSet::new();
        for (i, wf) in self.workflows.iter().enumerate() {
            let path = format!("workflows[{i}]");
            if !wf_names.insert(wf.name.as_str()) {
                return Err(SchemaError::new(path, format!("duplicate workflow `{}`", wf.name)));
            }
            wf.validate().map_err(|e| SchemaError::new(&path, e.to_string()))?;
            for s in &wf.services {
                if self.service(s).is_none() {
                    return Err(SchemaError::new(format!("{path}.services"), format!("unknown service `{s}`")));
                }
            }
        }

        for (i, client) in self.clients.iter().enumerate() {
            let path = format!("clients[{i}]");
            if self.workflow(&client.workflow).is_none() {
                return Err(SchemaError::new(
                    format!("{path}.workflow"),
                    format!("unknown workflow `{}`", client.workflow),
                ));
            }
            if client.rps == 0 {
                return Err(SchemaError::new(format!("{path}.rps"), "must be positive"));
            }
            if client.delay == 0 {
                return Err(SchemaError::new(format!("{path}.delay"), "must be positive"));
            }
        }
        Ok(())
    }
}

/// Reads and validates a scenario file.
pub fn parse_scenario(path: &Path) -> Result<Scenario, SchemaError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| SchemaError::new(path.display().to_string(), e.to_string()))?;
    Scenario::from_json(&text)
}
