use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::units::{Megabytes, Millicores};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConfigError {
    #[error("workflow `{0}` activates no services")]
    EmptyWorkflow(String),
    #[error("workflow `{workflow}` lists service `{service}` more than once")]
    DuplicateService { workflow: String, service: String },
    #[error("node image `{image}`: {reason}")]
    InvalidImage { image: String, reason: String },
    #[error("pod config for `{service}`: {reason}")]
    InvalidPod { service: String, reason: String },
    #[error("service `{service}`: {reason}")]
    InvalidService { service: String, reason: String },
}

/// A named user-facing action and the services it activates.
///
/// Services of a workflow are activated in parallel; list order carries no
/// execution meaning.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WorkflowData {
    pub name: String,
    pub services: Vec<String>,
}

impl WorkflowData {
    pub fn new(
        name: impl Into<String>,
        services: impl IntoIterator<Item = impl Into<String>>,
    ) -> Result<Self, ConfigError> {
        let wf = Self {
            name: name.into(),
            services: services.into_iter().map(Into::into).collect(),
        };
        wf.validate()?;
        Ok(wf)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.services.is_empty() {
            return Err(ConfigError::EmptyWorkflow(self.name.clone()));
        }
        let mut seen = BTreeSet::new();
        for s in &self.services {
            if !seen.insert(s.as_str()) {
                return Err(ConfigError::DuplicateService {
                    workflow: self.name.clone(),
                    service: s.clone(),
                });
            }
        }
        Ok(())
    }
}

/// A fixed node configuration: capacities plus the pod composition the cost
/// table was calibrated for.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeImage {
    pub id: String,
    /// Millicores available per time unit.
    pub cpu_capacity: Millicores,
    pub mem_capacity: Megabytes,
    /// Service name to pod count.
    pub pods: BTreeMap<String, u32>,
    /// Image key to look up in the cost table; defaults to `id`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cost_table: Option<String>,
}

impl NodeImage {
    pub fn cost_key(&self) -> &str {
        self.cost_table.as_deref().unwrap_or(&self.id)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let fail = |reason: &str| ConfigError::InvalidImage {
            image: self.id.clone(),
            reason: reason.to_string(),
        };
        if self.cpu_capacity <= Millicores::ZERO {
            return Err(fail("cpu_capacity must be positive"));
        }
        if self.mem_capacity <= Megabytes::ZERO {
            return Err(fail("mem_capacity must be positive"));
        }
        if self.pods.values().all(|&n| n == 0) {
            return Err(fail("pod set is empty"));
        }
        Ok(())
    }
}

/// Per-pod resource settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PodConfig {
    /// Ticks between refreshes of the pod's CPU allowance.
    pub monitor_cycle: u64,
    /// Ticks a memory allocation may stay pending before the pod is
    /// rescheduled. Zero never reschedules.
    pub memory_cooldown: u64,
    /// Millicores reserved on the host by the scheduler.
    pub cpu_request: Millicores,
    /// Millicores the pod may consume per monitor cycle.
    pub cpu_limit: Millicores,
    /// Number of consumption steps per request.
    pub cost_granularity: u32,
}

impl PodConfig {
    pub fn validate(&self, service: &str) -> Result<(), ConfigError> {
        let fail = |reason: &str| ConfigError::InvalidPod {
            service: service.to_string(),
            reason: reason.to_string(),
        };
        if self.cpu_request <= Millicores::ZERO {
            return Err(fail("cpu_request must be positive"));
        }
        if self.cpu_request > self.cpu_limit {
            return Err(fail("cpu_request exceeds cpu_limit"));
        }
        if self.cost_granularity == 0 {
            return Err(fail("cost_granularity must be at least 1"));
        }
        if self.monitor_cycle == 0 {
            return Err(fail("monitor_cycle must be positive"));
        }
        Ok(())
    }
}

/// Replica bounds and autoscaler settings for one service.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ServiceConfig {
    pub name: String,
    pub starting_pods: u32,
    pub min_pods: u32,
    pub max_pods: u32,
    /// Ticks between autoscaler evaluations.
    pub scaler_cycle: u64,
    pub upscale_threshold: f64,
    pub downscale_threshold: f64,
    /// Consecutive low-utilization cycles required before scaling down.
    pub downscale_period: u32,
}

impl ServiceConfig {
    /// A fixed-size service: the autoscaler can never change its pod count.
    pub fn fixed(name: impl Into<String>, pods: u32) -> Self {
        Self {
            name: name.into(),
            starting_pods: pods,
            min_pods: pods,
            max_pods: pods,
            scaler_cycle: 15,
            upscale_threshold: 0.8,
            downscale_threshold: 0.2,
            downscale_period: 3,
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let fail = |reason: &str| ConfigError::InvalidService {
            service: self.name.clone(),
            reason: reason.to_string(),
        };
        if !(self.min_pods <= self.starting_pods && self.starting_pods <= self.max_pods) {
            return Err(fail("requires min_pods <= starting_pods <= max_pods"));
        }
        let unit = 0.0..=1.0;
        if !unit.contains(&self.upscale_threshold) || !unit.contains(&self.downscale_threshold) {
            return Err(fail("thresholds must lie in [0, 1]"));
        }
        if self.downscale_threshold >= self.upscale_threshold {
            return Err(fail("downscale_threshold must be below upscale_threshold"));
        }
        if self.scaler_cycle == 0 {
            return Err(fail("scaler_cycle must be positive"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pod() -> PodConfig {
        PodConfig {
            monitor_cycle: 1,
            memory_cooldown: 5,
            cpu_request: Millicores::from_whole(100),
            cpu_limit: Millicores::from_whole(1000),
            cost_granularity: 10,
        }
    }

    #[test]
    fn workflow_rejects_empty_and_duplicates() {
        assert!(WorkflowData::new("wf", Vec::<String>::new()).is_err());
        assert!(matches!(
            WorkflowData::new("wf", ["a", "b", "a"]),
            Err(ConfigError::DuplicateService { .. })
        ));
        // WF1 "view homepage" activates six services
        let wf1 = WorkflowData::new(
            "workflow1",
            ["frontend", "currencyservice", "adservice", "cartservice", "productcatalogservice", "redis-cart"],
        )
        .unwrap();
        assert_eq!(wf1.services.len(), 6);
    }

    #[test]
    fn pod_config_bounds() {
        assert!(pod().validate("s").is_ok());
        let mut p = pod();
        p.cpu_request = Millicores::from_whole(2000);
        assert!(p.validate("s").is_err());
        let mut p = pod();
        p.cost_granularity = 0;
        assert!(p.validate("s").is_err());
        let mut p = pod();
        p.monitor_cycle = 0;
        assert!(p.validate("s").is_err());
    }

    #[test]
    fn service_config_bounds() {
        assert!(ServiceConfig::fixed("s", 2).validate().is_ok());
        let mut s = ServiceConfig::fixed("s", 2);
        s.min_pods = 3;
        assert!(s.validate().is_err());
        let mut s = ServiceConfig::fixed("s", 2);
        s.downscale_threshold = 0.9;
        assert!(s.validate().is_err());
    }
}
