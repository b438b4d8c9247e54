//! Calibrated cost tables and the interpolation that turns them into
//! per-service consumption.
//!
//! A table maps `(node image, workflow, RPS knot)` to the millicores (and
//! optionally megabytes) each service consumed when a node of that image
//! handled that many requests per second of the workflow. Queries between
//! knots interpolate linearly; below the first knot the curve runs through the
//! origin; above the last knot the last segment is extended.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CostError {
    #[error("no cost table entries for node image `{0}`")]
    UnknownImage(String),
    #[error("node image `{image}` has no entries for workflow `{workflow}`")]
    UnknownWorkflow { image: String, workflow: String },
    #[error("service `{service}` missing from ({image}, {workflow}) at {rps} RPS")]
    UnknownService {
        image: String,
        workflow: String,
        service: String,
        rps: u32,
    },
    #[error("invalid RPS query {0}")]
    InvalidRps(String),
}

/// Which resource column of the table to read.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Resource {
    Cpu,
    Memory,
}

/// Cost of one service at one knot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ServiceCost {
    pub service: String,
    pub cpu_millicores: f64,
    /// Absent memory costs read as 0 MB.
    pub memory_mb: Option<f64>,
}

impl ServiceCost {
    pub fn cpu(service: impl Into<String>, cpu_millicores: f64) -> Self {
        Self {
            service: service.into(),
            cpu_millicores,
            memory_mb: None,
        }
    }

    fn value(&self, resource: Resource) -> f64 {
        match resource {
            Resource::Cpu => self.cpu_millicores,
            Resource::Memory => self.memory_mb.unwrap_or(0.0),
        }
    }
}

/// All service costs sampled at one RPS level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Knot {
    pub rps: u32,
    pub services: Vec<ServiceCost>,
}

impl Knot {
    pub fn new(rps: u32, services: impl IntoIterator<Item = ServiceCost>) -> Self {
        Self {
            rps,
            services: services.into_iter().collect(),
        }
    }

    pub fn get(&self, service: &str) -> Option<&ServiceCost> {
        self.services.iter().find(|c| c.service == service)
    }
}

/// Curve key: `(node image, workflow)`.
pub type CurveKey = (String, String);

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CostTable {
    curves: BTreeMap<CurveKey, Vec<Knot>>,
}

/// Where a query landed relative to the sampled knots.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Region {
    AtKnot,
    Between,
    BelowFirst,
    AboveLast,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lookup {
    pub value: f64,
    pub region: Region,
}

impl CostTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends a knot to the `(image, workflow)` curve without any checks;
    /// run [`validate_cost_table`] afterwards.
    pub fn push_knot(&mut self, image: &str, workflow: &str, knot: Knot) {
        self.curves
            .entry((image.to_string(), workflow.to_string()))
            .or_default()
            .push(knot);
    }

    /// Builder form of [`push_knot`](Self::push_knot) for CPU-only knots.
    pub fn with_knot<S: Into<String>>(
        mut self,
        image: &str,
        workflow: &str,
        rps: u32,
        costs: impl IntoIterator<Item = (S, f64)>,
    ) -> Self {
        let services = costs
            .into_iter()
            .map(|(s, c)| ServiceCost::cpu(s, c))
            .collect::<Vec<_>>();
        self.push_knot(image, workflow, Knot::new(rps, services));
        self
    }

    pub fn curves(&self) -> impl Iterator<Item = (&CurveKey, &[Knot])> {
        self.curves.iter().map(|(k, v)| (k, v.as_slice()))
    }

    pub fn curve(&self, image: &str, workflow: &str) -> Result<&[Knot], CostError> {
        if let Some(knots) = self.curves.get(&(image.to_string(), workflow.to_string())) {
            return Ok(knots);
        }
        if self.curves.keys().any(|(i, _)| i == image) {
            Err(CostError::UnknownWorkflow {
                image: image.to_string(),
                workflow: workflow.to_string(),
            })
        } else {
            Err(CostError::UnknownImage(image.to_string()))
        }
    }

    pub fn contains(&self, image: &str, workflow: &str) -> bool {
        self.curve(image, workflow).is_ok()
    }

    pub fn images(&self) -> BTreeSet<&str> {
        self.curves.keys().map(|(i, _)| i.as_str()).collect()
    }

    /// Highest sampled RPS for the curve, if present.
    pub fn max_knot(&self, image: &str, workflow: &str) -> Option<u32> {
        self.curve(image, workflow)
            .ok()
            .and_then(|k| k.iter().map(|k| k.rps).max())
    }

    /// Services costed on the curve (taken from its first knot).
    pub fn services(&self, image: &str, workflow: &str) -> Result<BTreeSet<&str>, CostError> {
        Ok(self
            .curve(image, workflow)?
            .first()
            .map(|k| k.services.iter().map(|c| c.service.as_str()).collect())
            .unwrap_or_default())
    }

    pub fn has_memory_costs(&self) -> bool {
        self.curves
            .values()
            .flatten()
            .flat_map(|k| &k.services)
            .any(|c| c.memory_mb.is_some())
    }

    /// Interpolated cost with the region the query fell into.
    pub fn lookup(
        &self,
        image: &str,
        workflow: &str,
        service: &str,
        rps: f64,
        resource: Resource,
    ) -> Result<Lookup, CostError> {
        if !rps.is_finite() || rps < 0.0 {
            return Err(CostError::InvalidRps(rps.to_string()));
        }
        let knots = self.curve(image, workflow)?;
        let value_at = |knot: &Knot| {
            knot.get(service)
                .map(|c| c.value(resource))
                .ok_or_else(|| CostError::UnknownService {
                    image: image.to_string(),
                    workflow: workflow.to_string(),
                    service: service.to_string(),
                    rps: knot.rps,
                })
        };
        let Some(first) = knots.first() else {
            return Err(CostError::UnknownWorkflow {
                image: image.to_string(),
                workflow: workflow.to_string(),
            });
        };

        let idx = knots.partition_point(|k| f64::from(k.rps) < rps);
        if let Some(knot) = knots.get(idx).filter(|k| f64::from(k.rps) == rps) {
            return Ok(Lookup {
                value: value_at(knot)?,
                region: Region::AtKnot,
            });
        }

        if idx == 0 {
            let v = value_at(first)?;
            return Ok(Lookup {
                value: origin_line(first.rps, v, rps),
                region: Region::BelowFirst,
            });
        }

        if idx == knots.len() {
            let last = &knots[knots.len() - 1];
            let v_last = value_at(last)?;
            let value = if knots.len() == 1 {
                origin_line(last.rps, v_last, rps)
            } else {
                let prev = &knots[knots.len() - 2];
                let v_prev = value_at(prev)?;
                let slope = (v_last - v_prev) / f64::from(last.rps - prev.rps);
                (v_last + slope * (rps - f64::from(last.rps))).max(0.0)
            };
            return Ok(Lookup {
                value,
                region: Region::AboveLast,
            });
        }

        let (lo, hi) = (&knots[idx - 1], &knots[idx]);
        let (v_lo, v_hi) = (value_at(lo)?, value_at(hi)?);
        let t = (rps - f64::from(lo.rps)) / f64::from(hi.rps - lo.rps);
        let value = (v_lo + t * (v_hi - v_lo)).clamp(v_lo.min(v_hi), v_lo.max(v_hi));
        Ok(Lookup {
            value,
            region: Region::Between,
        })
    }
}

fn origin_line(knot_rps: u32, value: f64, rps: f64) -> f64 {
    if knot_rps == 0 {
        value
    } else {
        value * rps / f64::from(knot_rps)
    }
}

/// Interpolated CPU cost (millicores) of `service` on `image` when the node
/// handles `rps` requests per second of `workflow`.
pub fn interpolate_cost(
    table: &CostTable,
    image: &str,
    workflow: &str,
    service: &str,
    rps: f64,
) -> Result<f64, CostError> {
    table
        .lookup(image, workflow, service, rps, Resource::Cpu)
        .map(|l| l.value)
}

/// How per-workflow costs are combined when one service serves several
/// workflows at once.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WorkflowMix {
    /// Each workflow's curve is read at the service's total RPS and weighted
    /// by that workflow's share of the traffic.
    #[default]
    Share,
    /// Each workflow's curve is read at its own RPS and the costs are summed.
    Additive,
}

impl fmt::Display for WorkflowMix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WorkflowMix::Share => "share",
            WorkflowMix::Additive => "additive",
        })
    }
}

impl std::str::FromStr for WorkflowMix {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "share" => Ok(Self::Share),
            "additive" => Ok(Self::Additive),
            other => Err(format!("unknown workflow mix `{other}` (expected share|additive)")),
        }
    }
}

/// Service name to (workflow name to RPS).
pub type ServiceWorkflowRps = BTreeMap<String, BTreeMap<String, u64>>;

/// Per-service CPU cost (millicores) for a node of `image` receiving the given
/// per-workflow RPS. Services whose total RPS is zero are omitted.
pub fn build_service_consumption(
    table: &CostTable,
    image: &str,
    rps: &ServiceWorkflowRps,
    mix: WorkflowMix,
) -> Result<BTreeMap<String, f64>, CostError> {
    build_consumption(table, image, rps, mix, Resource::Cpu)
}

/// Memory counterpart of [`build_service_consumption`] (megabytes).
pub fn build_service_memory(
    table: &CostTable,
    image: &str,
    rps: &ServiceWorkflowRps,
    mix: WorkflowMix,
) -> Result<BTreeMap<String, f64>, CostError> {
    build_consumption(table, image, rps, mix, Resource::Memory)
}

fn build_consumption(
    table: &CostTable,
    image: &str,
    rps: &ServiceWorkflowRps,
    mix: WorkflowMix,
    resource: Resource,
) -> Result<BTreeMap<String, f64>, CostError> {
    let mut out = BTreeMap::new();
    for (service, per_wf) in rps {
        let total: u64 = per_wf.values().sum();
        if total == 0 {
            continue;
        }
        let mut cost = 0.0;
        for (workflow, &r) in per_wf {
            if r == 0 {
                continue;
            }
            cost += match mix {
                WorkflowMix::Share => {
                    let share = r as f64 / total as f64;
                    let at_total = table.lookup(image, workflow, service, total as f64, resource)?;
                    share * at_total.value
                }
                WorkflowMix::Additive => {
                    table.lookup(image, workflow, service, r as f64, resource)?.value
                }
            };
        }
        out.insert(service.clone(), cost);
    }
    Ok(out)
}

/// A structural problem found in a cost table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Violation {
    EmptyCurve {
        image: String,
        workflow: String,
    },
    DuplicateKnot {
        image: String,
        workflow: String,
        rps: u32,
    },
    UnsortedKnots {
        image: String,
        workflow: String,
        previous: u32,
        next: u32,
    },
    DuplicateService {
        image: String,
        workflow: String,
        rps: u32,
        service: String,
    },
    NegativeCost {
        image: String,
        workflow: String,
        rps: u32,
        service: String,
        value: f64,
    },
    NonFiniteCost {
        image: String,
        workflow: String,
        rps: u32,
        service: String,
    },
    ServiceSetMismatch {
        image: String,
        workflow: String,
        rps: u32,
        expected: Vec<String>,
        found: Vec<String>,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::EmptyCurve { image, workflow } => {
                write!(f, "({image}, {workflow}): no knots")
            }
            Violation::DuplicateKnot { image, workflow, rps } => {
                write!(f, "({image}, {workflow}): knot {rps} appears more than once")
            }
            Violation::UnsortedKnots {
                image,
                workflow,
                previous,
                next,
            } => write!(f, "({image}, {workflow}): knot {next} follows {previous}"),
            Violation::DuplicateService {
                image,
                workflow,
                rps,
                service,
            } => write!(f, "({image}, {workflow}, {rps}): service {service} listed twice"),
            Violation::NegativeCost {
                image,
                workflow,
                rps,
                service,
                value,
            } => write!(f, "({image}, {workflow}, {rps}): {service} has negative cost {value}"),
            Violation::NonFiniteCost {
                image,
                workflow,
                rps,
                service,
            } => write!(f, "({image}, {workflow}, {rps}): {service} has a non-finite cost"),
            Violation::ServiceSetMismatch {
                image,
                workflow,
                rps,
                expected,
                found,
            } => write!(
                f,
                "({image}, {workflow}, {rps}): services {found:?} differ from first knot {expected:?}"
            ),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Lists every structural violation in `table`; an empty report means the
/// table is well-formed.
pub fn validate_cost_table(table: &CostTable) -> ValidationReport {
    let mut violations = Vec::new();
    for ((image, workflow), knots) in &table.curves {
        let (image, workflow) = (image.clone(), workflow.clone());
        if knots.is_empty() {
            violations.push(Violation::EmptyCurve { image, workflow });
            continue;
        }
        let mut seen = BTreeSet::new();
        for (i, knot) in knots.iter().enumerate() {
            if !seen.insert(knot.rps) {
                violations.push(Violation::DuplicateKnot {
                    image: image.clone(),
                    workflow: workflow.clone(),
                    rps: knot.rps,
                });
            } else if i > 0 && knot.rps < knots[i - 1].rps {
                violations.push(Violation::UnsortedKnots {
                    image: image.clone(),
                    workflow: workflow.clone(),
                    previous: knots[i - 1].rps,
                    next: knot.rps,
                });
            }

            let mut names = BTreeSet::new();
            for cost in &knot.services {
                if !names.insert(cost.service.as_str()) {
                    violations.push(Violation::DuplicateService {
                        image: image.clone(),
                        workflow: workflow.clone(),
                        rps: knot.rps,
                        service: cost.service.clone(),
                    });
                }
                let values = std::iter::once(cost.cpu_millicores).chain(cost.memory_mb);
                for value in values {
                    if !value.is_finite() {
                        violations.push(Violation::NonFiniteCost {
                            image: image.clone(),
                            workflow: workflow.clone(),
                            rps: knot.rps,
                            service: cost.service.clone(),
                        });
                    } else if value < 0.0 {
                        violations.push(Violation::NegativeCost {
                            image: image.clone(),
                            workflow: workflow.clone(),
                            rps: knot.rps,
                            service: cost.service.clone(),
                            value,
                        });
                    }
                }
            }
        }

        let service_set = |k: &Knot| {
            k.services
                .iter()
                .map(|c| c.service.clone())
                .collect::<BTreeSet<_>>()
                .into_iter()
                .collect::<Vec<_>>()
        };
        let expected = service_set(&knots[0]);
        for knot in &knots[1..] {
            let found = service_set(knot);
            if found != expected {
                violations.push(Violation::ServiceSetMismatch {
                    image: image.clone(),
                    workflow: workflow.clone(),
                    rps: knot.rps,
                    expected: expected.clone(),
                    found,
                });
            }
        }
    }
    ValidationReport { violations }
}
