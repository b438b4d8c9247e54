use std::collections::{BTreeMap, BTreeSet};
use std::ops::Range;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cluster::{Backlog, Event, Simulation, WorkLedger};
use crate::metrics::{aggregate, balance_stats, trimmed_window, BalanceStats, ConsumptionSeries, GroupBy, WindowAverage};
use crate::model::CostTable;

use super::Scenario;

/// One `(image, workflow)` pair, or one service of it, the cost table lacks.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Gap {
    pub image: String,
    pub workflow: String,
    /// `None` when the whole curve is missing.
    pub service: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("cost table does not cover: {}", fmt_gaps(.0))]
pub struct CoverageError(pub Vec<Gap>);

fn fmt_gaps(gaps: &[Gap]) -> String {
    gaps.iter()
        .map(|g| match &g.service {
            Some(s) => format!("({}, {}, {s})", g.image, g.workflow),
            None => format!("({}, {})", g.image, g.workflow),
        })
        .collect::<Vec<_>>()
        .join(", ")
}

/// Every cost curve the scenario can touch: each node image crossed with each
/// workflow some client drives. Pods can land on any node, so every pair is
/// needed, and each curve must list every service of its workflow.
pub fn check_coverage(scenario: &Scenario, table: &CostTable) -> Result<(), CoverageError> {
    let images: BTreeSet<&str> = scenario.node_images().map(|(_, i)| i.cost_key()).collect();
    let workflows: BTreeSet<&str> = scenario.clients.iter().map(|c| c.workflow.as_str()).collect();
    let mut gaps = Vec::new();
    for image in &images {
        for wf in &workflows {
            let Ok(services) = table.services(image, wf) else {
                gaps.push(Gap {
                    image: image.to_string(),
                    workflow: wf.to_string(),
                    service: None,
                });
                continue;
            };
            let wanted = scenario.workflow(wf).map(|w| w.services.as_slice()).unwrap_or_default();
            for s in wanted {
                if !services.contains(s.as_str()) {
                    gaps.push(Gap {
                        image: image.to_string(),
                        workflow: wf.to_string(),
                        service: Some(s.clone()),
                    });
                }
            }
        }
    }
    if gaps.is_empty() {
        Ok(())
    } else {
        Err(CoverageError(gaps))
    }
}

/// Trimmed-window averages of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub scenario: String,
    pub ticks: u64,
    pub window: Range<u64>,
    pub nodes: BTreeMap<String, Averages>,
    pub services: BTreeMap<String, Averages>,
    /// Nodes left out of `balance` and `total_cpu`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub helper_nodes: Vec<String>,
    pub balance: Balance,
    /// Sum of the CPU averages of the non-helper nodes.
    pub total_cpu: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Averages {
    pub cpu_millicores: f64,
    pub memory_mb: f64,
}

impl From<WindowAverage> for Averages {
    fn from(w: WindowAverage) -> Self {
        Self {
            cpu_millicores: w.cpu(),
            memory_mb: w.mem(),
        }
    }
}

/// [`BalanceStats`] in a serializable form; an infinite ratio becomes `None`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Balance {
    pub max_min_ratio: Option<f64>,
    pub stddev: f64,
    pub spread: f64,
}

impl Balance {
    pub fn ratio(&self) -> f64 {
        self.max_min_ratio.unwrap_or(f64::INFINITY)
    }
}

impl From<BalanceStats> for Balance {
    fn from(b: BalanceStats) -> Self {
        Self {
            max_min_ratio: b.max_min_ratio.is_finite().then_some(b.max_min_ratio),
            stddev: b.stddev,
            spread: b.spread,
        }
    }
}

/// Summarizes a series over its trimmed window (the whole run when it is too
/// short to trim). Nodes named in `helpers` are averaged but kept out of the
/// balance statistics.
pub fn summarize(scenario: &str, series: &ConsumptionSeries, helpers: &[String]) -> RunSummary {
    let len = series.len();
    let mut window = trimmed_window(len);
    if window.is_empty() {
        window = 0..len.max(1);
    }
    let averages = |group| -> BTreeMap<String, Averages> {
        if len == 0 {
            return BTreeMap::new();
        }
        aggregate(series, group, window.clone())
            .expect("window lies inside the run")
            .into_iter()
            .map(|(k, v)| (k, v.into()))
            .collect()
    };
    let nodes = averages(GroupBy::Node);
    let services = averages(GroupBy::Service);
    let loads: Vec<f64> = nodes
        .iter()
        .filter(|(id, _)| !helpers.contains(id))
        .map(|(_, a)| a.cpu_millicores)
        .collect();
    let balance = balance_stats(&loads).map(Balance::from).unwrap_or(Balance {
        max_min_ratio: Some(1.0),
        stddev: 0.0,
        spread: 0.0,
    });
    RunSummary {
        scenario: scenario.to_string(),
        ticks: len,
        window,
        total_cpu: loads.iter().sum(),
        nodes,
        services,
        helper_nodes: helpers.to_vec(),
        balance,
    }
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub scenario: String,
    pub series: ConsumptionSeries,
    pub events: Vec<Event>,
    pub ledger: WorkLedger,
    pub backlog: Backlog,
    pub summary: RunSummary,
}

/// Runs the scenario for its configured duration. Coverage is checked before
/// any simulation work starts.
pub fn run_scenario(scenario: &Scenario, table: &CostTable) -> Result<RunResult, CoverageError> {
    check_coverage(scenario, table)?;
    let mut sim = Simulation::new(scenario, table);
    sim.run_for(scenario.duration_ticks);
    let out = sim.finish();
    let summary = summarize(&scenario.name, &out.series, &scenario.helper_nodes());
    Ok(RunResult {
        scenario: scenario.name.clone(),
        series: out.series,
        events: out.events,
        ledger: out.ledger,
        backlog: out.backlog,
        summary,
    })
}

/// Runs scenarios concurrently, one thread per scenario, and returns the
/// results in input order.
pub fn run_many(
    jobs: &[(&Scenario, &CostTable)],
) -> Vec<Result<RunResult, CoverageError>> {
    std::thread::scope(|scope| {
        let handles: Vec<_> = jobs
            .iter()
            .map(|&(scenario, table)| scope.spawn(move || run_scenario(scenario, table)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("simulation thread panicked"))
            .collect()
    })
}
