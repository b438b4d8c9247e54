//! Per-tick consumption series and their aggregation.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::Range;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::units::{Megabytes, Millicores};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricsError {
    #[error("duplicate sample for {entity} at t={time}")]
    DuplicateSample { entity: EntityKey, time: u64 },
    #[error("window {start}..{end} is empty")]
    EmptyWindow { start: u64, end: u64 },
    #[error("window end {end} exceeds run length {len}")]
    WindowOutOfRange { end: u64, len: u64 },
    #[error("balance statistics need at least one node")]
    NoNodes,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EntityKind {
    Node,
    Pod,
    Service,
}

impl EntityKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EntityKind::Node => "node",
            EntityKind::Pod => "pod",
            EntityKind::Service => "service",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "node" => Some(Self::Node),
            "pod" => Some(Self::Pod),
            "service" => Some(Self::Service),
            _ => None,
        }
    }
}

impl fmt::Display for EntityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct EntityKey {
    pub kind: EntityKind,
    pub id: String,
}

impl EntityKey {
    pub fn new(kind: EntityKind, id: impl Into<String>) -> Self {
        Self { kind, id: id.into() }
    }
}

impl fmt::Display for EntityKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.kind, self.id)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MetricSample {
    pub time: u64,
    pub entity: EntityKey,
    /// Owning service, for pods and services.
    pub service: Option<String>,
    /// Millicores consumed during this tick.
    pub cpu: Millicores,
    /// Megabytes held when the sample was taken.
    pub mem: Megabytes,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Series {
    pub service: Option<String>,
    pub cpu: Vec<Millicores>,
    pub mem: Vec<Megabytes>,
}

/// Time-indexed samples for every entity of a run. Every entity carries one
/// sample per recorded tick; entities missing from a tick read as idle.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ConsumptionSeries {
    ticks: u64,
    entities: BTreeMap<EntityKey, Series>,
}

impl ConsumptionSeries {
    pub fn new() -> Self {
        Self::default()
    }

    /// Number of ticks recorded.
    pub fn len(&self) -> u64 {
        self.ticks
    }

    pub fn is_empty(&self) -> bool {
        self.ticks == 0
    }

    pub fn entities(&self) -> impl Iterator<Item = (&EntityKey, &Series)> {
        self.entities.iter()
    }

    pub fn get(&self, key: &EntityKey) -> Option<&Series> {
        self.entities.get(key)
    }

    pub fn of_kind(&self, kind: EntityKind) -> impl Iterator<Item = (&EntityKey, &Series)> {
        self.entities.iter().filter(move |(k, _)| k.kind == kind)
    }

    /// Appends one tick's samples. Rejects the whole batch if any
    /// `(entity, time)` pair was already recorded.
    pub fn record_tick(&mut self, samples: Vec<MetricSample>) -> Result<(), MetricsError> {
        let mut batch = BTreeSet::new();
        for s in &samples {
            let taken = self
                .entities
                .get(&s.entity)
                .is_some_and(|series| series.cpu.len() as u64 > s.time);
            if taken || !batch.insert((&s.entity, s.time)) {
                return Err(MetricsError::DuplicateSample {
                    entity: s.entity.clone(),
                    time: s.time,
                });
            }
        }
        for s in samples {
            self.ticks = self.ticks.max(s.time + 1);
            let series = self.entities.entry(s.entity).or_default();
            if series.service.is_none() {
                series.service = s.service;
            }
            pad(series, s.time);
            series.cpu.push(s.cpu);
            series.mem.push(s.mem);
        }
        let ticks = self.ticks;
        for series in self.entities.values_mut() {
            pad(series, ticks);
        }
        Ok(())
    }

    /// Per-tick total of an entity kind.
    pub fn total_cpu_at(&self, kind: EntityKind, time: u64) -> Millicores {
        self.of_kind(kind).map(|(_, s)| s.cpu[time as usize]).sum()
    }

    pub fn total_mem_at(&self, kind: EntityKind, time: u64) -> Megabytes {
        self.of_kind(kind).map(|(_, s)| s.mem[time as usize]).sum()
    }
}

fn pad(series: &mut Series, len: u64) {
    let len = len as usize;
    if series.cpu.len() < len {
        series.cpu.resize(len, Millicores::ZERO);
        series.mem.resize(len, Megabytes::ZERO);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroupBy {
    Node,
    Service,
    Pod,
}

impl GroupBy {
    fn kind(self) -> EntityKind {
        match self {
            GroupBy::Node => EntityKind::Node,
            GroupBy::Service => EntityKind::Service,
            GroupBy::Pod => EntityKind::Pod,
        }
    }
}

/// Exact window totals; averages are derived on demand.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WindowAverage {
    pub cpu_total: Millicores,
    pub mem_total: Megabytes,
    pub ticks: u64,
}

impl WindowAverage {
    /// Average millicores per tick.
    pub fn cpu(&self) -> f64 {
        self.cpu_total.as_f64() / self.ticks as f64
    }

    /// Average megabytes held.
    pub fn mem(&self) -> f64 {
        self.mem_total.as_f64() / self.ticks as f64
    }
}

/// Averages each node's (or service's) series over `window`.
pub fn aggregate(
    series: &ConsumptionSeries,
    group: GroupBy,
    window: Range<u64>,
) -> Result<BTreeMap<String, WindowAverage>, MetricsError> {
    if window.start >= window.end {
        return Err(MetricsError::EmptyWindow {
            start: window.start,
            end: window.end,
        });
    }
    if window.end > series.len() {
        return Err(MetricsError::WindowOutOfRange {
            end: window.end,
            len: series.len(),
        });
    }
    let range = window.start as usize..window.end as usize;
    Ok(series
        .of_kind(group.kind())
        .map(|(key, s)| {
            (
                key.id.clone(),
                WindowAverage {
                    cpu_total: s.cpu[range.clone()].iter().sum(),
                    mem_total: s.mem[range.clone()].iter().sum(),
                    ticks: window.end - window.start,
                },
            )
        })
        .collect())
}

/// The comparison window: the run with its first and last 5% of ticks
/// (warm-up and drain) dropped.
pub fn trimmed_window(len: u64) -> Range<u64> {
    let trim = len * 5 / 100;
    trim..len - trim
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BalanceStats {
    /// Highest over lowest node load; `+inf` when the lowest is zero while
    /// the highest is not.
    pub max_min_ratio: f64,
    /// Population standard deviation.
    pub stddev: f64,
    pub spread: f64,
}

pub fn balance_stats(loads: &[f64]) -> Result<BalanceStats, MetricsError> {
    if loads.is_empty() {
        return Err(MetricsError::NoNodes);
    }
    let max = loads.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = loads.iter().copied().fold(f64::INFINITY, f64::min);
    let n = loads.len() as f64;
    let mean = loads.iter().sum::<f64>() / n;
    let var = loads.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    let ratio = if max == min {
        1.0
    } else if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    };
    Ok(BalanceStats {
        max_min_ratio: ratio,
        stddev: var.sqrt(),
        spread: max - min,
    })
}
