//! Comparing predictions with cluster measurements.
//!
//! Measurements are CSV rows of
//! `experiment,entity_kind,entity_id,cpu_millicores,repetitions`, each the
//! mean of `repetitions` stress-test runs. Rows for the same entity are
//! pooled, weighted by their repetitions.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::metrics::EntityKind;

use super::RunSummary;

#[derive(Debug, Error)]
pub enum MeasuredError {
    #[error("row {row}: {message}")]
    Parse { row: usize, message: String },
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("no measured entity appears in the prediction")]
    NoOverlap,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Measurement {
    pub experiment: String,
    pub entity_kind: EntityKind,
    pub entity_id: String,
    pub cpu_millicores: f64,
    pub repetitions: u32,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct MeasuredDataset {
    pub rows: Vec<Measurement>,
}

impl MeasuredDataset {
    pub fn push(&mut self, experiment: &str, kind: EntityKind, id: &str, cpu: f64, repetitions: u32) {
        self.rows.push(Measurement {
            experiment: experiment.into(),
            entity_kind: kind,
            entity_id: id.into(),
            cpu_millicores: cpu,
            repetitions,
        });
    }

    /// Repetition-weighted mean per entity.
    pub fn means(&self) -> BTreeMap<(EntityKind, String), f64> {
        let mut acc: BTreeMap<(EntityKind, String), (f64, u64)> = BTreeMap::new();
        for m in &self.rows {
            let e = acc.entry((m.entity_kind, m.entity_id.clone())).or_default();
            e.0 += m.cpu_millicores * f64::from(m.repetitions);
            e.1 += u64::from(m.repetitions);
        }
        acc.into_iter().map(|(k, (sum, n))| (k, sum / n as f64)).collect()
    }

    pub fn from_csv_str(text: &str) -> Result<Self, MeasuredError> {
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let mut rows = Vec::new();
        for (i, record) in reader.deserialize::<Measurement>().enumerate() {
            let row = i + 2;
            let m = record.map_err(|e| MeasuredError::Parse {
                row,
                message: e.to_string(),
            })?;
            if !(m.cpu_millicores >= 0.0 && m.cpu_millicores.is_finite()) {
                return Err(MeasuredError::Parse {
                    row,
                    message: format!("cpu_millicores {} must be finite and non-negative", m.cpu_millicores),
                });
            }
            if m.repetitions == 0 {
                return Err(MeasuredError::Parse {
                    row,
                    message: "repetitions must be positive".into(),
                });
            }
            rows.push(m);
        }
        Ok(Self { rows })
    }

    pub fn from_csv(path: &Path) -> Result<Self, MeasuredError> {
        let text = std::fs::read_to_string(path).map_err(|source| MeasuredError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_csv_str(&text)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntityError {
    pub entity_kind: EntityKind,
    pub entity_id: String,
    pub predicted: f64,
    pub measured: f64,
    /// `|predicted - measured| / measured`.
    pub relative_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AccuracyReport {
    pub entities: Vec<EntityError>,
    /// Measured entities the prediction has no value for.
    pub uncovered: Vec<(EntityKind, String)>,
    /// Entities measured at 0, where relative error is undefined.
    pub zero_measured: Vec<(EntityKind, String)>,
    /// Mean of the relative errors, as a fraction.
    pub mape: f64,
}

impl AccuracyReport {
    pub fn get(&self, kind: EntityKind, id: &str) -> Option<&EntityError> {
        self.entities.iter().find(|e| e.entity_kind == kind && e.entity_id == id)
    }

    /// Entities whose relative error exceeds `limit`.
    pub fn exceeding(&self, limit: f64) -> impl Iterator<Item = &EntityError> {
        self.entities.iter().filter(move |e| e.relative_error > limit)
    }
}

/// Relative error of each measured node and service against the prediction's
/// trimmed-window CPU averages.
pub fn validate_against_measurements(
    prediction: &RunSummary,
    measured: &MeasuredDataset,
) -> Result<AccuracyReport, MeasuredError> {
    let mut entities = Vec::new();
    let mut uncovered = Vec::new();
    let mut zero_measured = Vec::new();
    for ((kind, id), meas) in measured.means() {
        let predicted = match kind {
            EntityKind::Node => prediction.nodes.get(&id),
            EntityKind::Service => prediction.services.get(&id),
            EntityKind::Pod => None,
        };
        let Some(predicted) = predicted else {
            uncovered.push((kind, id));
            continue;
        };
        if meas == 0.0 {
            zero_measured.push((kind, id));
            continue;
        }
        let predicted = predicted.cpu_millicores;
        entities.push(EntityError {
            entity_kind: kind,
            entity_id: id,
            predicted,
            measured: meas,
            relative_error: (predicted - meas).abs() / meas,
        });
    }
    if entities.is_empty() && zero_measured.is_empty() {
        return Err(MeasuredError::NoOverlap);
    }
    let mape = if entities.is_empty() {
        0.0
    } else {
        entities.iter().map(|e| e.relative_error).sum::<f64>() / entities.len() as f64
    };
    Ok(AccuracyReport {
        entities,
        uncovered,
        zero_measured,
        mape,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{Averages, Balance};

    fn prediction(nodes: &[(&str, f64)]) -> RunSummary {
        RunSummary {
            scenario: "p".into(),
            ticks: 10,
            window: 0..10,
            nodes: nodes
                .iter()
                .map(|(n, c)| (n.to_string(), Averages { cpu_millicores: *c, memory_mb: 0.0 }))
                .collect(),
            services: BTreeMap::new(),
            helper_nodes: Vec::new(),
            balance: Balance { max_min_ratio: Some(1.0), stddev: 0.0, spread: 0.0 },
            total_cpu: nodes.iter().map(|n| n.1).sum(),
        }
    }

    #[test]
    fn exact_prediction_has_zero_mape() {
        let mut m = MeasuredDataset::default();
        m.push("e", EntityKind::Node, "n1", 100.0, 5);
        m.push("e", EntityKind::Node, "n2", 300.0, 5);
        let r = validate_against_measurements(&prediction(&[("n1", 100.0), ("n2", 300.0)]), &m).unwrap();
        assert_eq!(r.mape, 0.0);
    }

    #[test]
    fn uncovered_entities_are_listed_not_scored() {
        let mut m = MeasuredDataset::default();
        m.push("e", EntityKind::Node, "n1", 100.0, 1);
        m.push("e", EntityKind::Node, "ghost", 50.0, 1);
        let r = validate_against_measurements(&prediction(&[("n1", 110.0)]), &m).unwrap();
        assert_eq!(r.uncovered, vec![(EntityKind::Node, "ghost".to_string())]);
        assert!((r.mape - 0.1).abs() < 1e-12);
    }

    #[test]
    fn no_overlap() {
        let mut m = MeasuredDataset::default();
        m.push("e", EntityKind::Node, "x", 1.0, 1);
        assert!(matches!(
            validate_against_measurements(&prediction(&[("n1", 1.0)]), &m),
            Err(MeasuredError::NoOverlap)
        ));
    }

    #[test]
    fn repetitions_weight_the_mean() {
        let mut m = MeasuredDataset::default();
        m.push("a", EntityKind::Node, "n1", 100.0, 3);
        m.push("b", EntityKind::Node, "n1", 200.0, 1);
        assert_eq!(m.means()[&(EntityKind::Node, "n1".to_string())], 125.0);
    }

    #[test]
    fn parses_csv() {
        let text = "experiment,entity_kind,entity_id,cpu_millicores,repetitions\nstress,node,worker-1,5500,5\n";
        let m = MeasuredDataset::from_csv_str(text).unwrap();
        assert_eq!(m.rows[0].entity_kind, EntityKind::Node);
        assert_eq!(m.rows[0].repetitions, 5);
        let bad = "experiment,entity_kind,entity_id,cpu_millicores,repetitions\nstress,node,worker-1,-1,5\n";
        assert!(matches!(MeasuredDataset::from_csv_str(bad), Err(MeasuredError::Parse { row: 2, .. })));
    }
}
