//! Writing run results to a directory and reading them back.
//!
//! A result directory holds:
//!
//! - `series.csv`: `time,entity_kind,entity_id,service,cpu_millicores,memory_mb`
//! - `summary.csv`: trimmed-window averages per node and service
//! - `events.log`: one event per line
//! - `run.json`: summary, work ledger and backlog
//! - `per_service.svg`, `per_node.svg`: CPU over time

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::metrics::{ConsumptionSeries, EntityKey, EntityKind, MetricSample};
use crate::units::{Megabytes, Millicores};

use super::{summarize, RunResult, RunSummary};

pub const SERIES_HEADER: [&str; 6] = [
    "time",
    "entity_kind",
    "entity_id",
    "service",
    "cpu_millicores",
    "memory_mb",
];

#[derive(Debug, Error)]
pub enum ExportError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{path} row {row}: {message}")]
    Parse {
        path: String,
        row: usize,
        message: String,
    },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> ExportError + '_ {
    move |source| ExportError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Metadata stored next to the series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub format_version: u32,
    pub summary: RunSummary,
    pub granted_millicores: String,
    pub completed_millicores: String,
    pub completed_requests: u64,
    pub abandoned_millicores: String,
    pub unfinished_requests: u64,
    pub unfinished_millicores: String,
    pub pending_pods: u64,
}

pub fn series_csv(series: &ConsumptionSeries) -> String {
    let mut out = SERIES_HEADER.join(",");
    out.push('\n');
    for t in 0..series.len() as usize {
        for (key, s) in series.entities() {
            let _ = writeln!(
                out,
                "{t},{},{},{},{},{}",
                key.kind,
                key.id,
                s.service.as_deref().unwrap_or(""),
                s.cpu[t],
                s.mem[t]
            );
        }
    }
    out
}

/// Per node and service: trimmed-window CPU and memory averages.
pub fn summary_csv(summary: &RunSummary) -> String {
    let mut out = String::from("entity_kind,entity_id,cpu_millicores,memory_mb\n");
    for (kind, group) in [(EntityKind::Node, &summary.nodes), (EntityKind::Service, &summary.services)] {
        for (id, a) in group {
            let _ = writeln!(out, "{kind},{id},{:.6},{:.6}", a.cpu_millicores, a.memory_mb);
        }
    }
    out
}

pub fn events_log(result: &RunResult) -> String {
    result.events.iter().map(|e| format!("{e}\n")).collect()
}

pub fn run_record(result: &RunResult) -> RunRecord {
    RunRecord {
        format_version: 1,
        summary: result.summary.clone(),
        granted_millicores: result.ledger.granted.to_string(),
        completed_millicores: result.ledger.completed.to_string(),
        completed_requests: result.ledger.completed_requests,
        abandoned_millicores: result.ledger.abandoned_consumed.to_string(),
        unfinished_requests: result.backlog.requests,
        unfinished_millicores: result.backlog.remaining.to_string(),
        pending_pods: result.backlog.pending_pods,
    }
}

/// Writes every artifact of `result` into `dir`, creating it if needed.
pub fn write_result(result: &RunResult, dir: &Path) -> Result<(), ExportError> {
    std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    let record = serde_json::to_string_pretty(&run_record(result)).expect("record serializes");
    let files = [
        ("series.csv", series_csv(&result.series)),
        ("summary.csv", summary_csv(&result.summary)),
        ("events.log", events_log(result)),
        ("run.json", record + "\n"),
        ("per_service.svg", plot_svg(&result.series, EntityKind::Service, &format!("{}: CPU per service", result.scenario))),
        ("per_node.svg", plot_svg(&result.series, EntityKind::Node, &format!("{}: CPU per node", result.scenario))),
    ];
    for (name, content) in files {
        let path = dir.join(name);
        std::fs::write(&path, content).map_err(io_err(&path))?;
    }
    Ok(())
}

/// Reads a `series.csv` back into a series.
pub fn read_series(path: &Path) -> Result<ConsumptionSeries, ExportError> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    parse_series(&text).map_err(|(row, message)| ExportError::Parse {
        path: path.display().to_string(),
        row,
        message,
    })
}

pub fn parse_series(text: &str) -> Result<ConsumptionSeries, (usize, String)> {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let headers = reader.headers().map_err(|e| (1, e.to_string()))?;
    if headers.iter().ne(SERIES_HEADER) {
        return Err((1, format!("expected header `{}`", SERIES_HEADER.join(","))));
    }
    let mut series = ConsumptionSeries::new();
    let mut batch: Vec<MetricSample> = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let row = i + 2;
        let r = record.map_err(|e| (row, e.to_string()))?;
        let time: u64 = r[0].parse().map_err(|_| (row, format!("bad time `{}`", &r[0])))?;
        let kind = EntityKind::parse(&r[1]).ok_or_else(|| (row, format!("bad entity kind `{}`", &r[1])))?;
        let cpu = Millicores::parse(&r[4]).ok_or_else(|| (row, format!("bad cpu `{}`", &r[4])))?;
        let mem = Megabytes::parse(&r[5]).ok_or_else(|| (row, format!("bad memory `{}`", &r[5])))?;
        if batch.first().is_some_and(|s| s.time != time) {
            series.record_tick(std::mem::take(&mut batch)).map_err(|e| (row, e.to_string()))?;
        }
        if time != series.len() {
            return Err((row, format!("expected time {}, found {time}", series.len())));
        }
        batch.push(MetricSample {
            time,
            entity: EntityKey::new(kind, &r[2]),
            service: (!r[3].is_empty()).then(|| r[3].to_string()),
            cpu,
            mem,
        });
    }
    if !batch.is_empty() {
        series.record_tick(batch).map_err(|e| (0, e.to_string()))?;
    }
    Ok(series)
}

/// Recomputes the summary of a result directory from its series.
pub fn load_summary(dir: &Path) -> Result<RunSummary, ExportError> {
    let record_path = dir.join("run.json");
    let text = std::fs::read_to_string(&record_path).map_err(io_err(&record_path))?;
    let record: RunRecord = serde_json::from_str(&text).map_err(|e| ExportError::Parse {
        path: record_path.display().to_string(),
        row: e.line(),
        message: e.to_string(),
    })?;
    let series = read_series(&dir.join("series.csv"))?;
    Ok(summarize(&record.summary.scenario, &series, &record.summary.helper_nodes))
}

const PALETTE: [&str; 10] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22",
    "#17becf",
];

/// A standalone line chart of CPU per tick, one line per entity of `kind`.
pub fn plot_svg(series: &ConsumptionSeries, kind: EntityKind, title: &str) -> String {
    let (w, h) = (960.0, 420.0);
    let (left, right, top, bottom) = (70.0, 220.0, 40.0, 50.0);
    let pw = w - left - right;
    let ph = h - top - bottom;
    let lines: BTreeMap<&str, &[Millicores]> = series
        .of_kind(kind)
        .map(|(k, s)| (k.id.as_str(), s.cpu.as_slice()))
        .collect();
    let ymax = lines
        .values()
        .flat_map(|v| v.iter())
        .map(|m| m.as_f64())
        .fold(0.0, f64::max);
    let ymax = nice_ceiling(ymax);
    let n = series.len().max(2) as f64;
    let x = |t: f64| left + pw * t / (n - 1.0);
    let y = |v: f64| top + ph - ph * v / ymax;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="22" font-size="15">{}</text>"#, left, xml_escape(title));
    for i in 0..=4 {
        let v = ymax * f64::from(i) / 4.0;
        let yy = y(v);
        let _ = writeln!(
            s,
            r##"<line x1="{left}" y1="{yy:.2}" x2="{:.2}" y2="{yy:.2}" stroke="#ddd"/><text x="{:.2}" y="{:.2}" text-anchor="end">{v:.0}</text>"##,
            left + pw,
            left - 6.0,
            yy + 4.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="16" y="{:.2}" transform="rotate(-90 16 {:.2})" text-anchor="middle">millicores</text>"#,
        top + ph / 2.0,
        top + ph / 2.0
    );
    for i in 0..=5 {
        let t = (n - 1.0) * f64::from(i) / 5.0;
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{t:.0}</text>"#,
            x(t),
            top + ph + 18.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">time (s)</text>"#,
        left + pw / 2.0,
        h - 10.0
    );
    let _ = writeln!(
        s,
        r#"<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    );
    for (i, (id, values)) in lines.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let points: Vec<String> = values
            .iter()
            .enumerate()
            .map(|(t, v)| format!("{:.2},{:.2}", x(t as f64), y(v.as_f64())))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.2" points="{}"/>"#,
            points.join(" ")
        );
        let ly = top + 14.0 + 18.0 * i as f64;
        let _ = writeln!(
            s,
            r#"<line x1="{:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="3"/><text x="{:.2}" y="{:.2}">{}</text>"#,
            left + pw + 12.0,
            left + pw + 32.0,
            left + pw + 38.0,
            ly + 4.0,
            xml_escape(id)
        );
    }
    s.push_str("</svg>\n");
    s
}

fn nice_ceiling(v: f64) -> f64 {
    if v <= 0.0 {
        return 1.0;
    }
    let mag = 10f64.powf(v.log10().floor());
    for step in [1.0, 2.0, 2.5, 5.0, 10.0] {
        if v <= step * mag {
            return step * mag;
        }
    }
    10.0 * mag
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
