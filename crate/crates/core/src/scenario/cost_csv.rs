//! Cost tables as CSV.
//!
//! ```text
//! # format_version: 1
//! image,workflow,rps,service,cpu_millicores,memory_mb
//! A,workflow1,25,frontend,526,
//! ```
//!
//! The version comment is optional. `memory_mb` is an optional column, and an
//! empty cell inside it means "no memory cost recorded". Rows sharing
//! `(image, workflow, rps)` form one knot; knots may appear in any order and
//! are sorted on load.

use std::collections::BTreeMap;
use std::path::Path;

use thiserror::Error;

use crate::model::{validate_cost_table, CostTable, Knot, ServiceCost, ValidationReport};

pub const COST_TABLE_FORMAT_VERSION: u32 = 1;

const REQUIRED: [&str; 5] = ["image", "workflow", "rps", "service", "cpu_millicores"];

#[derive(Debug, Error)]
pub enum CostCsvError {
    /// `row` is the 1-based line of the data file (header included).
    #[error("row {row}, column `{column}`: {message}")]
    Parse {
        row: usize,
        column: String,
        message: String,
    },
    #[error("cost table is invalid:\n{0}")]
    Validation(ValidationReport),
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

fn parse_err(row: usize, column: &str, message: impl Into<String>) -> CostCsvError {
    CostCsvError::Parse {
        row,
        column: column.to_string(),
        message: message.into(),
    }
}

/// Parses and validates a cost table.
pub fn parse_cost_table_str(text: &str) -> Result<CostTable, CostCsvError> {
    // strip the optional version comment, keeping line numbers meaningful
    let mut offset = 0;
    let mut body = text;
    if let Some(first) = text.lines().next() {
        if let Some(rest) = first.trim().strip_prefix('#') {
            let rest = rest.trim();
            if let Some(v) = rest.strip_prefix("format_version:") {
                let v: u32 = v
                    .trim()
                    .parse()
                    .map_err(|_| parse_err(1, "format_version", "not an integer"))?;
                if v != COST_TABLE_FORMAT_VERSION {
                    return Err(parse_err(1, "format_version", format!("unsupported version {v}")));
                }
            }
            offset = 1;
            body = text.split_once('\n').map_or("", |(_, b)| b);
        }
    }

    let mut reader = csv::ReaderBuilder::new()
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(body.as_bytes());
    let header_row = offset + 1;
    let headers = reader
        .headers()
        .map_err(|e| parse_err(header_row, "header", e.to_string()))?
        .clone();
    let columns: Vec<&str> = headers.iter().collect();
    let has_memory = match columns.as_slice() {
        [a, b, c, d, e] if [*a, *b, *c, *d, *e] == REQUIRED => false,
        [a, b, c, d, e, "memory_mb"] if [*a, *b, *c, *d, *e] == REQUIRED => true,
        _ => {
            return Err(parse_err(
                header_row,
                "header",
                format!(
                    "expected `{}[,memory_mb]`, found `{}`",
                    REQUIRED.join(","),
                    columns.join(",")
                ),
            ))
        }
    };

    let mut knots: BTreeMap<(String, String, u32), Vec<ServiceCost>> = BTreeMap::new();
    for (i, record) in reader.records().enumerate() {
        let row = header_row + 1 + i;
        let record = record.map_err(|e| parse_err(row, "record", e.to_string()))?;
        if record.len() < REQUIRED.len() {
            let missing = REQUIRED[record.len()];
            return Err(parse_err(row, missing, "missing column"));
        }
        if record.len() > columns.len() {
            return Err(parse_err(row, "record", format!("{} fields, expected {}", record.len(), columns.len())));
        }
        let text_field = |col: usize| -> Result<String, CostCsvError> {
            let v = &record[col];
            if v.is_empty() {
                Err(parse_err(row, REQUIRED[col], "empty value"))
            } else {
                Ok(v.to_string())
            }
        };
        let image = text_field(0)?;
        let workflow = text_field(1)?;
        let rps: u32 = record[2]
            .parse()
            .map_err(|_| parse_err(row, "rps", format!("`{}` is not a non-negative integer", &record[2])))?;
        let service = text_field(3)?;
        let cpu = parse_number(&record[4]).ok_or_else(|| {
            parse_err(row, "cpu_millicores", format!("`{}` is not a number", &record[4]))
        })?;
        let memory = match record.get(5) {
            Some(v) if has_memory && !v.is_empty() => Some(
                parse_number(v)
                    .ok_or_else(|| parse_err(row, "memory_mb", format!("`{v}` is not a number")))?,
            ),
            _ => None,
        };
        knots.entry((image, workflow, rps)).or_default().push(ServiceCost {
            service,
            cpu_millicores: cpu,
            memory_mb: memory,
        });
    }

    let mut table = CostTable::new();
    for ((image, workflow, rps), services) in knots {
        table.push_knot(&image, &workflow, Knot::new(rps, services));
    }
    let report = validate_cost_table(&table);
    if !report.is_ok() {
        return Err(CostCsvError::Validation(report));
    }
    Ok(table)
}

fn parse_number(s: &str) -> Option<f64> {
    s.parse::<f64>().ok().filter(|v| v.is_finite())
}

pub fn parse_cost_table(path: &Path) -> Result<CostTable, CostCsvError> {
    let text = std::fs::read_to_string(path).map_err(|source| CostCsvError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_cost_table_str(&text)
}

/// Writes the table in the CSV format above. Floats use Rust's shortest
/// round-trip representation, so re-parsing yields the identical table.
pub fn serialize_cost_table(table: &CostTable) -> String {
    let has_memory = table.has_memory_costs();
    let mut out = format!("# format_version: {COST_TABLE_FORMAT_VERSION}\n");
    let mut writer = csv::Writer::from_writer(Vec::new());
    let mut header = REQUIRED.to_vec();
    if has_memory {
        header.push("memory_mb");
    }
    writer.write_record(&header).expect("write to memory");
    for ((image, workflow), knots) in table.curves() {
        for knot in knots {
            for cost in &knot.services {
                let rps = knot.rps.to_string();
                let cpu = cost.cpu_millicores.to_string();
                let mut record = vec![image.as_str(), workflow.as_str(), &rps, &cost.service, &cpu];
                let mem = cost.memory_mb.map(|m| m.to_string()).unwrap_or_default();
                if has_memory {
                    record.push(&mem);
                }
                writer.write_record(&record).expect("write to memory");
            }
        }
    }
    out.push_str(&String::from_utf8(writer.into_inner().expect("flush")).expect("utf-8"));
    out
}
