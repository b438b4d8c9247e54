//! Scenario files, cost-table CSVs, batch runs, comparison against other
//! runs and against measurements, and report export.

mod compare;
mod cost_csv;
mod export;
mod measured;
mod run;
mod schema;

pub use compare::{compare_scenarios, Comparison, RankedRun};
pub use cost_csv::{
    parse_cost_table, parse_cost_table_str, serialize_cost_table, CostCsvError,
    COST_TABLE_FORMAT_VERSION,
};
pub use export::{
    events_log, load_summary, parse_series, plot_svg, read_series, run_record, series_csv,
    summary_csv, write_result, ExportError, RunRecord, SERIES_HEADER,
};
pub use measured::{
    validate_against_measurements, AccuracyReport, EntityError, MeasuredDataset, MeasuredError,
    Measurement,
};
pub use run::{
    check_coverage, run_many, run_scenario, summarize, Averages, Balance, CoverageError, Gap,
    RunResult, RunSummary,
};
pub use schema::{
    parse_scenario, ClientEntry, LbPolicy, NodeSpec, Scenario, ScenarioOptions, ScalerSettings,
    SchemaError, ServiceSpec, SCENARIO_FORMAT_VERSION,
};
