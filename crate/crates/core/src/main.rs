use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use kubesim::model::WorkflowMix;
use kubesim::scenario::{
    compare_scenarios, load_summary, parse_cost_table, parse_scenario, run_scenario,
    validate_against_measurements, write_result, CostCsvError, MeasuredDataset,
};

#[derive(Parser)]
#[command(name = "kubesim", version, about = "Logical-time simulation of Kubernetes resource consumption")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and write its series, summary, events and plots.
    Simulate {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        cost_table: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Override the scenario's duration.
        #[arg(long)]
        ticks: Option<u64>,
        #[arg(long)]
        no_autoscaler: bool,
        #[arg(long)]
        wf_mix: Option<WorkflowMix>,
    },
    /// Rank result directories by node balance.
    Compare {
        #[arg(long)]
        out: PathBuf,
        #[arg(required = true, num_args = 2..)]
        results: Vec<PathBuf>,
    },
    /// Compare a result directory with measured averages.
    Validate {
        #[arg(long)]
        result: PathBuf,
        #[arg(long)]
        measured: PathBuf,
        /// Relative error above which an entity counts as a violation.
        #[arg(long)]
        max_error: Option<f64>,
    },
}

enum Failure {
    /// Inputs parsed but broke a rule: exit code 2.
    Violation(String),
    /// Anything else: exit code 1.
    Error(String),
}

fn error(e: impl std::fmt::Display) -> Failure {
    Failure::Error(e.to_string())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Violation(msg)) => {
            eprintln!("{msg}");
            ExitCode::from(2)
        }
        Err(Failure::Error(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Simulate {
            scenario,
            cost_table,
            out,
            ticks,
            no_autoscaler,
            wf_mix,
        } => {
            let mut scenario = parse_scenario(&scenario).map_err(error)?;
            let table = parse_cost_table(&cost_table).map_err(|e| match e {
                CostCsvError::Validation(report) => Failure::Violation(format!("cost table violations:\n{report}")),
                other => error(other),
            })?;
            if let Some(t) = ticks {
                if t == 0 {
                    return Err(error("--ticks must be positive"));
                }
                scenario.duration_ticks = t;
            }
            if no_autoscaler {
                scenario.options.autoscaler = false;
            }
            if let Some(mix) = wf_mix {
                scenario.options.wf_mix = mix;
            }
            let result = run_scenario(&scenario, &table).map_err(error)?;
            write_result(&result, &out).map_err(error)?;
            let s = &result.summary;
            println!(
                "{}: {} ticks, window {}..{}, {} events",
                s.scenario,
                s.ticks,
                s.window.start,
                s.window.end,
                result.events.len()
            );
            for (node, avg) in &s.nodes {
                println!("  {node:<16} {:>14.6} millicores", avg.cpu_millicores);
            }
            println!("  max/min ratio {}", fmt_ratio(s.balance.ratio()));
            if result.backlog.requests > 0 {
                println!(
                    "  unfinished: {} requests, {} millicores",
                    result.backlog.requests, result.backlog.remaining
                );
            }
            Ok(())
        }
        Command::Compare { out, results } => {
            let summaries = results
                .iter()
                .map(|dir| load_summary(dir))
                .collect::<Result<Vec<_>, _>>()
                .map_err(error)?;
            let comparison = compare_scenarios(&summaries);
            std::fs::create_dir_all(&out).map_err(error)?;
            let mut ranking = String::from("rank,scenario,max_min_ratio,stddev,total_cpu_millicores\n");
            for r in &comparison.ranking {
                ranking.push_str(&format!(
                    "{},{},{},{:.6},{:.6}\n",
                    r.rank,
                    r.scenario,
                    fmt_ratio(r.max_min_ratio),
                    r.stddev,
                    r.total_cpu
                ));
            }
            let mut side = String::from("scenario,entity_kind,entity_id,cpu_millicores,memory_mb\n");
            for s in &summaries {
                for (kind, group) in [("node", &s.nodes), ("service", &s.services)] {
                    for (id, a) in group {
                        side.push_str(&format!(
                            "{},{kind},{id},{:.6},{:.6}\n",
                            s.scenario, a.cpu_millicores, a.memory_mb
                        ));
                    }
                }
            }
            std::fs::write(out.join("ranking.csv"), &ranking).map_err(error)?;
            std::fs::write(out.join("averages.csv"), side).map_err(error)?;
            print!("{ranking}");
            Ok(())
        }
        Command::Validate {
            result,
            measured,
            max_error,
        } => {
            let summary = load_summary(&result).map_err(error)?;
            let data = MeasuredDataset::from_csv(&measured).map_err(error)?;
            let report = validate_against_measurements(&summary, &data).map_err(error)?;
            println!("entity_kind,entity_id,predicted,measured,relative_error");
            for e in &report.entities {
                println!(
                    "{},{},{:.6},{:.6},{:.6}",
                    e.entity_kind, e.entity_id, e.predicted, e.measured, e.relative_error
                );
            }
            for (kind, id) in &report.uncovered {
                println!("# uncovered {kind} {id}");
            }
            for (kind, id) in &report.zero_measured {
                println!("# measured zero {kind} {id}");
            }
            println!("# mape {:.6}", report.mape);
            if let Some(limit) = max_error {
                let over: Vec<String> = report
                    .exceeding(limit)
                    .map(|e| format!("{} {} ({:.6})", e.entity_kind, e.entity_id, e.relative_error))
                    .collect();
                if !over.is_empty() {
                    return Err(Failure::Violation(format!(
                        "relative error above {limit}: {}",
                        over.join(", ")
                    )));
                }
            }
            Ok(())
        }
    }
}

fn fmt_ratio(r: f64) -> String {
    if r.is_finite() {
        format!("{r:.6}")
    } else {
        "inf".into()
    }
}
