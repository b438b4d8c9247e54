use std::cmp::Ordering;

use serde::Serialize;

use super::RunSummary;

/// Ratios closer than this (relatively) count as a tie.
const RATIO_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankedRun {
    pub rank: usize,
    pub scenario: String,
    pub max_min_ratio: f64,
    pub stddev: f64,
    pub total_cpu: f64,
    /// Ratio minus the best ratio in the comparison.
    pub ratio_gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison {
    /// Best balanced first.
    pub ranking: Vec<RankedRun>,
}

impl Comparison {
    pub fn best(&self) -> Option<&RankedRun> {
        self.ranking.first()
    }
}

fn ratio_cmp(a: f64, b: f64) -> Ordering {
    if a == b || (a.is_finite() && b.is_finite() && (a - b).abs() <= RATIO_TOLERANCE * a.max(b)) {
        Ordering::Equal
    } else {
        a.total_cmp(&b)
    }
}

/// Ranks runs by node max/min ratio, lowest first; ties go to the lower total
/// load, then to input order.
pub fn compare_scenarios(runs: &[RunSummary]) -> Comparison {
    let mut order: Vec<usize> = (0..runs.len()).collect();
    order.sort_by(|&a, &b| {
        let (ra, rb) = (&runs[a], &runs[b]);
        ratio_cmp(ra.balance.ratio(), rb.balance.ratio())
            .then(ra.total_cpu.total_cmp(&rb.total_cpu))
            .then(a.cmp(&b))
    });
    let best = order.first().map(|&i| runs[i].balance.ratio()).unwrap_or(1.0);
    let ranking = order
        .into_iter()
        .enumerate()
        .map(|(rank, i)| {
            let r = &runs[i];
            let ratio = r.balance.ratio();
            RankedRun {
                rank: rank + 1,
                scenario: r.scenario.clone(),
                max_min_ratio: ratio,
                stddev: r.balance.stddev,
                total_cpu: r.total_cpu,
                ratio_gap: if ratio == best { 0.0 } else { ratio - best },
            }
        })
        .collect();
    Comparison { ranking }
}
