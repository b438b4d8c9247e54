use thiserror::Error;

use crate::ids::PodId;
use crate::model::{
    build_service_consumption, build_service_memory, CostError, CostTable, ServiceWorkflowRps,
    WorkflowMix,
};
use crate::traffic::{split_round_robin, NodeRequest};
use crate::units::{Megabytes, Millicores};

use super::pod::PodRequest;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConvertError {
    #[error("requests for `{0}` reached a node hosting none of its pods")]
    OrphanService(String),
    #[error(transparent)]
    Cost(#[from] CostError),
}

/// Sums queued node requests per (service, workflow).
pub fn aggregate_queue(queued: &[NodeRequest]) -> ServiceWorkflowRps {
    let mut out = ServiceWorkflowRps::new();
    for r in queued {
        *out.entry(r.service.clone())
            .or_default()
            .entry(r.workflow.clone())
            .or_default() += r.rps;
    }
    out
}

/// Turns a node's queued RPS into per-pod requests.
///
/// `pods` lists the node's pods as `(id, service)` in stable order. Each
/// service's cost comes from the cost table at its total RPS; that RPS is
/// split round-robin over the service's local pods and every pod is charged
/// `cost / total * quota`.
pub fn node_convert_rps(
    table: &CostTable,
    image: &str,
    pods: &[(PodId, &str)],
    queued: &[NodeRequest],
    mix: WorkflowMix,
) -> Result<Vec<(PodId, PodRequest)>, ConvertError> {
    let rps = aggregate_queue(queued);
    if let Some(orphan) = rps.keys().find(|s| !pods.iter().any(|(_, ps)| ps == s)) {
        return Err(ConvertError::OrphanService(orphan.clone()));
    }
    let cpu = build_service_consumption(table, image, &rps, mix)?;
    let mem = build_service_memory(table, image, &rps, mix)?;

    let mut out = Vec::new();
    for (service, per_wf) in &rps {
        let total: u64 = per_wf.values().sum();
        if total == 0 {
            continue;
        }
        let local: Vec<PodId> = pods
            .iter()
            .filter(|(_, s)| s == service)
            .map(|(id, _)| *id)
            .collect();
        let cost_per_rps = cpu.get(service).copied().unwrap_or(0.0) / total as f64;
        let mem_per_rps = mem.get(service).copied().unwrap_or(0.0) / total as f64;
        let quotas = split_round_robin(total, local.len());
        for (pod, quota) in local.into_iter().zip(quotas) {
            out.push((
                pod,
                PodRequest {
                    service: service.clone(),
                    cost: Millicores::from_f64(cost_per_rps * quota as f64),
                    memory: Megabytes::from_f64(mem_per_rps * quota as f64),
                    rps_quota: quota,
                },
            ));
        }
    }
    Ok(out)
}
