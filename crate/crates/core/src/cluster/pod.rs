use crate::ids::{NodeId, PodId};
use crate::model::PodConfig;
use crate::units::{Megabytes, Millicores};

/// Work handed to one pod by its node: a cost to burn and memory to hold
/// while doing so.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PodRequest {
    pub service: String,
    pub cost: Millicores,
    pub memory: Megabytes,
    /// Requests this batch stands for.
    pub rps_quota: u64,
}

/// A request being processed. The cost is burnt in `granularity` near-equal
/// steps whose boundaries sit at `cost * k / granularity`, so the steps sum to
/// the cost exactly and the last one absorbs rounding.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActiveRequest {
    pub seq: u64,
    pub request: PodRequest,
    pub remaining: Millicores,
    pub granularity: u32,
    /// Memory has been granted; only then does CPU consumption start.
    pub allocated: bool,
    /// Tick the request arrived.
    pub arrived: u64,
}

impl ActiveRequest {
    pub fn new(seq: u64, request: PodRequest, granularity: u32, arrived: u64) -> Self {
        Self {
            seq,
            remaining: request.cost,
            request,
            granularity: granularity.max(1),
            allocated: false,
            arrived,
        }
    }

    pub fn consumed(&self) -> Millicores {
        self.request.cost - self.remaining
    }

    pub fn is_done(&self) -> bool {
        self.remaining.is_zero()
    }

    fn boundary(&self, k: u32) -> i64 {
        let cost = i128::from(self.request.cost.micros());
        (cost * i128::from(k) / i128::from(self.granularity)) as i64
    }

    /// Size of the next consumption step, never more than `cap`.
    pub fn next_chunk(&self, cap: Millicores) -> Millicores {
        let consumed = self.consumed().micros();
        // smallest k whose boundary lies past what has been consumed
        let mut k = ((i128::from(consumed) * i128::from(self.granularity))
            / i128::from(self.request.cost.micros().max(1))) as u32;
        while k < self.granularity && self.boundary(k + 1) <= consumed {
            k += 1;
        }
        let to_boundary = if k >= self.granularity {
            self.remaining.micros()
        } else {
            self.boundary(k + 1) - consumed
        };
        Millicores::from_micros(to_boundary.min(self.remaining.micros())).min(cap)
    }

    pub fn advance(&mut self, amount: Millicores) {
        debug_assert!(amount <= self.remaining);
        self.remaining -= amount;
    }
}

#[derive(Debug, Clone)]
pub struct PodState {
    pub id: PodId,
    pub name: String,
    pub service: String,
    pub config: PodConfig,
    /// `None` while waiting for the scheduler.
    pub host: Option<NodeId>,
    /// Draining after a scale-down; receives no new work.
    pub terminating: bool,
    /// Millicores left in the current monitor cycle.
    pub available_cpu: Millicores,
    /// Some step was held back this tick for lack of CPU.
    pub blocked: bool,
    pub active: Vec<ActiveRequest>,
    pub consumed_this_tick: Millicores,
    /// Millicores consumed since the autoscaler last looked at the service.
    pub consumed_since_scale: Millicores,
}

impl PodState {
    pub fn new(id: PodId, service: impl Into<String>, config: PodConfig) -> Self {
        let service = service.into();
        Self {
            id,
            name: format!("{service}-{}", id.0),
            available_cpu: config.cpu_limit,
            service,
            config,
            host: None,
            terminating: false,
            blocked: false,
            active: Vec::new(),
            consumed_this_tick: Millicores::ZERO,
            consumed_since_scale: Millicores::ZERO,
        }
    }

    /// Refreshes the per-cycle allowance when a monitor cycle starts at `now`.
    pub fn replenish(&mut self, now: u64) {
        if now.is_multiple_of(self.config.monitor_cycle) {
            self.available_cpu = self.config.cpu_limit;
        }
        self.blocked = false;
        self.consumed_this_tick = Millicores::ZERO;
    }

    pub fn held_memory(&self) -> Megabytes {
        self.active
            .iter()
            .filter(|r| r.allocated)
            .map(|r| r.request.memory)
            .sum()
    }

    pub fn in_flight(&self) -> usize {
        self.active.len()
    }

    pub fn is_running(&self) -> bool {
        self.host.is_some() && !self.terminating
    }
}
