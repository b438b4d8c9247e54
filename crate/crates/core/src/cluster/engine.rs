//! The tick loop.
//!
//! Every tick runs the same phases in a fixed order:
//!
//! 1. replenish node CPU budgets and, on monitor-cycle boundaries, pod CPU
//!    allowances; retry pending pod placements; run due autoscaler cycles
//! 2. retry queued memory allocations
//! 3. deliver due client batches through the load balancer, then convert each
//!    node's queued RPS into pod requests; reschedule pods whose memory wait
//!    outlasted their cool-down
//! 4. advance consumption loops while budgets allow
//! 5. sample metrics
//! 6. advance the clock

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use crate::control::{
    autoscale_cycle, cooldown_elapsed, downscale_victim, NodeReservation, Placement, ScaleDecision,
    ScalerState, Scheduler,
};
use crate::ids::{NodeId, PodId};
use crate::metrics::{ConsumptionSeries, EntityKey, EntityKind, MetricSample};
use crate::model::{CostTable, PodConfig, ServiceConfig, WorkflowData, WorkflowMix};
use crate::scenario::Scenario;
use crate::traffic::{balance_client_request, ClientRequest, ClientSpec, NodeRequest, PodPlacement};
use crate::units::{Megabytes, Millicores};

use super::convert::{aggregate_queue, node_convert_rps};
use super::node::{CpuGrant, MemTicket, MemoryGrant, NodeState};
use super::pod::{ActiveRequest, PodRequest, PodState};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Event {
    pub time: u64,
    pub kind: EventKind,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EventKind {
    PodScheduled { pod: String, node: String },
    PodPending { pod: String },
    Unroutable { workflow: String, service: String },
    OrphanService { node: String, service: String },
    CostLookupFailed { node: String, service: String, reason: String },
    Extrapolated { image: String, workflow: String, rps: u64, max_knot: u32 },
    MemoryDeferred { pod: String, node: String, amount: Megabytes },
    MemoryReschedule { pod: String, node: String, abandoned: Millicores },
    ScaleUp { service: String, pod: String },
    ScaleDown { service: String, pod: String },
    PodRemoved { pod: String, node: String },
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "t={} ", self.time)?;
        match &self.kind {
            EventKind::PodScheduled { pod, node } => write!(f, "pod-scheduled {pod} node={node}"),
            EventKind::PodPending { pod } => write!(f, "pod-pending {pod}"),
            EventKind::Unroutable { workflow, service } => {
                write!(f, "unroutable workflow={workflow} service={service}")
            }
            EventKind::OrphanService { node, service } => {
                write!(f, "orphan-service node={node} service={service}")
            }
            EventKind::CostLookupFailed { node, service, reason } => {
                write!(f, "cost-lookup-failed node={node} service={service} reason=\"{reason}\"")
            }
            EventKind::Extrapolated { image, workflow, rps, max_knot } => write!(
                f,
                "warning extrapolated image={image} workflow={workflow} rps={rps} max_knot={max_knot}"
            ),
            EventKind::MemoryDeferred { pod, node, amount } => {
                write!(f, "memory-deferred {pod} node={node} mb={amount}")
            }
            EventKind::MemoryReschedule { pod, node, abandoned } => {
                write!(f, "memory-reschedule {pod} node={node} abandoned_millicores={abandoned}")
            }
            EventKind::ScaleUp { service, pod } => write!(f, "scale-up {service} pod={pod}"),
            EventKind::ScaleDown { service, pod } => write!(f, "scale-down {service} pod={pod}"),
            EventKind::PodRemoved { pod, node } => write!(f, "pod-removed {pod} node={node}"),
        }
    }
}

/// Running totals for the work-conservation check.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct WorkLedger {
    /// Millicores granted by nodes over the whole run.
    pub granted: Millicores,
    /// Cost of requests that ran to completion.
    pub completed: Millicores,
    pub completed_requests: u64,
    /// Millicores burnt by requests later abandoned through rescheduling.
    pub abandoned_consumed: Millicores,
    /// Cost those requests never got to burn.
    pub abandoned_remaining: Millicores,
}

/// Work still outstanding when the run stopped.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Backlog {
    pub requests: u64,
    /// Requests still waiting for memory.
    pub memory_pending: u64,
    pub remaining: Millicores,
    pub pending_pods: u64,
}

struct ServiceRuntime {
    config: ServiceConfig,
    pod: PodConfig,
    scaler: ScalerState,
}

/// A cluster in motion.
pub struct Simulation<'t> {
    table: &'t CostTable,
    mix: WorkflowMix,
    autoscaler: bool,
    now: u64,
    nodes: Vec<NodeState>,
    pods: BTreeMap<PodId, PodState>,
    next_pod: u32,
    next_seq: u64,
    unplaced: VecDeque<PodId>,
    scheduler: Scheduler,
    services: BTreeMap<String, ServiceRuntime>,
    clients: Vec<ClientSpec>,
    monitor: ConsumptionSeries,
    events: Vec<Event>,
    warned: BTreeSet<(String, String)>,
    ledger: WorkLedger,
}

/// Everything a finished run produced.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub series: ConsumptionSeries,
    pub events: Vec<Event>,
    pub ledger: WorkLedger,
    pub backlog: Backlog,
}

impl<'t> Simulation<'t> {
    /// Builds the cluster at t=0: image pods pinned to their nodes, any extra
    /// starting pods handed to the scheduler. `scenario` must already be valid.
    pub fn new(scenario: &Scenario, table: &'t CostTable) -> Self {
        let nodes = scenario
            .node_images()
            .enumerate()
            .map(|(i, (spec, image))| NodeState::new(NodeId(i), spec.id.clone(), image.clone()))
            .collect();
        let services = scenario
            .services
            .iter()
            .map(|s| {
                (
                    s.name.clone(),
                    ServiceRuntime {
                        config: s.config(),
                        pod: s.pod.clone(),
                        scaler: ScalerState::default(),
                    },
                )
            })
            .collect();
        let mut sim = Self {
            table,
            mix: scenario.options.wf_mix,
            autoscaler: scenario.options.autoscaler,
            now: 0,
            nodes,
            pods: BTreeMap::new(),
            next_pod: 0,
            next_seq: 0,
            unplaced: VecDeque::new(),
            scheduler: Scheduler::new(scenario.placement_rules()),
            services,
            clients: scenario.client_specs(),
            monitor: ConsumptionSeries::new(),
            events: Vec::new(),
            warned: BTreeSet::new(),
            ledger: WorkLedger::default(),
        };

        for n in 0..sim.nodes.len() {
            let image_pods: Vec<(String, u32)> =
                sim.nodes[n].image.pods.iter().map(|(s, &c)| (s.clone(), c)).collect();
            for (service, count) in image_pods {
                for _ in 0..count {
                    let id = sim.create_pod(&service);
                    sim.bind(id, NodeId(n));
                }
            }
        }
        let image_counts: BTreeMap<String, u32> = scenario
            .image_pod_counts()
            .into_iter()
            .map(|(s, c)| (s.to_string(), c))
            .collect();
        for spec in &scenario.services {
            let have = image_counts.get(&spec.name).copied().unwrap_or(0);
            for _ in have..spec.starting_pods {
                let id = sim.create_pod(&spec.name);
                sim.unplaced.push_back(id);
            }
        }
        let mut log = Vec::new();
        sim.place_pending(&mut log);
        sim.events.extend(log);
        sim
    }

    pub fn now(&self) -> u64 {
        self.now
    }

    pub fn nodes(&self) -> &[NodeState] {
        &self.nodes
    }

    pub fn pods(&self) -> impl Iterator<Item = &PodState> {
        self.pods.values()
    }

    pub fn series(&self) -> &ConsumptionSeries {
        &self.monitor
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn ledger(&self) -> WorkLedger {
        self.ledger
    }

    /// Running pods per service and node, as seen by the load balancer.
    pub fn placement(&self) -> PodPlacement {
        let mut placement = PodPlacement::new();
        for pod in self.pods.values().filter(|p| p.is_running()) {
            if let Some(host) = pod.host {
                *placement
                    .entry(pod.service.clone())
                    .or_default()
                    .entry(host)
                    .or_default() += 1;
            }
        }
        placement
    }

    /// Queues a node request directly, bypassing clients and the balancer.
    pub fn enqueue(&mut self, node: NodeId, request: NodeRequest) {
        self.nodes[node.0].inbound.push(request);
    }

    /// Hands a request straight to a pod, as its node would.
    pub fn submit(&mut self, pod: PodId, request: PodRequest) {
        self.deliver(pod, request, &mut Vec::new());
    }

    /// Runs one tick and returns the events it produced.
    pub fn tick(&mut self) -> Vec<Event> {
        let mut log = Vec::new();
        let now = self.now;

        for node in &mut self.nodes {
            node.replenish();
        }
        for pod in self.pods.values_mut() {
            pod.replenish(now);
        }
        self.place_pending(&mut log);
        if self.autoscaler && now > 0 {
            self.autoscale(&mut log);
        }

        for n in 0..self.nodes.len() {
            let granted = self.nodes[n].retry_pending();
            self.mark_allocated(&granted);
        }

        self.dispatch_clients(&mut log);
        for n in 0..self.nodes.len() {
            self.convert_node(n, &mut log);
        }
        self.enforce_memory_cooldown(&mut log);

        for n in 0..self.nodes.len() {
            self.consume_node(n);
        }
        self.remove_drained(&mut log);

        self.sample();
        self.now += 1;
        self.events.extend(log.iter().cloned());
        log
    }

    pub fn run_for(&mut self, ticks: u64) {
        for _ in 0..ticks {
            self.tick();
        }
    }

    pub fn finish(self) -> RunOutput {
        let mut backlog = Backlog {
            pending_pods: self.unplaced.len() as u64,
            ..Backlog::default()
        };
        for pod in self.pods.values() {
            for r in &pod.active {
                backlog.requests += 1;
                backlog.memory_pending += u64::from(!r.allocated);
                backlog.remaining += r.remaining;
            }
        }
        RunOutput {
            series: self.monitor,
            events: self.events,
            ledger: self.ledger,
            backlog,
        }
    }

    /// Millicores burnt by requests still in flight.
    pub fn in_flight_consumed(&self) -> Millicores {
        self.pods
            .values()
            .flat_map(|p| &p.active)
            .map(ActiveRequest::consumed)
            .sum()
    }

    /// Checks the accounting invariants of the current state.
    pub fn check_invariants(&self) -> Result<(), String> {
        for node in &self.nodes {
            if node.cpu_budget.is_negative() || node.cpu_budget > node.cpu_capacity() {
                return Err(format!("{}: cpu budget {} out of range", node.name, node.cpu_budget));
            }
            if node.granted_this_tick > node.cpu_capacity() {
                return Err(format!("{}: granted {} above capacity", node.name, node.granted_this_tick));
            }
            if node.free_mem.is_negative() || node.free_mem > node.mem_capacity() {
                return Err(format!("{}: free memory {} out of range", node.name, node.free_mem));
            }
            let held: Megabytes = node.hosted.iter().map(|id| self.pods[id].held_memory()).sum();
            if held != node.used_mem() {
                return Err(format!(
                    "{}: pods hold {held} MB but node accounts {} MB",
                    node.name,
                    node.used_mem()
                ));
            }
            let reserved: Millicores =
                node.hosted.iter().map(|id| self.pods[id].config.cpu_request).sum();
            if reserved != node.reserved_cpu || reserved > node.cpu_capacity() {
                return Err(format!("{}: reservation mismatch", node.name));
            }
        }
        for pod in self.pods.values() {
            if pod.available_cpu.is_negative() || pod.available_cpu > pod.config.cpu_limit {
                return Err(format!("{}: available cpu {} out of range", pod.name, pod.available_cpu));
            }
        }
        let accounted =
            self.ledger.completed + self.ledger.abandoned_consumed + self.in_flight_consumed();
        if accounted != self.ledger.granted {
            return Err(format!(
                "granted {} but completed + abandoned + in-flight = {accounted}",
                self.ledger.granted
            ));
        }
        Ok(())
    }

    fn create_pod(&mut self, service: &str) -> PodId {
        let id = PodId(self.next_pod);
        self.next_pod += 1;
        let config = self.services[service].pod.clone();
        self.pods.insert(id, PodState::new(id, service, config));
        id
    }

    fn bind(&mut self, pod: PodId, node: NodeId) {
        let p = self.pods.get_mut(&pod).expect("pod exists");
        p.host = Some(node);
        self.nodes[node.0].attach(pod, p.config.cpu_request);
    }

    fn reservations(&self) -> Vec<NodeReservation> {
        self.nodes
            .iter()
            .map(|n| NodeReservation {
                node: n.id,
                capacity: n.cpu_capacity(),
                reserved: n.reserved_cpu,
            })
            .collect()
    }

    fn place_pending(&mut self, log: &mut Vec<Event>) {
        let mut still = VecDeque::new();
        while let Some(id) = self.unplaced.pop_front() {
            let (service, request) = {
                let p = &self.pods[&id];
                (p.service.clone(), p.config.cpu_request)
            };
            let mut view = self.reservations();
            match self.scheduler.deploy_pod(&service, request, &mut view) {
                Placement::Placed(node) => {
                    self.bind(id, node);
                    log.push(self.event(EventKind::PodScheduled {
                        pod: self.pods[&id].name.clone(),
                        node: self.nodes[node.0].name.clone(),
                    }));
                }
                Placement::Pending => {
                    log.push(self.event(EventKind::PodPending {
                        pod: self.pods[&id].name.clone(),
                    }));
                    still.push_back(id);
                }
            }
        }
        self.unplaced = still;
    }

    fn event(&self, kind: EventKind) -> Event {
        Event { time: self.now, kind }
    }

    fn autoscale(&mut self, log: &mut Vec<Event>) {
        let now = self.now;
        let names: Vec<String> = self.services.keys().cloned().collect();
        for name in names {
            let cycle = self.services[&name].config.scaler_cycle;
            if !now.is_multiple_of(cycle) {
                continue;
            }
            let members: Vec<PodId> = self
                .pods
                .values()
                .filter(|p| p.service == name && !p.terminating)
                .map(|p| p.id)
                .collect();
            let utilization: Vec<f64> = members
                .iter()
                .map(|id| {
                    let p = &self.pods[id];
                    let capacity = p.config.cpu_request.as_f64() * cycle as f64;
                    p.consumed_since_scale.as_f64() / capacity
                })
                .collect();
            for id in &members {
                self.pods.get_mut(id).expect("member").consumed_since_scale = Millicores::ZERO;
            }
            let rt = self.services.get_mut(&name).expect("service");
            match autoscale_cycle(&rt.config, &utilization, &mut rt.scaler, now) {
                ScaleDecision::ScaleUp => {
                    let id = self.create_pod(&name);
                    log.push(self.event(EventKind::ScaleUp {
                        service: name.clone(),
                        pod: self.pods[&id].name.clone(),
                    }));
                    self.unplaced.push_back(id);
                    self.place_pending(log);
                }
                ScaleDecision::ScaleDown => {
                    // unplaced pods go first; they hold nothing
                    if let Some(pos) = self.unplaced.iter().position(|id| self.pods[id].service == name) {
                        let id = self.unplaced.remove(pos).expect("position valid");
                        let pod = self.pods.remove(&id).expect("pod exists");
                        log.push(self.event(EventKind::ScaleDown { service: name.clone(), pod: pod.name }));
                        continue;
                    }
                    let candidates: Vec<(PodId, usize)> = members
                        .iter()
                        .map(|id| (*id, self.pods[id].in_flight()))
                        .collect();
                    if let Some(victim) = downscale_victim(&candidates) {
                        let pod = self.pods.get_mut(&victim).expect("victim");
                        pod.terminating = true;
                        let name_of = pod.name.clone();
                        log.push(self.event(EventKind::ScaleDown { service: name.clone(), pod: name_of }));
                    }
                }
                ScaleDecision::Hold => {}
            }
        }
    }

    fn mark_allocated(&mut self, tickets: &[MemTicket]) {
        for t in tickets {
            if let Some(pod) = self.pods.get_mut(&t.pod) {
                if let Some(r) = pod.active.iter_mut().find(|r| r.seq == t.request) {
                    r.allocated = true;
                }
            }
        }
    }

    fn dispatch_clients(&mut self, log: &mut Vec<Event>) {
        let now = self.now;
        let due: Vec<ClientRequest> = self
            .clients
            .iter()
            .filter(|c| c.emits_at(now))
            .map(|c| c.request.clone())
            .collect();
        if due.is_empty() {
            return;
        }
        let placement = self.placement();
        for request in due {
            let (routable, missing): (Vec<&String>, Vec<&String>) = request
                .workflow
                .services
                .iter()
                .partition(|s| placement.contains_key(*s));
            for service in missing {
                log.push(self.event(EventKind::Unroutable {
                    workflow: request.workflow.name.clone(),
                    service: service.clone(),
                }));
            }
            if routable.is_empty() {
                continue;
            }
            let reduced = ClientRequest {
                workflow: WorkflowData {
                    name: request.workflow.name.clone(),
                    services: routable.into_iter().cloned().collect(),
                },
                rps: request.rps,
            };
            let routed = balance_client_request(&reduced, &placement)
                .expect("routable services have running pods");
            for (node, nreq) in routed {
                self.nodes[node.0].inbound.push(nreq);
            }
        }
    }

    fn convert_node(&mut self, n: usize, log: &mut Vec<Event>) {
        let queued = std::mem::take(&mut self.nodes[n].inbound);
        if queued.is_empty() {
            return;
        }
        let image_key = self.nodes[n].image.cost_key().to_string();
        let node_name = self.nodes[n].name.clone();
        let local: Vec<(PodId, String)> = self.nodes[n]
            .hosted
            .iter()
            .map(|id| &self.pods[id])
            .filter(|p| !p.terminating)
            .map(|p| (p.id, p.service.clone()))
            .collect();
        let local_refs: Vec<(PodId, &str)> = local.iter().map(|(id, s)| (*id, s.as_str())).collect();

        let totals = aggregate_queue(&queued);
        for (service, per_wf) in &totals {
            let total: u64 = per_wf.values().sum();
            for workflow in per_wf.keys() {
                if let Some(max_knot) = self.table.max_knot(&image_key, workflow) {
                    if total > u64::from(max_knot)
                        && self.warned.insert((image_key.clone(), workflow.clone()))
                    {
                        log.push(self.event(EventKind::Extrapolated {
                            image: image_key.clone(),
                            workflow: workflow.clone(),
                            rps: total,
                            max_knot,
                        }));
                    }
                }
            }
            let subset: Vec<NodeRequest> =
                queued.iter().filter(|r| &r.service == service).cloned().collect();
            match node_convert_rps(self.table, &image_key, &local_refs, &subset, self.mix) {
                Ok(requests) => {
                    for (pod, request) in requests {
                        self.deliver(pod, request, log);
                    }
                }
                Err(super::ConvertError::OrphanService(service)) => {
                    log.push(self.event(EventKind::OrphanService { node: node_name.clone(), service }));
                }
                Err(super::ConvertError::Cost(e)) => {
                    log.push(self.event(EventKind::CostLookupFailed {
                        node: node_name.clone(),
                        service: service.clone(),
                        reason: e.to_string(),
                    }));
                }
            }
        }
    }

    fn deliver(&mut self, pod_id: PodId, request: PodRequest, log: &mut Vec<Event>) {
        let seq = self.next_seq;
        self.next_seq += 1;
        let now = self.now;
        let pod = self.pods.get_mut(&pod_id).expect("delivery to a known pod");
        let host = pod.host.expect("delivery to a placed pod");
        let amount = request.memory;
        let mut active = ActiveRequest::new(seq, request, pod.config.cost_granularity, now);
        let node = &mut self.nodes[host.0];
        let ticket = MemTicket {
            pod: pod_id,
            request: seq,
            amount,
            since: now,
        };
        match node.allocate_memory(ticket) {
            MemoryGrant::Allocated => active.allocated = true,
            MemoryGrant::Pending => log.push(Event {
                time: now,
                kind: EventKind::MemoryDeferred {
                    pod: pod.name.clone(),
                    node: node.name.clone(),
                    amount,
                },
            }),
        }
        pod.active.push(active);
    }

    fn enforce_memory_cooldown(&mut self, log: &mut Vec<Event>) {
        let now = self.now;
        let mut expired = BTreeSet::new();
        for node in &self.nodes {
            for t in &node.pending_mem {
                let cooldown = self.pods[&t.pod].config.memory_cooldown;
                if cooldown > 0 && cooldown_elapsed(t.since, now, cooldown) {
                    expired.insert(t.pod);
                }
            }
        }
        for pod in expired {
            self.reschedule(pod, log);
        }
    }

    /// Abandons the pod's work, frees its host and resubmits it to the scheduler.
    fn reschedule(&mut self, pod_id: PodId, log: &mut Vec<Event>) {
        let Some(host) = self.pods[&pod_id].host else {
            return;
        };
        let abandoned: Vec<ActiveRequest> =
            std::mem::take(&mut self.pods.get_mut(&pod_id).expect("pod").active);
        self.nodes[host.0].cancel_pending(pod_id);
        let mut lost = Millicores::ZERO;
        let mut freed = Megabytes::ZERO;
        for r in &abandoned {
            self.ledger.abandoned_consumed += r.consumed();
            self.ledger.abandoned_remaining += r.remaining;
            lost += r.remaining;
            if r.allocated {
                freed += r.request.memory;
            }
        }
        let request = self.pods[&pod_id].config.cpu_request;
        self.nodes[host.0].detach(pod_id, request);
        let granted = self.nodes[host.0]
            .release_memory(freed)
            .expect("memory accounting is conserved");
        self.mark_allocated(&granted);

        let pod = self.pods.get_mut(&pod_id).expect("pod");
        pod.host = None;
        log.push(Event {
            time: self.now,
            kind: EventKind::MemoryReschedule {
                pod: pod.name.clone(),
                node: self.nodes[host.0].name.clone(),
                abandoned: lost,
            },
        });
        self.unplaced.push_back(pod_id);
        self.place_pending(log);
    }

    /// Interleaves consumption steps of every allocated request on the node,
    /// one step per request per round, until no request can progress.
    fn consume_node(&mut self, n: usize) {
        let cap = self.nodes[n].cpu_capacity();
        let hosted = self.nodes[n].hosted.clone();
        loop {
            let mut progress = false;
            for pod_id in &hosted {
                let pod = self.pods.get_mut(pod_id).expect("hosted pod");
                let node = &mut self.nodes[n];
                let step_cap = cap.min(pod.config.cpu_limit);
                let mut finished = Vec::new();
                for (i, r) in pod.active.iter_mut().enumerate() {
                    if !r.allocated {
                        continue;
                    }
                    let chunk = r.next_chunk(step_cap);
                    if chunk.is_zero() {
                        finished.push(i);
                        progress = true;
                        continue;
                    }
                    if pod.available_cpu < chunk {
                        pod.blocked = true;
                        continue;
                    }
                    match node.consume_cpu(chunk) {
                        CpuGrant::Granted => {
                            pod.available_cpu -= chunk;
                            pod.consumed_this_tick += chunk;
                            pod.consumed_since_scale += chunk;
                            r.advance(chunk);
                            self.ledger.granted += chunk;
                            progress = true;
                            if r.is_done() {
                                finished.push(i);
                            }
                        }
                        CpuGrant::Deferred => pod.blocked = true,
                    }
                }
                if finished.is_empty() {
                    continue;
                }
                let mut freed = Megabytes::ZERO;
                for i in finished.into_iter().rev() {
                    let r = pod.active.remove(i);
                    self.ledger.completed += r.request.cost;
                    self.ledger.completed_requests += 1;
                    freed += r.request.memory;
                }
                let granted = node
                    .release_memory(freed)
                    .expect("memory accounting is conserved");
                self.mark_allocated(&granted);
            }
            if !progress {
                break;
            }
        }
    }

    fn remove_drained(&mut self, log: &mut Vec<Event>) {
        let drained: Vec<PodId> = self
            .pods
            .values()
            .filter(|p| p.terminating && p.active.is_empty())
            .map(|p| p.id)
            .collect();
        for id in drained {
            let pod = self.pods.remove(&id).expect("pod");
            let node_name = match pod.host {
                Some(host) => {
                    self.nodes[host.0].detach(id, pod.config.cpu_request);
                    self.nodes[host.0].name.clone()
                }
                None => String::new(),
            };
            log.push(self.event(EventKind::PodRemoved { pod: pod.name, node: node_name }));
        }
    }

    fn sample(&mut self) {
        let now = self.now;
        let mut samples = Vec::with_capacity(self.pods.len() + self.nodes.len() + self.services.len());
        let mut per_service: BTreeMap<&str, (Millicores, Megabytes)> = self
            .services
            .keys()
            .map(|s| (s.as_str(), (Millicores::ZERO, Megabytes::ZERO)))
            .collect();
        for pod in self.pods.values() {
            let mem = pod.held_memory();
            let entry = per_service.entry(pod.service.as_str()).or_default();
            entry.0 += pod.consumed_this_tick;
            entry.1 += mem;
            samples.push(MetricSample {
                time: now,
                entity: EntityKey::new(EntityKind::Pod, pod.name.clone()),
                service: Some(pod.service.clone()),
                cpu: pod.consumed_this_tick,
                mem,
            });
        }
        for (service, (cpu, mem)) in per_service {
            samples.push(MetricSample {
                time: now,
                entity: EntityKey::new(EntityKind::Service, service),
                service: Some(service.to_string()),
                cpu,
                mem,
            });
        }
        for node in &self.nodes {
            samples.push(MetricSample {
                time: now,
                entity: EntityKey::new(EntityKind::Node, node.name.clone()),
                service: None,
                cpu: node.granted_this_tick,
                mem: node.used_mem(),
            });
        }
        self.monitor
            .record_tick(samples)
            .expect("one sample per entity per tick");
    }
}
