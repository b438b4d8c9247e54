use std::collections::VecDeque;

use thiserror::Error;

use crate::ids::{NodeId, PodId};
use crate::model::NodeImage;
use crate::traffic::NodeRequest;
use crate::units::{Megabytes, Millicores};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NodeError {
    #[error("releasing {amount} MB on {node} would exceed its memory capacity")]
    ReleaseOverflow { node: String, amount: Megabytes },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CpuGrant {
    Granted,
    /// Not enough budget left this interval; retry the whole step later.
    Deferred,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MemoryGrant {
    Allocated,
    Pending,
}

/// A memory allocation waiting in a node's FIFO.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MemTicket {
    pub pod: PodId,
    pub request: u64,
    pub amount: Megabytes,
    /// Tick at which the allocation was first attempted.
    pub since: u64,
}

#[derive(Debug, Clone)]
pub struct NodeState {
    pub id: NodeId,
    pub name: String,
    pub image: NodeImage,
    /// Millicores left in the current interval.
    pub cpu_budget: Millicores,
    pub free_mem: Megabytes,
    /// CPU reserved by the scheduler for hosted pods.
    pub reserved_cpu: Millicores,
    /// Hosted pods, sorted by id.
    pub hosted: Vec<PodId>,
    pub inbound: Vec<NodeRequest>,
    pub pending_mem: VecDeque<MemTicket>,
    /// Millicores granted since the last replenish.
    pub granted_this_tick: Millicores,
}

impl NodeState {
    pub fn new(id: NodeId, name: impl Into<String>, image: NodeImage) -> Self {
        Self {
            id,
            name: name.into(),
            cpu_budget: image.cpu_capacity,
            free_mem: image.mem_capacity,
            image,
            reserved_cpu: Millicores::ZERO,
            hosted: Vec::new(),
            inbound: Vec::new(),
            pending_mem: VecDeque::new(),
            granted_this_tick: Millicores::ZERO,
        }
    }

    pub fn cpu_capacity(&self) -> Millicores {
        self.image.cpu_capacity
    }

    pub fn mem_capacity(&self) -> Megabytes {
        self.image.mem_capacity
    }

    pub fn used_mem(&self) -> Megabytes {
        self.mem_capacity() - self.free_mem
    }

    pub fn replenish(&mut self) {
        self.cpu_budget = self.cpu_capacity();
        self.granted_this_tick = Millicores::ZERO;
    }

    /// Grants `amount` from this interval's budget, or defers it entirely.
    pub fn consume_cpu(&mut self, amount: Millicores) -> CpuGrant {
        debug_assert!(!amount.is_negative());
        if self.cpu_budget >= amount {
            self.cpu_budget -= amount;
            self.granted_this_tick += amount;
            debug_assert!(self.granted_this_tick <= self.cpu_capacity());
            CpuGrant::Granted
        } else {
            CpuGrant::Deferred
        }
    }

    /// Allocates immediately when memory is free and nobody is queued ahead;
    /// otherwise queues the ticket.
    pub fn allocate_memory(&mut self, ticket: MemTicket) -> MemoryGrant {
        let fits = ticket.amount <= self.free_mem;
        if ticket.amount.is_zero() || (fits && self.pending_mem.is_empty()) {
            self.free_mem -= ticket.amount;
            MemoryGrant::Allocated
        } else {
            self.pending_mem.push_back(ticket);
            MemoryGrant::Pending
        }
    }

    /// Returns memory and hands it to queued tickets in FIFO order. The
    /// returned tickets are now allocated.
    pub fn release_memory(&mut self, amount: Megabytes) -> Result<Vec<MemTicket>, NodeError> {
        if self.free_mem + amount > self.mem_capacity() {
            return Err(NodeError::ReleaseOverflow {
                node: self.name.clone(),
                amount,
            });
        }
        self.free_mem += amount;
        Ok(self.retry_pending())
    }

    /// Allocates queued tickets from the head while they fit.
    pub fn retry_pending(&mut self) -> Vec<MemTicket> {
        let mut granted = Vec::new();
        while let Some(head) = self.pending_mem.front() {
            if head.amount > self.free_mem {
                break;
            }
            self.free_mem -= head.amount;
            granted.extend(self.pending_mem.pop_front());
        }
        granted
    }

    /// Drops every queued ticket of `pod`.
    pub fn cancel_pending(&mut self, pod: PodId) -> Vec<MemTicket> {
        let (cancelled, kept): (Vec<_>, Vec<_>) =
            self.pending_mem.drain(..).partition(|t| t.pod == pod);
        self.pending_mem = kept.into();
        cancelled
    }

    pub fn attach(&mut self, pod: PodId, cpu_request: Millicores) {
        if let Err(pos) = self.hosted.binary_search(&pod) {
            self.hosted.insert(pos, pod);
            self.reserved_cpu += cpu_request;
        }
    }

    pub fn detach(&mut self, pod: PodId, cpu_request: Millicores) {
        if let Ok(pos) = self.hosted.binary_search(&pod) {
            self.hosted.remove(pos);
            self.reserved_cpu -= cpu_request;
        }
    }
}
