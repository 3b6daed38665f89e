//! Optimal provisional schedules.
//!
//! [`ops_place`] is the weight-ordered placement procedure: each packet takes
//! the latest free slot it can still make, heavier packets first. The
//! placed packets are then ordered by virtual deadline and compacted into
//! slots `0..k`, after which [`reassign_virtual_deadlines`] pins slot `i` to
//! step `now + i`.

use std::cmp::Ordering;

use crate::error::BudgetExceeded;
use crate::model::{QueuedPacket, TimeStep};
use crate::weight::Weight;

pub const BRUTE_FORCE_LIMIT: usize = 20;

/// Packets in slot order; slot `i` is a tentative send at `now + i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProvisionalQueue {
    now: TimeStep,
    capacity: usize,
    slots: Vec<QueuedPacket>,
}

impl ProvisionalQueue {
    pub fn empty(now: TimeStep, capacity: usize) -> Self {
        ProvisionalQueue { now, capacity, slots: Vec::new() }
    }

    pub fn now(&self) -> TimeStep {
        self.now
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn packets(&self) -> &[QueuedPacket] {
        &self.slots
    }

    pub fn into_packets(self) -> Vec<QueuedPacket> {
        self.slots
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    pub fn total_weight(&self) -> Weight {
        self.slots.iter().map(|q| q.weight()).sum()
    }

    /// Slot `i` holds a packet whose virtual deadline is at least `now + i`,
    /// and the queue fits the buffer.
    pub fn respects_deadlines(&self) -> bool {
        self.slots.len() <= self.capacity
            && self.slots.iter().enumerate().all(|(i, q)| self.now + i as u64 <= q.virtual_deadline)
    }

    /// Virtual deadlines are exactly `now, now + 1, ..`.
    pub fn is_compact(&self) -> bool {
        self.slots.iter().enumerate().all(|(i, q)| q.virtual_deadline == self.now + i as u64)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Placement {
    pub queue: ProvisionalQueue,
    pub discarded: Vec<QueuedPacket>,
}

/// Placement priority: heavier first, then larger virtual deadline, then
/// smaller id.
fn placement_order(a: &QueuedPacket, b: &QueuedPacket) -> Ordering {
    b.weight()
        .cmp(&a.weight())
        .then(b.virtual_deadline.cmp(&a.virtual_deadline))
        .then(a.id().cmp(&b.id()))
}

/// Final slot order: earlier virtual deadline, then heavier, then smaller id.
fn slot_order(a: &QueuedPacket, b: &QueuedPacket) -> Ordering {
    a.virtual_deadline
        .cmp(&b.virtual_deadline)
        .then(b.weight().cmp(&a.weight()))
        .then(a.id().cmp(&b.id()))
}

/// Union-find over slots answering "latest free slot at or below x".
/// Index 0 is a sentinel meaning no slot is free; slot `s` lives at `s + 1`.
struct FreeSlots {
    parent: Vec<usize>,
}

impl FreeSlots {
    fn new(slots: usize) -> Self {
        FreeSlots { parent: (0..=slots).collect() }
    }

    fn find(&mut self, x: usize) -> usize {
        let mut root = x;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        let mut cur = x;
        while self.parent[cur] != root {
            let next = self.parent[cur];
            self.parent[cur] = root;
            cur = next;
        }
        root
    }

    /// Takes the latest free slot `<= limit`.
    fn take(&mut self, limit: usize) -> Option<usize> {
        let r = self.find(limit + 1);
        if r == 0 {
            return None;
        }
        self.parent[r] = r - 1;
        Some(r - 1)
    }
}

pub fn ops_place<I>(pending: I, now: TimeStep, capacity: usize) -> Placement
where
    I: IntoIterator<Item = QueuedPacket>,
{
    let mut order: Vec<QueuedPacket> = pending.into_iter().collect();
    order.sort_by(placement_order);
    // At most `n` slots can be used, and clamping reaches to them does not
    // change which sets fit, so the placed set is the same.
    let slots = capacity.min(order.len());
    let mut free = FreeSlots::new(slots);
    let mut placed = Vec::with_capacity(slots);
    let mut discarded = Vec::new();
    for q in order {
        let taken = if q.virtual_deadline < now || slots == 0 {
            None
        } else {
            let reach = (q.virtual_deadline - now).min(slots as u64 - 1) as usize;
            free.take(reach)
        };
        match taken {
            Some(_) => placed.push(q),
            None => discarded.push(q),
        }
    }
    placed.sort_by(slot_order);
    Placement { queue: ProvisionalQueue { now, capacity, slots: placed }, discarded }
}

pub fn reassign_virtual_deadlines(queue: ProvisionalQueue, now: TimeStep) -> ProvisionalQueue {
    let slots = queue
        .slots
        .into_iter()
        .enumerate()
        .map(|(i, q)| QueuedPacket::with_virtual_deadline(q.packet, now + i as u64))
        .collect();
    ProvisionalQueue { now, capacity: queue.capacity, slots }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProvisionalOptimum {
    pub weight: Weight,
    /// `(slot, packet)` pairs of one optimal assignment.
    pub assignment: Vec<(usize, QueuedPacket)>,
}

/// Exhaustive maximum over every subset that can be assigned injectively to
/// slots `0..capacity` with slot `<= virtual_deadline - now`. Subset
/// feasibility is decided by filling slots in virtual-deadline order.
pub fn brute_force_provisional(
    pending: &[QueuedPacket],
    now: TimeStep,
    capacity: usize,
) -> Result<ProvisionalOptimum, BudgetExceeded> {
    let n = pending.len();
    if n > BRUTE_FORCE_LIMIT {
        return Err(BudgetExceeded { what: "provisional enumeration", size: n, limit: BRUTE_FORCE_LIMIT });
    }
    let mut by_deadline: Vec<usize> = (0..n).collect();
    by_deadline.sort_by_key(|&i| (pending[i].virtual_deadline, i));

    let mut best = ProvisionalOptimum { weight: Weight::ZERO, assignment: Vec::new() };
    for mask in 0u32..(1u32 << n) {
        if mask.count_ones() as usize > capacity {
            continue;
        }
        let mut assignment = Vec::new();
        let mut weight = Weight::ZERO;
        let mut ok = true;
        for &i in &by_deadline {
            if mask & (1 << i) == 0 {
                continue;
            }
            let slot = assignment.len();
            let q = pending[i];
            if q.virtual_deadline < now || q.virtual_deadline - now < slot as u64 {
                ok = false;
                break;
            }
            weight += q.weight();
            assignment.push((slot, q));
        }
        if ok && weight > best.weight {
            best = ProvisionalOptimum { weight, assignment };
        }
    }
    Ok(best)
}
