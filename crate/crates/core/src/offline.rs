//! Offline optima.
//!
//! A packet set is feasible when every member can be sent inside its window
//! while the buffer never holds more than `capacity` of them, counting each
//! from its release through its send step. Sending the earliest deadline
//! first decides this: it sends as early and as urgently as any schedule can.

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::fmt;

use crate::error::BudgetExceeded;
use crate::model::{Instance, Packet, PacketId, Schedule, ScheduleEntry, TimeStep};
use crate::weight::Weight;

pub const ORACLE_LIMIT: usize = 18;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Infeasibility {
    /// More members present than the buffer holds.
    Overflow { step: TimeStep, present: usize },
    /// A member's deadline passed before it could be sent.
    Missed { step: TimeStep, packet: PacketId },
}

impl fmt::Display for Infeasibility {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Infeasibility::Overflow { step, present } => write!(f, "capacity step {step}: {present} packets present"),
            Infeasibility::Missed { step, packet } => write!(f, "deadline step {step}: packet {packet} cannot be sent in time"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeasibilityVerdict {
    /// Earliest-deadline-first send plan when the set is feasible.
    pub witness: Option<Schedule>,
    pub failure: Option<Infeasibility>,
}

impl FeasibilityVerdict {
    pub fn is_feasible(&self) -> bool {
        self.failure.is_none()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OfflineSolution {
    pub weight: Weight,
    pub schedule: Schedule,
}

/// EDF pass over `members` (sorted by release). Pushes sends into `plan`
/// when given.
fn edf_pass(members: &[Packet], capacity: usize, mut plan: Option<&mut Vec<ScheduleEntry>>) -> Option<Infeasibility> {
    let mut pending: BinaryHeap<Reverse<(TimeStep, Reverse<Weight>, PacketId)>> = BinaryHeap::new();
    let mut next = 0;
    let mut now: TimeStep = 0;
    while next < members.len() || !pending.is_empty() {
        if pending.is_empty() {
            now = now.max(members[next].release);
        }
        while next < members.len() && members[next].release <= now {
            let p = &members[next];
            pending.push(Reverse((p.deadline, Reverse(p.weight), p.id)));
            next += 1;
        }
        if pending.len() > capacity {
            return Some(Infeasibility::Overflow { step: now, present: pending.len() });
        }
        let Reverse((deadline, _, id)) = pending.pop().expect("non-empty");
        if deadline < now {
            return Some(Infeasibility::Missed { step: now, packet: id });
        }
        if let Some(plan) = plan.as_deref_mut() {
            plan.push(ScheduleEntry { step: now, packet: id });
        }
        now += 1;
    }
    None
}

fn by_release(packets: impl IntoIterator<Item = Packet>) -> Vec<Packet> {
    let mut v: Vec<Packet> = packets.into_iter().collect();
    v.sort_by_key(|p| (p.release, p.id));
    v
}

pub fn feasible(packets: &[Packet], capacity: usize) -> FeasibilityVerdict {
    let members = by_release(packets.iter().copied());
    let mut plan = Vec::with_capacity(members.len());
    match edf_pass(&members, capacity, Some(&mut plan)) {
        None => FeasibilityVerdict { witness: Some(Schedule::from_entries(plan)), failure: None },
        Some(f) => FeasibilityVerdict { witness: None, failure: Some(f) },
    }
}

fn solution(members: &[Packet], capacity: usize) -> OfflineSolution {
    let members = by_release(members.iter().copied());
    let mut plan = Vec::with_capacity(members.len());
    let failure = edf_pass(&members, capacity, Some(&mut plan));
    assert!(failure.is_none(), "solution built from an infeasible set");
    OfflineSolution { weight: members.iter().map(|p| p.weight).sum(), schedule: Schedule::from_entries(plan) }
}

/// Exhaustive maximum over all subsets. Among optimal subsets the one whose
/// sorted id list is lexicographically smallest is returned.
pub fn oracle_opt(instance: &Instance) -> Result<OfflineSolution, BudgetExceeded> {
    let n = instance.len();
    if n > ORACLE_LIMIT {
        return Err(BudgetExceeded { what: "offline oracle", size: n, limit: ORACLE_LIMIT });
    }
    let capacity = instance.capacity();
    let all = by_release(instance.packets().iter().copied());
    let mut ids: Vec<PacketId> = all.iter().map(|p| p.id).collect();
    ids.sort();

    let mut best_weight = Weight::ZERO;
    let mut best_ids: Vec<PacketId> = Vec::new();
    let mut members = Vec::with_capacity(n);
    for mask in 0u32..(1u32 << n) {
        members.clear();
        members.extend((0..n).filter(|i| mask & (1 << i) != 0).map(|i| all[i]));
        let weight: Weight = members.iter().map(|p| p.weight).sum();
        if weight < best_weight {
            continue;
        }
        if edf_pass(&members, capacity, None).is_some() {
            continue;
        }
        let mut chosen: Vec<PacketId> = members.iter().map(|p| p.id).collect();
        chosen.sort();
        if weight > best_weight || chosen < best_ids {
            best_weight = weight;
            best_ids = chosen;
        }
    }
    let index = instance.index();
    let best: Vec<Packet> = best_ids.iter().map(|id| index[id]).collect();
    Ok(solution(&best, capacity))
}

/// Weight-ordered greedy (ties: earlier deadline, then smaller id) keeping
/// each packet whose addition stays feasible. Polynomial, and exact for
/// matroids, but the buffer bound breaks the exchange property: see
/// `greedy_misses_optimum_under_buffer_bound`. Use [`oracle_opt`] as the
/// arbiter wherever it fits.
pub fn greedy_opt(instance: &Instance) -> OfflineSolution {
    let capacity = instance.capacity();
    let mut order: Vec<Packet> = instance.packets().to_vec();
    order.sort_by_key(|p| (Reverse(p.weight), p.deadline, p.id));
    let mut chosen: Vec<Packet> = Vec::new();
    for p in order {
        let at = chosen.partition_point(|q| (q.release, q.id) < (p.release, p.id));
        chosen.insert(at, p);
        if edf_pass(&chosen, capacity, None).is_some() {
            chosen.remove(at);
        }
    }
    solution(&chosen, capacity)
}
