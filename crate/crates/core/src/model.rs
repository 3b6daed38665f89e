//! Packets, instances, schedules and transmission logs.

use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{InstanceError, PacketFault};
use crate::weight::Weight;

/// 1-based integer time step.
pub type TimeStep = u64;

pub type PacketId = u64;

/// An arrival record: released at `release`, worth `weight` if sent at
/// some step in `release..=deadline`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Packet {
    pub id: PacketId,
    pub release: TimeStep,
    pub deadline: TimeStep,
    pub weight: Weight,
}

impl Packet {
    pub fn new(id: PacketId, release: TimeStep, deadline: TimeStep, weight: Weight) -> Self {
        Packet { id, release, deadline, weight }
    }

    pub fn slack(&self) -> u64 {
        self.deadline - self.release
    }

    pub fn can_send_at(&self, step: TimeStep) -> bool {
        self.release <= step && step <= self.deadline
    }
}

/// A buffered packet together with the algorithm-maintained virtual
/// deadline. The virtual deadline starts at the real deadline and only
/// ever moves down.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct QueuedPacket {
    pub packet: Packet,
    pub virtual_deadline: TimeStep,
}

impl QueuedPacket {
    pub fn arriving(packet: Packet) -> Self {
        QueuedPacket { packet, virtual_deadline: packet.deadline }
    }

    pub fn with_virtual_deadline(packet: Packet, virtual_deadline: TimeStep) -> Self {
        QueuedPacket { packet, virtual_deadline }
    }

    pub fn id(&self) -> PacketId {
        self.packet.id
    }

    pub fn weight(&self) -> Weight {
        self.packet.weight
    }
}

/// What an algorithm delivered in one step. `Null` is the absent packet:
/// it is worth nothing and never sits in a buffer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Delivery {
    Packet(Packet),
    Null,
}

impl Delivery {
    pub fn weight(&self) -> Weight {
        match self {
            Delivery::Packet(p) => p.weight,
            Delivery::Null => Weight::ZERO,
        }
    }

    pub fn packet(&self) -> Option<&Packet> {
        match self {
            Delivery::Packet(p) => Some(p),
            Delivery::Null => None,
        }
    }

    pub fn is_null(&self) -> bool {
        matches!(self, Delivery::Null)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ScheduleEntry {
    pub step: TimeStep,
    pub packet: PacketId,
}

/// A send plan: which packet goes out at which step. Not validated on
/// construction; see [`crate::verify::verify_schedule`].
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Schedule {
    entries: Vec<ScheduleEntry>,
}

impl Schedule {
    pub fn new() -> Self {
        Schedule::default()
    }

    pub fn from_entries(mut entries: Vec<ScheduleEntry>) -> Self {
        entries.sort();
        Schedule { entries }
    }

    pub fn push(&mut self, step: TimeStep, packet: PacketId) {
        let entry = ScheduleEntry { step, packet };
        let at = self.entries.partition_point(|e| *e <= entry);
        self.entries.insert(at, entry);
    }

    pub fn entries(&self) -> &[ScheduleEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Copy of this schedule without the entry at `index`.
    pub fn without(&self, index: usize) -> Schedule {
        let mut entries = self.entries.clone();
        entries.remove(index);
        Schedule { entries }
    }

    /// Exact total weight of the scheduled packets; unknown ids count zero.
    pub fn total_weight(&self, instance: &Instance) -> Weight {
        let index = instance.index();
        self.entries
            .iter()
            .filter_map(|e| index.get(&e.packet))
            .map(|p| p.weight)
            .sum()
    }
}

/// A finite-queue instance: buffer capacity plus the ordered arrival
/// sequence. Packets sharing a release step are processed in this order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    capacity: usize,
    packets: Vec<Packet>,
    pub reference_schedule: Option<Schedule>,
    pub reference_opt_weight: Option<Weight>,
    pub meta: BTreeMap<String, String>,
}

impl Instance {
    /// Validates capacity, step ranges, release ≤ deadline and id uniqueness.
    pub fn new(capacity: usize, packets: Vec<Packet>) -> Result<Self, InstanceError> {
        if capacity == 0 {
            return Err(InstanceError::Capacity(0));
        }
        let mut seen = HashSet::with_capacity(packets.len());
        for p in &packets {
            let fault = if p.release == 0 {
                Some(PacketFault::StepOutOfRange { field: "release", value: 0 })
            } else if p.deadline == 0 {
                Some(PacketFault::StepOutOfRange { field: "deadline", value: 0 })
            } else if p.release > p.deadline {
                Some(PacketFault::ReleaseAfterDeadline { release: p.release, deadline: p.deadline })
            } else if !seen.insert(p.id) {
                Some(PacketFault::DuplicateId)
            } else {
                None
            };
            if let Some(fault) = fault {
                return Err(InstanceError::Packet { id: p.id, line: None, fault });
            }
        }
        Ok(Instance {
            capacity,
            packets,
            reference_schedule: None,
            reference_opt_weight: None,
            meta: BTreeMap::new(),
        })
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn packets(&self) -> &[Packet] {
        &self.packets
    }

    pub fn len(&self) -> usize {
        self.packets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.packets.is_empty()
    }

    pub fn index(&self) -> HashMap<PacketId, Packet> {
        self.packets.iter().map(|p| (p.id, *p)).collect()
    }

    pub fn packet(&self, id: PacketId) -> Option<&Packet> {
        self.packets.iter().find(|p| p.id == id)
    }

    pub fn total_weight(&self) -> Weight {
        self.packets.iter().map(|p| p.weight).sum()
    }

    pub fn last_deadline(&self) -> Option<TimeStep> {
        self.packets.iter().map(|p| p.deadline).max()
    }

    /// Sub-instance holding only the listed packets, in original order.
    pub fn restricted_to(&self, keep: &HashSet<PacketId>) -> Instance {
        let packets = self.packets.iter().filter(|p| keep.contains(&p.id)).copied().collect();
        Instance {
            capacity: self.capacity,
            packets,
            reference_schedule: None,
            reference_opt_weight: None,
            meta: BTreeMap::new(),
        }
    }

    pub fn with_reference(mut self, schedule: Schedule, weight: Weight) -> Self {
        self.reference_schedule = Some(schedule);
        self.reference_opt_weight = Some(weight);
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transmission {
    pub step: TimeStep,
    pub packet_id: PacketId,
    pub weight: Weight,
}

/// Deliveries in step order; each packet at most once.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TransmissionLog {
    entries: Vec<Transmission>,
}

impl TransmissionLog {
    pub fn new() -> Self {
        TransmissionLog::default()
    }

    /// Appends a delivery. Panics if `step` does not exceed the previous
    /// step; callers only ever append in simulation order.
    pub fn record(&mut self, step: TimeStep, packet: &Packet) {
        if let Some(last) = self.entries.last() {
            assert!(step > last.step, "log steps must strictly increase");
        }
        self.entries.push(Transmission { step, packet_id: packet.id, weight: packet.weight });
    }

    pub fn from_entries(entries: Vec<Transmission>) -> Self {
        TransmissionLog { entries }
    }

    pub fn entries(&self) -> &[Transmission] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn to_schedule(&self) -> Schedule {
        Schedule::from_entries(
            self.entries
                .iter()
                .map(|t| ScheduleEntry { step: t.step, packet: t.packet_id })
                .collect(),
        )
    }

    /// Builds the log an offline schedule would produce.
    pub fn from_schedule(schedule: &Schedule, instance: &Instance) -> TransmissionLog {
        let index = instance.index();
        let entries = schedule
            .entries()
            .iter()
            .filter_map(|e| {
                index.get(&e.packet).map(|p| Transmission {
                    step: e.step,
                    packet_id: p.id,
                    weight: p.weight,
                })
            })
            .collect();
        TransmissionLog { entries }
    }
}

/// Exact sum of the logged weights.
pub fn total_weight(log: &TransmissionLog) -> Weight {
    log.entries.iter().map(|t| t.weight).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> Weight {
        s.parse().unwrap()
    }

    fn log_of(weights: &[&str]) -> TransmissionLog {
        let mut log = TransmissionLog::new();
        for (i, x) in weights.iter().enumerate() {
            log.record(i as u64 + 1, &Packet::new(i as u64, 1, 10, w(x)));
        }
        log
    }

    #[test]
    fn total_weight_examples() {
        assert_eq!(total_weight(&TransmissionLog::new()), Weight::ZERO);
        assert_eq!(total_weight(&log_of(&["1.5", "0.5"])), Weight::from_integer(2));
        assert_eq!(total_weight(&log_of(&["1", "1", "1.01"])), w("301/100"));
    }

    #[test]
    fn instance_validation() {
        assert!(matches!(Instance::new(0, vec![]), Err(InstanceError::Capacity(0))));
        let bad = Packet::new(7, 5, 4, w("1"));
        match Instance::new(1, vec![bad]) {
            Err(InstanceError::Packet { id: 7, fault: PacketFault::ReleaseAfterDeadline { .. }, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
        let dup = vec![Packet::new(1, 1, 2, w("1")), Packet::new(1, 2, 3, w("1"))];
        assert!(matches!(
            Instance::new(1, dup),
            Err(InstanceError::Packet { id: 1, fault: PacketFault::DuplicateId, .. })
        ));
    }

    #[test]
    fn null_delivery_is_worthless() {
        assert_eq!(Delivery::Null.weight(), Weight::ZERO);
        assert!(Delivery::Null.packet().is_none());
    }

    #[test]
    #[should_panic(expected = "strictly increase")]
    fn log_rejects_out_of_order_steps() {
        let mut log = TransmissionLog::new();
        let p = Packet::new(0, 1, 9, w("1"));
        log.record(3, &p);
        log.record(3, &Packet::new(1, 1, 9, w("1")));
    }
}
