//! Best-effort Greedy: keep the optimal provisional schedule under real
//! deadlines and always send its heaviest packet.

use std::cmp::Reverse;

use crate::model::{Packet, QueuedPacket, TimeStep};
use crate::provisional::ops_place;

#[derive(Debug, Clone)]
pub struct GreedyScheduler {
    capacity: usize,
    buffer: Vec<Packet>,
}

impl GreedyScheduler {
    pub fn new(capacity: usize) -> Self {
        GreedyScheduler { capacity, buffer: Vec::with_capacity(capacity) }
    }

    pub fn buffer(&self) -> &[Packet] {
        &self.buffer
    }

    /// Re-places buffer plus arrival by real deadline; returns what no
    /// longer fits.
    pub fn on_arrival(&mut self, packet: Packet, now: TimeStep) -> Vec<Packet> {
        let pending = self.buffer.drain(..).chain(std::iter::once(packet)).map(QueuedPacket::arriving);
        let placement = ops_place(pending, now, self.capacity);
        self.buffer = placement.queue.packets().iter().map(|q| q.packet).collect();
        placement.discarded.into_iter().map(|q| q.packet).collect()
    }

    /// Removes and returns the heaviest packet (ties: earlier deadline, then
    /// smaller id).
    pub fn select_delivery(&mut self, _now: TimeStep) -> Option<Packet> {
        let i = self
            .buffer
            .iter()
            .enumerate()
            .min_by_key(|(_, p)| (Reverse(p.weight), p.deadline, p.id))
            .map(|(i, _)| i)?;
        Some(self.buffer.remove(i))
    }

    pub fn expire(&mut self, now: TimeStep) -> Vec<Packet> {
        let (gone, keep) = self.buffer.drain(..).partition(|p| p.deadline <= now);
        self.buffer = keep;
        gone
    }
}
