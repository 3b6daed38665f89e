//! Earliest-deadline-first with minimum-weight eviction on overflow.

use std::cmp::Reverse;

use crate::model::{Packet, TimeStep};

#[derive(Debug, Clone)]
pub struct EdfScheduler {
    capacity: usize,
    buffer: Vec<Packet>,
}

impl EdfScheduler {
    pub fn new(capacity: usize) -> Self {
        EdfScheduler { capacity, buffer: Vec::with_capacity(capacity) }
    }

    pub fn buffer(&self) -> &[Packet] {
        &self.buffer
    }

    /// Accepts `packet` if there is room; otherwise drops the lightest of
    /// the buffer and the arrival (ties: latest deadline, then largest id)
    /// and returns it.
    pub fn on_arrival(&mut self, packet: Packet) -> Option<Packet> {
        if self.buffer.len() < self.capacity {
            self.buffer.push(packet);
            return None;
        }
        let victim_key = |p: &Packet| (p.weight, Reverse(p.deadline), Reverse(p.id));
        let worst = self.buffer.iter().enumerate().min_by_key(|(_, p)| victim_key(p)).map(|(i, _)| i);
        match worst {
            Some(i) if victim_key(&self.buffer[i]) < victim_key(&packet) => {
                Some(std::mem::replace(&mut self.buffer[i], packet))
            }
            _ => Some(packet),
        }
    }

    /// Removes and returns the earliest-deadline packet (ties: heavier, then
    /// smaller id).
    pub fn select_delivery(&mut self, _now: TimeStep) -> Option<Packet> {
        let i = self
            .buffer
            .iter()
            .enumerate()
            .min_by_key(|(_, p)| (p.deadline, Reverse(p.weight), p.id))
            .map(|(i, _)| i)?;
        Some(self.buffer.swap_remove(i))
    }

    pub fn expire(&mut self, now: TimeStep) -> Vec<Packet> {
        let (gone, keep) = self.buffer.drain(..).partition(|p| p.deadline <= now);
        self.buffer = keep;
        gone
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weight::Weight;

    fn p(id: u64, deadline: u64, weight: &str) -> Packet {
        Packet::new(id, 1, deadline, weight.parse::<Weight>().unwrap())
    }

    #[test]
    fn sends_earliest_deadline_first() {
        let mut edf = EdfScheduler::new(4);
        edf.on_arrival(p(0, 1, "0.1"));
        edf.on_arrival(p(1, 2, "0.1"));
        edf.on_arrival(p(2, 3, "0.1"));
        edf.on_arrival(p(3, 99, "1"));
        assert_eq!(edf.select_delivery(1).unwrap().id, 0);
    }

    #[test]
    fn full_buffer_of_ones_drops_lighter_arrival() {
        let mut edf = EdfScheduler::new(2);
        assert!(edf.on_arrival(p(0, 5, "1")).is_none());
        assert!(edf.on_arrival(p(1, 6, "1")).is_none());
        assert_eq!(edf.on_arrival(p(2, 3, "0.99")).unwrap().id, 2);
        assert_eq!(edf.buffer().len(), 2);
    }

    #[test]
    fn heavier_arrival_evicts_minimum() {
        let mut edf = EdfScheduler::new(2);
        edf.on_arrival(p(0, 5, "1"));
        edf.on_arrival(p(1, 6, "1"));
        assert_eq!(edf.on_arrival(p(2, 3, "2")).unwrap().id, 1);
    }

    #[test]
    fn eviction_tie_drops_latest_deadline() {
        let mut edf = EdfScheduler::new(1);
        edf.on_arrival(p(0, 5, "1"));
        assert_eq!(edf.on_arrival(p(1, 3, "1")).unwrap().id, 0);
        assert_eq!(edf.on_arrival(p(2, 3, "1")).unwrap().id, 2);
    }

    #[test]
    fn expiry_uses_real_deadline() {
        let mut edf = EdfScheduler::new(3);
        edf.on_arrival(p(0, 1, "1"));
        edf.on_arrival(p(1, 2, "1"));
        assert_eq!(edf.expire(1).len(), 1);
        assert_eq!(edf.buffer()[0].id, 1);
    }
}
