//! ME and its randomized variant RME.
//!
//! Both keep the buffer as a provisional queue with virtual deadlines. On
//! every arrival the optimal provisional schedule is recomputed and the
//! virtual deadlines are re-pinned to `now, now + 1, ..`. On delivery, `e`
//! (earliest virtual deadline) is sent if `α·w_e >= w_h`; otherwise ME sends
//! `h` (heaviest, ties to earliest virtual deadline) and RME sends `e` with
//! probability γ and `h` otherwise.

use crate::golden::Scaler;
use crate::model::{Packet, QueuedPacket, TimeStep};
use crate::provisional::{ops_place, reassign_virtual_deadlines};
use crate::schedulers::rng::{dyadic_threshold, BetaSource};
use crate::schedulers::SchedulerParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    /// The guard held and `e` was sent without a draw.
    Guard,
    /// ME only: the guard failed and `h` was sent.
    Heaviest,
    /// RME: the guard failed and β ≤ γ.
    DrawEarliest,
    /// RME: the guard failed and β > γ.
    DrawHeaviest,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Decision {
    pub sent: QueuedPacket,
    pub earliest: QueuedPacket,
    pub heaviest: QueuedPacket,
    pub branch: Branch,
}

#[derive(Debug, Clone)]
pub struct MeScheduler {
    capacity: usize,
    alpha: Scaler,
    /// Present for RME: largest β bit pattern that still counts as β ≤ γ.
    gamma_threshold: Option<u64>,
    /// Sorted by virtual deadline, all distinct.
    queue: Vec<QueuedPacket>,
}

impl MeScheduler {
    pub fn new(capacity: usize, params: &SchedulerParams) -> Self {
        MeScheduler { capacity, alpha: Scaler::new(params.alpha.clone()), gamma_threshold: None, queue: Vec::new() }
    }

    pub fn randomized(capacity: usize, params: &SchedulerParams) -> Self {
        let threshold = dyadic_threshold(&params.gamma).expect("gamma validated non-negative");
        MeScheduler { gamma_threshold: Some(threshold), ..MeScheduler::new(capacity, params) }
    }

    pub fn is_randomized(&self) -> bool {
        self.gamma_threshold.is_some()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn queue(&self) -> &[QueuedPacket] {
        &self.queue
    }

    /// Admits `packet` (released at `now`) and returns every packet that
    /// left the buffer, possibly including `packet` itself.
    pub fn on_arrival(&mut self, packet: Packet, now: TimeStep) -> Vec<QueuedPacket> {
        debug_assert_eq!(packet.release, now);
        let pending = self.queue.drain(..).chain(std::iter::once(QueuedPacket::arriving(packet)));
        let placement = ops_place(pending, now, self.capacity);
        self.queue = reassign_virtual_deadlines(placement.queue, now).into_packets();
        placement.discarded
    }

    /// `α·w_e >= w_h`.
    pub fn guard_holds(&self, earliest: &QueuedPacket, heaviest: &QueuedPacket) -> bool {
        self.alpha.scaled_ge(earliest.weight(), heaviest.weight())
    }

    /// Picks and removes the packet to send, or `None` on an empty buffer.
    /// Draws from `rng` only when RME's guard fails.
    pub fn select_delivery(&mut self, _now: TimeStep, rng: &mut dyn BetaSource) -> Option<Decision> {
        let earliest = *self.queue.first()?;
        let mut h = 0;
        for (i, q) in self.queue.iter().enumerate().skip(1) {
            if q.weight() > self.queue[h].weight() {
                h = i;
            }
        }
        let heaviest = self.queue[h];
        let (index, branch) = if self.guard_holds(&earliest, &heaviest) {
            (0, Branch::Guard)
        } else {
            match self.gamma_threshold {
                None => (h, Branch::Heaviest),
                Some(threshold) if rng.next_bits() <= threshold => (0, Branch::DrawEarliest),
                Some(_) => (h, Branch::DrawHeaviest),
            }
        };
        let sent = self.queue.remove(index);
        Some(Decision { sent, earliest, heaviest, branch })
    }

    /// Drops packets whose virtual deadline is `<= now`.
    pub fn expire(&mut self, now: TimeStep) -> Vec<QueuedPacket> {
        let cut = self.queue.partition_point(|q| q.virtual_deadline <= now);
        self.queue.drain(..cut).collect()
    }
}
