//! The step loop: arrivals (in instance order), at most one delivery, then
//! expiry, for every step from the first release until the buffer drains.

use std::collections::HashMap;
use std::fmt;

use crate::golden::{GoldenNumber, Scaler};
use crate::model::{Instance, Packet, PacketId, QueuedPacket, TimeStep, TransmissionLog};
use crate::schedulers::me::{Branch, Decision};
use crate::schedulers::rng::{BetaSource, RandomSource};
use crate::schedulers::{Algorithm, EdfScheduler, GreedyScheduler, MeScheduler, SchedulerParams};
use crate::verify::verify_schedule;
use crate::weight::Weight;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Checks {
    #[default]
    Off,
    /// Record every violation and keep going.
    Collect,
    /// Stop at the first violation.
    Enforce,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DropReason {
    /// Refused on arrival.
    Rejected,
    /// Pushed out by a later arrival.
    Evicted,
    /// Deadline (virtual, for ME/RME) reached without being sent.
    Expired,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DropRecord {
    pub step: TimeStep,
    pub packet_id: PacketId,
    pub reason: DropReason,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum InvariantRule {
    /// Virtual deadlines are `now, now + 1, ..` after the arrival phase.
    Compact,
    /// `release <= virtual deadline <= deadline`.
    VirtualDeadlineRange,
    /// A virtual deadline went up.
    VirtualDeadlineIncreased,
    /// For a queued packet j, `min { w_i : t_i <= t_j }` went down between
    /// two consecutive arrival phases.
    PrefixMinimum,
    BufferBound,
    /// Sent outside `release..=deadline`.
    RealDeadline,
    /// ME sent less than `max(w_e, w_h / α)`.
    DeliveryGuard,
    /// RME's expected gain fell below `w_h / φ`.
    RmeExpectation,
    /// The final log failed schedule verification.
    LogVerification,
}

impl InvariantRule {
    pub fn name(&self) -> &'static str {
        match self {
            InvariantRule::Compact => "compact-virtual-deadlines",
            InvariantRule::VirtualDeadlineRange => "virtual-deadline-range",
            InvariantRule::VirtualDeadlineIncreased => "virtual-deadline-increased",
            InvariantRule::PrefixMinimum => "prefix-minimum",
            InvariantRule::BufferBound => "buffer-bound",
            InvariantRule::RealDeadline => "real-deadline",
            InvariantRule::DeliveryGuard => "delivery-guard",
            InvariantRule::RmeExpectation => "rme-expectation",
            InvariantRule::LogVerification => "log-verification",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InvariantViolation {
    pub step: TimeStep,
    pub rule: InvariantRule,
    pub detail: String,
    /// Buffer contents as `id:weight@deadline` at the time of the check.
    pub snapshot: String,
}

impl fmt::Display for InvariantViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} at step {}: {} [buffer {}]", self.rule.name(), self.step, self.detail, self.snapshot)
    }
}

impl std::error::Error for InvariantViolation {}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct InvariantReport {
    /// Number of individual checks evaluated.
    pub checks: u64,
    /// Steps at which RME's analytic expectation was compared with `w_h / φ`.
    pub expectation_checks: u64,
    pub violations: Vec<InvariantViolation>,
}

impl InvariantReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn count(&self, rule: InvariantRule) -> usize {
        self.violations.iter().filter(|v| v.rule == rule).count()
    }
}

#[derive(Debug, Clone)]
pub struct SimulationOutcome {
    pub log: TransmissionLog,
    pub drops: Vec<DropRecord>,
    pub report: InvariantReport,
    /// Random draws consumed (RME only).
    pub draws: u64,
}

impl SimulationOutcome {
    pub fn total_weight(&self) -> Weight {
        crate::model::total_weight(&self.log)
    }
}

enum Machine {
    Me(Box<MeScheduler>),
    Edf(EdfScheduler),
    Greedy(GreedyScheduler),
}

impl Machine {
    fn len(&self) -> usize {
        match self {
            Machine::Me(s) => s.queue().len(),
            Machine::Edf(s) => s.buffer().len(),
            Machine::Greedy(s) => s.buffer().len(),
        }
    }

    fn snapshot(&self) -> String {
        const SHOWN: usize = 12;
        let items: Vec<String> = match self {
            Machine::Me(s) => s
                .queue()
                .iter()
                .take(SHOWN)
                .map(|q| format!("{}:{}@{}", q.id(), q.weight(), q.virtual_deadline))
                .collect(),
            Machine::Edf(s) => s.buffer().iter().take(SHOWN).map(plain).collect(),
            Machine::Greedy(s) => s.buffer().iter().take(SHOWN).map(plain).collect(),
        };
        let more = self.len().saturating_sub(SHOWN);
        let tail = if more > 0 { format!(", +{more} more") } else { String::new() };
        format!("[{}{tail}]", items.join(", "))
    }
}

fn plain(p: &Packet) -> String {
    format!("{}:{}@{}", p.id, p.weight, p.deadline)
}

struct Checker {
    mode: Checks,
    capacity: usize,
    report: InvariantReport,
    alpha: Scaler,
    rme_defaults: bool,
    last_vd: HashMap<PacketId, TimeStep>,
    prefix_min: HashMap<PacketId, Weight>,
}

impl Checker {
    fn on(&self) -> bool {
        self.mode != Checks::Off
    }

    fn expect(
        &mut self,
        ok: bool,
        step: TimeStep,
        rule: InvariantRule,
        detail: impl FnOnce() -> String,
        machine: &Machine,
    ) -> Result<(), InvariantViolation> {
        self.report.checks += 1;
        if ok {
            return Ok(());
        }
        let v = InvariantViolation { step, rule, detail: detail(), snapshot: machine.snapshot() };
        if self.mode == Checks::Enforce {
            return Err(v);
        }
        self.report.violations.push(v);
        Ok(())
    }

    fn buffer_bound(&mut self, step: TimeStep, machine: &Machine) -> Result<(), InvariantViolation> {
        let (len, cap) = (machine.len(), self.capacity);
        self.expect(len <= cap, step, InvariantRule::BufferBound, || format!("{len} packets buffered, capacity {cap}"), machine)
    }

    /// Checks run once the arrival phase of `now` is over.
    fn after_arrivals(&mut self, now: TimeStep, machine: &Machine) -> Result<(), InvariantViolation> {
        let Machine::Me(me) = machine else { return Ok(()) };
        let queue: Vec<QueuedPacket> = me.queue().to_vec();
        for (i, q) in queue.iter().enumerate() {
            let want = now + i as u64;
            let vd = q.virtual_deadline;
            let id = q.id();
            self.expect(vd == want, now, InvariantRule::Compact, || format!("packet {id} at slot {i} has virtual deadline {vd}, expected {want}"), machine)?;
            let (r, d) = (q.packet.release, q.packet.deadline);
            self.expect(r <= vd && vd <= d, now, InvariantRule::VirtualDeadlineRange, || format!("packet {id}: virtual deadline {vd} outside [{r}, {d}]"), machine)?;
            let previous = self.last_vd.insert(id, vd).unwrap_or(d);
            self.expect(vd <= previous, now, InvariantRule::VirtualDeadlineIncreased, || format!("packet {id}: virtual deadline rose from {previous} to {vd}"), machine)?;
        }
        let mut minima = HashMap::with_capacity(queue.len());
        let mut running: Option<Weight> = None;
        for q in &queue {
            let m = running.map_or(q.weight(), |r| r.min(q.weight()));
            running = Some(m);
            minima.insert(q.id(), m);
            if let Some(&before) = self.prefix_min.get(&q.id()) {
                let id = q.id();
                self.expect(m >= before, now, InvariantRule::PrefixMinimum, || format!("packet {id}: minimum weight at or before it fell from {before} to {m}"), machine)?;
            }
        }
        self.prefix_min = minima;
        Ok(())
    }

    fn after_delivery(
        &mut self,
        now: TimeStep,
        sent: &Packet,
        decision: Option<&Decision>,
        randomized: bool,
        machine: &Machine,
    ) -> Result<(), InvariantViolation> {
        let (id, r, d) = (sent.id, sent.release, sent.deadline);
        self.expect(sent.can_send_at(now), now, InvariantRule::RealDeadline, || format!("packet {id} sent outside [{r}, {d}]"), machine)?;
        let Some(dec) = decision else { return Ok(()) };
        let (we, wh, ws) = (dec.earliest.weight(), dec.heaviest.weight(), sent.weight);
        if !randomized {
            let ok = ws >= we && self.alpha.scaled_ge(ws, wh);
            self.expect(ok, now, InvariantRule::DeliveryGuard, || format!("sent {ws} with w_e = {we}, w_h = {wh}"), machine)?;
        } else if self.rme_defaults {
            self.report.expectation_checks += 1;
            let phi = GoldenNumber::phi();
            let h = GoldenNumber::from_weight(wh);
            let expected = if dec.branch == Branch::Guard {
                GoldenNumber::from_weight(we)
            } else {
                let gamma = GoldenNumber::inv_phi_squared();
                let rest = &GoldenNumber::one() - &gamma;
                &(&gamma * &GoldenNumber::from_weight(we)) + &(&rest * &h)
            };
            let ok = &phi * &expected >= h;
            self.expect(ok, now, InvariantRule::RmeExpectation, || format!("expected gain {expected} below w_h/phi with w_e = {we}, w_h = {wh}"), machine)?;
        }
        Ok(())
    }
}

/// Runs `algorithm` over `instance`. With checks enabled the invariant
/// suite runs at every phase boundary and the final log is verified.
pub fn simulate(
    instance: &Instance,
    algorithm: Algorithm,
    params: &SchedulerParams,
    rng: &mut dyn BetaSource,
    checks: Checks,
) -> Result<SimulationOutcome, InvariantViolation> {
    let capacity = instance.capacity();
    let mut machine = match algorithm {
        Algorithm::Me => Machine::Me(Box::new(MeScheduler::new(capacity, params))),
        Algorithm::Rme => Machine::Me(Box::new(MeScheduler::randomized(capacity, params))),
        Algorithm::Edf => Machine::Edf(EdfScheduler::new(capacity)),
        Algorithm::Greedy => Machine::Greedy(GreedyScheduler::new(capacity)),
    };
    let mut checker = Checker {
        mode: checks,
        capacity,
        report: InvariantReport::default(),
        alpha: Scaler::new(params.alpha.clone()),
        rme_defaults: params.is_rme_default(),
        last_vd: HashMap::new(),
        prefix_min: HashMap::new(),
    };
    let draws_before = rng.draws();

    let mut arrivals: Vec<Packet> = instance.packets().to_vec();
    arrivals.sort_by_key(|p| p.release);
    let mut log = TransmissionLog::new();
    let mut drops = Vec::new();
    let mut next = 0;
    let mut now: TimeStep = arrivals.first().map_or(1, |p| p.release);

    while next < arrivals.len() || machine.len() > 0 {
        if machine.len() == 0 && arrivals[next].release > now {
            now = arrivals[next].release;
        }

        let mut arrived = false;
        while next < arrivals.len() && arrivals[next].release == now {
            let p = arrivals[next];
            next += 1;
            arrived = true;
            let left: Vec<PacketId> = match &mut machine {
                Machine::Me(s) => s.on_arrival(p, now).into_iter().map(|q| q.id()).collect(),
                Machine::Edf(s) => s.on_arrival(p).into_iter().map(|q| q.id).collect(),
                Machine::Greedy(s) => s.on_arrival(p, now).into_iter().map(|q| q.id).collect(),
            };
            for id in left {
                let reason = if id == p.id { DropReason::Rejected } else { DropReason::Evicted };
                drops.push(DropRecord { step: now, packet_id: id, reason });
            }
            if checker.on() {
                checker.buffer_bound(now, &machine)?;
            }
        }
        if arrived && checker.on() {
            checker.after_arrivals(now, &machine)?;
        }

        let (sent, decision) = match &mut machine {
            Machine::Me(s) => {
                let d = s.select_delivery(now, rng);
                (d.map(|d| d.sent.packet), d)
            }
            Machine::Edf(s) => (s.select_delivery(now), None),
            Machine::Greedy(s) => (s.select_delivery(now), None),
        };
        if let Some(p) = sent {
            log.record(now, &p);
            if checker.on() {
                checker.after_delivery(now, &p, decision.as_ref(), algorithm.is_randomized(), &machine)?;
                checker.buffer_bound(now, &machine)?;
            }
        }

        let expired: Vec<PacketId> = match &mut machine {
            Machine::Me(s) => s.expire(now).into_iter().map(|q| q.id()).collect(),
            Machine::Edf(s) => s.expire(now).into_iter().map(|p| p.id).collect(),
            Machine::Greedy(s) => s.expire(now).into_iter().map(|p| p.id).collect(),
        };
        drops.extend(expired.into_iter().map(|id| DropRecord { step: now, packet_id: id, reason: DropReason::Expired }));
        if checker.on() {
            checker.buffer_bound(now, &machine)?;
        }
        now += 1;
    }

    if checker.on() {
        let verdict = verify_schedule(instance, &log.to_schedule()).map(|v| v.to_string());
        let ok = matches!(verdict.as_deref(), Ok("ok"));
        let detail = match verdict {
            Ok(text) => text,
            Err(e) => e.to_string(),
        };
        checker.expect(ok, now, InvariantRule::LogVerification, || detail, &machine)?;
    }

    Ok(SimulationOutcome { log, drops, report: checker.report, draws: rng.draws() - draws_before })
}

/// [`simulate`] with a ChaCha8 source seeded by `seed`.
pub fn simulate_seeded(
    instance: &Instance,
    algorithm: Algorithm,
    params: &SchedulerParams,
    seed: u64,
    checks: Checks,
) -> Result<SimulationOutcome, InvariantViolation> {
    simulate(instance, algorithm, params, &mut RandomSource::new(seed), checks)
}
