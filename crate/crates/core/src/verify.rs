//! Schedule feasibility checking.
//!
//! A scheduled packet occupies the buffer from its release step through its
//! send step inclusive; unscheduled packets occupy nothing.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use thiserror::Error;

use crate::model::{Instance, PacketId, Schedule, TimeStep};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Rule {
    /// Sent before the packet was released.
    Release { release: TimeStep },
    /// Sent after the packet's deadline.
    Deadline { deadline: TimeStep },
    /// Two sends in one step, or one packet sent twice.
    Injectivity,
    /// More packets present than the buffer holds.
    Capacity { present: usize, capacity: usize },
}

impl Rule {
    pub fn name(&self) -> &'static str {
        match self {
            Rule::Release { .. } => "release",
            Rule::Deadline { .. } => "deadline",
            Rule::Injectivity => "injectivity",
            Rule::Capacity { .. } => "capacity",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub step: TimeStep,
    pub packet: PacketId,
    pub rule: Rule,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} step {}: ", self.rule.name(), self.step)?;
        match &self.rule {
            Rule::Release { release } => {
                write!(f, "packet {} sent before its release {release}", self.packet)
            }
            Rule::Deadline { deadline } => {
                write!(f, "packet {} sent after its deadline {deadline}", self.packet)
            }
            Rule::Injectivity => write!(f, "packet {} conflicts with another send", self.packet),
            Rule::Capacity { present, capacity } => write!(
                f,
                "{present} packets present, capacity {capacity} (packet {} arriving)",
                self.packet
            ),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Verdict {
    pub violations: Vec<Violation>,
}

impl Verdict {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_ok() {
            return f.write_str("ok");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("schedule refers to unknown packet {0}")]
pub struct UnknownPacket(pub PacketId);

/// Checks release/deadline windows, injectivity and buffer occupancy.
pub fn verify_schedule(instance: &Instance, schedule: &Schedule) -> Result<Verdict, UnknownPacket> {
    let index = instance.index();
    let mut violations = Vec::new();
    let mut step_used: HashMap<TimeStep, PacketId> = HashMap::new();
    let mut sent: HashMap<PacketId, TimeStep> = HashMap::new();

    for e in schedule.entries() {
        let p = index.get(&e.packet).ok_or(UnknownPacket(e.packet))?;
        if e.step < p.release {
            violations.push(Violation { step: e.step, packet: p.id, rule: Rule::Release { release: p.release } });
        }
        if e.step > p.deadline {
            violations.push(Violation { step: e.step, packet: p.id, rule: Rule::Deadline { deadline: p.deadline } });
        }
        if step_used.insert(e.step, p.id).is_some() || sent.contains_key(&p.id) {
            violations.push(Violation { step: e.step, packet: p.id, rule: Rule::Injectivity });
        } else {
            sent.insert(p.id, e.step);
        }
    }

    // Occupancy sweep: +1 at release, -1 the step after the send.
    let mut deltas: BTreeMap<TimeStep, (i64, PacketId)> = BTreeMap::new();
    for (&id, &step) in &sent {
        let p = &index[&id];
        if step < p.release {
            continue;
        }
        let arrive = deltas.entry(p.release).or_insert((0, id));
        arrive.0 += 1;
        arrive.1 = arrive.1.max(id);
        deltas.entry(step + 1).or_insert((0, id)).0 -= 1;
    }
    let capacity = instance.capacity();
    let mut present = 0i64;
    let mut over = false;
    for (&step, &(delta, id)) in &deltas {
        present += delta;
        let now_over = present > capacity as i64;
        if now_over && !over {
            violations.push(Violation {
                step,
                packet: id,
                rule: Rule::Capacity { present: present as usize, capacity },
            });
        }
        over = now_over;
    }
    violations.sort_by_key(|v| (v.step, v.packet));
    Ok(Verdict { violations })
}
