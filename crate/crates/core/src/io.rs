//! Instance files (JSON) and transmission logs (comma-separated).
//!
//! Instance file:
//!
//! ```text
//! {
//!   "capacity": 2,
//!   "packets": [
//!     {"id": 0, "release": 1, "deadline": 3, "weight": "1.5"}
//!   ],
//!   "reference_schedule": [{"step": 1, "packet": 0}],
//!   "reference_opt_weight": "1.5",
//!   "meta": {"family": "random"}
//! }
//! ```
//!
//! Only `capacity` and `packets` are required. Weights are decimal strings;
//! `"num/den"` is also accepted for values without a terminating expansion.
//!
//! Log file: header `step,packet_id,weight`, one delivery per line.

use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;

use serde::Deserialize;

use crate::error::{InstanceError, LogError, PacketFault};
use crate::model::{Instance, Packet, Schedule, ScheduleEntry, Transmission, TransmissionLog};
use crate::verify::verify_schedule;
use crate::weight::{Weight, WeightError};

pub const LOG_HEADER: &str = "step,packet_id,weight";

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInstance {
    capacity: i64,
    packets: Vec<RawPacket>,
    #[serde(default)]
    reference_schedule: Option<Vec<ScheduleEntry>>,
    #[serde(default)]
    reference_opt_weight: Option<String>,
    #[serde(default)]
    meta: BTreeMap<String, String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPacket {
    id: u64,
    release: i64,
    deadline: i64,
    weight: String,
}

/// Line number (1-based) at which each element of the top-level
/// `"packets"` array starts. Best effort: used only to annotate errors.
fn packet_lines(text: &str) -> Vec<usize> {
    let bytes = text.as_bytes();
    let mut lines = Vec::new();
    let mut line = 1usize;
    let mut depth = 0i32;
    let mut in_string = false;
    let mut escaped = false;
    let mut last_string = String::new();
    let mut current = String::new();
    let mut packets_depth: Option<i32> = None;
    let mut pending_key = false;

    for &b in bytes {
        if b == b'\n' {
            line += 1;
        }
        if in_string {
            if escaped {
                escaped = false;
            } else if b == b'\\' {
                escaped = true;
            } else if b == b'"' {
                in_string = false;
                last_string = std::mem::take(&mut current);
            } else {
                current.push(b as char);
            }
            continue;
        }
        match b {
            b'"' => in_string = true,
            b':' => pending_key = depth == 1 && last_string == "packets",
            b'[' => {
                depth += 1;
                if pending_key && packets_depth.is_none() {
                    packets_depth = Some(depth);
                }
                pending_key = false;
            }
            b'{' => {
                if packets_depth == Some(depth) {
                    lines.push(line);
                }
                depth += 1;
                pending_key = false;
            }
            b']' | b'}' => {
                if b == b']' && packets_depth == Some(depth) {
                    packets_depth = Some(-1);
                }
                depth -= 1;
            }
            _ => {}
        }
    }
    lines
}

fn to_step(value: i64, field: &'static str) -> Result<u64, PacketFault> {
    if value < 1 {
        Err(PacketFault::StepOutOfRange { field, value })
    } else {
        Ok(value as u64)
    }
}

fn weight_fault(raw: &str, err: WeightError) -> PacketFault {
    match err {
        WeightError::Negative(_) => PacketFault::NegativeWeight(raw.to_string()),
        other => PacketFault::BadWeight(other.to_string()),
    }
}

/// Parses an instance file. Packet order is preserved.
pub fn parse_instance(text: &str) -> Result<Instance, InstanceError> {
    let raw: RawInstance = serde_json::from_str(text).map_err(|e| InstanceError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    if raw.capacity < 1 {
        return Err(InstanceError::Capacity(raw.capacity));
    }
    let lines = packet_lines(text);
    let mut packets = Vec::with_capacity(raw.packets.len());
    let mut seen = HashSet::with_capacity(raw.packets.len());
    for (i, rp) in raw.packets.iter().enumerate() {
        let fail = |fault| InstanceError::Packet { id: rp.id, line: lines.get(i).copied(), fault };
        let release = to_step(rp.release, "release").map_err(fail)?;
        let deadline = to_step(rp.deadline, "deadline").map_err(fail)?;
        if release > deadline {
            return Err(fail(PacketFault::ReleaseAfterDeadline { release, deadline }));
        }
        let weight: Weight = rp.weight.parse().map_err(|e| fail(weight_fault(&rp.weight, e)))?;
        if !seen.insert(rp.id) {
            return Err(fail(PacketFault::DuplicateId));
        }
        packets.push(Packet::new(rp.id, release, deadline, weight));
    }
    let mut instance = Instance::new(raw.capacity as usize, packets)?;
    instance.meta = raw.meta;
    if let Some(w) = raw.reference_opt_weight {
        instance.reference_opt_weight =
            Some(w.parse().map_err(|e: WeightError| InstanceError::ReferenceWeight(e.to_string()))?);
    }
    if let Some(entries) = raw.reference_schedule {
        let schedule = Schedule::from_entries(entries);
        match verify_schedule(&instance, &schedule) {
            Ok(v) if v.is_ok() => {}
            Ok(v) => return Err(InstanceError::ReferenceSchedule(v.to_string())),
            Err(e) => return Err(InstanceError::ReferenceSchedule(e.to_string())),
        }
        instance.reference_schedule = Some(schedule);
    }
    Ok(instance)
}

fn json_str(s: &str) -> String {
    serde_json::to_string(s).expect("string serialization")
}

/// Renders an instance in the file format, one packet per line.
pub fn instance_to_json(instance: &Instance) -> String {
    let mut out = String::new();
    out.push_str("{\n");
    let _ = writeln!(out, "  \"capacity\": {},", instance.capacity());
    out.push_str("  \"packets\": [");
    for (i, p) in instance.packets().iter().enumerate() {
        out.push_str(if i == 0 { "\n" } else { ",\n" });
        let _ = write!(
            out,
            "    {{\"id\": {}, \"release\": {}, \"deadline\": {}, \"weight\": {}}}",
            p.id,
            p.release,
            p.deadline,
            json_str(&p.weight.to_string())
        );
    }
    out.push_str(if instance.is_empty() { "]" } else { "\n  ]" });
    if let Some(schedule) = &instance.reference_schedule {
        out.push_str(",\n  \"reference_schedule\": [");
        for (i, e) in schedule.entries().iter().enumerate() {
            if i > 0 {
                out.push_str(", ");
            }
            let _ = write!(out, "{{\"step\": {}, \"packet\": {}}}", e.step, e.packet);
        }
        out.push(']');
    }
    if let Some(w) = &instance.reference_opt_weight {
        let _ = write!(out, ",\n  \"reference_opt_weight\": {}", json_str(&w.to_string()));
    }
    if !instance.meta.is_empty() {
        out.push_str(",\n  \"meta\": {");
        for (i, (k, v)) in instance.meta.iter().enumerate() {
            if i > 0 {
                out.push_str(", ");
            }
            let _ = write!(out, "{}: {}", json_str(k), json_str(v));
        }
        out.push('}');
    }
    out.push_str("\n}\n");
    out
}

pub fn log_to_csv(log: &TransmissionLog) -> String {
    let mut out = String::with_capacity(16 * (log.len() + 1));
    out.push_str(LOG_HEADER);
    out.push('\n');
    for t in log.entries() {
        let _ = writeln!(out, "{},{},{}", t.step, t.packet_id, t.weight);
    }
    out
}

/// Parses a log file. The weight column may be omitted, in which case
/// weights are read as zero; use [`parse_schedule`] when only the send
/// plan matters.
pub fn parse_log_csv(text: &str) -> Result<TransmissionLog, LogError> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let header = lines.next().map(|(_, l)| l.trim().replace(' ', ""));
    let with_weight = match header.as_deref() {
        Some(LOG_HEADER) => true,
        Some("step,packet_id") => false,
        _ => return Err(LogError::Header { expected: LOG_HEADER }),
    };
    let mut entries = Vec::new();
    for (i, line) in lines {
        let bad = |message: String| LogError::Malformed { line: i + 1, message };
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let expected = if with_weight { 3 } else { 2 };
        if fields.len() != expected {
            return Err(bad(format!("expected {expected} fields, found {}", fields.len())));
        }
        let step = fields[0].parse().map_err(|e| bad(format!("step: {e}")))?;
        let packet_id = fields[1].parse().map_err(|e| bad(format!("packet_id: {e}")))?;
        let weight = if with_weight {
            fields[2].parse().map_err(|e: WeightError| bad(format!("weight: {e}")))?
        } else {
            Weight::ZERO
        };
        entries.push(Transmission { step, packet_id, weight });
    }
    Ok(TransmissionLog::from_entries(entries))
}

/// Reads a schedule from either a log file or a JSON array of
/// `{"step": .., "packet": ..}` objects.
pub fn parse_schedule(text: &str) -> Result<Schedule, LogError> {
    let trimmed = text.trim_start();
    if trimmed.starts_with('[') {
        let entries: Vec<ScheduleEntry> = serde_json::from_str(trimmed)
            .map_err(|e| LogError::Malformed { line: e.line(), message: e.to_string() })?;
        return Ok(Schedule::from_entries(entries));
    }
    Ok(parse_log_csv(text)?.to_schedule())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_single_packet_instance() {
        let text = r#"{"capacity":2,"packets":[{"id":0,"release":1,"deadline":3,"weight":"1.5"}]}"#;
        let inst = parse_instance(text).unwrap();
        assert_eq!(inst.capacity(), 2);
        assert_eq!(inst.len(), 1);
        assert_eq!(inst.packets()[0].weight, Weight::new(3, 2).unwrap());
    }

    #[test]
    fn parses_empty_instance() {
        let inst = parse_instance(r#"{"capacity":1,"packets":[]}"#).unwrap();
        assert!(inst.is_empty());
    }

    #[test]
    fn release_after_deadline_names_packet_and_line() {
        let text = "{\n  \"capacity\": 1,\n  \"packets\": [\n    {\"id\": 0, \"release\": 1, \"deadline\": 2, \"weight\": \"1\"},\n    {\"id\": 9, \"release\": 5, \"deadline\": 4, \"weight\": \"1\"}\n  ]\n}";
        let err = parse_instance(text).unwrap_err();
        match &err {
            InstanceError::Packet { id: 9, line: Some(5), fault: PacketFault::ReleaseAfterDeadline { release: 5, deadline: 4 } } => {}
            other => panic!("unexpected {other:?}"),
        }
        let msg = err.to_string();
        assert!(msg.contains("packet 9") && msg.contains("line 5") && msg.contains("release 5 > deadline 4"), "{msg}");
    }

    #[test]
    fn reports_other_packet_faults() {
        let neg = r#"{"capacity":1,"packets":[{"id":3,"release":1,"deadline":2,"weight":"-1"}]}"#;
        assert!(matches!(
            parse_instance(neg),
            Err(InstanceError::Packet { id: 3, line: Some(1), fault: PacketFault::NegativeWeight(_) })
        ));
        let dup = r#"{"capacity":1,"packets":[{"id":3,"release":1,"deadline":2,"weight":"1"},
            {"id":3,"release":1,"deadline":2,"weight":"1"}]}"#;
        assert!(matches!(
            parse_instance(dup),
            Err(InstanceError::Packet { id: 3, line: Some(2), fault: PacketFault::DuplicateId })
        ));
        let cap = r#"{"capacity":0,"packets":[]}"#;
        assert!(matches!(parse_instance(cap), Err(InstanceError::Capacity(0))));
        let syntax = "{\"capacity\": 1, \"packets\": [}";
        assert!(matches!(parse_instance(syntax), Err(InstanceError::Syntax { line: 1, .. })));
        let zero_step = r#"{"capacity":1,"packets":[{"id":1,"release":0,"deadline":2,"weight":"1"}]}"#;
        assert!(matches!(
            parse_instance(zero_step),
            Err(InstanceError::Packet { fault: PacketFault::StepOutOfRange { field: "release", .. }, .. })
        ));
    }

    #[test]
    fn rejects_reference_schedule_that_fails_verification() {
        let text = r#"{"capacity":1,"packets":[{"id":0,"release":1,"deadline":1,"weight":"5"},
            {"id":1,"release":1,"deadline":2,"weight":"3"}],
            "reference_schedule":[{"step":1,"packet":0},{"step":2,"packet":1}]}"#;
        assert!(matches!(parse_instance(text), Err(InstanceError::ReferenceSchedule(_))));
    }

    #[test]
    fn instance_round_trips_through_json() {
        let text = r#"{"capacity":2,"packets":[{"id":0,"release":1,"deadline":3,"weight":"1.5"},
            {"id":4,"release":2,"deadline":2,"weight":"1/3"}],
            "reference_schedule":[{"step":2,"packet":4},{"step":3,"packet":0}],
            "reference_opt_weight":"11/6","meta":{"k":"v"}}"#;
        let inst = parse_instance(text).unwrap();
        let again = parse_instance(&instance_to_json(&inst)).unwrap();
        assert_eq!(inst, again);
    }

    #[test]
    fn log_csv_round_trip() {
        let mut log = TransmissionLog::new();
        log.record(1, &Packet::new(3, 1, 2, Weight::new(3, 2).unwrap()));
        log.record(4, &Packet::new(0, 2, 9, Weight::new(1, 3).unwrap()));
        let text = log_to_csv(&log);
        assert_eq!(text, "step,packet_id,weight\n1,3,1.5\n4,0,1/3\n");
        assert_eq!(parse_log_csv(&text).unwrap(), log);
    }

    #[test]
    fn schedule_from_json_or_csv() {
        let a = parse_schedule(r#"[{"step":2,"packet":1},{"step":1,"packet":0}]"#).unwrap();
        let b = parse_schedule("step,packet_id\n1,0\n2,1\n").unwrap();
        assert_eq!(a, b);
        assert!(parse_schedule("nope\n1,2\n").is_err());
    }
}
