//! Instance generators: three adversarial constructions that carry a
//! certified reference schedule, and a seeded random family.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::GeneratorError;
use crate::model::{Instance, Packet, Schedule, TimeStep};
use crate::verify::verify_schedule;
use crate::weight::Weight;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    EdfNemesis,
    BestEffortLb,
    GreedyLb,
    Random,
}

impl Family {
    pub const ALL: [Family; 4] = [Family::EdfNemesis, Family::BestEffortLb, Family::GreedyLb, Family::Random];

    pub fn name(&self) -> &'static str {
        match self {
            Family::EdfNemesis => "edf-nemesis",
            Family::BestEffortLb => "best-effort-lb",
            Family::GreedyLb => "greedy-lb",
            Family::Random => "random",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Family::ALL
            .into_iter()
            .find(|f| f.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| format!("unknown family {s:?}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RandomParams {
    pub n: usize,
    pub capacity: usize,
    /// Releases are drawn from `1..=horizon`.
    pub horizon: u64,
    pub max_slack: u64,
    pub max_weight: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GeneratorSpec {
    EdfNemesis { b: usize, rounds: usize, eps: Weight },
    BestEffortLb { b: usize, eps: Weight },
    GreedyLb { b: usize, eps: Weight },
    Random(RandomParams),
}

impl GeneratorSpec {
    pub fn family(&self) -> Family {
        match self {
            GeneratorSpec::EdfNemesis { .. } => Family::EdfNemesis,
            GeneratorSpec::BestEffortLb { .. } => Family::BestEffortLb,
            GeneratorSpec::GreedyLb { .. } => Family::GreedyLb,
            GeneratorSpec::Random(_) => Family::Random,
        }
    }

    pub fn generate(&self) -> Result<Instance, GeneratorError> {
        match *self {
            GeneratorSpec::EdfNemesis { b, rounds, eps } => gen_edf_nemesis(b, rounds, eps),
            GeneratorSpec::BestEffortLb { b, eps } => gen_best_effort_lb(b, eps),
            GeneratorSpec::GreedyLb { b, eps } => gen_greedy_lb(b, eps),
            GeneratorSpec::Random(params) => gen_random(&params),
        }
    }
}

fn bad(msg: impl Into<String>) -> GeneratorError {
    GeneratorError(msg.into())
}

fn one_minus(eps: Weight) -> Weight {
    Weight::ONE.checked_sub(&eps).expect("eps < 1")
}

fn mul(a: Weight, b: Weight) -> Weight {
    a.checked_mul(&b).expect("generator weights overflow")
}

/// Stores the reference schedule after checking it against the instance.
fn certify(instance: Instance, schedule: Schedule) -> Result<Instance, GeneratorError> {
    let verdict = verify_schedule(&instance, &schedule).map_err(|e| bad(e.to_string()))?;
    if !verdict.is_ok() {
        return Err(bad(format!("reference schedule does not verify: {verdict}")));
    }
    let weight = schedule.total_weight(&instance);
    Ok(instance.with_reference(schedule, weight))
}

fn meta(instance: &mut Instance, pairs: &[(&str, String)]) {
    for (k, v) in pairs {
        instance.meta.insert((*k).to_string(), v.clone());
    }
}

/// EDF lower-bound construction with `n` rounds of length `b + 1`.
///
/// Step 1 opens with `b - 1` weight-1 packets whose deadline lies past the
/// whole horizon. Round `k` starts at `s = 1 + (k - 1)(b + 1)` with `b`
/// packets of weight `1 - ε` due at `s + b - 1`, followed by one `ε` packet
/// released and due at each of `s + 1 ..= s + b`. After the last round, `b`
/// weight-1 packets arrive together.
///
/// EDF keeps the far-deadline packets, so each round it sends one `1 - ε`
/// packet and then the `b` fillers, and finally the `b` closing packets:
/// `n·(1 + (b - 1)ε) + b` in total. The reference schedule sends every
/// `1 - ε` packet, the closing batch, and the last filler of the first
/// `min(n, b)` rounds: `b + (1 - ε)·b·n + ε·min(n, b)`.
pub fn gen_edf_nemesis(b: usize, n: usize, eps: Weight) -> Result<Instance, GeneratorError> {
    if b < 2 {
        return Err(bad("edf-nemesis needs b >= 2"));
    }
    if n < 1 {
        return Err(bad("edf-nemesis needs at least one round"));
    }
    if eps.is_zero() || eps >= Weight::ONE {
        return Err(bad("edf-nemesis needs 0 < eps < 1"));
    }
    let bu = b as u64;
    let round_len = bu + 1;
    let tail: TimeStep = 1 + n as u64 * round_len;
    let total = (b - 1) + 2 * n * b + b;
    let sentinel = tail + total as u64 + 1;

    let mut packets = Vec::with_capacity(total);
    let mut reference = Schedule::new();
    let mut id = 0u64;
    let mut emit = |packets: &mut Vec<Packet>, r: TimeStep, d: TimeStep, w: Weight| {
        packets.push(Packet::new(id, r, d, w));
        id += 1;
        id - 1
    };
    for _ in 0..b - 1 {
        emit(&mut packets, 1, sentinel, Weight::ONE);
    }
    for k in 0..n as u64 {
        let s = 1 + k * round_len;
        for j in 0..bu {
            let pid = emit(&mut packets, s, s + bu - 1, one_minus(eps));
            reference.push(s + j, pid);
        }
        for t in s + 1..=s + bu {
            let pid = emit(&mut packets, t, t, eps);
            if t == s + bu && k < bu {
                reference.push(t, pid);
            }
        }
    }
    for j in 0..bu {
        let pid = emit(&mut packets, tail, tail + bu - 1, Weight::ONE);
        reference.push(tail + j, pid);
    }

    let mut instance = Instance::new(b, packets).map_err(|e| bad(e.to_string()))?;
    meta(
        &mut instance,
        &[
            ("family", Family::EdfNemesis.name().into()),
            ("b", b.to_string()),
            ("rounds", n.to_string()),
            ("eps", eps.to_string()),
            ("sentinel_deadline", sentinel.to_string()),
        ],
    );
    certify(instance, reference)
}

/// Closed-form EDF total on [`gen_edf_nemesis`]: `n·(1 + (b - 1)ε) + b`.
pub fn edf_nemesis_edf_total(b: usize, n: usize, eps: Weight) -> Weight {
    let per_round = Weight::ONE + mul(Weight::from_integer(b as u64 - 1), eps);
    mul(Weight::from_integer(n as u64), per_round) + Weight::from_integer(b as u64)
}

/// Closed-form reference weight: `b + (1 - ε)·b·n + ε·min(n, b)`.
pub fn edf_nemesis_reference_weight(b: usize, n: usize, eps: Weight) -> Weight {
    let bw = Weight::from_integer(b as u64);
    bw + mul(mul(one_minus(eps), bw), Weight::from_integer(n as u64))
        + mul(eps, Weight::from_integer(n.min(b) as u64))
}

/// Shared layout of the two best-effort constructions: `b` weight-1 packets
/// due at `b + 1 ..= 2b`, then a wave of `b` packets due at `1 ..= b` whose
/// weights come from `wave`, all released at step 1 in that order, then one
/// `(1 + ε)` packet released and due at each step `2 ..= b`.
fn ramp_instance(b: usize, eps: Weight, wave: impl Fn(u64) -> Weight, family: Family) -> Result<Instance, GeneratorError> {
    let bu = b as u64;
    let heavy = Weight::ONE + eps;
    let mut packets = Vec::with_capacity(3 * b - 1);
    let mut reference = Schedule::new();
    for i in 1..=bu {
        let id = i - 1;
        packets.push(Packet::new(id, 1, bu + i, Weight::ONE));
        if i >= 2 {
            reference.push(bu + i - 1, id);
        }
    }
    for i in 1..=bu {
        let id = bu + i - 1;
        packets.push(Packet::new(id, 1, i, wave(i)));
        if i == 1 {
            reference.push(1, id);
        }
    }
    for i in 2..=bu {
        let id = 2 * bu + i - 2;
        packets.push(Packet::new(id, i, i, heavy));
        reference.push(i, id);
    }
    let mut instance = Instance::new(b, packets).map_err(|e| bad(e.to_string()))?;
    meta(&mut instance, &[("family", family.name().into()), ("b", b.to_string()), ("eps", eps.to_string())]);
    certify(instance, reference)
}

/// Best-effort lower bound: every wave packet weighs `1 + ε`. A best-effort
/// algorithm ends with `(1 + ε)·b`; the reference gets `(1 + ε)·b + b - 1`.
pub fn gen_best_effort_lb(b: usize, eps: Weight) -> Result<Instance, GeneratorError> {
    if b < 2 {
        return Err(bad("best-effort-lb needs b >= 2"));
    }
    if eps.is_zero() {
        return Err(bad("best-effort-lb needs eps > 0"));
    }
    ramp_instance(b, eps, |_| Weight::ONE + eps, Family::BestEffortLb)
}

/// Greedy lower bound: wave packet `i` weighs `1 + iε`, so Greedy always
/// sends the latest one first.
pub fn gen_greedy_lb(b: usize, eps: Weight) -> Result<Instance, GeneratorError> {
    if b < 2 || !b.is_multiple_of(2) {
        return Err(bad("greedy-lb needs an even b >= 2"));
    }
    if eps.is_zero() {
        return Err(bad("greedy-lb needs eps > 0"));
    }
    let b_eps = eps.checked_mul(&Weight::from_integer(b as u64)).ok_or_else(|| bad("eps too large"))?;
    if b_eps >= Weight::ONE {
        return Err(bad("greedy-lb needs b * eps < 1"));
    }
    ramp_instance(b, eps, |i| Weight::ONE + mul(Weight::from_integer(i), eps), Family::GreedyLb)
}

/// Reference weight of both ramp constructions: `(1 + ε)·b + (b - 1)`.
pub fn ramp_reference_weight(b: usize, eps: Weight) -> Weight {
    mul(Weight::ONE + eps, Weight::from_integer(b as u64)) + Weight::from_integer(b as u64 - 1)
}

/// `n` packets: release uniform on `1..=horizon`, slack uniform on
/// `0..=max_slack`, integer weight uniform on `1..=max_weight`. Packets are
/// ordered by release and numbered in that order.
pub fn gen_random(params: &RandomParams) -> Result<Instance, GeneratorError> {
    if params.capacity < 1 {
        return Err(bad("random needs b >= 1"));
    }
    if params.horizon < 1 {
        return Err(bad("random needs horizon >= 1"));
    }
    if params.max_weight < 1 {
        return Err(bad("random needs wmax >= 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut raw: Vec<(u64, u64, u64)> = (0..params.n)
        .map(|_| {
            let release = rng.random_range(1..=params.horizon);
            let slack = rng.random_range(0..=params.max_slack);
            let weight = rng.random_range(1..=params.max_weight);
            (release, slack, weight)
        })
        .collect();
    raw.sort_by_key(|&(release, _, _)| release);
    let packets = raw
        .into_iter()
        .enumerate()
        .map(|(i, (r, s, w))| Packet::new(i as u64, r, r + s, Weight::from_integer(w)))
        .collect();
    let mut instance = Instance::new(params.capacity, packets).map_err(|e| bad(e.to_string()))?;
    meta(
        &mut instance,
        &[
            ("family", Family::Random.name().into()),
            ("b", params.capacity.to_string()),
            ("seed", params.seed.to_string()),
        ],
    );
    Ok(instance)
}
