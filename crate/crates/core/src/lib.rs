//! Finite-queue packet scheduling: a bounded buffer, weighted packets with
//! hard deadlines, one send per step.
//!
//! The crate provides the online schedulers ME, RME, EDF and a best-effort
//! Greedy, the provisional-schedule placement they build on, offline optima,
//! adversarial and random instance generators, and a harness that measures
//! competitive ratios. All weights are exact rationals.

pub mod error;
pub mod golden;
pub mod harness;
pub mod instances;
pub mod io;
pub mod model;
pub mod offline;
pub mod provisional;
pub mod schedulers;
pub mod verify;
pub mod weight;

pub use error::{BudgetExceeded, GeneratorError, InstanceError, LogError, PacketFault, ParamError};
pub use golden::GoldenNumber;
pub use model::{
    total_weight, Delivery, Instance, Packet, PacketId, QueuedPacket, Schedule, ScheduleEntry, TimeStep,
    Transmission, TransmissionLog,
};
pub use schedulers::{Algorithm, Checks, SchedulerParams};
pub use verify::{verify_schedule, Verdict, Violation};
pub use weight::Weight;
