//! Online schedulers and the step-driven simulation engine.

mod edf;
mod engine;
mod greedy;
mod me;
pub mod rng;

use std::fmt;
use std::str::FromStr;

pub use edf::EdfScheduler;
pub use engine::{
    simulate, simulate_seeded, Checks, DropReason, DropRecord, InvariantReport, InvariantRule,
    InvariantViolation, SimulationOutcome,
};
pub use greedy::GreedyScheduler;
pub use me::{Branch, Decision, MeScheduler};
pub use rng::{BetaSource, RandomSource, ScriptedBeta};

use crate::error::ParamError;
use crate::golden::GoldenNumber;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Algorithm {
    Me,
    Rme,
    Edf,
    Greedy,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [Algorithm::Me, Algorithm::Rme, Algorithm::Edf, Algorithm::Greedy];

    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::Me => "me",
            Algorithm::Rme => "rme",
            Algorithm::Edf => "edf",
            Algorithm::Greedy => "greedy",
        }
    }

    pub fn is_randomized(&self) -> bool {
        matches!(self, Algorithm::Rme)
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| format!("unknown online algorithm {s:?}"))
    }
}

/// α scales the earliest packet in the delivery guard `α·w_e >= w_h`; γ is
/// RME's probability of sending `e` when the guard fails.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SchedulerParams {
    pub alpha: GoldenNumber,
    pub gamma: GoldenNumber,
}

impl SchedulerParams {
    /// α = 2.
    pub fn me_default() -> Self {
        SchedulerParams { alpha: GoldenNumber::from_weight(crate::weight::Weight::from_integer(2)), gamma: GoldenNumber::inv_phi_squared() }
    }

    /// α = φ, γ = 1/φ².
    pub fn rme_default() -> Self {
        SchedulerParams { alpha: GoldenNumber::phi(), gamma: GoldenNumber::inv_phi_squared() }
    }

    pub fn default_for(algorithm: Algorithm) -> Self {
        match algorithm {
            Algorithm::Rme => SchedulerParams::rme_default(),
            _ => SchedulerParams::me_default(),
        }
    }

    pub fn validate(&self) -> Result<(), ParamError> {
        if self.alpha < GoldenNumber::one() {
            return Err(ParamError(format!("alpha must be at least 1, got {}", self.alpha)));
        }
        if self.gamma < GoldenNumber::zero() || self.gamma > GoldenNumber::one() {
            return Err(ParamError(format!("gamma must lie in [0, 1], got {}", self.gamma)));
        }
        Ok(())
    }

    pub fn is_rme_default(&self) -> bool {
        *self == SchedulerParams::rme_default()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn algorithm_names_round_trip() {
        for a in Algorithm::ALL {
            assert_eq!(a.name().parse::<Algorithm>().unwrap(), a);
        }
        assert!("oracle".parse::<Algorithm>().is_err());
    }

    #[test]
    fn params_validation() {
        assert!(SchedulerParams::me_default().validate().is_ok());
        assert!(SchedulerParams::rme_default().validate().is_ok());
        let low = SchedulerParams { alpha: "0.5".parse().unwrap(), gamma: GoldenNumber::zero() };
        assert!(low.validate().is_err());
        let high_gamma = SchedulerParams { alpha: GoldenNumber::one(), gamma: "1.5".parse().unwrap() };
        assert!(high_gamma.validate().is_err());
    }
}
