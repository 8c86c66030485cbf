//! Fluid representative democracy: agents with binary issue preferences elect
//! a committee, then voters may re-route their per-issue voting power among
//! the elected members before each issue is decided by weighted majority.

pub mod analysis;
pub mod ballots;
pub mod decide;
pub mod delegation;
pub mod election;
pub mod error;
pub mod fixtures;
pub mod harness;
pub mod model;
pub mod seed;
mod tiebreak;

pub use ballots::{ApprovalBallots, BallotForm, CardinalBallots, ElectoralBallots, OrdinalBallots};
pub use delegation::{DelegationScheme, DelegatorSampling, SchemeKind, WeightMatrix};
pub use election::{ElectionRule, RuleKind};
pub use error::{FrdError, Result};
pub use harness::{CellKey, CellResult, ExperimentSpec, SchemeGrid, TrialRecord};
pub use model::{agreement, canonicalize, Committee, FlipMask, IssueProfile, OutcomeVector};
