//! Open decentralized MDP: team registry, records, transition models and the
//! exact solvers used as references.

mod likelihood;
mod open_model;
mod registry;
pub mod toy;
mod types;
mod validate;
mod value_iteration;

use thiserror::Error;

pub use likelihood::{
    policy_terms, step_factors, step_likelihood, trajectory_log_likelihood, transition_factors,
    StepFactors,
};
pub use open_model::{
    check_distribution, joint_actions, mass_of, successor_distribution, DecentralizedPolicy,
    OpenModel, DISTRIBUTION_TOLERANCE,
};
pub use registry::{AgentId, TeamId, TeamRegistry};
pub use types::{Distribution, LocalState, OpenTrajectory, Record, TeamAction, TeamState};
pub use validate::{validate_against_model, validate_trajectory, Violation, ViolationKind};
pub use value_iteration::{q_values, value_iteration, ValueTable, DEFAULT_TOLERANCE};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("invalid team: {0}")]
    InvalidTeam(String),
    #[error("agent {agent} is out of range for {agent_count} agents")]
    UnknownAgent { agent: AgentId, agent_count: usize },
    #[error("team {0} is not registered")]
    UnknownTeam(TeamId),
    #[error("malformed record: {0}")]
    MalformedRecord(String),
    #[error("trajectory has no records")]
    EmptyTrajectory,
    #[error("unsupported model: {0}")]
    UnsupportedModel(String),
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}
