//! Engine for AIC-based chain-of-thought problem articulation.
//!
//! A [`Session`] walks an architect through eight fixed steps, from unsafe
//! behaviours through systems, primary purposes and the influence, control and
//! appreciation interactions that serve them, to a frequency analysis of the
//! factors mentioned along the way. Every step answer is an assertion starting
//! with "The architect asserts that". Revising an earlier answer marks the
//! completed steps after it stale until they are reconfirmed.

pub mod catalog;
pub mod document;
pub mod engine;
pub mod error;
pub mod factors;
pub mod fixture;
pub mod graph;
pub mod model;
pub mod report;
pub mod session;
pub mod validation;

pub use catalog::{get_step, list_steps, StepDefinition, STEP_COUNT};
pub use document::{load_session, save_session, LoadedSession, FORMAT_VERSION};
pub use engine::{Mutation, NewAction, Outcome, SessionStatus, StepSummary};
pub use error::{Error, Result};
pub use factors::{
    compute_factor_report, diff_reports, extract_factors, Classification, FactorChange,
    FactorEntry, FactorReport,
};
pub use graph::{export_graph, GraphExport};
pub use model::{
    ActionKind, ActionRecord, Aspect, Assertion, AssertionStatus, EntityId, Purpose, PurposeKind,
    PurposeStatus, SystemEntity, SystemKind, ASSERTION_PREFIX,
};
pub use report::render_report;
pub use session::{
    Clock, FixedClock, RevisionEvent, RevisionKind, Session, SessionConfig, StepState, StepStatus,
    SystemClock, Timestamp,
};
pub use validation::{
    validate_chain, validate_session, ChainLink, ChainTrace, Finding, FindingCode, Severity,
};
