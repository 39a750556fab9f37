//! Session state: step statuses, entity stores, assertions and the revision log.

use std::fmt;

use chrono::{DateTime, SecondsFormat, SubsecRound, Utc};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::catalog::STEP_COUNT;
use crate::error::{Error, Result};
use crate::model::{ActionRecord, Aspect, Assertion, EntityId, Purpose, SystemEntity};

/// Default red-flag threshold: factors mentioned at most this often are flagged.
pub const DEFAULT_RED_FLAG_THRESHOLD: u32 = 1;

/// UTC instant truncated to whole seconds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Timestamp(DateTime<Utc>);

impl Timestamp {
    pub fn now() -> Self {
        Timestamp::from(Utc::now())
    }

    pub fn from_unix(secs: i64) -> Self {
        Timestamp(DateTime::from_timestamp(secs, 0).expect("timestamp in range"))
    }

    pub fn as_datetime(&self) -> DateTime<Utc> {
        self.0
    }
}

impl From<DateTime<Utc>> for Timestamp {
    fn from(dt: DateTime<Utc>) -> Self {
        Timestamp(dt.trunc_subsecs(0))
    }
}

impl fmt::Display for Timestamp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(&self.0.to_rfc3339_opts(SecondsFormat::Secs, true))
    }
}

impl Serialize for Timestamp {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Timestamp {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = String::deserialize(deserializer)?;
        let parsed = DateTime::parse_from_rfc3339(&raw).map_err(serde::de::Error::custom)?;
        Ok(Timestamp::from(parsed.with_timezone(&Utc)))
    }
}

/// Source of revision-log timestamps.
pub trait Clock: Send + Sync {
    fn now(&self) -> Timestamp;
}

#[derive(Debug, Default, Clone, Copy)]
pub struct SystemClock;

impl Clock for SystemClock {
    fn now(&self) -> Timestamp {
        Timestamp::now()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct FixedClock(pub Timestamp);

impl Clock for FixedClock {
    fn now(&self) -> Timestamp {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepStatus {
    Locked,
    InProgress,
    Complete,
    Stale,
}

impl StepStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            StepStatus::Locked => "locked",
            StepStatus::InProgress => "in_progress",
            StepStatus::Complete => "complete",
            StepStatus::Stale => "stale",
        }
    }

    /// Whether assertions may be submitted to a step in this status.
    pub fn is_editable(self) -> bool {
        matches!(self, StepStatus::InProgress | StepStatus::Stale)
    }

    /// Whether the step counts as done for gating purposes.
    pub fn is_settled(self) -> bool {
        matches!(self, StepStatus::Complete | StepStatus::Stale)
    }
}

impl fmt::Display for StepStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepState {
    pub index: u8,
    pub status: StepStatus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionConfig {
    pub red_flag_threshold: u32,
}

impl Default for SessionConfig {
    fn default() -> Self {
        SessionConfig {
            red_flag_threshold: DEFAULT_RED_FLAG_THRESHOLD,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RevisionKind {
    AssertionRevised,
    PrimePurposeRevised,
    StepReconfirmed,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RevisionEvent {
    pub step_index: u8,
    pub kind: RevisionKind,
    /// The superseded assertion or archived purpose; absent for reconfirmations.
    pub subject: Option<EntityId>,
    pub replaced_by: Option<EntityId>,
    pub rationale: Option<String>,
    pub timestamp: Timestamp,
}

/// One articulation: the eight step states plus everything recorded so far.
///
/// Mutation goes through [`Session::apply`] (see the `engine` module), which is
/// all-or-nothing and bumps `version` by one on success.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Session {
    pub(crate) id: String,
    pub(crate) name: String,
    pub(crate) config: SessionConfig,
    pub(crate) version: u64,
    pub(crate) steps: [StepState; STEP_COUNT as usize],
    pub(crate) systems: Vec<SystemEntity>,
    pub(crate) aspects: Vec<Aspect>,
    pub(crate) purposes: Vec<Purpose>,
    pub(crate) actions: Vec<ActionRecord>,
    pub(crate) assertions: Vec<Assertion>,
    pub(crate) revision_log: Vec<RevisionEvent>,
    pub(crate) next_seq: u64,
}

impl Session {
    /// Fresh session with a random id.
    pub fn create(name: &str, config: SessionConfig) -> Result<Session> {
        Session::with_id(uuid::Uuid::new_v4().to_string(), name, config)
    }

    pub fn with_id(id: impl Into<String>, name: &str, config: SessionConfig) -> Result<Session> {
        let id = id.into();
        let name = name.trim();
        if name.is_empty() {
            return Err(Error::Validation("session name must not be empty".into()));
        }
        if !is_valid_session_id(&id) {
            return Err(Error::Validation(format!("invalid session id `{id}`")));
        }
        if config.red_flag_threshold < 1 {
            return Err(Error::Validation(
                "red_flag_threshold must be at least 1".into(),
            ));
        }
        let steps = std::array::from_fn(|i| StepState {
            index: i as u8 + 1,
            status: if i == 0 {
                StepStatus::InProgress
            } else {
                StepStatus::Locked
            },
        });
        Ok(Session {
            id,
            name: name.to_owned(),
            config,
            version: 1,
            steps,
            systems: Vec::new(),
            aspects: Vec::new(),
            purposes: Vec::new(),
            actions: Vec::new(),
            assertions: Vec::new(),
            revision_log: Vec::new(),
            next_seq: 1,
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn config(&self) -> SessionConfig {
        self.config
    }

    pub fn version(&self) -> u64 {
        self.version
    }

    pub fn steps(&self) -> &[StepState] {
        &self.steps
    }

    pub fn step(&self, index: u8) -> Result<&StepState> {
        index
            .checked_sub(1)
            .and_then(|i| self.steps.get(usize::from(i)))
            .ok_or_else(|| Error::not_found("step", index.to_string()))
    }

    pub(crate) fn step_mut(&mut self, index: u8) -> Result<&mut StepState> {
        index
            .checked_sub(1)
            .and_then(|i| self.steps.get_mut(usize::from(i)))
            .ok_or_else(|| Error::not_found("step", index.to_string()))
    }

    pub fn systems(&self) -> &[SystemEntity] {
        &self.systems
    }

    pub fn aspects(&self) -> &[Aspect] {
        &self.aspects
    }

    pub fn purposes(&self) -> &[Purpose] {
        &self.purposes
    }

    pub fn actions(&self) -> &[ActionRecord] {
        &self.actions
    }

    pub fn assertions(&self) -> &[Assertion] {
        &self.assertions
    }

    pub fn revision_log(&self) -> &[RevisionEvent] {
        &self.revision_log
    }

    pub fn system(&self, id: &EntityId) -> Option<&SystemEntity> {
        self.systems.iter().find(|s| &s.id == id)
    }

    pub fn system_by_name(&self, name: &str) -> Option<&SystemEntity> {
        self.systems.iter().find(|s| s.name == name)
    }

    pub fn aspect(&self, id: &EntityId) -> Option<&Aspect> {
        self.aspects.iter().find(|a| &a.id == id)
    }

    pub fn aspect_by_token(&self, token: &str) -> Option<&Aspect> {
        self.aspects.iter().find(|a| a.token == token)
    }

    pub fn purpose(&self, id: &EntityId) -> Option<&Purpose> {
        self.purposes.iter().find(|p| &p.id == id)
    }

    pub fn action(&self, id: &EntityId) -> Option<&ActionRecord> {
        self.actions.iter().find(|a| &a.id == id)
    }

    pub fn assertion(&self, id: &EntityId) -> Option<&Assertion> {
        self.assertions.iter().find(|a| &a.id == id)
    }

    pub fn current_assertions(&self, step: u8) -> impl Iterator<Item = &Assertion> {
        self.assertions
            .iter()
            .filter(move |a| a.step_index == step && a.is_current())
    }

    pub fn entity_exists(&self, id: &EntityId) -> bool {
        self.system(id).is_some()
            || self.aspect(id).is_some()
            || self.purpose(id).is_some()
            || self.action(id).is_some()
            || self.assertion(id).is_some()
    }

    /// True once every step is complete.
    pub fn is_finished(&self) -> bool {
        self.steps.iter().all(|s| s.status == StepStatus::Complete)
    }

    pub(crate) fn next_id(&mut self, prefix: &str) -> EntityId {
        loop {
            let id = EntityId::new(format!("{prefix}-{}", self.next_seq));
            self.next_seq += 1;
            // Hand-edited documents may already use the id.
            if !self.entity_exists(&id) {
                return id;
            }
        }
    }
}

/// Session ids double as file stems, so they are restricted to a safe alphabet.
pub fn is_valid_session_id(id: &str) -> bool {
    !id.is_empty()
        && id.len() <= 128
        && id
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_')
}
