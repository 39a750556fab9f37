//! The step workflow and every write-time rule.
//!
//! All mutations are expressed as [`Mutation`] values and applied through
//! [`Session::apply`]. A mutation either succeeds completely, bumping the
//! session version by one, or fails and leaves the session untouched.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::catalog::STEP_COUNT;
use crate::error::{Error, Result};
use crate::factors::{extract_factors, is_factor_token, normalize_token};
use crate::model::{
    has_assertion_prefix, ActionKind, ActionRecord, Aspect, Assertion, AssertionStatus, EntityId,
    Purpose, PurposeKind, PurposeStatus, ServesTarget, SystemEntity, SystemKind,
};
use crate::session::{
    RevisionEvent, RevisionKind, Session, SessionConfig, StepState, StepStatus, Timestamp,
};
use crate::validation::{validate_session, Severity};

/// Step whose assertions carry primary purposes; PrimeP revisions stale the steps after it.
pub const PRIME_PURPOSE_STEP: u8 = 4;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum Mutation {
    CreateSystem {
        name: String,
        kind: SystemKind,
    },
    AddAspect {
        token: String,
        #[serde(default)]
        description: Option<String>,
    },
    AddToSphere {
        system: EntityId,
        aspect: EntityId,
    },
    /// Sets a system's primary purpose. Replacing an existing one requires
    /// `revision_rationale`.
    SetPrimePurpose {
        system: EntityId,
        verb_phrase: String,
        #[serde(default)]
        revision_rationale: Option<String>,
    },
    AddPurpose {
        kind: PurposeKind,
        owner: EntityId,
        verb_phrase: String,
        serves: EntityId,
    },
    AddAction(NewAction),
    SubmitAssertion {
        step: u8,
        text: String,
        #[serde(default)]
        referenced_entities: BTreeSet<EntityId>,
    },
    CompleteStep {
        step: u8,
    },
    ReviseAssertion {
        step: u8,
        assertion: EntityId,
        text: String,
        rationale: String,
    },
    ReconfirmStep {
        step: u8,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NewAction {
    pub kind: ActionKind,
    pub source: EntityId,
    #[serde(default)]
    pub target_system: Option<EntityId>,
    #[serde(default)]
    pub target_aspect: Option<EntityId>,
    #[serde(default)]
    pub fulfills: Option<EntityId>,
    pub description: String,
}

/// What an accepted mutation produced.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    System(SystemEntity),
    Aspect(Aspect),
    Purpose(Purpose),
    Action(ActionRecord),
    Assertion(Assertion),
    Step(StepState),
}

macro_rules! expect_outcome {
    ($outcome:expr, $variant:ident) => {
        match $outcome {
            Outcome::$variant(v) => v,
            other => unreachable!("unexpected outcome {other:?}"),
        }
    };
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepSummary {
    pub index: u8,
    pub name: String,
    pub status: StepStatus,
    pub current_assertions: usize,
    pub superseded_assertions: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionStatus {
    pub session_id: String,
    pub name: String,
    pub version: u64,
    pub config: SessionConfig,
    pub steps: Vec<StepSummary>,
    pub stale_steps: Vec<u8>,
    pub finished: bool,
    pub pending_findings: usize,
    pub error_findings: usize,
}

impl Session {
    /// Applies `mutation`, stamping any revision-log entry with `at`.
    pub fn apply(&mut self, mutation: Mutation, at: Timestamp) -> Result<Outcome> {
        let mut next = self.clone();
        let outcome = next.execute(mutation, at)?;
        next.version += 1;
        *self = next;
        Ok(outcome)
    }

    /// Like [`apply`](Self::apply), but rejects the call unless the session is
    /// still at `expected_version`.
    pub fn apply_expected(
        &mut self,
        expected_version: u64,
        mutation: Mutation,
        at: Timestamp,
    ) -> Result<Outcome> {
        if expected_version != self.version {
            return Err(Error::VersionConflict {
                expected: expected_version,
                current: self.version,
            });
        }
        self.apply(mutation, at)
    }

    pub fn create_system(&mut self, name: &str, kind: SystemKind) -> Result<SystemEntity> {
        let m = Mutation::CreateSystem {
            name: name.into(),
            kind,
        };
        Ok(expect_outcome!(self.apply(m, Timestamp::now())?, System))
    }

    pub fn add_aspect(&mut self, token: &str, description: Option<&str>) -> Result<Aspect> {
        let m = Mutation::AddAspect {
            token: token.into(),
            description: description.map(Into::into),
        };
        Ok(expect_outcome!(self.apply(m, Timestamp::now())?, Aspect))
    }

    pub fn add_to_sphere(&mut self, system: &EntityId, aspect: &EntityId) -> Result<SystemEntity> {
        let m = Mutation::AddToSphere {
            system: system.clone(),
            aspect: aspect.clone(),
        };
        Ok(expect_outcome!(self.apply(m, Timestamp::now())?, System))
    }

    pub fn set_prime_purpose(&mut self, system: &EntityId, verb_phrase: &str) -> Result<Purpose> {
        let m = Mutation::SetPrimePurpose {
            system: system.clone(),
            verb_phrase: verb_phrase.into(),
            revision_rationale: None,
        };
        Ok(expect_outcome!(self.apply(m, Timestamp::now())?, Purpose))
    }

    pub fn revise_prime_purpose(
        &mut self,
        system: &EntityId,
        verb_phrase: &str,
        rationale: &str,
    ) -> Result<Purpose> {
        let m = Mutation::SetPrimePurpose {
            system: system.clone(),
            verb_phrase: verb_phrase.into(),
            revision_rationale: Some(rationale.into()),
        };
        Ok(expect_outcome!(self.apply(m, Timestamp::now())?, Purpose))
    }

    pub fn add_purpose(
        &mut self,
        kind: PurposeKind,
        owner: &EntityId,
        verb_phrase: &str,
        serves: &EntityId,
    ) -> Result<Purpose> {
        let m = Mutation::AddPurpose {
            kind,
            owner: owner.clone(),
            verb_phrase: verb_phrase.into(),
            serves: serves.clone(),
        };
        Ok(expect_outcome!(self.apply(m, Timestamp::now())?, Purpose))
    }

    pub fn add_action(&mut self, action: NewAction) -> Result<ActionRecord> {
        Ok(expect_outcome!(
            self.apply(Mutation::AddAction(action), Timestamp::now())?,
            Action
        ))
    }

    pub fn submit_assertion(
        &mut self,
        step: u8,
        text: &str,
        referenced_entities: impl IntoIterator<Item = EntityId>,
    ) -> Result<Assertion> {
        let m = Mutation::SubmitAssertion {
            step,
            text: text.into(),
            referenced_entities: referenced_entities.into_iter().collect(),
        };
        Ok(expect_outcome!(self.apply(m, Timestamp::now())?, Assertion))
    }

    pub fn complete_step(&mut self, step: u8) -> Result<StepState> {
        Ok(expect_outcome!(
            self.apply(Mutation::CompleteStep { step }, Timestamp::now())?,
            Step
        ))
    }

    pub fn revise_step(
        &mut self,
        step: u8,
        superseded: &EntityId,
        text: &str,
        rationale: &str,
    ) -> Result<Assertion> {
        let m = Mutation::ReviseAssertion {
            step,
            assertion: superseded.clone(),
            text: text.into(),
            rationale: rationale.into(),
        };
        Ok(expect_outcome!(self.apply(m, Timestamp::now())?, Assertion))
    }

    pub fn reconfirm_step(&mut self, step: u8) -> Result<StepState> {
        Ok(expect_outcome!(
            self.apply(Mutation::ReconfirmStep { step }, Timestamp::now())?,
            Step
        ))
    }

    pub fn status(&self) -> SessionStatus {
        let findings = validate_session(self);
        let steps = self
            .steps
            .iter()
            .map(|st| {
                let in_step = || self.assertions.iter().filter(|a| a.step_index == st.index);
                StepSummary {
                    index: st.index,
                    name: crate::catalog::get_step(st.index)
                        .map(|d| d.name.to_owned())
                        .unwrap_or_default(),
                    status: st.status,
                    current_assertions: in_step().filter(|a| a.is_current()).count(),
                    superseded_assertions: in_step().filter(|a| !a.is_current()).count(),
                }
            })
            .collect();
        SessionStatus {
            session_id: self.id.clone(),
            name: self.name.clone(),
            version: self.version,
            config: self.config,
            steps,
            stale_steps: self
                .steps
                .iter()
                .filter(|s| s.status == StepStatus::Stale)
                .map(|s| s.index)
                .collect(),
            finished: self.is_finished(),
            pending_findings: findings.len(),
            error_findings: findings
                .iter()
                .filter(|f| f.severity == Severity::Error)
                .count(),
        }
    }

    fn execute(&mut self, mutation: Mutation, at: Timestamp) -> Result<Outcome> {
        match mutation {
            Mutation::CreateSystem { name, kind } => self.exec_create_system(&name, kind),
            Mutation::AddAspect { token, description } => self.exec_add_aspect(&token, description),
            Mutation::AddToSphere { system, aspect } => self.exec_add_to_sphere(&system, &aspect),
            Mutation::SetPrimePurpose {
                system,
                verb_phrase,
                revision_rationale,
            } => self.exec_set_prime_purpose(&system, &verb_phrase, revision_rationale, at),
            Mutation::AddPurpose {
                kind,
                owner,
                verb_phrase,
                serves,
            } => self.exec_add_purpose(kind, &owner, &verb_phrase, &serves),
            Mutation::AddAction(action) => self.exec_add_action(action),
            Mutation::SubmitAssertion {
                step,
                text,
                referenced_entities,
            } => self.exec_submit(step, text, referenced_entities),
            Mutation::CompleteStep { step } => self.exec_complete(step),
            Mutation::ReviseAssertion {
                step,
                assertion,
                text,
                rationale,
            } => self.exec_revise(step, &assertion, text, &rationale, at),
            Mutation::ReconfirmStep { step } => self.exec_reconfirm(step, at),
        }
    }

    fn exec_create_system(&mut self, name: &str, kind: SystemKind) -> Result<Outcome> {
        let name = name.trim();
        if name.is_empty() {
            return Err(Error::Validation("system name must not be empty".into()));
        }
        if self.system_by_name(name).is_some() {
            return Err(Error::Duplicate {
                what: "system",
                value: name.into(),
            });
        }
        let system = SystemEntity {
            id: self.next_id("sys"),
            name: name.into(),
            kind,
            sphere_of_control: BTreeSet::new(),
            prime_purpose: None,
        };
        self.systems.push(system.clone());
        Ok(Outcome::System(system))
    }

    fn exec_add_aspect(&mut self, token: &str, description: Option<String>) -> Result<Outcome> {
        let token = token.trim();
        if !is_factor_token(token) {
            return Err(Error::Validation(format!(
                "`{token}` is not a factor token (letters, digits and underscores, at least two segments)"
            )));
        }
        let token = normalize_token(token);
        if self.aspect_by_token(&token).is_some() {
            return Err(Error::Duplicate {
                what: "aspect",
                value: token,
            });
        }
        let aspect = Aspect {
            id: self.next_id("asp"),
            token,
            description: description.filter(|d| !d.trim().is_empty()),
        };
        self.aspects.push(aspect.clone());
        Ok(Outcome::Aspect(aspect))
    }

    fn exec_add_to_sphere(&mut self, system: &EntityId, aspect: &EntityId) -> Result<Outcome> {
        self.require_system(system)?;
        self.require_aspect(aspect)?;
        // Growing a sphere must not turn an existing influence action into a control one.
        if let Some(action) = self.actions.iter().find(|a| {
            a.kind == ActionKind::Influence
                && &a.source_system == system
                && a.target_aspect.as_ref() == Some(aspect)
        }) {
            return Err(Error::Sphere {
                aspect: aspect.to_string(),
                reason: format!(
                    "influence action `{}` of `{system}` targets it from outside the sphere",
                    action.id
                ),
            });
        }
        let entry = self
            .systems
            .iter_mut()
            .find(|s| &s.id == system)
            .expect("checked above");
        if !entry.sphere_of_control.insert(aspect.clone()) {
            return Err(Error::Duplicate {
                what: "sphere member",
                value: aspect.to_string(),
            });
        }
        Ok(Outcome::System(entry.clone()))
    }

    fn exec_set_prime_purpose(
        &mut self,
        system: &EntityId,
        verb_phrase: &str,
        revision_rationale: Option<String>,
        at: Timestamp,
    ) -> Result<Outcome> {
        let current = self.require_system(system)?.prime_purpose.clone();
        let verb_phrase = non_empty(verb_phrase, "verb phrase")?;
        let rationale = match (&current, revision_rationale) {
            (Some(current), None) => {
                return Err(Error::Fixedness {
                    system: system.to_string(),
                    current: current.to_string(),
                })
            }
            (None, Some(_)) => {
                return Err(Error::State(format!(
                    "system `{system}` has no primary purpose to revise"
                )))
            }
            (_, Some(r)) => Some(non_empty(&r, "revision rationale")?),
            (None, None) => None,
        };

        let purpose = Purpose {
            id: self.next_id("pur"),
            kind: PurposeKind::Primary,
            owner_system: system.clone(),
            verb_phrase,
            serves: None,
            status: PurposeStatus::Current,
        };
        if let Some(old) = &current {
            if let Some(p) = self.purposes.iter_mut().find(|p| &p.id == old) {
                p.status = PurposeStatus::Archived;
            }
            self.revision_log.push(RevisionEvent {
                step_index: PRIME_PURPOSE_STEP,
                kind: RevisionKind::PrimePurposeRevised,
                subject: Some(old.clone()),
                replaced_by: Some(purpose.id.clone()),
                rationale,
                timestamp: at,
            });
            self.mark_downstream_stale(PRIME_PURPOSE_STEP);
        }
        self.purposes.push(purpose.clone());
        self.systems
            .iter_mut()
            .find(|s| &s.id == system)
            .expect("checked above")
            .prime_purpose = Some(purpose.id.clone());
        Ok(Outcome::Purpose(purpose))
    }

    fn exec_add_purpose(
        &mut self,
        kind: PurposeKind,
        owner: &EntityId,
        verb_phrase: &str,
        serves: &EntityId,
    ) -> Result<Outcome> {
        if kind == PurposeKind::Primary {
            return Err(Error::Validation(
                "primary purposes are set with set_prime_purpose".into(),
            ));
        }
        self.require_ref_system(owner)?;
        let verb_phrase = non_empty(verb_phrase, "verb phrase")?;
        match kind.serves() {
            ServesTarget::Purpose(expected) => {
                let target = self
                    .purpose(serves)
                    .ok_or_else(|| Error::Reference(serves.to_string()))?;
                if target.kind != expected {
                    return Err(Error::Chain(format!(
                        "{kind} purpose must serve a {expected} purpose, `{serves}` is {}",
                        target.kind
                    )));
                }
                if target.status == PurposeStatus::Archived {
                    return Err(Error::Chain(format!(
                        "`{serves}` is an archived primary purpose"
                    )));
                }
            }
            ServesTarget::Action(expected) => {
                let target = self
                    .action(serves)
                    .ok_or_else(|| Error::Reference(serves.to_string()))?;
                if target.kind != expected {
                    return Err(Error::Chain(format!(
                        "{kind} purpose must serve a {expected} action, `{serves}` is {}",
                        target.kind
                    )));
                }
            }
            ServesTarget::Nothing => unreachable!("primary handled above"),
        }
        let purpose = Purpose {
            id: self.next_id("pur"),
            kind,
            owner_system: owner.clone(),
            verb_phrase,
            serves: Some(serves.clone()),
            status: PurposeStatus::Current,
        };
        self.purposes.push(purpose.clone());
        Ok(Outcome::Purpose(purpose))
    }

    fn exec_add_action(&mut self, action: NewAction) -> Result<Outcome> {
        let source = self.require_ref_system(&action.source)?.clone();
        let target_system = match &action.target_system {
            Some(id) => Some(self.require_ref_system(id)?.clone()),
            None => None,
        };
        if let Some(id) = &action.target_aspect {
            if self.aspect(id).is_none() {
                return Err(Error::Reference(id.to_string()));
            }
        }
        let description = non_empty(&action.description, "action description")?;

        match action.kind {
            ActionKind::Influence => {
                let aspect = action.target_aspect.as_ref().ok_or_else(|| {
                    Error::Validation("influence actions need a target aspect".into())
                })?;
                if source.sphere_of_control.contains(aspect) {
                    return Err(Error::Sphere {
                        aspect: aspect.to_string(),
                        reason: format!(
                            "inside the sphere of control of source `{}`; use a control action",
                            source.id
                        ),
                    });
                }
                if let Some(sink) = &target_system {
                    if !sink.sphere_of_control.contains(aspect) {
                        return Err(Error::Sphere {
                            aspect: aspect.to_string(),
                            reason: format!(
                                "outside the sphere of control of target `{}`",
                                sink.id
                            ),
                        });
                    }
                }
            }
            ActionKind::Control => {
                let aspect = action.target_aspect.as_ref().ok_or_else(|| {
                    Error::Validation("control actions need a target aspect".into())
                })?;
                if !source.sphere_of_control.contains(aspect) {
                    return Err(Error::Sphere {
                        aspect: aspect.to_string(),
                        reason: format!("outside the sphere of control of source `{}`", source.id),
                    });
                }
            }
            ActionKind::Unsafe | ActionKind::Appreciative => {}
        }

        match (action.kind.fulfils(), &action.fulfills) {
            (None, Some(_)) => {
                return Err(Error::Chain(format!(
                    "{} actions do not fulfil a purpose",
                    action.kind
                )))
            }
            (Some(expected), None) => {
                return Err(Error::Chain(format!(
                    "{} actions must fulfil a {expected} purpose",
                    action.kind
                )))
            }
            (Some(expected), Some(id)) => {
                let purpose = self
                    .purpose(id)
                    .ok_or_else(|| Error::Reference(id.to_string()))?;
                if purpose.kind != expected {
                    return Err(Error::Chain(format!(
                        "{} action must fulfil a {expected} purpose, `{id}` is {}",
                        action.kind, purpose.kind
                    )));
                }
            }
            (None, None) => {}
        }

        let record = ActionRecord {
            id: self.next_id("act"),
            kind: action.kind,
            source_system: action.source,
            target_system: action.target_system,
            target_aspect: action.target_aspect,
            fulfills: action.fulfills,
            description,
        };
        self.actions.push(record.clone());
        Ok(Outcome::Action(record))
    }

    fn exec_submit(
        &mut self,
        step: u8,
        text: String,
        referenced_entities: BTreeSet<EntityId>,
    ) -> Result<Outcome> {
        let status = self.step(step)?.status;
        if !has_assertion_prefix(&text) {
            return Err(Error::Template);
        }
        if !status.is_editable() {
            return Err(Error::Gating {
                step,
                status: status.as_str(),
                action: "submitting an assertion",
            });
        }
        self.require_refs(&referenced_entities)?;
        let assertion = Assertion {
            id: self.next_id("asr"),
            step_index: step,
            revision: 1,
            factor_tokens: extract_factors(&text),
            text,
            referenced_entities,
            status: AssertionStatus::Current,
            revision_rationale: None,
            supersedes: None,
        };
        self.assertions.push(assertion.clone());
        Ok(Outcome::Assertion(assertion))
    }

    fn exec_complete(&mut self, step: u8) -> Result<Outcome> {
        let status = self.step(step)?.status;
        match status {
            StepStatus::Locked => {
                return Err(Error::Gating {
                    step,
                    status: status.as_str(),
                    action: "completing it",
                })
            }
            StepStatus::Complete => return Err(Error::AlreadyComplete(step)),
            StepStatus::InProgress | StepStatus::Stale => {}
        }
        if self.current_assertions(step).next().is_none() {
            return Err(Error::EmptyStep(step));
        }
        self.settle(step)
    }

    fn exec_revise(
        &mut self,
        step: u8,
        superseded: &EntityId,
        text: String,
        rationale: &str,
        at: Timestamp,
    ) -> Result<Outcome> {
        self.step(step)?;
        let old = self
            .assertion(superseded)
            .ok_or_else(|| Error::not_found("assertion", superseded.as_str()))?
            .clone();
        if old.step_index != step {
            return Err(Error::Validation(format!(
                "assertion `{superseded}` belongs to step {}, not step {step}",
                old.step_index
            )));
        }
        if !old.is_current() {
            return Err(Error::StaleReference(superseded.to_string()));
        }
        let rationale = non_empty(rationale, "revision rationale")?;
        if !has_assertion_prefix(&text) {
            return Err(Error::Template);
        }

        let new = Assertion {
            id: self.next_id("asr"),
            step_index: step,
            revision: old.revision + 1,
            factor_tokens: extract_factors(&text),
            text,
            referenced_entities: old.referenced_entities.clone(),
            status: AssertionStatus::Current,
            revision_rationale: Some(rationale.clone()),
            supersedes: Some(old.id.clone()),
        };
        if let Some(a) = self.assertions.iter_mut().find(|a| a.id == old.id) {
            a.status = AssertionStatus::Superseded;
        }
        self.assertions.push(new.clone());
        self.revision_log.push(RevisionEvent {
            step_index: step,
            kind: RevisionKind::AssertionRevised,
            subject: Some(old.id),
            replaced_by: Some(new.id.clone()),
            rationale: Some(rationale),
            timestamp: at,
        });
        self.mark_downstream_stale(step);
        Ok(Outcome::Assertion(new))
    }

    fn exec_reconfirm(&mut self, step: u8, at: Timestamp) -> Result<Outcome> {
        let status = self.step(step)?.status;
        if status != StepStatus::Stale {
            return Err(Error::State(format!(
                "step {step} is {status}; only stale steps can be reconfirmed"
            )));
        }
        self.revision_log.push(RevisionEvent {
            step_index: step,
            kind: RevisionKind::StepReconfirmed,
            subject: None,
            replaced_by: None,
            rationale: None,
            timestamp: at,
        });
        self.settle(step)
    }

    /// Marks `step` complete and opens the next step if it is still locked.
    fn settle(&mut self, step: u8) -> Result<Outcome> {
        self.step_mut(step)?.status = StepStatus::Complete;
        if step < STEP_COUNT {
            let next = self.step_mut(step + 1)?;
            if next.status == StepStatus::Locked {
                next.status = StepStatus::InProgress;
            }
        }
        Ok(Outcome::Step(*self.step(step)?))
    }

    fn mark_downstream_stale(&mut self, step: u8) {
        for st in self.steps.iter_mut().filter(|s| s.index > step) {
            if st.status == StepStatus::Complete {
                st.status = StepStatus::Stale;
            }
        }
    }

    fn require_system(&self, id: &EntityId) -> Result<&SystemEntity> {
        self.system(id)
            .ok_or_else(|| Error::not_found("system", id.as_str()))
    }

    fn require_aspect(&self, id: &EntityId) -> Result<&Aspect> {
        self.aspect(id)
            .ok_or_else(|| Error::not_found("aspect", id.as_str()))
    }

    fn require_ref_system(&self, id: &EntityId) -> Result<&SystemEntity> {
        self.system(id)
            .ok_or_else(|| Error::Reference(id.to_string()))
    }

    fn require_refs<'a>(&self, ids: impl IntoIterator<Item = &'a EntityId>) -> Result<()> {
        match ids.into_iter().find(|id| !self.entity_exists(id)) {
            Some(missing) => Err(Error::Reference(missing.to_string())),
            None => Ok(()),
        }
    }
}

fn non_empty(value: &str, what: &str) -> Result<String> {
    let trimmed = value.trim();
    if trimmed.is_empty() {
        Err(Error::Validation(format!("{what} must not be empty")))
    } else {
        Ok(trimmed.to_owned())
    }
}
