//! Whole-session structural audit.
//!
//! The engine enforces these rules at write time, so a session built only
//! through [`Session::apply`](crate::session::Session::apply) produces no
//! error findings from them. Documents loaded from disk may have been edited
//! by hand, which is what this pass is for.
//!
//! | code                 | severity | raised when |
//! |----------------------|----------|-------------|
//! | `PRIMEP_UNIQUE`      | error    | a system has more than one current primary purpose, or its `prime_purpose` link disagrees with the purposes it owns |
//! | `PRIMEP_REVISION`    | error    | an archived primary purpose has no revision event with a rationale |
//! | `CHAIN_INFLUENCE`    | error    | an influence purpose does not serve a primary purpose, an influence action does not fulfil an influence purpose, a primary purpose serves something, or an unsafe action fulfils something |
//! | `CHAIN_INFLUENCE`    | warning  | a current primary purpose has no influence purpose, or an influence purpose serves an archived primary |
//! | `CHAIN_CONTROL`      | error    | a control purpose does not serve an influence action, or a control action does not fulfil a control purpose |
//! | `CHAIN_CONTROL`      | warning  | an influence action has no control purpose (error once step 6 is complete) |
//! | `CHAIN_APPRECIATION` | error    | an appreciation purpose does not serve a control action, or an appreciative action does not fulfil an appreciation purpose |
//! | `CHAIN_APPRECIATION` | warning  | a control action has no appreciation purpose (error once step 7 is complete) |
//! | `SPHERE_INFLUENCE`   | error    | an influence action has no target aspect, targets its source's sphere, or misses its sink's sphere |
//! | `SPHERE_CONTROL`     | error    | a control action has no target aspect or targets outside its source's sphere |
//! | `TEMPLATE_PREFIX`    | error    | an assertion does not start with the mandatory prefix |
//! | `GATING`             | error    | step 1 is locked, a step is open while its predecessor is not settled, or a locked step has current assertions |
//! | `DANGLING_REF`       | error    | any id reference points at nothing |

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    has_assertion_prefix, ActionKind, ActionRecord, EntityId, Purpose, PurposeKind, PurposeStatus,
    ServesTarget,
};
use crate::session::{RevisionKind, Session, StepStatus};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum FindingCode {
    PrimepUnique,
    PrimepRevision,
    ChainInfluence,
    ChainControl,
    ChainAppreciation,
    SphereInfluence,
    SphereControl,
    TemplatePrefix,
    Gating,
    DanglingRef,
}

impl FindingCode {
    pub const ALL: [FindingCode; 10] = [
        FindingCode::PrimepUnique,
        FindingCode::PrimepRevision,
        FindingCode::ChainInfluence,
        FindingCode::ChainControl,
        FindingCode::ChainAppreciation,
        FindingCode::SphereInfluence,
        FindingCode::SphereControl,
        FindingCode::TemplatePrefix,
        FindingCode::Gating,
        FindingCode::DanglingRef,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            FindingCode::PrimepUnique => "PRIMEP_UNIQUE",
            FindingCode::PrimepRevision => "PRIMEP_REVISION",
            FindingCode::ChainInfluence => "CHAIN_INFLUENCE",
            FindingCode::ChainControl => "CHAIN_CONTROL",
            FindingCode::ChainAppreciation => "CHAIN_APPRECIATION",
            FindingCode::SphereInfluence => "SPHERE_INFLUENCE",
            FindingCode::SphereControl => "SPHERE_CONTROL",
            FindingCode::TemplatePrefix => "TEMPLATE_PREFIX",
            FindingCode::Gating => "GATING",
            FindingCode::DanglingRef => "DANGLING_REF",
        }
    }
}

impl fmt::Display for FindingCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Severity {
    Error,
    Warning,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(match self {
            Severity::Error => "error",
            Severity::Warning => "warning",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Finding {
    pub code: FindingCode,
    pub severity: Severity,
    pub entity: String,
    pub message: String,
}

impl Finding {
    fn error(code: FindingCode, entity: impl fmt::Display, message: impl Into<String>) -> Self {
        Finding {
            code,
            severity: Severity::Error,
            entity: entity.to_string(),
            message: message.into(),
        }
    }

    fn warning(code: FindingCode, entity: impl fmt::Display, message: impl Into<String>) -> Self {
        Finding {
            severity: Severity::Warning,
            ..Finding::error(code, entity, message)
        }
    }
}

pub fn has_errors(findings: &[Finding]) -> bool {
    findings.iter().any(|f| f.severity == Severity::Error)
}

/// All rule violations, ordered by code then entity id.
pub fn validate_session(session: &Session) -> Vec<Finding> {
    let mut out = Vec::new();
    check_references(session, &mut out);
    check_prime_purposes(session, &mut out);
    check_chains(session, &mut out);
    check_spheres(session, &mut out);
    check_assertions(session, &mut out);
    check_gating(session, &mut out);
    out.sort_by(|a, b| {
        (a.code.as_str(), &a.entity, &a.message).cmp(&(b.code.as_str(), &b.entity, &b.message))
    });
    out.dedup();
    out
}

fn check_references(s: &Session, out: &mut Vec<Finding>) {
    let mut dangling = |owner: &EntityId, field: &str, target: &EntityId, exists: bool| {
        if !exists {
            out.push(Finding::error(
                FindingCode::DanglingRef,
                owner,
                format!("{field} references missing entity `{target}`"),
            ));
        }
    };
    for sys in s.systems() {
        for aspect in &sys.sphere_of_control {
            dangling(
                &sys.id,
                "sphere_of_control",
                aspect,
                s.aspect(aspect).is_some(),
            );
        }
        if let Some(p) = &sys.prime_purpose {
            dangling(&sys.id, "prime_purpose", p, s.purpose(p).is_some());
        }
    }
    for p in s.purposes() {
        dangling(
            &p.id,
            "owner_system",
            &p.owner_system,
            s.system(&p.owner_system).is_some(),
        );
        if let Some(target) = &p.serves {
            let exists = s.purpose(target).is_some() || s.action(target).is_some();
            dangling(&p.id, "serves", target, exists);
        }
    }
    for a in s.actions() {
        dangling(
            &a.id,
            "source_system",
            &a.source_system,
            s.system(&a.source_system).is_some(),
        );
        if let Some(t) = &a.target_system {
            dangling(&a.id, "target_system", t, s.system(t).is_some());
        }
        if let Some(t) = &a.target_aspect {
            dangling(&a.id, "target_aspect", t, s.aspect(t).is_some());
        }
        if let Some(t) = &a.fulfills {
            dangling(&a.id, "fulfills", t, s.purpose(t).is_some());
        }
    }
    for a in s.assertions() {
        for r in &a.referenced_entities {
            dangling(&a.id, "referenced_entities", r, s.entity_exists(r));
        }
    }
    for a in s.assertions() {
        match &a.supersedes {
            Some(prev) => match s.assertion(prev) {
                None => out.push(self::dangling(&a.id, "supersedes", prev)),
                Some(p) if p.revision + 1 != a.revision || p.step_index != a.step_index => out
                    .push(Finding::error(
                        FindingCode::DanglingRef,
                        &a.id,
                        format!(
                            "supersedes `{prev}`, which is not the previous revision in step {}",
                            a.step_index
                        ),
                    )),
                Some(_) => {}
            },
            None if a.revision != 1 => out.push(Finding::error(
                FindingCode::DanglingRef,
                &a.id,
                format!(
                    "revision {} must reference the assertion it supersedes",
                    a.revision
                ),
            )),
            None => {}
        }
    }
}

fn check_prime_purposes(s: &Session, out: &mut Vec<Finding>) {
    for sys in s.systems() {
        let current: Vec<&Purpose> = s
            .purposes()
            .iter()
            .filter(|p| {
                p.owner_system == sys.id
                    && p.kind == PurposeKind::Primary
                    && p.status == PurposeStatus::Current
            })
            .collect();
        if current.len() > 1 {
            let ids: Vec<&str> = current.iter().map(|p| p.id.as_str()).collect();
            out.push(Finding::error(
                FindingCode::PrimepUnique,
                &sys.id,
                format!("{} current primary purposes: {}", ids.len(), ids.join(", ")),
            ));
            continue;
        }
        match (&sys.prime_purpose, current.first()) {
            (Some(link), Some(p)) if *link == p.id => {}
            (None, None) => {}
            (Some(link), _) if s.purpose(link).is_none() => {} // reported as dangling
            (link, p) => out.push(Finding::error(
                FindingCode::PrimepUnique,
                &sys.id,
                format!(
                    "prime_purpose link `{}` does not match the current primary purpose `{}`",
                    link.as_ref().map_or("none", |l| l.as_str()),
                    p.map_or("none", |p| p.id.as_str())
                ),
            )),
        }
    }
    for p in s.purposes() {
        if p.kind != PurposeKind::Primary || p.status != PurposeStatus::Archived {
            continue;
        }
        let recorded = s.revision_log().iter().any(|e| {
            e.kind == RevisionKind::PrimePurposeRevised
                && e.subject.as_ref() == Some(&p.id)
                && e.rationale.as_deref().is_some_and(|r| !r.trim().is_empty())
        });
        if !recorded {
            out.push(Finding::error(
                FindingCode::PrimepRevision,
                &p.id,
                "archived primary purpose has no recorded revision with rationale",
            ));
        }
    }
}

fn chain_code_for_purpose(kind: PurposeKind) -> FindingCode {
    match kind {
        PurposeKind::Primary | PurposeKind::Influence => FindingCode::ChainInfluence,
        PurposeKind::Control => FindingCode::ChainControl,
        PurposeKind::Appreciation => FindingCode::ChainAppreciation,
    }
}

fn chain_code_for_action(kind: ActionKind) -> FindingCode {
    match kind {
        ActionKind::Unsafe | ActionKind::Influence => FindingCode::ChainInfluence,
        ActionKind::Control => FindingCode::ChainControl,
        ActionKind::Appreciative => FindingCode::ChainAppreciation,
    }
}

/// Problem with a purpose's `serves` link, if any.
fn serves_finding(s: &Session, p: &Purpose) -> Option<Finding> {
    let code = chain_code_for_purpose(p.kind);
    let expected = p.kind.serves();
    let Some(target) = &p.serves else {
        return match expected {
            ServesTarget::Nothing => None,
            _ => Some(Finding::error(
                code,
                &p.id,
                format!("{} purpose serves nothing", p.kind),
            )),
        };
    };
    match expected {
        ServesTarget::Nothing => Some(Finding::error(
            code,
            &p.id,
            format!("primary purpose must not serve anything (serves `{target}`)"),
        )),
        ServesTarget::Purpose(kind) => match s.purpose(target) {
            Some(t) if t.kind == kind => None,
            Some(t) => Some(Finding::error(
                code,
                &p.id,
                format!(
                    "{} purpose serves {} purpose `{target}`, expected {kind}",
                    p.kind, t.kind
                ),
            )),
            None if s.action(target).is_some() => Some(Finding::error(
                code,
                &p.id,
                format!(
                    "{} purpose serves action `{target}`, expected a {kind} purpose",
                    p.kind
                ),
            )),
            None => Some(dangling(&p.id, "serves", target)),
        },
        ServesTarget::Action(kind) => match s.action(target) {
            Some(t) if t.kind == kind => None,
            Some(t) => Some(Finding::error(
                code,
                &p.id,
                format!(
                    "{} purpose serves {} action `{target}`, expected {kind}",
                    p.kind, t.kind
                ),
            )),
            None if s.purpose(target).is_some() => Some(Finding::error(
                code,
                &p.id,
                format!(
                    "{} purpose serves purpose `{target}`, expected a {kind} action",
                    p.kind
                ),
            )),
            None => Some(dangling(&p.id, "serves", target)),
        },
    }
}

/// Problem with an action's `fulfills` link, if any.
fn fulfills_finding(s: &Session, a: &ActionRecord) -> Option<Finding> {
    let code = chain_code_for_action(a.kind);
    match (a.kind.fulfils(), &a.fulfills) {
        (None, None) => None,
        (None, Some(t)) => Some(Finding::error(
            code,
            &a.id,
            format!(
                "{} action must not fulfil a purpose (fulfils `{t}`)",
                a.kind
            ),
        )),
        (Some(kind), None) => Some(Finding::error(
            code,
            &a.id,
            format!("{} action fulfils no {kind} purpose", a.kind),
        )),
        (Some(kind), Some(t)) => match s.purpose(t) {
            Some(p) if p.kind == kind => None,
            Some(p) => Some(Finding::error(
                code,
                &a.id,
                format!(
                    "{} action fulfils {} purpose `{t}`, expected {kind}",
                    a.kind, p.kind
                ),
            )),
            None => Some(dangling(&a.id, "fulfills", t)),
        },
    }
}

fn dangling(owner: &EntityId, field: &str, target: &EntityId) -> Finding {
    Finding::error(
        FindingCode::DanglingRef,
        owner,
        format!("{field} references missing entity `{target}`"),
    )
}

fn archived_primary_finding(s: &Session, p: &Purpose) -> Option<Finding> {
    if p.kind != PurposeKind::Influence {
        return None;
    }
    let primary = p.serves.as_ref().and_then(|t| s.purpose(t))?;
    (primary.kind == PurposeKind::Primary && primary.status == PurposeStatus::Archived).then(|| {
        Finding::warning(
            FindingCode::ChainInfluence,
            &p.id,
            format!("serves archived primary purpose `{}`", primary.id),
        )
    })
}

fn check_chains(s: &Session, out: &mut Vec<Finding>) {
    for p in s.purposes() {
        // Dangling links are already reported by check_references.
        if let Some(f) = serves_finding(s, p).filter(|f| f.code != FindingCode::DanglingRef) {
            out.push(f);
        }
        out.extend(archived_primary_finding(s, p));
    }
    for a in s.actions() {
        if let Some(f) = fulfills_finding(s, a).filter(|f| f.code != FindingCode::DanglingRef) {
            out.push(f);
        }
    }

    let served: BTreeSet<&EntityId> = s
        .purposes()
        .iter()
        .filter_map(|p| p.serves.as_ref())
        .collect();
    let step_complete = |k: u8| s.step(k).is_ok_and(|st| st.status == StepStatus::Complete);
    let missing = |k: u8| {
        if step_complete(k) {
            Severity::Error
        } else {
            Severity::Warning
        }
    };

    for sys in s.systems() {
        let Some(prime) = sys.prime_purpose.as_ref().and_then(|id| s.purpose(id)) else {
            continue;
        };
        let has_influence = s
            .purposes()
            .iter()
            .any(|p| p.kind == PurposeKind::Influence && p.serves.as_ref() == Some(&prime.id));
        if !has_influence {
            out.push(Finding::warning(
                FindingCode::ChainInfluence,
                &prime.id,
                "primary purpose has no influence purpose",
            ));
        }
    }
    for a in s.actions() {
        let (code, needed, step) = match a.kind {
            ActionKind::Influence => (FindingCode::ChainControl, PurposeKind::Control, 6),
            ActionKind::Control => (FindingCode::ChainAppreciation, PurposeKind::Appreciation, 7),
            _ => continue,
        };
        if !served.contains(&a.id) {
            out.push(Finding {
                code,
                severity: missing(step),
                entity: a.id.to_string(),
                message: format!("{} action has no {needed} purpose", a.kind),
            });
        }
    }
}

fn check_spheres(s: &Session, out: &mut Vec<Finding>) {
    for a in s.actions() {
        let Some(source) = s.system(&a.source_system) else {
            continue;
        };
        match a.kind {
            ActionKind::Influence => {
                let Some(aspect) = &a.target_aspect else {
                    out.push(Finding::error(
                        FindingCode::SphereInfluence,
                        &a.id,
                        "influence action has no target aspect",
                    ));
                    continue;
                };
                if source.sphere_of_control.contains(aspect) {
                    out.push(Finding::error(
                        FindingCode::SphereInfluence,
                        &a.id,
                        format!(
                            "target aspect `{aspect}` is inside the sphere of source `{}`",
                            source.id
                        ),
                    ));
                }
                if let Some(sink) = a.target_system.as_ref().and_then(|t| s.system(t)) {
                    if !sink.sphere_of_control.contains(aspect) {
                        out.push(Finding::error(
                            FindingCode::SphereInfluence,
                            &a.id,
                            format!(
                                "target aspect `{aspect}` is outside the sphere of target `{}`",
                                sink.id
                            ),
                        ));
                    }
                }
            }
            ActionKind::Control => match &a.target_aspect {
                None => out.push(Finding::error(
                    FindingCode::SphereControl,
                    &a.id,
                    "control action has no target aspect",
                )),
                Some(aspect) if !source.sphere_of_control.contains(aspect) => {
                    out.push(Finding::error(
                        FindingCode::SphereControl,
                        &a.id,
                        format!(
                            "target aspect `{aspect}` is outside the sphere of source `{}`",
                            source.id
                        ),
                    ))
                }
                Some(_) => {}
            },
            ActionKind::Unsafe | ActionKind::Appreciative => {}
        }
    }
}

fn check_assertions(s: &Session, out: &mut Vec<Finding>) {
    for a in s.assertions() {
        if !has_assertion_prefix(&a.text) {
            out.push(Finding::error(
                FindingCode::TemplatePrefix,
                &a.id,
                format!(
                    "text does not begin with \"{}\"",
                    crate::model::ASSERTION_PREFIX
                ),
            ));
        }
    }
}

fn check_gating(s: &Session, out: &mut Vec<Finding>) {
    let steps = s.steps();
    if steps[0].status == StepStatus::Locked {
        out.push(Finding::error(
            FindingCode::Gating,
            "step-1",
            "step 1 is locked",
        ));
    }
    // Checking each step against its immediate predecessor finds every
    // violation of the all-predecessors rule, reported once at its first step.
    for pair in steps.windows(2) {
        let (prev, cur) = (pair[0], pair[1]);
        if cur.status != StepStatus::Locked && !prev.status.is_settled() {
            out.push(Finding::error(
                FindingCode::Gating,
                format!("step-{}", cur.index),
                format!(
                    "step {} is {} while step {} is {}",
                    cur.index, cur.status, prev.index, prev.status
                ),
            ));
        }
    }
    for a in s.assertions().iter().filter(|a| a.is_current()) {
        if s.step(a.step_index)
            .is_ok_and(|st| st.status == StepStatus::Locked)
        {
            out.push(Finding::error(
                FindingCode::Gating,
                &a.id,
                format!("current assertion in locked step {}", a.step_index),
            ));
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "entity", rename_all = "snake_case")]
pub enum ChainLink {
    Purpose { id: EntityId, kind: PurposeKind },
    Action { id: EntityId, kind: ActionKind },
}

impl ChainLink {
    pub fn id(&self) -> &EntityId {
        match self {
            ChainLink::Purpose { id, .. } | ChainLink::Action { id, .. } => id,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "result", rename_all = "snake_case")]
pub enum ChainTrace {
    /// Every link from the starting purpose down to a primary purpose.
    Complete { links: Vec<ChainLink> },
    /// Links walked so far plus the finding for the first broken one.
    Broken {
        links: Vec<ChainLink>,
        findings: Vec<Finding>,
    },
}

impl ChainTrace {
    pub fn links(&self) -> &[ChainLink] {
        match self {
            ChainTrace::Complete { links } | ChainTrace::Broken { links, .. } => links,
        }
    }

    pub fn is_complete(&self) -> bool {
        matches!(self, ChainTrace::Complete { .. })
    }
}

/// Follows serves/fulfills links from `purpose_id` down to a primary purpose.
pub fn validate_chain(session: &Session, purpose_id: &EntityId) -> Result<ChainTrace> {
    let start = session
        .purpose(purpose_id)
        .ok_or_else(|| Error::not_found("purpose", purpose_id.as_str()))?;
    let mut links = Vec::new();
    let mut seen = BTreeSet::new();
    let mut purpose = start;
    loop {
        if !seen.insert(purpose.id.clone()) {
            return Ok(broken(
                links,
                cycle(&purpose.id, chain_code_for_purpose(purpose.kind)),
            ));
        }
        links.push(ChainLink::Purpose {
            id: purpose.id.clone(),
            kind: purpose.kind,
        });
        if let Some(f) =
            serves_finding(session, purpose).or_else(|| archived_primary_finding(session, purpose))
        {
            return Ok(broken(links, f));
        }
        let Some(target) = &purpose.serves else {
            return Ok(ChainTrace::Complete { links });
        };
        let next = match session.action(target) {
            Some(action) => {
                if !seen.insert(action.id.clone()) {
                    return Ok(broken(
                        links,
                        cycle(&action.id, chain_code_for_action(action.kind)),
                    ));
                }
                links.push(ChainLink::Action {
                    id: action.id.clone(),
                    kind: action.kind,
                });
                if let Some(f) = fulfills_finding(session, action) {
                    return Ok(broken(links, f));
                }
                action.fulfills.as_ref()
            }
            None => Some(target),
        };
        purpose = match next.and_then(|id| session.purpose(id)) {
            Some(p) => p,
            None => unreachable!("serves/fulfills findings cover missing purposes"),
        };
    }
}

fn broken(links: Vec<ChainLink>, finding: Finding) -> ChainTrace {
    ChainTrace::Broken {
        links,
        findings: vec![finding],
    }
}

fn cycle(id: &EntityId, code: FindingCode) -> Finding {
    Finding::error(code, id, "chain revisits this entity")
}
