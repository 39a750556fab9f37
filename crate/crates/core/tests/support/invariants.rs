//! Workflow invariants checked after every operation of a random sequence.

use aic_core::model::has_assertion_prefix;
use aic_core::{
    save_session, validate_session, ActionKind, Error, FindingCode, Mutation, PurposeKind,
    PurposeStatus, Session, Severity, StepStatus,
};
use proptest::test_runner::TestCaseError;
use proptest::{prop_assert, prop_assert_eq, prop_assert_ne};

use super::ops;

/// Structural invariants every reachable session satisfies.
pub fn check_invariants(s: &Session) -> Result<(), TestCaseError> {
    let steps = s.steps();
    prop_assert_ne!(steps[0].status, StepStatus::Locked);
    for k in 1..steps.len() {
        if steps[k].status != StepStatus::Locked {
            prop_assert!(
                steps[k - 1].status.is_settled(),
                "step {} is {} after step {} {}",
                k + 1,
                steps[k].status,
                k,
                steps[k - 1].status
            );
        }
    }
    for sys in s.systems() {
        let current = s
            .purposes()
            .iter()
            .filter(|p| {
                p.owner_system == sys.id
                    && p.kind == PurposeKind::Primary
                    && p.status == PurposeStatus::Current
            })
            .count();
        prop_assert!(
            current <= 1,
            "{} has {current} current primary purposes",
            sys.id
        );
    }
    for a in s.actions() {
        let source = s.system(&a.source_system).unwrap();
        match a.kind {
            ActionKind::Influence => {
                let aspect = a.target_aspect.as_ref().unwrap();
                prop_assert!(!source.sphere_of_control.contains(aspect));
                if let Some(t) = &a.target_system {
                    prop_assert!(s.system(t).unwrap().sphere_of_control.contains(aspect));
                }
            }
            ActionKind::Control => {
                prop_assert!(source
                    .sphere_of_control
                    .contains(a.target_aspect.as_ref().unwrap()));
            }
            _ => {}
        }
    }
    for a in s.assertions() {
        prop_assert!(has_assertion_prefix(&a.text));
        prop_assert!(a.revision >= 1);
        if a.is_current() {
            prop_assert_ne!(s.step(a.step_index).unwrap().status, StepStatus::Locked);
        }
    }
    // Operations alone never produce error findings, except the missing
    // downstream purposes that become errors once their step is complete.
    for f in validate_session(s) {
        if f.severity != Severity::Error {
            continue;
        }
        let allowed = match f.code {
            FindingCode::ChainControl => s.step(6).unwrap().status == StepStatus::Complete,
            FindingCode::ChainAppreciation => s.step(7).unwrap().status == StepStatus::Complete,
            _ => false,
        };
        prop_assert!(allowed, "unexpected error finding {f:?}");
    }
    Ok(())
}

fn stale_source(m: &Mutation, before: &Session) -> Option<u8> {
    match m {
        Mutation::ReviseAssertion { step, .. } => Some(*step),
        Mutation::SetPrimePurpose { system, .. } => before
            .system(system)
            .and_then(|s| s.prime_purpose.as_ref())
            .map(|_| 4),
        _ => None,
    }
}

/// Runs `seeds`, checking rejection atomicity, version steps, append-only
/// history, staleness propagation and PrimeP fixedness along the way.
pub fn check_sequence(seeds: &[ops::OpSeed]) -> Result<(), TestCaseError> {
    let mut s = ops::fresh("wf");
    for (i, seed) in seeds.iter().enumerate() {
        let before = s.clone();
        let before_bytes = save_session(&s);
        let m = ops::resolve(seed, &s);
        match s.apply(m.clone(), ops::at(i)) {
            Err(e) => {
                prop_assert_eq!(&s, &before, "rejected {:?} ({}) changed the session", m, e);
                prop_assert_eq!(save_session(&s), before_bytes);
                if let Mutation::SetPrimePurpose {
                    system,
                    revision_rationale: None,
                    ..
                } = &m
                {
                    if before
                        .system(system)
                        .is_some_and(|x| x.prime_purpose.is_some())
                    {
                        prop_assert!(matches!(e, Error::Fixedness { .. }), "{e}");
                    }
                }
            }
            Ok(_) => {
                prop_assert_eq!(s.version(), before.version() + 1);
                // Append-only history.
                prop_assert!(s.revision_log().starts_with(before.revision_log()));
                for old in before.assertions() {
                    let now = s.assertion(&old.id).unwrap();
                    prop_assert_eq!(&now.text, &old.text);
                }
                if let Some(k) = stale_source(&m, &before) {
                    for j in (k + 1)..=8 {
                        if before.step(j).unwrap().status == StepStatus::Complete {
                            prop_assert_eq!(s.step(j).unwrap().status, StepStatus::Stale);
                        }
                    }
                }
            }
        }
        check_invariants(&s)?;
    }
    Ok(())
}

/// Replaying the accepted mutations reproduces the session exactly.
pub fn check_replay(seeds: &[ops::OpSeed]) -> Result<(), TestCaseError> {
    let run = ops::run("replay", seeds);
    let mut again = ops::fresh("replay");
    for (m, at) in &run.accepted {
        again.apply(m.clone(), *at).unwrap();
    }
    prop_assert_eq!(save_session(&again), save_session(&run.session));
    prop_assert_eq!(again, run.session);
    Ok(())
}
