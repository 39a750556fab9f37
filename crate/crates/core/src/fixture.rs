//! Bundled collision-avoidance case study.
//!
//! An aircraft fitted with a perception-based collision avoidance system (AVP)
//! is worked through all eight steps, including a revision of step 1 made
//! during step 2 and a replacement of the AVP's primary purpose made during
//! step 5. Every mutation is stamped from a fixed clock so the resulting
//! document is byte-stable.

use std::collections::BTreeSet;

use crate::engine::{Mutation, NewAction, Outcome};
use crate::model::{ActionKind, EntityId, PurposeKind, SystemKind};
use crate::session::{Session, SessionConfig, Timestamp};

pub const SESSION_ID: &str = "collision-avoidance";
pub const SESSION_NAME: &str = "collision-avoidance";

/// 2024-02-06T09:00:00Z; each mutation advances the clock by one minute.
const START: i64 = 1_707_210_000;

const STEP1: &str = "The architect asserts that the initial observation of the problem is the following unsafe behaviour: two or more aircraft come into unplanned contact during flight. One aircraft is equipped with a computer perception-based collision avoidance system. The intruder aircraft is following a flight path that intersects with another aircraft.";
const STEP1_REVISED: &str = "The architect asserts that the initial observation of the problem is the following unsafe behaviour: two or more aircraft come into unplanned contact during flight. One aircraft is equipped with a computer perception-based collision avoidance system. The intruder aircraft is in constant motion, following a flight path that intersects with another aircraft.";
const STEP1_RATIONALE: &str = "Considering the impact of the intruder aircraft motion on the perception system showed that the intruder being in constant motion must be an explicit assumption.";
const STEP2: &str = "The architect asserts that the following is a valid list of purposed systems of concern: perception-based collision avoidance system (AVP), the intruder aircraft, and the ownship aircraft.";
const STEP3: &str = "The architect asserts that the only potential unsafe action of AVP is the failure of the perception model to detect an intruding aircraft.";
const STEP4: &str = "The architect asserts that the one and only primary purpose of the AVP system is to govern the capability to detect intruder aircraft reliably and correctly. There is no other possible primary purpose besides that in any given scenario.";
const STEP4_REVISED: &str = "The architect asserts that the one and only primary purpose of the AVP system is assisting the ownship pilot in appreciating the open airspace safety. There is no other possible primary purpose besides that in any given scenario.";
const STEP4_RATIONALE: &str = "Detecting intruder aircraft is too thought-restraining as a general purpose; it becomes an auxiliary step towards assisting the ownship pilot.";
const STEP5: &str = "The architect asserts that a valid auxiliary influence purpose for AVP to achieve its primary purpose, the (AVP) must at least aim to enhance the (own_aircraft_pilot_decision_making_process). To achieve the purpose of influence, AVP must at least perform the following influence action: AVP augments the pilot's awareness (own_aircraft_pilot_situation_awareness) of their surrounding environment (surrounding_airspace_safety).";
const STEP6: &str = "The architect asserts that a valid control purpose would be to enhance (own_aircraft_pilot_decision_making_process). To achieve the valid control purpose, AVP must at least perform a control action of employing (threat_predictive_model) to forecast subsequent positions of (intruder_aircraft_position) and evaluate the risk of a potential collision (risk_of_potential_collision).";
const STEP7: &str = "The architect asserts that in order to ensure the effectiveness of the identified control behaviour in achieving the intended impact of the control purpose, the AVP must acknowledge the context and potential limitations of visual information received from imaging sensors (own_aircraft_camera). The AVP needs to acquire the following appreciative behaviour: account for (sun_position) in the sky relative to the direction of the camera (own_camera).";
const STEP8: &str = "The architect asserts that, after collating the factors mentioned throughout steps 1-7 and counting how often each is mentioned, (own_aircraft_pilot_decision_making_process) is the most critical factor in the problem domain, while the least mentioned factors are potential red flags for surprising emergence.";

/// Applies mutations from a fixed clock and keeps the script.
struct Recorder {
    session: Session,
    script: Vec<Mutation>,
}

impl Recorder {
    fn apply(&mut self, m: Mutation) -> Outcome {
        let at = Timestamp::from_unix(START + 60 * self.script.len() as i64);
        self.script.push(m.clone());
        self.session
            .apply(m, at)
            .unwrap_or_else(|e| panic!("fixture mutation rejected: {e}"))
    }

    fn id(&mut self, m: Mutation) -> EntityId {
        match self.apply(m) {
            Outcome::System(x) => x.id,
            Outcome::Aspect(x) => x.id,
            Outcome::Purpose(x) => x.id,
            Outcome::Action(x) => x.id,
            Outcome::Assertion(x) => x.id,
            Outcome::Step(_) => unreachable!("steps have no entity id"),
        }
    }

    fn system(&mut self, name: &str, kind: SystemKind) -> EntityId {
        self.id(Mutation::CreateSystem {
            name: name.into(),
            kind,
        })
    }

    /// Registers an aspect, optionally inside a system's sphere of control.
    fn aspect(&mut self, token: &str, description: &str, owner: Option<&EntityId>) -> EntityId {
        let id = self.id(Mutation::AddAspect {
            token: token.into(),
            description: Some(description.into()),
        });
        if let Some(owner) = owner {
            self.apply(Mutation::AddToSphere {
                system: owner.clone(),
                aspect: id.clone(),
            });
        }
        id
    }

    fn purpose(
        &mut self,
        kind: PurposeKind,
        owner: &EntityId,
        verb: &str,
        serves: &EntityId,
    ) -> EntityId {
        self.id(Mutation::AddPurpose {
            kind,
            owner: owner.clone(),
            verb_phrase: verb.into(),
            serves: serves.clone(),
        })
    }

    fn submit(&mut self, step: u8, text: &str, refs: &[&EntityId]) -> EntityId {
        self.id(Mutation::SubmitAssertion {
            step,
            text: text.into(),
            referenced_entities: refs.iter().map(|r| (*r).clone()).collect::<BTreeSet<_>>(),
        })
    }

    fn complete(&mut self, step: u8) {
        self.apply(Mutation::CompleteStep { step });
    }
}

fn record() -> Recorder {
    let session = Session::with_id(SESSION_ID, SESSION_NAME, SessionConfig::default())
        .expect("fixture session parameters are valid");
    let mut r = Recorder {
        session,
        script: Vec::new(),
    };

    // Step 1: the unsafe behaviour.
    let step1 = r.submit(1, STEP1, &[]);
    r.complete(1);

    // Step 2: contributing systems; step 1 is revised along the way.
    let avp = r.system(
        "perception-based collision avoidance system (AVP)",
        SystemKind::Agent,
    );
    let intruder = r.system("intruder aircraft", SystemKind::NonAgent);
    let ownship = r.system("ownship aircraft", SystemKind::NonAgent);
    r.submit(2, STEP2, &[&avp, &intruder, &ownship]);
    r.apply(Mutation::ReviseAssertion {
        step: 1,
        assertion: step1,
        text: STEP1_REVISED.into(),
        rationale: STEP1_RATIONALE.into(),
    });
    r.complete(2);

    // Step 3: the AVP's unsafe action.
    let unsafe_action = r.id(Mutation::AddAction(NewAction {
        kind: ActionKind::Unsafe,
        source: avp.clone(),
        target_system: Some(intruder.clone()),
        target_aspect: None,
        fulfills: None,
        description: "the perception model fails to detect an intruding aircraft".into(),
    }));
    r.submit(3, STEP3, &[&avp, &unsafe_action]);
    r.complete(3);

    // Step 4: the first primary purpose.
    r.apply(Mutation::SetPrimePurpose {
        system: avp.clone(),
        verb_phrase: "govern the capability to detect intruder aircraft reliably and correctly"
            .into(),
        revision_rationale: None,
    });
    let step4 = r.submit(4, STEP4, &[&avp]);
    r.complete(4);

    // Step 5: revisiting step 4, then the influence interaction.
    let prime = r.id(Mutation::SetPrimePurpose {
        system: avp.clone(),
        verb_phrase: "assisting the ownship pilot in appreciating the open airspace safety".into(),
        revision_rationale: Some(STEP4_RATIONALE.into()),
    });
    r.apply(Mutation::ReviseAssertion {
        step: 4,
        assertion: step4,
        text: STEP4_REVISED.into(),
        rationale: STEP4_RATIONALE.into(),
    });
    r.aspect(
        "own_aircraft_pilot_decision_making_process",
        "how the ownship pilot decides on manoeuvres",
        Some(&ownship),
    );
    let awareness = r.aspect(
        "own_aircraft_pilot_situation_awareness",
        "the ownship pilot's situational safety awareness",
        Some(&ownship),
    );
    r.aspect(
        "surrounding_airspace_safety",
        "safety of the surrounding airspace",
        None,
    );
    let influence_purpose = r.purpose(
        PurposeKind::Influence,
        &avp,
        "enhance the ownship pilot's decision-making process",
        &prime,
    );
    let influence_action = r.id(Mutation::AddAction(NewAction {
        kind: ActionKind::Influence,
        source: avp.clone(),
        target_system: Some(ownship.clone()),
        target_aspect: Some(awareness.clone()),
        fulfills: Some(influence_purpose.clone()),
        description: "augment the pilot's situational safety awareness of their surroundings"
            .into(),
    }));
    r.submit(
        5,
        STEP5,
        &[&avp, &ownship, &influence_purpose, &influence_action],
    );
    r.complete(5);

    // Step 6: the control interaction.
    let model = r.aspect(
        "threat_predictive_model",
        "collision threat model forecasting intruder positions",
        Some(&avp),
    );
    r.aspect(
        "intruder_aircraft_position",
        "position of the intruder aircraft",
        Some(&intruder),
    );
    r.aspect(
        "risk_of_potential_collision",
        "risk of a potential collision",
        None,
    );
    let control_purpose = r.purpose(
        PurposeKind::Control,
        &avp,
        "augment the ownship pilot's situational safety awareness",
        &influence_action,
    );
    let control_action = r.id(Mutation::AddAction(NewAction {
        kind: ActionKind::Control,
        source: avp.clone(),
        target_system: None,
        target_aspect: Some(model.clone()),
        fulfills: Some(control_purpose.clone()),
        description: "employ the threat predictive model to forecast subsequent intruder positions and evaluate the risk of a potential collision".into(),
    }));
    r.submit(6, STEP6, &[&avp, &control_purpose, &control_action]);
    r.complete(6);

    // Step 7: the appreciation interaction.
    r.aspect(
        "own_aircraft_camera",
        "imaging sensor on the ownship aircraft",
        Some(&ownship),
    );
    let sun = r.aspect("sun_position", "position of the sun in the sky", None);
    r.aspect("own_camera", "camera used by the AVP", Some(&avp));
    let appreciation_purpose = r.purpose(
        PurposeKind::Appreciation,
        &avp,
        "account for the sun position in the sky relative to the direction of the camera",
        &control_action,
    );
    let appreciative_action =
        r.id(Mutation::AddAction(NewAction {
            kind: ActionKind::Appreciative,
            source: avp.clone(),
            target_system: None,
            target_aspect: Some(sun),
            fulfills: Some(appreciation_purpose.clone()),
            description:
                "acknowledge the limitations of visual information received from imaging sensors"
                    .into(),
        }));
    r.submit(
        7,
        STEP7,
        &[&avp, &appreciation_purpose, &appreciative_action],
    );
    r.complete(7);

    // Step 8: factor analysis.
    r.submit(8, STEP8, &[]);
    r.complete(8);

    r
}

/// The finished case-study session.
pub fn collision_avoidance() -> Session {
    record().session
}

/// The ordered mutations that build [`collision_avoidance`] from
/// [`fresh_session`]; mutation `i` is stamped at `script_timestamp(i)`.
pub fn collision_avoidance_script() -> Vec<Mutation> {
    record().script
}

pub fn fresh_session() -> Session {
    Session::with_id(SESSION_ID, SESSION_NAME, SessionConfig::default())
        .expect("fixture session parameters are valid")
}

pub fn script_timestamp(i: usize) -> Timestamp {
    Timestamp::from_unix(START + 60 * i as i64)
}
