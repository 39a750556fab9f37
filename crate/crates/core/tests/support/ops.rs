//! Random operation sequences for property tests.
//!
//! Seeds hold indices rather than ids; they are resolved against the session
//! at the moment they run, so sequences reach deep states while still
//! producing a steady share of invalid calls.

use aic_core::{
    ActionKind, EntityId, Mutation, NewAction, PurposeKind, Session, SessionConfig, SystemKind,
    Timestamp,
};
use proptest::prelude::*;

pub const TOKENS: &[&str] = &[
    "own_camera",
    "sun_position",
    "Threat_Predictive_Model",
    "situation_awareness",
    "risk_of_collision",
    "a1_b2",
    "intruder_aircraft_position",
    "Own_Camera",
    "pilot_decision_making_process",
    "x_y_z",
];

const NOISE: &[&str] = &[
    "(AVP)",
    "(not a factor)",
    "(x__y)",
    "(_lead)",
    "(9_lives)",
    "((own_camera)",
    "(trail_)",
    "()",
    "\n",
    "(sun_position",
];

const PREFIXES: &[&str] = &[
    "The architect asserts that ",
    "The architect asserts that\n",
    "the architect asserts that ",
    " The architect asserts that ",
    "Architect asserts ",
];

#[derive(Debug, Clone)]
pub struct TextSeed {
    /// Index into the prefix table; values past it mean the canonical prefix.
    pub prefix: u8,
    /// Each piece is a factor when below `TOKENS.len()`, noise otherwise.
    pub pieces: Vec<u8>,
}

#[derive(Debug, Clone)]
pub enum OpSeed {
    CreateSystem {
        name: u8,
        kind: u8,
    },
    AddAspect {
        token: u8,
    },
    AddToSphere {
        system: u16,
        aspect: u16,
    },
    SetPrime {
        system: u16,
        verb: u8,
        rationale: Option<bool>,
    },
    AddPurpose {
        kind: u8,
        owner: u16,
        serves: u16,
    },
    AddAction {
        kind: u8,
        source: u16,
        target_system: Option<u16>,
        target_aspect: Option<u16>,
        fulfills: Option<u16>,
    },
    /// `step: None` targets the lowest open step.
    Submit {
        step: Option<u8>,
        text: TextSeed,
        refs: Vec<u16>,
    },
    Complete {
        step: Option<u8>,
    },
    Revise {
        step: Option<u8>,
        assertion: u16,
        text: TextSeed,
        empty_rationale: bool,
    },
    Reconfirm {
        step: Option<u8>,
    },
}

fn text_seed() -> impl Strategy<Value = TextSeed> {
    (
        0u8..12,
        prop::collection::vec(0u8..(TOKENS.len() + NOISE.len()) as u8, 0..6),
    )
        .prop_map(|(prefix, pieces)| TextSeed { prefix, pieces })
}

fn step() -> impl Strategy<Value = Option<u8>> {
    prop_oneof![3 => Just(None), 2 => (0u8..=9).prop_map(Some)]
}

pub fn op_seed() -> impl Strategy<Value = OpSeed> {
    prop_oneof![
        2 => (0u8..8, 0u8..4).prop_map(|(name, kind)| OpSeed::CreateSystem { name, kind }),
        2 => (0u8..14).prop_map(|token| OpSeed::AddAspect { token }),
        2 => (any::<u16>(), any::<u16>()).prop_map(|(system, aspect)| OpSeed::AddToSphere { system, aspect }),
        2 => (any::<u16>(), 0u8..4, prop::option::of(any::<bool>()))
            .prop_map(|(system, verb, rationale)| OpSeed::SetPrime { system, verb, rationale }),
        2 => (0u8..5, any::<u16>(), any::<u16>())
            .prop_map(|(kind, owner, serves)| OpSeed::AddPurpose { kind, owner, serves }),
        3 => (0u8..5, any::<u16>(), prop::option::of(any::<u16>()), prop::option::of(any::<u16>()), prop::option::of(any::<u16>()))
            .prop_map(|(kind, source, target_system, target_aspect, fulfills)| OpSeed::AddAction {
                kind, source, target_system, target_aspect, fulfills,
            }),
        6 => (step(), text_seed(), prop::collection::vec(any::<u16>(), 0..3))
            .prop_map(|(step, text, refs)| OpSeed::Submit { step, text, refs }),
        4 => step().prop_map(|step| OpSeed::Complete { step }),
        2 => (step(), any::<u16>(), text_seed(), prop::bool::weighted(0.1))
            .prop_map(|(step, assertion, text, empty_rationale)| OpSeed::Revise { step, assertion, text, empty_rationale }),
        1 => step().prop_map(|step| OpSeed::Reconfirm { step }),
    ]
}

pub fn op_seeds(max: usize) -> impl Strategy<Value = Vec<OpSeed>> {
    prop::collection::vec(op_seed(), 0..max)
}

pub fn render_text(seed: &TextSeed) -> String {
    let mut text = PREFIXES
        .get(seed.prefix as usize)
        .unwrap_or(&PREFIXES[0])
        .to_string();
    text.push_str("the system");
    for (i, piece) in seed.pieces.iter().enumerate() {
        let piece = *piece as usize;
        text.push_str(if i % 2 == 0 { " " } else { ", near " });
        if piece < TOKENS.len() {
            text.push('(');
            text.push_str(TOKENS[piece]);
            text.push(')');
        } else {
            text.push_str(NOISE[piece - TOKENS.len()]);
        }
    }
    text.push('.');
    text
}

/// Picks an id from `ids`; one index in seven yields an id that does not exist.
fn pick(ids: Vec<EntityId>, index: u16) -> EntityId {
    if ids.is_empty() || index % 7 == 6 {
        return EntityId::new(format!("missing-{index}"));
    }
    ids[index as usize % ids.len()].clone()
}

fn frontier(s: &Session) -> u8 {
    s.steps()
        .iter()
        .find(|st| st.status.is_editable())
        .map_or(8, |st| st.index)
}

pub fn resolve(seed: &OpSeed, s: &Session) -> Mutation {
    let systems = || s.systems().iter().map(|x| x.id.clone()).collect::<Vec<_>>();
    let aspects = || s.aspects().iter().map(|x| x.id.clone()).collect::<Vec<_>>();
    let purposes = || {
        s.purposes()
            .iter()
            .map(|x| x.id.clone())
            .collect::<Vec<_>>()
    };
    let actions = || s.actions().iter().map(|x| x.id.clone()).collect::<Vec<_>>();
    let step_of = |step: Option<u8>| step.unwrap_or_else(|| frontier(s));
    match seed {
        OpSeed::CreateSystem { name, kind } => Mutation::CreateSystem {
            name: if *name == 7 {
                "  ".into()
            } else {
                format!("system {name}")
            },
            kind: SystemKind::ALL[*kind as usize % SystemKind::ALL.len()],
        },
        OpSeed::AddAspect { token } => Mutation::AddAspect {
            token: match *token as usize {
                t if t < TOKENS.len() => TOKENS[t].into(),
                10 => "plain".into(),
                11 => "a__b".into(),
                12 => "(own_camera)".into(),
                _ => "SUN_POSITION".into(),
            },
            description: None,
        },
        OpSeed::AddToSphere { system, aspect } => Mutation::AddToSphere {
            system: pick(systems(), *system),
            aspect: pick(aspects(), *aspect),
        },
        OpSeed::SetPrime {
            system,
            verb,
            rationale,
        } => Mutation::SetPrimePurpose {
            system: pick(systems(), *system),
            verb_phrase: format!("assist the pilot, variant {verb}"),
            revision_rationale: rationale.map(|r| {
                if r {
                    "scope changed".into()
                } else {
                    String::new()
                }
            }),
        },
        OpSeed::AddPurpose {
            kind,
            owner,
            serves,
        } => {
            let kind = match kind {
                0 => PurposeKind::Primary,
                1 | 4 => PurposeKind::Influence,
                2 => PurposeKind::Control,
                _ => PurposeKind::Appreciation,
            };
            let targets = match kind {
                PurposeKind::Influence => purposes(),
                _ => actions(),
            };
            Mutation::AddPurpose {
                kind,
                owner: pick(systems(), *owner),
                verb_phrase: "keep things safe".into(),
                serves: pick(targets, *serves),
            }
        }
        OpSeed::AddAction {
            kind,
            source,
            target_system,
            target_aspect,
            fulfills,
        } => Mutation::AddAction(NewAction {
            kind: ActionKind::ALL[*kind as usize % ActionKind::ALL.len()],
            source: pick(systems(), *source),
            target_system: target_system.map(|i| pick(systems(), i)),
            target_aspect: target_aspect.map(|i| pick(aspects(), i)),
            fulfills: fulfills.map(|i| pick(purposes(), i)),
            description: if *kind == 4 {
                String::new()
            } else {
                "acts".into()
            },
        }),
        OpSeed::Submit { step, text, refs } => {
            let all: Vec<EntityId> = systems()
                .into_iter()
                .chain(aspects())
                .chain(purposes())
                .collect();
            Mutation::SubmitAssertion {
                step: step_of(*step),
                text: render_text(text),
                referenced_entities: refs.iter().map(|r| pick(all.clone(), *r)).collect(),
            }
        }
        OpSeed::Complete { step } => Mutation::CompleteStep {
            step: step_of(*step),
        },
        OpSeed::Revise {
            step,
            assertion,
            text,
            empty_rationale,
        } => {
            let k = step.unwrap_or_else(|| {
                let settled: Vec<u8> = s
                    .steps()
                    .iter()
                    .filter(|st| st.status.is_settled())
                    .map(|st| st.index)
                    .collect();
                if settled.is_empty() {
                    frontier(s)
                } else {
                    settled[*assertion as usize % settled.len()]
                }
            });
            let in_step: Vec<EntityId> = s
                .assertions()
                .iter()
                .filter(|a| a.step_index == k)
                .map(|a| a.id.clone())
                .collect();
            Mutation::ReviseAssertion {
                step: k,
                assertion: pick(in_step, *assertion),
                text: render_text(text),
                rationale: if *empty_rationale {
                    " ".into()
                } else {
                    "new evidence".into()
                },
            }
        }
        OpSeed::Reconfirm { step } => Mutation::ReconfirmStep {
            step: step.unwrap_or_else(|| {
                s.steps()
                    .iter()
                    .find(|st| st.status == aic_core::StepStatus::Stale)
                    .map_or(1, |st| st.index)
            }),
        },
    }
}

pub fn fresh(id: &str) -> Session {
    Session::with_id(id, "random", SessionConfig::default()).unwrap()
}

pub fn at(i: usize) -> Timestamp {
    Timestamp::from_unix(1_700_000_000 + i as i64)
}

pub struct Run {
    pub session: Session,
    pub accepted: Vec<(Mutation, Timestamp)>,
    pub rejected: usize,
}

/// Applies every seed, keeping the ones the engine accepts.
pub fn run(id: &str, seeds: &[OpSeed]) -> Run {
    let mut session = fresh(id);
    let mut accepted = Vec::new();
    let mut rejected = 0;
    for (i, seed) in seeds.iter().enumerate() {
        let m = resolve(seed, &session);
        match session.apply(m.clone(), at(i)) {
            Ok(_) => accepted.push((m, at(i))),
            Err(_) => rejected += 1,
        }
    }
    Run {
        session,
        accepted,
        rejected,
    }
}
