//! Typed entities of an articulation: systems, aspects, purposes, actions and
//! the assertions that record the architect's reasoning.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// Every assertion must open with this exact phrase.
pub const ASSERTION_PREFIX: &str = "The architect asserts that";

/// Session-scoped identifier shared by all entity kinds.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EntityId(String);

impl EntityId {
    pub fn new(id: impl Into<String>) -> Self {
        EntityId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for EntityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(&self.0)
    }
}

impl From<&str> for EntityId {
    fn from(s: &str) -> Self {
        EntityId(s.to_owned())
    }
}

impl From<String> for EntityId {
    fn from(s: String) -> Self {
        EntityId(s)
    }
}

macro_rules! string_enum {
    ($(#[$meta:meta])* $name:ident { $($variant:ident => $text:literal),+ $(,)? }) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(rename_all = "snake_case")]
        pub enum $name {
            $($variant),+
        }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant),+];

            pub fn as_str(self) -> &'static str {
                match self {
                    $($name::$variant => $text),+
                }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.pad(self.as_str())
            }
        }

        impl FromStr for $name {
            type Err = Error;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                match s {
                    $($text => Ok($name::$variant),)+
                    other => Err(Error::Validation(format!(
                        concat!("unknown ", stringify!($name), " `{}`"),
                        other
                    ))),
                }
            }
        }
    };
}

string_enum!(
    /// System taxonomy. Always declared by the architect, never inferred.
    SystemKind {
        Agent => "agent",
        NonAgent => "non_agent",
        Environmental => "environmental",
    }
);

string_enum!(PurposeKind {
    Primary => "primary",
    Influence => "influence",
    Control => "control",
    Appreciation => "appreciation",
});

string_enum!(PurposeStatus {
    Current => "current",
    Archived => "archived",
});

string_enum!(ActionKind {
    Unsafe => "unsafe",
    Influence => "influence",
    Control => "control",
    Appreciative => "appreciative",
});

string_enum!(AssertionStatus {
    Current => "current",
    Superseded => "superseded",
});

impl ActionKind {
    /// Kind of purpose an action of this kind must fulfil, if any.
    pub fn fulfils(self) -> Option<PurposeKind> {
        match self {
            ActionKind::Unsafe => None,
            ActionKind::Influence => Some(PurposeKind::Influence),
            ActionKind::Control => Some(PurposeKind::Control),
            ActionKind::Appreciative => Some(PurposeKind::Appreciation),
        }
    }
}

/// What the `serves` link of a purpose must point at.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ServesTarget {
    Nothing,
    Purpose(PurposeKind),
    Action(ActionKind),
}

impl PurposeKind {
    pub fn serves(self) -> ServesTarget {
        match self {
            PurposeKind::Primary => ServesTarget::Nothing,
            PurposeKind::Influence => ServesTarget::Purpose(PurposeKind::Primary),
            PurposeKind::Control => ServesTarget::Action(ActionKind::Influence),
            PurposeKind::Appreciation => ServesTarget::Action(ActionKind::Control),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SystemEntity {
    pub id: EntityId,
    pub name: String,
    pub kind: SystemKind,
    pub sphere_of_control: BTreeSet<EntityId>,
    pub prime_purpose: Option<EntityId>,
}

/// A capability or property of the problem domain, named by a factor token.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Aspect {
    pub id: EntityId,
    pub token: String,
    pub description: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Purpose {
    pub id: EntityId,
    pub kind: PurposeKind,
    pub owner_system: EntityId,
    pub verb_phrase: String,
    pub serves: Option<EntityId>,
    pub status: PurposeStatus,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActionRecord {
    pub id: EntityId,
    pub kind: ActionKind,
    pub source_system: EntityId,
    pub target_system: Option<EntityId>,
    pub target_aspect: Option<EntityId>,
    pub fulfills: Option<EntityId>,
    pub description: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Assertion {
    pub id: EntityId,
    pub step_index: u8,
    pub revision: u32,
    pub text: String,
    pub referenced_entities: BTreeSet<EntityId>,
    pub factor_tokens: Vec<String>,
    pub status: AssertionStatus,
    pub revision_rationale: Option<String>,
    pub supersedes: Option<EntityId>,
}

impl Assertion {
    pub fn is_current(&self) -> bool {
        self.status == AssertionStatus::Current
    }
}

pub fn has_assertion_prefix(text: &str) -> bool {
    text.starts_with(ASSERTION_PREFIX)
}
