//! Factor tokens and the frequency analysis built on them.
//!
//! A factor is written in assertion prose as a parenthesized, underscore
//! separated identifier such as `(sun_position)`. Tokens are ASCII letters,
//! digits and underscores, start with a letter, and have at least two
//! non-empty segments. Single words like `(AVP)` are abbreviations, not factors.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::session::Session;

const TOKEN_BODY: &str = r"[A-Za-z][A-Za-z0-9]*(?:_[A-Za-z0-9]+)+";

static PARENTHESIZED: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(&format!(r"\(({TOKEN_BODY})\)")).expect("factor regex"));

static BARE: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(&format!(r"^{TOKEN_BODY}$")).expect("token regex"));

pub fn normalize_token(token: &str) -> String {
    token.to_ascii_lowercase()
}

/// Whether `token` (without parentheses) conforms to the factor grammar.
pub fn is_factor_token(token: &str) -> bool {
    BARE.is_match(token)
}

/// Every factor token in `text`, normalized, in order of appearance.
/// Duplicates are kept; each mention counts.
pub fn extract_factors(text: &str) -> Vec<String> {
    PARENTHESIZED
        .captures_iter(text)
        .map(|c| normalize_token(&c[1]))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    MostInfluential,
    Ordinary,
    RedFlag,
}

impl Classification {
    pub fn as_str(self) -> &'static str {
        match self {
            Classification::MostInfluential => "most_influential",
            Classification::Ordinary => "ordinary",
            Classification::RedFlag => "red_flag",
        }
    }

    /// Most-influential wins over red-flag, so the top factors are never
    /// flagged even when the maximum itself is within the threshold.
    pub fn of(frequency: u64, max_frequency: u64, threshold: u32) -> Self {
        if frequency == max_frequency {
            Classification::MostInfluential
        } else if frequency <= u64::from(threshold) {
            Classification::RedFlag
        } else {
            Classification::Ordinary
        }
    }
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FactorEntry {
    pub token: String,
    pub frequency: u64,
    pub steps: BTreeSet<u8>,
    pub classification: Classification,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FactorReport {
    pub session_id: String,
    pub session_version: u64,
    pub threshold: u32,
    pub total_factors: usize,
    pub total_mentions: u64,
    pub entries: Vec<FactorEntry>,
}

impl FactorReport {
    /// Builds a report from `(step, tokens)` mentions.
    pub fn from_mentions<'a, I, T>(
        session_id: &str,
        session_version: u64,
        threshold: u32,
        mentions: I,
    ) -> Result<FactorReport>
    where
        I: IntoIterator<Item = (u8, T)>,
        T: IntoIterator<Item = &'a String>,
    {
        if threshold < 1 {
            return Err(Error::Validation(
                "red-flag threshold must be at least 1".into(),
            ));
        }
        let mut counts: BTreeMap<&str, (u64, BTreeSet<u8>)> = BTreeMap::new();
        for (step, tokens) in mentions {
            for token in tokens {
                let slot = counts.entry(token.as_str()).or_default();
                slot.0 += 1;
                slot.1.insert(step);
            }
        }
        let max = counts.values().map(|(n, _)| *n).max().unwrap_or(0);
        let mut entries: Vec<FactorEntry> = counts
            .into_iter()
            .map(|(token, (frequency, steps))| FactorEntry {
                token: token.to_owned(),
                frequency,
                steps,
                classification: Classification::of(frequency, max, threshold),
            })
            .collect();
        entries.sort_by(|a, b| {
            b.frequency
                .cmp(&a.frequency)
                .then_with(|| a.token.cmp(&b.token))
        });
        Ok(FactorReport {
            session_id: session_id.to_owned(),
            session_version,
            threshold,
            total_factors: entries.len(),
            total_mentions: entries.iter().map(|e| e.frequency).sum(),
            entries,
        })
    }

    pub fn most_influential(&self) -> impl Iterator<Item = &FactorEntry> {
        self.entries
            .iter()
            .filter(|e| e.classification == Classification::MostInfluential)
    }

    pub fn red_flags(&self) -> impl Iterator<Item = &FactorEntry> {
        self.entries
            .iter()
            .filter(|e| e.classification == Classification::RedFlag)
    }

    pub fn entry(&self, token: &str) -> Option<&FactorEntry> {
        self.entries.iter().find(|e| e.token == token)
    }
}

/// Frequencies over every current assertion. Superseded assertions are
/// excluded; current assertions in stale steps still count.
pub fn compute_factor_report(session: &Session, threshold: u32) -> Result<FactorReport> {
    FactorReport::from_mentions(
        session.id(),
        session.version(),
        threshold,
        session
            .assertions()
            .iter()
            .filter(|a| a.is_current())
            .map(|a| (a.step_index, &a.factor_tokens)),
    )
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FactorChange {
    pub token: String,
    pub old_frequency: u64,
    pub new_frequency: u64,
    pub old_classification: Option<Classification>,
    pub new_classification: Option<Classification>,
}

/// Per-token differences between two reports of the same session, by token.
pub fn diff_reports(before: &FactorReport, after: &FactorReport) -> Result<Vec<FactorChange>> {
    if before.session_id != after.session_id {
        return Err(Error::Validation(format!(
            "cannot diff reports of different sessions (`{}` vs `{}`)",
            before.session_id, after.session_id
        )));
    }
    let index = |r: &FactorReport| -> BTreeMap<String, (u64, Classification)> {
        r.entries
            .iter()
            .map(|e| (e.token.clone(), (e.frequency, e.classification)))
            .collect()
    };
    let old = index(before);
    let new = index(after);
    let tokens: BTreeSet<&String> = old.keys().chain(new.keys()).collect();
    Ok(tokens
        .into_iter()
        .filter_map(|token| {
            let o = old.get(token);
            let n = new.get(token);
            if o == n {
                return None;
            }
            Some(FactorChange {
                token: token.clone(),
                old_frequency: o.map_or(0, |x| x.0),
                new_frequency: n.map_or(0, |x| x.0),
                old_classification: o.map(|x| x.1),
                new_classification: n.map(|x| x.1),
            })
        })
        .collect())
}
