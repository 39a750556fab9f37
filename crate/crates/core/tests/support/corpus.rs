//! Random assertion corpora for factor-analysis properties.

use aic_core::{EntityId, Session, SessionConfig, ASSERTION_PREFIX};
use proptest::prelude::*;

const NOISE: &[&str] = &[
    "(AVP)",
    "(two words)",
    "(a__b)",
    "(_x_y)",
    "(1_a)",
    "(",
    ")",
    "(x_",
    "\n",
    "((",
    "(x_y",
    "(é_x)",
];

#[derive(Debug, Clone)]
pub enum Piece {
    Token { index: usize, upper: bool },
    Noise(usize),
    Word,
}

#[derive(Debug, Clone)]
pub struct CorpusAssertion {
    pub step: u8,
    pub pieces: Vec<Piece>,
}

#[derive(Debug, Clone)]
pub struct Corpus {
    pub tokens: Vec<String>,
    pub assertions: Vec<CorpusAssertion>,
    /// (assertion index, replacement) pairs applied as revisions after the walk.
    pub revisions: Vec<(usize, Vec<Piece>)>,
}

fn piece(n_tokens: usize) -> impl Strategy<Value = Piece> {
    prop_oneof![
        5 => (0..n_tokens, prop::bool::weighted(0.2)).prop_map(|(index, upper)| Piece::Token { index, upper }),
        2 => (0..NOISE.len()).prop_map(Piece::Noise),
        2 => Just(Piece::Word),
    ]
}

fn pieces(n_tokens: usize) -> impl Strategy<Value = Vec<Piece>> {
    prop::collection::vec(piece(n_tokens), 0..10)
}

/// Up to `max_assertions` assertions over a vocabulary of up to `max_tokens` factors.
pub fn corpus(max_assertions: usize, max_tokens: usize) -> impl Strategy<Value = Corpus> {
    prop::collection::btree_set("[a-z][a-z0-9]{0,5}(_[a-z0-9]{1,4}){1,3}", 1..=max_tokens)
        .prop_flat_map(move |tokens| {
            let tokens: Vec<String> = tokens.into_iter().collect();
            let n = tokens.len();
            (
                Just(tokens),
                prop::collection::vec(
                    (1u8..=8, pieces(n))
                        .prop_map(|(step, pieces)| CorpusAssertion { step, pieces }),
                    1..=max_assertions,
                ),
                prop::collection::vec((any::<prop::sample::Index>(), pieces(n)), 0..4),
            )
        })
        .prop_map(|(tokens, assertions, revisions)| {
            let revisions = revisions
                .into_iter()
                .map(|(i, p)| (i.index(assertions.len()), p))
                .collect();
            Corpus {
                tokens,
                assertions,
                revisions,
            }
        })
}

pub fn render(tokens: &[String], pieces: &[Piece]) -> String {
    let mut text = format!("{ASSERTION_PREFIX} ");
    for p in pieces {
        match p {
            Piece::Token { index, upper } => {
                let t = &tokens[*index];
                text.push('(');
                text.push_str(&if *upper {
                    t.to_ascii_uppercase()
                } else {
                    t.clone()
                });
                text.push_str(") ");
            }
            Piece::Noise(i) => {
                text.push_str(NOISE[*i]);
                text.push(' ');
            }
            Piece::Word => text.push_str("matters "),
        }
    }
    text
}

/// Walks all eight steps, submitting each step's assertions in `order`,
/// then applies the revisions.
pub fn build(corpus: &Corpus, reverse_within_step: bool) -> Session {
    let mut s = Session::with_id("corpus", "corpus", SessionConfig::default()).unwrap();
    let mut ids: Vec<Option<EntityId>> = vec![None; corpus.assertions.len()];
    for k in 1..=8u8 {
        let mut in_step: Vec<usize> = (0..corpus.assertions.len())
            .filter(|i| corpus.assertions[*i].step == k)
            .collect();
        if reverse_within_step {
            in_step.reverse();
        }
        if in_step.is_empty() {
            s.submit_assertion(k, "The architect asserts that nothing changes.", [])
                .unwrap();
        }
        for i in in_step {
            let text = render(&corpus.tokens, &corpus.assertions[i].pieces);
            ids[i] = Some(s.submit_assertion(k, &text, []).unwrap().id);
        }
        s.complete_step(k).unwrap();
    }
    for (i, pieces) in &corpus.revisions {
        let old = ids[*i].clone().unwrap();
        let text = render(&corpus.tokens, pieces);
        let step = corpus.assertions[*i].step;
        ids[*i] = Some(s.revise_step(step, &old, &text, "reworded").unwrap().id);
    }
    s
}

/// Texts of the assertions that survive revision.
pub fn current_texts(corpus: &Corpus) -> Vec<String> {
    let mut texts: Vec<String> = corpus
        .assertions
        .iter()
        .map(|a| render(&corpus.tokens, &a.pieces))
        .collect();
    for (i, pieces) in &corpus.revisions {
        texts[*i] = render(&corpus.tokens, pieces);
    }
    texts
}
