//! Linearization schemes: trees as flat token sequences.
//!
//! Five schemes are supported, differing in traversal order and in how much
//! information each token carries:
//!
//! | scheme               | tokens                                  |
//! |----------------------|-----------------------------------------|
//! | `td-bracket`         | `(S` … `)S` brackets, `XX` per word     |
//! | `td-sr`              | top-down `NT(L) SH RE`                  |
//! | `td-sr-enriched`     | top-down with labeled closes `RE(L)`    |
//! | `inorder-sr`         | in-order `SH NT(L) RE FI`               |
//! | `inorder-sr-enriched`| in-order, `RE(L)` plus `SH.`/`SH,`      |
//!
//! The bracketed scheme and the enriched top-down one are the same sequence
//! in different spellings; [`bracket_to_action`] / [`action_to_bracket`]
//! convert token-for-token in both directions.

use std::fmt;
use std::str::FromStr;

use crate::transitions::{Action, System};
use crate::tree::Tree;

/// Surface forms that get their own lexicalized shift token in the enriched
/// in-order scheme.
pub const LEXICALIZED_WORDS: [&str; 2] = [".", ","];

/// The terminal placeholder of the bracketed scheme.
pub const TERMINAL_TOKEN: &str = "XX";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    TopDownBracketed,
    TopDownSr,
    TopDownSrEnriched,
    InOrderSr,
    InOrderSrEnriched,
}

impl Scheme {
    pub const ALL: [Scheme; 5] = [
        Scheme::TopDownBracketed,
        Scheme::TopDownSr,
        Scheme::TopDownSrEnriched,
        Scheme::InOrderSr,
        Scheme::InOrderSrEnriched,
    ];

    pub fn cli_name(self) -> &'static str {
        match self {
            Scheme::TopDownBracketed => "td-bracket",
            Scheme::TopDownSr => "td-sr",
            Scheme::TopDownSrEnriched => "td-sr-enriched",
            Scheme::InOrderSr => "inorder-sr",
            Scheme::InOrderSrEnriched => "inorder-sr-enriched",
        }
    }

    /// The transition system whose derivations this scheme spells out.
    pub fn system(self) -> System {
        match self {
            Scheme::TopDownBracketed | Scheme::TopDownSr | Scheme::TopDownSrEnriched => {
                System::top_down()
            }
            Scheme::InOrderSr | Scheme::InOrderSrEnriched => System::in_order(),
        }
    }

    /// Do reduce tokens carry the closed label?
    pub fn labeled_reduce(self) -> bool {
        matches!(
            self,
            Scheme::TopDownBracketed | Scheme::TopDownSrEnriched | Scheme::InOrderSrEnriched
        )
    }

    /// Surface forms shifted by a lexicalized token under this scheme.
    pub fn lex_words(self) -> &'static [&'static str] {
        match self {
            Scheme::InOrderSrEnriched => &LEXICALIZED_WORDS,
            _ => &[],
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.cli_name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown scheme {0:?}; expected one of td-bracket, td-sr, td-sr-enriched, inorder-sr, inorder-sr-enriched")]
pub struct BadScheme(pub String);

impl FromStr for Scheme {
    type Err = BadScheme;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Scheme::ALL
            .into_iter()
            .find(|sch| sch.cli_name() == s)
            .ok_or_else(|| BadScheme(s.to_string()))
    }
}

/// Spells a top-down action as a bracketed-scheme token. Only labeled
/// reduces and plain shifts have a spelling there.
pub fn action_to_bracket(action: &Action) -> Option<String> {
    match action {
        Action::Shift => Some(TERMINAL_TOKEN.to_string()),
        Action::OpenNt(l) => Some(format!("({}", l)),
        Action::ReduceLabeled(l) => Some(format!("){}", l)),
        Action::ShiftLex(_) | Action::Reduce | Action::Finish => None,
    }
}

/// Reads a bracketed-scheme token back into its action.
pub fn bracket_to_action(token: &str) -> Option<Action> {
    if token == TERMINAL_TOKEN {
        return Some(Action::Shift);
    }
    if let Some(label) = token.strip_prefix('(') {
        if !label.is_empty() && !label.contains(['(', ')']) {
            return Some(Action::OpenNt(label.to_string()));
        }
    }
    if let Some(label) = token.strip_prefix(')') {
        if !label.is_empty() && !label.contains(['(', ')']) {
            return Some(Action::ReduceLabeled(label.to_string()));
        }
    }
    None
}

/// Linearizes a tree under the given scheme.
pub fn linearize(tree: &Tree, scheme: Scheme) -> Vec<String> {
    let labeled = scheme.labeled_reduce();
    let actions = scheme
        .system()
        .oracle_refined(tree, labeled, scheme.lex_words());
    match scheme {
        Scheme::TopDownBracketed => actions
            .iter()
            .map(|a| {
                action_to_bracket(a)
                    .expect("a labeled top-down oracle emits only bracket-spellable actions")
            })
            .collect(),
        _ => actions.iter().map(Action::to_string).collect(),
    }
}

/// Linearizes to a single space-joined line.
pub fn linearize_line(tree: &Tree, scheme: Scheme) -> String {
    linearize(tree, scheme).join(" ")
}
