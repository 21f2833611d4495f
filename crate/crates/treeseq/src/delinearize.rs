//! Turning token sequences back into trees.
//!
//! Strict mode replays the tokens on the scheme's transition system and
//! fails on the first unrecognized token, illegal action, or incomplete
//! derivation. Repair mode is total: it never fails on any token sequence,
//! and on sequences strict mode accepts it returns the identical tree.

use crate::linearize::{bracket_to_action, Scheme};
use crate::transitions::{
    Action, ActionKind, Configuration, IllegalAction, StackItem, System, SystemKind,
};
use crate::tree::{Sentence, Tree};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DelinearizeError {
    #[error("token {index}: {token:?} is not a valid token of this scheme")]
    BadToken { index: usize, token: String },
    #[error(transparent)]
    Machine(#[from] IllegalAction),
}

/// Reads one token of `scheme` as its action, if it is well-formed.
pub fn token_action(token: &str, scheme: Scheme) -> Option<Action> {
    match scheme {
        Scheme::TopDownBracketed => bracket_to_action(token),
        _ => token.parse().ok(),
    }
}

/// Strictly delinearizes `tokens` over `sentence`.
pub fn delinearize(
    tokens: &[&str],
    sentence: &Sentence,
    scheme: Scheme,
) -> Result<Tree, DelinearizeError> {
    let mut actions = Vec::with_capacity(tokens.len());
    for (index, token) in tokens.iter().enumerate() {
        let action = token_action(token, scheme).ok_or_else(|| DelinearizeError::BadToken {
            index,
            token: token.to_string(),
        })?;
        actions.push(action);
    }
    Ok(scheme.system().execute(sentence, &actions)?)
}

/// Repairs `tokens` into some valid tree over `sentence`, deterministically.
///
/// The policy, applied token by token:
/// * unrecognized tokens are dropped;
/// * a lexicalized shift whose word disagrees with the buffer becomes a
///   plain shift; a labeled reduce whose label disagrees with the open
///   non-terminal becomes a plain reduce;
/// * an illegal reduce becomes a shift when that is legal (the sequence
///   closed too much, so consume input instead), otherwise it is dropped;
/// * other illegal actions are dropped.
///
/// After the last token the derivation is forced to completion: remaining
/// words are shifted, remaining open non-terminals are closed over whatever
/// sits above them, and if more than one constituent (or a bare word) is
/// left the lot is wrapped in a fallback label — the bottom-most open
/// non-terminal's label at exhaustion if there was one, else the last label
/// mentioned by any token, else `S`.
pub fn repair(tokens: &[&str], sentence: &Sentence, scheme: Scheme) -> Tree {
    let system = scheme.system();
    let mut config = Configuration::initial();
    let mut last_label: Option<String> = None;
    for (step, token) in tokens.iter().enumerate() {
        let Some(mut action) = token_action(token, scheme) else {
            continue;
        };
        match &action {
            Action::OpenNt(l) | Action::ReduceLabeled(l) => last_label = Some(l.clone()),
            _ => {}
        }
        // Refinement mismatches degrade to the bare action.
        if let Action::ShiftLex(w) = &action {
            let agrees = sentence
                .get(config.buffer_pos)
                .is_some_and(|tw| &tw.word == w);
            if !agrees {
                action = Action::Shift;
            }
        }
        if let Action::ReduceLabeled(l) = &action {
            let agrees = topmost_open_label(&config.stack).is_some_and(|found| found == l);
            if !agrees {
                action = Action::Reduce;
            }
        }
        if system.kind_legal(&config, action.kind(), sentence.len()) {
            config = system
                .apply(&config, &action, sentence, step)
                .expect("kind-legal bare action with verified refinement applies");
        } else if action.kind() == ActionKind::Reduce
            && system.kind_legal(&config, ActionKind::Shift, sentence.len())
        {
            config = system
                .apply(&config, &Action::Shift, sentence, step)
                .expect("shift was checked legal");
        }
        // Otherwise: drop the action.
    }
    force_complete(config, sentence, system, last_label)
}

fn topmost_open_label(stack: &[StackItem]) -> Option<&String> {
    stack.iter().rev().find_map(|item| match item {
        StackItem::Open { label } => Some(label),
        _ => None,
    })
}

fn bottommost_open_label(stack: &[StackItem]) -> Option<&String> {
    stack.iter().find_map(|item| match item {
        StackItem::Open { label } => Some(label),
        _ => None,
    })
}

/// Drives an arbitrary configuration to a single tree, ignoring legality.
fn force_complete(
    mut config: Configuration,
    sentence: &Sentence,
    system: System,
    last_label: Option<String>,
) -> Tree {
    let wrap_label = bottommost_open_label(&config.stack)
        .cloned()
        .or(last_label)
        .unwrap_or_else(|| "S".to_string());
    // Shift every unread word.
    while let Some(w) = sentence.get(config.buffer_pos) {
        config.stack.push(StackItem::Word {
            word: w.word.clone(),
            pos: w.pos.clone(),
        });
        config.buffer_pos += 1;
    }
    // Close every open non-terminal, topmost first.
    while let Some(open_idx) = config.stack.iter().rposition(|i| matches!(i, StackItem::Open { .. })) {
        let above: Vec<StackItem> = config.stack.split_off(open_idx + 1);
        let label = match config.stack.pop() {
            Some(StackItem::Open { label }) => label,
            _ => unreachable!(),
        };
        let mut children: Vec<Tree> = Vec::with_capacity(above.len() + 1);
        if system.kind == SystemKind::InOrder {
            // The in-order open always has its first child right below it.
            if let Some(first) = config.stack.pop() {
                children.push(into_tree(first));
            }
        }
        children.extend(above.into_iter().map(into_tree));
        if children.is_empty() {
            continue; // a childless open: drop it entirely
        }
        config
            .stack
            .push(StackItem::Subtree(Tree::NonTerminal { label, children }));
    }
    let floor: Vec<Tree> = std::mem::take(&mut config.stack)
        .into_iter()
        .map(into_tree)
        .collect();
    match floor.len() {
        1 if !floor[0].is_leaf() => floor.into_iter().next().unwrap(),
        _ => Tree::NonTerminal {
            label: wrap_label,
            children: floor,
        },
    }
}

fn into_tree(item: StackItem) -> Tree {
    match item {
        StackItem::Subtree(t) => t,
        StackItem::Word { word, pos } => Tree::Leaf { word, pos },
        StackItem::Open { .. } => unreachable!("opens were cleared before flooring"),
    }
}
