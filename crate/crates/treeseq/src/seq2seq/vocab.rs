//! String-to-id tables for words, POS tags, labels, and output actions.

use std::collections::HashMap;

use crate::linearize::{linearize, Scheme};
use crate::transitions::Action;
use crate::tree::Tree;

/// The reserved unknown token of the word and POS tables.
pub const UNK: &str = "<unk>";

/// An id table over strings with an unknown fallback at id 0 and an
/// occurrence count per entry.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocab {
    items: Vec<String>,
    counts: Vec<usize>,
    index: HashMap<String, usize>,
}

impl Vocab {
    pub fn new() -> Vocab {
        let mut v = Vocab {
            items: Vec::new(),
            counts: Vec::new(),
            index: HashMap::new(),
        };
        v.insert(UNK); // id 0, count stays 0
        v.counts[0] = 0;
        v
    }

    fn insert(&mut self, item: &str) -> usize {
        if let Some(&id) = self.index.get(item) {
            self.counts[id] += 1;
            return id;
        }
        let id = self.items.len();
        self.items.push(item.to_string());
        self.counts.push(1);
        self.index.insert(item.to_string(), id);
        id
    }

    /// Adds one occurrence of `item`, creating an id on first sight.
    pub fn observe(&mut self, item: &str) -> usize {
        self.insert(item)
    }

    /// Restores an entry as read from a checkpoint.
    pub fn restore(&mut self, item: &str, count: usize) {
        let id = self.insert(item);
        self.counts[id] = count;
    }

    /// The id of `item`, or the unknown id.
    pub fn id(&self, item: &str) -> usize {
        self.index.get(item).copied().unwrap_or(0)
    }

    pub fn get(&self, id: usize) -> &str {
        &self.items[id]
    }

    pub fn count(&self, id: usize) -> usize {
        self.counts[id]
    }

    /// Was this entry seen exactly once in training data?
    pub fn is_singleton(&self, id: usize) -> bool {
        id != 0 && self.counts[id] == 1
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        false // the unknown entry is always present
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, usize)> {
        self.items
            .iter()
            .map(String::as_str)
            .zip(self.counts.iter().copied())
    }
}

impl Default for Vocab {
    fn default() -> Self {
        Vocab::new()
    }
}

/// The output-token table: every distinct action token of the linearized
/// training corpus, in first-seen order. There is no unknown action.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActionVocab {
    actions: Vec<Action>,
    spellings: Vec<String>,
    index: HashMap<String, usize>,
}

impl ActionVocab {
    pub fn new() -> ActionVocab {
        ActionVocab {
            actions: Vec::new(),
            spellings: Vec::new(),
            index: HashMap::new(),
        }
    }

    /// Adds a token spelled `spelling` denoting `action`, if new.
    pub fn observe(&mut self, spelling: &str, action: Action) -> usize {
        if let Some(&id) = self.index.get(spelling) {
            return id;
        }
        let id = self.actions.len();
        self.actions.push(action);
        self.spellings.push(spelling.to_string());
        self.index.insert(spelling.to_string(), id);
        id
    }

    pub fn id(&self, spelling: &str) -> Option<usize> {
        self.index.get(spelling).copied()
    }

    pub fn action(&self, id: usize) -> &Action {
        &self.actions[id]
    }

    pub fn spelling(&self, id: usize) -> &str {
        &self.spellings[id]
    }

    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }
}

impl Default for ActionVocab {
    fn default() -> Self {
        ActionVocab::new()
    }
}

/// All four tables of one trained model.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabs {
    pub words: Vocab,
    pub pos: Vocab,
    pub labels: Vocab,
    pub actions: ActionVocab,
}

impl Vocabs {
    /// Builds the tables from a training treebank under `scheme`. Ids are
    /// deterministic: first-seen order over the given trees.
    pub fn build(trees: &[Tree], scheme: Scheme) -> Vocabs {
        let mut v = Vocabs {
            words: Vocab::new(),
            pos: Vocab::new(),
            labels: Vocab::new(),
            actions: ActionVocab::new(),
        };
        for tree in trees {
            for w in tree.sentence().iter() {
                v.words.observe(&w.word);
                v.pos.observe(&w.pos);
            }
            collect_labels(tree, &mut v.labels);
            for token in linearize(tree, scheme) {
                let action = crate::delinearize::token_action(&token, scheme)
                    .expect("linearize emits only tokens of its own scheme");
                v.actions.observe(&token, action);
            }
        }
        v
    }
}

fn collect_labels(tree: &Tree, labels: &mut Vocab) {
    if let Tree::NonTerminal { label, children } = tree {
        labels.observe(label);
        for c in children {
            collect_labels(c, labels);
        }
    }
}
