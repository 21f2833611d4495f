//! Constituent trees and tagged sentences.

use std::fmt;

use crate::treebank::escape_token;

/// A rooted ordered constituent tree. Internal nodes carry a phrase label,
/// leaves carry a surface word together with its POS tag (the pre-terminal
/// level is folded into the leaf).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Tree {
    NonTerminal { label: String, children: Vec<Tree> },
    Leaf { word: String, pos: String },
}

impl Tree {
    pub fn non_terminal(label: impl Into<String>, children: Vec<Tree>) -> Tree {
        Tree::NonTerminal {
            label: label.into(),
            children,
        }
    }

    pub fn leaf(word: impl Into<String>, pos: impl Into<String>) -> Tree {
        Tree::Leaf {
            word: word.into(),
            pos: pos.into(),
        }
    }

    pub fn is_leaf(&self) -> bool {
        matches!(self, Tree::Leaf { .. })
    }

    pub fn label(&self) -> &str {
        match self {
            Tree::NonTerminal { label, .. } => label,
            Tree::Leaf { pos, .. } => pos,
        }
    }

    /// Number of leaves.
    pub fn len(&self) -> usize {
        match self {
            Tree::Leaf { .. } => 1,
            Tree::NonTerminal { children, .. } => children.iter().map(Tree::len).sum(),
        }
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Left-to-right leaf sequence as a sentence.
    pub fn sentence(&self) -> Sentence {
        let mut words = Vec::with_capacity(self.len());
        self.collect_leaves(&mut words);
        Sentence::new(words).expect("a tree always has at least one leaf")
    }

    fn collect_leaves(&self, out: &mut Vec<TaggedWord>) {
        match self {
            Tree::Leaf { word, pos } => out.push(TaggedWord::new(word.clone(), pos.clone())),
            Tree::NonTerminal { children, .. } => {
                for c in children {
                    c.collect_leaves(out);
                }
            }
        }
    }

    /// Number of internal (non-terminal) nodes.
    pub fn constituent_count(&self) -> usize {
        match self {
            Tree::Leaf { .. } => 0,
            Tree::NonTerminal { children, .. } => {
                1 + children.iter().map(Tree::constituent_count).sum::<usize>()
            }
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Tree::Leaf { .. } => 0,
            Tree::NonTerminal { children, .. } => {
                1 + children.iter().map(Tree::depth).max().unwrap_or(0)
            }
        }
    }

    /// Checks the structural invariants: non-terminal root, no childless
    /// internal node, no empty labels or words.
    pub fn validate(&self) -> Result<(), TreeError> {
        if self.is_leaf() {
            return Err(TreeError::LeafRoot);
        }
        self.validate_node()
    }

    fn validate_node(&self) -> Result<(), TreeError> {
        match self {
            Tree::Leaf { word, pos } => {
                if word.is_empty() || pos.is_empty() {
                    return Err(TreeError::EmptyLeaf);
                }
                Ok(())
            }
            Tree::NonTerminal { label, children } => {
                if label.is_empty() {
                    return Err(TreeError::EmptyLabel);
                }
                if children.is_empty() {
                    return Err(TreeError::ChildlessNode {
                        label: label.clone(),
                    });
                }
                for c in children {
                    c.validate_node()?;
                }
                Ok(())
            }
        }
    }
}

impl fmt::Display for Tree {
    /// Single-line bracketed form, tokens escaped per PTB convention.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tree::Leaf { word, pos } => {
                write!(f, "({} {})", escape_token(pos), escape_token(word))
            }
            Tree::NonTerminal { label, children } => {
                write!(f, "({}", escape_token(label))?;
                for c in children {
                    write!(f, " {}", c)?;
                }
                write!(f, ")")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TreeError {
    #[error("tree root must be a non-terminal")]
    LeafRoot,
    #[error("leaf with empty word or POS tag")]
    EmptyLeaf,
    #[error("non-terminal with empty label")]
    EmptyLabel,
    #[error("non-terminal {label:?} has no children")]
    ChildlessNode { label: String },
}

/// A surface word with its POS tag.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TaggedWord {
    pub word: String,
    pub pos: String,
}

impl TaggedWord {
    pub fn new(word: impl Into<String>, pos: impl Into<String>) -> TaggedWord {
        TaggedWord {
            word: word.into(),
            pos: pos.into(),
        }
    }
}

impl fmt::Display for TaggedWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}_{}", self.word, self.pos)
    }
}

/// A non-empty sequence of tagged words.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sentence {
    words: Vec<TaggedWord>,
}

impl Sentence {
    pub fn new(words: Vec<TaggedWord>) -> Result<Sentence, EmptySentence> {
        if words.is_empty() {
            return Err(EmptySentence);
        }
        Ok(Sentence { words })
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn get(&self, i: usize) -> Option<&TaggedWord> {
        self.words.get(i)
    }

    pub fn words(&self) -> &[TaggedWord] {
        &self.words
    }

    pub fn iter(&self) -> std::slice::Iter<'_, TaggedWord> {
        self.words.iter()
    }
}

impl fmt::Display for Sentence {
    /// `word_POS` pairs separated by single spaces.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, w) in self.words.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{}", w)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("a sentence must contain at least one word")]
pub struct EmptySentence;

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn figure1_tree() -> Tree {
        Tree::non_terminal(
            "S",
            vec![
                Tree::non_terminal(
                    "NP",
                    vec![Tree::leaf("The", "DT"), Tree::leaf("public", "NN")],
                ),
                Tree::non_terminal(
                    "VP",
                    vec![
                        Tree::leaf("is", "VBZ"),
                        Tree::non_terminal("ADVP", vec![Tree::leaf("still", "RB")]),
                        Tree::non_terminal("ADJP", vec![Tree::leaf("cautious", "JJ")]),
                    ],
                ),
                Tree::leaf(".", "."),
            ],
        )
    }

    #[test]
    fn yield_of_sample_tree() {
        let s = figure1_tree().sentence();
        let words: Vec<&str> = s.iter().map(|w| w.word.as_str()).collect();
        let tags: Vec<&str> = s.iter().map(|w| w.pos.as_str()).collect();
        assert_eq!(words, ["The", "public", "is", "still", "cautious", "."]);
        assert_eq!(tags, ["DT", "NN", "VBZ", "RB", "JJ", "."]);
    }

    #[test]
    fn yield_matches_independent_traversal() {
        // Second, iterative traversal as an oracle for `sentence`.
        let tree = figure1_tree();
        let mut stack = vec![&tree];
        let mut leaves = Vec::new();
        while let Some(node) = stack.pop() {
            match node {
                Tree::Leaf { word, pos } => leaves.push((word.clone(), pos.clone())),
                Tree::NonTerminal { children, .. } => {
                    for c in children.iter().rev() {
                        stack.push(c);
                    }
                }
            }
        }
        let via_sentence: Vec<(String, String)> = tree
            .sentence()
            .iter()
            .map(|w| (w.word.clone(), w.pos.clone()))
            .collect();
        assert_eq!(leaves, via_sentence);
    }

    #[test]
    fn counts() {
        let t = figure1_tree();
        assert_eq!(t.len(), 6);
        assert_eq!(t.constituent_count(), 5);
        assert_eq!(t.depth(), 3);
    }

    #[test]
    fn validation_rejects_malformed_trees() {
        assert_eq!(Tree::leaf("w", "T").validate(), Err(TreeError::LeafRoot));
        let childless = Tree::NonTerminal {
            label: "NP".into(),
            children: vec![],
        };
        assert!(matches!(
            Tree::non_terminal("S", vec![childless]).validate(),
            Err(TreeError::ChildlessNode { .. })
        ));
        let bad_leaf = Tree::non_terminal("S", vec![Tree::leaf("", "T")]);
        assert_eq!(bad_leaf.validate(), Err(TreeError::EmptyLeaf));
    }

    #[test]
    fn empty_sentence_rejected() {
        assert!(Sentence::new(vec![]).is_err());
    }
}
