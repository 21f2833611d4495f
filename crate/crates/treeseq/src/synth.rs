//! Seeded random trees and sentences for tests, benchmarks, and smoke
//! training runs. Everything is deterministic given the seed.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::tree::{Sentence, TaggedWord, Tree};

/// Phrase labels the generator draws from.
pub const LABEL_POOL: &[&str] = &["S", "NP", "VP", "PP", "ADJP", "ADVP", "SBAR", "QP"];

/// POS tags the generator draws from.
pub const POS_POOL: &[&str] = &["DT", "NN", "NNS", "VB", "VBZ", "JJ", "RB", "IN", "CD", "PRP"];

#[derive(Debug, Clone)]
pub struct SynthConfig {
    /// Upper bound on tree depth (internal levels; a leaf has depth 0).
    pub max_depth: usize,
    /// Upper bound on children per non-terminal.
    pub max_fanout: usize,
    /// Number of distinct surface words (`w0` … `w{vocab-1}`).
    pub vocab: usize,
    /// Chance that an expandable slot becomes a leaf before the depth cap.
    pub leaf_bias: f64,
    /// Mix sentence punctuation (`.` and `,`) into the leaves.
    pub punctuation: bool,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            max_depth: 6,
            max_fanout: 4,
            vocab: 50,
            leaf_bias: 0.4,
            punctuation: true,
        }
    }
}

impl SynthConfig {
    fn leaf(&self, rng: &mut ChaCha8Rng) -> Tree {
        if self.punctuation && rng.random_bool(0.08) {
            let p = if rng.random_bool(0.5) { "." } else { "," };
            return Tree::leaf(p, p);
        }
        let word = format!("w{}", rng.random_range(0..self.vocab));
        let pos = POS_POOL[rng.random_range(0..POS_POOL.len())];
        Tree::leaf(word, pos)
    }

    fn node(&self, rng: &mut ChaCha8Rng, depth_left: usize) -> Tree {
        if depth_left == 0 || rng.random_bool(self.leaf_bias) {
            return self.leaf(rng);
        }
        self.internal(rng, depth_left)
    }

    fn internal(&self, rng: &mut ChaCha8Rng, depth_left: usize) -> Tree {
        let label = LABEL_POOL[rng.random_range(0..LABEL_POOL.len())];
        let fanout = rng.random_range(1..=self.max_fanout);
        let children = (0..fanout).map(|_| self.node(rng, depth_left - 1)).collect();
        Tree::non_terminal(label, children)
    }
}

/// One random tree. The root is always a non-terminal.
pub fn random_tree(rng: &mut ChaCha8Rng, config: &SynthConfig) -> Tree {
    config.internal(rng, config.max_depth.max(1))
}

/// A deterministic batch of random trees.
pub fn random_trees(seed: u64, count: usize, config: &SynthConfig) -> Vec<Tree> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| random_tree(&mut rng, config)).collect()
}

/// A flat tagged sentence of exactly `len` words (for benchmarks).
pub fn random_sentence(rng: &mut ChaCha8Rng, len: usize, config: &SynthConfig) -> Sentence {
    assert!(len > 0, "a sentence needs at least one word");
    let words = (0..len)
        .map(|_| match config.leaf(rng) {
            Tree::Leaf { word, pos } => TaggedWord::new(word, pos),
            _ => unreachable!(),
        })
        .collect();
    Sentence::new(words).expect("len > 0")
}
