//! The neural parser: a sequence-to-sequence model over linearized trees.
//!
//! The encoder is a stacked bidirectional LSTM over word and POS
//! embeddings (plus a frozen pretrained table); the decoder is a simple
//! rectified recurrence that consumes two attention summaries — one over
//! the words already shifted, one over the rest — and emits one action
//! token per step. Decoding masks the output distribution down to the
//! actions that are legal in the current parser configuration, so every
//! finished derivation is a well-formed tree over exactly the input
//! sentence.
//!
//! Submodules split the pipeline along its seams: [`config`] for
//! hyper-parameters, [`vocab`] for id tables, [`params`] for tensors and
//! their initialization, [`encoder`]/[`attention`]/[`decoder`] for the
//! network with hand-derived backward passes, [`train`] for the Adam loop,
//! [`decode`] for greedy and beam search, and [`checkpoint`] for the text
//! serialization format.

pub mod attention;
pub mod checkpoint;
pub mod config;
pub mod decode;
pub mod decoder;
pub mod encoder;
pub mod math;
pub mod params;
pub mod train;
pub mod vocab;

use std::path::Path;

use ndarray::Array2;

use crate::linearize::{linearize, Scheme};
use crate::scalar::Scalar;
use crate::transitions::System;
use crate::tree::{Sentence, Tree};

pub use checkpoint::AnyModel;
pub use config::{AttentionMode, ModelConfig, Normalization, Precision};
pub use decode::{DecodeError, Decoded};
pub use encoder::EncoderCache;
pub use params::Params;
pub use train::{Adam, EpochStats};
pub use vocab::Vocabs;

/// A complete model: hyper-parameters, id tables, learned tensors, and
/// the frozen pretrained word vectors (all zeros when none were given).
#[derive(Debug, Clone, PartialEq)]
pub struct Seq2Seq<S: Scalar> {
    pub config: ModelConfig,
    pub vocabs: Vocabs,
    pub params: Params<S>,
    /// One row per word id, aligned with `vocabs.words`; frozen during
    /// training.
    pub pretrained: Array2<S>,
}

/// One training tree with everything precomputed: input ids and the gold
/// action-token ids. `pre_ids` indexes the pretrained table and stays
/// fixed even when `word_ids` is unknown-dropped during training.
#[derive(Debug, Clone)]
pub struct TrainExample {
    pub tree: Tree,
    pub word_ids: Vec<usize>,
    pub pre_ids: Vec<usize>,
    pub pos_ids: Vec<usize>,
    pub actions: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ExampleError {
    #[error("action token {token:?} is outside the model's vocabulary")]
    UnknownAction { token: String },
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PretrainedError {
    #[error("cannot read vectors {path}: {message}")]
    Io { path: String, message: String },
    #[error("{path} line {line}: {word:?} has {found} values, expected {dim}")]
    Dim {
        path: String,
        line: usize,
        word: String,
        dim: usize,
        found: usize,
    },
    #[error("{path} line {line}: bad float {value:?}")]
    BadFloat {
        path: String,
        line: usize,
        value: String,
    },
}

impl<S: Scalar> Seq2Seq<S> {
    /// A freshly initialized model over the given tables. Parameters are
    /// drawn deterministically from `config.seed`.
    pub fn new(config: ModelConfig, vocabs: Vocabs) -> Seq2Seq<S> {
        let params = Params::init(&config, &vocabs, config.seed);
        let pretrained = Array2::zeros((vocabs.words.len(), config.pretrained_dim));
        Seq2Seq {
            config,
            vocabs,
            params,
            pretrained,
        }
    }

    /// Builds the vocabularies from a training treebank, initializes the
    /// model, loads pretrained vectors if the config names a file, and
    /// precomputes one [`TrainExample`] per tree.
    pub fn from_treebank(
        config: ModelConfig,
        trees: &[Tree],
    ) -> Result<(Seq2Seq<S>, Vec<TrainExample>), PretrainedError> {
        let vocabs = Vocabs::build(trees, config.scheme);
        let mut model = Seq2Seq::new(config, vocabs);
        if let Some(path) = model.config.pretrained.clone() {
            model.load_pretrained_text(Path::new(&path))?;
        }
        let examples = trees
            .iter()
            .map(|t| {
                model
                    .example(t)
                    .expect("training trees are inside their own vocabulary")
            })
            .collect();
        Ok((model, examples))
    }

    pub fn scheme(&self) -> Scheme {
        self.config.scheme
    }

    /// The transition system decoding runs under, with the configured
    /// termination caps.
    pub fn system(&self) -> System {
        self.config
            .scheme
            .system()
            .with_limits(self.config.max_open, self.config.max_unary)
    }

    /// Word, pretrained, and POS ids for a sentence, with unknowns mapped
    /// to id 0.
    pub fn lookup(&self, sentence: &Sentence) -> (Vec<usize>, Vec<usize>, Vec<usize>) {
        let mut word_ids = Vec::with_capacity(sentence.len());
        let mut pre_ids = Vec::with_capacity(sentence.len());
        let mut pos_ids = Vec::with_capacity(sentence.len());
        for w in sentence.iter() {
            let id = self.vocabs.words.id(&w.word);
            word_ids.push(id);
            pre_ids.push(id);
            pos_ids.push(self.vocabs.pos.id(&w.pos));
        }
        (word_ids, pre_ids, pos_ids)
    }

    /// Runs the encoder over a sentence.
    pub fn encode_sentence(&self, sentence: &Sentence) -> EncoderCache<S> {
        let (word_ids, pre_ids, pos_ids) = self.lookup(sentence);
        encoder::encode(
            &self.params,
            &self.pretrained,
            &self.config,
            &word_ids,
            &pre_ids,
            &pos_ids,
        )
    }

    /// Precomputes ids and the gold action sequence for one tree. Fails
    /// when the tree linearizes to a token the model has never seen.
    pub fn example(&self, tree: &Tree) -> Result<TrainExample, ExampleError> {
        let sentence = tree.sentence();
        let (word_ids, pre_ids, pos_ids) = self.lookup(&sentence);
        let actions = linearize(tree, self.config.scheme)
            .into_iter()
            .map(|token| {
                self.vocabs
                    .actions
                    .id(&token)
                    .ok_or(ExampleError::UnknownAction { token })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(TrainExample {
            tree: tree.clone(),
            word_ids,
            pre_ids,
            pos_ids,
            actions,
        })
    }

    /// Parses a sentence: greedy search for `width <= 1`, beam search
    /// otherwise.
    pub fn parse(&self, sentence: &Sentence, width: usize) -> Result<Decoded, DecodeError> {
        if width <= 1 {
            decode::greedy(self, sentence)
        } else {
            decode::beam(self, sentence, width)
        }
    }

    /// Loads word vectors in the plain text format (`word v1 v2 ...`, with
    /// an optional `count dim` header line). Vectors for out-of-vocabulary
    /// words are ignored; returns how many vocabulary words got a vector.
    pub fn load_pretrained_text(&mut self, path: &Path) -> Result<usize, PretrainedError> {
        let text = std::fs::read_to_string(path).map_err(|e| PretrainedError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        let dim = self.config.pretrained_dim;
        let mut loaded = 0;
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let mut fields = raw.split_whitespace();
            let Some(word) = fields.next() else { continue };
            let values: Vec<&str> = fields.collect();
            if line == 1 && values.len() == 1 && word.parse::<usize>().is_ok() {
                // "count dim" header of the classic text format.
                continue;
            }
            if values.len() != dim {
                return Err(PretrainedError::Dim {
                    path: path.display().to_string(),
                    line,
                    word: word.to_string(),
                    dim,
                    found: values.len(),
                });
            }
            let id = self.vocabs.words.id(word);
            if id == 0 && word != vocab::UNK {
                continue;
            }
            for (c, value) in values.iter().enumerate() {
                let parsed: f64 = value.parse().map_err(|_| PretrainedError::BadFloat {
                    path: path.display().to_string(),
                    line,
                    value: value.to_string(),
                })?;
                self.pretrained[(id, c)] = S::from_f64(parsed);
            }
            loaded += 1;
        }
        Ok(loaded)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{random_trees, SynthConfig};
    use std::io::Write;

    fn small_config() -> ModelConfig {
        ModelConfig {
            pretrained_dim: 3,
            word_dim: 3,
            pos_dim: 2,
            label_dim: 2,
            action_dim: 3,
            enc_input: 4,
            enc_hidden: 3,
            enc_layers: 1,
            dec_hidden: 5,
            att_hidden: 3,
            ..ModelConfig::default()
        }
    }

    fn trees() -> Vec<Tree> {
        random_trees(
            3,
            6,
            &SynthConfig {
                max_depth: 3,
                max_fanout: 3,
                vocab: 8,
                ..SynthConfig::default()
            },
        )
    }

    #[test]
    fn examples_align_ids_with_the_linearization() {
        let (model, examples) =
            Seq2Seq::<f64>::from_treebank(small_config(), &trees()).expect("builds");
        for example in &examples {
            let tokens = linearize(&example.tree, model.scheme());
            assert_eq!(tokens.len(), example.actions.len());
            for (token, &id) in tokens.iter().zip(&example.actions) {
                assert_eq!(model.vocabs.actions.spelling(id), token);
            }
            assert_eq!(example.word_ids.len(), example.tree.len());
            assert_eq!(example.word_ids, example.pre_ids);
        }
    }

    #[test]
    fn unseen_labels_are_reported() {
        let (model, _) = Seq2Seq::<f64>::from_treebank(small_config(), &trees()).expect("builds");
        let alien = crate::treebank::parse_tree("(WEIRD (XX hello))").unwrap();
        assert!(matches!(
            model.example(&alien),
            Err(ExampleError::UnknownAction { .. })
        ));
    }

    #[test]
    fn pretrained_vectors_fill_matching_rows_only() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("vectors.txt");
        let corpus = trees();
        let known = corpus[0].sentence().get(0).unwrap().word.clone();
        let mut file = std::fs::File::create(&path).unwrap();
        writeln!(file, "2 3").unwrap();
        writeln!(file, "{} 0.25 -1 0.5", known).unwrap();
        writeln!(file, "zzz-unseen 9 9 9").unwrap();
        drop(file);

        let (mut model, _) =
            Seq2Seq::<f64>::from_treebank(small_config(), &corpus).expect("builds");
        let loaded = model.load_pretrained_text(&path).expect("loads");
        assert_eq!(loaded, 1);
        let id = model.vocabs.words.id(&known);
        assert_eq!(model.pretrained[(id, 0)], 0.25);
        assert_eq!(model.pretrained[(id, 1)], -1.0);
        // The unseen word landed nowhere.
        assert_eq!(model.pretrained.row(0).sum(), 0.0);

        let bad = dir.path().join("bad.txt");
        std::fs::write(&bad, format!("{} 1 2\n", known)).unwrap();
        assert!(matches!(
            model.load_pretrained_text(&bad),
            Err(PretrainedError::Dim { found: 2, .. })
        ));
    }
}
