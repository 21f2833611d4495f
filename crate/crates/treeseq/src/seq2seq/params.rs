//! The model's learned tensors: layout, initialization, and uniform
//! named access for the optimizer, serialization, and gradient checks.
//!
//! Every tensor is a two-dimensional array; vectors are stored as single
//! columns. Gradients and optimizer moments reuse the same structure.

use ndarray::Array2;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::scalar::Scalar;
use crate::seq2seq::config::ModelConfig;
use crate::seq2seq::vocab::Vocabs;

/// One LSTM direction: gate order down the rows is input, forget, cell,
/// output, each block `hidden` rows tall.
#[derive(Debug, Clone, PartialEq)]
pub struct LstmParams<S: Scalar> {
    pub w_in: Array2<S>,
    pub w_rec: Array2<S>,
    pub bias: Array2<S>,
}

/// Forward and backward directions of one encoder layer.
#[derive(Debug, Clone, PartialEq)]
pub struct BiLstmParams<S: Scalar> {
    pub fwd: LstmParams<S>,
    pub bwd: LstmParams<S>,
}

/// All learned tensors. The pretrained word table lives outside: it is
/// frozen and takes no gradient.
#[derive(Debug, Clone, PartialEq)]
pub struct Params<S: Scalar> {
    pub word_emb: Array2<S>,
    pub pos_emb: Array2<S>,
    pub label_emb: Array2<S>,
    pub action_emb: Array2<S>,
    /// Projection of the concatenated embeddings into the encoder input.
    pub input_w: Array2<S>,
    pub input_b: Array2<S>,
    pub enc: Vec<BiLstmParams<S>>,
    /// The decoder recurrence over [previous state; left summary; right
    /// summary] (plus the previous action embedding when that is fed).
    pub dec_w: Array2<S>,
    pub dec_b: Array2<S>,
    pub att_w: Array2<S>,
    pub att_b: Array2<S>,
    pub att_v: Array2<S>,
    pub out_w: Array2<S>,
    pub out_b: Array2<S>,
}

impl<S: Scalar> Params<S> {
    /// Glorot-uniform initialization (biases zero), deterministic in the
    /// seed.
    pub fn init(config: &ModelConfig, vocabs: &Vocabs, seed: u64) -> Params<S> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let emb_in = config.pretrained_dim + config.word_dim + config.pos_dim;
        let enc_out = 2 * config.enc_hidden;
        let dec_in = Self::dec_in(config);
        let mut glorot = |rows: usize, cols: usize| -> Array2<S> {
            let limit = (6.0 / (rows + cols) as f64).sqrt();
            Array2::from_shape_fn((rows, cols), |_| {
                S::from_f64(rng.random_range(-limit..=limit))
            })
        };
        let lstm = |glorot: &mut dyn FnMut(usize, usize) -> Array2<S>, input: usize, hidden: usize| LstmParams {
            w_in: glorot(4 * hidden, input),
            w_rec: glorot(4 * hidden, hidden),
            bias: Array2::zeros((4 * hidden, 1)),
        };
        let mut enc = Vec::with_capacity(config.enc_layers);
        for layer in 0..config.enc_layers {
            let input = if layer == 0 { config.enc_input } else { enc_out };
            enc.push(BiLstmParams {
                fwd: lstm(&mut glorot, input, config.enc_hidden),
                bwd: lstm(&mut glorot, input, config.enc_hidden),
            });
        }
        Params {
            word_emb: glorot(vocabs.words.len(), config.word_dim),
            pos_emb: glorot(vocabs.pos.len(), config.pos_dim),
            label_emb: glorot(vocabs.labels.len(), config.label_dim),
            action_emb: glorot(vocabs.actions.len(), config.action_dim),
            input_w: glorot(config.enc_input, emb_in),
            input_b: Array2::zeros((config.enc_input, 1)),
            enc,
            dec_w: glorot(config.dec_hidden, dec_in),
            dec_b: Array2::zeros((config.dec_hidden, 1)),
            att_w: glorot(config.att_hidden, enc_out + config.dec_hidden),
            att_b: Array2::zeros((config.att_hidden, 1)),
            att_v: glorot(config.att_hidden, 1),
            out_w: glorot(vocabs.actions.len(), config.dec_hidden),
            out_b: Array2::zeros((vocabs.actions.len(), 1)),
        }
    }

    /// Width of the decoder recurrence input.
    pub fn dec_in(config: &ModelConfig) -> usize {
        let enc_out = 2 * config.enc_hidden;
        config.dec_hidden
            + 2 * enc_out
            + if config.feed_action { config.action_dim } else { 0 }
    }

    /// A same-shaped parameter set of zeros (gradients, moments).
    pub fn zeros_like(&self) -> Params<S> {
        let z = |a: &Array2<S>| Array2::zeros(a.raw_dim());
        Params {
            word_emb: z(&self.word_emb),
            pos_emb: z(&self.pos_emb),
            label_emb: z(&self.label_emb),
            action_emb: z(&self.action_emb),
            input_w: z(&self.input_w),
            input_b: z(&self.input_b),
            enc: self
                .enc
                .iter()
                .map(|l| BiLstmParams {
                    fwd: LstmParams {
                        w_in: z(&l.fwd.w_in),
                        w_rec: z(&l.fwd.w_rec),
                        bias: z(&l.fwd.bias),
                    },
                    bwd: LstmParams {
                        w_in: z(&l.bwd.w_in),
                        w_rec: z(&l.bwd.w_rec),
                        bias: z(&l.bwd.bias),
                    },
                })
                .collect(),
            dec_w: z(&self.dec_w),
            dec_b: z(&self.dec_b),
            att_w: z(&self.att_w),
            att_b: z(&self.att_b),
            att_v: z(&self.att_v),
            out_w: z(&self.out_w),
            out_b: z(&self.out_b),
        }
    }

    /// All tensors with their names, in a fixed order shared by
    /// [`Params::tensors_mut`].
    pub fn tensors(&self) -> Vec<(String, &Array2<S>)> {
        let mut out: Vec<(String, &Array2<S>)> = vec![
            ("word_emb".into(), &self.word_emb),
            ("pos_emb".into(), &self.pos_emb),
            ("label_emb".into(), &self.label_emb),
            ("action_emb".into(), &self.action_emb),
            ("input_w".into(), &self.input_w),
            ("input_b".into(), &self.input_b),
        ];
        for (i, layer) in self.enc.iter().enumerate() {
            out.push((format!("enc.{i}.fwd.w_in"), &layer.fwd.w_in));
            out.push((format!("enc.{i}.fwd.w_rec"), &layer.fwd.w_rec));
            out.push((format!("enc.{i}.fwd.bias"), &layer.fwd.bias));
            out.push((format!("enc.{i}.bwd.w_in"), &layer.bwd.w_in));
            out.push((format!("enc.{i}.bwd.w_rec"), &layer.bwd.w_rec));
            out.push((format!("enc.{i}.bwd.bias"), &layer.bwd.bias));
        }
        out.extend([
            ("dec_w".to_string(), &self.dec_w),
            ("dec_b".to_string(), &self.dec_b),
            ("att_w".to_string(), &self.att_w),
            ("att_b".to_string(), &self.att_b),
            ("att_v".to_string(), &self.att_v),
            ("out_w".to_string(), &self.out_w),
            ("out_b".to_string(), &self.out_b),
        ]);
        out
    }

    /// Mutable variant of [`Params::tensors`], same names and order.
    pub fn tensors_mut(&mut self) -> Vec<(String, &mut Array2<S>)> {
        let mut out: Vec<(String, &mut Array2<S>)> = vec![
            ("word_emb".into(), &mut self.word_emb),
            ("pos_emb".into(), &mut self.pos_emb),
            ("label_emb".into(), &mut self.label_emb),
            ("action_emb".into(), &mut self.action_emb),
            ("input_w".into(), &mut self.input_w),
            ("input_b".into(), &mut self.input_b),
        ];
        for (i, layer) in self.enc.iter_mut().enumerate() {
            out.push((format!("enc.{i}.fwd.w_in"), &mut layer.fwd.w_in));
            out.push((format!("enc.{i}.fwd.w_rec"), &mut layer.fwd.w_rec));
            out.push((format!("enc.{i}.fwd.bias"), &mut layer.fwd.bias));
            out.push((format!("enc.{i}.bwd.w_in"), &mut layer.bwd.w_in));
            out.push((format!("enc.{i}.bwd.w_rec"), &mut layer.bwd.w_rec));
            out.push((format!("enc.{i}.bwd.bias"), &mut layer.bwd.bias));
        }
        out.extend([
            ("dec_w".to_string(), &mut self.dec_w),
            ("dec_b".to_string(), &mut self.dec_b),
            ("att_w".to_string(), &mut self.att_w),
            ("att_b".to_string(), &mut self.att_b),
            ("att_v".to_string(), &mut self.att_v),
            ("out_w".to_string(), &mut self.out_w),
            ("out_b".to_string(), &mut self.out_b),
        ]);
        out
    }

    /// Total number of scalar parameters.
    pub fn count(&self) -> usize {
        self.tensors().iter().map(|(_, t)| t.len()).sum()
    }

    /// Squared L2 norm of all tensors.
    pub fn squared_norm(&self) -> S {
        self.tensors()
            .iter()
            .map(|(_, t)| t.iter().map(|&x| x * x).sum::<S>())
            .fold(S::zero(), |a, b| a + b)
    }

    /// `self += lambda * other`, tensor by tensor (weight-decay gradients).
    pub fn add_scaled(&mut self, other: &Params<S>, lambda: S) {
        let others = other.tensors();
        for ((_, mine), (_, theirs)) in self.tensors_mut().into_iter().zip(others) {
            mine.zip_mut_with(theirs, |m, t| *m = *m + lambda * *t);
        }
    }

    /// Scales every tensor in place.
    pub fn scale(&mut self, factor: S) {
        for (_, t) in self.tensors_mut() {
            t.mapv_inplace(|x| x * factor);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    
    use crate::treebank::parse_tree;

    fn tiny_setup() -> (ModelConfig, Vocabs) {
        let config = ModelConfig {
            pretrained_dim: 3,
            word_dim: 4,
            pos_dim: 2,
            label_dim: 2,
            action_dim: 3,
            enc_input: 5,
            enc_hidden: 4,
            enc_layers: 2,
            dec_hidden: 6,
            att_hidden: 3,
            ..ModelConfig::default()
        };
        let trees = vec![parse_tree("(S (NP (DT a) (NN b)) (VB c))").unwrap()];
        let vocabs = Vocabs::build(&trees, config.scheme);
        (config, vocabs)
    }

    #[test]
    fn shapes_follow_the_config() {
        let (config, vocabs) = tiny_setup();
        let p: Params<f64> = Params::init(&config, &vocabs, 0);
        assert_eq!(p.word_emb.dim(), (vocabs.words.len(), 4));
        assert_eq!(p.input_w.dim(), (5, 3 + 4 + 2));
        assert_eq!(p.enc.len(), 2);
        assert_eq!(p.enc[0].fwd.w_in.dim(), (16, 5));
        assert_eq!(p.enc[1].fwd.w_in.dim(), (16, 8)); // layer 2 reads both directions
        assert_eq!(p.enc[1].bwd.w_rec.dim(), (16, 4));
        assert_eq!(p.dec_w.dim(), (6, 6 + 2 * 8));
        assert_eq!(p.att_w.dim(), (3, 8 + 6));
        assert_eq!(p.out_w.dim(), (vocabs.actions.len(), 6));
    }

    #[test]
    fn feed_action_widens_the_decoder_input() {
        let (mut config, vocabs) = tiny_setup();
        config.feed_action = true;
        let p: Params<f64> = Params::init(&config, &vocabs, 0);
        assert_eq!(p.dec_w.dim(), (6, 6 + 2 * 8 + 3));
    }

    #[test]
    fn init_is_deterministic_in_the_seed() {
        let (config, vocabs) = tiny_setup();
        let a: Params<f64> = Params::init(&config, &vocabs, 42);
        let b: Params<f64> = Params::init(&config, &vocabs, 42);
        let c: Params<f64> = Params::init(&config, &vocabs, 43);
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn tensor_listing_is_complete_and_aligned() {
        let (config, vocabs) = tiny_setup();
        let mut p: Params<f64> = Params::init(&config, &vocabs, 0);
        let names: Vec<String> = p.tensors().into_iter().map(|(n, _)| n).collect();
        let names_mut: Vec<String> = p.tensors_mut().into_iter().map(|(n, _)| n).collect();
        assert_eq!(names, names_mut);
        assert_eq!(names.len(), 6 + 2 * 6 + 7);
        let total: usize = p.count();
        assert!(total > 0);
        let zeros = p.zeros_like();
        assert_eq!(zeros.count(), total);
        assert_eq!(zeros.squared_norm(), 0.0);
    }
}
