//! Teacher-forced training: full-sequence forward/backward, the Adam
//! update, gradient clipping, and the epoch loop.
//!
//! The objective for one example is the summed cross-entropy of the gold
//! action tokens plus `lambda/2` times the squared norm of every learned
//! tensor. Gradients are exact — each module's backward is hand-derived —
//! which is what the finite-difference checks in the test suite verify.

use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::scalar::Scalar;
use crate::seq2seq::decoder::{decoder_step, decoder_step_backward, DecoderStep};
use crate::seq2seq::encoder::{encode, encoder_backward, EncoderCache};
use crate::seq2seq::math::{log_loss, softmax_col};
use crate::seq2seq::params::Params;
use crate::seq2seq::{Seq2Seq, TrainExample};
use crate::transitions::ActionKind;

struct SequenceForward<S: Scalar> {
    enc: EncoderCache<S>,
    steps: Vec<DecoderStep<S>>,
    nll: S,
    correct: usize,
}

/// Teacher-forced forward pass over one example. `word_ids` may differ
/// from the example's own ids when singleton words were unknown-dropped.
fn run_forward<S: Scalar>(
    model: &Seq2Seq<S>,
    example: &TrainExample,
    word_ids: &[usize],
) -> SequenceForward<S> {
    let enc = encode(
        &model.params,
        &model.pretrained,
        &model.config,
        word_ids,
        &example.pre_ids,
        &example.pos_ids,
    );
    let mut steps = Vec::with_capacity(example.actions.len());
    let mut d_prev: Array2<S> = Array2::zeros((model.config.dec_hidden, 1));
    let mut consumed = 0usize;
    let mut prev_action = None;
    let mut nll = S::zero();
    let mut correct = 0usize;
    for &gold in &example.actions {
        let step = decoder_step(
            &model.params,
            &model.config,
            &enc.hs,
            &d_prev,
            consumed,
            prev_action,
        );
        nll = nll + log_loss(&step.logits, gold);
        let argmax = step
            .logits
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).expect("finite logits"))
            .map(|(i, _)| i)
            .expect("non-empty logits");
        if argmax == gold {
            correct += 1;
        }
        if model.vocabs.actions.action(gold).kind() == ActionKind::Shift {
            consumed += 1;
        }
        d_prev = step.d.clone();
        prev_action = Some(gold);
        steps.push(step);
    }
    SequenceForward {
        enc,
        steps,
        nll,
        correct,
    }
}

/// Loss and correct-token count for one example, without gradients. The
/// loss includes the regularizer.
pub fn example_loss<S: Scalar>(
    model: &Seq2Seq<S>,
    example: &TrainExample,
    word_ids: &[usize],
) -> (S, usize) {
    let fwd = run_forward(model, example, word_ids);
    let reg = S::from_f64(model.config.lambda / 2.0) * model.params.squared_norm();
    (fwd.nll + reg, fwd.correct)
}

/// Loss, correct-token count, and exact gradients for one example.
pub fn example_loss_grads<S: Scalar>(
    model: &Seq2Seq<S>,
    example: &TrainExample,
    word_ids: &[usize],
) -> (S, usize, Params<S>) {
    let fwd = run_forward(model, example, word_ids);
    let config = &model.config;
    let n = fwd.enc.hs.len();
    let enc_out = 2 * config.enc_hidden;
    let mut grads = model.params.zeros_like();
    let mut dhs: Vec<Array2<S>> = (0..n).map(|_| Array2::zeros((enc_out, 1))).collect();
    let mut dd_next: Array2<S> = Array2::zeros((config.dec_hidden, 1));
    let zero_state: Array2<S> = Array2::zeros((config.dec_hidden, 1));
    for t in (0..fwd.steps.len()).rev() {
        let gold = example.actions[t];
        let mut dlogits = softmax_col(&fwd.steps[t].logits);
        dlogits[(gold, 0)] = dlogits[(gold, 0)] - S::one();
        let d_prev = if t > 0 { &fwd.steps[t - 1].d } else { &zero_state };
        dd_next = decoder_step_backward(
            &model.params,
            config,
            &fwd.steps[t],
            &fwd.enc.hs,
            d_prev,
            &dlogits,
            &dd_next,
            &mut grads,
            &mut dhs,
        );
    }
    encoder_backward(&model.params, config, &fwd.enc, &dhs, &mut grads);
    let lambda = S::from_f64(config.lambda);
    grads.add_scaled(&model.params, lambda);
    let reg = S::from_f64(config.lambda / 2.0) * model.params.squared_norm();
    (fwd.nll + reg, fwd.correct, grads)
}

/// Rescales the gradients in place when their global norm exceeds `max`
/// (`max <= 0` disables clipping).
pub fn clip_global_norm<S: Scalar>(grads: &mut Params<S>, max: S) {
    if max <= S::zero() {
        return;
    }
    let norm = grads.squared_norm().sqrt();
    if norm > max {
        grads.scale(max / norm);
    }
}

/// Adam with bias correction. Moments mirror the parameter layout.
pub struct Adam<S: Scalar> {
    lr: S,
    beta1: S,
    beta2: S,
    eps: S,
    beta1_pow: S,
    beta2_pow: S,
    m: Params<S>,
    v: Params<S>,
}

impl<S: Scalar> Adam<S> {
    pub fn new(params: &Params<S>, lr: f64, beta1: f64, beta2: f64) -> Adam<S> {
        Adam {
            lr: S::from_f64(lr),
            beta1: S::from_f64(beta1),
            beta2: S::from_f64(beta2),
            eps: S::from_f64(1e-8),
            beta1_pow: S::one(),
            beta2_pow: S::one(),
            m: params.zeros_like(),
            v: params.zeros_like(),
        }
    }

    pub fn step(&mut self, params: &mut Params<S>, grads: &Params<S>) {
        self.beta1_pow = self.beta1_pow * self.beta1;
        self.beta2_pow = self.beta2_pow * self.beta2;
        let correction1 = S::one() - self.beta1_pow;
        let correction2 = S::one() - self.beta2_pow;
        let one = S::one();
        let gs = grads.tensors();
        let ms = self.m.tensors_mut();
        let vs = self.v.tensors_mut();
        for ((((_, theta), (_, g)), (_, m)), (_, v)) in params
            .tensors_mut()
            .into_iter()
            .zip(gs)
            .zip(ms)
            .zip(vs)
        {
            ndarray::Zip::from(theta)
                .and(g)
                .and(m)
                .and(v)
                .for_each(|theta, &g, m, v| {
                    *m = self.beta1 * *m + (one - self.beta1) * g;
                    *v = self.beta2 * *v + (one - self.beta2) * g * g;
                    let m_hat = *m / correction1;
                    let v_hat = *v / correction2;
                    *theta = *theta - self.lr * m_hat / (v_hat.sqrt() + self.eps);
                });
        }
    }
}

/// Summary of one pass over the training set.
#[derive(Debug, Clone, Copy)]
pub struct EpochStats {
    pub mean_loss: f64,
    pub token_accuracy: f64,
    pub tokens: usize,
}

/// One epoch of per-example updates in a shuffled order. Singleton words
/// are replaced by the unknown token with the configured probability; both
/// the shuffle and the replacement draw from `rng`.
pub fn train_epoch<S: Scalar>(
    model: &mut Seq2Seq<S>,
    examples: &[TrainExample],
    opt: &mut Adam<S>,
    rng: &mut ChaCha8Rng,
) -> EpochStats {
    let mut order: Vec<usize> = (0..examples.len()).collect();
    order.shuffle(rng);
    let mut total_loss = 0.0;
    let mut correct = 0usize;
    let mut tokens = 0usize;
    let clip = S::from_f64(model.config.clip_norm);
    for idx in order {
        let example = &examples[idx];
        let word_ids: Vec<usize> = example
            .word_ids
            .iter()
            .map(|&id| {
                if model.vocabs.words.is_singleton(id)
                    && rng.random_bool(model.config.singleton_unk)
                {
                    0
                } else {
                    id
                }
            })
            .collect();
        let (loss, ok, mut grads) = example_loss_grads(model, example, &word_ids);
        clip_global_norm(&mut grads, clip);
        opt.step(&mut model.params, &grads);
        total_loss += loss.to_f64();
        correct += ok;
        tokens += example.actions.len();
    }
    EpochStats {
        mean_loss: total_loss / examples.len().max(1) as f64,
        token_accuracy: correct as f64 / tokens.max(1) as f64,
        tokens,
    }
}

/// Teacher-forced argmax accuracy over `examples`, with no unknown-token
/// sampling and no updates.
pub fn token_accuracy<S: Scalar>(model: &Seq2Seq<S>, examples: &[TrainExample]) -> f64 {
    let mut correct = 0usize;
    let mut tokens = 0usize;
    for example in examples {
        let (_, ok) = example_loss(model, example, &example.word_ids);
        correct += ok;
        tokens += example.actions.len();
    }
    correct as f64 / tokens.max(1) as f64
}
