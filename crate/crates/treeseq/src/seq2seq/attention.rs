//! Two-segment attention over the encoder states.
//!
//! At a step with `consumed` words already shifted, the encoder states
//! split into a left segment (positions `0..consumed`) and a right segment
//! (`consumed..n`). Each segment is summarized into one vector:
//!
//! * **probabilistic**: every position gets a score
//!   `beta_i = v^T tanh(W [h_i; d_prev] + b)`; the summaries are
//!   softmax-weighted sums, with the softmax taken per segment or once
//!   globally across the sentence;
//! * **deterministic**: only the two positions adjacent to the boundary are
//!   scored, and each summary is its raw score times its vector. Score
//!   evaluations per step stay constant in the sentence length, which is
//!   the entire point — [`Attention::beta_evals`] counts them.

use ndarray::{s, Array2};

use crate::scalar::Scalar;
use crate::seq2seq::config::{AttentionMode, ModelConfig, Normalization};
use crate::seq2seq::math::{softmax_backward, softmax_slice};
use crate::seq2seq::params::Params;

/// One step's attention output plus everything backward needs.
pub struct Attention<S: Scalar> {
    pub l: Array2<S>,
    pub r: Array2<S>,
    /// How many score evaluations this step performed.
    pub beta_evals: usize,
    /// Words consumed when the step ran (the segment boundary).
    pub consumed: usize,
    /// Indices whose score was evaluated.
    evaluated: Vec<usize>,
    /// `tanh(W [h_i; d_prev] + b)` per evaluated index.
    tanhs: Vec<Array2<S>>,
    /// Effective weight per evaluated index: softmax weights in
    /// probabilistic mode, the raw scores in deterministic mode.
    weights: Vec<S>,
}

impl<S: Scalar> Attention<S> {
    /// The full-sentence weight vector for diagnostics (zero at positions
    /// that were never scored).
    pub fn weight_profile(&self, n: usize) -> Vec<f64> {
        let mut out = vec![0.0; n];
        for (&i, &w) in self.evaluated.iter().zip(&self.weights) {
            out[i] = w.to_f64();
        }
        out
    }
}

/// Scores position `i`: returns `tanh(W [h_i; d_prev] + b)` given the
/// precomputed decoder-side part `wd = W_d d_prev + b`.
fn score_tanh<S: Scalar>(params: &Params<S>, enc_out: usize, h: &Array2<S>, wd: &Array2<S>) -> Array2<S> {
    let wh = params.att_w.slice(s![.., 0..enc_out]).dot(h);
    (wh + wd).mapv(|v| v.tanh())
}

fn score_value<S: Scalar>(params: &Params<S>, a: &Array2<S>) -> S {
    params
        .att_v
        .iter()
        .zip(a.iter())
        .map(|(&v, &x)| v * x)
        .sum()
}

/// Computes the step's attention. `hs` are the encoder states, `d_prev`
/// the previous decoder state, `consumed` the boundary.
pub fn attend<S: Scalar>(
    params: &Params<S>,
    config: &ModelConfig,
    hs: &[Array2<S>],
    d_prev: &Array2<S>,
    consumed: usize,
) -> Attention<S> {
    let n = hs.len();
    let enc_out = 2 * config.enc_hidden;
    debug_assert!(consumed <= n);
    let wd = params.att_w.slice(s![.., enc_out..]).dot(d_prev) + &params.att_b;
    let evaluated: Vec<usize> = match config.attention {
        AttentionMode::Deterministic => {
            let mut idx = Vec::with_capacity(2);
            if consumed >= 1 {
                idx.push(consumed - 1);
            }
            if consumed < n {
                idx.push(consumed);
            }
            idx
        }
        AttentionMode::Probabilistic => (0..n).collect(),
    };
    let tanhs: Vec<Array2<S>> = evaluated
        .iter()
        .map(|&i| score_tanh(params, enc_out, &hs[i], &wd))
        .collect();
    let betas: Vec<S> = tanhs.iter().map(|a| score_value(params, a)).collect();
    let weights: Vec<S> = match config.attention {
        AttentionMode::Deterministic => betas,
        AttentionMode::Probabilistic => match config.normalization {
            Normalization::Global => softmax_slice(&betas),
            Normalization::PerSegment => {
                let mut w = Vec::with_capacity(n);
                if consumed > 0 {
                    w.extend(softmax_slice(&betas[..consumed]));
                }
                if consumed < n {
                    w.extend(softmax_slice(&betas[consumed..]));
                }
                w
            }
        },
    };
    let mut l: Array2<S> = Array2::zeros((enc_out, 1));
    let mut r: Array2<S> = Array2::zeros((enc_out, 1));
    for (&i, &w) in evaluated.iter().zip(&weights) {
        if i < consumed {
            l.zip_mut_with(&hs[i], |acc, &h| *acc = *acc + w * h);
        } else {
            r.zip_mut_with(&hs[i], |acc, &h| *acc = *acc + w * h);
        }
    }
    Attention {
        l,
        r,
        beta_evals: evaluated.len(),
        consumed,
        evaluated,
        tanhs,
        weights,
    }
}

/// Backward through [`attend`]: given the gradients on the two summaries,
/// accumulates into the attention parameters, the encoder-state gradients,
/// and the previous decoder state's gradient.
#[allow(clippy::too_many_arguments)]
pub fn attend_backward<S: Scalar>(
    params: &Params<S>,
    config: &ModelConfig,
    attn: &Attention<S>,
    hs: &[Array2<S>],
    d_prev: &Array2<S>,
    dl: &Array2<S>,
    dr: &Array2<S>,
    grads: &mut Params<S>,
    dhs: &mut [Array2<S>],
    dd_prev: &mut Array2<S>,
) {
    let enc_out = 2 * config.enc_hidden;
    let consumed = attn.consumed;
    // d(weight_i) and the direct path into each attended vector.
    let mut dweights: Vec<S> = Vec::with_capacity(attn.evaluated.len());
    for (&i, &w) in attn.evaluated.iter().zip(&attn.weights) {
        let upstream = if i < consumed { dl } else { dr };
        dweights.push(
            upstream
                .iter()
                .zip(hs[i].iter())
                .map(|(&g, &h)| g * h)
                .sum(),
        );
        dhs[i].zip_mut_with(upstream, |acc, &g| *acc = *acc + w * g);
    }
    // Through the normalization into the raw scores.
    let dbetas: Vec<S> = match config.attention {
        AttentionMode::Deterministic => dweights,
        AttentionMode::Probabilistic => match config.normalization {
            Normalization::Global => softmax_backward(&attn.weights, &dweights),
            Normalization::PerSegment => {
                let mut d = Vec::with_capacity(attn.weights.len());
                if consumed > 0 {
                    d.extend(softmax_backward(
                        &attn.weights[..consumed],
                        &dweights[..consumed],
                    ));
                }
                if consumed < attn.weights.len() {
                    d.extend(softmax_backward(
                        &attn.weights[consumed..],
                        &dweights[consumed..],
                    ));
                }
                d
            }
        },
    };
    // Through each evaluated score into the shared parameters.
    let att_w_h = params.att_w.slice(s![.., 0..enc_out]);
    let att_w_d = params.att_w.slice(s![.., enc_out..]);
    for ((&i, a), &dbeta) in attn.evaluated.iter().zip(&attn.tanhs).zip(&dbetas) {
        grads.att_v.zip_mut_with(a, |g, &av| *g = *g + dbeta * av);
        let da = params.att_v.mapv(|v| v * dbeta);
        let dpre = &da * &a.mapv(|v| S::one() - v * v);
        grads
            .att_w
            .slice_mut(s![.., 0..enc_out])
            .zip_mut_with(&dpre.dot(&hs[i].t()), |g, &x| *g = *g + x);
        grads
            .att_w
            .slice_mut(s![.., enc_out..])
            .zip_mut_with(&dpre.dot(&d_prev.t()), |g, &x| *g = *g + x);
        grads.att_b.zip_mut_with(&dpre, |g, &x| *g = *g + x);
        dhs[i].zip_mut_with(&att_w_h.t().dot(&dpre), |acc, &x| *acc = *acc + x);
        dd_prev.zip_mut_with(&att_w_d.t().dot(&dpre), |acc, &x| *acc = *acc + x);
    }
}
