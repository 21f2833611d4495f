//! The sentence encoder: per-word embedding concatenation, a relu
//! projection, and a stack of bidirectional LSTM layers. Forward passes
//! keep full caches so the gradients can be computed by hand in
//! [`lstm_backward`] / [`encoder_backward`].

use ndarray::{concatenate, s, Array2, Axis};

use crate::scalar::Scalar;
use crate::seq2seq::config::ModelConfig;
use crate::seq2seq::math::{relu, relu_backward, sigmoid, tanh};
use crate::seq2seq::params::{LstmParams, Params};

/// Everything one LSTM direction needs to replay its own backward pass.
pub struct LstmCache<S: Scalar> {
    xs: Vec<Array2<S>>,
    gate_i: Vec<Array2<S>>,
    gate_f: Vec<Array2<S>>,
    gate_g: Vec<Array2<S>>,
    gate_o: Vec<Array2<S>>,
    cells: Vec<Array2<S>>,
    tanh_cells: Vec<Array2<S>>,
    pub hs: Vec<Array2<S>>,
}

/// Runs one LSTM direction over `xs` from zero initial state.
pub fn lstm_forward<S: Scalar>(p: &LstmParams<S>, xs: &[Array2<S>]) -> LstmCache<S> {
    let hidden = p.w_rec.ncols();
    let steps = xs.len();
    let mut cache = LstmCache {
        xs: xs.to_vec(),
        gate_i: Vec::with_capacity(steps),
        gate_f: Vec::with_capacity(steps),
        gate_g: Vec::with_capacity(steps),
        gate_o: Vec::with_capacity(steps),
        cells: Vec::with_capacity(steps),
        tanh_cells: Vec::with_capacity(steps),
        hs: Vec::with_capacity(steps),
    };
    let mut h_prev: Array2<S> = Array2::zeros((hidden, 1));
    let mut c_prev: Array2<S> = Array2::zeros((hidden, 1));
    for x in xs {
        let pre = p.w_in.dot(x) + p.w_rec.dot(&h_prev) + &p.bias;
        let i = sigmoid(&pre.slice(s![0..hidden, ..]).to_owned());
        let f = sigmoid(&pre.slice(s![hidden..2 * hidden, ..]).to_owned());
        let g = tanh(&pre.slice(s![2 * hidden..3 * hidden, ..]).to_owned());
        let o = sigmoid(&pre.slice(s![3 * hidden..4 * hidden, ..]).to_owned());
        let c = &f * &c_prev + &i * &g;
        let tc = tanh(&c);
        let h = &o * &tc;
        cache.gate_i.push(i);
        cache.gate_f.push(f);
        cache.gate_g.push(g);
        cache.gate_o.push(o);
        cache.cells.push(c.clone());
        cache.tanh_cells.push(tc);
        cache.hs.push(h.clone());
        h_prev = h;
        c_prev = c;
    }
    cache
}

/// Backpropagates through one LSTM direction. `grad_hs` is the external
/// gradient on each hidden state; parameter gradients accumulate into
/// `grads` and the returned vector holds the gradients on the inputs.
pub fn lstm_backward<S: Scalar>(
    p: &LstmParams<S>,
    cache: &LstmCache<S>,
    grad_hs: &[Array2<S>],
    grads: &mut LstmParams<S>,
) -> Vec<Array2<S>> {
    let steps = cache.xs.len();
    let hidden = p.w_rec.ncols();
    let mut dxs: Vec<Array2<S>> = Vec::with_capacity(steps);
    let mut dh_rec: Array2<S> = Array2::zeros((hidden, 1));
    let mut dc_next: Array2<S> = Array2::zeros((hidden, 1));
    let one = S::one;
    for _ in 0..steps {
        dxs.push(Array2::zeros((p.w_in.ncols(), 1)));
    }
    for t in (0..steps).rev() {
        let dh = &grad_hs[t] + &dh_rec;
        let (i, f, g, o) = (
            &cache.gate_i[t],
            &cache.gate_f[t],
            &cache.gate_g[t],
            &cache.gate_o[t],
        );
        let tc = &cache.tanh_cells[t];
        let d_o = &dh * tc;
        let dc = &dh * o * &tc.mapv(|v| one() - v * v) + &dc_next;
        let d_i = &dc * g;
        let d_g = &dc * i;
        let zero_col = Array2::zeros((hidden, 1));
        let c_prev = if t > 0 { &cache.cells[t - 1] } else { &zero_col };
        let d_f = &dc * c_prev;
        dc_next = &dc * f;
        // Chain through the gate nonlinearities into the pre-activations.
        let dpre_i = &d_i * i * &i.mapv(|v| one() - v);
        let dpre_f = &d_f * f * &f.mapv(|v| one() - v);
        let dpre_g = &d_g * &g.mapv(|v| one() - v * v);
        let dpre_o = &d_o * o * &o.mapv(|v| one() - v);
        let dpre = concatenate(
            Axis(0),
            &[dpre_i.view(), dpre_f.view(), dpre_g.view(), dpre_o.view()],
        )
        .expect("gate blocks share the column count");
        let h_prev = if t > 0 { &cache.hs[t - 1] } else { &zero_col };
        grads.w_in = &grads.w_in + &dpre.dot(&cache.xs[t].t());
        grads.w_rec = &grads.w_rec + &dpre.dot(&h_prev.t());
        grads.bias = &grads.bias + &dpre;
        dxs[t] = p.w_in.t().dot(&dpre);
        dh_rec = p.w_rec.t().dot(&dpre);
    }
    dxs
}

/// Forward caches of the whole encoder.
pub struct EncoderCache<S: Scalar> {
    pub word_ids: Vec<usize>,
    pub pre_ids: Vec<usize>,
    pub pos_ids: Vec<usize>,
    us: Vec<Array2<S>>,
    xs: Vec<Array2<S>>,
    layers: Vec<(LstmCache<S>, LstmCache<S>)>,
    /// Final per-word representations (both directions concatenated).
    pub hs: Vec<Array2<S>>,
}

fn embedding_column<S: Scalar>(table: &Array2<S>, row: usize) -> Array2<S> {
    table.row(row).to_owned().insert_axis(Axis(1))
}

/// Encodes a sentence given the id streams: `word_ids` index the learned
/// table (possibly unknown-replaced), `pre_ids` the frozen pretrained
/// table, `pos_ids` the tag table.
pub fn encode<S: Scalar>(
    params: &Params<S>,
    pretrained: &Array2<S>,
    config: &ModelConfig,
    word_ids: &[usize],
    pre_ids: &[usize],
    pos_ids: &[usize],
) -> EncoderCache<S> {
    let us: Vec<Array2<S>> = word_ids
        .iter()
        .zip(pre_ids)
        .zip(pos_ids)
        .map(|((&w, &p), &t)| {
            concatenate(
                Axis(0),
                &[
                    embedding_column(pretrained, p).view(),
                    embedding_column(&params.word_emb, w).view(),
                    embedding_column(&params.pos_emb, t).view(),
                ],
            )
            .expect("embedding columns concatenate")
        })
        .collect();
    let xs: Vec<Array2<S>> = us
        .iter()
        .map(|u| relu(&(params.input_w.dot(u) + &params.input_b)))
        .collect();
    let steps = xs.len();
    let mut layers = Vec::with_capacity(config.enc_layers);
    let mut inputs = xs.clone();
    for layer in &params.enc {
        let reversed: Vec<Array2<S>> = inputs.iter().rev().cloned().collect();
        let fwd = lstm_forward(&layer.fwd, &inputs);
        let bwd = lstm_forward(&layer.bwd, &reversed);
        inputs = (0..steps)
            .map(|t| {
                concatenate(Axis(0), &[fwd.hs[t].view(), bwd.hs[steps - 1 - t].view()])
                    .expect("directions concatenate")
            })
            .collect();
        layers.push((fwd, bwd));
    }
    EncoderCache {
        word_ids: word_ids.to_vec(),
        pre_ids: pre_ids.to_vec(),
        pos_ids: pos_ids.to_vec(),
        us,
        xs,
        layers,
        hs: inputs,
    }
}

/// Backpropagates `grad_hs` (gradient on the final representations)
/// through the LSTM stack, the projection, and into the embedding rows.
/// The pretrained table is frozen and receives no gradient.
pub fn encoder_backward<S: Scalar>(
    params: &Params<S>,
    config: &ModelConfig,
    cache: &EncoderCache<S>,
    grad_hs: &[Array2<S>],
    grads: &mut Params<S>,
) {
    let steps = cache.xs.len();
    let hidden = config.enc_hidden;
    let mut douts: Vec<Array2<S>> = grad_hs.to_vec();
    for (layer_idx, layer) in params.enc.iter().enumerate().rev() {
        let (fwd_cache, bwd_cache) = &cache.layers[layer_idx];
        let dfwd: Vec<Array2<S>> = douts
            .iter()
            .map(|d| d.slice(s![0..hidden, ..]).to_owned())
            .collect();
        let dbwd: Vec<Array2<S>> = (0..steps)
            .map(|t| douts[steps - 1 - t].slice(s![hidden..2 * hidden, ..]).to_owned())
            .collect();
        let layer_grads = &mut grads.enc[layer_idx];
        let dx_fwd = lstm_backward(&layer.fwd, fwd_cache, &dfwd, &mut layer_grads.fwd);
        let dx_bwd = lstm_backward(&layer.bwd, bwd_cache, &dbwd, &mut layer_grads.bwd);
        douts = (0..steps)
            .map(|t| &dx_fwd[t] + &dx_bwd[steps - 1 - t])
            .collect();
    }
    // Through the relu projection into the embedding tables.
    let pre_dim = config.pretrained_dim;
    let word_dim = config.word_dim;
    for t in 0..steps {
        let dpre = relu_backward(&douts[t], &cache.xs[t]);
        grads.input_w = &grads.input_w + &dpre.dot(&cache.us[t].t());
        grads.input_b = &grads.input_b + &dpre;
        let du = params.input_w.t().dot(&dpre);
        let dword = du.slice(s![pre_dim..pre_dim + word_dim, ..]);
        let dpos = du.slice(s![pre_dim + word_dim.., ..]);
        let mut word_row = grads.word_emb.row_mut(cache.word_ids[t]);
        word_row += &dword.index_axis(Axis(1), 0);
        let mut pos_row = grads.pos_emb.row_mut(cache.pos_ids[t]);
        pos_row += &dpos.index_axis(Axis(1), 0);
    }
}
