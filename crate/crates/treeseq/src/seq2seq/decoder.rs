//! One decoder step: two-segment attention, a relu recurrence over
//! [previous state; left summary; right summary], and the output logits.
//! The recurrence *is* the decoder state update — there is no LSTM cell on
//! this side.

use ndarray::{s, Array2, Axis};

use crate::scalar::Scalar;
use crate::seq2seq::attention::{attend, attend_backward, Attention};
use crate::seq2seq::config::ModelConfig;
use crate::seq2seq::math::{relu, relu_backward, softmax_col};
use crate::seq2seq::params::Params;

/// Forward cache of a single decoder step.
pub struct DecoderStep<S: Scalar> {
    pub attn: Attention<S>,
    /// The concatenated recurrence input (cached for the weight gradient).
    pub z: Array2<S>,
    /// The new decoder state.
    pub d: Array2<S>,
    pub logits: Array2<S>,
    /// Learned embedding id of the previous action, when that input is fed.
    pub prev_action: Option<usize>,
}

/// Runs one step. `prev_action` is the previous output token (`None` on
/// the first step); it only matters when the config feeds action
/// embeddings.
pub fn decoder_step<S: Scalar>(
    params: &Params<S>,
    config: &ModelConfig,
    hs: &[Array2<S>],
    d_prev: &Array2<S>,
    consumed: usize,
    prev_action: Option<usize>,
) -> DecoderStep<S> {
    let attn = attend(params, config, hs, d_prev, consumed);
    let mut parts = vec![d_prev.view(), attn.l.view(), attn.r.view()];
    let action_col;
    let prev_action = if config.feed_action { prev_action } else { None };
    match prev_action {
        Some(id) => {
            action_col = params.action_emb.row(id).to_owned().insert_axis(Axis(1));
            parts.push(action_col.view());
        }
        None if config.feed_action => {
            // First step: no previous action, feed zeros.
            action_col = Array2::zeros((config.action_dim, 1));
            parts.push(action_col.view());
        }
        None => {}
    }
    let z = ndarray::concatenate(Axis(0), &parts).expect("step inputs concatenate");
    let d = relu(&(params.dec_w.dot(&z) + &params.dec_b));
    let logits = params.out_w.dot(&d) + &params.out_b;
    DecoderStep {
        attn,
        z,
        d,
        logits,
        prev_action,
    }
}

/// Backward through one step. `dlogits` is the gradient on the logits
/// (softmax minus one-hot for a cross-entropy step); `dd` is the gradient
/// flowing into this step's state from the following step. Returns the
/// gradient on the previous state, which combines the recurrence input
/// path and the attention-score path.
#[allow(clippy::too_many_arguments)]
pub fn decoder_step_backward<S: Scalar>(
    params: &Params<S>,
    config: &ModelConfig,
    step: &DecoderStep<S>,
    hs: &[Array2<S>],
    d_prev: &Array2<S>,
    dlogits: &Array2<S>,
    dd: &Array2<S>,
    grads: &mut Params<S>,
    dhs: &mut [Array2<S>],
) -> Array2<S> {
    let dec_hidden = config.dec_hidden;
    let enc_out = 2 * config.enc_hidden;
    grads.out_w = &grads.out_w + &dlogits.dot(&step.d.t());
    grads.out_b = &grads.out_b + dlogits;
    let dd_total = params.out_w.t().dot(dlogits) + dd;
    let dpre = relu_backward(&dd_total, &step.d);
    grads.dec_w = &grads.dec_w + &dpre.dot(&step.z.t());
    grads.dec_b = &grads.dec_b + &dpre;
    let dz = params.dec_w.t().dot(&dpre);
    let mut dd_prev = dz.slice(s![0..dec_hidden, ..]).to_owned();
    let dl = dz.slice(s![dec_hidden..dec_hidden + enc_out, ..]).to_owned();
    let dr = dz
        .slice(s![dec_hidden + enc_out..dec_hidden + 2 * enc_out, ..])
        .to_owned();
    if let Some(id) = step.prev_action {
        let daction = dz.slice(s![dec_hidden + 2 * enc_out.., ..]);
        let mut row = grads.action_emb.row_mut(id);
        row += &daction.index_axis(Axis(1), 0);
    }
    attend_backward(
        params, config, &step.attn, hs, d_prev, &dl, &dr, grads, dhs, &mut dd_prev,
    );
    dd_prev
}

/// The output distribution of a step (softmax over all action tokens).
pub fn step_probs<S: Scalar>(step: &DecoderStep<S>) -> Array2<S> {
    softmax_col(&step.logits)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seq2seq::vocab::Vocabs;
    use crate::treebank::parse_tree;

    fn setup(feed_action: bool) -> (ModelConfig, Params<f64>, Vec<Array2<f64>>) {
        let config = ModelConfig {
            feed_action,
            pretrained_dim: 2,
            word_dim: 2,
            pos_dim: 2,
            action_dim: 3,
            enc_input: 3,
            enc_hidden: 2,
            enc_layers: 1,
            dec_hidden: 4,
            att_hidden: 3,
            ..ModelConfig::default()
        };
        let trees = vec![parse_tree("(S (NP (DT a) (NN b)) (VB c))").unwrap()];
        let vocabs = Vocabs::build(&trees, config.scheme);
        let params = Params::init(&config, &vocabs, 3);
        let hs = (0..3)
            .map(|i| Array2::from_shape_fn((4, 1), |(r, _)| ((i + r) as f64 * 0.31).sin()))
            .collect();
        (config, params, hs)
    }

    #[test]
    fn step_shapes() {
        let (config, params, hs) = setup(false);
        let d_prev = Array2::zeros((4, 1));
        let step = decoder_step(&params, &config, &hs, &d_prev, 1, None);
        assert_eq!(step.d.dim(), (4, 1));
        assert_eq!(step.z.dim(), (4 + 2 * 4, 1));
        assert_eq!(step.logits.nrows(), params.out_w.nrows());
        let probs = step_probs(&step);
        assert!((probs.sum() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn feeding_actions_changes_the_input_width_and_result() {
        let (config, params, hs) = setup(true);
        let d_prev = Array2::zeros((4, 1));
        let a = decoder_step(&params, &config, &hs, &d_prev, 1, Some(0));
        let b = decoder_step(&params, &config, &hs, &d_prev, 1, Some(1));
        assert_eq!(a.z.dim(), (4 + 2 * 4 + 3, 1));
        assert_ne!(a.d, b.d);
        // Without the flag the id is ignored entirely.
        let (config_off, params_off, hs_off) = setup(false);
        let a_off = decoder_step(&params_off, &config_off, &hs_off, &d_prev, 1, Some(0));
        let b_off = decoder_step(&params_off, &config_off, &hs_off, &d_prev, 1, Some(1));
        assert_eq!(a_off.d, b_off.d);
        assert_eq!(a_off.prev_action, None);
    }
}
