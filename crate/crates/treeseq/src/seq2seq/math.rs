//! Elementwise nonlinearities and softmax helpers shared across the model.

use ndarray::Array2;

use crate::scalar::Scalar;

pub fn relu<S: Scalar>(x: &Array2<S>) -> Array2<S> {
    x.mapv(|v| if v > S::zero() { v } else { S::zero() })
}

/// Gradient through relu given its *output* (output > 0 iff input > 0).
pub fn relu_backward<S: Scalar>(grad_out: &Array2<S>, out: &Array2<S>) -> Array2<S> {
    let mut g = grad_out.clone();
    g.zip_mut_with(out, |g, &o| {
        if o <= S::zero() {
            *g = S::zero();
        }
    });
    g
}

pub fn sigmoid<S: Scalar>(x: &Array2<S>) -> Array2<S> {
    x.mapv(|v| S::one() / (S::one() + (-v).exp()))
}

pub fn tanh<S: Scalar>(x: &Array2<S>) -> Array2<S> {
    x.mapv(|v| v.tanh())
}

/// Numerically stable softmax over a plain slice of scores.
pub fn softmax_slice<S: Scalar>(scores: &[S]) -> Vec<S> {
    let max = scores
        .iter()
        .copied()
        .fold(S::neg_infinity(), |a, b| if b > a { b } else { a });
    let exps: Vec<S> = scores.iter().map(|&s| (s - max).exp()).collect();
    let total: S = exps.iter().copied().sum();
    exps.into_iter().map(|e| e / total).collect()
}

/// Softmax down a single-column array.
pub fn softmax_col<S: Scalar>(x: &Array2<S>) -> Array2<S> {
    debug_assert_eq!(x.ncols(), 1);
    let scores: Vec<S> = x.iter().copied().collect();
    let probs = softmax_slice(&scores);
    Array2::from_shape_vec((x.nrows(), 1), probs).expect("same length")
}

/// Backpropagation through a softmax given the incoming gradient on the
/// probabilities: `d_score_i = p_i * (d_p_i - sum_k p_k d_p_k)`.
pub fn softmax_backward<S: Scalar>(probs: &[S], grad_probs: &[S]) -> Vec<S> {
    let dot: S = probs
        .iter()
        .zip(grad_probs)
        .map(|(&p, &g)| p * g)
        .sum();
    probs
        .iter()
        .zip(grad_probs)
        .map(|(&p, &g)| p * (g - dot))
        .collect()
}

/// `-log p[target]` of a stable softmax, without materializing all probs.
pub fn log_loss<S: Scalar>(logits: &Array2<S>, target: usize) -> S {
    let max = logits
        .iter()
        .copied()
        .fold(S::neg_infinity(), |a, b| if b > a { b } else { a });
    let log_z = logits.iter().map(|&l| (l - max).exp()).sum::<S>().ln() + max;
    log_z - logits[(target, 0)]
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn relu_and_its_mask() {
        let x = array![[-1.0], [0.0], [2.0]];
        let y = relu(&x);
        assert_eq!(y, array![[0.0], [0.0], [2.0]]);
        let g = relu_backward(&array![[5.0], [5.0], [5.0]], &y);
        assert_eq!(g, array![[0.0], [0.0], [5.0]]);
    }

    #[test]
    fn softmax_sums_to_one_and_survives_large_scores() {
        let p = softmax_slice(&[1000.0f64, 1001.0, 1002.0]);
        let total: f64 = p.iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert!(p[2] > p[1] && p[1] > p[0]);
    }

    #[test]
    fn softmax_backward_matches_finite_differences() {
        let scores = [0.3f64, -1.2, 0.7, 0.1];
        let grad_probs = [0.4f64, -0.2, 0.9, 0.05];
        let probs = softmax_slice(&scores);
        let analytic = softmax_backward(&probs, &grad_probs);
        let h = 1e-6;
        for i in 0..scores.len() {
            let mut plus = scores;
            plus[i] += h;
            let mut minus = scores;
            minus[i] -= h;
            let f = |s: &[f64]| -> f64 {
                softmax_slice(s)
                    .iter()
                    .zip(&grad_probs)
                    .map(|(p, g)| p * g)
                    .sum()
            };
            let fd = (f(&plus) - f(&minus)) / (2.0 * h);
            assert!((analytic[i] - fd).abs() < 1e-8, "component {i}");
        }
    }

    #[test]
    fn log_loss_agrees_with_direct_computation() {
        let logits = array![[0.2f64], [-0.5], [1.3]];
        let direct = -softmax_col(&logits)[(1, 0)].ln();
        assert!((log_loss(&logits, 1) - direct).abs() < 1e-12);
    }
}
