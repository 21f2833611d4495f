//! Constituent trees as token sequences.
//!
//! This crate turns phrase-structure parsing into sequence prediction. It
//! provides:
//!
//! * a bracketed treebank reader/writer with PTB-style normalization
//!   ([`treebank`]);
//! * top-down and in-order shift–reduce transition systems with
//!   completability-preserving legality and gold oracles ([`transitions`]);
//! * five linearization schemes mapping trees to flat token sequences and
//!   back, with strict and repair-mode decoding ([`linearize`],
//!   [`delinearize`]);
//! * a small attention-based sequence-to-sequence parser trained by
//!   backpropagation, with per-segment probabilistic attention or a
//!   constant-time deterministic variant ([`seq2seq`]);
//! * labeled bracket scoring and throughput/attention diagnostics
//!   ([`eval`]).
//!
//! The numeric core is generic over the scalar type; [`Model`] and
//! [`Model64`] are the concrete entry points.

pub mod delinearize;
pub mod eval;
pub mod linearize;
pub mod scalar;
pub mod seq2seq;
pub mod synth;
pub mod transitions;
pub mod tree;
pub mod treebank;

pub use scalar::Scalar;

/// The parser model in single precision (the default for training and
/// parsing).
pub type Model = seq2seq::Seq2Seq<f32>;

/// The parser model in double precision (used for gradient checking).
pub type Model64 = seq2seq::Seq2Seq<f64>;
