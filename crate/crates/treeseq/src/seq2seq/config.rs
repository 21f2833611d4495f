//! Model and training hyper-parameters, read from `key = value` files.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use crate::linearize::Scheme;
use crate::transitions::{DEFAULT_MAX_OPEN, DEFAULT_MAX_UNARY};

/// How the two-segment attention turns scores into summaries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AttentionMode {
    /// Softmax-weighted sums over both segments.
    Probabilistic,
    /// Raw-score scaling of the two boundary-adjacent vectors only.
    Deterministic,
}

/// Normalization domain for probabilistic attention.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Normalization {
    /// One softmax per segment (the default).
    PerSegment,
    /// A single softmax across the whole sentence, split at the boundary.
    Global,
}

/// Which float width the model computes in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Precision {
    F32,
    F64,
}

/// Everything that shapes the model and its training run.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelConfig {
    pub scheme: Scheme,
    pub attention: AttentionMode,
    pub normalization: Normalization,
    pub precision: Precision,
    /// Feed the previous action's embedding into the decoder recurrence.
    pub feed_action: bool,

    pub pretrained_dim: usize,
    pub word_dim: usize,
    pub pos_dim: usize,
    pub label_dim: usize,
    pub action_dim: usize,
    pub enc_input: usize,
    pub enc_hidden: usize,
    pub enc_layers: usize,
    pub dec_hidden: usize,
    pub att_hidden: usize,

    pub seed: u64,
    pub epochs: usize,
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    /// L2 weight on the regularizer (`lambda/2 * ||theta||^2`).
    pub lambda: f64,
    /// Global gradient-norm clip; `0` disables clipping.
    pub clip_norm: f64,
    /// Chance of replacing a singleton word by the unknown token while
    /// training.
    pub singleton_unk: f64,

    pub beam: usize,
    pub max_open: usize,
    pub max_unary: usize,
    /// Path to pretrained word vectors in text format, if any.
    pub pretrained: Option<String>,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            scheme: Scheme::InOrderSrEnriched,
            attention: AttentionMode::Probabilistic,
            normalization: Normalization::PerSegment,
            precision: Precision::F32,
            feed_action: false,
            pretrained_dim: 100,
            word_dim: 64,
            pos_dim: 6,
            label_dim: 20,
            action_dim: 40,
            enc_input: 100,
            enc_hidden: 200,
            enc_layers: 2,
            dec_hidden: 400,
            att_hidden: 50,
            seed: 1,
            epochs: 20,
            lr: 0.001,
            beta1: 0.9,
            beta2: 0.9,
            lambda: 1e-6,
            clip_norm: 5.0,
            singleton_unk: 0.5,
            beam: 10,
            max_open: DEFAULT_MAX_OPEN,
            max_unary: DEFAULT_MAX_UNARY,
            pretrained: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ConfigError {
    #[error("config line {line}: expected `key = value`, got {text:?}")]
    BadLine { line: usize, text: String },
    #[error("config line {line}: unknown key {key:?}")]
    UnknownKey { line: usize, key: String },
    #[error("config line {line}: bad value {value:?} for {key} ({expected})")]
    BadValue {
        line: usize,
        key: String,
        value: String,
        expected: &'static str,
    },
    #[error("cannot read config {path}: {message}")]
    Io { path: String, message: String },
}

impl ModelConfig {
    /// Parses a config body, starting from the defaults. Blank lines and
    /// `#` comments are ignored; later keys override earlier ones.
    pub fn parse(text: &str) -> Result<ModelConfig, ConfigError> {
        let mut config = ModelConfig::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let Some((key, value)) = content.split_once('=') else {
                return Err(ConfigError::BadLine {
                    line,
                    text: raw.trim().to_string(),
                });
            };
            config.set(key.trim(), value.trim(), line)?;
        }
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<ModelConfig, ConfigError> {
        let text = fs::read_to_string(path).map_err(|e| ConfigError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        ModelConfig::parse(&text)
    }

    fn set(&mut self, key: &str, value: &str, line: usize) -> Result<(), ConfigError> {
        fn parse_as<T: FromStr>(
            key: &str,
            value: &str,
            line: usize,
            expected: &'static str,
        ) -> Result<T, ConfigError> {
            value.parse().map_err(|_| ConfigError::BadValue {
                line,
                key: key.to_string(),
                value: value.to_string(),
                expected,
            })
        }
        match key {
            "scheme" => self.scheme = parse_as(key, value, line, "a scheme name")?,
            "attention" => {
                self.attention = match value {
                    "prob" => AttentionMode::Probabilistic,
                    "det" => AttentionMode::Deterministic,
                    _ => {
                        return Err(ConfigError::BadValue {
                            line,
                            key: key.into(),
                            value: value.into(),
                            expected: "prob or det",
                        })
                    }
                }
            }
            "normalization" => {
                self.normalization = match value {
                    "per-segment" => Normalization::PerSegment,
                    "global" => Normalization::Global,
                    _ => {
                        return Err(ConfigError::BadValue {
                            line,
                            key: key.into(),
                            value: value.into(),
                            expected: "per-segment or global",
                        })
                    }
                }
            }
            "precision" => {
                self.precision = match value {
                    "f32" => Precision::F32,
                    "f64" => Precision::F64,
                    _ => {
                        return Err(ConfigError::BadValue {
                            line,
                            key: key.into(),
                            value: value.into(),
                            expected: "f32 or f64",
                        })
                    }
                }
            }
            "feed_action" => self.feed_action = parse_as(key, value, line, "true or false")?,
            "pretrained_dim" => self.pretrained_dim = parse_as(key, value, line, "an integer")?,
            "word_dim" => self.word_dim = parse_as(key, value, line, "an integer")?,
            "pos_dim" => self.pos_dim = parse_as(key, value, line, "an integer")?,
            "label_dim" => self.label_dim = parse_as(key, value, line, "an integer")?,
            "action_dim" => self.action_dim = parse_as(key, value, line, "an integer")?,
            "enc_input" => self.enc_input = parse_as(key, value, line, "an integer")?,
            "enc_hidden" => self.enc_hidden = parse_as(key, value, line, "an integer")?,
            "enc_layers" => self.enc_layers = parse_as(key, value, line, "an integer")?,
            "dec_hidden" => self.dec_hidden = parse_as(key, value, line, "an integer")?,
            "att_hidden" => self.att_hidden = parse_as(key, value, line, "an integer")?,
            "seed" => self.seed = parse_as(key, value, line, "an integer")?,
            "epochs" => self.epochs = parse_as(key, value, line, "an integer")?,
            "lr" => self.lr = parse_as(key, value, line, "a number")?,
            "beta1" => self.beta1 = parse_as(key, value, line, "a number")?,
            "beta2" => self.beta2 = parse_as(key, value, line, "a number")?,
            "lambda" => self.lambda = parse_as(key, value, line, "a number")?,
            "clip_norm" => self.clip_norm = parse_as(key, value, line, "a number")?,
            "singleton_unk" => self.singleton_unk = parse_as(key, value, line, "a number")?,
            "beam" => self.beam = parse_as(key, value, line, "an integer")?,
            "max_open" => self.max_open = parse_as(key, value, line, "an integer")?,
            "max_unary" => self.max_unary = parse_as(key, value, line, "an integer")?,
            "pretrained" => self.pretrained = Some(value.to_string()),
            _ => {
                return Err(ConfigError::UnknownKey {
                    line,
                    key: key.to_string(),
                })
            }
        }
        Ok(())
    }

    /// All keys and values in `key = value` form (sorted by key), parseable
    /// back by [`ModelConfig::parse`].
    pub fn entries(&self) -> BTreeMap<&'static str, String> {
        let mut map = BTreeMap::new();
        map.insert("scheme", self.scheme.to_string());
        map.insert(
            "attention",
            match self.attention {
                AttentionMode::Probabilistic => "prob",
                AttentionMode::Deterministic => "det",
            }
            .to_string(),
        );
        map.insert(
            "normalization",
            match self.normalization {
                Normalization::PerSegment => "per-segment",
                Normalization::Global => "global",
            }
            .to_string(),
        );
        map.insert(
            "precision",
            match self.precision {
                Precision::F32 => "f32",
                Precision::F64 => "f64",
            }
            .to_string(),
        );
        map.insert("feed_action", self.feed_action.to_string());
        map.insert("pretrained_dim", self.pretrained_dim.to_string());
        map.insert("word_dim", self.word_dim.to_string());
        map.insert("pos_dim", self.pos_dim.to_string());
        map.insert("label_dim", self.label_dim.to_string());
        map.insert("action_dim", self.action_dim.to_string());
        map.insert("enc_input", self.enc_input.to_string());
        map.insert("enc_hidden", self.enc_hidden.to_string());
        map.insert("enc_layers", self.enc_layers.to_string());
        map.insert("dec_hidden", self.dec_hidden.to_string());
        map.insert("att_hidden", self.att_hidden.to_string());
        map.insert("seed", self.seed.to_string());
        map.insert("epochs", self.epochs.to_string());
        map.insert("lr", self.lr.to_string());
        map.insert("beta1", self.beta1.to_string());
        map.insert("beta2", self.beta2.to_string());
        map.insert("lambda", self.lambda.to_string());
        map.insert("clip_norm", self.clip_norm.to_string());
        map.insert("singleton_unk", self.singleton_unk.to_string());
        map.insert("beam", self.beam.to_string());
        map.insert("max_open", self.max_open.to_string());
        map.insert("max_unary", self.max_unary.to_string());
        if let Some(p) = &self.pretrained {
            map.insert("pretrained", p.clone());
        }
        map
    }
}

impl fmt::Display for ModelConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (key, value) in self.entries() {
            writeln!(f, "{} = {}", key, value)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip_through_text() {
        let config = ModelConfig::default();
        let parsed = ModelConfig::parse(&config.to_string()).unwrap();
        assert_eq!(parsed, config);
    }

    #[test]
    fn parse_overrides_and_comments() {
        let text = "\n# a comment\nscheme = td-sr\nattention = det  # trailing comment\nenc_hidden = 8\nlr = 0.01\n";
        let config = ModelConfig::parse(text).unwrap();
        assert_eq!(config.scheme, Scheme::TopDownSr);
        assert_eq!(config.attention, AttentionMode::Deterministic);
        assert_eq!(config.enc_hidden, 8);
        assert_eq!(config.lr, 0.01);
        // Untouched keys keep their defaults.
        assert_eq!(config.dec_hidden, 400);
    }

    #[test]
    fn bad_input_is_rejected_with_line_numbers() {
        assert!(matches!(
            ModelConfig::parse("enc_hidden 8"),
            Err(ConfigError::BadLine { line: 1, .. })
        ));
        assert!(matches!(
            ModelConfig::parse("\nwibble = 3"),
            Err(ConfigError::UnknownKey { line: 2, .. })
        ));
        assert!(matches!(
            ModelConfig::parse("enc_hidden = lots"),
            Err(ConfigError::BadValue { line: 1, .. })
        ));
        assert!(matches!(
            ModelConfig::parse("attention = fuzzy"),
            Err(ConfigError::BadValue { .. })
        ));
    }
}
