//! Model checkpoints: a line-oriented text format holding the config, the
//! vocabularies, and every tensor, including the frozen pretrained table.
//!
//! Every section header carries its entry count (`[words 412]`,
//! `[tensor dec_w 400 1205]`), so the reader never has to guess where a
//! section ends, and a `[end]` marker guards against truncation. Floats
//! are written with the shortest representation that parses back to the
//! same value, making save/load an exact round trip.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use ndarray::Array2;

use crate::scalar::Scalar;
use crate::seq2seq::config::{ConfigError, ModelConfig, Precision};
use crate::seq2seq::params::Params;
use crate::seq2seq::vocab::{ActionVocab, Vocab, Vocabs};
use crate::seq2seq::Seq2Seq;

const MAGIC: &str = "treeseq checkpoint v1";

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CheckpointError {
    #[error("cannot access checkpoint {path}: {message}")]
    Io { path: String, message: String },
    #[error("checkpoint line {line}: {message}")]
    Format { line: usize, message: String },
    #[error("checkpoint config: {0}")]
    Config(#[from] ConfigError),
    #[error("checkpoint line {line}: {token:?} is not an action token of the saved scheme")]
    BadAction { line: usize, token: String },
    #[error("tensor {name}: saved as {found_rows}x{found_cols}, config implies {rows}x{cols}")]
    Shape {
        name: String,
        rows: usize,
        cols: usize,
        found_rows: usize,
        found_cols: usize,
    },
}

/// A loaded model in whichever precision the checkpoint declares.
pub enum AnyModel {
    F32(Box<Seq2Seq<f32>>),
    F64(Box<Seq2Seq<f64>>),
}

impl AnyModel {
    pub fn config(&self) -> &ModelConfig {
        match self {
            AnyModel::F32(m) => &m.config,
            AnyModel::F64(m) => &m.config,
        }
    }
}

/// Renders `model` in the checkpoint format.
pub fn write_model<S: Scalar>(model: &Seq2Seq<S>) -> String {
    let mut out = String::new();
    out.push_str(MAGIC);
    out.push('\n');
    let entries = model.config.entries();
    let _ = writeln!(out, "[config {}]", entries.len());
    for (key, value) in entries {
        let _ = writeln!(out, "{} = {}", key, value);
    }
    write_vocab(&mut out, "words", &model.vocabs.words);
    write_vocab(&mut out, "pos", &model.vocabs.pos);
    write_vocab(&mut out, "labels", &model.vocabs.labels);
    let _ = writeln!(out, "[actions {}]", model.vocabs.actions.len());
    for id in 0..model.vocabs.actions.len() {
        out.push_str(model.vocabs.actions.spelling(id));
        out.push('\n');
    }
    for (name, tensor) in model.params.tensors() {
        write_tensor(&mut out, &name, tensor);
    }
    write_tensor(&mut out, "pretrained", &model.pretrained);
    out.push_str("[end]\n");
    out
}

/// Saves `model` to `path`.
pub fn save<S: Scalar>(model: &Seq2Seq<S>, path: &Path) -> Result<(), CheckpointError> {
    fs::write(path, write_model(model)).map_err(|e| CheckpointError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

fn write_vocab(out: &mut String, name: &str, vocab: &Vocab) {
    let _ = writeln!(out, "[{} {}]", name, vocab.len());
    for (item, count) in vocab.iter() {
        let _ = writeln!(out, "{}\t{}", item, count);
    }
}

fn write_tensor<S: Scalar>(out: &mut String, name: &str, tensor: &Array2<S>) {
    let _ = writeln!(out, "[tensor {} {} {}]", name, tensor.nrows(), tensor.ncols());
    for row in tensor.rows() {
        let mut first = true;
        for x in row {
            if !first {
                out.push(' ');
            }
            let _ = write!(out, "{}", x);
            first = false;
        }
        out.push('\n');
    }
}

/// Loads a model, dispatching on the precision recorded in the config.
pub fn load(path: &Path) -> Result<AnyModel, CheckpointError> {
    let text = fs::read_to_string(path).map_err(|e| CheckpointError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    let mut probe = Lines::new(&text);
    expect_magic(&mut probe)?;
    let config = read_config(&mut probe)?;
    match config.precision {
        Precision::F32 => Ok(AnyModel::F32(Box::new(read_model(&text)?))),
        Precision::F64 => Ok(AnyModel::F64(Box::new(read_model(&text)?))),
    }
}

/// Parses the checkpoint text into a model of scalar type `S`. The caller
/// is responsible for matching `S` to the recorded precision; [`load`]
/// does that automatically.
pub fn read_model<S: Scalar>(text: &str) -> Result<Seq2Seq<S>, CheckpointError> {
    let mut lines = Lines::new(text);
    expect_magic(&mut lines)?;
    let config = read_config(&mut lines)?;
    let words = read_vocab(&mut lines, "words")?;
    let pos = read_vocab(&mut lines, "pos")?;
    let labels = read_vocab(&mut lines, "labels")?;
    let actions = read_actions(&mut lines, &config)?;
    let vocabs = Vocabs {
        words,
        pos,
        labels,
        actions,
    };
    // Initialize at the configured shapes, then overwrite every tensor;
    // this doubles as the dimension check for the saved data.
    let mut params: Params<S> = Params::init(&config, &vocabs, config.seed);
    for (name, tensor) in params.tensors_mut() {
        read_tensor(&mut lines, &name, tensor)?;
    }
    let mut pretrained: Array2<S> =
        Array2::zeros((vocabs.words.len(), config.pretrained_dim));
    read_tensor(&mut lines, "pretrained", &mut pretrained)?;
    let (line, last) = lines.next()?;
    if last.trim() != "[end]" {
        return Err(CheckpointError::Format {
            line,
            message: format!("expected [end], got {:?}", last),
        });
    }
    Ok(Seq2Seq {
        config,
        vocabs,
        params,
        pretrained,
    })
}

struct Lines<'a> {
    iter: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Lines<'a> {
        Lines {
            iter: text.lines().enumerate(),
        }
    }

    /// The next line with its 1-based number, or a truncation error.
    fn next(&mut self) -> Result<(usize, &'a str), CheckpointError> {
        self.iter
            .next()
            .map(|(i, l)| (i + 1, l))
            .ok_or(CheckpointError::Format {
                line: 0,
                message: "checkpoint is truncated".to_string(),
            })
    }
}

fn expect_magic(lines: &mut Lines) -> Result<(), CheckpointError> {
    let (line, text) = lines.next()?;
    if text.trim() != MAGIC {
        return Err(CheckpointError::Format {
            line,
            message: format!("not a checkpoint (expected {:?})", MAGIC),
        });
    }
    Ok(())
}

/// Parses a `[name a b ...]` header into its fields.
fn header_fields<'a>(
    lines: &mut Lines<'a>,
    expected: &str,
) -> Result<(usize, Vec<&'a str>), CheckpointError> {
    let (line, text) = lines.next()?;
    let trimmed = text.trim();
    let inner = trimmed
        .strip_prefix('[')
        .and_then(|s| s.strip_suffix(']'))
        .ok_or_else(|| CheckpointError::Format {
            line,
            message: format!("expected a [{} ...] header, got {:?}", expected, text),
        })?;
    let fields: Vec<&str> = inner.split_whitespace().collect();
    if fields.first() != Some(&expected) {
        return Err(CheckpointError::Format {
            line,
            message: format!("expected a [{} ...] header, got {:?}", expected, text),
        });
    }
    Ok((line, fields[1..].to_vec()))
}

fn parse_count(line: usize, fields: &[&str]) -> Result<usize, CheckpointError> {
    fields
        .first()
        .and_then(|s| s.parse().ok())
        .ok_or(CheckpointError::Format {
            line,
            message: "header is missing its entry count".to_string(),
        })
}

fn read_config(lines: &mut Lines) -> Result<ModelConfig, CheckpointError> {
    let (line, fields) = header_fields(lines, "config")?;
    let count = parse_count(line, &fields)?;
    let mut body = String::new();
    for _ in 0..count {
        body.push_str(lines.next()?.1);
        body.push('\n');
    }
    Ok(ModelConfig::parse(&body)?)
}

fn read_vocab(lines: &mut Lines, name: &str) -> Result<Vocab, CheckpointError> {
    let (line, fields) = header_fields(lines, name)?;
    let count = parse_count(line, &fields)?;
    let mut vocab = Vocab::new();
    for _ in 0..count {
        let (line, text) = lines.next()?;
        let (item, count) = text.rsplit_once('\t').ok_or_else(|| CheckpointError::Format {
            line,
            message: format!("expected `item<TAB>count`, got {:?}", text),
        })?;
        let count = count.parse().map_err(|_| CheckpointError::Format {
            line,
            message: format!("bad count {:?}", count),
        })?;
        vocab.restore(item, count);
    }
    Ok(vocab)
}

fn read_actions(lines: &mut Lines, config: &ModelConfig) -> Result<ActionVocab, CheckpointError> {
    let (line, fields) = header_fields(lines, "actions")?;
    let count = parse_count(line, &fields)?;
    let mut actions = ActionVocab::new();
    for _ in 0..count {
        let (line, text) = lines.next()?;
        let token = text.trim();
        let action = crate::delinearize::token_action(token, config.scheme).ok_or_else(|| {
            CheckpointError::BadAction {
                line,
                token: token.to_string(),
            }
        })?;
        actions.observe(token, action);
    }
    Ok(actions)
}

fn read_tensor<S: Scalar>(
    lines: &mut Lines,
    name: &str,
    tensor: &mut Array2<S>,
) -> Result<(), CheckpointError> {
    let (line, fields) = header_fields(lines, "tensor")?;
    if fields.first() != Some(&name) {
        return Err(CheckpointError::Format {
            line,
            message: format!(
                "expected tensor {:?} next, got {:?}",
                name,
                fields.first().copied().unwrap_or("")
            ),
        });
    }
    let rows: usize = fields.get(1).and_then(|s| s.parse().ok()).unwrap_or(0);
    let cols: usize = fields.get(2).and_then(|s| s.parse().ok()).unwrap_or(0);
    if (rows, cols) != (tensor.nrows(), tensor.ncols()) {
        return Err(CheckpointError::Shape {
            name: name.to_string(),
            rows: tensor.nrows(),
            cols: tensor.ncols(),
            found_rows: rows,
            found_cols: cols,
        });
    }
    for r in 0..rows {
        let (line, text) = lines.next()?;
        let mut c = 0;
        for field in text.split_whitespace() {
            let value: f64 = field.parse().map_err(|_| CheckpointError::Format {
                line,
                message: format!("bad float {:?} in tensor {}", field, name),
            })?;
            if c >= cols {
                break;
            }
            tensor[(r, c)] = S::from_f64(value);
            c += 1;
        }
        if c != cols {
            return Err(CheckpointError::Format {
                line,
                message: format!(
                    "tensor {} row {} has {} values, expected {}",
                    name, r, c, cols
                ),
            });
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linearize::Scheme;
    use crate::synth::{random_trees, SynthConfig};

    fn tiny<S: Scalar>(precision: Precision) -> Seq2Seq<S> {
        let config = ModelConfig {
            scheme: Scheme::InOrderSrEnriched,
            precision,
            pretrained_dim: 2,
            word_dim: 3,
            pos_dim: 2,
            label_dim: 2,
            action_dim: 3,
            enc_input: 4,
            enc_hidden: 3,
            enc_layers: 2,
            dec_hidden: 5,
            att_hidden: 3,
            ..ModelConfig::default()
        };
        let trees = random_trees(
            11,
            5,
            &SynthConfig {
                max_depth: 3,
                max_fanout: 3,
                vocab: 8,
                ..SynthConfig::default()
            },
        );
        Seq2Seq::from_treebank(config, &trees).expect("corpus builds").0
    }

    #[test]
    fn f64_round_trip_is_exact() {
        let model: Seq2Seq<f64> = tiny(Precision::F64);
        let text = write_model(&model);
        let back: Seq2Seq<f64> = read_model(&text).expect("parses");
        assert_eq!(back.config, model.config);
        assert_eq!(back.vocabs, model.vocabs);
        assert_eq!(back.params, model.params);
        assert_eq!(back.pretrained, model.pretrained);
    }

    #[test]
    fn f32_round_trip_is_exact() {
        let model: Seq2Seq<f32> = tiny(Precision::F32);
        let text = write_model(&model);
        let back: Seq2Seq<f32> = read_model(&text).expect("parses");
        assert_eq!(back.params, model.params);
        assert_eq!(back.pretrained, model.pretrained);
    }

    #[test]
    fn load_dispatches_on_the_recorded_precision() {
        let dir = tempfile::tempdir().expect("tempdir");
        let path = dir.path().join("model.ckpt");

        let model: Seq2Seq<f64> = tiny(Precision::F64);
        save(&model, &path).expect("saves");
        assert!(matches!(load(&path), Ok(AnyModel::F64(_))));

        let model: Seq2Seq<f32> = tiny(Precision::F32);
        save(&model, &path).expect("saves");
        assert!(matches!(load(&path), Ok(AnyModel::F32(_))));
    }

    #[test]
    fn truncation_and_corruption_are_detected() {
        let model: Seq2Seq<f64> = tiny(Precision::F64);
        let text = write_model(&model);

        let cut = &text[..text.len() / 2];
        assert!(matches!(
            read_model::<f64>(cut),
            Err(CheckpointError::Format { .. }) | Err(CheckpointError::Shape { .. })
        ));

        let garbled = text.replace(MAGIC, "something else");
        assert!(matches!(
            read_model::<f64>(&garbled),
            Err(CheckpointError::Format { line: 1, .. })
        ));

        let bad_action = text.replace("\nFI\n", "\nZZZZ)\n");
        assert!(matches!(
            read_model::<f64>(&bad_action),
            Err(CheckpointError::BadAction { .. })
        ));
    }

    #[test]
    fn shape_drift_is_rejected() {
        let model: Seq2Seq<f64> = tiny(Precision::F64);
        let text = write_model(&model).replace(
            "[tensor input_b 4 1]",
            "[tensor input_b 5 1]",
        );
        assert!(matches!(
            read_model::<f64>(&text),
            Err(CheckpointError::Shape { .. })
        ));
    }
}
