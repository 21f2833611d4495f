//! The `treeseq` command: linearize treebanks, train the sequence model,
//! parse, and score — each step a subcommand so the pieces pipe together.
//!
//! Exit codes: 2 for usage errors (bad flags), 1 for data errors (missing
//! files, malformed trees, mismatched inputs), 0 on success.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use treeseq::delinearize;
use treeseq::eval::{benchmark, AttentionStats, BracketScore};
use treeseq::linearize::{linearize_line, Scheme, LEXICALIZED_WORDS};
use treeseq::seq2seq::checkpoint::{self, AnyModel};
use treeseq::seq2seq::config::{AttentionMode, ModelConfig, Precision};
use treeseq::seq2seq::train::{self, Adam};
use treeseq::seq2seq::Seq2Seq;
use treeseq::synth::{random_sentence, random_trees, SynthConfig};
use treeseq::transitions::System;
use treeseq::tree::{Sentence, TaggedWord, Tree};
use treeseq::treebank::{preprocess, read_treebank, serialize_tree};
use treeseq::Scalar;

#[derive(Parser)]
#[command(
    name = "treeseq",
    version,
    about = "Constituent trees as token sequences: linearize, train, parse, score."
)]
struct Cli {
    /// Seed for randomized subcommands; for train it overrides the
    /// config's seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for linearize/delinearize/parse/eval (0 = all
    /// cores). Train and bench always run on one worker.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    /// Reject any token sequence that is not a complete legal derivation.
    Strict,
    /// Always produce a tree: drop or substitute bad tokens, close what
    /// remains.
    Repair,
}

#[derive(Clone, Copy, ValueEnum)]
enum SystemArg {
    /// Top-down: open the parent before any of its children.
    Td,
    /// In-order: open the parent after its first child.
    Inorder,
}

#[derive(Clone, Copy, ValueEnum)]
enum AttArg {
    /// Softmax-weighted sums over both segments.
    Prob,
    /// Two boundary vectors scaled by their raw scores.
    Det,
}

impl From<AttArg> for AttentionMode {
    fn from(a: AttArg) -> AttentionMode {
        match a {
            AttArg::Prob => AttentionMode::Probabilistic,
            AttArg::Det => AttentionMode::Deterministic,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Convert a treebank into one action-token line per tree.
    Linearize {
        /// Which linearization scheme to use.
        #[arg(long)]
        scheme: Scheme,
        /// Bracketed treebank to read.
        treebank: PathBuf,
        /// Write token lines here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write the word_POS sentence file needed to delinearize.
        #[arg(long)]
        sentences: Option<PathBuf>,
        /// Keep function tags and trace leaves instead of stripping them.
        #[arg(long)]
        keep_tags: bool,
    },
    /// Rebuild trees from action-token lines.
    Delinearize {
        #[arg(long)]
        scheme: Scheme,
        /// strict fails on any illegal sequence; repair always yields a
        /// tree.
        #[arg(long, value_enum, default_value_t = Mode::Strict)]
        mode: Mode,
        /// word_POS lines supplying the words the tokens shift.
        #[arg(long)]
        sentences: PathBuf,
        /// Token lines to decode, aligned with --sentences.
        tokens: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print each tree's gold action sequence.
    Oracle {
        /// Transition system to derive with.
        #[arg(long, value_enum)]
        system: SystemArg,
        /// Spell reduce actions with the closed label.
        #[arg(long)]
        labeled: bool,
        /// Lexicalize shifts of "." and ",".
        #[arg(long)]
        lex: bool,
        treebank: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        keep_tags: bool,
    },
    /// Train a parser on a treebank and write a checkpoint.
    Train {
        /// key = value config file; defaults apply to anything unset.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Override the config's linearization scheme.
        #[arg(long)]
        scheme: Option<Scheme>,
        /// Override the config's attention mode.
        #[arg(long, value_enum)]
        attention: Option<AttArg>,
        /// Where to write the trained model.
        #[arg(long, default_value = "model.ckpt")]
        out: PathBuf,
        /// Held-out treebank to score (beam width from the config) after
        /// training.
        #[arg(long)]
        dev: Option<PathBuf>,
        treebank: PathBuf,
        #[arg(long)]
        keep_tags: bool,
    },
    /// Parse word_POS sentences with a trained model.
    Parse {
        #[arg(long)]
        model: PathBuf,
        /// Beam width; 1 (the default) is greedy decoding.
        #[arg(long, default_value_t = 1)]
        beam: usize,
        sentences: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Score predicted trees against gold trees (labeled bracket F1).
    Eval {
        #[arg(long)]
        gold: PathBuf,
        #[arg(long)]
        pred: PathBuf,
        /// Ignore punctuation leaves in span indices (EVALB convention).
        #[arg(long)]
        exclude_punct: bool,
        #[arg(long)]
        keep_tags: bool,
    },
    /// Measure decoding throughput.
    Bench {
        #[arg(long)]
        model: PathBuf,
        /// Override the checkpoint's attention mode for this run.
        #[arg(long, value_enum)]
        attention: Option<AttArg>,
        /// word_POS sentences to decode; synthesized when absent.
        sentences: Option<PathBuf>,
        /// How many synthetic sentences to generate.
        #[arg(long, default_value_t = 25)]
        count: usize,
        /// Length of each synthetic sentence.
        #[arg(long, default_value_t = 40)]
        len: usize,
        /// Untimed passes before measuring.
        #[arg(long, default_value_t = 1)]
        warmup: usize,
        /// Timed passes; the mean throughput is reported.
        #[arg(long, default_value_t = 3)]
        runs: usize,
    },
    /// Report where greedy decoding puts its attention mass.
    Stats {
        #[arg(long)]
        model: PathBuf,
        sentences: PathBuf,
    },
    /// Emit a random treebank for desk-scale experiments.
    GenSynthetic {
        /// How many trees to generate.
        #[arg(long)]
        trees: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write the matching word_POS sentence file.
        #[arg(long)]
        sentences: Option<PathBuf>,
        #[arg(long, default_value_t = 6)]
        max_depth: usize,
        #[arg(long, default_value_t = 4)]
        max_fanout: usize,
        #[arg(long, default_value_t = 50)]
        vocab: usize,
    },
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {:#}", e);
        std::process::exit(1);
    }
}

fn run(cli: Cli) -> Result<()> {
    let seed = cli.seed;
    let jobs = cli.jobs;
    match cli.command {
        Command::Linearize {
            scheme,
            treebank,
            out,
            sentences,
            keep_tags,
        } => {
            let trees = load_treebank(&treebank, keep_tags)?;
            let lines = run_maybe_parallel(jobs, &trees, |t| Ok(linearize_line(t, scheme)))?;
            write_lines(out.as_deref(), &lines)?;
            if let Some(path) = sentences {
                let lines: Vec<String> = trees.iter().map(|t| t.sentence().to_string()).collect();
                write_lines(Some(path.as_path()), &lines)?;
            }
            Ok(())
        }
        Command::Delinearize {
            scheme,
            mode,
            sentences,
            tokens,
            out,
        } => {
            let sentences = read_sentences(&sentences)?;
            let token_lines = read_nonempty_lines(&tokens)?;
            if sentences.len() != token_lines.len() {
                bail!(
                    "{} has {} token lines but the sentence file has {}",
                    tokens.display(),
                    token_lines.len(),
                    sentences.len()
                );
            }
            let pairs: Vec<(usize, (&String, &Sentence))> = token_lines
                .iter()
                .zip(&sentences)
                .enumerate()
                .collect();
            let lines = run_maybe_parallel(jobs, &pairs, |(idx, (line, sentence))| {
                let toks: Vec<&str> = line.split_whitespace().collect();
                let tree = match mode {
                    Mode::Strict => delinearize::delinearize(&toks, sentence, scheme)
                        .with_context(|| format!("line {}", idx + 1))?,
                    Mode::Repair => delinearize::repair(&toks, sentence, scheme),
                };
                Ok(serialize_tree(&tree))
            })?;
            write_lines(out.as_deref(), &lines)
        }
        Command::Oracle {
            system,
            labeled,
            lex,
            treebank,
            out,
            keep_tags,
        } => {
            let trees = load_treebank(&treebank, keep_tags)?;
            let system = match system {
                SystemArg::Td => System::top_down(),
                SystemArg::Inorder => System::in_order(),
            };
            let lex_words: &[&str] = if lex { &LEXICALIZED_WORDS } else { &[] };
            let lines: Vec<String> = trees
                .iter()
                .map(|t| {
                    system
                        .oracle_refined(t, labeled, lex_words)
                        .iter()
                        .map(ToString::to_string)
                        .collect::<Vec<_>>()
                        .join(" ")
                })
                .collect();
            write_lines(out.as_deref(), &lines)
        }
        Command::Train {
            config,
            scheme,
            attention,
            out,
            dev,
            treebank,
            keep_tags,
        } => {
            let mut config = match config {
                Some(path) => ModelConfig::load(&path)?,
                None => ModelConfig::default(),
            };
            if let Some(s) = scheme {
                config.scheme = s;
            }
            if let Some(a) = attention {
                config.attention = a.into();
            }
            if let Some(s) = seed {
                config.seed = s;
            }
            let trees = load_treebank(&treebank, keep_tags)?;
            let dev_trees = dev.map(|p| load_treebank(&p, keep_tags)).transpose()?;
            match config.precision {
                Precision::F32 => run_train::<f32>(config, &trees, dev_trees.as_deref(), &out),
                Precision::F64 => run_train::<f64>(config, &trees, dev_trees.as_deref(), &out),
            }
        }
        Command::Parse {
            model,
            beam,
            sentences,
            out,
        } => {
            let sentences = read_sentences(&sentences)?;
            let lines = match checkpoint::load(&model)? {
                AnyModel::F32(m) => run_parse(&m, &sentences, beam, jobs)?,
                AnyModel::F64(m) => run_parse(&m, &sentences, beam, jobs)?,
            };
            write_lines(out.as_deref(), &lines)
        }
        Command::Eval {
            gold,
            pred,
            exclude_punct,
            keep_tags,
        } => {
            let gold_trees = load_treebank(&gold, keep_tags)?;
            let pred_trees = load_treebank(&pred, keep_tags)?;
            if gold_trees.len() != pred_trees.len() {
                bail!(
                    "gold has {} trees but pred has {}",
                    gold_trees.len(),
                    pred_trees.len()
                );
            }
            let pairs: Vec<(usize, (&Tree, &Tree))> =
                gold_trees.iter().zip(&pred_trees).enumerate().collect();
            let scores = run_maybe_parallel(jobs, &pairs, |(idx, (g, p))| {
                let gs = g.sentence();
                let ps = p.sentence();
                let gw: Vec<&str> = gs.iter().map(|w| w.word.as_str()).collect();
                let pw: Vec<&str> = ps.iter().map(|w| w.word.as_str()).collect();
                if gw != pw {
                    bail!("sentence {}: gold and predicted yields differ", idx + 1);
                }
                Ok(treeseq::eval::score_tree(g, p, exclude_punct))
            })?;
            let mut total = BracketScore::default();
            for s in scores {
                total.add(s);
            }
            println!(
                "brackets: matched={} gold={} predicted={}",
                total.matched, total.gold, total.predicted
            );
            println!(
                "precision={:.1} recall={:.1}",
                total.precision(),
                total.recall()
            );
            println!("F1={:.1}", total.f1());
            Ok(())
        }
        Command::Bench {
            model,
            attention,
            sentences,
            count,
            len,
            warmup,
            runs,
        } => {
            let sentences = match sentences {
                Some(path) => read_sentences(&path)?,
                None => {
                    let mut rng = ChaCha8Rng::seed_from_u64(seed.unwrap_or(1));
                    let cfg = SynthConfig::default();
                    (0..count.max(1))
                        .map(|_| random_sentence(&mut rng, len.max(1), &cfg))
                        .collect()
                }
            };
            match checkpoint::load(&model)? {
                AnyModel::F32(mut m) => {
                    if let Some(a) = attention {
                        m.config.attention = a.into();
                    }
                    run_bench(&m, &sentences, warmup, runs)
                }
                AnyModel::F64(mut m) => {
                    if let Some(a) = attention {
                        m.config.attention = a.into();
                    }
                    run_bench(&m, &sentences, warmup, runs)
                }
            }
        }
        Command::Stats { model, sentences } => {
            let sentences = read_sentences(&sentences)?;
            match checkpoint::load(&model)? {
                AnyModel::F32(m) => run_stats(&m, &sentences),
                AnyModel::F64(m) => run_stats(&m, &sentences),
            }
        }
        Command::GenSynthetic {
            trees,
            out,
            sentences,
            max_depth,
            max_fanout,
            vocab,
        } => {
            let cfg = SynthConfig {
                max_depth,
                max_fanout,
                vocab,
                ..SynthConfig::default()
            };
            let generated = random_trees(seed.unwrap_or(1), trees, &cfg);
            let lines: Vec<String> = generated.iter().map(serialize_tree).collect();
            write_lines(out.as_deref(), &lines)?;
            if let Some(path) = sentences {
                let lines: Vec<String> =
                    generated.iter().map(|t| t.sentence().to_string()).collect();
                write_lines(Some(path.as_path()), &lines)?;
            }
            Ok(())
        }
    }
}

/// Reads a treebank and, unless `keep_tags` is set, strips function tags
/// and trace subtrees from every tree.
fn load_treebank(path: &Path, keep_tags: bool) -> Result<Vec<Tree>> {
    let trees = read_treebank(path)?;
    if keep_tags {
        return Ok(trees);
    }
    trees
        .iter()
        .enumerate()
        .map(|(idx, t)| {
            preprocess(t).with_context(|| format!("{} tree {}", path.display(), idx + 1))
        })
        .collect()
}

fn read_nonempty_lines(path: &Path) -> Result<Vec<String>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(text
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(str::to_string)
        .collect())
}

/// Reads a sentence file: one sentence per line, tokens as `word_POS`.
fn read_sentences(path: &Path) -> Result<Vec<Sentence>> {
    let mut sentences = Vec::new();
    for (idx, line) in read_nonempty_lines(path)?.iter().enumerate() {
        let mut words = Vec::new();
        for token in line.split_whitespace() {
            let Some((word, pos)) = token.rsplit_once('_') else {
                bail!(
                    "{} line {}: token {:?} is missing its _POS suffix",
                    path.display(),
                    idx + 1,
                    token
                );
            };
            words.push(TaggedWord::new(word, pos));
        }
        let sentence = Sentence::new(words)
            .with_context(|| format!("{} line {}", path.display(), idx + 1))?;
        sentences.push(sentence);
    }
    Ok(sentences)
}

fn write_lines(out: Option<&Path>, lines: &[String]) -> Result<()> {
    let mut text = lines.join("\n");
    if !lines.is_empty() {
        text.push('\n');
    }
    match out {
        Some(path) => {
            fs::write(path, text).with_context(|| format!("writing {}", path.display()))
        }
        None => {
            print!("{}", text);
            Ok(())
        }
    }
}

/// Maps `f` over `items`, in parallel when `--jobs` was given (0 = all
/// cores). Output order always matches input order.
fn run_maybe_parallel<T, U, F>(jobs: Option<usize>, items: &[T], f: F) -> Result<Vec<U>>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> Result<U> + Send + Sync,
{
    match jobs {
        None => items.iter().map(f).collect(),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .context("building the worker pool")?
            .install(|| items.par_iter().map(f).collect()),
    }
}

/// A flat single-constituent tree over the sentence — the fallback when
/// decoding fails outright, keeping parse output line-aligned.
fn flat_fallback(sentence: &Sentence) -> Tree {
    Tree::non_terminal(
        "S",
        sentence
            .iter()
            .map(|w| Tree::leaf(&w.word, &w.pos))
            .collect(),
    )
}

fn run_train<S: Scalar>(
    config: ModelConfig,
    trees: &[Tree],
    dev: Option<&[Tree]>,
    out: &Path,
) -> Result<()> {
    let beam = config.beam;
    let (mut model, examples) = Seq2Seq::<S>::from_treebank(config, trees)?;
    println!(
        "training on {} trees ({} parameters, {} actions)",
        examples.len(),
        model.params.count(),
        model.vocabs.actions.len()
    );
    let mut opt = Adam::new(
        &model.params,
        model.config.lr,
        model.config.beta1,
        model.config.beta2,
    );
    let mut rng = ChaCha8Rng::seed_from_u64(model.config.seed);
    for epoch in 1..=model.config.epochs {
        let stats = train::train_epoch(&mut model, &examples, &mut opt, &mut rng);
        println!(
            "epoch={} loss={:.4} token_accuracy={:.4}",
            epoch, stats.mean_loss, stats.token_accuracy
        );
    }
    checkpoint::save(&model, out)?;
    println!("saved {}", out.display());
    if let Some(dev_trees) = dev {
        let mut total = BracketScore::default();
        for (idx, gold) in dev_trees.iter().enumerate() {
            let sentence = gold.sentence();
            let predicted = match model.parse(&sentence, beam) {
                Ok(d) => d.tree,
                Err(e) => {
                    eprintln!("dev sentence {}: {}; scoring a flat tree", idx + 1, e);
                    flat_fallback(&sentence)
                }
            };
            total.add(treeseq::eval::score_tree(gold, &predicted, false));
        }
        println!("dev F1={:.1}", total.f1());
    }
    Ok(())
}

fn run_parse<S: Scalar>(
    model: &Seq2Seq<S>,
    sentences: &[Sentence],
    beam: usize,
    jobs: Option<usize>,
) -> Result<Vec<String>> {
    let numbered: Vec<(usize, &Sentence)> = sentences.iter().enumerate().collect();
    run_maybe_parallel(jobs, &numbered, |(idx, sentence)| {
        let tree = match model.parse(sentence, beam) {
            Ok(d) => d.tree,
            Err(e) => {
                eprintln!("sentence {}: {}; emitting a flat tree", idx + 1, e);
                flat_fallback(sentence)
            }
        };
        Ok(serialize_tree(&tree))
    })
}

fn run_bench<S: Scalar>(
    model: &Seq2Seq<S>,
    sentences: &[Sentence],
    warmup: usize,
    runs: usize,
) -> Result<()> {
    let result = benchmark(sentences.len(), warmup, runs.max(1), || {
        for sentence in sentences {
            let _ = treeseq::seq2seq::decode::greedy(model, sentence);
        }
    });
    println!("{}", result);
    println!("sents_per_sec={:.2}", result.sents_per_sec);
    Ok(())
}

fn run_stats<S: Scalar>(model: &Seq2Seq<S>, sentences: &[Sentence]) -> Result<()> {
    if model.config.attention == AttentionMode::Deterministic {
        eprintln!("note: model uses deterministic attention; stats describe its two-point weights");
    }
    let mut stats = AttentionStats::default();
    for (idx, sentence) in sentences.iter().enumerate() {
        match treeseq::seq2seq::decode::greedy(model, sentence) {
            Ok(decoded) => {
                for step in &decoded.attention {
                    stats.record(step);
                }
            }
            Err(e) => eprintln!("sentence {}: {}; skipped", idx + 1, e),
        }
    }
    println!("{}", stats);
    println!("adjacent={:.4}", stats.adjacent_fraction());
    Ok(())
}
