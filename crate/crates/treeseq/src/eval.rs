//! Scoring and diagnostics: labeled bracket F1, throughput measurement,
//! and attention-placement statistics.

use std::collections::HashMap;
use std::fmt;
use std::time::Instant;

use crate::tree::Tree;

/// POS tags treated as punctuation when punctuation-free scoring is on.
pub const PUNCT_POS: [&str; 7] = [".", ",", ":", "``", "''", "-LRB-", "-RRB-"];

/// A labeled constituent span: label plus half-open word range.
pub type Span = (String, usize, usize);

/// All labeled spans of a tree, one per non-terminal node. Word positions
/// count leaves left to right; with `exclude_punct` the punctuation leaves
/// (by POS tag) are dropped from the numbering first, and constituents that
/// dominate only punctuation contribute no span.
pub fn labeled_spans(tree: &Tree, exclude_punct: bool) -> Vec<Span> {
    let mut spans = Vec::new();
    let mut next = 0usize;
    collect_spans(tree, exclude_punct, &mut next, &mut spans);
    spans
}

/// Returns the span covered by `tree`, pushing the spans of its internal
/// nodes onto `out`. `next` is the index the next counted word will take.
fn collect_spans(
    tree: &Tree,
    exclude_punct: bool,
    next: &mut usize,
    out: &mut Vec<Span>,
) -> (usize, usize) {
    match tree {
        Tree::Leaf { pos, .. } => {
            if exclude_punct && PUNCT_POS.contains(&pos.as_str()) {
                (*next, *next)
            } else {
                *next += 1;
                (*next - 1, *next)
            }
        }
        Tree::NonTerminal { label, children } => {
            let start = *next;
            let mut end = start;
            for c in children {
                end = collect_spans(c, exclude_punct, next, out).1;
            }
            if end > start {
                out.push((label.clone(), start, end));
            }
            (start, end)
        }
    }
}

/// Corpus-level bracket counts; precision, recall, and F1 derive from them.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct BracketScore {
    pub matched: usize,
    pub gold: usize,
    pub predicted: usize,
}

impl BracketScore {
    /// Percent of predicted brackets that are correct.
    pub fn precision(&self) -> f64 {
        ratio(self.matched, self.predicted)
    }

    /// Percent of gold brackets that were found.
    pub fn recall(&self) -> f64 {
        ratio(self.matched, self.gold)
    }

    /// Harmonic mean of precision and recall, in percent.
    pub fn f1(&self) -> f64 {
        let p = self.precision();
        let r = self.recall();
        if p + r == 0.0 {
            0.0
        } else {
            2.0 * p * r / (p + r)
        }
    }

    pub fn add(&mut self, other: BracketScore) {
        self.matched += other.matched;
        self.gold += other.gold;
        self.predicted += other.predicted;
    }
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        // No brackets on this side at all: vacuously perfect.
        100.0
    } else {
        100.0 * num as f64 / den as f64
    }
}

impl fmt::Display for BracketScore {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "P {:.2} R {:.2} F1 {:.2} (matched {} / predicted {} / gold {})",
            self.precision(),
            self.recall(),
            self.f1(),
            self.matched,
            self.predicted,
            self.gold
        )
    }
}

/// Scores one predicted tree against its gold tree. Brackets match when
/// label, start, and end all agree; duplicate spans match as a multiset.
pub fn score_tree(gold: &Tree, predicted: &Tree, exclude_punct: bool) -> BracketScore {
    let gold_spans = labeled_spans(gold, exclude_punct);
    let pred_spans = labeled_spans(predicted, exclude_punct);
    let mut counts: HashMap<&Span, usize> = HashMap::new();
    for s in &gold_spans {
        *counts.entry(s).or_insert(0) += 1;
    }
    let mut matched = 0;
    for s in &pred_spans {
        if let Some(c) = counts.get_mut(s) {
            if *c > 0 {
                *c -= 1;
                matched += 1;
            }
        }
    }
    BracketScore {
        matched,
        gold: gold_spans.len(),
        predicted: pred_spans.len(),
    }
}

/// Scores a corpus of (gold, predicted) pairs by pooling bracket counts.
pub fn score_corpus<'a, I>(pairs: I, exclude_punct: bool) -> BracketScore
where
    I: IntoIterator<Item = (&'a Tree, &'a Tree)>,
{
    let mut total = BracketScore::default();
    for (gold, predicted) in pairs {
        total.add(score_tree(gold, predicted, exclude_punct));
    }
    total
}

/// Result of a throughput measurement: per-run sentence rates and their
/// mean.
#[derive(Debug, Clone)]
pub struct BenchResult {
    pub sentences: usize,
    pub run_seconds: Vec<f64>,
    pub sents_per_sec: f64,
}

impl fmt::Display for BenchResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:.2} sent/s over {} runs of {} sentences",
            self.sents_per_sec,
            self.run_seconds.len(),
            self.sentences
        )
    }
}

/// Times `work` (which processes `sentences` sentences per call): `warmup`
/// untimed calls, then `runs` timed ones, reporting the mean rate.
pub fn benchmark<F: FnMut()>(
    sentences: usize,
    warmup: usize,
    runs: usize,
    mut work: F,
) -> BenchResult {
    assert!(runs >= 1, "at least one timed run is required");
    for _ in 0..warmup {
        work();
    }
    let mut run_seconds = Vec::with_capacity(runs);
    for _ in 0..runs {
        let start = Instant::now();
        work();
        run_seconds.push(start.elapsed().as_secs_f64());
    }
    let mean_secs = run_seconds.iter().sum::<f64>() / runs as f64;
    BenchResult {
        sentences,
        run_seconds,
        sents_per_sec: sentences as f64 / mean_secs,
    }
}

/// The attention placement of one decoding step: the full weight vector
/// over encoder positions and how many words had been consumed when the
/// step ran. The words adjacent to the segment boundary are the last
/// consumed one (position `consumed - 1`) and the next unconsumed one
/// (position `consumed`).
#[derive(Debug, Clone)]
pub struct StepAttention {
    pub weights: Vec<f64>,
    pub consumed: usize,
}

/// Where the per-step attention argmax lands relative to the segment
/// boundary, aggregated over decoding steps.
#[derive(Debug, Clone, Copy, Default)]
pub struct AttentionStats {
    pub steps: usize,
    /// Argmax on the last consumed word.
    pub at_last_consumed: usize,
    /// Argmax on the next unconsumed word.
    pub at_next_word: usize,
}

impl AttentionStats {
    pub fn record(&mut self, step: &StepAttention) {
        if step.weights.is_empty() {
            return;
        }
        let argmax = step
            .weights
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).expect("finite weights"))
            .map(|(i, _)| i)
            .expect("non-empty weights");
        self.steps += 1;
        if argmax + 1 == step.consumed {
            self.at_last_consumed += 1;
        } else if argmax == step.consumed {
            self.at_next_word += 1;
        }
    }

    /// Fraction of steps whose argmax hit either boundary-adjacent word.
    pub fn adjacent_fraction(&self) -> f64 {
        if self.steps == 0 {
            0.0
        } else {
            (self.at_last_consumed + self.at_next_word) as f64 / self.steps as f64
        }
    }
}

impl fmt::Display for AttentionStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} steps: argmax on last consumed word {:.1}%, on next word {:.1}%, boundary-adjacent {:.1}%",
            self.steps,
            100.0 * self.at_last_consumed as f64 / self.steps.max(1) as f64,
            100.0 * self.at_next_word as f64 / self.steps.max(1) as f64,
            100.0 * self.adjacent_fraction()
        )
    }
}
