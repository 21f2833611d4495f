//! Shift–reduce transition systems over constituent trees.
//!
//! Two systems share one configuration type and action alphabet:
//!
//! * **top-down**: `NT(X)` opens a constituent before any of its children
//!   exist; `RE` closes the most recent open one over everything above it.
//! * **in-order**: a constituent is opened only after its first child is
//!   complete; `RE` therefore also consumes the element *preceding* the open
//!   non-terminal (that first child), and a final `FI` marks acceptance.
//!
//! Legality is completability-preserving: from any reachable configuration,
//! every legal action leaves at least one path to a terminal configuration.
//! Two caps make the action space finite — a bound on simultaneously open
//! non-terminals and, for in-order, a bound on consecutive unary reductions
//! (without it `NT(X) RE` could wrap a subtree forever).

use std::fmt;
use std::str::FromStr;

use crate::tree::{Sentence, Tree};

/// A parser action. Lexicalized shifts (`SH.`) pin the surface form of the
/// shifted word; labeled reductions (`RE(NP)`) pin the label being closed.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Action {
    Shift,
    ShiftLex(String),
    OpenNt(String),
    Reduce,
    ReduceLabeled(String),
    Finish,
}

impl Action {
    pub fn kind(&self) -> ActionKind {
        match self {
            Action::Shift | Action::ShiftLex(_) => ActionKind::Shift,
            Action::OpenNt(_) => ActionKind::OpenNt,
            Action::Reduce | Action::ReduceLabeled(_) => ActionKind::Reduce,
            Action::Finish => ActionKind::Finish,
        }
    }

    /// Drops lexical and label refinements, keeping the bare action.
    pub fn erased(&self) -> Action {
        match self {
            Action::ShiftLex(_) => Action::Shift,
            Action::ReduceLabeled(_) => Action::Reduce,
            other => other.clone(),
        }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Action::Shift => write!(f, "SH"),
            Action::ShiftLex(w) => write!(f, "SH{}", w),
            Action::OpenNt(l) => write!(f, "NT({})", l),
            Action::Reduce => write!(f, "RE"),
            Action::ReduceLabeled(l) => write!(f, "RE({})", l),
            Action::Finish => write!(f, "FI"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unrecognized action token {0:?}")]
pub struct BadActionToken(pub String);

impl FromStr for Action {
    type Err = BadActionToken;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "SH" => return Ok(Action::Shift),
            "RE" => return Ok(Action::Reduce),
            "FI" => return Ok(Action::Finish),
            _ => {}
        }
        if let Some(rest) = s.strip_prefix("NT(") {
            if let Some(label) = rest.strip_suffix(')') {
                if !label.is_empty() {
                    return Ok(Action::OpenNt(label.to_string()));
                }
            }
        } else if let Some(rest) = s.strip_prefix("RE(") {
            if let Some(label) = rest.strip_suffix(')') {
                if !label.is_empty() {
                    return Ok(Action::ReduceLabeled(label.to_string()));
                }
            }
        } else if let Some(word) = s.strip_prefix("SH") {
            if !word.is_empty() {
                return Ok(Action::ShiftLex(word.to_string()));
            }
        }
        Err(BadActionToken(s.to_string()))
    }
}

/// The shape of an action, ignoring labels and lexical content.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ActionKind {
    Shift,
    OpenNt,
    Reduce,
    Finish,
}

impl ActionKind {
    pub const ALL: [ActionKind; 4] = [
        ActionKind::Shift,
        ActionKind::OpenNt,
        ActionKind::Reduce,
        ActionKind::Finish,
    ];
}

/// One element of the parse stack.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StackItem {
    /// An open non-terminal awaiting its reduce.
    Open { label: String },
    /// A finished constituent.
    Subtree(Tree),
    /// A shifted word not yet folded into any constituent.
    Word { word: String, pos: String },
}

impl StackItem {
    fn is_open(&self) -> bool {
        matches!(self, StackItem::Open { .. })
    }

    fn into_tree(self) -> Tree {
        match self {
            StackItem::Subtree(t) => t,
            StackItem::Word { word, pos } => Tree::Leaf { word, pos },
            StackItem::Open { .. } => unreachable!("open item folded into a tree"),
        }
    }
}

/// Which transition system governs legality and reduce semantics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SystemKind {
    TopDown,
    InOrder,
}

/// A transition system plus its termination caps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct System {
    pub kind: SystemKind,
    /// Maximum number of simultaneously open non-terminals.
    pub max_open: usize,
    /// In-order only: maximum run of consecutive unary reductions.
    pub max_unary: usize,
}

pub const DEFAULT_MAX_OPEN: usize = 100;
pub const DEFAULT_MAX_UNARY: usize = 10;

impl System {
    pub fn top_down() -> System {
        System {
            kind: SystemKind::TopDown,
            max_open: DEFAULT_MAX_OPEN,
            max_unary: DEFAULT_MAX_UNARY,
        }
    }

    pub fn in_order() -> System {
        System {
            kind: SystemKind::InOrder,
            max_open: DEFAULT_MAX_OPEN,
            max_unary: DEFAULT_MAX_UNARY,
        }
    }

    pub fn with_limits(mut self, max_open: usize, max_unary: usize) -> System {
        self.max_open = max_open;
        self.max_unary = max_unary;
        self
    }
}

/// A parser configuration: the stack, how many words have been shifted, and
/// the in-order acceptance flag. `unary_streak` counts consecutive unary
/// reductions and backs the in-order termination cap.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Configuration {
    pub stack: Vec<StackItem>,
    pub buffer_pos: usize,
    pub finished: bool,
    pub unary_streak: usize,
}

impl Configuration {
    pub fn initial() -> Configuration {
        Configuration {
            stack: Vec::new(),
            buffer_pos: 0,
            finished: false,
            unary_streak: 0,
        }
    }

    pub fn open_count(&self) -> usize {
        self.stack.iter().filter(|i| i.is_open()).count()
    }

    /// Index of the topmost open non-terminal, if any.
    fn top_open(&self) -> Option<usize> {
        self.stack.iter().rposition(StackItem::is_open)
    }

    fn top_open_label(&self) -> Option<&str> {
        self.top_open().map(|i| match &self.stack[i] {
            StackItem::Open { label } => label.as_str(),
            _ => unreachable!(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum IllegalAction {
    #[error("step {step}: {action} is not legal here ({reason})")]
    Blocked {
        step: usize,
        action: Action,
        reason: String,
    },
    #[error("step {step}: {action} expects word {expected:?} but buffer has {found:?}")]
    WordMismatch {
        step: usize,
        action: Action,
        expected: String,
        found: String,
    },
    #[error("step {step}: {action} expects open label {expected:?} but found {found:?}")]
    LabelMismatch {
        step: usize,
        action: Action,
        expected: String,
        found: String,
    },
    #[error("derivation ended in a non-terminal configuration ({reason})")]
    NotTerminal { reason: String },
}

impl System {
    /// Is `kind` legal in `config`? This is the template-level check shared
    /// by decoding masks; concrete actions add word/label agreement on top.
    pub fn kind_legal(&self, config: &Configuration, kind: ActionKind, sentence_len: usize) -> bool {
        self.kind_blocked(config, kind, sentence_len).is_none()
    }

    /// Reason `kind` is not legal, or `None` if it is.
    fn kind_blocked(
        &self,
        config: &Configuration,
        kind: ActionKind,
        sentence_len: usize,
    ) -> Option<&'static str> {
        let buffer_left = sentence_len - config.buffer_pos;
        let open = config.open_count();
        if config.finished {
            return Some("derivation already finished");
        }
        match (self.kind, kind) {
            (SystemKind::TopDown, ActionKind::Shift) => {
                if buffer_left == 0 {
                    Some("buffer is empty")
                } else if open == 0 {
                    Some("no open non-terminal to attach the word to")
                } else {
                    None
                }
            }
            (SystemKind::TopDown, ActionKind::OpenNt) => {
                if buffer_left == 0 {
                    Some("buffer is empty")
                } else if open >= self.max_open {
                    Some("open non-terminal cap reached")
                } else if open == 0 && !config.stack.is_empty() {
                    Some("a completed constituent would be stranded")
                } else {
                    None
                }
            }
            (SystemKind::TopDown, ActionKind::Reduce) => {
                if open == 0 {
                    Some("no open non-terminal")
                } else if config.stack.last().is_none_or(StackItem::is_open) {
                    Some("open non-terminal has no children yet")
                } else if open == 1 && buffer_left > 0 {
                    Some("closing the root would strand remaining words")
                } else {
                    None
                }
            }
            (SystemKind::TopDown, ActionKind::Finish) => Some("no finish action in this system"),
            (SystemKind::InOrder, ActionKind::Shift) => {
                if buffer_left == 0 {
                    Some("buffer is empty")
                } else if !config.stack.is_empty() && open == 0 {
                    Some("two floor-level constituents could never be joined")
                } else {
                    None
                }
            }
            (SystemKind::InOrder, ActionKind::OpenNt) => {
                if config.stack.last().is_none_or(StackItem::is_open) {
                    Some("no completed first child on top of the stack")
                } else if open >= self.max_open {
                    Some("open non-terminal cap reached")
                } else if buffer_left == 0 && config.unary_streak >= self.max_unary {
                    Some("only a unary reduce could follow and the unary cap is reached")
                } else {
                    None
                }
            }
            (SystemKind::InOrder, ActionKind::Reduce) => {
                let Some(open_idx) = config.top_open() else {
                    return Some("no open non-terminal");
                };
                let above = config.stack.len() - open_idx - 1;
                if above == 0 && config.unary_streak >= self.max_unary {
                    Some("unary reduction cap reached")
                } else {
                    None
                }
            }
            (SystemKind::InOrder, ActionKind::Finish) => {
                if buffer_left > 0 {
                    Some("buffer is not empty")
                } else if config.open_count() > 0 {
                    Some("open non-terminals remain")
                } else if config.stack.len() != 1 {
                    Some("stack does not hold exactly one constituent")
                } else if !matches!(config.stack[0], StackItem::Subtree(_)) {
                    Some("the single stack item is a bare word, not a constituent")
                } else {
                    None
                }
            }
        }
    }

    /// All legal action kinds in `config`.
    pub fn legal_kinds(&self, config: &Configuration, sentence_len: usize) -> Vec<ActionKind> {
        ActionKind::ALL
            .into_iter()
            .filter(|k| self.kind_legal(config, *k, sentence_len))
            .collect()
    }

    /// Checks a concrete action: template legality plus lexical/label
    /// agreement for refined actions.
    pub fn check(
        &self,
        config: &Configuration,
        action: &Action,
        sentence: &Sentence,
        step: usize,
    ) -> Result<(), IllegalAction> {
        if let Some(reason) = self.kind_blocked(config, action.kind(), sentence.len()) {
            return Err(IllegalAction::Blocked {
                step,
                action: action.clone(),
                reason: reason.to_string(),
            });
        }
        match action {
            Action::ShiftLex(expected) => {
                let found = &sentence.get(config.buffer_pos).expect("guard checked").word;
                if found != expected {
                    return Err(IllegalAction::WordMismatch {
                        step,
                        action: action.clone(),
                        expected: expected.clone(),
                        found: found.clone(),
                    });
                }
            }
            Action::ReduceLabeled(expected) => {
                let found = config.top_open_label().expect("guard checked");
                if found != expected {
                    return Err(IllegalAction::LabelMismatch {
                        step,
                        action: action.clone(),
                        expected: expected.clone(),
                        found: found.to_string(),
                    });
                }
            }
            _ => {}
        }
        Ok(())
    }

    /// Applies `action` to `config`, checking legality first.
    pub fn apply(
        &self,
        config: &Configuration,
        action: &Action,
        sentence: &Sentence,
        step: usize,
    ) -> Result<Configuration, IllegalAction> {
        self.check(config, action, sentence, step)?;
        let mut next = config.clone();
        match action.kind() {
            ActionKind::Shift => {
                let w = sentence.get(next.buffer_pos).expect("guard checked");
                next.stack.push(StackItem::Word {
                    word: w.word.clone(),
                    pos: w.pos.clone(),
                });
                next.buffer_pos += 1;
                next.unary_streak = 0;
            }
            ActionKind::OpenNt => {
                let label = match action {
                    Action::OpenNt(l) => l.clone(),
                    _ => unreachable!(),
                };
                next.stack.push(StackItem::Open { label });
            }
            ActionKind::Reduce => {
                let open_idx = next.stack.iter().rposition(StackItem::is_open).expect("guard");
                let above: Vec<StackItem> = next.stack.split_off(open_idx + 1);
                let label = match next.stack.pop() {
                    Some(StackItem::Open { label }) => label,
                    _ => unreachable!(),
                };
                let unary;
                let mut children: Vec<Tree> = Vec::with_capacity(above.len() + 1);
                match self.kind {
                    SystemKind::TopDown => {
                        unary = above.len() == 1;
                        children.extend(above.into_iter().map(StackItem::into_tree));
                    }
                    SystemKind::InOrder => {
                        // The element before the open non-terminal is its
                        // first child; it always exists because opening
                        // required a completed item on top of the stack.
                        unary = above.is_empty();
                        let first = next.stack.pop().expect("preceding element");
                        children.push(first.into_tree());
                        children.extend(above.into_iter().map(StackItem::into_tree));
                    }
                }
                next.stack.push(StackItem::Subtree(Tree::NonTerminal {
                    label,
                    children,
                }));
                next.unary_streak = if unary { next.unary_streak + 1 } else { 0 };
            }
            ActionKind::Finish => {
                next.finished = true;
            }
        }
        Ok(next)
    }

    /// Has the derivation reached an accepting configuration?
    pub fn is_terminal(&self, config: &Configuration, sentence_len: usize) -> bool {
        match self.kind {
            SystemKind::TopDown => {
                config.buffer_pos == sentence_len
                    && config.stack.len() == 1
                    && matches!(config.stack[0], StackItem::Subtree(_))
            }
            SystemKind::InOrder => config.finished,
        }
    }

    /// Runs a whole action sequence from the initial configuration and
    /// extracts the parse tree. Fails on any illegal action or if the
    /// sequence stops short of a terminal configuration.
    pub fn execute(&self, sentence: &Sentence, actions: &[Action]) -> Result<Tree, IllegalAction> {
        let mut config = Configuration::initial();
        for (step, action) in actions.iter().enumerate() {
            config = self.apply(&config, action, sentence, step)?;
        }
        if !self.is_terminal(&config, sentence.len()) {
            let reason = if config.buffer_pos < sentence.len() {
                format!(
                    "{} of {} words still unshifted",
                    sentence.len() - config.buffer_pos,
                    sentence.len()
                )
            } else if config.open_count() > 0 {
                format!("{} open non-terminals left unclosed", config.open_count())
            } else if self.kind == SystemKind::InOrder && !config.finished {
                "missing the finish action".to_string()
            } else {
                format!("stack holds {} items instead of one tree", config.stack.len())
            };
            return Err(IllegalAction::NotTerminal { reason });
        }
        match &config.stack[0] {
            StackItem::Subtree(t) => Ok(t.clone()),
            _ => unreachable!("terminal configurations hold a subtree"),
        }
    }

    /// The gold action sequence for `tree`: a pre-order traversal for the
    /// top-down system, a first-child-then-parent traversal for in-order.
    pub fn oracle(&self, tree: &Tree) -> Vec<Action> {
        self.oracle_refined(tree, false, &[])
    }

    /// Oracle with optional refinements: labeled reduces and, if
    /// `lex_words` is non-empty, lexicalized shifts for those surface forms.
    pub fn oracle_refined(&self, tree: &Tree, labeled_reduce: bool, lex_words: &[&str]) -> Vec<Action> {
        let mut out = Vec::new();
        self.oracle_node(tree, labeled_reduce, lex_words, &mut out);
        if self.kind == SystemKind::InOrder {
            out.push(Action::Finish);
        }
        out
    }

    fn oracle_node(&self, tree: &Tree, labeled: bool, lex: &[&str], out: &mut Vec<Action>) {
        match tree {
            Tree::Leaf { word, .. } => {
                if lex.contains(&word.as_str()) {
                    out.push(Action::ShiftLex(word.clone()));
                } else {
                    out.push(Action::Shift);
                }
            }
            Tree::NonTerminal { label, children } => {
                let reduce = if labeled {
                    Action::ReduceLabeled(label.clone())
                } else {
                    Action::Reduce
                };
                match self.kind {
                    SystemKind::TopDown => {
                        out.push(Action::OpenNt(label.clone()));
                        for c in children {
                            self.oracle_node(c, labeled, lex, out);
                        }
                        out.push(reduce);
                    }
                    SystemKind::InOrder => {
                        self.oracle_node(&children[0], labeled, lex, out);
                        out.push(Action::OpenNt(label.clone()));
                        for c in &children[1..] {
                            self.oracle_node(c, labeled, lex, out);
                        }
                        out.push(reduce);
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn figure1_tree() -> Tree {
        crate::treebank::parse_tree(
            "(S (NP (DT The) (NN public)) (VP (VBZ is) (ADVP (RB still)) (ADJP (JJ cautious))) (. .))",
        )
        .unwrap()
    }

    fn actions(s: &str) -> Vec<Action> {
        s.split_whitespace().map(|t| t.parse().unwrap()).collect()
    }

    #[test]
    fn action_token_round_trip() {
        for text in ["SH", "SH.", "SH,", "NT(NP)", "RE", "RE(VP)", "FI"] {
            let a: Action = text.parse().unwrap();
            assert_eq!(a.to_string(), text);
        }
        assert!("XX".parse::<Action>().is_err());
        assert!("NT()".parse::<Action>().is_err());
        assert!("NT(NP".parse::<Action>().is_err());
    }

    #[test]
    fn top_down_oracle_on_sample_tree() {
        let got = System::top_down().oracle(&figure1_tree());
        let want = actions("NT(S) NT(NP) SH SH RE NT(VP) SH NT(ADVP) SH RE NT(ADJP) SH RE RE SH RE");
        assert_eq!(got, want);
    }

    #[test]
    fn in_order_oracle_on_sample_tree() {
        let got = System::in_order().oracle(&figure1_tree());
        let want = actions("SH NT(NP) SH RE NT(S) SH NT(VP) SH NT(ADVP) RE SH NT(ADJP) RE RE SH RE FI");
        assert_eq!(got, want);
    }

    #[test]
    fn oracle_executes_back_to_the_tree() {
        let tree = figure1_tree();
        let sentence = tree.sentence();
        for system in [System::top_down(), System::in_order()] {
            let seq = system.oracle(&tree);
            assert_eq!(system.execute(&sentence, &seq).unwrap(), tree);
        }
    }

    #[test]
    fn refined_oracle_erases_to_plain_oracle() {
        let tree = figure1_tree();
        for system in [System::top_down(), System::in_order()] {
            let refined = system.oracle_refined(&tree, true, &[".", ","]);
            let erased: Vec<Action> = refined.iter().map(Action::erased).collect();
            assert_eq!(erased, system.oracle(&tree));
            assert_eq!(system.execute(&tree.sentence(), &refined).unwrap(), tree);
        }
    }

    #[test]
    fn in_order_reduce_consumes_preceding_element() {
        // After SH NT(NP) the reduce must fold the shifted word in even
        // though nothing sits above the open non-terminal.
        let tree = crate::treebank::parse_tree("(S (NP (DT a)) (VB b))").unwrap();
        let sentence = tree.sentence();
        let sys = System::in_order();
        let mut c = Configuration::initial();
        for (i, a) in actions("SH NT(NP)").iter().enumerate() {
            c = sys.apply(&c, a, &sentence, i).unwrap();
        }
        assert_eq!(c.stack.len(), 2);
        let before = c.stack.len();
        c = sys.apply(&c, &Action::Reduce, &sentence, 2).unwrap();
        assert_eq!(c.stack.len(), before - 1); // two popped, one pushed
        match &c.stack[0] {
            StackItem::Subtree(t) => assert_eq!(t.to_string(), "(NP (DT a))"),
            other => panic!("expected a subtree, got {:?}", other),
        }
    }

    #[test]
    fn top_down_guards() {
        let tree = figure1_tree();
        let sentence = tree.sentence();
        let sys = System::top_down();
        let c0 = Configuration::initial();
        // Nothing but NT is legal initially.
        assert_eq!(sys.legal_kinds(&c0, sentence.len()), vec![ActionKind::OpenNt]);
        // Immediate reduce after NT is blocked (childless constituent).
        let c1 = sys.apply(&c0, &Action::OpenNt("S".into()), &sentence, 0).unwrap();
        assert!(!sys.kind_legal(&c1, ActionKind::Reduce, sentence.len()));
        // Closing the root while words remain is blocked.
        let c2 = sys.apply(&c1, &Action::Shift, &sentence, 1).unwrap();
        assert!(!sys.kind_legal(&c2, ActionKind::Reduce, sentence.len()));
        // Finish never exists in this system.
        assert!(!sys.kind_legal(&c2, ActionKind::Finish, sentence.len()));
    }

    #[test]
    fn in_order_guards() {
        let tree = figure1_tree();
        let sentence = tree.sentence();
        let sys = System::in_order();
        let c0 = Configuration::initial();
        // Only shift is legal initially: no first child exists yet.
        assert_eq!(sys.legal_kinds(&c0, sentence.len()), vec![ActionKind::Shift]);
        // A second floor-level word may not be shifted.
        let one = crate::treebank::parse_tree("(S (DT a) (DT b))").unwrap().sentence();
        let c1 = sys.apply(&c0, &Action::Shift, &one, 0).unwrap();
        let c2 = sys
            .apply(&c1, &Action::OpenNt("NP".into()), &one, 1)
            .unwrap();
        let c3 = sys.apply(&c2, &Action::Reduce, &one, 2).unwrap();
        assert!(!sys.kind_legal(&c3, ActionKind::Shift, one.len()));
        assert!(sys.kind_legal(&c3, ActionKind::OpenNt, one.len()));
    }

    #[test]
    fn unary_cap_blocks_endless_wrapping() {
        let sys = System::in_order().with_limits(10, 2);
        let tree = crate::treebank::parse_tree("(S (DT a))").unwrap();
        let sentence = tree.sentence();
        let mut c = Configuration::initial();
        c = sys.apply(&c, &Action::Shift, &sentence, 0).unwrap();
        for i in 0..2 {
            c = sys
                .apply(&c, &Action::OpenNt("S".into()), &sentence, 2 * i + 1)
                .unwrap();
            c = sys.apply(&c, &Action::Reduce, &sentence, 2 * i + 2).unwrap();
        }
        assert_eq!(c.unary_streak, 2);
        // The cap now forbids opening yet another wrapper.
        assert!(!sys.kind_legal(&c, ActionKind::OpenNt, sentence.len()));
        assert!(sys.kind_legal(&c, ActionKind::Finish, sentence.len()));
    }

    #[test]
    fn lexical_and_label_agreement_is_enforced() {
        let tree = figure1_tree();
        let sentence = tree.sentence();
        let sys = System::in_order();
        let c0 = Configuration::initial();
        assert!(matches!(
            sys.check(&c0, &Action::ShiftLex(".".into()), &sentence, 0),
            Err(IllegalAction::WordMismatch { .. })
        ));
        let c1 = sys.apply(&c0, &Action::Shift, &sentence, 0).unwrap();
        let c2 = sys
            .apply(&c1, &Action::OpenNt("NP".into()), &sentence, 1)
            .unwrap();
        assert!(matches!(
            sys.check(&c2, &Action::ReduceLabeled("VP".into()), &sentence, 2),
            Err(IllegalAction::LabelMismatch { .. })
        ));
        assert!(sys
            .check(&c2, &Action::ReduceLabeled("NP".into()), &sentence, 2)
            .is_ok());
    }

    #[test]
    fn execute_rejects_incomplete_sequences() {
        let tree = figure1_tree();
        let sentence = tree.sentence();
        let sys = System::in_order();
        let mut seq = sys.oracle(&tree);
        seq.pop(); // drop FI
        assert!(matches!(
            sys.execute(&sentence, &seq),
            Err(IllegalAction::NotTerminal { .. })
        ));
    }
}
