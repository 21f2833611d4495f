//! Reading and writing bracketed treebank files.
//!
//! The on-disk format is the classic bracketed one: `(S (NP (DT The) ...))`.
//! Files may hold one tree per line or span trees over several lines; the
//! reader detects which by scanning for balanced top-level groups. Parse
//! errors carry the byte offset where scanning failed.

use std::fs;
use std::path::Path;

use crate::tree::Tree;

/// Replaces raw parentheses in a token by their PTB escape codes.
pub fn escape_token(token: &str) -> String {
    if token.contains('(') || token.contains(')') {
        token.replace('(', "-LRB-").replace(')', "-RRB-")
    } else {
        token.to_string()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("byte {offset}: expected '(' but found {found:?}")]
    ExpectedOpen { offset: usize, found: String },
    #[error("byte {offset}: unbalanced brackets, {missing} unclosed '('")]
    Unbalanced { offset: usize, missing: usize },
    #[error("byte {offset}: unexpected ')'")]
    UnexpectedClose { offset: usize },
    #[error("byte {offset}: node {label:?} has no children")]
    EmptyNode { offset: usize, label: String },
    #[error("byte {offset}: bare token {token:?} among tree-valued siblings")]
    MixedChildren { offset: usize, token: String },
    #[error("byte {offset}: leaf node {pos:?} must contain exactly one token")]
    BadLeaf { offset: usize, pos: String },
    #[error("no tree found in input")]
    Empty,
    #[error("tree vanished entirely under trace removal")]
    AllTraces,
}

/// One token of the bracketed format.
#[derive(Debug, PartialEq, Eq)]
enum BracketToken {
    Open(usize),
    Close(usize),
    Atom(usize, String),
}

fn lex(input: &str) -> Vec<BracketToken> {
    let mut out = Vec::new();
    let bytes = input.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        match bytes[i] {
            b'(' => {
                out.push(BracketToken::Open(i));
                i += 1;
            }
            b')' => {
                out.push(BracketToken::Close(i));
                i += 1;
            }
            c if c.is_ascii_whitespace() => i += 1,
            _ => {
                let start = i;
                while i < bytes.len()
                    && !bytes[i].is_ascii_whitespace()
                    && bytes[i] != b'('
                    && bytes[i] != b')'
                {
                    i += 1;
                }
                out.push(BracketToken::Atom(start, input[start..i].to_string()));
            }
        }
    }
    out
}

/// Raw parse node before leaves are folded.
#[derive(Debug)]
enum RawNode {
    Group {
        offset: usize,
        label: String,
        children: Vec<RawNode>,
    },
    Token {
        offset: usize,
        text: String,
    },
}

fn parse_group(tokens: &[BracketToken], pos: &mut usize) -> Result<RawNode, ParseError> {
    let open_offset = match tokens.get(*pos) {
        Some(BracketToken::Open(o)) => *o,
        Some(BracketToken::Close(o)) => return Err(ParseError::UnexpectedClose { offset: *o }),
        Some(BracketToken::Atom(o, t)) => {
            return Err(ParseError::ExpectedOpen {
                offset: *o,
                found: t.clone(),
            })
        }
        None => return Err(ParseError::Empty),
    };
    *pos += 1;
    // An optional label right after '('; PTB top wrappers omit it.
    let label = match tokens.get(*pos) {
        Some(BracketToken::Atom(_, t)) => {
            *pos += 1;
            t.clone()
        }
        _ => String::new(),
    };
    let mut children = Vec::new();
    loop {
        match tokens.get(*pos) {
            Some(BracketToken::Close(_)) => {
                *pos += 1;
                return Ok(RawNode::Group {
                    offset: open_offset,
                    label,
                    children,
                });
            }
            Some(BracketToken::Open(_)) => match parse_group(tokens, pos) {
                Ok(child) => children.push(child),
                // Count this frame's own unclosed bracket on the way out.
                Err(ParseError::Unbalanced { offset, missing }) => {
                    return Err(ParseError::Unbalanced {
                        offset,
                        missing: missing + 1,
                    })
                }
                Err(e) => return Err(e),
            },
            Some(BracketToken::Atom(o, t)) => {
                children.push(RawNode::Token {
                    offset: *o,
                    text: t.clone(),
                });
                *pos += 1;
            }
            None => {
                return Err(ParseError::Unbalanced {
                    offset: open_offset,
                    missing: 1,
                })
            }
        }
    }
}

/// Folds a raw node into a [`Tree`]: a group whose single child is a bare
/// token becomes a leaf with the group label as its POS tag.
fn fold(node: RawNode) -> Result<Tree, ParseError> {
    match node {
        RawNode::Token { offset, text } => Err(ParseError::MixedChildren {
            offset,
            token: text,
        }),
        RawNode::Group {
            offset,
            label,
            children,
        } => {
            if children.is_empty() {
                return Err(ParseError::EmptyNode { offset, label });
            }
            if children.len() == 1 {
                if let RawNode::Token { text, .. } = &children[0] {
                    return Ok(Tree::leaf(text.clone(), label));
                }
            }
            if children.iter().any(|c| matches!(c, RawNode::Token { .. })) && children.len() > 1 {
                // More than one child and at least one bare token: a POS
                // group must hold exactly one token, anything else is mixed.
                if children.len() == children
                    .iter()
                    .filter(|c| matches!(c, RawNode::Token { .. }))
                    .count()
                {
                    return Err(ParseError::BadLeaf { offset, pos: label });
                }
                let bad = children
                    .iter()
                    .find_map(|c| match c {
                        RawNode::Token { offset, text } => Some((*offset, text.clone())),
                        _ => None,
                    })
                    .expect("just checked there is a token child");
                return Err(ParseError::MixedChildren {
                    offset: bad.0,
                    token: bad.1,
                });
            }
            let children = children
                .into_iter()
                .map(fold)
                .collect::<Result<Vec<_>, _>>()?;
            Ok(Tree::NonTerminal { label, children })
        }
    }
}

/// Parses a single bracketed tree. An unlabeled singleton wrapper, as in PTB
/// files (`( (S ...) )`), is stripped.
pub fn parse_tree(input: &str) -> Result<Tree, ParseError> {
    let tokens = lex(input);
    let mut pos = 0;
    let raw = parse_group(&tokens, &mut pos)?;
    if let Some(BracketToken::Open(o) | BracketToken::Close(o)) = tokens.get(pos) {
        return Err(ParseError::UnexpectedClose { offset: *o });
    }
    if let Some(BracketToken::Atom(o, t)) = tokens.get(pos) {
        return Err(ParseError::ExpectedOpen {
            offset: *o,
            found: t.clone(),
        });
    }
    let raw = match raw {
        RawNode::Group {
            label, children, ..
        } if label.is_empty() && children.len() == 1 => children.into_iter().next().unwrap(),
        other => other,
    };
    fold(raw)
}

/// Serializes a tree to its single-line bracketed form.
pub fn serialize_tree(tree: &Tree) -> String {
    tree.to_string()
}

/// Splits input into balanced top-level bracket groups, returning each
/// group's text and starting byte offset.
fn split_top_level(input: &str) -> Result<Vec<(usize, &str)>, ParseError> {
    let bytes = input.as_bytes();
    let mut groups = Vec::new();
    let mut depth = 0usize;
    let mut start = 0usize;
    for (i, &b) in bytes.iter().enumerate() {
        match b {
            b'(' => {
                if depth == 0 {
                    start = i;
                }
                depth += 1;
            }
            b')' => {
                if depth == 0 {
                    return Err(ParseError::UnexpectedClose { offset: i });
                }
                depth -= 1;
                if depth == 0 {
                    groups.push((start, &input[start..=i]));
                }
            }
            c if c.is_ascii_whitespace() => {}
            _ if depth == 0 => {
                let end = input[i..]
                    .find(|c: char| c.is_ascii_whitespace() || c == '(' || c == ')')
                    .map_or(input.len(), |j| i + j);
                return Err(ParseError::ExpectedOpen {
                    offset: i,
                    found: input[i..end].to_string(),
                });
            }
            _ => {}
        }
    }
    if depth > 0 {
        return Err(ParseError::Unbalanced {
            offset: start,
            missing: depth,
        });
    }
    Ok(groups)
}

/// Parses a whole treebank: any number of trees, one per line or spread over
/// several lines. Errors name the byte offset of the offending tree.
pub fn parse_treebank(input: &str) -> Result<Vec<Tree>, ParseError> {
    let mut trees = Vec::new();
    for (offset, text) in split_top_level(input)? {
        let tree = parse_tree(text).map_err(|e| shift_offset(e, offset))?;
        trees.push(tree);
    }
    Ok(trees)
}

fn shift_offset(e: ParseError, by: usize) -> ParseError {
    match e {
        ParseError::ExpectedOpen { offset, found } => ParseError::ExpectedOpen {
            offset: offset + by,
            found,
        },
        ParseError::Unbalanced { offset, missing } => ParseError::Unbalanced {
            offset: offset + by,
            missing,
        },
        ParseError::UnexpectedClose { offset } => {
            ParseError::UnexpectedClose { offset: offset + by }
        }
        ParseError::EmptyNode { offset, label } => ParseError::EmptyNode {
            offset: offset + by,
            label,
        },
        ParseError::MixedChildren { offset, token } => ParseError::MixedChildren {
            offset: offset + by,
            token,
        },
        ParseError::BadLeaf { offset, pos } => ParseError::BadLeaf {
            offset: offset + by,
            pos,
        },
        other => other,
    }
}

/// Reads and parses a treebank file.
pub fn read_treebank(path: &Path) -> Result<Vec<Tree>, TreebankError> {
    let text = fs::read_to_string(path).map_err(|e| TreebankError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    let trees = parse_treebank(&text).map_err(|source| TreebankError::Parse {
        path: path.display().to_string(),
        source,
    })?;
    Ok(trees)
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TreebankError {
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("{path}: {source}")]
    Parse {
        path: String,
        source: ParseError,
    },
}

/// Strips PTB function tags and coindexing suffixes from a non-terminal
/// label: everything from the first `-` or `=` on is dropped. Labels that
/// *start* with `-` (such as `-NONE-` or `-LRB-`) are left alone.
pub fn strip_function_tags(label: &str) -> &str {
    if label.starts_with('-') {
        return label;
    }
    match label.find(['-', '=']) {
        Some(i) => &label[..i],
        None => label,
    }
}

const TRACE_POS: &str = "-NONE-";

/// Normalizes a raw PTB tree for training and evaluation: removes trace
/// leaves (POS `-NONE-`) together with any non-terminals emptied by their
/// removal, and strips function tags from the surviving labels.
pub fn preprocess(tree: &Tree) -> Result<Tree, ParseError> {
    match preprocess_node(tree) {
        Some(t) if !t.is_leaf() => Ok(t),
        Some(_) => Err(ParseError::AllTraces),
        None => Err(ParseError::AllTraces),
    }
}

fn preprocess_node(tree: &Tree) -> Option<Tree> {
    match tree {
        Tree::Leaf { word, pos } => {
            if pos == TRACE_POS {
                None
            } else {
                Some(Tree::leaf(word.clone(), pos.clone()))
            }
        }
        Tree::NonTerminal { label, children } => {
            let kept: Vec<Tree> = children.iter().filter_map(preprocess_node).collect();
            if kept.is_empty() {
                return None;
            }
            Some(Tree::NonTerminal {
                label: strip_function_tags(label).to_string(),
                children: kept,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const FIGURE_LINE: &str =
        "(S (NP (DT The) (NN public)) (VP (VBZ is) (ADVP (RB still)) (ADJP (JJ cautious))) (. .))";

    #[test]
    fn parse_then_serialize_is_identity_on_canonical_text() {
        let tree = parse_tree(FIGURE_LINE).unwrap();
        assert_eq!(serialize_tree(&tree), FIGURE_LINE);
    }

    #[test]
    fn parse_folds_preterminals_into_leaves() {
        let tree = parse_tree(FIGURE_LINE).unwrap();
        match &tree {
            Tree::NonTerminal { label, children } => {
                assert_eq!(label, "S");
                assert_eq!(children.len(), 3);
                assert_eq!(children[2], Tree::leaf(".", "."));
            }
            _ => panic!("expected a non-terminal root"),
        }
    }

    #[test]
    fn whitespace_is_insignificant() {
        let spread = "(S\n  (NP (DT The)\n      (NN public))\n  (VP (VBZ is)\n      (ADVP (RB still))\n      (ADJP (JJ cautious)))\n  (. .))";
        assert_eq!(parse_tree(spread).unwrap(), parse_tree(FIGURE_LINE).unwrap());
    }

    #[test]
    fn ptb_top_wrapper_is_stripped() {
        let wrapped = format!("( {} )", FIGURE_LINE);
        assert_eq!(parse_tree(&wrapped).unwrap(), parse_tree(FIGURE_LINE).unwrap());
    }

    #[test]
    fn errors_carry_byte_offsets() {
        match parse_tree("(S (NP (DT The)") {
            Err(ParseError::Unbalanced { missing, .. }) => assert_eq!(missing, 2),
            other => panic!("expected Unbalanced, got {:?}", other),
        }
        match parse_tree("(S (NP) (VP (V x)))") {
            Err(ParseError::EmptyNode { offset, label }) => {
                assert_eq!(label, "NP");
                assert_eq!(offset, 3);
            }
            other => panic!("expected EmptyNode, got {:?}", other),
        }
        match parse_tree("(S (NP oops (DT The)))") {
            Err(ParseError::MixedChildren { token, .. }) => assert_eq!(token, "oops"),
            other => panic!("expected MixedChildren, got {:?}", other),
        }
    }

    #[test]
    fn treebank_multi_line_and_single_line_agree() {
        let one_per_line = format!("{}\n{}\n", FIGURE_LINE, FIGURE_LINE);
        let spread = format!(
            "(S\n (NP (DT The) (NN public))\n (VP (VBZ is) (ADVP (RB still)) (ADJP (JJ cautious)))\n (. .))\n{}",
            FIGURE_LINE
        );
        let a = parse_treebank(&one_per_line).unwrap();
        let b = parse_treebank(&spread).unwrap();
        assert_eq!(a.len(), 2);
        assert_eq!(a, b);
    }

    #[test]
    fn treebank_error_offset_is_file_relative() {
        let text = format!("{}\n(S (NP) (V x))", FIGURE_LINE);
        match parse_treebank(&text) {
            Err(ParseError::EmptyNode { offset, .. }) => {
                assert_eq!(&text[offset..offset + 3], "(NP");
                assert!(offset > FIGURE_LINE.len());
            }
            other => panic!("expected EmptyNode, got {:?}", other),
        }
    }

    #[test]
    fn serialization_escapes_raw_parens_in_words() {
        let tree = Tree::non_terminal("S", vec![Tree::leaf("(", "-LRB-"), Tree::leaf("a", "DT")]);
        let line = serialize_tree(&tree);
        assert_eq!(line, "(S (-LRB- -LRB-) (DT a))");
        // And the escaped form parses back cleanly (escape codes stay as-is).
        let back = parse_tree(&line).unwrap();
        assert_eq!(
            back,
            Tree::non_terminal("S", vec![Tree::leaf("-LRB-", "-LRB-"), Tree::leaf("a", "DT")])
        );
    }

    #[test]
    fn function_tag_stripping() {
        assert_eq!(strip_function_tags("NP-SBJ"), "NP");
        assert_eq!(strip_function_tags("NP-SBJ-1"), "NP");
        assert_eq!(strip_function_tags("NP=2"), "NP");
        assert_eq!(strip_function_tags("NP"), "NP");
        assert_eq!(strip_function_tags("-NONE-"), "-NONE-");
        assert_eq!(strip_function_tags("-LRB-"), "-LRB-");
    }

    #[test]
    fn preprocess_removes_traces_and_cascades() {
        let raw = parse_tree(
            "(S (NP-SBJ-1 (DT The) (NN public)) (VP (VBZ is) (NP (-NONE- *T*-1))) (. .))",
        )
        .unwrap();
        let clean = preprocess(&raw).unwrap();
        assert_eq!(
            serialize_tree(&clean),
            "(S (NP (DT The) (NN public)) (VP (VBZ is)) (. .))"
        );
    }

    #[test]
    fn preprocess_rejects_all_trace_tree() {
        let raw = parse_tree("(S (NP (-NONE- *)))").unwrap();
        assert_eq!(preprocess(&raw), Err(ParseError::AllTraces));
    }

    #[test]
    fn garbage_between_trees_is_an_error() {
        assert!(matches!(
            parse_treebank("(S (DT a)) stray (S (DT b))"),
            Err(ParseError::ExpectedOpen { .. })
        ));
    }
}
