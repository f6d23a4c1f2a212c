//! A small path language over labeled trees and its ground-truth evaluator.
//!
//! Grammar (see `docs/path-grammar.md`):
//!
//! ```text
//! query     := ("/" | "//") step (("/" | "//") step)*
//! step      := (NAME | "*") predicate*
//! predicate := "[" relquery "]" | "[@" NAME "=" STRING "]"
//! relquery  := ("." ("/" | "//") step | ("/" | "//")? step) (("/" | "//") step)*
//! ```
//!
//! A query starting with `/` is anchored at the root; one starting with `//`
//! matches anywhere. Steps match element nodes only. Predicates are
//! existential: a branch holds if at least one matching chain exists below
//! the context node, an attribute predicate compares one attribute value
//! for equality.

use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use thiserror::Error;

use crate::doc::{Document, NodeId, NodeKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    Child,
    Descendant,
}

/// Label test of one step.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NameTest {
    Label(String),
    Wildcard,
}

impl NameTest {
    pub fn matches(&self, label: &str) -> bool {
        match self {
            NameTest::Label(want) => want == label,
            NameTest::Wildcard => true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Predicate {
    /// `[./a//b]` and friends: a relative path that must reach some node.
    Branch(Vec<Step>),
    /// `[@name="value"]`.
    AttrEquals { name: String, value: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Step {
    pub axis: Axis,
    pub test: NameTest,
    pub predicates: Vec<Predicate>,
}

/// Parsed path query. The first step's axis is `Child` exactly when the
/// query is anchored.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathQuery {
    pub anchored: bool,
    pub steps: Vec<Step>,
}

impl PathQuery {
    /// Number of child-axis edges the pattern pins down, counting the
    /// root attachment of an anchored query. This is the resolution an
    /// A(k)-index needs to answer the query exactly: `/a` needs k >= 1
    /// (label plus rootness), `//a` needs k >= 0 (label only), `//a/b`
    /// needs k >= 1.
    pub fn pattern_length(&self) -> usize {
        self.steps.iter().filter(|s| s.axis == Axis::Child).count()
    }

    /// True when any step after the first uses the descendant axis. Such a
    /// gap can span arbitrarily many edges, so no finite k makes an
    /// A(k)-index exact for it.
    pub fn has_internal_descendant(&self) -> bool {
        self.steps.iter().skip(1).any(|s| s.axis == Axis::Descendant)
    }

    pub fn has_predicates(&self) -> bool {
        self.steps.iter().any(|s| !s.predicates.is_empty())
    }

    /// The query with all predicates stripped.
    pub fn spine(&self) -> PathQuery {
        self.prefix_spine(self.steps.len() - 1)
    }

    /// Steps `0..=upto` with predicates stripped; used to evaluate the
    /// context set a predicate applies to.
    pub fn prefix_spine(&self, upto: usize) -> PathQuery {
        PathQuery {
            anchored: self.anchored,
            steps: self.steps[..=upto]
                .iter()
                .map(|s| Step {
                    axis: s.axis,
                    test: s.test.clone(),
                    predicates: Vec::new(),
                })
                .collect(),
        }
    }
}

impl core::fmt::Display for PathQuery {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        for step in &self.steps {
            match step.axis {
                Axis::Child => write!(f, "/")?,
                Axis::Descendant => write!(f, "//")?,
            }
            match &step.test {
                NameTest::Label(l) => write!(f, "{l}")?,
                NameTest::Wildcard => write!(f, "*")?,
            }
            for p in &step.predicates {
                match p {
                    Predicate::AttrEquals { name, value } => {
                        write!(f, "[@{name}=\"{value}\"]")?
                    }
                    Predicate::Branch(steps) => {
                        write!(f, "[.")?;
                        for s in steps {
                            match s.axis {
                                Axis::Child => write!(f, "/")?,
                                Axis::Descendant => write!(f, "//")?,
                            }
                            match &s.test {
                                NameTest::Label(l) => write!(f, "{l}")?,
                                NameTest::Wildcard => write!(f, "*")?,
                            }
                            for nested in &s.predicates {
                                match nested {
                                    Predicate::AttrEquals { name, value } => {
                                        write!(f, "[@{name}=\"{value}\"]")?
                                    }
                                    Predicate::Branch(_) => write!(f, "[...]")?,
                                }
                            }
                        }
                        write!(f, "]")?;
                    }
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("path syntax error at offset {position}: {message}")]
pub struct PathSyntaxError {
    pub position: usize,
    pub message: String,
}

/// Parses a query string.
pub fn parse_path(text: &str) -> Result<PathQuery, PathSyntaxError> {
    let mut p = PathParser {
        bytes: text.as_bytes(),
        text,
        pos: 0,
    };
    let q = p.parse_query()?;
    p.skip_ws();
    if p.pos != text.len() {
        return Err(p.err("trailing input after query"));
    }
    Ok(q)
}

struct PathParser<'a> {
    bytes: &'a [u8],
    text: &'a str,
    pos: usize,
}

impl<'a> PathParser<'a> {
    fn err(&self, message: impl Into<String>) -> PathSyntaxError {
        PathSyntaxError {
            position: self.pos,
            message: message.into(),
        }
    }

    fn peek(&self) -> Option<u8> {
        self.bytes.get(self.pos).copied()
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(b' ' | b'\t')) {
            self.pos += 1;
        }
    }

    fn eat(&mut self, b: u8) -> bool {
        if self.peek() == Some(b) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn parse_query(&mut self) -> Result<PathQuery, PathSyntaxError> {
        self.skip_ws();
        if !self.eat(b'/') {
            return Err(self.err("query must start with '/' or '//'"));
        }
        let anchored = !self.eat(b'/');
        let first_axis = if anchored { Axis::Child } else { Axis::Descendant };
        let mut steps = vec![self.parse_step(first_axis)?];
        loop {
            self.skip_ws();
            if !self.eat(b'/') {
                break;
            }
            let axis = if self.eat(b'/') { Axis::Descendant } else { Axis::Child };
            steps.push(self.parse_step(axis)?);
        }
        Ok(PathQuery { anchored, steps })
    }

    fn parse_step(&mut self, axis: Axis) -> Result<Step, PathSyntaxError> {
        self.skip_ws();
        let test = if self.eat(b'*') {
            NameTest::Wildcard
        } else {
            NameTest::Label(self.parse_name()?.to_string())
        };
        let mut predicates = Vec::new();
        loop {
            self.skip_ws();
            if !self.eat(b'[') {
                break;
            }
            predicates.push(self.parse_predicate()?);
        }
        Ok(Step {
            axis,
            test,
            predicates,
        })
    }

    fn parse_predicate(&mut self) -> Result<Predicate, PathSyntaxError> {
        self.skip_ws();
        let pred = if self.eat(b'@') {
            let name = self.parse_name()?.to_string();
            self.skip_ws();
            if !self.eat(b'=') {
                return Err(self.err("expected '=' in attribute predicate"));
            }
            self.skip_ws();
            let value = self.parse_string()?;
            Predicate::AttrEquals { name, value }
        } else {
            Predicate::Branch(self.parse_relquery()?)
        };
        self.skip_ws();
        if !self.eat(b']') {
            return Err(self.err("expected ']' to close predicate"));
        }
        Ok(pred)
    }

    /// Relative path inside a branch predicate. `[c]` means child `c`;
    /// `[./c]`, `[/c]`, `[.//c]` and `[//c]` are also accepted.
    fn parse_relquery(&mut self) -> Result<Vec<Step>, PathSyntaxError> {
        self.skip_ws();
        self.eat(b'.');
        let first_axis = if self.eat(b'/') {
            if self.eat(b'/') {
                Axis::Descendant
            } else {
                Axis::Child
            }
        } else {
            Axis::Child
        };
        let mut steps = vec![self.parse_step(first_axis)?];
        loop {
            self.skip_ws();
            if !self.eat(b'/') {
                break;
            }
            let axis = if self.eat(b'/') { Axis::Descendant } else { Axis::Child };
            steps.push(self.parse_step(axis)?);
        }
        Ok(steps)
    }

    fn parse_name(&mut self) -> Result<&'a str, PathSyntaxError> {
        let start = self.pos;
        let rest = &self.text[self.pos..];
        let mut chars = rest.char_indices();
        match chars.next() {
            Some((_, c)) if c.is_alphanumeric() || c == '_' || c == ':' => {}
            _ => return Err(self.err("expected a name")),
        }
        let end = chars
            .find(|&(_, c)| !(c.is_alphanumeric() || matches!(c, '_' | ':' | '-' | '.')))
            .map(|(i, _)| i)
            .unwrap_or(rest.len());
        self.pos = start + end;
        Ok(&rest[..end])
    }

    fn parse_string(&mut self) -> Result<String, PathSyntaxError> {
        let quote = match self.peek() {
            Some(q @ (b'"' | b'\'')) => q,
            _ => return Err(self.err("expected quoted string")),
        };
        self.pos += 1;
        let start = self.pos;
        while let Some(b) = self.peek() {
            if b == quote {
                let s = self.text[start..self.pos].to_string();
                self.pos += 1;
                return Ok(s);
            }
            self.pos += 1;
        }
        Err(self.err("unterminated string"))
    }
}

// ---------------------------------------------------------------------------
// Ground-truth evaluation by recursive descent over the tree.
// ---------------------------------------------------------------------------

/// Exact matches of `q` in `doc`, by full tree traversal. This is the
/// reference all index-backed evaluation is checked against.
pub fn eval_naive(doc: &Document, q: &PathQuery) -> BTreeSet<NodeId> {
    let mut out = BTreeSet::new();
    if q.steps.is_empty() {
        return out;
    }
    if q.anchored {
        descend(doc, q, 0, doc.root_id(), &mut out);
    } else {
        for n in doc.elements() {
            descend(doc, q, 0, n.id, &mut out);
        }
    }
    out
}

fn descend(doc: &Document, q: &PathQuery, step_idx: usize, node: NodeId, out: &mut BTreeSet<NodeId>) {
    let step = &q.steps[step_idx];
    let n = doc.node(node).expect("valid node id");
    if n.kind != NodeKind::Element || !step.test.matches(&n.label) {
        return;
    }
    if !predicates_hold(doc, node, &step.predicates) {
        return;
    }
    if step_idx + 1 == q.steps.len() {
        out.insert(node);
        return;
    }
    match q.steps[step_idx + 1].axis {
        Axis::Child => {
            for c in doc.element_children(node) {
                descend(doc, q, step_idx + 1, c.id, out);
            }
        }
        Axis::Descendant => {
            for d in descendant_elements(doc, node) {
                descend(doc, q, step_idx + 1, d, out);
            }
        }
    }
}

fn descendant_elements(doc: &Document, node: NodeId) -> Vec<NodeId> {
    let mut out = Vec::new();
    let mut stack: Vec<NodeId> = doc.element_children(node).map(|n| n.id).collect();
    while let Some(id) = stack.pop() {
        out.push(id);
        stack.extend(doc.element_children(id).map(|n| n.id));
    }
    out
}

fn predicates_hold(doc: &Document, node: NodeId, preds: &[Predicate]) -> bool {
    preds.iter().all(|p| match p {
        Predicate::AttrEquals { name, value } => {
            doc.attribute(node, name) == Some(value.as_str())
        }
        Predicate::Branch(steps) => branch_exists(doc, node, steps, 0),
    })
}

fn branch_exists(doc: &Document, ctx: NodeId, steps: &[Step], idx: usize) -> bool {
    let step = &steps[idx];
    let candidates: Vec<NodeId> = match step.axis {
        Axis::Child => doc.element_children(ctx).map(|n| n.id).collect(),
        Axis::Descendant => descendant_elements(doc, ctx),
    };
    for cand in candidates {
        let n = doc.node(cand).expect("valid node id");
        if !step.test.matches(&n.label) || !predicates_hold(doc, cand, &step.predicates) {
            continue;
        }
        if idx + 1 == steps.len() || branch_exists(doc, cand, steps, idx + 1) {
            return true;
        }
    }
    false
}

// ---------------------------------------------------------------------------
// Candidate validation by upward label-path matching.
// ---------------------------------------------------------------------------

/// True when `node` matches `q`, decided from the node's ancestor chain
/// rather than a root-down search. On a tree the chain is unique, so this
/// agrees with [`eval_naive`] membership.
pub fn matches_at(doc: &Document, q: &PathQuery, node: NodeId) -> bool {
    let n = match doc.node(node) {
        Some(n) if n.kind == NodeKind::Element => n,
        _ => return false,
    };
    // Chain of node ids from root down to `node`.
    let mut chain = Vec::new();
    chain.push(n.id);
    let mut cur = n.parent;
    while let Some(p) = cur {
        chain.push(p);
        cur = doc.node(p).expect("valid parent").parent;
    }
    chain.reverse();
    align(doc, q, &chain, q.steps.len() - 1, chain.len() - 1)
}

/// Can steps `0..=si` match the chain with step `si` placed at `chain[pi]`?
fn align(doc: &Document, q: &PathQuery, chain: &[NodeId], si: usize, pi: usize) -> bool {
    let step = &q.steps[si];
    let node = doc.node(chain[pi]).expect("valid chain node");
    if !step.test.matches(&node.label) || !predicates_hold(doc, chain[pi], &step.predicates) {
        return false;
    }
    if si == 0 {
        return if q.anchored { pi == 0 } else { true };
    }
    if pi == 0 {
        return false;
    }
    match step.axis {
        Axis::Child => align(doc, q, chain, si - 1, pi - 1),
        Axis::Descendant => (0..pi).any(|pj| align(doc, q, chain, si - 1, pj)),
    }
}

/// Filters `candidates` down to the true matches of `q`. Unknown node ids
/// are dropped. For an inexact A(k) candidate set this restores the exact
/// answer: the result equals `eval_naive(doc, q)` intersected with
/// `candidates`.
pub fn validate_candidates(
    doc: &Document,
    q: &PathQuery,
    candidates: &BTreeSet<NodeId>,
) -> BTreeSet<NodeId> {
    candidates
        .iter()
        .copied()
        .filter(|&id| matches_at(doc, q, id))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_document;

    fn ids(doc: &Document, label: &str) -> BTreeSet<NodeId> {
        doc.elements()
            .filter(|n| n.label == label)
            .map(|n| n.id)
            .collect()
    }

    #[test]
    fn parse_anchored() {
        let q = parse_path("/a/b").unwrap();
        assert!(q.anchored);
        assert_eq!(q.steps.len(), 2);
        assert_eq!(q.steps[0].axis, Axis::Child);
        assert_eq!(q.steps[0].test, NameTest::Label("a".into()));
        assert_eq!(q.steps[1].test, NameTest::Label("b".into()));
        assert_eq!(q.to_string(), "/a/b");
    }

    #[test]
    fn parse_unanchored_descendant() {
        let q = parse_path("//c").unwrap();
        assert!(!q.anchored);
        assert_eq!(q.steps[0].axis, Axis::Descendant);
        assert_eq!(q.pattern_length(), 0);
    }

    #[test]
    fn parse_twig_with_branch() {
        let q = parse_path("/a/b[.//d]/c").unwrap();
        assert_eq!(q.steps.len(), 3);
        assert_eq!(q.steps[1].predicates.len(), 1);
        match &q.steps[1].predicates[0] {
            Predicate::Branch(steps) => {
                assert_eq!(steps.len(), 1);
                assert_eq!(steps[0].axis, Axis::Descendant);
            }
            other => panic!("unexpected predicate {other:?}"),
        }
    }

    #[test]
    fn parse_bare_branch_and_attr() {
        let q = parse_path("/a/b[c][@x=\"1\"]").unwrap();
        assert_eq!(q.steps[1].predicates.len(), 2);
        match &q.steps[1].predicates[0] {
            Predicate::Branch(steps) => assert_eq!(steps[0].axis, Axis::Child),
            other => panic!("unexpected predicate {other:?}"),
        }
        match &q.steps[1].predicates[1] {
            Predicate::AttrEquals { name, value } => {
                assert_eq!(name, "x");
                assert_eq!(value, "1");
            }
            other => panic!("unexpected predicate {other:?}"),
        }
    }

    #[test]
    fn parse_errors_carry_position() {
        let err = parse_path("/a/[b]").unwrap_err();
        assert!(err.position > 0);
        assert!(parse_path("a/b").is_err());
        assert!(parse_path("/a/b[").is_err());
        assert!(parse_path("/a/b]").is_err());
    }

    #[test]
    fn pattern_length_counts_child_edges() {
        assert_eq!(parse_path("/a").unwrap().pattern_length(), 1);
        assert_eq!(parse_path("/a/b").unwrap().pattern_length(), 2);
        assert_eq!(parse_path("//b/c").unwrap().pattern_length(), 1);
        assert_eq!(parse_path("//a/b/c/d").unwrap().pattern_length(), 3);
        assert!(!parse_path("//b/c").unwrap().has_internal_descendant());
        assert!(parse_path("//b//c").unwrap().has_internal_descendant());
    }

    #[test]
    fn eval_anchored_child() {
        let doc = parse_document(b"<a><b/><b/><c/></a>", 0).unwrap();
        let q = parse_path("/a/b").unwrap();
        assert_eq!(eval_naive(&doc, &q), ids(&doc, "b"));
    }

    #[test]
    fn eval_missing_label_is_empty() {
        let doc = parse_document(b"<a><b/></a>", 0).unwrap();
        let q = parse_path("//z").unwrap();
        assert!(eval_naive(&doc, &q).is_empty());
    }

    #[test]
    fn eval_descendant_includes_root() {
        let doc = parse_document(b"<c><c/></c>", 0).unwrap();
        let q = parse_path("//c").unwrap();
        assert_eq!(eval_naive(&doc, &q).len(), 2);
    }

    #[test]
    fn eval_branch_predicate() {
        let doc = parse_document(b"<a><b><c/></b><b/></a>", 0).unwrap();
        let q = parse_path("/a/b[c]").unwrap();
        let got = eval_naive(&doc, &q);
        assert_eq!(got.len(), 1);
        let b_with_c = *got.iter().next().unwrap();
        assert!(doc.element_children(b_with_c).any(|n| n.label == "c"));
    }

    #[test]
    fn eval_attr_predicate() {
        let doc = parse_document(b"<a><b x=\"1\"/><b x=\"2\"/></a>", 0).unwrap();
        let q = parse_path("/a/b[@x=\"2\"]").unwrap();
        let got = eval_naive(&doc, &q);
        assert_eq!(got.len(), 1);
        assert_eq!(doc.attribute(*got.iter().next().unwrap(), "x"), Some("2"));
    }

    #[test]
    fn validate_filters_to_truth() {
        let doc = parse_document(b"<a><b><c/></b><d><c/></d></a>", 0).unwrap();
        let q = parse_path("/a/b/c").unwrap();
        let all_c = ids(&doc, "c");
        assert_eq!(all_c.len(), 2);
        let validated = validate_candidates(&doc, &q, &all_c);
        assert_eq!(validated, eval_naive(&doc, &q));
        assert_eq!(validated.len(), 1);
        // Idempotent on exact sets, empty on empty.
        assert_eq!(validate_candidates(&doc, &q, &validated), validated);
        assert!(validate_candidates(&doc, &q, &BTreeSet::new()).is_empty());
    }
}
