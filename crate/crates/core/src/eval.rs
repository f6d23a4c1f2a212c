//! Query evaluation over summary graphs.
//!
//! Simple paths are answered by navigating the summary alone and unioning
//! extents. DataGuide and 1-index answers are exact on tree documents; an
//! A(k) answer is exact only while the pattern stays within the index
//! resolution, otherwise it is a candidate superset that
//! [`crate::path::validate_candidates`] can reduce to the truth.
//!
//! Branching (twig) queries cannot be answered by a summary alone: each
//! simple root-to-context path is evaluated on the summary, then the pieces
//! are stitched back together with structural joins on region codes.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use crate::doc::{Document, NodeId};
use crate::join::{parent_child_join, structural_join, NodeList};
use crate::path::{validate_candidates, Axis, PathQuery, Predicate, Step};
use crate::region::{assign_regions, RegionMap};
use crate::summary::{SummaryGraph, SummaryKind};

/// Candidate node set plus the exactness promise that comes with it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SummaryAnswer {
    pub candidates: BTreeSet<NodeId>,
    /// When true the candidates are the exact answer; when false they are
    /// a superset that still needs validation against the data.
    pub exact: bool,
}

/// Answers a predicate-free path query from the summary graph alone.
///
/// Panics if `q` carries predicates; twigs go through [`eval_twig`].
pub fn eval_on_summary(idx: &SummaryGraph, q: &PathQuery) -> SummaryAnswer {
    assert!(
        !q.has_predicates(),
        "eval_on_summary takes simple paths; use eval_twig for predicates"
    );
    let frontier = navigate(idx, &q.steps, q.anchored, &idx.root_sids);
    let mut candidates = BTreeSet::new();
    for sid in &frontier {
        candidates.extend(idx.nodes[*sid].extent.iter().copied());
    }
    SummaryAnswer {
        candidates,
        exact: answer_is_exact(idx, q),
    }
}

fn answer_is_exact(idx: &SummaryGraph, q: &PathQuery) -> bool {
    match idx.kind {
        SummaryKind::DataGuide | SummaryKind::OneIndex => true,
        SummaryKind::AK => {
            !q.has_internal_descendant()
                && q.pattern_length() <= idx.k.unwrap_or(0) as usize
        }
    }
}

/// Walks the summary graph step by step, returning the final frontier of
/// summary node ids.
fn navigate(
    idx: &SummaryGraph,
    steps: &[Step],
    anchored: bool,
    root_sids: &[usize],
) -> BTreeSet<usize> {
    let mut frontier: BTreeSet<usize> = if anchored {
        root_sids
            .iter()
            .copied()
            .filter(|&sid| steps[0].test.matches(&idx.nodes[sid].label))
            .collect()
    } else {
        // Leading descendant axis: anywhere in the document, root included.
        idx.nodes
            .iter()
            .filter(|n| steps[0].test.matches(&n.label))
            .map(|n| n.sid)
            .collect()
    };

    for step in &steps[1..] {
        let mut next = BTreeSet::new();
        match step.axis {
            Axis::Child => {
                for &sid in &frontier {
                    for &c in &idx.nodes[sid].child_sids {
                        if step.test.matches(&idx.nodes[c].label) {
                            next.insert(c);
                        }
                    }
                }
            }
            Axis::Descendant => {
                for sid in reachable(idx, &frontier) {
                    if step.test.matches(&idx.nodes[sid].label) {
                        next.insert(sid);
                    }
                }
            }
        }
        frontier = next;
        if frontier.is_empty() {
            break;
        }
    }
    frontier
}

/// Summary nodes reachable from `from` via one or more edges.
fn reachable(idx: &SummaryGraph, from: &BTreeSet<usize>) -> BTreeSet<usize> {
    let mut seen = BTreeSet::new();
    let mut stack: Vec<usize> = Vec::new();
    for &sid in from {
        stack.extend(idx.nodes[sid].child_sids.iter().copied());
    }
    while let Some(sid) = stack.pop() {
        if seen.insert(sid) {
            stack.extend(idx.nodes[sid].child_sids.iter().copied());
        }
    }
    seen
}

/// Exact matches of a simple path: summary answer, validated if inexact.
fn exact_simple(doc: &Document, idx: &SummaryGraph, q: &PathQuery) -> BTreeSet<NodeId> {
    let answer = eval_on_summary(idx, q);
    if answer.exact {
        answer.candidates
    } else {
        validate_candidates(doc, q, &answer.candidates)
    }
}

/// Evaluates a branching query: the spine and every branch are answered as
/// simple paths on the summary, then recombined with structural joins over
/// region codes. Predicates are existential, so each join is used as a
/// semi-join keeping the ancestor side.
pub fn eval_twig(doc: &Document, idx: &SummaryGraph, q: &PathQuery) -> BTreeSet<NodeId> {
    debug_assert_eq!(
        doc.content_hash(),
        idx.doc_hash,
        "summary was built from a different document"
    );
    let regions = assign_regions(doc);

    let mut ctx = exact_simple(doc, idx, &q.prefix_spine(0));
    ctx = apply_predicates(doc, idx, &regions, q, 0, ctx);
    for i in 1..q.steps.len() {
        let matches = exact_simple(doc, idx, &q.prefix_spine(i));
        ctx = connect(&regions, &ctx, &matches, q.steps[i].axis, Side::Descendants);
        ctx = apply_predicates(doc, idx, &regions, q, i, ctx);
        if ctx.is_empty() {
            break;
        }
    }
    ctx
}

enum Side {
    Ancestors,
    Descendants,
}

/// Joins `left` (ancestor side) with `right` (descendant side) and keeps
/// the requested side of the surviving pairs.
fn connect(
    regions: &RegionMap,
    ancestors: &BTreeSet<NodeId>,
    descendants: &BTreeSet<NodeId>,
    axis: Axis,
    keep: Side,
) -> BTreeSet<NodeId> {
    let a_list = NodeList::from_ids(regions, ancestors.iter().copied());
    let d_list = NodeList::from_ids(regions, descendants.iter().copied());
    let pairs = match axis {
        Axis::Child => parent_child_join(&a_list, &d_list),
        Axis::Descendant => structural_join(&a_list, &d_list),
    }
    .expect("same-document sorted lists");
    match keep {
        Side::Ancestors => pairs.into_iter().map(|(a, _)| a).collect(),
        Side::Descendants => pairs.into_iter().map(|(_, d)| d).collect(),
    }
}

/// Filters `ctx` by the predicates of spine step `i`.
fn apply_predicates(
    doc: &Document,
    idx: &SummaryGraph,
    regions: &RegionMap,
    q: &PathQuery,
    i: usize,
    mut ctx: BTreeSet<NodeId>,
) -> BTreeSet<NodeId> {
    for pred in &q.steps[i].predicates {
        if ctx.is_empty() {
            break;
        }
        match pred {
            Predicate::AttrEquals { name, value } => {
                ctx.retain(|&n| doc.attribute(n, name) == Some(value.as_str()));
            }
            Predicate::Branch(branch) => {
                let ctx_path = q.prefix_spine(i);
                ctx = filter_by_branch(doc, idx, regions, &ctx_path, branch, ctx);
            }
        }
    }
    ctx
}

/// Keeps the context nodes that can reach a full chain through `branch`.
/// Works backward: the deepest branch step's match set is narrowed level by
/// level with semi-joins until it constrains the context itself. The
/// context is identified by its stripped root-to-context path `ctx_path`.
fn filter_by_branch(
    doc: &Document,
    idx: &SummaryGraph,
    regions: &RegionMap,
    ctx_path: &PathQuery,
    branch: &[Step],
    ctx: BTreeSet<NodeId>,
) -> BTreeSet<NodeId> {
    // Match sets of the root-to-branch-step simple paths.
    let mut level_sets: Vec<BTreeSet<NodeId>> = Vec::with_capacity(branch.len());
    for j in 0..branch.len() {
        let mut path = ctx_path.clone();
        path.steps.extend(branch[..=j].iter().map(|s| Step {
            axis: s.axis,
            test: s.test.clone(),
            predicates: Vec::new(),
        }));
        let mut set = exact_simple(doc, idx, &path);
        // Predicates nested on the branch step filter its own set.
        for pred in &branch[j].predicates {
            match pred {
                Predicate::AttrEquals { name, value } => {
                    set.retain(|&n| doc.attribute(n, name) == Some(value.as_str()));
                }
                Predicate::Branch(nested) => {
                    set = filter_by_branch(doc, idx, regions, &path, nested, set);
                }
            }
        }
        level_sets.push(set);
    }

    // Narrow from the leaf up, then constrain the context.
    let mut survivors = level_sets.pop().expect("branch is non-empty");
    for j in (0..level_sets.len()).rev() {
        survivors = connect(
            regions,
            &level_sets[j],
            &survivors,
            branch[j + 1].axis,
            Side::Ancestors,
        );
    }
    connect(regions, &ctx, &survivors, branch[0].axis, Side::Ancestors)
}
