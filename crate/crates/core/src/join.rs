//! Start-sorted interval index and stack-based structural joins.
//!
//! The access path is one sorted array on the start coordinate: range scans
//! give descendants, a backward scan gives ancestors, and a single forward
//! merge with a stack of open intervals joins two node lists in
//! `O(|A| + |D| + |result|)`.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use thiserror::Error;

use crate::doc::{Document, NodeId, NodeKind};
use crate::region::{RegionCode, RegionMap};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum JoinError {
    #[error("inputs come from different documents ({left} vs {right})")]
    CrossDocument { left: u32, right: u32 },
    #[error("input list is not strictly sorted by start at index {index}")]
    UnsortedInput { index: usize },
}

/// Ancestorship test on region codes: strict interval containment.
pub fn is_ancestor(a: &RegionCode, d: &RegionCode) -> Result<bool, JoinError> {
    if a.doc_id != d.doc_id {
        return Err(JoinError::CrossDocument {
            left: a.doc_id,
            right: d.doc_id,
        });
    }
    Ok(a.start < d.start && d.end < a.end)
}

/// One indexed element.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IndexEntry {
    pub start: u32,
    pub end: u32,
    pub level: u32,
    pub node: NodeId,
}

/// Sorted interval index over the element nodes of one document,
/// optionally restricted to one label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntervalIndex {
    doc_id: u32,
    label: Option<String>,
    entries: Vec<IndexEntry>,
}

/// Builds the index for all element nodes, or only those with `label`.
/// Entries are sorted by start, which is document order.
pub fn build_interval_index(
    doc: &Document,
    regions: &RegionMap,
    label: Option<&str>,
) -> IntervalIndex {
    let mut entries: Vec<IndexEntry> = doc
        .elements()
        .filter(|n| label.is_none_or(|l| n.label == l))
        .map(|n| {
            let code = regions[n.id];
            IndexEntry {
                start: code.start,
                end: code.end,
                level: code.level,
                node: n.id,
            }
        })
        .collect();
    entries.sort_unstable_by_key(|e| e.start);
    IntervalIndex {
        doc_id: doc.doc_id(),
        label: label.map(|l| l.to_string()),
        entries,
    }
}

impl IntervalIndex {
    pub fn doc_id(&self) -> u32 {
        self.doc_id
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[IndexEntry] {
        &self.entries
    }

    fn check_doc(&self, code: &RegionCode) -> Result<(), JoinError> {
        if code.doc_id != self.doc_id {
            return Err(JoinError::CrossDocument {
                left: self.doc_id,
                right: code.doc_id,
            });
        }
        Ok(())
    }

    /// All indexed proper descendants of `a`: entries with start inside
    /// `(a.start, a.end)`. Laminarity makes the end check redundant on tree
    /// documents, which the test suite asserts separately.
    pub fn find_descendants(&self, a: &RegionCode) -> Result<NodeList, JoinError> {
        self.check_doc(a)?;
        let from = self.entries.partition_point(|e| e.start <= a.start);
        let mut items = Vec::new();
        for e in &self.entries[from..] {
            if e.start >= a.end {
                break;
            }
            items.push(self.entry_to_item(e));
        }
        Ok(NodeList {
            doc_id: Some(self.doc_id),
            items,
        })
    }

    /// All indexed proper ancestors of `d`: a backward scan over entries
    /// starting before `d`, keeping those that also end after it.
    pub fn find_ancestors(&self, d: &RegionCode) -> Result<NodeList, JoinError> {
        self.check_doc(d)?;
        let upto = self.entries.partition_point(|e| e.start < d.start);
        let mut items = Vec::new();
        for e in self.entries[..upto].iter().rev() {
            if e.end > d.end {
                items.push(self.entry_to_item(e));
            }
        }
        items.reverse();
        Ok(NodeList {
            doc_id: Some(self.doc_id),
            items,
        })
    }

    fn entry_to_item(&self, e: &IndexEntry) -> (RegionCode, NodeId) {
        (
            RegionCode {
                doc_id: self.doc_id,
                start: e.start,
                end: e.end,
                level: e.level,
            },
            e.node,
        )
    }
}

/// A start-sorted, duplicate-free list of regions with their node ids;
/// the unit of input to the join operators.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct NodeList {
    doc_id: Option<u32>,
    items: Vec<(RegionCode, NodeId)>,
}

impl NodeList {
    /// Validating constructor: items must be strictly sorted by start and
    /// share one document.
    pub fn new(items: Vec<(RegionCode, NodeId)>) -> Result<Self, JoinError> {
        let doc_id = items.first().map(|(c, _)| c.doc_id);
        for (i, (code, _)) in items.iter().enumerate() {
            if code.doc_id != doc_id.expect("nonempty") {
                return Err(JoinError::CrossDocument {
                    left: doc_id.expect("nonempty"),
                    right: code.doc_id,
                });
            }
            if i > 0 && items[i - 1].0.start >= code.start {
                return Err(JoinError::UnsortedInput { index: i });
            }
        }
        Ok(NodeList { doc_id, items })
    }

    /// Builds a list from node ids, sorting by start. Duplicate ids collapse.
    pub fn from_ids(regions: &RegionMap, ids: impl IntoIterator<Item = NodeId>) -> Self {
        let mut items: Vec<(RegionCode, NodeId)> =
            ids.into_iter().map(|id| (regions[id], id)).collect();
        items.sort_unstable_by_key(|(c, _)| c.start);
        items.dedup_by_key(|(c, _)| c.start);
        NodeList {
            doc_id: if items.is_empty() {
                None
            } else {
                Some(regions.doc_id())
            },
            items,
        }
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn items(&self) -> &[(RegionCode, NodeId)] {
        &self.items
    }

    pub fn node_ids(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.items.iter().map(|&(_, id)| id)
    }
}

fn check_join_inputs(ancestors: &NodeList, descendants: &NodeList) -> Result<(), JoinError> {
    if let (Some(l), Some(r)) = (ancestors.doc_id, descendants.doc_id) {
        if l != r {
            return Err(JoinError::CrossDocument { left: l, right: r });
        }
    }
    Ok(())
}

/// All (ancestor, descendant) node-id pairs between the two lists, by one
/// forward pass keeping a stack of open ancestor intervals. Output is
/// sorted by (descendant start, ancestor start).
pub fn structural_join(
    ancestors: &NodeList,
    descendants: &NodeList,
) -> Result<Vec<(NodeId, NodeId)>, JoinError> {
    check_join_inputs(ancestors, descendants)?;
    let a_items = ancestors.items();
    let d_items = descendants.items();
    let mut out = Vec::new();
    let mut stack: Vec<(RegionCode, NodeId)> = Vec::new();
    let mut ai = 0;

    for &(d_code, d_id) in d_items {
        while ai < a_items.len() && a_items[ai].0.start < d_code.start {
            while let Some(&(top, _)) = stack.last() {
                if top.end < a_items[ai].0.start {
                    stack.pop();
                } else {
                    break;
                }
            }
            stack.push(a_items[ai]);
            ai += 1;
        }
        while let Some(&(top, _)) = stack.last() {
            if top.end < d_code.start {
                stack.pop();
            } else {
                break;
            }
        }
        // Stack holds open intervals in increasing start order; on laminar
        // input every remaining one contains d.
        for &(a_code, a_id) in stack.iter() {
            if a_code.end > d_code.end {
                out.push((a_id, d_id));
            }
        }
    }
    Ok(out)
}

/// [`structural_join`] restricted to direct parent/child pairs via the
/// level difference.
pub fn parent_child_join(
    ancestors: &NodeList,
    descendants: &NodeList,
) -> Result<Vec<(NodeId, NodeId)>, JoinError> {
    check_join_inputs(ancestors, descendants)?;
    let by_id = |list: &NodeList| -> alloc::collections::BTreeMap<NodeId, u32> {
        list.items().iter().map(|&(c, id)| (id, c.level)).collect()
    };
    let a_levels = by_id(ancestors);
    let d_levels = by_id(descendants);
    Ok(structural_join(ancestors, descendants)?
        .into_iter()
        .filter(|(a, d)| d_levels[d] == a_levels[a] + 1)
        .collect())
}

/// Builds an interval index over all elements with a given label and its
/// region map; convenience used by twig evaluation.
pub fn label_list(doc: &Document, regions: &RegionMap, label: &str) -> NodeList {
    NodeList::from_ids(
        regions,
        doc.nodes()
            .filter(|n| n.kind == NodeKind::Element && n.label == label)
            .map(|n| n.id),
    )
}
