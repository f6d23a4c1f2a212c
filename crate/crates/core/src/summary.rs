//! Structural summaries: DataGuide, A(k)-index and 1-index.
//!
//! All three share one representation, a [`SummaryGraph`] whose nodes carry
//! extents (sets of document node ids). The DataGuide groups element nodes
//! by their full root-to-node label path; the A(k) family groups them by
//! k-bounded upward bisimilarity, refined from the label partition by
//! splitting on the parent's block; the 1-index is the refinement fixpoint.
//! On tree documents the 1-index partition coincides with the DataGuide's.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::doc::{Document, NodeId, NodeKind};

/// A partition of the element nodes of one document.
///
/// Blocks are numbered deterministically: sorted by their smallest member
/// id, members sorted ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    blocks: Vec<Vec<NodeId>>,
    block_of: BTreeMap<NodeId, usize>,
}

impl Partition {
    fn from_groups(groups: impl IntoIterator<Item = Vec<NodeId>>) -> Self {
        let mut blocks: Vec<Vec<NodeId>> = groups
            .into_iter()
            .map(|mut members| {
                members.sort_unstable();
                members
            })
            .collect();
        blocks.sort_unstable_by_key(|b| b[0]);
        let mut block_of = BTreeMap::new();
        for (i, block) in blocks.iter().enumerate() {
            for &n in block {
                block_of.insert(n, i);
            }
        }
        Partition { blocks, block_of }
    }

    pub fn blocks(&self) -> &[Vec<NodeId>] {
        &self.blocks
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn block_of(&self, node: NodeId) -> Option<usize> {
        self.block_of.get(&node).copied()
    }

    /// Every block of `self` is contained in some block of `coarser`.
    pub fn refines(&self, coarser: &Partition) -> bool {
        self.blocks.iter().all(|block| {
            let Some(target) = coarser.block_of(block[0]) else {
                return false;
            };
            block.iter().all(|&n| coarser.block_of(n) == Some(target))
        })
    }
}

/// One round of splitting: group nodes by (own block, parent's block).
/// Nodes without a parent get a distinct parent key.
fn split_by_parent(elements: &[NodeId], doc: &Document, current: &Partition) -> Partition {
    let mut groups: BTreeMap<(usize, Option<usize>), Vec<NodeId>> = BTreeMap::new();
    for &n in elements {
        let own = current.block_of(n).expect("element is partitioned");
        let parent_key = doc
            .node(n)
            .expect("valid node")
            .parent
            .map(|p| current.block_of(p).expect("parent is an element"));
        groups.entry((own, parent_key)).or_default().push(n);
    }
    Partition::from_groups(groups.into_values())
}

fn label_partition(doc: &Document) -> (Vec<NodeId>, Partition) {
    let elements: Vec<NodeId> = doc.elements().map(|n| n.id).collect();
    let mut by_label: BTreeMap<&str, Vec<NodeId>> = BTreeMap::new();
    for &n in &elements {
        by_label
            .entry(doc.node(n).expect("valid node").label.as_str())
            .or_default()
            .push(n);
    }
    let p0 = Partition::from_groups(by_label.into_values());
    (elements, p0)
}

/// Upward k-bisimulation: start from the label partition and split each
/// block by the parent's block, up to `k` rounds or until stable.
pub fn k_bisimulation(doc: &Document, k: u32) -> Partition {
    let (elements, mut partition) = label_partition(doc);
    for _ in 0..k {
        let next = split_by_parent(&elements, doc, &partition);
        if next == partition {
            break;
        }
        partition = next;
    }
    partition
}

/// Refinement fixpoint of [`k_bisimulation`]; reached after at most
/// tree-height rounds.
pub fn bisimulation_fixpoint(doc: &Document) -> Partition {
    let (elements, mut partition) = label_partition(doc);
    loop {
        let next = split_by_parent(&elements, doc, &partition);
        if next == partition {
            return partition;
        }
        partition = next;
    }
}

/// Which summary was built, and how.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SummaryKind {
    DataGuide,
    AK,
    OneIndex,
}

impl SummaryKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            SummaryKind::DataGuide => "dataguide",
            SummaryKind::AK => "a_k",
            SummaryKind::OneIndex => "one_index",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "dataguide" => Some(SummaryKind::DataGuide),
            "a_k" => Some(SummaryKind::AK),
            "one_index" => Some(SummaryKind::OneIndex),
            _ => None,
        }
    }
}

/// One summary node: a label, the data nodes it stands for, and edges to
/// child summary nodes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SummaryNode {
    pub sid: usize,
    pub label: String,
    /// Sorted, non-empty set of document node ids.
    pub extent: Vec<NodeId>,
    pub child_sids: Vec<usize>,
}

/// A labeled summary graph with extents.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SummaryGraph {
    pub kind: SummaryKind,
    /// Resolution parameter; `Some` only for [`SummaryKind::AK`].
    pub k: Option<u32>,
    pub nodes: Vec<SummaryNode>,
    pub root_sids: Vec<usize>,
    /// Content hash of the document this summary was built from.
    pub doc_hash: u64,
}

impl SummaryGraph {
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Total extent size; equals the element count for partition kinds.
    pub fn extent_total(&self) -> usize {
        self.nodes.iter().map(|n| n.extent.len()).sum()
    }
}

fn graph_from_partition(
    doc: &Document,
    partition: Partition,
    kind: SummaryKind,
    k: Option<u32>,
) -> SummaryGraph {
    let mut nodes: Vec<SummaryNode> = partition
        .blocks()
        .iter()
        .enumerate()
        .map(|(sid, members)| SummaryNode {
            sid,
            label: doc.node(members[0]).expect("valid node").label.clone(),
            extent: members.clone(),
            child_sids: Vec::new(),
        })
        .collect();

    let mut edges: BTreeSet<(usize, usize)> = BTreeSet::new();
    let mut root_sids: BTreeSet<usize> = BTreeSet::new();
    for block in partition.blocks() {
        for &n in block {
            match doc.node(n).expect("valid node").parent {
                Some(p) => {
                    let from = partition.block_of(p).expect("parent partitioned");
                    let to = partition.block_of(n).expect("node partitioned");
                    edges.insert((from, to));
                }
                None => {
                    root_sids.insert(partition.block_of(n).expect("root partitioned"));
                }
            }
        }
    }
    for (from, to) in edges {
        nodes[from].child_sids.push(to);
    }

    SummaryGraph {
        kind,
        k,
        nodes,
        root_sids: root_sids.into_iter().collect(),
        doc_hash: doc.content_hash(),
    }
}

/// DataGuide: one summary node per distinct root-to-node label path, built
/// by a direct walk (a path trie), independent of the bisimulation route.
pub fn build_dataguide(doc: &Document) -> SummaryGraph {
    struct TrieNode {
        label: String,
        extent: Vec<NodeId>,
        children: BTreeMap<String, usize>,
    }
    let mut trie: Vec<TrieNode> = Vec::new();
    let root = doc.root();
    trie.push(TrieNode {
        label: root.label.clone(),
        extent: Vec::new(),
        children: BTreeMap::new(),
    });

    // DFS carrying the trie position of each element's label path.
    let mut stack: Vec<(NodeId, usize)> = Vec::new();
    stack.push((doc.root_id(), 0));
    while let Some((id, tid)) = stack.pop() {
        trie[tid].extent.push(id);
        for child in doc.element_children(id) {
            let next = match trie[tid].children.get(&child.label) {
                Some(&t) => t,
                None => {
                    let t = trie.len();
                    let label = child.label.clone();
                    trie.push(TrieNode {
                        label: label.clone(),
                        extent: Vec::new(),
                        children: BTreeMap::new(),
                    });
                    trie[tid].children.insert(label, t);
                    t
                }
            };
            stack.push((child.id, next));
        }
    }

    let nodes: Vec<SummaryNode> = trie
        .iter()
        .enumerate()
        .map(|(sid, t)| {
            let mut extent = t.extent.clone();
            extent.sort_unstable();
            let mut child_sids: Vec<usize> = t.children.values().copied().collect();
            child_sids.sort_unstable();
            SummaryNode {
                sid,
                label: t.label.clone(),
                extent,
                child_sids,
            }
        })
        .collect();

    SummaryGraph {
        kind: SummaryKind::DataGuide,
        k: None,
        nodes,
        root_sids: vec![0],
        doc_hash: doc.content_hash(),
    }
}

/// A(k)-index: summary nodes are the blocks of [`k_bisimulation`].
pub fn build_ak_index(doc: &Document, k: u32) -> SummaryGraph {
    graph_from_partition(doc, k_bisimulation(doc, k), SummaryKind::AK, Some(k))
}

/// 1-index: summary nodes are the blocks of the bisimulation fixpoint.
pub fn build_one_index(doc: &Document) -> SummaryGraph {
    graph_from_partition(doc, bisimulation_fixpoint(doc), SummaryKind::OneIndex, None)
}

/// Groups element nodes by full label path; the extent oracle for both the
/// DataGuide and, on trees, the 1-index.
pub fn label_path_groups(doc: &Document) -> BTreeMap<Vec<String>, Vec<NodeId>> {
    let mut groups: BTreeMap<Vec<String>, Vec<NodeId>> = BTreeMap::new();
    for n in doc.nodes() {
        if n.kind == NodeKind::Element {
            let path = doc.label_path(n.id).expect("valid id").labels().to_vec();
            groups.entry(path).or_default().push(n.id);
        }
    }
    groups
}
