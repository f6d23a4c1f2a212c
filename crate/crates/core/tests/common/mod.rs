//! Shared helpers for the oracle test suites: a small deterministic PRNG
//! and a random labeled-tree builder, independent of the production
//! generators in the `idx` crate.

// Each test binary uses a different subset of these helpers.
#![allow(dead_code)]

use idx_core::doc::{Document, DocumentBuilder, NodeId};

/// Minimal LCG; good enough to derive reproducible test corpora.
pub struct Rng(pub u64);

impl Rng {
    pub fn next_u64(&mut self) -> u64 {
        self.0 = self
            .0
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        self.0 >> 11
    }

    pub fn below(&mut self, n: usize) -> usize {
        assert!(n > 0);
        (self.next_u64() % n as u64) as usize
    }

    pub fn chance(&mut self, num: u64, den: u64) -> bool {
        self.next_u64() % den < num
    }
}

/// Spreadsheet-style label alphabet: a, b, ..., z, aa, ab, ...
pub fn label_for(mut i: usize) -> String {
    let mut out = Vec::new();
    loop {
        out.push(b'a' + (i % 26) as u8);
        i /= 26;
        if i == 0 {
            break;
        }
        i -= 1;
    }
    out.reverse();
    String::from_utf8(out).unwrap()
}

/// Random element tree with `node_count` nodes, depth below `max_depth`
/// and fanout below `max_fanout`, labels drawn from `alphabet` symbols.
pub fn random_tree(
    rng: &mut Rng,
    node_count: usize,
    max_depth: usize,
    max_fanout: usize,
    alphabet: usize,
) -> Document {
    assert!(node_count >= 1);
    let mut b = DocumentBuilder::new();
    let root = b.element(None, label_for(rng.below(alphabet)));
    // (id, depth, fanout) of nodes that may still take children.
    let mut eligible: Vec<(NodeId, usize, usize)> = vec![(root, 0, 0)];
    for _ in 1..node_count {
        assert!(!eligible.is_empty(), "tree parameters exhausted capacity");
        let slot = rng.below(eligible.len());
        let (parent, depth, _) = eligible[slot];
        let child = b.element(Some(parent), label_for(rng.below(alphabet)));
        eligible[slot].2 += 1;
        if eligible[slot].2 + 1 >= max_fanout {
            eligible.swap_remove(slot);
        }
        if depth + 1 < max_depth {
            eligible.push((child, depth + 1, 0));
        }
    }
    b.finish(0).unwrap()
}

/// All (labels of a random node's trailing path); handy for suffix queries.
pub fn trailing_labels(doc: &Document, node: NodeId, len: usize) -> Vec<String> {
    let mut labels = Vec::new();
    let mut cur = Some(node);
    while let Some(id) = cur {
        if labels.len() >= len {
            break;
        }
        let n = doc.node(id).unwrap();
        labels.push(n.label.clone());
        cur = n.parent;
    }
    labels.reverse();
    labels
}

/// Random element node id.
pub fn random_element(rng: &mut Rng, doc: &Document) -> NodeId {
    let ids: Vec<NodeId> = doc.elements().map(|n| n.id).collect();
    ids[rng.below(ids.len())]
}
