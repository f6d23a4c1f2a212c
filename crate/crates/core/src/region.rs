//! Region encoding: every node gets `(docId, start, end, level)`.
//!
//! A single counter starting at 1 is bumped once on node entry (start) and
//! once on exit (end) of a depth-first, document-order walk. Intervals of
//! two nodes are therefore either disjoint or strictly nested, and
//! ancestorship reduces to strict interval containment, checked without
//! touching the tree.

use alloc::vec;
use alloc::vec::Vec;

use crate::doc::{Document, NodeId};

/// Positional code of one node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RegionCode {
    pub doc_id: u32,
    pub start: u32,
    pub end: u32,
    /// Root element level is 0.
    pub level: u32,
}

impl RegionCode {
    /// Strict containment: `self` is a proper ancestor interval of `other`.
    /// Callers that mix documents must check `doc_id` themselves; the join
    /// module exposes a checked [`crate::join::is_ancestor`].
    pub fn contains(&self, other: &RegionCode) -> bool {
        self.start < other.start && other.end < self.end
    }
}

/// Region codes for every node of one document, indexed by node id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegionMap {
    doc_id: u32,
    codes: Vec<RegionCode>,
}

impl RegionMap {
    pub fn doc_id(&self) -> u32 {
        self.doc_id
    }

    pub fn get(&self, id: NodeId) -> Option<&RegionCode> {
        self.codes.get(id)
    }

    pub fn len(&self) -> usize {
        self.codes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codes.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (NodeId, &RegionCode)> {
        self.codes.iter().enumerate()
    }
}

impl core::ops::Index<NodeId> for RegionMap {
    type Output = RegionCode;

    fn index(&self, id: NodeId) -> &RegionCode {
        &self.codes[id]
    }
}

/// Assigns region codes to all nodes of `doc`.
pub fn assign_regions(doc: &Document) -> RegionMap {
    let mut codes = vec![
        RegionCode {
            doc_id: doc.doc_id(),
            start: 0,
            end: 0,
            level: 0,
        };
        doc.len()
    ];
    let mut counter: u32 = 0;

    // Explicit stack: (node, level, entered).
    let mut stack: Vec<(NodeId, u32, bool)> = Vec::new();
    stack.push((doc.root_id(), 0, false));
    while let Some((id, level, entered)) = stack.pop() {
        if entered {
            counter += 1;
            codes[id].end = counter;
            continue;
        }
        counter += 1;
        codes[id].start = counter;
        codes[id].level = level;
        stack.push((id, level, true));
        let node = doc.node(id).expect("node ids are dense");
        for &child in node.children.iter().rev() {
            stack.push((child, level + 1, false));
        }
    }

    RegionMap {
        doc_id: doc.doc_id(),
        codes,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_document;

    #[test]
    fn counter_walk_matches_hand_values() {
        let doc = parse_document(b"<a><b/><c/></a>", 7).unwrap();
        let regions = assign_regions(&doc);
        // a is node 0, b node 1, c node 2 in document order.
        assert_eq!(
            regions[0],
            RegionCode { doc_id: 7, start: 1, end: 6, level: 0 }
        );
        assert_eq!(
            regions[1],
            RegionCode { doc_id: 7, start: 2, end: 3, level: 1 }
        );
        assert_eq!(
            regions[2],
            RegionCode { doc_id: 7, start: 4, end: 5, level: 1 }
        );
    }

    #[test]
    fn single_root() {
        let doc = parse_document(b"<a/>", 0).unwrap();
        let regions = assign_regions(&doc);
        assert_eq!(
            regions[0],
            RegionCode { doc_id: 0, start: 1, end: 2, level: 0 }
        );
    }

    #[test]
    fn attributes_and_text_are_numbered_too() {
        let doc = parse_document(b"<a x=\"1\">t</a>", 0).unwrap();
        let regions = assign_regions(&doc);
        // a(1,6), @x(2,3), #text(4,5): every integer 1..=2n used once.
        let mut seen: Vec<u32> = regions
            .iter()
            .flat_map(|(_, c)| [c.start, c.end])
            .collect();
        seen.sort_unstable();
        let expected: Vec<u32> = (1..=2 * doc.len() as u32).collect();
        assert_eq!(seen, expected);
    }

    #[test]
    fn levels_follow_parents() {
        let doc = parse_document(b"<a><b><c/></b></a>", 0).unwrap();
        let regions = assign_regions(&doc);
        assert_eq!(regions[0].level, 0);
        assert_eq!(regions[1].level, 1);
        assert_eq!(regions[2].level, 2);
    }
}
