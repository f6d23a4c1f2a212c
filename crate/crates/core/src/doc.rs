//! Ordered labeled tree model for parsed XML documents.
//!
//! Attributes and text are modeled as child nodes of their owning element:
//! an attribute `x="1"` becomes a child labeled `@x`, character data becomes
//! a child labeled `#text`. Attribute children always precede element and
//! text children in the child order of their owner, element and text
//! children keep document order.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use thiserror::Error;

/// Dense node identifier, valid within a single [`Document`].
pub type NodeId = usize;

/// What a node represents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum NodeKind {
    Element,
    Attribute,
    Text,
}

/// One node of the tree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct XmlNode {
    pub id: NodeId,
    /// Element qualified name, `@name` for attributes, `#text` for text.
    pub label: String,
    pub kind: NodeKind,
    pub parent: Option<NodeId>,
    pub children: Vec<NodeId>,
    /// Content of text and attribute nodes; `None` for elements.
    pub text: Option<String>,
}

/// Labels from the root element down to one node.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LabelPath {
    labels: Vec<String>,
}

impl LabelPath {
    pub fn new(labels: Vec<String>) -> Self {
        debug_assert!(!labels.is_empty());
        LabelPath { labels }
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

impl core::fmt::Display for LabelPath {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        for label in &self.labels {
            write!(f, "/{label}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DocError {
    #[error("unknown node id {0}")]
    UnknownNode(NodeId),
    #[error("document has no root element")]
    MissingRoot,
    #[error("document has {0} root elements, expected exactly one")]
    MultipleRoots(usize),
}

/// An immutable parsed document: nodes indexed by dense ids plus the root.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Document {
    doc_id: u32,
    nodes: Vec<XmlNode>,
    root_id: NodeId,
}

impl Document {
    pub fn doc_id(&self) -> u32 {
        self.doc_id
    }

    pub fn root_id(&self) -> NodeId {
        self.root_id
    }

    pub fn root(&self) -> &XmlNode {
        &self.nodes[self.root_id]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, id: NodeId) -> Option<&XmlNode> {
        self.nodes.get(id)
    }

    pub fn nodes(&self) -> impl Iterator<Item = &XmlNode> {
        self.nodes.iter()
    }

    pub fn elements(&self) -> impl Iterator<Item = &XmlNode> {
        self.nodes.iter().filter(|n| n.kind == NodeKind::Element)
    }

    pub fn element_count(&self) -> usize {
        self.elements().count()
    }

    /// Element children of a node, in document order.
    pub fn element_children(&self, id: NodeId) -> impl Iterator<Item = &XmlNode> {
        self.nodes[id]
            .children
            .iter()
            .map(|&c| &self.nodes[c])
            .filter(|n| n.kind == NodeKind::Element)
    }

    /// Value of the attribute `name` on element `id`, if present.
    pub fn attribute(&self, id: NodeId, name: &str) -> Option<&str> {
        self.nodes[id]
            .children
            .iter()
            .map(|&c| &self.nodes[c])
            .find(|n| n.kind == NodeKind::Attribute && n.label[1..] == *name)
            .and_then(|n| n.text.as_deref())
    }

    /// Depth of a node; the root element has depth 0.
    pub fn depth(&self, id: NodeId) -> usize {
        let mut d = 0;
        let mut cur = self.nodes[id].parent;
        while let Some(p) = cur {
            d += 1;
            cur = self.nodes[p].parent;
        }
        d
    }

    /// Labels from the root to `id`, following parent links and reversing.
    pub fn label_path(&self, id: NodeId) -> Result<LabelPath, DocError> {
        let node = self.node(id).ok_or(DocError::UnknownNode(id))?;
        let mut labels = Vec::new();
        labels.push(node.label.clone());
        let mut cur = node.parent;
        while let Some(p) = cur {
            labels.push(self.nodes[p].label.clone());
            cur = self.nodes[p].parent;
        }
        labels.reverse();
        Ok(LabelPath::new(labels))
    }

    /// Canonical serialization: no insignificant whitespace, attributes in
    /// child order, `&`/`<`/`>` escaped in text and `&`/`<`/`"` in values.
    ///
    /// Re-parsing the output yields an isomorphic tree, and equal trees
    /// serialize to identical bytes, so this also backs [`Self::content_hash`].
    pub fn serialize(&self) -> String {
        let mut out = String::new();
        self.write_element(self.root_id, &mut out);
        out
    }

    fn write_element(&self, id: NodeId, out: &mut String) {
        // Iterative DFS; `Close` frames carry the label to emit on exit.
        enum Frame<'a> {
            Open(NodeId),
            Close(&'a str),
        }
        let mut stack = Vec::new();
        stack.push(Frame::Open(id));
        while let Some(frame) = stack.pop() {
            match frame {
                Frame::Close(label) => {
                    out.push_str("</");
                    out.push_str(label);
                    out.push('>');
                }
                Frame::Open(id) => {
                    let node = &self.nodes[id];
                    match node.kind {
                        NodeKind::Text => {
                            escape_text(node.text.as_deref().unwrap_or(""), out);
                        }
                        NodeKind::Attribute => {
                            // Written by the owning element below.
                        }
                        NodeKind::Element => {
                            out.push('<');
                            out.push_str(&node.label);
                            let mut content = Vec::new();
                            for &c in &node.children {
                                let child = &self.nodes[c];
                                if child.kind == NodeKind::Attribute {
                                    out.push(' ');
                                    out.push_str(&child.label[1..]);
                                    out.push_str("=\"");
                                    escape_attr(child.text.as_deref().unwrap_or(""), out);
                                    out.push('"');
                                } else {
                                    content.push(c);
                                }
                            }
                            if content.is_empty() {
                                out.push_str("/>");
                            } else {
                                out.push('>');
                                stack.push(Frame::Close(&node.label));
                                for &c in content.iter().rev() {
                                    stack.push(Frame::Open(c));
                                }
                            }
                        }
                    }
                }
            }
        }
    }

    /// FNV-1a hash of the canonical serialization. Used to detect that a
    /// persisted index is being applied to a different document.
    pub fn content_hash(&self) -> u64 {
        fnv1a64(self.serialize().as_bytes())
    }
}

fn escape_text(s: &str, out: &mut String) {
    for ch in s.chars() {
        match ch {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            _ => out.push(ch),
        }
    }
}

fn escape_attr(s: &str, out: &mut String) {
    for ch in s.chars() {
        match ch {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '"' => out.push_str("&quot;"),
            _ => out.push(ch),
        }
    }
}

/// 64-bit FNV-1a.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    const OFFSET: u64 = 0xcbf29ce484222325;
    const PRIME: u64 = 0x100000001b3;
    let mut h = OFFSET;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(PRIME);
    }
    h
}

/// Incremental construction of a [`Document`].
///
/// Used by the parser and by synthetic corpus generators. The builder keeps
/// parent/child links consistent and places attribute children ahead of
/// element/text children automatically.
#[derive(Debug, Default)]
pub struct DocumentBuilder {
    nodes: Vec<XmlNode>,
}

impl DocumentBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Adds an element; `parent: None` makes it the root.
    pub fn element(&mut self, parent: Option<NodeId>, label: impl Into<String>) -> NodeId {
        self.push(parent, label.into(), NodeKind::Element, None)
    }

    /// Adds an attribute node `@name` under `owner`, before any non-attribute
    /// children already present.
    pub fn attribute(
        &mut self,
        owner: NodeId,
        name: impl AsRef<str>,
        value: impl Into<String>,
    ) -> NodeId {
        let id = self.nodes.len();
        let mut label = String::with_capacity(name.as_ref().len() + 1);
        label.push('@');
        label.push_str(name.as_ref());
        self.nodes.push(XmlNode {
            id,
            label,
            kind: NodeKind::Attribute,
            parent: Some(owner),
            children: Vec::new(),
            text: Some(value.into()),
        });
        let at = self.nodes[owner]
            .children
            .iter()
            .position(|&c| self.nodes[c].kind != NodeKind::Attribute);
        match at {
            Some(pos) => self.nodes[owner].children.insert(pos, id),
            None => self.nodes[owner].children.push(id),
        }
        id
    }

    /// Adds a `#text` child.
    pub fn text(&mut self, parent: NodeId, content: impl Into<String>) -> NodeId {
        self.push(Some(parent), "#text".to_string(), NodeKind::Text, Some(content.into()))
    }

    fn push(
        &mut self,
        parent: Option<NodeId>,
        label: String,
        kind: NodeKind,
        text: Option<String>,
    ) -> NodeId {
        let id = self.nodes.len();
        self.nodes.push(XmlNode {
            id,
            label,
            kind,
            parent,
            children: Vec::new(),
            text,
        });
        if let Some(p) = parent {
            self.nodes[p].children.push(id);
        }
        id
    }

    /// Validates the single-root invariant and seals the document.
    pub fn finish(self, doc_id: u32) -> Result<Document, DocError> {
        let roots: Vec<NodeId> = self
            .nodes
            .iter()
            .filter(|n| n.parent.is_none())
            .map(|n| n.id)
            .collect();
        match roots.as_slice() {
            [] => Err(DocError::MissingRoot),
            [root] if self.nodes[*root].kind == NodeKind::Element => Ok(Document {
                doc_id,
                nodes: self.nodes,
                root_id: *root,
            }),
            [_] => Err(DocError::MissingRoot),
            many => Err(DocError::MultipleRoots(many.len())),
        }
    }
}
