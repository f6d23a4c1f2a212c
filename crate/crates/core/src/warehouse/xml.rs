//! Serializing warehouse content back to XML documents.
//!
//! Inverse of [`super::load`]: emitted documents reload to structurally
//! equal values. Dimensions and attribute maps serialize in key order and
//! cells in table order, so output is deterministic.

use alloc::format;
use alloc::string::ToString;

use crate::doc::{Document, DocumentBuilder};

use super::{DimensionSet, FactTable, JoinIndex};

/// `dimensions.xml`: dimensionData / dimension / member / attribute.
pub fn dimensions_to_document(dims: &DimensionSet, doc_id: u32) -> Document {
    let mut b = DocumentBuilder::new();
    let root = b.element(None, "dimensionData");
    for dim in dims.dimensions() {
        let dim_el = b.element(Some(root), "dimension");
        b.attribute(dim_el, "name", dim.name.clone());
        for member in dim.members.values() {
            let member_el = b.element(Some(dim_el), "member");
            b.attribute(member_el, "id", member.member_id.clone());
            b.attribute(member_el, "level", member.level.clone());
            if let Some(parent) = &member.parent {
                b.attribute(member_el, "parent", parent.clone());
            }
            for (name, value) in &member.attributes {
                let attr_el = b.element(Some(member_el), "attribute");
                b.attribute(attr_el, "name", name.clone());
                b.attribute(attr_el, "value", value.clone());
            }
        }
    }
    b.finish(doc_id).expect("root exists")
}

/// `facts.xml`: CubeFacts / cell / (dimension | measure).
pub fn facts_to_document(facts: &FactTable, doc_id: u32) -> Document {
    let mut b = DocumentBuilder::new();
    let root = b.element(None, "CubeFacts");
    for cell in &facts.cells {
        let cell_el = b.element(Some(root), "cell");
        for (dim, member) in &cell.refs {
            let dim_el = b.element(Some(cell_el), "dimension");
            b.attribute(dim_el, "dim", dim.clone());
            b.attribute(dim_el, "node", member.clone());
        }
        for (name, value) in &cell.measures {
            let measure_el = b.element(Some(cell_el), "measure");
            b.attribute(measure_el, "name", name.clone());
            b.attribute(measure_el, "value", value.to_string());
        }
    }
    b.finish(doc_id).expect("root exists")
}

/// `index.xml`: index / cell / (dimension with inlined attributes | measure).
/// The root records the schema hash so a reloaded index still rejects plans
/// rewritten against a different schema.
pub fn join_index_to_document(index: &JoinIndex, doc_id: u32) -> Document {
    let mut b = DocumentBuilder::new();
    let root = b.element(None, "index");
    b.attribute(root, "schemaHash", format!("{:016x}", index.schema_hash));
    for cell in &index.cells {
        let cell_el = b.element(Some(root), "cell");
        for (dim, member) in &cell.refs {
            let dim_el = b.element(Some(cell_el), "dimension");
            b.attribute(dim_el, "dim", dim.clone());
            b.attribute(dim_el, "node", member.clone());
            if let Some(attrs) = cell.inlined.get(dim) {
                for (key, value) in attrs {
                    let attr_el = b.element(Some(dim_el), "attribute");
                    b.attribute(attr_el, "key", key.clone());
                    b.attribute(attr_el, "value", value.clone());
                }
            }
        }
        for (name, value) in &cell.measures {
            let measure_el = b.element(Some(cell_el), "measure");
            b.attribute(measure_el, "name", name.clone());
            b.attribute(measure_el, "value", value.to_string());
        }
    }
    b.finish(doc_id).expect("root exists")
}
