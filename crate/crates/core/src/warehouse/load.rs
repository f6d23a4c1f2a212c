//! Loading warehouse content from parsed XML documents.
//!
//! Formats (see `docs/warehouse-formats.md`): `dimensions.xml` has a
//! `dimensionData` root with `dimension`/`member`/`attribute` elements;
//! `facts.xml` has a `CubeFacts` root with `cell` elements holding one
//! `dimension dim=.. node=..` per dimension and `measure name=.. value=..`
//! entries; `index.xml` has an `index` root whose cells additionally carry
//! the inlined `attribute key="level.attr"` entries.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::decimal::Decimal;
use crate::doc::{Document, NodeId};

use super::{
    Dimension, DimensionMember, DimensionSet, FactCell, FactTable, JoinIndex, JoinIndexCell,
    WarehouseError,
};

fn violation(msg: impl Into<String>) -> WarehouseError {
    WarehouseError::SchemaViolation(msg.into())
}

fn required_attr(doc: &Document, id: NodeId, name: &str) -> Result<String, WarehouseError> {
    doc.attribute(id, name)
        .map(|s| s.to_string())
        .ok_or_else(|| {
            let label = &doc.node(id).expect("valid id").label;
            violation(format!("<{label}> is missing required attribute '{name}'"))
        })
}

/// Loads all dimensions with resolved parent links.
pub fn load_dimensions(doc: &Document) -> Result<DimensionSet, WarehouseError> {
    if doc.root().label != "dimensionData" {
        return Err(violation(format!(
            "expected root <dimensionData>, found <{}>",
            doc.root().label
        )));
    }
    let mut dims: BTreeMap<String, Dimension> = BTreeMap::new();
    for dim_el in doc.element_children(doc.root_id()) {
        if dim_el.label != "dimension" {
            return Err(violation(format!(
                "unexpected <{}> under <dimensionData>",
                dim_el.label
            )));
        }
        let name = required_attr(doc, dim_el.id, "name")?;
        if dims.contains_key(&name) {
            return Err(violation(format!("duplicate dimension '{name}'")));
        }
        let mut members: BTreeMap<String, DimensionMember> = BTreeMap::new();
        for member_el in doc.element_children(dim_el.id) {
            if member_el.label != "member" {
                return Err(violation(format!(
                    "unexpected <{}> under <dimension>",
                    member_el.label
                )));
            }
            let id = required_attr(doc, member_el.id, "id")?;
            let level = required_attr(doc, member_el.id, "level")?;
            if level.contains('.') {
                return Err(violation(format!(
                    "level name '{level}' must not contain '.'"
                )));
            }
            let parent = doc.attribute(member_el.id, "parent").map(|s| s.to_string());
            let mut attributes = BTreeMap::new();
            for attr_el in doc.element_children(member_el.id) {
                if attr_el.label != "attribute" {
                    return Err(violation(format!(
                        "unexpected <{}> under <member>",
                        attr_el.label
                    )));
                }
                let attr_name = required_attr(doc, attr_el.id, "name")?;
                let value = required_attr(doc, attr_el.id, "value")?;
                if attributes.insert(attr_name.clone(), value).is_some() {
                    return Err(violation(format!(
                        "member '{id}' repeats attribute '{attr_name}'"
                    )));
                }
            }
            if members.contains_key(&id) {
                return Err(WarehouseError::DuplicateMemberId {
                    dim: name.clone(),
                    member: id,
                });
            }
            members.insert(
                id.clone(),
                DimensionMember {
                    dim: name.clone(),
                    member_id: id,
                    level,
                    parent,
                    attributes,
                },
            );
        }
        dims.insert(name.clone(), Dimension { name, members });
    }

    // Parent links must resolve and chains must terminate.
    for dim in dims.values() {
        for member in dim.members.values() {
            if let Some(parent) = &member.parent {
                if !dim.members.contains_key(parent) {
                    return Err(WarehouseError::DanglingParent {
                        dim: dim.name.clone(),
                        member: member.member_id.clone(),
                        parent: parent.clone(),
                    });
                }
            }
            // Walk up; more steps than members means a cycle.
            let mut hops = 0usize;
            let mut cur = member.parent.as_ref();
            while let Some(p) = cur {
                hops += 1;
                if hops > dim.members.len() {
                    return Err(violation(format!(
                        "cycle in parent chain of member '{}' (dimension '{}')",
                        member.member_id, dim.name
                    )));
                }
                cur = dim.members.get(p).and_then(|m| m.parent.as_ref());
            }
        }
    }
    Ok(DimensionSet::new(dims))
}

/// Loads all fact cells, validating every reference against `dims`.
pub fn load_facts(doc: &Document, dims: &DimensionSet) -> Result<FactTable, WarehouseError> {
    if doc.root().label != "CubeFacts" {
        return Err(violation(format!(
            "expected root <CubeFacts>, found <{}>",
            doc.root().label
        )));
    }
    let mut cells = Vec::new();
    for (cell_idx, cell_el) in doc.element_children(doc.root_id()).enumerate() {
        if cell_el.label != "cell" {
            return Err(violation(format!(
                "unexpected <{}> under <CubeFacts>",
                cell_el.label
            )));
        }
        let mut refs: BTreeMap<String, String> = BTreeMap::new();
        let mut measures: BTreeMap<String, Decimal> = BTreeMap::new();
        for child in doc.element_children(cell_el.id) {
            match child.label.as_str() {
                "dimension" => {
                    let dim = required_attr(doc, child.id, "dim")?;
                    let member = required_attr(doc, child.id, "node")?;
                    if dims.dimension(&dim).is_none() {
                        return Err(violation(format!(
                            "cell {cell_idx} references unknown dimension '{dim}'"
                        )));
                    }
                    if dims.member(&dim, &member).is_none() {
                        return Err(WarehouseError::DanglingRef {
                            cell: cell_idx,
                            dim,
                            member,
                        });
                    }
                    if refs.insert(dim.clone(), member).is_some() {
                        return Err(violation(format!(
                            "cell {cell_idx} repeats dimension '{dim}'"
                        )));
                    }
                }
                "measure" => {
                    let name = required_attr(doc, child.id, "name")?;
                    let value = required_attr(doc, child.id, "value")?;
                    let parsed = Decimal::parse(&value).map_err(|_| {
                        WarehouseError::NonNumericMeasure {
                            cell: cell_idx,
                            name: name.clone(),
                            value: value.clone(),
                        }
                    })?;
                    if measures.insert(name.clone(), parsed).is_some() {
                        return Err(violation(format!(
                            "cell {cell_idx} repeats measure '{name}'"
                        )));
                    }
                }
                other => {
                    return Err(violation(format!("unexpected <{other}> under <cell>")));
                }
            }
        }
        for dim in dims.dimension_names() {
            if !refs.contains_key(dim) {
                return Err(WarehouseError::MissingDimensionRef {
                    cell: cell_idx,
                    dim: dim.to_string(),
                });
            }
        }
        cells.push(FactCell { refs, measures });
    }
    Ok(FactTable { cells })
}

/// Loads a serialized join index, including its schema hash.
pub fn load_join_index(doc: &Document) -> Result<JoinIndex, WarehouseError> {
    if doc.root().label != "index" {
        return Err(violation(format!(
            "expected root <index>, found <{}>",
            doc.root().label
        )));
    }
    let hash_text = required_attr(doc, doc.root_id(), "schemaHash")?;
    let schema_hash = u64::from_str_radix(&hash_text, 16)
        .map_err(|_| violation(format!("schemaHash '{hash_text}' is not a hex number")))?;

    let mut cells = Vec::new();
    for (cell_idx, cell_el) in doc.element_children(doc.root_id()).enumerate() {
        if cell_el.label != "cell" {
            return Err(violation(format!(
                "unexpected <{}> under <index>",
                cell_el.label
            )));
        }
        let mut refs: BTreeMap<String, String> = BTreeMap::new();
        let mut inlined: BTreeMap<String, BTreeMap<String, String>> = BTreeMap::new();
        let mut measures: BTreeMap<String, Decimal> = BTreeMap::new();
        for child in doc.element_children(cell_el.id) {
            match child.label.as_str() {
                "dimension" => {
                    let dim = required_attr(doc, child.id, "dim")?;
                    let member = required_attr(doc, child.id, "node")?;
                    let mut attrs = BTreeMap::new();
                    for attr_el in doc.element_children(child.id) {
                        if attr_el.label != "attribute" {
                            return Err(violation(format!(
                                "unexpected <{}> under index <dimension>",
                                attr_el.label
                            )));
                        }
                        let key = required_attr(doc, attr_el.id, "key")?;
                        let value = required_attr(doc, attr_el.id, "value")?;
                        attrs.insert(key, value);
                    }
                    refs.insert(dim.clone(), member);
                    inlined.insert(dim, attrs);
                }
                "measure" => {
                    let name = required_attr(doc, child.id, "name")?;
                    let value = required_attr(doc, child.id, "value")?;
                    let parsed = Decimal::parse(&value).map_err(|_| {
                        WarehouseError::NonNumericMeasure {
                            cell: cell_idx,
                            name: name.clone(),
                            value: value.clone(),
                        }
                    })?;
                    measures.insert(name, parsed);
                }
                other => {
                    return Err(violation(format!(
                        "unexpected <{other}> under index <cell>"
                    )));
                }
            }
        }
        cells.push(JoinIndexCell {
            refs,
            inlined,
            measures,
        });
    }
    Ok(JoinIndex { cells, schema_hash })
}
