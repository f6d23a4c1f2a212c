//! Star-schema warehouse over XML documents and its fused join index.
//!
//! The warehouse keeps facts and dimensions in two documents. Answering an
//! analytic query from them means joining every fact with members of each
//! referenced dimension hierarchy. The join index removes those joins by
//! copying, for every fact, the attributes of each referenced member and
//! of all its ancestors into the fact's own index cell. A rewritten query
//! then runs as a single scan over index cells (see [`query`]).

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use thiserror::Error;

use crate::decimal::Decimal;
use crate::doc::fnv1a64;

pub mod load;
pub mod query;
pub mod xml;

pub use load::{load_dimensions, load_facts, load_join_index};
pub use query::{
    execute_on_index, execute_with_joins, rewrite_query, AggregateFn, AnalyticQuery, CompareOp,
    GroupKey, ResultTable, RewrittenQuery, Selection,
};
pub use xml::{dimensions_to_document, facts_to_document, join_index_to_document};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WarehouseError {
    #[error("dimension '{dim}': member '{member}' references missing parent '{parent}'")]
    DanglingParent {
        dim: String,
        member: String,
        parent: String,
    },
    #[error("dimension '{dim}': duplicate member id '{member}'")]
    DuplicateMemberId { dim: String, member: String },
    #[error("warehouse document violates the expected format: {0}")]
    SchemaViolation(String),
    #[error("cell {cell} references missing member '{member}' in dimension '{dim}'")]
    DanglingRef {
        cell: usize,
        dim: String,
        member: String,
    },
    #[error("cell {cell} is missing a reference for dimension '{dim}'")]
    MissingDimensionRef { cell: usize, dim: String },
    #[error("cell {cell}: measure '{name}' has non-numeric value '{value}'")]
    NonNumericMeasure {
        cell: usize,
        name: String,
        value: String,
    },
    #[error("no attribute '{attr}' at level '{level}' of dimension '{dim}'")]
    UnknownAttribute {
        dim: String,
        level: String,
        attr: String,
    },
    #[error("level '{level}' does not occur on the hierarchy chain of member '{member}' (dimension '{dim}')")]
    EmptyLevel {
        dim: String,
        level: String,
        member: String,
    },
    #[error("plan and index were built against different schemas")]
    SchemaMismatch,
}

/// One member of a dimension hierarchy.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DimensionMember {
    pub dim: String,
    pub member_id: String,
    pub level: String,
    /// Id of the next coarser member; `None` for top-level members.
    pub parent: Option<String>,
    pub attributes: BTreeMap<String, String>,
}

/// All members of one dimension, keyed by member id.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Dimension {
    pub name: String,
    pub members: BTreeMap<String, DimensionMember>,
}

/// The dimension side of the warehouse.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DimensionSet {
    dims: BTreeMap<String, Dimension>,
}

impl DimensionSet {
    pub fn new(dims: BTreeMap<String, Dimension>) -> Self {
        DimensionSet { dims }
    }

    pub fn dimensions(&self) -> impl Iterator<Item = &Dimension> {
        self.dims.values()
    }

    pub fn dimension_names(&self) -> impl Iterator<Item = &str> {
        self.dims.keys().map(|s| s.as_str())
    }

    pub fn dimension(&self, name: &str) -> Option<&Dimension> {
        self.dims.get(name)
    }

    pub fn member(&self, dim: &str, id: &str) -> Option<&DimensionMember> {
        self.dims.get(dim).and_then(|d| d.members.get(id))
    }

    pub fn len(&self) -> usize {
        self.dims.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dims.is_empty()
    }

    /// The member and all its ancestors, leaf first.
    pub fn chain<'a>(&'a self, dim: &str, id: &str) -> Vec<&'a DimensionMember> {
        let mut out = Vec::new();
        let Some(d) = self.dims.get(dim) else {
            return out;
        };
        let mut cur = d.members.get(id);
        while let Some(m) = cur {
            out.push(m);
            cur = m.parent.as_ref().and_then(|p| d.members.get(p));
        }
        out
    }

    /// Attribute lookup the join-based executor uses: walk the chain from
    /// the referenced member up to the first member at `level`, then read
    /// `attr` there.
    pub fn resolve_attribute(
        &self,
        dim: &str,
        member_id: &str,
        level: &str,
        attr: &str,
    ) -> Result<&str, WarehouseError> {
        for m in self.chain(dim, member_id) {
            if m.level == level {
                return m
                    .attributes
                    .get(attr)
                    .map(|s| s.as_str())
                    .ok_or_else(|| WarehouseError::UnknownAttribute {
                        dim: dim.to_string(),
                        level: level.to_string(),
                        attr: attr.to_string(),
                    });
            }
        }
        Err(WarehouseError::EmptyLevel {
            dim: dim.to_string(),
            level: level.to_string(),
            member: member_id.to_string(),
        })
    }

    /// Attribute vocabulary of the warehouse: dim -> level -> attributes.
    pub fn schema(&self) -> WarehouseSchema {
        let mut dims: BTreeMap<String, BTreeMap<String, BTreeSet<String>>> = BTreeMap::new();
        for d in self.dims.values() {
            let levels = dims.entry(d.name.clone()).or_default();
            for m in d.members.values() {
                let attrs = levels.entry(m.level.clone()).or_default();
                attrs.extend(m.attributes.keys().cloned());
            }
        }
        WarehouseSchema::new(dims)
    }
}

/// One fact: a full combination of dimension references plus measures.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FactCell {
    /// dimension name -> referenced member id.
    pub refs: BTreeMap<String, String>,
    pub measures: BTreeMap<String, Decimal>,
}

/// The fact side of the warehouse.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct FactTable {
    pub cells: Vec<FactCell>,
}

impl FactTable {
    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// Distinct dimension-reference combinations across all cells.
    pub fn distinct_ref_combinations(&self) -> usize {
        let set: BTreeSet<&BTreeMap<String, String>> =
            self.cells.iter().map(|c| &c.refs).collect();
        set.len()
    }
}

/// One index cell: the fact plus every attribute any rewritten query could
/// ask for, keyed `level.attr` per dimension.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JoinIndexCell {
    pub refs: BTreeMap<String, String>,
    /// dimension name -> "level.attr" -> value, covering the referenced
    /// member and all its ancestors.
    pub inlined: BTreeMap<String, BTreeMap<String, String>>,
    pub measures: BTreeMap<String, Decimal>,
}

/// The fused index: facts and dimension data in one structure, so query
/// evaluation never touches the dimensions document again.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JoinIndex {
    pub cells: Vec<JoinIndexCell>,
    pub schema_hash: u64,
}

impl JoinIndex {
    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// Reconstructs the attribute vocabulary visible in the index cells.
    /// The stored hash remains authoritative for plan compatibility.
    pub fn schema_view(&self) -> WarehouseSchema {
        let mut dims: BTreeMap<String, BTreeMap<String, BTreeSet<String>>> = BTreeMap::new();
        for cell in &self.cells {
            for (dim, inlined) in &cell.inlined {
                let levels = dims.entry(dim.clone()).or_default();
                for key in inlined.keys() {
                    if let Some((level, attr)) = key.split_once('.') {
                        levels
                            .entry(level.to_string())
                            .or_default()
                            .insert(attr.to_string());
                    }
                }
            }
        }
        WarehouseSchema {
            dims,
            hash: self.schema_hash,
        }
    }
}

/// Attribute vocabulary with a stable hash; rewritten plans and join
/// indices built from the same dimensions carry the same hash.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WarehouseSchema {
    dims: BTreeMap<String, BTreeMap<String, BTreeSet<String>>>,
    hash: u64,
}

impl WarehouseSchema {
    fn new(dims: BTreeMap<String, BTreeMap<String, BTreeSet<String>>>) -> Self {
        let mut canon = String::new();
        for (dim, levels) in &dims {
            for (level, attrs) in levels {
                for attr in attrs {
                    canon.push_str(dim);
                    canon.push('\u{1}');
                    canon.push_str(level);
                    canon.push('\u{1}');
                    canon.push_str(attr);
                    canon.push('\n');
                }
            }
        }
        let hash = fnv1a64(canon.as_bytes());
        WarehouseSchema { dims, hash }
    }

    pub fn hash(&self) -> u64 {
        self.hash
    }

    pub fn has_attribute(&self, dim: &str, level: &str, attr: &str) -> bool {
        self.dims
            .get(dim)
            .and_then(|levels| levels.get(level))
            .map(|attrs| attrs.contains(attr))
            .unwrap_or(false)
    }
}

/// Builds the join index: for every fact, inline the attribute map of each
/// referenced member and of all its ancestors under `level.attr` keys.
/// Walking leaf first means the finest member wins should a chain ever
/// repeat a level name.
pub fn build_join_index(facts: &FactTable, dims: &DimensionSet) -> JoinIndex {
    let schema_hash = dims.schema().hash();
    let cells = facts
        .cells
        .iter()
        .map(|cell| {
            let mut inlined: BTreeMap<String, BTreeMap<String, String>> = BTreeMap::new();
            for (dim, member_id) in &cell.refs {
                let entry = inlined.entry(dim.clone()).or_default();
                for member in dims.chain(dim, member_id) {
                    for (attr, value) in &member.attributes {
                        entry
                            .entry(format!("{}.{}", member.level, attr))
                            .or_insert_with(|| value.clone());
                    }
                }
            }
            JoinIndexCell {
                refs: cell.refs.clone(),
                inlined,
                measures: cell.measures.clone(),
            }
        })
        .collect();
    JoinIndex { cells, schema_hash }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn two_level_store() -> DimensionSet {
        let mut members = BTreeMap::new();
        members.insert(
            "S1".to_string(),
            DimensionMember {
                dim: "store".to_string(),
                member_id: "S1".to_string(),
                level: "store".to_string(),
                parent: Some("C1".to_string()),
                attributes: BTreeMap::from([("name".to_string(), "Main".to_string())]),
            },
        );
        members.insert(
            "C1".to_string(),
            DimensionMember {
                dim: "store".to_string(),
                member_id: "C1".to_string(),
                level: "city".to_string(),
                parent: None,
                attributes: BTreeMap::from([("name".to_string(), "Lyon".to_string())]),
            },
        );
        DimensionSet::new(BTreeMap::from([(
            "store".to_string(),
            Dimension {
                name: "store".to_string(),
                members,
            },
        )]))
    }

    pub(crate) fn one_fact() -> FactTable {
        FactTable {
            cells: vec![FactCell {
                refs: BTreeMap::from([("store".to_string(), "S1".to_string())]),
                measures: BTreeMap::from([(
                    "amount".to_string(),
                    Decimal::parse("5.0").unwrap(),
                )]),
            }],
        }
    }

    #[test]
    fn chain_walks_leaf_to_top() {
        let dims = two_level_store();
        let chain = dims.chain("store", "S1");
        let levels: Vec<&str> = chain.iter().map(|m| m.level.as_str()).collect();
        assert_eq!(levels, ["store", "city"]);
    }

    #[test]
    fn resolve_walks_to_named_level() {
        let dims = two_level_store();
        assert_eq!(
            dims.resolve_attribute("store", "S1", "city", "name").unwrap(),
            "Lyon"
        );
        assert!(matches!(
            dims.resolve_attribute("store", "S1", "country", "name"),
            Err(WarehouseError::EmptyLevel { .. })
        ));
        assert!(matches!(
            dims.resolve_attribute("store", "S1", "city", "zip"),
            Err(WarehouseError::UnknownAttribute { .. })
        ));
    }

    #[test]
    fn index_inlines_ancestor_attributes() {
        let dims = two_level_store();
        let facts = one_fact();
        let idx = build_join_index(&facts, &dims);
        assert_eq!(idx.len(), 1);
        let store = &idx.cells[0].inlined["store"];
        assert_eq!(store["city.name"], "Lyon");
        assert_eq!(store["store.name"], "Main");
    }

    #[test]
    fn empty_warehouse_gives_empty_index() {
        let dims = two_level_store();
        let idx = build_join_index(&FactTable::default(), &dims);
        assert!(idx.is_empty());
        assert_eq!(idx.schema_hash, dims.schema().hash());
    }

    #[test]
    fn schema_view_matches_source_schema() {
        let dims = two_level_store();
        let idx = build_join_index(&one_fact(), &dims);
        let view = idx.schema_view();
        assert!(view.has_attribute("store", "city", "name"));
        assert_eq!(view.hash(), dims.schema().hash());
    }
}
