//! On-disk formats: versioned JSON for summary indices and analytic
//! queries.
//!
//! An index file records the content hash of the document it was built
//! from; loading succeeds but applying the index to a different document is
//! rejected with [`PersistError::DocHashMismatch`].

use idx_core::doc::Document;
use idx_core::summary::{SummaryGraph, SummaryKind, SummaryNode};
use idx_core::warehouse::{AggregateFn, AnalyticQuery, CompareOp, GroupKey, Selection};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const INDEX_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum PersistError {
    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported index format version {0}")]
    BadVersion(u32),
    #[error("unknown index kind '{0}'")]
    BadKind(String),
    #[error("malformed index file: {0}")]
    InvalidGraph(String),
    #[error("index was built for document {expected}, got {actual}")]
    DocHashMismatch { expected: String, actual: String },
    #[error("unknown comparison operator '{0}'")]
    BadOp(String),
    #[error("unknown aggregate function '{0}'")]
    BadAggregate(String),
}

#[derive(Debug, Serialize, Deserialize)]
struct IndexFile {
    version: u32,
    kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    k: Option<u32>,
    nodes: Vec<IndexFileNode>,
    #[serde(rename = "rootSids")]
    root_sids: Vec<usize>,
    #[serde(rename = "docHash")]
    doc_hash: String,
}

#[derive(Debug, Serialize, Deserialize)]
struct IndexFileNode {
    sid: usize,
    label: String,
    extent: Vec<usize>,
    #[serde(rename = "childSids")]
    child_sids: Vec<usize>,
}

/// Serializes a summary graph to the versioned JSON format.
pub fn index_to_json(graph: &SummaryGraph) -> String {
    let file = IndexFile {
        version: INDEX_FORMAT_VERSION,
        kind: graph.kind.as_str().to_string(),
        k: graph.k,
        nodes: graph
            .nodes
            .iter()
            .map(|n| IndexFileNode {
                sid: n.sid,
                label: n.label.clone(),
                extent: n.extent.clone(),
                child_sids: n.child_sids.clone(),
            })
            .collect(),
        root_sids: graph.root_sids.clone(),
        doc_hash: format!("{:016x}", graph.doc_hash),
    };
    serde_json::to_string_pretty(&file).expect("serializable")
}

/// Parses and validates the JSON format back into a summary graph.
pub fn index_from_json(text: &str) -> Result<SummaryGraph, PersistError> {
    let file: IndexFile = serde_json::from_str(text)?;
    if file.version != INDEX_FORMAT_VERSION {
        return Err(PersistError::BadVersion(file.version));
    }
    let kind = SummaryKind::from_name(&file.kind)
        .ok_or_else(|| PersistError::BadKind(file.kind.clone()))?;
    let doc_hash = u64::from_str_radix(&file.doc_hash, 16)
        .map_err(|_| PersistError::InvalidGraph(format!("bad docHash '{}'", file.doc_hash)))?;
    let node_count = file.nodes.len();
    let mut nodes = Vec::with_capacity(node_count);
    for (i, n) in file.nodes.into_iter().enumerate() {
        if n.sid != i {
            return Err(PersistError::InvalidGraph(format!(
                "node {i} carries sid {}",
                n.sid
            )));
        }
        if n.extent.is_empty() {
            return Err(PersistError::InvalidGraph(format!("node {i} has empty extent")));
        }
        if n.child_sids.iter().any(|&c| c >= node_count) {
            return Err(PersistError::InvalidGraph(format!(
                "node {i} references child sid out of range"
            )));
        }
        nodes.push(SummaryNode {
            sid: n.sid,
            label: n.label,
            extent: n.extent,
            child_sids: n.child_sids,
        });
    }
    if file.root_sids.iter().any(|&r| r >= node_count) {
        return Err(PersistError::InvalidGraph(
            "root sid out of range".to_string(),
        ));
    }
    Ok(SummaryGraph {
        kind,
        k: file.k,
        nodes,
        root_sids: file.root_sids,
        doc_hash,
    })
}

/// Rejects applying an index to a document it was not built from.
pub fn verify_doc_hash(graph: &SummaryGraph, doc: &Document) -> Result<(), PersistError> {
    let actual = doc.content_hash();
    if actual != graph.doc_hash {
        return Err(PersistError::DocHashMismatch {
            expected: format!("{:016x}", graph.doc_hash),
            actual: format!("{actual:016x}"),
        });
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Analytic query files.
// ---------------------------------------------------------------------------

#[derive(Debug, Serialize, Deserialize)]
struct QueryFile {
    #[serde(default)]
    selections: Vec<SelectionEntry>,
    #[serde(rename = "groupBy", default)]
    group_by: Vec<GroupEntry>,
    aggregate: AggregateEntry,
}

#[derive(Debug, Serialize, Deserialize)]
struct SelectionEntry {
    dim: String,
    level: String,
    attr: String,
    op: String,
    value: String,
}

#[derive(Debug, Serialize, Deserialize)]
struct GroupEntry {
    dim: String,
    level: String,
    attr: String,
}

#[derive(Debug, Serialize, Deserialize)]
struct AggregateEntry {
    #[serde(rename = "fn")]
    func: String,
    measure: String,
}

/// Parses the JSON query format into an [`AnalyticQuery`].
pub fn query_from_json(text: &str) -> Result<AnalyticQuery, PersistError> {
    let file: QueryFile = serde_json::from_str(text)?;
    let mut selections = Vec::with_capacity(file.selections.len());
    for s in file.selections {
        let op = CompareOp::from_name(&s.op).ok_or_else(|| PersistError::BadOp(s.op.clone()))?;
        selections.push(Selection {
            dim: s.dim,
            level: s.level,
            attr: s.attr,
            op,
            value: s.value,
        });
    }
    let group_by = file
        .group_by
        .into_iter()
        .map(|g| GroupKey {
            dim: g.dim,
            level: g.level,
            attr: g.attr,
        })
        .collect();
    let aggregate = AggregateFn::from_name(&file.aggregate.func)
        .ok_or_else(|| PersistError::BadAggregate(file.aggregate.func.clone()))?;
    Ok(AnalyticQuery {
        selections,
        group_by,
        aggregate,
        measure: file.aggregate.measure,
    })
}

/// Serializes a query to the JSON file format.
pub fn query_to_json(q: &AnalyticQuery) -> String {
    serde_json::to_string_pretty(&query_file(q)).expect("serializable")
}

/// One-line form, used as the query column in bench reports.
pub fn query_to_json_compact(q: &AnalyticQuery) -> String {
    serde_json::to_string(&query_file(q)).expect("serializable")
}

fn query_file(q: &AnalyticQuery) -> QueryFile {
    QueryFile {
        selections: q
            .selections
            .iter()
            .map(|s| SelectionEntry {
                dim: s.dim.clone(),
                level: s.level.clone(),
                attr: s.attr.clone(),
                op: s.op.as_str().to_string(),
                value: s.value.clone(),
            })
            .collect(),
        group_by: q
            .group_by
            .iter()
            .map(|g| GroupEntry {
                dim: g.dim.clone(),
                level: g.level.clone(),
                attr: g.attr.clone(),
            })
            .collect(),
        aggregate: AggregateEntry {
            func: q.aggregate.as_str().to_string(),
            measure: q.measure.clone(),
        },
    }
}
