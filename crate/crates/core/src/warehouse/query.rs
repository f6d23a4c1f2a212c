//! Analytic queries, join-eliminating rewriting, and the two executors.
//!
//! [`execute_with_joins`] is the reference: per fact, every selection and
//! group-by attribute is resolved by walking the member's ancestor chain in
//! the dimensions. [`rewrite_query`] turns the same query into a plan over
//! inlined `level.attr` keys with no member lookups at all, and
//! [`execute_on_index`] runs that plan as a single scan of index cells.
//! Both executors must produce the same table; they share only the value
//! comparison and aggregation semantics, not the access path.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::decimal::Decimal;

use super::{DimensionSet, FactTable, JoinIndex, WarehouseError, WarehouseSchema};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CompareOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl CompareOp {
    pub fn as_str(&self) -> &'static str {
        match self {
            CompareOp::Eq => "=",
            CompareOp::Ne => "!=",
            CompareOp::Lt => "<",
            CompareOp::Le => "<=",
            CompareOp::Gt => ">",
            CompareOp::Ge => ">=",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "=" => Some(CompareOp::Eq),
            "!=" => Some(CompareOp::Ne),
            "<" => Some(CompareOp::Lt),
            "<=" => Some(CompareOp::Le),
            ">" => Some(CompareOp::Gt),
            ">=" => Some(CompareOp::Ge),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AggregateFn {
    Count,
    Sum,
    Avg,
    Min,
    Max,
}

impl AggregateFn {
    pub fn as_str(&self) -> &'static str {
        match self {
            AggregateFn::Count => "COUNT",
            AggregateFn::Sum => "SUM",
            AggregateFn::Avg => "AVG",
            AggregateFn::Min => "MIN",
            AggregateFn::Max => "MAX",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s.to_ascii_uppercase().as_str() {
            "COUNT" => Some(AggregateFn::Count),
            "SUM" => Some(AggregateFn::Sum),
            "AVG" => Some(AggregateFn::Avg),
            "MIN" => Some(AggregateFn::Min),
            "MAX" => Some(AggregateFn::Max),
            _ => None,
        }
    }
}

/// One selection: compare a dimension attribute with a constant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Selection {
    pub dim: String,
    pub level: String,
    pub attr: String,
    pub op: CompareOp,
    pub value: String,
}

/// One grouping key: a dimension attribute.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupKey {
    pub dim: String,
    pub level: String,
    pub attr: String,
}

/// Declarative star query: selections, group-by keys and one aggregate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnalyticQuery {
    pub selections: Vec<Selection>,
    pub group_by: Vec<GroupKey>,
    pub aggregate: AggregateFn,
    /// Measure the aggregate runs over; ignored by COUNT, which counts
    /// matching facts.
    pub measure: String,
}

/// Predicate of a rewritten plan: an inlined key, nothing else.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InlinedPredicate {
    pub dim: String,
    /// `level.attr` key into a cell's inlined attribute map.
    pub key: String,
    pub op: CompareOp,
    pub value: String,
}

/// Group key of a rewritten plan.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InlinedKey {
    pub dim: String,
    pub key: String,
}

/// A plan over join-index cells only. The type has no member-lookup
/// construct, and [`RewrittenQuery::is_join_free`] checks the invariant
/// explicitly for reporting.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RewrittenQuery {
    pub predicates: Vec<InlinedPredicate>,
    pub group_keys: Vec<InlinedKey>,
    pub aggregate: AggregateFn,
    pub measure: String,
    pub schema_hash: u64,
}

impl RewrittenQuery {
    /// Every reference in the plan is an inlined `level.attr` key; there is
    /// no step that could resolve a dimension member.
    pub fn is_join_free(&self) -> bool {
        self.predicates.iter().all(|p| p.key.contains('.'))
            && self.group_keys.iter().all(|k| k.key.contains('.'))
    }
}

/// Rewrites a query against the given schema into a join-free plan:
/// selections and group-bys become inlined-key references, the aggregate is
/// carried over unchanged.
pub fn rewrite_query(
    q: &AnalyticQuery,
    schema: &WarehouseSchema,
) -> Result<RewrittenQuery, WarehouseError> {
    let check = |dim: &str, level: &str, attr: &str| -> Result<(), WarehouseError> {
        if schema.has_attribute(dim, level, attr) {
            Ok(())
        } else {
            Err(WarehouseError::UnknownAttribute {
                dim: dim.to_string(),
                level: level.to_string(),
                attr: attr.to_string(),
            })
        }
    };
    let mut predicates = Vec::with_capacity(q.selections.len());
    for s in &q.selections {
        check(&s.dim, &s.level, &s.attr)?;
        predicates.push(InlinedPredicate {
            dim: s.dim.clone(),
            key: format!("{}.{}", s.level, s.attr),
            op: s.op,
            value: s.value.clone(),
        });
    }
    let mut group_keys = Vec::with_capacity(q.group_by.len());
    for g in &q.group_by {
        check(&g.dim, &g.level, &g.attr)?;
        group_keys.push(InlinedKey {
            dim: g.dim.clone(),
            key: format!("{}.{}", g.level, g.attr),
        });
    }
    Ok(RewrittenQuery {
        predicates,
        group_keys,
        aggregate: q.aggregate,
        measure: q.measure.clone(),
        schema_hash: schema.hash(),
    })
}

/// Grouped aggregate result with deterministic row order.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ResultTable {
    pub rows: BTreeMap<Vec<String>, Decimal>,
}

impl ResultTable {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Exact equality for COUNT/MIN/MAX and integer sums; relative 1e-9
    /// closeness for fractional SUM/AVG values.
    pub fn matches_with_tolerance(&self, other: &ResultTable, aggregate: AggregateFn) -> bool {
        if self.rows.len() != other.rows.len() {
            return false;
        }
        self.rows.iter().zip(other.rows.iter()).all(|((ka, va), (kb, vb))| {
            if ka != kb {
                return false;
            }
            let exact = matches!(
                aggregate,
                AggregateFn::Count | AggregateFn::Min | AggregateFn::Max
            ) || (va.is_integer() && vb.is_integer());
            if exact {
                va == vb
            } else {
                Decimal::within_relative(va, vb, 9)
            }
        })
    }

    /// First few row differences, for correctness-failure reports.
    pub fn diff(&self, other: &ResultTable) -> String {
        let mut out = String::new();
        let keys: BTreeSet<&Vec<String>> = self.rows.keys().chain(other.rows.keys()).collect();
        let mut shown = 0;
        for key in keys {
            let l = self.rows.get(key);
            let r = other.rows.get(key);
            if l != r {
                out.push_str(&format!("  {key:?}: {l:?} vs {r:?}\n"));
                shown += 1;
                if shown >= 10 {
                    out.push_str("  ...\n");
                    break;
                }
            }
        }
        out
    }
}

/// Shared aggregation state per group. Missing measures leave SUM/AVG/MIN/
/// MAX untouched but still count for COUNT.
#[derive(Debug, Default, Clone)]
struct Accumulator {
    rows: u64,
    measured: u64,
    sum: Option<Decimal>,
    min: Option<Decimal>,
    max: Option<Decimal>,
}

impl Accumulator {
    fn feed(&mut self, measure: Option<&Decimal>) {
        self.rows += 1;
        if let Some(v) = measure {
            self.measured += 1;
            self.sum = Some(match self.sum {
                Some(acc) => acc.add(v),
                None => *v,
            });
            self.min = Some(match self.min {
                Some(m) => m.min(*v),
                None => *v,
            });
            self.max = Some(match self.max {
                Some(m) => m.max(*v),
                None => *v,
            });
        }
    }

    /// `None` drops the group row (no measured value to aggregate).
    fn finalize(&self, agg: AggregateFn) -> Option<Decimal> {
        match agg {
            AggregateFn::Count => Some(Decimal::from_u64(self.rows)),
            AggregateFn::Sum => self.sum,
            AggregateFn::Min => self.min,
            AggregateFn::Max => self.max,
            AggregateFn::Avg => self
                .sum
                .map(|s| s.div_by_count(self.measured.max(1), 9)),
        }
    }
}

/// Predicate semantics shared by both executors: numeric comparison when
/// both sides parse as decimals, bytewise string comparison otherwise.
fn compare_values(op: CompareOp, actual: &str, constant: &str) -> bool {
    use core::cmp::Ordering;
    let ord = match (Decimal::parse(actual), Decimal::parse(constant)) {
        (Ok(a), Ok(b)) => a.cmp(&b),
        _ => actual.cmp(constant),
    };
    match op {
        CompareOp::Eq => ord == Ordering::Equal,
        CompareOp::Ne => ord != Ordering::Equal,
        CompareOp::Lt => ord == Ordering::Less,
        CompareOp::Le => ord != Ordering::Greater,
        CompareOp::Gt => ord == Ordering::Greater,
        CompareOp::Ge => ord != Ordering::Less,
    }
}

fn group_rows(
    groups: BTreeMap<Vec<String>, Accumulator>,
    aggregate: AggregateFn,
) -> ResultTable {
    let rows = groups
        .into_iter()
        .filter_map(|(key, acc)| acc.finalize(aggregate).map(|v| (key, v)))
        .collect();
    ResultTable { rows }
}

/// Reference executor: resolves every attribute by walking the member's
/// ancestor chain to the named level, then filters, groups and aggregates.
pub fn execute_with_joins(
    q: &AnalyticQuery,
    facts: &FactTable,
    dims: &DimensionSet,
) -> Result<ResultTable, WarehouseError> {
    let mut groups: BTreeMap<Vec<String>, Accumulator> = BTreeMap::new();
    'cells: for (cell_idx, cell) in facts.cells.iter().enumerate() {
        for s in &q.selections {
            let member = cell.refs.get(&s.dim).ok_or_else(|| {
                WarehouseError::MissingDimensionRef {
                    cell: cell_idx,
                    dim: s.dim.clone(),
                }
            })?;
            let actual = dims.resolve_attribute(&s.dim, member, &s.level, &s.attr)?;
            if !compare_values(s.op, actual, &s.value) {
                continue 'cells;
            }
        }
        let mut key = Vec::with_capacity(q.group_by.len());
        for g in &q.group_by {
            let member = cell.refs.get(&g.dim).ok_or_else(|| {
                WarehouseError::MissingDimensionRef {
                    cell: cell_idx,
                    dim: g.dim.clone(),
                }
            })?;
            key.push(
                dims.resolve_attribute(&g.dim, member, &g.level, &g.attr)?
                    .to_string(),
            );
        }
        groups
            .entry(key)
            .or_default()
            .feed(cell.measures.get(&q.measure));
    }
    Ok(group_rows(groups, q.aggregate))
}

/// Index executor: one scan over join-index cells, no dimension access.
pub fn execute_on_index(
    plan: &RewrittenQuery,
    index: &JoinIndex,
) -> Result<ResultTable, WarehouseError> {
    if plan.schema_hash != index.schema_hash {
        return Err(WarehouseError::SchemaMismatch);
    }
    let fetch = |cell: &super::JoinIndexCell,
                 dim: &str,
                 key: &str|
     -> Result<String, WarehouseError> {
        cell.inlined
            .get(dim)
            .and_then(|m| m.get(key))
            .cloned()
            .ok_or_else(|| {
                let (level, attr) = key.split_once('.').unwrap_or((key, ""));
                WarehouseError::UnknownAttribute {
                    dim: dim.to_string(),
                    level: level.to_string(),
                    attr: attr.to_string(),
                }
            })
    };

    let mut groups: BTreeMap<Vec<String>, Accumulator> = BTreeMap::new();
    'cells: for cell in &index.cells {
        for p in &plan.predicates {
            let actual = fetch(cell, &p.dim, &p.key)?;
            if !compare_values(p.op, &actual, &p.value) {
                continue 'cells;
            }
        }
        let mut key = Vec::with_capacity(plan.group_keys.len());
        for g in &plan.group_keys {
            key.push(fetch(cell, &g.dim, &g.key)?);
        }
        groups
            .entry(key)
            .or_default()
            .feed(cell.measures.get(&plan.measure));
    }
    Ok(group_rows(groups, plan.aggregate))
}
