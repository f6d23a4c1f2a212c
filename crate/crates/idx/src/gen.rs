//! Deterministic corpus generators.
//!
//! Both generators are pure functions of their parameters: the same
//! `(params, seed)` always produces byte-identical serialized documents.
//! The PRNG is a fixed splitmix64 so the contract survives dependency
//! upgrades.

use idx_core::decimal::Decimal;
use idx_core::doc::{Document, DocumentBuilder, NodeId};
use idx_core::warehouse::{
    dimensions_to_document, facts_to_document, AggregateFn, AnalyticQuery, CompareOp, Dimension,
    DimensionMember, DimensionSet, FactCell, FactTable, GroupKey, Selection,
};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GenError {
    #[error("parameter out of range: {0}")]
    ParamOutOfRange(String),
}

/// splitmix64; stable across releases by construction.
#[derive(Debug, Clone)]
pub struct Rng(u64);

impl Rng {
    pub fn new(seed: u64) -> Self {
        Rng(seed)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    }

    pub fn below(&mut self, n: usize) -> usize {
        assert!(n > 0);
        (self.next_u64() % n as u64) as usize
    }

    pub fn chance(&mut self, num: u64, den: u64) -> bool {
        self.next_u64() % den < num
    }
}

/// Spreadsheet-style labels: a, b, ..., z, aa, ab, ...
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
    String::from_utf8(out).expect("ascii")
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TreeGenParams {
    #[serde(rename = "nodeCount")]
    pub node_count: usize,
    #[serde(rename = "maxDepth")]
    pub max_depth: usize,
    #[serde(rename = "maxFanout")]
    pub max_fanout: usize,
    #[serde(rename = "labelAlphabetSize")]
    pub label_alphabet_size: usize,
    pub seed: u64,
}

impl Default for TreeGenParams {
    fn default() -> Self {
        TreeGenParams {
            node_count: 5000,
            max_depth: 10,
            max_fanout: 5,
            label_alphabet_size: 4,
            seed: 42,
        }
    }
}

impl TreeGenParams {
    fn validate(&self) -> Result<(), GenError> {
        let positive = [
            ("nodeCount", self.node_count),
            ("maxDepth", self.max_depth),
            ("maxFanout", self.max_fanout),
            ("labelAlphabetSize", self.label_alphabet_size),
        ];
        for (name, v) in positive {
            if v == 0 {
                return Err(GenError::ParamOutOfRange(format!("{name} must be >= 1")));
            }
        }
        Ok(())
    }
}

/// Random element tree with exactly `node_count` element nodes.
pub fn generate_tree(params: &TreeGenParams) -> Result<Document, GenError> {
    params.validate()?;
    let mut rng = Rng::new(params.seed);
    let mut b = DocumentBuilder::new();
    let alphabet = params.label_alphabet_size;
    let root = b.element(None, label_for(rng.below(alphabet)));
    // (id, depth, fanout) of nodes still allowed to take children.
    let mut eligible: Vec<(NodeId, usize, usize)> = vec![(root, 0, 0)];
    for _ in 1..params.node_count {
        if eligible.is_empty() {
            return Err(GenError::ParamOutOfRange(format!(
                "maxDepth {} and maxFanout {} cannot hold {} nodes",
                params.max_depth, params.max_fanout, params.node_count
            )));
        }
        let slot = rng.below(eligible.len());
        let (parent, depth, _) = eligible[slot];
        let child = b.element(Some(parent), label_for(rng.below(alphabet)));
        eligible[slot].2 += 1;
        if eligible[slot].2 >= params.max_fanout {
            eligible.swap_remove(slot);
        }
        if depth + 1 < params.max_depth {
            eligible.push((child, depth + 1, 0));
        }
    }
    Ok(b.finish(params.seed as u32).expect("root exists"))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StarGenParams {
    #[serde(rename = "factCount")]
    pub fact_count: usize,
    #[serde(rename = "dimensionCount")]
    pub dimension_count: usize,
    #[serde(rename = "levelsPerDimension")]
    pub levels_per_dimension: usize,
    #[serde(rename = "membersPerLevel")]
    pub members_per_level: usize,
    #[serde(rename = "attributesPerLevel")]
    pub attributes_per_level: usize,
    #[serde(rename = "measureCount")]
    pub measure_count: usize,
    pub seed: u64,
}

impl Default for StarGenParams {
    fn default() -> Self {
        StarGenParams {
            fact_count: 1000,
            dimension_count: 3,
            levels_per_dimension: 3,
            members_per_level: 5,
            attributes_per_level: 2,
            measure_count: 2,
            seed: 42,
        }
    }
}

impl StarGenParams {
    fn validate(&self) -> Result<(), GenError> {
        let positive = [
            ("dimensionCount", self.dimension_count),
            ("levelsPerDimension", self.levels_per_dimension),
            ("membersPerLevel", self.members_per_level),
            ("attributesPerLevel", self.attributes_per_level),
            ("measureCount", self.measure_count),
        ];
        for (name, v) in positive {
            if v == 0 {
                return Err(GenError::ParamOutOfRange(format!("{name} must be >= 1")));
            }
        }
        Ok(())
    }
}

/// Generated warehouse: the in-memory model plus both serialized documents.
#[derive(Debug, Clone)]
pub struct StarWarehouse {
    pub dims: DimensionSet,
    pub facts: FactTable,
    pub facts_doc: Document,
    pub dims_doc: Document,
    measure_count: usize,
}

impl StarWarehouse {
    pub fn measure_names(&self) -> Vec<String> {
        (0..self.measure_count).map(|i| format!("m{i}")).collect()
    }
}

/// Random star warehouse. Level 0 is the coarsest; facts reference leaf
/// members, so every ancestor chain spans all levels. Even-numbered
/// measures hold integers, odd-numbered ones two-decimal fractions.
pub fn generate_star(params: &StarGenParams) -> Result<StarWarehouse, GenError> {
    params.validate()?;
    let mut rng = Rng::new(params.seed);
    let mut dims_map = BTreeMap::new();
    for di in 0..params.dimension_count {
        let dim = format!("dim{di}");
        let mut members = BTreeMap::new();
        for li in 0..params.levels_per_dimension {
            for mi in 0..params.members_per_level {
                let id = format!("{dim}_l{li}m{mi}");
                let parent = (li > 0).then(|| {
                    format!("{dim}_l{}m{}", li - 1, rng.below(params.members_per_level))
                });
                let mut attributes = BTreeMap::new();
                for ai in 0..params.attributes_per_level {
                    let value = if ai % 2 == 0 {
                        format!("{}", rng.below(1000))
                    } else {
                        format!("cat{}", rng.below(8))
                    };
                    attributes.insert(format!("attr{ai}"), value);
                }
                members.insert(
                    id.clone(),
                    DimensionMember {
                        dim: dim.clone(),
                        member_id: id,
                        level: format!("level{li}"),
                        parent,
                        attributes,
                    },
                );
            }
        }
        dims_map.insert(
            dim.clone(),
            Dimension { name: dim, members },
        );
    }
    let dims = DimensionSet::new(dims_map);

    let leaf = params.levels_per_dimension - 1;
    let mut cells = Vec::with_capacity(params.fact_count);
    for _ in 0..params.fact_count {
        let mut refs = BTreeMap::new();
        for di in 0..params.dimension_count {
            let dim = format!("dim{di}");
            let member = format!("{dim}_l{leaf}m{}", rng.below(params.members_per_level));
            refs.insert(dim, member);
        }
        let mut measures = BTreeMap::new();
        for mi in 0..params.measure_count {
            let value = if mi % 2 == 0 {
                Decimal::from_u64(rng.below(10_000) as u64)
            } else {
                Decimal::parse(&format!("{}.{:02}", rng.below(5_000), rng.below(100)))
                    .expect("formatted decimal")
            };
            measures.insert(format!("m{mi}"), value);
        }
        cells.push(FactCell { refs, measures });
    }
    let facts = FactTable { cells };

    let facts_doc = facts_to_document(&facts, params.seed as u32);
    let dims_doc = dimensions_to_document(&dims, params.seed as u32 ^ 1);
    Ok(StarWarehouse {
        dims,
        facts,
        facts_doc,
        dims_doc,
        measure_count: params.measure_count,
    })
}

/// Random suffix path query (`//l1/l2/...`) sampled from real trailing
/// label sequences, with occasional wildcards and label mutations.
pub fn random_suffix_query(rng: &mut Rng, doc: &Document, max_len: usize, alphabet: usize) -> String {
    let elements: Vec<NodeId> = doc.elements().map(|n| n.id).collect();
    let node = elements[rng.below(elements.len())];
    let want = 1 + rng.below(max_len.max(1));
    let mut labels = Vec::new();
    let mut cur = Some(node);
    while let Some(id) = cur {
        if labels.len() >= want {
            break;
        }
        let n = doc.node(id).expect("valid id");
        labels.push(n.label.clone());
        cur = n.parent;
    }
    labels.reverse();
    for l in labels.iter_mut() {
        if rng.chance(1, 10) {
            *l = "*".to_string();
        } else if rng.chance(1, 10) {
            *l = label_for(rng.below(alphabet));
        }
    }
    format!("//{}", labels.join("/"))
}

/// Random twig query: a suffix base with one or two existential branches.
pub fn random_twig_query(rng: &mut Rng, doc: &Document, alphabet: usize) -> String {
    let elements: Vec<NodeId> = doc.elements().map(|n| n.id).collect();
    let node = elements[rng.below(elements.len())];
    let want = 1 + rng.below(3);
    let mut labels = Vec::new();
    let mut cur = Some(node);
    while let Some(id) = cur {
        if labels.len() >= want {
            break;
        }
        let n = doc.node(id).expect("valid id");
        labels.push(n.label.clone());
        cur = n.parent;
    }
    labels.reverse();
    let mut parts: Vec<String> = labels
        .iter()
        .enumerate()
        .map(|(i, l)| {
            let sep = if i == 0 || rng.chance(1, 8) { "//" } else { "/" };
            format!("{sep}{l}")
        })
        .collect();
    for _ in 0..1 + rng.below(2) {
        let mut b = String::from("[");
        if rng.chance(1, 2) {
            b.push_str("./");
            if rng.chance(1, 3) {
                b.push('/');
            }
        }
        let len = 1 + rng.below(2);
        for j in 0..len {
            if j > 0 {
                b.push('/');
            }
            b.push_str(&label_for(rng.below(alphabet)));
        }
        b.push(']');
        let at = rng.below(parts.len());
        parts[at].push_str(&b);
    }
    parts.concat()
}

/// Random analytic query drawn from the warehouse vocabulary. Constants are
/// sampled from real attribute values half of the time.
pub fn random_analytic_query(rng: &mut Rng, dims: &DimensionSet, measures: &[String]) -> AnalyticQuery {
    let ops = [
        CompareOp::Eq,
        CompareOp::Ne,
        CompareOp::Lt,
        CompareOp::Le,
        CompareOp::Gt,
        CompareOp::Ge,
    ];
    let aggs = [
        AggregateFn::Count,
        AggregateFn::Sum,
        AggregateFn::Avg,
        AggregateFn::Min,
        AggregateFn::Max,
    ];
    // (dim, level, attr, value) pool from actual members.
    let mut pool = Vec::new();
    for d in dims.dimensions() {
        for m in d.members.values() {
            for (attr, value) in &m.attributes {
                pool.push((d.name.clone(), m.level.clone(), attr.clone(), value.clone()));
            }
        }
    }
    assert!(!pool.is_empty(), "warehouse has no attributes");

    let mut selections = Vec::new();
    for _ in 0..rng.below(3) {
        let (dim, level, attr, sample) = pool[rng.below(pool.len())].clone();
        let value = if rng.chance(1, 2) {
            sample
        } else {
            format!("{}", rng.below(1000))
        };
        selections.push(Selection {
            dim,
            level,
            attr,
            op: ops[rng.below(ops.len())],
            value,
        });
    }
    let mut group_by = Vec::new();
    for _ in 0..rng.below(3) {
        let (dim, level, attr, _) = pool[rng.below(pool.len())].clone();
        group_by.push(GroupKey { dim, level, attr });
    }
    AnalyticQuery {
        selections,
        group_by,
        aggregate: aggs[rng.below(aggs.len())],
        measure: measures[rng.below(measures.len())].clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use idx_core::warehouse::{load_dimensions, load_facts};

    #[test]
    fn single_node_tree() {
        let params = TreeGenParams {
            node_count: 1,
            ..TreeGenParams::default()
        };
        let doc = generate_tree(&params).unwrap();
        assert_eq!(doc.element_count(), 1);
    }

    #[test]
    fn tree_generation_is_deterministic() {
        let params = TreeGenParams {
            node_count: 500,
            seed: 7,
            ..TreeGenParams::default()
        };
        let a = generate_tree(&params).unwrap().serialize();
        let b = generate_tree(&params).unwrap().serialize();
        assert_eq!(a, b);
        let other = generate_tree(&TreeGenParams {
            seed: 8,
            node_count: 500,
            ..TreeGenParams::default()
        })
        .unwrap()
        .serialize();
        assert_ne!(a, other);
    }

    #[test]
    fn tree_has_exact_node_count() {
        let params = TreeGenParams {
            node_count: 10_000,
            ..TreeGenParams::default()
        };
        let doc = generate_tree(&params).unwrap();
        assert_eq!(doc.element_count(), 10_000);
        let reparsed =
            idx_core::parse::parse_document(doc.serialize().as_bytes(), 0).unwrap();
        assert_eq!(reparsed.element_count(), 10_000);
    }

    #[test]
    fn impossible_tree_params_rejected() {
        let params = TreeGenParams {
            node_count: 100,
            max_depth: 2,
            max_fanout: 3,
            ..TreeGenParams::default()
        };
        assert!(matches!(
            generate_tree(&params),
            Err(GenError::ParamOutOfRange(_))
        ));
        assert!(matches!(
            generate_tree(&TreeGenParams {
                node_count: 0,
                ..TreeGenParams::default()
            }),
            Err(GenError::ParamOutOfRange(_))
        ));
    }

    #[test]
    fn star_zero_facts_is_empty_cube() {
        let params = StarGenParams {
            fact_count: 0,
            ..StarGenParams::default()
        };
        let w = generate_star(&params).unwrap();
        assert!(w.facts.is_empty());
        assert_eq!(w.facts_doc.serialize(), "<CubeFacts/>");
    }

    #[test]
    fn star_generation_is_deterministic_and_loadable() {
        let params = StarGenParams {
            fact_count: 1000,
            seed: 11,
            ..StarGenParams::default()
        };
        let a = generate_star(&params).unwrap();
        let b = generate_star(&params).unwrap();
        assert_eq!(a.facts_doc.serialize(), b.facts_doc.serialize());
        assert_eq!(a.dims_doc.serialize(), b.dims_doc.serialize());

        let dims = load_dimensions(
            &idx_core::parse::parse_document(a.dims_doc.serialize().as_bytes(), 0).unwrap(),
        )
        .unwrap();
        let facts = load_facts(
            &idx_core::parse::parse_document(a.facts_doc.serialize().as_bytes(), 1).unwrap(),
            &dims,
        )
        .unwrap();
        assert_eq!(facts.len(), 1000);
        assert_eq!(dims, a.dims);
        assert_eq!(facts, a.facts);
    }
}
