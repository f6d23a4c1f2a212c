//! Acceptance suite: one test per criterion, each printing a PASS line
//! (visible with `--nocapture`). Failures abort with a diagnostic.
//!
//! Run with `cargo test -p idx --test acceptance -- --nocapture`.

use std::collections::BTreeSet;
use std::time::Instant;

use idx::bench::{run_bench, BenchConfig};
use idx::gen::{
    generate_star, generate_tree, label_for, random_analytic_query, random_suffix_query,
    random_twig_query, Rng, StarGenParams, TreeGenParams,
};
use idx::persist::{index_from_json, index_to_json, verify_doc_hash, PersistError};
use idx_core::doc::{Document, NodeId};
use idx_core::eval::{eval_on_summary, eval_twig};
use idx_core::join::{is_ancestor, structural_join, NodeList};
use idx_core::parse::parse_document;
use idx_core::path::{eval_naive, parse_path, validate_candidates};
use idx_core::region::assign_regions;
use idx_core::summary::{
    build_ak_index, build_dataguide, build_one_index, k_bisimulation, SummaryGraph,
};
use idx_core::warehouse::{
    build_join_index, execute_on_index, execute_with_joins, load_dimensions, load_facts,
    rewrite_query, AggregateFn,
};

fn tree(seed: u64, node_count: usize, max_depth: usize, max_fanout: usize, alphabet: usize) -> Document {
    generate_tree(&TreeGenParams {
        node_count,
        max_depth,
        max_fanout,
        label_alphabet_size: alphabet,
        seed,
    })
    .expect("valid params")
}

fn ancestor_by_parent_walk(doc: &Document, a: NodeId, d: NodeId) -> bool {
    let mut cur = doc.node(d).unwrap().parent;
    while let Some(p) = cur {
        if p == a {
            return true;
        }
        cur = doc.node(p).unwrap().parent;
    }
    false
}

/// Criterion 1: laminarity and is_ancestor equivalence with the parent
/// walk, all pairs on small trees and sampled pairs up to 10,000 nodes.
#[test]
fn acceptance_01_region_laminarity_and_ancestor_oracle() {
    let start = Instant::now();
    let mut sizes: Vec<usize> = (0..90).map(|i| 3 + (i * 297) / 89).collect();
    sizes.extend([1_000, 2_000, 3_000, 4_000, 5_000, 6_500, 8_000, 9_000, 10_000, 10_000]);
    assert_eq!(sizes.len(), 100);

    let mut rng = Rng::new(0xACC1);
    let mut checked_pairs = 0u64;
    for (i, &size) in sizes.iter().enumerate() {
        let doc = tree(1000 + i as u64, size, 14, 6, 3);
        let regions = assign_regions(&doc);
        let n = doc.len();
        let check = |u: NodeId, v: NodeId| {
            let ru = &regions[u];
            let rv = &regions[v];
            if u == v {
                return;
            }
            let nested = ru.contains(rv) || rv.contains(ru);
            let disjoint = ru.end < rv.start || rv.end < ru.start;
            assert!(nested ^ disjoint, "partial interval overlap: {ru:?} vs {rv:?}");
            assert_eq!(
                is_ancestor(ru, rv).unwrap(),
                ancestor_by_parent_walk(&doc, u, v),
                "is_ancestor disagrees with parent walk on nodes {u},{v}"
            );
        };
        if n <= 300 {
            for u in 0..n {
                for v in 0..n {
                    check(u, v);
                    checked_pairs += 1;
                }
            }
        } else {
            for _ in 0..30_000 {
                check(rng.below(n), rng.below(n));
                checked_pairs += 1;
            }
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    assert!(elapsed < 10.0, "criterion 1 took {elapsed:.1}s (limit 10s)");
    println!(
        "ACCEPTANCE 1 PASS: laminarity + is_ancestor oracle, {checked_pairs} pairs over 100 trees, zero mismatches, {elapsed:.2}s"
    );
}

/// Criterion 2: structural_join equals the nested-loop filter, with the
/// documented (descendant start, ancestor start) ordering.
#[test]
fn acceptance_02_structural_join_brute_force() {
    let start = Instant::now();
    let mut rng = Rng::new(0xACC2);
    let mut total_pairs = 0usize;
    for i in 0..50 {
        let size = 100 + rng.below(1_901);
        let alphabet = 2 + rng.below(4);
        let doc = tree(2000 + i, size, 12, 6, alphabet);
        let regions = assign_regions(&doc);
        for _ in 0..3 {
            let a_label = label_for(rng.below(alphabet));
            let d_label = label_for(rng.below(alphabet));
            let by_label = |label: &str| -> NodeList {
                NodeList::from_ids(
                    &regions,
                    doc.elements().filter(|n| n.label == label).map(|n| n.id),
                )
            };
            let a_list = by_label(&a_label);
            let d_list = by_label(&d_label);
            let got = structural_join(&a_list, &d_list).unwrap();
            // Brute force oracle in the documented output order.
            let mut want = Vec::new();
            for &(d_code, d_id) in d_list.items() {
                for &(a_code, a_id) in a_list.items() {
                    if is_ancestor(&a_code, &d_code).unwrap() {
                        want.push((a_id, d_id));
                    }
                }
            }
            assert_eq!(got, want, "join mismatch for {a_label}//{d_label}");
            let keys: Vec<(u32, u32)> = got
                .iter()
                .map(|&(a, d)| (regions[d].start, regions[a].start))
                .collect();
            assert!(keys.windows(2).all(|w| w[0] <= w[1]), "output order broken");
            total_pairs += got.len();
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    assert!(elapsed < 10.0, "criterion 2 took {elapsed:.1}s (limit 10s)");
    println!(
        "ACCEPTANCE 2 PASS: structural_join == brute force on 50 trees ({total_pairs} result pairs), {elapsed:.2}s"
    );
}

/// Criterion 3: DataGuide node count equals the distinct label-path count,
/// and anchored queries answered on the DataGuide alone match eval_naive.
#[test]
fn acceptance_03_dataguide_counts_and_anchored_queries() {
    let start = Instant::now();
    let mut rng = Rng::new(0xACC3);
    for i in 0..100 {
        let size = 1 + rng.below(1_500);
        let alphabet = 2 + rng.below(4);
        let doc = tree(3000 + i, size, 10, 5, alphabet);
        let guide = build_dataguide(&doc);

        // Oracle: DFS enumeration of distinct root-to-node label paths.
        let mut paths: BTreeSet<Vec<String>> = BTreeSet::new();
        let mut stack = vec![(doc.root_id(), vec![doc.root().label.clone()])];
        while let Some((id, path)) = stack.pop() {
            paths.insert(path.clone());
            for c in doc.element_children(id) {
                let mut next = path.clone();
                next.push(c.label.clone());
                stack.push((c.id, next));
            }
        }
        assert_eq!(guide.node_count(), paths.len(), "tree {i}");

        // One random anchored query per tree, 100 total.
        let node = rng.below(doc.element_count());
        let node = doc.elements().nth(node).unwrap().id;
        let mut labels: Vec<String> = doc
            .label_path(node)
            .unwrap()
            .labels()
            .to_vec();
        for l in labels.iter_mut() {
            if rng.chance(1, 8) {
                *l = "*".to_string();
            }
        }
        let mut text = String::new();
        for (j, l) in labels.iter().enumerate() {
            if j > 0 && rng.chance(1, 10) {
                text.push('/');
            }
            text.push('/');
            text.push_str(l);
        }
        let q = parse_path(&text).unwrap();
        let ans = eval_on_summary(&guide, &q);
        assert!(ans.exact, "dataguide answers are exact ({text})");
        assert_eq!(ans.candidates, eval_naive(&doc, &q), "query {text} on tree {i}");
    }
    let elapsed = start.elapsed().as_secs_f64();
    assert!(elapsed < 20.0, "criterion 3 took {elapsed:.1}s (limit 20s)");
    println!(
        "ACCEPTANCE 3 PASS: DataGuide counts match DFS oracle and 100 anchored queries match eval_naive, {elapsed:.2}s"
    );
}

/// Criterion 4: refinement chain, label blocks at k=0, fixpoint = 1-index.
#[test]
fn acceptance_04_refinement_chain_and_fixpoint() {
    let start = Instant::now();
    let mut rng = Rng::new(0xACC4);
    for i in 0..50 {
        let size = 1 + rng.below(800);
        let doc = tree(4000 + i, size, 9, 5, 3);
        let height = doc.elements().map(|n| doc.depth(n.id)).max().unwrap() as u32;

        // A(0) blocks are exactly the distinct labels.
        let p0 = k_bisimulation(&doc, 0);
        let labels: BTreeSet<&str> = doc.elements().map(|n| n.label.as_str()).collect();
        assert_eq!(p0.len(), labels.len(), "tree {i}: A(0) blocks vs labels");

        let mut prev = p0;
        for k in 1..=height + 1 {
            let cur = k_bisimulation(&doc, k);
            assert!(cur.refines(&prev), "tree {i}: P({k}) does not refine P({})", k - 1);
            prev = cur;
        }
        // Fixpoint partition equals the 1-index extents.
        let one = build_one_index(&doc);
        let fix: BTreeSet<Vec<NodeId>> = prev.blocks().iter().cloned().collect();
        let one_extents: BTreeSet<Vec<NodeId>> =
            one.nodes.iter().map(|n| n.extent.clone()).collect();
        assert_eq!(fix, one_extents, "tree {i}: fixpoint vs 1-index");
    }
    let elapsed = start.elapsed().as_secs_f64();
    println!(
        "ACCEPTANCE 4 PASS: refinement chain, A(0)=labels, fixpoint=1-index on 50 trees, {elapsed:.2}s"
    );
}

/// Criterion 5: the A(k) exactness contract on random suffix queries.
#[test]
fn acceptance_05_ak_exactness_contract() {
    let start = Instant::now();
    let mut rng = Rng::new(0xACC5);
    let mut exact_count = 0usize;
    let mut validated_count = 0usize;
    for i in 0..20 {
        let size = 20 + rng.below(600);
        let alphabet = 2 + rng.below(3);
        let doc = tree(5000 + i, size, 9, 4, alphabet);
        let k = (i % 5) as u32;
        let ak: SummaryGraph = build_ak_index(&doc, k);
        for _ in 0..100 {
            let text = random_suffix_query(&mut rng, &doc, 5, alphabet);
            let q = parse_path(&text).unwrap();
            let truth = eval_naive(&doc, &q);
            let ans = eval_on_summary(&ak, &q);
            if q.pattern_length() <= k as usize && !q.has_internal_descendant() {
                assert!(ans.exact, "{text} (length {}) must be exact on A({k})", q.pattern_length());
                assert_eq!(ans.candidates, truth, "{text} on A({k})");
                exact_count += 1;
            } else {
                assert!(
                    ans.candidates.is_superset(&truth),
                    "{text}: candidates must cover the truth"
                );
                assert_eq!(
                    validate_candidates(&doc, &q, &ans.candidates),
                    truth,
                    "{text}: validation must restore exactness"
                );
                validated_count += 1;
            }
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    println!(
        "ACCEPTANCE 5 PASS: A(k) contract on 2000 suffix queries ({exact_count} exact, {validated_count} validated), {elapsed:.2}s"
    );
}

/// Criterion 6: a 1-index over the serialized facts document merges all
/// cells into one summary node while the warehouse holds at least two
/// distinct dimension combinations.
#[test]
fn acceptance_06_path_summary_information_loss() {
    let w = generate_star(&StarGenParams {
        fact_count: 60,
        dimension_count: 3,
        levels_per_dimension: 2,
        members_per_level: 4,
        attributes_per_level: 1,
        measure_count: 1,
        seed: 0xACC6,
    })
    .unwrap();
    let combos = w.facts.distinct_ref_combinations();
    assert!(combos >= 2, "need at least two distinct combinations, got {combos}");

    let cube = parse_document(w.facts_doc.serialize().as_bytes(), 0).unwrap();
    let one = build_one_index(&cube);
    let cell_summaries: Vec<_> = one.nodes.iter().filter(|n| n.label == "cell").collect();
    assert_eq!(
        cell_summaries.len(),
        1,
        "all cells must collapse into one summary node"
    );
    assert_eq!(cell_summaries[0].extent.len(), w.facts.len());
    println!(
        "ACCEPTANCE 6 PASS: 1-index keeps one summary node for {} cells while {combos} distinct dimension combinations exist",
        w.facts.len()
    );
}

fn star_1000() -> (idx_core::warehouse::DimensionSet, idx_core::warehouse::FactTable, Vec<String>) {
    let w = generate_star(&StarGenParams {
        fact_count: 1_000,
        dimension_count: 3,
        levels_per_dimension: 3,
        members_per_level: 5,
        attributes_per_level: 2,
        measure_count: 2,
        seed: 0xACC7,
    })
    .unwrap();
    // Round through the documented XML formats.
    let dims = load_dimensions(&parse_document(w.dims_doc.serialize().as_bytes(), 1).unwrap())
        .unwrap();
    let facts =
        load_facts(&parse_document(w.facts_doc.serialize().as_bytes(), 2).unwrap(), &dims)
            .unwrap();
    let measures = w.measure_names();
    (dims, facts, measures)
}

/// Criterion 7: 200 random analytic queries agree between the join-based
/// and the index-based executor at the stated tolerance.
#[test]
fn acceptance_07_warehouse_equivalence() {
    let start = Instant::now();
    let (dims, facts, measures) = star_1000();
    assert_eq!(facts.len(), 1_000);
    let schema = dims.schema();
    let index = build_join_index(&facts, &dims);
    let mut rng = Rng::new(0xACC7 + 1);
    for qi in 0..200 {
        let q = random_analytic_query(&mut rng, &dims, &measures);
        let plan = rewrite_query(&q, &schema).unwrap();
        let via_joins = execute_with_joins(&q, &facts, &dims).unwrap();
        let via_index = execute_on_index(&plan, &index).unwrap();
        assert!(
            via_joins.matches_with_tolerance(&via_index, q.aggregate),
            "query {qi} diverges:\n{}",
            via_joins.diff(&via_index)
        );
        if matches!(q.aggregate, AggregateFn::Count | AggregateFn::Min | AggregateFn::Max) {
            assert_eq!(via_joins, via_index, "query {qi} must be bit-exact");
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    assert!(elapsed < 60.0, "criterion 7 took {elapsed:.1}s (limit 60s)");
    println!(
        "ACCEPTANCE 7 PASS: 200 analytic queries equivalent across both executors on 1000 facts, {elapsed:.2}s"
    );
}

/// Criterion 8: every rewritten plan references only inlined keys.
#[test]
fn acceptance_08_join_freeness() {
    let (dims, _facts, measures) = star_1000();
    let schema = dims.schema();
    let mut rng = Rng::new(0xACC8);
    let mut checked = 0;
    for _ in 0..100 {
        let q = random_analytic_query(&mut rng, &dims, &measures);
        let plan = rewrite_query(&q, &schema).unwrap();
        assert!(plan.is_join_free(), "plan for {q:?} is not join-free");
        checked += 1;
    }
    println!("ACCEPTANCE 8 PASS: {checked}/100 rewritten plans contain zero member lookups");
}

/// Criterion 9: the benchmark harness at 50,000 facts emits wh-join and
/// wh-index rows with the speedup column; slow medians are flagged, never
/// fatal. Correctness gates run inside run_bench.
#[test]
fn acceptance_09_bench_report_at_50k_facts() {
    let config: BenchConfig = serde_json::from_str(
        r#"{
            "scenarios": ["wh-join", "wh-index"],
            "seed": 9,
            "warmup": 1,
            "repetitions": 3,
            "star": {
                "factCount": 50000,
                "dimensionCount": 3,
                "levelsPerDimension": 3,
                "membersPerLevel": 5,
                "attributesPerLevel": 2,
                "measureCount": 2,
                "seed": 9
            },
            "analyticQueryCount": 5
        }"#,
    )
    .unwrap();
    let report = run_bench(&config).expect("correctness gate must pass");
    let join_rows: Vec<_> = report.rows.iter().filter(|r| r.scenario == "wh-join").collect();
    let index_rows: Vec<_> = report.rows.iter().filter(|r| r.scenario == "wh-index").collect();
    assert_eq!(join_rows.len(), 5);
    assert_eq!(index_rows.len(), 5);
    for (j, i) in join_rows.iter().zip(&index_rows) {
        assert_eq!(j.corpus_size, 50_000);
        assert_eq!(j.result_count, i.result_count, "gate guarantees equal counts");
        let speedup = i.speedup_vs_reference.expect("speedup column present");
        println!(
            "  wh-join {:.3}ms vs wh-index {:.3}ms => speedup {:.2}x{}",
            j.query_millis_median,
            i.query_millis_median,
            speedup,
            if speedup < 1.0 { " (flagged)" } else { "" }
        );
    }
    let csv = report.to_csv();
    assert!(csv.lines().next().unwrap().contains("speedup_vs_reference"));
    println!(
        "ACCEPTANCE 9 PASS: 50k-fact report with {} rows, {} flags (flags do not fail the build)",
        report.rows.len(),
        report.flags.len()
    );
}

/// Criterion 10: save/load round trip for every index kind answers queries
/// identically, and a docHash mismatch is rejected.
#[test]
fn acceptance_10_persistence_round_trip() {
    let doc = tree(0xACC10, 800, 9, 5, 3);
    let other_doc = tree(0xACC10 + 1, 800, 9, 5, 3);
    let mut rng = Rng::new(0xACC10 + 2);
    let graphs = [
        build_dataguide(&doc),
        build_ak_index(&doc, 2),
        build_one_index(&doc),
    ];
    for graph in &graphs {
        let reloaded = index_from_json(&index_to_json(graph)).unwrap();
        assert_eq!(&reloaded, graph);
        verify_doc_hash(&reloaded, &doc).unwrap();
        for _ in 0..50 {
            if rng.chance(1, 4) {
                let text = random_twig_query(&mut rng, &doc, 3);
                let q = parse_path(&text).unwrap();
                assert_eq!(
                    eval_twig(&doc, &reloaded, &q),
                    eval_twig(&doc, graph, &q),
                    "twig {text} diverges after reload"
                );
            } else {
                let text = random_suffix_query(&mut rng, &doc, 4, 3);
                let q = parse_path(&text).unwrap();
                let a = eval_on_summary(&reloaded, &q);
                let b = eval_on_summary(graph, &q);
                assert_eq!(a, b, "query {text} diverges after reload");
            }
        }
        // Applying the index to a different document is refused.
        match verify_doc_hash(graph, &other_doc) {
            Err(PersistError::DocHashMismatch { .. }) => {}
            other => panic!("expected DocHashMismatch, got {other:?}"),
        }
    }
    println!(
        "ACCEPTANCE 10 PASS: 3 index kinds round-trip with identical answers on 50 queries each; docHash mismatch rejected"
    );
}
