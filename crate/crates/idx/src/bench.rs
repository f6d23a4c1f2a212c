//! Benchmark harness comparing naive against index-backed evaluation and
//! join-based against join-index analytic execution.
//!
//! Every timed query is first checked against its oracle (naive evaluation
//! for paths and twigs, the join-based executor for warehouse queries); a
//! mismatch aborts the scenario with a diff and no timing row is emitted.
//! Timings move, everything else in a report is a pure function of the
//! config. The CSV and JSON layouts are frozen in `docs/bench-format.md`.

use std::collections::BTreeMap;
use std::hint::black_box;
use std::time::Instant;

use idx_core::eval::{eval_on_summary, eval_twig};
use idx_core::parse::parse_document;
use idx_core::path::{eval_naive, parse_path, validate_candidates, PathQuery};
use idx_core::summary::{build_ak_index, build_dataguide, SummaryGraph};
use idx_core::warehouse::{
    build_join_index, execute_on_index, execute_with_joins, load_dimensions, load_facts,
    rewrite_query,
};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gen::{
    generate_star, generate_tree, random_analytic_query, random_suffix_query, random_twig_query,
    GenError, Rng, StarGenParams, TreeGenParams,
};
use crate::persist::query_to_json_compact;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("bench config error: {0}")]
    Config(String),
    #[error(transparent)]
    Gen(#[from] GenError),
    #[error("warehouse error: {0}")]
    Warehouse(#[from] idx_core::warehouse::WarehouseError),
    #[error("query error: {0}")]
    Path(#[from] idx_core::path::PathSyntaxError),
    #[error("correctness check failed in scenario '{scenario}' for query {query}:\n{diff}")]
    Correctness {
        scenario: String,
        query: String,
        diff: String,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    PathNaive,
    PathDataguide,
    PathAk,
    TwigJoin,
    WhJoin,
    WhIndex,
}

impl Scenario {
    pub fn as_str(&self) -> &'static str {
        match self {
            Scenario::PathNaive => "path-naive",
            Scenario::PathDataguide => "path-dataguide",
            Scenario::PathAk => "path-ak",
            Scenario::TwigJoin => "twig-join",
            Scenario::WhJoin => "wh-join",
            Scenario::WhIndex => "wh-index",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "path-naive" => Some(Scenario::PathNaive),
            "path-dataguide" => Some(Scenario::PathDataguide),
            "path-ak" => Some(Scenario::PathAk),
            "twig-join" => Some(Scenario::TwigJoin),
            "wh-join" => Some(Scenario::WhJoin),
            "wh-index" => Some(Scenario::WhIndex),
            _ => None,
        }
    }

    /// The scenario whose per-query medians this one's speedup is computed
    /// against.
    fn reference(&self) -> Option<Scenario> {
        match self {
            Scenario::PathDataguide | Scenario::PathAk => Some(Scenario::PathNaive),
            Scenario::WhIndex => Some(Scenario::WhJoin),
            _ => None,
        }
    }
}

fn default_warmup() -> usize {
    1
}
fn default_repetitions() -> usize {
    5
}
fn default_seed() -> u64 {
    42
}
fn default_ak_k() -> u32 {
    2
}
fn default_path_queries() -> usize {
    10
}
fn default_twig_queries() -> usize {
    5
}
fn default_analytic_queries() -> usize {
    10
}

#[derive(Debug, Clone, Deserialize)]
pub struct BenchConfig {
    pub scenarios: Vec<String>,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_warmup")]
    pub warmup: usize,
    #[serde(default = "default_repetitions")]
    pub repetitions: usize,
    #[serde(default)]
    pub tree: Option<TreeGenParams>,
    #[serde(default = "default_ak_k", rename = "akK")]
    pub ak_k: u32,
    /// Explicit path queries; generated from the tree when absent.
    #[serde(default)]
    pub paths: Option<Vec<String>>,
    #[serde(default = "default_path_queries", rename = "pathQueryCount")]
    pub path_query_count: usize,
    #[serde(default)]
    pub twigs: Option<Vec<String>>,
    #[serde(default = "default_twig_queries", rename = "twigQueryCount")]
    pub twig_query_count: usize,
    #[serde(default)]
    pub star: Option<StarGenParams>,
    #[serde(default = "default_analytic_queries", rename = "analyticQueryCount")]
    pub analytic_query_count: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchRow {
    pub scenario: String,
    pub corpus_size: usize,
    pub index_kind: String,
    pub query: String,
    pub build_millis: f64,
    pub query_millis_median: f64,
    pub query_millis_p95: f64,
    pub result_count: usize,
    pub exact: bool,
    /// reference median / this median; present when the reference scenario
    /// ran in the same report.
    pub speedup_vs_reference: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Default)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
    /// Non-fatal observations, e.g. an indexed median slower than its
    /// reference.
    pub flags: Vec<String>,
}

impl BenchReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "scenario,corpus_size,index_kind,query,build_millis,query_millis_median,query_millis_p95,result_count,exact,speedup_vs_reference\n",
        );
        for r in &self.rows {
            let speedup = r
                .speedup_vs_reference
                .map(|s| format!("{s:.4}"))
                .unwrap_or_default();
            out.push_str(&format!(
                "{},{},{},\"{}\",{:.4},{:.4},{:.4},{},{},{}\n",
                r.scenario,
                r.corpus_size,
                r.index_kind,
                r.query.replace('"', "\"\""),
                r.build_millis,
                r.query_millis_median,
                r.query_millis_p95,
                r.result_count,
                r.exact,
                speedup
            ));
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }
}

/// Runs `f` warmup + repetition times, returning (median_ms, p95_ms).
fn time_runs<T>(warmup: usize, reps: usize, mut f: impl FnMut() -> T) -> (f64, f64) {
    for _ in 0..warmup {
        black_box(f());
    }
    let mut samples = Vec::with_capacity(reps.max(1));
    for _ in 0..reps.max(1) {
        let t = Instant::now();
        black_box(f());
        samples.push(t.elapsed().as_secs_f64() * 1e3);
    }
    samples.sort_by(|a, b| a.partial_cmp(b).expect("no NaN timings"));
    let median = samples[samples.len() / 2];
    let p95 = samples[((samples.len() * 95) / 100).min(samples.len() - 1)];
    (median, p95)
}

struct PathCorpus {
    doc: idx_core::doc::Document,
    paths: Vec<PathQuery>,
    path_texts: Vec<String>,
    twigs: Vec<PathQuery>,
    twig_texts: Vec<String>,
}

fn prepare_path_corpus(config: &BenchConfig) -> Result<PathCorpus, BenchError> {
    let tree_params = config.tree.clone().unwrap_or_default();
    let doc = generate_tree(&tree_params)?;
    let alphabet = tree_params.label_alphabet_size;
    let mut rng = Rng::new(config.seed ^ 0x70617468);
    let path_texts: Vec<String> = match &config.paths {
        Some(p) => p.clone(),
        None => (0..config.path_query_count)
            .map(|_| random_suffix_query(&mut rng, &doc, 4, alphabet))
            .collect(),
    };
    let paths = path_texts
        .iter()
        .map(|t| parse_path(t))
        .collect::<Result<Vec<_>, _>>()?;
    if paths.iter().any(|q| q.has_predicates()) {
        return Err(BenchError::Config(
            "path scenario queries must not carry predicates; use twigs".to_string(),
        ));
    }
    let twig_texts: Vec<String> = match &config.twigs {
        Some(t) => t.clone(),
        None => (0..config.twig_query_count)
            .map(|_| random_twig_query(&mut rng, &doc, alphabet))
            .collect(),
    };
    let twigs = twig_texts
        .iter()
        .map(|t| parse_path(t))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(PathCorpus {
        doc,
        paths,
        path_texts,
        twigs,
        twig_texts,
    })
}

fn diff_sets(
    want: &std::collections::BTreeSet<usize>,
    got: &std::collections::BTreeSet<usize>,
) -> String {
    let missing: Vec<_> = want.difference(got).take(10).collect();
    let extra: Vec<_> = got.difference(want).take(10).collect();
    format!(
        "expected {} nodes, got {}; missing sample {missing:?}, unexpected sample {extra:?}",
        want.len(),
        got.len()
    )
}

/// Runs the configured scenarios; every row passed its equivalence check.
pub fn run_bench(config: &BenchConfig) -> Result<BenchReport, BenchError> {
    let scenarios: Vec<Scenario> = config
        .scenarios
        .iter()
        .map(|name| {
            Scenario::from_name(name)
                .ok_or_else(|| BenchError::Config(format!("unknown scenario '{name}'")))
        })
        .collect::<Result<Vec<_>, _>>()?;

    let needs_paths = scenarios.iter().any(|s| {
        matches!(
            s,
            Scenario::PathNaive | Scenario::PathDataguide | Scenario::PathAk | Scenario::TwigJoin
        )
    });
    let needs_star = scenarios
        .iter()
        .any(|s| matches!(s, Scenario::WhJoin | Scenario::WhIndex));

    let path_corpus = if needs_paths {
        Some(prepare_path_corpus(config)?)
    } else {
        None
    };

    let star = if needs_star {
        let params = config.star.clone().unwrap_or_default();
        let w = generate_star(&params)?;
        // Exercise the documented formats end to end.
        let dims =
            load_dimensions(&parse_document(w.dims_doc.serialize().as_bytes(), 1).expect("generated XML"))?;
        let facts = load_facts(
            &parse_document(w.facts_doc.serialize().as_bytes(), 2).expect("generated XML"),
            &dims,
        )?;
        let mut rng = Rng::new(config.seed ^ 0x73746172);
        let measures = w.measure_names();
        let queries: Vec<_> = (0..config.analytic_query_count)
            .map(|_| random_analytic_query(&mut rng, &dims, &measures))
            .collect();
        Some((dims, facts, queries))
    } else {
        None
    };

    let mut report = BenchReport::default();

    for scenario in &scenarios {
        match scenario {
            Scenario::PathNaive => {
                let c = path_corpus.as_ref().expect("prepared");
                for (q, text) in c.paths.iter().zip(&c.path_texts) {
                    let truth = eval_naive(&c.doc, q);
                    let (median, p95) =
                        time_runs(config.warmup, config.repetitions, || eval_naive(&c.doc, q));
                    report.rows.push(BenchRow {
                        scenario: scenario.as_str().to_string(),
                        corpus_size: c.doc.element_count(),
                        index_kind: "none".to_string(),
                        query: text.clone(),
                        build_millis: 0.0,
                        query_millis_median: median,
                        query_millis_p95: p95,
                        result_count: truth.len(),
                        exact: true,
                        speedup_vs_reference: None,
                    });
                }
            }
            Scenario::PathDataguide | Scenario::PathAk => {
                let c = path_corpus.as_ref().expect("prepared");
                let build_start = Instant::now();
                let graph: SummaryGraph = match scenario {
                    Scenario::PathDataguide => build_dataguide(&c.doc),
                    _ => build_ak_index(&c.doc, config.ak_k),
                };
                let build_millis = build_start.elapsed().as_secs_f64() * 1e3;
                for (q, text) in c.paths.iter().zip(&c.path_texts) {
                    let answer_once = || {
                        let ans = eval_on_summary(&graph, q);
                        if ans.exact {
                            (ans.candidates, true)
                        } else {
                            (validate_candidates(&c.doc, q, &ans.candidates), false)
                        }
                    };
                    let (got, exact) = answer_once();
                    let truth = eval_naive(&c.doc, q);
                    if got != truth {
                        return Err(BenchError::Correctness {
                            scenario: scenario.as_str().to_string(),
                            query: text.clone(),
                            diff: diff_sets(&truth, &got),
                        });
                    }
                    let (median, p95) =
                        time_runs(config.warmup, config.repetitions, answer_once);
                    report.rows.push(BenchRow {
                        scenario: scenario.as_str().to_string(),
                        corpus_size: c.doc.element_count(),
                        index_kind: graph.kind.as_str().to_string(),
                        query: text.clone(),
                        build_millis,
                        query_millis_median: median,
                        query_millis_p95: p95,
                        result_count: got.len(),
                        exact,
                        speedup_vs_reference: None,
                    });
                }
            }
            Scenario::TwigJoin => {
                let c = path_corpus.as_ref().expect("prepared");
                let build_start = Instant::now();
                let graph = build_dataguide(&c.doc);
                let build_millis = build_start.elapsed().as_secs_f64() * 1e3;
                for (q, text) in c.twigs.iter().zip(&c.twig_texts) {
                    let got = eval_twig(&c.doc, &graph, q);
                    let truth = eval_naive(&c.doc, q);
                    if got != truth {
                        return Err(BenchError::Correctness {
                            scenario: scenario.as_str().to_string(),
                            query: text.clone(),
                            diff: diff_sets(&truth, &got),
                        });
                    }
                    let (median, p95) = time_runs(config.warmup, config.repetitions, || {
                        eval_twig(&c.doc, &graph, q)
                    });
                    report.rows.push(BenchRow {
                        scenario: scenario.as_str().to_string(),
                        corpus_size: c.doc.element_count(),
                        index_kind: "dataguide".to_string(),
                        query: text.clone(),
                        build_millis,
                        query_millis_median: median,
                        query_millis_p95: p95,
                        result_count: got.len(),
                        exact: true,
                        speedup_vs_reference: None,
                    });
                }
            }
            Scenario::WhJoin => {
                let (dims, facts, queries) = star.as_ref().expect("prepared");
                for q in queries {
                    let table = execute_with_joins(q, facts, dims)?;
                    let (median, p95) = time_runs(config.warmup, config.repetitions, || {
                        execute_with_joins(q, facts, dims).expect("validated query")
                    });
                    report.rows.push(BenchRow {
                        scenario: scenario.as_str().to_string(),
                        corpus_size: facts.len(),
                        index_kind: "none".to_string(),
                        query: query_to_json_compact(q),
                        build_millis: 0.0,
                        query_millis_median: median,
                        query_millis_p95: p95,
                        result_count: table.len(),
                        exact: true,
                        speedup_vs_reference: None,
                    });
                }
            }
            Scenario::WhIndex => {
                let (dims, facts, queries) = star.as_ref().expect("prepared");
                let schema = dims.schema();
                let build_start = Instant::now();
                let index = build_join_index(facts, dims);
                let build_millis = build_start.elapsed().as_secs_f64() * 1e3;
                for q in queries {
                    let plan = rewrite_query(q, &schema)?;
                    let got = execute_on_index(&plan, &index)?;
                    let want = execute_with_joins(q, facts, dims)?;
                    if !want.matches_with_tolerance(&got, q.aggregate) {
                        return Err(BenchError::Correctness {
                            scenario: scenario.as_str().to_string(),
                            query: query_to_json_compact(q),
                            diff: want.diff(&got),
                        });
                    }
                    let (median, p95) = time_runs(config.warmup, config.repetitions, || {
                        execute_on_index(&plan, &index).expect("validated plan")
                    });
                    report.rows.push(BenchRow {
                        scenario: scenario.as_str().to_string(),
                        corpus_size: facts.len(),
                        index_kind: "join_index".to_string(),
                        query: query_to_json_compact(q),
                        build_millis,
                        query_millis_median: median,
                        query_millis_p95: p95,
                        result_count: got.len(),
                        exact: true,
                        speedup_vs_reference: None,
                    });
                }
            }
        }
    }

    fill_speedups(&mut report);
    Ok(report)
}

/// Speedup per query: reference scenario median / this scenario median.
fn fill_speedups(report: &mut BenchReport) {
    let mut reference_medians: BTreeMap<(String, String), f64> = BTreeMap::new();
    for row in &report.rows {
        reference_medians.insert(
            (row.scenario.clone(), row.query.clone()),
            row.query_millis_median,
        );
    }
    let mut flags = Vec::new();
    for row in &mut report.rows {
        let Some(reference) = Scenario::from_name(&row.scenario).and_then(|s| s.reference())
        else {
            continue;
        };
        let key = (reference.as_str().to_string(), row.query.clone());
        if let Some(&ref_median) = reference_medians.get(&key) {
            if row.query_millis_median > 0.0 {
                let speedup = ref_median / row.query_millis_median;
                row.speedup_vs_reference = Some(speedup);
                if speedup < 1.0 {
                    flags.push(format!(
                        "{} median speedup {:.3} < 1.0 vs {} for query {}",
                        row.scenario,
                        speedup,
                        reference.as_str(),
                        row.query
                    ));
                }
            }
        }
    }
    report.flags.extend(flags);
}
