//! `idx` command-line front end.
//!
//! Exit codes: 0 success, 1 usage error, 2 input error (unreadable or
//! malformed files, hash mismatches), 3 correctness failure in the bench
//! harness. Set `IDX_LOG` to any non-empty value for progress chatter on
//! stderr.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind as ClapErrorKind;
use clap::{Parser, Subcommand, ValueEnum};

use idx_core::doc::{Document, NodeKind};
use idx_core::eval::{eval_on_summary, eval_twig};
use idx_core::parse::parse_document;
use idx_core::path::{parse_path, validate_candidates};
use idx_core::summary::{build_ak_index, build_dataguide, build_one_index};
use idx_core::warehouse::{
    build_join_index, execute_on_index, execute_with_joins, join_index_to_document,
    load_dimensions, load_facts, load_join_index, rewrite_query, ResultTable,
};

use crate::bench::{run_bench, BenchConfig, BenchError};
use crate::gen::{generate_star, generate_tree, StarGenParams, TreeGenParams};
use crate::persist::{index_from_json, index_to_json, query_from_json, verify_doc_hash};

#[derive(Debug)]
enum AppError {
    Usage(String),
    Input(String),
    Correctness(String),
}

impl AppError {
    fn exit_code(&self) -> u8 {
        match self {
            AppError::Usage(_) => 1,
            AppError::Input(_) => 2,
            AppError::Correctness(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            AppError::Usage(m) | AppError::Input(m) | AppError::Correctness(m) => m,
        }
    }
}

fn log(msg: impl AsRef<str>) {
    if std::env::var("IDX_LOG").map(|v| !v.is_empty() && v != "0").unwrap_or(false) {
        eprintln!("idx: {}", msg.as_ref());
    }
}

#[derive(Parser)]
#[command(
    name = "idx",
    version,
    about = "XML structural indexing: summaries, region joins, and a warehouse join index"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum KindArg {
    Dataguide,
    Ak,
    One,
}

#[derive(Subcommand)]
enum Command {
    /// Parse an XML file and print document statistics
    Parse {
        input: PathBuf,
        /// Print per-kind node counts, height and label-path counts
        #[arg(long)]
        stats: bool,
    },
    /// Build a structural summary index and save it as JSON
    Build {
        input: PathBuf,
        /// Index family to build
        #[arg(long, value_enum)]
        kind: KindArg,
        /// Resolution parameter for --kind ak
        #[arg(long, required_if_eq("kind", "ak"))]
        k: Option<u32>,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Evaluate a path query through a saved index
    Query {
        #[arg(long)]
        index: PathBuf,
        #[arg(long)]
        doc: PathBuf,
        /// Path query, e.g. '/a/b//c' or '//b[c]'
        #[arg(long)]
        path: String,
        /// Filter inexact candidate sets down to the exact answer
        #[arg(long)]
        validate: bool,
    },
    /// Warehouse: build the fused join index or run analytic queries
    Wh {
        #[command(subcommand)]
        command: WhCommand,
    },
    /// Deterministic corpus generators
    Gen {
        #[command(subcommand)]
        command: GenCommand,
    },
    /// Run benchmark scenarios from a JSON config
    Bench {
        #[arg(long)]
        config: PathBuf,
        /// CSV report path; a JSON twin is written next to it
        #[arg(short, long)]
        output: PathBuf,
    },
}

#[derive(Subcommand)]
enum WhCommand {
    /// Fuse facts.xml and dimensions.xml into index.xml
    BuildIndex {
        #[arg(long)]
        facts: PathBuf,
        #[arg(long)]
        dims: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Run an analytic query, either with joins over facts/dims or
    /// join-free over a built index
    Query {
        /// JSON query file
        #[arg(long = "q")]
        query: PathBuf,
        #[arg(long)]
        facts: Option<PathBuf>,
        #[arg(long)]
        dims: Option<PathBuf>,
        #[arg(long)]
        index: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum GenCommand {
    /// Random element tree
    Tree {
        #[arg(long, default_value_t = 5000)]
        node_count: usize,
        #[arg(long, default_value_t = 10)]
        max_depth: usize,
        #[arg(long, default_value_t = 5)]
        max_fanout: usize,
        #[arg(long, default_value_t = 4)]
        label_alphabet_size: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Random star warehouse (facts.xml + dimensions.xml)
    Star {
        #[arg(long, default_value_t = 1000)]
        fact_count: usize,
        #[arg(long, default_value_t = 3)]
        dimension_count: usize,
        #[arg(long, default_value_t = 3)]
        levels_per_dimension: usize,
        #[arg(long, default_value_t = 5)]
        members_per_level: usize,
        #[arg(long, default_value_t = 2)]
        attributes_per_level: usize,
        #[arg(long, default_value_t = 2)]
        measure_count: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long)]
        facts_out: PathBuf,
        #[arg(long)]
        dims_out: PathBuf,
    },
}

pub fn main_entry() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ClapErrorKind::DisplayHelp | ClapErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}

fn read_bytes(path: &Path) -> Result<Vec<u8>, AppError> {
    fs::read(path).map_err(|e| AppError::Input(format!("cannot read {}: {e}", path.display())))
}

fn read_text(path: &Path) -> Result<String, AppError> {
    fs::read_to_string(path)
        .map_err(|e| AppError::Input(format!("cannot read {}: {e}", path.display())))
}

fn write_text(path: &Path, text: &str) -> Result<(), AppError> {
    fs::write(path, text)
        .map_err(|e| AppError::Input(format!("cannot write {}: {e}", path.display())))
}

fn parse_file(path: &Path, doc_id: u32) -> Result<Document, AppError> {
    let bytes = read_bytes(path)?;
    parse_document(&bytes, doc_id)
        .map_err(|e| AppError::Input(format!("{}: {e}", path.display())))
}

fn run(cli: Cli) -> Result<(), AppError> {
    match cli.command {
        Command::Parse { input, stats } => cmd_parse(&input, stats),
        Command::Build {
            input,
            kind,
            k,
            output,
        } => cmd_build(&input, kind, k, &output),
        Command::Query {
            index,
            doc,
            path,
            validate,
        } => cmd_query(&index, &doc, &path, validate),
        Command::Wh { command } => match command {
            WhCommand::BuildIndex {
                facts,
                dims,
                output,
            } => cmd_wh_build(&facts, &dims, &output),
            WhCommand::Query {
                query,
                facts,
                dims,
                index,
            } => cmd_wh_query(&query, facts.as_deref(), dims.as_deref(), index.as_deref()),
        },
        Command::Gen { command } => match command {
            GenCommand::Tree {
                node_count,
                max_depth,
                max_fanout,
                label_alphabet_size,
                seed,
                output,
            } => {
                let params = TreeGenParams {
                    node_count,
                    max_depth,
                    max_fanout,
                    label_alphabet_size,
                    seed,
                };
                let doc = generate_tree(&params).map_err(|e| AppError::Usage(e.to_string()))?;
                write_text(&output, &doc.serialize())?;
                println!("wrote {} elements to {}", doc.element_count(), output.display());
                Ok(())
            }
            GenCommand::Star {
                fact_count,
                dimension_count,
                levels_per_dimension,
                members_per_level,
                attributes_per_level,
                measure_count,
                seed,
                facts_out,
                dims_out,
            } => {
                let params = StarGenParams {
                    fact_count,
                    dimension_count,
                    levels_per_dimension,
                    members_per_level,
                    attributes_per_level,
                    measure_count,
                    seed,
                };
                let w = generate_star(&params).map_err(|e| AppError::Usage(e.to_string()))?;
                write_text(&facts_out, &w.facts_doc.serialize())?;
                write_text(&dims_out, &w.dims_doc.serialize())?;
                println!(
                    "wrote {} facts to {} and {} dimensions to {}",
                    w.facts.len(),
                    facts_out.display(),
                    w.dims.len(),
                    dims_out.display()
                );
                Ok(())
            }
        },
        Command::Bench { config, output } => cmd_bench(&config, &output),
    }
}

fn cmd_parse(input: &Path, stats: bool) -> Result<(), AppError> {
    let doc = parse_file(input, 0)?;
    println!("nodes: {}", doc.len());
    if stats {
        let count = |kind: NodeKind| doc.nodes().filter(|n| n.kind == kind).count();
        println!("elements: {}", count(NodeKind::Element));
        println!("attributes: {}", count(NodeKind::Attribute));
        println!("texts: {}", count(NodeKind::Text));
        let height = doc
            .elements()
            .map(|n| doc.depth(n.id))
            .max()
            .unwrap_or(0);
        println!("height: {height}");
        let labels: std::collections::BTreeSet<&str> =
            doc.elements().map(|n| n.label.as_str()).collect();
        println!("distinct-labels: {}", labels.len());
        println!(
            "distinct-label-paths: {}",
            idx_core::summary::label_path_groups(&doc).len()
        );
        println!("doc-hash: {:016x}", doc.content_hash());
    }
    Ok(())
}

fn cmd_build(input: &Path, kind: KindArg, k: Option<u32>, output: &Path) -> Result<(), AppError> {
    let doc = parse_file(input, 0)?;
    log(format!("parsed {} nodes", doc.len()));
    let graph = match kind {
        KindArg::Dataguide => build_dataguide(&doc),
        KindArg::Ak => build_ak_index(&doc, k.expect("clap enforces --k for ak")),
        KindArg::One => build_one_index(&doc),
    };
    write_text(output, &index_to_json(&graph))?;
    println!(
        "built {} index: {} summary nodes over {} elements -> {}",
        graph.kind.as_str(),
        graph.node_count(),
        doc.element_count(),
        output.display()
    );
    Ok(())
}

fn cmd_query(index: &Path, doc_path: &Path, path: &str, validate: bool) -> Result<(), AppError> {
    let graph = index_from_json(&read_text(index)?)
        .map_err(|e| AppError::Input(format!("{}: {e}", index.display())))?;
    let doc = parse_file(doc_path, 0)?;
    verify_doc_hash(&graph, &doc).map_err(|e| AppError::Input(e.to_string()))?;
    let query = parse_path(path).map_err(|e| AppError::Usage(e.to_string()))?;

    let (nodes, exact) = if query.has_predicates() {
        (eval_twig(&doc, &graph, &query), true)
    } else {
        let ans = eval_on_summary(&graph, &query);
        if !ans.exact && validate {
            (validate_candidates(&doc, &query, &ans.candidates), true)
        } else {
            (ans.candidates, ans.exact)
        }
    };
    println!("exact: {exact}");
    println!("count: {}", nodes.len());
    let ids: Vec<String> = nodes.iter().map(|id| id.to_string()).collect();
    println!("nodes: {}", ids.join(" "));
    Ok(())
}

fn cmd_wh_build(facts: &Path, dims: &Path, output: &Path) -> Result<(), AppError> {
    let dims_doc = parse_file(dims, 1)?;
    let facts_doc = parse_file(facts, 2)?;
    let dim_set =
        load_dimensions(&dims_doc).map_err(|e| AppError::Input(format!("{}: {e}", dims.display())))?;
    let fact_table = load_facts(&facts_doc, &dim_set)
        .map_err(|e| AppError::Input(format!("{}: {e}", facts.display())))?;
    let index = build_join_index(&fact_table, &dim_set);
    let doc = join_index_to_document(&index, 3);
    write_text(output, &doc.serialize())?;
    println!(
        "fused {} facts with {} dimensions into {} index cells -> {}",
        fact_table.len(),
        dim_set.len(),
        index.len(),
        output.display()
    );
    Ok(())
}

fn print_result_table(table: &ResultTable) {
    println!("rows: {}", table.len());
    for (key, value) in &table.rows {
        if key.is_empty() {
            println!("(all) => {value}");
        } else {
            let quoted: Vec<String> = key.iter().map(|k| format!("\"{k}\"")).collect();
            println!("{} => {value}", quoted.join(","));
        }
    }
}

fn cmd_wh_query(
    query_path: &Path,
    facts: Option<&Path>,
    dims: Option<&Path>,
    index: Option<&Path>,
) -> Result<(), AppError> {
    let query = query_from_json(&read_text(query_path)?)
        .map_err(|e| AppError::Input(format!("{}: {e}", query_path.display())))?;

    let table = match (facts, dims, index) {
        (Some(facts), Some(dims), None) => {
            let dim_set = load_dimensions(&parse_file(dims, 1)?)
                .map_err(|e| AppError::Input(e.to_string()))?;
            let fact_table = load_facts(&parse_file(facts, 2)?, &dim_set)
                .map_err(|e| AppError::Input(e.to_string()))?;
            log(format!("executing with joins over {} facts", fact_table.len()));
            execute_with_joins(&query, &fact_table, &dim_set)
                .map_err(|e| AppError::Input(e.to_string()))?
        }
        (None, None, Some(index)) => {
            let join_index = load_join_index(&parse_file(index, 3)?)
                .map_err(|e| AppError::Input(e.to_string()))?;
            let plan = rewrite_query(&query, &join_index.schema_view())
                .map_err(|e| AppError::Input(e.to_string()))?;
            log(format!(
                "executing join-free plan over {} index cells",
                join_index.len()
            ));
            execute_on_index(&plan, &join_index).map_err(|e| AppError::Input(e.to_string()))?
        }
        _ => {
            return Err(AppError::Usage(
                "provide either --facts and --dims, or --index".to_string(),
            ))
        }
    };
    print_result_table(&table);
    Ok(())
}

fn cmd_bench(config_path: &Path, output: &Path) -> Result<(), AppError> {
    let config: BenchConfig = serde_json::from_str(&read_text(config_path)?)
        .map_err(|e| AppError::Input(format!("{}: {e}", config_path.display())))?;
    let report = run_bench(&config).map_err(|e| match e {
        BenchError::Correctness { .. } => AppError::Correctness(e.to_string()),
        BenchError::Config(msg) => AppError::Usage(msg),
        other => AppError::Input(other.to_string()),
    })?;
    write_text(output, &report.to_csv())?;
    let json_path = output.with_extension("json");
    write_text(&json_path, &report.to_json())?;
    println!(
        "wrote {} timing rows to {} and {}",
        report.rows.len(),
        output.display(),
        json_path.display()
    );
    for flag in &report.flags {
        println!("flag: {flag}");
    }
    Ok(())
}
