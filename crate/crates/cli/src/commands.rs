//! Subcommands.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use eqvar::equivalence::{cpdag, pi_equivalent};
use eqvar::learning::{fit_mle, greedy_search, sample_covariance, shd, EditKind, Scorer, SearchConfig};
use eqvar::simulation::{draw_trial, run_experiment, summarize};
use eqvar::{Dag, Partition};
use serde::Serialize;
use serde_json::json;

use crate::config::{node_names, ConfigFile};
use crate::document::{edge_string, partition_from_names, partition_to_names, GraphDocument, ParsedGraph};
use crate::error::{CliError, Result};
use crate::io::{create_dir, read_csv, read_graph, read_json, write_csv, write_json};

#[derive(Debug, Parser)]
#[command(
    name = "eqvar",
    version,
    about = "Causal discovery for linear SEMs with equal-variance blocks"
)]
pub struct Cli {
    /// Seed for all randomness; overrides any seed in a config file.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Pivot tolerance below which a regression counts as singular.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Draw one model and dataset from a config file.
    Simulate {
        config: PathBuf,
        /// Output directory for truth.json, params.json and data.csv.
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        replicate: usize,
    },
    /// Learn a CPDAG from data by greedy BIC search.
    Learn {
        data: PathBuf,
        #[command(flatten)]
        partition: PartitionArgs,
        #[arg(long)]
        restarts: Option<usize>,
        /// Maximum neighborhood size per step.
        #[arg(long)]
        cap: Option<usize>,
        #[arg(long)]
        max_iters: Option<usize>,
        /// Write the CPDAG document here.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write the accepted moves of every restart as CSV.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// CPDAG of a DAG under a partition.
    Cpdag {
        graph: PathBuf,
        #[command(flatten)]
        partition: PartitionArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Decide whether two DAGs define the same model. Exits 1 when they do not.
    Equiv {
        g1: PathBuf,
        g2: PathBuf,
        #[command(flatten)]
        partition: PartitionArgs,
    },
    /// BIC of a DAG on data.
    Score {
        graph: PathBuf,
        data: PathBuf,
        #[command(flatten)]
        partition: PartitionArgs,
    },
    /// Structural Hamming distance between two graphs.
    Shd { g1: PathBuf, g2: PathBuf },
    /// Run all replicates of a config and write trials.csv and summary.json.
    Experiment {
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

/// Where the variance partition comes from. Without either flag the
/// partition embedded in the graph document is used.
#[derive(Debug, Default, Args)]
pub struct PartitionArgs {
    /// JSON file: an array of blocks of node names, or an object with a
    /// `partition` field.
    #[arg(long, conflicts_with = "blocks")]
    pub partition: Option<PathBuf>,
    /// Block label of each node in node order, e.g. `1,1,2`.
    #[arg(long, value_delimiter = ',')]
    pub blocks: Option<Vec<String>>,
}

impl PartitionArgs {
    fn resolve(&self, names: &[String], embedded: Option<&Partition>) -> Result<Partition> {
        if let Some(labels) = &self.blocks {
            if labels.len() != names.len() {
                return Err(CliError::Invalid(format!(
                    "--blocks has {} labels for {} nodes",
                    labels.len(),
                    names.len()
                )));
            }
            return Ok(Partition::from_labels(labels));
        }
        if let Some(path) = &self.partition {
            let value: serde_json::Value = read_json(path)?;
            let blocks = value.get("partition").cloned().unwrap_or(value);
            let blocks: Vec<Vec<String>> = serde_json::from_value(blocks).map_err(|e| CliError::parse(path, e))?;
            return partition_from_names(names, &blocks);
        }
        embedded
            .cloned()
            .ok_or_else(|| CliError::Invalid("no partition given: use --partition or --blocks".into()))
    }
}

/// Run a parsed command line, writing its report to `out`. Returns the
/// process exit code on success.
pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<i32> {
    let mut buf = Vec::new();
    let code = match cli.threads {
        Some(threads) => rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| CliError::Invalid(format!("cannot start {threads} threads: {e}")))?
            .install(|| dispatch(cli, &mut buf)),
        None => dispatch(cli, &mut buf),
    }?;
    out.write_all(&buf).map_err(|e| CliError::io("<stdout>", e))?;
    Ok(code)
}

fn dispatch(cli: &Cli, out: &mut Vec<u8>) -> Result<i32> {
    match &cli.command {
        Command::Simulate {
            config,
            out: dir,
            replicate,
        } => simulate(cli, config, dir, *replicate).map(|_| 0),
        Command::Learn {
            data,
            partition,
            restarts,
            cap,
            max_iters,
            out: doc,
            trace,
        } => {
            let mut search = search_config(cli, SearchConfig::default());
            search.restarts = restarts.unwrap_or(search.restarts);
            search.neighborhood_cap = cap.unwrap_or(search.neighborhood_cap);
            search.max_iters = max_iters.unwrap_or(search.max_iters);
            learn(data, partition, &search, doc.as_deref(), trace.as_deref(), out).map(|_| 0)
        }
        Command::Cpdag {
            graph,
            partition,
            out: doc,
        } => cpdag_cmd(graph, partition, doc.as_deref(), out).map(|_| 0),
        Command::Equiv { g1, g2, partition } => equiv(g1, g2, partition, out),
        Command::Score { graph, data, partition } => score(cli, graph, data, partition, out).map(|_| 0),
        Command::Shd { g1, g2 } => shd_cmd(g1, g2, out).map(|_| 0),
        Command::Experiment { config, out: dir } => experiment(cli, config, dir).map(|_| 0),
    }
}

fn search_config(cli: &Cli, base: SearchConfig) -> SearchConfig {
    SearchConfig {
        seed: cli.seed.unwrap_or(base.seed),
        singular_tol: cli.tol.unwrap_or(base.singular_tol),
        ..base
    }
}

fn print_line<T: Serialize>(out: &mut dyn Write, value: &T) -> Result<()> {
    let text = serde_json::to_string(value).map_err(|e| CliError::Invalid(e.to_string()))?;
    writeln!(out, "{text}").map_err(|e| CliError::io("<stdout>", e))
}

fn load_config(cli: &Cli, path: &Path) -> Result<eqvar::simulation::SimConfig> {
    let file: ConfigFile = read_json(path)?;
    let mut cfg = file.resolve()?;
    cfg.seed = cli.seed.unwrap_or(cfg.seed);
    cfg.search.singular_tol = cli.tol.unwrap_or(cfg.search.singular_tol);
    Ok(cfg)
}

#[derive(Serialize)]
struct WeightDoc<'a> {
    from: &'a str,
    to: &'a str,
    weight: f64,
}

#[derive(Serialize)]
struct ParamsDoc<'a> {
    nodes: &'a [String],
    weights: Vec<WeightDoc<'a>>,
    /// Error variance of each node, in node order.
    omega: Vec<f64>,
}

fn simulate(cli: &Cli, config: &Path, dir: &Path, replicate: usize) -> Result<()> {
    let cfg = load_config(cli, config)?;
    let trial = draw_trial(&cfg, replicate)?;
    let names = node_names(cfg.p);
    create_dir(dir)?;
    write_json(
        &dir.join("truth.json"),
        &GraphDocument::from_dag(&names, &trial.truth, Some(&trial.partition)),
    )?;
    let params = ParamsDoc {
        nodes: &names,
        weights: trial
            .truth
            .edges()
            .into_iter()
            .map(|(i, j)| WeightDoc {
                from: &names[i],
                to: &names[j],
                weight: trial.params.lambda()[(i, j)],
            })
            .collect(),
        omega: trial.params.omega().iter().copied().collect(),
    };
    write_json(&dir.join("params.json"), &params)?;
    write_csv(&dir.join("data.csv"), &names, &trial.data)
}

fn learn(
    data: &Path,
    partition: &PartitionArgs,
    search: &SearchConfig,
    doc_path: Option<&Path>,
    trace_path: Option<&Path>,
    out: &mut dyn Write,
) -> Result<()> {
    let table = read_csv(data)?;
    let pi = partition.resolve(&table.names, None)?;
    let result = greedy_search(&table.select(&table.names)?, &pi, search)?;
    let doc = GraphDocument::from_pdag(&table.names, &result.cpdag, Some(&pi));
    if let Some(path) = doc_path {
        write_json(path, &doc)?;
    }
    if let Some(path) = trace_path {
        write_trace(path, &table.names, &result.trace)?;
    }
    print_line(
        out,
        &LearnReport {
            bic: result.score,
            restart_scores: result.restart_scores,
            cpdag: doc,
        },
    )
}

#[derive(Serialize)]
struct LearnReport {
    bic: f64,
    restart_scores: Vec<f64>,
    cpdag: GraphDocument,
}

fn write_trace(path: &Path, names: &[String], trace: &[eqvar::learning::TraceStep]) -> Result<()> {
    let fail = |e: csv::Error| CliError::parse(path, e);
    let mut writer = csv::Writer::from_path(path).map_err(fail)?;
    writer
        .write_record(["restart", "iteration", "edit", "from", "to", "score"])
        .map_err(fail)?;
    for step in trace {
        let (kind, from, to) = match step.edit {
            Some(e) => {
                let kind = match e.kind {
                    EditKind::Remove => "remove",
                    EditKind::Add => "add",
                    EditKind::Reverse => "reverse",
                };
                (kind, names[e.from].as_str(), names[e.to].as_str())
            }
            None => ("start", "", ""),
        };
        writer
            .write_record([
                &step.restart.to_string(),
                &step.iteration.to_string(),
                kind,
                from,
                to,
                &step.score.to_string(),
            ])
            .map_err(fail)?;
    }
    writer.flush().map_err(|e| CliError::io(path, e))
}

fn dag_and_partition(graph: &Path, partition: &PartitionArgs) -> Result<(Vec<String>, Dag, Partition)> {
    let (names, g, embedded) = read_graph(graph)?.into_dag()?;
    let pi = partition.resolve(&names, embedded.as_ref())?;
    Ok((names, g, pi))
}

fn cpdag_cmd(graph: &Path, partition: &PartitionArgs, doc_path: Option<&Path>, out: &mut dyn Write) -> Result<()> {
    let (names, g, pi) = dag_and_partition(graph, partition)?;
    let doc = GraphDocument::from_pdag(&names, &cpdag(&g, &pi)?, Some(&pi));
    if let Some(path) = doc_path {
        write_json(path, &doc)?;
    }
    print_line(out, &doc)
}

/// `g` relabeled so that its node names follow `names`.
fn align(parsed: ParsedGraph, names: &[String]) -> Result<ParsedGraph> {
    if parsed.names == names {
        return Ok(parsed);
    }
    let mut sorted_a = parsed.names.clone();
    let mut sorted_b = names.to_vec();
    sorted_a.sort();
    sorted_b.sort();
    if sorted_a != sorted_b {
        return Err(CliError::Invalid("graphs must have the same node names".into()));
    }
    let doc = GraphDocument {
        nodes: names.to_vec(),
        ..GraphDocument::from_parsed(&parsed)
    };
    doc.parse()
}

fn equiv(g1: &Path, g2: &Path, partition: &PartitionArgs, out: &mut dyn Write) -> Result<i32> {
    let (names, a, pi) = dag_and_partition(g1, partition)?;
    let (_, b, _) = align(read_graph(g2)?, &names)?.into_dag()?;
    let equivalent = pi_equivalent(&a, &b, &pi)?;
    let verdict = if equivalent { "equivalent" } else { "not_equivalent" };
    print_line(out, &json!({ "verdict": verdict }))?;
    Ok(if equivalent { 0 } else { 1 })
}

fn score(cli: &Cli, graph: &Path, data: &Path, partition: &PartitionArgs, out: &mut dyn Write) -> Result<()> {
    let (names, g, pi) = dag_and_partition(graph, partition)?;
    let data = read_csv(data)?.select(&names)?;
    let s = sample_covariance(&data)?;
    let fit = match cli.tol {
        Some(tol) => Scorer::new(&s).with_singular_tol(tol).fit(&g, &pi)?,
        None => fit_mle(&g, &pi, &s)?,
    };
    let blocks: Vec<_> = partition_to_names(&names, &pi)
        .into_iter()
        .zip(fit.omega_hat.iter())
        .map(|(block, &variance)| json!({ "block": block, "variance": variance }))
        .collect();
    print_line(
        out,
        &json!({ "bic": fit.bic, "loglik": fit.loglik, "omega_hat": blocks }),
    )
}

fn shd_cmd(g1: &Path, g2: &Path, out: &mut dyn Write) -> Result<()> {
    let a = read_graph(g1)?;
    let b = align(read_graph(g2)?, &a.names)?;
    print_line(out, &json!({ "shd": shd(&a.graph.to_pdag(), &b.graph.to_pdag())? }))
}

#[derive(Serialize)]
struct TrialRow {
    replicate: usize,
    shd_gev: Option<usize>,
    shd_baseline_pi_min: Option<usize>,
    truth: String,
    estimate: String,
    estimate_pi_min: String,
    error: String,
    runtime_secs: f64,
}

fn experiment(cli: &Cli, config: &Path, dir: &Path) -> Result<()> {
    let cfg = load_config(cli, config)?;
    let trials = run_experiment(&cfg)?;
    let names = node_names(cfg.p);
    create_dir(dir)?;
    let path = dir.join("trials.csv");
    let fail = |e: csv::Error| CliError::parse(&path, e);
    let mut writer = csv::Writer::from_path(&path).map_err(fail)?;
    for t in &trials {
        let graph = |g: &Option<eqvar::Pdag>| g.as_ref().map(|g| edge_string(&names, g)).unwrap_or_default();
        writer
            .serialize(TrialRow {
                replicate: t.replicate,
                shd_gev: t.shd_gev,
                shd_baseline_pi_min: t.shd_baseline_pi_min,
                truth: edge_string(&names, &eqvar::Pdag::from_dag(&t.truth)),
                estimate: graph(&t.estimate),
                estimate_pi_min: graph(&t.estimate_pi_min),
                error: t.error.clone().unwrap_or_default(),
                runtime_secs: t.runtime_secs,
            })
            .map_err(fail)?;
    }
    writer.flush().map_err(|e| CliError::io(&path, e))?;
    write_json(&dir.join("summary.json"), &summarize(&cfg, &trials))
}
