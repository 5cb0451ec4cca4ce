//! End-to-end pipeline binary: fetch -> disasm -> featurize -> train ->
//! evaluate -> posthoc -> explain, plus corpus utilities.
//!
//! Every artifact-producing run writes into its own directory under
//! --out-dir, next to a resolved-config snapshot and the corpus digest,
//! so every reported number is auditable. Metric CSVs carry no
//! wall-clock columns and are byte-identical across reruns of the same
//! config, corpus and seed.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use phishscan_core::corpus::{corpus_report, Corpus, YearMonth};
use phishscan_core::disasm;
use phishscan_core::error::Error;
use phishscan_core::eval::{
    self, run_cv, run_scalability, run_time_resistance, CvConfig, TimeWindowPlan,
};
use phishscan_core::features::{
    self, build_histogram_vocab, encode_rgb_image, featurize_streams, BigramVocab, ExportInput,
    FrequencyTable,
};
use phishscan_core::models::{
    save_model_binary, save_model_json, shap_summary, train_model, Hyperparams, Model,
    ModelFamily,
};
use phishscan_core::opcode::OpcodeTable;
use phishscan_core::rpc::{RpcClient, RpcConfig};
use phishscan_core::stats::{self, cdd_inputs, dunn_pairwise, kruskal_wallis, shapiro_wilk};
use phishscan_core::synth::{generate_corpus, SynthConfig};

#[derive(Parser)]
#[command(name = "phishscan", version, about = "Phishing smart-contract detection from EVM opcodes")]
struct Cli {
    /// Root directory for run artifacts.
    #[arg(long, global = true, default_value = "out")]
    out_dir: PathBuf,

    /// Fixed name for the run directory (default: run-<timestamp>).
    #[arg(long, global = true)]
    run_label: Option<String>,

    /// Base RNG seed.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Worker threads for data-parallel sections (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    workers: usize,

    /// JSON config file supplying defaults for evaluate/scalability/
    /// timeline (flags override it).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Opcode table CSV (defaults to the built-in Shanghai table).
    #[arg(long, global = true)]
    opcode_table: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fetch deployed bytecode over JSON-RPC (eth_getCode).
    Fetch(FetchArgs),
    /// Disassemble a hex string or file of bytecode.
    Disasm(DisasmArgs),
    /// Export feature encodings for a corpus.
    Featurize(FeaturizeArgs),
    /// Train one model on a full corpus and save it.
    Train(TrainArgs),
    /// Repeated stratified k-fold cross-validation.
    Evaluate(EvaluateArgs),
    /// Nested-subset scalability study with timing tables.
    Scalability(ScalabilityArgs),
    /// Train-early/test-late time resistance with AUT.
    Timeline(TimelineArgs),
    /// Post hoc statistics over a metrics CSV.
    Posthoc(PosthocArgs),
    /// TreeSHAP attribution summary for a fold's test split.
    Explain(ExplainArgs),
    /// Generate a seeded synthetic corpus.
    GenCorpus(GenCorpusArgs),
    /// Monthly counts and opcode usage-share report.
    Report(ReportArgs),
}

#[derive(Args)]
struct FetchArgs {
    /// Contract address (0x + 40 hex chars).
    #[arg(long)]
    address: String,
    /// JSON-RPC endpoint (falls back to env ETH_RPC_URL).
    #[arg(long)]
    endpoint: Option<String>,
    #[arg(long, default_value = "latest")]
    block_tag: String,
    #[arg(long)]
    cache_dir: Option<PathBuf>,
    /// Requests per second.
    #[arg(long, default_value_t = 5.0)]
    rate_limit: f64,
}

#[derive(Args)]
struct DisasmArgs {
    /// Hex bytecode (optionally 0x-prefixed) or a file path containing it.
    #[arg(long, name = "in")]
    input: String,
    /// Write CSV here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct FeaturizeArgs {
    #[arg(long)]
    corpus: PathBuf,
    /// histogram, rgb, freq or bigram.
    #[arg(long, default_value = "histogram")]
    encoder: String,
}

#[derive(Args, Clone)]
struct ModelParams {
    #[arg(long, default_value_t = 300)]
    n_trees: usize,
    #[arg(long)]
    max_depth: Option<usize>,
    #[arg(long, default_value_t = 0.3)]
    learning_rate: f64,
    #[arg(long, default_value_t = 9)]
    k_neighbors: usize,
    #[arg(long, default_value_t = 1e-2)]
    l2: f64,
    #[arg(long, default_value_t = 300)]
    max_iters: usize,
}

impl ModelParams {
    fn to_hyperparams(&self) -> Hyperparams {
        Hyperparams {
            n_trees: self.n_trees,
            max_depth: self.max_depth,
            learning_rate: self.learning_rate,
            reg_lambda: 1.0,
            k: self.k_neighbors,
            l2: self.l2,
            max_iters: self.max_iters,
        }
    }
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long)]
    corpus: PathBuf,
    /// rf, gbdt, knn, logreg or svm.
    #[arg(long, default_value = "rf")]
    model: String,
    #[command(flatten)]
    params: ModelParams,
}

#[derive(Args)]
struct EvaluateArgs {
    #[arg(long)]
    corpus: Option<PathBuf>,
    /// Comma-separated families, or "all".
    #[arg(long, default_value = "rf")]
    model: String,
    #[arg(long, default_value_t = 10)]
    k: usize,
    #[arg(long, default_value_t = 3)]
    runs: usize,
    #[command(flatten)]
    params: ModelParams,
}

#[derive(Args)]
struct ScalabilityArgs {
    #[arg(long)]
    corpus: Option<PathBuf>,
    #[arg(long, default_value = "rf,gbdt,knn")]
    models: String,
    /// Comma-separated fractions of the corpus.
    #[arg(long, default_value = "0.3333,0.6667,1.0")]
    fractions: String,
    #[arg(long, default_value_t = 10)]
    k: usize,
    #[arg(long, default_value_t = 1)]
    runs: usize,
    #[command(flatten)]
    params: ModelParams,
}

#[derive(Args)]
struct TimelineArgs {
    #[arg(long)]
    corpus: Option<PathBuf>,
    #[arg(long, default_value = "rf")]
    models: String,
    #[arg(long, default_value = "2023-10")]
    train_start: String,
    #[arg(long, default_value = "2024-01")]
    train_end: String,
    #[arg(long, default_value = "2024-02")]
    test_start: String,
    #[arg(long, default_value = "2024-10")]
    test_end: String,
    #[command(flatten)]
    params: ModelParams,
}

#[derive(Args)]
struct PosthocArgs {
    /// Metrics CSV produced by `evaluate`.
    #[arg(long)]
    metrics: PathBuf,
    /// Emit the tie-corrected Dunn variant instead of the plain one.
    #[arg(long, default_value_t = false)]
    dunn_tie_correction: bool,
}

#[derive(Args)]
struct ExplainArgs {
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long, default_value = "rf")]
    model: String,
    #[arg(long, default_value_t = 10)]
    k: usize,
    #[arg(long, default_value_t = 0)]
    fold: usize,
    #[arg(long, default_value_t = 20)]
    top: usize,
    #[command(flatten)]
    params: ModelParams,
}

#[derive(Args)]
struct GenCorpusArgs {
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 7000)]
    samples: usize,
    /// Add temporal drift so detection decays over the study window.
    #[arg(long, default_value_t = false)]
    temporal: bool,
    /// Minimal-proxy clones to append, as a fraction of samples.
    #[arg(long, default_value_t = 0.0)]
    duplicates: f64,
}

#[derive(Args)]
struct ReportArgs {
    #[arg(long)]
    corpus: PathBuf,
    /// Mnemonics whose usage-share distributions to emit.
    #[arg(long, default_value = "GAS,CALL,SSTORE,DELEGATECALL,PUSH1,JUMPI")]
    mnemonics: String,
}

/// Optional config-file defaults (flags win).
#[derive(Debug, Default, Deserialize)]
struct FileConfig {
    corpus: Option<PathBuf>,
    models: Option<String>,
    k: Option<usize>,
    runs: Option<usize>,
    fractions: Option<String>,
    train_start: Option<String>,
    train_end: Option<String>,
    test_start: Option<String>,
    test_end: Option<String>,
}

#[derive(Serialize)]
struct RunSnapshot<'a> {
    subcommand: &'a str,
    seed: u64,
    workers: usize,
    opcode_table_version: &'a str,
    opcode_table_digest: String,
    corpus_path: Option<&'a Path>,
    corpus_digest: Option<String>,
    extra: serde_json::Value,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            // single machine-parsable line
            eprintln!("error: {}", e.to_string().replace('\n', " "));
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    #[cfg(feature = "parallel")]
    if cli.workers > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cli.workers)
            .build_global()
            .map_err(|e| Error::other(format!("thread pool: {e}")))?;
    }

    let table_owned;
    let table: &OpcodeTable = match &cli.opcode_table {
        Some(path) => {
            table_owned = OpcodeTable::load(path)?;
            &table_owned
        }
        None => OpcodeTable::shanghai(),
    };

    let file_config: FileConfig = match &cli.config {
        Some(path) => serde_json::from_str(&std::fs::read_to_string(path)?)
            .map_err(|e| Error::Validation(format!("bad config file: {e}")))?,
        None => FileConfig::default(),
    };

    match &cli.command {
        Command::Fetch(args) => cmd_fetch(args),
        Command::Disasm(args) => cmd_disasm(args, table),
        Command::Featurize(args) => cmd_featurize(&cli, args, table),
        Command::Train(args) => cmd_train(&cli, args, table),
        Command::Evaluate(args) => cmd_evaluate(&cli, args, &file_config, table),
        Command::Scalability(args) => cmd_scalability(&cli, args, &file_config, table),
        Command::Timeline(args) => cmd_timeline(&cli, args, &file_config, table),
        Command::Posthoc(args) => cmd_posthoc(&cli, args),
        Command::Explain(args) => cmd_explain(&cli, args, table),
        Command::GenCorpus(args) => cmd_gen_corpus(&cli, args),
        Command::Report(args) => cmd_report(&cli, args, table),
    }
}

fn run_dir(cli: &Cli, subcommand: &str) -> Result<PathBuf, Error> {
    let label = cli.run_label.clone().unwrap_or_else(|| {
        let ts = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        format!("run-{subcommand}-{ts}")
    });
    let dir = cli.out_dir.join(label);
    std::fs::create_dir_all(&dir)?;
    Ok(dir)
}

fn snapshot(
    cli: &Cli,
    dir: &Path,
    subcommand: &str,
    table: &OpcodeTable,
    corpus_path: Option<&Path>,
    extra: serde_json::Value,
) -> Result<(), Error> {
    let table_digest = hex::encode(Sha256::digest(
        serde_json::to_vec(table.specs()).map_err(|e| Error::other(e.to_string()))?,
    ));
    let corpus_digest = match corpus_path {
        Some(p) => Some(hex::encode(Sha256::digest(std::fs::read(p)?))),
        None => None,
    };
    let snap = RunSnapshot {
        subcommand,
        seed: cli.seed,
        workers: cli.workers,
        opcode_table_version: table.version(),
        opcode_table_digest: table_digest,
        corpus_path,
        corpus_digest,
        extra,
    };
    std::fs::write(
        dir.join("resolved-config.json"),
        serde_json::to_string_pretty(&snap).map_err(|e| Error::other(e.to_string()))?,
    )?;
    Ok(())
}

fn parse_families(spec: &str) -> Result<Vec<ModelFamily>, Error> {
    if spec == "all" {
        return Ok(ModelFamily::ALL.to_vec());
    }
    spec.split(',').map(|s| s.trim().parse()).collect()
}

fn cmd_fetch(args: &FetchArgs) -> Result<(), Error> {
    let endpoint = args
        .endpoint
        .clone()
        .or_else(|| std::env::var("ETH_RPC_URL").ok())
        .ok_or_else(|| Error::Validation("no endpoint: pass --endpoint or set ETH_RPC_URL".into()))?;
    let mut config = RpcConfig::new(endpoint).with_rate_limit(args.rate_limit);
    if let Some(dir) = &args.cache_dir {
        config = config.with_cache_dir(dir);
    }
    let client = RpcClient::new(config);
    let bytecode = client.fetch_bytecode(&args.address, &args.block_tag)?;
    if bytecode.is_empty() {
        eprintln!(
            "notice: {} has no code at {} (externally owned account)",
            args.address, args.block_tag
        );
    }
    println!("0x{}", hex::encode(bytecode));
    Ok(())
}

fn cmd_disasm(args: &DisasmArgs, table: &OpcodeTable) -> Result<(), Error> {
    let text = if Path::new(&args.input).is_file() {
        std::fs::read_to_string(&args.input)?
    } else {
        args.input.clone()
    };
    let instructions = disasm::disassemble_hex(text.trim(), table)?;
    match &args.out {
        Some(path) => {
            let rows = disasm::write_disassembly_csv_file(&instructions, table, path)?;
            println!("{rows}");
        }
        None => {
            let mut buf = Vec::new();
            disasm::write_disassembly_csv(&instructions, table, &mut buf)?;
            print!("{}", String::from_utf8_lossy(&buf));
        }
    }
    Ok(())
}

fn cmd_featurize(cli: &Cli, args: &FeaturizeArgs, table: &OpcodeTable) -> Result<(), Error> {
    let corpus = Corpus::load(&args.corpus)?;
    if corpus.is_empty() {
        return Err(Error::EmptyInput("corpus is empty".into()));
    }
    let dir = run_dir(cli, "featurize")?;
    snapshot(
        cli,
        &dir,
        "featurize",
        table,
        Some(&args.corpus),
        serde_json::json!({"encoder": args.encoder}),
    )?;

    let streams = phishscan_core::corpus::disassemble_corpus(&corpus, table);
    let ids: Vec<String> = corpus.records().iter().map(|r| r.address.clone()).collect();
    let labels: Vec<_> = corpus.records().iter().map(|r| r.label).collect();

    let manifest = match args.encoder.as_str() {
        "histogram" => {
            let vocab = build_histogram_vocab(&streams, table)?;
            let matrix = featurize_streams(&streams, &ids, &labels, &vocab)?;
            features::export_features(ExportInput::Histograms(&matrix), &dir, "histograms")?
        }
        "rgb" => {
            let tensors: Vec<_> = corpus
                .records()
                .iter()
                .map(|r| encode_rgb_image(&r.bytecode).0)
                .collect();
            features::export_features(ExportInput::Images(&tensors), &dir, "rgb")?
        }
        "freq" => {
            let lookup = FrequencyTable::build(&streams, table);
            let tensors: Vec<_> = streams
                .iter()
                .map(|s| features::encode_frequency_image(s, &lookup, table).0)
                .collect();
            features::export_features(ExportInput::Images(&tensors), &dir, "freq")?
        }
        "bigram" => {
            let codes: Vec<Vec<u8>> = corpus.records().iter().map(|r| r.bytecode.clone()).collect();
            let vocab = BigramVocab::build(&codes);
            let sequences: Vec<_> = codes
                .iter()
                .map(|c| features::tokens::tokenize_bigrams(c, &vocab))
                .collect();
            features::export_features(ExportInput::Tokens(&sequences), &dir, "bigrams")?
        }
        other => {
            return Err(Error::Validation(format!(
                "unknown encoder {other:?} (histogram|rgb|freq|bigram)"
            )))
        }
    };
    println!(
        "wrote {} file(s) under {}",
        manifest.files.len(),
        dir.display()
    );
    Ok(())
}

fn cmd_train(cli: &Cli, args: &TrainArgs, table: &OpcodeTable) -> Result<(), Error> {
    let family: ModelFamily = args.model.parse()?;
    let corpus = Corpus::load(&args.corpus)?;
    let dir = run_dir(cli, "train")?;
    snapshot(
        cli,
        &dir,
        "train",
        table,
        Some(&args.corpus),
        serde_json::json!({"model": family.name()}),
    )?;

    let streams = phishscan_core::corpus::disassemble_corpus(&corpus, table);
    let ids: Vec<String> = corpus.records().iter().map(|r| r.address.clone()).collect();
    let labels: Vec<_> = corpus.records().iter().map(|r| r.label).collect();
    let vocab = build_histogram_vocab(&streams, table)?;
    let matrix = featurize_streams(&streams, &ids, &labels, &vocab)?;
    let model: Model = train_model(family, &matrix, &args.params.to_hyperparams(), cli.seed)?;

    save_model_json(&model, dir.join("model.json"))?;
    save_model_binary(&model, dir.join("model.bin"))?;
    std::fs::write(
        dir.join("vocab.json"),
        serde_json::to_string_pretty(&vocab).map_err(|e| Error::other(e.to_string()))?,
    )?;
    println!("trained {} on {} samples -> {}", family.name(), corpus.len(), dir.display());
    Ok(())
}

fn corpus_from(args_path: &Option<PathBuf>, config: &FileConfig) -> Result<PathBuf, Error> {
    args_path
        .clone()
        .or_else(|| config.corpus.clone())
        .ok_or_else(|| Error::Validation("no corpus: pass --corpus or set it in --config".into()))
}

fn cmd_evaluate(
    cli: &Cli,
    args: &EvaluateArgs,
    config: &FileConfig,
    table: &OpcodeTable,
) -> Result<(), Error> {
    let corpus_path = corpus_from(&args.corpus, config)?;
    let corpus = Corpus::load(&corpus_path)?;
    let families = parse_families(config.models.as_deref().unwrap_or(&args.model))?;
    let k = config.k.unwrap_or(args.k);
    let runs = config.runs.unwrap_or(args.runs);

    let dir = run_dir(cli, "evaluate")?;
    snapshot(
        cli,
        &dir,
        "evaluate",
        table,
        Some(&corpus_path),
        serde_json::json!({
            "models": families.iter().map(|f| f.name()).collect::<Vec<_>>(),
            "k": k,
            "runs": runs,
        }),
    )?;

    let mut all_records = Vec::new();
    for family in families {
        let mut cv = CvConfig::new(k, runs, args.params.to_hyperparams());
        cv.seeds = (0..runs as u64).map(|r| cli.seed + r).collect();
        let records = run_cv(family, &corpus, table, &cv)?;
        all_records.extend(records);
    }
    let metrics_file = std::fs::File::create(dir.join("metrics.csv"))?;
    eval::write_metrics_csv(&all_records, std::io::BufWriter::new(metrics_file))?;
    let timings_file = std::fs::File::create(dir.join("timings.csv"))?;
    eval::write_timings_csv(&all_records, std::io::BufWriter::new(timings_file))?;
    println!(
        "{} records -> {}",
        all_records.len(),
        dir.join("metrics.csv").display()
    );
    Ok(())
}

fn cmd_scalability(
    cli: &Cli,
    args: &ScalabilityArgs,
    config: &FileConfig,
    table: &OpcodeTable,
) -> Result<(), Error> {
    let corpus_path = corpus_from(&args.corpus, config)?;
    let corpus = Corpus::load(&corpus_path)?;
    let families: Vec<_> = parse_families(config.models.as_deref().unwrap_or(&args.models))?
        .into_iter()
        .map(|f| (f, args.params.to_hyperparams()))
        .collect();
    let fractions: Vec<f64> = config
        .fractions
        .as_deref()
        .unwrap_or(&args.fractions)
        .split(',')
        .map(|s| {
            s.trim()
                .parse()
                .map_err(|e| Error::Validation(format!("bad fraction {s:?}: {e}")))
        })
        .collect::<Result<_, _>>()?;
    let k = config.k.unwrap_or(args.k);
    let runs = config.runs.unwrap_or(args.runs);

    let dir = run_dir(cli, "scalability")?;
    snapshot(
        cli,
        &dir,
        "scalability",
        table,
        Some(&corpus_path),
        serde_json::json!({"fractions": fractions, "k": k, "runs": runs}),
    )?;

    let report = run_scalability(&families, &corpus, table, &fractions, k, runs, cli.seed)?;
    let metrics_file = std::fs::File::create(dir.join("scalability_metrics.csv"))?;
    eval::write_metrics_csv(&report.records, std::io::BufWriter::new(metrics_file))?;

    let mut summary = String::from(
        "model,fraction,subset_size,accuracy,f1_phishing,precision_phishing,recall_phishing,train_time_s,infer_time_s\n",
    );
    for s in &report.summaries {
        summary.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            s.model,
            s.fraction,
            s.subset_size,
            s.mean_accuracy,
            s.mean_f1_phishing,
            s.mean_precision_phishing,
            s.mean_recall_phishing,
            s.mean_train_time_s,
            s.mean_infer_time_s
        ));
    }
    std::fs::write(dir.join("scalability_summary.csv"), summary)?;

    // critical-difference inputs per metric over (models x splits)
    let model_names: Vec<String> = families.iter().map(|(f, _)| f.name().to_string()).collect();
    let mut cdd_rows = String::from("metric,model,mean_rank\n");
    let mut pair_rows =
        String::from("metric,model_i,model_j,wilcoxon_statistic,p,p_adj,significant\n");
    for (metric_name, metric_fn) in [
        ("accuracy", &(|s: &eval::SplitSummary| s.mean_accuracy) as &dyn Fn(&eval::SplitSummary) -> f64),
        ("f1_phishing", &|s| s.mean_f1_phishing),
        ("precision_phishing", &|s| s.mean_precision_phishing),
        ("recall_phishing", &|s| s.mean_recall_phishing),
    ] {
        let matrix = eval::metric_block_matrix(&report.summaries, &model_names, metric_fn);
        let cdd = cdd_inputs(&matrix, stats::ALPHA)?;
        for (m, rank) in model_names.iter().zip(&cdd.mean_ranks) {
            cdd_rows.push_str(&format!("{metric_name},{m},{rank}\n"));
        }
        for pair in &cdd.pairs {
            pair_rows.push_str(&format!(
                "{metric_name},{},{},{},{},{},{}\n",
                model_names[pair.i],
                model_names[pair.j],
                pair.statistic,
                pair.p,
                pair.p_adj,
                pair.significant
            ));
        }
        // effect sizes between model pairs across splits
        for i in 0..matrix.len() {
            for j in (i + 1)..matrix.len() {
                let delta = stats::cliffs_delta(&matrix[i], &matrix[j])?;
                pair_rows.push_str(&format!(
                    "{metric_name}:cliffs_delta,{},{},{},1,1,false\n",
                    model_names[i], model_names[j], delta.statistic
                ));
            }
        }
    }
    std::fs::write(dir.join("cdd_mean_ranks.csv"), cdd_rows)?;
    std::fs::write(dir.join("cdd_pairs.csv"), pair_rows)?;
    println!("scalability artifacts -> {}", dir.display());
    Ok(())
}

fn cmd_timeline(
    cli: &Cli,
    args: &TimelineArgs,
    config: &FileConfig,
    table: &OpcodeTable,
) -> Result<(), Error> {
    let corpus_path = corpus_from(&args.corpus, config)?;
    let corpus = Corpus::load(&corpus_path)?;
    let families: Vec<_> = parse_families(config.models.as_deref().unwrap_or(&args.models))?
        .into_iter()
        .map(|f| (f, args.params.to_hyperparams()))
        .collect();

    let parse_month = |flag: &Option<String>, arg: &str| -> Result<YearMonth, Error> {
        flag.as_deref().unwrap_or(arg).parse()
    };
    let train_start = parse_month(&config.train_start, &args.train_start)?;
    let train_end = parse_month(&config.train_end, &args.train_end)?;
    let test_start: YearMonth = parse_month(&config.test_start, &args.test_start)?;
    let test_end: YearMonth = parse_month(&config.test_end, &args.test_end)?;
    let plan = TimeWindowPlan {
        train_start,
        train_end,
        test_months: test_start.range_to(test_end),
    };

    let dir = run_dir(cli, "timeline")?;
    snapshot(
        cli,
        &dir,
        "timeline",
        table,
        Some(&corpus_path),
        serde_json::json!({
            "train": format!("{train_start}..{train_end}"),
            "test": format!("{test_start}..{test_end}"),
        }),
    )?;

    let report = run_time_resistance(&families, &corpus, table, &plan, cli.seed)?;
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    let mut rows = String::from("model,month,test_size,accuracy,f1_phishing,precision_phishing,recall_phishing\n");
    for r in &report.rows {
        match &r.metrics {
            Some(m) => rows.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                r.model,
                r.month,
                r.test_size,
                m.accuracy,
                m.f1_phishing,
                m.precision_phishing,
                m.recall_phishing
            )),
            None => rows.push_str(&format!("{},{},0,,,,\n", r.model, r.month)),
        }
    }
    std::fs::write(dir.join("timeline.csv"), rows)?;
    let mut aut_rows = String::from("model,aut\n");
    for (model, value) in &report.aut {
        aut_rows.push_str(&format!("{model},{value}\n"));
    }
    std::fs::write(dir.join("aut.csv"), aut_rows)?;
    println!("timeline artifacts -> {}", dir.display());
    Ok(())
}

fn cmd_posthoc(cli: &Cli, args: &PosthocArgs) -> Result<(), Error> {
    let text = std::fs::read_to_string(&args.metrics)?;
    let dir = run_dir(cli, "posthoc")?;

    let metrics = [
        "accuracy",
        "f1_phishing",
        "precision_phishing",
        "recall_phishing",
    ];
    let mut results: Vec<(String, stats::StatTestResult)> = Vec::new();
    let mut dunn_rows =
        String::from("metric,model_i,model_j,z,p,p_adj,significant\n");
    let mut kw_results = Vec::new();
    for metric in metrics {
        let (names, groups) = eval::read_metric_groups(&text, metric)?;
        // normality per model-metric pair
        for (name, group) in names.iter().zip(&groups) {
            match shapiro_wilk(group) {
                Ok(r) => results.push((format!("{metric}:{name}"), r)),
                Err(Error::DegenerateSample(_)) => {} // constant trials carry no evidence
                Err(e) => return Err(e),
            }
        }
        let (kw, _) = kruskal_wallis(&groups)?;
        kw_results.push((metric.to_string(), kw));

        for pair in dunn_pairwise(&groups, args.dunn_tie_correction)? {
            let (i, j) = pair.pair.expect("dunn results are pairwise");
            dunn_rows.push_str(&format!(
                "{metric},{},{},{},{},{},{}\n",
                names[i],
                names[j],
                pair.statistic,
                pair.p,
                pair.p_adj.unwrap_or(1.0),
                pair.p_adj.unwrap_or(1.0) < stats::ALPHA
            ));
        }
    }
    // Holm across the four omnibus tests
    let adjusted = stats::holm_bonferroni(&kw_results.iter().map(|(_, r)| r.p).collect::<Vec<_>>())?;
    for ((metric, mut kw), adj) in kw_results.into_iter().zip(adjusted) {
        kw.p_adj = Some(adj);
        results.push((metric, kw));
    }

    let file = std::fs::File::create(dir.join("posthoc_tests.csv"))?;
    stats::write_results_csv(&results, std::io::BufWriter::new(file))?;
    std::fs::write(dir.join("dunn_pairs.csv"), dunn_rows)?;

    // headline verdicts on stdout
    for (label, r) in results.iter().filter(|(_, r)| matches!(r.method, stats::TestMethod::KruskalWallis)) {
        let adj = r.p_adj.unwrap_or(r.p);
        println!(
            "kruskal_wallis {label}: H={:.4} p_adj={adj:.3e} {}",
            r.statistic,
            if adj < stats::ALPHA { "reject" } else { "accept" }
        );
    }
    println!("posthoc artifacts -> {}", dir.display());
    Ok(())
}

fn cmd_explain(cli: &Cli, args: &ExplainArgs, table: &OpcodeTable) -> Result<(), Error> {
    let family: ModelFamily = args.model.parse()?;
    if !matches!(family, ModelFamily::RandomForest | ModelFamily::Gbdt) {
        return Err(Error::Validation(
            "explain requires a tree ensemble (rf or gbdt)".into(),
        ));
    }
    let corpus = Corpus::load(&args.corpus)?;
    let dir = run_dir(cli, "explain")?;
    snapshot(
        cli,
        &dir,
        "explain",
        table,
        Some(&args.corpus),
        serde_json::json!({"model": family.name(), "fold": args.fold, "k": args.k, "top": args.top}),
    )?;

    let streams = phishscan_core::corpus::disassemble_corpus(&corpus, table);
    let ids: Vec<String> = corpus.records().iter().map(|r| r.address.clone()).collect();
    let labels: Vec<_> = corpus.records().iter().map(|r| r.label).collect();
    let plan = eval::make_folds(&labels, args.k, cli.seed, true)?;
    let train_idx = plan.train_indices(args.fold);
    let test_idx = plan.test_indices(args.fold);

    let train_streams: Vec<_> = train_idx.iter().map(|&i| streams[i].clone()).collect();
    let vocab = build_histogram_vocab(&train_streams, table)?;
    let train_ids: Vec<_> = train_idx.iter().map(|&i| ids[i].clone()).collect();
    let train_labels: Vec<_> = train_idx.iter().map(|&i| labels[i]).collect();
    let train_matrix = featurize_streams(&train_streams, &train_ids, &train_labels, &vocab)?;

    let test_streams: Vec<_> = test_idx.iter().map(|&i| streams[i].clone()).collect();
    let test_ids: Vec<_> = test_idx.iter().map(|&i| ids[i].clone()).collect();
    let test_labels: Vec<_> = test_idx.iter().map(|&i| labels[i]).collect();
    let test_matrix = featurize_streams(&test_streams, &test_ids, &test_labels, &vocab)?;

    let model = train_model(family, &train_matrix, &args.params.to_hyperparams(), cli.seed)?;
    let Model::Forest(forest) = &model else {
        unreachable!("family restricted to tree ensembles above");
    };
    let summary = shap_summary(forest, &test_matrix, args.top)?;

    let file = std::fs::File::create(dir.join("shap_summary.csv"))?;
    summary.write_csv(std::io::BufWriter::new(file))?;
    let mut top = String::from("rank,feature,mean_abs_shap\n");
    for (rank, (_, name, value)) in summary.top_features.iter().enumerate() {
        top.push_str(&format!("{},{name},{value}\n", rank + 1));
    }
    std::fs::write(dir.join("top_features.csv"), top)?;
    println!(
        "attributions for {} test samples -> {}",
        test_matrix.n_rows(),
        dir.display()
    );
    Ok(())
}

fn cmd_gen_corpus(cli: &Cli, args: &GenCorpusArgs) -> Result<(), Error> {
    let config = SynthConfig {
        n_samples: args.samples,
        seed: cli.seed.max(7), // seed 0 is reserved for experiment RNG
        drift_max: if args.temporal { 0.75 } else { 0.0 },
        duplicate_fraction: args.duplicates,
        ..SynthConfig::default()
    };
    let corpus = generate_corpus(&config);
    if let Some(parent) = args.out.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    corpus.save_jsonl(&args.out)?;
    println!(
        "wrote {} records ({} phishing / {} benign) -> {}",
        corpus.len(),
        corpus.label_count(phishscan_core::corpus::Label::Phishing),
        corpus.label_count(phishscan_core::corpus::Label::Benign),
        args.out.display()
    );
    Ok(())
}

fn cmd_report(cli: &Cli, args: &ReportArgs, table: &OpcodeTable) -> Result<(), Error> {
    let corpus = Corpus::load(&args.corpus)?;
    let mnemonics: Vec<String> = args
        .mnemonics
        .split(',')
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty())
        .collect();
    let report = corpus_report(&corpus, &mnemonics, table)?;
    let dir = run_dir(cli, "report")?;
    snapshot(cli, &dir, "report", table, Some(&args.corpus), serde_json::Value::Null)?;

    let monthly = std::fs::File::create(dir.join("monthly_counts.csv"))?;
    report.write_monthly_csv(std::io::BufWriter::new(monthly))?;
    let usage = std::fs::File::create(dir.join("opcode_usage.csv"))?;
    report.write_usage_csv(std::io::BufWriter::new(usage))?;
    println!("report artifacts -> {}", dir.display());
    Ok(())
}
