use std::fs::{self, File};
use std::io::{BufWriter, IsTerminal};
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use tracing::warn;
use tracing_subscriber::EnvFilter;

use litqa::corpus::{load_corpus, tokenize_corpus, CorpusFormat, TokenizedDoc};
use litqa::eval::{render_table, EvalReport};
use litqa::pipeline::{
    build_index, build_reader, dataset_name, load_dataset, run_eval_rc, Engine, EvalMode, IndexBundle,
    PipelineConfig, PipelineError, PipelineKind,
};
use litqa::topicfilter::{write_model, LdaParams, LdaSampler};
use litqa_service::exit_code;

/// Question answering over article corpora.
#[derive(Debug, Parser)]
#[command(name = "qa", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build an index bundle from a JSON-lines corpus.
    Index(IndexArgs),
    /// Answer one question against a bundle and print the result as JSON.
    Ask(AskArgs),
    /// Score a reader or a full pipeline on a QA dataset.
    Eval(EvalArgs),
    /// Serve the HTTP API.
    Serve(ServeArgs),
    /// Topic model utilities.
    Lda {
        #[command(subcommand)]
        command: LdaCommand,
    },
    /// Evaluation report utilities.
    Report {
        #[command(subcommand)]
        command: ReportCommand,
    },
}

#[derive(Debug, Args)]
struct IndexArgs {
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    config: Option<PathBuf>,
    /// keyword-cosine or lda-filter.
    #[arg(long)]
    pipeline: Option<String>,
    /// Comma separated.
    #[arg(long, value_delimiter = ',')]
    keywords: Option<Vec<String>>,
    #[arg(long)]
    topics: Option<usize>,
    #[arg(long)]
    iterations: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    min_tokens: Option<usize>,
}

#[derive(Debug, Args)]
struct AskArgs {
    #[arg(long)]
    bundle: PathBuf,
    /// Defaults to the config recorded in the bundle.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    top_n: Option<usize>,
    /// Include per-stage timings in the output.
    #[arg(long)]
    timings: bool,
    question: String,
}

#[derive(Debug, Args)]
struct EvalArgs {
    #[arg(long)]
    dataset: PathBuf,
    /// Required for pipeline mode; in rc mode it supplies contexts for examples that have none.
    #[arg(long)]
    bundle: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
    /// rc or pipeline.
    #[arg(long, default_value = "rc")]
    mode: String,
    /// Write the JSON report here and print the table instead.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ServeArgs {
    #[arg(long)]
    bundle: PathBuf,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value = "127.0.0.1:8080")]
    bind: SocketAddr,
    /// Directory of static UI assets.
    #[arg(long)]
    ui_dir: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum LdaCommand {
    /// Fit a topic model on a corpus and write it as an LDAF1 file.
    Fit(LdaFitArgs),
}

#[derive(Debug, Args)]
struct LdaFitArgs {
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 20)]
    topics: usize,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long, default_value_t = 0.01)]
    beta: f64,
    #[arg(long, default_value_t = 500)]
    iterations: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = 25)]
    min_tokens: usize,
    /// Print this many highest-probability words per topic.
    #[arg(long, default_value_t = 8)]
    top_words: usize,
}

#[derive(Debug, Subcommand)]
enum ReportCommand {
    /// Render one or more JSON reports as a dataset x system table.
    Render { reports: Vec<PathBuf> },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    tracing_subscriber::fmt()
        .with_writer(std::io::stderr)
        .with_ansi(std::io::stderr().is_terminal())
        .with_env_filter(EnvFilter::try_from_default_env().unwrap_or_else(|_| EnvFilter::new("warn")))
        .init();

    let outcome = match cli.command {
        Command::Index(args) => index(args),
        Command::Ask(args) => ask(args),
        Command::Eval(args) => eval(args),
        Command::Serve(args) => serve(args),
        Command::Lda { command: LdaCommand::Fit(args) } => lda_fit(args),
        Command::Report { command: ReportCommand::Render { reports } } => report_render(&reports),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(e.class()) as u8)
        }
    }
}

fn usage(message: impl Into<String>) -> PipelineError {
    PipelineError::Config(message.into())
}

fn io_error(path: &Path) -> impl FnOnce(std::io::Error) -> PipelineError + '_ {
    move |source| PipelineError::Io { path: path.to_path_buf(), source }
}

/// Config file if given, else the one recorded in the bundle, else defaults; then env overrides.
fn resolve_config(path: Option<&Path>, bundle: Option<&IndexBundle>) -> Result<PipelineConfig, PipelineError> {
    let mut config = match (path, bundle) {
        (Some(p), _) => PipelineConfig::load(p)?,
        (None, Some(b)) => b.manifest.config.clone(),
        (None, None) => PipelineConfig::default(),
    };
    config.apply_env_overrides(|key| std::env::var(key).ok());
    config.validate()?;
    Ok(config)
}

fn print_json<T: serde::Serialize>(value: &T) {
    println!("{}", serde_json::to_string_pretty(value).expect("output serializes"));
}

fn index(args: IndexArgs) -> Result<(), PipelineError> {
    let mut config = resolve_config(args.config.as_deref(), None)?;
    if let Some(kind) = &args.pipeline {
        config.pipeline = match kind.as_str() {
            "keyword-cosine" => PipelineKind::KeywordCosine,
            "lda-filter" => PipelineKind::LdaFilter,
            other => return Err(usage(format!("unknown pipeline {other:?}"))),
        };
    }
    if let Some(k) = args.keywords {
        config.keywords = k.into_iter().filter(|s| !s.trim().is_empty()).collect();
    }
    if let Some(k) = args.topics {
        config.lda.topics = k;
    }
    if let Some(n) = args.iterations {
        config.lda.iterations = n;
    }
    if let Some(s) = args.seed {
        config.lda.seed = s;
    }
    if let Some(m) = args.min_tokens {
        config.lda.min_tokens = m;
    }
    let bundle = build_index(&args.corpus, &config, &args.out)?;
    for d in &bundle.manifest.skipped_records {
        warn!(line = d.line, "skipped record: {}", d.reason);
    }
    print_json(&bundle.manifest);
    Ok(())
}

fn ask(args: AskArgs) -> Result<(), PipelineError> {
    let bundle = IndexBundle::open(&args.bundle)?;
    let config = resolve_config(args.config.as_deref(), Some(&bundle))?;
    let engine = Engine::new(Arc::new(bundle), config)?;
    let result = engine.answer_question(&args.question, args.top_n)?;
    let result = if args.timings { result } else { result.without_timing() };
    print_json(&result);
    Ok(())
}

fn eval(args: EvalArgs) -> Result<(), PipelineError> {
    let mode: EvalMode = args.mode.parse().map_err(usage)?;
    let run = match (&args.bundle, mode) {
        (Some(dir), _) => {
            let bundle = IndexBundle::open(dir)?;
            let config = resolve_config(args.config.as_deref(), Some(&bundle))?;
            Engine::new(Arc::new(bundle), config)?.run_eval(&args.dataset, mode)?
        }
        (None, EvalMode::Pipeline) => return Err(usage("pipeline mode needs --bundle")),
        (None, EvalMode::Rc) => {
            let config = resolve_config(args.config.as_deref(), None)?;
            let reader = build_reader(&config)?;
            let (examples, mut diagnostics) = load_dataset(&args.dataset)?;
            let mut run = run_eval_rc(
                reader.as_ref(),
                examples,
                None,
                config.reader.concurrency,
                &dataset_name(&args.dataset),
                &config.system_name(),
            )?;
            diagnostics.append(&mut run.diagnostics);
            run.diagnostics = diagnostics;
            run
        }
    };
    for d in &run.diagnostics {
        warn!("{d}");
    }
    match &args.out {
        Some(path) => {
            let json = serde_json::to_string_pretty(&run.report).expect("report serializes") + "\n";
            fs::write(path, json).map_err(io_error(path))?;
            print!("{}", render_table(std::slice::from_ref(&run.report)));
        }
        None => print_json(&run.report),
    }
    Ok(())
}

fn serve(args: ServeArgs) -> Result<(), PipelineError> {
    let bundle = IndexBundle::open(&args.bundle)?;
    let config = resolve_config(args.config.as_deref(), Some(&bundle))?;
    let engine = Arc::new(Engine::new(Arc::new(bundle), config)?);
    let runtime = tokio::runtime::Runtime::new().map_err(io_error(Path::new("tokio runtime")))?;
    let bind = args.bind.to_string();
    runtime
        .block_on(litqa_service::serve(engine, args.bind, args.ui_dir))
        .map_err(io_error(Path::new(&bind)))
}

fn lda_fit(args: LdaFitArgs) -> Result<(), PipelineError> {
    let loaded = load_corpus(&args.corpus, CorpusFormat::JsonLines)?;
    let (vocab, docs) = tokenize_corpus(&loaded.articles);
    let (fit, short): (Vec<TokenizedDoc>, Vec<TokenizedDoc>) =
        docs.into_iter().partition(|d| d.len() >= args.min_tokens.max(1));
    for d in &short {
        warn!(article = %d.article_id, "fewer than {} tokens, left out of the fit", args.min_tokens);
    }
    let params = LdaParams {
        alpha: args.alpha.unwrap_or(50.0 / args.topics.max(1) as f64),
        beta: args.beta,
        iterations: args.iterations,
        seed: args.seed,
        topics: args.topics,
    };
    let mut sampler = LdaSampler::new(&fit, vocab.len(), params)?;
    sampler.run();
    let model = sampler.model(vocab.content_hash());
    let file = File::create(&args.out).map_err(io_error(&args.out))?;
    write_model(&model, BufWriter::new(file))?;

    for k in 0..model.topics {
        let mut words: Vec<(usize, f64)> = model.phi_row(k).iter().copied().enumerate().collect();
        words.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        let top: Vec<&str> = words
            .iter()
            .take(args.top_words)
            .filter_map(|(w, _)| vocab.term(*w))
            .collect();
        println!("topic {k}: {}", top.join(" "));
    }
    Ok(())
}

fn report_render(paths: &[PathBuf]) -> Result<(), PipelineError> {
    if paths.is_empty() {
        return Err(usage("no reports given"));
    }
    let reports = paths
        .iter()
        .map(|p| EvalReport::load(p))
        .collect::<Result<Vec<_>, _>>()?;
    print!("{}", render_table(&reports));
    Ok(())
}
