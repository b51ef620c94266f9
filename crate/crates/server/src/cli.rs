use std::fs;
use std::io::Write;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context as _, Result};
use clap::{Args, Parser, Subcommand};
use semfts_core::corpus::Corpus;
use semfts_core::eval::{
    compare_modes, metrics, parse_qrels, parse_queries, run_queries, CompareReport, ModeReport,
};
use semfts_core::index::{build_index, Index, IndexConfig};
use semfts_core::nlp::{decompose, DecomposeOptions, Mode, SciRules};
use semfts_core::ontology::Ontology;
use semfts_core::query::{evaluate_with, parse_query, Evidence, RankOptions};

use crate::api::{router, ApiConfig, AppState};

#[derive(Debug, Parser)]
#[command(
    name = "semfts",
    version,
    about = "Semantic full-text search over entities and text"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Decompose a corpus and write the three index files.
    Build(BuildArgs),
    /// Print the contexts of a corpus as JSON lines.
    Decompose(DecomposeArgs),
    /// Serve the HTTP API over an index.
    Serve(ServeArgs),
    /// Measure queries against relevance judgments.
    Eval(EvalArgs),
    /// Run one query and print the result table.
    Query(QueryArgs),
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// Corpus as JSON lines, one document per line.
    #[arg(long)]
    pub corpus: PathBuf,
    /// Ontology as tab-separated records.
    #[arg(long)]
    pub ontology: PathBuf,
    #[arg(long, default_value = "contexts")]
    pub mode: Mode,
    /// JSON file overriding the clause trigger word lists.
    #[arg(long)]
    pub rules: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BuildArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, env = "SEMFTS_PREFIX_LEN", default_value_t = IndexConfig::default().prefix_len)]
    pub prefix_len: usize,
    /// Print the number of contexts of every document.
    #[arg(long)]
    pub per_doc: bool,
}

#[derive(Debug, Args)]
pub struct DecomposeArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct LimitArgs {
    /// Shortest prefix accepted in `word*` items.
    #[arg(long, env = "SEMFTS_MIN_PREFIX")]
    pub min_prefix: Option<usize>,
    /// Refuse queries whose intermediate lists exceed this many postings.
    #[arg(long, env = "SEMFTS_MAX_POSTINGS")]
    pub max_postings: Option<usize>,
}

impl LimitArgs {
    fn apply(&self, index: &mut Index) {
        if let Some(m) = self.min_prefix {
            index.set_min_prefix(m);
        }
        if let Some(m) = self.max_postings {
            index.set_max_postings(m);
        }
    }
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, env = "SEMFTS_INDEX")]
    pub index: PathBuf,
    #[arg(long, env = "SEMFTS_ADDR", default_value = "127.0.0.1")]
    pub addr: String,
    #[arg(long, env = "SEMFTS_PORT", default_value_t = 8080)]
    pub port: u16,
    /// Must equal the prefix length the index was built with.
    #[arg(long, env = "SEMFTS_PREFIX_LEN")]
    pub prefix_len: Option<usize>,
    #[arg(long, env = "SEMFTS_PAGE_SIZE", default_value_t = 20)]
    pub page_size: usize,
    /// Length of each suggestion list.
    #[arg(long, env = "SEMFTS_SUGGESTIONS", default_value_t = 8)]
    pub suggestions: usize,
    /// Excerpts per result group and query arc.
    #[arg(long, env = "SEMFTS_EVIDENCE", default_value_t = 3)]
    pub evidence: usize,
    /// Allowed CORS origin; any origin when absent.
    #[arg(long, env = "SEMFTS_CORS_ORIGIN")]
    pub cors_origin: Option<String>,
    #[arg(long, env = "SEMFTS_LEGACY_PIN")]
    pub legacy_pin: bool,
    #[command(flatten)]
    pub limits: LimitArgs,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// `topic<TAB>query` lines.
    #[arg(long)]
    pub queries: PathBuf,
    /// `topic<TAB>entity` lines.
    #[arg(long)]
    pub qrels: PathBuf,
    /// Measure this index instead of comparing decomposition modes.
    #[arg(long, conflicts_with_all = ["corpus", "ontology"])]
    pub index: Option<PathBuf>,
    #[arg(long, required_unless_present = "index")]
    pub corpus: Option<PathBuf>,
    #[arg(long, required_unless_present = "index")]
    pub ontology: Option<PathBuf>,
    #[arg(long, env = "SEMFTS_PREFIX_LEN", default_value_t = IndexConfig::default().prefix_len)]
    pub prefix_len: usize,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct QueryArgs {
    #[arg(long, env = "SEMFTS_INDEX")]
    pub index: PathBuf,
    /// Rows to print.
    #[arg(long, default_value_t = 20)]
    pub limit: usize,
    #[arg(long, env = "SEMFTS_LEGACY_PIN")]
    pub legacy_pin: bool,
    #[command(flatten)]
    pub limits: LimitArgs,
    pub query: String,
}

pub fn run(cli: Cli, out: &mut dyn Write) -> Result<()> {
    match cli.command {
        Command::Build(a) => build(&a, out),
        Command::Decompose(a) => decompose_cmd(&a, out),
        Command::Serve(a) => serve(&a),
        Command::Eval(a) => eval(&a, out),
        Command::Query(a) => query(&a, out),
    }
}

fn load_ontology(path: &Path) -> Result<Ontology> {
    Ontology::load(path).with_context(|| format!("loading ontology {}", path.display()))
}

fn load_corpus(path: &Path, ontology: &Ontology) -> Result<Corpus> {
    let loaded = Corpus::load(path, ontology)
        .with_context(|| format!("loading corpus {}", path.display()))?;
    for w in &loaded.warnings {
        log::warn!("{}: {w}", path.display());
    }
    Ok(loaded.corpus)
}

fn load_inputs(a: &InputArgs) -> Result<(Ontology, Corpus, DecomposeOptions)> {
    let ontology = load_ontology(&a.ontology)?;
    let corpus = load_corpus(&a.corpus, &ontology)?;
    let mut options = DecomposeOptions::with_mode(a.mode);
    if let Some(path) = &a.rules {
        let text =
            fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let rules: SciRules = serde_json::from_str(&text)
            .with_context(|| format!("parsing rules {}", path.display()))?;
        options.rules = rules;
    }
    Ok((ontology, corpus, options))
}

fn build(a: &BuildArgs, out: &mut dyn Write) -> Result<()> {
    let (ontology, corpus, options) = load_inputs(&a.input)?;
    let contexts = decompose(&corpus, &ontology, &options);
    let config = IndexConfig {
        prefix_len: a.prefix_len,
        ..Default::default()
    };
    let index = build_index(&contexts, &ontology, Some(&corpus), &config)?;
    index.save(&a.out)?;

    writeln!(out, "mode\t{}", a.input.mode)?;
    writeln!(out, "documents\t{}", corpus.documents().len())?;
    writeln!(out, "sentences\t{}", corpus.num_sentences())?;
    writeln!(out, "contexts\t{}", index.num_contexts())?;
    writeln!(out, "postings\t{}", index.num_postings())?;
    writeln!(out, "blocks\t{}", index.blocks().len())?;
    writeln!(out, "words\t{}", index.vocab().len())?;
    writeln!(out, "entities\t{}", ontology.num_entities())?;
    writeln!(out, "generation\t{:016x}", index.generation())?;
    if a.per_doc {
        let mut counts = vec![0usize; corpus.documents().len()];
        contexts.iter().for_each(|c| counts[c.doc as usize] += 1);
        for (doc, n) in corpus.documents().iter().zip(counts) {
            writeln!(out, "doc\t{}\t{n}", doc.id)?;
        }
    }
    Ok(())
}

fn decompose_cmd(a: &DecomposeArgs, out: &mut dyn Write) -> Result<()> {
    let (ontology, corpus, options) = load_inputs(&a.input)?;
    let contexts = decompose(&corpus, &ontology, &options);
    let mut text = String::new();
    for c in &contexts {
        text.push_str(&c.to_json(&corpus, &ontology).to_string());
        text.push('\n');
    }
    match &a.out {
        Some(path) => {
            fs::write(path, text).with_context(|| format!("writing {}", path.display()))?
        }
        None => out.write_all(text.as_bytes())?,
    }
    Ok(())
}

fn open_index(path: &Path, limits: &LimitArgs) -> Result<Index> {
    let mut index =
        Index::open(path).with_context(|| format!("opening index {}", path.display()))?;
    limits.apply(&mut index);
    Ok(index)
}

fn serve(a: &ServeArgs) -> Result<()> {
    let index = open_index(&a.index, &a.limits)?;
    if let Some(k) = a.prefix_len {
        let built = index.config().prefix_len;
        if k != built {
            bail!("--prefix-len {k} does not match the index, which was built with {built}");
        }
    }
    let config = ApiConfig {
        page_size: a.page_size,
        suggestions: a.suggestions,
        evidence_per_arc: a.evidence,
        legacy_pin: a.legacy_pin,
        cors_origin: a.cors_origin.clone(),
    };
    let ip = a
        .addr
        .parse()
        .with_context(|| format!("bad address {:?}", a.addr))?;
    let addr = SocketAddr::new(ip, a.port);
    log::info!(
        "serving {} contexts (generation {:016x}) on http://{addr}",
        index.num_contexts(),
        index.generation()
    );
    let app = router(AppState::new(index, config));
    let runtime = tokio::runtime::Runtime::new()?;
    runtime.block_on(async move {
        let listener = tokio::net::TcpListener::bind(addr)
            .await
            .with_context(|| format!("binding {addr}"))?;
        axum::serve(listener, app)
            .with_graceful_shutdown(shutdown_signal())
            .await?;
        log::info!("shut down");
        anyhow::Ok(())
    })
}

async fn shutdown_signal() {
    let ctrl_c = async {
        let _ = tokio::signal::ctrl_c().await;
    };
    #[cfg(unix)]
    let terminate = async {
        match tokio::signal::unix::signal(tokio::signal::unix::SignalKind::terminate()) {
            Ok(mut s) => {
                s.recv().await;
            }
            Err(_) => std::future::pending().await,
        }
    };
    #[cfg(not(unix))]
    let terminate = std::future::pending::<()>();
    tokio::select! {
        _ = ctrl_c => {},
        _ = terminate => {},
    }
}

fn eval(a: &EvalArgs, out: &mut dyn Write) -> Result<()> {
    let read = |p: &Path| fs::read_to_string(p).with_context(|| format!("reading {}", p.display()));
    let queries =
        parse_queries(&read(&a.queries)?).with_context(|| format!("in {}", a.queries.display()))?;
    let qrels =
        parse_qrels(&read(&a.qrels)?).with_context(|| format!("in {}", a.qrels.display()))?;
    let report = match &a.index {
        Some(path) => {
            let index = open_index(
                path,
                &LimitArgs {
                    min_prefix: None,
                    max_postings: None,
                },
            )?;
            let run = run_queries(&queries, &index)?;
            let mode = path
                .file_name()
                .map_or("index".into(), |n| n.to_string_lossy().into_owned());
            let metrics = metrics(&run, &qrels)?;
            CompareReport {
                modes: vec![ModeReport {
                    mode,
                    contexts: index.num_contexts(),
                    metrics,
                }],
                f1_t_test: None,
            }
        }
        None => {
            let ontology = load_ontology(a.ontology.as_deref().expect("required by clap"))?;
            let corpus = load_corpus(a.corpus.as_deref().expect("required by clap"), &ontology)?;
            let config = IndexConfig {
                prefix_len: a.prefix_len,
                ..Default::default()
            };
            compare_modes(&queries, &qrels, &corpus, &ontology, &config)?
        }
    };
    if a.json {
        writeln!(out, "{}", serde_json::to_string_pretty(&report)?)?;
    } else {
        write!(out, "{}\n{}", report.to_tsv(), report.to_table())?;
    }
    Ok(())
}

fn query(a: &QueryArgs, out: &mut dyn Write) -> Result<()> {
    let index = open_index(&a.index, &a.limits)?;
    let o = index.ontology();
    let q = parse_query(&a.query, o)?;
    let results = evaluate_with(
        &q,
        &index,
        &RankOptions {
            legacy_pin: a.legacy_pin,
        },
    )?;
    let total = results.total();
    let noun = if total == 1 { "result" } else { "results" };
    writeln!(out, "{total} {noun} for {}", q.to_text(o))?;
    if results.is_empty() {
        return Ok(());
    }
    let rows: Vec<[String; 5]> = results
        .groups
        .iter()
        .take(a.limit)
        .enumerate()
        .map(|(i, g)| {
            let facts = g
                .evidence
                .iter()
                .filter(|e| matches!(e, Evidence::Fact { .. }))
                .count();
            let best = g
                .evidence
                .iter()
                .filter_map(|e| match e {
                    Evidence::Context {
                        context, weight, ..
                    } => Some((*weight, *context)),
                    _ => None,
                })
                .max_by(|a, b| a.0.cmp(&b.0).then(b.1.cmp(&a.1)));
            let excerpt = match best {
                Some((_, c)) => index
                    .excerpt(c)
                    .map(|e| e.active_text())
                    .unwrap_or_default(),
                None => String::new(),
            };
            [
                (i + 1).to_string(),
                o.entity_name(g.entity).to_string(),
                g.score.to_string(),
                facts.to_string(),
                excerpt,
            ]
        })
        .collect();
    let header = ["rank", "entity", "score", "facts", "excerpt"];
    let widths: Vec<usize> = (0..4)
        .map(|i| {
            rows.iter()
                .map(|r| r[i].len())
                .chain([header[i].len()])
                .max()
                .unwrap_or(0)
        })
        .collect();
    let line = |cells: [&str; 5]| {
        let mut s = String::new();
        for (i, c) in cells.iter().enumerate().take(4) {
            s.push_str(&format!("{c:<w$}  ", w = widths[i]));
        }
        s.push_str(cells[4]);
        s.trim_end().to_string()
    };
    writeln!(out, "{}", line(header))?;
    for r in &rows {
        writeln!(out, "{}", line([&r[0], &r[1], &r[2], &r[3], &r[4]]))?;
    }
    Ok(())
}
