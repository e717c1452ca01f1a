//! Command-line front end.
//!
//! Exit codes: 0 success, 1 data error (validation, mismatch, unreadable
//! input), 2 usage error.

mod config;

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::ingest::{build_manifest, ingest, load_spider_tables, AdapterId, CorpusManifest, IngestOptions};
use crate::metrics::{combined_score, score_texts, Metric, ScoreReport};
use crate::scheduler::stream::config_hash;
use crate::scheduler::{BatchStream, Checkpoint, CorpusIndex, MiniBatch, SchedulerConfig, DEFAULT_STEP};
use crate::schema::{linearize_input, validate_record, KnowledgeForm, Severity, Split, TaskToken, TemplateConfig, UnifiedRecord};
use crate::ssl::{SslGenerator, SslKind};
use crate::stats::{check_total, corpus_stats, TotalCheck};

pub use config::{load_config_file, ConfigError};

#[derive(Debug, Parser, Serialize)]
#[command(name = "unidial", version, about = "Dialogue corpus compiler", args_override_self = true)]
pub struct Cli {
    /// key = value file merged under the command-line flags.
    #[arg(long, global = true, value_name = "FILE")]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// Print the resolved configuration to stderr before running.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub print_config: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Command {
    /// Check unified JSONL files against the record schema.
    Validate(ValidateArgs),
    /// Convert raw dataset files into unified JSONL.
    Ingest(IngestArgs),
    /// Count records per (task, dataset, split) into a manifest.
    Manifest(ManifestArgs),
    /// Generate turn-reordering and/or entity-cloze records.
    SslGen(SslGenArgs),
    /// Per-task counts and proportions of a manifest.
    Stats(StatsArgs),
    /// Emit task-iterative mini-batches as framed JSONL.
    Stream(StreamArgs),
    /// Score predictions against references.
    Eval(EvalArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct ValidateArgs {
    /// Treat warnings as errors.
    #[arg(long)]
    pub deny_warnings: bool,
    #[arg(value_name = "FILE")]
    pub inputs: Vec<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct IngestArgs {
    #[arg(long)]
    pub adapter: AdapterId,
    #[arg(long, default_value = "unnamed")]
    pub dataset: String,
    #[arg(long, default_value = "train")]
    pub split: Split,
    /// Required by every adapter except passthrough_unified.
    #[arg(long)]
    pub task_definition: Option<String>,
    /// Knowledge attached to every record, as unified knowledge JSON.
    #[arg(long, value_name = "FILE")]
    pub knowledge: Option<PathBuf>,
    /// Spider-style tables.json for the text-to-SQL adapter.
    #[arg(long, value_name = "FILE")]
    pub tables: Option<PathBuf>,
    /// Abort on the first rejected line.
    #[arg(long)]
    pub strict: bool,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    /// Write the ingest report as JSON here instead of stderr.
    #[arg(long, value_name = "FILE")]
    pub report: Option<PathBuf>,
    #[arg(value_name = "FILE")]
    pub inputs: Vec<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct ManifestArgs {
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    #[arg(value_name = "FILE")]
    pub inputs: Vec<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum KindArg {
    Reo,
    Clo,
    Both,
}

#[derive(Debug, Args, Serialize)]
pub struct SslGenArgs {
    #[arg(long, value_enum, default_value = "both")]
    pub kind: KindArg,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    /// Sidecar JSONL with one provenance line per output record.
    #[arg(long, value_name = "FILE")]
    pub provenance: Option<PathBuf>,
    #[arg(value_name = "FILE")]
    pub inputs: Vec<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum StatsFormat {
    Table,
    Json,
}

#[derive(Debug, Args, Serialize)]
pub struct StatsArgs {
    #[arg(long, value_enum, default_value = "table")]
    pub format: StatsFormat,
    /// Fail unless the counted records sum to this number.
    #[arg(long)]
    pub expect_total: Option<u64>,
    /// Leave the self-supervised tasks out.
    #[arg(long)]
    pub no_ssl: bool,
    /// Count only this split.
    #[arg(long)]
    pub split: Option<Split>,
    #[arg(value_name = "MANIFEST")]
    pub manifest: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BatchFormat {
    /// Full unified records.
    Records,
    /// Linearized `{input, target}` pairs.
    Pairs,
}

#[derive(Debug, Args, Serialize)]
pub struct StreamArgs {
    #[arg(long, default_value_t = DEFAULT_STEP)]
    pub step: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1)]
    pub epochs: usize,
    /// Comma-separated task names; defaults to canonical task order.
    #[arg(long, value_delimiter = ',')]
    pub task_order: Option<Vec<TaskToken>>,
    #[arg(long, default_value = "train")]
    pub split: Split,
    /// Continue from a checkpoint file.
    #[arg(long, value_name = "FILE")]
    pub resume: Option<PathBuf>,
    /// Write the position after the last emitted block here.
    #[arg(long, value_name = "FILE")]
    pub checkpoint_out: Option<PathBuf>,
    #[arg(long)]
    pub max_blocks: Option<usize>,
    #[arg(long, value_enum, default_value = "records")]
    pub format: BatchFormat,
    /// Print the SHA-256 of the emitted stream to stderr.
    #[arg(long)]
    pub digest: bool,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    #[arg(value_name = "MANIFEST")]
    pub manifest: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct EvalArgs {
    #[arg(long)]
    pub metric: Metric,
    /// JSONL: strings, or objects with a `prediction`, `text` or `target` field.
    #[arg(long, value_name = "FILE")]
    pub predictions: Option<PathBuf>,
    #[arg(long, value_name = "FILE")]
    pub references: Option<PathBuf>,
    #[arg(long)]
    pub inform: Option<f64>,
    #[arg(long)]
    pub success: Option<f64>,
    /// BLEU for `combined`; computed from the files when omitted.
    #[arg(long)]
    pub bleu: Option<f64>,
}

/// Marks an error as a usage problem (exit code 2).
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct UsageError(pub String);

/// Help or version text that clap wants on stdout.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
struct InfoText(String);

type CmdResult = anyhow::Result<()>;

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

fn exit_code(e: &anyhow::Error) -> i32 {
    if let Some(InfoText(text)) = e.downcast_ref() {
        print!("{text}");
        return 0;
    }
    if e.is::<UsageError>() {
        eprintln!("error: {e}");
        return 2;
    }
    eprintln!("error: {}", render_chain(e));
    1
}

// Like `{:#}`, but skips causes whose text the outer message already shows.
fn render_chain(e: &anyhow::Error) -> String {
    let mut out = String::new();
    for cause in e.chain() {
        let msg = cause.to_string();
        if !out.contains(&msg) {
            if !out.is_empty() {
                out.push_str(": ");
            }
            out.push_str(&msg);
        }
    }
    out
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let argv: Vec<std::ffi::OsString> = args.into_iter().map(Into::into).collect();
    let cli = match parse(&argv) {
        Ok(c) => c,
        Err(e) => return exit_code(&e),
    };
    if cli.print_config {
        match serde_json::to_string_pretty(&cli.command) {
            Ok(s) => eprintln!("{s}"),
            Err(e) => eprintln!("error: cannot render config: {e}"),
        }
    }
    let result = match cli.command {
        Command::Validate(a) => cmd_validate(a),
        Command::Ingest(a) => cmd_ingest(a),
        Command::Manifest(a) => cmd_manifest(a),
        Command::SslGen(a) => cmd_ssl_gen(a),
        Command::Stats(a) => cmd_stats(a),
        Command::Stream(a) => cmd_stream(a),
        Command::Eval(a) => cmd_eval(a),
    };
    match result {
        Ok(()) => 0,
        Err(e) => exit_code(&e),
    }
}

fn clap_exit(e: clap::Error) -> anyhow::Error {
    if !e.use_stderr() {
        return InfoText(e.render().to_string()).into();
    }
    usage(e.render().to_string().trim_end().trim_start_matches("error: "))
}

fn parse(argv: &[std::ffi::OsString]) -> anyhow::Result<Cli> {
    let cli = Cli::try_parse_from(argv).map_err(clap_exit)?;
    let Some(path) = cli.config.clone() else {
        return Ok(cli);
    };
    let entries = load_config_file(&path).map_err(|e| usage(e.to_string()))?;
    let merged = config::merge_argv(argv, &entries).map_err(|e| usage(e.to_string()))?;
    let mut cli = Cli::try_parse_from(&merged).map_err(clap_exit)?;
    config::fill_inputs(&mut cli.command, &entries);
    Ok(cli)
}

fn open_output(path: &Option<PathBuf>) -> anyhow::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::with_capacity(
            1 << 20,
            File::create(p).with_context(|| format!("cannot create {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn open_input(path: &Path) -> anyhow::Result<BufReader<File>> {
    let f = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    Ok(BufReader::with_capacity(1 << 20, f))
}

fn require_inputs(inputs: &[PathBuf]) -> anyhow::Result<()> {
    if inputs.is_empty() {
        return Err(usage("at least one input file is required"));
    }
    Ok(())
}

fn cmd_validate(a: ValidateArgs) -> CmdResult {
    require_inputs(&a.inputs)?;
    let (mut records, mut errors, mut warnings, mut unparsable) = (0usize, 0usize, 0usize, 0usize);
    for path in &a.inputs {
        let reader = open_input(path)?;
        for (i, line) in reader.lines().enumerate() {
            let line = line.with_context(|| format!("reading {}", path.display()))?;
            if line.trim().is_empty() {
                continue;
            }
            records += 1;
            let r = match UnifiedRecord::from_json_line(&line) {
                Ok(r) => r,
                Err(e) => {
                    unparsable += 1;
                    eprintln!("{}:{}: error: {e}", path.display(), i + 1);
                    continue;
                }
            };
            for v in &validate_record(&r).violations {
                let sev = match v.severity() {
                    Severity::Error => {
                        errors += 1;
                        "error"
                    }
                    Severity::Warning => {
                        warnings += 1;
                        "warning"
                    }
                };
                eprintln!("{}:{}: {sev}: {v}", path.display(), i + 1);
            }
        }
    }
    let summary = serde_json::json!({
        "files": a.inputs.len(),
        "records": records,
        "unparsable": unparsable,
        "errors": errors,
        "warnings": warnings,
    });
    println!("{summary}");
    if unparsable + errors > 0 || (a.deny_warnings && warnings > 0) {
        bail!("validation failed");
    }
    Ok(())
}

fn cmd_ingest(a: IngestArgs) -> CmdResult {
    require_inputs(&a.inputs)?;
    let task_definition = match (&a.task_definition, a.adapter) {
        (Some(d), _) => d.clone(),
        (None, AdapterId::PassthroughUnified) => String::new(),
        (None, _) => return Err(usage(format!("--task-definition is required for adapter {}", a.adapter))),
    };
    let knowledge = match &a.knowledge {
        Some(p) => {
            let text = std::fs::read_to_string(p).with_context(|| format!("cannot read {}", p.display()))?;
            serde_json::from_str::<KnowledgeForm>(&text).with_context(|| format!("invalid knowledge in {}", p.display()))?
        }
        None => KnowledgeForm::None,
    };
    let schemas = match &a.tables {
        Some(p) => {
            let text = std::fs::read_to_string(p).with_context(|| format!("cannot read {}", p.display()))?;
            load_spider_tables(&text).map_err(|e| anyhow!("{}: {e}", p.display()))?
        }
        None => Default::default(),
    };
    let opts = IngestOptions {
        dataset: a.dataset.clone(),
        split: a.split,
        task_definition,
        strict: a.strict,
        knowledge,
        schemas,
    };
    let mut out = open_output(&a.output)?;
    let mut reports = BTreeMap::new();
    let mut line = String::new();
    for path in &a.inputs {
        let reader = open_input(path)?;
        let report = ingest(a.adapter, reader, &opts, |r| {
            line.clear();
            line.push_str(&r.to_json_line());
            line.push('\n');
            out.write_all(line.as_bytes())
        })
        .with_context(|| format!("ingesting {}", path.display()))?;
        reports.insert(path.display().to_string(), report);
    }
    out.flush().context("writing output")?;
    let rendered = serde_json::to_string_pretty(&reports).context("rendering report")?;
    match &a.report {
        Some(p) => std::fs::write(p, rendered + "\n").with_context(|| format!("cannot write {}", p.display()))?,
        None => eprintln!("{rendered}"),
    }
    Ok(())
}

fn cmd_manifest(a: ManifestArgs) -> CmdResult {
    require_inputs(&a.inputs)?;
    let m = build_manifest(&a.inputs)?;
    let mut out = open_output(&a.output)?;
    writeln!(out, "{}", m.to_json_pretty()).context("writing manifest")?;
    out.flush().context("writing manifest")?;
    Ok(())
}

#[derive(Default, Serialize)]
struct KindReport {
    sources: u64,
    generated: u64,
    skipped: BTreeMap<&'static str, u64>,
}

const SSL_CHUNK: usize = 1 << 16;

fn cmd_ssl_gen(a: SslGenArgs) -> CmdResult {
    require_inputs(&a.inputs)?;
    let kinds: &[SslKind] = match a.kind {
        KindArg::Reo => &[SslKind::Reo],
        KindArg::Clo => &[SslKind::Clo],
        KindArg::Both => &[SslKind::Reo, SslKind::Clo],
    };
    let gen = SslGenerator::new(a.seed);
    let mut out = open_output(&a.output)?;
    let mut prov_out = match &a.provenance {
        Some(p) => Some(BufWriter::new(File::create(p).with_context(|| format!("cannot create {}", p.display()))?)),
        None => None,
    };
    let mut reports: BTreeMap<&'static str, KindReport> = kinds.iter().map(|k| (k.name(), KindReport::default())).collect();
    // Ordinals count records per dataset, so seeds do not depend on which
    // other datasets share the input.
    let mut ordinals: BTreeMap<String, u64> = BTreeMap::new();
    let mut chunk: Vec<(u64, UnifiedRecord)> = Vec::with_capacity(SSL_CHUNK);

    let mut flush = |chunk: &mut Vec<(u64, UnifiedRecord)>| -> anyhow::Result<()> {
        let results: Vec<_> = kinds.iter().map(|&k| gen.generate_all(k, chunk)).collect();
        for i in 0..chunk.len() {
            for (k, res) in kinds.iter().zip(&results) {
                let rep = reports.get_mut(k.name()).expect("kind registered");
                rep.sources += 1;
                match &res[i].1 {
                    Ok((rec, prov)) => {
                        rep.generated += 1;
                        writeln!(out, "{}", rec.to_json_line())?;
                        if let Some(p) = prov_out.as_mut() {
                            let line = serde_json::json!({
                                "ordinal": res[i].0,
                                "dataset": rec.dataset,
                                "kind": k.name(),
                                "provenance": prov,
                            });
                            writeln!(p, "{line}")?;
                        }
                    }
                    Err(reason) => *rep.skipped.entry(reason.label()).or_insert(0) += 1,
                }
            }
        }
        chunk.clear();
        Ok(())
    };

    for path in &a.inputs {
        let reader = open_input(path)?;
        for (i, line) in reader.lines().enumerate() {
            let line = line.with_context(|| format!("reading {}", path.display()))?;
            if line.trim().is_empty() {
                continue;
            }
            let r = UnifiedRecord::from_json_line(&line).with_context(|| format!("{}:{}", path.display(), i + 1))?;
            let ord = ordinals.entry(r.dataset.clone()).or_insert(0);
            chunk.push((*ord, r));
            *ord += 1;
            if chunk.len() == SSL_CHUNK {
                flush(&mut chunk)?;
            }
        }
    }
    flush(&mut chunk)?;
    out.flush().context("writing output")?;
    if let Some(p) = prov_out.as_mut() {
        p.flush().context("writing provenance")?;
    }
    eprintln!("{}", serde_json::to_string_pretty(&reports).context("rendering report")?);
    Ok(())
}

fn load_manifest(path: &Option<PathBuf>) -> anyhow::Result<CorpusManifest> {
    let p = path.as_ref().ok_or_else(|| usage("a manifest file is required"))?;
    Ok(CorpusManifest::load(p)?)
}

fn cmd_stats(a: StatsArgs) -> CmdResult {
    let mut m = load_manifest(&a.manifest)?;
    if let Some(s) = a.split {
        m = m.filter_split(s);
    }
    if a.no_ssl {
        m.entries.retain(|e| e.task.is_supervised());
    }
    let check = a.expect_total.map(|t| check_total(&m, t));
    if a.expect_total != Some(0) || !m.entries.is_empty() {
        let stats = corpus_stats(&m, !a.no_ssl)?;
        match a.format {
            StatsFormat::Table => print!("{}", stats.render_table()),
            StatsFormat::Json => {
                let mut v = serde_json::to_value(&stats).context("rendering stats")?;
                if let Some(c) = check {
                    v["total_check"] = serde_json::to_value(c).context("rendering stats")?;
                }
                println!("{}", serde_json::to_string_pretty(&v).context("rendering stats")?);
            }
        }
    }
    match check {
        Some(TotalCheck::Mismatch { actual, expected }) => Err(anyhow!("total is {actual}, expected {expected}")),
        _ => Ok(()),
    }
}

#[derive(Serialize)]
struct PairBatch<'a> {
    epoch: usize,
    block: usize,
    task: TaskToken,
    records: Vec<Pair<'a>>,
}

#[derive(Serialize)]
struct Pair<'a> {
    input: String,
    target: &'a str,
}

struct DigestWriter<W: Write> {
    inner: W,
    hasher: Option<Sha256>,
}

impl<W: Write> Write for DigestWriter<W> {
    fn write(&mut self, buf: &[u8]) -> io::Result<usize> {
        let n = self.inner.write(buf)?;
        if let Some(h) = self.hasher.as_mut() {
            h.update(&buf[..n]);
        }
        Ok(n)
    }

    fn flush(&mut self) -> io::Result<()> {
        self.inner.flush()
    }
}

fn write_batch(out: &mut impl Write, b: &MiniBatch, format: BatchFormat, template: &TemplateConfig) -> anyhow::Result<()> {
    match format {
        BatchFormat::Records => serde_json::to_writer(&mut *out, b)?,
        BatchFormat::Pairs => {
            let records = b
                .records
                .iter()
                .map(|r| {
                    Ok(Pair {
                        input: linearize_input(r, template)?,
                        target: &r.target,
                    })
                })
                .collect::<anyhow::Result<_>>()?;
            serde_json::to_writer(
                &mut *out,
                &PairBatch {
                    epoch: b.epoch,
                    block: b.block,
                    task: b.task,
                    records,
                },
            )?
        }
    }
    out.write_all(b"\n")?;
    Ok(())
}

fn cmd_stream(a: StreamArgs) -> CmdResult {
    if a.step == 0 {
        return Err(usage("--step must be at least 1"));
    }
    if a.epochs == 0 {
        return Err(usage("--epochs must be at least 1"));
    }
    let m = load_manifest(&a.manifest)?;
    let index = CorpusIndex::open(&m, a.split)?;
    if index.tasks().is_empty() {
        bail!("manifest has no {} records", a.split);
    }
    let cfg = SchedulerConfig {
        step: a.step,
        seed: a.seed,
        epochs: a.epochs,
        task_order: a.task_order.clone().unwrap_or_else(|| index.default_order()),
    };
    let mut stream = match &a.resume {
        Some(p) => {
            let text = std::fs::read_to_string(p).with_context(|| format!("cannot read {}", p.display()))?;
            let ck: Checkpoint = serde_json::from_str(&text).with_context(|| format!("invalid checkpoint {}", p.display()))?;
            BatchStream::resume(&index, cfg.clone(), &ck)?
        }
        None => BatchStream::new(&index, cfg.clone())?,
    };
    debug_assert_eq!(stream.config_hash(), config_hash(&cfg, index.tasks()));
    let mut out = DigestWriter {
        inner: open_output(&a.output)?,
        hasher: a.digest.then(Sha256::new),
    };
    let template = TemplateConfig::default();
    let mut emitted = 0usize;
    while a.max_blocks.is_none_or(|m| emitted < m) {
        let Some(batch) = stream.next() else { break };
        write_batch(&mut out, &batch?, a.format, &template)?;
        emitted += 1;
    }
    out.flush().context("writing output")?;
    if let Some(p) = &a.checkpoint_out {
        let ck = serde_json::to_string_pretty(&stream.checkpoint()).context("rendering checkpoint")?;
        std::fs::write(p, ck + "\n").with_context(|| format!("cannot write {}", p.display()))?;
    }
    if let Some(h) = out.hasher.take() {
        eprintln!("sha256 {}", hex::encode(h.finalize()));
    }
    eprintln!("emitted {emitted} blocks");
    Ok(())
}

fn read_texts(path: &Path) -> anyhow::Result<Vec<String>> {
    let reader = open_input(path)?;
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.with_context(|| format!("reading {}", path.display()))?;
        if line.trim().is_empty() {
            continue;
        }
        let v: serde_json::Value = serde_json::from_str(&line).with_context(|| format!("{}:{}", path.display(), i + 1))?;
        let text = match &v {
            serde_json::Value::String(s) => s.clone(),
            serde_json::Value::Object(o) => ["prediction", "text", "target"]
                .iter()
                .find_map(|k| o.get(*k).and_then(|x| x.as_str()))
                .ok_or_else(|| anyhow!("{}:{}: no prediction, text or target field", path.display(), i + 1))?
                .to_string(),
            _ => bail!("{}:{}: expected a string or an object", path.display(), i + 1),
        };
        out.push(text);
    }
    Ok(out)
}

fn cmd_eval(a: EvalArgs) -> CmdResult {
    let files = match (&a.predictions, &a.references) {
        (Some(p), Some(r)) => Some((read_texts(p)?, read_texts(r)?)),
        (None, None) => None,
        _ => return Err(usage("--predictions and --references go together")),
    };
    let report = if a.metric == Metric::Combined {
        let (Some(inform), Some(success)) = (a.inform, a.success) else {
            return Err(usage("combined needs --inform and --success"));
        };
        let (bleu, support) = match (a.bleu, &files) {
            (Some(b), _) => (b, files.as_ref().map_or(1, |f| f.0.len())),
            (None, Some((p, r))) => (score_texts(Metric::Bleu4, p, r)?.value, p.len()),
            (None, None) => return Err(usage("combined needs --bleu or --predictions/--references")),
        };
        let value = combined_score(inform, success, bleu)?;
        ScoreReport::new(Metric::Combined, value, support)
    } else {
        let Some((p, r)) = files else {
            return Err(usage(format!("{} needs --predictions and --references", a.metric)));
        };
        score_texts(a.metric, &p, &r)?
    };
    println!("{}", serde_json::to_string_pretty(&report).context("rendering report")?);
    Ok(())
}
