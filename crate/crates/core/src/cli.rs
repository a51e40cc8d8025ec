//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 for usage and I/O errors, 2 for data and
//! parse errors.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::{debug, warn, LevelFilter};
use rayon::prelude::*;
use serde::Serialize;

use crate::classifiers::{Classifier, ModelKind, ModelSpec, Prediction, TrainedModel};
use crate::dataset::{csv_header, csv_record, DatasetRow, DatasetTable, Label};
use crate::eval::{evaluate, generate_synthetic_corpus, DEFAULT_FOLDS};
use crate::features::{features_from_bytes, FeatureVector};
use crate::graph::ObjectGraph;
use crate::parser::{parse_document, PdfDocument};
use crate::stats::{boxplot_export, summarize};

pub const LOG_ENV: &str = "PDFGRAPH_LOG";

#[derive(Debug, Parser)]
#[command(name = "pdfgraph", version, about = "Object-graph features and classifiers for PDF malware detection")]
pub struct Cli {
    /// Print every parse warning (same as PDFGRAPH_LOG=debug).
    #[arg(short, long, global = true)]
    verbose: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print the feature CSV row of one PDF.
    Extract {
        path: PathBuf,
        /// Value for the label column; empty by default.
        #[arg(long)]
        label: Option<Label>,
        /// Print the CSV header first.
        #[arg(long)]
        header: bool,
    },
    /// Extract features of every *.pdf under a directory into a CSV dataset.
    BuildDataset {
        dir: PathBuf,
        #[arg(long)]
        label: Label,
        #[arg(short, long)]
        out: PathBuf,
        /// Worker threads; 0 uses all cores.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// Keep the rows already in the output file and add the new ones after them.
        #[arg(long)]
        append: bool,
    },
    /// Quantiles and 95% intervals of every feature for one label.
    Stats {
        csv: PathBuf,
        #[arg(long)]
        label: Label,
        #[arg(long, value_enum, default_value_t = TableFormat::Text)]
        format: TableFormat,
    },
    /// Box-plot summaries as CSV.
    Boxplot {
        csv: PathBuf,
        #[arg(long)]
        label: Label,
    },
    /// Train a model and write it as JSON.
    Train {
        csv: PathBuf,
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Stratified k-fold cross-validation.
    Evaluate {
        csv: PathBuf,
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = DEFAULT_FOLDS as u64, value_parser = clap::value_parser!(u64).range(2..))]
        k: u64,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Also write the JSON report here.
        #[arg(long)]
        json: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = TableFormat::Text)]
        format: TableFormat,
    },
    /// Classify one PDF with a trained model; prints a JSON line.
    Scan {
        path: PathBuf,
        #[arg(short, long)]
        model: PathBuf,
        /// Malicious when the score is strictly above this.
        #[arg(long, default_value_t = 0.5)]
        threshold: f64,
    },
    /// Write the object graph of one PDF in DOT format.
    GraphExport {
        path: PathBuf,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Generate a synthetic labeled feature CSV.
    GenSynthetic {
        #[arg(long, default_value_t = 7396)]
        benign: usize,
        #[arg(long, default_value_t = 10814)]
        malicious: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(short, long)]
        out: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
enum TableFormat {
    Text,
    Csv,
    Json,
}

#[derive(Debug, Args)]
struct ModelArgs {
    /// nb, cart, rf or logistic.
    #[arg(long)]
    model: ModelKind,
    /// Random forest size.
    #[arg(long, default_value_t = ModelSpec::DEFAULT_TREES)]
    trees: usize,
    /// Depth limit for cart and rf.
    #[arg(long)]
    max_depth: Option<usize>,
    /// Logistic L2 penalty.
    #[arg(long, default_value_t = ModelSpec::DEFAULT_L2)]
    l2: f64,
    /// Logistic gradient descent epochs.
    #[arg(long, default_value_t = ModelSpec::DEFAULT_EPOCHS)]
    epochs: usize,
}

impl ModelArgs {
    fn spec(&self) -> ModelSpec {
        match self.model {
            ModelKind::GaussianNb => ModelSpec::GaussianNb,
            ModelKind::Cart => ModelSpec::Cart {
                max_depth: self.max_depth,
            },
            ModelKind::RandomForest => ModelSpec::RandomForest {
                n_trees: self.trees,
                max_depth: self.max_depth,
            },
            ModelKind::Logistic => ModelSpec::Logistic {
                l2: self.l2,
                epochs: self.epochs,
            },
        }
    }
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Io(String),
    Data(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Io(_) => 1,
            CliError::Data(_) => 2,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Io(m) | CliError::Data(m) => m,
        }
    }
}

type CliResult<T = ()> = Result<T, CliError>;

fn io_error(path: &Path, e: io::Error) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

fn read_file(path: &Path) -> CliResult<Vec<u8>> {
    if path.is_dir() {
        return Err(CliError::Io(format!("{}: is a directory", path.display())));
    }
    fs::read(path).map_err(|e| io_error(path, e))
}

fn write_file(path: &Path, contents: &[u8]) -> CliResult {
    fs::write(path, contents).map_err(|e| io_error(path, e))
}

fn stdout_write(text: &str) -> CliResult {
    io::stdout()
        .lock()
        .write_all(text.as_bytes())
        .map_err(|e| CliError::Io(format!("stdout: {e}")))
}

fn read_dataset(path: &Path) -> CliResult<DatasetTable> {
    let file = fs::File::open(path).map_err(|e| io_error(path, e))?;
    DatasetTable::read_csv(file).map_err(|e| match e {
        crate::dataset::DatasetError::Io(e) => io_error(path, e),
        other => CliError::Data(format!("{}: {other}", path.display())),
    })
}

fn file_name(path: &Path) -> String {
    path.file_name()
        .map_or_else(|| path.display().to_string(), |n| n.to_string_lossy().into_owned())
}

fn parse_pdf(path: &Path) -> CliResult<PdfDocument> {
    let bytes = read_file(path)?;
    parse_document(&bytes).map_err(|e| {
        for w in &e.diagnostics().warnings {
            debug!("{w}");
        }
        CliError::Data(format!("{}: {e}", path.display()))
    })
}

fn log_warnings(path: &Path, doc: &PdfDocument) {
    let warnings = &doc.diagnostics().warnings;
    if warnings.is_empty() {
        return;
    }
    debug!("{}: {} parse warnings", path.display(), warnings.len());
    for w in warnings {
        debug!("{w}");
    }
}

fn extract_one(path: &Path) -> CliResult<(FeatureVector, PdfDocument)> {
    let bytes = read_file(path)?;
    let (features, doc) = features_from_bytes(&bytes).map_err(|e| {
        for w in &e.diagnostics().warnings {
            debug!("{w}");
        }
        CliError::Data(format!("{}: {e}", path.display()))
    })?;
    log_warnings(path, &doc);
    Ok((features, doc))
}

fn csv_line(record: &[impl AsRef<[u8]>]) -> CliResult<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(record).map_err(|e| CliError::Io(e.to_string()))?;
    let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("CSV output is UTF-8"))
}

fn cmd_extract(path: &Path, label: Option<Label>, header: bool) -> CliResult {
    let (features, _) = extract_one(path)?;
    let mut out = String::new();
    if header {
        out.push_str(&csv_line(&csv_header())?);
    }
    let label = label.map_or("", Label::as_str);
    out.push_str(&csv_line(&csv_record(&file_name(path), label, &features))?);
    stdout_write(&out)
}

/// `*.pdf` files under `dir` (case-insensitive extension), with their
/// `/`-separated paths relative to `dir`, sorted by that path.
pub fn discover_pdfs(dir: &Path) -> CliResult<Vec<(String, PathBuf)>> {
    if !dir.is_dir() {
        return Err(CliError::Io(format!("{}: not a directory", dir.display())));
    }
    let mut found = Vec::new();
    for entry in walkdir::WalkDir::new(dir).follow_links(false) {
        let entry = entry.map_err(|e| CliError::Io(e.to_string()))?;
        let is_pdf = entry
            .path()
            .extension()
            .is_some_and(|ext| ext.eq_ignore_ascii_case("pdf"));
        if !entry.file_type().is_file() || !is_pdf {
            continue;
        }
        let rel = entry.path().strip_prefix(dir).unwrap_or(entry.path());
        let id = rel
            .components()
            .map(|c| c.as_os_str().to_string_lossy())
            .collect::<Vec<_>>()
            .join("/");
        found.push((id, entry.into_path()));
    }
    found.sort();
    Ok(found)
}

fn cmd_build_dataset(dir: &Path, label: Label, out: &Path, jobs: usize, append: bool) -> CliResult {
    let files = discover_pdfs(dir)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start {jobs} workers: {e}")))?;
    let results: Vec<CliResult<DatasetRow>> = pool.install(|| {
        files
            .par_iter()
            .map(|(id, path)| {
                let (features, _) = extract_one(path)?;
                Ok(DatasetRow {
                    file_id: id.clone(),
                    label,
                    features,
                })
            })
            .collect()
    });

    let mut table = if append && out.exists() {
        read_dataset(out)?
    } else {
        DatasetTable::default()
    };
    let mut failed = 0;
    for result in results {
        match result {
            Ok(row) => table.rows.push(row),
            Err(e) => {
                failed += 1;
                warn!("skipped {}", e.message());
            }
        }
    }
    let ok = files.len() - failed;
    let mut buf = Vec::new();
    table
        .write_csv(&mut buf)
        .map_err(|e| CliError::Io(e.to_string()))?;
    write_file(out, &buf)?;
    stdout_write(&format!("ok={ok} failed={failed}\n"))
}

fn cmd_stats(csv: &Path, label: Label, format: TableFormat) -> CliResult {
    let data = read_dataset(csv)?;
    let table = summarize(&data, label).map_err(|e| CliError::Data(format!("{label}: {e}")))?;
    let text = match format {
        TableFormat::Text => table.to_text(),
        TableFormat::Csv => table.to_csv(),
        TableFormat::Json => {
            let mut s = serde_json::to_string_pretty(&table).expect("summary serializes");
            s.push('\n');
            s
        }
    };
    stdout_write(&text)
}

fn cmd_boxplot(csv: &Path, label: Label) -> CliResult {
    let data = read_dataset(csv)?;
    let text = boxplot_export(&data, label).map_err(|e| CliError::Data(format!("{label}: {e}")))?;
    stdout_write(&text)
}

fn cmd_train(csv: &Path, model: &ModelArgs, seed: u64, out: &Path) -> CliResult {
    let data = read_dataset(csv)?;
    let spec = model.spec();
    let trained = spec.train(&data, seed).map_err(|e| CliError::Data(e.to_string()))?;
    write_file(out, trained.save().as_bytes())?;
    let correct = data
        .rows
        .iter()
        .filter(|r| trained.predict_features(&r.features).label == r.label)
        .count();
    stdout_write(&format!(
        "trained {} on {} rows ({} benign, {} malicious), seed {seed}, training accuracy {:.4}\n",
        crate::classifiers::Learner::describe(&spec),
        data.len(),
        data.count(Label::Benign),
        data.count(Label::Malicious),
        correct as f64 / data.len() as f64,
    ))
}

fn cmd_evaluate(
    csv: &Path,
    model: &ModelArgs,
    k: usize,
    seed: u64,
    json: Option<&Path>,
    format: TableFormat,
) -> CliResult {
    let data = read_dataset(csv)?;
    let report = evaluate(&data, &model.spec(), k, seed).map_err(|e| CliError::Data(e.to_string()))?;
    if let Some(path) = json {
        write_file(path, report.to_json().as_bytes())?;
    }
    match format {
        TableFormat::Json => stdout_write(&report.to_json()),
        TableFormat::Text | TableFormat::Csv => stdout_write(&report.to_text(model.model.display_name())),
    }
}

#[derive(Debug, Serialize)]
pub struct ScanVerdict {
    pub file_id: String,
    pub label: Label,
    pub score: f64,
    pub features: FeatureVector,
    pub parse_warnings: usize,
}

fn cmd_scan(path: &Path, model: &Path, threshold: f64) -> CliResult {
    if !(0.0..=1.0).contains(&threshold) {
        return Err(CliError::Usage(format!("threshold {threshold} is outside [0, 1]")));
    }
    let text = fs::read_to_string(model).map_err(|e| io_error(model, e))?;
    let model = TrainedModel::load(&text).map_err(|e| CliError::Data(format!("{}: {e}", model.display())))?;
    let (features, doc) = extract_one(path)?;
    let score = model.malicious_score(&features.to_array());
    let prediction = Prediction::with_threshold(score, threshold);
    let verdict = ScanVerdict {
        file_id: file_name(path),
        label: prediction.label,
        score,
        features,
        parse_warnings: doc.diagnostics().warnings.len(),
    };
    let mut line = serde_json::to_string(&verdict).expect("verdict serializes");
    line.push('\n');
    stdout_write(&line)
}

fn cmd_graph_export(path: &Path, out: Option<&Path>) -> CliResult {
    let doc = parse_pdf(path)?;
    log_warnings(path, &doc);
    let dot = ObjectGraph::build(&doc).to_dot();
    match out {
        Some(out) => write_file(out, dot.as_bytes()),
        None => stdout_write(&dot),
    }
}

fn cmd_gen_synthetic(benign: usize, malicious: usize, seed: u64, out: &Path) -> CliResult {
    if benign == 0 || malicious == 0 {
        return Err(CliError::Usage("need at least one row per label".into()));
    }
    let table = generate_synthetic_corpus(benign, malicious, seed);
    let mut buf = Vec::new();
    table
        .write_csv(&mut buf)
        .map_err(|e| CliError::Io(e.to_string()))?;
    write_file(out, &buf)
}

fn log_level(verbose: bool) -> LevelFilter {
    if verbose {
        return LevelFilter::Debug;
    }
    match std::env::var(LOG_ENV).as_deref().map(str::trim) {
        Ok("quiet") => LevelFilter::Off,
        Ok("debug") => LevelFilter::Debug,
        _ => LevelFilter::Warn,
    }
}

fn init_logging(verbose: bool) {
    let _ = env_logger::Builder::new()
        .filter_level(log_level(verbose))
        .format(|buf, record| writeln!(buf, "{}", record.args()))
        .target(env_logger::Target::Stderr)
        .try_init();
}

fn dispatch(cli: Cli) -> CliResult {
    match cli.command {
        Command::Extract { path, label, header } => cmd_extract(&path, label, header),
        Command::BuildDataset {
            dir,
            label,
            out,
            jobs,
            append,
        } => cmd_build_dataset(&dir, label, &out, jobs, append),
        Command::Stats { csv, label, format } => cmd_stats(&csv, label, format),
        Command::Boxplot { csv, label } => cmd_boxplot(&csv, label),
        Command::Train { csv, model, seed, out } => cmd_train(&csv, &model, seed, &out),
        Command::Evaluate {
            csv,
            model,
            k,
            seed,
            json,
            format,
        } => cmd_evaluate(&csv, &model, k as usize, seed, json.as_deref(), format),
        Command::Scan { path, model, threshold } => cmd_scan(&path, &model, threshold),
        Command::GraphExport { path, out } => cmd_graph_export(&path, out.as_deref()),
        Command::GenSynthetic {
            benign,
            malicious,
            seed,
            out,
        } => cmd_gen_synthetic(benign, malicious, seed, &out),
    }
}

/// Parses `args` and runs the command.
pub fn run<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    init_logging(cli.verbose);
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}
