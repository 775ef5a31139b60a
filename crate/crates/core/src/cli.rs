//! `jointseg` command-line frontend.
//!
//! Exit status: 0 on success, 2 for usage, validation and data errors,
//! 3 for numerical failures during training.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::corpus::{
    parse_segmented_line, read_segmented_corpus, write_segmented, Segmentation, Sentence,
};
use crate::crf::{self, load_model, save_model, TrainConfig};
use crate::error::Error;
use crate::eval;
use crate::fsutil;
use crate::lexicon::{load_lexicon, Lexicon};
use crate::mmseg::{mmseg_segment, FreedomTable};
use crate::pipeline;
use crate::template::{parse_templates, preset, TemplateSet, TokenGrid};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "jointseg",
    version,
    about = "Chinese word segmentation with MMSEG features and a linear-chain CRF"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a CRF++-format training file (char, MMSEG tag, gold tag).
    MakeTraining(MakeTrainingArgs),
    /// Train a CRF model.
    Train(TrainArgs),
    /// Segment raw text with a trained model.
    Segment(SegmentArgs),
    /// Segment raw text with MMSEG alone.
    Mmseg(MmsegArgs),
    /// Score a predicted segmentation against gold.
    Eval(EvalArgs),
}

#[derive(Debug, Args)]
pub struct LexiconArgs {
    /// Lexicon file; repeat to merge several.
    #[arg(long = "lexicon", value_name = "PATH")]
    pub lexicons: Vec<PathBuf>,
    /// Optional single-character freedom table (char<TAB>score).
    #[arg(long, value_name = "PATH")]
    pub freedom: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct MakeTrainingArgs {
    /// Segmented corpus, one sentence per line.
    #[arg(long)]
    pub corpus: PathBuf,
    #[command(flatten)]
    pub lex: LexiconArgs,
    #[arg(long)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// CRF++-format training file (as written by make-training).
    #[arg(long, conflicts_with = "corpus")]
    pub input: Option<PathBuf>,
    /// Segmented corpus; training grids are built with the given lexicons.
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    #[command(flatten)]
    pub lex: LexiconArgs,
    /// Built-in template set: exp1 ... exp5.
    #[arg(long, conflicts_with = "template")]
    pub preset: Option<String>,
    /// CRF++-style template file.
    #[arg(long)]
    pub template: Option<PathBuf>,
    /// Model output path.
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long = "l2-sigma", default_value_t = 1.0)]
    pub l2_sigma: f64,
    #[arg(long = "max-iter", default_value_t = 300)]
    pub max_iter: usize,
    /// Gradient-norm stopping tolerance, relative to max(1, |w|).
    #[arg(long, default_value_t = 1e-5)]
    pub tolerance: f64,
    #[arg(long, default_value_t = 1)]
    pub cutoff: u32,
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SegmentArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[command(flatten)]
    pub lex: LexiconArgs,
    /// Raw text, one sequence per line.
    #[arg(long)]
    pub input: PathBuf,
    /// Output path; standard output when omitted.
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug, Args)]
pub struct MmsegArgs {
    #[command(flatten)]
    pub lex: LexiconArgs,
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Gold segmented file.
    pub gold: PathBuf,
    /// Predicted segmented file.
    pub pred: PathBuf,
    /// Also write the report as JSON to this path.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

/// A failed command: message plus exit status.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Numerical(_) => EXIT_NUMERICAL,
            _ => EXIT_USAGE,
        };
        CliError {
            code,
            message: e.to_string(),
        }
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError {
        code: EXIT_USAGE,
        message: msg.into(),
    }
}

type CliResult<T = ()> = Result<T, CliError>;

fn require_file(kind: &str, p: &Path) -> CliResult {
    if p.is_file() {
        Ok(())
    } else {
        Err(usage(format!("{kind} not found: {}", p.display())))
    }
}

fn lexicon(args: &LexiconArgs, required: bool) -> CliResult<Lexicon> {
    for p in &args.lexicons {
        require_file("lexicon", p)?;
    }
    if args.lexicons.is_empty() {
        if required {
            return Err(usage("at least one --lexicon is required"));
        }
        return Ok(Lexicon::empty());
    }
    Ok(load_lexicon(&args.lexicons)?)
}

fn freedom(args: &LexiconArgs) -> CliResult<Option<FreedomTable>> {
    match &args.freedom {
        Some(p) => {
            require_file("freedom table", p)?;
            Ok(Some(FreedomTable::load(p)?))
        }
        None => Ok(None),
    }
}

fn corpus(path: &Path) -> CliResult<Vec<Segmentation>> {
    require_file("corpus", path)?;
    let c = read_segmented_corpus(path)?;
    if c.is_empty() {
        return Err(usage(format!("corpus is empty: {}", path.display())));
    }
    Ok(c)
}

fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> CliResult<T> {
    match threads {
        None => Ok(f()),
        Some(0) => Err(usage("--threads must be positive")),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| usage(format!("cannot start thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

fn write_output(path: Option<&Path>, segs: &[Segmentation]) -> CliResult {
    match path {
        Some(p) => fsutil::write_atomic(p, |w| write_segmented(segs, w))?,
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            write_segmented(segs, &mut lock)
                .and_then(|_| lock.flush())
                .map_err(|e| usage(format!("cannot write output: {e}")))?;
        }
    }
    Ok(())
}

fn read_input(path: &Path) -> CliResult<Vec<String>> {
    require_file("input", path)?;
    Ok(fsutil::read_lines(path)?)
}

pub fn cmd_make_training(args: &MakeTrainingArgs) -> CliResult {
    let lex = lexicon(&args.lex, true)?;
    let freedom = freedom(&args.lex)?;
    let corpus = corpus(&args.corpus)?;
    let grids = pipeline::make_training_grids(&corpus, &lex, freedom.as_ref())?;
    pipeline::write_training_file(&grids, &args.output)?;
    let chars: usize = grids.iter().map(TokenGrid::len).sum();
    println!("sentences: {} characters: {}", grids.len(), chars);
    Ok(())
}

fn templates(args: &TrainArgs) -> CliResult<TemplateSet> {
    match (&args.preset, &args.template) {
        (Some(name), None) => Ok(preset(name)?),
        (None, Some(path)) => {
            require_file("template file", path)?;
            let text = fsutil::read_lines(path)?.join("\n");
            let mut set = parse_templates(&text)?;
            set.name = path
                .file_name()
                .map(|n| n.to_string_lossy().into_owned())
                .unwrap_or_else(|| "custom".into());
            Ok(set)
        }
        (None, None) => Ok(preset(crate::template::DEFAULT_PRESET)?),
        (Some(_), Some(_)) => Err(usage("give either --preset or --template, not both")),
    }
}

pub fn cmd_train(args: &TrainArgs) -> CliResult {
    let templates = templates(args)?;
    let config = TrainConfig {
        l2_sigma: args.l2_sigma,
        max_iterations: args.max_iter,
        gradient_tolerance: args.tolerance,
        feature_cutoff: args.cutoff,
    };
    config.validate()?;
    let grids = match (&args.input, &args.corpus) {
        (Some(input), None) => {
            require_file("training file", input)?;
            pipeline::read_training_file(input)?
        }
        (None, Some(c)) => {
            let lex = lexicon(&args.lex, true)?;
            let freedom = freedom(&args.lex)?;
            pipeline::make_training_grids(&corpus(c)?, &lex, freedom.as_ref())?
        }
        _ => return Err(usage("give exactly one of --input or --corpus")),
    };
    if grids.is_empty() {
        return Err(usage("training data is empty"));
    }
    let model = with_threads(args.threads, || {
        crf::train_with_progress(&grids, &templates, &config, |r| {
            eprintln!(
                "iter {:4}  objective {:.6}  |grad| {:.6e}",
                r.iteration, r.objective, r.gradient_norm
            );
        })
    })??;
    save_model(&model, &args.model)?;
    println!(
        "features: {} weights: {} iterations: {} objective: {:.6}",
        model.index().num_unigram_features(),
        model.index().num_slots(),
        model.meta().iterations,
        model.meta().objective
    );
    Ok(())
}

pub fn cmd_segment(args: &SegmentArgs) -> CliResult {
    require_file("model", &args.model)?;
    let model = load_model(&args.model)?;
    let lex = lexicon(&args.lex, true)?;
    let freedom = freedom(&args.lex)?;
    let lines = read_input(&args.input)?;
    let segs = with_threads(args.threads, || {
        pipeline::segment_text(&model, &lex, &lines, freedom.as_ref())
    })??;
    write_output(args.output.as_deref(), &segs)
}

pub fn cmd_mmseg(args: &MmsegArgs) -> CliResult {
    let lex = lexicon(&args.lex, false)?;
    let freedom = freedom(&args.lex)?;
    let lines = read_input(&args.input)?;
    let mut segs = Vec::with_capacity(lines.len());
    for line in &lines {
        let mut words = Vec::new();
        for fragment in line.split_whitespace() {
            let s = Sentence::new(fragment)?;
            words.extend(mmseg_segment(&lex, &s, freedom.as_ref())?.words);
        }
        segs.push(Segmentation { words });
    }
    write_output(args.output.as_deref(), &segs)
}

fn read_for_eval(path: &Path) -> CliResult<Vec<Segmentation>> {
    require_file("segmented file", path)?;
    let mut lines = fsutil::read_lines(path)?;
    while lines.last().is_some_and(|l| l.trim().is_empty()) {
        lines.pop();
    }
    Ok(lines
        .iter()
        .map(|l| parse_segmented_line(l).unwrap_or_default())
        .collect())
}

pub fn cmd_eval(args: &EvalArgs) -> CliResult {
    let gold = read_for_eval(&args.gold)?;
    let pred = read_for_eval(&args.pred)?;
    let report = eval::score(&gold, &pred)?;
    println!("{report}");
    if let Some(out) = &args.output {
        let json = serde_json::to_string_pretty(&report).expect("report serializes");
        fsutil::write_atomic(out, |w| writeln!(w, "{json}"))?;
    }
    Ok(())
}

pub fn run(cli: &Cli) -> CliResult {
    match &cli.command {
        Command::MakeTraining(a) => cmd_make_training(a),
        Command::Train(a) => cmd_train(a),
        Command::Segment(a) => cmd_segment(a),
        Command::Mmseg(a) => cmd_mmseg(a),
        Command::Eval(a) => cmd_eval(a),
    }
}

/// Parses `args` and runs the command, returning the exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match run(&cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.code
        }
    }
}
