//! Batch evaluation over JSONL or file-per-record corpora.
//!
//! Per-record rows go to stdout (or `--records`), the full report to `--out`,
//! diagnostics to stderr. Exit status is 0 on success, 1 when `--strict` and
//! some record failed, 2 for usage, input or configuration errors.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use thiserror::Error;

pub mod commands;
pub mod config;
pub mod corpus;
pub mod report;

pub use config::RunConfig;
pub use corpus::{load_corpus, CorpusItem, CorpusKind};
pub use report::{Command, EvalReport};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("input not found: {0}")]
    InputNotFound(PathBuf),
    #[error("permission denied: {0}")]
    PermissionDenied(PathBuf),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("{0}")]
    Usage(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("unreadable report: {0}")]
    Report(String),
}

#[derive(Debug, Parser)]
#[command(name = "specbench", version, about = "Score generated spectra, structures and sequences against references")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Sub,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// TOML run configuration; built-in defaults otherwise.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Override one configuration value, e.g. `nmr.tau_c=0.4`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    /// Write per-record JSONL here instead of stdout.
    #[arg(long, value_name = "FILE")]
    pub records: Option<PathBuf>,
    /// Write the full report (config, aggregate, warnings, rows) as JSON.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
    /// Exit with status 1 if any record failed.
    #[arg(long)]
    pub strict: bool,
    /// Worker threads; 0 uses all cores. Output order never depends on this.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
}

#[derive(Debug, Clone, Args)]
pub struct PairInput {
    /// Predictions.
    #[arg(long, value_name = "PATH")]
    pub pred: PathBuf,
    /// References, matched to predictions by id.
    #[arg(long, value_name = "PATH")]
    pub truth: PathBuf,
    #[arg(long, value_enum, value_name = "KIND")]
    pub pred_kind: Option<CorpusKind>,
    #[arg(long, value_enum, value_name = "KIND")]
    pub truth_kind: Option<CorpusKind>,
}

#[derive(Debug, Clone, Args)]
pub struct SingleInput {
    /// JSONL file or directory of records.
    #[arg(long = "in", value_name = "PATH")]
    pub input: PathBuf,
    /// Corpus layout; guessed from the path when omitted.
    #[arg(long, value_enum, value_name = "KIND")]
    pub input_kind: Option<CorpusKind>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StructureFormatArg {
    Auto,
    Sdf,
    Text,
}

#[derive(Debug, Subcommand)]
pub enum Sub {
    /// Structured spectrum JSON (field "spectrum") to tagged text.
    Serialize {
        #[command(flatten)]
        input: SingleInput,
        #[command(flatten)]
        common: Common,
    },
    /// Tagged spectrum text (field "spectrum") to structured JSON.
    Parse {
        #[command(flatten)]
        input: SingleInput,
        #[command(flatten)]
        common: Common,
    },
    /// 13C NMR peak matching (field "spectrum").
    #[command(name = "score-nmr13c")]
    ScoreNmr13c {
        #[command(flatten)]
        input: PairInput,
        #[command(flatten)]
        common: Common,
    },
    /// 1H NMR peak matching with overlap-weighted Jaccard (field "spectrum").
    #[command(name = "score-nmr1h")]
    ScoreNmr1h {
        #[command(flatten)]
        input: PairInput,
        #[command(flatten)]
        common: Common,
    },
    /// Binned cosine similarity for IR, Raman and UV spectra (field "spectrum").
    ScoreIr {
        #[command(flatten)]
        input: PairInput,
        #[command(flatten)]
        common: Common,
    },
    /// Binned cosine similarity for mass spectra (field "spectrum").
    ScoreMs {
        #[command(flatten)]
        input: PairInput,
        #[command(flatten)]
        common: Common,
    },
    /// Token and exact-match accuracy for generated sequences (field "text").
    ScoreSeq {
        #[command(flatten)]
        input: PairInput,
        #[command(flatten)]
        common: Common,
    },
    /// Steric clashes and bond-length violations of 3D structures (field "structure").
    ///
    /// Records that fail to parse stay in the corpus means and lower SDF validity;
    /// only unreadable input lines count as record errors.
    Geom {
        #[command(flatten)]
        input: SingleInput,
        #[arg(long, value_enum, default_value = "auto")]
        format: StructureFormatArg,
        #[command(flatten)]
        common: Common,
    },
    /// Path, torsion and atom-pair Tanimoto similarity between molecules (field "smiles").
    Fpsim {
        #[command(flatten)]
        input: PairInput,
        #[command(flatten)]
        common: Common,
    },
    /// Instruction records from a molecule corpus.
    Taskgen {
        #[command(flatten)]
        input: SingleInput,
        /// One task name, or `all`.
        #[arg(long, default_value = "all")]
        task: String,
        /// One format name, or `all`.
        #[arg(long, default_value = "all")]
        format: String,
        /// Label each instruction with a molecule-level train/val/test split.
        #[arg(long)]
        split: bool,
        /// Shorthand for `--set seed=N`.
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        common: Common,
    },
    /// Combine reports of the same subcommand; the aggregate is recomputed from all rows.
    Report {
        #[arg(long, num_args = 1.., required = true, value_name = "REPORT")]
        merge: Vec<PathBuf>,
        /// Merged report destination; stdout when omitted.
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
    /// Print the full manual for every subcommand.
    Manual,
}

/// Full help text of every subcommand.
pub fn manual() -> String {
    let mut cmd = Cli::command();
    cmd.build();
    let mut out = String::new();
    out.push_str(&cmd.render_long_help().to_string());
    let names: Vec<String> = cmd.get_subcommands().map(|s| s.get_name().to_string()).collect();
    for name in names {
        let sub = cmd.find_subcommand_mut(&name).expect("listed subcommand");
        out.push_str(&format!("\n\n== specbench {name} ==\n\n"));
        out.push_str(&sub.render_long_help().to_string());
    }
    out.push('\n');
    out
}

/// Runs one invocation and returns the exit status.
pub fn run<I, T>(args: I, env: Vec<(String, String)>, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(stderr, "{text}");
                2
            } else {
                let _ = write!(stdout, "{text}");
                0
            };
        }
    };
    match commands::dispatch(cli.command, env, stdout, stderr) {
        Ok(status) => status,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            2
        }
    }
}
