//! Command-line front end for `semcarto`.
//!
//! [`parse_invocation`] turns an argument vector (plus an optional
//! `--config` file) into a [`RunConfig`]; [`run`] executes it and writes a
//! versioned CSV.

pub mod args;
mod commands;
mod config;
mod output;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::Parser;
use semcarto::ErrorClass;
use thiserror::Error;

pub use args::{Cli, Command};

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub threads: Option<usize>,
    pub output: Option<PathBuf>,
    pub command: Command,
}

#[derive(Debug, Error)]
pub enum CliError {
    /// Argument errors, including `--help` and `--version` requests.
    #[error(transparent)]
    Clap(#[from] clap::Error),
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
    #[error("{command}: {source}")]
    Core {
        command: &'static str,
        #[source]
        source: semcarto::Error,
    },
    #[error("{command}: cannot write output: {source}")]
    Output {
        command: &'static str,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Clap(e) if !e.use_stderr() => 0,
            CliError::Clap(_) | CliError::Usage(_) => 2,
            CliError::Data(_) | CliError::Output { .. } => 3,
            CliError::Core { source, .. } => match source.class() {
                ErrorClass::Data => 3,
                ErrorClass::Numeric => 4,
            },
        }
    }

    /// `error code=<n> class=<usage|data|numeric>: <message>` on one line.
    pub fn one_line(&self) -> String {
        let class = match self.exit_code() {
            2 => "usage",
            4 => "numeric",
            _ => "data",
        };
        let message = match self {
            CliError::Clap(e) => e.render().to_string().lines().next().unwrap_or_default().trim_start_matches("error: ").to_string(),
            other => other.to_string(),
        };
        format!("error code={} class={class}: {}", self.exit_code(), message.replace(['\n', '\r'], " "))
    }
}

pub(crate) fn core(command: &'static str) -> impl Fn(semcarto::Error) -> CliError {
    move |source| CliError::Core { command, source }
}

pub fn parse_invocation<I, S>(argv: I) -> Result<RunConfig, CliError>
where
    I: IntoIterator<Item = S>,
    S: Into<OsString>,
{
    let argv: Vec<String> = argv
        .into_iter()
        .map(|a| a.into().into_string().map_err(|a| CliError::Usage(format!("argument is not UTF-8: {a:?}"))))
        .collect::<Result<_, _>>()?;
    let argv = config::merge(argv)?;
    let cli = Cli::try_parse_from(&argv)?;
    check_paths(&cli.command)?;
    if cli.threads == Some(0) {
        return Err(CliError::Usage("--threads must be at least 1".into()));
    }
    Ok(RunConfig {
        threads: cli.threads,
        output: cli.output,
        command: cli.command,
    })
}

fn check_paths(command: &Command) -> Result<(), CliError> {
    let file = |p: &Path, flag: &str| -> Result<(), CliError> {
        if p.exists() {
            Ok(())
        } else {
            Err(CliError::Usage(format!("{flag}: no such file or directory: {}", p.display())))
        }
    };
    let dtm = |p: &Path, flag: &str| file(&semcarto::dtm::DtmPaths::from_prefix(p).matrix, flag);
    let pairs = |s: &args::PairSource| -> Result<(), CliError> {
        match (&s.pairs, &s.bundled) {
            (Some(p), _) => file(p, "--pairs"),
            (None, Some(_)) => Ok(()),
            (None, None) => Err(CliError::Usage("one of --pairs or --bundled is required".into())),
        }
    };
    let normalize = |n: &args::NormalizeArgs| -> Result<(), CliError> {
        file(&n.corpus, "--corpus")?;
        for (p, flag) in [(&n.meta, "--meta"), (&n.stopwords, "--stopwords"), (&n.contractions, "--contractions")] {
            if let Some(p) = p {
                file(p, flag)?;
            }
        }
        Ok(())
    };
    match command {
        Command::Preprocess(a) => normalize(&a.normalize),
        Command::Intersect(a) => {
            dtm(&a.a, "--a")?;
            dtm(&a.b, "--b")
        }
        Command::Train(a) => normalize(&a.normalize),
        Command::Align(a) => a.emb.iter().try_for_each(|p| file(p, "--emb")),
        Command::Drift(a) => a.emb.iter().try_for_each(|p| file(p, "--emb")),
        Command::Direction(a) => {
            file(&a.emb, "--emb")?;
            pairs(&a.source)
        }
        Command::Project(a) => {
            file(&a.emb, "--emb")?;
            pairs(&a.source)
        }
        Command::Docdist(a) => {
            file(&a.emb, "--emb")?;
            dtm(&a.dtm, "--dtm")?;
            if let Some(p) = &a.against {
                dtm(p, "--against")?;
            }
            if a.method == args::MethodArg::Emd && a.weights == args::WeightsArg::RawCount {
                return Err(CliError::Usage("--method emd requires --weights nbow".into()));
            }
            Ok(())
        }
        Command::Cmd(a) => {
            file(&a.emb, "--emb")?;
            dtm(&a.dtm, "--dtm")?;
            if let Some(p) = &a.concepts {
                file(p, "--concepts")?;
            }
            if a.concept.is_none() && a.compound.is_empty() && a.concepts.is_none() {
                return Err(CliError::Usage("one of --concept, --compound or --concepts is required".into()));
            }
            Ok(())
        }
        Command::Cosine(a) => file(&a.emb, "--emb"),
        Command::Neighbors(a) => {
            if a.k == 0 {
                return Err(CliError::Usage("--k must be at least 1".into()));
            }
            file(&a.emb, "--emb")
        }
    }
}

pub fn run(config: &RunConfig) -> Result<(), CliError> {
    match config.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Usage(format!("--threads: {e}")))?
            .install(|| commands::dispatch(config)),
        None => commands::dispatch(config),
    }
}
