//! `hamsearch` command-line tools and HTTP service.
//!
//! The binary wires the [`hamsearch`] core crate to a workflow:
//! `synth` → `partition` → `build` → `query`/`serve`/`eval`/`bench`, plus
//! `export-es` for deploying the same search onto an external engine.
//! [`exit_code_for`] maps error classes to distinct process exit codes so
//! scripts can tell input problems from broken index files.

pub mod args;
pub mod commands;
pub mod service;

pub use args::{Cli, Command};

/// CLI-level input contradictions (not produced by the core crate).
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
}

pub fn run(cli: Cli) -> anyhow::Result<()> {
    match &cli.command {
        Command::Synth(args) => commands::run_synth(args),
        Command::Partition(args) => commands::run_partition(args),
        Command::Build(args) => commands::run_build(args),
        Command::Query(args) => commands::run_query(args),
        Command::Eval(args) => commands::run_eval(args),
        Command::Bench(args) => commands::run_bench(args),
        Command::ExportEs(args) => commands::run_export_es(args),
        Command::Serve(args) => {
            let config = service::ServiceConfig::resolve(args)?;
            service::run_serve(config)
        }
    }
}

/// Process exit codes: 0 success, 1 unclassified, 2 usage (from clap),
/// 3 I/O, 4 malformed input, 5 unreadable index file, 6 operation
/// conflicts with index state.
pub fn exit_code_for(err: &anyhow::Error) -> i32 {
    use hamsearch::Error;
    for cause in err.chain() {
        if let Some(CliError::Input(_)) = cause.downcast_ref::<CliError>() {
            return 4;
        }
        if let Some(core) = cause.downcast_ref::<Error>() {
            return match core {
                Error::Io(_) => 3,
                Error::BadMagic
                | Error::UnsupportedVersion(_)
                | Error::Truncated
                | Error::ChecksumMismatch
                | Error::CorruptIndex(_) => 5,
                Error::DuplicateDocId(_)
                | Error::ShortCodeMismatch(_)
                | Error::UnknownDocId(_)
                | Error::LongPostingsUnavailable
                | Error::TooManyDocuments => 6,
                _ => 4,
            };
        }
        if cause.downcast_ref::<std::io::Error>().is_some() {
            return 3;
        }
    }
    1
}
