//! Command-line front end for the arwave library: argument and config
//! handling, subcommands, result rendering and the self-test.

pub mod commands;
pub mod config;
pub mod oracle;
pub mod output;
pub mod selftest;

use thiserror::Error;

use config::{Command, RunConfig};

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags, config or arguments: exit code 1.
    #[error("{0}")]
    Invalid(String),
    /// Resource limits, numerical failures and I/O: exit code 2.
    #[error("{0}")]
    Failed(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Invalid(_) => 1,
            CliError::Failed(_) => 2,
        }
    }
}

impl From<arwave::Error> for CliError {
    fn from(e: arwave::Error) -> Self {
        match e {
            arwave::Error::InvalidInput(_) | arwave::Error::UndefinedEnergy(_) => CliError::Invalid(e.to_string()),
            arwave::Error::Resource(_) | arwave::Error::Numerical(_) => CliError::Failed(e.to_string()),
        }
    }
}

fn dispatch(cfg: &RunConfig) -> Result<(), CliError> {
    match cfg.command {
        Command::Lattice => commands::lattice(cfg),
        Command::Kappa => commands::kappa(cfg),
        Command::Regions => commands::regions(cfg),
        Command::Riesz => commands::riesz(cfg),
        Command::Gsum => commands::gsum(cfg),
        Command::Krbound => commands::krbound(cfg),
        Command::Simulate => commands::simulate(cfg),
        Command::Sweep => commands::sweep(cfg),
        Command::Selftest => {
            if selftest::run_and_print(&selftest::library_g) {
                Ok(())
            } else {
                Err(CliError::Failed("self-test failed".into()))
            }
        }
    }
}

/// Run with `argv` minus the program name; returns the exit code.
pub fn run(args: &[String]) -> i32 {
    let result = RunConfig::from_args(args).and_then(|cfg| {
        let threads: usize = cfg.required("threads")?;
        if threads > 0 {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build_global()
                .map_err(|e| CliError::Failed(format!("cannot start thread pool: {e}")))?;
        }
        dispatch(&cfg)
    });
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("arwave: {e}");
            if e.exit_code() == 1 {
                eprintln!("{}", config::usage());
            }
            e.exit_code()
        }
    }
}
