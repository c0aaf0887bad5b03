// `!(x > 0.0)` is used deliberately so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;

mod args;
mod commands;
mod error;
mod output;

use args::Cli;
use error::{CliError, CliResult};
use output::{Manifest, FORMAT_VERSION};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("hcwalk: {e}");
            e.exit_code()
        }
    }
}

fn run(cli: Cli) -> CliResult<()> {
    let command = match (cli.command, &cli.from_manifest) {
        (Some(c), None) => c,
        (None, Some(path)) => Manifest::read(path)?.command,
        _ => {
            return Err(CliError::Usage(
                "give a subcommand or --from-manifest".into(),
            ))
        }
    };
    let threads = cli.threads.unwrap_or(0);
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Usage(format!("thread pool: {e}")))?;

    std::fs::create_dir_all(&cli.out)?;
    let started = Instant::now();
    let outcome = commands::run(&command, &cli.out)?;
    let manifest = Manifest {
        format_version: FORMAT_VERSION,
        tool_version: env!("CARGO_PKG_VERSION").into(),
        command,
        threads: rayon::current_num_threads(),
        master_seed: outcome.master_seed,
        failures: outcome.failures,
        wall_time_seconds: started.elapsed().as_secs_f64(),
        outputs: outcome.outputs,
        notes: outcome.notes,
        summary: outcome.summary,
    };
    let path = manifest.write(&cli.out)?;
    eprintln!(
        "hcwalk {}: wrote {} and {} in {:.2} s",
        manifest.command.name(),
        manifest.outputs.join(", "),
        path.display(),
        manifest.wall_time_seconds
    );
    Ok(())
}
