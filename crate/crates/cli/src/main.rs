// `!(x > 0.0)` deliberately rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod args;
mod config;
mod error;
mod models;
mod reports;
mod table;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command, OracleCommand};
use error::CliError;
use models::Run;

fn init_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("QCHAN_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| CliError::Config(format!("QCHAN_THREADS: '{raw}' is not a positive integer")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Config(format!("QCHAN_THREADS: {e}")))
}

fn emit(run: Run) -> Result<(), CliError> {
    table::emit(&run.table, run.format, run.out.as_deref())
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    init_threads()?;
    match cli.command {
        Command::DepolSpinbath(a) => emit(models::depol_spinbath(&a)?),
        Command::DepolClassical(a) => emit(models::depol_classical(&a)?),
        Command::DephasingQuantum(a) => emit(models::dephasing_quantum(&a)?),
        Command::DephasingClassical(a) => emit(models::dephasing_classical(&a)?),
        Command::AmpDamping(a) => emit(models::amp_damping(&a)?),
        Command::Analyze(a) => reports::analyze(&a),
        Command::Reproduce(a) => {
            let path = reports::reproduce(&a)?;
            println!("{}", path.display());
            Ok(())
        }
        Command::Oracle(OracleCommand::SpinBath(a)) => emit(reports::oracle_spin_bath(&a)?),
        Command::Oracle(OracleCommand::SingleExcitation(a)) => emit(reports::oracle_single_excitation(&a)?),
        Command::Oracle(OracleCommand::Dephasing(a)) => emit(reports::oracle_dephasing(&a)?),
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        // A closed pipe downstream (e.g. `| head`) is not a failure.
        Err(e) if e.is_broken_pipe() => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
