use std::process::ExitCode;

use clap::Parser;

#[global_allocator]
static ALLOC: confrule::PeakAlloc = confrule::PeakAlloc;

fn main() -> ExitCode {
    match confrule_cli::run(confrule_cli::Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
