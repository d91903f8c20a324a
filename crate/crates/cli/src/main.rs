use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(ctmc_mlmc_cli::cli::main_from(std::env::args_os()))
}
