use std::process::ExitCode;

fn main() -> ExitCode {
    netres::cli::main_with_args(std::env::args_os())
}
