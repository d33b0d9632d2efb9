use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(bmw_core::cli::main_with_args(std::env::args_os()))
}
