use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(prime_matrix::cli::main_with_args(std::env::args_os()))
}
