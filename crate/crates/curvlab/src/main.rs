use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(curvlab::cli::run_from(std::env::args_os(), &mut std::io::stdout()))
}
