use std::process::ExitCode;

fn main() -> ExitCode {
    curvlab::cli::run(std::env::args_os())
}
