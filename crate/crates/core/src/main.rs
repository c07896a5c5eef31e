use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(squeeze_dyn::cli::run(std::env::args_os()))
}
