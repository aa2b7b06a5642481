use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(riesz_spectrum_cli::run(std::env::args_os()))
}
