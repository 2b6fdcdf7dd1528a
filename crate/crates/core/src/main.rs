use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(equalizer::cli::run())
}
