use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(cogrowth::cli::run(std::env::args()) as u8)
}
