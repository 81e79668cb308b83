use std::process::ExitCode;

fn main() -> ExitCode {
    stagehunt::cli::run()
}
