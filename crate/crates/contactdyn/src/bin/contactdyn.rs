use std::process::ExitCode;

fn main() -> ExitCode {
    contactdyn::cli::run()
}
