use std::process::ExitCode;

fn main() -> ExitCode {
    idx::cli::main_entry()
}
