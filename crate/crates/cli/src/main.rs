use std::process::ExitCode;

fn main() -> ExitCode {
    oscul_cli::run::main_entry()
}
