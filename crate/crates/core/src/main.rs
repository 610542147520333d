use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(nonspread::cli::main_entry() as u8)
}
