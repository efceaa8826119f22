use std::process::ExitCode;

fn main() -> ExitCode {
    if let Err(e) = gpls_cli::init_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(e.exit_code() as u8);
    }
    ExitCode::from(gpls_cli::run_from(std::env::args_os()) as u8)
}
