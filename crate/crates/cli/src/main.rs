use phasecode_cli::{run_from_args, RunError};

fn main() {
    let argv: Vec<String> = std::env::args().collect();
    match run_from_args(argv) {
        Ok(()) => {}
        Err(RunError::Usage(e)) => e.exit(),
        Err(RunError::Command(e)) => {
            eprintln!("error: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
