use std::process::ExitCode;

fn main() -> ExitCode {
    match hqrl_cli::run(std::env::args_os()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("hqrl: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
