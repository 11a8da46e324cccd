use std::process::ExitCode;

fn main() -> ExitCode {
    match perctrunc::harness::cli::main_with_args(std::env::args_os()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let class = e.class();
            eprintln!("error[{}]: {e}", class.name());
            ExitCode::from(class.exit_code() as u8)
        }
    }
}
