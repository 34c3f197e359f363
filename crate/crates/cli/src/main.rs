use std::io;
use std::process::ExitCode;

fn main() -> ExitCode {
    let code = match fsing_cli::parse_job(std::env::args_os()) {
        Ok(spec) => fsing_cli::run_job(&spec, &mut io::stdout().lock(), &mut io::stderr().lock()),
        Err(e) => {
            if e.code == fsing_cli::EXIT_OK {
                print!("{}", e.message);
            } else {
                eprint!("{}", e.message);
                if !e.message.ends_with('\n') {
                    eprintln!();
                }
            }
            e.code
        }
    };
    ExitCode::from(code as u8)
}
