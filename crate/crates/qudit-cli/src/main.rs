use std::io::Write;
use std::process::ExitCode;

fn main() -> ExitCode {
    let (code, out, err) = qudit_cli::run_args(std::env::args_os());
    print!("{out}");
    eprint!("{err}");
    let _ = std::io::stdout().flush();
    ExitCode::from(code as u8)
}
