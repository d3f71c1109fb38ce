use std::io::Write;
use std::process::ExitCode;

const STACK: usize = 256 * 1024 * 1024;

fn main() -> ExitCode {
    let out = std::thread::Builder::new()
        .stack_size(STACK)
        .spawn(|| clocklam::cli::run(std::env::args_os()))
        .expect("spawn worker thread")
        .join()
        .expect("worker thread panicked");
    let _ = std::io::stdout().write_all(out.stdout.as_bytes());
    let _ = std::io::stderr().write_all(out.stderr.as_bytes());
    ExitCode::from(out.code as u8)
}
