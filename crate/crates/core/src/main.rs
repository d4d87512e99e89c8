use std::io::Write;
use std::thread;

/// The successor procedures recurse deeply; give them room.
const STACK_BYTES: usize = 512 << 20;

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let code = thread::Builder::new()
        .stack_size(STACK_BYTES)
        .spawn(move || {
            let stdout = std::io::stdout();
            let stderr = std::io::stderr();
            let mut out = stdout.lock();
            let mut err = stderr.lock();
            let code = fusible_core::cli::run(args, &mut out, &mut err);
            let _ = out.flush();
            code
        })
        .expect("spawn worker thread")
        .join()
        .unwrap_or(101);
    std::process::exit(code);
}
