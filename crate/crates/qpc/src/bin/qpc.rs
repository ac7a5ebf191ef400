use std::process::ExitCode;

fn main() -> ExitCode {
    // Die quietly when the output pipe closes (e.g. `qpc leakage | head`)
    // instead of panicking on the broken pipe.
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    qpc::cli::main()
}
