use clap::Parser;

fn main() {
    // Die silently when a downstream pipe closes early (`hamsearch query … |
    // head`), like standard Unix tools, instead of panicking on the next
    // print. Rust ignores SIGPIPE by default; restore the default action.
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }

    let cli = hamsearch_cli::Cli::parse();
    if let Err(err) = hamsearch_cli::run(cli) {
        eprintln!("error: {err:#}");
        std::process::exit(hamsearch_cli::exit_code_for(&err));
    }
}
