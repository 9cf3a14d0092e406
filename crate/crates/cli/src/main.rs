use std::io::Write;

use catgal::{run, Cli};
use clap::Parser;

fn main() {
    let argv: Vec<String> = std::env::args().collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        // Help and version exit 0; usage errors exit 2.
        Err(e) => e.exit(),
    };
    let r = run(&cli, &argv[1..]);
    std::io::stdout().write_all(r.stdout.as_bytes()).ok();
    std::io::stderr().write_all(r.stderr.as_bytes()).ok();
    std::process::exit(r.code);
}
