use std::io;

fn main() {
    let code = nmfbench::cli::run_cli(std::env::args_os().collect(), &mut io::stdout(), &mut io::stderr());
    std::process::exit(code);
}
