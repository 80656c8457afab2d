use clap::Parser;
use tpoly_tool::{run, Cli};

fn main() {
    let code = match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("tpoly: {e}");
            e.exit_code()
        }
    };
    std::process::exit(code);
}
