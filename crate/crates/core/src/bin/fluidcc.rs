use clap::Parser;
use fluidcc::cli::{run, Cli};

fn main() {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
        }
        Err(e) => {
            eprintln!("fluidcc: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
