use clap::Parser;
use shoebox_cli::{run, Cli};

fn main() {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(manifest) => {
            for name in &manifest.outputs {
                println!("{}", cli.global.out.join(name).display());
            }
        }
        Err(e) => {
            eprintln!("shoebox: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
