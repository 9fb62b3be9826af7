use clap::Parser;

fn main() {
    let cli = surroscreen_cli::Cli::parse();
    match surroscreen_cli::run(cli.command) {
        Ok(()) => {}
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
