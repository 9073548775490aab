use clap::Parser;

fn main() {
    let cli = arboreal_cli::Cli::parse();
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    if let Err(e) = arboreal_cli::run(cli, &mut out) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
