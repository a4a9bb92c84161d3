use clap::Parser;

fn main() {
    let cli = molsig_cli::Cli::parse();
    if let Err(e) = molsig_cli::execute(cli) {
        eprintln!("{}", e.to_json());
        std::process::exit(e.exit_code);
    }
}
