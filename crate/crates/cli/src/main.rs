use clap::Parser;

fn main() {
    let cli = spix_cli::Cli::parse();
    match spix_cli::run(cli) {
        Ok(code) => std::process::exit(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            std::process::exit(2);
        }
    }
}
