use clap::Parser;

fn main() {
    let cli = multex::cli::Cli::parse();
    let code = match multex::cli::run(cli) {
        Ok(code) => code,
        Err(error) => {
            eprintln!("error: {error}");
            2
        }
    };
    std::process::exit(code);
}
