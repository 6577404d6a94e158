use clap::Parser;

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    let cli = trademap_cli::Cli::parse();
    if let Err(err) = trademap_cli::run(cli) {
        eprintln!("error: {err:#}");
        std::process::exit(trademap_cli::exit_code(&err));
    }
}
