use clap::Parser;
use thinlevy_lab::cli::Cli;

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    // clap exits with 2 on usage errors and 0 on --help/--version
    let cli = Cli::parse();
    if let Err(e) = thinlevy_lab::commands::run(&cli) {
        eprintln!("thinlevy {}: {e}", cli.command.name());
        std::process::exit(e.exit_code());
    }
}
