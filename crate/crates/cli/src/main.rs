use clap::Parser;
use relfilter_cli::cli::Cli;
use relfilter_cli::error::EXIT_USAGE;

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();

    if let Err(e) = relfilter_cli::commands::run(cli) {
        log::debug!("{e:?}");
        eprintln!("{}", e.to_json());
        std::process::exit(e.exit_code());
    }
}
