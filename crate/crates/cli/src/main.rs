use clap::Parser;

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let result = agn_cli::app::run(agn_cli::app::Cli::parse());
    if let Err(e) = &result {
        eprintln!("error: {e:#}");
    }
    std::process::exit(agn_cli::app::exit_code(&result));
}
