use clap::Parser;

fn main() {
    let args = peerhol_cli::Args::parse();
    let level = if args.serve { "info" } else { "warn" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    let stdin = std::io::stdin();
    let code = peerhol_cli::run(&args, &mut stdin.lock(), &mut std::io::stdout(), &mut std::io::stderr());
    std::process::exit(code);
}
