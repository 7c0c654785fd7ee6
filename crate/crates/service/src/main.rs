use clap::Parser;

use sopcheck_service::cli::{self, Cli, CliError, Command};
use sopcheck_service::server::{self, Loaded};

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Extract(a) => cli::run_extract(&a),
        Command::Train(a) => cli::run_train(&a),
        Command::Cv(a) => cli::run_cv(&a),
        Command::Ablate(a) => cli::run_ablate(&a),
        Command::Predict(a) => cli::run_predict(&a),
        Command::Serve(a) => {
            if !a.model.is_file() {
                return Err(CliError::Usage(format!("model {} not found", a.model.display())));
            }
            let addr = format!("{}:{}", a.host, a.port);
            let runtime = tokio::runtime::Runtime::new()
                .map_err(|e| CliError::Usage(format!("starting runtime: {e}")))?;
            let load = move || {
                cli::load_model(&a.model, &a.resources)
                    .map(|(model, resources)| Loaded { model, resources })
                    .map_err(|e| e.to_string())
            };
            runtime
                .block_on(server::serve(&addr, load))
                .map_err(|e| CliError::Usage(format!("serving on {addr}: {e}")))
        }
    }
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    if let Err(e) = run(Cli::parse()) {
        eprintln!("sopcheck: {e}");
        std::process::exit(e.exit_code());
    }
}
